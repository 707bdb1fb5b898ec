use super::{SeriesControl, SeriesValue, Stop};
use crate::error::{Error, Result};

/// Rising factorial (x)_n = x (x+1) ... (x+n-1), with (x)_0 = 1.
pub fn pochhammer(x: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, k| acc * (x + k as f64))
}

/// Kummer's confluent hypergeometric function ₁F₁(a; b; x) for integer b ≥ 1.
///
/// Summed term by term as Σ (a)_n x^n / (n! (b)_n). The series stops once
/// the terms are shrinking and the latest one is below `ctl.rel_tol` times
/// the partial sum. A terminating series (a a non-positive integer) is
/// summed exactly. Intended for x ≥ 0, where every term has the same sign
/// for a > 0; negative x is accepted but suffers cancellation for large |x|.
pub fn confluent_1f1(a: f64, b: u32, x: f64, ctl: &SeriesControl) -> Result<SeriesValue> {
    ctl.validate()?;
    if b == 0 {
        return Err(Error::domain(
            "confluent_1f1",
            "b must be a positive integer",
        ));
    }
    if !a.is_finite() || !x.is_finite() {
        return Err(Error::domain(
            "confluent_1f1",
            format!("arguments must be finite, got a = {a}, x = {x}"),
        ));
    }
    let b = b as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..ctl.max_terms {
        let nf = n as f64;
        let ratio = (a + nf) * x / ((nf + 1.0) * (b + nf));
        if ratio == 0.0 {
            return Ok(SeriesValue {
                value: sum,
                terms: n + 1,
                stop: Stop::Exhausted,
            });
        }
        term *= ratio;
        sum += term;
        if !sum.is_finite() {
            return Err(Error::Overflow {
                func: "confluent_1f1",
                detail: format!("partial sum overflowed after {} terms", n + 2),
            });
        }
        if ratio.abs() < 1.0 && term.abs() < ctl.rel_tol * sum.abs() {
            return Ok(SeriesValue {
                value: sum,
                terms: n + 2,
                stop: Stop::RelTol,
            });
        }
    }
    Err(Error::NonConvergence {
        func: "confluent_1f1",
        partial: sum,
        terms: ctl.max_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pochhammer_small_cases() {
        assert_eq!(pochhammer(7.3, 0), 1.0);
        assert_eq!(pochhammer(3.0, 2), 12.0);
        assert!((pochhammer(2.5, 3) - 39.375).abs() < 1e-12);
    }

    #[test]
    fn kummer_at_zero_is_one() {
        let v = confluent_1f1(5.8, 2, 0.0, &SeriesControl::default()).unwrap();
        assert_eq!(v.value, 1.0);
        assert_eq!(v.stop, Stop::Exhausted);
    }

    #[test]
    fn kummer_one_one_is_exponential() {
        let ctl = SeriesControl::default();
        for &x in &[0.1, 1.0, 5.0, 20.0] {
            let v = confluent_1f1(1.0, 1, x, &ctl).unwrap();
            assert!((v.value / x.exp() - 1.0).abs() < 1e-12, "x = {x}");
            assert_eq!(v.stop, Stop::RelTol);
        }
    }

    #[test]
    fn terminating_series_is_polynomial() {
        // 1F1(-2; 1; x) = 1 - 2x + x^2/2 (Laguerre L_2)
        let x = 3.0;
        let v = confluent_1f1(-2.0, 1, x, &SeriesControl::default()).unwrap();
        assert!((v.value - (1.0 - 2.0 * x + x * x / 2.0)).abs() < 1e-12);
        assert_eq!(v.stop, Stop::Exhausted);
    }

    #[test]
    fn term_cap_is_reported() {
        let ctl = SeriesControl::new(1e-12, 5).unwrap();
        match confluent_1f1(1.0, 1, 50.0, &ctl) {
            Err(Error::NonConvergence { terms, partial, .. }) => {
                assert_eq!(terms, 5);
                assert!(partial > 1.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
