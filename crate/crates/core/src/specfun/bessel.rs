use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 50.0;

/// Modified Bessel function of the first kind, order zero.
///
/// Fails with an overflow error once e^{|x|} growth leaves the f64 range
/// (|x| above roughly 713).
pub fn bessel_i0(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::domain("bessel_i0", "argument is NaN"));
    }
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        return Ok(power_series(ax));
    }
    let v = ax.exp() * asymptotic_scaled(ax);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow {
            func: "bessel_i0",
            detail: format!("I0({x}) exceeds the f64 range"),
        })
    }
}

/// Exponentially scaled I₀: returns e^{-|x|} I₀(x), finite for every finite x.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        power_series(ax) * (-ax).exp()
    } else {
        asymptotic_scaled(ax)
    }
}

/// Σ (x²/4)^k / (k!)², all terms positive.
fn power_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        sum += term;
        if term < sum * 1e-17 {
            return sum;
        }
        k += 1.0;
    }
}

/// Large-argument expansion of e^{-x} I₀(x) for x > 50.
fn asymptotic_scaled(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = term * odd * odd / (8.0 * k as f64 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(bessel_i0(0.0).unwrap(), 1.0);
        assert!((bessel_i0(1.0).unwrap() - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((bessel_i0(-1.0).unwrap() - bessel_i0(1.0).unwrap()).abs() == 0.0);
    }

    #[test]
    fn branches_meet_continuously() {
        let below = bessel_i0_scaled(SERIES_LIMIT);
        let above = bessel_i0_scaled(f64::from_bits(SERIES_LIMIT.to_bits() + 1));
        assert!((below / above - 1.0).abs() < 1e-13);
    }

    #[test]
    fn overflow_is_signalled() {
        assert!(bessel_i0(700.0).is_ok());
        assert!(matches!(bessel_i0(720.0), Err(Error::Overflow { .. })));
        assert!(bessel_i0_scaled(1e6).is_finite());
    }
}
