use super::gamma::{gamma_p, gamma_q, ln_gamma};
use crate::error::{Error, Result};

/// Half-width of the Poisson window in standard deviations (plus a constant).
const WINDOW_SIGMAS: f64 = 12.0;

/// First-order Marcum Q together with its complement, each computed without
/// cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarcumPair {
    /// Q₁(α, β)
    pub q: f64,
    /// 1 - Q₁(α, β)
    pub complement: f64,
    /// Number of Poisson-mixture terms summed.
    pub terms: usize,
    /// Poisson mass outside the summation window; bounds the absolute
    /// truncation error of both `q` and `complement`.
    pub truncation_bound: f64,
}

/// First-order Marcum Q function Q₁(α, β).
pub fn marcum_q1(alpha: f64, beta: f64) -> Result<f64> {
    Ok(marcum_q1_pair(alpha, beta)?.q)
}

/// Q₁(α, β) and 1 - Q₁(α, β) from the Poisson-mixture representation
///
/// Q₁(α, β) = Σ_k e^{-α²/2} (α²/2)^k / k! · Q(k+1, β²/2),
///
/// where Q is the regularized upper incomplete gamma function. Only the
/// terms with k within 12 standard deviations (plus 12) of α²/2 are summed;
/// `truncation_bound` is a Chernoff bound on the Poisson mass left out. Q(k+1, ·) is advanced upward and P(k+1, ·) downward by
/// adding positive increments, so neither tail loses relative accuracy.
pub fn marcum_q1_pair(alpha: f64, beta: f64) -> Result<MarcumPair> {
    if !(alpha >= 0.0) || !(beta >= 0.0) || !alpha.is_finite() {
        return Err(Error::domain(
            "marcum_q1",
            format!("need finite alpha >= 0 and beta >= 0, got ({alpha}, {beta})"),
        ));
    }
    if beta == 0.0 {
        return Ok(MarcumPair {
            q: 1.0,
            complement: 0.0,
            terms: 0,
            truncation_bound: 0.0,
        });
    }
    if beta.is_infinite() {
        return Ok(MarcumPair {
            q: 0.0,
            complement: 1.0,
            terms: 0,
            truncation_bound: 0.0,
        });
    }
    let lam = 0.5 * alpha * alpha;
    let mu = 0.5 * beta * beta;
    if lam == 0.0 {
        let q = (-mu).exp();
        return Ok(MarcumPair {
            q,
            complement: -(-mu).exp_m1(),
            terms: 1,
            truncation_bound: 0.0,
        });
    }

    let half = WINDOW_SIGMAS * lam.sqrt() + WINDOW_SIGMAS;
    let k_lo = (lam - half).floor().max(0.0) as usize;
    let k_hi = (lam + half).ceil() as usize;
    let n = k_hi - k_lo + 1;

    // Poisson(λ) weights over the window, by recurrence from a log-space seed,
    // renormalized to remove the rounding drift of the recurrence.
    let mut weights = Vec::with_capacity(n);
    let mut w = (-lam + k_lo as f64 * lam.ln() - ln_gamma(k_lo as f64 + 1.0)).exp();
    for k in k_lo..=k_hi {
        weights.push(w);
        w *= lam / (k as f64 + 1.0);
    }
    let mass: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= mass);
    let truncation_bound = poisson_tail_bound(lam, k_lo, k_hi);

    // Poisson(μ) pmf at k+1, used as the increment between neighbouring orders.
    // Kept in log space: the pmf may underflow at one end of the window and
    // be significant at the other.
    let ln_mu = mu.ln();
    let ln_pmf = |j: usize| -mu + j as f64 * ln_mu - ln_gamma(j as f64 + 1.0);

    let mut q = 0.0;
    let mut upper = gamma_q(k_lo as f64 + 1.0, mu)?;
    let mut ln_inc = ln_pmf(k_lo + 1);
    for (i, wk) in weights.iter().enumerate() {
        q += wk * upper;
        let k = k_lo + i;
        upper += ln_inc.exp();
        ln_inc += ln_mu - (k as f64 + 2.0).ln();
    }

    let mut complement = 0.0;
    let mut lower = gamma_p(k_hi as f64 + 1.0, mu)?;
    let mut ln_inc = ln_pmf(k_hi);
    for (i, wk) in weights.iter().enumerate().rev() {
        complement += wk * lower;
        let k = k_lo + i;
        lower += ln_inc.exp();
        if k > 0 {
            ln_inc += (k as f64).ln() - ln_mu;
        }
    }

    Ok(MarcumPair {
        q: q.clamp(0.0, 1.0),
        complement: complement.clamp(0.0, 1.0),
        terms: n,
        truncation_bound,
    })
}

/// Chernoff bound on the Poisson(λ) mass outside [k_lo, k_hi].
fn poisson_tail_bound(lam: f64, k_lo: usize, k_hi: usize) -> f64 {
    // P(K >= t) <= e^{-λ} (eλ/t)^t for t > λ, and likewise P(K <= t) for t < λ.
    let chernoff = |t: f64| (-lam + t * (1.0 + lam.ln() - t.ln())).exp();
    let upper = chernoff(k_hi as f64 + 1.0);
    let lower = if k_lo == 0 {
        0.0
    } else {
        chernoff(k_lo as f64 - 1.0)
    };
    upper + lower
}

/// Rice Ie function,
///
/// Ie(v, t) = [Q₁(√(v₁t), √(v₂t)) - Q₁(√(v₂t), √(v₁t))] / √(1 - v²),
///
/// with v₁ = 1 + √(1 - v²) and v₂ = 1 - √(1 - v²).
pub fn rice_ie(v: f64, t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&v) {
        return Err(Error::domain(
            "rice_ie",
            format!("need 0 <= v < 1, got {v}"),
        ));
    }
    if !(t >= 0.0) {
        return Err(Error::domain("rice_ie", format!("need t >= 0, got {t}")));
    }
    let s = (1.0 - v * v).sqrt();
    let (a, b) = ie_arguments(v, t);
    // Q(a,b) - Q(b,a): use the complement of the first term when it is the
    // smaller tail.
    let ab = marcum_q1_pair(a, b)?;
    let ba = marcum_q1_pair(b, a)?;
    let diff = if ab.complement < ab.q {
        1.0 - ab.complement - ba.q
    } else {
        ab.q - ba.q
    };
    Ok(diff.max(0.0) / s)
}

/// The Marcum arguments (√(v₁t), √(v₂t)) of the Rice Ie function.
pub(crate) fn ie_arguments(v: f64, t: f64) -> (f64, f64) {
    let s = (1.0 - v * v).sqrt();
    let v1 = 1.0 + s;
    // 1 - √(1-v²) written without cancellation for small v
    let v2 = v * v / (1.0 + s);
    ((v1 * t).sqrt(), (v2 * t).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_values() {
        assert_eq!(marcum_q1(1.3, 0.0).unwrap(), 1.0);
        for &b in &[0.1, 1.0, 3.0, 8.0] {
            let q = marcum_q1(0.0, b).unwrap();
            assert!((q - (-b * b / 2.0f64).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn pair_is_complementary() {
        for &(a, b) in &[(1.0, 2.0), (5.0, 4.0), (30.0, 31.0), (0.2, 10.0)] {
            let p = marcum_q1_pair(a, b).unwrap();
            assert!((p.q + p.complement - 1.0).abs() < 1e-12, "({a}, {b})");
            assert!(p.truncation_bound < 1e-20, "{}", p.truncation_bound);
        }
    }

    #[test]
    fn rice_ie_edges() {
        assert_eq!(rice_ie(0.4, 0.0).unwrap(), 0.0);
        for &t in &[0.01, 0.5, 3.0, 20.0] {
            let ie = rice_ie(0.0, t).unwrap();
            assert!((ie - (1.0 - (-t).exp())).abs() < 1e-14, "t = {t}");
        }
        assert!(rice_ie(1.0, 1.0).is_err());
        assert!(rice_ie(-0.1, 1.0).is_err());
    }
}
