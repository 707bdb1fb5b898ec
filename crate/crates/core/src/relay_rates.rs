//! End-to-end decode-and-forward rates.
//!
//! With an unlimited buffer the relay rate is the smaller of the two hop
//! ergodic rates. Without a buffer it is E[min(C_RF, C_FSO)], approximated
//! for many users by replacing C_RF with its mean C̄:
//!
//! E[min(C̄, C_FSO)] = E[C_FSO 1(C_FSO ≤ C̄)] + C̄ (1 - F(C̄)).

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fso_link::{
    conditional_fso_expectation_numeric, fso_ergodic_rate_high, fso_ergodic_rate_numeric,
    fso_rate_cdf, FsoChannel, SnrRegime, DEFAULT_LOW_SNR_TERMS,
};
use crate::quad::{integrate, DEFAULT_QUAD_TOL};

/// Relative difference below which both hops count as equally limiting.
const BALANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bottleneck {
    Rf,
    Fso,
    Balanced,
}

/// Which expression produced an FSO-side rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FsoMethod {
    LowSnrSeries,
    HighSnrApprox,
    /// No closed form applies (1 ≤ γ̄ < 10); adaptive quadrature was used.
    Numeric,
}

impl FsoMethod {
    pub fn for_regime(regime: SnrRegime) -> Self {
        match regime {
            SnrRegime::Low => FsoMethod::LowSnrSeries,
            SnrRegime::Mid => FsoMethod::Numeric,
            SnrRegime::High => FsoMethod::HighSnrApprox,
        }
    }
}

/// Numerical settings for the FSO-side expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct FsoRateOptions {
    /// Taylor terms in the low-SNR series.
    pub low_snr_terms: usize,
    pub quad_tol: f64,
    /// Evaluate the high-SNR form below γ̄ = 10 with a warning instead of an
    /// error.
    pub allow_regime_override: bool,
}

impl Default for FsoRateOptions {
    fn default() -> Self {
        FsoRateOptions {
            low_snr_terms: DEFAULT_LOW_SNR_TERMS,
            quad_tol: DEFAULT_QUAD_TOL,
            allow_regime_override: false,
        }
    }
}

/// Buffer-aided rate min(C̄_RF, C̄_FSO) and the limiting hop.
pub fn ba_rate(c_rf: f64, c_fso: f64) -> Result<(f64, Bottleneck)> {
    if !(c_rf >= 0.0 && c_fso >= 0.0) {
        return Err(Error::domain(
            "ba_rate",
            format!("rates must be non-negative, got ({c_rf}, {c_fso})"),
        ));
    }
    let scale = c_rf.max(c_fso);
    let bottleneck = if (c_rf - c_fso).abs() <= BALANCE_TOL * scale {
        Bottleneck::Balanced
    } else if c_rf < c_fso {
        Bottleneck::Rf
    } else {
        Bottleneck::Fso
    };
    Ok((c_rf.min(c_fso), bottleneck))
}

/// Hoyt constants (δ, b) and the prefactor (1+m²)/(2πmΩ).
fn hoyt_constants(ch: &FsoChannel) -> (f64, f64, f64) {
    let (m, omega) = (ch.hoyt.m, ch.hoyt.omega);
    let m2 = m * m;
    let delta = (1.0 + m2).powi(2) / (4.0 * m2 * omega);
    let b = (1.0 - m2 * m2) / (4.0 * m2 * omega);
    (delta, b, (1.0 + m2) / (2.0 * PI * m * omega))
}

fn deterministic_conditional(c: f64, ch: &FsoChannel) -> f64 {
    let cmax = ch.max_rate();
    if cmax <= c {
        cmax
    } else {
        0.0
    }
}

/// E[C_FSO 1(C_FSO ≤ c)] in the low-SNR regime.
///
/// Each Taylor term becomes a finite integral
/// ∫₀^π e^{-(a - b cos t)χ} / (a - b cos t) dt, a = 4ℓ/(k_g w²) + δ,
/// obtained from the integral form of I₀.
pub fn conditional_fso_expectation_low(
    c: f64,
    ch: &FsoChannel,
    n_terms: usize,
    quad_tol: f64,
) -> Result<f64> {
    if ch.snr.gamma_bar >= 1.0 {
        return Err(Error::Regime(format!(
            "low-SNR expression needs gamma_bar < 1, got {}",
            ch.snr.gamma_bar
        )));
    }
    if c <= 0.0 {
        return Ok(0.0);
    }
    if ch.hoyt.is_deterministic() {
        return Ok(deterministic_conditional(c, ch));
    }
    let chi = ch.chi(c);
    if chi == 0.0 {
        // The condition never binds: the unconditional series applies exactly.
        return crate::fso_link::fso_ergodic_rate_low(ch, n_terms);
    }
    let (delta, b, pref) = hoyt_constants(ch);
    let gb2 = ch.snr.gamma_bar * ch.snr.gamma_bar;
    let spread = ch.gml.spread();
    let mut sum = 0.0;
    let mut power = 1.0;
    for l in 1..=n_terms {
        let lf = l as f64;
        power *= gb2;
        let a = 4.0 * lf / spread + delta;
        debug_assert!(a > b);
        let inner = integrate(
            |t: f64| {
                let d = a - b * t.cos();
                (-d * chi).exp() / d
            },
            0.0,
            PI,
            quad_tol,
        )?;
        let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * power / lf * inner;
    }
    Ok(0.5 * ch.params.bandwidth / LN_2 * pref * sum)
}

/// E[C_FSO 1(C_FSO ≤ c)] in the high-SNR regime, using
/// C ≈ (W/2)(log₂ γ̄² - 4u²/(ln 2 · k_g w²)).
pub fn conditional_fso_expectation_high(
    c: f64,
    ch: &FsoChannel,
    quad_tol: f64,
    allow_outside: bool,
) -> Result<f64> {
    if ch.snr.gamma_bar < crate::fso_link::HIGH_SNR_THRESHOLD {
        let msg = format!(
            "high-SNR expression needs gamma_bar >= 10, got {}",
            ch.snr.gamma_bar
        );
        if !allow_outside {
            return Err(Error::Regime(msg));
        }
        log::warn!("{msg}");
    }
    if c <= 0.0 {
        return Ok(0.0);
    }
    if ch.hoyt.is_deterministic() {
        return Ok(deterministic_conditional(c, ch));
    }
    let chi = ch.chi(c);
    if chi == 0.0 {
        return fso_ergodic_rate_high(ch, allow_outside);
    }
    let (delta, b, _) = hoyt_constants(ch);
    let (m, omega) = (ch.hoyt.m, ch.hoyt.omega);
    let spread = ch.gml.spread();
    let tail = fso_rate_cdf(c, ch)?;
    let inner = integrate(
        |t: f64| {
            let d = delta - b * t.cos();
            (-d * chi).exp() * (1.0 + chi * d) / (d * d)
        },
        0.0,
        PI,
        quad_tol,
    )?;
    let gb2 = ch.snr.gamma_bar * ch.snr.gamma_bar;
    let moment = 2.0 * (1.0 + m * m) / (PI * spread * m * omega) * inner;
    Ok(0.5 * ch.params.bandwidth / LN_2 * (gb2.ln() * tail - moment))
}

/// Non-buffer-aided rate E[C_FSO 1(C_FSO ≤ C̄)] + C̄ (1 - F(C̄)) with the
/// conditional expectation matching `regime`.
///
/// The mid regime has no closed form and uses adaptive quadrature.
/// `regime` must agree with the channel's own classification.
pub fn nonba_rate_analytic(
    c_rf_bar: f64,
    ch: &FsoChannel,
    regime: SnrRegime,
    opts: &FsoRateOptions,
) -> Result<f64> {
    if regime != ch.snr.regime {
        return Err(Error::Regime(format!(
            "requested {regime:?} but gamma_bar = {} is {:?}",
            ch.snr.gamma_bar, ch.snr.regime
        )));
    }
    if !(c_rf_bar >= 0.0) {
        return Err(Error::domain(
            "nonba_rate_analytic",
            "C_RF must be non-negative",
        ));
    }
    if c_rf_bar == 0.0 {
        return Ok(0.0);
    }
    let cond = match regime {
        SnrRegime::Low => {
            conditional_fso_expectation_low(c_rf_bar, ch, opts.low_snr_terms, opts.quad_tol)?
        }
        SnrRegime::High => conditional_fso_expectation_high(
            c_rf_bar,
            ch,
            opts.quad_tol,
            opts.allow_regime_override,
        )?,
        SnrRegime::Mid => conditional_fso_expectation_numeric(c_rf_bar, ch, opts.quad_tol)?,
    };
    if c_rf_bar.is_infinite() {
        return Ok(cond);
    }
    let cdf = fso_rate_cdf(c_rf_bar, ch)?;
    Ok(cond + c_rf_bar * (1.0 - cdf))
}

/// FSO ergodic rate from the expression that matches the SNR regime.
pub fn fso_rate_for_regime(ch: &FsoChannel, opts: &FsoRateOptions) -> Result<f64> {
    match ch.snr.regime {
        SnrRegime::Low => crate::fso_link::fso_ergodic_rate_low(ch, opts.low_snr_terms),
        SnrRegime::Mid => fso_ergodic_rate_numeric(ch, opts.quad_tol),
        SnrRegime::High => fso_ergodic_rate_high(ch, opts.allow_regime_override),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndToEndReport {
    /// C̄_RF (bit/s).
    pub c_rf: f64,
    /// C̄_FSO from the regime-matched expression (bit/s).
    pub c_fso: f64,
    /// C̄_FSO by adaptive quadrature (bit/s).
    pub c_fso_numeric: f64,
    /// Buffer-aided rate (bit/s).
    pub c_ba: f64,
    /// Non-buffer-aided rate (bit/s).
    pub c_nb: f64,
    pub gamma_bar: f64,
    pub regime: SnrRegime,
    pub method: FsoMethod,
    pub bottleneck: Bottleneck,
}

/// Combines an RF ergodic sum rate with the FSO channel statistics.
pub fn end_to_end(c_rf: f64, ch: &FsoChannel, opts: &FsoRateOptions) -> Result<EndToEndReport> {
    let c_fso = fso_rate_for_regime(ch, opts)?;
    let c_fso_numeric = fso_ergodic_rate_numeric(ch, opts.quad_tol)?;
    let (c_ba, bottleneck) = ba_rate(c_rf, c_fso.max(0.0))?;
    let c_nb = nonba_rate_analytic(c_rf, ch, ch.snr.regime, opts)?;
    Ok(EndToEndReport {
        c_rf,
        c_fso,
        c_fso_numeric,
        c_ba,
        c_nb,
        gamma_bar: ch.snr.gamma_bar,
        regime: ch.snr.regime,
        method: FsoMethod::for_regime(ch.snr.regime),
        bottleneck,
    })
}
