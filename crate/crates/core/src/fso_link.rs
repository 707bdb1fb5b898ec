//! FSO backhaul: losses, turbulence parameters, the pointing-error (GML)
//! model and the ergodic-rate expressions.
//!
//! The beam-centre displacement u on the photodetector plane is a zero-mean
//! bivariate Gaussian with covariance Σ, so u² is squared-Hoyt distributed:
//!
//! f_{u²}(x) = (1+m²)/(2mΩ) e^{-δx} I₀(bx),
//! δ = (1+m²)²/(4m²Ω),  b = (1-m⁴)/(4m²Ω),  δ - b = (1+m²)/(2Ω).
//!
//! The captured fraction is g_g = A₀ exp(-2u²/(k_g w²)).

use std::f64::consts::{E, LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    beam_width, fluctuation_covariance, uav_gs_distance, HoytParams, NetworkGeometry, UavStability,
};
use crate::quad::integrate_to_infinity;
use crate::specfun::{bessel_i0_scaled, erf, marcum_q1_pair};

/// γ̄ at or above which the high-SNR expressions apply.
pub const HIGH_SNR_THRESHOLD: f64 = 10.0;
/// γ̄ below which the low-SNR series applies.
pub const LOW_SNR_THRESHOLD: f64 = 1.0;
/// Default number of Taylor terms in the low-SNR series.
pub const DEFAULT_LOW_SNR_TERMS: usize = 5;

/// How the Table-style `rho2` value is turned into a noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseVarianceMode {
    /// Use ρ² as the variance in A².
    #[default]
    Direct,
    /// Treat ρ² as a density in A²/Hz and multiply by the FSO bandwidth.
    DensityTimesBandwidth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FsoLinkParams {
    /// Photodetector responsivity R_s (A/W).
    pub responsivity: f64,
    /// Aperture radius a (m).
    pub aperture_radius: f64,
    /// Beam waist w₀ (m).
    pub beam_waist: f64,
    /// Optical wavelength (m).
    pub wavelength: f64,
    /// Average optical power p̄ (W).
    pub p_bar: f64,
    /// Shot-noise parameter ρ²; see [`NoiseVarianceMode`].
    pub rho2: f64,
    pub noise_mode: NoiseVarianceMode,
    /// Attenuation κ (dB/m).
    pub kappa_db_per_m: f64,
    /// Ground-level refraction structure parameter C_n²(0) (m^{-2/3}).
    pub cn2_ground: f64,
    /// FSO bandwidth W (Hz).
    pub bandwidth: f64,
}

impl FsoLinkParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("responsivity", self.responsivity),
            ("aperture_radius", self.aperture_radius),
            ("beam_waist", self.beam_waist),
            ("wavelength", self.wavelength),
            ("p_bar", self.p_bar),
            ("rho2", self.rho2),
            ("kappa_db_per_m", self.kappa_db_per_m),
            ("cn2_ground", self.cn2_ground),
            ("bandwidth", self.bandwidth),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn noise_variance(&self) -> f64 {
        match self.noise_mode {
            NoiseVarianceMode::Direct => self.rho2,
            NoiseVarianceMode::DensityTimesBandwidth => self.rho2 * self.bandwidth,
        }
    }

    /// Wave number 2π/λ.
    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// e p̄² / (2π σ²), the electrical SNR per unit squared channel gain.
    pub fn snr_per_gain2(&self) -> f64 {
        E * self.p_bar * self.p_bar / (2.0 * PI * self.noise_variance())
    }
}

/// g_p = 10^{-κL/10}.
pub fn atmospheric_loss(kappa_db_per_m: f64, l: f64) -> f64 {
    10f64.powf(-kappa_db_per_m * l / 10.0)
}

/// Gamma-Gamma turbulence parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurbulenceParams {
    pub alpha: f64,
    pub beta: f64,
    /// Rytov variance σ_R².
    pub rytov: f64,
    /// var{g_a} = 1/α + 1/β + 1/(αβ).
    pub scintillation_var: f64,
}

/// Gamma-Gamma parameters with aperture averaging, using the
/// Hufnagel-Valley decay C_n²(z) = C_n²(0) e^{-z/100} at the UAV height.
pub fn turbulence_params(fso: &FsoLinkParams, geom: &NetworkGeometry) -> TurbulenceParams {
    turbulence_params_at(fso, uav_gs_distance(geom), geom.uav_z())
}

/// As [`turbulence_params`] for an explicit link length and UAV height.
pub fn turbulence_params_at(fso: &FsoLinkParams, l: f64, z: f64) -> TurbulenceParams {
    let k = fso.wave_number();
    let cn2 = fso.cn2_ground * (-z / 100.0).exp();
    let rytov = 1.23 * cn2 * k.powf(7.0 / 6.0) * l.powf(11.0 / 6.0);
    if !(rytov > 0.0) || !(l > 0.0) {
        return TurbulenceParams {
            alpha: f64::INFINITY,
            beta: f64::INFINITY,
            rytov: 0.0,
            scintillation_var: 0.0,
        };
    }
    let d = 2.0 * fso.aperture_radius;
    let iota2 = k * d * d / (4.0 * l);
    let s125 = rytov.powf(6.0 / 5.0);
    let ax = 0.49 * rytov / (1.0 + 0.18 * iota2 + 0.56 * s125).powf(7.0 / 6.0);
    let bx = 0.51 * rytov * (1.0 + 0.69 * s125).powf(-5.0 / 6.0)
        / (1.0 + 0.9 * iota2 + 0.62 * iota2 * s125).powf(5.0 / 6.0);
    let alpha = 1.0 / ax.exp_m1();
    let beta = 1.0 / bx.exp_m1();
    TurbulenceParams {
        alpha,
        beta,
        rytov,
        scintillation_var: 1.0 / alpha + 1.0 / beta + 1.0 / (alpha * beta),
    }
}

/// Geometric and misalignment loss constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GmlParams {
    pub a0: f64,
    pub k_g: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    /// Beam width at the photodetector (m).
    pub w: f64,
}

impl GmlParams {
    /// k_g w², the spread of the Gaussian capture profile (m²).
    pub fn spread(&self) -> f64 {
        self.k_g * self.w * self.w
    }

    /// ϱ = (1+m²) k_g w² / (4mΩ).
    pub fn varrho(&self, hoyt: &HoytParams) -> f64 {
        (1.0 + hoyt.m * hoyt.m) * self.spread() / (4.0 * hoyt.m * hoyt.omega)
    }

    /// g_g for a displacement with squared norm `u2`.
    pub fn gain(&self, u2: f64) -> f64 {
        self.a0 * (-2.0 * u2 / self.spread()).exp()
    }
}

/// ν√π erf(ν) / (2ν e^{-ν²}) written to stay finite as ν → 0.
fn k_factor(nu: f64) -> f64 {
    if nu < 1e-4 {
        // erf(ν) ≈ 2ν/√π (1 - ν²/3): ratio → 1 + 2ν²/3
        1.0 + 2.0 * nu * nu / 3.0
    } else {
        PI.sqrt() * erf(nu) / (2.0 * nu * (-nu * nu).exp())
    }
}

pub fn gml_params(fso: &FsoLinkParams, geom: &NetworkGeometry) -> Result<GmlParams> {
    geom.validate()?;
    let w = beam_width(fso, uav_gs_distance(geom));
    let proj = geom.uav_orientation.phi.sin() * geom.uav_orientation.theta.cos();
    let nu_min = (PI / 2.0).sqrt() * fso.aperture_radius / w;
    let nu_max = proj.abs() * nu_min;
    let k_min = k_factor(nu_min);
    let k_max = k_factor(nu_max) / (proj * proj);
    Ok(GmlParams {
        a0: erf(nu_min) * erf(nu_max),
        k_g: 0.5 * (k_min + k_max),
        k_min,
        k_max,
        nu_min,
        nu_max,
        w,
    })
}

/// Squared-Hoyt density of u².
pub fn squared_hoyt_pdf(x: f64, hoyt: &HoytParams) -> f64 {
    if x < 0.0 || hoyt.is_deterministic() {
        return 0.0;
    }
    let (m, omega) = (hoyt.m, hoyt.omega);
    let m2 = m * m;
    let b = (1.0 - m2 * m2) / (4.0 * m2 * omega);
    let delta_minus_b = (1.0 + m2) / (2.0 * omega);
    (1.0 + m2) / (2.0 * m * omega) * (-delta_minus_b * x).exp() * bessel_i0_scaled(b * x)
}

/// Density of the GML factor g_g on (0, A₀].
///
/// Uses f(g) = (ϱ/A₀)(g/A₀)^{(1+m²)ϱ/(2m)-1} I₀(-(1-m²)ϱ/(2m) ln(g/A₀)),
/// evaluated in log form with an exponentially scaled Bessel function.
pub fn gml_pdf(g: f64, gml: &GmlParams, hoyt: &HoytParams) -> Result<f64> {
    if hoyt.is_deterministic() {
        return Err(Error::domain(
            "gml_pdf",
            "zero misalignment variance: g_g is the constant A0",
        ));
    }
    if !(g > 0.0 && g <= gml.a0) {
        return Ok(0.0);
    }
    let varrho = gml.varrho(hoyt);
    let m = hoyt.m;
    let ln_ratio = (g / gml.a0).ln();
    let expo = (1.0 + m * m) * varrho / (2.0 * m) - 1.0;
    let z = -(1.0 - m * m) * varrho / (2.0 * m) * ln_ratio;
    Ok(varrho / gml.a0 * (expo * ln_ratio + z).exp() * bessel_i0_scaled(z))
}

/// Density of the end-to-end FSO channel gain g = R_s g_p g_g.
pub fn fso_channel_pdf(g: f64, ch: &FsoChannel) -> Result<f64> {
    let s = ch.params.responsivity * ch.g_p;
    Ok(gml_pdf(g / s, &ch.gml, &ch.hoyt)? / s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrRegime {
    /// γ̄ < 1: the Taylor series applies.
    Low,
    /// 1 ≤ γ̄ < 10: no closed form; numeric integration is used.
    Mid,
    /// γ̄ ≥ 10: the log-linear approximation applies.
    High,
}

impl SnrRegime {
    pub fn classify(gamma_bar: f64) -> Self {
        if gamma_bar < LOW_SNR_THRESHOLD {
            SnrRegime::Low
        } else if gamma_bar < HIGH_SNR_THRESHOLD {
            SnrRegime::Mid
        } else {
            SnrRegime::High
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FsoSnr {
    pub gamma_bar: f64,
    pub regime: SnrRegime,
}

/// γ̄ = R_s g_p A₀ √(e p̄² / (2πρ²)).
pub fn fso_snr(fso: &FsoLinkParams, geom: &NetworkGeometry, gml: &GmlParams) -> FsoSnr {
    let g_p = atmospheric_loss(fso.kappa_db_per_m, uav_gs_distance(geom));
    snr_from_gains(fso, g_p, gml.a0)
}

fn snr_from_gains(fso: &FsoLinkParams, g_p: f64, a0: f64) -> FsoSnr {
    let gamma_bar = fso.responsivity * g_p * a0 * fso.snr_per_gain2().sqrt();
    FsoSnr {
        gamma_bar,
        regime: SnrRegime::classify(gamma_bar),
    }
}

/// Instantaneous IM/DD rate (W/2) log₂(1 + e p̄² g² / (2πρ²)) in bit/s.
pub fn fso_instant_rate(g: f64, fso: &FsoLinkParams) -> f64 {
    0.5 * fso.bandwidth * (fso.snr_per_gain2() * g * g).ln_1p() / LN_2
}

/// Everything the FSO rate expressions need for one UAV pose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FsoChannel {
    pub params: FsoLinkParams,
    /// UAV-GS distance L (m).
    pub distance: f64,
    pub g_p: f64,
    pub gml: GmlParams,
    pub hoyt: HoytParams,
    pub snr: FsoSnr,
}

impl FsoChannel {
    pub fn new(fso: &FsoLinkParams, geom: &NetworkGeometry, stab: &UavStability) -> Result<Self> {
        fso.validate()?;
        let gml = gml_params(fso, geom)?;
        let hoyt = fluctuation_covariance(geom, stab)?;
        let distance = uav_gs_distance(geom);
        let g_p = atmospheric_loss(fso.kappa_db_per_m, distance);
        Ok(FsoChannel {
            params: *fso,
            distance,
            g_p,
            gml,
            hoyt,
            snr: snr_from_gains(fso, g_p, gml.a0),
        })
    }

    /// Same channel with p̄ rescaled so that γ̄ equals `gamma_bar`.
    pub fn with_gamma_bar(&self, gamma_bar: f64) -> Result<Self> {
        if !(gamma_bar > 0.0) {
            return Err(Error::invalid("gamma_bar", "must be positive"));
        }
        let mut out = *self;
        out.params.p_bar *= gamma_bar / self.snr.gamma_bar;
        out.snr = snr_from_gains(&out.params, out.g_p, out.gml.a0);
        Ok(out)
    }

    /// Peak channel gain R_s g_p A₀.
    pub fn peak_gain(&self) -> f64 {
        self.params.responsivity * self.g_p * self.gml.a0
    }

    /// Largest achievable instantaneous rate, (W/2) log₂(1 + γ̄²).
    pub fn max_rate(&self) -> f64 {
        let gb = self.snr.gamma_bar;
        0.5 * self.params.bandwidth * (gb * gb).ln_1p() / LN_2
    }

    /// Rate at misalignment u²: (W/2) log₂(1 + γ̄² e^{-4u²/(k_g w²)}).
    pub fn rate_at_u2(&self, u2: f64) -> f64 {
        let gb = self.snr.gamma_bar;
        let y = gb * gb * (-4.0 * u2 / self.gml.spread()).exp();
        0.5 * self.params.bandwidth * y.ln_1p() / LN_2
    }

    /// χ(x), the squared displacement at which the rate equals x; clamped to
    /// be non-negative, +∞ for x ≤ 0.
    pub fn chi(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::INFINITY;
        }
        let gb2 = self.snr.gamma_bar * self.snr.gamma_bar;
        let y = (2.0 * LN_2 * x / self.params.bandwidth).exp_m1() / gb2;
        (-0.25 * self.gml.spread() * y.ln()).max(0.0)
    }

    fn check_regime(&self, wanted: SnrRegime, allow_outside: bool) -> Result<()> {
        let gb = self.snr.gamma_bar;
        let ok = match wanted {
            SnrRegime::Low => gb < LOW_SNR_THRESHOLD,
            SnrRegime::High => gb >= HIGH_SNR_THRESHOLD,
            SnrRegime::Mid => true,
        };
        if ok {
            return Ok(());
        }
        let msg = format!("gamma_bar = {gb} is outside the {wanted:?} regime");
        if allow_outside {
            log::warn!("{msg}");
            Ok(())
        } else {
            Err(Error::Regime(msg))
        }
    }
}

/// Low-SNR ergodic rate: the first `n_terms` terms of the Taylor series of
/// log(1 + γ̄² e^{-4u²/(k_g w²)}) averaged over u² with the squared-Hoyt MGF.
pub fn fso_ergodic_rate_low(ch: &FsoChannel, n_terms: usize) -> Result<f64> {
    ch.check_regime(SnrRegime::Low, false)?;
    Ok(low_series(ch, n_terms))
}

fn low_series(ch: &FsoChannel, n_terms: usize) -> f64 {
    let gb2 = ch.snr.gamma_bar * ch.snr.gamma_bar;
    let spread = ch.gml.spread();
    let omega = ch.hoyt.omega;
    let inv_varrho = if ch.hoyt.is_deterministic() {
        0.0
    } else {
        1.0 / ch.gml.varrho(&ch.hoyt)
    };
    let mut sum = 0.0;
    let mut power = 1.0;
    for l in 1..=n_terms {
        let lf = l as f64;
        power *= gb2;
        let sign = if l % 2 == 1 { 1.0 } else { -1.0 };
        let root = (16.0 * lf * lf * inv_varrho * inv_varrho
            + 4.0 * (1.0 + 8.0 * lf * omega / spread))
            .sqrt();
        sum += sign * power / (lf * root);
    }
    ch.params.bandwidth / LN_2 * sum
}

/// High-SNR ergodic rate (W/2)(log₂ γ̄² - 4Ω/(ln 2 · k_g w²)).
///
/// Below γ̄ = 10 this returns an error unless `allow_outside` is set, in which
/// case a warning is logged.
pub fn fso_ergodic_rate_high(ch: &FsoChannel, allow_outside: bool) -> Result<f64> {
    ch.check_regime(SnrRegime::High, allow_outside)?;
    let gb2 = ch.snr.gamma_bar * ch.snr.gamma_bar;
    Ok(0.5 * ch.params.bandwidth * (gb2.log2() - 4.0 * ch.hoyt.omega / (LN_2 * ch.gml.spread())))
}

/// Exact ergodic rate by adaptive quadrature over the squared-Hoyt law.
pub fn fso_ergodic_rate_numeric(ch: &FsoChannel, quad_tol: f64) -> Result<f64> {
    conditional_fso_expectation_numeric(f64::INFINITY, ch, quad_tol)
}

/// E{C 1[C ≤ c]} by adaptive quadrature, valid in every regime.
pub fn conditional_fso_expectation_numeric(c: f64, ch: &FsoChannel, quad_tol: f64) -> Result<f64> {
    if c <= 0.0 || ch.snr.gamma_bar == 0.0 {
        return Ok(0.0);
    }
    let chi = if c.is_infinite() { 0.0 } else { ch.chi(c) };
    if ch.hoyt.is_deterministic() {
        // u² = 0 surely, so C equals its maximum.
        let cmax = ch.max_rate();
        return Ok(if cmax <= c { cmax } else { 0.0 });
    }
    if chi.is_infinite() {
        return Ok(0.0);
    }
    let scale = 2.0 * ch.hoyt.lambda1;
    integrate_to_infinity(
        |x| ch.rate_at_u2(x) * squared_hoyt_pdf(x, &ch.hoyt),
        chi,
        scale,
        quad_tol,
    )
}

/// P(u² ≥ χ) for the squared-Hoyt law, via the Marcum-Q form of the Rice Ie
/// function: 1 - [Q(A,B) - Q(B,A)] = (1 - Q(A,B)) + Q(B,A),
/// A = √(v₁t), B = √(v₂t), t = (1+m²)²χ/(4m²Ω).
pub fn squared_hoyt_tail(chi: f64, hoyt: &HoytParams) -> Result<f64> {
    if chi <= 0.0 {
        return Ok(1.0);
    }
    if chi.is_infinite() {
        return Ok(0.0);
    }
    if hoyt.is_deterministic() {
        return Ok(0.0);
    }
    let m = hoyt.m;
    let m2 = m * m;
    let v = (1.0 - m2) / (1.0 + m2);
    let t = (1.0 + m2).powi(2) * chi / (4.0 * m2 * hoyt.omega);
    let (a, b) = crate::specfun::ie_arguments(v, t);
    let ab = marcum_q1_pair(a, b)?;
    let ba = marcum_q1_pair(b, a)?;
    Ok((ab.complement + ba.q).clamp(0.0, 1.0))
}

/// CDF of the instantaneous FSO rate.
pub fn fso_rate_cdf(x: f64, ch: &FsoChannel) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= ch.max_rate() {
        return Ok(1.0);
    }
    squared_hoyt_tail(ch.chi(x), &ch.hoyt)
}
