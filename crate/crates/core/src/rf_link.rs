//! RF access link: LOS probability, path loss, fading laws and the ergodic
//! sum rate over Poisson-distributed users.
//!
//! The post-MRC fading power is Gamma(N, 2η²) in the NLOS state. In the LOS
//! state the shadowed-Rician power τ, with a Nakagami(q, ω) LOS amplitude, is
//! a negative-binomial mixture of Gamma(N + n, 2η²) laws:
//!
//! f_τ(x) = Σ_n p_n Gamma(x; N + n, 2η²),   p_n = A (q)_n rⁿ / n!,
//!
//! with A = (Nω/(2qη²) + 1)^{-q} and r = 1 / (1 + 2η²q/(Nω)). Summing this
//! mixture is the same as expanding the ₁F₁ in the closed-form density.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{elevation_deg, NetworkGeometry};
use crate::specfun::{
    confluent_1f1, ln_gamma, scaled_exp_integrals, SeriesControl, SeriesValue, Stop,
};

/// ε = 20 / ln 10, the dB-to-neper scale of the lognormal shadowing.
pub const EPSILON_DB: f64 = 20.0 / std::f64::consts::LN_10;

/// RF link parameters in linear units (dB conversions happen at config load).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfLinkParams {
    /// Carrier frequency f in MHz.
    pub carrier_mhz: f64,
    /// Per-user bandwidth W_sub (Hz).
    pub w_sub: f64,
    /// User transmit power P (W).
    pub tx_power: f64,
    /// Multipath power η².
    pub eta2: f64,
    /// Shadowing mean μ (dB).
    pub shadow_mu_db: f64,
    /// Shadowing variance σ² (dB).
    pub shadow_sigma2_db: f64,
    /// Environment constant B of the LOS probability.
    pub los_b: f64,
    /// Environment constant C of the LOS probability.
    pub los_c: f64,
    /// Number of UAV receive antennas N.
    pub antennas: u32,
    /// Noise power spectral density (W/Hz).
    pub noise_density: f64,
}

impl RfLinkParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_mhz", self.carrier_mhz),
            ("w_sub", self.w_sub),
            ("tx_power", self.tx_power),
            ("eta2", self.eta2),
            ("los_b", self.los_b),
            ("noise_density", self.noise_density),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.los_c >= 0.0 && self.los_c.is_finite()) {
            return Err(Error::invalid("los_c", "must be non-negative"));
        }
        if !(self.shadow_sigma2_db > 0.0 && self.shadow_sigma2_db.is_finite()) {
            return Err(Error::invalid("shadow_sigma2_db", "must be positive"));
        }
        if !self.shadow_mu_db.is_finite() {
            return Err(Error::invalid("shadow_mu_db", "must be finite"));
        }
        if self.antennas == 0 {
            return Err(Error::invalid("antennas", "must be at least 1"));
        }
        Ok(())
    }

    /// c = f / 23.85 with f in MHz.
    pub fn path_loss_constant(&self) -> f64 {
        self.carrier_mhz / 23.85
    }

    /// Noise variance ζ² = N₀ W_sub.
    pub fn noise_variance(&self) -> f64 {
        self.noise_density * self.w_sub
    }

    /// Mean SNR scale γ = P / (ζ² c² d²) at 3D distance d.
    pub fn snr_scale(&self, d_squared: f64) -> f64 {
        let c = self.path_loss_constant();
        self.tx_power / (self.noise_variance() * c * c * d_squared)
    }

    pub fn nakagami_fit(&self) -> Result<NakagamiFit> {
        nakagami_from_lognormal(self.shadow_mu_db, self.shadow_sigma2_db)
    }
}

/// Nakagami-m approximation of the lognormal LOS amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NakagamiFit {
    /// Shape q.
    pub q: f64,
    /// Spread ω = E[h²].
    pub omega: f64,
}

/// Node counts of the Gauss-Chebyshev rule over the user disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcqGrid {
    /// Radial nodes H.
    pub h: u32,
    /// Angular nodes M.
    pub m: u32,
}

impl Default for GcqGrid {
    fn default() -> Self {
        GcqGrid { h: 10, m: 10 }
    }
}

impl GcqGrid {
    pub fn validate(&self) -> Result<()> {
        if self.h == 0 || self.m == 0 {
            return Err(Error::invalid("gcq", "node counts must be at least 1"));
        }
        Ok(())
    }
}

/// P_LOS = 1 / (1 + C e^{-Bψ}) for elevation ψ in degrees.
pub fn los_probability(psi_deg: f64, params: &RfLinkParams) -> Result<f64> {
    if !(psi_deg > 0.0 && psi_deg <= 90.0) {
        return Err(Error::domain(
            "los_probability",
            format!("elevation must lie in (0, 90] degrees, got {psi_deg}"),
        ));
    }
    Ok(1.0 / (1.0 + params.los_c * (-params.los_b * psi_deg).exp()))
}

/// Path-loss amplitude h^p = 1 / (c d).
pub fn path_loss(d_3d: f64, params: &RfLinkParams) -> Result<f64> {
    if !(d_3d > 0.0) {
        return Err(Error::domain(
            "path_loss",
            format!("distance must be positive, got {d_3d}"),
        ));
    }
    Ok(1.0 / (params.path_loss_constant() * d_3d))
}

/// Moment-matched Nakagami parameters of a lognormal amplitude 10^{X/20},
/// X ~ N(μ, σ²) in dB.
pub fn nakagami_from_lognormal(mu_db: f64, sigma2_db: f64) -> Result<NakagamiFit> {
    if !(sigma2_db > 0.0) {
        return Err(Error::invalid("shadow_sigma2_db", "must be positive"));
    }
    let e = EPSILON_DB;
    Ok(NakagamiFit {
        q: 1.0 / ((4.0 * sigma2_db / (e * e)).exp() - 1.0),
        omega: ((2.0 / e) * (mu_db + sigma2_db / e)).exp(),
    })
}

/// Negative-binomial weights of the shadowed-Rician power law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowedRicianMixture {
    /// ln A = -q ln(Nω/(2qη²) + 1)
    pub ln_a: f64,
    pub q: f64,
    pub r: f64,
    pub n: u32,
    /// Scale 2η² of each Gamma component.
    pub scale: f64,
}

impl ShadowedRicianMixture {
    pub fn new(fit: &NakagamiFit, eta2: f64, n: u32) -> Self {
        let nw = n as f64 * fit.omega;
        ShadowedRicianMixture {
            ln_a: -fit.q * (nw / (2.0 * fit.q * eta2)).ln_1p(),
            q: fit.q,
            r: 1.0 / (1.0 + 2.0 * eta2 * fit.q / nw),
            n,
            scale: 2.0 * eta2,
        }
    }

    /// Iterator over the weights p_0, p_1, ...
    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        let mut p = self.ln_a.exp();
        let mut k = 0.0;
        std::iter::from_fn(move || {
            let out = p;
            p *= (self.q + k) * self.r / (k + 1.0);
            k += 1.0;
            Some(out)
        })
    }

    /// Index after which the weights decrease monotonically.
    pub fn weight_mode(&self) -> usize {
        // p_{n+1}/p_n = (q+n) r / (n+1) < 1  ⇔  n > (q r - 1)/(1 - r)
        ((self.q * self.r - 1.0) / (1.0 - self.r)).max(0.0).ceil() as usize
    }

    /// Mean of τ: N·2η² + Nω.
    pub fn mean(&self) -> f64 {
        self.scale * (self.n as f64 + self.q * self.r / (1.0 - self.r))
    }
}

/// Gamma(k, θ) density evaluated in log space.
fn gamma_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return if shape == 1.0 {
            1.0 / scale
        } else if shape < 1.0 {
            f64::INFINITY
        } else {
            0.0
        };
    }
    ((shape - 1.0) * x.ln() - x / scale - ln_gamma(shape) - shape * scale.ln()).exp()
}

/// Density of the NLOS post-MRC power ς ~ Gamma(N, 2η²).
pub fn pdf_nlos(x: f64, eta2: f64, n: u32) -> f64 {
    gamma_pdf(x, n as f64, 2.0 * eta2)
}

/// Density of the LOS post-MRC power τ under the Nakagami shadowing fit.
///
/// Evaluates the closed form A x^{N-1} e^{-x/(2η²)} ₁F₁(q, N; z) /
/// ((2η²)^N (N-1)!) with z = x / (2η² + 4η⁴q/(Nω)). For z > 200 the ₁F₁
/// series needs more terms than `ctl` allows and the equivalent Gamma
/// mixture is summed in log space instead.
pub fn pdf_tau(x: f64, fit: &NakagamiFit, eta2: f64, n: u32, ctl: &SeriesControl) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain("pdf_tau", format!("need x >= 0, got {x}")));
    }
    if n == 0 || !(eta2 > 0.0) {
        return Err(Error::invalid("pdf_tau", "need N >= 1 and eta2 > 0"));
    }
    let mix = ShadowedRicianMixture::new(fit, eta2, n);
    let nf = n as f64;
    if x == 0.0 {
        return Ok(mix.ln_a.exp() * gamma_pdf(0.0, nf, mix.scale));
    }
    let z = x * mix.r / mix.scale;
    if z <= 200.0 {
        let f11 = confluent_1f1(fit.q, n, z, ctl)?;
        let ln_pref =
            mix.ln_a + (nf - 1.0) * x.ln() - x / mix.scale - nf * mix.scale.ln() - ln_gamma(nf);
        return Ok(ln_pref.exp() * f11.value);
    }
    // Gamma mixture: sum outward from the largest term.
    let ln_term = |k: f64| {
        mix.ln_a + ln_gamma(mix.q + k) - ln_gamma(mix.q) - ln_gamma(k + 1.0)
            + k * mix.r.ln()
            + (nf + k - 1.0) * x.ln()
            - x / mix.scale
            - (nf + k) * mix.scale.ln()
            - ln_gamma(nf + k)
    };
    let peak = (z + mix.q).floor().max(0.0);
    let mut sum = 0.0;
    let mut k = peak;
    loop {
        let t = ln_term(k).exp();
        sum += t;
        if t < ctl.rel_tol * sum * 1e-2 || k == 0.0 {
            break;
        }
        k -= 1.0;
    }
    let mut k = peak + 1.0;
    loop {
        let t = ln_term(k).exp();
        sum += t;
        if t < ctl.rel_tol * sum * 1e-2 {
            break;
        }
        k += 1.0;
    }
    Ok(sum)
}

/// Mixture density of the normalized post-MRC power for a given P_LOS.
pub fn pdf_mixture(
    x: f64,
    p_los: f64,
    fit: &NakagamiFit,
    eta2: f64,
    n: u32,
    ctl: &SeriesControl,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_los) {
        return Err(Error::domain(
            "pdf_mixture",
            format!("P_LOS must be in [0, 1], got {p_los}"),
        ));
    }
    Ok(p_los * pdf_tau(x, fit, eta2, n, ctl)? + (1.0 - p_los) * pdf_nlos(x, eta2, n))
}

/// E[log₂(1 + γ ς)] for ς ~ Gamma(N, 2η²), in bit/s/Hz.
///
/// Equals Σ_{ℓ=0}^{N-1} x^ℓ e^x Γ(-ℓ, x) / ln 2 with x = 1/(2η²γ).
pub fn ergodic_rate_rayleigh(gamma: f64, eta2: f64, n: u32) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::domain(
            "ergodic_rate_rayleigh",
            format!("need gamma > 0, got {gamma}"),
        ));
    }
    let x = 1.0 / (2.0 * eta2 * gamma);
    let t = scaled_exp_integrals(x, n as usize)?;
    Ok(t.iter().sum::<f64>() / LN_2)
}

/// E[log₂(1 + γ τ)] for the Nakagami-shadowed Rician power τ, in bit/s/Hz.
///
/// The outer sum over the mixture index n is truncated by `ctl` once past
/// the mode of the weights; the inner sums are finite.
pub fn ergodic_rate_shadowed_rician(
    gamma: f64,
    fit: &NakagamiFit,
    eta2: f64,
    n: u32,
    ctl: &SeriesControl,
) -> Result<SeriesValue> {
    ctl.validate()?;
    if !(gamma > 0.0) {
        return Err(Error::domain(
            "ergodic_rate_shadowed_rician",
            format!("need gamma > 0, got {gamma}"),
        ));
    }
    let mix = ShadowedRicianMixture::new(fit, eta2, n);
    let x = 1.0 / (2.0 * eta2 * gamma);
    let depth = n as usize + ctl.max_terms;
    let t = scaled_exp_integrals(x, depth)?;
    // partial[μ] = Σ_{k<μ} e^x E_{k+1}(x), the Gamma(μ, ·) ergodic rate in nats
    let mut s_mu: f64 = t[..n as usize].iter().sum();
    let mode = mix.weight_mode();
    let mut sum = 0.0;
    for (i, p) in mix.weights().take(ctl.max_terms).enumerate() {
        if i > 0 {
            s_mu += t[n as usize + i - 1];
        }
        let term = p * s_mu;
        sum += term;
        if i >= mode && term < ctl.rel_tol * sum {
            return Ok(SeriesValue {
                value: sum / LN_2,
                terms: i + 1,
                stop: Stop::RelTol,
            });
        }
    }
    Err(Error::NonConvergence {
        func: "ergodic_rate_shadowed_rician",
        partial: sum / LN_2,
        terms: ctl.max_terms,
    })
}

/// Per-link ergodic rate (bit/s/Hz) of a user at horizontal distance `r_dm`
/// from the UAV, averaging the LOS and NLOS states.
pub fn link_spectral_efficiency(
    z: f64,
    r_dm: f64,
    params: &RfLinkParams,
    fit: &NakagamiFit,
    ctl: &SeriesControl,
) -> Result<f64> {
    let gamma = params.snr_scale(z * z + r_dm * r_dm);
    let e_r = ergodic_rate_rayleigh(gamma, params.eta2, params.antennas)?;
    let e_sr = ergodic_rate_shadowed_rician(gamma, fit, params.eta2, params.antennas, ctl)?.value;
    let p_los = los_probability(elevation_deg(z, r_dm), params)?;
    Ok(e_r + (e_sr - e_r) * p_los)
}

/// Ergodic sum rate (bit/s) of all users in the cell by Campbell's theorem,
/// with the disk integral evaluated by an H × M Gauss-Chebyshev rule.
///
/// Nodes are visited in a fixed (i, j) order so the result is bit-stable.
pub fn rf_ergodic_sum_rate(
    geom: &NetworkGeometry,
    params: &RfLinkParams,
    density: f64,
    grid: &GcqGrid,
    ctl: &SeriesControl,
) -> Result<f64> {
    params.validate()?;
    grid.validate()?;
    if !(density >= 0.0 && density.is_finite()) {
        return Err(Error::invalid("density", "must be non-negative"));
    }
    if density == 0.0 {
        return Ok(0.0);
    }
    let fit = params.nakagami_fit()?;
    let r0 = geom.cell_radius;
    let [x0, y0] = geom.cell_center;
    let [xd, yd, zd] = geom.uav_position;
    let (h, m) = (grid.h as f64, grid.m as f64);
    let mut total = 0.0;
    for i in 1..=grid.h {
        let xi = ((2.0 * i as f64 - 1.0) * PI / (2.0 * h)).cos();
        let radius = 0.5 * r0 * (xi + 1.0);
        let wx = (1.0 - xi * xi).sqrt() * (xi + 1.0);
        for j in 1..=grid.m {
            let yj = ((2.0 * j as f64 - 1.0) * PI / (2.0 * m)).cos();
            let wy = (1.0 - yj * yj).sqrt();
            let (s, c) = (PI * yj).sin_cos();
            let dx = xd - x0 - radius * c;
            let dy = yd - y0 - radius * s;
            let r_dm = dx.hypot(dy);
            if r_dm == 0.0 && zd == 0.0 {
                log::warn!("GCQ node coincides with the UAV; skipping singular node");
                continue;
            }
            total += wx * wy * link_spectral_efficiency(zd, r_dm, params, &fit, ctl)?;
        }
    }
    Ok(PI.powi(3) * density * r0 * r0 * params.w_sub / (4.0 * h * m) * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> RfLinkParams {
        RfLinkParams {
            carrier_mhz: 2000.0,
            w_sub: 5e6 / (0.008 * PI * 2500.0),
            tx_power: 0.1,
            eta2: 10f64.powf(2.2) * 1e-3,
            shadow_mu_db: 0.0,
            shadow_sigma2_db: 3.0,
            los_b: 0.136,
            los_c: 60.69,
            antennas: 2,
            noise_density: 10f64.powf(-11.4) * 1e-3 / 1e6,
        }
    }

    #[test]
    fn los_probability_examples() {
        let p = table1();
        assert!((los_probability(90.0, &p).unwrap() - 0.999_706_76).abs() < 1e-8);
        assert!((los_probability(45.0, &p).unwrap() - 0.882_282_13).abs() < 1e-8);
        assert!(los_probability(0.0, &p).is_err());
        assert!(los_probability(91.0, &p).is_err());
    }

    #[test]
    fn path_loss_example() {
        let p = table1();
        let h = path_loss(600.0, &p).unwrap();
        assert!((h - 1.988e-5).abs() < 1e-8);
        assert!((h * h - 3.95e-10).abs() < 1e-12);
        assert!(path_loss(0.0, &p).is_err());
    }

    #[test]
    fn nakagami_fit_example() {
        let f = nakagami_from_lognormal(0.0, 3.0).unwrap();
        assert!((f.q - 5.800).abs() < 1e-3, "{}", f.q);
        assert!((f.omega - 1.0828).abs() < 1e-4, "{}", f.omega);
    }

    #[test]
    fn single_antenna_rayleigh_is_classical() {
        for &g in &[0.1, 1.0, 30.0, 1e4] {
            let x = 1.0 / (2.0 * 0.2 * g);
            let e1 = crate::specfun::exp_integral_e1(x).unwrap();
            let classical = x.exp() * e1 / LN_2;
            let r = ergodic_rate_rayleigh(g, 0.2, 1).unwrap();
            assert!((r - classical).abs() < 1e-12 * classical, "gamma = {g}");
        }
    }

    #[test]
    fn shadowed_beats_rayleigh() {
        let p = table1();
        let fit = p.nakagami_fit().unwrap();
        let ctl = SeriesControl::default();
        for &g in &[0.5, 5.0, 50.0, 5e3] {
            let sr = ergodic_rate_shadowed_rician(g, &fit, p.eta2, 2, &ctl).unwrap();
            let ray = ergodic_rate_rayleigh(g, p.eta2, 2).unwrap();
            assert!(sr.value > ray, "gamma = {g}");
            assert_eq!(sr.stop, Stop::RelTol);
        }
    }

    #[test]
    fn mixture_weights_sum_to_one() {
        let p = table1();
        let mix = ShadowedRicianMixture::new(&p.nakagami_fit().unwrap(), p.eta2, 2);
        let s: f64 = mix.weights().take(400).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pdf_branches_agree() {
        // z just below and above the switch-over must give the same density.
        let p = table1();
        let fit = p.nakagami_fit().unwrap();
        let ctl = SeriesControl::default();
        let mix = ShadowedRicianMixture::new(&fit, p.eta2, 2);
        let x_switch = 200.0 * mix.scale / mix.r;
        let lo = pdf_tau(x_switch * (1.0 - 1e-12), &fit, p.eta2, 2, &ctl).unwrap();
        let hi = pdf_tau(x_switch * (1.0 + 1e-12), &fit, p.eta2, 2, &ctl).unwrap();
        assert!((lo / hi - 1.0).abs() < 1e-8, "{lo} vs {hi}");
    }

    #[test]
    fn zero_density_gives_zero_rate() {
        let g = NetworkGeometry::pointed(100.0, [600.0, 0.0], 50.0, [600.0, 0.0, 30.0]).unwrap();
        let r = rf_ergodic_sum_rate(
            &g,
            &table1(),
            0.0,
            &GcqGrid::default(),
            &SeriesControl::default(),
        );
        assert_eq!(r.unwrap(), 0.0);
    }
}
