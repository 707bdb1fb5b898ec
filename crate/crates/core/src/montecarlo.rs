//! Monte Carlo estimation of the hop and end-to-end rates.
//!
//! Every slot draws a Poisson user population, MRC fading powers for each
//! user, a beam misalignment and optionally Gamma-Gamma turbulence. Each slot
//! owns two ChaCha streams derived from (master_seed, slot), one for the FSO
//! hop and one for the RF hop, so results do not depend on scheduling and the
//! FSO draws are shared between runs that differ only on the RF side.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fso_link::{fso_instant_rate, turbulence_params, FsoChannel, TurbulenceParams};
use crate::geometry::{elevation_deg, mu_uav_distance, HoytParams, MuPosition, NetworkGeometry};
use crate::rf_link::{los_probability, NakagamiFit, RfLinkParams, EPSILON_DB};
use crate::scenario::Scenario;

/// Slots accumulated sequentially before the parallel reduction.
const CHUNK: u64 = 4096;

/// Stream reserved for the fixed user drop.
const DROP_STREAM: u64 = u64::MAX;

/// Distribution of the LOS shadowing amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadowingMode {
    /// 10^{X/20} with X ~ N(μ, σ²) in dB.
    #[default]
    Lognormal,
    /// Nakagami amplitude with the moment-matched (q, ω).
    Nakagami,
}

/// Whether user positions are redrawn every slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserDrop {
    #[default]
    PerSlot,
    /// One population drawn up front and kept for all slots.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_slots: u64,
    pub master_seed: u64,
    pub enable_gg: bool,
    /// Number of worker threads; `None` uses the global pool.
    pub worker_hint: Option<usize>,
    pub shadowing: ShadowingMode,
    pub user_drop: UserDrop,
    /// Fixed-order pairwise reduction, bit-identical for any worker count.
    pub reproducible: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_slots: 100_000,
            master_seed: 1,
            enable_gg: false,
            worker_hint: None,
            shadowing: ShadowingMode::Lognormal,
            user_drop: UserDrop::PerSlot,
            reproducible: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_slots == 0 {
            return Err(Error::invalid("n_slots", "must be at least 1"));
        }
        if self.worker_hint == Some(0) {
            return Err(Error::invalid("worker_hint", "must be at least 1"));
        }
        Ok(())
    }
}

/// Instantaneous rates of one slot (bit/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotSample {
    pub c_rf_inst: f64,
    pub c_fso_inst: f64,
    pub c_min: f64,
    pub users: usize,
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Zero when only one slot was simulated.
    pub std_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateReport {
    pub n_slots: u64,
    pub c_rf: Estimate,
    pub c_fso: Estimate,
    /// Per-slot min(C_RF, C_FSO).
    pub c_min: Estimate,
    pub users: Estimate,
    /// Buffer-aided rate, the smaller of the two hop means.
    pub c_ba: f64,
    /// Non-buffer-aided rate, the mean of the per-slot minima.
    pub c_nb: f64,
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let d = b.mean - a.mean;
        let (na, nb) = (a.n as f64, b.n as f64);
        Moments {
            n,
            mean: a.mean + d * nb / n as f64,
            m2: a.m2 + b.m2 + d * d * na * nb / n as f64,
        }
    }

    fn estimate(&self) -> Estimate {
        let std_err = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean: self.mean,
            std_err,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct SlotStats {
    rf: Moments,
    fso: Moments,
    min: Moments,
    users: Moments,
}

impl SlotStats {
    fn push(&mut self, s: &SlotSample) {
        self.rf.push(s.c_rf_inst);
        self.fso.push(s.c_fso_inst);
        self.min.push(s.c_min);
        self.users.push(s.users as f64);
    }

    fn merge(a: SlotStats, b: SlotStats) -> SlotStats {
        SlotStats {
            rf: Moments::merge(a.rf, b.rf),
            fso: Moments::merge(a.fso, b.fso),
            min: Moments::merge(a.min, b.min),
            users: Moments::merge(a.users, b.users),
        }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Independent user positions for one slot: K ~ Poisson(λπr₀²), uniform on
/// the disk.
pub fn sample_mu_positions<R: Rng + ?Sized>(
    geom: &NetworkGeometry,
    density: f64,
    rng: &mut R,
) -> Vec<MuPosition> {
    let mean = density * PI * geom.cell_radius * geom.cell_radius;
    let k = if mean > 0.0 {
        Poisson::new(mean)
            .map(|p| p.sample(rng) as usize)
            .unwrap_or(0)
    } else {
        0
    };
    (0..k)
        .map(|_| MuPosition {
            r: geom.cell_radius * rng.random::<f64>().sqrt(),
            varphi: 2.0 * PI * rng.random::<f64>(),
        })
        .collect()
}

/// LOS shadowing amplitude h^s.
pub fn sample_los_amplitude<R: Rng + ?Sized>(
    rf: &RfLinkParams,
    fit: &NakagamiFit,
    mode: ShadowingMode,
    rng: &mut R,
) -> f64 {
    match mode {
        ShadowingMode::Lognormal => {
            let x: f64 = rng.sample(StandardNormal);
            ((rf.shadow_mu_db + rf.shadow_sigma2_db.sqrt() * x) / EPSILON_DB).exp()
        }
        ShadowingMode::Nakagami => Gamma::new(fit.q, fit.omega / fit.q)
            .map(|g| g.sample(rng).sqrt())
            .unwrap_or(0.0),
    }
}

/// NLOS post-MRC power: Σ_n η²(z₁² + z₂²), a Gamma(N, 2η²) variate.
pub fn sample_nlos_power<R: Rng + ?Sized>(eta2: f64, n: u32, rng: &mut R) -> f64 {
    (0..n)
        .map(|_| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            eta2 * (a * a + b * b)
        })
        .sum()
}

/// LOS post-MRC power Σ_n |h^s + h_n|² with a shadowing amplitude shared by
/// all antennas and independent complex Gaussian multipath of power 2η².
pub fn sample_los_power<R: Rng + ?Sized>(h_s: f64, eta2: f64, n: u32, rng: &mut R) -> f64 {
    let eta = eta2.sqrt();
    (0..n)
        .map(|_| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            (h_s + eta * a).powi(2) + (eta * b).powi(2)
        })
        .sum()
}

/// LOS power τ with Nakagami-fitted shadowing.
pub fn sample_tau<R: Rng + ?Sized>(fit: &NakagamiFit, eta2: f64, n: u32, rng: &mut R) -> f64 {
    let h_s = Gamma::new(fit.q, fit.omega / fit.q)
        .map(|g| g.sample(rng).sqrt())
        .unwrap_or(0.0);
    sample_los_power(h_s, eta2, n, rng)
}

/// Post-MRC power ‖h̃‖² of one user whose LOS probability is `p_los`.
pub fn sample_rf_power<R: Rng + ?Sized>(
    rf: &RfLinkParams,
    fit: &NakagamiFit,
    mode: ShadowingMode,
    p_los: f64,
    rng: &mut R,
) -> f64 {
    if rng.random::<f64>() < p_los {
        let h_s = sample_los_amplitude(rf, fit, mode, rng);
        sample_los_power(h_s, rf.eta2, rf.antennas, rng)
    } else {
        sample_nlos_power(rf.eta2, rf.antennas, rng)
    }
}

/// Squared misalignment u² = λ₁z₁² + λ₂z₂², the squared norm of a zero-mean
/// Gaussian displacement with covariance Σ written in its eigenbasis.
pub fn sample_u2<R: Rng + ?Sized>(hoyt: &HoytParams, rng: &mut R) -> f64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    hoyt.lambda1 * a * a + hoyt.lambda2 * b * b
}

/// Unit-mean Gamma-Gamma irradiance: product of Gamma(α, 1/α) and
/// Gamma(β, 1/β). Infinite shapes give 1.
pub fn sample_gg<R: Rng + ?Sized>(turb: &TurbulenceParams, rng: &mut R) -> f64 {
    let unit_gamma = |shape: f64, rng: &mut R| {
        if shape.is_finite() {
            Gamma::new(shape, 1.0 / shape)
                .map(|g| g.sample(rng))
                .unwrap_or(1.0)
        } else {
            1.0
        }
    };
    unit_gamma(turb.alpha, rng) * unit_gamma(turb.beta, rng)
}

/// FSO channel gain g = R_s g_p g_a g_g; g_a = 1 without turbulence.
pub fn sample_fso_gain<R: Rng + ?Sized>(
    ch: &FsoChannel,
    turbulence: Option<&TurbulenceParams>,
    rng: &mut R,
) -> f64 {
    let u2 = sample_u2(&ch.hoyt, rng);
    let g_a = turbulence.map_or(1.0, |t| sample_gg(t, rng));
    ch.params.responsivity * ch.g_p * g_a * ch.gml.gain(u2)
}

/// Precomputed per-scenario state for slot sampling.
#[derive(Debug, Clone)]
pub struct Simulator {
    scenario: Scenario,
    config: SimConfig,
    fit: NakagamiFit,
    channel: FsoChannel,
    turbulence: Option<TurbulenceParams>,
    fixed_users: Option<Vec<MuPosition>>,
}

impl Simulator {
    pub fn new(scenario: &Scenario, config: &SimConfig) -> Result<Self> {
        scenario.validate()?;
        config.validate()?;
        let channel = scenario.fso_channel()?;
        let turbulence = config
            .enable_gg
            .then(|| turbulence_params(&scenario.fso, &scenario.geometry));
        let fixed_users = match config.user_drop {
            UserDrop::PerSlot => None,
            UserDrop::Fixed => {
                let mut rng = stream(config.master_seed, DROP_STREAM);
                Some(sample_mu_positions(
                    &scenario.geometry,
                    scenario.density,
                    &mut rng,
                ))
            }
        };
        Ok(Simulator {
            scenario: *scenario,
            config: *config,
            fit: scenario.rf.nakagami_fit()?,
            channel,
            turbulence,
            fixed_users,
        })
    }

    pub fn channel(&self) -> &FsoChannel {
        &self.channel
    }

    /// Instantaneous FSO rate of a slot, from that slot's FSO stream.
    pub fn sample_fso_rate(&self, slot: u64) -> f64 {
        let mut rng = stream(self.config.master_seed, 2 * slot);
        let g = sample_fso_gain(&self.channel, self.turbulence.as_ref(), &mut rng);
        fso_instant_rate(g, &self.channel.params)
    }

    /// Instantaneous RF sum rate and user count of a slot.
    pub fn sample_rf_rate(&self, slot: u64) -> Result<(f64, usize)> {
        let mut rng = stream(self.config.master_seed, 2 * slot + 1);
        let geom = &self.scenario.geometry;
        let rf = &self.scenario.rf;
        let drawn;
        let users = match &self.fixed_users {
            Some(u) => u.as_slice(),
            None => {
                drawn = sample_mu_positions(geom, self.scenario.density, &mut rng);
                drawn.as_slice()
            }
        };
        let z = geom.uav_z();
        let mut total = 0.0;
        for mu in users {
            let (r_dm, d) = mu_uav_distance(geom, mu);
            let p_los = los_probability(elevation_deg(z, r_dm), rf)?;
            let power = sample_rf_power(rf, &self.fit, self.config.shadowing, p_los, &mut rng);
            total += (rf.snr_scale(d * d) * power).ln_1p();
        }
        Ok((rf.w_sub * total / LN_2, users.len()))
    }

    pub fn sample_slot(&self, slot: u64) -> Result<SlotSample> {
        let c_fso_inst = self.sample_fso_rate(slot);
        let (c_rf_inst, users) = self.sample_rf_rate(slot)?;
        Ok(SlotSample {
            c_rf_inst,
            c_fso_inst,
            c_min: c_rf_inst.min(c_fso_inst),
            users,
        })
    }

    fn chunk(&self, index: u64) -> Result<SlotStats> {
        let start = index * CHUNK;
        let end = (start + CHUNK).min(self.config.n_slots);
        let mut stats = SlotStats::default();
        for slot in start..end {
            stats.push(&self.sample_slot(slot)?);
        }
        Ok(stats)
    }

    fn accumulate(&self) -> Result<SlotStats> {
        let chunks = self.config.n_slots.div_ceil(CHUNK);
        if self.config.reproducible {
            let mut level = (0..chunks)
                .into_par_iter()
                .map(|i| self.chunk(i))
                .collect::<Result<Vec<_>>>()?;
            while level.len() > 1 {
                level = level
                    .chunks(2)
                    .map(|p| {
                        if p.len() == 2 {
                            SlotStats::merge(p[0], p[1])
                        } else {
                            p[0]
                        }
                    })
                    .collect();
            }
            Ok(level.pop().unwrap_or_default())
        } else {
            (0..chunks)
                .into_par_iter()
                .map(|i| self.chunk(i))
                .try_reduce(SlotStats::default, |a, b| Ok(SlotStats::merge(a, b)))
        }
    }

    pub fn run(&self) -> Result<RateReport> {
        let stats = match self.config.worker_hint {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid("worker_hint", e.to_string()))?
                .install(|| self.accumulate())?,
            None => self.accumulate()?,
        };
        let (c_rf, c_fso, c_min) = (
            stats.rf.estimate(),
            stats.fso.estimate(),
            stats.min.estimate(),
        );
        Ok(RateReport {
            n_slots: stats.rf.n,
            c_rf,
            c_fso,
            c_min,
            users: stats.users.estimate(),
            c_ba: c_rf.mean.min(c_fso.mean),
            c_nb: c_min.mean,
        })
    }
}

/// Monte Carlo estimates of the hop means and the BA and non-BA rates.
pub fn estimate_rates(scenario: &Scenario, config: &SimConfig) -> Result<RateReport> {
    Simulator::new(scenario, config)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n_slots: u64) -> SimConfig {
        SimConfig {
            n_slots,
            ..SimConfig::default()
        }
    }

    #[test]
    fn single_slot_report() {
        let s = Scenario::default();
        let r = estimate_rates(&s, &small(1)).unwrap();
        let slot = Simulator::new(&s, &small(1))
            .unwrap()
            .sample_slot(0)
            .unwrap();
        assert_eq!(r.c_rf.mean, slot.c_rf_inst);
        assert_eq!(r.c_fso.mean, slot.c_fso_inst);
        assert_eq!(r.c_ba, r.c_nb);
        assert_eq!(r.c_rf.std_err, 0.0);
    }

    #[test]
    fn worker_count_does_not_change_sums() {
        let s = Scenario::default();
        let one = SimConfig {
            worker_hint: Some(1),
            ..small(20_000)
        };
        let four = SimConfig {
            worker_hint: Some(4),
            ..small(20_000)
        };
        assert_eq!(
            estimate_rates(&s, &one).unwrap(),
            estimate_rates(&s, &four).unwrap()
        );
    }

    #[test]
    fn sample_jensen_holds() {
        let r = estimate_rates(&Scenario::default(), &small(5_000)).unwrap();
        assert!(r.c_nb <= r.c_ba);
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..37].iter().for_each(|&x| a.push(x));
        xs[37..].iter().for_each(|&x| b.push(x));
        let m = Moments::merge(a, b);
        assert!((m.mean - all.mean).abs() < 1e-14);
        assert!((m.m2 - all.m2).abs() < 1e-12);
    }

    #[test]
    fn forced_nlos_single_antenna_mean() {
        let mut rng = stream(7, 0);
        let n = 200_000;
        let mean: f64 = (0..n)
            .map(|_| sample_nlos_power(0.5, 1, &mut rng))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.01);
    }

    #[test]
    fn zero_fluctuation_gain_is_deterministic() {
        let mut s = Scenario::default();
        s.stability.sigma_p = 0.0;
        s.stability.sigma_o = 0.0;
        let ch = s.fso_channel().unwrap();
        let mut rng = stream(3, 0);
        let g = sample_fso_gain(&ch, None, &mut rng);
        assert_eq!(g, ch.peak_gain());
    }
}
