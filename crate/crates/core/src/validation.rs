//! Acceptance checks AC1-AC9, shared by the acceptance test target and the
//! `validate` command.
//!
//! Each criterion returns a [`CriterionReport`] with the measured values and
//! the fixed tolerances. Oracles used here are independent of the code under
//! test: Monte Carlo for the analytic rates, numerical integration for the
//! distributions and special functions.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fso_link::{
    fso_ergodic_rate_high, fso_ergodic_rate_low, fso_rate_cdf, gml_pdf, SnrRegime,
};
use crate::montecarlo::{estimate_rates, sample_tau, sample_u2, SimConfig, Simulator};
use crate::placement::{optimize, sweep, Axis, Evaluator, Objective, PlacementGrid, Range1d};
use crate::quad::{integrate, integrate_to_infinity};
use crate::rf_link::pdf_tau;
use crate::scenario::Scenario;
use crate::specfun::{
    bessel_i0, bessel_i0_scaled, confluent_1f1, erf, gamma_q, ln_gamma, marcum_q1, pochhammer,
    rice_ie, scaled_exp_integrals, upper_incomplete_gamma, SeriesControl,
};

/// Tolerances pinned by the acceptance criteria.
pub mod tol {
    pub const AC1_RF_REL: f64 = 0.02;
    pub const AC2_FSO_REL: f64 = 0.01;
    pub const AC2_HIGH_GAMMA_BAR: f64 = 100.0;
    pub const AC3_GAP_025: (f64, f64) = (0.02, 0.01);
    pub const AC3_GAP_027: (f64, f64) = (0.034, 0.01);
    pub const AC4_RF_ALT: f64 = 30.0;
    pub const AC4_FSO_ALT: f64 = 100.0;
    pub const AC4_ALT_STEP: f64 = 5.0;
    pub const AC4_BA_OFFSET: (f64, f64) = (11.0, 3.0);
    pub const AC4_NB_SPLIT: (f64, f64) = (8.0, 4.0);
    pub const AC5_Z10: (f64, f64) = (0.07, 0.02);
    pub const AC5_Z30: (f64, f64) = (0.05, 0.02);
    pub const AC5_SHORT: f64 = 0.01;
    pub const AC6_MIN_CONFIGS: usize = 50;
    pub const AC7_KS: f64 = 0.01;
    pub const AC7_EXP: f64 = 1e-10;
    pub const AC8_REL: f64 = 1e-9;
    pub const AC8_RECURRENCE: f64 = 1e-10;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationOptions {
    /// Monte Carlo slots for rate comparisons.
    pub slots: u64,
    pub seed: u64,
    /// Draws per distribution test.
    pub ks_draws: usize,
    /// Random configurations for the ordering law.
    pub random_configs: usize,
    /// Monte Carlo slots per random configuration.
    pub random_config_slots: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            slots: 100_000,
            seed: 1,
            ks_draws: 1_000_000,
            random_configs: 60,
            random_config_slots: 2_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub target: String,
    pub passed: bool,
}

impl Check {
    fn new(
        name: impl Into<String>,
        measured: f64,
        target: impl Into<String>,
        passed: bool,
    ) -> Self {
        Check {
            name: name.into(),
            measured,
            target: target.into(),
            passed,
        }
    }

    /// |measured - centre| ≤ half_width.
    fn band(name: impl Into<String>, measured: f64, (centre, half): (f64, f64)) -> Self {
        Check::new(
            name,
            measured,
            format!("{centre} ± {half}"),
            (measured - centre).abs() <= half,
        )
    }

    fn below(name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Check::new(name, measured, format!("< {limit:e}"), measured < limit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: &'static str,
    pub title: &'static str,
    pub checks: Vec<Check>,
    /// Context that does not affect the verdict.
    pub notes: Vec<String>,
    pub error: Option<String>,
}

impl CriterionReport {
    fn new(id: &'static str, title: &'static str) -> Self {
        CriterionReport {
            id,
            title,
            checks: Vec::new(),
            notes: Vec::new(),
            error: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// One line: id, verdict, title and every check.
    pub fn summary_line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let body = match &self.error {
            Some(e) => format!("error: {e}"),
            None => self
                .checks
                .iter()
                .map(|c| {
                    let mark = if c.passed { "" } else { " !" };
                    format!("{} = {:.6e} [{}]{mark}", c.name, c.measured, c.target)
                })
                .collect::<Vec<_>>()
                .join("; "),
        };
        format!("{} {verdict} {}: {body}", self.id, self.title)
    }
}

fn run(
    id: &'static str,
    title: &'static str,
    f: impl FnOnce(&mut CriterionReport) -> Result<()>,
) -> CriterionReport {
    let mut report = CriterionReport::new(id, title);
    if let Err(e) = f(&mut report) {
        report.error = Some(e.to_string());
    }
    report
}

fn sim(opts: &ValidationOptions, slots: u64) -> SimConfig {
    SimConfig {
        n_slots: slots,
        master_seed: opts.seed,
        ..SimConfig::default()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Mean instantaneous FSO rate over `slots` slots.
fn mc_fso_mean(scenario: &Scenario, config: &SimConfig) -> Result<f64> {
    let s = Simulator::new(scenario, config)?;
    let rates: Vec<f64> = (0..config.n_slots)
        .into_par_iter()
        .map(|i| s.sample_fso_rate(i))
        .collect();
    Ok(rates.iter().sum::<f64>() / rates.len() as f64)
}

/// AC1: analytic RF sum rate against Monte Carlo with lognormal shadowing.
pub fn ac1(opts: &ValidationOptions) -> CriterionReport {
    run("AC1", "analytic vs Monte Carlo RF sum rate", |r| {
        let s = Scenario::default();
        let analytic = s.rf_sum_rate()?;
        let mc = estimate_rates(&s, &sim(opts, opts.slots))?;
        r.checks.push(Check::below(
            "rel_gap",
            rel(analytic, mc.c_rf.mean),
            tol::AC1_RF_REL,
        ));
        r.notes.push(format!(
            "analytic {analytic:.6e}, MC {:.6e} ± {:.2e}",
            mc.c_rf.mean, mc.c_rf.std_err
        ));
        Ok(())
    })
}

/// AC2: FSO ergodic rate closed forms against Monte Carlo in both regimes.
pub fn ac2(opts: &ValidationOptions) -> CriterionReport {
    run("AC2", "analytic vs Monte Carlo FSO rate", |r| {
        let low = Scenario::default();
        let ch = low.fso_channel()?;
        if ch.snr.regime != SnrRegime::Low {
            return Err(Error::Regime(format!(
                "reference gamma_bar {} is not low",
                ch.snr.gamma_bar
            )));
        }
        let a = fso_ergodic_rate_low(&ch, 5)?;
        let m = mc_fso_mean(&low, &sim(opts, opts.slots))?;
        r.checks
            .push(Check::below("low_snr_rel_gap", rel(a, m), tol::AC2_FSO_REL));
        r.notes.push(format!("gamma_bar {:.4}", ch.snr.gamma_bar));

        let high = low.with_gamma_bar(tol::AC2_HIGH_GAMMA_BAR)?;
        let ch = high.fso_channel()?;
        let a = fso_ergodic_rate_high(&ch, false)?;
        let m = mc_fso_mean(&high, &sim(opts, opts.slots))?;
        r.checks.push(Check::below(
            "high_snr_rel_gap",
            rel(a, m),
            tol::AC2_FSO_REL,
        ));
        Ok(())
    })
}

fn nonba_gap(opts: &ValidationOptions, w0: f64, density: f64) -> Result<f64> {
    let mut s = Scenario::default().with_density(density)?;
    s.fso.beam_waist = w0;
    let analytic = s.evaluate()?.c_nb;
    let mc = estimate_rates(&s, &sim(opts, opts.slots))?.c_nb;
    Ok((analytic - mc) / mc)
}

/// AC3: the non-BA approximation exceeds simulation by a small gap that
/// shrinks with the user density.
pub fn ac3(opts: &ValidationOptions) -> CriterionReport {
    run("AC3", "non-BA analytic vs Monte Carlo gap", |r| {
        let g25 = nonba_gap(opts, 0.25e-3, 0.008)?;
        let g27 = nonba_gap(opts, 0.27e-3, 0.008)?;
        let g25_dense = nonba_gap(opts, 0.25e-3, 0.04)?;
        r.checks
            .push(Check::band("gap_w0_0.25mm", g25, tol::AC3_GAP_025));
        r.checks
            .push(Check::band("gap_w0_0.27mm", g27, tol::AC3_GAP_027));
        r.checks.push(Check::new(
            "gap_lambda_0.04",
            g25_dense,
            format!("< {g25:.6e}"),
            g25_dense < g25,
        ));
        Ok(())
    })
}

fn altitude_grid(objective: Objective, evaluator: Evaluator) -> PlacementGrid {
    PlacementGrid {
        evaluator,
        ..PlacementGrid::new(
            Axis::Altitude,
            Range1d::new(10.0, 150.0, 1 + (140.0 / tol::AC4_ALT_STEP) as usize),
            objective,
        )
    }
}

/// Half-width of the Monte Carlo altitude window (m).
const NB_WINDOW: f64 = 15.0;

/// AC4: placement optima.
pub fn ac4(opts: &ValidationOptions) -> CriterionReport {
    run("AC4", "placement optima", |r| {
        let s = Scenario::default();
        let alt = sweep(&altitude_grid(Objective::Ba, Evaluator::Analytic), &s)?;
        let z_at = |i: Option<usize>| i.map_or(f64::NAN, |i| alt.rows[i].position[2]);
        let z_rf = z_at(alt.argmax.rf);
        let z_fso = z_at(alt.argmax.fso);
        r.checks.push(Check::band(
            "rf_argmax_altitude",
            z_rf,
            (tol::AC4_RF_ALT, tol::AC4_ALT_STEP),
        ));
        r.checks.push(Check::band(
            "fso_argmax_altitude",
            z_fso,
            (tol::AC4_FSO_ALT, tol::AC4_ALT_STEP),
        ));

        let grid = PlacementGrid::new(Axis::XOffset, Range1d::new(0.0, 40.0, 41), Objective::Ba);
        let x = optimize(&grid, &s)?;
        let x_ba = x.ba_coordinate().unwrap_or(f64::NAN);
        r.checks
            .push(Check::band("ba_optimum_offset", x_ba, tol::AC4_BA_OFFSET));

        // Non-BA optima on a 1 m grid; the curves are flat near the peak.
        // Monte Carlo covers a window around the analytic optimum.
        let fine = |evaluator, lo: f64, hi: f64| PlacementGrid {
            evaluator,
            ..PlacementGrid::new(
                Axis::Altitude,
                Range1d::new(lo, hi, 1 + (hi - lo) as usize),
                Objective::Nonba,
            )
        };
        let argmax_z = |res: &crate::placement::SweepResult| {
            res.argmax
                .nonba
                .map_or(f64::NAN, |i| res.rows[i].position[2])
        };
        let z_nb = argmax_z(&sweep(&fine(Evaluator::Analytic, 30.0, 100.0), &s)?);
        let lo = (z_nb - NB_WINDOW).max(10.0);
        let hi = z_nb + NB_WINDOW;
        let z_nb_mc = argmax_z(&sweep(
            &fine(
                Evaluator::MonteCarlo {
                    sim: sim(opts, opts.slots),
                },
                lo,
                hi,
            ),
            &s,
        )?);
        if z_nb_mc <= lo || z_nb_mc >= hi {
            r.notes.push(format!(
                "Monte Carlo optimum {z_nb_mc} m lies on the window edge"
            ));
        }
        r.checks.push(Check::band(
            "nonba_optimum_split_analytic_vs_mc",
            (z_nb - z_nb_mc).abs(),
            tol::AC4_NB_SPLIT,
        ));

        let alt_ba = optimize(&altitude_grid(Objective::Ba, Evaluator::Analytic), &s)?;
        let z_ba = alt_ba.ba_coordinate().unwrap_or(f64::NAN);
        r.notes.push(format!(
            "altitude optima: BA {z_ba:.2} m, non-BA analytic {z_nb} m, non-BA MC {z_nb_mc} m, BA minus non-BA {:.2} m", z_ba - z_nb
        ));
        Ok(())
    })
}

/// Position at distance `l` from the GS at altitude `z` in the x-z plane.
fn at_range(s: &Scenario, l: f64, z: f64) -> Result<Scenario> {
    let dz = z - s.geometry.gs_height;
    let x2 = l * l - dz * dz;
    if x2 <= 0.0 {
        return Err(Error::invalid(
            "link_length",
            "shorter than the height difference",
        ));
    }
    s.with_uav_position([x2.sqrt(), 0.0, z])
}

/// FSO rates without and with Gamma-Gamma sampling on common random numbers.
fn turbulence_rates(opts: &ValidationOptions, l: f64, z: f64) -> Result<(f64, f64)> {
    let mut base = Scenario::default();
    base.fso.cn2_ground = 1e-13;
    let s = at_range(&base, l, z)?;
    let plain = mc_fso_mean(&s, &sim(opts, opts.slots))?;
    let gg = mc_fso_mean(
        &s,
        &SimConfig {
            enable_gg: true,
            ..sim(opts, opts.slots)
        },
    )?;
    Ok((plain, gg))
}

/// AC5: Gamma-Gamma turbulence changes the FSO rate by a few percent at 1 km
/// and negligibly at short range.
pub fn ac5(opts: &ValidationOptions) -> CriterionReport {
    run("AC5", "turbulence impact on the FSO rate", |r| {
        // Error of the turbulence-free rate relative to the rate with
        // turbulence, which is the exact reference.
        for (l, z, band) in [(1000.0, 10.0, tol::AC5_Z10), (1000.0, 30.0, tol::AC5_Z30)] {
            let (plain, gg) = turbulence_rates(opts, l, z)?;
            r.checks
                .push(Check::band(format!("gap_{l}m_z{z}"), rel(plain, gg), band));
            r.notes.push(format!(
                "L {l} m, z {z} m: without GG {plain:.6e}, with GG {gg:.6e}, gap relative to the turbulence-free rate {:.4e}",
                rel(gg, plain)
            ));
        }
        for (l, z) in [(200.0, 10.0), (200.0, 30.0), (100.0, 30.0)] {
            let (plain, gg) = turbulence_rates(opts, l, z)?;
            r.checks.push(Check::below(
                format!("gap_{l}m_z{z}"),
                rel(plain, gg),
                tol::AC5_SHORT,
            ));
        }
        Ok(())
    })
}

/// Random valid scenarios, a third in each SNR regime.
pub fn random_scenarios(count: usize, seed: u64) -> Result<Vec<Scenario>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0xAC6);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut s = Scenario::default();
        s.rf.antennas = rng.random_range(1..=4);
        s.fso.kappa_db_per_m = rng.random_range(5e-3..25e-3);
        s.fso.beam_waist = rng.random_range(0.2e-3..0.3e-3);
        s.stability.sigma_p = rng.random_range(1e-3..0.05);
        s.stability.sigma_o = rng.random_range(1e-5..1e-3);
        s.geometry.cell_radius = rng.random_range(30.0..120.0);
        let density = 10f64.powf(rng.random_range(-2.7..-1.3));
        let pos = [
            600.0 - rng.random_range(-20.0..80.0),
            rng.random_range(-40.0..40.0),
            rng.random_range(10.0..200.0),
        ];
        let (lo, hi) = match out.len() % 3 {
            0 => (0.05f64, 0.95f64),
            1 => (1.0, 9.9),
            _ => (10.0, 300.0),
        };
        let gamma_bar = (rng.random_range(lo.ln()..hi.ln())).exp();
        let built = s
            .with_density(density)
            .and_then(|s| s.with_uav_position(pos))
            .and_then(|s| s.with_gamma_bar(gamma_bar));
        match built {
            Ok(s) => out.push(s),
            Err(e) => log::debug!("skipping random scenario: {e}"),
        }
    }
    Ok(out)
}

/// AC6: c_nb ≤ c_ba analytically and per Monte Carlo on random scenarios.
pub fn ac6(opts: &ValidationOptions) -> CriterionReport {
    run("AC6", "ordering law on random configurations", |r| {
        let scenarios = random_scenarios(opts.random_configs.max(tol::AC6_MIN_CONFIGS), opts.seed)?;
        let results: Vec<Result<(bool, bool, SnrRegime)>> = scenarios
            .par_iter()
            .map(|s| {
                let a = s.evaluate()?;
                let m = estimate_rates(s, &sim(opts, opts.random_config_slots))?;
                Ok((a.c_nb <= a.c_ba, m.c_nb <= m.c_ba, a.regime))
            })
            .collect();
        let mut analytic_violations = 0;
        let mut mc_violations = 0;
        let mut regimes = [0usize; 3];
        for res in results {
            let (a_ok, m_ok, regime) = res?;
            analytic_violations += usize::from(!a_ok);
            mc_violations += usize::from(!m_ok);
            regimes[regime as usize] += 1;
        }
        r.checks.push(Check::new(
            "configurations",
            scenarios.len() as f64,
            format!(">= {}", tol::AC6_MIN_CONFIGS),
            scenarios.len() >= tol::AC6_MIN_CONFIGS && regimes.iter().all(|&n| n > 0),
        ));
        r.checks.push(Check::new(
            "analytic_violations",
            analytic_violations as f64,
            "0",
            analytic_violations == 0,
        ));
        r.checks.push(Check::new(
            "mc_violations",
            mc_violations as f64,
            "0",
            mc_violations == 0,
        ));
        r.notes.push(format!("regimes low/mid/high: {regimes:?}"));
        Ok(())
    })
}

/// Two-sided KS distance between sorted samples and a CDF evaluated at
/// `probes` evenly spaced order statistics.
fn ks_at_probes(sorted: &[f64], cdf: &[f64], probe_idx: &[usize]) -> f64 {
    let n = sorted.len() as f64;
    probe_idx
        .iter()
        .zip(cdf)
        .map(|(&i, &f)| (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs()))
        .fold(0.0, f64::max)
}

fn probe_indices(n: usize, probes: usize) -> Vec<usize> {
    (1..probes).map(|k| k * n / probes).collect()
}

/// CDF values at increasing points by cumulative quadrature of a density
/// supported on [lower, ∞).
fn cumulative(pdf: impl Fn(f64) -> f64, lower: f64, points: &[f64]) -> Result<Vec<f64>> {
    let mut acc = 0.0;
    let mut prev = lower;
    let mut out = Vec::with_capacity(points.len());
    for &x in points {
        if x > prev {
            acc += integrate(&pdf, prev, x, 1e-10)?;
            prev = x;
        }
        out.push(acc);
    }
    Ok(out)
}

fn draws<F: Fn(&mut ChaCha8Rng) -> f64 + Sync>(n: usize, seed: u64, stream: u64, f: F) -> Vec<f64> {
    const BLOCK: usize = 10_000;
    let blocks = n.div_ceil(BLOCK);
    let mut v: Vec<f64> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (stream << 32));
            rng.set_stream(b as u64);
            let len = BLOCK.min(n - b * BLOCK);
            (0..len).map(|_| f(&mut rng)).collect::<Vec<_>>()
        })
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// AC7: distribution oracles.
pub fn ac7(opts: &ValidationOptions) -> CriterionReport {
    run("AC7", "distribution oracles", |r| {
        const PROBES: usize = 1000;
        let n = opts.ks_draws;
        let idx = probe_indices(n, PROBES);
        let s = Scenario::default();
        let ctl = SeriesControl::default();

        let fit = s.rf.nakagami_fit()?;
        let (eta2, ant) = (s.rf.eta2, s.rf.antennas);
        let tau = draws(n, opts.seed, 1, |rng| sample_tau(&fit, eta2, ant, rng));
        let pts: Vec<f64> = idx.iter().map(|&i| tau[i]).collect();
        let cdf = cumulative(
            |x| pdf_tau(x, &fit, eta2, ant, &ctl).unwrap_or(f64::NAN),
            0.0,
            &pts,
        )?;
        r.checks.push(Check::below(
            "ks_los_power",
            ks_at_probes(&tau, &cdf, &idx),
            tol::AC7_KS,
        ));

        for (label, pos) in [
            ("reference", [600.0, 0.0, 30.0]),
            ("offset", [400.0, 150.0, 180.0]),
        ] {
            let ch = s.with_uav_position(pos)?.fso_channel()?;
            let gml = ch.gml;
            let g = draws(n, opts.seed, 2, |rng| gml.gain(sample_u2(&ch.hoyt, rng)));
            let pts: Vec<f64> = idx.iter().map(|&i| g[i]).collect();
            let cdf = cumulative(
                |x| gml_pdf(x, &gml, &ch.hoyt).unwrap_or(f64::NAN),
                0.0,
                &pts,
            )?;
            r.checks.push(Check::below(
                format!("ks_gml_{label}"),
                ks_at_probes(&g, &cdf, &idx),
                tol::AC7_KS,
            ));

            let rates = draws(n, opts.seed, 3, |rng| {
                ch.rate_at_u2(sample_u2(&ch.hoyt, rng))
            });
            let cdf = idx
                .iter()
                .map(|&i| fso_rate_cdf(rates[i], &ch))
                .collect::<Result<Vec<_>>>()?;
            r.checks.push(Check::below(
                format!("ks_rate_cdf_{label}"),
                ks_at_probes(&rates, &cdf, &idx),
                tol::AC7_KS,
            ));
            r.notes.push(format!(
                "{label}: m = {:.4}, omega = {:.4e}",
                ch.hoyt.m, ch.hoyt.omega
            ));
        }

        let hover = s
            .with_uav_position([600.0, 0.0, s.geometry.gs_height])?
            .fso_channel()?;
        let cmax = hover.max_rate();
        let mut worst: f64 = 0.0;
        for k in 1..200 {
            let x = cmax * k as f64 / 200.0;
            let exact = (-hover.chi(x) / hover.hoyt.omega).exp();
            worst = worst.max((fso_rate_cdf(x, &hover)? - exact).abs());
        }
        r.checks
            .push(Check::below("m1_exponential_abs_err", worst, tol::AC7_EXP));
        Ok(())
    })
}

/// Records a bounded check, turning an evaluation error into a failed check.
fn checked(r: &mut CriterionReport, name: &str, value: Result<f64>, limit: f64) {
    match value {
        Ok(v) => r.checks.push(Check::below(name, v, limit)),
        Err(e) => {
            r.notes.push(format!("{name}: {e}"));
            r.checks
                .push(Check::new(name, f64::NAN, format!("< {limit:e}"), false));
        }
    }
}

/// Largest relative deviation of `f` from `oracle` over `points`.
fn worst_rel<P: Copy>(
    points: &[P],
    f: impl Fn(P) -> Result<f64>,
    oracle: impl Fn(P) -> Result<f64>,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &p in points {
        let (v, o) = (f(p)?, oracle(p)?);
        let e = if o == 0.0 {
            v.abs()
        } else {
            ((v - o) / o).abs()
        };
        worst = worst.max(e);
    }
    Ok(worst)
}

fn grid2(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    xs.iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
        .collect()
}

const ORACLE_TOL: f64 = 1e-12;

/// ₁F₁(a; b; x) for b > a from the Euler integral.
fn kummer_integral(a: f64, b: f64, x: f64) -> Result<f64> {
    let c = b - a;
    let kernel = |t: f64| (x * t).exp() * t.powf(a - 1.0) * (1.0 - t).powf(c - 1.0);
    // t = s^(1/p) near 0 and 1 - t = s^(1/q) near 1 absorb powers below one.
    let left = if a < 1.0 {
        integrate(
            |s: f64| {
                let t = s.powf(1.0 / a);
                (x * t).exp() * (1.0 - t).powf(c - 1.0)
            },
            0.0,
            0.5f64.powf(a),
            ORACLE_TOL,
        )? / a
    } else {
        integrate(kernel, 0.0, 0.5, ORACLE_TOL)?
    };
    let right = if c < 1.0 {
        integrate(
            |s: f64| {
                let t = 1.0 - s.powf(1.0 / c);
                (x * t).exp() * t.powf(a - 1.0)
            },
            0.0,
            0.5f64.powf(c),
            ORACLE_TOL,
        )? / c
    } else {
        integrate(kernel, 0.5, 1.0, ORACLE_TOL)?
    };
    let norm = (ln_gamma(b) - ln_gamma(a) - ln_gamma(c)).exp();
    Ok(norm * (left + right))
}

/// ₁F₁(a; b; x) oracle for any integer b ≥ 1: Euler integrals at two large b
/// and the stable downward recurrence
/// b(b-1)M(b-1) = b(b-1+x)M(b) - x(b-a)M(b+1).
pub fn kummer_oracle(a: f64, b: u32, x: f64) -> Result<f64> {
    let top = (a.ceil() as u32 + 2).max(b + 1);
    let mut hi = kummer_integral(a, (top + 1) as f64, x)?;
    let mut mid = kummer_integral(a, top as f64, x)?;
    let mut bb = top;
    while bb > b {
        let bf = bb as f64;
        let lo = (bf * (bf - 1.0 + x) * mid - x * (bf - a) * hi) / (bf * (bf - 1.0));
        hi = mid;
        mid = lo;
        bb -= 1;
    }
    Ok(mid)
}

/// AC8: special functions against quadrature oracles.
pub fn ac8(_opts: &ValidationOptions) -> CriterionReport {
    run("AC8", "special functions vs quadrature oracles", |r| {
        let ctl = SeriesControl::default();

        let g = grid2(&[0.5, 1.0, 2.5, 5.8, 10.0, 30.0], &[0.1, 1.0, 5.0, 20.0]);
        checked(
            r,
            "gamma_q",
            worst_rel(
                &g,
                |(a, x)| gamma_q(a, x),
                |(a, x)| {
                    let scale = a.max(1.0);
                    let v = integrate_to_infinity(
                        |t| ((a - 1.0) * t.ln() - t - ln_gamma(a)).exp(),
                        x,
                        scale,
                        ORACLE_TOL,
                    )?;
                    Ok(v)
                },
            ),
            tol::AC8_REL,
        );

        let g = grid2(
            &[0.0, -0.5, -1.0, -2.0, -2.5, -3.0, -5.0],
            &[0.1, 1.0, 10.0],
        );
        checked(
            r,
            "upper_incomplete_gamma",
            worst_rel(
                &g,
                |(a, x)| upper_incomplete_gamma(a, x),
                |(a, x)| {
                    integrate_to_infinity(
                        |t| ((a - 1.0) * t.ln() - t).exp(),
                        x,
                        x.max(1.0),
                        ORACLE_TOL,
                    )
                },
            ),
            tol::AC8_REL,
        );

        let g = grid2(&[0.01, 0.1, 1.0, 5.0, 20.0, 100.0], &[1.0, 2.0, 3.0, 5.0]);
        checked(
            r,
            "scaled_exp_integrals",
            worst_rel(
                &g,
                |(x, n)| Ok(scaled_exp_integrals(x, n as usize)?[n as usize - 1]),
                |(x, n)| {
                    integrate_to_infinity(
                        |t| (-x * (t - 1.0)).exp() * t.powf(-n),
                        1.0,
                        (1.0 / x).max(1.0),
                        ORACLE_TOL,
                    )
                },
            ),
            tol::AC8_REL,
        );

        let g = grid2(&[0.5, 1.0, 2.5, 5.8], &[1.0, 2.0, 3.0, 4.0])
            .into_iter()
            .flat_map(|(a, b)| [0.0, 0.5, 5.0, 30.0].map(move |x| (a, b, x)))
            .collect::<Vec<_>>();
        checked(
            r,
            "confluent_1f1",
            worst_rel(
                &g,
                |(a, b, x)| Ok(confluent_1f1(a, b as u32, x, &ctl)?.value),
                |(a, b, x)| kummer_oracle(a, b as u32, x),
            ),
            tol::AC8_REL,
        );

        let xs: Vec<f64> = std::iter::once(0.0)
            .chain((0..24).map(|k| 1e-3 * 10f64.powf(k as f64 * 5.8 / 23.0)))
            .collect();
        checked(
            r,
            "bessel_i0_scaled",
            worst_rel(
                &xs,
                |x| Ok(bessel_i0_scaled(x)),
                |x| Ok(integrate(|t: f64| (x * (t.cos() - 1.0)).exp(), 0.0, PI, ORACLE_TOL)? / PI),
            ),
            tol::AC8_REL,
        );
        checked(
            r,
            "bessel_i0",
            worst_rel(&xs[..22], bessel_i0, |x| {
                Ok(integrate(|t: f64| (x * t.cos()).exp(), 0.0, PI, ORACLE_TOL)? / PI)
            }),
            tol::AC8_REL,
        );

        let g = grid2(
            &[0.0, 0.5, 1.0, 2.0, 5.0, 10.0],
            &[0.5, 1.0, 2.0, 5.0, 8.0, 12.0],
        );
        checked(
            r,
            "marcum_q1",
            worst_rel(
                &g,
                |(a, b)| marcum_q1(a, b),
                |(a, b)| {
                    integrate_to_infinity(
                        |x| x * (-(x - a).powi(2) / 2.0).exp() * bessel_i0_scaled(a * x),
                        b,
                        1.0,
                        ORACLE_TOL,
                    )
                },
            ),
            tol::AC8_REL,
        );

        let g = grid2(&[0.0, 0.3, 0.5, 0.9, 0.99], &[0.1, 1.0, 2.0, 10.0, 50.0]);
        checked(
            r,
            "rice_ie",
            worst_rel(
                &g,
                |(v, t)| rice_ie(v, t),
                |(v, t)| {
                    integrate(
                        |u: f64| (-(1.0 - v) * u).exp() * bessel_i0_scaled(v * u),
                        0.0,
                        t,
                        ORACLE_TOL,
                    )
                },
            ),
            tol::AC8_REL,
        );

        let xs: Vec<f64> = (0..24)
            .map(|k| -4.0 + 9.0 * k as f64 / 23.0 + 1e-3)
            .collect();
        checked(
            r,
            "erf",
            worst_rel(
                &xs,
                |x| Ok(erf(x)),
                |x| Ok(2.0 / PI.sqrt() * integrate(|t: f64| (-t * t).exp(), 0.0, x, ORACLE_TOL)?),
            ),
            tol::AC8_REL,
        );

        let g = grid2(
            &[0.5, 1.0, 2.5, 5.8, 12.3],
            &[0.0, 1.0, 2.0, 5.0, 10.0, 40.0],
        );
        checked(
            r,
            "pochhammer",
            worst_rel(
                &g,
                |(x, n)| Ok(pochhammer(x, n as u32)),
                |(x, n)| Ok((ln_gamma(x + n) - ln_gamma(x)).exp()),
            ),
            tol::AC8_REL,
        );

        let mut worst: f64 = 0.0;
        for a in 0..=10 {
            let a = -(a as f64);
            for x in [0.1, 1.0, 10.0] {
                let lhs = a * upper_incomplete_gamma(a, x)? + x.powf(a) * (-x).exp();
                let rhs = upper_incomplete_gamma(a + 1.0, x)?;
                worst = worst.max(((lhs - rhs) / rhs).abs());
            }
        }
        r.checks.push(Check::below(
            "incomplete_gamma_recurrence",
            worst,
            tol::AC8_RECURRENCE,
        ));
        Ok(())
    })
}

/// Best BA (crossing) and non-BA (grid argmax) x-offsets.
fn offset_optima(s: &Scenario) -> Result<(f64, f64)> {
    let grid = PlacementGrid::new(
        Axis::XOffset,
        Range1d::new(0.0, 80.0, 161),
        Objective::Nonba,
    );
    let res = optimize(&grid, s)?;
    Ok((res.ba_coordinate().unwrap_or(f64::NAN), res.best.offset))
}

/// AC9: worse weather and denser users move both optima toward the GS.
pub fn ac9(_opts: &ValidationOptions) -> CriterionReport {
    run(
        "AC9",
        "weather and density shift the optimum toward the GS",
        |r| {
            let base = Scenario::default();
            let (ba0, nb0) = offset_optima(&base)?;
            let mut wet = base;
            wet.fso.kappa_db_per_m = 18e-3;
            let (ba_k, nb_k) = offset_optima(&wet)?;
            let (ba_l, nb_l) = offset_optima(&base.with_density(0.04)?)?;
            let shift = |name: &str, v: f64, v0: f64| Check::new(name, v - v0, "> 0", v - v0 > 0.0);
            r.checks.push(shift("ba_shift_kappa", ba_k, ba0));
            r.checks.push(shift("nonba_shift_kappa", nb_k, nb0));
            r.checks.push(shift("ba_shift_density", ba_l, ba0));
            r.checks.push(shift("nonba_shift_density", nb_l, nb0));
            r.notes.push(format!(
            "offsets (BA, non-BA): base ({ba0:.2}, {nb0}), kappa 18e-3 ({ba_k:.2}, {nb_k}), lambda 0.04 ({ba_l:.2}, {nb_l})"
        ));
            Ok(())
        },
    )
}

pub type CriterionFn = fn(&ValidationOptions) -> CriterionReport;

/// All criteria in order.
pub const CRITERIA: [(&str, CriterionFn); 9] = [
    ("AC1", ac1),
    ("AC2", ac2),
    ("AC3", ac3),
    ("AC4", ac4),
    ("AC5", ac5),
    ("AC6", ac6),
    ("AC7", ac7),
    ("AC8", ac8),
    ("AC9", ac9),
];

pub fn run_all(opts: &ValidationOptions) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|(_, f)| f(opts)).collect()
}
