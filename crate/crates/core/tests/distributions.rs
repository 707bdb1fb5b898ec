mod common;

use common::{exp_sinh, ks_distance, rel_err, tanh_sinh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use uav_relay_core::fso_link::{
    fso_rate_cdf, gml_pdf, squared_hoyt_pdf, squared_hoyt_tail, turbulence_params,
};
use uav_relay_core::montecarlo::{sample_gg, sample_los_amplitude, sample_tau, sample_u2};
use uav_relay_core::rf_link::pdf_tau;
use uav_relay_core::specfun::SeriesControl;
use uav_relay_core::Scenario;

const DRAWS: usize = 200_000;
const KS: f64 = 0.01;

fn sorted_draws(seed: u64, mut f: impl FnMut(&mut ChaCha8Rng) -> f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..DRAWS).map(|_| f(&mut rng)).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// KS distance at 199 order-statistic knots, with the model CDF accumulated
/// by quadrature of the pdf between knots.
fn ks_from_pdf(sorted: &[f64], pdf: impl Fn(f64) -> f64) -> f64 {
    let knots: Vec<f64> = (1..200).map(|k| sorted[k * sorted.len() / 200]).collect();
    let mut cdf = Vec::with_capacity(knots.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &k in &knots {
        acc += tanh_sinh(&pdf, prev, k);
        prev = k;
        cdf.push(acc);
    }
    let n = sorted.len() as f64;
    knots
        .iter()
        .zip(&cdf)
        .map(|(&k, &f)| {
            let i = sorted.partition_point(|&x| x < k) as f64;
            (f - i / n).abs().max((f - (i + 1.0) / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn los_power_pdf_matches_generative_sampler() {
    let s = Scenario::default();
    let fit = s.rf.nakagami_fit().unwrap();
    let ctl = SeriesControl::default();
    for n in [1, 2, 4] {
        let draws = sorted_draws(11 + n as u64, |rng| sample_tau(&fit, s.rf.eta2, n, rng));
        let d = ks_from_pdf(&draws, |x| pdf_tau(x, &fit, s.rf.eta2, n, &ctl).unwrap());
        assert!(d < KS, "N = {n}: KS {d}");
    }
}

#[test]
fn los_power_pdf_normalizes() {
    let s = Scenario::default();
    let fit = s.rf.nakagami_fit().unwrap();
    let ctl = SeriesControl::default();
    // The density decays like e^{-x/(2η²)}; nothing is left beyond x = 80.
    let total = tanh_sinh(|x| pdf_tau(x, &fit, s.rf.eta2, 2, &ctl).unwrap(), 0.0, 80.0);
    assert!(rel_err(total, 1.0) < 1e-9, "{total}");
}

#[test]
fn nakagami_fit_matches_lognormal_moments() {
    let s = Scenario::default();
    let fit = s.rf.nakagami_fit().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m2: f64 = (0..DRAWS)
        .map(|_| {
            sample_los_amplitude(
                &s.rf,
                &fit,
                uav_relay_core::ShadowingMode::Lognormal,
                &mut rng,
            )
            .powi(2)
        })
        .sum::<f64>()
        / DRAWS as f64;
    assert!(rel_err(m2, fit.omega) < 0.01, "{m2} vs {}", fit.omega);
}

/// |u|² for u ~ N(0, Σ) drawn through the Cholesky factor of Σ.
fn cholesky_u2(sigma: &[[f64; 2]; 2], rng: &mut ChaCha8Rng) -> f64 {
    let l11 = sigma[0][0].sqrt();
    let l21 = sigma[1][0] / l11;
    let l22 = (sigma[1][1] - l21 * l21).max(0.0).sqrt();
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    let (u1, u2) = (l11 * z1, l21 * z1 + l22 * z2);
    u1 * u1 + u2 * u2
}

#[test]
fn gml_pdf_matches_covariance_driven_sampler() {
    let base = Scenario::default();
    for pos in [[600.0, 0.0, 30.0], [450.0, -120.0, 160.0]] {
        let ch = base.with_uav_position(pos).unwrap().fso_channel().unwrap();
        let draws = sorted_draws(5, |rng| ch.gml.gain(cholesky_u2(&ch.hoyt.sigma, rng)));
        let d = ks_from_pdf(&draws, |g| gml_pdf(g, &ch.gml, &ch.hoyt).unwrap());
        assert!(d < KS, "{pos:?}: KS {d}");
    }
}

#[test]
fn squared_hoyt_tail_integrates_the_pdf() {
    let ch = Scenario::default().fso_channel().unwrap();
    for chi in [0.0, 0.01, 0.05, 0.2, 0.6] {
        let direct = exp_sinh(|x| squared_hoyt_pdf(x, &ch.hoyt), chi, ch.hoyt.omega);
        let tail = squared_hoyt_tail(chi, &ch.hoyt).unwrap();
        assert!(
            rel_err(tail, direct) < 1e-9,
            "chi {chi}: {tail} vs {direct}"
        );
    }
}

#[test]
fn rate_cdf_matches_empirical_rates() {
    let base = Scenario::default();
    for (pos, gamma_bar) in [
        ([600.0, 0.0, 30.0], None),
        ([520.0, 40.0, 70.0], Some(30.0)),
    ] {
        let mut s = base.with_uav_position(pos).unwrap();
        if let Some(g) = gamma_bar {
            s = s.with_gamma_bar(g).unwrap();
        }
        let ch = s.fso_channel().unwrap();
        let draws = sorted_draws(9, |rng| ch.rate_at_u2(sample_u2(&ch.hoyt, rng)));
        let d = ks_distance(&draws, |x| fso_rate_cdf(x, &ch).unwrap());
        assert!(d < KS, "{pos:?}: KS {d}");
    }
}

#[test]
fn gamma_gamma_sampler_has_unit_mean_and_model_variance() {
    let mut s = Scenario::default();
    s.fso.cn2_ground = 1e-13;
    let s = s.with_uav_position([995.0, 0.0, 10.0]).unwrap();
    let turb = turbulence_params(&s.fso, &s.geometry);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let x: Vec<f64> = (0..DRAWS).map(|_| sample_gg(&turb, &mut rng)).collect();
    let mean = x.iter().sum::<f64>() / DRAWS as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (DRAWS - 1) as f64;
    assert!((mean - 1.0).abs() < 0.005, "mean {mean}");
    assert!(
        rel_err(var, turb.scintillation_var) < 0.05,
        "{var} vs {}",
        turb.scintillation_var
    );
}
