//! Oracles independent of the library: double-exponential quadrature,
//! compensated sums and a two-sample-free KS distance.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

const LEVELS: usize = 12;
const T_MAX: f64 = 4.0;

/// Neumaier compensated sum.
pub fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            c += (sum - s) + t;
        } else {
            c += (t - s) + sum;
        }
        sum = s;
    }
    sum + c
}

/// Refines a trapezoid sum over t ∈ [-T_MAX, T_MAX] by halving h until two
/// levels agree to `rel_tol`. `node(t)` returns the weighted integrand.
fn double_exponential(node: impl Fn(f64) -> f64, rel_tol: f64) -> f64 {
    let mut h = 1.0;
    let mut sum = compensated_sum((-4..=4).map(|k| node(k as f64)));
    let mut estimate = h * sum;
    for _ in 0..LEVELS {
        h /= 2.0;
        let n = (T_MAX / h) as i64;
        let fresh = compensated_sum((-n..=n).filter(|k| k % 2 != 0).map(|k| node(k as f64 * h)));
        sum += fresh;
        let next = h * sum;
        if (next - estimate).abs() <= rel_tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// ∫_a^b f by tanh-sinh quadrature; endpoint singularities are allowed and
/// `f` receives distances to both ends to keep them exact.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let node = |t: f64| {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        // distance from the nearer endpoint: half (1 - tanh|u|)
        let d = half / (u.abs().exp() * cu);
        let x = if t < 0.0 { a + d } else { b - d };
        if d <= 0.0 || x <= a || x >= b {
            return 0.0;
        }
        half * FRAC_PI_2 * t.cosh() / (cu * cu) * f(x)
    };
    double_exponential(node, 1e-14)
}

/// ∫_a^∞ f by exp-sinh quadrature with length scale `s`.
pub fn exp_sinh(f: impl Fn(f64) -> f64, a: f64, s: f64) -> f64 {
    let node = |t: f64| {
        let e = (FRAC_PI_2 * t.sinh()).exp();
        let x = a + s * e;
        let v = f(x);
        if !v.is_finite() || e == 0.0 {
            return 0.0;
        }
        s * FRAC_PI_2 * t.cosh() * e * v
    };
    double_exponential(node, 1e-14)
}

/// Relative error, absolute when the reference is zero.
pub fn rel_err(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        value.abs()
    } else {
        ((value - reference) / reference).abs()
    }
}

/// Two-sided KS distance between sorted samples and a CDF.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}
