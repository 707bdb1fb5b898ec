//! Grid search over UAV positions and scenario parameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{estimate_rates, SimConfig};
use crate::relay_rates::Bottleneck;
use crate::scenario::Scenario;

/// Target relative mismatch |C_RF - C_FSO| / C_BA at a bisected crossing.
pub const CROSSING_TOL: f64 = 1e-3;

const BISECTION_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// z_d over [min, max] at the scenario's (x_d, y_d).
    Altitude,
    /// x_d = x₀ - offset, offset over [min, max], toward the GS for positive
    /// offsets.
    XOffset,
    /// x-offset over `range` crossed with altitude over `altitude_range`.
    Custom2d,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Ba,
    Nonba,
    Rf,
    Fso,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Evaluator {
    Analytic,
    MonteCarlo { sim: SimConfig },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range1d {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range1d {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Range1d { min, max, steps }
    }

    /// Evenly spaced points; equal endpoints collapse to one point.
    pub fn points(&self) -> Vec<f64> {
        if self.min == self.max {
            return vec![self.min];
        }
        let n = self.steps;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::invalid(name, "range must be finite"));
        }
        if self.min > self.max {
            return Err(Error::invalid(name, "min must not exceed max"));
        }
        if self.min < self.max && self.steps < 2 {
            return Err(Error::invalid(name, "steps must be at least 2"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementGrid {
    pub axis: Axis,
    pub range: Range1d,
    /// Altitudes for [`Axis::Custom2d`]; ignored otherwise.
    pub altitude_range: Option<Range1d>,
    pub objective: Objective,
    pub evaluator: Evaluator,
}

impl PlacementGrid {
    pub fn new(axis: Axis, range: Range1d, objective: Objective) -> Self {
        PlacementGrid {
            axis,
            range,
            altitude_range: None,
            objective,
            evaluator: Evaluator::Analytic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.range.validate("range")?;
        if self.axis == Axis::Custom2d {
            self.altitude_range
                .ok_or_else(|| Error::invalid("altitude_range", "required for custom_2d"))?
                .validate("altitude_range")?;
        }
        Ok(())
    }

    /// Candidate UAV positions in grid order with their (offset, altitude)
    /// coordinates.
    fn candidates(&self, base: &Scenario) -> Vec<([f64; 3], f64, f64)> {
        let [x, y, z] = base.geometry.uav_position;
        let x0 = base.geometry.cell_center[0];
        let at = |offset: f64, alt: f64| ([x0 - offset, y, alt], offset, alt);
        match self.axis {
            Axis::Altitude => self
                .range
                .points()
                .into_iter()
                .map(|a| ([x, y, a], x0 - x, a))
                .collect(),
            Axis::XOffset => self.range.points().into_iter().map(|o| at(o, z)).collect(),
            Axis::Custom2d => {
                let alts = self.altitude_range.map(|r| r.points()).unwrap_or_default();
                self.range
                    .points()
                    .into_iter()
                    .flat_map(|o| alts.iter().map(move |&a| at(o, a)).collect::<Vec<_>>())
                    .collect()
            }
        }
    }
}

/// Hop and end-to-end rates at one point (bit/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointRates {
    pub c_rf: f64,
    pub c_fso: f64,
    pub c_ba: f64,
    pub c_nb: f64,
}

impl PointRates {
    pub fn get(&self, objective: Objective) -> f64 {
        match objective {
            Objective::Ba => self.c_ba,
            Objective::Nonba => self.c_nb,
            Objective::Rf => self.c_rf,
            Objective::Fso => self.c_fso,
        }
    }

    pub fn bottleneck(&self) -> Bottleneck {
        crate::relay_rates::ba_rate(self.c_rf, self.c_fso)
            .map(|(_, b)| b)
            .unwrap_or(Bottleneck::Balanced)
    }
}

pub fn evaluate_point(scenario: &Scenario, evaluator: &Evaluator) -> Result<PointRates> {
    match evaluator {
        Evaluator::Analytic => {
            let r = scenario.evaluate()?;
            Ok(PointRates {
                c_rf: r.c_rf,
                c_fso: r.c_fso,
                c_ba: r.c_ba,
                c_nb: r.c_nb,
            })
        }
        Evaluator::MonteCarlo { sim } => {
            let r = estimate_rates(scenario, sim)?;
            Ok(PointRates {
                c_rf: r.c_rf.mean,
                c_fso: r.c_fso.mean,
                c_ba: r.c_ba,
                c_nb: r.c_nb,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    /// Distance x₀ - x_d from the cell centre toward the GS (m).
    pub offset: f64,
    pub position: [f64; 3],
    /// `None` when the evaluation at this point failed.
    pub rates: Option<PointRates>,
    pub error: Option<String>,
}

/// Index of the first row attaining the maximum of `objective`.
fn argmax(rows: &[SweepRow], objective: Objective) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for row in rows {
        if let Some(v) = row.rates.map(|r| r.get(objective)) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((row.index, v));
            }
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Argmaxima {
    pub rf: Option<usize>,
    pub fso: Option<usize>,
    pub ba: Option<usize>,
    pub nonba: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub grid: PlacementGrid,
    pub rows: Vec<SweepRow>,
    pub argmax: Argmaxima,
}

impl SweepResult {
    pub fn best(&self, objective: Objective) -> Option<&SweepRow> {
        argmax(&self.rows, objective).map(|i| &self.rows[i])
    }
}

/// Evaluates every grid point in parallel, re-pointing the UAV at the GS at
/// each position. Failed points are kept with their error message.
pub fn sweep(grid: &PlacementGrid, scenario: &Scenario) -> Result<SweepResult> {
    grid.validate()?;
    scenario.validate()?;
    let rows: Vec<SweepRow> = grid
        .candidates(scenario)
        .into_par_iter()
        .enumerate()
        .map(|(index, (position, offset, _))| {
            let result = scenario
                .with_uav_position(position)
                .and_then(|s| evaluate_point(&s, &grid.evaluator));
            if let Err(e) = &result {
                log::warn!("sweep point {index} at {position:?} failed: {e}");
            }
            SweepRow {
                index,
                offset,
                position,
                rates: result.as_ref().ok().copied(),
                error: result.err().map(|e| e.to_string()),
            }
        })
        .collect();
    let argmax = Argmaxima {
        rf: argmax(&rows, Objective::Rf),
        fso: argmax(&rows, Objective::Fso),
        ba: argmax(&rows, Objective::Ba),
        nonba: argmax(&rows, Objective::Nonba),
    };
    Ok(SweepResult {
        grid: *grid,
        rows,
        argmax,
    })
}

/// RF/FSO intersection along a one-dimensional axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Crossing {
    Found {
        coordinate: f64,
        position: [f64; 3],
        rates: PointRates,
        /// |C_RF - C_FSO| / C_BA at the returned point.
        mismatch: f64,
    },
    /// The curves do not cross on the grid; the grid BA argmax applies.
    NoCrossing,
    /// Not attempted (two-dimensional grid).
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub objective: Objective,
    pub best: SweepRow,
    pub best_value: f64,
    /// Objective value at every grid point, in grid order.
    pub trace: Vec<f64>,
    pub crossing: Crossing,
    pub sweep: SweepResult,
}

impl OptimizeResult {
    /// Best BA coordinate: the bisected crossing if there is one, otherwise
    /// the grid argmax.
    pub fn ba_coordinate(&self) -> Option<f64> {
        match self.crossing {
            Crossing::Found { coordinate, .. } => Some(coordinate),
            _ => self
                .sweep
                .best(Objective::Ba)
                .map(|r| coordinate_of(self.sweep.grid.axis, r)),
        }
    }
}

fn coordinate_of(axis: Axis, row: &SweepRow) -> f64 {
    match axis {
        Axis::Altitude => row.position[2],
        Axis::XOffset | Axis::Custom2d => row.offset,
    }
}

fn position_at(axis: Axis, base: &Scenario, t: f64) -> [f64; 3] {
    let [x, y, z] = base.geometry.uav_position;
    match axis {
        Axis::Altitude => [x, y, t],
        _ => [base.geometry.cell_center[0] - t, y, z],
    }
}

/// Bisection on C_RF - C_FSO inside the bracket around the BA argmax.
fn find_crossing(res: &SweepResult, scenario: &Scenario) -> Result<Crossing> {
    let axis = res.grid.axis;
    if axis == Axis::Custom2d {
        return Ok(Crossing::NotApplicable);
    }
    let diffs: Vec<Option<(f64, f64)>> = res
        .rows
        .iter()
        .map(|r| r.rates.map(|p| (coordinate_of(axis, r), p.c_rf - p.c_fso)))
        .collect();
    let brackets: Vec<(f64, f64, f64, f64)> = diffs
        .windows(2)
        .filter_map(|w| match (w[0], w[1]) {
            (Some((a, fa)), Some((b, fb))) if fa * fb <= 0.0 && !(fa == 0.0 && fb == 0.0) => {
                Some((a, fa, b, fb))
            }
            _ => None,
        })
        .collect();
    let Some(best) = res.best(Objective::Ba) else {
        return Ok(Crossing::NoCrossing);
    };
    let target = coordinate_of(axis, best);
    let Some(&(mut a, mut fa, mut b, _)) = brackets.iter().min_by(|x, y| {
        let dx = (0.5 * (x.0 + x.2) - target).abs();
        let dy = (0.5 * (y.0 + y.2) - target).abs();
        dx.total_cmp(&dy)
    }) else {
        return Ok(Crossing::NoCrossing);
    };
    let eval = |t: f64| -> Result<PointRates> {
        let s = scenario.with_uav_position(position_at(axis, scenario, t))?;
        evaluate_point(&s, &res.grid.evaluator)
    };
    let mut mid = 0.5 * (a + b);
    let mut rates = eval(mid)?;
    for _ in 0..BISECTION_ITERS {
        let f = rates.c_rf - rates.c_fso;
        if f == 0.0 || (f.abs() / rates.c_ba) < 1e-3 * CROSSING_TOL || (b - a).abs() < 1e-9 {
            break;
        }
        if f * fa < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = f;
        }
        mid = 0.5 * (a + b);
        rates = eval(mid)?;
    }
    Ok(Crossing::Found {
        coordinate: mid,
        position: position_at(axis, scenario, mid),
        rates,
        mismatch: (rates.c_rf - rates.c_fso).abs() / rates.c_ba,
    })
}

/// First grid point attaining the maximum of the grid objective, plus the
/// RF/FSO crossing for the BA rate.
pub fn optimize(grid: &PlacementGrid, scenario: &Scenario) -> Result<OptimizeResult> {
    let res = sweep(grid, scenario)?;
    let best = res
        .best(grid.objective)
        .cloned()
        .ok_or_else(|| Error::invalid("grid", "no grid point could be evaluated"))?;
    let best_value = best
        .rates
        .map(|r| r.get(grid.objective))
        .unwrap_or(f64::NAN);
    let trace = res
        .rows
        .iter()
        .map(|r| r.rates.map_or(f64::NAN, |p| p.get(grid.objective)))
        .collect();
    let crossing = find_crossing(&res, scenario)?;
    Ok(OptimizeResult {
        objective: grid.objective,
        best,
        best_value,
        trace,
        crossing,
        sweep: res,
    })
}

/// Scenario parameter varied by [`parameter_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    /// User density λ; W_sub follows the subchannel policy.
    Density,
    /// Attenuation κ (dB/m).
    Kappa,
    /// FSO SNR γ̄, set by scaling p̄.
    GammaBar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterRow {
    pub value: f64,
    pub rates: Option<PointRates>,
}

pub fn apply_parameter(scenario: &Scenario, param: Parameter, value: f64) -> Result<Scenario> {
    match param {
        Parameter::Density => scenario.with_density(value),
        Parameter::Kappa => {
            let mut s = *scenario;
            s.fso.kappa_db_per_m = value;
            s.validate()?;
            Ok(s)
        }
        Parameter::GammaBar => scenario.with_gamma_bar(value),
    }
}

/// Rates over a range of one scenario parameter at a fixed UAV position.
pub fn parameter_sweep(
    scenario: &Scenario,
    param: Parameter,
    range: &Range1d,
    evaluator: &Evaluator,
) -> Result<Vec<ParameterRow>> {
    range.validate("range")?;
    Ok(range
        .points()
        .into_par_iter()
        .map(|value| {
            let rates =
                apply_parameter(scenario, param, value).and_then(|s| evaluate_point(&s, evaluator));
            if let Err(e) = &rates {
                log::warn!("{param:?} = {value} failed: {e}");
            }
            ParameterRow {
                value,
                rates: rates.ok(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapsed_range_is_one_row() {
        let grid = PlacementGrid::new(Axis::Altitude, Range1d::new(30.0, 30.0, 2), Objective::Ba);
        let res = sweep(&grid, &Scenario::default()).unwrap();
        assert_eq!(res.rows.len(), 1);
        assert_eq!(res.rows[0].position[2], 30.0);
    }

    #[test]
    fn range_points_hit_endpoints() {
        let p = Range1d::new(10.0, 20.0, 11).points();
        assert_eq!(p.len(), 11);
        assert_eq!(p[0], 10.0);
        assert_eq!(p[10], 20.0);
        assert!((p[3] - 13.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_ranges_rejected() {
        assert!(Range1d::new(2.0, 1.0, 5).validate("r").is_err());
        assert!(Range1d::new(1.0, 2.0, 1).validate("r").is_err());
    }

    #[test]
    fn monotone_objective_returns_endpoint() {
        // FSO rate increases toward the GS along the x axis at 30 m.
        let grid = PlacementGrid::new(Axis::XOffset, Range1d::new(0.0, 20.0, 5), Objective::Fso);
        let opt = optimize(&grid, &Scenario::default()).unwrap();
        assert_eq!(opt.best.offset, 20.0);
    }

    #[test]
    fn ba_crossing_is_tight() {
        let grid = PlacementGrid::new(Axis::XOffset, Range1d::new(0.0, 40.0, 21), Objective::Ba);
        let opt = optimize(&grid, &Scenario::default()).unwrap();
        match opt.crossing {
            Crossing::Found { mismatch, .. } => assert!(mismatch < CROSSING_TOL),
            other => panic!("expected a crossing, got {other:?}"),
        }
    }
}
