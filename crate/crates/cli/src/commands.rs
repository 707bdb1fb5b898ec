//! Subcommand implementations.

use std::path::Path;

use anyhow::{bail, Result};
use serde::Serialize;
use serde_json::{json, Value};
use uav_relay_core::config::{Conversion, ParameterSweepSection, PlacementSection};
use uav_relay_core::placement::{
    optimize, parameter_sweep, sweep, Parameter, PointRates, SweepRow,
};
use uav_relay_core::{
    estimate_rates, run_all, Axis, Evaluator, LoadedConfig, Objective, PlacementGrid, Range1d,
    Scenario, ScenarioConfig, SimConfig, ValidationOptions,
};

use crate::output::{emit_table, say, Cell, Table};

pub const RATE_COLUMNS: &[&str] = &[
    "c_rf",
    "c_fso",
    "c_fso_numeric",
    "c_ba",
    "c_nb",
    "gamma_bar",
    "regime",
    "method",
    "bottleneck",
    "mc_slots",
    "mc_c_rf",
    "mc_c_rf_se",
    "mc_c_fso",
    "mc_c_fso_se",
    "mc_c_ba",
    "mc_c_nb",
    "gap_rf_pct",
    "gap_fso_pct",
    "gap_ba_pct",
    "gap_nb_pct",
];

pub const PLACEMENT_COLUMNS: &[&str] = &[
    "index",
    "offset",
    "x",
    "y",
    "z",
    "c_rf",
    "c_fso",
    "c_ba",
    "c_nb",
    "bottleneck",
    "error",
];

pub const TRACE_COLUMNS: &[&str] = &[
    "index",
    "offset",
    "x",
    "y",
    "z",
    "c_rf",
    "c_fso",
    "c_ba",
    "c_nb",
    "bottleneck",
    "error",
    "objective_value",
];

pub const PARAMETER_COLUMNS: &[&str] = &[
    "index",
    "parameter",
    "value",
    "c_rf",
    "c_fso",
    "c_ba",
    "c_nb",
    "nb_gap_pct",
    "bottleneck",
];

pub const VALIDATE_COLUMNS: &[&str] = &[
    "criterion",
    "criterion_passed",
    "check",
    "measured",
    "target",
    "check_passed",
];

/// Resolved inputs shared by every subcommand.
pub struct Context {
    pub loaded: LoadedConfig,
    pub monte_carlo: bool,
    pub out: Option<std::path::PathBuf>,
}

/// Grid selection flags; unset fields fall back to the config file.
#[derive(Debug, Clone, Default)]
pub struct GridSpec {
    pub axis: Option<Axis>,
    pub parameter: Option<Parameter>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub steps: Option<usize>,
    pub altitude: Option<Range1d>,
    pub objective: Option<Objective>,
}

/// What a sweep iterates over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SweepPlan {
    Placement {
        grid: PlacementGrid,
    },
    Parameter {
        parameter: Parameter,
        range: Range1d,
    },
}

#[derive(Serialize)]
struct Meta<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    slots: u64,
    monte_carlo: bool,
    columns: &'static [&'static str],
    plan: Value,
    config: &'a ScenarioConfig,
    scenario: &'a Scenario,
    sim: &'a SimConfig,
    conversions: &'a [Conversion],
}

impl Context {
    pub fn evaluator(&self) -> Evaluator {
        if self.monte_carlo {
            Evaluator::MonteCarlo {
                sim: self.loaded.sim,
            }
        } else {
            Evaluator::Analytic
        }
    }

    fn meta(
        &self,
        command: &'static str,
        columns: &'static [&'static str],
        plan: Value,
    ) -> Meta<'_> {
        Meta {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: self.loaded.sim.master_seed,
            slots: self.loaded.sim.n_slots,
            monte_carlo: self.monte_carlo,
            columns,
            plan,
            config: &self.loaded.file,
            scenario: &self.loaded.scenario,
            sim: &self.loaded.sim,
            conversions: &self.loaded.conversions,
        }
    }

    fn emit(&self, command: &'static str, table: &Table, plan: Value) -> Result<()> {
        emit_table(
            table,
            self.out.as_deref(),
            &self.meta(command, table.columns, plan),
        )
    }
}

/// snake_case name of a unit-like enum variant.
pub fn variant_name<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(e) => format!("<{e}>"),
    }
}

fn pct_gap(analytic: f64, mc: f64) -> f64 {
    100.0 * (analytic - mc) / mc
}

pub fn rate(ctx: &Context) -> Result<()> {
    let s = &ctx.loaded.scenario;
    let a = s.evaluate()?;
    let mc = if ctx.monte_carlo {
        Some(estimate_rates(s, &ctx.loaded.sim)?)
    } else {
        None
    };
    let gaps = mc.map(|m| {
        [
            pct_gap(a.c_rf, m.c_rf.mean),
            pct_gap(a.c_fso, m.c_fso.mean),
            pct_gap(a.c_ba, m.c_ba),
            pct_gap(a.c_nb, m.c_nb),
        ]
    });

    let report = json!({
        "position": s.geometry.uav_position,
        "analytic": a,
        "monte_carlo": mc,
        "gap_pct": gaps.map(|g| json!({"c_rf": g[0], "c_fso": g[1], "c_ba": g[2], "c_nb": g[3]})),
        "seed": ctx.loaded.sim.master_seed,
        "slots": mc.map(|m| m.n_slots),
    });
    say(format_args!("{}", serde_json::to_string_pretty(&report)?))?;

    if ctx.out.is_some() {
        let mut t = Table::new(RATE_COLUMNS);
        let mut row: Vec<Cell> = vec![
            a.c_rf.into(),
            a.c_fso.into(),
            a.c_fso_numeric.into(),
            a.c_ba.into(),
            a.c_nb.into(),
            a.gamma_bar.into(),
            variant_name(&a.regime).into(),
            variant_name(&a.method).into(),
            variant_name(&a.bottleneck).into(),
        ];
        match (mc, gaps) {
            (Some(m), Some(g)) => {
                row.push(Cell::Int(m.n_slots));
                row.extend(
                    [
                        m.c_rf.mean,
                        m.c_rf.std_err,
                        m.c_fso.mean,
                        m.c_fso.std_err,
                        m.c_ba,
                        m.c_nb,
                    ]
                    .map(Cell::from),
                );
                row.extend(g.map(Cell::from));
            }
            _ => row.extend(std::iter::repeat_n(Cell::Empty, 11)),
        }
        t.push(row);
        ctx.emit("rate", &t, Value::Null)?;
    }
    Ok(())
}

fn default_range(axis: Axis) -> Range1d {
    match axis {
        Axis::Altitude => Range1d::new(10.0, 150.0, 29),
        Axis::XOffset | Axis::Custom2d => Range1d::new(0.0, 80.0, 81),
    }
}

fn default_parameter_range(p: Parameter) -> Range1d {
    match p {
        Parameter::Density => Range1d::new(0.002, 0.04, 20),
        Parameter::Kappa => Range1d::new(10e-3, 25e-3, 16),
        Parameter::GammaBar => Range1d::new(0.1, 100.0, 20),
    }
}

impl GridSpec {
    fn range(&self, fallback: Range1d) -> Range1d {
        Range1d::new(
            self.min.unwrap_or(fallback.min),
            self.max.unwrap_or(fallback.max),
            self.steps.unwrap_or(fallback.steps),
        )
    }

    fn placement(
        &self,
        axis: Axis,
        file: Option<&PlacementSection>,
        eval: Evaluator,
    ) -> PlacementGrid {
        // Config ranges only apply when the axis matches.
        let from_file = file.filter(|p| p.axis == axis);
        let fallback =
            from_file.map_or(default_range(axis), |p| Range1d::new(p.min, p.max, p.steps));
        let objective = self
            .objective
            .or(file.map(|p| p.objective))
            .unwrap_or(Objective::Ba);
        let mut grid = PlacementGrid::new(axis, self.range(fallback), objective);
        grid.altitude_range = self.altitude.or(from_file.and_then(|p| p.altitude));
        if axis == Axis::Custom2d && grid.altitude_range.is_none() {
            grid.altitude_range = Some(default_range(Axis::Altitude));
        }
        grid.evaluator = eval;
        grid
    }

    /// Precedence: `--parameter`, `--axis`, `[placement]`,
    /// `[parameter_sweep]`, then the default x-offset grid.
    pub fn sweep_plan(&self, file: &ScenarioConfig, eval: Evaluator) -> SweepPlan {
        if let Some(parameter) = self.parameter {
            let fallback = file
                .parameter_sweep
                .filter(|p| p.parameter == parameter)
                .map_or(default_parameter_range(parameter), |p| {
                    Range1d::new(p.min, p.max, p.steps)
                });
            return SweepPlan::Parameter {
                parameter,
                range: self.range(fallback),
            };
        }
        if let Some(axis) = self.axis {
            return SweepPlan::Placement {
                grid: self.placement(axis, file.placement.as_ref(), eval),
            };
        }
        if let Some(p) = &file.placement {
            return SweepPlan::Placement {
                grid: self.placement(p.axis, Some(p), eval),
            };
        }
        if let Some(ParameterSweepSection {
            parameter,
            min,
            max,
            steps,
        }) = file.parameter_sweep
        {
            return SweepPlan::Parameter {
                parameter,
                range: self.range(Range1d::new(min, max, steps)),
            };
        }
        SweepPlan::Placement {
            grid: self.placement(Axis::XOffset, None, eval),
        }
    }

    pub fn optimize_grid(&self, file: &ScenarioConfig, eval: Evaluator) -> Result<PlacementGrid> {
        if self.parameter.is_some() {
            bail!("--parameter applies to `sweep` only; optimize searches over UAV placement");
        }
        let axis = self
            .axis
            .or(file.placement.map(|p| p.axis))
            .unwrap_or(Axis::XOffset);
        Ok(self.placement(axis, file.placement.as_ref(), eval))
    }
}

fn rates_cells(rates: Option<PointRates>) -> [Cell; 5] {
    match rates {
        Some(r) => [
            r.c_rf.into(),
            r.c_fso.into(),
            r.c_ba.into(),
            r.c_nb.into(),
            variant_name(&r.bottleneck()).into(),
        ],
        None => [
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
        ],
    }
}

fn placement_row(r: &SweepRow) -> Vec<Cell> {
    let [x, y, z] = r.position;
    let mut row: Vec<Cell> = vec![
        r.index.into(),
        r.offset.into(),
        x.into(),
        y.into(),
        z.into(),
    ];
    row.extend(rates_cells(r.rates));
    row.push(r.error.clone().map_or(Cell::Empty, Cell::Text));
    row
}

pub fn run_sweep(ctx: &Context, spec: &GridSpec) -> Result<()> {
    let plan = spec.sweep_plan(&ctx.loaded.file, ctx.evaluator());
    log::info!("sweep plan: {plan:?}");
    let table = match plan {
        SweepPlan::Placement { grid } => {
            let res = sweep(&grid, &ctx.loaded.scenario)?;
            let mut t = Table::new(PLACEMENT_COLUMNS);
            for r in &res.rows {
                t.push(placement_row(r));
            }
            t
        }
        SweepPlan::Parameter { parameter, range } => {
            let rows = parameter_sweep(&ctx.loaded.scenario, parameter, &range, &ctx.evaluator())?;
            let name = variant_name(&parameter);
            let mut t = Table::new(PARAMETER_COLUMNS);
            for (i, r) in rows.iter().enumerate() {
                let [rf, fso, ba, nb, bottleneck] = rates_cells(r.rates);
                let gap = r.rates.map(|p| 100.0 * (p.c_ba - p.c_nb) / p.c_ba);
                t.push(vec![
                    i.into(),
                    name.clone().into(),
                    r.value.into(),
                    rf,
                    fso,
                    ba,
                    nb,
                    gap.into(),
                    bottleneck,
                ]);
            }
            t
        }
    };
    ctx.emit("sweep", &table, serde_json::to_value(plan)?)
}

pub fn run_optimize(ctx: &Context, spec: &GridSpec) -> Result<()> {
    let grid = spec.optimize_grid(&ctx.loaded.file, ctx.evaluator())?;
    let res = optimize(&grid, &ctx.loaded.scenario)?;
    let summary = json!({
        "axis": grid.axis,
        "objective": res.objective,
        "best_value": res.best_value,
        "best": {
            "index": res.best.index,
            "offset": res.best.offset,
            "position": res.best.position,
            "rates": res.best.rates,
        },
        "ba_coordinate": res.ba_coordinate(),
        "crossing": res.crossing,
        "argmax": res.sweep.argmax,
        "grid_points": res.sweep.rows.len(),
    });
    say(format_args!("{}", serde_json::to_string_pretty(&summary)?))?;

    if ctx.out.is_some() {
        let mut t = Table::new(TRACE_COLUMNS);
        for (r, v) in res.sweep.rows.iter().zip(&res.trace) {
            let mut row = placement_row(r);
            row.push((*v).into());
            t.push(row);
        }
        ctx.emit("optimize", &t, serde_json::to_value(grid)?)?;
    }
    Ok(())
}

/// Runs the acceptance suite; returns whether every criterion passed.
pub fn run_validate(opts: &ValidationOptions, out: Option<&Path>) -> Result<bool> {
    let reports = run_all(opts);
    for r in &reports {
        say(format_args!("{}", r.summary_line()))?;
        for n in &r.notes {
            say(format_args!("    note: {n}"))?;
        }
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    say(format_args!(
        "validate: {passed}/{} criteria pass",
        reports.len()
    ))?;

    if let Some(path) = out {
        let mut t = Table::new(VALIDATE_COLUMNS);
        for r in &reports {
            if let Some(e) = &r.error {
                t.push(vec![
                    r.id.into(),
                    "false".into(),
                    "error".into(),
                    Cell::Empty,
                    e.clone().into(),
                    "false".into(),
                ]);
            }
            for c in &r.checks {
                t.push(vec![
                    r.id.into(),
                    r.passed().to_string().into(),
                    c.name.clone().into(),
                    c.measured.into(),
                    c.target.clone().into(),
                    c.passed.to_string().into(),
                ]);
            }
        }
        let meta = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": "validate",
            "columns": VALIDATE_COLUMNS,
            "options": opts,
        });
        emit_table(&t, Some(path), &meta)?;
    }
    Ok(passed == reports.len())
}
