//! Run configuration, the scenario catalog and CSV/JSON/markdown exports.
//!
//! Trace CSV columns, with robots indexed from 0:
//!
//! ```text
//! step, t, x0[, y0], vx0[, vy0], ..., feasible0, ..., min_constraint_lhs, min_pair_distance
//! ```
//!
//! `y`/`vy` columns only appear for planar scenarios. States are the ones
//! each step's inputs were computed from. Floats use Rust's shortest
//! round-trip formatting, so identical runs give identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::decentralize::StrategyKind;
use crate::error::{CbfError, Result};
use crate::qp;
use crate::sim::{
    self, make_1d_scenario, make_circle_scenario, BatchReport, Scenario, SimulationTrace, CIRCLE_CBF,
    CIRCLE_RADIUS, CIRCLE_ROBOTS, CIRCLE_SCENARIO, LINE_CBF, ONE_D_SCENARIO,
};

pub const SCENARIO_NAMES: [&str; 2] = [ONE_D_SCENARIO, CIRCLE_SCENARIO];

/// Which files a command writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmitFlags {
    pub trace: bool,
    pub margins: bool,
    pub report: bool,
}

impl Default for EmitFlags {
    fn default() -> Self {
        Self { trace: true, margins: false, report: true }
    }
}

/// A catalog name or a full scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSource {
    Named(String),
    Inline(Box<Scenario>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSource,
    /// Overrides the scenario's strategy; named scenarios default to
    /// `proposed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategyKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub emit: EmitFlags,
}

impl RunConfig {
    pub fn named(name: &str) -> Self {
        Self {
            scenario: ScenarioSource::Named(name.to_string()),
            strategy: None,
            gamma: None,
            seed: None,
            output: None,
            emit: EmitFlags::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// The scenario with every override applied, validated.
    pub fn scenario(&self) -> Result<Scenario> {
        let mut scenario = match &self.scenario {
            ScenarioSource::Named(name) => {
                named_scenario(name, self.strategy.unwrap_or(StrategyKind::ProposedAsymmetric))?
            }
            ScenarioSource::Inline(s) => (**s).clone(),
        };
        if let Some(strategy) = self.strategy {
            scenario.strategy = strategy;
        }
        if let Some(gamma) = self.gamma {
            if !(gamma.is_finite() && gamma > 0.0) {
                return Err(CbfError::Validation(format!("gamma must be positive, got {gamma}")));
            }
            scenario.cbf.gamma = gamma;
        }
        if let Some(seed) = self.seed {
            scenario.seed = seed;
        }
        scenario.validate().map_err(|e| CbfError::Validation(e.to_string()))?;
        Ok(scenario)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Built-in scenario with its default parameters.
pub fn named_scenario(name: &str, strategy: StrategyKind) -> Result<Scenario> {
    match name {
        ONE_D_SCENARIO => Ok(make_1d_scenario(LINE_CBF, strategy)),
        CIRCLE_SCENARIO => make_circle_scenario(CIRCLE_ROBOTS, CIRCLE_RADIUS, CIRCLE_CBF, strategy),
        other => Err(CbfError::Validation(format!(
            "unknown scenario {other:?}; expected one of {}",
            SCENARIO_NAMES.join(", ")
        ))),
    }
}

/// Parse and validate a JSON run configuration.
pub fn load_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text).map_err(|e| CbfError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    config.scenario()?;
    Ok(config)
}

pub fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CbfError::io(path, e))?;
    load_config(&text)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CbfError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CbfError::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn write_rows<W: Write>(
    mut w: csv::Writer<W>,
    path: &Path,
    header: &[String],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let err = |e: csv::Error| CbfError::io(path, e);
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|e| CbfError::io(path, e))
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

pub fn trace_header(trace: &SimulationTrace) -> Vec<String> {
    let n = trace.scenario.robots.len();
    let planar = trace.scenario.dim() == 2;
    let mut header = vec!["step".to_string(), "t".to_string()];
    for i in 0..n {
        header.push(format!("x{i}"));
        if planar {
            header.push(format!("y{i}"));
        }
        header.push(format!("vx{i}"));
        if planar {
            header.push(format!("vy{i}"));
        }
    }
    header.extend((0..n).map(|i| format!("feasible{i}")));
    header.push("min_constraint_lhs".into());
    header.push("min_pair_distance".into());
    header
}

fn trace_rows(trace: &SimulationTrace) -> impl Iterator<Item = Vec<String>> + '_ {
    trace.records.iter().map(|r| {
        let mut row = vec![r.step.to_string(), r.t.to_string()];
        for s in &r.states {
            row.extend(s.position.as_slice().iter().map(f64::to_string));
            row.extend(s.velocity.as_slice().iter().map(f64::to_string));
        }
        row.extend(r.feasible.iter().map(|&f| flag(f)));
        row.push(r.min_constraint_lhs.to_string());
        row.push(r.min_pair_distance.to_string());
        row
    })
}

/// `trace.csv` becomes `trace.scenario.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("scenario.json")
}

pub fn write_trace<W: Write>(trace: &SimulationTrace, out: W) -> Result<()> {
    let path = Path::new("<writer>");
    write_rows(csv::Writer::from_writer(out), path, &trace_header(trace), trace_rows(trace))
}

/// Write the trace CSV and, next to it, the scenario it was produced from.
pub fn export_trace(trace: &SimulationTrace, path: &Path) -> Result<()> {
    write_rows(csv_writer(path)?, path, &trace_header(trace), trace_rows(trace))?;
    export_json(&trace.scenario, &sidecar_path(path))
}

pub fn export_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CbfError::io(path, e))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CbfError::io(path, e))
}

/// Admissible input interval of one robot at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsRow {
    pub step: usize,
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
}

impl BoundsRow {
    pub fn is_empty(&self) -> bool {
        self.lower > self.upper
    }
}

/// Per-step input interval of `robot` in a one-dimensional run.
pub fn feasible_bounds(trace: &SimulationTrace, robot: usize) -> Result<Vec<BoundsRow>> {
    let scenario = &trace.scenario;
    if scenario.dim() != 1 {
        return Err(CbfError::NotOneDimensional);
    }
    if robot >= scenario.robots.len() {
        return Err(CbfError::Validation(format!(
            "robot index {robot} out of range for {} robots",
            scenario.robots.len()
        )));
    }
    trace
        .records
        .iter()
        .map(|r| {
            let constraints = sim::robot_constraints(&r.states, scenario, robot)?;
            let interval = qp::feasible_interval_1d(&constraints)?;
            Ok(BoundsRow { step: r.step, t: r.t, lower: interval.lower, upper: interval.upper })
        })
        .collect()
}

pub fn export_feasible_bounds(trace: &SimulationTrace, robot: usize, path: &Path) -> Result<()> {
    let rows = feasible_bounds(trace, robot)?;
    let header: Vec<String> =
        ["step", "t", "lower_bound", "upper_bound", "empty_flag"].map(String::from).to_vec();
    let body = rows.iter().map(|b| {
        vec![
            b.step.to_string(),
            b.t.to_string(),
            b.lower.to_string(),
            b.upper.to_string(),
            flag(b.is_empty()),
        ]
    });
    write_rows(csv_writer(path)?, path, &header, body)
}

/// Long-format pair diagnostics: one row per step and pair.
pub fn export_margins(trace: &SimulationTrace, path: &Path) -> Result<()> {
    let header: Vec<String> =
        ["step", "t", "i", "j", "distance", "h", "symmetric_margin", "h2"].map(String::from).to_vec();
    let body = trace.records.iter().flat_map(|r| {
        r.pairs.iter().map(move |p| {
            vec![
                r.step.to_string(),
                r.t.to_string(),
                p.i.to_string(),
                p.j.to_string(),
                p.distance.to_string(),
                p.h.to_string(),
                p.margin.to_string(),
                p.h2.to_string(),
            ]
        })
    });
    write_rows(csv_writer(path)?, path, &header, body)
}

fn strategy_label(s: StrategyKind) -> &'static str {
    match s {
        StrategyKind::ProposedAsymmetric => "Proposed asymmetric",
        StrategyKind::PreviousAsymmetric => "Previous asymmetric",
        StrategyKind::Symmetric => "Symmetric",
    }
}

fn distinct<T: PartialEq + Copy>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for x in items {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// No-solution counts as a markdown table: one row per gamma, one column
/// per strategy.
pub fn table3_markdown(report: &BatchReport) -> String {
    let strategies = distinct(report.cells.iter().map(|c| c.strategy));
    let gammas = distinct(report.cells.iter().map(|c| c.gamma));
    let mut out = format!(
        "No-solution trials out of {} (scenario {}, base seed {})\n\n| gamma |",
        report.trials, report.scenario, report.base_seed
    );
    for s in &strategies {
        out.push_str(&format!(" {} |", strategy_label(*s)));
    }
    out.push_str("\n|---|");
    out.push_str(&"---|".repeat(strategies.len()));
    out.push('\n');
    for g in &gammas {
        out.push_str(&format!("| {g} |"));
        for s in &strategies {
            match report.cell(*s, *g) {
                Some(c) => out.push_str(&format!(" {} |", c.no_solution_trials)),
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    out
}

/// One row per cell: `strategy, gamma, trials, no_solution_trials, fatal_trials`.
pub fn export_report_csv(report: &BatchReport, path: &Path) -> Result<()> {
    let header: Vec<String> =
        ["strategy", "gamma", "trials", "no_solution_trials", "fatal_trials"].map(String::from).to_vec();
    let body = report.cells.iter().map(|c| {
        vec![
            c.strategy.as_str().to_string(),
            c.gamma.to_string(),
            c.trials.to_string(),
            c.no_solution_trials.to_string(),
            c.fatal_trials.to_string(),
        ]
    });
    write_rows(csv_writer(path)?, path, &header, body)
}

/// One row per trial of every cell.
pub fn export_trials_csv(report: &BatchReport, path: &Path) -> Result<()> {
    let header: Vec<String> = [
        "strategy",
        "gamma",
        "trial",
        "seed",
        "no_solution_steps",
        "first_infeasible_time",
        "min_constraint_lhs",
        "min_pair_distance",
        "min_h",
        "min_h2",
        "fatal",
    ]
    .map(String::from)
    .to_vec();
    let body = report.cells.iter().flat_map(|c| {
        c.summaries.iter().map(move |s| {
            vec![
                c.strategy.as_str().to_string(),
                c.gamma.to_string(),
                s.trial.to_string(),
                s.seed.to_string(),
                s.no_solution_steps.to_string(),
                s.first_infeasible_time.map(|t| t.to_string()).unwrap_or_default(),
                s.min_constraint_lhs.to_string(),
                s.min_pair_distance.to_string(),
                s.min_h.to_string(),
                s.min_h2.to_string(),
                s.fatal.clone().unwrap_or_default(),
            ]
        })
    });
    write_rows(csv_writer(path)?, path, &header, body)
}

/// Per-step minimum constraint value of every cell, one column per cell.
pub fn export_min_lhs_series(report: &BatchReport, dt: f64, path: &Path) -> Result<()> {
    let mut header = vec!["step".to_string(), "t".to_string()];
    header.extend(report.cells.iter().map(|c| format!("{}_gamma{}", c.strategy.as_str(), c.gamma)));
    let steps = report.cells.iter().map(|c| c.min_lhs_series.len()).max().unwrap_or(0);
    let body = (0..steps).map(|k| {
        let mut row = vec![k.to_string(), (k as f64 * dt).to_string()];
        row.extend(
            report.cells.iter().map(|c| c.min_lhs_series.get(k).map(f64::to_string).unwrap_or_default()),
        );
        row
    });
    write_rows(csv_writer(path)?, path, &header, body)
}
