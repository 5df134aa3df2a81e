//! Runs a scenario and writes its outputs.
//!
//! Every run writes three files into the output directory:
//!
//! * `timeseries.csv`: `t`, then `n_<label>` per subsystem, then
//!   `E_<label>` per subsystem, then solver-specific columns. The first row
//!   is the initial state. Crowd runs use `t,mass_inside,mean_activity,evacuated`.
//! * `final.csv`: the state at `t_end`.
//! * `report.json`: a [`RunReport`].
//!
//! Numbers are written with Rust's locale-independent shortest round-trip
//! formatting; an undefined mean activity is an empty field.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use apkin_core::discrete::step_rk4;
use apkin_core::fpb::mc_step;
use apkin_core::homogeneous::Integrator;
use apkin_core::spatial::macro_density;
use apkin_core::{HomogeneousState, MomentSet};
use serde::Serialize;

use crate::build::{prepare, Prepared};
use crate::config::ScenarioConfig;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub solver: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub steps: usize,
    /// Largest drift over the sampled times of the quantity each solver
    /// conserves when no births or deaths act: relative total density
    /// (homogeneous, discrete), relative `mass_inside + evacuated`
    /// (spatial), absolute ensemble mean (fpb).
    pub conservation_drift: f64,
    pub clamp_events: usize,
    pub clamped_mass: f64,
    pub files: Vec<PathBuf>,
}

/// Number of steps, the step actually used, and steps between outputs: the
/// step is shrunk so that an integer number of steps lands on `t_end`.
pub fn schedule(t_end: f64, dt: f64, interval: f64) -> (usize, f64, usize) {
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / steps as f64;
    let every = ((interval / h).round() as usize).max(1);
    (steps, h, every)
}

pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

struct Table {
    text: String,
}

impl Table {
    fn new(header: &[String]) -> Self {
        Self {
            text: header.join(",") + "\n",
        }
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }
}

fn moment_header(labels: &[String]) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend(labels.iter().map(|l| format!("n_{l}")));
    h.extend(labels.iter().map(|l| format!("E_{l}")));
    h
}

fn moment_row(m: &MomentSet) -> Vec<String> {
    let mut r = vec![fmt_num(m.t)];
    r.extend(m.densities.iter().map(|&v| fmt_num(v)));
    r.extend(m.activations.iter().map(|&v| fmt_opt(v)));
    r
}

fn relative(now: f64, start: f64) -> f64 {
    (now - start).abs() / if start != 0.0 { start.abs() } else { 1.0 }
}

fn snapshot_rows(labels: &[String], nodes: &[f64], rows: &[Vec<f64>]) -> Table {
    let mut t = Table::new(&["subsystem".into(), "u".into(), "f".into()]);
    for (label, row) in labels.iter().zip(rows) {
        for (u, f) in nodes.iter().zip(row) {
            t.row([label.clone(), fmt_num(*u), fmt_num(*f)]);
        }
    }
    t
}

struct Outcome {
    series: Table,
    snapshot: Table,
    steps: usize,
    drift: f64,
    clamp_events: usize,
    clamped_mass: f64,
}

/// Runs `cfg` and writes the outputs to [`ScenarioConfig::out_dir`].
pub fn run(cfg: &ScenarioConfig) -> Result<RunReport> {
    let prepared = prepare(cfg)?;
    let start = Instant::now();
    let outcome = simulate(cfg, prepared)
        .with_context(|| format!("running scenario {}", cfg.scenario.name))?;
    let wall = start.elapsed().as_secs_f64();

    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let write = |name: &str, text: &str| -> Result<PathBuf> {
        let path = dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    };
    let mut files = vec![
        write("timeseries.csv", &outcome.series.text)?,
        write("final.csv", &outcome.snapshot.text)?,
    ];
    files.push(dir.join("report.json"));
    let report = RunReport {
        scenario: cfg.scenario.name.clone(),
        solver: cfg.scenario.solver.table().to_string(),
        seed: cfg.run.seed,
        wall_time_s: wall,
        steps: outcome.steps,
        conservation_drift: outcome.drift,
        clamp_events: outcome.clamp_events,
        clamped_mass: outcome.clamped_mass,
        files,
    };
    write(
        "report.json",
        &(serde_json::to_string_pretty(&report)? + "\n"),
    )?;
    Ok(report)
}

fn simulate(cfg: &ScenarioConfig, prepared: Prepared) -> Result<Outcome> {
    let (t_end, dt, interval) = (cfg.run.t_end, cfg.run.dt, cfg.output_interval());
    match prepared {
        Prepared::Homogeneous {
            model,
            state,
            labels,
            clamp_negative,
        } => {
            let mut integrator = Integrator::new(&model);
            integrator.clamp_negative = clamp_negative;
            let traj = integrator.run_until(&state, t_end, dt, interval)?;
            let first = state.moments();
            let mut series = Table::new(&moment_header(&labels));
            series.row(moment_row(&first));
            let mut drift: f64 = 0.0;
            for m in &traj.samples {
                series.row(moment_row(m));
                drift = drift.max(relative(m.total_density(), first.total_density()));
            }
            let fin: &HomogeneousState = &traj.final_state;
            let d = integrator.diagnostics;
            Ok(Outcome {
                series,
                snapshot: snapshot_rows(&labels, fin.grid().nodes(), fin.values()),
                steps: d.steps,
                drift,
                clamp_events: d.clamp_events,
                clamped_mass: d.clamped_mass,
            })
        }
        Prepared::Discrete {
            model,
            state,
            labels,
        } => {
            let (steps, h, every) = schedule(t_end, dt, interval);
            let first = state.moments(model.nodes());
            let mut series = Table::new(&moment_header(&labels));
            series.row(moment_row(&first));
            let (mut current, mut drift, mut events, mut clamped) = (state, 0.0f64, 0, 0.0);
            for s in 1..=steps {
                let (next, c) = step_rk4(&current, &model, h)?;
                current = next;
                current.t = if s == steps { t_end } else { s as f64 * h };
                if c > 0.0 {
                    events += 1;
                    clamped += c;
                }
                if s % every == 0 || s == steps {
                    let m = current.moments(model.nodes());
                    drift = drift.max(relative(m.total_density(), first.total_density()));
                    series.row(moment_row(&m));
                }
            }
            Ok(Outcome {
                series,
                snapshot: snapshot_rows(&labels, model.nodes(), &current.f),
                steps,
                drift,
                clamp_events: events,
                clamped_mass: clamped,
            })
        }
        Prepared::Spatial { solver, state } => {
            let (steps, h, every) = schedule(t_end, dt, interval);
            let header: Vec<String> = ["t", "mass_inside", "mean_activity", "evacuated"]
                .map(String::from)
                .to_vec();
            let mut series = Table::new(&header);
            let row = |t: f64, s: &apkin_core::spatial::SpatialState| {
                vec![
                    fmt_num(t),
                    fmt_num(s.mass_inside()),
                    fmt_opt(s.mean_activity()),
                    fmt_num(s.evacuated),
                ]
            };
            series.row(row(0.0, &state));
            let m0 = state.mass_inside() + state.evacuated;
            let (mut current, mut drift) = (state, 0.0f64);
            for s in 1..=steps {
                current = solver.step(&current, h)?;
                let t = if s == steps { t_end } else { s as f64 * h };
                current.t = t;
                drift = drift.max(relative(current.mass_inside() + current.evacuated, m0));
                if s % every == 0 || s == steps {
                    series.row(row(t, &current));
                }
            }
            let arena = current.arena();
            let mut snapshot = Table::new(&["col".into(), "row".into(), "density".into()]);
            for c in 0..arena.len() {
                if arena.kind(c).is_passable() {
                    let (col, r) = arena.coords(c);
                    snapshot.row([
                        col.to_string(),
                        r.to_string(),
                        fmt_num(macro_density(&current, c)),
                    ]);
                }
            }
            Ok(Outcome {
                series,
                snapshot,
                steps,
                drift,
                clamp_events: 0,
                clamped_mass: 0.0,
            })
        }
        Prepared::Fpb {
            rule,
            lambda,
            mut ensemble,
        } => {
            let (steps, h, every) = schedule(t_end, dt, interval);
            let header: Vec<String> = ["t", "n_particles", "E_particles", "variance"]
                .map(String::from)
                .to_vec();
            let mut series = Table::new(&header);
            let row = |e: &apkin_core::fpb::Ensemble| {
                vec![
                    fmt_num(e.t),
                    "1".into(),
                    fmt_num(e.mean()),
                    fmt_num(e.variance()),
                ]
            };
            series.row(row(&ensemble));
            let mean0 = ensemble.mean();
            let mut drift: f64 = 0.0;
            for s in 1..=steps {
                mc_step(&mut ensemble, &rule, lambda, h)?;
                ensemble.t = if s == steps { t_end } else { s as f64 * h };
                drift = drift.max((ensemble.mean() - mean0).abs());
                if s % every == 0 || s == steps {
                    series.row(row(&ensemble));
                }
            }
            let mut snapshot = Table::new(&["value".into()]);
            for v in &ensemble.values {
                snapshot.row([fmt_num(*v)]);
            }
            Ok(Outcome {
                series,
                snapshot,
                steps,
                drift,
                clamp_events: 0,
                clamped_mass: 0.0,
            })
        }
    }
}

/// Reads back a written time series as rows of numbers; empty fields become
/// `NaN`.
pub fn read_series(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .context("empty file")?
        .split(',')
        .map(String::from)
        .collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|f| {
                    if f.is_empty() {
                        Ok(f64::NAN)
                    } else {
                        f.parse::<f64>()
                    }
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((header, rows))
}
