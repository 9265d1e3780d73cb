//! Task execution, run reports and artifact writing.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{
    load_experiment, solve_spec, Diagnostics, Experiment, Overrides, RawConfig, Task,
};
use crate::engine::{
    effective_hamiltonian, truncated_solution_surface, u_series, EffectiveOptions, PulseFamily,
    SeriesOrder, SurfaceOrder,
};
use crate::error::{FloquetError, Result};
use crate::models::build_hamiltonian;
use crate::pauli::{Axis, SpinOperator};
use crate::sim::{
    compare_frames_with, evolve_effective, evolve_exact, frequency_scaling, Sampling, ScalingSetup,
    SimConfig,
};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const SCHEMA: i32 = 2;
    pub const NUMERIC: i32 = 3;
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub total_ms: f64,
    pub task_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub status: &'static str,
    pub exit_code: i32,
    pub task: Option<Task>,
    pub config: Option<RawConfig>,
    pub convention: Option<String>,
    pub defaults_applied: Vec<String>,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
    pub results: Value,
    pub artifacts: Vec<PathBuf>,
    pub timings: Timings,
}

pub struct RunOutcome {
    pub exit_code: i32,
    pub report: RunReport,
    pub report_path: Option<PathBuf>,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| FloquetError::Io(e.error))?;
    Ok(())
}

struct TaskOutput {
    results: Value,
    artifacts: Vec<(String, Vec<u8>)>,
    warnings: Vec<String>,
    /// Numeric failure that should still produce a report.
    failure: Option<String>,
}

impl TaskOutput {
    fn new(results: Value) -> Self {
        Self {
            results,
            artifacts: Vec::new(),
            warnings: Vec::new(),
            failure: None,
        }
    }
}

fn convention_note(exp: &Experiment) -> String {
    format!(
        "averaging convention in use: {} (window fraction {} of the {}-subcycle cycle); the cosine closed form \
         is stated for full_cycle and the square closed form for subcycle averaging, and the two conventions differ by 1/N",
        exp.convention,
        exp.convention.window_fraction(exp.profile.n_subcycles()),
        exp.profile.n_subcycles()
    )
}

/// Runs the experiment in `config_path` and writes its artifacts and report.
pub fn run(config_path: &Path, overrides: &Overrides) -> RunOutcome {
    let start = Instant::now();
    let (raw, experiment, diags) = load_experiment(config_path, overrides);
    let Some(exp) = experiment else {
        return finish_schema_failure(raw, diags, overrides, start);
    };
    let mut warnings = diags.warnings.clone();
    warnings.push(convention_note(&exp));
    let task_start = Instant::now();
    let outcome = match exp.task {
        Task::Solve => run_solve(&exp),
        Task::Surface => run_surface(&exp),
        Task::Validate => run_validate(&exp),
        Task::Moments => run_moments(&exp),
        Task::Represent => run_represent(&exp),
    };
    let task_ms = task_start.elapsed().as_secs_f64() * 1e3;
    let mut errors = Vec::new();
    let mut artifacts = Vec::new();
    let (exit_code, results) = match outcome {
        Ok(out) => {
            warnings.extend(out.warnings);
            if exp.output.csv {
                for (name, bytes) in &out.artifacts {
                    let path = exp.output.directory.join(name);
                    match write_atomic(&path, bytes) {
                        Ok(()) => artifacts.push(path),
                        Err(e) => errors.push(format!("writing {}: {e}", path.display())),
                    }
                }
            }
            let code = match &out.failure {
                Some(msg) => {
                    errors.push(msg.clone());
                    exit::NUMERIC
                }
                None if errors.is_empty() => exit::SUCCESS,
                None => exit::NUMERIC,
            };
            (code, out.results)
        }
        Err(e) => {
            errors.push(e.to_string());
            (exit::NUMERIC, Value::Null)
        }
    };
    let report = RunReport {
        tool: "floquet",
        version: env!("CARGO_PKG_VERSION"),
        status: if exit_code == exit::SUCCESS {
            "ok"
        } else {
            "numeric_failure"
        },
        exit_code,
        task: Some(exp.task),
        config: raw,
        convention: Some(exp.convention.to_string()),
        defaults_applied: diags.defaults,
        warnings,
        errors,
        results,
        artifacts,
        timings: Timings {
            total_ms: start.elapsed().as_secs_f64() * 1e3,
            task_ms,
        },
    };
    let report_path = exp
        .output
        .json
        .then(|| exp.output.directory.join("report.json"));
    write_report(report, report_path)
}

fn finish_schema_failure(
    raw: Option<RawConfig>,
    diags: Diagnostics,
    overrides: &Overrides,
    start: Instant,
) -> RunOutcome {
    let directory = overrides
        .output_dir
        .clone()
        .or_else(|| {
            raw.as_ref()
                .and_then(|r| r.output.as_ref())
                .and_then(|o| o.directory.clone())
        })
        .or_else(|| std::env::var_os(super::config::OUTPUT_DIR_ENV).map(PathBuf::from));
    let report = RunReport {
        tool: "floquet",
        version: env!("CARGO_PKG_VERSION"),
        status: "schema_error",
        exit_code: exit::SCHEMA,
        task: None,
        config: raw,
        convention: None,
        defaults_applied: diags.defaults,
        warnings: diags.warnings,
        errors: diags.errors.iter().map(ToString::to_string).collect(),
        results: Value::Null,
        artifacts: Vec::new(),
        timings: Timings {
            total_ms: start.elapsed().as_secs_f64() * 1e3,
            task_ms: 0.0,
        },
    };
    write_report(report, directory.map(|d| d.join("report.json")))
}

fn write_report(mut report: RunReport, path: Option<PathBuf>) -> RunOutcome {
    let mut written = None;
    if let Some(p) = path {
        let text = serde_json::to_vec_pretty(&report).unwrap_or_default();
        match write_atomic(&p, &text) {
            Ok(()) => written = Some(p),
            Err(e) => {
                report
                    .errors
                    .push(format!("writing report {}: {e}", p.display()));
                if report.exit_code == exit::SUCCESS {
                    report.exit_code = exit::NUMERIC;
                    report.status = "numeric_failure";
                }
            }
        }
    }
    RunOutcome {
        exit_code: report.exit_code,
        report,
        report_path: written,
    }
}

fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn family_tail(family: &PulseFamily, v: f64) -> Option<Value> {
    match family {
        PulseFamily::Series { moments, p_max } => {
            let s = u_series(v, moments, *p_max);
            Some(json!({
                "p_max": s.p_max,
                "first_dropped_term": s.first_dropped,
                "tail_dominated": s.tail_dominated,
            }))
        }
        _ => None,
    }
}

fn run_solve(exp: &Experiment) -> Result<TaskOutput> {
    let spec = exp
        .solve
        .as_ref()
        .ok_or_else(|| FloquetError::InvalidArgument("solve section missing".into()))?;
    let s_values = match &exp.sweep {
        Some(sw) => sw.values.clone(),
        None => vec![spec.s],
    };
    let solutions: Vec<_> = s_values
        .par_iter()
        .map(|&s| solve_spec(&exp.family, spec, s))
        .collect::<Result<Vec<_>>>()?;
    let mut roots_csv = String::from("s,v\n");
    let mut summary_csv = String::from("s,n_solutions,preferred_v,u_target\n");
    for sol in &solutions {
        for v in &sol.solutions {
            roots_csv.push_str(&format!("{},{}\n", csv_float(sol.s), csv_float(*v)));
        }
        summary_csv.push_str(&format!(
            "{},{},{},{}\n",
            csv_float(sol.s),
            sol.solutions.len(),
            sol.preferred.map_or(String::new(), csv_float),
            sol.u_target.map_or(String::new(), csv_float),
        ));
    }
    let admissible: Vec<f64> = solutions
        .iter()
        .filter(|s| s.domain_ok)
        .map(|s| s.s)
        .collect();
    let mut out = TaskOutput::new(json!({
        "family": exp.family.name(),
        "target": spec.target,
        "solutions": if solutions.len() == 1 { json!(solutions[0]) } else { json!(solutions.len()) },
        "admissible_s_range": admissible.first().map(|lo| [*lo, *admissible.last().unwrap_or(lo)]),
        "tail_estimate": solutions.iter().find_map(|s| s.preferred).and_then(|v| family_tail(&exp.family, v)),
    }));
    if let Some(sol) = solutions.first().filter(|_| solutions.len() == 1) {
        if let Some(d) = &sol.diagnostic {
            out.warnings.push(d.clone());
        }
    }
    out.artifacts
        .push(("roots.csv".into(), roots_csv.into_bytes()));
    if solutions.len() > 1 {
        out.artifacts
            .push(("solve_sweep.csv".into(), summary_csv.into_bytes()));
    }
    if spec.require_roots && admissible.is_empty() {
        out.failure = Some(match solutions.as_slice() {
            [one] => format!(
                "no solution for s = {}: {}",
                one.s,
                one.diagnostic.clone().unwrap_or_default()
            ),
            _ => "no s in the sweep admits a solution".into(),
        });
    }
    Ok(out)
}

fn run_surface(exp: &Experiment) -> Result<TaskOutput> {
    let grid = exp
        .sweep
        .as_ref()
        .map(|s| s.values.clone())
        .unwrap_or_else(|| crate::engine::uniform_grid(-5.0, 5.0, 1000));
    let surface = truncated_solution_surface(&exp.family, &exp.surface_orders, &grid)?;
    let mut csv = Vec::new();
    surface.write_csv(&mut csv)?;
    let mut poles = String::from("family,p_max,v\n");
    for p in &surface.poles {
        poles.push_str(&format!(
            "{},{},{}\n",
            surface.family,
            p.order,
            csv_float(p.v)
        ));
    }
    let per_order: Vec<Value> = exp
        .surface_orders
        .iter()
        .map(|&o| {
            json!({
                "order": o.to_string(),
                "first_positive_s_at_v": surface.first_positive_s(o),
                "poles": surface.poles.iter().filter(|p| p.order == o).count(),
            })
        })
        .collect();
    let mut out = TaskOutput::new(json!({
        "family": surface.family,
        "grid_points": grid.len(),
        "orders": per_order,
    }));
    let truncated: Vec<usize> = exp
        .surface_orders
        .iter()
        .filter_map(|o| match o {
            SurfaceOrder::Truncated(p) => Some(*p),
            SurfaceOrder::Closed => None,
        })
        .collect();
    if let (Some(&p), Some(vmax)) = (
        truncated.iter().min(),
        grid.iter().map(|v| v.abs()).reduce(f64::max),
    ) {
        let moments = exp.family.moments(p)?;
        let tail = u_series(vmax, &moments, p);
        out.warnings.push(format!(
            "truncation tail estimate at |v| = {vmax}: first dropped term {:.3e} for p_max = {p}",
            tail.first_dropped
        ));
    }
    out.artifacts.push(("surface.csv".into(), csv));
    out.artifacts.push(("poles.csv".into(), poles.into_bytes()));
    Ok(out)
}

fn run_moments(exp: &Experiment) -> Result<TaskOutput> {
    let table = exp
        .profile
        .compute_moments(exp.moments_p_max, exp.convention)?;
    let mut csv = String::from("p,moment,convention\n");
    for p in 1..=table.p_max() {
        csv.push_str(&format!(
            "{p},{},{}\n",
            csv_float(table.moment(p)),
            exp.convention
        ));
    }
    let v = exp.profile.strength;
    let series = u_series(v, &table, table.p_max());
    let mut out = TaskOutput::new(json!({
        "shape": exp.profile.shape.name(),
        "p_max": table.p_max(),
        "sup_abs_g": table.sup_abs(),
        "u": {
            "v": v,
            "value": series.value,
            "first_dropped_term": series.first_dropped,
            "tail_dominated": series.tail_dominated,
            "closed_form": crate::engine::u_closed(&exp.profile.shape, v, exp.convention, exp.profile.n_subcycles()),
        },
    }));
    if series.tail_dominated {
        out.warnings.push(format!(
            "series at v = {v} is not converged by p_max = {}; first dropped term {:.3e}",
            table.p_max(),
            series.first_dropped
        ));
    }
    out.artifacts.push(("moments.csv".into(), csv.into_bytes()));
    Ok(out)
}

fn run_represent(exp: &Experiment) -> Result<TaskOutput> {
    let n = exp.model.as_ref().map_or(2, |m| m.n_sites());
    let rep = exp.profile.is_goldman_representable(n)?;
    let cyc = exp.profile.verify_cyclicity(n)?;
    Ok(TaskOutput::new(json!({
        "n_sites": n,
        "representable": rep.representable,
        "witness": rep.witness,
        "cyclicity": cyc,
    })))
}

fn run_validate(exp: &Experiment) -> Result<TaskOutput> {
    let model = exp
        .model
        .clone()
        .ok_or_else(|| FloquetError::InvalidArgument("model section missing".into()))?;
    let spec = exp
        .validate
        .as_ref()
        .ok_or_else(|| FloquetError::InvalidArgument("validate section missing".into()))?;
    let mut warnings = Vec::new();
    let mut profile = exp.profile.clone();
    let mut solved = None;
    if !exp.strength_given {
        if let Some(sp) = &exp.solve {
            let sol = solve_spec(&exp.family, sp, sp.s)?;
            match sol.preferred {
                Some(v) => {
                    warnings.push(format!(
                        "pulse strength v = {v} taken from the {} condition",
                        sp.target
                    ));
                    profile = profile.with_strength(v);
                    solved = Some(sol);
                }
                None => {
                    let mut out = TaskOutput::new(json!({ "condition": sol }));
                    out.failure = Some("no pulse strength satisfies the condition".into());
                    return Ok(out);
                }
            }
        }
    }
    let order = match exp.p_max {
        Some(p) => SeriesOrder::Truncated(p),
        None => SeriesOrder::ClosedForm,
    };
    let eff = effective_hamiltonian(
        &model,
        &profile,
        EffectiveOptions {
            order,
            convention: exp.convention,
            ..EffectiveOptions::default()
        },
    )?;
    warnings.extend(eff.notes.iter().cloned());
    if order != SeriesOrder::ClosedForm {
        warnings.push(format!(
            "effective-model tail estimate: {:.3e}",
            eff.tail_estimate
        ));
    }
    let config = SimConfig {
        model: model.clone(),
        profile: profile.clone(),
        n_cycles: spec.n_cycles,
        initial_state: spec.initial_state.clone(),
        sampling: Sampling::Dense(spec.samples_per_subcycle),
        stepping: spec.stepping,
    };
    let n = model.n_sites();
    let observables: Vec<(String, SpinOperator)> = (0..n.saturating_sub(1))
        .map(|j| {
            (
                format!("zz_{j}_{}", j + 1),
                SpinOperator::single(j, Axis::Z).product(&SpinOperator::single(j + 1, Axis::Z)),
            )
        })
        .collect();
    let exact = evolve_exact(&config)?;
    let effective = evolve_effective(&eff.operator, &config)?;
    let mut ops: Vec<SpinOperator> = (0..n)
        .flat_map(|j| {
            Axis::ALL
                .into_iter()
                .map(move |a| SpinOperator::single(j, a))
        })
        .collect();
    ops.extend(observables.iter().map(|(_, o)| o.clone()));
    let report = compare_frames_with(&exact, &effective, &ops)?;
    let mut csv = Vec::new();
    exact.write_csv(&mut csv, &observables, Some(&effective))?;
    let mut results = json!({
        "strength": profile.strength,
        "condition": solved,
        "effective_model": eff,
        "bare_hamiltonian_terms": build_hamiltonian(&model).len(),
        "max_infidelity": report.max_infidelity,
        "mean_infidelity": report.mean_infidelity,
        "max_observable_deviation": report.max_observable_deviation,
        "max_dressed_deviation": report.max_dressed_deviation,
        "mean_dressed_deviation": report.mean_dressed_deviation,
    });
    let mut artifacts = vec![("trajectory.csv".to_string(), csv)];
    if let Some(sw) = &exp.sweep {
        let t_final = spec
            .t_final
            .unwrap_or(spec.n_cycles as f64 * profile.period());
        let setup = ScalingSetup {
            model: model.clone(),
            shape: profile.shape.clone(),
            strength: profile.strength,
            h_eff: eff.operator.clone(),
            omegas: sw.values.clone(),
            t_final,
            initial_state: spec.initial_state.clone(),
            observable: ops
                .last()
                .cloned()
                .unwrap_or_else(|| SpinOperator::single(0, Axis::Z)),
            samples_per_subcycle: spec.samples_per_subcycle,
            stepping: spec.stepping,
        };
        if profile.schedule.len() != 2 || !profile.weak_drives.is_empty() {
            warnings.push("frequency sweep uses the global x-then-y schedule".into());
        }
        let scaling = frequency_scaling(&setup)?;
        let mut s = String::from("omega,n_cycles,infidelity,dressed_error\n");
        for p in &scaling.points {
            s.push_str(&format!(
                "{},{},{},{}\n",
                csv_float(p.omega),
                p.n_cycles,
                csv_float(p.infidelity),
                csv_float(p.dressed_error)
            ));
        }
        artifacts.push(("scaling.csv".into(), s.into_bytes()));
        results["scaling"] = json!(scaling);
    }
    Ok(TaskOutput {
        results,
        artifacts,
        warnings,
        failure: None,
    })
}

/// Human-readable rendering of [`Diagnostics`].
pub fn render_diagnostics(d: &Diagnostics) -> String {
    let mut out = String::new();
    for e in &d.errors {
        out.push_str(&format!("error: {e}\n"));
    }
    for w in &d.warnings {
        out.push_str(&format!("warning: {w}\n"));
    }
    for def in &d.defaults {
        out.push_str(&format!("default: {def}\n"));
    }
    out.push_str(if d.is_ok() {
        "config OK\n"
    } else {
        "config invalid\n"
    });
    out
}
