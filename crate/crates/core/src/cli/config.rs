//! Experiment configuration: the TOML schema, defaults and pre-run diagnostics.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::engine::{
    solve_condition, PulseFamily, SolveOptions, SurfaceOrder, Target, DEFAULT_P_MAX,
};
use crate::error::FloquetError;
use crate::models::{CouplingGraph, SpinModel};
use crate::pauli::{Axis, DEFAULT_DENSE_CAP};
use crate::pulses::{
    AveragingConvention, Drive, Interpolation, PulseProfile, PulseShape, SiteSet, Subcycle,
    TabulatedShape, WeakDrive,
};
use crate::sim::{InitialState, Integrator, Stepping, MAX_SIM_SITES};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "FLOQUET_OUTPUT_DIR";
const FALLBACK_OUTPUT_DIR: &str = "floquet-output";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub task: Option<String>,
    pub seed: Option<u64>,
    pub model: Option<RawModel>,
    pub pulse: Option<RawPulse>,
    pub solve: Option<RawSolve>,
    pub surface: Option<RawSurface>,
    pub validate: Option<RawValidate>,
    pub moments: Option<RawMoments>,
    pub sweep: Option<RawSweep>,
    pub output: Option<RawOutput>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    /// `xxz`, `xy`, `ising` or `heisenberg`.
    pub kind: Option<String>,
    pub n_sites: Option<usize>,
    /// `dipolar`, `chain`, `nearest_neighbor` or `explicit`.
    pub geometry: Option<String>,
    /// Decay exponent for `chain` geometry.
    pub power: Option<f64>,
    /// Symmetric coupling matrix for `explicit` geometry.
    pub couplings: Option<Vec<Vec<f64>>>,
    pub j_perp: Option<f64>,
    pub j_z: Option<f64>,
    /// Common coupling of the Heisenberg model.
    pub j: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPulse {
    /// `cosine`, `square` or `tabulated`.
    pub shape: Option<String>,
    /// Two-column pulse file for tabulated shapes.
    pub file: Option<PathBuf>,
    pub interpolation: Option<String>,
    pub strength: Option<f64>,
    pub amplitude: Option<f64>,
    pub subcycle_duration: Option<f64>,
    /// Angular frequency; sets `subcycle_duration = 2 pi / omega`.
    pub omega: Option<f64>,
    /// One global subcycle per axis.
    pub axes: Option<Vec<String>>,
    /// Explicit schedule; overrides `axes`.
    pub subcycles: Option<Vec<RawSubcycle>>,
    pub weak: Option<Vec<RawWeak>>,
    pub convention: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSubcycle {
    pub drives: Vec<RawDrive>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDrive {
    pub axis: String,
    pub sites: Option<Vec<usize>>,
    pub weight: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawWeak {
    pub axis: String,
    pub sites: Option<Vec<usize>>,
    pub amplitude: f64,
    pub harmonic: Option<f64>,
    pub phase: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSolve {
    /// Anisotropy `J_z / J_perp`; taken from the model when absent.
    pub s: Option<f64>,
    /// `ising`, `xy`, `heisenberg` or `custom`.
    pub target: Option<String>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// `cosine`, `square` or `pulse` (moments of the configured pulse).
    pub family: Option<String>,
    pub p_max: Option<usize>,
    pub bracket: Option<f64>,
    pub require_roots: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawOrder {
    Truncated(usize),
    Named(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSurface {
    pub family: Option<String>,
    pub orders: Option<Vec<RawOrder>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawValidate {
    pub n_cycles: Option<usize>,
    /// `all_up`, `neel`, `all_plus_x`, `random`, `basis:<index>` or `amplitudes`.
    pub initial_state: Option<String>,
    /// Real parts then imaginary parts, for `initial_state = "amplitudes"`.
    pub amplitudes_re: Option<Vec<f64>>,
    pub amplitudes_im: Option<Vec<f64>>,
    pub samples_per_subcycle: Option<usize>,
    pub tolerance: Option<f64>,
    pub integrator: Option<String>,
    /// Physical run time of each point of an `omega` sweep.
    pub t_final: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMoments {
    pub p_max: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub parameter: Option<String>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub directory: Option<PathBuf>,
    /// Subset of `csv`, `json`.
    pub formats: Option<Vec<String>>,
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub p_max: Option<usize>,
    pub convention: Option<AveragingConvention>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Solve,
    Surface,
    Validate,
    Moments,
    Represent,
}

impl FromStr for Task {
    type Err = FloquetError;

    fn from_str(s: &str) -> Result<Self, FloquetError> {
        match s {
            "solve" => Ok(Self::Solve),
            "surface" => Ok(Self::Surface),
            "validate" => Ok(Self::Validate),
            "moments" => Ok(Self::Moments),
            "represent" => Ok(Self::Represent),
            other => Err(FloquetError::Parse(format!(
                "unknown task '{other}' (expected solve, surface, validate, moments or represent)"
            ))),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Solve => "solve",
            Self::Surface => "surface",
            Self::Validate => "validate",
            Self::Moments => "moments",
            Self::Represent => "represent",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    Schema,
    Physics,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Issue {
    pub kind: IssueKind,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            IssueKind::Schema => "schema",
            IssueKind::Physics => "physics",
        };
        write!(f, "{kind} error in `{}`: {}", self.field, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub errors: Vec<Issue>,
    pub warnings: Vec<String>,
    /// `field = value` for every default that was filled in.
    pub defaults: Vec<String>,
}

impl Diagnostics {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    fn schema(&mut self, field: &str, message: impl Into<String>) {
        self.errors.push(Issue {
            kind: IssueKind::Schema,
            field: field.into(),
            message: message.into(),
        });
    }

    fn physics(&mut self, field: &str, message: impl Into<String>) {
        self.errors.push(Issue {
            kind: IssueKind::Physics,
            field: field.into(),
            message: message.into(),
        });
    }

    fn missing(&mut self, field: &str) {
        self.schema(field, format!("missing field `{field}`"));
    }

    fn defaulted<T: fmt::Debug>(&mut self, field: &str, value: T) -> T {
        self.defaults.push(format!("{field} = {value:?}"));
        value
    }

    fn parse<T: FromStr<Err = FloquetError>>(&mut self, field: &str, text: &str) -> Option<T> {
        match text.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.schema(field, e.to_string());
                None
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveSpec {
    pub s: f64,
    pub target: Target,
    pub require_roots: bool,
    pub bracket: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidateSpec {
    pub n_cycles: usize,
    pub initial_state: InitialState,
    pub samples_per_subcycle: usize,
    pub stepping: Stepping,
    pub t_final: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub directory: PathBuf,
    pub csv: bool,
    pub json: bool,
}

/// Fully resolved experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub task: Task,
    pub seed: u64,
    pub model: Option<SpinModel>,
    pub profile: PulseProfile,
    /// Strength given explicitly in the pulse section.
    pub strength_given: bool,
    pub convention: AveragingConvention,
    pub p_max: Option<usize>,
    pub family: PulseFamily,
    pub solve: Option<SolveSpec>,
    pub surface_orders: Vec<SurfaceOrder>,
    pub validate: Option<ValidateSpec>,
    pub moments_p_max: usize,
    pub sweep: Option<SweepSpec>,
    pub output: OutputSpec,
}

/// Parses and resolves a config file. On schema failure the experiment is `None`
/// and the diagnostics carry the reasons.
pub fn load_experiment(
    path: &Path,
    overrides: &Overrides,
) -> (Option<RawConfig>, Option<Experiment>, Diagnostics) {
    let mut diags = Diagnostics::default();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            diags.schema("<file>", format!("cannot read {}: {e}", path.display()));
            return (None, None, diags);
        }
    };
    let raw: RawConfig = match toml::from_str(&text) {
        Ok(r) => r,
        Err(e) => {
            diags.schema("<file>", e.to_string().trim().to_string());
            return (None, None, diags);
        }
    };
    let base = path.parent().unwrap_or(Path::new("."));
    let experiment = resolve(&raw, overrides, base, &mut diags);
    (Some(raw), experiment.filter(|_| diags.is_ok()), diags)
}

/// Schema and physics checks without running anything.
pub fn validate_config(path: &Path, overrides: &Overrides) -> Diagnostics {
    load_experiment(path, overrides).2
}

fn parse_axis(diags: &mut Diagnostics, field: &str, text: &str) -> Option<Axis> {
    diags.parse::<Axis>(field, text)
}

fn site_set(sites: &Option<Vec<usize>>) -> SiteSet {
    match sites {
        Some(s) => SiteSet::Sites(s.clone()),
        None => SiteSet::All,
    }
}

pub fn resolve(
    raw: &RawConfig,
    overrides: &Overrides,
    base: &Path,
    diags: &mut Diagnostics,
) -> Option<Experiment> {
    let task = match &raw.task {
        Some(t) => diags.parse::<Task>("task", t),
        None => {
            diags.missing("task");
            None
        }
    };
    let seed = raw.seed.unwrap_or_else(|| diags.defaulted("seed", 0));
    let model = resolve_model(raw.model.as_ref(), task, diags);
    let n_sites = model.as_ref().map(SpinModel::n_sites);
    let pulse = resolve_pulse(raw.pulse.as_ref(), task, n_sites, base, diags);
    let strength_given = pulse.as_ref().is_none_or(|p| p.1);

    let solve = match task {
        Some(Task::Solve) | Some(Task::Validate) => resolve_solve(raw, task, model.as_ref(), diags),
        _ => None,
    };
    if task == Some(Task::Validate) && !strength_given && solve.is_none() {
        diags.missing("pulse.strength");
    }

    let surface_orders = match raw.surface.as_ref().and_then(|s| s.orders.clone()) {
        Some(list) => {
            let mut orders = Vec::new();
            for o in list {
                match o {
                    RawOrder::Truncated(0) => {
                        diags.schema("surface.orders", "truncation order must be at least 1")
                    }
                    RawOrder::Truncated(p) => orders.push(SurfaceOrder::Truncated(p)),
                    RawOrder::Named(n) if n == "closed" => orders.push(SurfaceOrder::Closed),
                    RawOrder::Named(n) => {
                        diags.schema("surface.orders", format!("unknown order '{n}'"))
                    }
                }
            }
            if orders.is_empty() {
                diags.schema("surface.orders", "no orders given");
            }
            orders
        }
        None if task == Some(Task::Surface) => diags.defaulted(
            "surface.orders",
            vec![
                SurfaceOrder::Truncated(1),
                SurfaceOrder::Truncated(8),
                SurfaceOrder::Truncated(16),
                SurfaceOrder::Closed,
            ],
        ),
        None => Vec::new(),
    };

    let validate = if task == Some(Task::Validate) {
        resolve_validate(
            raw.validate.as_ref().cloned().unwrap_or_default(),
            n_sites.unwrap_or(0),
            seed,
            diags,
        )
    } else {
        None
    };
    let moments_p_max = match (overrides.p_max, raw.moments.as_ref().and_then(|m| m.p_max)) {
        (Some(p), _) | (None, Some(p)) => p,
        (None, None) if task == Some(Task::Moments) => diags.defaulted("moments.p_max", 20),
        _ => 20,
    };
    if moments_p_max == 0 {
        diags.schema("moments.p_max", "p_max must be at least 1");
    }
    let sweep = resolve_sweep(raw.sweep.as_ref(), task, diags);
    let output = resolve_output(raw.output.as_ref(), overrides, diags);

    let (profile, strength_given) = pulse?;
    let natural = match &profile.shape {
        PulseShape::Square => AveragingConvention::Subcycle,
        _ => AveragingConvention::FullCycle,
    };
    let convention = match (
        overrides.convention,
        raw.pulse.as_ref().and_then(|p| p.convention.as_deref()),
    ) {
        (Some(c), _) => c,
        (None, Some(text)) => diags.parse("pulse.convention", text)?,
        (None, None) => {
            // Dynamics follow full-cycle averaging whatever the shape's closed-form pairing.
            let c = if task == Some(Task::Validate) {
                AveragingConvention::FullCycle
            } else {
                natural
            };
            diags.defaults.push(format!("pulse.convention = \"{c}\""));
            c
        }
    };
    if convention != natural && !matches!(profile.shape, PulseShape::Tabulated(_)) {
        diags.warnings.push(format!(
            "averaging convention {convention} differs from the one the {} closed form is stated in ({natural}); \
             the truncated series is used instead",
            profile.shape.name()
        ));
    }
    let p_max = overrides
        .p_max
        .or_else(|| raw.solve.as_ref().and_then(|s| s.p_max));

    let family_text = match task {
        Some(Task::Surface) => raw.surface.as_ref().and_then(|s| s.family.clone()),
        _ => raw.solve.as_ref().and_then(|s| s.family.clone()),
    };
    let family = resolve_family(
        family_text.as_deref(),
        &profile,
        convention,
        natural,
        p_max,
        diags,
    )?;

    // Physics checks.
    let check_sites = n_sites.or(match task {
        Some(Task::Represent) => Some(2),
        _ => None,
    });
    if let Some(n) = check_sites {
        match profile.verify_cyclicity(n) {
            Ok(report) if !report.passed() => {
                for c in report.failures() {
                    diags.physics(
                        "pulse",
                        format!(
                            "cyclicity check {} failed (residual {:.3e})",
                            c.name, c.residual
                        ),
                    );
                }
            }
            Ok(_) => {}
            Err(e) => diags.physics("pulse", e.to_string()),
        }
    }

    let task = task?;
    Some(Experiment {
        task,
        seed,
        model,
        profile,
        strength_given,
        convention,
        p_max,
        family,
        solve,
        surface_orders,
        validate,
        moments_p_max,
        sweep,
        output,
    })
}

fn resolve_model(
    raw: Option<&RawModel>,
    task: Option<Task>,
    diags: &mut Diagnostics,
) -> Option<SpinModel> {
    let needed = matches!(task, Some(Task::Validate) | Some(Task::Represent));
    let Some(m) = raw else {
        if needed {
            diags.missing("model.n_sites");
        }
        return None;
    };
    let geometry = match &m.geometry {
        Some(g) => g.clone(),
        None if m.couplings.is_some() => diags.defaulted("model.geometry", "explicit".to_string()),
        None => diags.defaulted("model.geometry", "dipolar".to_string()),
    };
    let n_sites = match (&m.n_sites, &m.couplings) {
        (Some(n), _) => Some(*n),
        (None, Some(c)) => Some(c.len()),
        (None, None) => {
            diags.missing("model.n_sites");
            None
        }
    }?;
    let cap = if task == Some(Task::Validate) {
        MAX_SIM_SITES
    } else {
        DEFAULT_DENSE_CAP
    };
    if n_sites > cap {
        diags.physics(
            "model.n_sites",
            format!(
                "n_sites = {n_sites} exceeds the dense cap of {cap} sites for task {}",
                task.map_or("?".into(), |t| t.to_string())
            ),
        );
        return None;
    }
    let graph = match geometry.as_str() {
        "dipolar" => CouplingGraph::chain(n_sites, 3.0),
        "chain" => {
            let power = m
                .power
                .unwrap_or_else(|| diags.defaulted("model.power", 3.0));
            CouplingGraph::chain(n_sites, power)
        }
        "nearest_neighbor" => CouplingGraph::nearest_neighbor(n_sites),
        "explicit" => match &m.couplings {
            Some(c) => {
                if c.len() != n_sites {
                    diags.schema(
                        "model.couplings",
                        format!("matrix has {} rows but n_sites = {n_sites}", c.len()),
                    );
                    return None;
                }
                CouplingGraph::explicit(c.clone())
            }
            None => {
                diags.missing("model.couplings");
                return None;
            }
        },
        other => {
            diags.schema("model.geometry", format!("unknown geometry '{other}'"));
            return None;
        }
    };
    let graph = match graph {
        Ok(g) => g,
        Err(e) => {
            diags.schema("model", e.to_string());
            return None;
        }
    };
    let kind = m
        .kind
        .clone()
        .unwrap_or_else(|| diags.defaulted("model.kind", "xxz".to_string()));
    let mut need = |field: &str, value: Option<f64>| {
        if value.is_none() {
            diags.missing(field);
        }
        value
    };
    let model = match kind.as_str() {
        "xxz" => {
            let jp = need("model.j_perp", m.j_perp);
            let jz = need("model.j_z", m.j_z);
            SpinModel::xxz(graph, jp?, jz?)
        }
        "xy" => SpinModel::xy(graph, need("model.j_perp", m.j_perp)?),
        "ising" => SpinModel::ising(graph, need("model.j_z", m.j_z)?),
        "heisenberg" => SpinModel::heisenberg(graph, need("model.j", m.j)?),
        other => {
            diags.schema("model.kind", format!("unknown model kind '{other}'"));
            return None;
        }
    };
    Some(model)
}

fn resolve_pulse(
    raw: Option<&RawPulse>,
    task: Option<Task>,
    n_sites: Option<usize>,
    base: &Path,
    diags: &mut Diagnostics,
) -> Option<(PulseProfile, bool)> {
    let empty = RawPulse::default();
    let p = raw.unwrap_or(&empty);
    let shape = match p.shape.as_deref() {
        None => {
            diags.missing("pulse.shape");
            None
        }
        Some("tabulated") => {
            let interpolation = match &p.interpolation {
                Some(text) => diags.parse::<Interpolation>("pulse.interpolation", text)?,
                None => diags.defaulted("pulse.interpolation", Interpolation::PeriodicCubic),
            };
            match &p.file {
                Some(file) => {
                    let path = if file.is_absolute() {
                        file.clone()
                    } else {
                        base.join(file)
                    };
                    match TabulatedShape::load(&path, interpolation) {
                        Ok(t) => Some(PulseShape::Tabulated(t)),
                        Err(e) => {
                            diags.schema("pulse.file", e.to_string());
                            None
                        }
                    }
                }
                None => {
                    diags.missing("pulse.file");
                    None
                }
            }
        }
        Some(text) => diags.parse::<PulseShape>("pulse.shape", text),
    };
    let needs_timing = task == Some(Task::Validate);
    let subcycle_duration = match (p.subcycle_duration, p.omega) {
        (Some(_), Some(_)) => {
            diags.schema(
                "pulse.omega",
                "give either subcycle_duration or omega, not both",
            );
            None
        }
        (Some(t), None) => Some(t),
        (None, Some(w)) if w > 0.0 => Some(std::f64::consts::TAU / w),
        (None, Some(w)) => {
            diags.schema("pulse.omega", format!("omega must be positive, got {w}"));
            None
        }
        (None, None) if needs_timing => {
            diags.missing("pulse.subcycle_duration");
            None
        }
        (None, None) => Some(diags.defaulted("pulse.subcycle_duration", 1.0)),
    };
    let strength_given = p.strength.is_some();
    let strength = match p.strength {
        Some(v) => v,
        None if matches!(task, Some(Task::Moments) | Some(Task::Represent)) => {
            diags.defaulted("pulse.strength", 1.0)
        }
        None => 0.0,
    };
    let schedule = match (&p.subcycles, &p.axes) {
        (Some(subs), _) => {
            let mut out = Vec::new();
            for (k, s) in subs.iter().enumerate() {
                let mut drives = Vec::new();
                for d in &s.drives {
                    let axis = parse_axis(diags, &format!("pulse.subcycles[{k}].axis"), &d.axis)?;
                    drives.push(Drive {
                        axis,
                        sites: site_set(&d.sites),
                        weight: d.weight.unwrap_or(1.0),
                    });
                }
                out.push(Subcycle { drives });
            }
            out
        }
        (None, Some(axes)) => {
            let mut out = Vec::new();
            for a in axes {
                out.push(Subcycle::single(Drive::global(parse_axis(
                    diags,
                    "pulse.axes",
                    a,
                )?)));
            }
            out
        }
        (None, None) => {
            diags.defaulted("pulse.axes", ["x", "y"]);
            vec![
                Subcycle::single(Drive::global(Axis::X)),
                Subcycle::single(Drive::global(Axis::Y)),
            ]
        }
    };
    let mut weak = Vec::new();
    for (k, w) in p.weak.iter().flatten().enumerate() {
        weak.push(WeakDrive {
            axis: parse_axis(diags, &format!("pulse.weak[{k}].axis"), &w.axis)?,
            sites: site_set(&w.sites),
            amplitude: w.amplitude,
            harmonic: w.harmonic.unwrap_or(1.0),
            phase: w.phase.unwrap_or(0.0),
        });
    }
    let shape = shape?;
    let subcycle_duration = subcycle_duration?;
    let mut profile = match PulseProfile::new(shape, strength, subcycle_duration, schedule) {
        Ok(p) => p,
        Err(e) => {
            diags.schema("pulse", e.to_string());
            return None;
        }
    };
    if let Some(a) = p.amplitude {
        profile = profile.with_amplitude(a);
    }
    profile.weak_drives = weak;
    if let Some(n) = n_sites {
        for sub in &profile.schedule {
            for d in &sub.drives {
                if let Err(e) = d.sites.resolve(n) {
                    diags.schema("pulse.subcycles", e.to_string());
                }
            }
        }
    }
    Some((profile, strength_given))
}

fn resolve_family(
    text: Option<&str>,
    profile: &PulseProfile,
    convention: AveragingConvention,
    natural: AveragingConvention,
    p_max: Option<usize>,
    diags: &mut Diagnostics,
) -> Option<PulseFamily> {
    let mut from_pulse = |p: usize| -> Option<PulseFamily> {
        let unit = profile.with_strength(1.0);
        match unit.compute_moments(p, convention) {
            Ok(moments) => Some(PulseFamily::Series { moments, p_max: p }),
            Err(e) => {
                diags.physics("pulse", e.to_string());
                None
            }
        }
    };
    let series_p = p_max.unwrap_or(DEFAULT_P_MAX);
    match text {
        None | Some("pulse") => {
            let builtin = match profile.shape {
                PulseShape::Cosine => Some(PulseFamily::Cosine),
                PulseShape::Square => Some(PulseFamily::Square),
                _ => None,
            };
            match builtin {
                Some(f)
                    if p_max.is_none()
                        && convention == natural
                        && profile.amplitude == 1.0
                        && profile.n_subcycles() == 2 =>
                {
                    Some(f)
                }
                _ => from_pulse(series_p),
            }
        }
        Some(name @ ("cosine" | "square")) => {
            let (family, shape) = if name == "cosine" {
                (PulseFamily::Cosine, PulseShape::Cosine)
            } else {
                (PulseFamily::Square, PulseShape::Square)
            };
            if p_max.is_none() && convention == family.convention() {
                return Some(family);
            }
            let unit = PulseProfile::global_xy(shape, 1.0, 1.0).ok()?;
            match unit.compute_moments(series_p, convention) {
                Ok(moments) => Some(PulseFamily::Series {
                    moments,
                    p_max: series_p,
                }),
                Err(e) => {
                    diags.physics("solve.family", e.to_string());
                    None
                }
            }
        }
        Some(other) => {
            diags.schema(
                "solve.family",
                format!("unknown family '{other}' (expected cosine, square or pulse)"),
            );
            None
        }
    }
}

fn resolve_solve(
    raw: &RawConfig,
    task: Option<Task>,
    model: Option<&SpinModel>,
    diags: &mut Diagnostics,
) -> Option<SolveSpec> {
    let section = raw.solve.clone();
    if task == Some(Task::Validate) && section.is_none() {
        return None;
    }
    let s_raw = section.clone().unwrap_or_default();
    let target = match s_raw.target.as_deref() {
        None => diags.defaulted("solve.target", Target::Ising),
        Some("custom") => match (s_raw.a, s_raw.b) {
            (Some(a), Some(b)) => Target::Custom { a, b },
            (None, _) => {
                diags.missing("solve.a");
                return None;
            }
            (_, None) => {
                diags.missing("solve.b");
                return None;
            }
        },
        Some(text) => diags.parse::<Target>("solve.target", text)?,
    };
    let swept = raw.sweep.as_ref().and_then(|s| s.parameter.as_deref()) == Some("s");
    let s = match s_raw.s {
        Some(s) => s,
        None => match model.and_then(SpinModel::xxz_parameters) {
            Some(p) if p.j_perp != 0.0 => diags.defaulted("solve.s", p.anisotropy()),
            _ if swept => f64::NAN,
            _ => {
                diags.missing("solve.s");
                return None;
            }
        },
    };
    if target == Target::Ising && s == 1.0 {
        diags.physics(
            "solve.s",
            "s = 1 is the pole of the Ising condition U = 1/(8(s - 1)); an isotropic model cannot be made Ising",
        );
    }
    if target == Target::Xy && s == 1.0 {
        diags.physics(
            "solve.s",
            "s = 1 is the pole of the XY condition U = -s/(16(s - 1))",
        );
    }
    let bracket = s_raw
        .bracket
        .unwrap_or_else(|| diags.defaulted("solve.bracket", SolveOptions::default().bracket));
    if bracket.is_nan() || bracket <= 0.0 {
        diags.schema("solve.bracket", "bracket must be positive");
    }
    let require_roots = s_raw
        .require_roots
        .unwrap_or_else(|| diags.defaulted("solve.require_roots", true));
    Some(SolveSpec {
        s,
        target,
        require_roots,
        bracket,
    })
}

fn resolve_validate(
    v: RawValidate,
    n_sites: usize,
    seed: u64,
    diags: &mut Diagnostics,
) -> Option<ValidateSpec> {
    let n_cycles = v
        .n_cycles
        .unwrap_or_else(|| diags.defaulted("validate.n_cycles", 10));
    if n_cycles == 0 {
        diags.schema("validate.n_cycles", "n_cycles must be at least 1");
    }
    let state_text = v
        .initial_state
        .clone()
        .unwrap_or_else(|| diags.defaulted("validate.initial_state", "neel".to_string()));
    let initial_state = match state_text.as_str() {
        "all_up" => InitialState::AllUp,
        "neel" => InitialState::Neel,
        "all_plus_x" => InitialState::AllPlusX,
        "random" => InitialState::Amplitudes(random_amplitudes(n_sites, seed)),
        "amplitudes" => match (&v.amplitudes_re, &v.amplitudes_im) {
            (Some(re), im) => {
                let im = im.clone().unwrap_or_else(|| vec![0.0; re.len()]);
                if im.len() != re.len() {
                    diags.schema(
                        "validate.amplitudes_im",
                        "length differs from amplitudes_re",
                    );
                    return None;
                }
                InitialState::Amplitudes(
                    re.iter()
                        .zip(&im)
                        .map(|(a, b)| num_complex::Complex64::new(*a, *b))
                        .collect(),
                )
            }
            (None, _) => {
                diags.missing("validate.amplitudes_re");
                return None;
            }
        },
        other => match other.strip_prefix("basis:").map(str::parse::<usize>) {
            Some(Ok(i)) => InitialState::Basis(i),
            _ => {
                diags.schema(
                    "validate.initial_state",
                    format!("unknown initial state '{other}'"),
                );
                return None;
            }
        },
    };
    if n_sites > 0 {
        if let Err(e) = initial_state.vector(n_sites) {
            diags.schema("validate.initial_state", e.to_string());
        }
    }
    let samples_per_subcycle = v
        .samples_per_subcycle
        .unwrap_or_else(|| diags.defaulted("validate.samples_per_subcycle", 8));
    if samples_per_subcycle == 0 {
        diags.schema("validate.samples_per_subcycle", "must be at least 1");
    }
    let defaults = Stepping::default();
    let tolerance = v
        .tolerance
        .unwrap_or_else(|| diags.defaulted("validate.tolerance", defaults.tolerance));
    if tolerance.is_nan() || tolerance <= 0.0 {
        diags.schema("validate.tolerance", "tolerance must be positive");
    }
    let integrator = match &v.integrator {
        Some(text) => diags.parse::<Integrator>("validate.integrator", text)?,
        None => diags.defaulted("validate.integrator", defaults.integrator),
    };
    Some(ValidateSpec {
        n_cycles,
        initial_state,
        samples_per_subcycle,
        stepping: Stepping {
            tolerance,
            integrator,
            ..defaults
        },
        t_final: v.t_final,
    })
}

/// Normalized complex amplitudes drawn uniformly from the unit square.
fn random_amplitudes(n_sites: usize, seed: u64) -> Vec<num_complex::Complex64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = 1usize << n_sites.min(MAX_SIM_SITES);
    let v: Vec<num_complex::Complex64> = (0..dim)
        .map(|_| num_complex::Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn resolve_sweep(
    raw: Option<&RawSweep>,
    task: Option<Task>,
    diags: &mut Diagnostics,
) -> Option<SweepSpec> {
    let (default_param, allowed): (Option<&str>, &[&str]) = match task {
        Some(Task::Solve) => (None, &["s"]),
        Some(Task::Surface) => (Some("v"), &["v"]),
        Some(Task::Validate) => (None, &["omega"]),
        _ => (None, &[]),
    };
    let Some(sw) = raw else {
        if default_param == Some("v") {
            diags.defaulted("sweep", "v from -5 to 5 in 1000 steps");
            return Some(SweepSpec {
                parameter: "v".into(),
                values: crate::engine::uniform_grid(-5.0, 5.0, 1000),
            });
        }
        return None;
    };
    let parameter = match (&sw.parameter, default_param) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => diags.defaulted("sweep.parameter", p.to_string()),
        (None, None) => {
            diags.missing("sweep.parameter");
            return None;
        }
    };
    if !allowed.contains(&parameter.as_str()) {
        diags.schema(
            "sweep.parameter",
            format!(
                "task {} cannot sweep '{parameter}' (allowed: {allowed:?})",
                task.map_or("?".into(), |t| t.to_string())
            ),
        );
        return None;
    }
    let start = sw.start.or_else(|| {
        diags.missing("sweep.start");
        None
    });
    let stop = sw.stop.or_else(|| {
        diags.missing("sweep.stop");
        None
    });
    let steps = sw.steps.or_else(|| {
        diags.missing("sweep.steps");
        None
    });
    let (start, stop, steps) = (start?, stop?, steps?);
    if steps == 0 || !(start.is_finite() && stop.is_finite()) || start == stop {
        diags.schema(
            "sweep",
            "sweep range is empty: need finite start != stop and steps >= 1",
        );
        return None;
    }
    if parameter == "omega" && start.min(stop) <= 0.0 {
        diags.schema("sweep.start", "omega must be positive");
        return None;
    }
    Some(SweepSpec {
        parameter,
        values: crate::engine::uniform_grid(start, stop, steps),
    })
}

fn resolve_output(
    raw: Option<&RawOutput>,
    overrides: &Overrides,
    diags: &mut Diagnostics,
) -> OutputSpec {
    let directory = match (&overrides.output_dir, raw.and_then(|o| o.directory.clone())) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => d,
        (None, None) => match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(d) => diags.defaulted("output.directory", PathBuf::from(d)),
            None => diags.defaulted("output.directory", PathBuf::from(FALLBACK_OUTPUT_DIR)),
        },
    };
    let formats = raw.and_then(|o| o.formats.clone()).unwrap_or_else(|| {
        diags.defaulted(
            "output.formats",
            vec!["csv".to_string(), "json".to_string()],
        )
    });
    for f in &formats {
        if f != "csv" && f != "json" {
            diags.schema(
                "output.formats",
                format!("unknown format '{f}' (expected csv or json)"),
            );
        }
    }
    OutputSpec {
        directory,
        csv: formats.iter().any(|f| f == "csv"),
        json: formats.iter().any(|f| f == "json"),
    }
}

/// Solves the condition of an experiment's `[solve]` section for its family.
pub(crate) fn solve_spec(
    family: &PulseFamily,
    spec: &SolveSpec,
    s: f64,
) -> crate::Result<crate::engine::ConditionSolution> {
    let opts = SolveOptions {
        bracket: spec.bracket,
        ..SolveOptions::default()
    };
    solve_condition(family, s, spec.target, opts)
}
