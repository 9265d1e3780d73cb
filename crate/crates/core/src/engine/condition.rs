//! Engineering conditions: the strengths `v` that turn an XXZ model with anisotropy
//! `s = J_z / J_perp` into a target `A H_XY + B H_ZZ`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::series::{
    u_cosine_closed, u_cosine_closed_derivative, u_series, u_series_derivative, u_square_closed,
    u_square_closed_derivative,
};
use crate::error::{FloquetError, Result};
use crate::pulses::{AveragingConvention, MomentTable, PulseProfile, PulseShape};
use crate::special::brent;

/// Source of `U(v)` for condition solving.
#[derive(Clone, Debug, PartialEq)]
pub enum PulseFamily {
    /// `(J0(4v) - 1) / 32`.
    Cosine,
    /// `(sinc(2 pi v) - 1) / 16`.
    Square,
    /// Truncated series over an explicit moment table.
    Series { moments: MomentTable, p_max: usize },
}

impl PulseFamily {
    pub fn name(&self) -> String {
        match self {
            Self::Cosine => "cosine".into(),
            Self::Square => "square".into(),
            Self::Series { p_max, .. } => format!("series(p_max={p_max})"),
        }
    }

    /// Averaging convention under which the family's closed form holds.
    pub fn convention(&self) -> AveragingConvention {
        match self {
            Self::Cosine => AveragingConvention::FullCycle,
            Self::Square => AveragingConvention::Subcycle,
            Self::Series { moments, .. } => moments.convention(),
        }
    }

    /// Moments consistent with the family's closed form, for truncation studies.
    pub fn moments(&self, p_max: usize) -> Result<MomentTable> {
        match self {
            Self::Cosine => PulseProfile::global_xy(PulseShape::Cosine, 1.0, 1.0)?
                .compute_moments(p_max, AveragingConvention::FullCycle),
            Self::Square => PulseProfile::global_xy(PulseShape::Square, 1.0, 1.0)?
                .compute_moments(p_max, AveragingConvention::Subcycle),
            Self::Series { moments, .. } => Ok(moments.truncated(p_max)),
        }
    }

    pub fn u(&self, v: f64) -> f64 {
        match self {
            Self::Cosine => u_cosine_closed(v),
            Self::Square => u_square_closed(v),
            Self::Series { moments, p_max } => u_series(v, moments, *p_max).value,
        }
    }

    pub fn du(&self, v: f64) -> f64 {
        match self {
            Self::Cosine => u_cosine_closed_derivative(v),
            Self::Square => u_square_closed_derivative(v),
            Self::Series { moments, p_max } => u_series_derivative(v, moments, *p_max),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Target {
    /// `A = 0`.
    Ising,
    /// `B = 0`.
    Xy,
    /// Equal effective couplings on every axis.
    Heisenberg,
    Custom {
        a: f64,
        b: f64,
    },
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ising => f.write_str("ising"),
            Self::Xy => f.write_str("xy"),
            Self::Heisenberg => f.write_str("heisenberg"),
            Self::Custom { a, b } => write!(f, "custom(A={a}, B={b})"),
        }
    }
}

impl FromStr for Target {
    type Err = FloquetError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ising" => Ok(Self::Ising),
            "xy" => Ok(Self::Xy),
            "heisenberg" => Ok(Self::Heisenberg),
            other => Err(FloquetError::Parse(format!(
                "unknown target '{other}' (expected ising, xy, heisenberg or custom)"
            ))),
        }
    }
}

/// Value of `U` the target demands.
#[derive(Clone, Debug, PartialEq)]
pub enum RequiredU {
    Value(f64),
    /// `H_0` already has the target form; `v = 0` works.
    Trivial,
    Infeasible(String),
}

/// Required `U` for anisotropy `s`, from `A = 1 - 8 (s-1) U` and `B = 1 + 16 (s-1) U / s`.
pub fn required_u(s: f64, target: Target) -> Result<RequiredU> {
    if !s.is_finite() {
        return Err(FloquetError::InvalidArgument(format!(
            "anisotropy s must be finite, got {s}"
        )));
    }
    let d = s - 1.0;
    match target {
        Target::Ising => {
            if d == 0.0 {
                return Err(FloquetError::SingularCondition(
                    "s = 1: U = 1/(8(s-1)) has a pole; an isotropic model has no Ising solution"
                        .into(),
                ));
            }
            Ok(RequiredU::Value(1.0 / (8.0 * d)))
        }
        Target::Xy => {
            if d == 0.0 {
                return Err(FloquetError::SingularCondition(
                    "s = 1: the drive leaves an isotropic model unchanged, so B = 0 is unreachable"
                        .into(),
                ));
            }
            Ok(RequiredU::Value(-s / (16.0 * d)))
        }
        Target::Heisenberg => {
            if d == 0.0 {
                Ok(RequiredU::Trivial)
            } else {
                Ok(RequiredU::Value(-1.0 / 24.0))
            }
        }
        Target::Custom { a, b } => {
            if d == 0.0 {
                return Ok(if a == 1.0 && b == 1.0 {
                    RequiredU::Trivial
                } else {
                    RequiredU::Infeasible(
                        "s = 1: the drive cannot change an isotropic model".into(),
                    )
                });
            }
            let from_a = (1.0 - a) / (8.0 * d);
            if s == 0.0 {
                return Ok(RequiredU::Value(from_a));
            }
            let from_b = (b - 1.0) * s / (16.0 * d);
            let scale = from_a.abs().max(from_b.abs()).max(1e-300);
            if (from_a - from_b).abs() > 1e-12 * scale {
                return Ok(RequiredU::Infeasible(format!(
                    "A_c = {a} needs U = {from_a}, B_c = {b} needs U = {from_b}; a single pulse strength cannot meet both"
                )));
            }
            Ok(RequiredU::Value(0.5 * (from_a + from_b)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    /// Roots are sought in `[-bracket, bracket]`.
    pub bracket: f64,
    pub grid_step: f64,
    pub tolerance: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            bracket: 5.0,
            grid_step: 0.01,
            tolerance: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionSolution {
    pub family: String,
    pub convention: AveragingConvention,
    pub s: f64,
    pub target: Target,
    pub u_target: Option<f64>,
    /// All roots in the bracket, ascending.
    pub solutions: Vec<f64>,
    /// Root of smallest magnitude.
    pub preferred: Option<f64>,
    pub domain_ok: bool,
    pub diagnostic: Option<String>,
}

pub fn solve_condition(
    family: &PulseFamily,
    s: f64,
    target: Target,
    opts: SolveOptions,
) -> Result<ConditionSolution> {
    let mut out = ConditionSolution {
        family: family.name(),
        convention: family.convention(),
        s,
        target,
        u_target: None,
        solutions: Vec::new(),
        preferred: None,
        domain_ok: false,
        diagnostic: None,
    };
    let u_star = match required_u(s, target)? {
        RequiredU::Value(u) => u,
        RequiredU::Trivial => {
            out.u_target = Some(0.0);
            out.solutions = vec![0.0];
            out.preferred = Some(0.0);
            out.domain_ok = true;
            out.diagnostic = Some("H_0 already has the target form".into());
            return Ok(out);
        }
        RequiredU::Infeasible(why) => {
            out.diagnostic = Some(why);
            return Ok(out);
        }
    };
    out.u_target = Some(u_star);
    let roots = find_roots(
        |v| family.u(v) - u_star,
        |v| family.du(v),
        -opts.bracket,
        opts.bracket,
        opts,
    )?;
    if roots.is_empty() {
        let (lo, hi) = sampled_range(|v| family.u(v), opts);
        out.diagnostic = Some(format!(
            "required U = {u_star:.6e} lies outside the achievable range [{lo:.6e}, {hi:.6e}] for |v| <= {}",
            opts.bracket
        ));
    } else {
        out.preferred = roots
            .iter()
            .copied()
            .min_by(|a, b| a.abs().total_cmp(&b.abs()).then(b.total_cmp(a)));
        out.domain_ok = true;
    }
    out.solutions = roots;
    Ok(out)
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .collect()
}

fn sampled_range(f: impl Fn(f64) -> f64, opts: SolveOptions) -> (f64, f64) {
    grid(-opts.bracket, opts.bracket, opts.grid_step)
        .into_iter()
        .map(&f)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
            (lo.min(y), hi.max(y))
        })
}

/// Every root of `f` on `[lo, hi]`: sign changes between grid points and critical
/// points, plus tangential zeros at critical points of `f`.
pub fn find_roots(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    opts: SolveOptions,
) -> Result<Vec<f64>> {
    if !(opts.grid_step > 0.0 && hi > lo) {
        return Err(FloquetError::InvalidArgument(
            "root bracket must be non-empty with positive step".into(),
        ));
    }
    let xs = grid(lo, hi, opts.grid_step);
    let mut points = xs.clone();
    let mut critical = Vec::new();
    for w in xs.windows(2) {
        let (da, db) = (df(w[0]), df(w[1]));
        if da == 0.0 {
            critical.push(w[0]);
        } else if da * db < 0.0 {
            critical.push(brent(w[0], w[1], &df, 1e-15)?);
        }
    }
    points.extend(&critical);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut roots = Vec::new();
    let values: Vec<f64> = points.iter().map(|&x| f(x)).collect();
    for i in 0..points.len() {
        if values[i] == 0.0 {
            roots.push(points[i]);
        } else if i + 1 < points.len() && values[i] * values[i + 1] < 0.0 {
            roots.push(brent(
                points[i],
                points[i + 1],
                &f,
                opts.tolerance.min(1e-15),
            )?);
        }
    }
    for &c in &critical {
        if f(c).abs() <= 1e-14 {
            roots.push(c);
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_s_minus_one_smallest_root_half() {
        let sol = solve_condition(
            &PulseFamily::Square,
            -1.0,
            Target::Ising,
            SolveOptions::default(),
        )
        .unwrap();
        assert!((sol.preferred.unwrap().abs() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cosine_positive_s_has_no_solution() {
        let sol = solve_condition(
            &PulseFamily::Cosine,
            2.0,
            Target::Ising,
            SolveOptions::default(),
        )
        .unwrap();
        assert!(sol.solutions.is_empty());
        assert!(!sol.domain_ok);
        assert!(sol.diagnostic.unwrap().contains("outside"));
    }

    #[test]
    fn ising_pole_is_an_error() {
        assert!(matches!(
            solve_condition(
                &PulseFamily::Cosine,
                1.0,
                Target::Ising,
                SolveOptions::default()
            ),
            Err(FloquetError::SingularCondition(_))
        ));
    }

    #[test]
    fn inconsistent_custom_target() {
        let sol = solve_condition(
            &PulseFamily::Cosine,
            -3.0,
            Target::Custom { a: 0.0, b: 5.0 },
            SolveOptions::default(),
        )
        .unwrap();
        assert!(sol.solutions.is_empty());
        assert!(sol.diagnostic.is_some());
    }

    #[test]
    fn custom_matches_ising_when_consistent() {
        let s = -3.0;
        let b = (s + 2.0) / s;
        let c = solve_condition(
            &PulseFamily::Cosine,
            s,
            Target::Custom { a: 0.0, b },
            SolveOptions::default(),
        )
        .unwrap();
        let i = solve_condition(
            &PulseFamily::Cosine,
            s,
            Target::Ising,
            SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(c.solutions, i.solutions);
    }

    #[test]
    fn tangent_root_is_found() {
        let roots = find_roots(
            |x| (x - 0.3).powi(2),
            |x| 2.0 * (x - 0.3),
            -1.0,
            1.0,
            SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 0.3).abs() < 1e-12);
    }
}
