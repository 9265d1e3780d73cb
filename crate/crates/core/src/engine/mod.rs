//! Lowest-order effective Hamiltonians of strongly driven spin models.
//!
//! For a subcycle with generator `S` and strength `v`, the drive adds
//! `F[H] = sum_p (-1)^p v^{2p} overline{G^{2p}} / (2p)! [[S, H]]_{2p}` to `H_0`.
//! For two-body models driven along one axis uniformly on every site the nested
//! commutators obey `D^{2p} = 16^{p-1} D^2`, which collapses the series to
//! `D^2 U(v)`.

mod condition;
mod series;
mod surface;

use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{FloquetError, Result};
use crate::models::{build_hamiltonian, SpinModel, XxzParameters};
use crate::pauli::{commutator, nested_commutator, Axis, PauliString, SpinOperator};
use crate::pulses::{AveragingConvention, MomentTable, PulseProfile, PulseShape};

pub use condition::{
    find_roots, required_u, solve_condition, ConditionSolution, PulseFamily, RequiredU,
    SolveOptions, Target,
};
pub use series::{
    u_closed, u_cosine_closed, u_cosine_closed_derivative, u_series, u_series_derivative,
    u_square_closed, u_square_closed_derivative, SeriesValue,
};
pub use surface::{
    truncated_solution_surface, uniform_grid, PoleRecord, SolutionSurface, SurfaceOrder, SurfaceRow,
};

/// Truncation order used when no closed form applies.
pub const DEFAULT_P_MAX: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesOrder {
    ClosedForm,
    Truncated(usize),
}

impl fmt::Display for SeriesOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ClosedForm => f.write_str("closed_form"),
            Self::Truncated(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Closed-form recursion when the schedule allows it, direct commutators otherwise.
    Auto,
    /// Always evaluate nested commutators term by term.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveOptions {
    pub order: SeriesOrder,
    pub convention: AveragingConvention,
    pub strategy: Strategy,
}

impl Default for EffectiveOptions {
    fn default() -> Self {
        Self {
            order: SeriesOrder::ClosedForm,
            convention: AveragingConvention::FullCycle,
            strategy: Strategy::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectiveModel {
    #[serde(serialize_with = "serialize_operator")]
    pub operator: SpinOperator,
    /// `A` in `A H_XY + B H_ZZ`, for XXZ models with `J_perp != 0`.
    pub a_coeff: Option<f64>,
    /// `B`, for XXZ models with `J_z != 0`.
    pub b_coeff: Option<f64>,
    /// Common `U` when every subcycle shares one.
    pub u_value: Option<f64>,
    /// `U` of each subcycle (recursion path only).
    pub subcycle_u: Vec<f64>,
    /// Effective XXZ couplings `(J_perp A, J_z B)`.
    pub effective_couplings: Option<(f64, f64)>,
    pub order: SeriesOrder,
    pub convention: AveragingConvention,
    /// Magnitude of the first omitted series term.
    pub tail_estimate: f64,
    /// Coefficient distance between the operator and `A H_XY + B H_ZZ`.
    pub xxz_residual: Option<f64>,
    pub notes: Vec<String>,
}

fn serialize_operator<S: serde::Serializer>(
    op: &SpinOperator,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(op.len()))?;
    for (k, c) in op.iter() {
        map.serialize_entry(&k.to_string(), &c.re)?;
    }
    map.end()
}

/// `F[h] = sum_{p=1}^{p_max} (-1)^p v^{2p} m_p / (2p)! [[generator, h]]_{2p}`.
pub fn superoperator_f(
    h: &SpinOperator,
    generator: &SpinOperator,
    strength: f64,
    moments: &MomentTable,
) -> SpinOperator {
    superoperator_f_with_tail(h, generator, strength, moments, moments.p_max()).0
}

/// [`superoperator_f`] for the single-site generator `sigma^axis_site`.
pub fn superoperator_f_site(
    h: &SpinOperator,
    axis: Axis,
    site: usize,
    strength: f64,
    moments: &MomentTable,
) -> SpinOperator {
    superoperator_f(h, &SpinOperator::single(site, axis), strength, moments)
}

/// Series through `p_max` and the L1 norm of the first omitted term.
fn superoperator_f_with_tail(
    h: &SpinOperator,
    generator: &SpinOperator,
    strength: f64,
    moments: &MomentTable,
    p_max: usize,
) -> (SpinOperator, f64) {
    let mut sum = SpinOperator::zero();
    let mut nested = h.clone();
    let mut coeff = 1.0;
    let v2 = strength * strength;
    for p in 1..=p_max + 1 {
        nested = commutator(generator, &commutator(generator, &nested));
        coeff *= -v2 / ((2 * p - 1) * 2 * p) as f64;
        let c = coeff * moments.moment_or_bound(p);
        if p > p_max {
            return (sum.canonicalize(), (nested.l1_norm() * c).abs());
        }
        if nested.is_zero() {
            return (sum.canonicalize(), 0.0);
        }
        sum += &nested.scale_real(c);
    }
    unreachable!("loop returns on the step past p_max")
}

/// Inner product `sum_s conj(a_s) b_s` of coefficient vectors.
fn coefficient_inner(a: &SpinOperator, b: &SpinOperator) -> Complex64 {
    a.iter().map(|(s, c)| c.conj() * b.coefficient(s)).sum()
}

pub fn effective_hamiltonian(
    model: &SpinModel,
    profile: &PulseProfile,
    opts: EffectiveOptions,
) -> Result<EffectiveModel> {
    let n = model.n_sites();
    let report = profile.verify_cyclicity(n)?;
    if !report.passed() {
        let failed: Vec<String> = report
            .failures()
            .iter()
            .map(|c| format!("{} (residual {:.3e})", c.name, c.residual))
            .collect();
        return Err(FloquetError::CyclicityViolation(failed.join(", ")));
    }
    let h0 = build_hamiltonian(model);
    let mut notes = Vec::new();
    let n_sub = profile.n_subcycles();
    let v = profile.strength;

    let mut order = opts.order;
    if order == SeriesOrder::ClosedForm && matches!(profile.shape, PulseShape::Tabulated(_)) {
        notes.push(format!(
            "no closed form for tabulated shapes; series truncated at p_max = {DEFAULT_P_MAX}"
        ));
        order = SeriesOrder::Truncated(DEFAULT_P_MAX);
    }

    let uniform: Option<Vec<Option<(Axis, f64)>>> = profile
        .schedule
        .iter()
        .map(|sub| {
            if sub.drives.is_empty() {
                Some(None)
            } else {
                sub.uniform_global_axis(n).map(Some)
            }
        })
        .collect();
    let use_recursion = opts.strategy == Strategy::Auto && uniform.is_some();
    if order == SeriesOrder::ClosedForm && !use_recursion {
        notes.push(format!(
            "closed form needs uniform single-axis global subcycles; series truncated at p_max = {DEFAULT_P_MAX}"
        ));
        order = SeriesOrder::Truncated(DEFAULT_P_MAX);
    }

    let mut operator = h0.clone();
    let mut subcycle_u = Vec::new();
    let mut tail = 0.0;
    if v != 0.0 && profile.shape != PulseShape::Zero {
        if let (true, Some(axes)) = (use_recursion, uniform) {
            let moments = match order {
                SeriesOrder::Truncated(p) => Some(profile.compute_moments(p, opts.convention)?),
                SeriesOrder::ClosedForm => None,
            };
            for (axis, w) in axes.into_iter().flatten() {
                let d2 = nested_commutator(&SpinOperator::collective(axis, 0..n), &h0, 2);
                let u = match &moments {
                    Some(m) => {
                        let sv = u_series(v * w, m, m.p_max());
                        tail += 16.0 * sv.first_dropped * d2.l1_norm();
                        sv.value
                    }
                    None => u_closed(
                        &profile.shape,
                        v * w * profile.amplitude,
                        opts.convention,
                        n_sub,
                    )
                    .expect("closed form exists for built-in shapes"),
                };
                operator += &d2.scale_real(u);
                subcycle_u.push(u);
            }
        } else {
            let p_max = match order {
                SeriesOrder::Truncated(p) => p,
                SeriesOrder::ClosedForm => DEFAULT_P_MAX,
            };
            let moments = profile.compute_moments(p_max, opts.convention)?;
            for sub in &profile.schedule {
                if sub.drives.is_empty() {
                    continue;
                }
                let (f, t) = superoperator_f_with_tail(&h0, &sub.generator(n)?, v, &moments, p_max);
                operator += &f;
                tail += t;
            }
        }
    }
    let operator = operator.canonicalize();

    let u_value = match subcycle_u.as_slice() {
        [] if v == 0.0 || profile.shape == PulseShape::Zero => Some(0.0),
        [first, rest @ ..] if rest.iter().all(|u| u == first) => Some(*first),
        _ => None,
    };
    let mut out = EffectiveModel {
        operator,
        a_coeff: None,
        b_coeff: None,
        u_value,
        subcycle_u,
        effective_couplings: None,
        order,
        convention: opts.convention,
        tail_estimate: tail,
        xxz_residual: None,
        notes,
    };
    if let Some(xxz) = model.xxz_parameters() {
        fit_xxz(model, xxz, &mut out);
    }
    Ok(out)
}

/// Projects the operator onto `H_XY` and `H_ZZ` of the model and records the remainder.
fn fit_xxz(model: &SpinModel, xxz: XxzParameters, out: &mut EffectiveModel) {
    let unit_xy = build_hamiltonian(&SpinModel::xy(model.graph().clone(), 1.0));
    let unit_zz = build_hamiltonian(&SpinModel::ising(model.graph().clone(), 1.0));
    let norm_xy = coefficient_inner(&unit_xy, &unit_xy).re;
    let norm_zz = coefficient_inner(&unit_zz, &unit_zz).re;
    if norm_xy == 0.0 || norm_zz == 0.0 {
        return;
    }
    let jp = coefficient_inner(&unit_xy, &out.operator).re / norm_xy;
    let jz = coefficient_inner(&unit_zz, &out.operator).re / norm_zz;
    let fitted = &unit_xy.scale_real(jp) + &unit_zz.scale_real(jz);
    out.xxz_residual = Some(fitted.distance(&out.operator));
    out.effective_couplings = Some((jp, jz));
    out.a_coeff = (xxz.j_perp != 0.0).then(|| jp / xxz.j_perp);
    out.b_coeff = (xxz.j_z != 0.0).then(|| jz / xxz.j_z);
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecursionResidual {
    pub p: usize,
    /// L1 coefficient norm of `D^{2p} - 16^{p-1} D^2`, an upper bound on its operator norm.
    pub residual: f64,
    pub d2p_norm: f64,
}

/// Checks `D^{2p}[h0] = 16^{p-1} D^2[h0]` for the collective generator along `axis`.
pub fn recursion_check(h0: &SpinOperator, axis: Axis, p: usize) -> Result<RecursionResidual> {
    if p == 0 {
        return Err(FloquetError::InvalidArgument(
            "recursion order p must be at least 1".into(),
        ));
    }
    let n = h0.max_site().map_or(1, |m| m + 1);
    let s = SpinOperator::collective(axis, 0..n);
    let d2 = nested_commutator(&s, h0, 2);
    let d2p = nested_commutator(&s, h0, 2 * p);
    let scaled = d2.scale_real(16f64.powi(p as i32 - 1));
    Ok(RecursionResidual {
        p,
        residual: (&d2p - &scaled).l1_norm(),
        d2p_norm: d2p.l1_norm(),
    })
}

/// `8 (sigma^b sigma^b - sigma^c sigma^c)` on sites `(j, k)` for `a != b`, zero for `a = b`,
/// with `c` the remaining axis: the second nested commutator of a two-site product with
/// the collective generator along `a`.
pub fn double_commutator_identity(a: Axis, b: Axis, j: usize, k: usize) -> SpinOperator {
    match a.third(b) {
        None => SpinOperator::zero(),
        Some(c) => SpinOperator::from_terms([
            (PauliString::pair((j, b), (k, b)), Complex64::new(8.0, 0.0)),
            (PauliString::pair((j, c), (k, c)), Complex64::new(-8.0, 0.0)),
        ]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::dipolar_couplings;

    fn xxz(n: usize, jp: f64, jz: f64) -> SpinModel {
        SpinModel::xxz(dipolar_couplings(n).unwrap(), jp, jz)
    }

    #[test]
    fn zero_strength_returns_h0() {
        let m = xxz(3, 1.0, -2.0);
        let p = PulseProfile::global_xy(PulseShape::Cosine, 0.0, 0.1).unwrap();
        let e = effective_hamiltonian(&m, &p, EffectiveOptions::default()).unwrap();
        assert_eq!(e.operator, build_hamiltonian(&m));
        assert_eq!(e.a_coeff, Some(1.0));
        assert_eq!(e.b_coeff, Some(1.0));
        assert_eq!(e.u_value, Some(0.0));
    }

    #[test]
    fn closed_form_coefficients() {
        let (jp, jz) = (1.0, -3.0);
        let p = PulseProfile::global_xy(PulseShape::Cosine, 0.25, 0.1).unwrap();
        let e = effective_hamiltonian(&xxz(3, jp, jz), &p, EffectiveOptions::default()).unwrap();
        let u = u_cosine_closed(0.25);
        assert!((e.u_value.unwrap() - u).abs() < 1e-16);
        let dj = jz - jp;
        assert!((e.a_coeff.unwrap() - (1.0 - 8.0 * dj * u / jp)).abs() < 1e-13);
        assert!((e.b_coeff.unwrap() - (1.0 + 16.0 * dj * u / jz)).abs() < 1e-13);
        assert!(e.xxz_residual.unwrap() < 1e-13);
    }

    #[test]
    fn direct_agrees_with_recursion() {
        let m = xxz(3, 0.8, 1.7);
        let p = PulseProfile::global_xy(PulseShape::Square, 0.4, 0.1).unwrap();
        let opts = EffectiveOptions {
            order: SeriesOrder::Truncated(30),
            convention: AveragingConvention::Subcycle,
            strategy: Strategy::Auto,
        };
        let fast = effective_hamiltonian(&m, &p, opts).unwrap();
        let slow = effective_hamiltonian(
            &m,
            &p,
            EffectiveOptions {
                strategy: Strategy::Direct,
                ..opts
            },
        )
        .unwrap();
        assert!(fast.operator.distance(&slow.operator) < 1e-12);
    }

    #[test]
    fn non_cyclic_profile_is_rejected() {
        use crate::pulses::{Interpolation, TabulatedShape};
        let t = TabulatedShape::new(vec![1.0; 4], Interpolation::Linear).unwrap();
        let p = PulseProfile::global_xy(PulseShape::Tabulated(t), 0.3, 0.1).unwrap();
        assert!(matches!(
            effective_hamiltonian(&xxz(2, 1.0, 0.5), &p, EffectiveOptions::default()),
            Err(FloquetError::CyclicityViolation(_))
        ));
    }

    #[test]
    fn commuting_hamiltonian_is_untouched() {
        let h = build_hamiltonian(&SpinModel::ising(dipolar_couplings(2).unwrap(), 1.0));
        let m = MomentTable::from_values(vec![0.5, 0.375], AveragingConvention::Subcycle, 1.0, 1.0)
            .unwrap();
        assert!(superoperator_f_site(&h, Axis::Z, 0, 0.7, &m).is_zero());
    }

    #[test]
    fn recursion_p1_is_exact() {
        let h = build_hamiltonian(&xxz(2, 1.0, 0.3));
        assert_eq!(recursion_check(&h, Axis::X, 1).unwrap().residual, 0.0);
    }
}
