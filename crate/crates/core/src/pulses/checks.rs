use std::f64::consts::TAU;

use serde::Serialize;

use super::PulseProfile;
use crate::error::Result;

const CYCLICITY_TOLERANCE: f64 = 1e-10;
const SYMMETRY_SAMPLES: usize = 257;
const REPRESENTABILITY_SAMPLES: usize = 96;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CyclicityCheck {
    pub name: &'static str,
    pub passed: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CyclicityReport {
    pub checks: Vec<CyclicityCheck>,
}

impl CyclicityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CyclicityCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn check(name: &'static str, residual: f64) -> CyclicityCheck {
    CyclicityCheck {
        name,
        passed: residual <= CYCLICITY_TOLERANCE,
        residual,
    }
}

pub(super) fn verify_cyclicity(profile: &PulseProfile, n_sites: usize) -> Result<CyclicityReport> {
    let a = profile.amplitude;
    let shape_mean = profile.shape.mean();
    let mut subcycle_residual: f64 = 0.0;
    // Integral of the strong part of V over the full cycle, per (axis, site), in units of v.
    let mut total = [vec![0.0; n_sites], vec![0.0; n_sites], vec![0.0; n_sites]];
    for sub in &profile.schedule {
        for d in &sub.drives {
            let integral = TAU * a * d.weight * shape_mean;
            subcycle_residual = subcycle_residual.max(integral.abs());
            for j in d.sites.resolve(n_sites)? {
                total[d.axis.index() - 1][j] += integral;
            }
        }
    }
    let mut weak_total = [vec![0.0; n_sites], vec![0.0; n_sites], vec![0.0; n_sites]];
    for w in &profile.weak_drives {
        let integral = w.integral(profile.omega(), profile.period());
        for j in w.sites.resolve(n_sites)? {
            weak_total[w.axis.index() - 1][j] += integral;
        }
    }
    let strong_residual = total
        .iter()
        .flatten()
        .map(|x| (x * profile.strength).abs())
        .fold(0.0, f64::max);
    let weak_residual = weak_total
        .iter()
        .flatten()
        .map(|x| x.abs())
        .fold(0.0, f64::max);

    let symmetry_residual = (1..SYMMETRY_SAMPLES)
        .map(|k| {
            let delta = 0.5 * k as f64 / SYMMETRY_SAMPLES as f64;
            (profile.shape.big_g(0.5 - delta) + profile.shape.big_g(0.5 + delta)).abs() * a.abs()
        })
        .fold(0.0, f64::max);

    Ok(CyclicityReport {
        checks: vec![
            check("subcycle_integral", subcycle_residual),
            check("full_cycle_integral", strong_residual.max(weak_residual)),
            check("half_wave_symmetry", symmetry_residual),
        ],
    })
}

/// A pair of times at which the drive vectors are not parallel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub t_reference: f64,
    pub t_violation: f64,
    /// Norm of the component of the second vector orthogonal to the first, relative to its length.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Representability {
    pub representable: bool,
    pub witness: Option<Witness>,
}

/// Whether every amplitude function is a multiple of one common `g(t)`, i.e. the
/// drive vector `h(t)` over all `(axis, site)` channels stays on one line.
pub(super) fn is_goldman_representable(
    profile: &PulseProfile,
    n_sites: usize,
) -> Result<Representability> {
    let mut samples: Vec<(f64, Vec<f64>)> = Vec::new();
    let period = profile.period();
    let n = REPRESENTABILITY_SAMPLES * profile.n_subcycles();
    for k in 0..n {
        // Offset grid avoids the zeros and discontinuities of the built-in shapes.
        let t = (k as f64 + 0.37) / n as f64 * period;
        let (idx, c) = profile.strong_coefficient(t);
        let mut h = vec![0.0; 3 * n_sites];
        for d in &profile.schedule[idx].drives {
            for j in d.sites.resolve(n_sites)? {
                h[(d.axis.index() - 1) * n_sites + j] += d.weight * c;
            }
        }
        samples.push((t, h));
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let Some((t_ref, reference)) = samples
        .iter()
        .max_by(|a, b| norm(&a.1).total_cmp(&norm(&b.1)))
        .cloned()
    else {
        return Ok(Representability {
            representable: true,
            witness: None,
        });
    };
    let r2: f64 = reference.iter().map(|x| x * x).sum();
    if r2 == 0.0 {
        return Ok(Representability {
            representable: true,
            witness: None,
        });
    }
    for (t, h) in &samples {
        let hn = norm(h);
        if hn <= 1e-12 * r2.sqrt() {
            continue;
        }
        let proj: f64 = h.iter().zip(&reference).map(|(x, y)| x * y).sum::<f64>() / r2;
        let perp: f64 = h
            .iter()
            .zip(&reference)
            .map(|(x, y)| (x - proj * y).powi(2))
            .sum::<f64>()
            .sqrt();
        let deviation = perp / hn;
        if deviation > 1e-9 {
            return Ok(Representability {
                representable: false,
                witness: Some(Witness {
                    t_reference: t_ref,
                    t_violation: *t,
                    deviation,
                }),
            });
        }
    }
    Ok(Representability {
        representable: true,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Axis;
    use crate::pulses::{Drive, Interpolation, PulseShape, Subcycle, TabulatedShape};

    #[test]
    fn builtin_shapes_are_cyclic() {
        for shape in [PulseShape::Cosine, PulseShape::Square] {
            let p = PulseProfile::global_xy(shape, 0.7, 0.1).unwrap();
            let r = p.verify_cyclicity(3).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn constant_shape_is_not_cyclic() {
        let t = TabulatedShape::new(vec![1.0; 8], Interpolation::Linear).unwrap();
        let p = PulseProfile::global_xy(PulseShape::Tabulated(t), 0.5, 1.0).unwrap();
        let r = p.verify_cyclicity(2).unwrap();
        assert!(!r.passed());
        assert!(r.failures().iter().any(|c| c.name == "subcycle_integral"));
    }

    #[test]
    fn simultaneous_axes_are_representable() {
        let p = PulseProfile::new(
            PulseShape::Cosine,
            1.0,
            1.0,
            vec![Subcycle {
                drives: vec![Drive::global(Axis::X), Drive::global(Axis::Y)],
            }],
        )
        .unwrap();
        assert!(p.is_goldman_representable(2).unwrap().representable);
    }

    #[test]
    fn staggered_square_is_not_representable() {
        let p = PulseProfile::global_xy(PulseShape::Square, 1.0, 1.0).unwrap();
        let r = p.is_goldman_representable(1).unwrap();
        assert!(!r.representable);
        let w = r.witness.unwrap();
        let (k1, _) = p.locate(w.t_reference).unwrap();
        let (k2, _) = p.locate(w.t_violation).unwrap();
        assert_ne!(k1, k2);
    }
}
