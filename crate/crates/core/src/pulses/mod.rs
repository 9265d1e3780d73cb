//! Periodic driving potentials built from a subcycle shape and a schedule.
//!
//! Within subcycle `k` (times `[kT, (k+1)T)`) the strong drive is
//! `V(t) = v omega a g(tau) * sum_d w_d sigma^{axis_d}_{sites_d}`, with `tau` the
//! fractional position inside the subcycle and `omega = 2 pi / T`. Optional weak
//! drives `f(t) = V0 cos(m omega t + phi)` ride on top; they enter only the exact
//! simulator, since their effective-Hamiltonian contribution is `O(1/omega)`.

mod checks;
mod moments;
mod shape;

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{FloquetError, Result};
use crate::pauli::{Axis, PauliString, SpinOperator};

pub use checks::{CyclicityCheck, CyclicityReport, Representability, Witness};
pub use moments::{AveragingConvention, MomentTable};
pub use shape::{central_binomial_over_four_pow, Interpolation, PulseShape, TabulatedShape};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SiteSet {
    All,
    Sites(Vec<usize>),
}

impl SiteSet {
    pub fn resolve(&self, n_sites: usize) -> Result<Vec<usize>> {
        match self {
            Self::All => Ok((0..n_sites).collect()),
            Self::Sites(sites) => {
                if let Some(&site) = sites.iter().find(|&&s| s >= n_sites) {
                    return Err(FloquetError::SiteOutOfRange { site, n_sites });
                }
                Ok(sites.clone())
            }
        }
    }
}

/// One strongly driven Pauli channel of a subcycle.
#[derive(Clone, Debug, PartialEq)]
pub struct Drive {
    pub axis: Axis,
    pub sites: SiteSet,
    pub weight: f64,
}

impl Drive {
    pub fn global(axis: Axis) -> Self {
        Self {
            axis,
            sites: SiteSet::All,
            weight: 1.0,
        }
    }

    pub fn site(axis: Axis, site: usize) -> Self {
        Self {
            axis,
            sites: SiteSet::Sites(vec![site]),
            weight: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Subcycle {
    pub drives: Vec<Drive>,
}

impl Subcycle {
    pub fn single(drive: Drive) -> Self {
        Self {
            drives: vec![drive],
        }
    }

    /// `sum_d w_d sigma^{axis_d}` over the drive's sites.
    pub fn generator(&self, n_sites: usize) -> Result<SpinOperator> {
        let mut op = SpinOperator::zero();
        for d in &self.drives {
            for j in d.sites.resolve(n_sites)? {
                op.add_term(
                    PauliString::single(j, d.axis),
                    Complex64::new(d.weight, 0.0),
                );
            }
        }
        Ok(op.canonicalize())
    }

    /// Axis and common weight when the subcycle drives one axis uniformly on every site.
    pub fn uniform_global_axis(&self, n_sites: usize) -> Option<(Axis, f64)> {
        let axis = self.drives.first()?.axis;
        let mut weights = vec![0.0; n_sites];
        for d in &self.drives {
            if d.axis != axis {
                return None;
            }
            for j in d.sites.resolve(n_sites).ok()? {
                weights[j] += d.weight;
            }
        }
        let w = weights[0];
        (w != 0.0 && weights.iter().all(|&x| x == w)).then_some((axis, w))
    }
}

/// Small-amplitude drive `amplitude * cos(harmonic * omega * t + phase)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakDrive {
    pub axis: Axis,
    pub sites: SiteSet,
    pub amplitude: f64,
    pub harmonic: f64,
    pub phase: f64,
}

impl WeakDrive {
    pub fn value(&self, omega: f64, t: f64) -> f64 {
        self.amplitude * (self.harmonic * omega * t + self.phase).cos()
    }

    /// `int_0^t` of [`Self::value`].
    pub fn integral(&self, omega: f64, t: f64) -> f64 {
        if self.harmonic == 0.0 {
            self.amplitude * self.phase.cos() * t
        } else {
            let k = self.harmonic * omega;
            self.amplitude * ((k * t + self.phase).sin() - self.phase.sin()) / k
        }
    }

    pub fn operator(&self, n_sites: usize) -> Result<SpinOperator> {
        Ok(SpinOperator::collective(
            self.axis,
            self.sites.resolve(n_sites)?,
        ))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseProfile {
    pub shape: PulseShape,
    /// Multiplies `g` (and so `G`).
    pub amplitude: f64,
    /// Dimensionless strength `v`, the drive amplitude over `omega`.
    pub strength: f64,
    pub subcycle_duration: f64,
    pub schedule: Vec<Subcycle>,
    pub weak_drives: Vec<WeakDrive>,
}

impl PulseProfile {
    pub fn new(
        shape: PulseShape,
        strength: f64,
        subcycle_duration: f64,
        schedule: Vec<Subcycle>,
    ) -> Result<Self> {
        let profile = Self {
            shape,
            amplitude: 1.0,
            strength,
            subcycle_duration,
            schedule,
            weak_drives: Vec::new(),
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Global `sigma^1` then global `sigma^2` subcycles (`N = 2`).
    pub fn global_xy(shape: PulseShape, strength: f64, subcycle_duration: f64) -> Result<Self> {
        Self::new(
            shape,
            strength,
            subcycle_duration,
            vec![
                Subcycle::single(Drive::global(Axis::X)),
                Subcycle::single(Drive::global(Axis::Y)),
            ],
        )
    }

    /// One subcycle driving a single site along `axis`.
    pub fn single_site(
        shape: PulseShape,
        axis: Axis,
        site: usize,
        strength: f64,
        subcycle_duration: f64,
    ) -> Result<Self> {
        Self::new(
            shape,
            strength,
            subcycle_duration,
            vec![Subcycle::single(Drive::site(axis, site))],
        )
    }

    /// No strong drive: a single idle subcycle.
    pub fn undriven(subcycle_duration: f64) -> Result<Self> {
        Self::new(
            PulseShape::Zero,
            0.0,
            subcycle_duration,
            vec![Subcycle::default()],
        )
    }

    pub fn with_weak_drive(mut self, drive: WeakDrive) -> Self {
        self.weak_drives.push(drive);
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_strength(&self, strength: f64) -> Self {
        Self {
            strength,
            ..self.clone()
        }
    }

    pub fn with_subcycle_duration(&self, subcycle_duration: f64) -> Self {
        Self {
            subcycle_duration,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.subcycle_duration.is_finite() && self.subcycle_duration > 0.0) {
            return Err(FloquetError::InvalidArgument(format!(
                "subcycle duration must be positive, got {}",
                self.subcycle_duration
            )));
        }
        if self.schedule.is_empty() {
            return Err(FloquetError::InvalidArgument(
                "schedule has no subcycles".into(),
            ));
        }
        if !self.strength.is_finite() || !self.amplitude.is_finite() {
            return Err(FloquetError::InvalidArgument(
                "strength and amplitude must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn n_subcycles(&self) -> usize {
        self.schedule.len()
    }

    /// `omega = 2 pi / T`.
    pub fn omega(&self) -> f64 {
        TAU / self.subcycle_duration
    }

    /// Full cycle `N T`.
    pub fn period(&self) -> f64 {
        self.subcycle_duration * self.n_subcycles() as f64
    }

    /// Strong-drive scale `v * a`, the prefactor of `G` in the kick operator.
    pub fn effective_strength(&self) -> f64 {
        self.strength * self.amplitude
    }

    /// Active subcycle index and fractional position, for `t` in `[0, NT]`.
    pub fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let cycle = self.period();
        let slack = 1e-12 * cycle;
        if !(t >= -slack && t <= cycle + slack) {
            return Err(FloquetError::TimeOutsideCycle { t, cycle });
        }
        let t = t.clamp(0.0, cycle);
        let n = self.n_subcycles();
        let x = t / self.subcycle_duration;
        let k = (x.floor() as usize).min(n - 1);
        Ok((k, (x - k as f64).min(1.0)))
    }

    fn locate_periodic(&self, t: f64) -> (usize, f64) {
        let wrapped = t.rem_euclid(self.period());
        self.locate(wrapped)
            .expect("wrapped time lies inside the cycle")
    }

    /// `G^alpha_j(t)` for every axis and site: `result[axis][site]`.
    pub fn integrate_g(&self, t: f64, n_sites: usize) -> Result<[Vec<f64>; 3]> {
        let (k, tau) = self.locate(t)?;
        let value = self.amplitude * self.shape.big_g(tau);
        let mut out: [Vec<f64>; 3] = [vec![0.0; n_sites], vec![0.0; n_sites], vec![0.0; n_sites]];
        for d in &self.schedule[k].drives {
            for j in d.sites.resolve(n_sites)? {
                out[d.axis.index() - 1][j] += d.weight * value;
            }
        }
        Ok(out)
    }

    /// Lowest-order kick `K(t) = v * a * G(tau) * S_k` for the active subcycle generator `S_k`.
    pub fn kick_operator(&self, t: f64, n_sites: usize) -> Result<SpinOperator> {
        let (k, tau) = self.locate(t)?;
        let scale = self.effective_strength() * self.shape.big_g(tau);
        Ok(self.schedule[k]
            .generator(n_sites)?
            .scale_real(scale)
            .canonicalize())
    }

    /// Coefficient multiplying the active subcycle generator at any time (periodic extension).
    pub fn strong_coefficient(&self, t: f64) -> (usize, f64) {
        let (k, tau) = self.locate_periodic(t);
        (
            k,
            self.strength * self.omega() * self.amplitude * self.shape.g(tau),
        )
    }

    /// Scalar multiplying the active subcycle generator in the kick (periodic extension).
    pub fn kick_coefficient(&self, t: f64) -> (usize, f64) {
        let (k, tau) = self.locate_periodic(t);
        (k, self.effective_strength() * self.shape.big_g(tau))
    }

    /// Full drive `V(t)` as an operator (periodic extension).
    pub fn drive_operator(&self, t: f64, n_sites: usize) -> Result<SpinOperator> {
        let (k, c) = self.strong_coefficient(t);
        let mut v = self.schedule[k].generator(n_sites)?.scale_real(c);
        for w in &self.weak_drives {
            v += &w.operator(n_sites)?.scale_real(w.value(self.omega(), t));
        }
        Ok(v.canonicalize())
    }

    /// Times inside one cycle where the drive is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let inner = self.shape.breakpoints();
        for k in 0..=self.n_subcycles() {
            out.push(k as f64 * self.subcycle_duration);
            if k < self.n_subcycles() && !matches!(self.shape, PulseShape::Tabulated(_)) {
                out.extend(
                    inner
                        .iter()
                        .map(|tau| (k as f64 + tau) * self.subcycle_duration),
                );
            }
        }
        out
    }

    pub fn compute_moments(
        &self,
        p_max: usize,
        convention: AveragingConvention,
    ) -> Result<MomentTable> {
        MomentTable::compute(self, p_max, convention)
    }

    pub fn verify_cyclicity(&self, n_sites: usize) -> Result<CyclicityReport> {
        checks::verify_cyclicity(self, n_sites)
    }

    pub fn is_goldman_representable(&self, n_sites: usize) -> Result<Representability> {
        checks::is_goldman_representable(self, n_sites)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn cosine_kick_quarter_period() {
        let p = PulseProfile::global_xy(PulseShape::Cosine, 0.3, 1.0).unwrap();
        let k = p.kick_operator(0.25, 2).unwrap();
        let expected = SpinOperator::collective(Axis::X, [0, 1]).scale_real(0.3);
        assert!(k.distance(&expected) < 1e-15);
        assert!(p.kick_operator(0.0, 2).unwrap().is_zero());
        assert!(p.kick_operator(1.5, 2).unwrap().max_abs() < 1e-15);
        assert!(p.kick_operator(2.5, 2).is_err());
    }

    #[test]
    fn integrate_g_values() {
        let sq = PulseProfile::global_xy(PulseShape::Square, 1.0, 2.0).unwrap();
        let g = sq.integrate_g(0.5, 2).unwrap();
        assert!((g[0][0] - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(g[1][0], 0.0);
        let g = sq.integrate_g(2.5, 2).unwrap();
        assert!((g[1][1] - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(sq.integrate_g(2.0, 1).unwrap()[1][0], 0.0);
    }

    #[test]
    fn uniform_axis_detection() {
        let s = Subcycle::single(Drive::global(Axis::Y));
        assert_eq!(s.uniform_global_axis(3), Some((Axis::Y, 1.0)));
        let s = Subcycle::single(Drive::site(Axis::Y, 0));
        assert_eq!(s.uniform_global_axis(3), None);
        let s = Subcycle {
            drives: vec![Drive::site(Axis::Z, 0), Drive::site(Axis::Z, 1)],
        };
        assert_eq!(s.uniform_global_axis(2), Some((Axis::Z, 1.0)));
    }

    #[test]
    fn weak_drive_integral() {
        let w = WeakDrive {
            axis: Axis::Z,
            sites: SiteSet::All,
            amplitude: 2.0,
            harmonic: 1.0,
            phase: 0.0,
        };
        assert!(w.integral(TAU, 1.0).abs() < 1e-15);
        assert!((w.integral(TAU, 0.25) - 2.0 / TAU).abs() < 1e-15);
    }
}
