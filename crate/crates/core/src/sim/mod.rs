//! Exact time evolution of small driven spin systems and comparison with
//! effective-Hamiltonian dynamics.
//!
//! Basis states are indexed with site 0 as the most significant bit and bit
//! value 0 meaning spin up (`sigma^3 = +1`). Gauge-frame states are
//! `phi(t) = exp(i K(t)) psi(t)` with the lowest-order kick `K`.

mod analysis;
mod cache;
mod propagate;

use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{FloquetError, Result};
use crate::models::{build_hamiltonian, SpinModel};
use crate::pauli::{Axis, SpinOperator};
use crate::pulses::PulseProfile;

pub use analysis::{
    compare_frames, compare_frames_with, dressed_observable, fit_oscillation_frequency,
    fit_xy_coupling, floquet_quasienergies, frequency_scaling, log_log_slope, DressedSeries,
    ErrorReport, ScalingPoint, ScalingReport, ScalingSetup, XyFit,
};
pub use cache::TrajectoryCache;

use propagate::{hermitian_exp, DrivenSystem, Spectral, State};

/// Largest system the simulator accepts.
pub const MAX_SIM_SITES: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    /// `|up ... up>`.
    AllUp,
    /// `|up down up down ...>`.
    Neel,
    /// Every spin along `+x`.
    AllPlusX,
    /// Computational basis state by index.
    Basis(usize),
    /// Explicit amplitudes, normalized on use.
    Amplitudes(Vec<Complex64>),
}

impl InitialState {
    pub fn vector(&self, n_sites: usize) -> Result<DVector<Complex64>> {
        let dim = 1usize << n_sites;
        let basis = |i: usize| {
            let mut v = DVector::zeros(dim);
            v[i] = Complex64::new(1.0, 0.0);
            v
        };
        let v = match self {
            Self::AllUp => basis(0),
            Self::Neel => {
                let index = (0..n_sites)
                    .filter(|j| j % 2 == 1)
                    .fold(0, |acc, j| acc | 1 << (n_sites - 1 - j));
                basis(index)
            }
            Self::AllPlusX => {
                DVector::from_element(dim, Complex64::new((dim as f64).sqrt().recip(), 0.0))
            }
            Self::Basis(i) => {
                if *i >= dim {
                    return Err(FloquetError::InvalidArgument(format!(
                        "basis index {i} out of range for {n_sites} sites"
                    )));
                }
                basis(*i)
            }
            Self::Amplitudes(a) => {
                if a.len() != dim {
                    return Err(FloquetError::InvalidArgument(format!(
                        "{} amplitudes given, expected {dim}",
                        a.len()
                    )));
                }
                let v = DVector::from_column_slice(a);
                let norm = v.norm();
                if norm == 0.0 || !norm.is_finite() {
                    return Err(FloquetError::InvalidArgument(
                        "initial amplitudes have zero norm".into(),
                    ));
                }
                v / Complex64::new(norm, 0.0)
            }
        };
        Ok(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sampling {
    /// Every full cycle `N T`.
    Stroboscopic,
    /// Every subcycle `T`.
    Subcycle,
    /// `k` uniform samples per subcycle.
    Dense(usize),
    /// Explicit sorted times within the run.
    Times(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    /// Midpoint exponential, second order.
    Midpoint,
    /// Two-exponential commutator-free Magnus scheme, fourth order.
    CommutatorFree4,
}

impl Integrator {
    pub fn order(self) -> usize {
        match self {
            Self::Midpoint => 2,
            Self::CommutatorFree4 => 4,
        }
    }
}

impl std::str::FromStr for Integrator {
    type Err = FloquetError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Self::Midpoint),
            "cf4" | "magnus4" => Ok(Self::CommutatorFree4),
            other => Err(FloquetError::Parse(format!(
                "unknown integrator '{other}' (expected midpoint or cf4)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stepping {
    /// Local error allowed per unit time (step doubling estimate).
    pub tolerance: f64,
    /// Largest step as a fraction of the subcycle duration.
    pub max_step_fraction: f64,
    /// Fixed step size; disables error control.
    pub fixed_step: Option<f64>,
    pub integrator: Integrator,
}

impl Default for Stepping {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_step_fraction: 0.125,
            fixed_step: None,
            integrator: Integrator::CommutatorFree4,
        }
    }
}

impl Stepping {
    /// Norm drift that aborts a run.
    pub fn norm_limit(&self) -> f64 {
        (10.0 * self.tolerance).max(1e-10)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub model: SpinModel,
    pub profile: PulseProfile,
    pub n_cycles: usize,
    pub initial_state: InitialState,
    pub sampling: Sampling,
    pub stepping: Stepping,
}

impl SimConfig {
    pub fn new(model: SpinModel, profile: PulseProfile, n_cycles: usize) -> Self {
        Self {
            model,
            profile,
            n_cycles,
            initial_state: InitialState::AllUp,
            sampling: Sampling::Stroboscopic,
            stepping: Stepping::default(),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.model.n_sites()
    }

    pub fn t_final(&self) -> f64 {
        self.n_cycles as f64 * self.profile.period()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        if n > MAX_SIM_SITES {
            return Err(FloquetError::DenseCapExceeded {
                n_sites: n,
                cap: MAX_SIM_SITES,
            });
        }
        self.profile.validate()?;
        if self.stepping.tolerance.is_nan() || self.stepping.tolerance <= 0.0 {
            return Err(FloquetError::InvalidArgument(
                "integrator tolerance must be positive".into(),
            ));
        }
        if let Some(h) = self.stepping.fixed_step {
            if h.is_nan() || h <= 0.0 {
                return Err(FloquetError::InvalidArgument(
                    "fixed step must be positive".into(),
                ));
            }
        }
        if let Sampling::Times(ts) = &self.sampling {
            let tf = self.t_final();
            if ts.windows(2).any(|w| w[1] < w[0]) {
                return Err(FloquetError::InvalidArgument(
                    "sample times must be sorted".into(),
                ));
            }
            if ts.iter().any(|&t| t < 0.0 || t > tf * (1.0 + 1e-12)) {
                return Err(FloquetError::InvalidArgument(format!(
                    "sample times must lie in [0, {tf}]"
                )));
            }
        }
        if let Sampling::Dense(0) = self.sampling {
            return Err(FloquetError::InvalidArgument(
                "dense sampling needs at least one point per subcycle".into(),
            ));
        }
        Ok(())
    }

    pub fn sample_times(&self) -> Vec<f64> {
        let period = self.profile.period();
        let t_sub = self.profile.subcycle_duration;
        let n_sub = self.profile.n_subcycles();
        match &self.sampling {
            Sampling::Stroboscopic => (0..=self.n_cycles).map(|m| m as f64 * period).collect(),
            Sampling::Subcycle => (0..=self.n_cycles * n_sub)
                .map(|k| k as f64 * t_sub)
                .collect(),
            Sampling::Dense(k) => (0..=self.n_cycles * n_sub * k)
                .map(|i| i as f64 * t_sub / *k as f64)
                .collect(),
            Sampling::Times(ts) => ts.clone(),
        }
    }

    /// Canonical text used for cache keys.
    pub fn fingerprint(&self) -> String {
        format!("floquet-sim-v1 {:?}", self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub n_sites: usize,
    /// Full drive cycle `N T`, used for dressed averages.
    pub period: f64,
    pub times: Vec<f64>,
    /// Lab-frame states `psi(t)`.
    pub states: Vec<DVector<Complex64>>,
    /// Gauge-frame states `phi(t) = exp(i K(t)) psi(t)`.
    pub gauge_states: Vec<DVector<Complex64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `<phi(t)| O |phi(t)>` at every sample (gauge frame).
    pub fn expectation(&self, observable: &SpinOperator) -> Result<Vec<f64>> {
        self.gauge_states
            .iter()
            .map(|s| Ok(observable.expectation(s.as_slice())?.re))
            .collect()
    }

    /// `<psi(t)| O |psi(t)>` at every sample (lab frame).
    pub fn lab_expectation(&self, observable: &SpinOperator) -> Result<Vec<f64>> {
        self.states
            .iter()
            .map(|s| Ok(observable.expectation(s.as_slice())?.re))
            .collect()
    }

    pub fn magnetization(&self, axis: Axis, site: usize) -> Result<Vec<f64>> {
        self.expectation(&SpinOperator::single(site, axis))
    }

    pub fn correlator(&self, axis: Axis, a: usize, b: usize) -> Result<Vec<f64>> {
        self.expectation(&SpinOperator::single(a, axis).product(&SpinOperator::single(b, axis)))
    }

    /// `1 - |<phi_ref|phi>|^2` per sample.
    pub fn infidelity(&self, reference: &Trajectory) -> Result<Vec<f64>> {
        check_grids(self, reference)?;
        Ok(self
            .gauge_states
            .iter()
            .zip(&reference.gauge_states)
            .map(|(a, b)| (1.0 - a.dotc(b).norm_sqr()).max(0.0))
            .collect())
    }

    /// CSV of time, per-site magnetizations along every axis, optional observables
    /// and optional infidelity against `reference`.
    pub fn write_csv<W: Write>(
        &self,
        mut w: W,
        extra: &[(String, SpinOperator)],
        reference: Option<&Trajectory>,
    ) -> Result<()> {
        let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
        for j in 0..self.n_sites {
            for axis in Axis::ALL {
                columns.push((
                    format!("s{}_{j}", axis.symbol().to_ascii_lowercase()),
                    self.magnetization(axis, j)?,
                ));
            }
        }
        for (name, op) in extra {
            columns.push((name.clone(), self.expectation(op)?));
        }
        if let Some(r) = reference {
            columns.push(("infidelity".into(), self.infidelity(r)?));
        }
        let mut header = String::from("time");
        for (name, _) in &columns {
            header.push(',');
            header.push_str(name);
        }
        writeln!(w, "{header}")?;
        for (i, t) in self.times.iter().enumerate() {
            let mut line = format!("{t:.16e}");
            for (_, col) in &columns {
                line.push_str(&format!(",{:.16e}", col[i]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

pub(crate) fn check_grids(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.len() != b.len() {
        return Err(FloquetError::GridMismatch(format!(
            "{} samples vs {}",
            a.len(),
            b.len()
        )));
    }
    for (i, (x, y)) in a.times.iter().zip(&b.times).enumerate() {
        if (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0) {
            return Err(FloquetError::GridMismatch(format!(
                "sample {i}: t = {x} vs {y}"
            )));
        }
    }
    if a.n_sites != b.n_sites {
        return Err(FloquetError::GridMismatch(format!(
            "{} sites vs {}",
            a.n_sites, b.n_sites
        )));
    }
    Ok(())
}

/// Event times (samples and drive breakpoints) covering `[0, t_final]`.
fn event_times(config: &SimConfig, samples: &[f64]) -> Vec<f64> {
    let period = config.profile.period();
    let cycle_points = config.profile.breakpoints();
    let mut events: Vec<f64> = samples.to_vec();
    for m in 0..config.n_cycles.max(1) {
        events.extend(cycle_points.iter().map(|b| b + m as f64 * period));
    }
    let tf = config.t_final();
    events.retain(|&t| t >= 0.0 && t <= tf * (1.0 + 1e-15) + 1e-300);
    events.push(0.0);
    events.sort_by(f64::total_cmp);
    let tol = 1e-12 * config.profile.subcycle_duration;
    events.dedup_by(|a, b| (*a - *b).abs() < tol);
    events
}

/// Solves `i d/dt psi = (H_0 + V(t)) psi` and records both frames at the sample times.
pub fn evolve_exact(config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    let n = config.n_sites();
    let h0 = build_hamiltonian(&config.model);
    let system = DrivenSystem::new(&h0, &config.profile, n)?;
    let samples = config.sample_times();
    let events = event_times(config, &samples);
    let mut psi: State = config.initial_state.vector(n)?;
    let mut times = Vec::with_capacity(samples.len());
    let mut states = Vec::with_capacity(samples.len());
    let mut gauge = Vec::with_capacity(samples.len());
    let mut next_sample = 0;
    let mut t = 0.0;
    let mut dt = config.profile.subcycle_duration / 64.0;
    let tol = 1e-12 * config.profile.subcycle_duration;
    let record = |t: f64,
                  psi: &State,
                  times: &mut Vec<f64>,
                  states: &mut Vec<State>,
                  gauge: &mut Vec<State>| {
        times.push(t);
        states.push(psi.clone());
        gauge.push(system.kick_exp(t, 1.0) * psi);
    };
    for &e in &events {
        if e > t {
            dt = system.propagate_segment(&mut psi, t, e, dt, &config.stepping)?;
            t = e;
        }
        while next_sample < samples.len() && (samples[next_sample] - t).abs() <= tol {
            record(
                samples[next_sample],
                &psi,
                &mut times,
                &mut states,
                &mut gauge,
            );
            next_sample += 1;
        }
    }
    Ok(Trajectory {
        n_sites: n,
        period: config.profile.period(),
        times,
        states,
        gauge_states: gauge,
    })
}

/// Propagates `psi` under the exact drive from `t0` to `t1`; `t1 < t0` runs backward.
pub fn propagate_exact(
    config: &SimConfig,
    psi: &DVector<Complex64>,
    t0: f64,
    t1: f64,
) -> Result<DVector<Complex64>> {
    config.validate()?;
    let n = config.n_sites();
    let h0 = build_hamiltonian(&config.model);
    let system = DrivenSystem::new(&h0, &config.profile, n)?;
    let period = config.profile.period();
    let (lo, hi) = (t0.min(t1), t0.max(t1));
    let first = (lo / period).floor() as i64;
    let last = (hi / period).ceil() as i64;
    let mut events = vec![t0, t1];
    let cycle_points = config.profile.breakpoints();
    for m in first..=last {
        events.extend(cycle_points.iter().map(|b| b + m as f64 * period));
    }
    events.retain(|&t| t >= lo && t <= hi);
    events.sort_by(f64::total_cmp);
    events.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * config.profile.subcycle_duration);
    if t1 < t0 {
        events.reverse();
    }
    let mut state = psi.clone();
    let mut dt = config.profile.subcycle_duration / 64.0;
    for w in events.windows(2) {
        dt = system.propagate_segment(&mut state, w[0], w[1], dt, &config.stepping)?;
    }
    Ok(state)
}

/// Evolution under a static effective Hamiltonian, exact via one eigendecomposition.
/// The lab-frame states are reconstructed as `exp(-i K(t)) phi(t)`.
pub fn evolve_effective(h_eff: &SpinOperator, config: &SimConfig) -> Result<Trajectory> {
    config.validate()?;
    if !h_eff.is_hermitian() {
        return Err(FloquetError::NotHermitian);
    }
    let n = config.n_sites();
    let dense = h_eff.to_dense(n)?;
    let spectral = Spectral::new(&dense);
    let phi0 = config.initial_state.vector(n)?;
    let system = DrivenSystem::new(&SpinOperator::zero(), &config.profile, n)?;
    let samples = config.sample_times();
    let mut states = Vec::with_capacity(samples.len());
    let mut gauge = Vec::with_capacity(samples.len());
    for &t in &samples {
        let phi = spectral.exp_i(-t) * &phi0;
        states.push(system.kick_exp(t, -1.0) * &phi);
        gauge.push(phi);
    }
    Ok(Trajectory {
        n_sites: n,
        period: config.profile.period(),
        times: samples,
        states,
        gauge_states: gauge,
    })
}

/// One-cycle propagator `U(NT, 0)` as a dense matrix.
pub fn floquet_operator(config: &SimConfig) -> Result<nalgebra::DMatrix<Complex64>> {
    let n = config.n_sites();
    let dim = 1usize << n;
    let period = config.profile.period();
    let mut u = nalgebra::DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let mut e = DVector::zeros(dim);
        e[i] = Complex64::new(1.0, 0.0);
        let col = propagate_exact(config, &e, 0.0, period)?;
        u.set_column(i, &col);
    }
    Ok(u)
}

/// `exp(-i H t)` applied to `psi` for a static operator.
pub fn evolve_static(
    h: &SpinOperator,
    n_sites: usize,
    psi: &DVector<Complex64>,
    t: f64,
) -> Result<DVector<Complex64>> {
    Ok(hermitian_exp(&h.to_dense(n_sites)?, t) * psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::dipolar_couplings;
    use crate::pulses::PulseShape;

    #[test]
    fn initial_states() {
        let neel = InitialState::Neel.vector(3).unwrap();
        assert_eq!(neel[0b010].re, 1.0);
        let plus = InitialState::AllPlusX.vector(2).unwrap();
        let x0 = SpinOperator::single(0, Axis::X)
            .expectation(plus.as_slice())
            .unwrap();
        assert!((x0.re - 1.0).abs() < 1e-15);
        assert!(InitialState::Basis(8).vector(3).is_err());
        assert!(InitialState::Amplitudes(vec![Complex64::new(0.0, 0.0); 2])
            .vector(1)
            .is_err());
    }

    #[test]
    fn undriven_ising_conserves_sz() {
        let model = SpinModel::ising(dipolar_couplings(3).unwrap(), 1.3);
        let mut cfg = SimConfig::new(model, PulseProfile::undriven(0.5).unwrap(), 10);
        cfg.initial_state = InitialState::Neel;
        let traj = evolve_exact(&cfg).unwrap();
        for j in 0..3 {
            let m = traj.magnetization(Axis::Z, j).unwrap();
            assert!(m.iter().all(|x| (x - m[0]).abs() < 1e-12));
        }
    }

    #[test]
    fn stroboscopic_frames_coincide() {
        let model = SpinModel::xxz(dipolar_couplings(2).unwrap(), 1.0, -0.5);
        let profile = PulseProfile::global_xy(PulseShape::Cosine, 0.4, 0.05).unwrap();
        let mut cfg = SimConfig::new(model, profile, 4);
        cfg.initial_state = InitialState::Basis(1);
        let traj = evolve_exact(&cfg).unwrap();
        for (a, b) in traj.states.iter().zip(&traj.gauge_states) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn sample_grids() {
        let model = SpinModel::xy(dipolar_couplings(2).unwrap(), 1.0);
        let profile = PulseProfile::global_xy(PulseShape::Square, 0.4, 0.5).unwrap();
        let mut cfg = SimConfig::new(model, profile, 2);
        assert_eq!(cfg.sample_times(), vec![0.0, 1.0, 2.0]);
        cfg.sampling = Sampling::Dense(2);
        assert_eq!(cfg.sample_times().len(), 9);
    }
}
