//! Dense propagators for `H(t) = H_0 + c(t) S_k + sum_w f_w(t) W_w`.
//!
//! Within subcycle `k` the strong drive is always proportional to the fixed
//! generator `S_k`, so the state is integrated in the rotating frame
//! `chi = exp(i theta(t) S_k) psi` with `theta = int c`. There
//! `i d/dt chi = exp(i theta S_k) (H_0 + sum_w f_w W_w) exp(-i theta S_k) chi`,
//! an exact rewrite whose generator has the norm of `H_0` rather than of the
//! strong drive. Everything is stored in the eigenbasis of `S_k`, where the frame
//! rotation is diagonal.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Integrator, Stepping};
use crate::error::{FloquetError, Result};
use crate::pauli::SpinOperator;
use crate::pulses::PulseProfile;

pub(crate) type State = DVector<Complex64>;

/// `exp(-i h dt)` for Hermitian `h`.
pub(crate) fn hermitian_exp(h: &DMatrix<Complex64>, dt: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    phase_exp(&eig.eigenvectors, &eig.eigenvalues, -dt)
}

/// `V diag(exp(i theta lambda)) V^dagger`.
pub(crate) fn phase_exp(
    vecs: &DMatrix<Complex64>,
    vals: &DVector<f64>,
    theta: f64,
) -> DMatrix<Complex64> {
    let mut scaled = vecs.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= Complex64::from_polar(1.0, theta * vals[j]);
    }
    scaled * vecs.adjoint()
}

pub(crate) struct Spectral {
    vecs: DMatrix<Complex64>,
    vals: DVector<f64>,
}

impl Spectral {
    pub(crate) fn new(m: &DMatrix<Complex64>) -> Self {
        let eig = m.clone().symmetric_eigen();
        Self {
            vecs: eig.eigenvectors,
            vals: eig.eigenvalues,
        }
    }

    /// `exp(i theta M)`.
    pub(crate) fn exp_i(&self, theta: f64) -> DMatrix<Complex64> {
        phase_exp(&self.vecs, &self.vals, theta)
    }
}

/// One subcycle's generator spectrum and the static parts expressed in its eigenbasis.
struct SubcycleFrame {
    spectrum: Spectral,
    h0: DMatrix<Complex64>,
    weak: Vec<DMatrix<Complex64>>,
}

impl SubcycleFrame {
    /// Diagonal of `exp(i theta S)` in the eigenbasis.
    fn phases(&self, theta: f64) -> Vec<Complex64> {
        self.spectrum
            .vals
            .iter()
            .map(|l| Complex64::from_polar(1.0, theta * l))
            .collect()
    }
}

pub(crate) struct DrivenSystem<'a> {
    profile: &'a PulseProfile,
    frames: Vec<SubcycleFrame>,
}

impl<'a> DrivenSystem<'a> {
    pub(crate) fn new(
        h0: &SpinOperator,
        profile: &'a PulseProfile,
        n_sites: usize,
    ) -> Result<Self> {
        let h0 = h0.to_dense(n_sites)?;
        let weak = profile
            .weak_drives
            .iter()
            .map(|w| w.operator(n_sites)?.to_dense(n_sites))
            .collect::<Result<Vec<_>>>()?;
        let frames = profile
            .schedule
            .iter()
            .map(|s| {
                let spectrum = Spectral::new(&s.generator(n_sites)?.to_dense(n_sites)?);
                let to_eigen =
                    |m: &DMatrix<Complex64>| spectrum.vecs.adjoint() * m * &spectrum.vecs;
                Ok(SubcycleFrame {
                    h0: to_eigen(&h0),
                    weak: weak.iter().map(to_eigen).collect(),
                    spectrum,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { profile, frames })
    }

    /// `exp(i sign K(t))`.
    pub(crate) fn kick_exp(&self, t: f64, sign: f64) -> DMatrix<Complex64> {
        let (k, c) = self.profile.kick_coefficient(t);
        self.frames[k].spectrum.exp_i(sign * c)
    }

    /// Subcycle index and start time of the subcycle containing `t_mid`.
    fn subcycle_at(&self, t_mid: f64) -> (usize, f64) {
        let period = self.profile.period();
        let cycle_start = (t_mid / period).floor() * period;
        let (k, _) = self.profile.kick_coefficient(t_mid);
        (k, cycle_start + k as f64 * self.profile.subcycle_duration)
    }

    /// Kick angle `theta(t)` inside the subcycle that starts at `start`.
    fn theta(&self, start: f64, t: f64) -> f64 {
        let tau = ((t - start) / self.profile.subcycle_duration).clamp(0.0, 1.0);
        self.profile.effective_strength() * self.profile.shape.big_g(tau)
    }

    /// Rotating-frame generator at `t`, in the eigenbasis of `S_k`.
    fn frame_hamiltonian(&self, k: usize, start: f64, t: f64) -> DMatrix<Complex64> {
        let frame = &self.frames[k];
        let mut h = frame.h0.clone();
        let omega = self.profile.omega();
        for (w, m) in self.profile.weak_drives.iter().zip(&frame.weak) {
            h += m * Complex64::new(w.value(omega, t), 0.0);
        }
        let d = frame.phases(self.theta(start, t));
        for b in 0..h.ncols() {
            for a in 0..h.nrows() {
                h[(a, b)] *= d[a] * d[b].conj();
            }
        }
        h
    }

    fn step(
        &self,
        k: usize,
        start: f64,
        chi: &State,
        t: f64,
        dt: f64,
        integrator: Integrator,
    ) -> State {
        match integrator {
            Integrator::Midpoint => {
                hermitian_exp(&self.frame_hamiltonian(k, start, t + 0.5 * dt), dt) * chi
            }
            Integrator::CommutatorFree4 => {
                let r = 3f64.sqrt() / 6.0;
                let (big, small) = (0.25 + r, 0.25 - r);
                let h1 = self.frame_hamiltonian(k, start, t + (0.5 - r) * dt);
                let h2 = self.frame_hamiltonian(k, start, t + (0.5 + r) * dt);
                let first = hermitian_exp(
                    &(&h1 * Complex64::new(big, 0.0) + &h2 * Complex64::new(small, 0.0)),
                    dt,
                );
                let second = hermitian_exp(
                    &(&h1 * Complex64::new(small, 0.0) + &h2 * Complex64::new(big, 0.0)),
                    dt,
                );
                second * (first * chi)
            }
        }
    }

    /// Propagates `psi` from `t0` to `t1` (either direction) inside one subcycle,
    /// without crossing a breakpoint. Returns the step size to reuse.
    pub(crate) fn propagate_segment(
        &self,
        psi: &mut State,
        t0: f64,
        t1: f64,
        dt_hint: f64,
        stepping: &Stepping,
    ) -> Result<f64> {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(dt_hint);
        }
        let (k, start) = self.subcycle_at(0.5 * (t0 + t1));
        let frame = &self.frames[k];
        let mut chi = frame.spectrum.vecs.adjoint() * &*psi;
        for (c, p) in chi.iter_mut().zip(frame.phases(self.theta(start, t0))) {
            *c *= p;
        }
        let dir = span.signum();
        let period = self.profile.subcycle_duration;
        let max_step = stepping.max_step_fraction * period;
        let mut h_out = dt_hint;
        if let Some(h) = stepping.fixed_step {
            let n = (span.abs() / h).ceil().max(1.0) as usize;
            let dt = span / n as f64;
            for i in 0..n {
                chi = self.step(k, start, &chi, t0 + i as f64 * dt, dt, stepping.integrator);
            }
        } else {
            let order = stepping.integrator.order() as f64;
            let min_step = 1e-14 * period.max(span.abs());
            let mut t = t0;
            let mut h = dt_hint.abs().min(max_step).max(min_step);
            loop {
                let remaining = (t1 - t) * dir;
                if remaining <= 1e-15 * period {
                    break;
                }
                let hs = h.min(remaining);
                let dt = dir * hs;
                let coarse = self.step(k, start, &chi, t, dt, stepping.integrator);
                let half = self.step(k, start, &chi, t, 0.5 * dt, stepping.integrator);
                let fine = self.step(k, start, &half, t + 0.5 * dt, 0.5 * dt, stepping.integrator);
                let err = (&coarse - &fine).norm();
                if !err.is_finite() {
                    return Err(FloquetError::StepUnderflow { t });
                }
                // Floor at round-off level so short steps near a segment end are accepted.
                let allowed = (stepping.tolerance * hs).max(1e-14);
                let accepted = err <= allowed;
                if accepted {
                    chi = fine;
                    t += dt;
                    let norm_drift = (chi.norm() - 1.0).abs();
                    if norm_drift > stepping.norm_limit() {
                        return Err(FloquetError::NormDrift {
                            drift: norm_drift,
                            limit: stepping.norm_limit(),
                            t,
                        });
                    }
                }
                let factor = if err == 0.0 {
                    4.0
                } else {
                    (0.9 * (allowed / err).powf(1.0 / order)).clamp(0.2, 4.0)
                };
                // Keep the grown step when the clamp at a segment end made the trial short.
                h = if hs < h && accepted {
                    h
                } else {
                    (hs * factor).min(max_step)
                };
                if h < min_step {
                    return Err(FloquetError::StepUnderflow { t });
                }
            }
            h_out = h;
        }
        for (c, p) in chi.iter_mut().zip(frame.phases(self.theta(start, t1))) {
            *c *= p.conj();
        }
        *psi = &frame.spectrum.vecs * chi;
        Ok(h_out)
    }
}
