//! Frame comparison, dressed observables, frequency fits and scaling sweeps.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    check_grids, evolve_effective, evolve_exact, floquet_operator, InitialState, Sampling,
    SimConfig, Stepping, Trajectory,
};
use crate::error::{FloquetError, Result};
use crate::models::SpinModel;
use crate::pauli::{Axis, SpinOperator};
use crate::pulses::{PulseProfile, PulseShape};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub times: Vec<f64>,
    /// `1 - |<phi_exact|phi_eff>|^2` per sample.
    pub infidelity: Vec<f64>,
    /// Largest gauge-frame observable deviation per sample.
    pub observable_deviation: Vec<f64>,
    /// Largest deviation of whole-cycle averages, one entry per cycle.
    pub dressed_deviation: Vec<f64>,
    pub max_infidelity: f64,
    pub mean_infidelity: f64,
    pub max_observable_deviation: f64,
    pub mean_observable_deviation: f64,
    pub max_dressed_deviation: f64,
    pub mean_dressed_deviation: f64,
}

fn max_mean(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let max = xs.iter().copied().fold(0.0, f64::max);
    (max, xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Compares the two runs using every single-site Pauli expectation as observables.
pub fn compare_frames(exact: &Trajectory, effective: &Trajectory) -> Result<ErrorReport> {
    let observables: Vec<SpinOperator> = (0..exact.n_sites)
        .flat_map(|j| {
            Axis::ALL
                .into_iter()
                .map(move |a| SpinOperator::single(j, a))
        })
        .collect();
    compare_frames_with(exact, effective, &observables)
}

pub fn compare_frames_with(
    exact: &Trajectory,
    effective: &Trajectory,
    observables: &[SpinOperator],
) -> Result<ErrorReport> {
    check_grids(exact, effective)?;
    let infidelity = exact.infidelity(effective)?;
    let mut observable_deviation = vec![0.0f64; exact.len()];
    let mut dressed_deviation: Vec<f64> = Vec::new();
    for op in observables {
        let a = dressed_observable(exact, op)?;
        let b = dressed_observable(effective, op)?;
        for (d, (x, y)) in observable_deviation
            .iter_mut()
            .zip(a.values.iter().zip(&b.values))
        {
            *d = d.max((x - y).abs());
        }
        if dressed_deviation.is_empty() {
            dressed_deviation = vec![0.0f64; a.cycle_averages.len()];
        }
        for (d, (x, y)) in dressed_deviation
            .iter_mut()
            .zip(a.cycle_averages.iter().zip(&b.cycle_averages))
        {
            *d = d.max((x - y).abs());
        }
    }
    let (max_infidelity, mean_infidelity) = max_mean(&infidelity);
    let (max_observable_deviation, mean_observable_deviation) = max_mean(&observable_deviation);
    let (max_dressed_deviation, mean_dressed_deviation) = max_mean(&dressed_deviation);
    Ok(ErrorReport {
        times: exact.times.clone(),
        infidelity,
        observable_deviation,
        dressed_deviation,
        max_infidelity,
        mean_infidelity,
        max_observable_deviation,
        mean_observable_deviation,
        max_dressed_deviation,
        mean_dressed_deviation,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DressedSeries {
    pub times: Vec<f64>,
    /// `<phi(t)|O|phi(t)>` in the gauge frame.
    pub values: Vec<f64>,
    /// End time of each complete cycle.
    pub cycle_ends: Vec<f64>,
    /// Mean of the samples in `[m NT, (m+1) NT)` for every complete cycle `m`.
    pub cycle_averages: Vec<f64>,
}

pub fn dressed_observable(traj: &Trajectory, observable: &SpinOperator) -> Result<DressedSeries> {
    if !observable.is_hermitian() {
        return Err(FloquetError::NotHermitian);
    }
    let values = traj.expectation(observable)?;
    let period = traj.period;
    let tol = 1e-9 * period;
    let t_last = traj.times.last().copied().unwrap_or(0.0);
    let n_cycles = ((t_last + tol) / period).floor() as usize;
    let mut cycle_ends = Vec::with_capacity(n_cycles);
    let mut cycle_averages = Vec::with_capacity(n_cycles);
    for m in 0..n_cycles {
        let lo = m as f64 * period - tol;
        let hi = (m + 1) as f64 * period - tol;
        let window: Vec<f64> = traj
            .times
            .iter()
            .zip(&values)
            .filter(|(t, _)| **t >= lo && **t < hi)
            .map(|(_, v)| *v)
            .collect();
        if window.is_empty() {
            continue;
        }
        cycle_ends.push((m + 1) as f64 * period);
        cycle_averages.push(window.iter().sum::<f64>() / window.len() as f64);
    }
    Ok(DressedSeries {
        times: traj.times.clone(),
        values,
        cycle_ends,
        cycle_averages,
    })
}

/// Angular frequency of `c + a cos(Omega t + phase)` sampled with spacing `dt`.
///
/// Uses the linear recurrence of first differences, so the constant offset drops
/// out. Requires `Omega dt < pi`. Returns `(Omega, rms residual)`.
pub fn fit_oscillation_frequency(values: &[f64], dt: f64) -> Result<(f64, f64)> {
    if values.len() < 4 {
        return Err(FloquetError::InvalidArgument(
            "frequency fit needs at least four samples".into(),
        ));
    }
    let y: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for m in 1..y.len() - 1 {
        num += y[m] * (y[m + 1] + y[m - 1]);
        den += 2.0 * y[m] * y[m];
    }
    if den == 0.0 {
        return Err(FloquetError::InvalidArgument(
            "signal has no oscillation to fit".into(),
        ));
    }
    let c = (num / den).clamp(-1.0, 1.0);
    let omega = c.acos() / dt;
    let mut res = 0.0;
    for m in 1..y.len() - 1 {
        res += (y[m + 1] + y[m - 1] - 2.0 * c * y[m]).powi(2);
    }
    Ok((omega, (res / (y.len() - 2) as f64).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XyFit {
    /// Effective flip-flop coupling.
    pub j_eff: f64,
    pub omega: f64,
    pub residual: f64,
}

/// Effective XY coupling of a two-site run started in `|up down>`: the
/// population `<sigma^3_0>` oscillates as `cos(4 J t)` within the flip-flop
/// sector. Samples must be uniformly spaced.
pub fn fit_xy_coupling(traj: &Trajectory) -> Result<XyFit> {
    if traj.n_sites != 2 {
        return Err(FloquetError::InvalidArgument(
            "XY coupling fit needs a two-site trajectory".into(),
        ));
    }
    if traj.len() < 4 {
        return Err(FloquetError::InvalidArgument(
            "XY coupling fit needs at least four samples".into(),
        ));
    }
    let dt = traj.times[1] - traj.times[0];
    if traj
        .times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt)
    {
        return Err(FloquetError::InvalidArgument(
            "XY coupling fit needs uniform sampling".into(),
        ));
    }
    let z0 = traj.magnetization(Axis::Z, 0)?;
    let (omega, residual) = fit_oscillation_frequency(&z0, dt)?;
    Ok(XyFit {
        j_eff: omega / 4.0,
        omega,
        residual,
    })
}

/// Floquet quasienergies `epsilon` with `U(NT) = exp(-i epsilon NT)`, sorted,
/// in `(-pi/NT, pi/NT]`.
pub fn floquet_quasienergies(config: &SimConfig) -> Result<Vec<f64>> {
    let u: DMatrix<Complex64> = floquet_operator(config)?;
    let period = config.profile.period();
    let schur = nalgebra::Schur::new(u);
    let (_, t) = schur.unpack();
    let mut eps: Vec<f64> = t.diagonal().iter().map(|z| -z.arg() / period).collect();
    eps.sort_by(f64::total_cmp);
    Ok(eps)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSetup {
    pub model: SpinModel,
    pub shape: PulseShape,
    /// Pulse strength `v`.
    pub strength: f64,
    /// Static operator the gauge-frame dynamics is compared against.
    pub h_eff: SpinOperator,
    pub omegas: Vec<f64>,
    /// Physical run time; rounded to whole cycles at each frequency.
    pub t_final: f64,
    pub initial_state: InitialState,
    /// Observable for the dressed comparison.
    pub observable: SpinOperator,
    pub samples_per_subcycle: usize,
    pub stepping: Stepping,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub omega: f64,
    pub n_cycles: usize,
    /// Gauge-frame infidelity at the final time.
    pub infidelity: f64,
    /// Largest deviation of whole-cycle averages of the observable.
    pub dressed_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    pub infidelity_slope: f64,
    pub sqrt_infidelity_slope: f64,
    pub dressed_slope: f64,
}

/// Runs exact and effective evolution at every frequency concurrently.
pub fn frequency_scaling(setup: &ScalingSetup) -> Result<ScalingReport> {
    let points: Result<Vec<ScalingPoint>> = setup
        .omegas
        .par_iter()
        .map(|&omega| {
            let subcycle = 2.0 * std::f64::consts::PI / omega;
            let profile = PulseProfile::global_xy(setup.shape.clone(), setup.strength, subcycle)?;
            let n_cycles = (setup.t_final / profile.period()).round().max(1.0) as usize;
            let config = SimConfig {
                model: setup.model.clone(),
                profile,
                n_cycles,
                initial_state: setup.initial_state.clone(),
                sampling: Sampling::Dense(setup.samples_per_subcycle.max(1)),
                stepping: setup.stepping,
            };
            let exact = evolve_exact(&config)?;
            let effective = evolve_effective(&setup.h_eff, &config)?;
            let report =
                compare_frames_with(&exact, &effective, std::slice::from_ref(&setup.observable))?;
            Ok(ScalingPoint {
                omega,
                n_cycles,
                infidelity: report.infidelity.last().copied().unwrap_or(0.0),
                dressed_error: report.max_dressed_deviation,
            })
        })
        .collect();
    let points = points?;
    let omegas: Vec<f64> = points.iter().map(|p| p.omega).collect();
    let inf: Vec<f64> = points.iter().map(|p| p.infidelity).collect();
    let root: Vec<f64> = inf.iter().map(|x| x.sqrt()).collect();
    let dressed: Vec<f64> = points.iter().map(|p| p.dressed_error).collect();
    Ok(ScalingReport {
        infidelity_slope: log_log_slope(&omegas, &inf),
        sqrt_infidelity_slope: log_log_slope(&omegas, &root),
        dressed_slope: log_log_slope(&omegas, &dressed),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_fit_recovers_cosine() {
        let dt = 0.1;
        let xs: Vec<f64> = (0..200)
            .map(|m| 0.3 + 0.7 * (1.7 * m as f64 * dt + 0.4).cos())
            .collect();
        let (omega, res) = fit_oscillation_frequency(&xs, dt).unwrap();
        assert!((omega - 1.7).abs() < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((log_log_slope(&xs, &ys) + 1.5).abs() < 1e-12);
    }
}
