//! The scalar `U(v) = 1/16 sum_p (-1)^p (4v)^{2p} / (2p)! overline{G^{2p}}` and its closed forms.

use serde::Serialize;

use crate::pulses::{AveragingConvention, MomentTable, PulseShape};
use crate::special::{bessel_j0, bessel_j1, sinc, sinc_derivative};

/// Partial sum of the `U` series together with truncation diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub p_max: usize,
    /// Magnitude of the first omitted term (bounded by `sup|G|` past the table).
    pub first_dropped: f64,
    /// Set when the omitted term is not small against the partial sum, or a term overflowed.
    pub tail_dominated: bool,
}

/// Signed series coefficient `(-1)^p (4v)^{2p} / (2p)!` for `p = 1..=p_max`, built by ratio.
fn coefficients(v: f64, p_max: usize) -> impl Iterator<Item = (usize, f64)> {
    let x2 = 16.0 * v * v;
    (1..=p_max).scan(1.0, move |c, p| {
        *c *= -x2 / ((2 * p - 1) * 2 * p) as f64;
        Some((p, *c))
    })
}

/// `U` truncated at `p_max` (capped at the table size).
pub fn u_series(v: f64, moments: &MomentTable, p_max: usize) -> SeriesValue {
    let p_max = p_max.min(moments.p_max()).max(1);
    if v == 0.0 {
        return SeriesValue {
            value: 0.0,
            p_max,
            first_dropped: 0.0,
            tail_dominated: false,
        };
    }
    let mut sum = 0.0;
    let mut last = 0.0;
    for (p, c) in coefficients(v, p_max + 1) {
        let term = c * moments.moment_or_bound(p) / 16.0;
        if p <= p_max {
            sum += term;
        } else {
            last = term.abs();
        }
    }
    let finite = sum.is_finite() && last.is_finite();
    SeriesValue {
        value: sum,
        p_max,
        first_dropped: last,
        tail_dominated: !finite || last > sum.abs(),
    }
}

/// `dU/dv` of the truncated series.
pub fn u_series_derivative(v: f64, moments: &MomentTable, p_max: usize) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let p_max = p_max.min(moments.p_max());
    coefficients(v, p_max)
        .map(|(p, c)| c * moments.moment(p) * (2 * p) as f64 / v / 16.0)
        .sum()
}

/// Cosine pulse over a two-subcycle cycle, full-cycle average: `(J0(4v) - 1) / 32`.
pub fn u_cosine_closed(v: f64) -> f64 {
    (bessel_j0(4.0 * v) - 1.0) / 32.0
}

pub fn u_cosine_closed_derivative(v: f64) -> f64 {
    -bessel_j1(4.0 * v) / 8.0
}

/// Square pulse, subcycle average: `(sin(2 pi v)/(2 pi v) - 1) / 16`.
pub fn u_square_closed(v: f64) -> f64 {
    (sinc(std::f64::consts::TAU * v) - 1.0) / 16.0
}

pub fn u_square_closed_derivative(v: f64) -> f64 {
    std::f64::consts::TAU * sinc_derivative(std::f64::consts::TAU * v) / 16.0
}

/// Closed-form `U` for a built-in shape under any convention, with `v` already
/// including amplitude and drive weight. `None` for shapes without a closed form.
pub fn u_closed(
    shape: &PulseShape,
    v: f64,
    convention: AveragingConvention,
    n_subcycles: usize,
) -> Option<f64> {
    let per_subcycle = match shape {
        PulseShape::Cosine => (bessel_j0(4.0 * v) - 1.0) / 16.0,
        PulseShape::Square => u_square_closed(v),
        PulseShape::Zero => 0.0,
        PulseShape::Tabulated(_) => return None,
    };
    Some(per_subcycle * convention.window_fraction(n_subcycles))
}
