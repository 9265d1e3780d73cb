//! Subcycle pulse shapes on the normalized time `tau = t / T` in `[0, 1]`.
//!
//! `g(tau)` is the shape and `G(tau) = 2 pi * int_0^tau g` is its integral in
//! units where `omega = 2 pi / T`, reset to zero at every subcycle start.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::Path;
use std::str::FromStr;

use crate::error::{FloquetError, Result};
use crate::quadrature::{integrate, QuadratureOptions};

/// Interpolation used between tabulated samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Interpolation {
    #[default]
    PeriodicCubic,
    Linear,
}

impl FromStr for Interpolation {
    type Err = FloquetError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cubic" | "periodic_cubic" => Ok(Self::PeriodicCubic),
            "linear" => Ok(Self::Linear),
            other => Err(FloquetError::Parse(format!(
                "unknown interpolation '{other}'"
            ))),
        }
    }
}

/// Uniformly sampled `g` over one subcycle, interpolated periodically.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedShape {
    samples: Vec<f64>,
    interpolation: Interpolation,
    // Second derivatives of the periodic spline (zero for linear).
    curvature: Vec<f64>,
    // Running integral of the interpolant at each knot, length n + 1.
    cumulative: Vec<f64>,
}

impl TabulatedShape {
    pub fn new(samples: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if samples.len() < 3 {
            return Err(FloquetError::InvalidArgument(format!(
                "tabulated shape needs at least 3 samples, got {}",
                samples.len()
            )));
        }
        if let Some(bad) = samples.iter().position(|v| !v.is_finite()) {
            return Err(FloquetError::InvalidArgument(format!(
                "sample {bad} is not finite"
            )));
        }
        let n = samples.len();
        let h = 1.0 / n as f64;
        let curvature = match interpolation {
            Interpolation::Linear => vec![0.0; n],
            Interpolation::PeriodicCubic => {
                let rhs: Vec<f64> = (0..n)
                    .map(|k| {
                        let prev = samples[(k + n - 1) % n];
                        let next = samples[(k + 1) % n];
                        6.0 * (next - 2.0 * samples[k] + prev) / (h * h)
                    })
                    .collect();
                solve_cyclic_tridiagonal(1.0, 4.0, 1.0, &rhs)
            }
        };
        let mut shape = Self {
            samples,
            interpolation,
            curvature,
            cumulative: Vec::new(),
        };
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        for k in 0..n {
            let last = cumulative[k];
            cumulative.push(last + shape.partial_integral(k, h));
        }
        shape.cumulative = cumulative;
        Ok(shape)
    }

    /// Samples `f` at `n` uniform points of `[0, 1)`.
    pub fn from_fn(n: usize, interpolation: Interpolation, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            (0..n).map(|k| f(k as f64 / n as f64)).collect(),
            interpolation,
        )
    }

    /// Reads a two-column `(time fraction, value)` text file on a uniform grid.
    pub fn load(path: &Path, interpolation: Interpolation) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, interpolation)
    }

    pub fn parse(text: &str, interpolation: Interpolation) -> Result<Self> {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(FloquetError::Parse(format!(
                    "line {}: expected 2 columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| FloquetError::Parse(format!("line {}: {e}", lineno + 1)))
            };
            times.push(parse(cols[0])?);
            values.push(parse(cols[1])?);
        }
        let n = times.len();
        if n == 0 {
            return Err(FloquetError::Parse("no samples in tabulated shape".into()));
        }
        for (k, &t) in times.iter().enumerate() {
            let expected = k as f64 / n as f64;
            if (t - expected).abs() > 1e-9 {
                return Err(FloquetError::Parse(format!(
                    "sample {k} at time fraction {t} is off the uniform grid (expected {expected})"
                )));
            }
        }
        Self::new(values, interpolation)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn spacing(&self) -> f64 {
        1.0 / self.samples.len() as f64
    }

    fn locate(&self, tau: f64) -> (usize, f64) {
        let n = self.samples.len();
        let h = self.spacing();
        let k = ((tau / h).floor() as isize).clamp(0, n as isize - 1) as usize;
        (k, tau - k as f64 * h)
    }

    fn value(&self, tau: f64) -> f64 {
        let n = self.samples.len();
        let h = self.spacing();
        let (k, a) = self.locate(tau.rem_euclid(1.0));
        let b = h - a;
        let (y0, y1) = (self.samples[k], self.samples[(k + 1) % n]);
        let (m0, m1) = (self.curvature[k], self.curvature[(k + 1) % n]);
        m0 * b * b * b / (6.0 * h)
            + m1 * a * a * a / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * b
            + (y1 / h - m1 * h / 6.0) * a
    }

    // Integral of the interpolant over [knot k, knot k + a].
    fn partial_integral(&self, k: usize, a: f64) -> f64 {
        let n = self.samples.len();
        let h = self.spacing();
        let b = h - a;
        let (y0, y1) = (self.samples[k], self.samples[(k + 1) % n]);
        let (m0, m1) = (self.curvature[k], self.curvature[(k + 1) % n]);
        m0 * (h.powi(4) - b.powi(4)) / (24.0 * h)
            + m1 * a.powi(4) / (24.0 * h)
            + (y0 / h - m0 * h / 6.0) * (h * h - b * b) / 2.0
            + (y1 / h - m1 * h / 6.0) * a * a / 2.0
    }

    fn integral(&self, tau: f64) -> f64 {
        if tau >= 1.0 {
            return self.cumulative[self.samples.len()];
        }
        let (k, a) = self.locate(tau);
        self.cumulative[k] + self.partial_integral(k, a)
    }
}

/// Solves the periodic system `lower x[k-1] + diag x[k] + upper x[k+1] = rhs[k]`
/// (Sherman-Morrison on top of the Thomas algorithm).
fn solve_cyclic_tridiagonal(lower: f64, diag: f64, upper: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let gamma = -diag;
    let mut b = vec![diag; n];
    b[0] = diag - gamma;
    b[n - 1] = diag - lower * upper / gamma;
    let thomas = |d: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        c[0] = upper / b[0];
        x[0] = d[0] / b[0];
        for i in 1..n {
            let m = b[i] - lower * c[i - 1];
            c[i] = upper / m;
            x[i] = (d[i] - lower * x[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    };
    let x = thomas(rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = upper;
    let z = thomas(&u);
    let factor = (x[0] + lower * x[n - 1] / gamma) / (1.0 + z[0] + lower * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - factor * zi).collect()
}

/// Shape of the strong drive within one subcycle.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum PulseShape {
    /// `g = cos(2 pi tau)`, `G = sin(2 pi tau)`.
    Cosine,
    /// `+1, -1, +1` on quarters `[0, 1/4), [1/4, 3/4), [3/4, 1)`; `G` is a triangle wave of peak `pi/2`.
    Square,
    Tabulated(TabulatedShape),
    #[default]
    Zero,
}

impl PulseShape {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Cosine => "cosine",
            Self::Square => "square",
            Self::Tabulated(_) => "tabulated",
            Self::Zero => "zero",
        }
    }

    pub fn g(&self, tau: f64) -> f64 {
        match self {
            Self::Cosine => (TAU * tau).cos(),
            Self::Square => {
                let x = tau.rem_euclid(1.0);
                if (0.25..0.75).contains(&x) {
                    -1.0
                } else {
                    1.0
                }
            }
            Self::Tabulated(t) => t.value(tau),
            Self::Zero => 0.0,
        }
    }

    /// `G(tau)` for `tau` in `[0, 1]`.
    pub fn big_g(&self, tau: f64) -> f64 {
        match self {
            Self::Cosine => (TAU * tau).sin(),
            Self::Square => {
                if tau < 0.25 {
                    TAU * tau
                } else if tau < 0.75 {
                    FRAC_PI_2 - TAU * (tau - 0.25)
                } else {
                    -FRAC_PI_2 + TAU * (tau - 0.75)
                }
            }
            Self::Tabulated(t) => TAU * t.integral(tau),
            Self::Zero => 0.0,
        }
    }

    /// `int_0^1 g dtau`.
    pub fn mean(&self) -> f64 {
        match self {
            Self::Tabulated(t) => t.integral(1.0),
            _ => 0.0,
        }
    }

    /// `sup |G|` over the subcycle.
    pub fn sup_abs_big_g(&self) -> f64 {
        match self {
            Self::Cosine => 1.0,
            Self::Square => FRAC_PI_2,
            Self::Zero => 0.0,
            Self::Tabulated(t) => {
                let n = 16 * t.len();
                (0..=n)
                    .map(|k| self.big_g(k as f64 / n as f64).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Breakpoints of `g` inside `(0, 1)` where integrands lose smoothness.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Square => vec![0.25, 0.75],
            Self::Tabulated(t) => (1..t.len()).map(|k| k as f64 / t.len() as f64).collect(),
            _ => Vec::new(),
        }
    }

    /// `int_0^1 G^{2p} dtau`, analytic for the built-in shapes.
    pub fn subcycle_moment(&self, p: usize) -> Result<f64> {
        match self {
            Self::Cosine => Ok(central_binomial_over_four_pow(p)),
            Self::Square => Ok(FRAC_PI_2.powi(2 * p as i32) / (2 * p + 1) as f64),
            Self::Zero => Ok(0.0),
            Self::Tabulated(_) => self.quadrature_moment(p),
        }
    }

    /// `int_0^1 G^{2p} dtau` by adaptive quadrature between breakpoints.
    pub fn quadrature_moment(&self, p: usize) -> Result<f64> {
        let opts = QuadratureOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-12,
            max_depth: 30,
        };
        let mut edges = vec![0.0];
        edges.extend(self.breakpoints());
        edges.push(1.0);
        let power = 2 * p as i32;
        let mut total = 0.0;
        for w in edges.windows(2) {
            total += integrate(|tau| self.big_g(tau).powi(power), w[0], w[1], opts)?;
        }
        Ok(total)
    }
}

/// `C(2p, p) / 4^p`, the mean of `sin^{2p}` over a period.
pub fn central_binomial_over_four_pow(p: usize) -> f64 {
    (1..=p).fold(1.0, |acc, k| acc * (2 * k - 1) as f64 / (2 * k) as f64)
}

impl FromStr for PulseShape {
    type Err = FloquetError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(Self::Cosine),
            "square" => Ok(Self::Square),
            "zero" => Ok(Self::Zero),
            other => Err(FloquetError::Parse(format!(
                "unknown pulse shape '{other}' (tabulated shapes load from a file)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_integral_peaks() {
        let s = PulseShape::Square;
        assert!((s.big_g(0.25) - FRAC_PI_2).abs() < 1e-15);
        assert!((s.big_g(0.75) + FRAC_PI_2).abs() < 1e-15);
        assert!(s.big_g(1.0).abs() < 1e-15);
        assert_eq!(s.big_g(0.0), 0.0);
    }

    #[test]
    fn cosine_moments() {
        assert_eq!(PulseShape::Cosine.subcycle_moment(1).unwrap(), 0.5);
        assert_eq!(PulseShape::Cosine.subcycle_moment(2).unwrap(), 0.375);
    }

    #[test]
    fn cyclic_solver_matches_dense() {
        let rhs = [1.0, -2.0, 0.5, 3.0, 0.0];
        let x = solve_cyclic_tridiagonal(1.0, 4.0, 1.0, &rhs);
        let n = rhs.len();
        for k in 0..n {
            let lhs = x[(k + n - 1) % n] + 4.0 * x[k] + x[(k + 1) % n];
            assert!((lhs - rhs[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn spline_reproduces_cosine() {
        let t = TabulatedShape::from_fn(256, Interpolation::PeriodicCubic, |x| (TAU * x).cos())
            .unwrap();
        let shape = PulseShape::Tabulated(t);
        for k in 0..50 {
            let tau = k as f64 / 50.0 + 0.003;
            assert!((shape.g(tau) - (TAU * tau).cos()).abs() < 1e-7);
            assert!((shape.big_g(tau) - (TAU * tau).sin()).abs() < 1e-8);
        }
        assert!(shape.mean().abs() < 1e-14);
    }

    #[test]
    fn linear_interpolation_integral() {
        let t = TabulatedShape::new(vec![0.0, 1.0, 0.0, -1.0], Interpolation::Linear).unwrap();
        assert!((t.integral(0.25) - 0.125).abs() < 1e-15);
        assert!(t.integral(1.0).abs() < 1e-15);
        assert!((t.value(0.125) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parse_rejects_nonuniform_grid() {
        let ok = "# t g\n0 1\n0.25 0\n0.5 -1\n0.75 0\n";
        assert_eq!(
            TabulatedShape::parse(ok, Interpolation::Linear)
                .unwrap()
                .len(),
            4
        );
        let bad = "0 1\n0.3 0\n0.5 -1\n0.75 0\n";
        assert!(TabulatedShape::parse(bad, Interpolation::Linear).is_err());
        assert!(TabulatedShape::parse("0 1 2\n", Interpolation::Linear).is_err());
    }

    #[test]
    fn square_quadrature_matches_analytic() {
        for p in 1..6 {
            let q = PulseShape::Square.quadrature_moment(p).unwrap();
            let a = PulseShape::Square.subcycle_moment(p).unwrap();
            assert!((q - a).abs() < 1e-12 * a, "p = {p}");
        }
    }
}
