//! Adaptive Gauss-Kronrod (7, 15) quadrature.

// Nodes and weights are the standard tabulated values.
#![allow(clippy::excessive_precision)]

use crate::error::{FloquetError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-10,
            max_depth: 40,
        }
    }
}

/// One 15-point Kronrod estimate and its embedded 7-point Gauss error estimate.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integral of `f` over `[a, b]` to the requested tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (whole, err) = gauss_kronrod(&f, a, b);
    let target = opts.abs_tol.max(opts.rel_tol * whole.abs());
    if err <= target {
        return Ok(whole);
    }
    let mut total = 0.0;
    let mut stack = vec![(a, b, whole, err, 0usize)];
    while let Some((lo, hi, est, e, depth)) = stack.pop() {
        let width_share = (hi - lo).abs() / (b - a).abs();
        if e <= target * width_share.max(1e-300) || e < 1e-300 {
            total += est;
            continue;
        }
        if depth >= opts.max_depth {
            return Err(FloquetError::QuadratureFailed(format!(
                "no convergence on [{lo}, {hi}] after {depth} bisections (error {e:e})"
            )));
        }
        let mid = 0.5 * (lo + hi);
        let (l, el) = gauss_kronrod(&f, lo, mid);
        let (r, er) = gauss_kronrod(&f, mid, hi);
        stack.push((lo, mid, l, el, depth + 1));
        stack.push((mid, hi, r, er, depth + 1));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(
            |x| x.powi(6) - 3.0 * x,
            0.0,
            2.0,
            QuadratureOptions::default(),
        )
        .unwrap();
        assert!((v - (128.0 / 7.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_integrand() {
        let v = integrate(
            |x| (20.0 * x).sin().powi(4),
            0.0,
            PI,
            QuadratureOptions::default(),
        )
        .unwrap();
        assert!((v - 3.0 * PI / 8.0).abs() < 1e-10);
    }

    #[test]
    fn kink_converges() {
        let v = integrate(
            |x: f64| (x - 0.3).abs(),
            0.0,
            1.0,
            QuadratureOptions::default(),
        )
        .unwrap();
        assert!((v - 0.29).abs() < 1e-10);
    }

    #[test]
    fn singular_integrand_fails() {
        let opts = QuadratureOptions {
            max_depth: 8,
            ..Default::default()
        };
        assert!(integrate(|x: f64| 1.0 / x, 0.0, 1.0, opts).is_err());
    }
}
