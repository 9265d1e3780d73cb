//! Special functions and their extrema.

use roots::{find_root_brent, SimpleConvergency};

use crate::error::{FloquetError, Result};

pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}

pub fn bessel_j1(x: f64) -> f64 {
    libm::j1(x)
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Derivative of [`sinc`].
pub fn sinc_derivative(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        -x / 3.0 + x * x * x / 30.0
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}

/// Brent refinement on a sign-changing bracket.
pub fn brent<F: FnMut(f64) -> f64>(a: f64, b: f64, f: F, tol: f64) -> Result<f64> {
    let mut conv = SimpleConvergency {
        eps: tol,
        max_iter: 500,
    };
    find_root_brent(a, b, f, &mut conv)
        .map_err(|e| FloquetError::RootFinding(format!("brent on [{a}, {b}]: {e}")))
}

/// Location and value of the global minimum of `J0`, at the first zero of `J1`.
pub fn bessel_j0_minimum() -> (f64, f64) {
    let x = brent(3.0, 4.5, bessel_j1, 1e-15).expect("J1 changes sign on [3, 4.5]");
    (x, bessel_j0(x))
}

/// Location (positive branch) and value of the global minimum of `sinc`.
pub fn sinc_minimum() -> (f64, f64) {
    let x =
        brent(4.0, 5.0, |x| x * x.cos() - x.sin(), 1e-15).expect("tan(x) = x has a root on [4, 5]");
    (x, sinc(x))
}

/// `ln(n!)` for moderate `n` by direct summation.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_minimum_location() {
        let (x, v) = bessel_j0_minimum();
        assert!((x - 3.831_705_970_207_512).abs() < 1e-12);
        assert!((v + 0.402_759_395_702_553).abs() < 1e-12);
    }

    #[test]
    fn sinc_minimum_location() {
        let (x, v) = sinc_minimum();
        assert!((x - 4.493_409_457_909_064).abs() < 1e-12);
        assert!((v + 0.217_233_628_211_221_6).abs() < 1e-12);
    }

    #[test]
    fn sinc_small_argument() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(1e-5) - (1e-5f64).sin() / 1e-5).abs() < 1e-15);
        assert!((sinc_derivative(2.0) - (2.0 * 2f64.cos() - 2f64.sin()) / 4.0).abs() < 1e-16);
    }
}
