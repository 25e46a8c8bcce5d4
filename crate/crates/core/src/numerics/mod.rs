//! Small numerical building blocks shared by the modules.

pub mod fit;
pub mod interp;
pub mod quadrature;
pub mod tridiag;

/// `ln(1 + e^x)` without overflow or loss of precision for large `|x|`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function `1 / (1 + e^z)`, decreasing in `z`.
#[inline]
pub fn logistic_decreasing(z: f64) -> f64 {
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}
