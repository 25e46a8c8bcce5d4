//! Cubic Hermite interpolation helpers.

/// Cubic Hermite interpolant on `[0, 1]` in the local coordinate `t`, with
/// end values `y0, y1` and end slopes already scaled by the interval width.
#[inline]
pub fn hermite(t: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1
}

/// Clamps Hermite node slopes of increasing data into the Fritsch–Carlson
/// monotonicity region. Slopes that already satisfy it are left untouched.
pub fn fritsch_carlson_limit(h: f64, y: &[f64], slopes: &mut [f64]) {
    for k in 0..y.len().saturating_sub(1) {
        let secant = (y[k + 1] - y[k]) / h;
        if secant <= 0.0 {
            slopes[k] = 0.0;
            slopes[k + 1] = 0.0;
            continue;
        }
        let a = slopes[k] / secant;
        let b = slopes[k + 1] / secant;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            slopes[k] = tau * a * secant;
            slopes[k + 1] = tau * b * secant;
        }
    }
}

/// Four-point Lagrange interpolation of periodic samples located at
/// `(j + 1/2)·dx`, evaluated at `x` (any real number).
pub fn periodic_cubic(samples: &[f64], dx: f64, x: f64) -> f64 {
    let n = samples.len() as i64;
    let pos = x / dx - 0.5;
    let j = pos.floor();
    let t = pos - j;
    let j = j as i64;
    let at = |k: i64| samples[k.rem_euclid(n) as usize];
    let (ym1, y0, y1, y2) = (at(j - 1), at(j), at(j + 1), at(j + 2));
    let c0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let c1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let c2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let c3 = (t + 1.0) * t * (t - 1.0) / 6.0;
    c0 * ym1 + c1 * y0 + c2 * y1 + c3 * y2
}
