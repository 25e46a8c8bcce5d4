//! Fixed and adaptive Gauss rules.

/// 5-point Gauss–Legendre nodes on [-1, 1]; exact for polynomials of degree 9.
const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_08,
    0.478_628_670_499_366_47,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
];

/// Integrates `f` over `[a, b]` with the 5-point Gauss–Legendre rule.
pub fn gauss_legendre5(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL5_NODES
        .iter()
        .zip(GL5_WEIGHTS.iter())
        .map(|(&t, &w)| w * f(mid + half * t))
        .sum::<f64>()
        * half
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel: returns (Kronrod estimate, |Kronrod − Gauss|).
pub fn gauss_kronrod15(a: f64, b: f64, f: &impl Fn(f64) -> f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod integration by recursive bisection.
///
/// Panels are accepted once their error estimate drops below
/// `max(abs_tol, rel_tol·|panel|)` or the depth limit is reached. Returns
/// the integral and the accumulated error estimate.
pub fn adaptive_gk15(
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    f: &impl Fn(f64) -> f64,
) -> (f64, f64) {
    fn recurse(
        a: f64,
        b: f64,
        abs_tol: f64,
        rel_tol: f64,
        depth: u32,
        f: &impl Fn(f64) -> f64,
    ) -> (f64, f64) {
        let (value, err) = gauss_kronrod15(a, b, f);
        if err <= abs_tol.max(rel_tol * value.abs()) || depth == 0 {
            return (value, err);
        }
        let mid = 0.5 * (a + b);
        let (v1, e1) = recurse(a, mid, 0.5 * abs_tol, rel_tol, depth - 1, f);
        let (v2, e2) = recurse(mid, b, 0.5 * abs_tol, rel_tol, depth - 1, f);
        (v1 + v2, e1 + e2)
    }
    recurse(a, b, abs_tol, rel_tol, 30, f)
}

/// Gauss–Kronrod 7/15 panel for a vector integrand; the error is the
/// largest component error.
pub fn gauss_kronrod15_vec<const N: usize>(
    a: f64,
    b: f64,
    f: &impl Fn(f64) -> [f64; N],
) -> ([f64; N], f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    for i in 0..N {
        kronrod[i] = WGK[7] * fc[i];
        gauss[i] = WG[3] * fc[i];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let (lo, hi) = (f(mid - dx), f(mid + dx));
        for i in 0..N {
            let pair = lo[i] + hi[i];
            kronrod[i] += WGK[j] * pair;
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * pair;
            }
        }
    }
    let mut err = 0.0f64;
    for i in 0..N {
        err = err.max(((kronrod[i] - gauss[i]) * half).abs());
        kronrod[i] *= half;
    }
    (kronrod, err)
}

/// Adaptive vector Gauss–Kronrod; panels are accepted once the error is below
/// `max(abs_tol, rel_tol·scale·|first component|)`.
pub fn adaptive_gk15_vec<const N: usize>(
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    scale: f64,
    f: &impl Fn(f64) -> [f64; N],
) -> ([f64; N], f64) {
    fn recurse<const N: usize>(
        a: f64,
        b: f64,
        abs_tol: f64,
        rel_tol: f64,
        scale: f64,
        depth: u32,
        f: &impl Fn(f64) -> [f64; N],
    ) -> ([f64; N], f64) {
        let (value, err) = gauss_kronrod15_vec(a, b, f);
        if err <= abs_tol.max(rel_tol * scale * value[0].abs()) || depth == 0 {
            return (value, err);
        }
        let mid = 0.5 * (a + b);
        let (v1, e1) = recurse(a, mid, 0.5 * abs_tol, rel_tol, scale, depth - 1, f);
        let (v2, e2) = recurse(mid, b, 0.5 * abs_tol, rel_tol, scale, depth - 1, f);
        let mut v = [0.0; N];
        for i in 0..N {
            v[i] = v1[i] + v2[i];
        }
        (v, e1 + e2)
    }
    recurse(a, b, abs_tol, rel_tol, scale, 30, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_degree_nine() {
        let got = gauss_legendre5(-0.3, 1.7, |x| x.powi(9) - 2.0 * x.powi(4) + 1.0);
        let exact = |x: f64| x.powi(10) / 10.0 - 0.4 * x.powi(5) + x;
        assert!((got - (exact(1.7) - exact(-0.3))).abs() < 1e-12);
    }

    #[test]
    fn kronrod_integrates_gaussian() {
        let (v, _) = adaptive_gk15(-12.0, 12.0, 1e-15, 1e-14, &|x: f64| (-x * x).exp());
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }
}
