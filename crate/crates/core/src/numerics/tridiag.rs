//! Pre-factored solvers for the constant-coefficient systems
//! `(1 + 2r) u_i − r (u_{i−1} + u_{i+1}) = b_i` arising from implicit diffusion.

/// Thomas-algorithm factorization with Dirichlet ends (ghost contributions are
/// moved into the right-hand side by the caller).
#[derive(Debug, Clone)]
pub struct DiffusionSolver {
    r: f64,
    /// Modified super-diagonal c'_i.
    cp: Vec<f64>,
    /// Reciprocal pivots.
    inv_pivot: Vec<f64>,
}

impl DiffusionSolver {
    pub fn new(n: usize, r: f64) -> Self {
        let diag = 1.0 + 2.0 * r;
        let off = -r;
        let mut cp = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_cp = 0.0;
        for i in 0..n {
            let pivot = diag - off * prev_cp;
            inv_pivot[i] = 1.0 / pivot;
            cp[i] = off * inv_pivot[i];
            prev_cp = cp[i];
        }
        Self { r, cp, inv_pivot }
    }

    pub fn len(&self) -> usize {
        self.cp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cp.is_empty()
    }

    /// Solves in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        debug_assert_eq!(n, self.len());
        let off = -self.r;
        let mut prev = 0.0;
        for i in 0..n {
            b[i] = (b[i] - off * prev) * self.inv_pivot[i];
            prev = b[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            b[i] -= self.cp[i] * b[i + 1];
        }
    }
}

/// Periodic (cyclic) variant solved by Sherman–Morrison on top of a
/// modified Thomas factorization.
#[derive(Debug, Clone)]
pub struct PeriodicDiffusionSolver {
    r: f64,
    inner: ModifiedThomas,
    z: Vec<f64>,
    z_factor: f64,
}

#[derive(Debug, Clone)]
struct ModifiedThomas {
    off: f64,
    cp: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl ModifiedThomas {
    fn new(diag: &[f64], off: f64) -> Self {
        let n = diag.len();
        let mut cp = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_cp = 0.0;
        for i in 0..n {
            let pivot = diag[i] - off * prev_cp;
            inv_pivot[i] = 1.0 / pivot;
            cp[i] = off * inv_pivot[i];
            prev_cp = cp[i];
        }
        Self { off, cp, inv_pivot }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        let mut prev = 0.0;
        for i in 0..n {
            b[i] = (b[i] - self.off * prev) * self.inv_pivot[i];
            prev = b[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            b[i] -= self.cp[i] * b[i + 1];
        }
    }
}

impl PeriodicDiffusionSolver {
    pub fn new(n: usize, r: f64) -> Self {
        assert!(n >= 3, "periodic solver needs at least three cells");
        let diag0 = 1.0 + 2.0 * r;
        let off = -r;
        // A = B + u vᵀ with u = (γ, 0, …, 0, off), v = (1, 0, …, 0, off/γ).
        let gamma = -diag0;
        let mut diag = vec![diag0; n];
        diag[0] -= gamma;
        diag[n - 1] -= off * off / gamma;
        let inner = ModifiedThomas::new(&diag, off);
        let mut z = vec![0.0; n];
        z[0] = gamma;
        z[n - 1] = off;
        inner.solve(&mut z);
        let vz = z[0] + off / gamma * z[n - 1];
        Self {
            r,
            inner,
            z,
            z_factor: 1.0 / (1.0 + vz),
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Solves in place. Constants are fixed points of the operator, so the
    /// mean is split off first and only the deviation goes through the
    /// factorization; this keeps the discrete mass exact up to round-off in
    /// the deviation.
    pub fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        let mean = b.iter().sum::<f64>() / n as f64;
        for v in b.iter_mut() {
            *v -= mean;
        }
        self.solve_deviation(b);
        for v in b.iter_mut() {
            *v += mean;
        }
    }

    fn solve_deviation(&self, b: &mut [f64]) {
        let n = b.len();
        self.inner.solve(b);
        let gamma = -(1.0 + 2.0 * self.r);
        let vy = b[0] + (-self.r) / gamma * b[n - 1];
        let c = vy * self.z_factor;
        for (bi, zi) in b.iter_mut().zip(self.z.iter()) {
            *bi -= c * zi;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(u: &[f64], r: f64, periodic: bool) -> Vec<f64> {
        let n = u.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 {
                    u[i - 1]
                } else if periodic {
                    u[n - 1]
                } else {
                    0.0
                };
                let right = if i + 1 < n {
                    u[i + 1]
                } else if periodic {
                    u[0]
                } else {
                    0.0
                };
                (1.0 + 2.0 * r) * u[i] - r * (left + right)
            })
            .collect()
    }

    #[test]
    fn dirichlet_solve_inverts_operator() {
        let u: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin() + 0.1 * i as f64).collect();
        let mut b = apply(&u, 3.5, false);
        DiffusionSolver::new(40, 3.5).solve(&mut b);
        for (a, e) in b.iter().zip(&u) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_solve_inverts_operator_and_keeps_sum() {
        let u: Vec<f64> = (0..33).map(|i| (i as f64 * 0.91).cos() + 0.5).collect();
        let mut b = apply(&u, 120.0, true);
        let sum_b: f64 = b.iter().sum();
        PeriodicDiffusionSolver::new(33, 120.0).solve(&mut b);
        for (a, e) in b.iter().zip(&u) {
            assert!((a - e).abs() < 1e-11);
        }
        assert!((b.iter().sum::<f64>() - sum_b).abs() < 1e-11);
    }
}
