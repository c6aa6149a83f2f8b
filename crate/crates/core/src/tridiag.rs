//! Tridiagonal solves for the implicit diffusion half of the finite-difference
//! stepper.

use crate::error::{Error, Result};

/// Thomas algorithm for `A x = rhs`, `A` given by its sub-, main and
/// super-diagonals. `rhs` is overwritten with the solution.
///
/// `sub[0]` and `sup[n-1]` are ignored.
pub fn solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(Error::Internal("tridiagonal band length mismatch".into()));
    }
    if n == 0 {
        return Ok(());
    }
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::Internal("zero pivot in tridiagonal solve".into()));
    }
    rhs[0] /= beta;
    for i in 1..n {
        c[i - 1] = sup[i - 1] / beta;
        beta = diag[i] - sub[i] * c[i - 1];
        if beta == 0.0 {
            return Err(Error::Internal("zero pivot in tridiagonal solve".into()));
        }
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}

/// Pre-factorized `(I - dt * L_N)`, where `L_N` is the second-difference
/// Laplacian with mirrored ghost cells on an `N`-cell grid.
#[derive(Debug, Clone)]
pub struct ImplicitNeumannSolver {
    off: f64,
    c: Vec<f64>,
    inv_beta: Vec<f64>,
}

impl ImplicitNeumannSolver {
    pub fn new(n: usize, dt: f64) -> Self {
        assert!(n > 0);
        let h = 1.0 / n as f64;
        let r = dt / (h * h);
        let diag = |i: usize| -> f64 {
            if n == 1 {
                1.0
            } else if i == 0 || i == n - 1 {
                1.0 + r
            } else {
                1.0 + 2.0 * r
            }
        };
        let off = -r;
        let mut c = vec![0.0; n];
        let mut inv_beta = vec![0.0; n];
        let mut beta = diag(0);
        inv_beta[0] = 1.0 / beta;
        for i in 1..n {
            c[i - 1] = off / beta;
            beta = diag(i) - off * c[i - 1];
            inv_beta[i] = 1.0 / beta;
        }
        Self { off, c, inv_beta }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Solves in place. The matrix is strictly diagonally dominant so the
    /// factorization never breaks down.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.c.len();
        debug_assert_eq!(rhs.len(), n);
        rhs[0] *= self.inv_beta[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.off * rhs[i - 1]) * self.inv_beta[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.c[i] * rhs[i + 1];
        }
    }
}
