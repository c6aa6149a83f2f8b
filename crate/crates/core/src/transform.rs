//! Cosine transform between cell-centered samples and Neumann eigenmode
//! coefficients.
//!
//! With `e_0 = 1` and `e_k(x) = sqrt(2) cos(k pi x)`, the forward transform
//! returns `c_k = h * sum_j u_j e_k(x_j)` for `k < N` and the inverse returns
//! `u_j = sum_k c_k e_k(x_j)`. On the cell-centered grid these are exact
//! inverses (the discrete cosine basis is orthonormal under `h * sum`).

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

pub struct CosineTransform {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    twiddle: Vec<Complex<f64>>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

impl std::fmt::Debug for CosineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CosineTransform")
            .field("n", &self.n)
            .finish()
    }
}

impl Clone for CosineTransform {
    fn clone(&self) -> Self {
        Self::new(self.n)
    }
}

impl CosineTransform {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "transform size must be positive");
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(2 * n);
        let inverse = planner.plan_fft_inverse(2 * n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let twiddle = (0..n)
            .map(|k| Complex::from_polar(1.0, PI * k as f64 / (2 * n) as f64))
            .collect();
        Self {
            n,
            forward,
            inverse,
            twiddle,
            buf: vec![Complex::default(); 2 * n],
            scratch: vec![Complex::default(); scratch_len],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Grid samples to mode coefficients.
    pub fn forward(&mut self, samples: &[f64], coeffs: &mut [f64]) {
        let n = self.n;
        assert_eq!(samples.len(), n);
        assert_eq!(coeffs.len(), n);
        for (j, &u) in samples.iter().enumerate() {
            self.buf[j] = Complex::new(u, 0.0);
            self.buf[2 * n - 1 - j] = Complex::new(u, 0.0);
        }
        self.forward
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        let h = 1.0 / n as f64;
        for k in 0..n {
            let s = 0.5 * (self.buf[k] * self.twiddle[k].conj()).re;
            coeffs[k] = if k == 0 { h * s } else { SQRT_2 * h * s };
        }
    }

    /// Mode coefficients to grid samples.
    pub fn inverse(&mut self, coeffs: &[f64], samples: &mut [f64]) {
        let n = self.n;
        assert_eq!(coeffs.len(), n);
        assert_eq!(samples.len(), n);
        for k in 0..n {
            let a = if k == 0 {
                coeffs[0]
            } else {
                SQRT_2 * coeffs[k]
            };
            self.buf[k] = self.twiddle[k] * a;
        }
        for z in &mut self.buf[n..] {
            *z = Complex::default();
        }
        self.inverse
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        for (j, u) in samples.iter_mut().enumerate() {
            *u = self.buf[j].re;
        }
    }
}

/// Neumann eigenfunction `e_k` evaluated at `x`.
#[inline]
pub fn eigenfunction(k: usize, x: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        SQRT_2 * (k as f64 * PI * x).cos()
    }
}

/// Eigenvalue magnitude `k^2 pi^2` of the Neumann Laplacian on (0, 1).
#[inline]
pub fn eigenvalue(k: usize) -> f64 {
    let kp = k as f64 * PI;
    kp * kp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::cell_center;

    fn naive_forward(u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let h = 1.0 / n as f64;
        (0..n)
            .map(|k| {
                h * u
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * eigenfunction(k, cell_center(j, n)))
                    .sum::<f64>()
            })
            .collect()
    }

    #[test]
    fn matches_naive_projection() {
        for n in [1usize, 2, 5, 16, 33] {
            let u: Vec<f64> = (0..n).map(|j| ((j * 7 + 3) % 11) as f64 - 4.0).collect();
            let mut t = CosineTransform::new(n);
            let mut c = vec![0.0; n];
            t.forward(&u, &mut c);
            let expect = naive_forward(&u);
            for (a, b) in c.iter().zip(&expect) {
                assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
            }
            let mut back = vec![0.0; n];
            t.inverse(&c, &mut back);
            for (a, b) in back.iter().zip(&u) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_mode_is_a_unit_coefficient() {
        let n = 32;
        let u: Vec<f64> = (0..n)
            .map(|j| eigenfunction(3, cell_center(j, n)))
            .collect();
        let mut t = CosineTransform::new(n);
        let mut c = vec![0.0; n];
        t.forward(&u, &mut c);
        for (k, v) in c.iter().enumerate() {
            let want = if k == 3 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-13);
        }
    }
}
