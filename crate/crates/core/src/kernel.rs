//! Neumann heat kernel on (0, 1) and the heat semigroup it generates.
//!
//! Two representations of `G_t(x, y)` are provided:
//!
//! * the method of images,
//!   `(4 pi t)^{-1/2} sum_n [exp(-(y-x-2n)^2/4t) + exp(-(y+x-2n)^2/4t)]`,
//!   which converges fast for small `t`;
//! * the cosine eigen-expansion,
//!   `1 + sum_{n>=1} 2 exp(-n^2 pi^2 t) cos(n pi x) cos(n pi y)`,
//!   which converges fast for large `t`.
//!
//! [`kernel`] switches between them at [`SWITCH_TIME`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::transform::{eigenvalue, CosineTransform};

/// Below this time the image sum is the default representation.
pub const SWITCH_TIME: f64 = 0.01;
pub const DEFAULT_IMAGES: usize = 20;
/// Eigen-series tails are cut once `exp(-K^2 pi^2 t)` drops below this.
pub const EIGEN_TAIL: f64 = 1e-14;

// exp(-x) underflows to zero past this.
const EXP_CUTOFF: f64 = 745.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRepresentation {
    ImageSum,
    EigenSeries,
}

/// A fixed choice of kernel representation and truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    representation: KernelRepresentation,
    n_images: usize,
    n_modes: usize,
}

impl KernelEval {
    pub fn new(
        representation: KernelRepresentation,
        n_images: usize,
        n_modes: usize,
    ) -> Result<Self> {
        if n_images == 0 || n_modes == 0 {
            return Err(Error::domain("kernel truncations must be at least 1"));
        }
        Ok(Self {
            representation,
            n_images,
            n_modes,
        })
    }

    pub fn representation(&self) -> KernelRepresentation {
        self.representation
    }

    pub fn eval(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        match self.representation {
            KernelRepresentation::ImageSum => kernel_image_sum(t, x, y, self.n_images),
            KernelRepresentation::EigenSeries => kernel_eigen_series(t, x, y, self.n_modes),
        }
    }
}

fn check_args(t: f64, x: f64, y: f64) -> Result<()> {
    if !(t.is_finite() && x.is_finite() && y.is_finite()) {
        return Err(Error::domain("kernel arguments must be finite"));
    }
    if t <= 0.0 {
        return Err(Error::domain(format!(
            "kernel time must be positive, got {t}"
        )));
    }
    Ok(())
}

/// Method-of-images evaluation with `n` ranging over `[-n_images, n_images]`.
pub fn kernel_image_sum(t: f64, x: f64, y: f64, n_images: usize) -> Result<f64> {
    check_args(t, x, y)?;
    Ok(image_sum_unchecked(t, x, y, n_images))
}

fn image_sum_unchecked(t: f64, x: f64, y: f64, n_images: usize) -> f64 {
    let inv4t = 1.0 / (4.0 * t);
    let gauss = |d: f64| {
        let e = d * d * inv4t;
        if e > EXP_CUTOFF {
            0.0
        } else {
            (-e).exp()
        }
    };
    let m = n_images as i64;
    let mut sum = 0.0;
    for n in -m..=m {
        let shift = 2.0 * n as f64;
        sum += gauss(y - x - shift) + gauss(y + x - shift);
    }
    sum / (4.0 * PI * t).sqrt()
}

/// Cosine eigen-expansion truncated after `n_modes` nonconstant modes.
pub fn kernel_eigen_series(t: f64, x: f64, y: f64, n_modes: usize) -> Result<f64> {
    check_args(t, x, y)?;
    Ok(eigen_series_unchecked(t, x, y, n_modes))
}

fn eigen_series_unchecked(t: f64, x: f64, y: f64, n_modes: usize) -> f64 {
    let mut sum = 1.0;
    for n in 1..=n_modes {
        let decay = (-eigenvalue(n) * t).exp();
        if decay == 0.0 {
            break;
        }
        let k = n as f64 * PI;
        sum += 2.0 * decay * (k * x).cos() * (k * y).cos();
    }
    sum
}

/// Smallest mode count `K` with `exp(-K^2 pi^2 t) < EIGEN_TAIL`.
pub fn default_modes(t: f64) -> usize {
    let k = (-EIGEN_TAIL.ln() / (PI * PI * t)).sqrt().ceil();
    (k as usize).max(1)
}

/// Kernel with the default representation switch and truncations.
pub fn kernel(t: f64, x: f64, y: f64) -> Result<f64> {
    check_args(t, x, y)?;
    Ok(kernel_unchecked(t, x, y))
}

fn kernel_unchecked(t: f64, x: f64, y: f64) -> f64 {
    if t < SWITCH_TIME {
        image_sum_unchecked(t, x, y, DEFAULT_IMAGES)
    } else {
        eigen_series_unchecked(t, x, y, default_modes(t))
    }
}

/// Free-space Gaussian `(2 pi t)^{-1/2} exp(-|x-y|^2 / 2t)`.
pub fn gaussian_kernel(t: f64, x: f64, y: f64) -> f64 {
    let d = x - y;
    (-(d * d) / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// Infimum and supremum of `G_t(x,y) / gaussian_kernel(t,x,y)` over the
/// Cartesian product of the given sample points.
pub fn gaussian_ratio_range(times: &[f64], xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for &t in times {
        for &x in xs {
            for &y in ys {
                let r = kernel(t, x, y)? / gaussian_kernel(t, x, y);
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
    }
    Ok((lo, hi))
}

/// The heat semigroup `e^{t Delta_N}` acting on grid functions, applied
/// spectrally. Holds a cached cosine transform for repeated use.
#[derive(Debug, Clone)]
pub struct HeatSemigroup {
    transform: CosineTransform,
    coeffs: Vec<f64>,
}

impl HeatSemigroup {
    pub fn new(n: usize) -> Self {
        Self {
            transform: CosineTransform::new(n),
            coeffs: vec![0.0; n],
        }
    }

    pub fn apply(&mut self, t: f64, u: &GridFunction) -> Result<GridFunction> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::domain(format!(
                "semigroup time must be >= 0, got {t}"
            )));
        }
        crate::error::check_grid(self.transform.len(), u.len())?;
        if t == 0.0 {
            return Ok(u.clone());
        }
        self.transform.forward(u.values(), &mut self.coeffs);
        for (k, c) in self.coeffs.iter_mut().enumerate() {
            *c *= (-eigenvalue(k) * t).exp();
        }
        let mut out = vec![0.0; u.len()];
        self.transform.inverse(&self.coeffs, &mut out);
        GridFunction::new(out)
    }
}

/// `e^{t Delta_N} u` on the grid of `u`.
pub fn semigroup_apply(t: f64, u: &GridFunction) -> Result<GridFunction> {
    HeatSemigroup::new(u.len()).apply(t, u)
}

/// `max_j |(e^{s Delta} e^{t Delta} u - e^{(s+t) Delta} u)(x_j)|`.
pub fn semigroup_compose_check(s: f64, t: f64, u: &GridFunction) -> Result<f64> {
    let mut sg = HeatSemigroup::new(u.len());
    let inner = sg.apply(t, u)?;
    let composed = sg.apply(s, &inner)?;
    let direct = sg.apply(s + t, u)?;
    composed.max_abs_diff(&direct)
}

/// Integrals of squared kernel differences that control the regularity of
/// stochastic convolutions against the Neumann kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelEstimate {
    /// `int_0^1 (G_t(x,xi) - G_t(y,xi))^2 dxi`; bound shape `|x-y|^2 / t^{3/2}`.
    SpaceIncrement { t: f64, x: f64, y: f64 },
    /// `int_0^t int_0^1 (G_s(x,xi) - G_s(y,xi))^2 dxi ds`; bound shape `|x-y|`.
    SpaceIncrementTimeIntegrated { t: f64, x: f64, y: f64 },
    /// `int_s^t int_0^1 G_{t-r}(x,xi)^2 dxi dr`; bound shape `|t-s|^{1/2}`.
    SquareTail { s: f64, t: f64, x: f64 },
    /// `int_0^s int_0^1 (G_{t-r}(x,xi) - G_{s-r}(x,xi))^2 dxi dr`; bound shape `|t-s|^{1/2}`.
    TimeIncrementIntegrated { s: f64, t: f64, x: f64 },
    /// `int_0^1 (G_t(x,xi) - G_s(x,xi))^2 dxi` for `s, t` away from 0;
    /// bound shape `|t-s|^{1/2}`.
    TimeIncrementFixed { s: f64, t: f64, x: f64 },
}

impl KernelEstimate {
    pub fn name(&self) -> &'static str {
        match self {
            KernelEstimate::SpaceIncrement { .. } => "space_increment",
            KernelEstimate::SpaceIncrementTimeIntegrated { .. } => {
                "space_increment_time_integrated"
            }
            KernelEstimate::SquareTail { .. } => "square_tail",
            KernelEstimate::TimeIncrementIntegrated { .. } => "time_increment_integrated",
            KernelEstimate::TimeIncrementFixed { .. } => "time_increment_fixed",
        }
    }

    /// The right-hand side of the bound with its constant dropped.
    pub fn bound_shape(&self) -> f64 {
        match *self {
            KernelEstimate::SpaceIncrement { t, x, y } => (x - y).powi(2) / t.powf(1.5),
            KernelEstimate::SpaceIncrementTimeIntegrated { x, y, .. } => (x - y).abs(),
            KernelEstimate::SquareTail { s, t, .. }
            | KernelEstimate::TimeIncrementIntegrated { s, t, .. }
            | KernelEstimate::TimeIncrementFixed { s, t, .. } => (t - s).abs().sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        let in_unit = |p: f64| (0.0..=1.0).contains(&p);
        let ok = match *self {
            KernelEstimate::SpaceIncrement { t, x, y }
            | KernelEstimate::SpaceIncrementTimeIntegrated { t, x, y } => {
                t > 0.0 && in_unit(x) && in_unit(y)
            }
            KernelEstimate::SquareTail { s, t, x }
            | KernelEstimate::TimeIncrementIntegrated { s, t, x } => {
                s >= 0.0 && s < t && in_unit(x)
            }
            KernelEstimate::TimeIncrementFixed { s, t, x } => s > 0.0 && s < t && in_unit(x),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid arguments for {self:?}")))
        }
    }

    /// Evaluates the integral by composite midpoint quadrature of the kernel.
    pub fn evaluate(&self, quad: &Quadrature) -> Result<f64> {
        self.validate()?;
        let value = match *self {
            KernelEstimate::SpaceIncrement { t, x, y } => quad.space(&[t], &[x, y], |xi| {
                sq(kernel_unchecked(t, x, xi) - kernel_unchecked(t, y, xi))
            }),
            KernelEstimate::SpaceIncrementTimeIntegrated { t, x, y } => quad.time(t, |s| {
                quad.space(&[s], &[x, y], |xi| {
                    sq(kernel_unchecked(s, x, xi) - kernel_unchecked(s, y, xi))
                })
            }),
            KernelEstimate::SquareTail { s, t, x } => quad.time(t - s, |tau| {
                quad.space(&[tau], &[x], |xi| sq(kernel_unchecked(tau, x, xi)))
            }),
            KernelEstimate::TimeIncrementIntegrated { s, t, x } => {
                let delta = t - s;
                quad.time(s, |tau| {
                    quad.space(&[tau, tau + delta], &[x], |xi| {
                        sq(kernel_unchecked(tau + delta, x, xi) - kernel_unchecked(tau, x, xi))
                    })
                })
            }
            KernelEstimate::TimeIncrementFixed { s, t, x } => quad.space(&[s, t], &[x], |xi| {
                sq(kernel_unchecked(t, x, xi) - kernel_unchecked(s, x, xi))
            }),
        };
        Ok(value)
    }
}

/// The five estimate families, each swept over its small parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateFamily {
    SpaceIncrement,
    SpaceIncrementTimeIntegrated,
    SquareTail,
    TimeIncrementIntegrated,
    TimeIncrementFixed,
}

impl EstimateFamily {
    pub const ALL: [EstimateFamily; 5] = [
        EstimateFamily::SpaceIncrement,
        EstimateFamily::SpaceIncrementTimeIntegrated,
        EstimateFamily::SquareTail,
        EstimateFamily::TimeIncrementIntegrated,
        EstimateFamily::TimeIncrementFixed,
    ];

    /// The estimate at small parameter `delta` (`|x - y|` or `|t - s|`).
    pub fn at(self, delta: f64) -> KernelEstimate {
        const X: f64 = 0.4;
        match self {
            EstimateFamily::SpaceIncrement => KernelEstimate::SpaceIncrement {
                t: 0.05,
                x: X,
                y: X + delta,
            },
            EstimateFamily::SpaceIncrementTimeIntegrated => {
                KernelEstimate::SpaceIncrementTimeIntegrated {
                    t: 1.0,
                    x: X,
                    y: X + delta,
                }
            }
            EstimateFamily::SquareTail => KernelEstimate::SquareTail {
                s: 1.0 - delta,
                t: 1.0,
                x: X,
            },
            EstimateFamily::TimeIncrementIntegrated => KernelEstimate::TimeIncrementIntegrated {
                s: 0.5,
                t: 0.5 + delta,
                x: X,
            },
            EstimateFamily::TimeIncrementFixed => KernelEstimate::TimeIncrementFixed {
                s: 0.1,
                t: 0.1 + delta,
                x: X,
            },
        }
    }

    /// Default sweep range of the small parameter (two decades).
    pub fn default_range(self) -> (f64, f64) {
        match self {
            EstimateFamily::SpaceIncrement | EstimateFamily::SpaceIncrementTimeIntegrated => {
                (1e-3, 1e-1)
            }
            _ => (1e-4, 1e-2),
        }
    }

    /// Whether the bound shape is attained up to constants as the parameter
    /// shrinks. For the fixed-time increment the integral is smooth in time
    /// and decays like `|t - s|^2`, so only an upper bound applies.
    pub fn is_sharp(self) -> bool {
        self != EstimateFamily::TimeIncrementFixed
    }
}

/// Ratios of an estimate to its bound shape over a geometric sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSweep {
    pub family: EstimateFamily,
    pub params: Vec<f64>,
    pub values: Vec<f64>,
    pub ratios: Vec<f64>,
}

impl ScalingSweep {
    /// `max ratio / min ratio`.
    pub fn spread(&self) -> f64 {
        let hi = self
            .ratios
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let lo = self.ratios.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    }

    /// `max ratio / ratio at the largest parameter`: growth of the ratio as
    /// the parameter shrinks.
    pub fn growth(&self) -> f64 {
        let hi = self
            .ratios
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        hi / self.ratios[self.ratios.len() - 1]
    }

    /// The statistic compared against the variation limit: the spread for
    /// sharp families, the growth otherwise.
    pub fn variation(&self) -> f64 {
        if self.family.is_sharp() {
            self.spread()
        } else {
            self.growth()
        }
    }
}

/// Evaluates `family` at `points` geometrically spaced parameters in `range`.
pub fn scaling_sweep(
    family: EstimateFamily,
    range: (f64, f64),
    points: usize,
    quad: &Quadrature,
) -> Result<ScalingSweep> {
    if points < 2 || !(range.0 > 0.0 && range.1 > range.0) {
        return Err(Error::domain(format!(
            "invalid sweep of {points} points over {range:?}"
        )));
    }
    let params: Vec<f64> = (0..points)
        .map(|i| range.0 * (range.1 / range.0).powf(i as f64 / (points - 1) as f64))
        .collect();
    let mut values = Vec::with_capacity(points);
    let mut ratios = Vec::with_capacity(points);
    for &d in &params {
        let est = family.at(d);
        let v = est.evaluate(quad)?;
        values.push(v);
        ratios.push(v / est.bound_shape());
    }
    Ok(ScalingSweep {
        family,
        params,
        values,
        ratios,
    })
}

#[inline]
fn sq(v: f64) -> f64 {
    v * v
}

/// Composite midpoint rules used by [`KernelEstimate::evaluate`].
///
/// Space integrals involving kernel times `tau` are restricted to windows
/// of half-width `window * sqrt(tau)` around the supplied centers (outside
/// them every image term is below `exp(-window^2 / 4)`). Each window has
/// `space_nodes` midpoints, and where windows overlap the finest spacing
/// applies. Time integrals over `(0, L]` with an integrable `tau^{-1/2}`
/// singularity at 0 use a geometric partition with `time_nodes_per_decade`
/// cells per decade down to `L * 10^{-time_decades}`, and the first cell is
/// integrated exactly for that singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub space_nodes: usize,
    pub window: f64,
    pub time_nodes_per_decade: usize,
    pub time_decades: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            space_nodes: 400,
            window: 12.0,
            time_nodes_per_decade: 24,
            time_decades: 10,
        }
    }
}

impl Quadrature {
    fn space(&self, taus: &[f64], centers: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        let mut windows: Vec<(f64, f64, f64)> = Vec::with_capacity(taus.len() * centers.len());
        for &tau in taus {
            let half = self.window * tau.sqrt();
            let h = 2.0 * half / self.space_nodes as f64;
            for &c in centers {
                windows.push(((c - half).max(0.0), (c + half).min(1.0), h));
            }
        }
        let mut cuts: Vec<f64> = windows.iter().flat_map(|w| [w.0, w.1]).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|piece| {
                let (a, b) = (piece[0], piece[1]);
                let mid = 0.5 * (a + b);
                let h = windows
                    .iter()
                    .filter(|w| w.0 <= mid && mid <= w.1)
                    .map(|w| w.2)
                    .fold(f64::INFINITY, f64::min);
                if h.is_finite() {
                    midpoint(a, b, ((b - a) / h).ceil().max(1.0) as usize, &f)
                } else {
                    0.0
                }
            })
            .sum()
    }

    fn time(&self, len: f64, f: impl Fn(f64) -> f64) -> f64 {
        let per = self.time_nodes_per_decade.max(1);
        let cells = per * self.time_decades;
        let lowest = len * 10f64.powi(-(self.time_decades as i32));
        let mut total = 2.0 * lowest * f(lowest);
        let mut left = lowest;
        for i in 1..=cells {
            let right = if i == cells {
                len
            } else {
                lowest * 10f64.powf(i as f64 / per as f64)
            };
            total += (right - left) * f(0.5 * (left + right));
            left = right;
        }
        total
    }
}

fn midpoint(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn representations_agree_at_moderate_time() {
        let a = kernel_image_sum(0.1, 0.3, 0.7, 20).unwrap();
        let b = kernel_eigen_series(0.1, 0.3, 0.7, 200).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        let a = kernel_eigen_series(0.1, 0.5, 0.5, 200).unwrap();
        let b = kernel_image_sum(0.1, 0.5, 0.5, 20).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn image_sum_is_symmetric() {
        for &(t, x, y) in &[(0.003, 0.1, 0.35), (0.2, 0.9, 0.05), (1.5, 0.0, 1.0)] {
            let a = kernel_image_sum(t, x, y, 20).unwrap();
            let b = kernel_image_sum(t, y, x, 20).unwrap();
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }

    #[test]
    fn long_time_limit_is_one() {
        for &(x, y) in &[(0.0, 0.0), (0.2, 0.9), (1.0, 0.5)] {
            let v = kernel_eigen_series(5.0, x, y, 50).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mass_is_conserved() {
        let cells = 10_000;
        for &t in &[0.01, 0.1, 1.0] {
            for &x in &[0.0, 0.37, 1.0] {
                let h = 1.0 / cells as f64;
                let m: f64 = (0..cells)
                    .map(|j| kernel_image_sum(t, x, (j as f64 + 0.5) * h, 20).unwrap())
                    .sum::<f64>()
                    * h;
                assert!((m - 1.0).abs() < 1e-6, "t={t} x={x} mass={m}");
            }
        }
    }

    #[test]
    fn rejects_nonpositive_time() {
        assert!(kernel_image_sum(0.0, 0.2, 0.2, 20).is_err());
        assert!(kernel_eigen_series(-1.0, 0.2, 0.2, 20).is_err());
        assert!(kernel_image_sum(0.1, f64::NAN, 0.2, 20).is_err());
        assert!(KernelEval::new(KernelRepresentation::ImageSum, 0, 5).is_err());
    }

    #[test]
    fn default_modes_meet_tail_target() {
        for &t in &[0.01, 0.1, 1.0] {
            let k = default_modes(t) as f64;
            assert!((-(k * PI).powi(2) * t).exp() < EIGEN_TAIL);
            assert!((-((k - 1.0) * PI).powi(2) * t).exp() >= EIGEN_TAIL);
        }
    }

    #[test]
    fn gaussian_ratio_is_finite_and_positive_on_a_sweep() {
        let ts: Vec<f64> = (0..10).map(|i| 0.01 * 10f64.powf(i as f64 / 4.5)).collect();
        let xs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let (lo, hi) = gaussian_ratio_range(&ts, &xs, &xs).unwrap();
        assert!(lo > 0.0 && lo.is_finite());
        assert!(hi > 0.0 && hi.is_finite());
    }

    fn grid(n: usize, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_fn(n, f).unwrap()
    }

    #[test]
    fn semigroup_identity_and_constants() {
        let u = grid(64, |x| (3.0 * x).sin() + x * x);
        assert_eq!(semigroup_apply(0.0, &u).unwrap(), u);
        let one = GridFunction::constant(64, 1.0);
        let v = semigroup_apply(0.7, &one).unwrap();
        assert!(v.values().iter().all(|&c| (c - 1.0).abs() < 1e-14));
    }

    #[test]
    fn semigroup_decays_eigenfunction() {
        let u = grid(256, |x| (PI * x).cos());
        let v = semigroup_apply(0.2, &u).unwrap();
        let want = grid(256, |x| (-PI * PI * 0.2).exp() * (PI * x).cos());
        assert!(v.max_abs_diff(&want).unwrap() < 1e-10);
    }

    #[test]
    fn semigroup_rejects_negative_time() {
        let u = GridFunction::constant(8, 1.0);
        assert!(semigroup_apply(-0.1, &u).is_err());
    }

    #[test]
    fn semigroup_law() {
        let u = grid(100, |x| ((17.0 * x).sin() * 31.0).fract());
        assert!(semigroup_compose_check(0.1, 0.2, &u).unwrap() < 1e-10);
        assert!(semigroup_compose_check(0.0, 0.3, &u).unwrap() < 1e-14);
        let c = GridFunction::constant(100, 5.0);
        assert!(semigroup_compose_check(1.0, 1.0, &c).unwrap() < 1e-13);
    }

    #[test]
    fn estimate_argument_validation() {
        let q = Quadrature::default();
        let bad = KernelEstimate::SquareTail {
            s: 0.5,
            t: 0.4,
            x: 0.3,
        };
        assert!(bad.evaluate(&q).is_err());
        let bad = KernelEstimate::TimeIncrementFixed {
            s: 0.0,
            t: 0.4,
            x: 0.3,
        };
        assert!(bad.evaluate(&q).is_err());
    }

    #[test]
    fn space_increment_vanishes_on_diagonal() {
        let q = Quadrature::default();
        let v = KernelEstimate::SpaceIncrementTimeIntegrated {
            t: 0.5,
            x: 0.2,
            y: 0.2,
        }
        .evaluate(&q)
        .unwrap();
        assert_eq!(v, 0.0);
    }
}
