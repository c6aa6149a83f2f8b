//! Lotka-Volterra competition coefficients, the two-species state, and the
//! (radially truncated) reaction term.
//!
//! With `w = (u, v)` the reaction is
//!
//! ```text
//! F1(x, u, v) = u (m1(x) - a1(x) u - b1(x) v)
//! F2(x, u, v) = v (m2(x) - a2(x) v - b2(x) u)
//! ```
//!
//! and the truncated reaction `F_n` evaluates `F` at `n w / |w|` whenever
//! `|w| > n`, which makes it globally Lipschitz.
//!
//! The positive-part modification `F(x, u v 0, v v 0)` used for stationary
//! analysis coincides with `F` on nonnegative states. The solvers keep states
//! nonnegative, so it is not implemented separately.

use crate::error::{Error, Result};
use crate::grid::GridFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Species {
    U,
    V,
}

impl Species {
    pub const BOTH: [Species; 2] = [Species::U, Species::V];

    pub fn index(self) -> usize {
        match self {
            Species::U => 0,
            Species::V => 1,
        }
    }
}

/// Per-cell samples of the eight coefficient functions.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub m1: GridFunction,
    pub m2: GridFunction,
    pub a1: GridFunction,
    pub a2: GridFunction,
    pub b1: GridFunction,
    pub b2: GridFunction,
    pub sigma1: GridFunction,
    pub sigma2: GridFunction,
}

/// Spatially constant coefficient values.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UniformCoefficients {
    pub m1: f64,
    pub m2: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl CoefficientSet {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m1: GridFunction,
        m2: GridFunction,
        a1: GridFunction,
        a2: GridFunction,
        b1: GridFunction,
        b2: GridFunction,
        sigma1: GridFunction,
        sigma2: GridFunction,
    ) -> Result<Self> {
        let set = Self {
            m1,
            m2,
            a1,
            a2,
            b1,
            b2,
            sigma1,
            sigma2,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn uniform(n: usize, c: UniformCoefficients) -> Result<Self> {
        let g = |v| GridFunction::constant(n, v);
        Self::new(
            g(c.m1),
            g(c.m2),
            g(c.a1),
            g(c.a2),
            g(c.b1),
            g(c.b2),
            g(c.sigma1),
            g(c.sigma2),
        )
    }

    fn named(&self) -> [(&'static str, &GridFunction); 8] {
        [
            ("m1", &self.m1),
            ("m2", &self.m2),
            ("a1", &self.a1),
            ("a2", &self.a2),
            ("b1", &self.b1),
            ("b2", &self.b2),
            ("sigma1", &self.sigma1),
            ("sigma2", &self.sigma2),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.m1.len();
        for (name, g) in self.named() {
            if g.len() != n {
                return Err(Error::GridMismatch {
                    expected: n,
                    found: g.len(),
                });
            }
            if name.starts_with("sigma") {
                continue;
            }
            if let Some(j) = g.values().iter().position(|&v| v < 0.0) {
                return Err(Error::domain(format!(
                    "coefficient {name} is negative at cell {j} ({})",
                    g.values()[j]
                )));
            }
        }
        Ok(())
    }

    pub fn grid_size(&self) -> usize {
        self.m1.len()
    }

    pub fn growth(&self, s: Species) -> &GridFunction {
        match s {
            Species::U => &self.m1,
            Species::V => &self.m2,
        }
    }

    pub fn sigma(&self, s: Species) -> &GridFunction {
        match s {
            Species::U => &self.sigma1,
            Species::V => &self.sigma2,
        }
    }

    pub fn self_limitation(&self, s: Species) -> &GridFunction {
        match s {
            Species::U => &self.a1,
            Species::V => &self.a2,
        }
    }

    /// `sup m_i - inf sigma_i^2 / 2`, the exponential rate bounding the
    /// expected log-mass of species `s`.
    pub fn extinction_rate(&self, s: Species) -> f64 {
        let sup_m = self.growth(s).max();
        let inf_sigma2 = self
            .sigma(s)
            .values()
            .iter()
            .map(|v| v * v)
            .fold(f64::INFINITY, f64::min);
        sup_m - 0.5 * inf_sigma2
    }

    /// Bound on the Lipschitz constant of `F_n` (max row sum of the Jacobian
    /// over the closed ball of radius `n`, maximized over cells).
    pub fn lipschitz_bound(&self, radius: TruncationRadius) -> f64 {
        let n = radius.get();
        (0..self.grid_size())
            .map(|j| {
                let r1 = self.m1.values()[j]
                    + 2.0 * self.a1.values()[j] * n
                    + 2.0 * self.b1.values()[j] * n;
                let r2 = self.m2.values()[j]
                    + 2.0 * self.a2.values()[j] * n
                    + 2.0 * self.b2.values()[j] * n;
                r1.max(r2)
            })
            .fold(0.0, f64::max)
    }

    /// Upper bound of `|F(x, w)|` over `|w| <= n`, maximized over cells.
    pub fn drift_magnitude_bound(&self, radius: TruncationRadius) -> f64 {
        let n = radius.get();
        (0..self.grid_size())
            .map(|j| {
                let f1 =
                    n * (self.m1.values()[j] + (self.a1.values()[j] + self.b1.values()[j]) * n);
                let f2 =
                    n * (self.m2.values()[j] + (self.a2.values()[j] + self.b2.values()[j]) * n);
                f1.hypot(f2)
            })
            .fold(0.0, f64::max)
    }

    /// Reaction at cell `j` for state `(u, v)`.
    #[inline]
    pub fn reaction_at(&self, j: usize, u: f64, v: f64) -> (f64, f64) {
        let f1 = u * (self.m1.values()[j] - self.a1.values()[j] * u - self.b1.values()[j] * v);
        let f2 = v * (self.m2.values()[j] - self.a2.values()[j] * v - self.b2.values()[j] * u);
        (f1, f2)
    }

    /// Truncated reaction at cell `j`.
    #[inline]
    pub fn truncated_reaction_at(&self, j: usize, u: f64, v: f64, n: f64) -> (f64, f64) {
        let r = u.hypot(v);
        if r <= n {
            self.reaction_at(j, u, v)
        } else {
            let s = n / r;
            self.reaction_at(j, s * u, s * v)
        }
    }

    /// Fills `fu`, `fv` with the truncated reaction of the state `(u, v)`.
    pub fn fill_truncated_reaction(
        &self,
        u: &[f64],
        v: &[f64],
        radius: TruncationRadius,
        fu: &mut [f64],
        fv: &mut [f64],
    ) {
        let n = radius.get();
        for j in 0..u.len() {
            let (a, b) = self.truncated_reaction_at(j, u[j], v[j], n);
            fu[j] = a;
            fv[j] = b;
        }
    }
}

/// Two-species state at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub u: GridFunction,
    pub v: GridFunction,
    pub time: f64,
}

impl Field {
    pub fn new(u: GridFunction, v: GridFunction, time: f64) -> Result<Self> {
        u.ensure_same_grid(&v)?;
        Ok(Self { u, v, time })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            u: GridFunction::zeros(n),
            v: GridFunction::zeros(n),
            time: 0.0,
        }
    }

    pub fn grid_size(&self) -> usize {
        self.u.len()
    }

    pub fn component(&self, s: Species) -> &GridFunction {
        match s {
            Species::U => &self.u,
            Species::V => &self.v,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.u.min() >= 0.0 && self.v.min() >= 0.0
    }
}

/// Ball radius `n` of the truncated reaction.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TruncationRadius(f64);

impl TruncationRadius {
    pub fn new(n: f64) -> Result<Self> {
        if n > 0.0 && n.is_finite() {
            Ok(Self(n))
        } else {
            Err(Error::domain(format!(
                "truncation radius must be positive, got {n}"
            )))
        }
    }

    /// `10 * (1 + sup_norm(init))`.
    pub fn default_for(init: &Field) -> Self {
        Self(10.0 * (1.0 + sup_norm(init)))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

pub fn drift(field: &Field, coeffs: &CoefficientSet) -> Result<(GridFunction, GridFunction)> {
    apply_pointwise(field, coeffs, |j, u, v| coeffs.reaction_at(j, u, v))
}

pub fn truncated_drift(
    field: &Field,
    coeffs: &CoefficientSet,
    radius: TruncationRadius,
) -> Result<(GridFunction, GridFunction)> {
    let n = radius.get();
    apply_pointwise(field, coeffs, |j, u, v| {
        coeffs.truncated_reaction_at(j, u, v, n)
    })
}

fn apply_pointwise(
    field: &Field,
    coeffs: &CoefficientSet,
    f: impl Fn(usize, f64, f64) -> (f64, f64),
) -> Result<(GridFunction, GridFunction)> {
    crate::error::check_grid(coeffs.grid_size(), field.grid_size())?;
    let (fu, fv): (Vec<f64>, Vec<f64>) = field
        .u
        .values()
        .iter()
        .zip(field.v.values())
        .enumerate()
        .map(|(j, (&u, &v))| f(j, u, v))
        .unzip();
    Ok((GridFunction::new(fu)?, GridFunction::new(fv)?))
}

/// `max_j sqrt(U_j^2 + V_j^2)`.
pub fn sup_norm(field: &Field) -> f64 {
    sup_norm_of(field.u.values(), field.v.values())
}

pub fn sup_norm_of(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| a.hypot(*b))
        .fold(0.0, f64::max)
}

/// Midpoint-rule integral of one component.
pub fn mass(component: &GridFunction) -> f64 {
    component.integral()
}

/// True once the state has reached the truncation sphere.
pub fn exit_time_probe(field: &Field, radius: TruncationRadius) -> bool {
    sup_norm(field) >= radius.get()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(n: usize) -> CoefficientSet {
        CoefficientSet::uniform(
            n,
            UniformCoefficients {
                m1: 1.0,
                m2: 0.8,
                a1: 2.0,
                a2: 1.0,
                b1: 0.5,
                b2: 0.3,
                sigma1: 0.4,
                sigma2: 0.2,
            },
        )
        .unwrap()
    }

    fn field(u: f64, v: f64, n: usize) -> Field {
        Field::new(
            GridFunction::constant(n, u),
            GridFunction::constant(n, v),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn drift_of_zero_is_zero() {
        let (fu, fv) = drift(&Field::zeros(5), &coeffs(5)).unwrap();
        assert!(fu.values().iter().chain(fv.values()).all(|&v| v == 0.0));
    }

    #[test]
    fn drift_of_constants() {
        let (fu, fv) = drift(&field(0.3, 0.2, 4), &coeffs(4)).unwrap();
        let want_u = 0.3 * (1.0 - 2.0 * 0.3 - 0.5 * 0.2);
        let want_v = 0.2 * (0.8 - 1.0 * 0.2 - 0.3 * 0.3);
        assert!(fu.values().iter().all(|&v| (v - want_u).abs() < 1e-15));
        assert!(fv.values().iter().all(|&v| (v - want_v).abs() < 1e-15));
    }

    #[test]
    fn carrying_capacity_is_an_equilibrium() {
        let c = coeffs(4);
        let (fu, _) = drift(&field(0.5, 0.0, 4), &c).unwrap();
        assert!(fu.values().iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn truncation_inside_and_outside_the_ball() {
        let c = coeffs(3);
        let r = TruncationRadius::new(2.0).unwrap();
        let inside = field(0.6, 0.8, 3);
        assert_eq!(
            truncated_drift(&inside, &c, r).unwrap(),
            drift(&inside, &c).unwrap()
        );
        let outside = field(4.0, 0.0, 3);
        let (fu, fv) = truncated_drift(&outside, &c, r).unwrap();
        let (gu, gv) = drift(&field(2.0, 0.0, 3), &c).unwrap();
        assert_eq!((fu, fv), (gu, gv));
    }

    #[test]
    fn truncation_is_continuous_across_the_sphere() {
        let c = coeffs(1);
        let n = 3.0;
        let dir = (0.6, 0.8);
        let at = |r: f64| c.truncated_reaction_at(0, r * dir.0, r * dir.1, n);
        let (a1, a2) = at(n * (1.0 - 1e-9));
        let (b1, b2) = at(n * (1.0 + 1e-9));
        let lip = c.lipschitz_bound(TruncationRadius::new(n).unwrap());
        assert!((a1 - b1).hypot(a2 - b2) < 1e-6 * lip);
    }

    #[test]
    fn sup_norm_examples() {
        assert_eq!(sup_norm(&Field::zeros(4)), 0.0);
        assert_eq!(sup_norm(&field(3.0, 4.0, 4)), 5.0);
        let mut u = GridFunction::zeros(6);
        u.values_mut()[2] = 7.0;
        let f = Field::new(u, GridFunction::zeros(6), 0.0).unwrap();
        assert_eq!(sup_norm(&f), 7.0);
    }

    #[test]
    fn mass_examples() {
        assert!((mass(&GridFunction::constant(10, 2.5)) - 2.5).abs() < 1e-15);
        let c = GridFunction::from_fn(64, |x| (2.0 * std::f64::consts::PI * x).cos()).unwrap();
        assert!(mass(&c).abs() < 1e-12);
        let lin = GridFunction::from_fn(256, |x| x).unwrap();
        assert!((mass(&lin) - 0.5).abs() < 1e-5);
    }

    #[test]
    fn exit_probe() {
        let r = TruncationRadius::new(2.0).unwrap();
        assert!(!exit_time_probe(&Field::zeros(3), r));
        assert!(exit_time_probe(&field(2.0, 0.0, 3), r));
        let f = field(1.5, 1.5, 3);
        for n in [0.5, 1.0, 2.0, 2.1] {
            let hit = exit_time_probe(&f, TruncationRadius::new(n).unwrap());
            assert_eq!(hit, n <= sup_norm(&f));
        }
    }

    #[test]
    fn rejects_negative_coefficients() {
        let mut c = coeffs(3);
        c.b2.values_mut()[1] = -0.1;
        assert!(c.validate().is_err());
        assert!(TruncationRadius::new(0.0).is_err());
    }

    #[test]
    fn extinction_rate_uses_extrema() {
        let mut c = coeffs(3);
        c.m1.values_mut()[0] = 1.3;
        c.sigma1.values_mut()[2] = 0.1;
        assert!((c.extinction_rate(Species::U) - (1.3 - 0.005)).abs() < 1e-15);
    }
}
