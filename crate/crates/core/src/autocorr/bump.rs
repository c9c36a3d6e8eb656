//! The smooth bump `c(x) = c0 * phi(x / eps)` with
//! `phi(y) = exp(|y|^2 / (|y|^2 - 1))` on the open unit ball, and its
//! autocorrelation `(c * c~)(y) = integral c(x) c(x - y) dx`.
//!
//! `c0` is fixed so that `|c|_2^2 = (c * c~)(0) = 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::{for_each_in_box, Lattice};

/// Panels of the composite Simpson rule used for radial integrals.
const RADIAL_PANELS: usize = 8192;

pub const DEFAULT_QUADRATURE_POINTS: usize = 64;

fn phi(s2: f64) -> f64 {
    if s2 < 1.0 {
        (s2 / (s2 - 1.0)).exp()
    } else {
        0.0
    }
}

/// Surface area of the unit sphere in R^n (n = 1 counts the two endpoints).
fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!("dimension capped at 3"),
    }
}

/// `S_{n-1} * integral_0^1 f(s) s^{n-1} ds` by composite Simpson.
fn radial_integral(dim: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = RADIAL_PANELS;
    let h = 1.0 / n as f64;
    let g = |s: f64| f(s) * s.powi(dim as i32 - 1);
    let mut acc = g(0.0) + g(1.0);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(i as f64 * h);
    }
    sphere_area(dim) * acc * h / 3.0
}

#[derive(Clone, Debug)]
pub struct BumpConfig {
    dim: usize,
    epsilon: f64,
    c0: f64,
    quadrature_points: usize,
    /// Midpoint nodes of `[-eps, eps]^n` with `c` evaluated there.
    nodes: Vec<([f64; 3], f64)>,
    cell_volume: f64,
}

impl BumpConfig {
    /// Bump of support radius `epsilon` for a lattice; `epsilon` may not
    /// exceed half the packing radius.
    pub fn new(lattice: &Lattice, epsilon: f64, quadrature_points: usize) -> Result<Self> {
        let limit = lattice.packing_radius() / 2.0;
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
        }
        if epsilon > limit {
            return Err(Error::EpsilonTooLarge { epsilon, limit });
        }
        Self::unchecked(lattice.dim(), epsilon, quadrature_points)
    }

    /// `epsilon = packing_radius / 4` with the default quadrature.
    pub fn for_lattice(lattice: &Lattice) -> Result<Self> {
        Self::new(lattice, lattice.packing_radius() / 4.0, DEFAULT_QUADRATURE_POINTS)
    }

    fn unchecked(dim: usize, epsilon: f64, quadrature_points: usize) -> Result<Self> {
        if quadrature_points < 2 {
            return Err(Error::InvalidParameter("need at least 2 quadrature points per axis".into()));
        }
        let phi_sq = radial_integral(dim, |s| phi(s * s).powi(2));
        let c0 = 1.0 / (epsilon.powi(dim as i32) * phi_sq).sqrt();
        let q = quadrature_points as i64;
        let h = 2.0 * epsilon / quadrature_points as f64;
        let mut nodes = Vec::new();
        for_each_in_box(&vec![0; dim], &vec![q - 1; dim], |m| {
            let mut x = [0.0; 3];
            for i in 0..dim {
                x[i] = -epsilon + (m[i] as f64 + 0.5) * h;
            }
            let s2: f64 = x.iter().map(|a| a * a).sum::<f64>() / (epsilon * epsilon);
            let c = c0 * phi(s2);
            if c > 0.0 {
                nodes.push((x, c));
            }
        });
        Ok(BumpConfig {
            dim,
            epsilon,
            c0,
            quadrature_points,
            nodes,
            cell_volume: h.powi(dim as i32),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Peak value `c(0)`.
    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points
    }

    pub(crate) fn check_lattice(&self, lattice: &Lattice) -> Result<()> {
        if lattice.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: lattice.dim(),
                actual: self.dim,
            });
        }
        let limit = lattice.packing_radius() / 2.0;
        if self.epsilon > limit {
            return Err(Error::EpsilonTooLarge {
                epsilon: self.epsilon,
                limit,
            });
        }
        Ok(())
    }

    /// `c(x)`; zero for `|x| >= eps`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let s2: f64 = x.iter().map(|a| a * a).sum::<f64>() / (self.epsilon * self.epsilon);
        self.c0 * phi(s2)
    }

    /// `(c * c~)(y)` by the tensor-product midpoint rule over the support box.
    pub fn autocorrelation_at(&self, y: &[f64]) -> f64 {
        let ny2: f64 = y.iter().map(|a| a * a).sum();
        if ny2 >= 4.0 * self.epsilon * self.epsilon {
            return 0.0;
        }
        let mut acc = 0.0;
        let mut shifted = [0.0; 3];
        for (x, cx) in &self.nodes {
            for i in 0..self.dim {
                shifted[i] = x[i] - y[i];
            }
            let c = self.eval(&shifted[..self.dim]);
            if c > 0.0 {
                acc += cx * c;
            }
        }
        acc * self.cell_volume
    }

    /// `|c|_2^2` as seen by the quadrature; should be 1.
    pub fn l2_norm_sq(&self) -> f64 {
        self.nodes.iter().map(|(_, c)| c * c).sum::<f64>() * self.cell_volume
    }

    /// `|c|_1`.
    pub fn l1_norm(&self) -> f64 {
        self.c0 * self.epsilon.powi(self.dim as i32) * radial_integral(self.dim, |s| phi(s * s))
    }

    /// `L_c = sup |grad c| = c0 / eps * sup_s |phi'(s)|`.
    pub fn lipschitz_constant(&self) -> f64 {
        let steps = 100_000;
        let sup = (1..steps)
            .map(|i| {
                let s = i as f64 / steps as f64;
                let d = s * s - 1.0;
                phi(s * s) * 2.0 * s / (d * d)
            })
            .fold(0.0, f64::max);
        self.c0 / self.epsilon * sup
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dim: usize) -> BumpConfig {
        BumpConfig::for_lattice(&Lattice::integer(dim).unwrap()).unwrap()
    }

    #[test]
    fn peak_and_support() {
        let c = cfg(2);
        let eps = c.epsilon();
        assert_eq!(eps, 0.125);
        assert_eq!(c.eval(&[0.0, 0.0]), c.c0());
        let half = c.eval(&[eps / 2.0, 0.0]) / c.c0();
        assert!((half - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!((half - 0.71653).abs() < 1e-5);
        assert_eq!(c.eval(&[eps, 0.0]), 0.0);
        assert_eq!(c.eval(&[0.0, 2.0 * eps]), 0.0);
    }

    #[test]
    fn normalized_in_every_dimension() {
        for dim in 1..=3 {
            let c = cfg(dim);
            assert!((c.l2_norm_sq() - 1.0).abs() < 1e-6, "dim {dim}: {}", c.l2_norm_sq());
            assert!((c.autocorrelation_at(&vec![0.0; dim]) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn autocorrelation_support_and_symmetry() {
        let c = cfg(2);
        let e = c.epsilon();
        assert_eq!(c.autocorrelation_at(&[2.0 * e, 0.0]), 0.0);
        let a = c.autocorrelation_at(&[0.3 * e, 0.1 * e]);
        let b = c.autocorrelation_at(&[-0.3 * e, -0.1 * e]);
        let rot = c.autocorrelation_at(&[0.1 * e, -0.3 * e]);
        assert!((a - b).abs() < 1e-12);
        assert!((a - rot).abs() < 1e-6);
        assert!(a < 1.0 && a > 0.0);
    }

    #[test]
    fn epsilon_bound_enforced() {
        let z2 = Lattice::integer(2).unwrap();
        assert!(matches!(
            BumpConfig::new(&z2, 0.26, 32).unwrap_err(),
            Error::EpsilonTooLarge { .. }
        ));
        assert!(BumpConfig::new(&z2, 0.25, 32).is_ok());
    }

    #[test]
    fn one_dimensional_constants() {
        // phi^2 integral on the line against a fine independent midpoint sum
        let n = 200_000;
        let direct: f64 = (0..n)
            .map(|i| {
                let y = -1.0 + (i as f64 + 0.5) * 2.0 / n as f64;
                phi(y * y).powi(2)
            })
            .sum::<f64>()
            * 2.0
            / n as f64;
        let simpson = radial_integral(1, |s| phi(s * s).powi(2));
        assert!((direct - simpson).abs() < 1e-10);
    }
}
