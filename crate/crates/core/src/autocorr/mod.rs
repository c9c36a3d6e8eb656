//! Finite-radius autocorrelation coefficients of a lattice comb.
//!
//! For a comb `omega_r` tabulated in `B_R(0)` and a window radius `r <= R`,
//! the coefficient at a lattice vector `z` is
//!
//! ```text
//! pair_in_window:  nu_r(z) = 1/vol(B_r) * sum_{t, t' in Gamma_r, t - t' = z} w(t) conj(w(t'))
//! single_window:   nu_r(z) = 1/vol(B_r) * sum_{t in Gamma_r} w(t) conj(w(t - z))
//! ```
//!
//! In the single-window sum `w(t - z)` is read from the full tabulated comb
//! (cutoff `R`) and is zero outside it. With `r = R` and `|z| > 0` the two
//! variants therefore coincide; tabulate the comb at `R >= r + |z|` to see
//! the surface gap between them.
//!
//! The pair variant is `omega_r * conj-reflected(omega_r) / vol`, a positive
//! definite measure at every finite `r`, so its Gram matrices are exactly
//! positive semidefinite.

mod bump;

pub use bump::BumpConfig;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::comb::{WeightRule, WeightedComb};
use crate::error::{Error, Result};
use crate::lattice::{ball_volume, check_increasing, Lattice, LatticeVector, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    /// Both points of each pair inside the window.
    #[default]
    PairInWindow,
    /// Only the first point inside the window.
    SingleWindow,
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pair" | "pair_in_window" => Ok(Variant::PairInWindow),
            "single" | "single_window" => Ok(Variant::SingleWindow),
            other => Err(Error::InvalidParameter(format!(
                "unknown variant `{other}` (expected pair|single)"
            ))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::PairInWindow => "pair",
            Variant::SingleWindow => "single",
        })
    }
}

/// Weights laid out on a dense coordinate box for O(1) lookup.
pub(crate) struct DenseWeights {
    dim: usize,
    lo: [i64; MAX_DIM],
    extent: [i64; MAX_DIM],
    data: Vec<Complex64>,
}

impl DenseWeights {
    pub(crate) fn new<'a>(dim: usize, entries: impl Iterator<Item = (&'a LatticeVector, &'a Complex64)> + Clone) -> Self {
        let mut lo = [0i64; MAX_DIM];
        let mut hi = [-1i64; MAX_DIM];
        let mut first = true;
        for (v, _) in entries.clone() {
            let c = v.raw();
            for i in 0..dim {
                if first {
                    lo[i] = c[i];
                    hi[i] = c[i];
                } else {
                    lo[i] = lo[i].min(c[i]);
                    hi[i] = hi[i].max(c[i]);
                }
            }
            first = false;
        }
        let mut extent = [1i64; MAX_DIM];
        for i in 0..dim {
            extent[i] = (hi[i] - lo[i] + 1).max(0);
        }
        let size: i64 = extent[..dim].iter().product();
        let mut dense = DenseWeights {
            dim,
            lo,
            extent,
            data: vec![Complex64::default(); size.max(0) as usize],
        };
        for (v, w) in entries {
            let idx = dense.index(v).expect("inside bounding box");
            dense.data[idx] = *w;
        }
        dense
    }

    fn index(&self, v: &LatticeVector) -> Option<usize> {
        let c = v.raw();
        let mut idx: i64 = 0;
        for i in 0..self.dim {
            let off = c[i] - self.lo[i];
            if off < 0 || off >= self.extent[i] {
                return None;
            }
            idx = idx * self.extent[i] + off;
        }
        Some(idx as usize)
    }

    pub(crate) fn get(&self, v: &LatticeVector) -> Complex64 {
        self.index(v).map(|i| self.data[i]).unwrap_or_default()
    }
}

/// Precomputed window data shared by all coefficients of one table.
struct Window {
    volume: f64,
    inside: Vec<(LatticeVector, Complex64)>,
    partner: DenseWeights,
}

impl Window {
    fn new(comb: &WeightedComb, radius: f64, variant: Variant) -> Result<Self> {
        if !(radius > 0.0) || radius > comb.cutoff_radius() {
            return Err(Error::InvalidParameter(format!(
                "window radius {radius} must lie in (0, {}]",
                comb.cutoff_radius()
            )));
        }
        let lat = comb.lattice();
        let r2 = radius * radius;
        let inside: Vec<(LatticeVector, Complex64)> = comb
            .iter()
            .filter(|(v, _)| lat.cartesian(v).iter().map(|a| a * a).sum::<f64>() < r2)
            .map(|(v, w)| (*v, *w))
            .collect();
        let partner = match variant {
            Variant::PairInWindow => DenseWeights::new(comb.dim(), inside.iter().map(|(v, w)| (v, w))),
            Variant::SingleWindow => DenseWeights::new(comb.dim(), comb.weights().iter()),
        };
        Ok(Window {
            volume: ball_volume(comb.dim(), radius),
            inside,
            partner,
        })
    }

    fn coefficient(&self, z: &LatticeVector) -> Complex64 {
        if z.is_zero() {
            // |w|^2 summed directly keeps nu(0) real and nonnegative
            let s: f64 = self.inside.iter().map(|(_, w)| w.norm_sqr()).sum();
            return Complex64::new(s / self.volume, 0.0);
        }
        let mut acc = Complex64::default();
        for (t, w) in &self.inside {
            let partner = self.partner.get(&(*t - *z));
            acc += w * partner.conj();
        }
        acc / self.volume
    }
}

/// `z -> nu_r(z)` for all lattice vectors with `|z| <= z_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct AutocorrTable {
    dim: usize,
    radius: f64,
    z_max: f64,
    variant: Variant,
    /// `|Gamma_r| / vol(B_r)` for the window.
    count_ratio: f64,
    weight_bound: f64,
    entries: BTreeMap<LatticeVector, Complex64>,
}

/// Autocorrelation table with the window equal to the comb's cutoff ball.
pub fn autocorrelation(comb: &WeightedComb, z_max: f64, variant: Variant) -> Result<AutocorrTable> {
    autocorrelation_in_window(comb, comb.cutoff_radius(), z_max, variant)
}

/// Autocorrelation table over the window `B_window(0)` of a comb tabulated
/// on a ball at least as large.
pub fn autocorrelation_in_window(
    comb: &WeightedComb,
    window: f64,
    z_max: f64,
    variant: Variant,
) -> Result<AutocorrTable> {
    let limit = 2.0 * comb.cutoff_radius();
    if !(z_max >= 0.0) || z_max > limit {
        return Err(Error::ZRangeExceedsData { z_max, limit });
    }
    let win = Window::new(comb, window, variant)?;
    let lat = comb.lattice();
    let zs: Vec<LatticeVector> = lat
        .enumerate_closed_ball(z_max.max(f64::MIN_POSITIVE))?
        .into_iter()
        .filter(|z| *z >= -*z)
        .collect();
    let values: Vec<Complex64> = zs.par_iter().map(|z| win.coefficient(z)).collect();
    let mut entries = BTreeMap::new();
    for (z, v) in zs.into_iter().zip(values) {
        entries.insert(z, v);
        entries.insert(-z, v.conj());
    }
    let mut count = 0usize;
    lat.visit_ball(window, &vec![0.0; lat.dim()], false, crate::lattice::DEFAULT_BALL_CAP, |_, _| {
        count += 1
    })?;
    Ok(AutocorrTable {
        dim: lat.dim(),
        radius: window,
        z_max,
        variant,
        count_ratio: count as f64 / win.volume,
        weight_bound: comb.weight_bound(),
        entries,
    })
}

/// A single coefficient `nu_r(z)` over the window `B_window(0)`.
pub fn coefficient(
    comb: &WeightedComb,
    window: f64,
    z: &LatticeVector,
    variant: Variant,
) -> Result<Complex64> {
    let win = Window::new(comb, window, variant)?;
    Ok(win.coefficient(z))
}

/// `|nu_pair - nu_single|` at `z` for each window radius in `radii`.
///
/// The comb should be tabulated at a cutoff of at least `max(radii) + |z|`
/// for the single-window sums to be untruncated.
pub fn variant_gap(comb: &WeightedComb, z: &LatticeVector, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    check_increasing(radii, "radii")?;
    radii
        .iter()
        .map(|&r| {
            let pair = coefficient(comb, r, z, Variant::PairInWindow)?;
            let single = coefficient(comb, r, z, Variant::SingleWindow)?;
            Ok((r, (pair - single).norm()))
        })
        .collect()
}

/// Regenerates the comb at every radius and reports `nu_r(z)` (pair variant).
pub fn convergence_scan(
    rule: &WeightRule,
    lattice: &Lattice,
    z: &LatticeVector,
    radii: &[f64],
) -> Result<Vec<(f64, Complex64)>> {
    check_increasing(radii, "radii")?;
    radii
        .iter()
        .map(|&r| {
            let comb = WeightedComb::generate(rule, lattice, r)?;
            Ok((r, coefficient(&comb, r, z, Variant::PairInWindow)?))
        })
        .collect()
}

impl AutocorrTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Window radius `r`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// `|Gamma_r| / vol(B_r)` of the window.
    pub fn count_ratio(&self) -> f64 {
        self.count_ratio
    }

    /// `W = max |w|` of the comb the table was computed from.
    pub fn weight_bound(&self) -> f64 {
        self.weight_bound
    }

    pub fn get(&self, z: &LatticeVector) -> Option<Complex64> {
        self.entries.get(z).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LatticeVector, &Complex64)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The hermitian matrix `[nu(z_i - z_j)]`.
    pub fn gram_matrix(&self, zs: &[LatticeVector]) -> Result<DMatrix<Complex64>> {
        let m = zs.len();
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                let d = zs[i] - zs[j];
                out[(i, j)] = self
                    .get(&d)
                    .ok_or_else(|| Error::NotTabulated(d.display(self.dim)))?;
            }
        }
        Ok(out)
    }

    /// Smallest eigenvalue of [`gram_matrix`](Self::gram_matrix).
    pub fn min_gram_eigenvalue(&self, zs: &[LatticeVector]) -> Result<f64> {
        let g = self.gram_matrix(zs)?;
        if g.is_empty() {
            return Ok(0.0);
        }
        let eig = SymmetricEigen::new(g);
        Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

/// `g_r(x)`: the autocorrelation smoothed by `c * c~`.
///
/// With `eps` at most half the packing radius the supports of the shifted
/// `c * c~` bumps (radius `2 eps`) are disjoint, so only the lattice vector
/// closest to `x` contributes and `g_r(x) = nu_r(z0) (c * c~)(x - z0)`.
pub fn regularized_autocorr(comb: &WeightedComb, cfg: &BumpConfig, x: &[f64]) -> Result<Complex64> {
    let lat = comb.lattice();
    cfg.check_lattice(lat)?;
    let (z0, d2) = lat.closest_vector(x);
    if d2.sqrt() >= 2.0 * cfg.epsilon() {
        return Ok(Complex64::default());
    }
    let nu = coefficient(comb, comb.cutoff_radius(), &z0, Variant::PairInWindow)?;
    Ok(nu * cfg.autocorrelation_at(&offset(x, &lat.cartesian(&z0))))
}

/// Same as [`regularized_autocorr`], reading `nu_r` from a precomputed table.
pub fn regularized_from_table(
    table: &AutocorrTable,
    lattice: &Lattice,
    cfg: &BumpConfig,
    x: &[f64],
) -> Result<Complex64> {
    cfg.check_lattice(lattice)?;
    let (z0, d2) = lattice.closest_vector(x);
    if d2.sqrt() >= 2.0 * cfg.epsilon() {
        return Ok(Complex64::default());
    }
    let nu = table
        .get(&z0)
        .ok_or_else(|| Error::NotTabulated(z0.display(lattice.dim())))?;
    Ok(nu * cfg.autocorrelation_at(&offset(x, &lattice.cartesian(&z0))))
}

/// Lipschitz bound `|Gamma_r|/vol * W^2 * |c|_1 * L_c` for `g_r`.
pub fn regularized_lipschitz_bound(table: &AutocorrTable, cfg: &BumpConfig) -> f64 {
    table.count_ratio() * table.weight_bound().powi(2) * cfg.l1_norm() * cfg.lipschitz_constant()
}

fn offset(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}
