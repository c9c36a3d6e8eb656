//! Dual-space side: exponential sums, the intensity approximant, Bragg
//! amplitudes at dual lattice points, fundamental-domain grids and the
//! relations between a lattice subset and its complement.
//!
//! Transform convention: `S_r(k) = sum_t w(t) exp(-2 pi i k.t)`, so the
//! characters are trivial on the lattice exactly when `k` lies in the dual
//! lattice. The intensity `D_r(k) = |S_r(k)|^2 / vol(B_r)` is the density of
//! the Fourier transform of `omega_r * conj-reflected(omega_r) / vol(B_r)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::autocorr::{coefficient, Variant};
use crate::comb::{WeightRule, WeightedComb};
use crate::error::{Error, Result};
use crate::lattice::{
    check_increasing, for_each_in_box, DomainMode, FundamentalDomain, Lattice, LatticeVector, MAX_DIM,
};

/// Dual coordinates closer than this to an integer are snapped to it.
const PHASE_SNAP: f64 = 1e-11;

/// Tolerance for recognizing a dual lattice point.
pub const DUAL_POINT_TOL: f64 = 1e-9;

/// Sparse comb data laid out for repeated exponential sums.
struct Spectrum {
    dim: usize,
    /// Rows of `B^T`: phase of point m at k is `sum_i m_i (B^T k)_i`.
    basis_t: Vec<[f64; MAX_DIM]>,
    entries: Vec<([i64; MAX_DIM], Complex64)>,
    lo: [i64; MAX_DIM],
    hi: [i64; MAX_DIM],
}

impl Spectrum {
    fn new(comb: &WeightedComb) -> Self {
        let dim = comb.dim();
        let b = comb.lattice().basis();
        let basis_t = (0..dim)
            .map(|j| {
                let mut row = [0.0; MAX_DIM];
                for (i, r) in row.iter_mut().enumerate().take(dim) {
                    *r = b[(i, j)];
                }
                row
            })
            .collect();
        let mut lo = [0i64; MAX_DIM];
        let mut hi = [0i64; MAX_DIM];
        let entries: Vec<_> = comb.iter().map(|(v, w)| (v.raw(), *w)).collect();
        for (c, _) in &entries {
            for i in 0..dim {
                lo[i] = lo[i].min(c[i]);
                hi[i] = hi[i].max(c[i]);
            }
        }
        Spectrum {
            dim,
            basis_t,
            entries,
            lo,
            hi,
        }
    }

    /// `B^T k` reduced into `[-1/2, 1/2]`, with near-integers snapped to 0.
    fn reduced_dual_coords(&self, k: &[f64]) -> [f64; MAX_DIM] {
        let mut kappa = [0.0; MAX_DIM];
        for j in 0..self.dim {
            let c: f64 = (0..self.dim).map(|i| self.basis_t[j][i] * k[i]).sum();
            let f = c - c.round();
            kappa[j] = if f.abs() <= PHASE_SNAP * c.abs().max(1.0) { 0.0 } else { f };
        }
        kappa
    }

    fn sum(&self, k: &[f64]) -> Complex64 {
        let kappa = self.reduced_dual_coords(k);
        // per-axis character tables exp(-2 pi i m kappa_j)
        let tables: Vec<Vec<Complex64>> = (0..self.dim)
            .map(|j| {
                (self.lo[j]..=self.hi[j])
                    .map(|m| {
                        let theta = (m as f64 * kappa[j]).rem_euclid(1.0);
                        let (s, c) = (2.0 * PI * theta).sin_cos();
                        Complex64::new(c, -s)
                    })
                    .collect()
            })
            .collect();
        let mut acc = Complex64::default();
        for (c, w) in &self.entries {
            let mut e = tables[0][(c[0] - self.lo[0]) as usize];
            for j in 1..self.dim {
                e *= tables[j][(c[j] - self.lo[j]) as usize];
            }
            acc += w * e;
        }
        acc
    }
}

fn check_point(comb: &WeightedComb, k: &[f64]) -> Result<()> {
    if k.len() != comb.dim() {
        return Err(Error::DimensionMismatch {
            expected: comb.dim(),
            actual: k.len(),
        });
    }
    Ok(())
}

/// `S_r(k) = sum_t w(t) exp(-2 pi i k.t)`.
pub fn exp_sum(comb: &WeightedComb, k: &[f64]) -> Result<Complex64> {
    check_point(comb, k)?;
    Ok(Spectrum::new(comb).sum(k))
}

/// `D_r(k) = |S_r(k)|^2 / vol(B_r)`.
pub fn intensity(comb: &WeightedComb, k: &[f64]) -> Result<f64> {
    Ok(exp_sum(comb, k)?.norm_sqr() / comb.ball_volume())
}

/// Intensities at many points, evaluated in parallel, returned in input order.
pub fn intensities(comb: &WeightedComb, ks: &[Vec<f64>]) -> Result<Vec<f64>> {
    for k in ks {
        check_point(comb, k)?;
    }
    let spec = Spectrum::new(comb);
    let vol = comb.ball_volume();
    Ok(ks.par_iter().map(|k| spec.sum(k).norm_sqr() / vol).collect())
}

/// `|h^(k)|^2 D_r(k)` for a unit-mass Gaussian profile of width `sigma`,
/// `h^(k) = exp(-2 pi^2 sigma^2 |k|^2)`.
pub fn profiled_intensity(comb: &WeightedComb, k: &[f64], sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("profile width must be positive, got {sigma}")));
    }
    let k2: f64 = k.iter().map(|a| a * a).sum();
    let h = (-2.0 * PI * PI * sigma * sigma * k2).exp();
    Ok(h * h * intensity(comb, k)?)
}

/// Integer dual-basis coordinates of `k`, if it is a dual lattice point.
pub fn dual_lattice_coords(lattice: &Lattice, k: &[f64]) -> Result<LatticeVector> {
    if k.len() != lattice.dim() {
        return Err(Error::DimensionMismatch {
            expected: lattice.dim(),
            actual: k.len(),
        });
    }
    // dual basis is B^{-T}, so dual coordinates are B^T k
    let b = lattice.basis();
    let n = lattice.dim();
    let mut coords = Vec::with_capacity(n);
    let mut worst = 0.0_f64;
    for j in 0..n {
        let c: f64 = (0..n).map(|i| b[(i, j)] * k[i]).sum();
        worst = worst.max((c - c.round()).abs());
        coords.push(c.round() as i64);
    }
    if worst > DUAL_POINT_TOL {
        let parts: Vec<String> = k.iter().map(|x| x.to_string()).collect();
        return Err(Error::NotADualLatticePoint(format!("({})", parts.join(", ")), worst));
    }
    Ok(LatticeVector::new(&coords))
}

/// `A_r(k*) = |S_r(k*) / vol(B_r)|^2` for a comb and a dual lattice point
/// given by its dual-basis coordinates.
pub fn bragg_estimate(comb: &WeightedComb, kstar: &LatticeVector) -> Result<f64> {
    let dual = comb.lattice().dual();
    let k = dual.cartesian(kstar);
    let s = Spectrum::new(comb).sum(&k);
    Ok((s / comb.ball_volume()).norm_sqr())
}

/// Ladder of Bragg amplitude estimates at one dual lattice point.
#[derive(Clone, Debug, PartialEq)]
pub struct BraggEntry {
    /// Dual-basis coordinates of `k*`.
    pub kstar: LatticeVector,
    pub ladder: Vec<(f64, f64)>,
    /// Value at the largest radius.
    pub extrapolated: Option<f64>,
    /// Change between the last two radii.
    pub trend: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BraggTable {
    pub entries: BTreeMap<LatticeVector, BraggEntry>,
}

impl BraggTable {
    pub fn insert(&mut self, entry: BraggEntry) {
        self.entries.insert(entry.kstar, entry);
    }

    pub fn get(&self, kstar: &LatticeVector) -> Option<&BraggEntry> {
        self.entries.get(kstar)
    }
}

/// Regenerates the comb at every radius and records `A_r(k*)`.
/// `kstar` is a Cartesian point that must lie in the dual lattice.
pub fn bragg_amplitude(rule: &WeightRule, lattice: &Lattice, kstar: &[f64], radii: &[f64]) -> Result<BraggEntry> {
    let coords = dual_lattice_coords(lattice, kstar)?;
    bragg_amplitude_at(rule, lattice, &coords, radii)
}

/// As [`bragg_amplitude`], with `k*` given by dual-basis coordinates.
pub fn bragg_amplitude_at(
    rule: &WeightRule,
    lattice: &Lattice,
    kstar: &LatticeVector,
    radii: &[f64],
) -> Result<BraggEntry> {
    check_increasing(radii, "radii")?;
    let ladder = radii
        .iter()
        .map(|&r| {
            let comb = WeightedComb::generate(rule, lattice, r)?;
            Ok((r, bragg_estimate(&comb, kstar)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let extrapolated = ladder.last().map(|(_, a)| *a);
    let trend = match ladder.as_slice() {
        [.., (_, a), (_, b)] => Some(b - a),
        _ => None,
    };
    Ok(BraggEntry {
        kstar: *kstar,
        ladder,
        extrapolated,
        trend,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSample {
    /// Point reduced into the fundamental domain of the dual lattice.
    pub k: Vec<f64>,
    pub intensity: f64,
    /// Within the flag radius of a dual lattice point.
    pub bragg: bool,
}

/// Sampled `D_r` over a fundamental domain of the dual lattice.
#[derive(Clone, Debug)]
pub struct DiffractionGrid {
    pub radius: f64,
    pub flag_radius: f64,
    pub domain: FundamentalDomain,
    pub samples: Vec<GridSample>,
}

impl DiffractionGrid {
    pub fn mean_intensity(&self) -> f64 {
        self.samples.iter().map(|s| s.intensity).sum::<f64>() / self.samples.len() as f64
    }

    /// Mean over samples without the Bragg flag.
    pub fn mean_off_bragg(&self) -> f64 {
        let (sum, n) = self
            .samples
            .iter()
            .filter(|s| !s.bragg)
            .fold((0.0, 0usize), |(s, n), x| (s + x.intensity, n + 1));
        sum / n as f64
    }
}

/// `n^d` points `B* (i / n)` of the dual basis cell, reduced into the chosen
/// fundamental domain of the dual lattice.
pub fn uniform_dual_grid(lattice: &Lattice, n_per_axis: usize, mode: DomainMode) -> (FundamentalDomain, Vec<Vec<f64>>) {
    let dual = lattice.dual();
    let dim = dual.dim();
    let domain = FundamentalDomain::new(dual, mode);
    let n = n_per_axis as i64;
    let mut points = Vec::new();
    let basis = domain.lattice.basis().clone();
    for_each_in_box(&vec![0; dim], &vec![n - 1; dim], |m| {
        let k: Vec<f64> = (0..dim)
            .map(|i| (0..dim).map(|j| basis[(i, j)] * m[j] as f64 / n as f64).sum())
            .collect();
        points.push(domain.reduce(&k));
    });
    (domain, points)
}

/// Samples `D_r` on `grid`, flagging points within `1/r` of the dual lattice.
pub fn diffraction_grid(comb: &WeightedComb, grid: &[Vec<f64>], domain: &FundamentalDomain) -> Result<DiffractionGrid> {
    diffraction_grid_flagged(comb, grid, domain, 1.0 / comb.cutoff_radius())
}

pub fn diffraction_grid_flagged(
    comb: &WeightedComb,
    grid: &[Vec<f64>],
    domain: &FundamentalDomain,
    flag_radius: f64,
) -> Result<DiffractionGrid> {
    if domain.lattice.dim() != comb.dim() {
        return Err(Error::DimensionMismatch {
            expected: comb.dim(),
            actual: domain.lattice.dim(),
        });
    }
    let reduced: Vec<Vec<f64>> = grid.iter().map(|k| domain.reduce(k)).collect();
    let values = intensities(comb, &reduced)?;
    let samples = reduced
        .into_iter()
        .zip(values)
        .map(|(k, intensity)| {
            let (_, d2) = domain.lattice.closest_vector(&k);
            GridSample {
                bragg: d2.sqrt() < flag_radius,
                k,
                intensity,
            }
        })
        .collect();
    Ok(DiffractionGrid {
        radius: comb.cutoff_radius(),
        flag_radius,
        domain: domain.clone(),
        samples,
    })
}

fn indicator_pair(s: &WeightedComb) -> Result<(WeightedComb, f64, f64)> {
    let sp = s.complement()?;
    let ds = s.empirical_density().re;
    let dsp = sp.empirical_density().re;
    Ok((sp, ds, dsp))
}

/// Residuals `|(nu_S'(z) - dens(S')) - (nu_S(z) - dens(S))|` at finite radius.
pub fn complement_autocorr_check(s: &WeightedComb, zs: &[LatticeVector]) -> Result<Vec<(LatticeVector, f64)>> {
    let (sp, ds, dsp) = indicator_pair(s)?;
    let r = s.cutoff_radius();
    zs.par_iter()
        .map(|z| {
            let nu_s = coefficient(s, r, z, Variant::PairInWindow)?.re;
            let nu_sp = coefficient(&sp, r, z, Variant::PairInWindow)?.re;
            Ok((*z, ((nu_sp - dsp) - (nu_s - ds)).abs()))
        })
        .collect()
}

/// `max_z |nu_S(z) - nu_S'(z)|` for a set of about half the lattice density.
pub fn homometry_check(s: &WeightedComb, zs: &[LatticeVector]) -> Result<f64> {
    let (sp, ds, _) = indicator_pair(s)?;
    let half = s.lattice().density() / 2.0;
    if (ds - half).abs() > 0.05 * s.lattice().density() {
        return Err(Error::DensityNotHalf { density: ds, half });
    }
    let r = s.cutoff_radius();
    let diffs = zs
        .par_iter()
        .map(|z| {
            let a = coefficient(s, r, z, Variant::PairInWindow)?;
            let b = coefficient(&sp, r, z, Variant::PairInWindow)?;
            Ok((a - b).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(diffs.into_iter().fold(0.0, f64::max))
}

/// Bragg amplitudes of a set and its complement at one radius.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplementBragg {
    pub radius: f64,
    pub amplitude: f64,
    pub complement_amplitude: f64,
    pub density: f64,
    pub complement_density: f64,
    /// `|A' - A - (dens'^2 - dens^2)|`.
    pub residual: f64,
}

/// Compares `A_r^{S'}(k*) - A_r^S(k*)` with `dens(S')^2 - dens(S)^2` at
/// each window radius (the set is restricted to `B_r` first).
pub fn complement_bragg_check(s: &WeightedComb, kstar: &LatticeVector, radii: &[f64]) -> Result<Vec<ComplementBragg>> {
    check_increasing(radii, "radii")?;
    radii
        .iter()
        .map(|&r| {
            let sr = s.restrict(r)?;
            let (sp, ds, dsp) = indicator_pair(&sr)?;
            let a = bragg_estimate(&sr, kstar)?;
            let ap = bragg_estimate(&sp, kstar)?;
            Ok(ComplementBragg {
                radius: r,
                amplitude: a,
                complement_amplitude: ap,
                density: ds,
                complement_density: dsp,
                residual: (ap - a - (dsp * dsp - ds * ds)).abs(),
            })
        })
        .collect()
}

/// `D^{S'} - D^S` over a dual grid, split into the largest magnitude at
/// Bragg-flagged points and at all other points.
pub fn complement_difference_split(s: &WeightedComb, n_per_axis: usize) -> Result<(f64, f64)> {
    let sp = s.complement()?;
    let (domain, grid) = uniform_dual_grid(s.lattice(), n_per_axis, DomainMode::Parallelepiped);
    let gs = diffraction_grid(s, &grid, &domain)?;
    let gsp = diffraction_grid(&sp, &grid, &domain)?;
    let mut on = 0.0_f64;
    let mut off = 0.0_f64;
    for (a, b) in gs.samples.iter().zip(&gsp.samples) {
        let d = (b.intensity - a.intensity).abs();
        if a.bragg {
            on = on.max(d);
        } else {
            off = off.max(d);
        }
    }
    Ok((on, off))
}
