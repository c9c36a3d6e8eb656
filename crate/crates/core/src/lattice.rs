//! Lattices in R^n (n <= 3), their duals, point enumeration in balls and
//! reduction into fundamental domains.
//!
//! A lattice is stored through its basis matrix whose *columns* are the
//! generating vectors in Cartesian units. Lattice points are addressed by
//! integer coordinates in that basis ([`LatticeVector`]).
//!
//! All searches (shortest vector, closest vector, ball enumeration) are
//! exhaustive over bounded integer boxes. That is fine for n <= 3 and keeps
//! the results exact up to floating point comparisons; no basis reduction
//! is attempted.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fmt_f64;

/// Largest supported dimension.
pub const MAX_DIM: usize = 3;

/// Default cap on the number of points a single ball enumeration may return.
pub const DEFAULT_BALL_CAP: u64 = 100_000_000;

/// Integer coordinates of a lattice point in the lattice basis.
///
/// Unused trailing slots (for n < 3) are zero, so the derived ordering is
/// the lexicographic order on the first n coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector([i64; MAX_DIM]);

impl LatticeVector {
    pub fn new(coords: &[i64]) -> Self {
        assert!(coords.len() <= MAX_DIM, "at most {MAX_DIM} coordinates");
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        LatticeVector(c)
    }

    pub const fn zero() -> Self {
        LatticeVector([0; MAX_DIM])
    }

    pub fn coords(&self, dim: usize) -> &[i64] {
        &self.0[..dim]
    }

    pub fn raw(&self) -> [i64; MAX_DIM] {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Human readable form, e.g. `(1, -2)`.
    pub fn display(&self, dim: usize) -> String {
        let parts: Vec<String> = self.coords(dim).iter().map(|c| c.to_string()).collect();
        format!("({})", parts.join(", "))
    }
}

impl Add for LatticeVector {
    type Output = LatticeVector;
    fn add(self, rhs: Self) -> Self {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a += b;
        }
        LatticeVector(c)
    }
}

impl Sub for LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: Self) -> Self {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        LatticeVector(c)
    }
}

impl Neg for LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> Self {
        LatticeVector(self.0.map(|c| -c))
    }
}

/// Volume of the n-ball of radius `r`.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0 * r,
        _ => 2.0 * PI / dim as f64 * r * r * ball_volume(dim - 2, r),
    }
}

/// Visit every integer point of the box `lo..=hi` in lexicographic order.
pub(crate) fn for_each_in_box(lo: &[i64], hi: &[i64], mut f: impl FnMut(&[i64])) {
    let n = lo.len();
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return;
    }
    let mut cur = lo.to_vec();
    loop {
        f(&cur);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if cur[i] < hi[i] {
                cur[i] += 1;
                cur[i + 1..n].copy_from_slice(&lo[i + 1..n]);
                break;
            }
        }
    }
}

/// A full-rank lattice in R^n.
#[derive(Clone, Debug)]
pub struct Lattice {
    dim: usize,
    basis: DMatrix<f64>,
    inverse: DMatrix<f64>,
    det_abs: f64,
    packing_radius: f64,
    shortest: LatticeVector,
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.basis == other.basis
    }
}

impl Lattice {
    /// Build a lattice from a square basis matrix whose columns generate it.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        let dim = basis.nrows();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidBasis(format!(
                "dimension must be 1..={MAX_DIM}, got {dim}"
            )));
        }
        if basis.ncols() != dim {
            return Err(Error::InvalidBasis(format!(
                "basis must be square, got {}x{}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        if basis.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidBasis("non-finite entry".into()));
        }
        let max_col = basis
            .column_iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);
        let det_abs = basis.determinant().abs();
        let threshold = 1e-12 * max_col.powi(dim as i32);
        if !(det_abs > threshold) {
            return Err(Error::SingularBasis { det_abs, threshold });
        }
        let inverse = basis
            .clone()
            .try_inverse()
            .ok_or(Error::SingularBasis { det_abs, threshold })?;
        let mut lat = Lattice {
            dim,
            basis,
            inverse,
            det_abs,
            packing_radius: 0.0,
            shortest: LatticeVector::zero(),
        };
        let (shortest, len) = lat.search_shortest();
        lat.shortest = shortest;
        lat.packing_radius = 0.5 * len;
        Ok(lat)
    }

    /// Basis given row-major, i.e. `values[i * dim + j]` is entry (i, j).
    pub fn from_row_major(dim: usize, values: &[f64]) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::InvalidBasis(format!(
                "expected {} entries for dimension {dim}, got {}",
                dim * dim,
                values.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, values))
    }

    /// Basis given as a list of generating vectors.
    pub fn from_columns(columns: &[&[f64]]) -> Result<Self> {
        let dim = columns.len();
        if columns.iter().any(|c| c.len() != dim) {
            return Err(Error::InvalidBasis("generating vectors must have length n".into()));
        }
        Self::new(DMatrix::from_fn(dim, dim, |i, j| columns[j][i]))
    }

    /// The integer lattice Z^n.
    pub fn integer(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    /// Triangular lattice spanned by (1, 0) and (1/2, sqrt(3)/2).
    pub fn hexagonal() -> Self {
        Self::from_columns(&[&[1.0, 0.0], &[0.5, 3f64.sqrt() / 2.0]]).expect("hexagonal basis")
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Row-major copy of the basis matrix.
    pub fn basis_row_major(&self) -> Vec<f64> {
        let n = self.dim;
        (0..n * n).map(|k| self.basis[(k / n, k % n)]).collect()
    }

    pub fn det_abs(&self) -> f64 {
        self.det_abs
    }

    /// Half the length of the shortest nonzero lattice vector.
    pub fn packing_radius(&self) -> f64 {
        self.packing_radius
    }

    /// One shortest nonzero vector (the lexicographically smallest among ties).
    pub fn shortest_vector(&self) -> LatticeVector {
        self.shortest
    }

    /// Points per unit volume, `1 / |det B|`.
    pub fn density(&self) -> f64 {
        1.0 / self.det_abs
    }

    /// The dual lattice `{u : u.v in Z for all v}`, with basis `(B^T)^{-1}`.
    pub fn dual(&self) -> Lattice {
        Lattice::new(self.inverse.transpose()).expect("dual of a valid lattice is valid")
    }

    pub fn cartesian(&self, v: &LatticeVector) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.cartesian_into(v, &mut out);
        out
    }

    pub(crate) fn cartesian_into(&self, v: &LatticeVector, out: &mut [f64]) {
        let n = self.dim;
        for (i, o) in out.iter_mut().enumerate().take(n) {
            *o = (0..n).map(|j| self.basis[(i, j)] * v.0[j] as f64).sum();
        }
    }

    /// Real coordinates of a Cartesian point with respect to the basis.
    pub fn basis_coords(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.inverse[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn norm(&self, v: &LatticeVector) -> f64 {
        self.cartesian(v).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Half-widths of the coordinate box containing the ball of radius `r`:
    /// `|m_i - c_i| <= r * |row_i(B^{-1})|`.
    fn box_half_widths(&self, r: f64) -> Vec<f64> {
        self.inverse
            .row_iter()
            .map(|row| r * row.norm())
            .collect()
    }

    fn search_shortest(&self) -> (LatticeVector, f64) {
        let bound = self
            .basis
            .column_iter()
            .map(|c| c.norm())
            .fold(f64::INFINITY, f64::min);
        let hw = self.box_half_widths(bound);
        let hi: Vec<i64> = hw.iter().map(|h| (h + 1e-9).floor() as i64).collect();
        let lo: Vec<i64> = hi.iter().map(|h| -h).collect();
        let mut best = (LatticeVector::zero(), f64::INFINITY);
        let mut x = vec![0.0; self.dim];
        for_each_in_box(&lo, &hi, |m| {
            let v = LatticeVector::new(m);
            if v.is_zero() {
                return;
            }
            self.cartesian_into(&v, &mut x);
            let d2: f64 = x.iter().map(|a| a * a).sum();
            if d2 < best.1 * (1.0 - 1e-12) {
                best = (v, d2);
            }
        });
        (best.0, best.1.sqrt())
    }

    /// Lattice points of the open ball `|x - center| < r`, in lexicographic
    /// order of their coordinates.
    pub fn enumerate_ball(&self, r: f64, center: &[f64]) -> Result<Vec<LatticeVector>> {
        self.enumerate_ball_capped(r, center, DEFAULT_BALL_CAP)
    }

    pub fn enumerate_ball_capped(
        &self,
        r: f64,
        center: &[f64],
        cap: u64,
    ) -> Result<Vec<LatticeVector>> {
        let mut out = Vec::new();
        self.visit_ball(r, center, false, cap, |v, _| out.push(v))?;
        Ok(out)
    }

    /// Lattice points of the closed ball `|x| <= r` around the origin.
    pub fn enumerate_closed_ball(&self, r: f64) -> Result<Vec<LatticeVector>> {
        let mut out = Vec::new();
        let origin = vec![0.0; self.dim];
        self.visit_ball(r, &origin, true, DEFAULT_BALL_CAP, |v, _| out.push(v))?;
        Ok(out)
    }

    /// Calls `f(v, squared distance to center)` for every lattice point in
    /// the ball, in lexicographic order.
    pub(crate) fn visit_ball(
        &self,
        r: f64,
        center: &[f64],
        closed: bool,
        cap: u64,
        mut f: impl FnMut(LatticeVector, f64),
    ) -> Result<()> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!("ball radius must be positive, got {r}")));
        }
        if center.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: center.len(),
            });
        }
        let predicted = self.density() * ball_volume(self.dim, r);
        let hw = self.box_half_widths(r);
        let box_count: f64 = hw.iter().map(|h| 2.0 * h + 1.0).product();
        if predicted > cap as f64 || box_count > 64.0 * cap.max(1 << 20) as f64 {
            return Err(Error::BallTooLarge {
                radius: r,
                predicted,
                cap,
            });
        }
        let c = self.basis_coords(center);
        let lo: Vec<i64> = c.iter().zip(&hw).map(|(c, h)| (c - h).ceil() as i64).collect();
        let hi: Vec<i64> = c.iter().zip(&hw).map(|(c, h)| (c + h).floor() as i64).collect();
        let r2 = r * r;
        let mut x = vec![0.0; self.dim];
        for_each_in_box(&lo, &hi, |m| {
            let v = LatticeVector::new(m);
            self.cartesian_into(&v, &mut x);
            let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 < r2 || (closed && d2 == r2) {
                f(v, d2);
            }
        });
        Ok(())
    }

    /// Closest lattice vector to `x` and its squared distance.
    ///
    /// Candidates are the rounded basis coordinates plus offsets in
    /// `{-2..2}^n`. Among equidistant candidates (relative tolerance 1e-12)
    /// the lexicographically smallest coordinates win, so every translation
    /// orbit gets exactly one representative.
    pub fn closest_vector(&self, x: &[f64]) -> (LatticeVector, f64) {
        let n = self.dim;
        let c = self.basis_coords(x);
        let base: Vec<i64> = c.iter().map(|v| v.round() as i64).collect();
        let lo: Vec<i64> = base.iter().map(|b| b - 2).collect();
        let hi: Vec<i64> = base.iter().map(|b| b + 2).collect();
        let mut best: Option<(LatticeVector, f64)> = None;
        let mut y = vec![0.0; n];
        for_each_in_box(&lo, &hi, |m| {
            let v = LatticeVector::new(m);
            self.cartesian_into(&v, &mut y);
            let d2: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            match best {
                None => best = Some((v, d2)),
                Some((bv, bd)) => {
                    let tol = 1e-12 * (1.0 + bd);
                    if d2 < bd - tol || ((d2 - bd).abs() <= tol && v < bv) {
                        best = Some((v, d2));
                    }
                }
            }
        });
        best.expect("non-empty candidate box")
    }

    /// Residuals `| |Gamma_r| / vol(B_r) - dens |` for an increasing list of radii.
    pub fn shell_count_check(&self, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
        check_increasing(radii, "radii")?;
        let origin = vec![0.0; self.dim];
        radii
            .iter()
            .map(|&r| {
                if r <= self.packing_radius {
                    return Err(Error::InvalidParameter(format!(
                        "radius {r} must exceed the packing radius {}",
                        self.packing_radius
                    )));
                }
                let mut count = 0u64;
                self.visit_ball(r, &origin, false, DEFAULT_BALL_CAP, |_, _| count += 1)?;
                let ratio = count as f64 / ball_volume(self.dim, r);
                Ok((r, (ratio - self.density()).abs()))
            })
            .collect()
    }

    /// Deep-hole search: the largest distance to the lattice over a uniform
    /// grid of `grid_density^n` points in one basis cell.
    ///
    /// Grid points are at coordinates `i / grid_density`, so the estimate
    /// approaches the covering radius from below as the grid is refined.
    pub fn covering_radius_estimate(&self, grid_density: usize) -> Result<f64> {
        if grid_density < 8 {
            return Err(Error::InvalidParameter(format!(
                "grid density must be at least 8, got {grid_density}"
            )));
        }
        let g = grid_density as i64;
        let lo = vec![0; self.dim];
        let hi = vec![g - 1; self.dim];
        let mut worst = 0.0_f64;
        for_each_in_box(&lo, &hi, |m| {
            let x: Vec<f64> = (0..self.dim)
                .map(|i| {
                    (0..self.dim)
                        .map(|j| self.basis[(i, j)] * m[j] as f64 / g as f64)
                        .sum()
                })
                .collect();
            let (_, d2) = self.closest_vector(&x);
            worst = worst.max(d2);
        });
        Ok(worst.sqrt())
    }

    /// Plain-text record: `dim n` and `basis` (row-major, 17 significant digits).
    pub fn to_text(&self) -> String {
        let basis: Vec<String> = self.basis_row_major().into_iter().map(fmt_f64).collect();
        format!("dim {}\nbasis {}\n", self.dim, basis.join(" "))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut dim: Option<(usize, usize)> = None;
        let mut basis: Option<(Vec<f64>, usize)> = None;
        let mut last = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last = line;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let bad = |message: String| Error::MalformedLatticeFile { line, message };
            let mut fields = body.split_whitespace();
            let key = fields.next().unwrap_or_default();
            match key {
                "dim" => {
                    let value = fields.next().ok_or_else(|| bad("missing value for `dim`".into()))?;
                    let n: usize = value
                        .parse()
                        .map_err(|_| bad(format!("`dim` must be an integer, got `{value}`")))?;
                    if fields.next().is_some() {
                        return Err(bad("trailing fields after `dim`".into()));
                    }
                    dim = Some((n, line));
                }
                "basis" => {
                    let values = fields
                        .map(|f| {
                            f.parse::<f64>()
                                .map_err(|_| bad(format!("bad basis entry `{f}`")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    basis = Some((values, line));
                }
                other => return Err(bad(format!("unknown field `{other}`"))),
            }
        }
        let (n, dim_line) = dim.ok_or(Error::MalformedLatticeFile {
            line: last.max(1),
            message: "missing `dim` field".into(),
        })?;
        let (values, basis_line) = basis.ok_or(Error::MalformedLatticeFile {
            line: last.max(1),
            message: "missing `basis` field".into(),
        })?;
        if n == 0 || n > MAX_DIM {
            return Err(Error::MalformedLatticeFile {
                line: dim_line,
                message: format!("dimension must be 1..={MAX_DIM}, got {n}"),
            });
        }
        if values.len() != n * n {
            return Err(Error::MalformedLatticeFile {
                line: basis_line,
                message: format!("expected {} basis entries, got {}", n * n, values.len()),
            });
        }
        Lattice::from_row_major(n, &values).map_err(|e| Error::MalformedLatticeFile {
            line: basis_line,
            message: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        Self::parse(&text).map_err(|e| e.in_file(path))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

pub(crate) fn check_increasing(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("{what} must not be empty")));
    }
    if values.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} must be positive")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

/// How a fundamental domain of a lattice is realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DomainMode {
    /// The half-open basis cell `B [0,1)^n`.
    Parallelepiped,
    /// The Voronoi cell around the origin, with boundary ties resolved by
    /// the closest-vector tie-break.
    Voronoi,
}

impl FromStr for DomainMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parallelepiped" => Ok(DomainMode::Parallelepiped),
            "voronoi" => Ok(DomainMode::Voronoi),
            other => Err(Error::InvalidParameter(format!(
                "unknown domain `{other}` (expected parallelepiped|voronoi)"
            ))),
        }
    }
}

impl fmt::Display for DomainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainMode::Parallelepiped => "parallelepiped",
            DomainMode::Voronoi => "voronoi",
        })
    }
}

/// A fundamental domain whose lattice translates tile R^n exactly once.
#[derive(Clone, Debug)]
pub struct FundamentalDomain {
    pub mode: DomainMode,
    pub lattice: Lattice,
}

/// Coordinates closer than this to an integer are treated as that integer
/// in parallelepiped reduction.
const SNAP: f64 = 1e-12;

impl FundamentalDomain {
    pub fn new(lattice: Lattice, mode: DomainMode) -> Self {
        FundamentalDomain { mode, lattice }
    }

    /// The representative of `x + Gamma` inside the domain.
    ///
    /// Points already inside the domain are returned unchanged, which makes
    /// the map exactly idempotent.
    pub fn reduce(&self, x: &[f64]) -> Vec<f64> {
        let (shift, _) = self.reduction_shift(x);
        if shift.is_zero() {
            return x.to_vec();
        }
        let s = self.lattice.cartesian(&shift);
        x.iter().zip(s).map(|(a, b)| a - b).collect()
    }

    /// The lattice vector `v` with `reduce(x) = x - v`, plus the basis
    /// coordinates used to find it.
    pub fn reduction_shift(&self, x: &[f64]) -> (LatticeVector, Vec<f64>) {
        match self.mode {
            DomainMode::Parallelepiped => {
                let mut c = self.lattice.basis_coords(x);
                let mut floor = [0i64; MAX_DIM];
                for (i, ci) in c.iter_mut().enumerate() {
                    let near = ci.round();
                    if (*ci - near).abs() <= SNAP * near.abs().max(1.0) {
                        *ci = near;
                    }
                    floor[i] = ci.floor() as i64;
                }
                (LatticeVector(floor), c)
            }
            DomainMode::Voronoi => {
                let (v, _) = self.lattice.closest_vector(x);
                (v, Vec::new())
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.reduction_shift(x).0.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hex() -> Lattice {
        Lattice::hexagonal()
    }

    /// Brute-force shortest nonzero vector over |m_i| <= bound.
    fn brute_shortest(lat: &Lattice, bound: i64) -> f64 {
        let mut best = f64::INFINITY;
        let lo = vec![-bound; lat.dim()];
        let hi = vec![bound; lat.dim()];
        for_each_in_box(&lo, &hi, |m| {
            let v = LatticeVector::new(m);
            if !v.is_zero() {
                best = best.min(lat.norm(&v));
            }
        });
        best
    }

    #[test]
    fn identity_lattice() {
        let z2 = Lattice::integer(2).unwrap();
        assert_eq!(z2.det_abs(), 1.0);
        assert_eq!(z2.packing_radius(), 0.5);
        assert_eq!(z2.density(), 1.0);
    }

    #[test]
    fn hexagonal_lattice() {
        let h = hex();
        assert!((h.det_abs() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((h.packing_radius() - 0.5).abs() < 1e-15);
        assert!((brute_shortest(&h, 3) - 1.0).abs() < 1e-15);
        assert!((h.density() - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rectangular_lattice() {
        let l = Lattice::diagonal(&[2.0, 1.0]).unwrap();
        assert_eq!(l.packing_radius(), 0.5);
        assert_eq!(l.shortest_vector(), LatticeVector::new(&[0, -1]));
        assert_eq!(brute_shortest(&l, 4), 1.0);
        assert_eq!(l.density(), 0.5);
    }

    #[test]
    fn skewed_basis_finds_short_vector() {
        // columns (1,0) and (10,1): shortest vectors are still of length 1
        let l = Lattice::from_columns(&[&[1.0, 0.0], &[10.0, 1.0]]).unwrap();
        assert!((l.packing_radius() - 0.5).abs() < 1e-12);
        assert!((brute_shortest(&l, 12) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_basis_rejected() {
        let err = Lattice::from_columns(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap_err();
        assert!(matches!(err, Error::SingularBasis { .. }));
        let err = Lattice::from_row_major(2, &[1.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidBasis(_)));
        let err = Lattice::from_row_major(4, &[0.0; 16]).unwrap_err();
        assert!(matches!(err, Error::InvalidBasis(_)));
        let err = Lattice::from_row_major(1, &[f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::InvalidBasis(_)));
    }

    #[test]
    fn duals() {
        let z3 = Lattice::integer(3).unwrap();
        assert_eq!(z3.dual().basis(), z3.basis());

        let d = Lattice::diagonal(&[2.0, 1.0]).unwrap().dual();
        assert_eq!(d.basis_row_major(), vec![0.5, 0.0, 0.0, 1.0]);

        let hd = hex().dual();
        let s = 3f64.sqrt();
        let expected = [1.0, 0.0, -1.0 / s, 2.0 / s];
        for (a, b) in hd.basis_row_major().iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
        assert!((hd.density() - hex().det_abs()).abs() < 1e-14);
    }

    #[test]
    fn ball_enumeration_examples() {
        let z2 = Lattice::integer(2).unwrap();
        let pts = z2.enumerate_ball(1.5, &[0.0, 0.0]).unwrap();
        assert_eq!(pts.len(), 9);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(pts.contains(&LatticeVector::new(&[-1, 1])));

        let z1 = Lattice::integer(1).unwrap();
        let pts: Vec<i64> = z1
            .enumerate_ball(2.5, &[0.0])
            .unwrap()
            .iter()
            .map(|v| v.coords(1)[0])
            .collect();
        assert_eq!(pts, vec![-2, -1, 0, 1, 2]);

        let pts = z2.enumerate_ball(0.5, &[0.0, 0.0]).unwrap();
        assert_eq!(pts, vec![LatticeVector::zero()]);
    }

    #[test]
    fn ball_is_open() {
        let z1 = Lattice::integer(1).unwrap();
        assert_eq!(z1.enumerate_ball(2.0, &[0.0]).unwrap().len(), 3);
        assert_eq!(z1.enumerate_closed_ball(2.0).unwrap().len(), 5);
    }

    #[test]
    fn ball_cap() {
        let z2 = Lattice::integer(2).unwrap();
        let err = z2.enumerate_ball_capped(100.0, &[0.0, 0.0], 1000).unwrap_err();
        assert!(matches!(err, Error::BallTooLarge { .. }));
    }

    #[test]
    fn shell_counts() {
        let z1 = Lattice::integer(1).unwrap();
        let res = z1.shell_count_check(&[100.5]).unwrap();
        assert!(res[0].1.abs() < 1e-15);

        let z2 = Lattice::integer(2).unwrap();
        let radii: Vec<f64> = (1..=20).map(|i| 10.0 * i as f64 + 0.01).collect();
        let res = z2.shell_count_check(&radii).unwrap();
        for (r, resid) in &res {
            assert!(resid * r < 2.0, "r = {r}: residual {resid}");
        }
        assert!(z2.shell_count_check(&[10.0, 5.0]).is_err());
        assert!(z2.shell_count_check(&[0.2]).is_err());
    }

    #[test]
    fn parallelepiped_reduction() {
        let fd = FundamentalDomain::new(Lattice::integer(2).unwrap(), DomainMode::Parallelepiped);
        assert_eq!(fd.reduce(&[2.25, -0.5]), vec![0.25, 0.5]);
        assert_eq!(fd.reduce(&[0.0, 0.0]), vec![0.0, 0.0]);
        // a coordinate just below an integer snaps instead of wrapping to 1
        let r = fd.reduce(&[-1e-17, 3.0]);
        assert_eq!(r, vec![-1e-17, 0.0]);
        assert!(fd.contains(&r));
    }

    #[test]
    fn voronoi_reduction() {
        let fd = FundamentalDomain::new(Lattice::integer(2).unwrap(), DomainMode::Voronoi);
        assert_eq!(fd.reduce(&[0.75, 0.0]), vec![-0.25, 0.0]);
        assert_eq!(fd.reduce(&[0.0, 0.0]), vec![0.0, 0.0]);
        // boundary pair (+-1/2, 0): one member kept
        assert_eq!(fd.reduce(&[0.5, 0.0]), vec![0.5, 0.0]);
        assert_eq!(fd.reduce(&[-0.5, 0.0]), vec![0.5, 0.0]);
        assert_eq!(fd.reduce(&[1.5, 0.0]), vec![0.5, 0.0]);
    }

    #[test]
    fn covering_radius() {
        let z1 = Lattice::integer(1).unwrap();
        assert!((z1.covering_radius_estimate(8).unwrap() - 0.5).abs() < 1e-15);
        let z2 = Lattice::integer(2).unwrap();
        assert!((z2.covering_radius_estimate(16).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        let r = Lattice::diagonal(&[2.0, 1.0]).unwrap();
        let est = r.covering_radius_estimate(16).unwrap();
        assert!((est - 1.25f64.sqrt()).abs() < 1e-12);
        // from below for a grid that misses the deep hole
        let est = z2.covering_radius_estimate(9).unwrap();
        assert!(est <= 0.5f64.sqrt() && est > 0.5f64.sqrt() - 0.1);
        assert!(z2.covering_radius_estimate(4).is_err());
    }

    #[test]
    fn text_round_trip() {
        let h = hex();
        let back = Lattice::parse(&h.to_text()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn malformed_text_reports_line() {
        let err = Lattice::parse("dim 2\n# c\nbasis 1 0 x 1\n").unwrap_err();
        match err {
            Error::MalformedLatticeFile { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let err = Lattice::parse("dim 2\nbasis 1 0 0\n").unwrap_err();
        assert!(matches!(err, Error::MalformedLatticeFile { line: 2, .. }));
        let err = Lattice::parse("dim 2\n").unwrap_err();
        assert!(matches!(err, Error::MalformedLatticeFile { .. }));
        let err = Lattice::parse("dim 2\nbasis 1 2 2 4\n").unwrap_err();
        assert!(matches!(err, Error::MalformedLatticeFile { line: 2, .. }));
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(ball_volume(1, 3.0), 6.0);
        assert!((ball_volume(2, 2.0) - 4.0 * PI).abs() < 1e-12);
        assert!((ball_volume(3, 1.0) - 4.0 / 3.0 * PI).abs() < 1e-12);
    }
}
