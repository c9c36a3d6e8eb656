//! Weighted Dirac combs tabulated inside a cutoff ball.
//!
//! A [`WeightedComb`] stores the nonzero weights of `omega_r`, the
//! restriction of `sum_t w(t) delta_t` to the open ball `B_r(0)`. Lattice
//! points inside the ball without an entry carry weight zero, which keeps
//! subsets (indicator combs) sparse.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::lattice::{ball_volume, Lattice, LatticeVector};

/// Name written to comb files for the Bernoulli generator.
pub const RNG_NAME: &str = "chacha8-per-point";

/// Tolerance for treating a weight as exactly 0 or 1.
const INDICATOR_TOL: f64 = 1e-12;

/// How weights are assigned to lattice points.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightRule {
    Constant(Complex64),
    /// 1 where the coordinate sum is even.
    Checkerboard,
    /// 1 where the coordinates are coprime; needs n >= 2. The origin gets 0.
    VisiblePoints,
    /// 1 on integers not divisible by any p^k; needs n = 1. The origin gets 1.
    KFree { k: u32 },
    /// Independent {0, 1} draws with `P(1) = p`.
    Bernoulli { p: f64, seed: u64 },
    /// Explicit weights; points outside the table get 0.
    Table(BTreeMap<LatticeVector, Complex64>),
}

impl WeightRule {
    pub fn name(&self) -> &'static str {
        match self {
            WeightRule::Constant(_) => "constant",
            WeightRule::Checkerboard => "checkerboard",
            WeightRule::VisiblePoints => "visible_points",
            WeightRule::KFree { .. } => "k_free",
            WeightRule::Bernoulli { .. } => "bernoulli",
            WeightRule::Table(_) => "custom_table",
        }
    }

    /// Builds a rule from a name and `key=value` parameters.
    ///
    /// `custom_table` is not constructible this way; load a comb file instead.
    pub fn from_params(name: &str, params: &[(String, String)]) -> Result<Self> {
        let get = |key: &str| params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let float = |key: &str, default: Option<f64>| -> Result<f64> {
            match get(key) {
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::config(format!("param.{key}"), format!("not a number: `{v}`"))),
                None => default.ok_or_else(|| Error::config(format!("param.{key}"), "missing")),
            }
        };
        let known: &[&str] = match name {
            "constant" => &["value", "re", "im"],
            "checkerboard" | "visible_points" => &[],
            "k_free" => &["k"],
            "bernoulli" => &["p", "seed"],
            other => {
                return Err(Error::config(
                    "rule",
                    format!("unknown rule `{other}` (constant|checkerboard|visible_points|k_free|bernoulli)"),
                ))
            }
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            return Err(Error::config(format!("param.{k}"), format!("not a parameter of `{name}`")));
        }
        Ok(match name {
            "constant" => {
                let re = match get("value") {
                    Some(_) => float("value", None)?,
                    None => float("re", Some(1.0))?,
                };
                WeightRule::Constant(Complex64::new(re, float("im", Some(0.0))?))
            }
            "checkerboard" => WeightRule::Checkerboard,
            "visible_points" => WeightRule::VisiblePoints,
            "k_free" => {
                let k = get("k").unwrap_or("2");
                let k: u32 = k
                    .parse()
                    .map_err(|_| Error::config("param.k", format!("not an integer: `{k}`")))?;
                if k < 2 {
                    return Err(Error::config("param.k", "must be at least 2"));
                }
                WeightRule::KFree { k }
            }
            "bernoulli" => {
                let p = float("p", None)?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::config("param.p", "must lie in [0, 1]"));
                }
                let seed = get("seed").unwrap_or("0");
                let seed: u64 = seed
                    .parse()
                    .map_err(|_| Error::config("param.seed", format!("not an integer: `{seed}`")))?;
                WeightRule::Bernoulli { p, seed }
            }
            _ => unreachable!(),
        })
    }

    fn check_dimension(&self, dim: usize) -> Result<()> {
        match self {
            WeightRule::VisiblePoints if dim < 2 => Err(Error::RuleDimensionMismatch {
                rule: "visible_points",
                expected: ">= 2",
                actual: dim,
            }),
            WeightRule::KFree { .. } if dim != 1 => Err(Error::RuleDimensionMismatch {
                rule: "k_free",
                expected: "1",
                actual: dim,
            }),
            _ => Ok(()),
        }
    }
}

/// Generator provenance of a stochastic comb.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngInfo {
    pub name: String,
    pub seed: u64,
}

/// `omega_r`: bounded complex weights on the lattice points of an open ball.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedComb {
    lattice: Lattice,
    cutoff_radius: f64,
    weights: BTreeMap<LatticeVector, Complex64>,
    weight_bound: f64,
    rng: Option<RngInfo>,
}

impl WeightedComb {
    /// Validates that every key lies in the open ball and drops zero weights.
    pub fn new(
        lattice: Lattice,
        cutoff_radius: f64,
        weights: BTreeMap<LatticeVector, Complex64>,
    ) -> Result<Self> {
        if !(cutoff_radius > 0.0) || !cutoff_radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cutoff radius must be positive, got {cutoff_radius}"
            )));
        }
        let mut kept = BTreeMap::new();
        for (v, w) in weights {
            if !w.re.is_finite() || !w.im.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite weight at {}",
                    v.display(lattice.dim())
                )));
            }
            if !in_open_ball(&lattice, &v, cutoff_radius) {
                return Err(Error::InvalidParameter(format!(
                    "point {} lies outside the cutoff ball of radius {cutoff_radius}",
                    v.display(lattice.dim())
                )));
            }
            if w != Complex64::new(0.0, 0.0) {
                kept.insert(v, w);
            }
        }
        Ok(Self::from_parts(lattice, cutoff_radius, kept, None))
    }

    fn from_parts(
        lattice: Lattice,
        cutoff_radius: f64,
        weights: BTreeMap<LatticeVector, Complex64>,
        rng: Option<RngInfo>,
    ) -> Self {
        let weight_bound = weights.values().map(|w| w.norm()).fold(0.0, f64::max);
        WeightedComb {
            lattice,
            cutoff_radius,
            weights,
            weight_bound,
            rng,
        }
    }

    /// Tabulates `rule` on every lattice point of `B_r(0)`.
    pub fn generate(rule: &WeightRule, lattice: &Lattice, r: f64) -> Result<Self> {
        rule.check_dimension(lattice.dim())?;
        let dim = lattice.dim();
        let points = lattice.enumerate_ball(r, &vec![0.0; dim])?;
        let mut weights = BTreeMap::new();
        let mut rng_info = None;
        match rule {
            WeightRule::Constant(c) => {
                if *c != Complex64::new(0.0, 0.0) {
                    weights.extend(points.into_iter().map(|v| (v, *c)));
                }
            }
            WeightRule::Checkerboard => {
                weights.extend(
                    points
                        .into_iter()
                        .filter(|v| v.coords(dim).iter().sum::<i64>().rem_euclid(2) == 0)
                        .map(|v| (v, Complex64::new(1.0, 0.0))),
                );
            }
            WeightRule::VisiblePoints => {
                weights.extend(
                    points
                        .into_iter()
                        .filter(|v| gcd_all(v.coords(dim)) == 1)
                        .map(|v| (v, Complex64::new(1.0, 0.0))),
                );
            }
            WeightRule::KFree { k } => {
                let max = points.iter().map(|v| v.coords(1)[0].unsigned_abs()).max().unwrap_or(0);
                let free = k_free_table(max, *k);
                weights.extend(
                    points
                        .into_iter()
                        .filter(|v| free[v.coords(1)[0].unsigned_abs() as usize])
                        .map(|v| (v, Complex64::new(1.0, 0.0))),
                );
            }
            WeightRule::Bernoulli { p, seed } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidParameter(format!("bernoulli p must lie in [0, 1], got {p}")));
                }
                let base = ChaCha8Rng::seed_from_u64(*seed);
                for v in points {
                    if bernoulli_draw(&base, &v, dim)? < *p {
                        weights.insert(v, Complex64::new(1.0, 0.0));
                    }
                }
                rng_info = Some(RngInfo {
                    name: RNG_NAME.to_string(),
                    seed: *seed,
                });
            }
            WeightRule::Table(table) => {
                for v in points {
                    if let Some(w) = table.get(&v) {
                        if *w != Complex64::new(0.0, 0.0) {
                            weights.insert(v, *w);
                        }
                    }
                }
            }
        }
        Ok(Self::from_parts(lattice.clone(), r, weights, rng_info))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn cutoff_radius(&self) -> f64 {
        self.cutoff_radius
    }

    /// `W = max |w(t)|`.
    pub fn weight_bound(&self) -> f64 {
        self.weight_bound
    }

    pub fn rng(&self) -> Option<&RngInfo> {
        self.rng.as_ref()
    }

    /// Weight at `v`; zero for points without an entry.
    pub fn weight(&self, v: &LatticeVector) -> Complex64 {
        self.weights.get(v).copied().unwrap_or_default()
    }

    /// Nonzero entries in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&LatticeVector, &Complex64)> {
        self.weights.iter()
    }

    pub fn weights(&self) -> &BTreeMap<LatticeVector, Complex64> {
        &self.weights
    }

    /// Number of nonzero entries.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Number of lattice points in the cutoff ball, `|Gamma_r|`.
    pub fn ball_count(&self) -> Result<usize> {
        let mut count = 0;
        self.lattice.visit_ball(
            self.cutoff_radius,
            &vec![0.0; self.dim()],
            false,
            crate::lattice::DEFAULT_BALL_CAP,
            |_, _| count += 1,
        )?;
        Ok(count)
    }

    pub fn ball_volume(&self) -> f64 {
        ball_volume(self.dim(), self.cutoff_radius)
    }

    /// The comb restricted to the smaller ball `B_r(0)`.
    pub fn restrict(&self, r: f64) -> Result<Self> {
        if !(r > 0.0) || r > self.cutoff_radius {
            return Err(Error::InvalidParameter(format!(
                "restriction radius {r} must lie in (0, {}]",
                self.cutoff_radius
            )));
        }
        let weights = self
            .weights
            .iter()
            .filter(|(v, _)| in_open_ball(&self.lattice, v, r))
            .map(|(v, w)| (*v, *w))
            .collect();
        Ok(Self::from_parts(self.lattice.clone(), r, weights, self.rng.clone()))
    }

    fn check_indicator(&self) -> Result<()> {
        for (v, w) in &self.weights {
            let re_ok = w.re.abs() <= INDICATOR_TOL || (w.re - 1.0).abs() <= INDICATOR_TOL;
            if !re_ok || w.im.abs() > INDICATOR_TOL {
                return Err(Error::NotAnIndicatorComb {
                    at: v.display(self.dim()),
                    re: w.re,
                    im: w.im,
                });
            }
        }
        Ok(())
    }

    pub fn is_indicator(&self) -> bool {
        self.check_indicator().is_ok()
    }

    /// The indicator comb of `Gamma_r \ S`, where `S` is this comb's support.
    pub fn complement(&self) -> Result<Self> {
        self.check_indicator()?;
        let points = self
            .lattice
            .enumerate_ball(self.cutoff_radius, &vec![0.0; self.dim()])?;
        let one = Complex64::new(1.0, 0.0);
        let weights = points
            .into_iter()
            .filter(|v| self.weight(v).re.abs() <= INDICATOR_TOL)
            .map(|v| (v, one))
            .collect();
        Ok(Self::from_parts(self.lattice.clone(), self.cutoff_radius, weights, None))
    }

    /// `sum_t w(t) / vol(B_r)`, which is `dens_r(S)` for an indicator comb.
    pub fn empirical_density(&self) -> Complex64 {
        let total: Complex64 = self.weights.values().sum();
        total / self.ball_volume()
    }

    pub fn to_text(&self) -> String {
        let dim = self.dim();
        let mut out = String::new();
        let basis: Vec<String> = self
            .lattice
            .basis_row_major()
            .into_iter()
            .map(fmt_f64)
            .collect();
        let _ = writeln!(out, "#dim {dim}");
        let _ = writeln!(out, "#basis {}", basis.join(" "));
        let _ = writeln!(out, "#radius {}", fmt_f64(self.cutoff_radius));
        if let Some(rng) = &self.rng {
            let _ = writeln!(out, "#rng {} #seed {}", rng.name, rng.seed);
        }
        for (v, w) in &self.weights {
            for c in v.coords(dim) {
                let _ = write!(out, "{c} ");
            }
            let _ = writeln!(out, " {} {}", fmt_f64(w.re), fmt_f64(w.im));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, message: String| Error::MalformedCombFile { line, message };
        let mut dim: Option<usize> = None;
        let mut basis: Option<(Vec<f64>, usize)> = None;
        let mut radius: Option<f64> = None;
        let mut rng = None;
        let mut lattice: Option<Lattice> = None;
        let mut weights = BTreeMap::new();
        let mut last = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            last = line;
            let body = raw.trim();
            if body.is_empty() {
                continue;
            }
            if let Some(header) = body.strip_prefix('#') {
                if lattice.is_some() {
                    return Err(bad(line, "header line after data".into()));
                }
                let mut fields = header.split_whitespace();
                match fields.next() {
                    Some("dim") => {
                        let v = fields.next().ok_or_else(|| bad(line, "missing dimension".into()))?;
                        let n: usize = v.parse().map_err(|_| bad(line, format!("bad dimension `{v}`")))?;
                        if n == 0 || n > crate::lattice::MAX_DIM {
                            return Err(bad(line, format!("unsupported dimension {n}")));
                        }
                        dim = Some(n);
                    }
                    Some("basis") => {
                        let values = fields
                            .map(|f| f.parse::<f64>().map_err(|_| bad(line, format!("bad basis entry `{f}`"))))
                            .collect::<Result<Vec<_>>>()?;
                        basis = Some((values, line));
                    }
                    Some("radius") => {
                        let v = fields.next().ok_or_else(|| bad(line, "missing radius".into()))?;
                        let r: f64 = v.parse().map_err(|_| bad(line, format!("bad radius `{v}`")))?;
                        if !(r > 0.0) || !r.is_finite() {
                            return Err(bad(line, format!("radius must be positive, got {r}")));
                        }
                        radius = Some(r);
                    }
                    Some("rng") => {
                        let name = fields.next().ok_or_else(|| bad(line, "missing rng name".into()))?;
                        if fields.next() != Some("#seed") {
                            return Err(bad(line, "expected `#seed <s>` after rng name".into()));
                        }
                        let s = fields.next().ok_or_else(|| bad(line, "missing seed".into()))?;
                        let seed: u64 = s.parse().map_err(|_| bad(line, format!("bad seed `{s}`")))?;
                        rng = Some(RngInfo {
                            name: name.to_string(),
                            seed,
                        });
                    }
                    // free-form comments
                    _ => {}
                }
                continue;
            }
            let lat = match &lattice {
                Some(l) => l,
                None => {
                    let n = dim.ok_or_else(|| bad(line, "data before `#dim` header".into()))?;
                    let (values, bline) = basis
                        .take()
                        .ok_or_else(|| bad(line, "data before `#basis` header".into()))?;
                    if values.len() != n * n {
                        return Err(bad(bline, format!("expected {} basis entries, got {}", n * n, values.len())));
                    }
                    let l = Lattice::from_row_major(n, &values).map_err(|e| bad(bline, e.to_string()))?;
                    if radius.is_none() {
                        return Err(bad(line, "data before `#radius` header".into()));
                    }
                    lattice.insert(l)
                }
            };
            let n = lat.dim();
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() != n + 2 {
                return Err(bad(line, format!("expected {} fields, got {}", n + 2, fields.len())));
            }
            let coords = fields[..n]
                .iter()
                .map(|f| f.parse::<i64>().map_err(|_| bad(line, format!("bad coordinate `{f}`"))))
                .collect::<Result<Vec<_>>>()?;
            let re: f64 = fields[n].parse().map_err(|_| bad(line, format!("bad real part `{}`", fields[n])))?;
            let im: f64 = fields[n + 1]
                .parse()
                .map_err(|_| bad(line, format!("bad imaginary part `{}`", fields[n + 1])))?;
            let v = LatticeVector::new(&coords);
            let r = radius.expect("checked above");
            if !in_open_ball(lat, &v, r) {
                return Err(bad(line, format!("point {} outside the cutoff ball", v.display(n))));
            }
            if weights.insert(v, Complex64::new(re, im)).is_some() {
                return Err(bad(line, format!("duplicate point {}", v.display(n))));
            }
        }
        let lattice = match lattice {
            Some(l) => l,
            None => {
                let line = last.max(1);
                let n = dim.ok_or_else(|| bad(line, "missing `#dim` header".into()))?;
                let (values, bline) = basis.ok_or_else(|| bad(line, "missing `#basis` header".into()))?;
                if values.len() != n * n {
                    return Err(bad(bline, format!("expected {} basis entries, got {}", n * n, values.len())));
                }
                Lattice::from_row_major(n, &values).map_err(|e| bad(bline, e.to_string()))?
            }
        };
        let radius = radius.ok_or_else(|| bad(last.max(1), "missing `#radius` header".into()))?;
        let mut comb = WeightedComb::new(lattice, radius, weights)?;
        comb.rng = rng;
        Ok(comb)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        Self::parse(&text).map_err(|e| e.in_file(path))
    }
}

fn in_open_ball(lattice: &Lattice, v: &LatticeVector, r: f64) -> bool {
    let x = lattice.cartesian(v);
    x.iter().map(|a| a * a).sum::<f64>() < r * r
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn gcd_all(coords: &[i64]) -> u64 {
    coords.iter().fold(0, |g, c| gcd(g, c.unsigned_abs()))
}

/// `free[m]` is true iff no `d^k` with `d >= 2` divides `m`; `free[0]` is true.
fn k_free_table(max: u64, k: u32) -> Vec<bool> {
    let max = max as usize;
    let mut free = vec![true; max + 1];
    let mut d: usize = 2;
    while let Some(q) = d.checked_pow(k).filter(|q| *q <= max) {
        for m in (q..=max).step_by(q) {
            free[m] = false;
        }
        d += 1;
    }
    free
}

/// Uniform draw in [0, 1) for one lattice point.
///
/// Each point owns a ChaCha8 stream whose id is derived from its
/// coordinates, so a point's weight does not depend on the ball radius or
/// on the order in which points are visited.
fn bernoulli_draw(base: &ChaCha8Rng, v: &LatticeVector, dim: usize) -> Result<f64> {
    let bits = 63 / dim as u32;
    let mut id: u64 = 0;
    for &c in v.coords(dim) {
        let zz = ((c << 1) ^ (c >> 63)) as u64;
        if bits < 64 && zz >> bits != 0 {
            return Err(Error::InvalidParameter(format!(
                "coordinate {c} too large for per-point random streams"
            )));
        }
        id = (id << bits) | zz;
    }
    let mut rng = base.clone();
    rng.set_stream(id);
    Ok(rng.gen::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: usize) -> Lattice {
        Lattice::integer(n).unwrap()
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn constant_rule() {
        let c = WeightedComb::generate(&WeightRule::Constant(one()), &z(2), 1.5).unwrap();
        assert_eq!(c.len(), 9);
        assert!(c.iter().all(|(_, w)| *w == one()));
        assert_eq!(c.weight_bound(), 1.0);
    }

    #[test]
    fn visible_points_rule() {
        let c = WeightedComb::generate(&WeightRule::VisiblePoints, &z(2), 2.5).unwrap();
        for p in [[2, 2], [0, 2], [2, 0], [-2, 2], [0, 0]] {
            assert_eq!(c.weight(&LatticeVector::new(&p)), Complex64::default(), "{p:?}");
        }
        for p in [[1, 2], [2, 1], [1, 0], [1, 1], [-1, 2]] {
            assert_eq!(c.weight(&LatticeVector::new(&p)), one(), "{p:?}");
        }
        let err = WeightedComb::generate(&WeightRule::VisiblePoints, &z(1), 2.5).unwrap_err();
        assert!(matches!(err, Error::RuleDimensionMismatch { .. }));
    }

    #[test]
    fn squarefree_rule() {
        let c = WeightedComb::generate(&WeightRule::KFree { k: 2 }, &z(1), 10.5).unwrap();
        let zeros: Vec<i64> = (-10..=10)
            .filter(|m| c.weight(&LatticeVector::new(&[*m])) == Complex64::default())
            .collect();
        assert_eq!(zeros, vec![-9, -8, -4, 4, 8, 9]);
        assert_eq!(c.weight(&LatticeVector::zero()), one());
        let err = WeightedComb::generate(&WeightRule::KFree { k: 2 }, &z(2), 3.0).unwrap_err();
        assert!(matches!(err, Error::RuleDimensionMismatch { .. }));
    }

    #[test]
    fn cubefree_table() {
        let t = k_free_table(30, 3);
        let not_free: Vec<usize> = (1..=30).filter(|m| !t[*m]).collect();
        assert_eq!(not_free, vec![8, 16, 24, 27]);
    }

    #[test]
    fn complement_examples() {
        let all = WeightedComb::generate(&WeightRule::Constant(one()), &z(2), 5.0).unwrap();
        assert!(all.complement().unwrap().is_empty());

        let cb = WeightedComb::generate(&WeightRule::Checkerboard, &z(2), 6.3).unwrap();
        let comp = cb.complement().unwrap();
        for v in z(2).enumerate_ball(6.3, &[0.0, 0.0]).unwrap() {
            let odd = v.coords(2).iter().sum::<i64>().rem_euclid(2) == 1;
            assert_eq!(comp.weight(&v) == one(), odd);
        }
        assert_eq!(comp.complement().unwrap(), cb);

        let mut w = BTreeMap::new();
        w.insert(LatticeVector::zero(), Complex64::new(0.5, 0.0));
        let half = WeightedComb::new(z(2), 2.0, w).unwrap();
        assert!(matches!(half.complement().unwrap_err(), Error::NotAnIndicatorComb { .. }));
    }

    #[test]
    fn densities() {
        let all = WeightedComb::generate(&WeightRule::Constant(one()), &z(2), 100.0).unwrap();
        assert!((all.empirical_density().re - 1.0).abs() < 0.02);
        let cb = WeightedComb::generate(&WeightRule::Checkerboard, &z(2), 100.0).unwrap();
        assert!((cb.empirical_density().re - 0.5).abs() < 0.02);
    }

    #[test]
    fn bernoulli_is_radius_consistent() {
        let rule = WeightRule::Bernoulli { p: 0.3, seed: 9 };
        let big = WeightedComb::generate(&rule, &z(2), 30.0).unwrap();
        let small = WeightedComb::generate(&rule, &z(2), 12.0).unwrap();
        assert_eq!(big.restrict(12.0).unwrap(), small);
        assert_eq!(WeightedComb::generate(&rule, &z(2), 30.0).unwrap(), big);
        let other = WeightedComb::generate(&WeightRule::Bernoulli { p: 0.3, seed: 10 }, &z(2), 30.0).unwrap();
        assert_ne!(other, big);
    }

    #[test]
    fn keys_outside_ball_rejected() {
        let mut w = BTreeMap::new();
        w.insert(LatticeVector::new(&[3, 0]), one());
        assert!(WeightedComb::new(z(2), 3.0, w).is_err());
    }

    #[test]
    fn rule_params() {
        let p = |s: &[(&str, &str)]| -> Vec<(String, String)> {
            s.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
        };
        assert_eq!(
            WeightRule::from_params("bernoulli", &p(&[("p", "0.3"), ("seed", "42")])).unwrap(),
            WeightRule::Bernoulli { p: 0.3, seed: 42 }
        );
        assert_eq!(
            WeightRule::from_params("constant", &p(&[])).unwrap(),
            WeightRule::Constant(one())
        );
        assert!(WeightRule::from_params("bernoulli", &p(&[])).is_err());
        assert!(WeightRule::from_params("bernoulli", &p(&[("p", "1.5")])).is_err());
        assert!(WeightRule::from_params("checkerboard", &p(&[("p", "1")])).is_err());
        assert!(WeightRule::from_params("nope", &p(&[])).is_err());
    }

    #[test]
    fn text_round_trips() {
        let empty = WeightedComb::new(z(2), 3.0, BTreeMap::new()).unwrap();
        assert_eq!(WeightedComb::parse(&empty.to_text()).unwrap(), empty);

        let nine = WeightedComb::generate(&WeightRule::Constant(one()), &z(2), 1.5).unwrap();
        assert_eq!(WeightedComb::parse(&nine.to_text()).unwrap(), nine);

        let mut w = BTreeMap::new();
        w.insert(LatticeVector::new(&[1, -1]), Complex64::new(0.1, -1.0 / 3.0));
        let odd = WeightedComb::new(Lattice::hexagonal(), 2.0, w).unwrap();
        let back = WeightedComb::parse(&odd.to_text()).unwrap();
        assert_eq!(back, odd);
    }

    #[test]
    fn malformed_comb_reports_line() {
        let text = "#dim 1\n#basis 1\n#radius 3\n0 1 0\n1 x 0\n";
        match WeightedComb::parse(text).unwrap_err() {
            Error::MalformedCombFile { line, .. } => assert_eq!(line, 5),
            e => panic!("{e:?}"),
        }
        let text = "#dim 1\n#basis 1\n#radius 3\n5 1 0\n";
        assert!(matches!(
            WeightedComb::parse(text).unwrap_err(),
            Error::MalformedCombFile { line: 4, .. }
        ));
        let text = "#dim 1\n#basis 1\n#radius 3\n1 1 0\n1 1 0\n";
        assert!(matches!(
            WeightedComb::parse(text).unwrap_err(),
            Error::MalformedCombFile { line: 5, .. }
        ));
        let text = "0 1 0\n";
        assert!(matches!(
            WeightedComb::parse(text).unwrap_err(),
            Error::MalformedCombFile { line: 1, .. }
        ));
    }
}
