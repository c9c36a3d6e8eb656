//! Run configuration for `difflat verify`.
//!
//! A flat TOML file: shared keys at the top level and one optional table
//! per suite. Relative paths are resolved against the config file's
//! directory. Command-line flags override file values.
//!
//! ```toml
//! lattice_file = "hex.lat"
//! seed = 7
//!
//! [periodicity]
//! rule = "bernoulli"
//! params = { p = 0.3, seed = 42 }
//! radius = 50.0
//! tolerance = 1e-9
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::comb::WeightRule;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeVector};
use crate::verify::{ComplementParams, HomometryParams, PeriodicityParams, PoissonParams};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice_file: Option<PathBuf>,
    pub seed: Option<u64>,
    pub periodicity: Option<PeriodicitySection>,
    pub poisson: Option<PoissonSection>,
    pub complement: Option<ComplementSection>,
    pub homometry: Option<HomometrySection>,
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicitySection {
    pub rule: Option<String>,
    pub params: Option<BTreeMap<String, toml::Value>>,
    pub radius: Option<f64>,
    pub samples: Option<usize>,
    pub shifts: Option<usize>,
    pub shift_range: Option<i64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonSection {
    pub kstars: Option<Vec<Vec<i64>>>,
    pub radii: Option<Vec<f64>>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplementSection {
    pub rule: Option<String>,
    pub params: Option<BTreeMap<String, toml::Value>>,
    pub zs: Option<Vec<Vec<i64>>>,
    pub radii: Option<Vec<f64>>,
    pub slack: Option<f64>,
    pub checkerboard_radius: Option<f64>,
    pub checkerboard_z: Option<Vec<i64>>,
    pub checkerboard_tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomometrySection {
    pub rule: Option<String>,
    pub params: Option<BTreeMap<String, toml::Value>>,
    pub z_max: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub tolerance: Option<f64>,
    pub slack: Option<f64>,
}

/// Flag values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub lattice_file: Option<PathBuf>,
    pub seed: Option<u64>,
    pub radius: Option<f64>,
    pub radii: Option<Vec<f64>>,
    pub tolerance: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let message = e.message().to_string();
            let field = e
                .span()
                .and_then(|s| text.get(s))
                .map(|s| s.trim().to_string())
                .unwrap_or_else(|| "<file>".into());
            Error::config(field, message)
        })?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base).map_err(|e| e.in_file(path))
    }

    fn lattice(&self, ov: &Overrides) -> Result<Lattice> {
        let path = match (&ov.lattice_file, &self.lattice_file) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => self.base_dir.join(p),
            (None, None) => return Err(Error::config("lattice_file", "missing")),
        };
        Lattice::load(path)
    }

    fn seed(&self, ov: &Overrides) -> u64 {
        ov.seed.or(self.seed).unwrap_or(0)
    }

    pub fn periodicity(&self, ov: &Overrides) -> Result<PeriodicityParams> {
        let default = PeriodicitySection::default();
        let s = self.periodicity.as_ref().unwrap_or(&default);
        let lattice = self.lattice(ov)?;
        let rule = rule_from(
            "periodicity",
            s.rule.as_deref().unwrap_or("bernoulli"),
            s.params.as_ref(),
            Some(("p", "0.3")),
        )?;
        let radius = positive("periodicity.radius", ov.radius.or(s.radius).unwrap_or(50.0))?;
        let tolerance = positive("periodicity.tolerance", ov.tolerance.or(s.tolerance).unwrap_or(1e-9))?;
        let shift_range = s.shift_range.unwrap_or(3);
        if shift_range < 1 {
            return Err(Error::config("periodicity.shift_range", "must be at least 1"));
        }
        Ok(PeriodicityParams {
            lattice,
            rule,
            radius,
            samples: s.samples.unwrap_or(50).max(1),
            shifts: s.shifts.unwrap_or(5).max(1),
            shift_range,
            tolerance,
            seed: self.seed(ov),
        })
    }

    pub fn poisson(&self, ov: &Overrides) -> Result<PoissonParams> {
        let default = PoissonSection::default();
        let s = self.poisson.as_ref().unwrap_or(&default);
        let lattice = self.lattice(ov)?;
        let dim = lattice.dim();
        let kstars = match &s.kstars {
            Some(list) => vectors("poisson.kstars", list, dim)?,
            None => default_probe_vectors(dim),
        };
        let radii = radii("poisson.radii", ov.radii.clone().or_else(|| s.radii.clone()), &[50.0, 100.0, 200.0])?;
        let tolerance = positive("poisson.tolerance", ov.tolerance.or(s.tolerance).unwrap_or(0.02))?;
        Ok(PoissonParams {
            lattice,
            kstars,
            radii,
            tolerance,
        })
    }

    pub fn complement(&self, ov: &Overrides) -> Result<ComplementParams> {
        let default = ComplementSection::default();
        let s = self.complement.as_ref().unwrap_or(&default);
        let lattice = self.lattice(ov)?;
        let dim = lattice.dim();
        let mut rule = rule_from(
            "complement",
            s.rule.as_deref().unwrap_or("bernoulli"),
            s.params.as_ref(),
            Some(("p", "0.3")),
        )?;
        if let (WeightRule::Bernoulli { seed, .. }, Some(ov_seed)) = (&mut rule, ov.seed) {
            *seed = ov_seed;
        }
        let zs = match &s.zs {
            Some(list) => vectors("complement.zs", list, dim)?,
            None => default_probe_vectors(dim),
        };
        let radii = radii("complement.radii", ov.radii.clone().or_else(|| s.radii.clone()), &[50.0, 100.0, 200.0])?;
        let slack = positive("complement.slack", s.slack.unwrap_or(2.0))?;
        let checkerboard = match s.checkerboard_radius {
            Some(r) => {
                let r = positive("complement.checkerboard_radius", r)?;
                let z = match &s.checkerboard_z {
                    Some(z) => vectors("complement.checkerboard_z", std::slice::from_ref(z), dim)?[0],
                    None => LatticeVector::new(&vec![1; dim]),
                };
                let tol = positive(
                    "complement.checkerboard_tolerance",
                    s.checkerboard_tolerance.unwrap_or(0.05),
                )?;
                Some((r, z, tol))
            }
            None => None,
        };
        Ok(ComplementParams {
            lattice,
            rule,
            zs,
            radii,
            slack,
            checkerboard,
        })
    }

    pub fn homometry(&self, ov: &Overrides) -> Result<HomometryParams> {
        let default = HomometrySection::default();
        let s = self.homometry.as_ref().unwrap_or(&default);
        let lattice = self.lattice(ov)?;
        let rule = rule_from(
            "homometry",
            s.rule.as_deref().unwrap_or("checkerboard"),
            s.params.as_ref(),
            None,
        )?;
        let radii = radii("homometry.radii", ov.radii.clone().or_else(|| s.radii.clone()), &[100.0, 200.0])?;
        Ok(HomometryParams {
            lattice,
            rule,
            z_max: positive("homometry.z_max", s.z_max.unwrap_or(5.0))?,
            radii,
            tolerance: positive("homometry.tolerance", ov.tolerance.or(s.tolerance).unwrap_or(0.025))?,
            slack: positive("homometry.slack", s.slack.unwrap_or(2.0))?,
        })
    }
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::config(field, format!("must be positive, got {v}")))
    }
}

fn radii(field: &str, given: Option<Vec<f64>>, default: &[f64]) -> Result<Vec<f64>> {
    let radii = given.unwrap_or_else(|| default.to_vec());
    if radii.is_empty() {
        return Err(Error::config(field, "must not be empty"));
    }
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::config(field, "radii must be positive"));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config(field, "radii must be strictly increasing"));
    }
    Ok(radii)
}

fn vectors(field: &str, list: &[Vec<i64>], dim: usize) -> Result<Vec<LatticeVector>> {
    if list.is_empty() {
        return Err(Error::config(field, "must not be empty"));
    }
    list.iter()
        .map(|v| {
            if v.len() != dim {
                Err(Error::config(field, format!("expected {dim} coordinates, got {}", v.len())))
            } else {
                Ok(LatticeVector::new(v))
            }
        })
        .collect()
}

/// Origin, the basis vectors and a few short combinations.
fn default_probe_vectors(dim: usize) -> Vec<LatticeVector> {
    let mut out = vec![LatticeVector::zero()];
    for i in 0..dim {
        let mut e = vec![0; dim];
        e[i] = 1;
        out.push(LatticeVector::new(&e));
    }
    out.push(LatticeVector::new(&vec![1; dim]));
    let mut v = vec![1; dim];
    v[0] = -2;
    out.push(LatticeVector::new(&v));
    out
}

pub(crate) fn value_to_string(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn rule_from(
    section: &str,
    name: &str,
    params: Option<&BTreeMap<String, toml::Value>>,
    default_param: Option<(&str, &str)>,
) -> Result<WeightRule> {
    let mut list: Vec<(String, String)> = params
        .map(|m| m.iter().map(|(k, v)| (k.clone(), value_to_string(v))).collect())
        .unwrap_or_default();
    if let Some((k, v)) = default_param {
        if name == "bernoulli" && !list.iter().any(|(key, _)| key == k) {
            list.push((k.to_string(), v.to_string()));
        }
    }
    WeightRule::from_params(name, &list).map_err(|e| match e {
        Error::Config { field, message } => Error::config(format!("{section}.{field}"), message),
        other => other,
    })
}
