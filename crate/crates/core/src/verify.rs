//! Residual suites that check the structural relations numerically:
//! dual-lattice periodicity of the intensity, the Poisson/Bragg masses of
//! the uniform comb, the complement identity and homometry at half density.
//!
//! Every suite returns a [`SuiteReport`] of residual rows. A row with a
//! tolerance is a check; a row without one is informational.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::comb::{WeightRule, WeightedComb};
use crate::diffraction::{bragg_estimate, complement_autocorr_check, homometry_check, intensities};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::lattice::{check_increasing, Lattice, LatticeVector};
use crate::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Periodicity,
    Complement,
    Homometry,
    Poisson,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Periodicity, Suite::Complement, Suite::Homometry, Suite::Poisson];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Periodicity => "periodicity",
            Suite::Complement => "complement",
            Suite::Homometry => "homometry",
            Suite::Poisson => "poisson",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::config("suite", format!("unknown suite `{s}` (periodicity|complement|homometry|poisson)")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualRow {
    pub check: String,
    pub param: String,
    pub radius: f64,
    pub value: f64,
    pub residual: f64,
    pub tolerance: Option<f64>,
}

impl ResidualRow {
    pub fn passed(&self) -> bool {
        match self.tolerance {
            Some(t) => self.residual <= t,
            None => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub rows: Vec<ResidualRow>,
}

pub const CSV_HEADER: &str = "suite,check,param,radius,value,residual,tolerance,pass";

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(ResidualRow::passed)
    }

    /// Largest residual among the rows of one check.
    pub fn max_residual(&self, check: &str) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.check == check)
            .map(|r| r.residual)
            .reduce(f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResidualRow> {
        self.rows.iter().filter(|r| !r.passed())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# difflat verify v1");
        let _ = writeln!(out, "{CSV_HEADER}");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.suite.name(),
                r.check,
                r.param,
                fmt_f64(r.radius),
                fmt_f64(r.value),
                fmt_f64(r.residual),
                r.tolerance.map(fmt_f64).unwrap_or_default(),
                match r.tolerance {
                    None => "info",
                    Some(_) if r.passed() => "pass",
                    Some(_) => "FAIL",
                }
            );
        }
        out
    }

    /// Human-readable residual table: one line per check with its worst row.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "suite {}", self.suite.name());
        let mut checks: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !checks.contains(&r.check.as_str()) {
                checks.push(&r.check);
            }
        }
        for check in checks {
            let rows: Vec<&ResidualRow> = self.rows.iter().filter(|r| r.check == check).collect();
            let checked = rows.iter().filter(|r| r.tolerance.is_some()).count();
            // report the worst checked row; info rows only when nothing is checked
            let worst = rows
                .iter()
                .filter(|r| checked == 0 || r.tolerance.is_some())
                .max_by(|a, b| a.residual.total_cmp(&b.residual))
                .expect("non-empty");
            let failed = rows.iter().filter(|r| !r.passed()).count();
            let status = if checked == 0 {
                "info"
            } else if failed == 0 {
                "pass"
            } else {
                "FAIL"
            };
            let _ = writeln!(
                out,
                "  {check:<14} rows={:<4} max_residual={:<24} tolerance={:<24} {status}",
                rows.len(),
                fmt_f64(worst.residual),
                worst.tolerance.map(fmt_f64).unwrap_or_else(|| "-".into()),
            );
        }
        let _ = writeln!(out, "  result: {}", if self.passed() { "pass" } else { "FAIL" });
        out
    }
}

#[derive(Clone, Debug)]
pub struct PeriodicityParams {
    pub lattice: Lattice,
    pub rule: WeightRule,
    pub radius: f64,
    /// Number of random `k`.
    pub samples: usize,
    /// Number of random dual shifts per `k`.
    pub shifts: usize,
    /// Dual shift coordinates are drawn from `-shift_range..=shift_range`.
    pub shift_range: i64,
    pub tolerance: f64,
    pub seed: u64,
}

/// `|D_r(k + u) - D_r(k)| / (1 + D_r(k))` for random `k` and dual `u`.
pub fn periodicity(p: &PeriodicityParams) -> Result<SuiteReport> {
    let comb = WeightedComb::generate(&p.rule, &p.lattice, p.radius)?;
    let dual = p.lattice.dual();
    let dim = p.lattice.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut points = Vec::new();
    for _ in 0..p.samples {
        // uniform in a few dual cells around the origin
        let coords: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let k: Vec<f64> = (0..dim)
            .map(|i| (0..dim).map(|j| dual.basis()[(i, j)] * coords[j]).sum())
            .collect();
        points.push(k.clone());
        for _ in 0..p.shifts {
            let u: Vec<i64> = (0..dim).map(|_| rng.gen_range(-p.shift_range..=p.shift_range)).collect();
            let uc = dual.cartesian(&LatticeVector::new(&u));
            points.push(k.iter().zip(&uc).map(|(a, b)| a + b).collect());
        }
    }
    let values = intensities(&comb, &points)?;
    let rows = values
        .chunks(p.shifts + 1)
        .enumerate()
        .map(|(i, chunk)| {
            let base = chunk[0];
            let worst = chunk[1..]
                .iter()
                .map(|d| (d - base).abs() / (1.0 + base))
                .fold(0.0, f64::max);
            ResidualRow {
                check: "shift".into(),
                param: format!("k{i}"),
                radius: p.radius,
                value: base,
                residual: worst,
                tolerance: Some(p.tolerance),
            }
        })
        .collect();
    Ok(SuiteReport {
        suite: Suite::Periodicity,
        rows,
    })
}

#[derive(Clone, Debug)]
pub struct PoissonParams {
    pub lattice: Lattice,
    /// Dual-basis coordinates of the probed dual lattice points.
    pub kstars: Vec<LatticeVector>,
    pub radii: Vec<f64>,
    /// Relative tolerance on `A_r(k*)` against `dens^2` at the largest radius.
    pub tolerance: f64,
}

/// Bragg amplitudes of the uniform comb against `dens(Gamma)^2`.
pub fn poisson(p: &PoissonParams) -> Result<SuiteReport> {
    check_increasing(&p.radii, "radii")?;
    if p.kstars.is_empty() {
        return Err(Error::config("kstars", "must not be empty"));
    }
    let target = p.lattice.density().powi(2);
    let rule = WeightRule::Constant(Complex64::new(1.0, 0.0));
    let dim = p.lattice.dim();
    let last = *p.radii.last().expect("non-empty");
    let mut rows = Vec::new();
    for &r in &p.radii {
        let comb = WeightedComb::generate(&rule, &p.lattice, r)?;
        let amps = p
            .kstars
            .iter()
            .map(|k| bragg_estimate(&comb, k))
            .collect::<Result<Vec<f64>>>()?;
        for (k, a) in p.kstars.iter().zip(&amps) {
            rows.push(ResidualRow {
                check: "amplitude".into(),
                param: k.display(dim).replace(", ", " "),
                radius: r,
                value: *a,
                residual: (a - target).abs() / target,
                tolerance: (r == last).then_some(p.tolerance),
            });
        }
        let lo = amps.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = amps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rows.push(ResidualRow {
            check: "spread".into(),
            param: "all".into(),
            radius: r,
            value: hi,
            residual: (hi - lo) / target,
            tolerance: Some(1e-12),
        });
    }
    Ok(SuiteReport {
        suite: Suite::Poisson,
        rows,
    })
}

#[derive(Clone, Debug)]
pub struct ComplementParams {
    pub lattice: Lattice,
    pub rule: WeightRule,
    pub zs: Vec<LatticeVector>,
    pub radii: Vec<f64>,
    /// Allowed growth of `r * max_z residual` over its value at the first radius.
    pub slack: f64,
    /// Optional checkerboard probe `(radius, z, tolerance)`.
    pub checkerboard: Option<(f64, LatticeVector, f64)>,
}

/// The complement identity `nu_S' - dens(S') = nu_S - dens(S)` at finite
/// radius, whose residual must decay like `1/r`.
pub fn complement(p: &ComplementParams) -> Result<SuiteReport> {
    check_increasing(&p.radii, "radii")?;
    if p.zs.is_empty() {
        return Err(Error::config("zs", "must not be empty"));
    }
    let dim = p.lattice.dim();
    let mut rows = Vec::new();
    let mut scaled_first = None;
    for &r in &p.radii {
        let s = WeightedComb::generate(&p.rule, &p.lattice, r)?;
        let res = complement_autocorr_check(&s, &p.zs)?;
        let mut worst = 0.0_f64;
        for (z, v) in &res {
            worst = worst.max(*v);
            rows.push(ResidualRow {
                check: "identity".into(),
                param: z.display(dim).replace(", ", " "),
                radius: r,
                value: v * r,
                residual: *v,
                tolerance: None,
            });
        }
        let scaled = worst * r;
        let c0 = *scaled_first.get_or_insert(scaled);
        rows.push(ResidualRow {
            check: "scaled".into(),
            param: "r*max".into(),
            radius: r,
            value: worst,
            residual: scaled,
            tolerance: (r != p.radii[0]).then_some(p.slack * c0),
        });
    }
    if let Some((r, z, tol)) = p.checkerboard {
        let s = WeightedComb::generate(&WeightRule::Checkerboard, &p.lattice, r)?;
        let res = complement_autocorr_check(&s, &[z])?;
        rows.push(ResidualRow {
            check: "checkerboard".into(),
            param: z.display(dim).replace(", ", " "),
            radius: r,
            value: res[0].1,
            residual: res[0].1,
            tolerance: Some(tol),
        });
    }
    Ok(SuiteReport {
        suite: Suite::Complement,
        rows,
    })
}

#[derive(Clone, Debug)]
pub struct HomometryParams {
    pub lattice: Lattice,
    pub rule: WeightRule,
    pub z_max: f64,
    pub radii: Vec<f64>,
    /// Bound on `max_z |nu_S - nu_S'|` at the largest radius.
    pub tolerance: f64,
    /// Slack on the `1/r` decay between the last two radii.
    pub slack: f64,
}

pub fn homometry(p: &HomometryParams) -> Result<SuiteReport> {
    check_increasing(&p.radii, "radii")?;
    let zs = p.lattice.enumerate_closed_ball(p.z_max)?;
    let mut rows = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    let last = *p.radii.last().expect("non-empty");
    for &r in &p.radii {
        let s = WeightedComb::generate(&p.rule, &p.lattice, r)?;
        let m = homometry_check(&s, &zs)?;
        rows.push(ResidualRow {
            check: "max_diff".into(),
            param: format!("|z|<={}", p.z_max),
            radius: r,
            value: m,
            residual: m,
            tolerance: (r == last).then_some(p.tolerance),
        });
        if let Some((r0, m0)) = prev {
            // decay like 1/r: m(r) <= slack * m(r0) * r0 / r
            rows.push(ResidualRow {
                check: "decay".into(),
                param: format!("{}->{}", r0, r),
                radius: r,
                value: if m0 > 0.0 { m / m0 } else { 0.0 },
                residual: m,
                tolerance: Some(p.slack * m0 * r0 / r),
            });
        }
        prev = Some((r, m));
    }
    Ok(SuiteReport {
        suite: Suite::Homometry,
        rows,
    })
}
