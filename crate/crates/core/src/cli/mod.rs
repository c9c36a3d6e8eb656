//! The `difflat` command line.
//!
//! Exit codes: 0 on success, 1 when a verification suite breaches a
//! tolerance, 2 for usage, input and configuration errors.

mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{Overrides, RunConfig};

use crate::autocorr::{self, Variant};
use crate::comb::{WeightRule, WeightedComb};
use crate::diffraction;
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::lattice::{DomainMode, Lattice, LatticeVector};
use crate::verify::{self, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BREACH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const SCHEMA: &str = "\
autocorr  # difflat autocorr v1
          z1..zn,re,im            one row per z in the canonical half-ball and its mirror, sorted by z
diffract  # difflat diffract v1
          k1..kn,intensity,bragg_flag
                                  k reduced to the chosen dual fundamental domain; bragg_flag is 0|1
bragg     # difflat bragg v1
          kstar1..kstarn,r,amplitude
                                  kstar in dual-basis coordinates
scan      # difflat scan v1
          r,re,im
verify    # difflat verify v1
          suite,check,param,radius,value,residual,tolerance,pass
                                  pass is pass|FAIL|info (info rows carry no tolerance)
";

#[derive(Parser, Debug)]
#[command(name = "difflat", version, about = "Autocorrelation and diffraction of weighted lattice combs")]
struct Cli {
    /// Print the CSV column contracts and exit.
    #[arg(long, global = true)]
    schema: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lattice utilities.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Comb utilities.
    #[command(subcommand)]
    Comb(CombCmd),
    /// Autocorrelation coefficients of a stored comb.
    Autocorr(AutocorrArgs),
    /// Convergence of one autocorrelation coefficient with the radius.
    Scan(ScanArgs),
    /// Diffraction intensity on a uniform grid of the dual fundamental domain.
    Diffract(DiffractArgs),
    /// Bragg amplitude estimates at dual lattice points.
    Bragg(BraggArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
enum LatticeCmd {
    /// Density, packing radius, dual basis and a covering-radius estimate.
    Info {
        #[arg(long)]
        basis: PathBuf,
        /// Grid points per axis for the covering-radius search.
        #[arg(long, default_value_t = 32)]
        grid: usize,
    },
}

#[derive(Subcommand, Debug)]
enum CombCmd {
    /// Tabulate a rule inside a ball and write the comb file.
    Gen {
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long)]
        basis: PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RuleArgs {
    /// constant | checkerboard | visible_points | k_free | bernoulli
    #[arg(long)]
    rule: String,
    /// Rule parameter as key=value; repeatable.
    #[arg(long = "param", value_parser = parse_key_value)]
    params: Vec<(String, String)>,
}

#[derive(Args, Debug)]
struct AutocorrArgs {
    #[arg(long)]
    comb: PathBuf,
    #[arg(long)]
    zmax: f64,
    #[arg(long, default_value_t = Variant::PairInWindow)]
    variant: Variant,
    /// Averaging window radius; defaults to the comb's cutoff radius.
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long)]
    basis: PathBuf,
    /// Lattice coordinates of z, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    z: Vec<i64>,
    #[arg(long, value_delimiter = ',', required = true)]
    radii: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiffractArgs {
    #[arg(long)]
    comb: PathBuf,
    /// Grid points per axis.
    #[arg(long)]
    grid: usize,
    #[arg(long, default_value_t = DomainMode::Parallelepiped)]
    domain: DomainMode,
    /// Distance to the dual lattice below which a sample is flagged; default 1/r.
    #[arg(long)]
    flag_radius: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BraggArgs {
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long)]
    basis: PathBuf,
    /// Dual-basis coordinates of k*, comma-separated; repeatable.
    #[arg(long, required = true, allow_hyphen_values = true)]
    kstar: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    radii: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    suite: Suite,
    #[arg(long)]
    config: PathBuf,
    /// Residual table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `lattice_file` from the config.
    #[arg(long)]
    basis: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    #[arg(long)]
    tolerance: Option<f64>,
}

fn parse_key_value(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected key=value, got `{s}`")),
    }
}

fn parse_ints(field: &str, s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::config(field, format!("not an integer list: `{s}`")))
        })
        .collect()
}

fn lattice_vector(field: &str, coords: &[i64], dim: usize) -> Result<LatticeVector> {
    if coords.len() != dim {
        return Err(Error::config(field, format!("expected {dim} coordinates, got {}", coords.len())));
    }
    Ok(LatticeVector::new(coords))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::from(e).in_file(path))
}

/// Runs the CLI on `args` (including the program name), writing to the
/// given streams, and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    // `--schema` works with any subcommand, even without its required flags
    if args.iter().skip(1).take_while(|a| *a != "--").any(|a| a == "--schema") {
        let _ = stdout.write_all(SCHEMA.as_bytes());
        return EXIT_OK;
    }
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    if cli.schema {
        let _ = stdout.write_all(SCHEMA.as_bytes());
        return EXIT_OK;
    }
    let Some(command) = cli.command else {
        let _ = writeln!(stderr, "difflat: no subcommand given (try --help)");
        return EXIT_USAGE;
    };
    match dispatch(command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "difflat: {e}");
            EXIT_USAGE
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Lattice(LatticeCmd::Info { basis, grid }) => {
            let lattice = Lattice::load(&basis)?;
            out.write_all(lattice_info(&lattice, grid)?.as_bytes())?;
        }
        Command::Comb(CombCmd::Gen { rule, basis, radius, out: path }) => {
            let lattice = Lattice::load(&basis)?;
            let rule = WeightRule::from_params(&rule.rule, &rule.params)?;
            let comb = WeightedComb::generate(&rule, &lattice, radius)?;
            comb.save(&path)?;
            writeln!(out, "wrote {} nonzero weights to {}", comb.len(), path.display())?;
        }
        Command::Autocorr(a) => {
            let comb = WeightedComb::load(&a.comb)?;
            let window = a.window.unwrap_or(comb.cutoff_radius());
            let table = autocorr::autocorrelation_in_window(&comb, window, a.zmax, a.variant)?;
            let dim = comb.dim();
            let mut csv = String::from("# difflat autocorr v1\n");
            let cols: Vec<String> = (1..=dim).map(|i| format!("z{i}")).collect();
            let _ = writeln!(csv, "{},re,im", cols.join(","));
            for (z, v) in table.iter() {
                let coords: Vec<String> = z.coords(dim).iter().map(|c| c.to_string()).collect();
                let _ = writeln!(csv, "{},{},{}", coords.join(","), fmt_f64(v.re), fmt_f64(v.im));
            }
            write_file(&a.out, &csv)?;
            writeln!(out, "wrote {} coefficients to {}", table.len(), a.out.display())?;
        }
        Command::Scan(a) => {
            let lattice = Lattice::load(&a.basis)?;
            let rule = WeightRule::from_params(&a.rule.rule, &a.rule.params)?;
            let z = lattice_vector("z", &a.z, lattice.dim())?;
            let rows = autocorr::convergence_scan(&rule, &lattice, &z, &a.radii)?;
            let mut csv = String::from("# difflat scan v1\nr,re,im\n");
            for (r, v) in rows {
                let _ = writeln!(csv, "{},{},{}", fmt_f64(r), fmt_f64(v.re), fmt_f64(v.im));
            }
            emit(out, a.out.as_deref(), &csv)?;
        }
        Command::Diffract(a) => {
            let comb = WeightedComb::load(&a.comb)?;
            if a.grid == 0 {
                return Err(Error::config("grid", "must be positive"));
            }
            let (domain, points) = diffraction::uniform_dual_grid(comb.lattice(), a.grid, a.domain);
            let flag = a.flag_radius.unwrap_or(1.0 / comb.cutoff_radius());
            let grid = diffraction::diffraction_grid_flagged(&comb, &points, &domain, flag)?;
            let dim = comb.dim();
            let mut csv = String::from("# difflat diffract v1\n");
            let cols: Vec<String> = (1..=dim).map(|i| format!("k{i}")).collect();
            let _ = writeln!(csv, "{},intensity,bragg_flag", cols.join(","));
            for s in &grid.samples {
                let k: Vec<String> = s.k.iter().map(|x| fmt_f64(*x)).collect();
                let _ = writeln!(csv, "{},{},{}", k.join(","), fmt_f64(s.intensity), u8::from(s.bragg));
            }
            write_file(&a.out, &csv)?;
            writeln!(
                out,
                "wrote {} samples to {} (mean intensity {}, mean off-Bragg {})",
                grid.samples.len(),
                a.out.display(),
                fmt_f64(grid.mean_intensity()),
                fmt_f64(grid.mean_off_bragg())
            )?;
        }
        Command::Bragg(a) => {
            let lattice = Lattice::load(&a.basis)?;
            let rule = WeightRule::from_params(&a.rule.rule, &a.rule.params)?;
            let dim = lattice.dim();
            let mut csv = String::from("# difflat bragg v1\n");
            let cols: Vec<String> = (1..=dim).map(|i| format!("kstar{i}")).collect();
            let _ = writeln!(csv, "{},r,amplitude", cols.join(","));
            for spec in &a.kstar {
                let k = lattice_vector("kstar", &parse_ints("kstar", spec)?, dim)?;
                let entry = diffraction::bragg_amplitude_at(&rule, &lattice, &k, &a.radii)?;
                let coords: Vec<String> = k.coords(dim).iter().map(|c| c.to_string()).collect();
                for (r, amp) in entry.ladder {
                    let _ = writeln!(csv, "{},{},{}", coords.join(","), fmt_f64(r), fmt_f64(amp));
                }
            }
            emit(out, a.out.as_deref(), &csv)?;
        }
        Command::Verify(a) => return run_verify(a, out),
    }
    Ok(EXIT_OK)
}

fn emit(out: &mut dyn Write, path: Option<&Path>, csv: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, csv),
        None => Ok(out.write_all(csv.as_bytes())?),
    }
}

fn lattice_info(lattice: &Lattice, grid: usize) -> Result<String> {
    let dim = lattice.dim();
    let dual = lattice.dual();
    let row = |l: &Lattice| {
        l.basis_row_major()
            .iter()
            .map(|x| fmt_f64(*x))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = String::new();
    let _ = writeln!(s, "dim = {dim}");
    let _ = writeln!(s, "basis = {}", row(lattice));
    let _ = writeln!(s, "covolume = {}", fmt_f64(lattice.det_abs()));
    let _ = writeln!(s, "density = {}", fmt_f64(lattice.density()));
    let _ = writeln!(s, "packing_radius = {}", fmt_f64(lattice.packing_radius()));
    let _ = writeln!(s, "shortest_vector = {}", lattice.shortest_vector().display(dim));
    let _ = writeln!(s, "covering_radius_estimate = {}", fmt_f64(lattice.covering_radius_estimate(grid)?));
    let _ = writeln!(s, "dual_basis = {}", row(&dual));
    let _ = writeln!(s, "dual_density = {}", fmt_f64(dual.density()));
    let _ = writeln!(s, "dual_packing_radius = {}", fmt_f64(dual.packing_radius()));
    Ok(s)
}

fn run_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = RunConfig::load(&a.config)?;
    let ov = Overrides {
        lattice_file: a.basis,
        seed: a.seed,
        radius: a.radius,
        radii: a.radii,
        tolerance: a.tolerance,
    };
    let report = match a.suite {
        Suite::Periodicity => verify::periodicity(&cfg.periodicity(&ov)?)?,
        Suite::Poisson => verify::poisson(&cfg.poisson(&ov)?)?,
        Suite::Complement => verify::complement(&cfg.complement(&ov)?)?,
        Suite::Homometry => verify::homometry(&cfg.homometry(&ov)?)?,
    };
    if let Some(path) = &a.out {
        write_file(path, &report.to_csv())?;
    }
    out.write_all(report.summary().as_bytes())?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_BREACH })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut o = Vec::new();
        let mut e = Vec::new();
        let code = run(std::iter::once("difflat").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn schema_lists_every_table() {
        let (code, out, _) = run_capture(&["--schema"]);
        assert_eq!(code, 0);
        for name in ["autocorr", "diffract", "bragg", "scan", "verify"] {
            assert!(out.contains(&format!("# difflat {name} v1")));
        }
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_capture(&[]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["lattice", "info"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn malformed_basis_cites_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.lat");
        std::fs::write(&path, "dim 2\nbasis 1 0 0 x\n").unwrap();
        let (code, _, err) = run_capture(&["lattice", "info", "--basis", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("bad.lat"), "{err}");
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn lattice_info_reports_hexagonal_constants() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hex.lat");
        Lattice::hexagonal().save(&path).unwrap();
        let (code, out, _) = run_capture(&["lattice", "info", "--basis", path.to_str().unwrap()]);
        assert_eq!(code, 0);
        let density: f64 = out
            .lines()
            .find_map(|l| l.strip_prefix("density = "))
            .unwrap()
            .parse()
            .unwrap();
        assert!((density - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn key_value_parser() {
        assert_eq!(parse_key_value("p=0.3").unwrap(), ("p".into(), "0.3".into()));
        assert!(parse_key_value("p").is_err());
        assert!(parse_key_value("=3").is_err());
    }
}
