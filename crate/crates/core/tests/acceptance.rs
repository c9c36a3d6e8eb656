//! Acceptance criteria, one line each. Runs without the libtest harness so
//! every criterion reports even when an earlier one fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use difflat::autocorr::{self, BumpConfig, Variant};
use difflat::diffraction::{self, bragg_estimate, intensity};
use difflat::lattice::ball_volume;
use difflat::{Complex64, DomainMode, Lattice, LatticeVector, WeightRule, WeightedComb};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn lattices() -> Vec<(&'static str, Lattice)> {
    vec![
        ("Z2", Lattice::integer(2).unwrap()),
        ("hex", Lattice::hexagonal()),
        ("diag(2,1)", Lattice::diagonal(&[2.0, 1.0]).unwrap()),
    ]
}

fn bernoulli(p: f64, seed: u64) -> WeightRule {
    WeightRule::Bernoulli { p, seed }
}

fn ones() -> WeightRule {
    WeightRule::Constant(Complex64::new(1.0, 0.0))
}

fn lv(c: &[i64]) -> LatticeVector {
    LatticeVector::new(c)
}

/// Lattice points of `Z^2` in the open disc of radius `r`, by a plain box scan.
fn disc_points(r: f64) -> Vec<[i64; 2]> {
    let m = r.ceil() as i64;
    let mut out = Vec::new();
    for a in -m..=m {
        for b in -m..=m {
            if ((a * a + b * b) as f64) < r * r {
                out.push([a, b]);
            }
        }
    }
    out
}

/// Brute-force count of lattice points `B m` with `|B m| < r`.
fn count_in_ball(lat: &Lattice, r: f64) -> usize {
    let b = lat.basis();
    let reach = (r / lat.packing_radius()).ceil() as i64 + 2;
    let mut n = 0;
    for i in -reach..=reach {
        for j in -reach..=reach {
            let x = b[(0, 0)] * i as f64 + b[(0, 1)] * j as f64;
            let y = b[(1, 0)] * i as f64 + b[(1, 1)] * j as f64;
            if x * x + y * y < r * r {
                n += 1;
            }
        }
    }
    n
}

fn periodicity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for (_, lat) in lattices() {
        let comb = WeightedComb::generate(&bernoulli(0.3, 42), &lat, 50.0).unwrap();
        let dual = lat.dual();
        for _ in 0..50 {
            let k: Vec<f64> = (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let base = intensity(&comb, &k).unwrap();
            for _ in 0..5 {
                let u = loop {
                    let u = lv(&[rng.gen_range(-4..=4), rng.gen_range(-4..=4)]);
                    if !u.is_zero() {
                        break u;
                    }
                };
                let uc = dual.cartesian(&u);
                let shifted: Vec<f64> = k.iter().zip(&uc).map(|(a, b)| a + b).collect();
                let d = intensity(&comb, &shifted).unwrap();
                worst = worst.max((d - base).abs() / base);
            }
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 1e-9 && t < Duration::from_secs(10),
        format!("max relative residual {worst:.3e} <= 1e-9 over 3 lattices x 50 k x 5 u; {t:.2?} < 10s"),
    )
}

fn poisson() -> Outcome {
    let start = Instant::now();
    let kstars = [lv(&[1, 0]), lv(&[0, 1]), lv(&[1, 1]), lv(&[2, -1]), lv(&[-3, 2])];
    let r = 200.0;
    let mut worst_rel = 0.0_f64;
    let mut worst_oracle = 0.0_f64;
    for (_, lat) in lattices() {
        let comb = WeightedComb::generate(&ones(), &lat, r).unwrap();
        let target = lat.density().powi(2);
        let exact = (count_in_ball(&lat, r) as f64 / ball_volume(2, r)).powi(2);
        for k in &kstars {
            let a = bragg_estimate(&comb, k).unwrap();
            worst_rel = worst_rel.max((a - target).abs() / target);
            worst_oracle = worst_oracle.max((a - exact).abs() / exact);
        }
    }
    let t = start.elapsed();
    outcome(
        worst_rel <= 0.02 && worst_oracle <= 1e-12 && t < Duration::from_secs(30),
        format!(
            "max |A/dens^2 - 1| = {worst_rel:.3e} <= 0.02; vs exact point counts {worst_oracle:.1e}; {t:.2?} < 30s"
        ),
    )
}

/// `nu(z)` over the open disc of radius `r` by direct pair enumeration.
fn brute_nu(weight: impl Fn(&[i64; 2]) -> f64, r: f64, z: [i64; 2]) -> f64 {
    let pts = disc_points(r);
    let inside: std::collections::HashSet<[i64; 2]> = pts.iter().copied().collect();
    let mut acc = 0.0;
    for t in &pts {
        let s = [t[0] - z[0], t[1] - z[1]];
        if inside.contains(&s) {
            acc += weight(t) * weight(&s);
        }
    }
    acc / (PI * r * r)
}

fn complement() -> Outcome {
    let lat = Lattice::integer(2).unwrap();
    let zs: Vec<[i64; 2]> = vec![
        [1, 0],
        [0, 1],
        [1, 1],
        [1, -1],
        [2, 0],
        [2, 1],
        [-1, 2],
        [3, 0],
        [2, 2],
        [3, -2],
    ];
    let zv: Vec<LatticeVector> = zs.iter().map(|z| lv(z)).collect();

    // oracle: direct pair counts at r = 25
    let s = WeightedComb::generate(&bernoulli(0.3, 42), &lat, 25.0).unwrap();
    let sp = s.complement().unwrap();
    let mut oracle_gap = 0.0_f64;
    for z in &zs {
        for comb in [&s, &sp] {
            let lib = autocorr::coefficient(comb, 25.0, &lv(z), Variant::PairInWindow).unwrap();
            let brute = brute_nu(|t| comb.weight(&lv(t)).re, 25.0, *z);
            oracle_gap = oracle_gap.max((lib.re - brute).abs() + lib.im.abs());
        }
    }

    let mut scaled = Vec::new();
    for r in [50.0, 100.0, 200.0] {
        let s = WeightedComb::generate(&bernoulli(0.3, 42), &lat, r).unwrap();
        let res = diffraction::complement_autocorr_check(&s, &zv).unwrap();
        let worst = res.iter().map(|(_, v)| *v).fold(0.0, f64::max);
        scaled.push(worst * r);
    }
    let c0 = scaled[0];
    let bounded = scaled[1..].iter().all(|v| *v <= 2.0 * c0);

    let cb = WeightedComb::generate(&WeightRule::Checkerboard, &lat, 100.0).unwrap();
    let cb_res = diffraction::complement_autocorr_check(&cb, &zv)
        .unwrap()
        .iter()
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);

    outcome(
        oracle_gap <= 1e-12 && bounded && cb_res <= 0.05,
        format!(
            "r*res at r=50,100,200: {:.3}, {:.3}, {:.3} (bound 2 x {:.3}); checkerboard {cb_res:.2e} <= 0.05; \
             pair-count oracle gap {oracle_gap:.1e}",
            scaled[0], scaled[1], scaled[2], c0
        ),
    )
}

fn homometry() -> Outcome {
    let lat = Lattice::integer(2).unwrap();
    let zs = lat.enumerate_closed_ball(5.0).unwrap();
    let m = |r: f64| {
        let s = WeightedComb::generate(&WeightRule::Checkerboard, &lat, r).unwrap();
        diffraction::homometry_check(&s, &zs).unwrap()
    };
    let (m100, m200) = (m(100.0), m(200.0));
    outcome(
        m200 <= 0.025 && m200 <= 2.0 * m100 / 2.0,
        format!("max_z |nu_S - nu_S'| = {m200:.3e} at r=200 <= 0.025; r=100 gives {m100:.3e} (halving within x2)"),
    )
}

fn bragg_difference() -> Outcome {
    let lat = Lattice::integer(2).unwrap();
    let s = WeightedComb::generate(&bernoulli(0.3, 42), &lat, 200.0).unwrap();
    let sp = s.complement().unwrap();
    let zero = LatticeVector::zero();
    let diff = bragg_estimate(&sp, &zero).unwrap() - bragg_estimate(&s, &zero).unwrap();

    // oracle: i.i.d. draws from an unrelated generator, counted directly
    let pts = disc_points(100.0);
    let vol = PI * 100.0 * 100.0;
    let draws: Vec<f64> = (0..50u64)
        .map(|seed| {
            let mut rng = rand::rngs::StdRng::seed_from_u64(1_000 + seed);
            let n = pts.iter().filter(|_| rng.gen_bool(0.3)).count() as f64;
            let nc = pts.len() as f64 - n;
            (nc / vol).powi(2) - (n / vol).powi(2)
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    let sd = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64).sqrt();
    outcome(
        (diff - 0.40).abs() <= 0.02 && (mean - 0.40).abs() <= 0.02,
        format!(
            "A' - A = {diff:.5} at r=200 (|. - 0.40| <= 0.02); i.i.d. oracle over 50 seeds at r=100: {mean:.5} +- {sd:.1e}"
        ),
    )
}

fn regularization() -> Outcome {
    let lat = Lattice::integer(2).unwrap();
    let comb = WeightedComb::generate(&bernoulli(0.5, 7), &lat, 40.0).unwrap();
    let table = autocorr::autocorrelation(&comb, 9.0, Variant::PairInWindow).unwrap();
    let cfg = BumpConfig::for_lattice(&lat).unwrap();
    let mut at_lattice = 0.0_f64;
    let mut at_mid = 0.0_f64;
    for a in -8i64..=8 {
        for b in -8i64..=8 {
            // half-integer grid: lattice points when both even, midpoints otherwise
            let x = [a as f64 / 2.0, b as f64 / 2.0];
            if x[0] * x[0] + x[1] * x[1] > 16.0 {
                continue;
            }
            let g = autocorr::regularized_from_table(&table, &lat, &cfg, &x).unwrap();
            if a % 2 == 0 && b % 2 == 0 {
                let nu = table.get(&lv(&[a / 2, b / 2])).unwrap();
                at_lattice = at_lattice.max((g - nu).norm());
            } else {
                at_mid = at_mid.max(g.norm());
            }
        }
    }
    outcome(
        at_lattice <= 1e-4 && at_mid <= 1e-12,
        format!(
            "eps = {}: max |g - nu| on |t| <= 4 = {at_lattice:.2e} <= 1e-4; max |g| at midpoints {at_mid:.1e} <= 1e-12",
            cfg.epsilon()
        ),
    )
}

fn positive_definite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let lats = lattices();
    let mut worst = f64::INFINITY;
    let mut all = true;
    for i in 0..20 {
        let (_, lat) = &lats[i % lats.len()];
        let rule = match i % 4 {
            0 => bernoulli(rng.gen_range(0.1..0.9), rng.gen()),
            1 => WeightRule::Checkerboard,
            2 => WeightRule::VisiblePoints,
            _ => WeightRule::Constant(Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
        };
        let comb = WeightedComb::generate(&rule, lat, 25.0).unwrap();
        let table = autocorr::autocorrelation(&comb, 8.0, Variant::PairInWindow).unwrap();
        let nu0 = table.get(&LatticeVector::zero()).unwrap().re;
        let mut pts: Vec<LatticeVector> = lat.enumerate_closed_ball(3.9).unwrap();
        // random subset of 6..=16 points
        let m = rng.gen_range(6..=16).min(pts.len());
        for j in 0..m {
            let k = rng.gen_range(j..pts.len());
            pts.swap(j, k);
        }
        pts.truncate(m);
        let min = table.min_gram_eigenvalue(&pts).unwrap();
        worst = worst.min(min / nu0);
        all &= min >= -1e-8 * nu0;
    }
    outcome(all, format!("20 Gram matrices: min eigenvalue / nu(0) = {worst:.3e} >= -1e-8"))
}

fn mobius(n: usize) -> Vec<i8> {
    let mut mu = vec![1i8; n + 1];
    let mut composite = vec![false; n + 1];
    for p in 2..=n {
        if !composite[p] {
            for m in (p..=n).step_by(p) {
                if m > p {
                    composite[m] = true;
                }
                mu[m] = -mu[m];
            }
            let p2 = p * p;
            for m in (p2..=n).step_by(p2) {
                mu[m] = 0;
            }
        }
    }
    mu
}

/// Nonzero points of `Z^2` with `|x| < rho`, counted row by row.
fn nonzero_disc_count(rho: f64) -> i64 {
    let r2 = rho * rho;
    let m = rho.ceil() as i64;
    let mut n = 0;
    for a in -m..=m {
        let rest = r2 - (a * a) as f64;
        if rest <= 0.0 {
            continue;
        }
        let mut b = rest.sqrt().floor() as i64;
        while b >= 0 && (b * b) as f64 >= rest {
            b -= 1;
        }
        while (((b + 1) * (b + 1)) as f64) < rest {
            b += 1;
        }
        if b >= 0 {
            n += 2 * b + 1;
        }
    }
    n - 1
}

fn known_constants() -> Outcome {
    let start = Instant::now();
    let target = 6.0 / (PI * PI);
    let z2 = Lattice::integer(2).unwrap();
    let r = 500.0;
    let vis = WeightedComb::generate(&WeightRule::VisiblePoints, &z2, r).unwrap();
    // Moebius inversion over dilations: V(r) = sum_d mu(d) N0(r / d)
    let mu = mobius(r as usize);
    let oracle: i64 = (1..=r as usize)
        .map(|d| mu[d] as i64 * nonzero_disc_count(r / d as f64))
        .sum();
    let vis_density = vis.len() as f64 / ball_volume(2, r);

    let z1 = Lattice::integer(1).unwrap();
    let r1 = 10_000.0;
    let sf = WeightedComb::generate(&WeightRule::KFree { k: 2 }, &z1, r1).unwrap();
    // trial division, origin counted by convention
    let squarefree = |n: i64| (2..).take_while(|d: &i64| d * d <= n).all(|d| n % (d * d) != 0);
    let sf_oracle = 1 + 2 * (1..10_000).filter(|&n| squarefree(n)).count();
    let sf_density = sf.len() as f64 / ball_volume(1, r1);
    let t = start.elapsed();
    let ok = vis.len() as i64 == oracle
        && sf.len() == sf_oracle
        && (vis_density / target - 1.0).abs() <= 0.01
        && (sf_density / target - 1.0).abs() <= 0.01
        && t < Duration::from_secs(60);
    outcome(
        ok,
        format!(
            "visible {vis_density:.5} (count {} = sieve {oracle}); squarefree {sf_density:.5} (count {} = sieve {sf_oracle}); \
             6/pi^2 = {target:.5}; {t:.2?} < 60s",
            vis.len(),
            sf.len()
        ),
    )
}

fn diffuse_floor() -> Outcome {
    let lat = Lattice::integer(2).unwrap();
    let (domain, grid) = diffraction::uniform_dual_grid(&lat, 64, DomainMode::Parallelepiped);
    let means: Vec<f64> = (0..10u64)
        .map(|seed| {
            let comb = WeightedComb::generate(&bernoulli(0.3, seed), &lat, 100.0).unwrap();
            diffraction::diffraction_grid(&comb, &grid, &domain).unwrap().mean_off_bragg()
        })
        .collect();
    let mean = means.iter().sum::<f64>() / means.len() as f64;
    let sd = (means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (means.len() - 1) as f64).sqrt();
    let target = 0.3 * 0.7 * lat.density();
    outcome(
        (mean / target - 1.0).abs() <= 0.05,
        format!(
            "mean off-Bragg intensity {mean:.5} vs p(1-p) dens = {target:.2} ({:+.2}%); single-seed sd {sd:.1e}",
            100.0 * (mean / target - 1.0)
        ),
    )
}

fn determinism() -> Outcome {
    let configs = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let dir = tempfile::tempdir().unwrap();
    let mut identical = true;
    let mut codes = Vec::new();
    for suite in ["periodicity", "complement", "homometry", "poisson"] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{suite}-{run}.csv"));
            let cfg = format!("{configs}/{suite}.toml");
            let args = ["difflat", "verify", "--suite", suite, "--config", &cfg, "--out", out.to_str().unwrap()];
            let code = difflat::cli::run(args, &mut Vec::new(), &mut Vec::new());
            codes.push(code);
            outputs.push(std::fs::read(&out).unwrap_or_default());
        }
        identical &= !outputs[0].is_empty() && outputs[0] == outputs[1];
    }
    outcome(
        identical && codes.iter().all(|c| *c == 0),
        format!("4 suites x 2 runs: byte-identical CSV = {identical}, exit codes {codes:?}"),
    )
}

fn main() {
    // libtest-style flags (e.g. --list from IDE tooling) are ignored
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 10] = [
        ("periodicity", periodicity),
        ("poisson", poisson),
        ("complement", complement),
        ("homometry", homometry),
        ("bragg difference", bragg_difference),
        ("regularization", regularization),
        ("positive definiteness", positive_definite),
        ("known constants", known_constants),
        ("diffuse floor", diffuse_floor),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.2?}]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
