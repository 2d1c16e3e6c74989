//! Acceptance suite, criteria 1 to 12, one PASS/FAIL line each.
//!
//! `cargo test --release --test acceptance` runs everything (about 20 min);
//! `cargo test --release --test acceptance -- 3 5 6` runs a selection.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use tvls::expcli::{self, Experiment, ExperimentConfig, RunManifest, MANIFEST_NAME};
use tvls::field::{mollified_disk, rasterize_disk, DomainSpec, Grid2D, ScalarField};
use tvls::level::{coarea_check, curvature_identity_check, layer_cake_check};
use tvls::linop::{adjoint_check, make_circular_radon, make_gaussian_blur, make_identity, make_mean_deficit};
use tvls::solver::{solve_warm, ProblemSpec, SolveConfig, SolveResult};
use tvls::tv::{TvContext, VectorField2};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }

    fn error(e: impl std::fmt::Display) -> Self {
        Self::new(false, format!("error: {e}"))
    }
}

/// Neumann denoising of `1_{B(0,1)}` on `B(0,2)` with `α = 0.3`.
fn neumann_problem(h: f64) -> ProblemSpec {
    let g = Grid2D::centered_square(2.0, h, 1).unwrap();
    let omega = rasterize_disk(&g, [0.0, 0.0], 2.0);
    let f = ScalarField::indicator(&rasterize_disk(&g, [0.0, 0.0], 1.0));
    let ctx = TvContext::forward(DomainSpec::neumann(omega).unwrap());
    ProblemSpec::new(make_identity(g), f, 0.3, ctx).unwrap()
}

/// Solves of the Neumann fixture shared by criteria 3, 5 and 6.
#[derive(Default)]
struct NeumannRuns {
    first: Option<(SolveResult, Duration)>,
    full: Option<SolveResult>,
}

const C3_ITER: usize = 20_000;
const C5_ITER: usize = 50_000;
const C6_ITER: usize = 20_000;
const CURVATURE_LEVEL: f64 = 0.3;

impl NeumannRuns {
    fn first(&mut self, p: &ProblemSpec) -> &(SolveResult, Duration) {
        self.first.get_or_insert_with(|| {
            let start = Instant::now();
            let cfg = SolveConfig::certified(p.f()).with_max_iter(C3_ITER);
            let r = solve_warm(p, &cfg, None, None).expect("criterion 3 solve");
            (r, start.elapsed())
        })
    }

    /// Continues the first solve up to `C5_ITER` iterations in total.
    fn full(&mut self, p: &ProblemSpec) -> &SolveResult {
        if self.full.is_none() {
            let (r0, _) = self.first(p);
            let rest = C5_ITER - r0.iterations;
            let r = if r0.converged || rest == 0 {
                r0.clone()
            } else {
                let cfg = SolveConfig::certified(p.f()).with_max_iter(rest);
                let mut r = solve_warm(p, &cfg, Some(&r0.u_alpha), Some(&r0.z_final)).expect("criterion 5 solve");
                r.iterations += r0.iterations;
                r
            };
            self.full = Some(r);
        }
        self.full.as_ref().unwrap()
    }
}

fn c1_adjoints() -> Outcome {
    let start = Instant::now();
    let g = Grid2D::centered_square(1.0, 2.0 / 64.0, 0).unwrap();
    let ops = [
        ("identity", make_identity(g)),
        ("gaussian-blur", make_gaussian_blur(g, 3.0 * g.h(), 4.0).unwrap()),
        ("mean-deficit", make_mean_deficit(g, 0.25).unwrap()),
        ("circular-radon", make_circular_radon(g, 180, 100, 0.05).unwrap()),
    ];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (k, (name, op)) in ops.iter().enumerate() {
        let e = adjoint_check(op, 20, 100 + k as u64);
        worst = worst.max(e);
        parts.push(format!("{name} {e:.2e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome::new(
        worst <= 1e-10 && secs < 10.0,
        format!("{} (bound 1e-10); {secs:.2} s (bound 10 s)", parts.join(", ")),
    )
}

fn c2_duality() -> Outcome {
    let g = Grid2D::centered_square(1.0, 2.0 / 62.0, 1).unwrap();
    let omega = || rasterize_disk(&g, [0.0, 0.0], 0.9);
    let domains = [
        DomainSpec::full_space(g, 1).unwrap(),
        DomainSpec::dirichlet(omega()).unwrap(),
        DomainSpec::neumann(omega()).unwrap(),
    ];
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut random = |n: usize| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for d in domains {
        let ctx = TvContext::forward(d);
        let mut regime_worst = 0.0f64;
        for _ in 0..20 {
            let u = ScalarField::new(g, random(g.len())).unwrap();
            let z = VectorField2::new(g, random(g.len()), random(g.len())).unwrap();
            let du = ctx.gradient(&u).unwrap();
            let divz = ctx.divergence(&z).unwrap();
            let lhs = du.inner(&z).unwrap();
            let rhs = -u.inner(&divz).unwrap();
            let scale = du.inner(&du).unwrap().sqrt() * z.inner(&z).unwrap().sqrt() + u.norm() * divz.norm();
            regime_worst = regime_worst.max((lhs - rhs).abs() / scale);
        }
        parts.push(format!("{} {regime_worst:.2e}", ctx.regime()));
        worst = worst.max(regime_worst);
    }
    Outcome::new(
        worst <= 1e-12,
        format!("{}x{} grid: {} (bound 1e-12)", g.nx(), g.ny(), parts.join(", ")),
    )
}

fn plateaus(r: &SolveResult) -> (f64, f64) {
    let g = *r.u_alpha.grid();
    let inner = rasterize_disk(&g, [0.0, 0.0], 0.7);
    let annulus = rasterize_disk(&g, [0.0, 0.0], 1.8)
        .difference(&rasterize_disk(&g, [0.0, 0.0], 1.3))
        .unwrap();
    (
        r.u_alpha.median_over(&inner).unwrap(),
        r.u_alpha.median_over(&annulus).unwrap(),
    )
}

fn c3_closed_form(runs: &mut NeumannRuns, p: &ProblemSpec) -> Outcome {
    let (r, took) = runs.first(p);
    let (c_in, c_out) = plateaus(r);
    let secs = took.as_secs_f64();
    Outcome::new(
        (c_in - 0.5).abs() <= 0.02 && (c_out - 0.2).abs() <= 0.02 && secs < 120.0,
        format!(
            "inside median {c_in:.4} (target 0.5 +- 0.02), outside median {c_out:.4} (target 0.2 +- 0.02); \
             {} iterations in {secs:.1} s (bound 120 s)",
            r.iterations
        ),
    )
}

fn c5_gap(runs: &mut NeumannRuns, p: &ProblemSpec) -> Outcome {
    let f0 = p.energy_at_zero();
    let r = runs.full(p);
    let Some(last) = r.final_record() else {
        return Outcome::new(false, "no history recorded");
    };
    let rel_gap = last.gap / f0;
    Outcome::new(
        rel_gap <= 1e-4 && last.feasibility <= 1e-3,
        format!(
            "gap/F(0) {rel_gap:.3e} (bound 1e-4), feasibility {:.3e} (bound 1e-3) after {} iterations",
            last.feasibility, r.iterations
        ),
    )
}

fn c6_curvature(runs: &mut NeumannRuns, p128: &ProblemSpec) -> Outcome {
    let mut errs = Vec::new();
    for h in [1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0] {
        let check = if h == 1.0 / 128.0 {
            curvature_identity_check(p128.ctx(), runs.full(p128), CURVATURE_LEVEL)
        } else {
            let p = neumann_problem(h);
            let cfg = SolveConfig::certified(p.f()).with_max_iter(C6_ITER);
            match solve_warm(&p, &cfg, None, None) {
                Ok(r) => curvature_identity_check(p.ctx(), &r, CURVATURE_LEVEL),
                Err(e) => return Outcome::error(e),
            }
        };
        match check {
            Ok(c) => errs.push(c.rel_err),
            Err(e) => return Outcome::error(e),
        }
    }
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    Outcome::new(
        errs[1] <= 0.05 && decreasing,
        format!(
            "rel_err at t = {CURVATURE_LEVEL}: h=1/64 {:.4}, h=1/128 {:.4} (bound 0.05), h=1/256 {:.4}; strictly decreasing: {decreasing}",
            errs[0], errs[1], errs[2]
        ),
    )
}

fn c7_coarea() -> Outcome {
    let g = Grid2D::centered_square(1.0, 2.0 / 128.0, 1).unwrap();
    let ctx = TvContext::forward(DomainSpec::full_space(g, 1).unwrap());
    let u = mollified_disk(&g, [0.2, 0.0], 0.1, 0.3).unwrap();
    let (co, lc) = match (coarea_check(&ctx, &u, 512), layer_cake_check(&u, 512)) {
        (Ok(a), Ok(b)) => (a.rel_err, b.rel_err),
        (Err(e), _) | (_, Err(e)) => return Outcome::error(e),
    };
    let step = ScalarField::indicator(&rasterize_disk(&g, [0.0, 0.0], 0.8))
        .scaled(0.6)
        .add(&ScalarField::indicator(&rasterize_disk(&g, [0.1, 0.05], 0.4)))
        .unwrap();
    let mut steps_ok = true;
    let mut worst_step = 0.0f64;
    for n in [4, 16, 100, 512] {
        let a = coarea_check(&ctx, &step, n).unwrap().rel_err;
        let b = layer_cake_check(&step, n).unwrap().rel_err;
        steps_ok &= a <= 1.0 / n as f64 && b <= 1.0 / n as f64;
        worst_step = worst_step.max(a.max(b) * n as f64);
    }
    Outcome::new(
        co <= 0.02 && lc <= 0.02 && steps_ok,
        format!(
            "mollified disk, 512 thresholds: coarea {co:.4}, layer-cake {lc:.4} (bound 0.02); \
             two-level step: worst n*rel_err {worst_step:.3} (bound 1)"
        ),
    )
}

fn load(experiment: Experiment, dir: &Path, extra: &[(&str, &str)]) -> ExperimentConfig {
    let mut o: Vec<(String, String)> = vec![("output_dir".into(), dir.display().to_string())];
    o.extend(extra.iter().map(|(k, v)| (k.to_string(), v.to_string())));
    ExperimentConfig::load(experiment, "", &o).expect("config")
}

fn run_pipeline(experiment: Experiment, dir: &Path) -> Result<(RunManifest, f64), Outcome> {
    let start = Instant::now();
    let m = expcli::run(&load(experiment, dir, &[])).map_err(Outcome::error)?;
    Ok((m, start.elapsed().as_secs_f64()))
}

fn stat(m: &RunManifest, key: &str) -> f64 {
    m.stat_f64(key).unwrap_or(f64::NAN)
}

fn flag(m: &RunManifest, key: &str) -> bool {
    m.stat(key) == Some("true")
}

fn c4_boundary(work: &Path) -> Outcome {
    let (m, secs) = match run_pipeline(Experiment::DenoiseBoundary, &work.join("c4")) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let tol = stat(&m, "tol_residual");
    let bound = 10.0 * tol;
    let (ab, ac) = (stat(&m, "l1.a_b"), stat(&m, "l1.a_c"));
    Outcome::new(
        ab <= bound && ac > 10.0 * bound,
        format!(
            "|u_a - u_b|_1 {ab:.3e} (bound 10 tol = {bound:.3e}), |u_a - u_c|_1 {ac:.3e} (needs > {:.3e}); {secs:.0} s",
            10.0 * bound
        ),
    )
}

/// Criteria 8 and 9 share one sweep.
fn c8_c9_sweep(work: &Path) -> (Outcome, Outcome) {
    let (m, secs) = match run_pipeline(Experiment::ConvergenceSweep, &work.join("c8")) {
        Ok(x) => x,
        Err(o) => {
            let detail = o.detail.clone();
            return (o, Outcome::new(false, detail));
        }
    };
    let h = stat(&m, "h");
    let dh = flag(&m, "trend.t0.5.hausdorff_decreasing");
    let sd = flag(&m, "trend.t0.5.sym_diff_decreasing");
    let fin = stat(&m, "trend.t0.5.final_hausdorff");
    let dists: Vec<String> = fs::read_to_string(work.join("c8").join("convergence.csv"))
        .unwrap_or_default()
        .lines()
        .skip(1)
        .filter_map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            let t: f64 = cols.get(2)?.parse().ok()?;
            let d: f64 = cols.get(3)?.parse().ok()?;
            (t == 0.5).then(|| format!("{:.2}", d / h))
        })
        .collect();
    let c8 = Outcome::new(
        dh && sd && fin <= 4.0 * h && secs < 600.0,
        format!(
            "d_H/h strictly decreasing: {dh}, final d_H {:.3} h (bound 4 h), |U_n sym-diff U| strictly decreasing: {sd}; \
             d_H series {}; {secs:.0} s (bound 600 s)",
            fin / h,
            dists.join(" ")
        ),
    );
    let converged = (0..5).filter(|n| m.stat(&format!("u_{n}.converged")) == Some("true")).count();
    let ratio = stat(&m, "density.min_ratio");
    let c9 = Outcome::new(
        ratio >= 1.0 / 16.0 - 0.02,
        format!(
            "min inner/outer ratio {ratio:.4} over r in 4h, 8h, 16h (bound {:.4}); {converged} of 5 runs met the tolerance",
            1.0 / 16.0 - 0.02
        ),
    );
    (c8, c9)
}

fn tvls() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tvls"))
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().expect("spawn tvls").status.code().unwrap_or(-1)
}

fn c10_guard(work: &Path) -> Outcome {
    let cfg = work.join("c10.txt");
    fs::write(&cfg, "# defaults\n").unwrap();
    let limit = format!("{}", 2.0 * PI.sqrt());
    let mut parts = Vec::new();
    let mut ok = true;
    let cases: [(&str, &str, &str); 5] = [
        ("convergence-sweep", "full-space", "5"),
        ("convergence-sweep", "full-space", &limit),
        ("convergence-sweep", "dirichlet", "5"),
        ("convergence-sweep", "dirichlet", &limit),
        ("radon", "", "5"),
    ];
    for (sub, regime, eta) in cases {
        let mut cmd = tvls();
        cmd.args([sub, "--config"]).arg(&cfg).args(["--eta", eta, "--output_dir"]).arg(work.join("c10"));
        if !regime.is_empty() {
            cmd.args(["--regime", regime]);
        }
        let code = exit_code(&mut cmd);
        ok &= code == 2;
        parts.push(format!("{sub} {regime} eta={eta}: exit {code}"));
    }
    Outcome::new(ok, parts.join("; "))
}

fn c11_radon(work: &Path) -> Outcome {
    let (m, secs) = match run_pipeline(Experiment::Radon, &work.join("c11")) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let dh = stat(&m, "noiseless.hausdorff_t0.5_over_h");
    let norm = m.opnorm("R").unwrap_or(f64::NAN);
    Outcome::new(
        dh <= 4.0 && norm <= 2.0 * PI * 1.05 && secs < 900.0,
        format!(
            "noiseless d_H at t = 0.5: {dh:.3} h (bound 4 h), |R| estimate {norm:.4} (bound {:.4}); {secs:.0} s (bound 900 s)",
            2.0 * PI * 1.05
        ),
    )
}

/// Small configurations for the replay check.
const REPLAY_RUNS: [(&str, &str); 4] = [
    ("deblur", "n = 64\ndisk_radius = 20\nmax_iter = 300\n"),
    ("denoise-boundary", "h = 1/8\nmax_iter = 500\n"),
    ("radon", "n = 48\nn_angles = 40\nn_radii = 30\nmax_iter = 200\n"),
    ("convergence-sweep", "h = 1/32\nmax_iter = 300\n"),
];

fn c12_replay(work: &Path) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (sub, text) in REPLAY_RUNS {
        let cfg = work.join(format!("c12_{sub}.txt"));
        fs::write(&cfg, text).unwrap();
        let dir = work.join("c12").join(sub);
        let again = work.join("c12").join(format!("{sub}_replay"));
        let code = exit_code(tvls().args([sub, "--emit-plots", "--config"]).arg(&cfg).arg("--output_dir").arg(&dir));
        let replay = exit_code(
            tvls()
                .arg("replay")
                .arg("--manifest")
                .arg(dir.join(MANIFEST_NAME))
                .arg("--output-dir")
                .arg(&again),
        );
        let (files, differing) = compare_outputs(&dir, &again);
        let good = code == 0 && replay == 0 && files > 0 && differing.is_empty();
        ok &= good;
        parts.push(format!(
            "{sub}: run {code}, replay {replay}, {files} files, {} differ",
            differing.len()
        ));
    }
    Outcome::new(ok, parts.join("; "))
}

/// Byte comparison of every CSV and PGM listed in the original manifest.
fn compare_outputs(a: &Path, b: &Path) -> (usize, Vec<PathBuf>) {
    let Ok(text) = fs::read_to_string(a.join(MANIFEST_NAME)) else {
        return (0, vec![a.to_path_buf()]);
    };
    let m = RunManifest::parse(&text).expect("manifest");
    let mut n = 0;
    let mut bad = Vec::new();
    for f in &m.files {
        if !(f.path.ends_with(".csv") || f.path.ends_with(".pgm")) {
            continue;
        }
        n += 1;
        match (fs::read(a.join(&f.path)), fs::read(b.join(&f.path))) {
            (Ok(x), Ok(y)) if x == y => {}
            _ => bad.push(PathBuf::from(&f.path)),
        }
    }
    (n, bad)
}

fn report(n: usize, o: &Outcome, took: Duration) -> bool {
    println!(
        "criterion {n:>2}: {}  {} [{:.1} s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        took.as_secs_f64()
    );
    o.pass
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |n: usize| selected.is_empty() || selected.contains(&n);
    let work = tempfile::tempdir().expect("temporary directory");
    let work = work.path();
    let p128 = neumann_problem(1.0 / 128.0);
    let mut runs = NeumannRuns::default();
    let mut failed = Vec::new();
    let mut record = |n: usize, o: Outcome, took: Duration| {
        if !report(n, &o, took) {
            failed.push(n);
        }
    };
    for n in 1..=12 {
        if !wanted(n) || (n == 9 && wanted(8)) {
            continue;
        }
        let start = Instant::now();
        match n {
            1 => record(1, c1_adjoints(), start.elapsed()),
            2 => record(2, c2_duality(), start.elapsed()),
            3 => record(3, c3_closed_form(&mut runs, &p128), start.elapsed()),
            4 => record(4, c4_boundary(work), start.elapsed()),
            5 => record(5, c5_gap(&mut runs, &p128), start.elapsed()),
            6 => record(6, c6_curvature(&mut runs, &p128), start.elapsed()),
            7 => record(7, c7_coarea(), start.elapsed()),
            8 | 9 => {
                let (c8, c9) = c8_c9_sweep(work);
                let took = start.elapsed();
                if wanted(8) {
                    record(8, c8, took);
                }
                if wanted(9) {
                    record(9, c9, took);
                }
            }
            10 => record(10, c10_guard(work), start.elapsed()),
            11 => record(11, c11_radon(work), start.elapsed()),
            12 => record(12, c12_replay(work), start.elapsed()),
            _ => unreachable!(),
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
