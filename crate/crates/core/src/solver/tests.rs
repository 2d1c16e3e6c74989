use super::*;
use crate::field::{rasterize_disk, DomainSpec, Grid2D};
use crate::linop::{make_gaussian_blur, make_identity};
use crate::tv::Scheme;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn neumann_disk_problem(h: f64, alpha: f64) -> ProblemSpec {
    let g = Grid2D::centered_square(2.0, h, 1).unwrap();
    let omega = rasterize_disk(&g, [0.0, 0.0], 2.0);
    let f = ScalarField::indicator(&rasterize_disk(&g, [0.0, 0.0], 1.0));
    let ctx = TvContext::forward(DomainSpec::neumann(omega).unwrap());
    ProblemSpec::new(make_identity(g), f, alpha, ctx).unwrap()
}

fn dirichlet_blob(alpha: f64) -> ProblemSpec {
    let g = Grid2D::centered_square(1.0, 1.0 / 16.0, 1).unwrap();
    let omega = rasterize_disk(&g, [0.0, 0.0], 0.95);
    let f = ScalarField::from_fn(g, |x, y| {
        if omega_contains(x, y) {
            (1.0 - 2.0 * (x * x + y * y)).max(0.0) + 0.3 * (3.0 * x).sin()
        } else {
            0.0
        }
    })
    .unwrap();
    let ctx = TvContext::forward(DomainSpec::dirichlet(omega).unwrap());
    ProblemSpec::new(make_identity(g), f, alpha, ctx).unwrap()
}

fn omega_contains(x: f64, y: f64) -> bool {
    x * x + y * y <= 0.95 * 0.95
}

#[test]
fn zero_data_gives_zero() {
    let g = Grid2D::centered_square(1.0, 1.0 / 16.0, 1).unwrap();
    let ctx = TvContext::forward(DomainSpec::full_space(g, 1).unwrap());
    let blur = make_gaussian_blur(g, 2.0 / 16.0, 3.0).unwrap();
    let p = ProblemSpec::new(blur, ScalarField::zeros(g), 0.2, ctx).unwrap();
    let r = solve(&p, &SolveConfig::default()).unwrap();
    assert!(r.u_alpha.max_abs() == 0.0);
    assert_eq!(primal_energy(&p, &r.u_alpha).unwrap(), 0.0);
    let d = dual_surrogate(&p, &r).unwrap();
    assert_eq!(d.d_alpha, 0.0);
    assert_eq!(d.gap, 0.0);
}

#[test]
fn neumann_disk_plateaus() {
    // Minimizer on B(0,2) for f = 1_{B(0,1)}: constant c_in on B(0,1) and
    // c_out on the annulus, with c_in = 1 - α P/|B1| and c_out = α P/|annulus|,
    // P = 2π. Mean preservation gives c_in π + c_out 3π = π.
    let alpha = 0.3;
    let p = neumann_disk_problem(1.0 / 32.0, alpha);
    let cfg = SolveConfig::default().with_tol(1e-7).with_max_iter(20_000);
    let r = solve(&p, &cfg).unwrap();
    let g = *p.ctx().grid();
    let inner = rasterize_disk(&g, [0.0, 0.0], 0.7);
    let annulus = rasterize_disk(&g, [0.0, 0.0], 1.8)
        .difference(&rasterize_disk(&g, [0.0, 0.0], 1.3))
        .unwrap();
    let c_in = r.u_alpha.median_over(&inner).unwrap();
    let c_out = r.u_alpha.median_over(&annulus).unwrap();
    assert!((c_out - 0.2).abs() < 0.02, "outside plateau {c_out}");
    assert!((c_in - 0.4).abs() < 0.05, "inside plateau {c_in}");
    // discrete mass conservation of the Neumann denoising problem
    let mass_u = r.u_alpha.integral();
    let mass_f = p.f().masked(p.ctx().domain().omega()).unwrap().integral();
    assert!((mass_u - mass_f).abs() < 1e-3 * mass_f, "{mass_u} vs {mass_f}");
}

#[test]
fn dirichlet_large_alpha_is_zero() {
    let base = dirichlet_blob(1.0);
    let diam = 2.0 * 0.95;
    let alpha = 10.0 * base.f().max_abs() * diam;
    let p = base.with_alpha(alpha).unwrap();
    let r = solve(&p, &SolveConfig::default()).unwrap();
    let f0 = p.energy_at_zero();
    let fu = primal_energy(&p, &r.u_alpha).unwrap();
    assert!(fu >= f0 - 1e-10 * f0);
    assert!(r.u_alpha.max_abs() < 1e-3 * p.f().max_abs(), "{}", r.u_alpha.max_abs());
    // no other candidate beats zero
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    for _ in 0..5 {
        let c: f64 = rng.random_range(0.05..1.0);
        let cand = p.f().scaled(c);
        assert!(primal_energy(&p, &cand).unwrap() >= f0);
    }
}

#[test]
fn primal_energy_cases() {
    let p = dirichlet_blob(0.1);
    let g = *p.ctx().grid();
    let zero = ScalarField::zeros(g);
    assert_eq!(primal_energy(&p, &zero).unwrap(), p.energy_at_zero());
    let exact = p.f().clone();
    let want = 0.1 * p.ctx().tv_value(&exact).unwrap();
    assert!((primal_energy(&p, &exact).unwrap() - want).abs() <= 1e-14 * want);

    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let u = ScalarField::new(g, (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    // Dirichlet TV only sees values on omega, so restrict u first
    let h = g.h();
    let um = u.masked(p.ctx().domain().omega()).unwrap();
    let mut tvm = 0.0;
    let mut res2m = 0.0;
    for (a, b) in um.data().iter().zip(p.f().data()) {
        res2m += (a - b) * (a - b);
    }
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let ui = um.get(i, j);
            let dx = if i + 1 < g.nx() { um.get(i + 1, j) } else { 0.0 } - ui;
            let dy = if j + 1 < g.ny() { um.get(i, j + 1) } else { 0.0 } - ui;
            tvm += h * (dx * dx + dy * dy).sqrt();
        }
    }
    let want = 0.5 * g.cell_area() * res2m + 0.1 * tvm;
    let got = primal_energy(&p, &um).unwrap();
    assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
}

#[test]
fn result_invariants() {
    let g = Grid2D::centered_square(1.0, 1.0 / 24.0, 2).unwrap();
    let ctx = TvContext::forward(DomainSpec::full_space(g, 2).unwrap());
    let blur = make_gaussian_blur(g, 1.5 / 24.0, 3.0).unwrap();
    let truth = ScalarField::indicator(&rasterize_disk(&g, [0.1, 0.0], 0.5));
    let f = blur.apply(&truth).unwrap();
    let alpha = 0.02;
    let p = ProblemSpec::new(blur.clone(), f.clone(), alpha, ctx).unwrap();
    let r = solve(&p, &SolveConfig::default().with_max_iter(3000)).unwrap();

    let resid = f.sub(&blur.apply(&r.u_alpha).unwrap()).unwrap();
    let ident = r.p_alpha.scaled(alpha).sub(&resid).unwrap().norm();
    assert!(ident <= 1e-12 * f.norm(), "{ident}");
    assert!(r.z_final.max_magnitude() <= alpha * (1.0 + 1e-12));
    let v = blur.adjoint(&r.p_alpha).unwrap().masked(p.ctx().domain().support()).unwrap();
    assert!(v.sub(&r.v_alpha).unwrap().max_abs() <= 1e-14 * (1.0 + v.max_abs()));
}

#[test]
fn weak_duality_at_convergence() {
    let p = dirichlet_blob(0.05);
    let r = solve(&p, &SolveConfig::certified(p.f()).with_max_iter(60_000)).unwrap();
    let d = dual_surrogate(&p, &r).unwrap();
    assert!(d.feasibility < 1e-6, "{d:?}");
    assert!(d.gap >= -1e-10 * p.energy_at_zero(), "{d:?}");
    assert!(d.gap <= 1e-6 * p.energy_at_zero(), "{d:?}");
}

#[test]
fn upwind_dual_is_sign_constrained() {
    let g = Grid2D::centered_square(1.0, 1.0 / 16.0, 1).unwrap();
    let ctx = TvContext::new(DomainSpec::full_space(g, 1).unwrap(), Scheme::Upwind);
    let f = ScalarField::indicator(&rasterize_disk(&g, [0.0, 0.0], 0.6));
    let p = ProblemSpec::new(make_identity(g), f, 0.1, ctx).unwrap();
    let r = solve(&p, &SolveConfig::default().with_max_iter(2000)).unwrap();
    assert!(r.z_final.max_magnitude() <= 0.1 * (1.0 + 1e-12));
    for c in r.z_final.components() {
        assert!(c.iter().all(|&v| v <= 0.0));
    }
    let d = dual_surrogate(&p, &r).unwrap();
    assert!(d.feasibility < 1e-2, "{d:?}");
}

#[test]
fn scaling_equivariance() {
    let p = dirichlet_blob(0.05);
    let c = 3.0;
    let q = ProblemSpec::new(p.op().clone(), p.f().scaled(c), c * p.alpha(), p.ctx().clone()).unwrap();
    let cfg = SolveConfig::default().with_tol(1e-9).with_max_iter(40_000);
    let a = solve(&p, &cfg).unwrap();
    let b = solve(&q, &cfg).unwrap();
    let diff = b.u_alpha.sub(&a.u_alpha.scaled(c)).unwrap().max_abs();
    assert!(diff < 1e-5 * c, "{diff}");
}

#[test]
fn solves_are_deterministic() {
    let p = dirichlet_blob(0.05);
    let cfg = SolveConfig::default().with_max_iter(500);
    let a = solve(&p, &cfg).unwrap();
    let b = solve(&p, &cfg).unwrap();
    assert_eq!(a.u_alpha, b.u_alpha);
    assert_eq!(a.p_alpha, b.p_alpha);
    assert_eq!(a.history, b.history);
    assert_eq!(a.z_final, b.z_final);
}

#[test]
fn subgradient_pairing_at_convergence() {
    let p = dirichlet_blob(0.05);
    let cfg = SolveConfig::certified(p.f()).with_max_iter(60_000);
    let r = solve(&p, &cfg).unwrap();
    let tv = p.ctx().tv_value(&r.u_alpha).unwrap();
    let pair = r.v_alpha.inner(&r.u_alpha).unwrap();
    assert!((pair - tv).abs() <= 1e-3 * (1.0 + tv), "{pair} vs {tv}");
}

#[test]
fn fixed_steps_are_validated() {
    let p = dirichlet_blob(0.05);
    let cfg = SolveConfig {
        steps: StepRule::Fixed { tau: 1.0, sigma: 1.0 },
        ..SolveConfig::default()
    };
    assert!(matches!(solve(&p, &cfg), Err(Error::InvalidParameter(_))));
    let h = p.ctx().grid().h();
    let l = (1.0f64 + 8.0 / (h * h)).sqrt() * 1.1;
    let cfg = SolveConfig {
        steps: StepRule::Fixed { tau: 1.0 / l, sigma: 1.0 / l },
        max_iter: 200,
        ..SolveConfig::default()
    };
    assert!(solve(&p, &cfg).is_ok());
}

#[test]
fn probe_single_alpha_has_no_flag() {
    let p = dirichlet_blob(0.1);
    let (probe, results) = dual_convergence_probe(&[p], &SolveConfig::default().with_max_iter(300)).unwrap();
    assert_eq!(probe.rows.len(), 1);
    assert_eq!(results.len(), 1);
    assert_eq!(probe.bounded, None);
    assert!(probe.rows[0].diff_prev.is_none());
}

#[test]
fn probe_rejects_mixed_data() {
    let p = dirichlet_blob(0.1);
    let q = p.with_data(p.f().scaled(2.0)).unwrap().with_alpha(0.05).unwrap();
    assert!(dual_convergence_probe(&[p, q], &SolveConfig::default()).is_err());
}

#[test]
fn history_csv_header() {
    let p = dirichlet_blob(0.1);
    let r = solve(&p, &SolveConfig::default().with_max_iter(100)).unwrap();
    let csv = history_csv(&r.history);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "iter,F_alpha,D_alpha,gap,feasibility_violation,residual");
    assert_eq!(lines.count(), r.history.len());
}


#[derive(Debug)]
struct WrongAdjoint(Grid2D);

impl crate::linop::LinearOperator for WrongAdjoint {
    fn domain_grid(&self) -> &Grid2D {
        &self.0
    }
    fn range_grid(&self) -> &Grid2D {
        &self.0
    }
    fn kind(&self) -> crate::linop::OperatorKind {
        crate::linop::OperatorKind::Custom("wrong-adjoint".into())
    }
    fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        out.copy_from_slice(u);
    }
    fn adjoint_into(&self, p: &[f64], out: &mut [f64]) {
        for (o, &v) in out.iter_mut().zip(p) {
            *o = -v;
        }
    }
}

#[test]
fn broken_adjoint_is_reported_as_divergence() {
    let g = Grid2D::centered_square(1.0, 1.0 / 16.0, 1).unwrap();
    let ctx = TvContext::forward(DomainSpec::full_space(g, 1).unwrap());
    let f = ScalarField::indicator(&rasterize_disk(&g, [0.0, 0.0], 0.5));
    let op = crate::linop::LinearOperatorHandle::new(WrongAdjoint(g));
    let p = ProblemSpec::new(op, f, 0.1, ctx).unwrap();
    let err = solve(&p, &SolveConfig::default()).unwrap_err();
    assert!(matches!(err, Error::Divergence { .. }), "{err:?}");
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    fn tiny_problem(data: Vec<f64>, alpha: f64, blur: bool) -> ProblemSpec {
        let g = Grid2D::new(10, 10, 0.1, [0.0, 0.0]).unwrap();
        let ctx = TvContext::forward(DomainSpec::full_space(g, 1).unwrap());
        let op = if blur {
            make_gaussian_blur(g, 0.1, 3.0).unwrap()
        } else {
            make_identity(g)
        };
        ProblemSpec::new(op, ScalarField::new(g, data).unwrap(), alpha, ctx).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn dual_variable_identity_holds(
            data in proptest::collection::vec(-2.0f64..2.0, 100),
            alpha in 0.005f64..0.5,
            blur in any::<bool>(),
            iters in 1usize..400,
        ) {
            let p = tiny_problem(data, alpha, blur);
            let r = solve(&p, &SolveConfig::default().with_max_iter(iters)).unwrap();
            let resid = p.f().sub(&p.op().apply(&r.u_alpha).unwrap()).unwrap();
            let ident = r.p_alpha.scaled(alpha).sub(&resid).unwrap().norm();
            prop_assert!(ident <= 1e-12 * p.f().norm().max(1e-300), "{ident}");
            prop_assert!(r.z_final.max_magnitude() <= alpha * (1.0 + 1e-12));
        }

        #[test]
        fn weak_duality_at_the_certified_tolerance(
            data in proptest::collection::vec(-2.0f64..2.0, 100),
            alpha in 0.01f64..0.5,
        ) {
            let p = tiny_problem(data, alpha, false);
            let r = solve(&p, &SolveConfig::certified(p.f()).with_max_iter(50_000)).unwrap();
            prop_assume!(r.converged);
            let d = dual_surrogate(&p, &r).unwrap();
            // p_α is feasible only up to e = A*p − div z / α, which costs at most α |<u, e>|
            let support = p.ctx().domain().support();
            let div = p.ctx().divergence(&r.z_final).unwrap().scaled(1.0 / alpha);
            let e = r.v_alpha.sub(&div).unwrap().masked(support).unwrap();
            let slack = alpha * r.u_alpha.inner(&e).unwrap().abs();
            prop_assert!(d.gap >= -1e-10 * p.energy_at_zero() - slack * (1.0 + 1e-6), "{d:?}, slack {slack}");
        }

        #[test]
        fn solves_repeat_bit_for_bit(
            data in proptest::collection::vec(-2.0f64..2.0, 100),
            alpha in 0.005f64..0.5,
            blur in any::<bool>(),
        ) {
            let p = tiny_problem(data, alpha, blur);
            let cfg = SolveConfig::default().with_max_iter(200);
            let (a, b) = (solve(&p, &cfg).unwrap(), solve(&p, &cfg).unwrap());
            prop_assert_eq!(a.u_alpha, b.u_alpha);
            prop_assert_eq!(a.z_final, b.z_final);
            prop_assert_eq!(a.history, b.history);
        }

        #[test]
        fn denoising_is_scale_equivariant(
            data in proptest::collection::vec(-2.0f64..2.0, 100),
            alpha in 0.01f64..0.5,
            c in 0.25f64..4.0,
        ) {
            let p = tiny_problem(data, alpha, false);
            let q = ProblemSpec::new(p.op().clone(), p.f().scaled(c), c * alpha, p.ctx().clone()).unwrap();
            let cfg = SolveConfig::certified(p.f()).with_max_iter(50_000);
            let (a, b) = (solve(&p, &cfg).unwrap(), solve(&q, &cfg.clone().with_tol(c * cfg.tol_residual)).unwrap());
            prop_assume!(a.converged && b.converged);
            let diff = b.u_alpha.sub(&a.u_alpha.scaled(c)).unwrap().max_abs();
            prop_assert!(diff <= 1e-5 * c * (1.0 + a.u_alpha.max_abs()), "{diff}");
        }
    }
}
