use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use muskat::cli::{parse_config, parse_series_csv, write_series_csv, PresetChoice, RunConfig};
use muskat::evolution::rhs;
use muskat::kernels::{bs_plane, bs_torus, desingularized_limit};
use muskat::model::{
    build_initial_graph, diagnostics, validate_params, DiagnosticsRecord, Geometry, GraphState, GridSpec, PhysicalParams,
    Preset, RawParams,
};
use muskat::quadrature::lobatto::{abscissae, apply_rule};
use muskat::quadrature::QuadratureConfig;
use muskat::stepper::{run, RunRecord, StepperConfig, Termination};
use muskat::turning::{make_curve, Family, TurningEvaluator};
use muskat::vorticity::{fredholm_residual, omega1, omega2, omega2_strip, omega2_torus, Formulation};

const A: f64 = 4.0 * PI;
const CONTRASTS: [f64; 5] = [-999.0 / 1001.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 999.0 / 1001.0];
const MESH_ORDER_FLOOR: f64 = 2.95;
const DISPERSION_TOL: f64 = 1e-3;

fn params(k: f64, h2: f64, g: Geometry) -> PhysicalParams {
    PhysicalParams::with_contrast(k, A, h2, g).unwrap()
}

fn line_graph(f: impl Fn(f64) -> f64, n: usize, geometry: Geometry) -> GraphState {
    let hw = 8.0;
    let h = 2.0 * hw / (n - 1) as f64;
    let rows = (0..n).map(|i| -hw + h * i as f64).map(|x| (x, f(x))).collect();
    build_initial_graph(&Preset::Table(rows), &GridSpec::new(n), geometry).unwrap()
}

fn torus_graph(preset: &Preset, n: usize) -> GraphState {
    build_initial_graph(preset, &GridSpec::new(n), Geometry::Torus).unwrap()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

proptest! {
    #[test]
    fn contrast_is_antisymmetric(k1 in 1e-3f64..1e3, k2 in 1e-3f64..1e3) {
        let p = |a, b| validate_params(&RawParams { kappa1: a, kappa2: b, rho_jump: 1.0, h2: 1.0, geometry: Geometry::Plane }).unwrap();
        let (x, y) = (p(k1, k2).k(), p(k2, k1).k());
        prop_assert!((x + y).abs() <= 1e-15);
        prop_assert!(x.abs() < 1.0);
    }

    #[test]
    fn kernels_are_odd_under_swap(
        x in -3.0f64..3.0, y in -1.5f64..1.5, mu in -3.0f64..3.0, nu in -1.5f64..1.5,
    ) {
        prop_assume!((x - mu).abs() + (y - nu).abs() > 1e-6);
        let a = bs_plane(x, y, mu, nu).unwrap();
        let b = bs_plane(mu, nu, x, y).unwrap();
        prop_assert!((a.u + b.u).abs() <= 1e-12 * a.u.abs().max(1.0) && (a.v + b.v).abs() <= 1e-12 * a.v.abs().max(1.0));
        let a = bs_torus(x, y, mu, nu).unwrap();
        let b = bs_torus(mu, nu, x, y).unwrap();
        prop_assert!((a.u + b.u).abs() <= 1e-12 * a.u.abs().max(1.0) && (a.v + b.v).abs() <= 1e-12 * a.v.abs().max(1.0));
    }

    #[test]
    fn torus_kernel_is_locally_planar(theta in 0.0f64..(2.0 * PI), r in 1e-6f64..1e-2, x in -2.0f64..2.0, y in -1.0f64..1.0) {
        let (mu, nu) = (x + r * theta.cos(), y + r * theta.sin());
        let t = bs_torus(x, y, mu, nu).unwrap();
        let p = bs_plane(x, y, mu, nu).unwrap();
        let norm = p.u.hypot(p.v);
        prop_assert!((t.u - p.u).hypot(t.v - p.v) <= 1e-3 * norm);
    }

    #[test]
    fn desingularized_limit_matches_integrand(a in 0.1f64..1.0, b in 0.5f64..2.0, x in -2.0f64..2.0) {
        let f = |s: f64| a * (b * s).sin();
        let df = |s: f64| a * b * (b * s).cos();
        let (p, q) = (df(x), -a * b * b * (b * x).sin());
        let beta = x - 1e-6;
        let (u, dz, dd) = (x - beta, f(x) - f(beta), df(x) - df(beta));
        let plane = u * dd / (u * u + dz * dz);
        let torus = u.sin() * dd / muskat::kernels::cosh_minus_cos(dz, u);
        let strip = u.sinh() * dd / muskat::kernels::cosh_minus_cos(u, dz);
        let tol = 1e-4 * (1.0 + q.abs());
        prop_assert!((plane - desingularized_limit(Geometry::Plane, p, q)).abs() <= tol);
        prop_assert!((torus - desingularized_limit(Geometry::Torus, p, q)).abs() <= tol);
        prop_assert!((strip - desingularized_limit(Geometry::Strip, p, q)).abs() <= tol);
    }

    #[test]
    fn lobatto_rule_exactness(coef in prop::collection::vec(-2.0f64..2.0, 10), a in -3.0f64..0.0, w in 0.1f64..3.0) {
        let b = a + w;
        let poly = |c: &[f64], x: f64| c.iter().rev().fold(0.0, |acc, ci| acc * x + ci);
        let exact = |c: &[f64]| {
            let prim = |x: f64| c.iter().enumerate().map(|(k, ci)| ci * x.powi(k as i32 + 1) / (k + 1) as f64).sum::<f64>();
            prim(b) - prim(a)
        };
        for degree in [5usize, 9] {
            let c = &coef[..=degree];
            let x = abscissae(a, b);
            let v = x.map(|xi| poly(c, xi));
            let e = apply_rule(a, b, &v);
            let scale = c.iter().map(|v| v.abs()).sum::<f64>() * 3f64.powi(degree as i32 + 1) * w;
            prop_assert!((e.value - exact(c)).abs() <= 1e-13 * scale);
            if degree == 5 {
                prop_assert!(e.error <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn csv_round_trip(rows in prop::collection::vec(prop::array::uniform7(-1e6f64..1e6), 1..20)) {
        let series: Vec<RunRecord> = rows
            .iter()
            .map(|r| RunRecord {
                diagnostics: DiagnosticsRecord {
                    time: r[0], sup_norm: r[1], slope_sup_norm: r[2], l2_norm: r[3], min_gap: r[4], dh_sup: r[5],
                    d_sup: None, rayleigh_taylor_stable: true,
                },
                budget: r[6],
            })
            .collect();
        let text = write_series_csv(&series);
        prop_assert!(!text.contains('\r'));
        let back = parse_series_csv(&text).unwrap();
        prop_assert_eq!(back, rows);
    }

    #[test]
    fn config_round_trip(
        geometry in prop::sample::select(vec![Geometry::Plane, Geometry::Torus]),
        k1 in 0.01f64..10.0, k2 in 0.01f64..10.0, rho in -10.0f64..10.0, h2 in 0.1f64..5.0,
        n in 8usize..512, dt in 1e-5f64..1e-1, every in 1usize..100,
        preset in prop::sample::select(vec![PresetChoice::Case1, PresetChoice::Case2, PresetChoice::Case3, PresetChoice::Flat]),
        level in -1.0f64..1.0, contrasts in prop::collection::vec(-0.99f64..0.99, 0..4),
    ) {
        let mut c = RunConfig::default_for(geometry, k1, k2, rho, h2);
        c.n = n;
        c.dt = dt;
        c.output_every = every;
        c.preset = preset;
        c.flat_level = level;
        c.contrasts = contrasts;
        let back = parse_config(&c.to_text()).unwrap();
        prop_assert_eq!(back, c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn diagnostics_are_pure_and_flat_sup_is_the_level(c in -1.2f64..1.2, n in 8usize..64) {
        let p = params(0.3, FRAC_PI_2, Geometry::Torus);
        let g = torus_graph(&Preset::Flat(c), n);
        let d1 = diagnostics(&g, &p).unwrap();
        let d2 = diagnostics(&g, &p).unwrap();
        prop_assert_eq!(d1, d2);
        prop_assert_eq!(d1.sup_norm, c.abs());
        prop_assert_eq!(d1.slope_sup_norm, 0.0);
    }

    #[test]
    fn omega2_is_linear_in_contrast(k in -0.95f64..0.95, h2 in 0.8f64..2.5, amp in 0.05f64..0.4) {
        prop_assume!(k.abs() > 1e-3);
        let cfg = QuadratureConfig::default();
        let tg = torus_graph(&Preset::Cosine { amplitude: amp, mode: 2 }, 32);
        let pg = line_graph(|x| amp * (-x * x).exp(), 48, Geometry::Plane);
        for (g, geometry) in [(&tg, Geometry::Torus), (&pg, Geometry::Plane)] {
            let w = |kk: f64| omega2(&params(kk, h2, geometry), g, &cfg).unwrap().omega2;
            let (wk, w0) = (w(k), w(0.5));
            let scaled: Vec<f64> = w0.iter().map(|v| v * k / 0.5).collect();
            prop_assert!(rel_diff(&scaled, &wk) <= 1e-12, "{geometry}: {}", rel_diff(&scaled, &wk));
        }
    }

    #[test]
    fn omega1_is_odd_for_even_data(c1 in -0.3f64..0.3, c2 in -0.3f64..0.3, n in 4usize..40) {
        let n = 2 * n;
        let f = move |x: f64| c1 * x.cos() + c2 * (2.0 * x).cos();
        let nodes = muskat::model::torus_nodes(n);
        let g = torus_graph(&Preset::Table(nodes.iter().map(|&x| (x, f(x))).collect()), n);
        let w = omega1(&params(0.2, FRAC_PI_2, Geometry::Torus), &g);
        for i in 1..n {
            prop_assert!((w[i] + w[n - i]).abs() <= 1e-12);
        }
        prop_assert!(w[0].abs() <= 1e-12 && w[n / 2].abs() <= 1e-12);
    }

    #[test]
    fn strip_omega2_solves_the_resolvent_equation(k in -0.95f64..0.95, h2 in 0.4f64..1.4, amp in 0.05f64..0.3) {
        let cfg = QuadratureConfig::default();
        let g = line_graph(|x| amp * h2 * (-x * x).exp(), 48, Geometry::Strip);
        let p = params(k, h2, Geometry::Strip);
        let w = omega2_strip(&p, &g, &cfg).unwrap();
        prop_assert!(fredholm_residual(&p, &g, &w, &cfg).unwrap() <= 1e-6);
    }

    #[test]
    fn runs_are_deterministic_and_finite(amp in 0.02f64..0.3, mode in 1u32..4, k in -0.9f64..0.9) {
        let p = params(k, FRAC_PI_2, Geometry::Torus);
        let g = torus_graph(&Preset::Cosine { amplitude: amp, mode }, 16);
        let cfg = StepperConfig { dt: 2e-3, t_end: 0.01, ..Default::default() };
        let a = run(&p, &g, &cfg).unwrap();
        let b = run(&p, &g, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        if a.termination == Termination::TimeReached {
            prop_assert!(a.final_state.values().iter().all(|v| v.is_finite()));
            for r in &a.series {
                let d = r.diagnostics;
                prop_assert!([d.sup_norm, d.slope_sup_norm, d.l2_norm, d.min_gap, d.dh_sup, r.budget].iter().all(|v| v.is_finite()));
            }
        }
    }
}

#[test]
fn strip_omega2_is_not_quadratic_in_contrast() {
    let cfg = QuadratureConfig::default();
    let g = line_graph(|x| 0.3 * (-x * x).exp(), 64, Geometry::Strip);
    let w = |k: f64| omega2_strip(&params(k, 1.0, Geometry::Strip), &g, &cfg).unwrap().omega2;
    // Fit k*a + k^2*b from three contrasts and predict a fourth.
    let (w0, wp, wm, w6) = (w(0.0), w(0.2), w(-0.2), w(0.6));
    assert!(w0.iter().all(|v| v.abs() <= 1e-14));
    let predicted: Vec<f64> =
        wp.iter().zip(&wm).map(|(p, m)| 0.6 * (p - m) / 0.4 + 0.36 * (p + m) / 0.08).collect();
    let miss = rel_diff(&w6, &predicted);
    assert!(miss > 1e-3, "quadratic law held to {miss:e}");
}

#[test]
fn rhs_is_smooth_in_contrast() {
    let cfg = QuadratureConfig::default();
    let eps = 1e-4;
    let tg = torus_graph(&Preset::Cosine { amplitude: 0.2, mode: 1 }, 32);
    let pg = line_graph(|x| 0.3 * (-x * x).exp(), 48, Geometry::Plane);
    let sg = line_graph(|x| 0.3 * (-x * x).exp(), 48, Geometry::Strip);
    for (g, geometry, h2) in [(&tg, Geometry::Torus, FRAC_PI_2), (&pg, Geometry::Plane, FRAC_PI_2), (&sg, Geometry::Strip, 1.0)] {
        let r = |k: f64| rhs(&params(k, h2, geometry), g, &cfg).unwrap().values;
        let k = 0.4;
        let fd = |e: f64| -> Vec<f64> { r(k + e).iter().zip(r(k - e)).map(|(a, b)| (a - b) / (2.0 * e)).collect() };
        let (d1, d2) = (fd(eps), fd(2.0 * eps));
        let diff = rel_diff(&d2, &d1);
        assert!(diff <= 1e-4, "{geometry}: centered differences disagree by {diff:e}");
        if geometry != Geometry::Strip {
            let parts = |k: f64| rhs(&params(k, h2, geometry), g, &cfg).unwrap().omega2_part;
            let (p1, p2) = (parts(0.25), parts(0.75));
            let tripled: Vec<f64> = p1.iter().map(|v| 3.0 * v).collect();
            let lin = rel_diff(&p2, &tripled);
            assert!(lin <= 1e-12, "{geometry}: omega2 part not linear ({lin:e})");
        }
    }
}

#[test]
fn rhs_self_converges_in_n() {
    let cfg = QuadratureConfig::default();
    let p = params(1.0 / 3.0, FRAC_PI_2, Geometry::Torus);
    let levels: Vec<Vec<f64>> = [32usize, 64, 128, 256]
        .iter()
        .map(|&n| rhs(&p, &torus_graph(&Preset::Cosine { amplitude: 0.05, mode: 1 }, n), &cfg).unwrap().values)
        .collect();
    let diffs: Vec<f64> = (0..3)
        .map(|l| (0..32).map(|i| (levels[l][i << l] - levels[l + 1][i << (l + 1)]).abs()).fold(0.0, f64::max))
        .collect();
    let orders: Vec<f64> = diffs.windows(2).map(|d| (d[0] / d[1]).log2()).collect();
    assert!(orders.iter().all(|o| *o >= MESH_ORDER_FLOOR), "orders {orders:?}");
    assert!(orders[1] >= orders[0], "orders {orders:?} not approaching the asymptote");
}

#[test]
fn linear_dispersion_at_small_amplitude() {
    let cfg = QuadratureConfig::default();
    let eps = 1e-6;
    let h2 = FRAC_PI_2;
    for mode in 1u32..=3 {
        let g = torus_graph(&Preset::Cosine { amplitude: eps, mode }, 64);
        for k in CONTRASTS {
            let p = params(k, h2, Geometry::Torus);
            let m = mode as f64;
            let lambda = 0.5 * A * m * (1.0 - k * (-2.0 * h2 * m).exp());
            let r = rhs(&p, &g, &cfg).unwrap();
            let got = r.values[32] / eps;
            let rel = (got + lambda).abs() / lambda;
            assert!(rel <= DISPERSION_TOL, "mode {mode}, K={k}: rhs/f = {got}, expected {}", -lambda);
        }
    }
}

#[test]
fn stable_run_is_sup_monotone() {
    let p = params(0.0, FRAC_PI_2, Geometry::Torus);
    let g = torus_graph(&Preset::Case1, 64);
    let cfg = StepperConfig { dt: 1e-3, t_end: 0.02, ..Default::default() };
    let r = run(&p, &g, &cfg).unwrap();
    assert_eq!(r.termination, Termination::TimeReached);
    for w in r.series.windows(2) {
        assert!(w[1].diagnostics.sup_norm <= w[0].diagnostics.sup_norm + 1e-12);
    }
}

#[test]
fn flat_run_repeats_its_initial_record() {
    let p = params(1.0 / 3.0, FRAC_PI_2, Geometry::Torus);
    let g = torus_graph(&Preset::Flat(0.4), 16);
    let cfg = StepperConfig { dt: 1e-2, t_end: 0.05, ..Default::default() };
    let r = run(&p, &g, &cfg).unwrap();
    let first = r.series[0];
    for rec in &r.series[1..] {
        let (a, b) = (first.diagnostics, rec.diagnostics);
        assert_eq!((a.sup_norm, a.slope_sup_norm, a.l2_norm, a.min_gap, a.dh_sup), (b.sup_norm, b.slope_sup_norm, b.l2_norm, b.min_gap, b.dh_sup));
    }
}

#[test]
fn turning_verdict_survives_mesh_halving() {
    let curve = make_curve(Family::ZTNE, 0.0, 0.0, FRAC_PI_2, 0.0).unwrap();
    let fine = QuadratureConfig { trap_dx: 1e-6, trap_dxt: 1e-3, ..Default::default() };
    let coarse = QuadratureConfig { trap_dx: 2e-6, trap_dxt: 2e-3, ..Default::default() };
    let ef = TurningEvaluator::new(&curve, Geometry::Torus, &fine).unwrap();
    let ec = TurningEvaluator::new(&curve, Geometry::Torus, &coarse).unwrap();
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..6 {
        let k = rng.gen_range(-0.99..0.99);
        let p = params(k, FRAC_PI_2, Geometry::Torus);
        let (a, b) = (ef.report(&p).unwrap(), ec.report(&p).unwrap());
        assert!(a.certified_negative && b.certified_negative, "K={k}");
        let gap = (a.value() - b.value()).abs();
        assert!(gap <= b.ledger.total_e1() + b.ledger.total_e2(), "K={k}: mesh change {gap:e} exceeds the ledger");
    }
}

#[test]
fn torus_formulations_agree_on_random_data() {
    let cfg = QuadratureConfig::default();
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..4 {
        let (c1, s2) = (rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
        let nodes = muskat::model::torus_nodes(32);
        let g = torus_graph(&Preset::Table(nodes.iter().map(|&x| (x, c1 * x.cos() + s2 * (2.0 * x).sin())).collect()), 32);
        let p = params(rng.gen_range(-0.9..0.9), 1.5, Geometry::Torus);
        let a = omega2_torus(&p, &g, Formulation::Deriv, &cfg).unwrap();
        let b = omega2_torus(&p, &g, Formulation::Kernel, &cfg).unwrap();
        assert!(rel_diff(&a.omega2, &b.omega2) <= 1e-6);
    }
}
