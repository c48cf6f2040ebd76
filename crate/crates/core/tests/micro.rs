use perfolayer::cell::*;
use perfolayer::expr::Expr;
use perfolayer::fem::*;
use perfolayer::geometry::*;
use perfolayer::micro::*;
use perfolayer::plate::*;
use perfolayer::Error;

fn iso() -> ElasticityTensor4 {
    ElasticityTensor4::isotropic(1.0, 1.0).unwrap()
}

fn layer(p: &Perforation, m: usize, eps: f64, n: usize) -> LayerMesh {
    let g = build_cell_geometry(p, m).unwrap();
    build_layer_mesh(&g, eps, Extent::unit(), n).unwrap()
}

fn boxed(eps: f64) -> LayerMesh {
    layer(&Perforation::default_box(), 4, eps, 4)
}

fn loads(f: [&str; 3], g: [&str; 3], lip: f64) -> LoadModel {
    let p = |s: &str| Expr::parse(s).unwrap();
    LoadModel::new([p(f[0]), p(f[1]), p(f[2])], [p(g[0]), p(g[1]), p(g[2])], lip).unwrap()
}

#[test]
fn stiffness_carries_inverse_square_scaling() {
    let lm = boxed(0.5);
    let ops = assemble_micro(&lm, &iso());
    let plain = assemble_elasticity(&lm.grid, &lm.elements, &ops.dofs, &iso(), 1.0);
    let d = ops.stiffness.linear_combination(1.0, &plain, -4.0);
    assert!(d.val.iter().all(|v| v.abs() < 1e-12 * 4.0 * plain.val.iter().fold(0.0f64, |m, v| m.max(v.abs()))));

    let lm1 = layer(&Perforation::Full, 1, 1.0, 2);
    let ops1 = assemble_micro(&lm1, &iso());
    let plain1 = assemble_elasticity(&lm1.grid, &lm1.elements, &ops1.dofs, &iso(), 1.0);
    assert_eq!(ops1.stiffness, plain1);
}

#[test]
fn rigid_fields_have_no_energy_without_constraints() {
    let lm = boxed(0.5);
    let all = DofMap::plain(&lm.active);
    let k = assemble_elasticity(&lm.grid, &lm.elements, &all, &iso(), 4.0);
    for r in RigidDisplacement::generators() {
        let x = all.interpolate(&lm.grid, |p| r.eval(p));
        assert!(k.quad_form(&x).abs() < 1e-10 * k.diagonal().iter().sum::<f64>());
    }
}

#[test]
fn rhs_matches_closed_form_totals() {
    // Unperforated layer over (0,1)², ε = 1/2: |Ω| = 1, Γ = top + bottom, area 2.
    let lm = layer(&Perforation::Full, 1, 0.5, 2);
    let dofs = DofMap::plain(&lm.active);
    let l = loads(["2", "0", "3"], ["1", "0", "1"], 0.0);
    let b = micro_rhs(&lm, &dofs, &l, &vec![[0.0; 3]; lm.grid.num_nodes()], 0.0);
    let sum = |c: usize| b.iter().enumerate().filter(|(i, _)| i % 3 == c).map(|(_, v)| v).sum::<f64>();
    let eps = 0.5;
    assert!((sum(0) - (2.0 / eps - 2.0)).abs() < 1e-12);
    assert!(sum(1).abs() < 1e-14);
    assert!((sum(2) - (3.0 - eps * 2.0)).abs() < 1e-12);

    // Perforated: volumes and Γ areas from the element and face counts.
    let lm = boxed(0.25);
    let dofs = DofMap::plain(&lm.active);
    let b = micro_rhs(&lm, &dofs, &l, &vec![[0.0; 3]; lm.grid.num_nodes()], 0.0);
    let h = lm.grid.h;
    let vol = lm.elements.len() as f64 * h.powi(3);
    let area = lm.gamma_faces.len() as f64 * h * h;
    let sum = |c: usize| b.iter().enumerate().filter(|(i, _)| i % 3 == c).map(|(_, v)| v).sum::<f64>();
    assert!((sum(0) - (2.0 * vol / 0.25 - area)).abs() < 1e-10);
    assert!((sum(2) - (3.0 * vol - 0.25 * area)).abs() < 1e-10);
}

#[test]
fn zero_loads_give_zero_trajectory() {
    let lm = boxed(0.5);
    let ops = assemble_micro(&lm, &iso());
    let traj = run_micro(&lm, &ops, &LoadModel::zero(), NewmarkParams::trapezoidal(1.0 / 16.0), 0.25, &[[0.5, 0.5]]).unwrap();
    assert_eq!(traj.states.len(), 5);
    for s in &traj.states {
        assert!(s.u.iter().chain(&s.v).chain(&s.a).all(|&v| v == 0.0));
    }
    let table = apriori_check(&traj);
    assert_eq!((table.max_v, table.max_d), (0.0, 0.0));
}

#[test]
fn picard_iterations_follow_load_type() {
    let lm = boxed(0.5);
    let ops = assemble_micro(&lm, &iso());
    let p = NewmarkParams::trapezoidal(1.0 / 16.0);
    let lin = run_micro(&lm, &ops, &preset_loads("linear").unwrap(), p, 0.25, &[]).unwrap();
    assert!(lin.records[1..].iter().all(|r| r.picard_iters == 1));
    let semi = run_micro(&lm, &ops, &preset_loads("semilinear").unwrap(), p, 0.25, &[]).unwrap();
    assert!(semi.records[1..].iter().all(|r| (2..=50).contains(&r.picard_iters)));
}

#[test]
fn picard_failure_is_reported() {
    let lm = boxed(0.5);
    let ops = assemble_micro(&lm, &iso());
    let mut p = NewmarkParams::trapezoidal(1.0 / 16.0);
    p.picard_max = 1;
    let l = preset_loads("semilinear").unwrap();
    let stepper = MicroStepper::new(&lm, &ops, &l, p).unwrap();
    let s0 = stepper.initial_state().unwrap();
    let s1 = stepper.step(&s0).unwrap_or_else(|_| s0.clone());
    assert!(matches!(stepper.step(&s1), Err(Error::PicardNoConvergence(_))));
}

#[test]
fn energy_is_conserved_after_load_cutoff() {
    let lm = boxed(0.5);
    let ops = assemble_micro(&lm, &iso());
    let p = NewmarkParams::trapezoidal(1.0 / 16.0);
    let on = preset_loads("linear").unwrap();
    let off = LoadModel::zero();
    let driven = MicroStepper::new(&lm, &ops, &on, p).unwrap();
    let free = MicroStepper::new(&lm, &ops, &off, p).unwrap();
    let mut s = driven.initial_state().unwrap();
    for _ in 0..3 {
        s = driven.step(&s).unwrap();
    }
    // The step across the cutoff still sees the old acceleration.
    s = free.step(&s).unwrap();
    let e0 = s.energy();
    assert!(e0 > 0.0);
    for _ in 0..40 {
        let next = free.step(&s).unwrap();
        assert!((next.energy() - s.energy()).abs() <= 1e-9 * e0);
        assert!(next.kinetic >= 0.0 && next.elastic >= 0.0);
        s = next;
    }
}

#[test]
fn states_vanish_on_clamped_boundary() {
    let lm = boxed(0.5);
    let ops = assemble_micro(&lm, &iso());
    let traj = run_micro(&lm, &ops, &preset_loads("linear").unwrap(), NewmarkParams::trapezoidal(1.0 / 16.0), 0.25, &[]).unwrap();
    let nodal = ops.dofs.expand(&traj.states.last().unwrap().u);
    assert!(nodal.iter().any(|v| v[2] != 0.0));
    for (id, v) in nodal.iter().enumerate() {
        if lm.dirichlet[id] {
            assert_eq!(*v, [0.0; 3]);
        }
    }
}

#[test]
fn apriori_quantities_scale_linearly_with_linear_loads() {
    let lm = boxed(0.5);
    let ops = assemble_micro(&lm, &iso());
    let p = NewmarkParams::trapezoidal(1.0 / 16.0);
    let l = preset_loads("linear").unwrap();
    let a = apriori_check(&run_micro(&lm, &ops, &l, p, 0.25, &[]).unwrap());
    let b = apriori_check(&run_micro(&lm, &ops, &l.scaled(2.0).unwrap(), p, 0.25, &[]).unwrap());
    assert!(a.max_v > 0.0 && a.max_d > 0.0);
    assert!((b.max_v - 2.0 * a.max_v).abs() < 1e-10 * b.max_v);
    assert!((b.max_d - 2.0 * a.max_d).abs() < 1e-10 * b.max_d);
}

#[test]
fn moments_of_simple_fields() {
    let eps = 0.25;
    let lm = layer(&Perforation::Full, 1, eps, 2);
    let (c, d) = (0.7, -1.3);
    let nodal: Vec<[f64; 3]> = (0..lm.grid.num_nodes())
        .map(|id| {
            let x = lm.grid.node_coords(id);
            [eps * c - x[2] * d, 0.0, 0.0]
        })
        .collect();
    for mode in [MomentMode::Extension, MomentMode::Zero] {
        let m = plate_moments(&lm, &nodal, mode).unwrap();
        assert_eq!(m.points.len(), 4 * lm.grid.dims[0] * lm.grid.dims[1]);
        assert!((m.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (u, r) in m.big_u.iter().zip(&m.big_r) {
            assert!((u[0] - c).abs() < 1e-12 && u[1].abs() < 1e-14);
            assert!((r[0] + d).abs() < 1e-12 && r[1].abs() < 1e-14);
        }
    }
}

#[test]
fn extension_moments_see_translations_through_holes() {
    let eps = 0.5;
    let lm = boxed(eps);
    let nodal: Vec<[f64; 3]> = (0..lm.grid.num_nodes()).map(|id| if lm.active[id] { [eps * 2.0, eps, 0.0] } else { [0.0; 3] }).collect();
    let m = plate_moments(&lm, &nodal, MomentMode::Extension).unwrap();
    for (u, r) in m.big_u.iter().zip(&m.big_r) {
        assert!((u[0] - 2.0).abs() < 1e-10 && (u[1] - 1.0).abs() < 1e-10);
        assert!(r[0].abs() < 1e-10 && r[1].abs() < 1e-10);
    }
    // Without extension the holes are missing from the column integrals.
    let z = plate_moments(&lm, &nodal, MomentMode::Zero).unwrap();
    assert!(z.big_u.iter().any(|u| u[0] < 2.0 - 1e-3));
}

#[test]
fn through_holes_make_empty_columns() {
    let m = 4;
    let mut solid = vec![true; m * m * 2 * m];
    for k in 0..2 * m {
        solid[(m + 1) * 2 * m + k] = false;
    }
    let lm = layer(&Perforation::Mask { solid }, m, 0.5, 4);
    let nodal = vec![[0.0; 3]; lm.grid.num_nodes()];
    assert!(matches!(plate_moments(&lm, &nodal, MomentMode::Zero), Err(Error::EmptyColumn(..))));
}

/// `w = a + b x₁ + c x₂ + d x₁x₂` and a bilinear `ũ`, exact under trilinear
/// interpolation of the Kirchhoff–Love ansatz.
struct Bilinear;

impl MacroField for Bilinear {
    fn at(&self, x: [f64; 2]) -> PlatePoint {
        let (a, b, c, d) = (0.3, -0.4, 0.25, 0.8);
        let u = [0.1 + 0.2 * x[0] - 0.3 * x[0] * x[1], -0.2 * x[1] + 0.15 * x[0] * x[1]];
        PlatePoint {
            u,
            grad_u: [[0.2 - 0.3 * x[1], -0.3 * x[0]], [0.15 * x[1], -0.2 + 0.15 * x[0]]],
            w: a + b * x[0] + c * x[1] + d * x[0] * x[1],
            grad_w: [b + d * x[1], c + d * x[0]],
            hess_w: [[0.0, d], [d, 0.0]],
        }
    }
}

#[test]
fn kirchhoff_love_ansatz_has_no_displacement_error() {
    let geom = build_cell_geometry(&Perforation::default_box(), 4).unwrap();
    let cmesh = build_cell_mesh(&geom, 4).unwrap();
    let sols = solve_cell_problems(&cmesh, &iso(), CgOptions::with_tol(1e-10)).unwrap();
    for eps in [0.5, 0.25] {
        let lm = build_layer_mesh(&geom, eps, Extent::unit(), 4).unwrap();
        let nodal: Vec<[f64; 3]> = (0..lm.grid.num_nodes())
            .map(|id| {
                let x = lm.grid.node_coords(id);
                let p = Bilinear.at([x[0], x[1]]);
                [eps * p.u[0] - x[2] * p.grad_w[0], eps * p.u[1] - x[2] * p.grad_w[1], p.w]
            })
            .collect();
        let (e3, e1, es) = two_scale_distances(&lm, &nodal, &Bilinear, &sols).unwrap();
        assert!(e3 <= 1e-10 && e1[0] <= 1e-10 && e1[1] <= 1e-10, "{e3} {e1:?}");
        assert!(es.is_finite() && es > 0.0);
    }
}

#[test]
fn two_scale_errors_of_zero_states_vanish() {
    let geom = build_cell_geometry(&Perforation::default_box(), 4).unwrap();
    let cmesh = build_cell_mesh(&geom, 4).unwrap();
    let sols = solve_cell_problems(&cmesh, &iso(), CgOptions::with_tol(1e-10)).unwrap();
    let eff = effective_tensors(&cmesh, &iso(), &sols).unwrap();
    let lm = build_layer_mesh(&geom, 0.5, Extent::unit(), 4).unwrap();
    let ops = assemble_micro(&lm, &iso());
    let pmesh = build_plate_mesh(Extent::unit(), 4).unwrap();
    let sys = assemble_plate_system(&pmesh, &eff);
    let snap = PlateSnapshot { layout: sys.layout.clone(), t: 0.0, x: vec![0.0; sys.ndof()] };
    let state = MicroState::zero(&ops);
    let row = two_scale_errors(&lm, &ops, &state, 0.0, &snap, &sols).unwrap();
    assert_eq!([row.err_u3, row.err_u1[0], row.err_u1[1], row.err_symgrad, row.apriori_v, row.apriori_d], [0.0; 6]);
    assert!(matches!(
        two_scale_errors(&lm, &ops, &state, 0.1, &snap, &sols),
        Err(Error::TimeMismatch { .. })
    ));
    // Cell solutions at another resolution are rejected.
    let coarse = build_cell_mesh(&geom, 8).unwrap();
    let other = solve_cell_problems(&coarse, &iso(), CgOptions::with_tol(1e-8)).unwrap();
    assert!(two_scale_errors(&lm, &ops, &state, 0.0, &snap, &other).is_err());
}

#[test]
fn trajectory_and_report_tables() {
    let lm = boxed(0.5);
    let ops = assemble_micro(&lm, &iso());
    let traj = run_micro(&lm, &ops, &preset_loads("smooth").unwrap(), NewmarkParams::trapezoidal(1.0 / 16.0), 0.125, &[[0.5, 0.5], [0.25, 0.5]]).unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,norm_u03,norm_u1,energy,picard_iters,probe_0,probe_1");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 7));

    let report = TwoScaleReport {
        rows: vec![TwoScaleRow { eps: 0.5, t: 0.0, err_u3: 0.0, err_u1: [0.0; 2], err_symgrad: 0.0, apriori_v: 0.0, apriori_d: 0.0 }],
    };
    let mut buf = Vec::new();
    report.write_csv(&mut buf, true).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("eps,t,err_u3,err_u1_1,err_u1_2,err_symgrad,apriori_v,apriori_D\n"));
    assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 8);
}

#[test]
fn unknown_preset_is_rejected() {
    assert!(preset_loads("gusty").is_err());
    for name in PRESETS {
        preset_loads(name).unwrap();
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(6))]

    #[test]
    fn free_layer_energy_never_grows(k in 0u32..6) {
        // dt from ε/16 up to 2ε: the trapezoidal rule has no stability limit.
        let dt = 2f64.powi(-(k as i32) - 1);
        let lm = layer(&Perforation::Full, 1, 0.5, 2);
        let ops = assemble_micro(&lm, &iso());
        let p = NewmarkParams::trapezoidal(dt);
        let on = loads(["0.3", "0", "1"], ["0", "0", "0"], 0.0);
        let off = LoadModel::zero();
        let driven = MicroStepper::new(&lm, &ops, &on, p).unwrap();
        let free = MicroStepper::new(&lm, &ops, &off, p).unwrap();
        let mut s = driven.step(&driven.initial_state().unwrap()).unwrap();
        s = free.step(&s).unwrap();
        let e0 = s.energy();
        proptest::prop_assert!(e0 > 0.0);
        for _ in 0..30 {
            s = free.step(&s).unwrap();
            proptest::prop_assert!(s.energy() <= e0 * (1.0 + 1e-9), "{} > {}", s.energy(), e0);
        }
    }
}
