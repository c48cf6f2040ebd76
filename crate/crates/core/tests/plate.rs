use perfolayer::cell::{EffectiveModel, Tensor2d};
use perfolayer::expr::Expr;
use perfolayer::fem::CsrMatrix;
use perfolayer::geometry::*;
use perfolayer::plate::element::{bfs_basis, gauss4x4};
use perfolayer::plate::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plane-stress tensor of an isotropic plate with Lamé constants λ, μ,
/// scaled by `s`.
fn plane_stress(lambda: f64, mu: f64, s: f64) -> Tensor2d {
    let lam = 2.0 * lambda * mu / (lambda + 2.0 * mu);
    let mut t = [[[[0.0; 2]; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    t[i][j][k][l] = s * (lam * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k)));
                }
            }
        }
    }
    t
}

fn iso_model(b_scale: f64) -> EffectiveModel {
    EffectiveModel {
        a: plane_stress(1.0, 1.0, 1.0),
        b: plane_stress(0.7, 0.3, b_scale),
        c: plane_stress(1.0, 1.0, 1.0 / 3.0),
        solid_volume: 2.0,
    }
}

fn full_averager() -> CellAverager {
    let g = build_cell_geometry(&Perforation::Full, 1).unwrap();
    CellAverager::new(&build_cell_mesh(&g, 2).unwrap())
}

fn loads(f: [&str; 3], g: [&str; 3]) -> LoadModel {
    let p = |s: &str| Expr::parse(s).unwrap();
    LoadModel::new([p(f[0]), p(f[1]), p(f[2])], [p(g[0]), p(g[1]), p(g[2])], 0.0).unwrap()
}

#[test]
fn hermite_basis_interpolates_nodal_values() {
    let h = [0.5, 0.25];
    for (a, xi) in [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]].iter().enumerate() {
        let jets = bfs_basis(*xi, h);
        for (k, j) in jets.iter().enumerate() {
            let vals = [j.value, j.grad[0], j.grad[1], j.hess[2]];
            for d in 0..4 {
                let expect = if k == 4 * a + d { 1.0 } else { 0.0 };
                assert!((vals[d] - expect).abs() < 1e-12, "basis {k} node {a} kind {d}: {}", vals[d]);
            }
        }
    }
}

#[test]
fn hermite_basis_reproduces_bicubics() {
    let f = |x: f64, y: f64| (x * x * x - 2.0 * x + 0.5) * (y * y - y * y * y + 1.0);
    let fx = |x: f64, y: f64| (3.0 * x * x - 2.0) * (y * y - y * y * y + 1.0);
    let fy = |x: f64, y: f64| (x * x * x - 2.0 * x + 0.5) * (2.0 * y - 3.0 * y * y);
    let fxy = |x: f64, y: f64| (3.0 * x * x - 2.0) * (2.0 * y - 3.0 * y * y);
    let fxx = |x: f64, y: f64| 6.0 * x * (y * y - y * y * y + 1.0);
    let (x0, h) = ([0.3, -0.2], [0.4, 0.7]);
    let mut c = [0.0; 16];
    for a in 0..4 {
        let (x, y) = (x0[0] + (a / 2) as f64 * h[0], x0[1] + (a % 2) as f64 * h[1]);
        c[4 * a] = f(x, y);
        c[4 * a + 1] = fx(x, y);
        c[4 * a + 2] = fy(x, y);
        c[4 * a + 3] = fxy(x, y);
    }
    for xi in [[0.1, 0.9], [0.5, 0.5], [0.77, 0.13]] {
        let (x, y) = (x0[0] + xi[0] * h[0], x0[1] + xi[1] * h[1]);
        let jets = bfs_basis(xi, h);
        let v: f64 = jets.iter().zip(&c).map(|(j, c)| c * j.value).sum();
        let vxx: f64 = jets.iter().zip(&c).map(|(j, c)| c * j.hess[0]).sum();
        let vxy: f64 = jets.iter().zip(&c).map(|(j, c)| c * j.hess[2]).sum();
        assert!((v - f(x, y)).abs() < 1e-12);
        assert!((vxx - fxx(x, y)).abs() < 1e-11);
        assert!((vxy - fxy(x, y)).abs() < 1e-11);
    }
}

#[test]
fn decoupled_when_b_vanishes() {
    let mesh = build_plate_mesh(Extent::unit(), 4).unwrap();
    let sys = assemble_plate_system(&mesh, &iso_model(0.0));
    assert_eq!(sys.coupling_max(), 0.0);
    let coupled = assemble_plate_system(&mesh, &iso_model(0.1));
    assert!(coupled.coupling_max() > 0.0);
    assert!(coupled.stiffness.asymmetry() < 1e-14);
}

#[test]
fn bending_form_matches_dense_quadrature() {
    // w = x(1−x)y(1−y) is biquadratic, so its Hermite interpolant is exact.
    let eff = iso_model(0.0);
    let n = 3;
    let mesh = build_plate_mesh(Extent::unit(), n).unwrap();
    let (ke, _) = element_matrices(&eff, mesh.h);
    let jet = |x: f64, y: f64| {
        let (p, dp) = (x * (1.0 - x), 1.0 - 2.0 * x);
        let (q, dq) = (y * (1.0 - y), 1.0 - 2.0 * y);
        [p * q, dp * q, p * dq, dp * dq]
    };
    let mut form = 0.0;
    for e in 0..mesh.num_elements() {
        let mut c = [0.0; 24];
        for (a, &nd) in mesh.elem_nodes(e).iter().enumerate() {
            let [x, y] = mesh.node_coords(nd);
            c[8 + 4 * a..8 + 4 * a + 4].copy_from_slice(&jet(x, y));
        }
        for i in 0..24 {
            for j in 0..24 {
                form += c[i] * ke[i * 24 + j] * c[j];
            }
        }
    }
    // Oracle: 8-point Gauss–Legendre on the whole square with the analytic
    // Hessian [[−2q, dp dq], [dp dq, −2p]].
    let (pts, wts) = gauss_legendre(8);
    let mut exact = 0.0;
    for (xi, wx) in pts.iter().zip(&wts) {
        for (yi, wy) in pts.iter().zip(&wts) {
            let (x, y) = (*xi, *yi);
            let hxx = -2.0 * y * (1.0 - y);
            let hyy = -2.0 * x * (1.0 - x);
            let hxy = (1.0 - 2.0 * x) * (1.0 - 2.0 * y);
            let hm = [[hxx, hxy], [hxy, hyy]];
            let mut s = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            s += eff.c[i][j][k][l] * hm[i][j] * hm[k][l];
                        }
                    }
                }
            }
            exact += wx * wy * s;
        }
    }
    assert!((form - exact).abs() < 1e-12 * exact, "{form} vs {exact}");
}

/// Gauss–Legendre nodes and weights on [0, 1] by Newton iteration on P_n.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        pts.push(0.5 * (x + 1.0));
        wts.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (pts, wts)
}

#[test]
fn clamped_membrane_block_is_definite() {
    let mesh = build_plate_mesh(Extent::unit(), 4).unwrap();
    let sys = assemble_plate_system(&mesh, &iso_model(0.1));
    let mdofs = sys.layout.membrane_dofs();
    let kaa: CsrMatrix = sys.stiffness.submatrix(&mdofs);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let u: Vec<f64> = (0..kaa.n).map(|_| rng.gen::<f64>() - 0.5).collect();
        assert!(kaa.quad_form(&u) > 0.0);
    }
    assert!(perfolayer::fem::BandedCholesky::factor(&sys.stiffness).is_ok());
}

#[test]
fn averaged_loads_on_full_cell() {
    let avg = full_averager();
    assert!((avg.solid_volume - 2.0).abs() < 1e-14);
    assert!((avg.gamma_area - 2.0).abs() < 1e-14);
    let zero = avg.average(&LoadModel::zero(), 0.3, [0.5, 0.5], 0.0);
    assert_eq!(zero, AveragedLoad::default());
    let f3 = avg.average(&loads(["0", "0", "1"], ["0", "0", "0"]), 0.0, [0.5, 0.5], 0.0);
    assert!((f3.h[2] - 1.0).abs() < 1e-14 && f3.big_h == [0.0, 0.0]);
    let g3 = avg.average(&loads(["0", "0", "0"], ["0", "0", "1"]), 0.0, [0.5, 0.5], 0.0);
    assert!((g3.h[2] + 1.0).abs() < 1e-14);
    // y-dependent data goes through the quadrature path: ∫ y₃² = 2/3 over Zˢ
    // is exact for the 2-point rule, and ∫ y₃ · y₃ gives H.
    let yd = avg.average(&loads(["y3", "0", "y3*y3"], ["0", "0", "0"]), 0.0, [0.5, 0.5], 0.0);
    assert!((yd.h[2] - 1.0 / 3.0).abs() < 1e-14);
    assert!((yd.big_h[0] - 1.0 / 3.0).abs() < 1e-14);
    assert!(yd.h[0].abs() < 1e-14);
}

#[test]
fn averaged_loads_on_perforated_cell() {
    // A y-independent load must give h = f − (|Γ|/|Zˢ|) g.
    let g = build_cell_geometry(&Perforation::default_box(), 4).unwrap();
    let avg = CellAverager::new(&build_cell_mesh(&g, 4).unwrap());
    let l = loads(["2", "0", "x1"], ["1", "0", "0.5"]);
    let out = avg.average(&l, 0.0, [0.25, 0.5], 0.0);
    let ratio = g.gamma_area() / g.solid_volume;
    assert!((out.h[0] - (2.0 - ratio)).abs() < 1e-12);
    assert!((out.h[2] - (0.25 - 0.5 * ratio)).abs() < 1e-12);
    // Same value through the quadrature path.
    let lq = loads(["2 + 0*y1", "0", "x1 + 0*y3"], ["1 + 0*y2", "0", "0.5 + 0*y1"]);
    let outq = avg.average(&lq, 0.0, [0.25, 0.5], 0.0);
    for i in 0..3 {
        assert!((out.h[i] - outq.h[i]).abs() < 1e-12);
    }
}

fn system(n: usize, b: f64) -> PlateSystem {
    assemble_plate_system(&build_plate_mesh(Extent::unit(), n).unwrap(), &iso_model(b))
}

#[test]
fn zero_loads_keep_zero_state() {
    let sys = system(4, 0.1);
    let avg = full_averager();
    let traj = run_plate(&sys, &avg, &LoadModel::zero(), NewmarkParams::trapezoidal(0.05), 0.5, &[[0.5, 0.5]]).unwrap();
    assert_eq!(traj.states.len(), 11);
    for s in &traj.states {
        assert!(s.x.iter().chain(&s.v).chain(&s.a).all(|v| *v == 0.0));
    }
    let single = run_plate(&sys, &avg, &LoadModel::zero(), NewmarkParams::trapezoidal(0.05), 0.0, &[]).unwrap();
    assert_eq!(single.states.len(), 1);
}

#[test]
fn picard_iteration_counts() {
    let sys = system(4, 0.0);
    let avg = full_averager();
    let lin = loads(["0", "0", "1 + 0*t"], ["0", "0", "0"]);
    let traj = run_plate(&sys, &avg, &lin, NewmarkParams::trapezoidal(0.05), 0.25, &[]).unwrap();
    assert!(traj.states[1..].iter().all(|s| s.picard_iterations == 1));
    let semi = LoadModel::new(
        [Expr::zero(), Expr::zero(), Expr::parse("100 - 0.5*z").unwrap()],
        [Expr::zero(), Expr::zero(), Expr::zero()],
        0.5,
    )
    .unwrap();
    let traj = run_plate(&sys, &avg, &semi, NewmarkParams::trapezoidal(0.05), 0.25, &[]).unwrap();
    assert!(traj.picard_failures.is_empty());
    assert!(traj.states[1..].iter().all(|s| s.picard_converged && s.picard_iterations > 1 && s.picard_iterations <= 10));
}

#[test]
fn energy_is_conserved_after_load_cutoff() {
    let sys = system(4, 0.2);
    let avg = full_averager();
    let on = loads(["1", "0", "1 + x1"], ["0", "0", "0"]);
    let off = LoadModel::zero();
    let params = NewmarkParams::trapezoidal(0.01);
    let loaded = PlateStepper::new(&sys, &avg, &on, params).unwrap();
    let free = PlateStepper::new(&sys, &avg, &off, params).unwrap();
    let mut s = loaded.initial_state();
    for _ in 0..10 {
        s = loaded.step(&s).unwrap();
    }
    // First unloaded step starts from a loaded acceleration; conservation
    // holds once both ends of a step are load free.
    s = free.step(&s).unwrap();
    let mut e = s.energy(&sys);
    assert!(e > 0.0);
    for _ in 0..100 {
        s = free.step(&s).unwrap();
        let e1 = s.energy(&sys);
        assert!(((e1 - e) / e).abs() < 1e-10, "{e} → {e1}");
        e = e1;
    }
}

#[test]
fn membrane_equation_holds_at_every_step() {
    let sys = system(4, 0.3);
    let avg = full_averager();
    let l = loads(["sin(3*t)*x2", "x1*x2", "1"], ["0", "0", "0"]);
    let stepper = PlateStepper::new(&sys, &avg, &l, NewmarkParams::trapezoidal(0.05)).unwrap();
    let mut s = stepper.initial_state();
    assert!(stepper.membrane_residual(&s) < 1e-10);
    for _ in 0..5 {
        s = stepper.step(&s).unwrap();
        assert!(stepper.membrane_residual(&s) < 1e-10);
    }
}

/// Manufactured bending solution `w = P(x)P(y)`, `P = x²(1−x)²`.
fn poly_derivs(x: f64) -> [f64; 5] {
    [x * x - 2.0 * x.powi(3) + x.powi(4), 2.0 * x - 6.0 * x * x + 4.0 * x.powi(3), 2.0 - 12.0 * x + 12.0 * x * x, -12.0 + 24.0 * x, 24.0]
}

fn manufactured_l2_error(n: usize) -> f64 {
    let eff = iso_model(0.0);
    let sys = assemble_plate_system(&build_plate_mesh(Extent::unit(), n).unwrap(), &eff);
    let q = |p: [f64; 2]| {
        let (px, py) = (poly_derivs(p[0]), poly_derivs(p[1]));
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let nx = [i, j, k, l].iter().filter(|&&v| v == 0).count();
                        s += eff.c[i][j][k][l] * px[nx] * py[4 - nx];
                    }
                }
            }
        }
        s
    };
    let r = sys.bending_load(q);
    let x = static_solve(&sys.stiffness, &r).unwrap();
    sys.l2_errors(&x, |p| ([0.0; 2], poly_derivs(p[0])[0] * poly_derivs(p[1])[0])).0
}

#[test]
fn manufactured_static_solution_converges() {
    let e: Vec<f64> = [4, 8, 16].iter().map(|&n| manufactured_l2_error(n)).collect();
    assert!(e[0] / e[1] >= 8.0 && e[1] / e[2] >= 8.0, "{e:?}");
}

#[test]
fn trajectory_table_layout() {
    let sys = system(2, 0.0);
    let avg = full_averager();
    let traj = run_plate(&sys, &avg, &LoadModel::zero(), NewmarkParams::trapezoidal(0.1), 0.2, &[[0.5, 0.5], [0.25, 0.5]]).unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,norm_u03,norm_u1,energy,picard_iters,probe_0,probe_1");
    assert_eq!(lines.len(), 4);
    assert!(step_count(0.25, 0.1).is_err());
    assert!((gauss4x4().iter().map(|p| p.1).sum::<f64>() - 1.0).abs() < 1e-15);
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(12))]

    #[test]
    fn velocity_kick_conserves_energy(seed in 0u64..1000, dt in 0.001f64..0.5) {
        // b* = 0, no loads: the zero displacement with a bending velocity
        // has zero acceleration, so every step is load free.
        let sys = system(4, 0.0);
        let avg = full_averager();
        let off = LoadModel::zero();
        let stepper = PlateStepper::new(&sys, &avg, &off, NewmarkParams::trapezoidal(dt)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = PlateState::zero(sys.ndof());
        for i in sys.layout.bending_dofs() {
            s.v[i] = rng.gen::<f64>() - 0.5;
        }
        let mut e = s.energy(&sys);
        for _ in 0..20 {
            s = stepper.step(&s).unwrap();
            let e1 = s.energy(&sys);
            proptest::prop_assert!(((e1 - e) / e).abs() < 1e-10, "{} → {}", e, e1);
            e = e1;
        }
    }
}

#[test]
fn time_average_approaches_static_solution() {
    // Undamped response to a constant load oscillates about the static
    // deflection; its long-time mean is reported against the static solve.
    let sys = system(4, 0.2);
    let avg = full_averager();
    let l = loads(["0.5", "0", "1"], ["0", "0", "0"]);
    let params = NewmarkParams::trapezoidal(0.01);
    let stepper = PlateStepper::new(&sys, &avg, &l, params).unwrap();
    let stat = static_solve(&sys.stiffness, &stepper.rhs(&vec![0.0; sys.ndof()], 0.0)).unwrap();
    let traj = run_plate(&sys, &avg, &l, params, 20.0, &[[0.5, 0.5]]).unwrap();
    let n = traj.records.len() as f64;
    let mean = traj.records.iter().map(|r| r.probes[0]).sum::<f64>() / n;
    let w = sys.layout.eval(&stat, [0.5, 0.5]).w;
    assert!(((mean - w) / w).abs() < 0.05, "mean {mean} static {w}");
}
