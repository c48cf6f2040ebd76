//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p perfolayer --test acceptance`. The process exits
//! with a failure status if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};

use perfolayer::cell::*;
use perfolayer::fem::*;
use perfolayer::geometry::*;
use perfolayer::inequalities::*;
use perfolayer::micro::*;
use perfolayer::plate::*;

type Check = Result<(bool, String), String>;

fn e2s(e: perfolayer::Error) -> String {
    e.to_string()
}

fn iso() -> ElasticityTensor4 {
    ElasticityTensor4::isotropic(1.0, 1.0).unwrap()
}

fn cell(p: &Perforation, m: usize, n: usize) -> Result<(CellGeometry, CellMesh), String> {
    let g = build_cell_geometry(p, m).map_err(e2s)?;
    let mesh = build_cell_mesh(&g, n).map_err(e2s)?;
    Ok((g, mesh))
}

fn homogenize(p: &Perforation, m: usize, n: usize) -> Result<(CellSolutionSet, EffectiveModel), String> {
    let (_, mesh) = cell(p, m, n)?;
    let sols = solve_cell_problems(&mesh, &iso(), CgOptions::with_tol(1e-10)).map_err(e2s)?;
    let eff = effective_tensors(&mesh, &iso(), &sols).map_err(e2s)?;
    Ok((sols, eff))
}

fn layer(p: &Perforation, m: usize, eps: f64, n: usize) -> Result<LayerMesh, String> {
    let g = build_cell_geometry(p, m).map_err(e2s)?;
    build_layer_mesh(&g, eps, Extent::unit(), n).map_err(e2s)
}

fn corner() -> Perforation {
    Perforation::CornerHole { half_width: 0.25, half_height: 0.5 }
}

fn entries(t: &Tensor2d) -> impl Iterator<Item = ([usize; 4], f64)> + '_ {
    (0..16).map(move |k| {
        let idx = [k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1];
        (idx, t[idx[0]][idx[1]][idx[2]][idx[3]])
    })
}

fn ratio(a: f64, b: f64) -> f64 {
    a.max(b) / a.min(b)
}

/// Eigenvalues of `A x = λ B x` by dense Cholesky reduction.
fn dense_generalized(a: &CsrMatrix, b: &CsrMatrix) -> Vec<f64> {
    let ad = DMatrix::from_row_slice(a.n, a.n, &a.to_dense());
    let bd = DMatrix::from_row_slice(b.n, b.n, &b.to_dense());
    let li = bd.cholesky().unwrap().l().try_inverse().unwrap();
    let c = &li * ad * li.transpose();
    let c = 0.5 * (&c + c.transpose());
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt(v: &[f64]) -> String {
    let s: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", s.join(", "))
}

fn homogenization_golden() -> Check {
    let (_, eff) = homogenize(&Perforation::Full, 1, 8)?;
    // Plane-stress oracle of the isotropic solid.
    let (l, m) = (1.0, 1.0);
    let lps = 2.0 * l * m / (l + 2.0 * m);
    let golden = [(eff.a[0][0][0][0], lps + 2.0 * m), (eff.a[0][0][1][1], lps), (eff.a[0][1][0][1], m)];
    let a_ok = golden.iter().all(|(v, g)| (v - g).abs() <= 0.01 * g);
    let b_max = max_abs(&eff.b);
    let scale = max_abs(&eff.a);
    let c_ok = entries(&eff.a).zip(entries(&eff.c)).all(|((_, a), (_, c))| (c - a / 3.0).abs() <= 0.01 * a.abs() + 1e-12 * scale);
    let ok = a_ok && b_max <= 1e-10 && c_ok;
    Ok((ok, format!("a1111={:.6} a1122={:.6} a1212={:.6} max|b|={b_max:.1e} c≈a/3: {c_ok}", golden[0].0, golden[1].0, golden[2].0)))
}

fn effective_structure() -> Check {
    let (_, eff) = homogenize(&Perforation::default_box(), 4, 8)?;
    let sym = major_asymmetry(&eff.a).max(major_asymmetry(&eff.c));
    let mut minor = 0.0f64;
    for t in [&eff.a, &eff.c] {
        for (i, v) in entries(t) {
            minor = minor.max((v - t[i[1]][i[0]][i[2]][i[3]]).abs()).max((v - t[i[0]][i[1]][i[3]][i[2]]).abs());
        }
    }
    let minor = minor / max_abs(&eff.a).min(max_abs(&eff.c));
    let square = (eff.a[0][0][0][0] - eff.a[1][1][1][1]).abs() / eff.a[0][0][0][0].abs();
    let (ea, ec) = (eff.min_eigen_a(), eff.min_eigen_c());
    let gap = SymmetricEigen::new(voigt3(&voigt_bound(&iso())) - voigt3(&eff.a)).eigenvalues.min();
    let ok = sym <= 1e-12 && minor <= 1e-12 && square <= 1e-10 && ea > 0.0 && ec > 0.0 && gap >= -1e-10;
    Ok((ok, format!("gram asym={sym:.1e} minor asym={minor:.1e} |a1111-a2222|/a1111={square:.1e} λmin(a)={ea:.4} λmin(c)={ec:.4} λmin(voigt-a)={gap:.4}")))
}

fn mesh_consistency() -> Check {
    let (_, a8) = homogenize(&Perforation::default_box(), 4, 8)?;
    let (_, a16) = homogenize(&Perforation::default_box(), 4, 16)?;
    let scale = max_abs(&a8.a);
    let mut worst = 0.0f64;
    let mut ok = true;
    for ((_, x), (_, y)) in entries(&a8.a).zip(entries(&a16.a)) {
        let d = (x - y).abs();
        ok &= d <= 0.05 * x.abs() + 1e-12 * scale;
        if x.abs() > 1e-12 * scale {
            worst = worst.max(d / x.abs());
        }
    }
    Ok((ok, format!("largest relative change of a* between n=8 and n=16: {worst:.3e}")))
}

fn korn_uniformity() -> Check {
    let opts = EigenOptions::default();
    let c: Vec<f64> = [0.25, 0.125]
        .iter()
        .map(|&eps| korn_constant(&layer(&Perforation::default_box(), 4, eps, 4)?, opts).map(|c| c.constant).map_err(e2s))
        .collect::<Result<_, _>>()?;
    let one = layer(&Perforation::default_box(), 4, 1.0, 4)?;
    let est = korn_constant(&one, opts).map_err(e2s)?;
    let (a, b) = korn_operators(&one, &clamped_solid_dofs(&one));
    let lmin = dense_generalized(&a, &b)[0];
    let rel = ((est.eigenvalue - lmin) / lmin).abs();
    let r = ratio(c[0], c[1]);
    Ok((r <= 2.0 && rel <= 1e-6, format!("C(1/4)={:.4} C(1/8)={:.4} ratio={r:.3}; dense oracle rel. diff {rel:.1e}", c[0], c[1])))
}

fn extension_uniformity() -> Check {
    let opts = EigenOptions::default();
    let full = extension_norm(&layer(&Perforation::Full, 1, 0.25, 4)?, opts).map_err(e2s)?.ratio;
    let r: Vec<f64> = [0.25, 0.125]
        .iter()
        .map(|&eps| extension_norm(&layer(&Perforation::default_box(), 4, eps, 4)?, opts).map(|c| c.ratio).map_err(e2s))
        .collect::<Result<_, _>>()?;
    let s = ratio(r[0], r[1]);
    let ok = full == 1.0 && r.iter().all(|&x| x >= 1.0) && s <= 1.5;
    Ok((ok, format!("unperforated={full} ratio(1/4)={:.4} ratio(1/8)={:.4} spread={s:.3}", r[0], r[1])))
}

fn trace_constant_check() -> Check {
    let opts = EigenOptions::default();
    let c: Vec<f64> = [0.25, 0.125]
        .iter()
        .map(|&eps| trace_constant(&layer(&corner(), 4, eps, 4)?, opts).map(|c| c.constant).map_err(e2s))
        .collect::<Result<_, _>>()?;
    let one = layer(&corner(), 4, 1.0, 4)?;
    let est = trace_constant(&one, opts).map_err(e2s)?;
    let (t, k) = trace_operators(&one, &trace_dofs(&one));
    let mu = *dense_generalized(&t, &k).last().unwrap();
    let rel = ((est.eigenvalue - mu) / mu).abs();
    let r = ratio(c[0], c[1]);
    Ok((r <= 2.0 && rel <= 1e-6, format!("corner holes: C(1/4)={:.4} C(1/8)={:.4} ratio={r:.3}; dense oracle rel. diff {rel:.1e}", c[0], c[1])))
}

fn helmholtz() -> Check {
    let (_, mesh) = cell(&Perforation::Full, 1, 4)?;
    let c = helmholtz_check(&mesh, 10, 20, 11, CgOptions::with_tol(1e-12)).map_err(e2s)?;
    let ok = c.reconstruction <= 1e-8 && c.orthogonality <= 1e-8 && c.idempotence <= 1e-8;
    Ok((ok, format!("reconstruction={:.1e} orthogonality={:.1e} idempotence={:.1e}", c.reconstruction, c.orthogonality, c.idempotence)))
}

/// Plane-stress isotropic tensor scaled by `s`.
fn plane_stress(s: f64) -> Tensor2d {
    let (lambda, mu) = (1.0, 1.0);
    let lam = 2.0 * lambda * mu / (lambda + 2.0 * mu);
    let d = |a: usize, b: usize| f64::from(u8::from(a == b));
    std::array::from_fn(|i| {
        std::array::from_fn(|j| std::array::from_fn(|k| std::array::from_fn(|l| s * (lam * d(i, j) * d(k, l) + mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k))))))
    })
}

/// `P(x) = x²(1−x)²` and its first four derivatives.
fn poly(x: f64) -> [f64; 5] {
    [x * x - 2.0 * x.powi(3) + x.powi(4), 2.0 * x - 6.0 * x * x + 4.0 * x.powi(3), 2.0 - 12.0 * x + 12.0 * x * x, -12.0 + 24.0 * x, 24.0]
}

fn plate_verification() -> Check {
    let eff = EffectiveModel { a: plane_stress(1.0), b: [[[[0.0; 2]; 2]; 2]; 2], c: plane_stress(1.0 / 3.0), solid_volume: 2.0 };
    let err = |n: usize| -> Result<f64, String> {
        let sys = assemble_plate_system(&build_plate_mesh(Extent::unit(), n).map_err(e2s)?, &eff);
        // Load q = c*_ijkl ∂_ijkl w for w = P(x)P(y).
        let q = |p: [f64; 2]| {
            let (px, py) = (poly(p[0]), poly(p[1]));
            entries(&eff.c)
                .map(|(idx, c)| {
                    let nx = idx.iter().filter(|&&v| v == 0).count();
                    c * px[nx] * py[4 - nx]
                })
                .sum::<f64>()
        };
        let x = static_solve(&sys.stiffness, &sys.bending_load(q)).map_err(e2s)?;
        Ok(sys.l2_errors(&x, |p| ([0.0; 2], poly(p[0])[0] * poly(p[1])[0])).0)
    };
    let e = [err(4)?, err(8)?, err(16)?];
    let rates = [e[0] / e[1], e[1] / e[2]];

    let coupled = EffectiveModel { b: plane_stress(0.2), ..eff };
    let sys = assemble_plate_system(&build_plate_mesh(Extent::unit(), 4).map_err(e2s)?, &coupled);
    let (g, m) = cell(&Perforation::Full, 1, 2)?;
    drop(g);
    let avg = CellAverager::new(&m);
    let p = |s: &str| perfolayer::expr::Expr::parse(s).unwrap();
    let zero = perfolayer::expr::Expr::zero;
    let on = LoadModel::new([p("1"), zero(), p("1 + x1")], [zero(), zero(), zero()], 0.0).map_err(e2s)?;
    let off = LoadModel::zero();
    let params = NewmarkParams::trapezoidal(0.01);
    let loaded = PlateStepper::new(&sys, &avg, &on, params).map_err(e2s)?;
    let free = PlateStepper::new(&sys, &avg, &off, params).map_err(e2s)?;
    let mut s = loaded.initial_state();
    for _ in 0..10 {
        s = loaded.step(&s).map_err(e2s)?;
    }
    // The first unloaded step still carries the loaded acceleration.
    s = free.step(&s).map_err(e2s)?;
    let mut e0 = s.energy(&sys);
    let mut drift = 0.0f64;
    for _ in 0..100 {
        s = free.step(&s).map_err(e2s)?;
        let e1 = s.energy(&sys);
        drift = drift.max(((e1 - e0) / e0).abs());
        e0 = e1;
    }
    let ok = rates.iter().all(|&r| r >= 8.0) && drift <= 1e-10 && e0 > 0.0;
    Ok((ok, format!("L2 errors {} (ratios {:.2}, {:.2}); max energy drift per step {drift:.1e}", fmt(&e), rates[0], rates[1])))
}

fn micro_setup(eps: f64) -> Result<(LayerMesh, MicroOperators), String> {
    let lm = layer(&Perforation::default_box(), 4, eps, 4)?;
    let ops = assemble_micro(&lm, &iso());
    Ok((lm, ops))
}

fn apriori_bounds() -> Check {
    let loads = preset_loads("smooth").map_err(e2s)?;
    let mut v = Vec::new();
    let mut d = Vec::new();
    for eps in [0.25, 0.125] {
        let (lm, ops) = micro_setup(eps)?;
        let traj = run_micro(&lm, &ops, &loads, NewmarkParams::trapezoidal(eps / 8.0), 0.25, &[]).map_err(e2s)?;
        let t = apriori_check(&traj);
        v.push(t.max_v);
        d.push(t.max_d);
    }
    let (rv, rd) = (ratio(v[0], v[1]), ratio(d[0], d[1]));
    Ok((rv <= 2.0 && rd <= 2.0, format!("max velocity {} (ratio {rv:.3}); max strain {} (ratio {rd:.3})", fmt(&v), fmt(&d))))
}

/// Bilinear macroscopic fields: their Kirchhoff–Love ansatz is reproduced
/// exactly by trilinear elements.
struct Bilinear;

impl MacroField for Bilinear {
    fn at(&self, x: [f64; 2]) -> PlatePoint {
        let (a, b, c, d) = (0.3, -0.4, 0.25, 0.8);
        PlatePoint {
            u: [0.1 + 0.2 * x[0] - 0.3 * x[0] * x[1], -0.2 * x[1] + 0.15 * x[0] * x[1]],
            grad_u: [[0.2 - 0.3 * x[1], -0.3 * x[0]], [0.15 * x[1], -0.2 + 0.15 * x[0]]],
            w: a + b * x[0] + c * x[1] + d * x[0] * x[1],
            grad_w: [b + d * x[1], c + d * x[0]],
            hess_w: [[0.0, d], [d, 0.0]],
        }
    }
}

struct Study {
    /// Per ε: sup over time of err_u3, err_u1_1, err_u1_2, err_symgrad.
    sup: Vec<[f64; 4]>,
    moments: Vec<(f64, f64)>,
    ansatz: Vec<f64>,
}

/// Layer against plate for the ramped load at ε = 1/2, 1/4, 1/8.
fn two_scale_study() -> Result<Study, String> {
    let (sols, eff) = homogenize(&Perforation::default_box(), 4, 4)?;
    let pmesh = build_plate_mesh(Extent::unit(), 16).map_err(e2s)?;
    let sys = assemble_plate_system(&pmesh, &eff);
    let avg = CellAverager::new(&sols.mesh);
    let loads = preset_loads("linear").map_err(e2s)?;
    let mut out = Study { sup: Vec::new(), moments: Vec::new(), ansatz: Vec::new() };
    for eps in [0.5, 0.25, 0.125] {
        let params = NewmarkParams::trapezoidal(eps / 8.0);
        let plate = run_plate(&sys, &avg, &loads, params, 0.5, &[]).map_err(e2s)?;
        let (lm, ops) = micro_setup(eps)?;
        let micro = run_micro(&lm, &ops, &loads, params, 0.5, &[]).map_err(e2s)?;
        let mut sup = [0.0f64; 4];
        for (k, s) in micro.states.iter().enumerate() {
            let snap = plate.snapshot(&sys.layout, k);
            let r = two_scale_errors(&lm, &ops, s, snap.t, &snap, &sols).map_err(e2s)?;
            for (m, v) in sup.iter_mut().zip([r.err_u3, r.err_u1[0], r.err_u1[1], r.err_symgrad]) {
                *m = m.max(v);
            }
        }
        out.sup.push(sup);
        let last = micro.states.len() - 1;
        let nodal = ops.dofs.expand(&micro.states[last].u);
        let snap = plate.snapshot(&sys.layout, last);
        out.moments.push(plate_moments(&lm, &nodal, MomentMode::Extension).map_err(e2s)?.distance_to(&snap));

        let kl: Vec<[f64; 3]> = (0..lm.grid.num_nodes())
            .map(|id| {
                let x = lm.grid.node_coords(id);
                let p = Bilinear.at([x[0], x[1]]);
                [eps * p.u[0] - x[2] * p.grad_w[0], eps * p.u[1] - x[2] * p.grad_w[1], p.w]
            })
            .collect();
        let (e3, e1, _) = two_scale_distances(&lm, &kl, &Bilinear, &sols).map_err(e2s)?;
        out.ansatz.push(e3.max(e1[0]).max(e1[1]));
    }
    Ok(out)
}

fn two_scale_trend(study: &Result<Study, String>) -> Check {
    let s = study.as_ref().map_err(Clone::clone)?;
    let names = ["err_u3", "err_u1_1", "err_u1_2", "err_symgrad"];
    let mut ok = true;
    let mut parts = Vec::new();
    for (c, name) in names.iter().enumerate() {
        let col: Vec<f64> = s.sup.iter().map(|r| r[c]).collect();
        ok &= decreasing(&col);
        parts.push(format!("{name} {}", fmt(&col)));
    }
    let ansatz = s.ansatz.iter().fold(0.0f64, |m, v| m.max(*v));
    ok &= ansatz <= 1e-10;
    Ok((ok, format!("sup over t ≤ 0.5 at ε = 1/2, 1/4, 1/8: {}; ansatz error {ansatz:.1e}", parts.join("; "))))
}

fn moment_trend(study: &Result<Study, String>) -> Check {
    let s = study.as_ref().map_err(Clone::clone)?;
    let u: Vec<f64> = s.moments.iter().map(|m| m.0).collect();
    let r: Vec<f64> = s.moments.iter().map(|m| m.1).collect();
    Ok((decreasing(&u) && decreasing(&r), format!("at t = 0.5: ‖U−ũ‖ {} ‖R+∇w‖ {}", fmt(&u), fmt(&r))))
}

fn report(id: usize, title: &str, limit: Option<Duration>, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panic: {}", msg.unwrap_or_default()))
    });
    let took = start.elapsed();
    let in_time = limit.map_or(true, |l| took <= l);
    let (ok, detail) = match res {
        Ok((ok, d)) => (ok && in_time, d),
        Err(e) => (false, format!("error: {e}")),
    };
    let budget = limit.map(|l| format!(" / limit {} s", l.as_secs())).unwrap_or_default();
    println!("criterion {id:>2} {title}: {} — {detail} ({:.1} s{budget})", if ok { "PASS" } else { "FAIL" }, took.as_secs_f64());
    ok
}

fn main() {
    let min = |m: u64| Some(Duration::from_secs(60 * m));
    let mut all = true;
    all &= report(1, "homogenization golden values", Some(Duration::from_secs(30)), homogenization_golden);
    all &= report(2, "effective-tensor structure", min(2), effective_structure);
    all &= report(3, "mesh consistency", None, mesh_consistency);
    all &= report(4, "Korn uniformity", min(5), korn_uniformity);
    all &= report(5, "extension uniformity", min(5), extension_uniformity);
    all &= report(6, "trace constant", None, trace_constant_check);
    all &= report(7, "Helmholtz decomposition", None, helmholtz);
    all &= report(8, "plate solver verification", None, plate_verification);
    all &= report(9, "micro a priori bounds", min(10), apriori_bounds);
    let start = Instant::now();
    let study = two_scale_study();
    println!("(layer/plate study over ε = 1/2, 1/4, 1/8 took {:.1} s)", start.elapsed().as_secs_f64());
    all &= report(10, "two-scale convergence trend", None, || two_scale_trend(&study));
    all &= report(11, "plate-moment diagnostics", None, || moment_trend(&study));
    if !all {
        std::process::exit(1);
    }
}
