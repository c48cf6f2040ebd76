use nalgebra::{DMatrix, SymmetricEigen};
use perfolayer::fem::*;
use perfolayer::geometry::*;
use perfolayer::inequalities::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn layer(p: &Perforation, m: usize, eps: f64, n: usize) -> LayerMesh {
    let g = build_cell_geometry(p, m).unwrap();
    build_layer_mesh(&g, eps, Extent::unit(), n).unwrap()
}

fn corner() -> Perforation {
    Perforation::CornerHole { half_width: 0.25, half_height: 0.5 }
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

#[test]
fn korn_matches_dense_oracle_on_one_cell() {
    let lm = layer(&Perforation::default_box(), 4, 1.0, 4);
    let est = korn_constant(&lm, EigenOptions::default()).unwrap();
    let dofs = clamped_solid_dofs(&lm);
    let (a, b) = korn_operators(&lm, &dofs);
    let lmin = dense_generalized(&a, &b)[0];
    assert!(((est.eigenvalue - lmin) / lmin).abs() < 1e-6, "{} vs {lmin}", est.eigenvalue);
    assert!((est.constant - 1.0 / lmin.sqrt()).abs() < 1e-6 * est.constant);
}

#[test]
fn korn_constant_is_finite_on_full_layer() {
    for n in [2, 4] {
        let lm = layer(&Perforation::Full, 1, 0.5, n);
        let c = korn_constant(&lm, EigenOptions::default()).unwrap();
        assert!(c.constant.is_finite() && c.constant > 0.0);
    }
}

#[test]
fn korn_operators_are_homogeneous() {
    let lm = layer(&Perforation::default_box(), 4, 0.5, 4);
    let dofs = clamped_solid_dofs(&lm);
    let (a, b) = korn_operators(&lm, &dofs);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u: Vec<f64> = (0..a.n).map(|_| rng.gen::<f64>()).collect();
    let u2: Vec<f64> = u.iter().map(|v| 2.0 * v).collect();
    let q1 = a.quad_form(&u) / b.quad_form(&u);
    let q2 = a.quad_form(&u2) / b.quad_form(&u2);
    assert!((q1 - q2).abs() < 1e-14 * q1);
}

#[test]
fn extension_reproduces_rigid_and_zero_fields() {
    let lm = layer(&Perforation::default_box(), 4, 0.5, 4);
    let r = RigidDisplacement::new([0.1, -0.3, 0.2], [0.5, 0.4, -0.7]);
    let nodal: Vec<[f64; 3]> = (0..lm.grid.num_nodes())
        .map(|id| if lm.active[id] { r.eval(lm.grid.node_coords(id)) } else { [0.0; 3] })
        .collect();
    let ext = extend_field(&lm, &nodal).unwrap();
    for id in 0..lm.grid.num_nodes() {
        let v = r.eval(lm.grid.node_coords(id));
        for c in 0..3 {
            assert!((ext[id][c] - v[c]).abs() < 1e-10);
        }
    }
    assert!(sym_grad_energy(&lm, &lm.void_elements, &ext) < 1e-18);
    let zero = vec![[0.0; 3]; lm.grid.num_nodes()];
    assert!(extend_field(&lm, &zero).unwrap().iter().all(|v| *v == [0.0; 3]));
}

#[test]
fn extension_minimizes_void_energy() {
    let lm = layer(&Perforation::default_box(), 4, 0.5, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let nodal: Vec<[f64; 3]> = (0..lm.grid.num_nodes())
        .map(|id| if lm.active[id] { std::array::from_fn(|_| rng.gen::<f64>() - 0.5) } else { [0.0; 3] })
        .collect();
    let ext = extend_field(&lm, &nodal).unwrap();
    for id in 0..lm.grid.num_nodes() {
        if lm.active[id] {
            assert_eq!(ext[id], nodal[id]);
        }
    }
    let best = sym_grad_energy(&lm, &lm.void_elements, &ext);
    for _ in 0..10 {
        let other: Vec<[f64; 3]> = ext
            .iter()
            .enumerate()
            .map(|(id, v)| if lm.active[id] { *v } else { std::array::from_fn(|c| v[c] + 0.1 * (rng.gen::<f64>() - 0.5)) })
            .collect();
        assert!(sym_grad_energy(&lm, &lm.void_elements, &other) >= best);
    }
}

#[test]
fn extension_norm_basic_properties() {
    let full = layer(&Perforation::Full, 1, 0.5, 2);
    assert_eq!(extension_norm(&full, EigenOptions::default()).unwrap().ratio, 1.0);
    let lm = layer(&Perforation::default_box(), 4, 0.5, 4);
    let r = extension_norm(&lm, EigenOptions::default()).unwrap();
    assert!(r.ratio >= 1.0 && r.ratio.is_finite(), "{r:?}");
}

#[test]
fn extension_norm_matches_dense_oracle() {
    // Brute force: the extension energy of each basis vector gives S, the
    // solid energy gives K; compare the largest eigenvalue on the
    // complement of rigid fields.
    let lm = layer(&Perforation::default_box(), 4, 1.0, 4);
    let est = extension_norm(&lm, EigenOptions::default()).unwrap();
    let g = &lm.grid;
    let solid = DofMap::plain(&lm.active);
    let ks = assemble_elasticity(g, &lm.elements, &solid, &ElasticityTensor4::identity_like(), 1.0);
    let n = solid.ndof;
    let energy = |x: &[f64]| {
        let nodal = solid.expand(x);
        let e = extend_field(&lm, &nodal).unwrap();
        sym_grad_energy(&lm, &lm.void_elements, &e)
    };
    let unit = |i: usize| {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    };
    let diag: Vec<f64> = (0..n).map(|i| energy(&unit(i))).collect();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        s[(i, i)] = diag[i];
        for j in 0..i {
            let mut v = unit(i);
            v[j] = 1.0;
            let e = 0.5 * (energy(&v) - diag[i] - diag[j]);
            if e != 0.0 {
                s[(i, j)] = e;
                s[(j, i)] = e;
            }
        }
    }
    // Orthonormal complement of the rigid fields (Euclidean), then reduce.
    let gens: Vec<Vec<f64>> = RigidDisplacement::generators().iter().map(|r| solid.interpolate(g, |x| r.eval(x))).collect();
    let rg = DMatrix::from_fn(n, 6, |i, j| gens[j][i]);
    let q = rg.qr().q();
    let mut p = DMatrix::identity(n, n) - &q * q.transpose();
    let ep = SymmetricEigen::new(p.clone());
    let cols: Vec<usize> = (0..n).filter(|&i| ep.eigenvalues[i] > 0.5).collect();
    p = DMatrix::from_fn(n, cols.len(), |i, j| ep.eigenvectors[(i, cols[j])]);
    let kd = DMatrix::from_row_slice(n, n, &ks.to_dense());
    let kr = p.transpose() * kd * &p;
    let sr = p.transpose() * s * &p;
    let li = kr.cholesky().unwrap().l().try_inverse().unwrap();
    let c = &li * sr * li.transpose();
    let mu = SymmetricEigen::new(0.5 * (&c + c.transpose())).eigenvalues.max();
    let ratio = (1.0 + mu).sqrt();
    assert!(((est.ratio - ratio) / ratio).abs() < 1e-6, "{} vs {ratio}", est.ratio);
}

#[test]
fn trace_needs_open_lateral_boundary() {
    let lm = layer(&Perforation::default_box(), 4, 0.5, 4);
    assert!(trace_constant(&lm, EigenOptions::default()).is_err());
    let lm = layer(&corner(), 4, 0.5, 4);
    let c = trace_constant(&lm, EigenOptions::default()).unwrap();
    assert!(c.constant > 0.0 && c.constant.is_finite());
}

#[test]
fn trace_matches_dense_oracle_on_one_cell() {
    let lm = layer(&corner(), 4, 1.0, 4);
    let est = trace_constant(&lm, EigenOptions::default()).unwrap();
    let dofs = trace_dofs(&lm);
    let (t, k) = trace_operators(&lm, &dofs);
    let mu = *dense_generalized(&t, &k).last().unwrap();
    assert!(((est.eigenvalue - mu) / mu).abs() < 1e-6, "{} vs {mu}", est.eigenvalue);
}

#[test]
fn trace_face_mass_integrates_constants() {
    // ∫ over the four lateral faces of 1 for one component = 4 · 1 · 2ε.
    let lm = layer(&Perforation::Full, 1, 0.5, 2);
    let all = vec![true; lm.grid.num_nodes()];
    let dofs = DofMap::plain(&all);
    let (t, _) = trace_operators(&lm, &dofs);
    let one = dofs.interpolate(&lm.grid, |_| [1.0, 0.0, 0.0]);
    assert!((t.quad_form(&one) - 4.0 * 2.0 * 0.5).abs() < 1e-12);
}

#[test]
fn sweep_table_format() {
    let s = ConstantSweep {
        inequality: Inequality::Korn,
        geometry_hash: "abc".into(),
        rows: vec![SweepRow { eps: 0.25, n: 4, constant: 2.0, residual: 1e-9 }, SweepRow { eps: 0.125, n: 4, constant: 3.0, residual: 1e-9 }],
    };
    let mut buf = Vec::new();
    s.write_rows(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("korn,2.5"));
    assert_eq!(text.lines().count(), 2);
    assert!((s.spread() - 1.5).abs() < 1e-15);
}

#[test]
fn extension_norm_grows_with_the_void() {
    // Nested voxel-aligned holes, smallest first.
    let holes = [
        ([0.25, 0.25, -0.25], [0.5, 0.5, 0.0]),
        ([0.25, 0.25, -0.25], [0.75, 0.75, 0.25]),
        ([0.25, 0.25, -0.5], [0.75, 0.75, 0.5]),
    ];
    let r: Vec<f64> = holes
        .iter()
        .map(|&(lo, hi)| extension_norm(&layer(&Perforation::BoxHole { lo, hi }, 4, 0.5, 4), EigenOptions::default()).unwrap().ratio)
        .collect();
    assert!(r[0] >= 1.0 && r[0] < r[1] && r[1] < r[2], "{r:?}");
}
