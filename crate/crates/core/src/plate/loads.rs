use rayon::prelude::*;

use super::element::{bfs_basis, bilinear_basis, gauss4x4};
use super::system::PlateSystem;
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::fem::hex::{self, NQP};
use crate::geometry::{CellMesh, Extent};

/// Volume forces `f(t, x̄, y, z)` and surface forces `g(x̄, y)` on Γ, in the
/// unscaled form; the layer solver applies the ε factors on the third
/// components itself.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadModel {
    pub f: [Expr; 3],
    pub g: [Expr; 3],
    /// Lipschitz constant of `f` in `z`.
    pub lipschitz: f64,
}

impl LoadModel {
    pub fn zero() -> Self {
        LoadModel { f: [Expr::zero(), Expr::zero(), Expr::zero()], g: [Expr::zero(), Expr::zero(), Expr::zero()], lipschitz: 0.0 }
    }

    pub fn new(f: [Expr; 3], g: [Expr; 3], lipschitz: f64) -> Result<Self> {
        if !lipschitz.is_finite() || lipschitz < 0.0 {
            return Err(Error::InvalidInput(format!("Lipschitz constant must be finite and nonnegative, got {lipschitz}")));
        }
        for (i, e) in g.iter().enumerate() {
            if e.uses(Var::T) || e.uses(Var::Z) {
                return Err(Error::Expression { column: 0, message: format!("g{} may depend only on x and y", i + 1) });
            }
        }
        Ok(LoadModel { f, g, lipschitz })
    }

    /// As [`LoadModel::new`] with the Lipschitz constant estimated by
    /// sampling `|∂_z f|` over the given ranges.
    pub fn with_estimated_lipschitz(f: [Expr; 3], g: [Expr; 3], t_max: f64, extent: Extent, z_range: f64) -> Result<Self> {
        let mut m = LoadModel::new(f, g, 0.0)?;
        m.lipschitz = m.estimate_lipschitz(t_max, extent, z_range);
        Ok(m)
    }

    pub fn depends_on_z(&self) -> bool {
        self.f.iter().any(|e| e.uses(Var::Z))
    }

    pub fn is_zero(&self) -> bool {
        self.f.iter().chain(&self.g).all(Expr::is_zero)
    }

    fn depends_on_y(e: &Expr) -> bool {
        e.uses(Var::Y1) || e.uses(Var::Y2) || e.uses(Var::Y3)
    }

    /// Same load multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let wrap = |e: &Expr| -> Result<Expr> {
            if e.is_zero() {
                Ok(Expr::zero())
            } else {
                Expr::parse(&format!("({s:e})*({})", e.source()))
            }
        };
        Ok(LoadModel {
            f: [wrap(&self.f[0])?, wrap(&self.f[1])?, wrap(&self.f[2])?],
            g: [wrap(&self.g[0])?, wrap(&self.g[1])?, wrap(&self.g[2])?],
            lipschitz: self.lipschitz * s.abs(),
        })
    }

    /// Largest `|∂_z f^i|` on a 5⁷ sample grid of `[0,T] × Σ × Z × [−R,R]`.
    pub fn estimate_lipschitz(&self, t_max: f64, extent: Extent, z_range: f64) -> f64 {
        let ders: Vec<Expr> = self.f.iter().filter(|e| e.uses(Var::Z)).map(|e| e.derivative(Var::Z)).collect();
        if ders.is_empty() {
            return 0.0;
        }
        let s = |k: usize, lo: f64, hi: f64| lo + (hi - lo) * k as f64 / 4.0;
        let mut best = 0.0f64;
        for idx in 0..5usize.pow(7) {
            let k: [usize; 7] = std::array::from_fn(|d| (idx / 5usize.pow(d as u32)) % 5);
            let vars = [
                s(k[0], 0.0, t_max),
                s(k[1], extent.lo[0], extent.hi[0]),
                s(k[2], extent.lo[1], extent.hi[1]),
                s(k[3], 0.0, 1.0),
                s(k[4], 0.0, 1.0),
                s(k[5], -1.0, 1.0),
                s(k[6], -z_range, z_range),
            ];
            for d in &ders {
                best = best.max(d.eval(&vars).abs());
            }
        }
        best
    }
}

/// Derived loads at one midsurface point: `h = (h̄, h³)` and `H̄`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AveragedLoad {
    pub h: [f64; 3],
    pub big_h: [f64; 2],
}

/// Volume and Γ quadrature of the reference cell used to average loads.
#[derive(Debug, Clone)]
pub struct CellAverager {
    pub solid_volume: f64,
    pub gamma_area: f64,
    /// `∫_{Zˢ} y₃` and `∫_Γ y₃`.
    pub volume_moment: f64,
    pub gamma_moment: f64,
    volume_points: Vec<([f64; 3], f64)>,
    gamma_points: Vec<([f64; 3], f64)>,
}

impl CellAverager {
    pub fn new(mesh: &CellMesh) -> Self {
        let g = &mesh.grid;
        let r = hex::reference();
        let mut volume_points = Vec::with_capacity(mesh.elements.len() * NQP);
        for &e in &mesh.elements {
            let x0 = g.elem_origin(e);
            for q in 0..NQP {
                volume_points.push((hex::qp_coords(q, x0, g.h), r.weights[q] * g.h.powi(3)));
            }
        }
        let mut gamma_points = Vec::with_capacity(mesh.gamma_faces.len() * 4);
        for &(e, face) in &mesh.gamma_faces {
            let x0 = g.elem_origin(e);
            for (p, w) in hex::face_quadrature(face) {
                gamma_points.push(([x0[0] + g.h * p[0], x0[1] + g.h * p[1], x0[2] + g.h * p[2]], w * g.h * g.h));
            }
        }
        let sum = |pts: &[([f64; 3], f64)], f: &dyn Fn([f64; 3]) -> f64| pts.iter().map(|(y, w)| w * f(*y)).sum::<f64>();
        CellAverager {
            solid_volume: sum(&volume_points, &|_| 1.0),
            gamma_area: sum(&gamma_points, &|_| 1.0),
            volume_moment: sum(&volume_points, &|y| y[2]),
            gamma_moment: sum(&gamma_points, &|y| y[2]),
            volume_points,
            gamma_points,
        }
    }

    /// `(∫_{Zˢ} e, ∫_{Zˢ} e y₃)` at fixed `(t, x̄, z)`.
    fn volume_integrals(&self, e: &Expr, t: f64, x: [f64; 2], z: f64) -> (f64, f64) {
        if e.is_zero() {
            return (0.0, 0.0);
        }
        if !LoadModel::depends_on_y(e) {
            let v = e.eval(&[t, x[0], x[1], 0.0, 0.0, 0.0, z]);
            return (v * self.solid_volume, v * self.volume_moment);
        }
        let mut s = (0.0, 0.0);
        for &(y, w) in &self.volume_points {
            let v = w * e.eval(&[t, x[0], x[1], y[0], y[1], y[2], z]);
            s.0 += v;
            s.1 += v * y[2];
        }
        s
    }

    fn gamma_integrals(&self, e: &Expr, x: [f64; 2]) -> (f64, f64) {
        if e.is_zero() {
            return (0.0, 0.0);
        }
        if !LoadModel::depends_on_y(e) {
            let v = e.eval(&[0.0, x[0], x[1], 0.0, 0.0, 0.0, 0.0]);
            return (v * self.gamma_area, v * self.gamma_moment);
        }
        let mut s = (0.0, 0.0);
        for &(y, w) in &self.gamma_points {
            let v = w * e.eval(&[0.0, x[0], x[1], y[0], y[1], y[2], 0.0]);
            s.0 += v;
            s.1 += v * y[2];
        }
        s
    }

    /// `h^i = (∫f^i − ∫_Γ g^i)/|Zˢ|`, `H^α = (∫f^α y₃ − ∫_Γ g^α y₃)/|Zˢ|`.
    pub fn average(&self, loads: &LoadModel, t: f64, x: [f64; 2], z: f64) -> AveragedLoad {
        let mut out = AveragedLoad::default();
        for i in 0..3 {
            let (fv, fm) = self.volume_integrals(&loads.f[i], t, x, z);
            let (gv, gm) = self.gamma_integrals(&loads.g[i], x);
            out.h[i] = (fv - gv) / self.solid_volume;
            if i < 2 {
                out.big_h[i] = (fm - gm) / self.solid_volume;
            }
        }
        out
    }
}

/// Load vectors on the interleaved layout: `r_m = ∫ h̄·Ū` on the membrane
/// rows and `r_b = ∫ h³V − ∫ H̄·∇V` on the bending rows, with `z = u₀³(x̄)`.
pub fn compute_loads(system: &PlateSystem, averager: &CellAverager, loads: &LoadModel, x: &[f64], t: f64) -> Vec<f64> {
    let layout = &system.layout;
    let mesh = &layout.mesh;
    let n = system.ndof();
    if loads.is_zero() {
        return vec![0.0; n];
    }
    let area = mesh.h[0] * mesh.h[1];
    let quad = gauss4x4();
    let contributions: Vec<([Option<usize>; 24], [f64; 24])> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let x0 = mesh.elem_origin(e);
            let c = layout.gather(x, e);
            let mut local = [0.0; 24];
            for &(xi, w) in &quad {
                let p = [x0[0] + xi[0] * mesh.h[0], x0[1] + xi[1] * mesh.h[1]];
                let z = if loads.depends_on_z() { layout.eval_local(&c, xi).w } else { 0.0 };
                let avg = averager.average(loads, t, p, z);
                let w = w * area;
                for (a, (nv, _)) in bilinear_basis(xi, mesh.h).iter().enumerate() {
                    local[2 * a] += w * avg.h[0] * nv;
                    local[2 * a + 1] += w * avg.h[1] * nv;
                }
                for (k, jet) in bfs_basis(xi, mesh.h).iter().enumerate() {
                    local[8 + k] += w * (avg.h[2] * jet.value - avg.big_h[0] * jet.grad[0] - avg.big_h[1] * jet.grad[1]);
                }
            }
            (layout.elem_dofs(e), local)
        })
        .collect();
    let mut r = vec![0.0; n];
    for (d, local) in contributions {
        for (g, v) in d.iter().zip(local) {
            if let Some(g) = g {
                r[*g] += v;
            }
        }
    }
    r
}
