use std::io::Write;

use super::operators::{micro_rhs, MicroOperators};
use crate::error::{Error, Result};
use crate::fem::hex;
use crate::fem::{dot, solve_spd, solve_spd_with, BandedCholesky, CgOptions, CsrMatrix};
use crate::geometry::LayerMesh;
use crate::plate::{step_count, LoadModel, NewmarkParams};

/// Band factors larger than this many bytes fall back to CG.
const BAND_BUDGET: usize = 1 << 30;

/// Displacement, velocity and acceleration on the free layer DOFs.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroState {
    pub eps: f64,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
    /// `½ ε⁻¹ vᵀMv` and `½ ε⁻¹ uᵀKu`.
    pub kinetic: f64,
    pub elastic: f64,
    pub picard_iterations: usize,
}

impl MicroState {
    pub fn new(ops: &MicroOperators, t: f64, u: Vec<f64>, v: Vec<f64>, a: Vec<f64>, picard_iterations: usize) -> Self {
        let s = 0.5 / ops.eps;
        let kinetic = s * ops.mass.quad_form(&v);
        let elastic = s * ops.stiffness.quad_form(&u);
        MicroState { eps: ops.eps, t, u, v, a, kinetic, elastic, picard_iterations }
    }

    pub fn zero(ops: &MicroOperators) -> Self {
        let n = ops.ndof();
        MicroState::new(ops, 0.0, vec![0.0; n], vec![0.0; n], vec![0.0; n], 0)
    }

    pub fn energy(&self) -> f64 {
        self.kinetic + self.elastic
    }

    /// `(ε^{-1/2}‖∂_t u‖, ε^{-3/2}‖D(u)‖)`.
    pub fn apriori(&self, ops: &MicroOperators) -> (f64, f64) {
        let e = self.eps;
        (
            (ops.mass.quad_form(&self.v) / e).sqrt(),
            (ops.sym_grad.quad_form(&self.u).max(0.0) / (e * e * e)).sqrt(),
        )
    }
}

enum LinearSolver {
    Banded(BandedCholesky),
    Cg(CsrMatrix),
}

/// Newmark stepper for the layer with one factorization of `K + M/(β dt²)`.
pub struct MicroStepper<'a> {
    pub lmesh: &'a LayerMesh,
    pub ops: &'a MicroOperators,
    pub loads: &'a LoadModel,
    pub params: NewmarkParams,
    solver: LinearSolver,
}

impl<'a> MicroStepper<'a> {
    pub fn new(lmesh: &'a LayerMesh, ops: &'a MicroOperators, loads: &'a LoadModel, params: NewmarkParams) -> Result<Self> {
        if !(params.dt > 0.0) || !params.dt.is_finite() {
            return Err(Error::InvalidInput(format!("time step must be positive, got {}", params.dt)));
        }
        let c = 1.0 / (params.beta * params.dt * params.dt);
        let eff = ops.stiffness.linear_combination(1.0, &ops.mass, c);
        let bytes = eff.n * (eff.bandwidth() + 1) * std::mem::size_of::<f64>();
        let solver = if bytes <= BAND_BUDGET {
            LinearSolver::Banded(
                BandedCholesky::factor(&eff).map_err(|e| Error::SolverFailure(format!("effective layer operator: {e}")))?,
            )
        } else {
            LinearSolver::Cg(eff)
        };
        Ok(MicroStepper { lmesh, ops, loads, params, solver })
    }

    pub fn rhs(&self, u: &[f64], t: f64) -> Vec<f64> {
        let nodal = self.ops.dofs.expand(u);
        micro_rhs(self.lmesh, &self.ops.dofs, self.loads, &nodal, t)
    }

    fn solve(&self, b: &[f64], guess: &[f64]) -> Result<Vec<f64>> {
        match &self.solver {
            LinearSolver::Banded(ch) => Ok(ch.solve(b)),
            LinearSolver::Cg(op) => Ok(solve_spd_with(op, b, Some(guess), None, CgOptions::with_tol(1e-12))?.0),
        }
    }

    /// Zero displacement and velocity; the acceleration balances the loads.
    pub fn initial_state(&self) -> Result<MicroState> {
        let n = self.ops.ndof();
        let r = self.rhs(&vec![0.0; n], 0.0);
        let a = solve_spd(&self.ops.mass, &r, CgOptions::with_tol(1e-13))?.0;
        Ok(MicroState::new(self.ops, 0.0, vec![0.0; n], vec![0.0; n], a, 0))
    }

    /// One Newmark step; loads depending on `u³` are resolved by Picard
    /// iteration on the displacement.
    pub fn step(&self, s: &MicroState) -> Result<MicroState> {
        let p = &self.params;
        let (dt, beta, gamma) = (p.dt, p.beta, p.gamma);
        let t = s.t + dt;
        let c = 1.0 / (beta * dt * dt);
        let n = s.u.len();
        let pred: Vec<f64> = (0..n).map(|i| c * (s.u[i] + dt * s.v[i]) + (0.5 / beta - 1.0) * s.a[i]).collect();
        let inertia = self.ops.mass.matvec(&pred);
        let semilinear = self.loads.depends_on_z();
        let max_it = if semilinear { p.picard_max } else { 1 };
        let mut u = s.u.clone();
        let mut iterations = 0;
        let mut update = f64::INFINITY;
        while iterations < max_it {
            iterations += 1;
            let r = self.rhs(&u, t);
            let b: Vec<f64> = r.iter().zip(&inertia).map(|(r, m)| r + m).collect();
            let next = self.solve(&b, &u)?;
            if !next.iter().all(|v| v.is_finite()) {
                return Err(Error::SolverFailure(format!("non-finite layer state at t = {t}")));
            }
            let diff: f64 = next.iter().zip(&u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let size = dot(&next, &next).sqrt().max(f64::MIN_POSITIVE);
            update = diff / size;
            u = next;
            if !semilinear || update <= p.picard_tol {
                break;
            }
        }
        if semilinear && update > p.picard_tol {
            return Err(Error::PicardNoConvergence(update));
        }
        let a: Vec<f64> = (0..n).map(|i| c * (u[i] - s.u[i] - dt * s.v[i]) - (0.5 / beta - 1.0) * s.a[i]).collect();
        let v: Vec<f64> = (0..n).map(|i| s.v[i] + dt * ((1.0 - gamma) * s.a[i] + gamma * a[i])).collect();
        Ok(MicroState::new(self.ops, t, u, v, a, iterations))
    }
}

/// One step of [`MicroStepper`] built on the fly; prefer the stepper for
/// whole runs since it factors the operator once.
pub fn micro_step(
    lmesh: &LayerMesh,
    ops: &MicroOperators,
    loads: &LoadModel,
    params: NewmarkParams,
    state: &MicroState,
) -> Result<MicroState> {
    MicroStepper::new(lmesh, ops, loads, params)?.step(state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroRecord {
    pub t: f64,
    /// `ε^{-1/2}‖u³‖` and `ε^{-1/2}‖(u¹, u²)/ε‖`.
    pub norm_u3: f64,
    pub norm_u1: f64,
    pub energy: f64,
    pub picard_iters: usize,
    pub apriori_v: f64,
    pub apriori_d: f64,
    /// `u³` at the probe points on the midsurface.
    pub probes: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MicroTrajectory {
    pub eps: f64,
    pub states: Vec<MicroState>,
    pub records: Vec<MicroRecord>,
    pub probes: Vec<[f64; 2]>,
}

/// Trilinear value of a nodal field at a point of the layer grid.
pub fn sample_nodal(lmesh: &LayerMesh, nodal: &[[f64; 3]], x: [f64; 3]) -> [f64; 3] {
    let (e, xi) = lmesh.grid.locate(x);
    let n = hex::shape(xi);
    let nodes = lmesh.grid.elem_nodes(e);
    std::array::from_fn(|c| (0..8).map(|a| n[a] * nodal[nodes[a]][c]).sum())
}

fn record(lmesh: &LayerMesh, ops: &MicroOperators, s: &MicroState, probes: &[[f64; 2]]) -> MicroRecord {
    let e = ops.eps;
    let (apriori_v, apriori_d) = s.apriori(ops);
    let nodal = ops.dofs.expand(&s.u);
    MicroRecord {
        t: s.t,
        norm_u3: (ops.component_norm_sq(&s.u, &[2]) / e).sqrt(),
        norm_u1: (ops.component_norm_sq(&s.u, &[0, 1]) / (e * e * e)).sqrt(),
        energy: s.energy(),
        picard_iters: s.picard_iterations,
        apriori_v,
        apriori_d,
        probes: probes.iter().map(|p| sample_nodal(lmesh, &nodal, [p[0], p[1], 0.0])[2]).collect(),
    }
}

/// Integrates the layer from rest up to `t_end`.
pub fn run_micro(
    lmesh: &LayerMesh,
    ops: &MicroOperators,
    loads: &LoadModel,
    params: NewmarkParams,
    t_end: f64,
    probes: &[[f64; 2]],
) -> Result<MicroTrajectory> {
    let steps = step_count(t_end, params.dt)?;
    let stepper = MicroStepper::new(lmesh, ops, loads, params)?;
    let mut state = stepper.initial_state()?;
    let mut records = vec![record(lmesh, ops, &state, probes)];
    let mut states = vec![state.clone()];
    for _ in 0..steps {
        state = stepper.step(&state)?;
        records.push(record(lmesh, ops, &state, probes));
        states.push(state.clone());
    }
    Ok(MicroTrajectory { eps: ops.eps, states, records, probes: probes.to_vec() })
}

impl MicroTrajectory {
    /// Same columns as the plate trajectory table, with the scaled norms.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        write!(out, "t,norm_u03,norm_u1,energy,picard_iters")?;
        for k in 0..self.probes.len() {
            write!(out, ",probe_{k}")?;
        }
        writeln!(out)?;
        for r in &self.records {
            write!(out, "{:.12e},{:.12e},{:.12e},{:.12e},{}", r.t, r.norm_u3, r.norm_u1, r.energy, r.picard_iters)?;
            for p in &r.probes {
                write!(out, ",{p:.12e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}
