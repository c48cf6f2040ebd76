use super::loads::{compute_loads, CellAverager, LoadModel};
use super::system::{PlateSystem, DOFS_PER_NODE};
use crate::error::{Error, Result};
use crate::fem::{dot, BandedCholesky, CsrMatrix};

/// Newmark parameters; `β = 1/4, γ = 1/2` is the energy-conserving
/// trapezoidal rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewmarkParams {
    pub dt: f64,
    pub beta: f64,
    pub gamma: f64,
    pub picard_tol: f64,
    pub picard_max: usize,
}

impl NewmarkParams {
    pub fn trapezoidal(dt: f64) -> Self {
        NewmarkParams { dt, beta: 0.25, gamma: 0.5, picard_tol: 1e-10, picard_max: 50 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidInput(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.beta > 0.0) || !(self.gamma >= 0.5) {
            return Err(Error::InvalidInput(format!("Newmark parameters β = {}, γ = {} not supported", self.beta, self.gamma)));
        }
        if !(self.picard_tol > 0.0) || self.picard_max == 0 {
            return Err(Error::InvalidInput("Picard tolerance and iteration cap must be positive".into()));
        }
        Ok(())
    }
}

/// Macroscopic state on the interleaved layout. Membrane entries of `v` and
/// `a` are always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateState {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
    pub picard_iterations: usize,
    pub picard_converged: bool,
}

impl PlateState {
    pub fn zero(n: usize) -> Self {
        PlateState { t: 0.0, x: vec![0.0; n], v: vec![0.0; n], a: vec![0.0; n], picard_iterations: 0, picard_converged: true }
    }

    /// `½ vᵀMv + ½ xᵀKx`.
    pub fn energy(&self, system: &PlateSystem) -> f64 {
        0.5 * system.mass.quad_form(&self.v) + 0.5 * system.stiffness.quad_form(&self.x)
    }
}

fn is_membrane(i: usize) -> bool {
    i % DOFS_PER_NODE < 2
}

/// Factored operators for stepping one plate system with fixed `dt`.
pub struct PlateStepper<'a> {
    pub system: &'a PlateSystem,
    pub averager: &'a CellAverager,
    pub loads: &'a LoadModel,
    pub params: NewmarkParams,
    effective: BandedCholesky,
    membrane: BandedCholesky,
    bending_mass: BandedCholesky,
    membrane_dofs: Vec<usize>,
    bending_dofs: Vec<usize>,
}

impl<'a> PlateStepper<'a> {
    pub fn new(system: &'a PlateSystem, averager: &'a CellAverager, loads: &'a LoadModel, params: NewmarkParams) -> Result<Self> {
        params.validate()?;
        let c = 1.0 / (params.beta * params.dt * params.dt);
        let s = system.stiffness.linear_combination(1.0, &system.mass, c);
        fn fail(what: &'static str) -> impl Fn(Error) -> Error {
            move |e| Error::SolverFailure(format!("{what}: {e}"))
        }
        let effective = BandedCholesky::factor(&s).map_err(fail("effective plate operator"))?;
        let membrane_dofs = system.layout.membrane_dofs();
        let bending_dofs = system.layout.bending_dofs();
        let membrane = BandedCholesky::factor(&system.stiffness.submatrix(&membrane_dofs)).map_err(fail("membrane block"))?;
        let bending_mass = BandedCholesky::factor(&system.mass.submatrix(&bending_dofs)).map_err(fail("bending mass"))?;
        Ok(PlateStepper { system, averager, loads, params, effective, membrane, bending_mass, membrane_dofs, bending_dofs })
    }

    pub fn rhs(&self, x: &[f64], t: f64) -> Vec<f64> {
        compute_loads(self.system, self.averager, self.loads, x, t)
    }

    /// State at `t = 0`: zero bending displacement and velocity, membrane
    /// part from its stationary equation, acceleration from the bending
    /// equation.
    pub fn initial_state(&self) -> PlateState {
        let n = self.system.ndof();
        let mut st = PlateState::zero(n);
        let r = self.rhs(&st.x, 0.0);
        let rm: Vec<f64> = self.membrane_dofs.iter().map(|&i| r[i]).collect();
        for (&i, v) in self.membrane_dofs.iter().zip(self.membrane.solve(&rm)) {
            st.x[i] = v;
        }
        st.a = self.acceleration(&st.x, &r);
        st
    }

    /// `M_b⁻¹ (r_b − (K x)_b)` on the bending rows.
    pub fn acceleration(&self, x: &[f64], r: &[f64]) -> Vec<f64> {
        let kx = self.system.stiffness.matvec(x);
        let rb: Vec<f64> = self.bending_dofs.iter().map(|&i| r[i] - kx[i]).collect();
        let mut a = vec![0.0; x.len()];
        for (&i, v) in self.bending_dofs.iter().zip(self.bending_mass.solve(&rb)) {
            a[i] = v;
        }
        a
    }

    /// One Newmark step; membrane unknowns are solved together with the
    /// bending unknowns at the new time level. Semi-linear loads are resolved
    /// by Picard iteration on the bending displacement.
    pub fn step(&self, s: &PlateState) -> Result<PlateState> {
        let p = &self.params;
        let (dt, beta, gamma) = (p.dt, p.beta, p.gamma);
        let t = s.t + dt;
        let c = 1.0 / (beta * dt * dt);
        let n = s.x.len();
        // M [(x + dt v)/(β dt²) + (1/(2β) − 1) a]
        let pred: Vec<f64> = (0..n)
            .map(|i| if is_membrane(i) { 0.0 } else { c * (s.x[i] + dt * s.v[i]) + (0.5 / beta - 1.0) * s.a[i] })
            .collect();
        let inertia = self.system.mass.matvec(&pred);
        let mut x = s.x.clone();
        let mut iterations = 0;
        let mut converged = !self.loads.depends_on_z();
        let max_it = if self.loads.depends_on_z() { p.picard_max } else { 1 };
        while iterations < max_it {
            iterations += 1;
            let r = self.rhs(&x, t);
            let b: Vec<f64> = r.iter().zip(&inertia).map(|(r, m)| r + m).collect();
            let next = self.effective.solve(&b);
            if !next.iter().all(|v| v.is_finite()) {
                return Err(Error::SolverFailure(format!("non-finite plate state at t = {t}")));
            }
            let diff: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let size = dot(&next, &next).sqrt();
            x = next;
            if self.loads.depends_on_z() && diff <= p.picard_tol * size.max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
        let mut a = vec![0.0; n];
        let mut v = vec![0.0; n];
        for i in 0..n {
            if is_membrane(i) {
                continue;
            }
            a[i] = c * (x[i] - s.x[i] - dt * s.v[i]) - (0.5 / beta - 1.0) * s.a[i];
            v[i] = s.v[i] + dt * ((1.0 - gamma) * s.a[i] + gamma * a[i]);
        }
        Ok(PlateState { t, x, v, a, picard_iterations: iterations, picard_converged: converged })
    }

    /// Residual of the stationary membrane equation relative to the load.
    pub fn membrane_residual(&self, s: &PlateState) -> f64 {
        let r = self.rhs(&s.x, s.t);
        let kx = self.system.stiffness.matvec(&s.x);
        let num: f64 = self.membrane_dofs.iter().map(|&i| (kx[i] - r[i]).powi(2)).sum::<f64>().sqrt();
        let den: f64 = self.membrane_dofs.iter().map(|&i| r[i].powi(2)).sum::<f64>().sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }
}

/// Stationary solve `K x = r` of the coupled system.
pub fn static_solve(stiffness: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    Ok(BandedCholesky::factor(stiffness)?.solve(rhs))
}
