use std::io::Write;

use super::loads::{CellAverager, LoadModel};
use super::newmark::{NewmarkParams, PlateState, PlateStepper};
use super::system::{PlateLayout, PlatePoint, PlateSystem};
use crate::error::{Error, Result};

/// Macroscopic fields that can be sampled on the midsurface.
pub trait MacroField: Sync {
    fn at(&self, x: [f64; 2]) -> PlatePoint;
}

/// Plate solution at one time, evaluable anywhere on Σ.
#[derive(Debug, Clone)]
pub struct PlateSnapshot {
    pub layout: PlateLayout,
    pub t: f64,
    pub x: Vec<f64>,
}

impl MacroField for PlateSnapshot {
    fn at(&self, x: [f64; 2]) -> PlatePoint {
        self.layout.eval(&self.x, x)
    }
}

/// Number of steps `T/dt`, which must be an integer.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(t_end >= 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("need T ≥ 0 and dt > 0, got T = {t_end}, dt = {dt}")));
    }
    let k = (t_end / dt).round();
    if (k * dt - t_end).abs() > 1e-9 * t_end.max(dt) {
        return Err(Error::InvalidInput(format!("T = {t_end} is not a multiple of dt = {dt}")));
    }
    Ok(k as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateRecord {
    pub t: f64,
    pub norm_u03: f64,
    pub norm_u1: f64,
    pub energy: f64,
    pub picard_iters: usize,
    pub probes: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PlateTrajectory {
    pub states: Vec<PlateState>,
    pub records: Vec<PlateRecord>,
    pub probes: Vec<[f64; 2]>,
    /// Steps whose Picard iteration hit the cap.
    pub picard_failures: Vec<f64>,
}

impl PlateTrajectory {
    pub fn snapshot(&self, layout: &PlateLayout, step: usize) -> PlateSnapshot {
        let s = &self.states[step];
        PlateSnapshot { layout: layout.clone(), t: s.t, x: s.x.clone() }
    }

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        write!(out, "t,norm_u03,norm_u1,energy,picard_iters")?;
        for k in 0..self.probes.len() {
            write!(out, ",probe_{k}")?;
        }
        writeln!(out)?;
        for r in &self.records {
            write!(out, "{:.12e},{:.12e},{:.12e},{:.12e},{}", r.t, r.norm_u03, r.norm_u1, r.energy, r.picard_iters)?;
            for p in &r.probes {
                write!(out, ",{p:.12e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn record(system: &PlateSystem, s: &PlateState, probes: &[[f64; 2]]) -> PlateRecord {
    let (norm_u03, norm_u1) = system.l2_norms(&s.x);
    PlateRecord {
        t: s.t,
        norm_u03,
        norm_u1,
        energy: s.energy(system),
        picard_iters: s.picard_iterations,
        probes: probes.iter().map(|&p| system.layout.eval(&s.x, p).w).collect(),
    }
}

/// Integrates the plate from the zero initial state up to `t_end`.
pub fn run_plate(
    system: &PlateSystem,
    averager: &CellAverager,
    loads: &LoadModel,
    params: NewmarkParams,
    t_end: f64,
    probes: &[[f64; 2]],
) -> Result<PlateTrajectory> {
    let steps = step_count(t_end, params.dt)?;
    let stepper = PlateStepper::new(system, averager, loads, params)?;
    let mut state = stepper.initial_state();
    let mut records = vec![record(system, &state, probes)];
    let mut states = vec![state.clone()];
    let mut picard_failures = Vec::new();
    for _ in 0..steps {
        state = stepper.step(&state)?;
        if !state.picard_converged {
            picard_failures.push(state.t);
        }
        records.push(record(system, &state, probes));
        states.push(state.clone());
    }
    Ok(PlateTrajectory { states, records, probes: probes.to_vec(), picard_failures })
}
