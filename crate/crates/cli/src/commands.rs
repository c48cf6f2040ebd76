//! Pipeline stages behind the subcommands.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use perfolayer::cell::{effective_tensors, helmholtz_check, solve_cell_problems, CellLoad, CellSolutionSet, EffectiveModel};
use perfolayer::fem::ElasticityTensor4;
use perfolayer::geometry::{build_cell_geometry, build_cell_mesh, build_layer_mesh, build_plate_mesh, write_mesh_dump, CellGeometry, CellMesh, LayerMesh, Perforation};
use perfolayer::inequalities::{extension_norm, korn_constant, trace_constant, ConstantSweep, Inequality, SweepRow};
use perfolayer::micro::{apriori_check, assemble_micro, plate_moments, run_micro, two_scale_errors, MicroOperators, MicroTrajectory, MomentMode, TwoScaleReport, TwoScaleRow};
use perfolayer::plate::{assemble_plate_system, run_plate, CellAverager, LoadModel, PlateSystem, PlateTrajectory};

use crate::config::SimConfig;
use crate::error::{CliError, CliResult};
use crate::output::*;

/// When nodal fields are written as mesh dumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpFields {
    None,
    Final,
    Stride(usize),
}

impl FromStr for DumpFields {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(DumpFields::None),
            "final" => Ok(DumpFields::Final),
            _ => match s.strip_prefix("stride=").map(str::parse::<usize>) {
                Some(Ok(k)) if k > 0 => Ok(DumpFields::Stride(k)),
                _ => Err(format!("expected none, final or stride=K with K > 0, got '{s}'")),
            },
        }
    }
}

impl DumpFields {
    fn wants(&self, step: usize, last: usize) -> bool {
        match *self {
            DumpFields::None => false,
            DumpFields::Final => step == last,
            DumpFields::Stride(k) => step % k == 0 || step == last,
        }
    }
}

/// Everything a stage needs besides the configuration.
pub struct Context {
    pub cfg: SimConfig,
    pub out: PathBuf,
    pub seed: u64,
    pub dump: DumpFields,
}

struct Cell {
    geom: CellGeometry,
    mesh: CellMesh,
    tensor: ElasticityTensor4,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn cell(&self) -> CliResult<Cell> {
        let geom = build_cell_geometry(&self.cfg.geometry.perforation()?, self.cfg.geometry.m())?;
        let mesh = build_cell_mesh(&geom, self.cfg.resolution.n)?;
        Ok(Cell { geom, mesh, tensor: self.cfg.material.tensor()? })
    }

    fn layer(&self, cell: &Cell, eps: f64) -> CliResult<LayerMesh> {
        Ok(build_layer_mesh(&cell.geom, eps, self.cfg.extent()?, self.cfg.resolution.n)?)
    }
}

fn cell_solve_inner(ctx: &Context, cell: &Cell) -> CliResult<CellSolutionSet> {
    let sols = solve_cell_problems(&cell.mesh, &cell.tensor, ctx.cfg.cg())?;
    write_file(&ctx.path(CELL_RESIDUALS), |w| {
        writeln!(w, "{CELL_RESIDUALS_HEADER}")?;
        for f in sols.standard.iter().chain(&sols.bending) {
            let load = match f.load {
                CellLoad::Standard => "standard",
                CellLoad::Bending => "bending",
            };
            writeln!(w, "{load},{},{},{},{:.6e}", f.basis.i + 1, f.basis.j + 1, f.stats.iterations, f.stats.residual)?;
        }
        Ok(())
    })?;
    if ctx.dump != DumpFields::None {
        let names = ["chi_11", "chi_22", "chi_12"];
        let mut fields: Vec<(String, &[[f64; 3]])> = Vec::new();
        for (k, f) in sols.standard.iter().enumerate() {
            fields.push((names[k].to_string(), &f.field.nodal));
        }
        for (k, f) in sols.bending.iter().enumerate() {
            fields.push((format!("{}_bending", names[k]), &f.field.nodal));
        }
        let refs: Vec<(&str, &[[f64; 3]])> = fields.iter().map(|(n, v)| (n.as_str(), *v)).collect();
        write_file(&ctx.path("cell_correctors.mesh"), |w| write_mesh_dump(w, &cell.mesh.grid, &cell.mesh.elements, &refs))?;
    }
    Ok(sols)
}

pub fn cell_solve(ctx: &Context) -> CliResult<()> {
    let cell = ctx.cell()?;
    cell_solve_inner(ctx, &cell).map(|_| ())
}

fn homogenize_inner(ctx: &Context, cell: &Cell) -> CliResult<(CellSolutionSet, EffectiveModel)> {
    let sols = cell_solve_inner(ctx, cell)?;
    let eff = effective_tensors(&cell.mesh, &cell.tensor, &sols)?;
    let doc = EffectiveDocument::new(
        &eff,
        cell.geom.hash(),
        Resolution { m: cell.geom.m, n: ctx.cfg.resolution.n },
        sols.max_residual(),
    );
    write_json(&ctx.path(EFFECTIVE), &doc)?;
    Ok((sols, eff))
}

pub fn homogenize(ctx: &Context) -> CliResult<()> {
    let cell = ctx.cell()?;
    homogenize_inner(ctx, &cell).map(|_| ())
}

struct Plate {
    system: PlateSystem,
    averager: CellAverager,
    loads: LoadModel,
}

fn plate_setup(ctx: &Context, cell: &Cell, eff: &EffectiveModel) -> CliResult<Plate> {
    let pmesh = build_plate_mesh(ctx.cfg.extent()?, ctx.cfg.resolution.n_sigma)?;
    Ok(Plate { system: assemble_plate_system(&pmesh, eff), averager: CellAverager::new(&cell.mesh), loads: ctx.cfg.load_model()? })
}

fn plate_trajectory(ctx: &Context, plate: &Plate, eps: f64) -> CliResult<PlateTrajectory> {
    let traj = run_plate(&plate.system, &plate.averager, &plate.loads, ctx.cfg.newmark(eps), ctx.cfg.time.t_end, &ctx.cfg.output.probes)?;
    if let Some(t) = traj.picard_failures.first() {
        return Err(CliError::Solver(format!("plate Picard iteration hit the cap at t = {t}")));
    }
    write_file(&ctx.path(&format!("plate_eps{}.csv", inv(eps))), |w| traj.write_csv(w))?;
    Ok(traj)
}

/// Runs the plate with the time step belonging to every ε of the list.
pub fn plate_run(ctx: &Context) -> CliResult<()> {
    let cell = ctx.cell()?;
    let (_, eff) = homogenize_inner(ctx, &cell)?;
    let plate = plate_setup(ctx, &cell, &eff)?;
    for &eps in &ctx.cfg.layer.eps {
        plate_trajectory(ctx, &plate, eps)?;
    }
    Ok(())
}

struct Micro {
    lmesh: LayerMesh,
    ops: MicroOperators,
    traj: MicroTrajectory,
}

fn micro_trajectory(ctx: &Context, cell: &Cell, loads: &LoadModel, eps: f64) -> CliResult<Micro> {
    let lmesh = ctx.layer(cell, eps)?;
    let ops = assemble_micro(&lmesh, &cell.tensor);
    let traj = run_micro(&lmesh, &ops, loads, ctx.cfg.newmark(eps), ctx.cfg.time.t_end, &ctx.cfg.output.probes)?;
    Ok(Micro { lmesh, ops, traj })
}

fn write_micro(ctx: &Context, m: &Micro) -> CliResult<()> {
    let k = inv(m.ops.eps);
    write_file(&ctx.path(&format!("micro_eps{k}.csv")), |w| m.traj.write_csv(w))?;
    let table = apriori_check(&m.traj);
    write_file(&ctx.path(&format!("apriori_eps{k}.csv")), |w| {
        writeln!(w, "{APRIORI_HEADER}")?;
        for (t, v, d) in &table.rows {
            writeln!(w, "{t:.12e},{v:.12e},{d:.12e}")?;
        }
        Ok(())
    })?;
    let last = m.traj.states.len() - 1;
    for (step, s) in m.traj.states.iter().enumerate() {
        if ctx.dump.wants(step, last) {
            let u = m.ops.dofs.expand(&s.u);
            let v = m.ops.dofs.expand(&s.v);
            write_file(&ctx.path(&format!("micro_eps{k}_step{step}.mesh")), |w| {
                write_mesh_dump(w, &m.lmesh.grid, &m.lmesh.elements, &[("u", &u), ("v", &v)])
            })?;
        }
    }
    Ok(())
}

/// Layer runs for every ε, one worker per ε.
pub fn micro_run(ctx: &Context) -> CliResult<()> {
    let cell = ctx.cell()?;
    let loads = ctx.cfg.load_model()?;
    let runs: Vec<Micro> =
        ctx.cfg.layer.eps.par_iter().map(|&eps| micro_trajectory(ctx, &cell, &loads, eps)).collect::<CliResult<_>>()?;
    for m in &runs {
        write_micro(ctx, m)?;
    }
    Ok(())
}

/// Constant of one inequality at every ε of the list.
fn sweep(ctx: &Context, which: Inequality) -> CliResult<ConstantSweep> {
    let cell = ctx.cell()?;
    let opts = ctx.cfg.eigen(ctx.seed);
    let rows: Vec<SweepRow> = ctx
        .cfg
        .layer
        .eps
        .par_iter()
        .map(|&eps| -> CliResult<SweepRow> {
            let lmesh = ctx.layer(&cell, eps)?;
            let (constant, residual) = match which {
                Inequality::Korn => {
                    let c = korn_constant(&lmesh, opts)?;
                    (c.constant, c.residual)
                }
                Inequality::Extension => {
                    let c = extension_norm(&lmesh, opts)?;
                    (c.ratio, c.residual)
                }
                Inequality::Trace => {
                    let c = trace_constant(&lmesh, opts)?;
                    (c.constant, c.residual)
                }
            };
            Ok(SweepRow { eps: lmesh.eps, n: ctx.cfg.resolution.n, constant, residual })
        })
        .collect::<CliResult<_>>()?;
    let s = ConstantSweep { inequality: which, geometry_hash: cell.geom.hash(), rows };
    write_file(&ctx.path(&format!("constants_{which}.csv")), |w| {
        writeln!(w, "{}", ConstantSweep::HEADER)?;
        s.write_rows(w)
    })?;
    Ok(s)
}

pub fn inequality(ctx: &Context, which: Inequality) -> CliResult<()> {
    sweep(ctx, which).map(|_| ())
}

/// Randomized checks of the tensor-field splitting on the unperforated cell.
pub fn helmholtz(ctx: &Context) -> CliResult<()> {
    let geom = build_cell_geometry(&Perforation::Full, 1)?;
    let mesh = build_cell_mesh(&geom, ctx.cfg.resolution.n)?;
    let c = helmholtz_check(&mesh, 10, 20, ctx.seed, ctx.cfg.cg())?;
    write_file(&ctx.path(HELMHOLTZ), |w| {
        writeln!(w, "{HELMHOLTZ_HEADER}")?;
        writeln!(w, "{},{},{:.6e},{:.6e},{:.6e}", c.fields, c.gradients, c.reconstruction, c.orthogonality, c.idempotence)
    })
}

/// Full study: cell problems, homogenization, then plate and layer runs per
/// ε with errors at every common time level, plate moments at the final
/// time and the inequality constants.
pub fn converge(ctx: &Context) -> CliResult<()> {
    let cell = ctx.cell()?;
    let (sols, eff) = homogenize_inner(ctx, &cell)?;
    let plate = plate_setup(ctx, &cell, &eff)?;
    struct Job {
        micro: Micro,
        rows: Vec<TwoScaleRow>,
        moments: (f64, f64, f64),
    }
    let jobs: Vec<Job> = ctx
        .cfg
        .layer
        .eps
        .par_iter()
        .map(|&eps| -> CliResult<Job> {
            let ptraj = run_plate(&plate.system, &plate.averager, &plate.loads, ctx.cfg.newmark(eps), ctx.cfg.time.t_end, &ctx.cfg.output.probes)?;
            let micro = micro_trajectory(ctx, &cell, &plate.loads, eps)?;
            let mut rows = Vec::with_capacity(micro.traj.states.len());
            for (k, s) in micro.traj.states.iter().enumerate() {
                let snap = ptraj.snapshot(&plate.system.layout, k);
                rows.push(two_scale_errors(&micro.lmesh, &micro.ops, s, snap.t, &snap, &sols)?);
            }
            let last = micro.traj.states.len() - 1;
            let snap = ptraj.snapshot(&plate.system.layout, last);
            let nodal = micro.ops.dofs.expand(&micro.traj.states[last].u);
            let (du, dr) = plate_moments(&micro.lmesh, &nodal, MomentMode::Extension)?.distance_to(&snap);
            Ok(Job { micro, rows, moments: (snap.t, du, dr) })
        })
        .collect::<CliResult<_>>()?;
    for (j, &eps) in jobs.iter().zip(&ctx.cfg.layer.eps) {
        write_micro(ctx, &j.micro)?;
        plate_trajectory(ctx, &plate, eps)?;
    }
    let report = TwoScaleReport { rows: jobs.iter().flat_map(|j| j.rows.iter().cloned()).collect() };
    write_file(&ctx.path(TWO_SCALE), |w| report.write_csv(w, true))?;
    write_file(&ctx.path(MOMENTS), |w| {
        writeln!(w, "{MOMENTS_HEADER}")?;
        for (j, eps) in jobs.iter().zip(&ctx.cfg.layer.eps) {
            let (t, du, dr) = j.moments;
            writeln!(w, "{eps:.12e},{t:.12e},{du:.12e},{dr:.12e}")?;
        }
        Ok(())
    })?;
    drop(jobs);
    sweep(ctx, Inequality::Korn)?;
    sweep(ctx, Inequality::Extension)?;
    // Holes that stay inside the cell leave the lateral boundary fully
    // clamped and the trace constant undefined; the sweep is skipped then.
    match sweep(ctx, Inequality::Trace) {
        Ok(_) | Err(CliError::Validation(_)) => Ok(()),
        Err(e) => Err(e),
    }
}

pub fn report(out: &Path) -> CliResult<()> {
    write_report(out).map(|_| ())
}
