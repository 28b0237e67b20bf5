//! Time marching over the slabs of one simulation.

use crate::assembly::{assemble_slab, PreviousTrace};
use crate::diagnostics::{DiagnosticsAccumulator, ErrorReport};
use crate::error::{Error, Result};
use crate::geometry::{reconstruct_cross_section, reconstruct_slab, CrossSection, SpaceTimeMesh};
use crate::linsolve::{solve_slab, SlabSolution, SolveOptions};
use crate::mesh::{BoxDomain, TimeGrid};
use crate::problems::ProblemDefinition;
use crate::scalar::Real;

/// Outcome of a full run.
#[derive(Debug)]
pub struct Simulation<T> {
    pub stm: SpaceTimeMesh<T>,
    pub report: ErrorReport<T>,
    /// All slab solutions if requested, otherwise only the last one.
    pub solutions: Vec<SlabSolution<T>>,
    pub final_section: CrossSection<T>,
    /// Largest relative residual over all slab solves.
    pub max_residual: T,
}

#[derive(Clone, Copy, Debug)]
pub struct MarchOptions<T> {
    pub solve: SolveOptions<T>,
    pub keep_solutions: bool,
}

impl<T: Real> Default for MarchOptions<T> {
    fn default() -> Self {
        Self {
            solve: SolveOptions::default(),
            keep_solutions: false,
        }
    }
}

/// Solves slabs `1..=N` of `grid` in order.
///
/// `on_slab` sees every solution with the cross section at its upper end,
/// e.g. for surface dumps.
pub fn simulate<T: Real>(
    p: &ProblemDefinition<T>,
    domain: BoxDomain<T>,
    h: T,
    grid: TimeGrid<T>,
    opts: &MarchOptions<T>,
    mut on_slab: impl FnMut(&SpaceTimeMesh<T>, &SlabSolution<T>, &CrossSection<T>) -> Result<()>,
) -> Result<Simulation<T>> {
    let stm = SpaceTimeMesh::new(domain, h, grid)?;
    let mut bottom = reconstruct_cross_section(&stm, p, grid.time(0)).map_err(|e| e.context("initial cross section"))?;
    if bottom.is_empty() {
        return Err(Error::Geometry("initial surface does not cut the mesh".into()));
    }
    let mut acc = DiagnosticsAccumulator::new(&stm, &bottom, p)?;
    let mut solutions: Vec<SlabSolution<T>> = Vec::new();
    let mut max_residual = T::zero();
    for n in 1..=grid.n_slabs {
        let surface = reconstruct_slab(&stm, n, p).map_err(|e| e.context(format!("slab {n}")))?;
        let prev = match solutions.last() {
            Some(s) => PreviousTrace::Slab(s),
            None => PreviousTrace::Initial(p),
        };
        let ctx = |e: Error| e.context(format!("slab {n} ({} surface elements)", surface.elements.len()));
        let sys = assemble_slab(&stm, &surface, &bottom, &prev, p).map_err(ctx)?;
        let sol = solve_slab(&sys, &opts.solve).map_err(ctx)?;
        drop(sys);
        max_residual = max_residual.max(sol.residual);
        let top = reconstruct_cross_section(&stm, p, grid.time(n)).map_err(ctx)?;
        acc.record(&stm, &sol, &top, p).map_err(ctx)?;
        on_slab(&stm, &sol, &top)?;
        if !opts.keep_solutions {
            solutions.clear();
        }
        solutions.push(sol);
        bottom = top;
    }
    Ok(Simulation {
        stm,
        report: acc.finish(),
        solutions,
        final_section: bottom,
        max_residual,
    })
}
