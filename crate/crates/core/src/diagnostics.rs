//! Discretization errors, discrete mass and observed convergence orders.
//!
//! All quantities live on the cross sections `Gamma_h(t_n)`. The discrete
//! solution there is the left limit `u_-` of the slab ending at `t_n`; at
//! `t_0` it is the nodal interpolant of the initial value.

use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{reconstruct_cross_section, CrossSection, SpaceTimeMesh};
use crate::linsolve::SlabSolution;
use crate::mesh::TetMesh;
use crate::problems::ProblemDefinition;
use crate::scalar::Real;
use crate::vecmath::{dot, Vec3};

/// Relative finite-difference step (times `h`) for gradients of `u^e`.
pub const FD_STEP: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport<T> {
    /// `|u^e - u_h|` in `L^2(Gamma_h(t_N))`; `None` without an exact solution.
    pub err_l2_final: Option<T>,
    /// Trapezoidal `L^2(H^1)` tangential-gradient error.
    pub err_l2h1: Option<T>,
    /// `(t_n, M_h(t_n))` for `n = 1..=N`.
    pub mass: Vec<(T, T)>,
    /// `M(0)`: integral of the interpolated initial value over `Gamma_h(0)`.
    pub mass_initial: T,
    pub mass_avg: T,
    pub mass_abs_err: T,
}

/// A discrete field restricted to one coarse tetrahedron.
pub trait DiscreteField<T> {
    /// Value and spatial gradient at barycentric `lam` of `tet`.
    fn value_gradient(&self, mesh: &TetMesh<T>, tet: usize, lam: &[T; 4]) -> (T, Vec3<T>);
}

/// Nodal interpolant of the problem's initial value.
pub struct InitialInterpolant<'a, T>(pub &'a ProblemDefinition<T>);

impl<T: Real> DiscreteField<T> for InitialInterpolant<'_, T> {
    fn value_gradient(&self, mesh: &TetMesh<T>, tet: usize, lam: &[T; 4]) -> (T, Vec3<T>) {
        let grads = mesh.barycentric_gradients(tet);
        let mut v = T::zero();
        let mut g = [T::zero(); 3];
        for (i, &node) in mesh.tets[tet].iter().enumerate() {
            let c = (self.0.initial_value)(&mesh.vertices[node]);
            v += c * lam[i];
            for d in 0..3 {
                g[d] += c * grads[i][d];
            }
        }
        (v, g)
    }
}

/// Upper trace `u_-` of a slab solution.
pub struct SlabTop<'a, T>(pub &'a SlabSolution<T>);

impl<T: Real> DiscreteField<T> for SlabTop<'_, T> {
    fn value_gradient(&self, mesh: &TetMesh<T>, tet: usize, lam: &[T; 4]) -> (T, Vec3<T>) {
        let grads = mesh.barycentric_gradients(tet);
        self.0
            .eval_with_gradient(mesh, tet, lam, &grads, [T::zero(), T::one()])
    }
}

/// Any closure of `(tet, lam)`, e.g. analytic data for norm tests.
pub struct FieldFn<F>(pub F);

impl<T, F> DiscreteField<T> for FieldFn<F>
where
    F: Fn(usize, &[T; 4]) -> (T, Vec3<T>),
{
    fn value_gradient(&self, _mesh: &TetMesh<T>, tet: usize, lam: &[T; 4]) -> (T, Vec3<T>) {
        (self.0)(tet, lam)
    }
}

/// Central-difference gradient of the normal extension `u^e(., t)`.
pub fn extension_gradient<T: Real>(p: &ProblemDefinition<T>, x: &Vec3<T>, t: T, step: T) -> Result<Vec3<T>> {
    let mut g = [T::zero(); 3];
    for d in 0..3 {
        let mut xp = *x;
        let mut xm = *x;
        xp[d] += step;
        xm[d] -= step;
        g[d] = (p.extended_solution(&xp, t)? - p.extended_solution(&xm, t)?) / (step + step);
    }
    Ok(g)
}

/// Squared quantities of one cross section.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SectionNorms<T> {
    /// `|u^e - u_h|^2`, zero without an exact solution
    pub l2_sq: T,
    /// `|grad_Gamma_h (u^e - u_h)|^2`
    pub h1_sq: T,
    /// `int u_h`
    pub mass: T,
}

/// Integrates error and mass quantities over the cross section `cross`.
pub fn section_norms<T: Real, F: DiscreteField<T> + Sync>(
    mesh: &TetMesh<T>,
    cross: &CrossSection<T>,
    field: &F,
    p: &ProblemDefinition<T>,
) -> Result<SectionNorms<T>> {
    let exact = p.has_exact_solution();
    let t = cross.time;
    let step = T::lit(FD_STEP) * mesh.h;
    let parts: Vec<Result<[T; 3]>> = cross
        .elements
        .par_iter()
        .map(|e| {
            let tet = e.parent as usize;
            let mut acc = [T::zero(); 3];
            for (x, w) in e.quadrature() {
                let lam = mesh.barycentric(tet, &x);
                let (v, g) = field.value_gradient(mesh, tet, &lam);
                acc[2] += w * v;
                if exact {
                    let ue = p.extended_solution(&x, t)?;
                    let ge = extension_gradient(p, &x, t, step)?;
                    let diff: Vec3<T> = std::array::from_fn(|d| ge[d] - g[d]);
                    let dn = dot(&diff, &e.normal);
                    let tang: T = (0..3).map(|d| (diff[d] - dn * e.normal[d]).powi(2)).sum();
                    acc[0] += w * (ue - v) * (ue - v);
                    acc[1] += w * tang;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut out = SectionNorms::default();
    for part in parts {
        let [a, b, c] = part?;
        out.l2_sq += a;
        out.h1_sq += b;
        out.mass += c;
    }
    Ok(out)
}

/// Incremental collection of the diagnostics while marching through the slabs.
#[derive(Clone, Debug)]
pub struct DiagnosticsAccumulator<T> {
    dt: T,
    exact: bool,
    h1_terms: Vec<T>,
    last_l2_sq: Option<T>,
    mass: Vec<(T, T)>,
    mass_initial: T,
}

impl<T: Real> DiagnosticsAccumulator<T> {
    /// Starts from the interpolated initial value on `Gamma_h(0)`.
    pub fn new(stm: &SpaceTimeMesh<T>, initial: &CrossSection<T>, p: &ProblemDefinition<T>) -> Result<Self> {
        let s = section_norms(&stm.coarse, initial, &InitialInterpolant(p), p)?;
        Ok(Self {
            dt: stm.grid.dt,
            exact: p.has_exact_solution(),
            h1_terms: vec![s.h1_sq],
            last_l2_sq: None,
            mass: Vec::new(),
            mass_initial: s.mass,
        })
    }

    /// Records the solution of the slab ending at `top.time`.
    pub fn record(
        &mut self,
        stm: &SpaceTimeMesh<T>,
        sol: &SlabSolution<T>,
        top: &CrossSection<T>,
        p: &ProblemDefinition<T>,
    ) -> Result<SectionNorms<T>> {
        let s = section_norms(&stm.coarse, top, &SlabTop(sol), p)?;
        self.h1_terms.push(s.h1_sq);
        self.last_l2_sq = Some(s.l2_sq);
        self.mass.push((top.time, s.mass));
        Ok(s)
    }

    pub fn finish(self) -> ErrorReport<T> {
        let half = T::lit(0.5);
        let n = self.h1_terms.len();
        let err_l2h1 = (self.exact && n >= 2).then(|| {
            let inner: T = self.h1_terms[1..n - 1].iter().copied().sum();
            (self.dt * (half * (self.h1_terms[0] + self.h1_terms[n - 1]) + inner)).sqrt()
        });
        let err_l2_final = if self.exact {
            self.last_l2_sq.map(|v| v.sqrt())
        } else {
            None
        };
        let mass_avg = if self.mass.is_empty() {
            self.mass_initial
        } else {
            self.mass.iter().map(|m| m.1).sum::<T>() / T::from_count(self.mass.len())
        };
        ErrorReport {
            err_l2_final,
            err_l2h1,
            mass_abs_err: (self.mass_initial - mass_avg).abs(),
            mass: self.mass,
            mass_initial: self.mass_initial,
            mass_avg,
        }
    }
}

/// `|u^e - u_h|` on `Gamma_h(t_N)` for the last slab solution.
pub fn l2_error_final<T: Real>(
    stm: &SpaceTimeMesh<T>,
    sol: &SlabSolution<T>,
    p: &ProblemDefinition<T>,
) -> Result<T> {
    if !p.has_exact_solution() {
        p.extended_solution(&[T::zero(); 3], T::zero())?;
    }
    let top = reconstruct_cross_section(stm, p, sol.t1)?;
    Ok(section_norms(&stm.coarse, &top, &SlabTop(sol), p)?.l2_sq.sqrt())
}

/// Full diagnostics for slab solutions `1..=N` computed elsewhere.
pub fn evaluate<T: Real>(
    stm: &SpaceTimeMesh<T>,
    sols: &[SlabSolution<T>],
    p: &ProblemDefinition<T>,
) -> Result<ErrorReport<T>> {
    let initial = reconstruct_cross_section(stm, p, stm.grid.time(0))?;
    let mut acc = DiagnosticsAccumulator::new(stm, &initial, p)?;
    for sol in sols {
        let top = reconstruct_cross_section(stm, p, sol.t1)?;
        acc.record(stm, sol, &top, p)?;
    }
    Ok(acc.finish())
}

/// Trapezoidal `L^2(H^1)` error of slab solutions `1..=N`.
pub fn l2h1_error<T: Real>(
    stm: &SpaceTimeMesh<T>,
    sols: &[SlabSolution<T>],
    p: &ProblemDefinition<T>,
) -> Result<T> {
    if !p.has_exact_solution() {
        p.extended_solution(&[T::zero(); 3], T::zero())?;
    }
    Ok(evaluate(stm, sols, p)?.err_l2h1.unwrap_or(T::zero()))
}

/// `log2(e_i / e_{i+1})` for consecutive errors; `+inf` when an error is not positive.
pub fn observed_order<T: Real>(errors: &[T]) -> Vec<T> {
    errors
        .windows(2)
        .map(|w| {
            if w[0] > T::zero() && w[1] > T::zero() {
                (w[0] / w[1]).log2()
            } else {
                T::infinity()
            }
        })
        .collect()
}
