//! Solution of the per-slab trace systems.
//!
//! The trace generators form a frame, so the slab matrix can be singular while
//! the system stays consistent. A regularized sparse LU gives a particular
//! solution; iterative refinement and a GMRES fallback take care of the
//! accuracy lost to pivot shifts.

use crate::assembly::{temporal_basis, SlabSystem, TraceDofMap, BOTTOM, TOP};
use crate::error::{Error, Result};
use crate::linalg::gmres::gmres;
use crate::linalg::sparse::{norm2, residual};
use crate::linalg::{LuOptions, Ordering, SparseLu};
use crate::mesh::TetMesh;
use crate::scalar::Real;
use crate::vecmath::Vec3;

const REFINEMENT_STEPS: usize = 3;
const GMRES_RESTART: usize = 60;

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions<T> {
    /// Accepted relative residual `|A x - b| / |b|`.
    pub tol: T,
    pub ordering: Ordering,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            ordering: Ordering::NestedDissection,
        }
    }
}

/// Coefficients of the bulk space-time function of one slab.
#[derive(Clone, Debug)]
pub struct SlabSolution<T> {
    pub slab: usize,
    pub t0: T,
    pub t1: T,
    pub dofs: TraceDofMap,
    pub coeffs: Vec<T>,
    /// Achieved relative residual.
    pub residual: T,
    pub shifted_pivots: usize,
}

impl<T: Real> SlabSolution<T> {
    pub fn coefficient(&self, node: usize, layer: usize) -> Option<T> {
        self.dofs.dof(node, layer).map(|d| self.coeffs[d])
    }

    /// Nodal values of `tet` at `layer`. Inactive nodes, which only occur
    /// when evaluating outside the slab's own support, take the mean of the
    /// active ones; `None` if no node is active.
    pub fn tet_values(&self, mesh: &TetMesh<T>, tet: usize, layer: usize) -> Option<[T; 4]> {
        let nodes = mesh.tets[tet];
        let vals = nodes.map(|n| self.coefficient(n, layer));
        let present: Vec<T> = vals.iter().flatten().copied().collect();
        if present.is_empty() {
            return None;
        }
        if present.len() == 4 {
            return Some(vals.map(Option::unwrap));
        }
        let mean = present.iter().copied().sum::<T>() / T::from_count(present.len());
        Some(vals.map(|v| v.unwrap_or(mean)))
    }

    /// Value at a spatial point of `tet` (barycentric `lam`) at the bottom or top time.
    pub fn eval_layer(&self, mesh: &TetMesh<T>, tet: usize, lam: &[T; 4], layer: usize) -> Option<T> {
        self.tet_values(mesh, tet, layer)
            .map(|v| v.iter().zip(lam).map(|(&c, &l)| c * l).sum())
    }

    /// Value and spatial gradient for temporal weights `theta`.
    pub fn eval_with_gradient(
        &self,
        mesh: &TetMesh<T>,
        tet: usize,
        lam: &[T; 4],
        grads: &[Vec3<T>; 4],
        theta: [T; 2],
    ) -> (T, Vec3<T>) {
        let zero = [T::zero(); 4];
        let bottom = self.tet_values(mesh, tet, BOTTOM).unwrap_or(zero);
        let top = self.tet_values(mesh, tet, TOP).unwrap_or(zero);
        let mut v = T::zero();
        let mut g = [T::zero(); 3];
        for i in 0..4 {
            let c = theta[0] * bottom[i] + theta[1] * top[i];
            v += c * lam[i];
            for d in 0..3 {
                g[d] += c * grads[i][d];
            }
        }
        (v, g)
    }

    /// Value and gradient at an arbitrary `(x, t)` with `t` in the slab.
    pub fn eval_at(&self, mesh: &TetMesh<T>, x: &Vec3<T>, t: T) -> Result<(T, Vec3<T>)> {
        let (tet, lam) = mesh.locate_point(x)?;
        let (theta, _) = temporal_basis(t, self.t0, self.t1);
        Ok(self.eval_with_gradient(mesh, tet, &lam, &mesh.barycentric_gradients(tet), theta))
    }

    /// Coefficient vector expressed in another dof map; missing entries are zero.
    pub fn coefficients_on(&self, dofs: &TraceDofMap) -> Vec<T> {
        (0..dofs.len())
            .map(|d| {
                let (node, layer) = dofs.node_layer(d);
                self.coefficient(node, layer).unwrap_or(T::zero())
            })
            .collect()
    }

    /// Wraps a coefficient vector without solving, e.g. nodal data of a known function.
    pub fn from_coefficients(slab: usize, t0: T, t1: T, dofs: TraceDofMap, coeffs: Vec<T>) -> Self {
        assert_eq!(dofs.len(), coeffs.len());
        Self {
            slab,
            t0,
            t1,
            dofs,
            coeffs,
            residual: T::zero(),
            shifted_pivots: 0,
        }
    }
}

fn relative<T: Real>(r: &[T], bnorm: T) -> T {
    let rn = norm2(r);
    if bnorm > T::zero() {
        rn / bnorm
    } else {
        rn
    }
}

/// Solves `sys` to relative residual `opts.tol`.
pub fn solve_slab<T: Real>(sys: &SlabSystem<T>, opts: &SolveOptions<T>) -> Result<SlabSolution<T>> {
    let a = &sys.matrix;
    let b = &sys.rhs;
    let n = b.len();
    let bnorm = norm2(b);
    let finish = |x: Vec<T>, res: T, shifted: usize| SlabSolution {
        slab: sys.slab,
        t0: sys.t0,
        t1: sys.t1,
        dofs: sys.dofs.clone(),
        coeffs: x,
        residual: res,
        shifted_pivots: shifted,
    };
    if bnorm == T::zero() {
        return Ok(finish(vec![T::zero(); n], T::zero(), 0));
    }
    let lu = SparseLu::factor(
        a,
        &LuOptions {
            ordering: opts.ordering,
            ..LuOptions::default()
        },
    );
    let mut x = lu.solve(b);
    let mut r = residual(a, &x, b);
    let mut res = relative(&r, bnorm);
    for _ in 0..REFINEMENT_STEPS {
        if res <= opts.tol || !res.is_finite() {
            break;
        }
        let dx = lu.solve(&r);
        let cand: Vec<T> = x.iter().zip(&dx).map(|(&xi, &d)| xi + d).collect();
        let rc = residual(a, &cand, b);
        let rescand = relative(&rc, bnorm);
        if !(rescand < res) {
            break;
        }
        x = cand;
        r = rc;
        res = rescand;
    }
    if res <= opts.tol && x.iter().all(|v| v.is_finite()) {
        return Ok(finish(x, res, lu.shifted_pivots));
    }
    let x0 = if x.iter().all(|v| v.is_finite()) {
        x
    } else {
        vec![T::zero(); n]
    };
    let g = gmres(a, b, x0, |v| lu.solve(v), opts.tol, GMRES_RESTART, 10 * n.max(1));
    let res = relative(&residual(a, &g.x, b), bnorm);
    if res <= opts.tol && g.x.iter().all(|v| v.is_finite()) {
        Ok(finish(g.x, res, lu.shifted_pivots))
    } else {
        Err(Error::SolverFailure {
            residual: res.as_f64(),
            tol: opts.tol.as_f64(),
        })
    }
}
