//! Left-looking sparse LU with threshold partial pivoting (Gilbert–Peierls).
//!
//! Pivots whose magnitude falls below `pivot_floor` are shifted by `shift`,
//! which regularizes the null directions of singular but consistent systems.
//! The factorization is then of `A + E` with `E` supported on the shifted
//! pivots; callers measure residuals against the unshifted `A`.

use super::ordering::Ordering;
use super::sparse::{CscMatrix, CsrMatrix};
use crate::scalar::Real;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug)]
pub struct LuOptions<T> {
    pub ordering: Ordering,
    /// Keep the diagonal entry as pivot if it is at least this fraction of the column maximum.
    pub diagonal_preference: T,
    /// Relative pivot floor (times the largest diagonal magnitude).
    pub pivot_floor: T,
    /// Relative pivot shift (times the largest entry magnitude).
    pub shift: T,
}

impl<T: Real> Default for LuOptions<T> {
    fn default() -> Self {
        Self {
            ordering: Ordering::NestedDissection,
            diagonal_preference: T::lit(1e-3),
            pivot_floor: T::lit(1e-12),
            shift: T::lit(1e-12),
        }
    }
}

/// `P A Q = L U` with unit lower triangular `L`.
#[derive(Clone, Debug)]
pub struct SparseLu<T> {
    n: usize,
    /// column order: step `k` eliminates original column `q[k]`
    q: Vec<usize>,
    /// `pinv[row] = k`
    pinv: Vec<usize>,
    l: CscMatrix<T>,
    /// upper factor, diagonal stored last in each column
    u: CscMatrix<T>,
    pub shifted_pivots: usize,
}

impl<T: Real> SparseLu<T> {
    pub fn factor(a: &CsrMatrix<T>, opts: &LuOptions<T>) -> Self {
        assert_eq!(a.nrows, a.ncols, "LU requires a square matrix");
        let n = a.nrows;
        let q = opts.ordering.compute(&a.symmetric_adjacency());
        let ac = a.to_csc();
        let floor = opts.pivot_floor * a.max_abs_diagonal();
        let eps = {
            let e = opts.shift * a.max_abs();
            if e > T::zero() {
                e
            } else {
                opts.shift
            }
        };

        let mut lp = vec![0usize; n + 1];
        let mut li: Vec<usize> = Vec::with_capacity(4 * ac.row_idx.len());
        let mut lx: Vec<T> = Vec::with_capacity(4 * ac.row_idx.len());
        let mut up = vec![0usize; n + 1];
        let mut ui: Vec<usize> = Vec::with_capacity(4 * ac.row_idx.len());
        let mut ux: Vec<T> = Vec::with_capacity(4 * ac.row_idx.len());
        let mut pinv = vec![NONE; n];
        let mut x = vec![T::zero(); n];
        let mut xi = vec![0usize; n];
        let mut stack = vec![0usize; n];
        let mut pstack = vec![0usize; n];
        let mut mark = vec![NONE; n];
        let mut next_free = 0usize;
        let mut shifted = 0usize;

        for k in 0..n {
            lp[k] = li.len();
            up[k] = ui.len();
            let col = q[k];

            // reach of A(:, col) in the graph of L(:, 0..k)
            let mut top = n;
            for p in ac.col_ptr[col]..ac.col_ptr[col + 1] {
                let start = ac.row_idx[p];
                if mark[start] == k {
                    continue;
                }
                let mut head = 0usize;
                stack[0] = start;
                while head != NONE {
                    let j = stack[head];
                    let jnew = pinv[j];
                    if mark[j] != k {
                        mark[j] = k;
                        pstack[head] = if jnew == NONE { 0 } else { lp[jnew] };
                    }
                    let end = if jnew == NONE { 0 } else { lp[jnew + 1] };
                    let mut done = true;
                    let mut pp = pstack[head];
                    while pp < end {
                        let i = li[pp];
                        pp += 1;
                        if mark[i] != k {
                            pstack[head] = pp;
                            head += 1;
                            stack[head] = i;
                            done = false;
                            break;
                        }
                    }
                    if done {
                        head = head.wrapping_sub(1);
                        top -= 1;
                        xi[top] = j;
                    }
                }
            }

            // numeric solve x = L \ A(:, col)
            for p in ac.col_ptr[col]..ac.col_ptr[col + 1] {
                x[ac.row_idx[p]] = ac.values[p];
            }
            for &j in &xi[top..n] {
                let jn = pinv[j];
                if jn == NONE {
                    continue;
                }
                let xj = x[j];
                if xj == T::zero() {
                    continue;
                }
                for p in lp[jn] + 1..lp[jn + 1] {
                    let i = li[p];
                    x[i] -= lx[p] * xj;
                }
            }

            // pivot search
            let mut ipiv = NONE;
            let mut amax = -T::one();
            for &i in &xi[top..n] {
                if pinv[i] == NONE {
                    let t = x[i].abs();
                    if t > amax {
                        amax = t;
                        ipiv = i;
                    }
                } else {
                    ui.push(pinv[i]);
                    ux.push(x[i]);
                }
            }
            if ipiv != NONE
                && pinv[col] == NONE
                && mark[col] == k
                && x[col].abs() >= opts.diagonal_preference * amax
            {
                ipiv = col;
            }
            let pivot = if ipiv == NONE {
                // structurally empty candidate set: pick an unpivoted row and shift it
                ipiv = if pinv[col] == NONE {
                    col
                } else {
                    while pinv[next_free] != NONE {
                        next_free += 1;
                    }
                    next_free
                };
                shifted += 1;
                eps
            } else {
                let v = x[ipiv];
                if v.abs() < floor || v == T::zero() {
                    shifted += 1;
                    if v < T::zero() {
                        v - eps
                    } else {
                        v + eps
                    }
                } else {
                    v
                }
            };
            ui.push(k);
            ux.push(pivot);
            pinv[ipiv] = k;
            li.push(ipiv);
            lx.push(T::one());
            for &i in &xi[top..n] {
                if pinv[i] == NONE {
                    li.push(i);
                    lx.push(x[i] / pivot);
                }
                x[i] = T::zero();
            }
            x[ipiv] = T::zero();
        }
        lp[n] = li.len();
        up[n] = ui.len();
        for r in li.iter_mut() {
            *r = pinv[*r];
        }
        let l = CscMatrix {
            nrows: n,
            ncols: n,
            col_ptr: lp,
            row_idx: li,
            values: lx,
        };
        let u = CscMatrix {
            nrows: n,
            ncols: n,
            col_ptr: up,
            row_idx: ui,
            values: ux,
        };
        Self {
            n,
            q,
            pinv,
            l,
            u,
            shifted_pivots: shifted,
        }
    }

    /// Solves `(A + E) x = b` with the factors.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            y[self.pinv[i]] = b[i];
        }
        let l = &self.l;
        for j in 0..n {
            let yj = y[j];
            if yj == T::zero() {
                continue;
            }
            for p in l.col_ptr[j] + 1..l.col_ptr[j + 1] {
                y[l.row_idx[p]] -= l.values[p] * yj;
            }
        }
        let u = &self.u;
        for j in (0..n).rev() {
            let d = u.col_ptr[j + 1] - 1;
            y[j] /= u.values[d];
            let yj = y[j];
            if yj == T::zero() {
                continue;
            }
            for p in u.col_ptr[j]..d {
                y[u.row_idx[p]] -= u.values[p] * yj;
            }
        }
        let mut x = vec![T::zero(); n];
        for k in 0..n {
            x[self.q[k]] = y[k];
        }
        x
    }

    pub fn fill(&self) -> usize {
        self.l.values.len() + self.u.values.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::{norm2, residual};

    fn check(a: &CsrMatrix<f64>, b: &[f64], ordering: Ordering) -> Vec<f64> {
        let lu = SparseLu::factor(
            a,
            &LuOptions {
                ordering,
                ..Default::default()
            },
        );
        let x = lu.solve(b);
        assert!(norm2(&residual(a, &x, b)) <= 1e-10 * norm2(b), "{ordering:?}");
        x
    }

    #[test]
    fn identity_and_permuted_pivots() {
        let a = CsrMatrix::<f64>::identity(5);
        let b = [1.0, -2.0, 3.0, 0.5, 7.0];
        assert_eq!(check(&a, &b, Ordering::NestedDissection), b.to_vec());
        // needs row interchanges
        let a = CsrMatrix::from_dense(&[
            vec![0.0, 2.0, 0.0],
            vec![1.0, 0.0, 3.0],
            vec![0.0, 1.0, 1.0],
        ]);
        check(&a, &[2.0, 4.0, 2.0], Ordering::Natural);
    }

    #[test]
    fn singular_consistent_system() {
        let a = CsrMatrix::<f64>::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let lu = SparseLu::factor(&a, &LuOptions::default());
        assert_eq!(lu.shifted_pivots, 1);
        let x = lu.solve(&[2.0, 2.0]);
        assert!((x[0] + x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn random_sparse_matches_dense_solution() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 200;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0 + rng.gen::<f64>()));
            for _ in 0..4 {
                let j = rng.gen_range(0..n);
                t.push((i, j, rng.gen::<f64>() - 0.5));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, t);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x1 = check(&a, &b, Ordering::NestedDissection);
        let x2 = check(&a, &b, Ordering::ReverseCuthillMcKee);
        for (u, v) in x1.iter().zip(&x2) {
            assert!((u - v).abs() < 1e-10);
        }
    }
}
