//! Restarted, right-preconditioned GMRES.

use super::sparse::{norm2, CsrMatrix};
use crate::scalar::Real;

pub struct GmresResult<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub residual: T,
}

/// Minimizes `|b - A x|` over Krylov spaces of `A M^{-1}`, starting from `x0`.
/// Stops when `|b - A x| <= tol |b|` or after `max_iter` inner steps.
pub fn gmres<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Vec<T>,
    precond: impl Fn(&[T]) -> Vec<T>,
    tol: T,
    restart: usize,
    max_iter: usize,
) -> GmresResult<T> {
    let n = b.len();
    let bnorm = norm2(b);
    let mut x = x0;
    let target = tol * bnorm;
    let mut total = 0;
    let restart = restart.max(1).min(n.max(1));
    loop {
        let ax = a.mul_vec(&x);
        let r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &v)| bi - v).collect();
        let beta = norm2(&r);
        if beta <= target || total >= max_iter || beta == T::zero() {
            return GmresResult {
                x,
                iterations: total,
                residual: beta,
            };
        }
        let mut v: Vec<Vec<T>> = vec![r.iter().map(|&c| c / beta).collect()];
        let mut z: Vec<Vec<T>> = Vec::new();
        let mut hcols: Vec<Vec<T>> = Vec::new();
        let mut cs: Vec<T> = Vec::new();
        let mut sn: Vec<T> = Vec::new();
        let mut g = vec![beta];
        for j in 0..restart {
            total += 1;
            let zj = precond(&v[j]);
            let mut w = a.mul_vec(&zj);
            z.push(zj);
            let mut h = vec![T::zero(); j + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij: T = w.iter().zip(vi).map(|(&a, &b)| a * b).sum();
                h[i] = hij;
                for (wk, &vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
            }
            let hn = norm2(&w);
            h[j + 1] = hn;
            for i in 0..j {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let denom = (h[j] * h[j] + h[j + 1] * h[j + 1]).sqrt();
            let (c, s) = if denom == T::zero() {
                (T::one(), T::zero())
            } else {
                (h[j] / denom, h[j + 1] / denom)
            };
            cs.push(c);
            sn.push(s);
            h[j] = c * h[j] + s * h[j + 1];
            h[j + 1] = T::zero();
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s * gj);
            let res = g[j + 1].abs();
            hcols.push(h);
            if res <= target || hn == T::zero() || total >= max_iter {
                break;
            }
            v.push(w.iter().map(|&c| c / hn).collect());
        }
        // back substitution on the triangular Hessenberg part
        let m = hcols.len();
        let mut y = vec![T::zero(); m];
        for i in (0..m).rev() {
            let mut s = g[i];
            for k in i + 1..m {
                s -= hcols[k][i] * y[k];
            }
            y[i] = if hcols[i][i] == T::zero() {
                T::zero()
            } else {
                s / hcols[i][i]
            };
        }
        for (k, zk) in z.iter().enumerate().take(m) {
            for (xi, &zi) in x.iter_mut().zip(zk) {
                *xi += y[k] * zi;
            }
        }
    }
}
