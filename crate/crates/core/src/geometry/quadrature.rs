//! Degree-2 barycentric quadrature on triangles and tetrahedra embedded in `R^N`.

use crate::scalar::Real;

/// Interior parameter of the 4-point degree-2 tetrahedron rule.
const TET_A: f64 = 0.585_410_196_624_968_5;
const TET_B: f64 = 0.138_196_601_125_010_5;

/// Four points `(a, b, b, b)` and permutations, each carrying `measure / 4`.
pub fn tetrahedron<T: Real, const N: usize>(v: &[[T; N]; 4], measure: T) -> [([T; N], T); 4] {
    let a = T::lit(TET_A);
    let b = T::lit(TET_B);
    let w = measure / T::lit(4.0);
    let mut out = [([T::zero(); N], w); 4];
    for (q, slot) in out.iter_mut().enumerate() {
        for d in 0..N {
            let mut s = T::zero();
            for (k, vk) in v.iter().enumerate() {
                s += if k == q { a } else { b } * vk[d];
            }
            slot.0[d] = s;
        }
    }
    out
}

/// Three edge midpoints, each carrying `measure / 3`.
pub fn triangle<T: Real, const N: usize>(v: &[[T; N]; 3], measure: T) -> [([T; N], T); 3] {
    let half = T::lit(0.5);
    let w = measure / T::lit(3.0);
    let mut out = [([T::zero(); N], w); 3];
    for (q, slot) in out.iter_mut().enumerate() {
        let (i, j) = (q, (q + 1) % 3);
        for d in 0..N {
            slot.0[d] = half * (v[i][d] + v[j][d]);
        }
    }
    out
}
