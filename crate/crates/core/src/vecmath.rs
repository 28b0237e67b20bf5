//! Small fixed-size vector helpers on plain arrays.

use crate::scalar::Real;

pub type Vec3<T> = [T; 3];
pub type Vec4<T> = [T; 4];

#[inline]
pub fn sub<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> [T; N] {
    let mut r = [T::zero(); N];
    for i in 0..N {
        r[i] = a[i] - b[i];
    }
    r
}

#[inline]
pub fn add<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> [T; N] {
    let mut r = [T::zero(); N];
    for i in 0..N {
        r[i] = a[i] + b[i];
    }
    r
}

#[inline]
pub fn scale<T: Real, const N: usize>(a: &[T; N], s: T) -> [T; N] {
    let mut r = *a;
    for v in r.iter_mut() {
        *v *= s;
    }
    r
}

#[inline]
pub fn dot<T: Real, const N: usize>(a: &[T; N], b: &[T; N]) -> T {
    let mut s = T::zero();
    for i in 0..N {
        s += a[i] * b[i];
    }
    s
}

#[inline]
pub fn norm<T: Real, const N: usize>(a: &[T; N]) -> T {
    dot(a, a).sqrt()
}

/// `a + s (b - a)`
#[inline]
pub fn lerp<T: Real, const N: usize>(a: &[T; N], b: &[T; N], s: T) -> [T; N] {
    let mut r = *a;
    for i in 0..N {
        r[i] = a[i] + s * (b[i] - a[i]);
    }
    r
}

#[inline]
pub fn cross<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn det3<T: Real>(m: &[[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant of an `N x N` matrix by Gaussian elimination with partial pivoting.
pub fn det<T: Real, const N: usize>(mut m: [[T; N]; N]) -> T {
    let mut d = T::one();
    for k in 0..N {
        let mut p = k;
        for i in k + 1..N {
            if m[i][k].abs() > m[p][k].abs() {
                p = i;
            }
        }
        if m[p][k] == T::zero() {
            return T::zero();
        }
        if p != k {
            m.swap(p, k);
            d = -d;
        }
        d *= m[k][k];
        for i in k + 1..N {
            let f = m[i][k] / m[k][k];
            for j in k..N {
                let v = m[k][j];
                m[i][j] -= f * v;
            }
        }
    }
    d
}

/// Solves `m x = rhs`; `None` if `m` is numerically singular.
pub fn solve<T: Real, const N: usize>(mut m: [[T; N]; N], mut rhs: [T; N]) -> Option<[T; N]> {
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |a, &v| a.max(v.abs()));
    if scale == T::zero() {
        return None;
    }
    for k in 0..N {
        let mut p = k;
        for i in k + 1..N {
            if m[i][k].abs() > m[p][k].abs() {
                p = i;
            }
        }
        if m[p][k].abs() <= T::epsilon() * scale {
            return None;
        }
        m.swap(p, k);
        rhs.swap(p, k);
        for i in k + 1..N {
            let f = m[i][k] / m[k][k];
            for j in k..N {
                let v = m[k][j];
                m[i][j] -= f * v;
            }
            let r = rhs[k];
            rhs[i] -= f * r;
        }
    }
    let mut x = [T::zero(); N];
    for k in (0..N).rev() {
        let mut s = rhs[k];
        for j in k + 1..N {
            s -= m[k][j] * x[j];
        }
        x[k] = s / m[k][k];
    }
    Some(x)
}

/// `k`-dimensional measure of the simplex spanned by `points` in `R^N`
/// via the Gram determinant of its edge vectors.
pub fn simplex_measure<T: Real, const N: usize>(points: &[[T; N]]) -> T {
    let k = points.len() - 1;
    let edges: Vec<[T; N]> = points[1..].iter().map(|p| sub(p, &points[0])).collect();
    let mut fact = T::one();
    for i in 2..=k {
        fact *= T::from_count(i);
    }
    let g = match k {
        0 => return T::one(),
        1 => dot(&edges[0], &edges[0]),
        2 => {
            let mut m = [[T::zero(); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] = dot(&edges[i], &edges[j]);
                }
            }
            det(m)
        }
        3 => {
            let mut m = [[T::zero(); 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] = dot(&edges[i], &edges[j]);
                }
            }
            det(m)
        }
        4 => {
            let mut m = [[T::zero(); 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    m[i][j] = dot(&edges[i], &edges[j]);
                }
            }
            det(m)
        }
        _ => unimplemented!("simplex dimension above 4"),
    };
    g.max(T::zero()).sqrt() / fact
}

/// Largest pairwise distance among `points`.
pub fn diameter<T: Real, const N: usize>(points: &[[T; N]]) -> T {
    let mut d = T::zero();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max(norm(&sub(&points[i], &points[j])));
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures_of_reference_simplices() {
        let tri = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!((simplex_measure(&tri) - 0.5f64).abs() < 1e-15);
        let tet = [
            [0.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        assert!((simplex_measure(&tet) - 1.0f64 / 6.0).abs() < 1e-15);
        let pent = [
            [0.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        assert!((simplex_measure(&pent) - 1.0f64 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn solve_small_system() {
        let m: [[f64; 3]; 3] = [[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]];
        let x = solve(m, [3.0, 5.0, 5.0]).unwrap();
        for (a, b) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(solve([[1.0, 1.0], [1.0, 1.0]], [1.0, 1.0]).is_none());
        assert!((det3(&m) - det(m)).abs() < 1e-14);
    }
}
