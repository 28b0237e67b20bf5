//! Structured Kuhn-split tetrahedral background mesh and the uniform time grid.
//!
//! Every cube of the grid is cut into six tetrahedra along its main diagonal.
//! The tetrahedron for the axis permutation `s` is the monotone lattice path
//! `c, c + e[s0], c + e[s0] + e[s1], c + 1`, so its vertex indices are stored in
//! ascending global order. Regular refinement of this mesh is again a Kuhn mesh
//! (with half the spacing) whose tetrahedra nest inside the coarse ones.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vecmath::Vec3;

/// Axis permutations in the order used for local tetrahedron numbering.
pub const KUHN_PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

const LOCATE_TOL: f64 = 1e-12;

/// Axis-aligned box `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxDomain<T> {
    pub lo: Vec3<T>,
    pub hi: Vec3<T>,
}

impl<T: Real> BoxDomain<T> {
    pub fn new(lo: Vec3<T>, hi: Vec3<T>) -> Result<Self> {
        for a in 0..3 {
            if !(hi[a] > lo[a]) {
                return Err(Error::Config(format!(
                    "box axis {a}: upper bound {} must exceed lower bound {}",
                    hi[a], lo[a]
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[-r, r]^3`.
    pub fn cube(r: T) -> Self {
        Self {
            lo: [-r; 3],
            hi: [r; 3],
        }
    }

    pub fn extent(&self, axis: usize) -> T {
        self.hi[axis] - self.lo[axis]
    }

    pub fn volume(&self) -> T {
        self.extent(0) * self.extent(1) * self.extent(2)
    }
}

/// Kuhn-split structured tetrahedral mesh of a box.
#[derive(Clone, Debug)]
pub struct TetMesh<T> {
    pub domain: BoxDomain<T>,
    pub h: T,
    pub cells_per_axis: [usize; 3],
    pub vertices: Vec<Vec3<T>>,
    pub tets: Vec<[usize; 4]>,
}

/// Builds the Kuhn-split mesh of `domain` with spacing `h`.
pub fn build_box_mesh<T: Real>(domain: BoxDomain<T>, h: T) -> Result<TetMesh<T>> {
    if !(h > T::zero()) {
        return Err(Error::Config(format!("mesh size must be positive, got {h}")));
    }
    let mut cells = [0usize; 3];
    for (a, cell) in cells.iter_mut().enumerate() {
        let ratio = domain.extent(a) / h;
        let rounded = ratio.round();
        let tol = T::lit(LOCATE_TOL) * T::one().max(ratio);
        if (ratio - rounded).abs() > tol || rounded < T::one() {
            return Err(Error::Config(format!(
                "box extent along axis {a} ({}) is not an integer multiple of h = {h}",
                domain.extent(a)
            )));
        }
        *cell = rounded.to_usize().unwrap();
    }
    let [m0, m1, m2] = cells;
    let mut vertices = Vec::with_capacity((m0 + 1) * (m1 + 1) * (m2 + 1));
    for k in 0..=m2 {
        for j in 0..=m1 {
            for i in 0..=m0 {
                vertices.push([
                    domain.lo[0] + T::from_count(i) * h,
                    domain.lo[1] + T::from_count(j) * h,
                    domain.lo[2] + T::from_count(k) * h,
                ]);
            }
        }
    }
    let mut mesh = TetMesh {
        domain,
        h,
        cells_per_axis: cells,
        vertices,
        tets: Vec::with_capacity(6 * m0 * m1 * m2),
    };
    for c in 0..m0 * m1 * m2 {
        let cube = mesh.cube_ijk(c);
        for perm in KUHN_PERMS {
            let mut p = cube;
            let mut tet = [mesh.node_id(p); 4];
            for (s, &axis) in perm.iter().enumerate() {
                p[axis] += 1;
                tet[s + 1] = mesh.node_id(p);
            }
            mesh.tets.push(tet);
        }
    }
    Ok(mesh)
}

impl<T: Real> TetMesh<T> {
    pub fn node_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn tet_count(&self) -> usize {
        self.tets.len()
    }

    pub fn cube_count(&self) -> usize {
        self.cells_per_axis.iter().product()
    }

    pub fn node_id(&self, ijk: [usize; 3]) -> usize {
        let [m0, m1, _] = self.cells_per_axis;
        ijk[0] + (m0 + 1) * (ijk[1] + (m1 + 1) * ijk[2])
    }

    pub fn node_ijk(&self, id: usize) -> [usize; 3] {
        let [m0, m1, _] = self.cells_per_axis;
        let i = id % (m0 + 1);
        let r = id / (m0 + 1);
        [i, r % (m1 + 1), r / (m1 + 1)]
    }

    pub fn cube_id(&self, ijk: [usize; 3]) -> usize {
        let [m0, m1, _] = self.cells_per_axis;
        ijk[0] + m0 * (ijk[1] + m1 * ijk[2])
    }

    pub fn cube_ijk(&self, id: usize) -> [usize; 3] {
        let [m0, m1, _] = self.cells_per_axis;
        [id % m0, (id / m0) % m1, id / (m0 * m1)]
    }

    /// The eight corner nodes of a cube.
    pub fn cube_corners(&self, cube: usize) -> [usize; 8] {
        let [i, j, k] = self.cube_ijk(cube);
        let mut out = [0; 8];
        for (c, o) in out.iter_mut().enumerate() {
            *o = self.node_id([i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1)]);
        }
        out
    }

    /// Whether a node lies on the boundary of the box.
    pub fn is_boundary_node(&self, id: usize) -> bool {
        let ijk = self.node_ijk(id);
        (0..3).any(|a| ijk[a] == 0 || ijk[a] == self.cells_per_axis[a])
    }

    pub fn tet_nodes(&self, tet: usize) -> [usize; 4] {
        self.tets[tet]
    }

    pub fn tet_vertices(&self, tet: usize) -> [Vec3<T>; 4] {
        self.tets[tet].map(|v| self.vertices[v])
    }

    /// Signed-free volume of a tetrahedron (always `h^3 / 6`).
    pub fn tet_volume(&self, tet: usize) -> T {
        let v = self.tet_vertices(tet);
        let m = [
            crate::vecmath::sub(&v[1], &v[0]),
            crate::vecmath::sub(&v[2], &v[0]),
            crate::vecmath::sub(&v[3], &v[0]),
        ];
        crate::vecmath::det3(&m).abs() / T::lit(6.0)
    }

    fn tet_cube_perm(&self, tet: usize) -> ([usize; 3], [usize; 3]) {
        (self.cube_ijk(tet / 6), KUHN_PERMS[tet % 6])
    }

    fn local_coords(&self, cube: [usize; 3], x: &Vec3<T>) -> Vec3<T> {
        let mut s = [T::zero(); 3];
        for a in 0..3 {
            s[a] = (x[a] - self.domain.lo[a]) / self.h - T::from_count(cube[a]);
        }
        s
    }

    /// Barycentric coordinates of `x` with respect to `tet` (affine, valid anywhere).
    pub fn barycentric(&self, tet: usize, x: &Vec3<T>) -> [T; 4] {
        let (cube, p) = self.tet_cube_perm(tet);
        let s = self.local_coords(cube, x);
        [
            T::one() - s[p[0]],
            s[p[0]] - s[p[1]],
            s[p[1]] - s[p[2]],
            s[p[2]],
        ]
    }

    /// Constant gradients of the four barycentric functions of `tet`.
    pub fn barycentric_gradients(&self, tet: usize) -> [Vec3<T>; 4] {
        let (_, p) = self.tet_cube_perm(tet);
        let inv_h = T::one() / self.h;
        let mut g = [[T::zero(); 3]; 4];
        g[0][p[0]] = -inv_h;
        g[1][p[0]] = inv_h;
        g[1][p[1]] = -inv_h;
        g[2][p[1]] = inv_h;
        g[2][p[2]] = -inv_h;
        g[3][p[2]] = inv_h;
        g
    }

    /// Finds a tetrahedron containing `x` and the barycentric coordinates of `x`.
    ///
    /// Points up to `1e-12` outside the box are clamped onto it. Among several
    /// containing tetrahedra the lowest index wins.
    pub fn locate_point(&self, x: &Vec3<T>) -> Result<(usize, [T; 4])> {
        let tol = T::lit(LOCATE_TOL);
        let mut xi = [T::zero(); 3];
        let mut candidates: [[usize; 2]; 3] = [[0; 2]; 3];
        let mut counts = [1usize; 3];
        for a in 0..3 {
            let m = self.cells_per_axis[a];
            let abs_tol = tol * T::one().max(self.domain.extent(a));
            if x[a] < self.domain.lo[a] - abs_tol || x[a] > self.domain.hi[a] + abs_tol || !x[a].is_finite() {
                return Err(Error::Domain(format!(
                    "point {:?} lies outside the mesh box",
                    x.map(|v| v.as_f64())
                )));
            }
            let v = ((x[a] - self.domain.lo[a]) / self.h)
                .max(T::zero())
                .min(T::from_count(m));
            xi[a] = v;
            let c = v.floor().to_usize().unwrap().min(m - 1);
            if c > 0 && v - T::from_count(c) <= tol {
                candidates[a] = [c - 1, c];
                counts[a] = 2;
            } else {
                candidates[a] = [c, c];
            }
        }
        let mut cubes = Vec::with_capacity(8);
        for &k in &candidates[2][..counts[2]] {
            for &j in &candidates[1][..counts[1]] {
                for &i in &candidates[0][..counts[0]] {
                    cubes.push(self.cube_id([i, j, k]));
                }
            }
        }
        cubes.sort_unstable();
        for cube in cubes {
            let cijk = self.cube_ijk(cube);
            let mut s = [T::zero(); 3];
            for a in 0..3 {
                s[a] = xi[a] - T::from_count(cijk[a]);
            }
            for (pi, p) in KUHN_PERMS.iter().enumerate() {
                let lam = [
                    T::one() - s[p[0]],
                    s[p[0]] - s[p[1]],
                    s[p[1]] - s[p[2]],
                    s[p[2]],
                ];
                if lam.iter().all(|&l| l >= -tol) {
                    return Ok((cube * 6 + pi, lam));
                }
            }
        }
        Err(Error::Internal(format!(
            "point location failed for {:?}",
            x.map(|v| v.as_f64())
        )))
    }
}

/// Uniform partition of `[0, t_end]` into `n_slabs` time slabs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid<T> {
    pub t_end: T,
    pub n_slabs: usize,
    pub dt: T,
}

impl<T: Real> TimeGrid<T> {
    /// Grid with step `dt`; `t_end / dt` must be an integer (to `1e-9`).
    pub fn new(t_end: T, dt: T) -> Result<Self> {
        if !(t_end > T::zero()) || !(dt > T::zero()) {
            return Err(Error::Config(format!(
                "t_end ({t_end}) and dt ({dt}) must be positive"
            )));
        }
        let ratio = t_end / dt;
        let n = ratio.round();
        if (ratio - n).abs() > T::lit(1e-9) * T::one().max(ratio) || n < T::one() {
            return Err(Error::Config(format!(
                "t_end = {t_end} is not an integer multiple of dt = {dt}"
            )));
        }
        Self::with_slabs(t_end, n.to_usize().unwrap())
    }

    pub fn with_slabs(t_end: T, n_slabs: usize) -> Result<Self> {
        if n_slabs == 0 {
            return Err(Error::Config("at least one time slab is required".into()));
        }
        Ok(Self {
            t_end,
            n_slabs,
            dt: t_end / T::from_count(n_slabs),
        })
    }

    /// `t_n = n dt`.
    pub fn time(&self, n: usize) -> T {
        T::from_count(n) * self.dt
    }

    /// Endpoints `(t_{n-1}, t_n)` of slab `n` (1-based).
    pub fn slab(&self, n: usize) -> (T, T) {
        (self.time(n - 1), self.time(n))
    }
}
