//! Continuous data of the benchmark problems.
//!
//! A problem is the level-set description of the moving surface, the velocity
//! transporting it, the coefficients of the surface PDE
//! `u' + alpha u - nu_d Lap_Gamma u = f` and, where known, the exact solution.

use std::fmt;

use crate::error::{Error, Result};
use crate::mesh::BoxDomain;
use crate::scalar::Real;
use crate::vecmath::{dot, norm, Vec3};

pub type ScalarField<T> = Box<dyn Fn(&Vec3<T>, T) -> T + Send + Sync>;
pub type VectorField<T> = Box<dyn Fn(&Vec3<T>, T) -> Result<Vec3<T>> + Send + Sync>;
pub type MatrixField<T> = Box<dyn Fn(&Vec3<T>, T) -> Result<[[T; 3]; 3]> + Send + Sync>;
pub type InitialField<T> = Box<dyn Fn(&Vec3<T>) -> T + Send + Sync>;

/// How the zero-order coefficient is obtained.
pub enum AlphaMode<T> {
    /// `alpha = div_Gamma w` (the conservation law).
    DivGammaW,
    /// Prescribed `alpha(x, t)`.
    Explicit(ScalarField<T>),
}

/// Right-hand side of the surface PDE.
pub enum SourceTerm<T> {
    Zero,
    Function(ScalarField<T>),
    /// `f` equals the zero-order coefficient evaluated with the discrete normal,
    /// so that the constant function solves the discrete problem.
    MatchAlpha,
}

/// Problems selectable by name from a run configuration.
pub const PROBLEM_NAMES: [&str; 5] = [
    "shrinking_sphere",
    "shrinking_sphere_exp",
    "dziuk_moving",
    "static_sphere",
    "expanding_sphere",
];

pub struct ProblemDefinition<T> {
    pub name: String,
    pub phi: ScalarField<T>,
    pub velocity: VectorField<T>,
    /// `J[i][j] = d w_i / d x_j`
    pub velocity_jacobian: MatrixField<T>,
    pub nu_d: T,
    pub alpha_mode: AlphaMode<T>,
    pub source: SourceTerm<T>,
    pub exact_solution: Option<ScalarField<T>>,
    pub closest_point: Option<VectorField<T>>,
    pub initial_value: InitialField<T>,
    pub default_box: BoxDomain<T>,
    pub default_t_end: T,
}

impl<T> fmt::Debug for ProblemDefinition<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("name", &self.name)
            .field("has_exact_solution", &self.exact_solution.is_some())
            .finish_non_exhaustive()
    }
}

/// Pointwise coefficients on the surface for a given unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceCoefficients<T> {
    pub n: Vec3<T>,
    pub velocity: Vec3<T>,
    pub div_gamma_w: T,
    pub alpha: T,
    /// `(1 + (w.n)^2)^{-1/2}`
    pub beta: T,
}

/// `tr(J) - n^T J n`
pub fn surface_divergence<T: Real>(jac: &[[T; 3]; 3], n: &Vec3<T>) -> T {
    let mut trace = T::zero();
    let mut njn = T::zero();
    for i in 0..3 {
        trace += jac[i][i];
        for j in 0..3 {
            njn += n[i] * jac[i][j] * n[j];
        }
    }
    trace - njn
}

impl<T: Real> ProblemDefinition<T> {
    /// Evaluates `w`, `div_Gamma w`, `alpha` and the measure factor at `(x, t)`.
    pub fn surface_coefficients(&self, x: &Vec3<T>, t: T, n: &Vec3<T>) -> Result<SurfaceCoefficients<T>> {
        let w = (self.velocity)(x, t)?;
        let jac = (self.velocity_jacobian)(x, t)?;
        let div_gamma_w = surface_divergence(&jac, n);
        let alpha = match &self.alpha_mode {
            AlphaMode::DivGammaW => div_gamma_w,
            AlphaMode::Explicit(a) => a(x, t),
        };
        let wn = dot(&w, n);
        Ok(SurfaceCoefficients {
            n: *n,
            velocity: w,
            div_gamma_w,
            alpha,
            beta: T::one() / (T::one() + wn * wn).sqrt(),
        })
    }

    /// Source value at a quadrature point given the already evaluated `alpha`.
    pub fn source_value(&self, x: &Vec3<T>, t: T, alpha: T) -> T {
        match &self.source {
            SourceTerm::Zero => T::zero(),
            SourceTerm::Function(f) => f(x, t),
            SourceTerm::MatchAlpha => alpha,
        }
    }

    pub fn has_zero_source(&self) -> bool {
        matches!(self.source, SourceTerm::Zero)
    }

    /// Constant-in-normal-direction extension `u(p(x, t), t)` of the exact solution.
    pub fn extended_solution(&self, x: &Vec3<T>, t: T) -> Result<T> {
        let (Some(u), Some(cp)) = (&self.exact_solution, &self.closest_point) else {
            return Err(Error::Config(format!(
                "problem '{}' has no exact solution with closest-point map",
                self.name
            )));
        };
        Ok(u(&cp(x, t)?, t))
    }

    pub fn has_exact_solution(&self) -> bool {
        self.exact_solution.is_some() && self.closest_point.is_some()
    }

    pub fn with_nu(mut self, nu_d: T) -> Self {
        self.nu_d = nu_d;
        self
    }
}

/// Looks up a problem by name.
pub fn builtin<T: Real>(name: &str) -> Result<ProblemDefinition<T>> {
    match name {
        "shrinking_sphere" => Ok(builtin_shrinking_sphere()),
        "shrinking_sphere_exp" => Ok(builtin_shrinking_sphere_exp()),
        "dziuk_moving" => Ok(builtin_dziuk_moving()),
        "static_sphere" => Ok(static_sphere(T::one())),
        "expanding_sphere" => Ok(expanding_sphere()),
        _ => Err(Error::Config(format!(
            "unknown problem '{name}', expected one of {PROBLEM_NAMES:?}"
        ))),
    }
}

fn guard_origin<T: Real>(x: &Vec3<T>) -> Result<T> {
    let r = norm(x);
    if r < T::lit(1e-10) {
        return Err(Error::Domain(format!(
            "radial velocity undefined at the origin (|x| = {r})"
        )));
    }
    Ok(r)
}

/// `w = g(t) x / |x|` and its Jacobian `g (I / r - x x^T / r^3)`.
fn radial_fields<T: Real>(
    speed: impl Fn(T) -> T + Send + Sync + Copy + 'static,
) -> (VectorField<T>, MatrixField<T>) {
    let velocity: VectorField<T> = Box::new(move |x, t| {
        let r = guard_origin(x)?;
        let g = speed(t);
        Ok(x.map(|v| g * v / r))
    });
    let jacobian: MatrixField<T> = Box::new(move |x, t| {
        let r = guard_origin(x)?;
        let g = speed(t);
        let r3 = r * r * r;
        let mut j = [[T::zero(); 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let delta = if a == b { T::one() / r } else { T::zero() };
                j[a][b] = g * (delta - x[a] * x[b] / r3);
            }
        }
        Ok(j)
    });
    (velocity, jacobian)
}

fn sphere_projection<T: Real>(radius: impl Fn(T) -> T + Send + Sync + 'static) -> VectorField<T> {
    Box::new(move |x, t| {
        let r = guard_origin(x)?;
        let s = radius(t) / r;
        Ok(x.map(|v| v * s))
    })
}

fn shrinking_radius<T: Real>(t: T) -> T {
    T::lit(1.5) * (-t / T::lit(2.0)).exp()
}

fn shrinking_speed<T: Real>(t: T) -> T {
    -T::lit(0.75) * (-t / T::lit(2.0)).exp()
}

fn shrinking_geometry<T: Real>(
    name: &str,
    exact: ScalarField<T>,
    source: SourceTerm<T>,
) -> ProblemDefinition<T> {
    let (velocity, velocity_jacobian) = radial_fields(shrinking_speed::<T>);
    let cp = sphere_projection(shrinking_radius::<T>);
    let exact_for_init: ScalarField<T> = clone_exact(name);
    let cp_for_init = sphere_projection(shrinking_radius::<T>);
    ProblemDefinition {
        name: name.to_string(),
        phi: Box::new(|x, t| dot(x, x) - T::lit(2.25) * (-t).exp()),
        velocity,
        velocity_jacobian,
        nu_d: T::one(),
        alpha_mode: AlphaMode::DivGammaW,
        source,
        exact_solution: Some(exact),
        closest_point: Some(cp),
        initial_value: Box::new(move |x| match cp_for_init(x, T::zero()) {
            Ok(p) => exact_for_init(&p, T::zero()),
            Err(_) => exact_for_init(x, T::zero()),
        }),
        default_box: BoxDomain::cube(T::lit(2.0)),
        default_t_end: T::one(),
    }
}

fn clone_exact<T: Real>(name: &str) -> ScalarField<T> {
    if name == "shrinking_sphere_exp" {
        Box::new(|_, t| t.exp())
    } else {
        Box::new(|x, t| (T::one() + x[0] * x[1] * x[2]) * t.exp())
    }
}

/// Sphere of radius `1.5 e^{-t/2}` with `u = (1 + x1 x2 x3) e^t`.
pub fn builtin_shrinking_sphere<T: Real>() -> ProblemDefinition<T> {
    let f: ScalarField<T> = Box::new(|x, t| {
        (-T::lit(1.5) * t.exp() + T::lit(16.0 / 3.0) * (T::lit(2.0) * t).exp()) * x[0] * x[1] * x[2]
    });
    shrinking_geometry(
        "shrinking_sphere",
        clone_exact("shrinking_sphere"),
        SourceTerm::Function(f),
    )
}

/// Same geometry with the spatially constant solution `u = e^t` and `f = 0`.
pub fn builtin_shrinking_sphere_exp<T: Real>() -> ProblemDefinition<T> {
    shrinking_geometry(
        "shrinking_sphere_exp",
        clone_exact("shrinking_sphere_exp"),
        SourceTerm::Zero,
    )
}

/// Inverse of the flow map of `w = (0.1 x1 cos t, 0.2 x2 sin t, 0.2 x3 cos t)`.
pub fn dziuk_inverse_flow<T: Real>(x: &Vec3<T>, t: T) -> Vec3<T> {
    [
        x[0] * (-T::lit(0.1) * t.sin()).exp(),
        x[1] * (-T::lit(0.2) * (T::one() - t.cos())).exp(),
        x[2] * (-T::lit(0.2) * t.sin()).exp(),
    ]
}

/// `(y1 - y3^2)^2 + y2^2 + y3^2 - 1`
pub fn dziuk_initial_level_set<T: Real>(y: &Vec3<T>) -> T {
    let a = y[0] - y[2] * y[2];
    a * a + y[1] * y[1] + y[2] * y[2] - T::one()
}

/// Surface diffusion on the transported Dziuk surface; mass is conserved.
pub fn builtin_dziuk_moving<T: Real>() -> ProblemDefinition<T> {
    ProblemDefinition {
        name: "dziuk_moving".into(),
        phi: Box::new(|x, t| dziuk_initial_level_set(&dziuk_inverse_flow(x, t))),
        velocity: Box::new(|x, t| {
            Ok([
                T::lit(0.1) * x[0] * t.cos(),
                T::lit(0.2) * x[1] * t.sin(),
                T::lit(0.2) * x[2] * t.cos(),
            ])
        }),
        velocity_jacobian: Box::new(|_, t| {
            let z = T::zero();
            Ok([
                [T::lit(0.1) * t.cos(), z, z],
                [z, T::lit(0.2) * t.sin(), z],
                [z, z, T::lit(0.2) * t.cos()],
            ])
        }),
        nu_d: T::one(),
        alpha_mode: AlphaMode::DivGammaW,
        source: SourceTerm::Zero,
        exact_solution: None,
        closest_point: None,
        initial_value: Box::new(|x| T::one() + x[0] * x[1] * x[2]),
        default_box: BoxDomain {
            lo: [T::lit(-2.0); 3],
            hi: [T::lit(3.0), T::lit(2.0), T::lit(2.0)],
        },
        default_t_end: T::lit(8.0),
    }
}

/// Sphere of fixed `radius` (`w = 0`); `u = 1` is the exact solution.
pub fn static_sphere<T: Real>(radius: T) -> ProblemDefinition<T> {
    let z = T::zero();
    ProblemDefinition {
        name: "static_sphere".into(),
        phi: Box::new(move |x, _| dot(x, x) - radius * radius),
        velocity: Box::new(move |_, _| Ok([z; 3])),
        velocity_jacobian: Box::new(move |_, _| Ok([[z; 3]; 3])),
        nu_d: T::one(),
        alpha_mode: AlphaMode::DivGammaW,
        source: SourceTerm::Zero,
        exact_solution: Some(Box::new(|_, _| T::one())),
        closest_point: Some(sphere_projection(move |_| radius)),
        initial_value: Box::new(|_| T::one()),
        default_box: BoxDomain::cube(T::lit(2.0)),
        default_t_end: T::one(),
    }
}

/// Sphere of radius `1.5 e^{t/2}`; `div_Gamma w = 1`, so the zero-order
/// coefficient dominates half the surface divergence.
pub fn expanding_sphere<T: Real>() -> ProblemDefinition<T> {
    let (velocity, velocity_jacobian) = radial_fields(|t: T| T::lit(0.75) * (t / T::lit(2.0)).exp());
    ProblemDefinition {
        name: "expanding_sphere".into(),
        phi: Box::new(|x, t| dot(x, x) - T::lit(2.25) * t.exp()),
        velocity,
        velocity_jacobian,
        nu_d: T::one(),
        alpha_mode: AlphaMode::DivGammaW,
        source: SourceTerm::Zero,
        exact_solution: None,
        closest_point: None,
        initial_value: Box::new(|x| T::one() + x[0] * x[1] * x[2]),
        default_box: BoxDomain::cube(T::lit(3.0)),
        default_t_end: T::lit(0.5),
    }
}
