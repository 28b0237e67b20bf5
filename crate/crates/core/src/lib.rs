//! Eulerian space-time trace finite elements for advection-diffusion
//! equations on evolving surfaces.
//!
//! The surface is given implicitly as the zero level of `phi(x, t)`. A fixed
//! tetrahedral background mesh carries piecewise bilinear space-time functions
//! (P1 in space, linear and discontinuous in time per slab); their traces on a
//! piecewise planar reconstruction of the space-time surface form the
//! discrete space. Time slabs are solved one after another.
//!
//! The core is generic over the scalar type ([`scalar::Real`], `f32` or `f64`);
//! the aliases at the crate root fix it to `f64`.
//!
//! ```no_run
//! use evosurf::{problems, driver, mesh::TimeGrid};
//! let p = problems::builtin_shrinking_sphere::<f64>();
//! let grid = TimeGrid::new(1.0, 0.25).unwrap();
//! let sim = driver::simulate(&p, p.default_box, 0.5, grid, &Default::default(), |_, _, _| Ok(())).unwrap();
//! println!("{:?}", sim.report.err_l2_final);
//! ```

pub mod assembly;
pub mod cli;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod linsolve;
pub mod mesh;
pub mod problems;
pub mod scalar;
pub mod vecmath;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Problem = problems::ProblemDefinition<f64>;
pub type Mesh = mesh::TetMesh<f64>;
pub type Domain = mesh::BoxDomain<f64>;
pub type Grid = mesh::TimeGrid<f64>;
pub type SpaceTime = geometry::SpaceTimeMesh<f64>;
pub type Surface = geometry::SlabSurface<f64>;
pub type Section = geometry::CrossSection<f64>;
pub type System = assembly::SlabSystem<f64>;
pub type Solution = linsolve::SlabSolution<f64>;
pub type Report = diagnostics::ErrorReport<f64>;
