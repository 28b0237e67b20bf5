//! Reconstruction of the discrete space-time surface and its cross sections.

pub mod marching;
pub mod quadrature;
pub mod surface;

pub use marching::{march_pentatope, march_tet, subdivide_prism, Pentatope, PointKey, Prism4D};
pub use surface::{
    reconstruct_cross_section, reconstruct_slab, CrossSection, CrossSectionElement, DroppedSimplex, SlabSurface,
    SpaceTimeMesh, SurfaceElement,
};
