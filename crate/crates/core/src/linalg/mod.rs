//! Sparse storage, fill-reducing orderings and the factorizations behind the slab solve.

pub mod gmres;
pub mod lu;
pub mod ordering;
pub mod sparse;

pub use lu::{LuOptions, SparseLu};
pub use ordering::Ordering;
pub use sparse::{CscMatrix, CsrMatrix};
