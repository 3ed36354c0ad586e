//! Random simplicial complexes built from marked Poisson points, their
//! homology over Z2, and the statistics of functionals of them.

pub mod boolean;
pub mod cli;
pub mod complex;
pub mod config;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod homology;
pub mod kernel;
pub mod point_process;
pub mod stats;
pub mod svg;

pub use complex::{build_complex, build_coupled, difference_operator, CoupledPair, Simplex, SimplicialComplex};
pub use error::{Error, Result};
pub use functionals::{Functional, FunctionalDescriptor};
pub use kernel::{ConnectionKernel, KernelSpec};
pub use point_process::{sample_poisson, Mark, MarkSampler, MarkedPoint, PointConfiguration, Window};
