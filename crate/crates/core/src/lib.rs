//! Polynomial approximation of conformal maps through constrained
//! `L^p` extremal problems on the boundary, with reference maps, rate
//! sweeps and diagnostics.

pub mod config;
pub mod error;
pub mod experiments;
pub mod extremal;
pub mod geom;
pub mod oracle;
pub mod ortho;
pub mod polyops;
pub mod quad;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;

pub use config::RunConfig;
pub use experiments::{RateConfig, RateRow, Reference, ReferenceChoice, SweepReport};
pub use extremal::{ExtremalProblem, ExtremalSolution};
pub use geom::{DomainDescription, DomainSpec};
pub use polyops::Poly;
pub use quad::{QuadratureGrid, Resolution};
