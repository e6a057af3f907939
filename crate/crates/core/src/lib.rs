//! Perfect simulation of heavily diluted gas models.
//!
//! The crate implements spatial birth-and-death dynamics whose time-0 state is
//! an exact draw from the unique equilibrium measure of a gas model (a pair of
//! an intensity measure and an interaction). Sampling proceeds backwards in
//! time through the clan of ancestors of the target window; the clan is finite
//! whenever the model's diluteness coefficient is below one, and a single pass
//! of deterministic thinning then decides which cylinders survive.
//!
//! Built-in models: the discrete and continuum Widom-Rowlinson lattice gases,
//! the Widom-Rowlinson model with generalized (soft) repulsion, thin rods with
//! arbitrary orientation measures, and the Peierls contour ensemble of the
//! two-dimensional Ising model.
//!
//! On top of the standalone sampler, [`coupling`] produces simultaneous exact
//! samples of a target model together with perturbed or discretized versions
//! of it, all driven by one shared cylinder substrate, and [`oracle`] provides
//! exact finite-volume enumeration used to validate everything at desk scale.

pub mod config;
pub mod contours;
pub mod coupling;
pub mod error;
pub mod free_process;
pub mod manifest;
pub mod models;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod spec_file;
pub mod stats;

pub use config::{Location, Mark, MarkSet, Particle, ParticleConfiguration, Region};
pub use error::{ModelError, OracleError, ProcessError, SamplerError, SpecError};
pub use models::{DilutenessReport, GasModel, IntensityMeasure, ModelKind};
pub use sampler::{Clan, KeepDecision};
