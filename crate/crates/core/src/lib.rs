//! Time-reversal refocusing in a randomly perturbed Pekeris waveguide.
//!
//! The crate covers the deterministic mode spectrum, the coupling statistics
//! of a random medium, the coupled mode power equations and their diffusion
//! limit, time-reversal refocusing profiles, and a Monte Carlo propagator to
//! check the asymptotic theory.

pub mod diffusion;
pub mod error;
pub mod medium;
pub mod montecarlo;
pub mod power;
pub mod quadrature;
pub mod refocus;
pub mod runner;
pub mod special;
pub mod tridiag;
pub mod validation;
pub mod waveguide;

pub use diffusion::{BottomBoundary, DiffusionConfig, DiffusionField, TimeScheme};
pub use error::{Error, Result};
pub use medium::{CouplingMatrices, Kernel, LossVariant, MediumStats};
pub use refocus::{MirrorSpec, Normalization, PulseSpec, RefocusMetrics, RefocusProfile};
pub use waveguide::{ModeSet, PropagatingMode, RadiationGrid, SpectrumOptions, WaveguideConfig};
