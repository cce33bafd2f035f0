//! Simulation and verification toolkit for strong local velocity alignment:
//! a deterministic particle solver for the kinetic equation
//!
//!   df/dt + v df/dx - lambda d/dv (v f) + (1/eps) d/dv ((u - v) f) = 0
//!
//! on the periodic line, an exact characteristics solver for its small-eps
//! fluid limit (the damped pressureless Euler system), and the entropy and
//! relative-entropy machinery that quantifies the distance between the two.
//!
//! The particle method represents the singular mono-kinetic equilibrium
//! natively; transport, friction and alignment relaxation are each advanced
//! by their exact flow maps inside a Strang composition, so no step-size
//! restriction arises from small eps. All reductions are chunked in fixed
//! order: results are bitwise reproducible for any worker count, with a
//! sequential fallback behind the `parallel` feature.

pub mod checks;
pub mod domain;
pub mod ensemble;
pub mod entropy;
pub mod error;
pub mod euler;
pub mod exec;
pub mod identity;
pub mod init;
pub mod solver;
pub mod sweep;

pub use domain::Domain1D;
pub use ensemble::{deposit_moments, gather_velocity, MomentField, ParticleEnsemble};
pub use entropy::EntropyReport;
pub use error::{Error, Result};
pub use euler::{blowup_time, InitProfile, ReferenceSolution};
pub use init::{build_ensemble, QuadOrder, WellPreparedSpec};
pub use solver::{run, RunResult, RunSink, SimParams};
pub use sweep::{rate_fit, run_sweep, SweepConfig, SweepResult};
