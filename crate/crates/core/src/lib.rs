//! Numerical laboratory for the fast diffusion equation with source,
//! `u_t = Δ(u^m) + u^p` with `0 < m < 1 < p`.

pub mod equivalence;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod field;
pub mod geometry;
pub mod gronwall;
pub mod io;
pub mod par;
pub mod profiles;
pub mod quad;
pub mod solver;
pub mod special;
pub mod trace_estimator;
pub mod ulmorrey;

pub use error::{Error, Result};
pub use exponents::{ProblemParams, Regime};
pub use field::{Grid, GridField};
pub use par::Exec;
pub use profiles::{Gauge, RadialProfile};
