//! Numerical construction of O(n-k) x O(k)-invariant capillary and
//! free-boundary minimal cones by shooting on the profile equation.

pub mod equation;
pub mod error;
pub mod ode;
pub mod integrate;
pub mod series;
pub mod special;
pub mod exec;
pub mod profile;
pub mod shoot;
pub mod phi;
pub mod geom;
pub mod verify;

pub use equation::{ConeParams, Lambda, PhasePoint, Slope};
pub use error::{Error, Result};
