//! Propagators, wave packets and observables for a charged matter wave in
//! uniform force and magnetic fields.

pub mod error;
pub mod evolution;
pub mod forces;
pub mod kernels;
pub mod numerics;
pub mod observables;
pub mod states;

pub use error::{Error, Result};
