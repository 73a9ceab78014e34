//! External wrench and force-rate estimation.

pub mod dob;
pub mod kf;
pub mod momentum;

pub use dob::{dob_step, DobParams, DobState};
pub use kf::{kf_derivative_step, ForceDerivativeKf, KfParams};
pub use momentum::{momentum_observer_step, MomentumObserverState};
