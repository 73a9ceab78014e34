//! Fixed-step simulation of the coupled haptic device, UAM and plug, with a
//! scripted operator, CSV logging and metrics.

pub mod config;
pub mod engine;
pub mod log;
pub mod metrics;
pub mod operator;
pub mod rk4;

pub use config::{InitialConditions, Mode, OperatorParams, ScenarioConfig};
pub use engine::{run_scenario, run_with_operator, ControlSnapshot, Simulation};
pub use log::{format_sig6, LogRow, SimLog};
pub use metrics::{compute_metrics, Metrics};
pub use operator::{
    operator_step, HandInput, IdleOperator, Operator, OperatorObservation, OperatorState,
    OperatorSubstate, ScriptedOperator,
};
pub use rk4::rk4_step;
