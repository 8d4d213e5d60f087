//! Deterministic simulator of preferred-frame superluminal signaling between
//! entangled-photon detections, and a solver that recovers the laboratory's
//! velocity relative to the preferred frame from directional signal-speed
//! measurements.
//!
//! All numerics are generic over [`Scalar`] (`f64` or `f32`); the `*64`
//! aliases below fix the working precision used by the command-line tool.

pub mod error;
pub mod experiment;
pub mod ftl;
pub mod io;
pub mod kinematics;
pub mod scalar;
pub mod solver;
pub mod worldline;

pub use error::{Error, Result};
pub use experiment::{
    correlated_from_lab_record, correlation_predicate, detour_sweep, equidistant_l1, run, run_collinear,
    run_equidistant_test, run_transverse, transverse_from_lab_speed, ExperimentConfig, FirstInS, Geometry,
    OrderClass, Outcome, Photon,
};
pub use ftl::{arrival_event, induced_lab_narrative, lab_speed, Arrival, FtlSignal, FtlSpeed, LabSpeed};
pub use kinematics::{
    boost_event, compose_velocity_to_lab, compose_velocity_to_preferred, interval, inverse_boost_event, Boost,
    Event, Frame, IntervalClass, Separation, Vec3, Velocity,
};
pub use scalar::{Scalar, Tolerances};
pub use solver::{
    forward_measurements, recover_frame, solve_v_from_transverse, DirectionalMeasurement, RecoveryResult,
};
pub use worldline::{Segment, Worldline};

pub type Vec3f64 = Vec3<f64>;
pub type Event64 = Event<f64>;
pub type Boost64 = Boost<f64>;
pub type FtlSpeed64 = FtlSpeed<f64>;
pub type Worldline64 = Worldline<f64>;
pub type ExperimentConfig64 = ExperimentConfig<f64>;
pub type Outcome64 = Outcome<f64>;
pub type SweepTable64 = experiment::SweepTable<f64>;
pub type Measurement64 = DirectionalMeasurement<f64>;
pub type RecoveryResult64 = RecoveryResult<f64>;

pub type Vec3f32 = Vec3<f32>;
pub type Event32 = Event<f32>;
pub type Boost32 = Boost<f32>;
pub type FtlSpeed32 = FtlSpeed<f32>;
pub type ExperimentConfig32 = ExperimentConfig<f32>;
pub type Outcome32 = Outcome<f32>;
