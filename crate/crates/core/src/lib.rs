//! Whole-body dynamics and control of a cable-suspended hexacopter carrying
//! two tendon-driven arms and a pan/tilt head.
//!
//! Frames: inertial z up; body x forward, y left, z up. Attitude is Z-Y-X
//! Euler `(roll, pitch, yaw)`.

pub mod control;
pub mod dynamics;
mod error;
pub mod kinematics;
pub mod math;
pub mod model;
pub mod sim;
pub mod transmission;

pub use error::{Error, Result};
