//! Live teleoperation of the simulator over a WebSocket.
//!
//! `/ws` streams [`protocol::StateMessage`] frames at 30 Hz and accepts
//! [`protocol::CommandMessage`] frames; `/health` reports the build version;
//! `/kinematics` serves the DH tables and mounts for renderers.

pub mod protocol;
mod service;

pub use service::{kinematics_document, serve, start, SimLoop, TeleopServer, BROADCAST_HZ};

#[derive(Debug, thiserror::Error)]
pub enum TeleopError {
    #[error("cannot bind listener: {0}")]
    Bind(#[source] std::io::Error),
    #[error(transparent)]
    Sim(#[from] samadyn_core::Error),
}

pub type Result<T, E = TeleopError> = std::result::Result<T, E>;
