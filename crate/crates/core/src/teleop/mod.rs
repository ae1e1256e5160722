//! Live piloting server. One console connects over newline-delimited JSON
//! on TCP, or over a WebSocket carrying the same JSON messages. The server
//! steps the vehicle at a fixed tick, streams state and a front-camera
//! preview, and records (frame, control label) pairs while recording is on.
//! A finished recording is re-rendered at full resolution and written as a
//! standard session.

mod protocol;
mod server;
mod transport;

pub use protocol::{
    decode_client, decode_server, encode, CameraInfo, ClientMessage, Envelope, ServerMessage, WirePose, FRAME_ENCODING,
};
pub use server::{flush_recording, RunningServer, ShutdownHandle, Simulator, TeleopServer, TickOutput};

use crate::dataset::DatasetError;
use crate::trajectory::TrajectoryError;

#[derive(Debug, thiserror::Error)]
pub enum TeleopError {
    #[error("invalid teleop config: {0}")]
    Config(String),
    #[error("cannot bind teleop port: {0}")]
    Bind(#[source] std::io::Error),
    #[error(transparent)]
    Io(std::io::Error),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}
