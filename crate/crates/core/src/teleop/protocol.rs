use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::render::{CameraRole, FrameBundle};
use crate::trajectory::{ControlCommand, ControlLabel, ControlLimits, PoseSample};

pub const FRAME_ENCODING: &str = "ppm_base64";

/// One wire message: a sequence number plus the tagged body, flattened into
/// a single JSON object such as `{"seq":3,"type":"control",...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub seq: u64,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraInfo {
    pub role: CameraRole,
    pub width: usize,
    pub height: usize,
    pub fov_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WirePose {
    pub position: [f64; 3],
    pub orientation_xyzw: [f64; 4],
    pub velocity: [f64; 3],
    pub angular_velocity: [f64; 3],
}

impl From<&PoseSample> for WirePose {
    fn from(p: &PoseSample) -> Self {
        let q = p.orientation.quaternion();
        Self {
            position: p.position.coords.into(),
            orientation_xyzw: [q.i, q.j, q.k, q.w],
            velocity: p.velocity.into(),
            angular_velocity: p.angular_velocity.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Hello {
        session_id: String,
        tick_hz: f64,
        camera: CameraInfo,
        limits: ControlLimits,
    },
    State {
        t: f64,
        tick: u64,
        pose: WirePose,
        command: ControlCommand,
        last_label: ControlLabel,
        /// Whether this tick went into the active recording.
        recording: bool,
    },
    Frame {
        t: f64,
        width: usize,
        height: usize,
        encoding: String,
        payload: String,
    },
    /// A finished recording has been written as a session.
    Recorded {
        session_dir: String,
        frames: u64,
    },
    Error {
        message: String,
    },
}

impl ServerMessage {
    pub fn frame(bundle: &FrameBundle) -> Option<Self> {
        let ppm = bundle.to_ppm().ok()?;
        Some(ServerMessage::Frame {
            t: bundle.timestamp,
            width: bundle.width,
            height: bundle.height,
            encoding: FRAME_ENCODING.into(),
            payload: base64::engine::general_purpose::STANDARD.encode(ppm),
        })
    }

    /// PPM bytes of a frame message.
    pub fn frame_bytes(&self) -> Option<Vec<u8>> {
        match self {
            ServerMessage::Frame { payload, .. } => base64::engine::general_purpose::STANDARD.decode(payload).ok(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClientMessage {
    Control {
        pitch_rate: f64,
        yaw_rate: f64,
        forward_speed: f64,
    },
    /// `frames` stops recording on its own after that many ticks.
    Record {
        on: bool,
        #[serde(default)]
        frames: Option<u64>,
    },
    Bye {},
}

impl ClientMessage {
    pub fn control(cmd: ControlCommand) -> Self {
        ClientMessage::Control {
            pitch_rate: cmd.pitch_rate,
            yaw_rate: cmd.yaw_rate,
            forward_speed: cmd.forward_speed,
        }
    }
}

pub fn encode<T: Serialize>(seq: u64, body: T) -> String {
    serde_json::to_string(&Envelope { seq, body }).expect("wire messages serialize")
}

pub fn decode_client(line: &str) -> Result<Envelope<ClientMessage>, String> {
    serde_json::from_str(line).map_err(|e| e.to_string())
}

pub fn decode_server(line: &str) -> Result<Envelope<ServerMessage>, String> {
    serde_json::from_str(line).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn client_wire_format() {
        let m = decode_client(r#"{"seq":4,"type":"control","pitch_rate":0.1,"yaw_rate":-0.2,"forward_speed":0.5}"#).unwrap();
        assert_eq!(m.seq, 4);
        assert_eq!(m.body, ClientMessage::control(ControlCommand::new(0.1, -0.2, 0.5)));
        let m = decode_client(r#"{"seq":5,"type":"record","on":true}"#).unwrap();
        assert_eq!(m.body, ClientMessage::Record { on: true, frames: None });
        assert_eq!(decode_client(r#"{"seq":6,"type":"bye"}"#).unwrap().body, ClientMessage::Bye {});
        assert!(decode_client(r#"{"seq":7,"type":"warp"}"#).is_err());
        assert!(decode_client("{not json").is_err());
        let s = encode(9, ClientMessage::Record { on: false, frames: Some(3) });
        assert_eq!(s, r#"{"seq":9,"type":"record","on":false,"frames":3}"#);
    }

    #[test]
    fn server_messages_round_trip() {
        let msgs = [
            ServerMessage::Error { message: "x".into() },
            ServerMessage::State {
                t: 0.1,
                tick: 1,
                pose: WirePose::from(&PoseSample::at_rest(0.1, nalgebra::Point3::new(1.0, 2.0, 3.0), 0.0)),
                command: ControlCommand::default(),
                last_label: ControlLabel::CENTER,
                recording: false,
            },
            ServerMessage::Recorded { session_dir: "d".into(), frames: 2 },
        ];
        for (k, m) in msgs.into_iter().enumerate() {
            let line = encode(k as u64, m.clone());
            assert!(line.contains(r#""type":""#) && !line.contains('\n'));
            let back = decode_server(&line).unwrap();
            assert_eq!((back.seq, back.body), (k as u64, m));
        }
    }

    #[test]
    fn frame_payload_is_ppm() {
        let b = FrameBundle {
            width: 2,
            height: 1,
            rgb: vec![0.0, 0.5, 1.0, 1.0, 1.0, 1.0],
            depth: vec![1.0; 2],
            instance: vec![0; 2],
            timestamp: 0.5,
            camera_role: CameraRole::FrontFacing,
        };
        let m = ServerMessage::frame(&b).unwrap();
        let bytes = m.frame_bytes().unwrap();
        assert!(bytes.starts_with(b"P6"));
        assert_eq!(bytes, b.to_ppm().unwrap());
    }
}
