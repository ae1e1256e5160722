//! A scripted console for the teleop server. With no argument it starts a
//! small server in-process; otherwise it connects to `host:port`.
//! It flies a short right turn, records 30 ticks and reports the session.
//!
//! cargo run --example teleop_client -- [host:port]

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::sync::Arc;

use reefsim::config::RunConfig;
use reefsim::reef::Rect;
use reefsim::render::build_accel;
use reefsim::teleop::{decode_server, encode, ClientMessage, ServerMessage, TeleopServer};
use reefsim::trajectory::ControlCommand;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (addr, local) = match std::env::args().nth(1) {
        Some(a) => (a, None),
        None => {
            let mut cfg = RunConfig::with_seed(5);
            cfg.session_id = "teleop_demo".into();
            cfg.placement.region = Rect::new([-2.0, -2.0], [2.0, 2.0]);
            cfg.cameras.rig.width = 160;
            cfg.cameras.rig.height = 120;
            cfg.teleop.tick_hz = 20.0;
            cfg.teleop.preview_width = 80;
            cfg.teleop.preview_height = 60;
            let scene = Arc::new(cfg.build_scene()?);
            let accel = Arc::new(build_accel(&scene)?);
            let out = std::env::temp_dir().join("reefsim-teleop");
            let server = TeleopServer::bind("127.0.0.1:0", cfg, scene, accel, &out)?.spawn();
            (server.addr.to_string(), Some(server))
        }
    };

    let stream = TcpStream::connect(&addr)?;
    let mut writer = stream.try_clone()?;
    let mut lines = BufReader::new(stream).lines();
    let mut seq = 0u64;
    let mut send = |msg: ClientMessage| -> std::io::Result<()> {
        writeln!(writer, "{}", encode(seq, msg))?;
        seq += 1;
        Ok(())
    };

    send(ClientMessage::control(ControlCommand::new(0.0, 0.25, 0.4)))?;
    send(ClientMessage::Record { on: true, frames: Some(30) })?;
    let mut previews = 0;
    for line in lines.by_ref() {
        let env = decode_server(&line?)?;
        match env.body {
            ServerMessage::Hello { session_id, tick_hz, camera, .. } => {
                println!("connected to {session_id} at {tick_hz} Hz, preview {}x{}", camera.width, camera.height)
            }
            ServerMessage::State { tick, pose, last_label, recording, .. } if tick % 10 == 0 => println!(
                "tick {tick:>3}: x {:+.2} y {:+.2} label ({}, {}) rec {recording}",
                pose.position[0], pose.position[1], last_label.pitch_class, last_label.yaw_class
            ),
            ServerMessage::Frame { .. } => previews += 1,
            ServerMessage::Recorded { session_dir, frames } => {
                println!("recorded {frames} frames to {session_dir}");
                break;
            }
            ServerMessage::Error { message } => eprintln!("server error: {message}"),
            _ => {}
        }
    }
    println!("{previews} preview frames received");
    send(ClientMessage::Bye {})?;
    if let Some(server) = local {
        server.join()?;
    }
    Ok(())
}
