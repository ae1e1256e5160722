use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use nalgebra::Point3;

use super::protocol::{decode_client, encode, CameraInfo, ClientMessage, ServerMessage, WirePose};
use super::transport::{Transport, POLL_INTERVAL};
use super::TeleopError;
use crate::config::RunConfig;
use crate::dataset::export_session;
use crate::reef::ReefScene;
use crate::render::{mount_cameras, render_frame, AccelStructure, CameraRig, CameraRole, FrameBundle, RenderOptions};
use crate::trajectory::{
    quantize_control, step_kinematics, ControlCommand, ControlLabel, ControlLimits, PoseSample, RecordedMotion,
};

/// Result of one simulation tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickOutput {
    /// State at the start of the tick, which the label and frame describe.
    pub state: PoseSample,
    /// Clamped command held during the tick.
    pub command: ControlCommand,
    pub label: ControlLabel,
    pub frame: Option<FrameBundle>,
}

/// The authoritative vehicle: zero-order-hold commands, fixed dt, front
/// camera preview. Simulated time is `t0 + k·dt` at tick k.
pub struct Simulator {
    scene: Arc<ReefScene>,
    accel: Arc<AccelStructure>,
    preview: Option<(CameraRig, RenderOptions)>,
    limits: ControlLimits,
    dt: f64,
    t0: f64,
    k: u64,
    state: PoseSample,
}

impl Simulator {
    pub fn new(
        scene: Arc<ReefScene>,
        accel: Arc<AccelStructure>,
        start: PoseSample,
        tick_hz: f64,
        limits: ControlLimits,
        preview: Option<(CameraRig, RenderOptions)>,
    ) -> Result<Self, TeleopError> {
        if !(tick_hz.is_finite() && tick_hz > 0.0) {
            return Err(TeleopError::Config("tick_hz must be > 0".into()));
        }
        limits.validate().map_err(|e| TeleopError::Config(e.to_string()))?;
        if let Some((rig, _)) = &preview {
            rig.validate().map_err(|e| TeleopError::Config(e.to_string()))?;
        }
        Ok(Self {
            scene,
            accel,
            preview,
            limits,
            dt: 1.0 / tick_hz,
            t0: start.t,
            k: 0,
            state: start,
        })
    }

    pub fn state(&self) -> &PoseSample {
        &self.state
    }

    pub fn ticks(&self) -> u64 {
        self.k
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn limits(&self) -> &ControlLimits {
        &self.limits
    }

    fn render_preview(&self, state: &PoseSample) -> Option<FrameBundle> {
        let (rig, opts) = self.preview.as_ref()?;
        let cams = mount_cameras(&state.isometry(), rig).ok()?;
        let cam = cams.iter().find(|c| c.role == CameraRole::FrontFacing)?;
        render_frame(&self.scene, &self.accel, cam, state.t, opts).ok()
    }

    /// Applies `command` for one tick. A failed preview render only drops
    /// the frame.
    pub fn tick(&mut self, command: &ControlCommand) -> TickOutput {
        let command = command.clamped(&self.limits);
        let label = quantize_control(&command, self.limits.max_pitch_rate, self.limits.max_yaw_rate);
        let before = self.state;
        let frame = self.render_preview(&before);
        let mut next = step_kinematics(&before, &command, self.dt).expect("clamped command and positive dt");
        self.k += 1;
        next.t = self.t0 + self.k as f64 * self.dt;
        self.state = next;
        TickOutput {
            state: before,
            command,
            label,
            frame,
        }
    }
}

#[derive(Debug, Default)]
struct Inner {
    client: Option<Sender<ServerMessage>>,
    command: ControlCommand,
    last_input: Option<Instant>,
    record_request: Option<(bool, Option<u64>)>,
}

struct Shared {
    shutdown: AtomicBool,
    inner: Mutex<Inner>,
    flushes: Mutex<Vec<JoinHandle<()>>>,
}

impl Shared {
    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn notify(&self, msg: ServerMessage) {
        if let Some(tx) = &self.lock().client {
            let _ = tx.send(msg);
        }
    }
}

/// Stops a running server from another thread.
#[derive(Clone)]
pub struct ShutdownHandle(Arc<Shared>);

impl ShutdownHandle {
    pub fn shutdown(&self) {
        self.0.shutdown.store(true, Ordering::SeqCst);
    }

    pub fn is_shutdown(&self) -> bool {
        self.0.shutdown.load(Ordering::SeqCst)
    }
}

pub struct TeleopServer {
    listener: TcpListener,
    shared: Arc<Shared>,
    run: RunConfig,
    scene: Arc<ReefScene>,
    accel: Arc<AccelStructure>,
    out_dir: PathBuf,
}

/// A server running on a background thread.
pub struct RunningServer {
    pub addr: SocketAddr,
    handle: ShutdownHandle,
    join: JoinHandle<Result<(), TeleopError>>,
}

impl RunningServer {
    pub fn shutdown_handle(&self) -> ShutdownHandle {
        self.handle.clone()
    }

    /// Requests shutdown and waits for pending flushes.
    pub fn stop(self) -> Result<(), TeleopError> {
        self.handle.shutdown();
        self.join()
    }

    /// Waits until the server exits on its own (after `bye`).
    pub fn join(self) -> Result<(), TeleopError> {
        self.join.join().map_err(|_| TeleopError::Config("server thread panicked".into()))?
    }
}

impl TeleopServer {
    pub fn bind(
        addr: impl ToSocketAddrs,
        run: RunConfig,
        scene: Arc<ReefScene>,
        accel: Arc<AccelStructure>,
        out_dir: &Path,
    ) -> Result<Self, TeleopError> {
        run.validate().map_err(|e| TeleopError::Config(e.to_string()))?;
        let listener = TcpListener::bind(addr).map_err(TeleopError::Bind)?;
        listener.set_nonblocking(true).map_err(TeleopError::Bind)?;
        Ok(Self {
            listener,
            shared: Arc::new(Shared {
                shutdown: AtomicBool::new(false),
                inner: Mutex::new(Inner::default()),
                flushes: Mutex::new(Vec::new()),
            }),
            run,
            scene,
            accel,
            out_dir: out_dir.to_path_buf(),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener.local_addr().expect("bound listener")
    }

    pub fn shutdown_handle(&self) -> ShutdownHandle {
        ShutdownHandle(self.shared.clone())
    }

    pub fn spawn(self) -> RunningServer {
        let addr = self.local_addr();
        let handle = self.shutdown_handle();
        let join = std::thread::spawn(move || self.run());
        RunningServer { addr, handle, join }
    }

    /// Serves until `bye` or shutdown, then waits for recordings to flush.
    pub fn run(self) -> Result<(), TeleopError> {
        let tp = &self.run.teleop;
        let start = PoseSample::at_rest(0.0, Point3::from(tp.start_position), tp.start_yaw);
        let preview = CameraRig {
            width: tp.preview_width,
            height: tp.preview_height,
            ..self.run.cameras.rig
        };
        let sim = Simulator::new(
            self.scene.clone(),
            self.accel.clone(),
            start,
            tp.tick_hz,
            self.run.control_limits,
            Some((preview, self.run.cameras.render)),
        )?;
        let hello = ServerMessage::Hello {
            session_id: self.run.session_id.clone(),
            tick_hz: tp.tick_hz,
            camera: CameraInfo {
                role: CameraRole::FrontFacing,
                width: preview.width,
                height: preview.height,
                fov_deg: preview.fov_deg,
            },
            limits: self.run.control_limits,
        };
        let sim_thread = {
            let ctx = LoopContext {
                shared: self.shared.clone(),
                run: self.run.clone(),
                scene: self.scene.clone(),
                accel: self.accel.clone(),
                out_dir: self.out_dir.clone(),
                timeout: Duration::from_secs_f64(tp.timeout_s),
            };
            std::thread::spawn(move || sim_loop(sim, ctx))
        };
        while !self.shared.shutdown.load(Ordering::SeqCst) {
            match self.listener.accept() {
                Ok((stream, _)) => {
                    let shared = self.shared.clone();
                    let hello = hello.clone();
                    std::thread::spawn(move || serve_client(stream, shared, hello));
                }
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => std::thread::sleep(POLL_INTERVAL),
                Err(e) => {
                    self.shared.shutdown.store(true, Ordering::SeqCst);
                    let _ = sim_thread.join();
                    return Err(TeleopError::Io(e));
                }
            }
        }
        let _ = sim_thread.join();
        let pending: Vec<JoinHandle<()>> = std::mem::take(&mut *self.shared.flushes.lock().unwrap_or_else(|p| p.into_inner()));
        for h in pending {
            let _ = h.join();
        }
        Ok(())
    }
}

struct LoopContext {
    shared: Arc<Shared>,
    run: RunConfig,
    scene: Arc<ReefScene>,
    accel: Arc<AccelStructure>,
    out_dir: PathBuf,
    timeout: Duration,
}

impl LoopContext {
    fn flush(&self, records: Vec<(PoseSample, ControlCommand)>, index: u32, dt: f64) {
        if records.is_empty() {
            return;
        }
        let shared = self.shared.clone();
        let run = self.run.clone();
        let scene = self.scene.clone();
        let accel = self.accel.clone();
        let out_dir = self.out_dir.clone();
        let handle = std::thread::spawn(move || {
            let msg = match flush_recording(&run, &scene, &accel, &out_dir, records, index, dt) {
                Ok((dir, frames)) => ServerMessage::Recorded {
                    session_dir: dir.display().to_string(),
                    frames,
                },
                Err(e) => ServerMessage::Error {
                    message: format!("recording flush failed: {e}"),
                },
            };
            shared.notify(msg);
        });
        self.shared.flushes.lock().unwrap_or_else(|p| p.into_inner()).push(handle);
    }
}

/// Writes a recording as a standard session, re-rendering every frame at
/// the configured camera resolution.
pub fn flush_recording(
    run: &RunConfig,
    scene: &ReefScene,
    accel: &AccelStructure,
    out_dir: &Path,
    records: Vec<(PoseSample, ControlCommand)>,
    index: u32,
    dt: f64,
) -> Result<(PathBuf, u64), TeleopError> {
    let mut motion = RecordedMotion::new();
    let times: Vec<f64> = records.iter().map(|(p, _)| p.t).collect();
    for (p, c) in records {
        motion.push(p, c)?;
    }
    let last = *times.last().expect("non-empty recording");
    motion.set_end(last + dt)?;
    let id = format!("{}_rec{index:03}", run.session_id);
    let spec = run.session_spec_for_frames(&id, times[0], last + dt, times.clone());
    export_session(scene, accel, &motion, &spec, out_dir)?;
    Ok((out_dir.join(&id), times.len() as u64))
}

fn sim_loop(mut sim: Simulator, ctx: LoopContext) {
    let period = Duration::from_secs_f64(sim.dt());
    let mut deadline = Instant::now();
    let mut recording: Option<(Vec<(PoseSample, ControlCommand)>, Option<u64>)> = None;
    let mut rec_index = 0u32;
    loop {
        let shutting_down = ctx.shared.shutdown.load(Ordering::SeqCst);
        let (command, request, client) = {
            let mut inner = ctx.shared.lock();
            let fresh = inner.last_input.is_some_and(|t| t.elapsed() <= ctx.timeout);
            let cmd = if inner.client.is_some() && fresh { inner.command } else { ControlCommand::default() };
            (cmd, inner.record_request.take(), inner.client.clone())
        };
        let stop_recording = shutting_down || client.is_none() || matches!(request, Some((false, _)));
        if stop_recording {
            if let Some((records, _)) = recording.take() {
                ctx.flush(records, rec_index, sim.dt());
                rec_index += 1;
            }
        } else if let Some((true, frames)) = request {
            if recording.is_none() {
                recording = Some((Vec::new(), frames));
            }
        }
        if shutting_down {
            break;
        }
        let out = sim.tick(&command);
        let mut finished = false;
        let recorded = recording.is_some();
        if let Some((records, remaining)) = recording.as_mut() {
            records.push((out.state, out.command));
            if let Some(r) = remaining {
                *r = r.saturating_sub(1);
                finished = *r == 0;
            }
        }
        if finished {
            let (records, _) = recording.take().expect("recording active");
            ctx.flush(records, rec_index, sim.dt());
            rec_index += 1;
        }
        if let Some(tx) = client {
            let _ = tx.send(ServerMessage::State {
                t: out.state.t,
                tick: sim.ticks() - 1,
                pose: WirePose::from(&out.state),
                command: out.command,
                last_label: out.label,
                recording: recorded,
            });
            if let Some(msg) = out.frame.as_ref().and_then(ServerMessage::frame) {
                let _ = tx.send(msg);
            }
        }
        deadline += period;
        let now = Instant::now();
        if deadline > now {
            std::thread::sleep(deadline - now);
        }
    }
}

fn serve_client(stream: TcpStream, shared: Arc<Shared>, hello: ServerMessage) {
    let Ok(mut transport) = Transport::accept(stream) else {
        return;
    };
    let (tx, rx): (Sender<ServerMessage>, Receiver<ServerMessage>) = mpsc::channel();
    {
        let mut inner = shared.lock();
        if inner.client.is_some() {
            drop(inner);
            let _ = transport.send(&encode(
                0,
                ServerMessage::Error {
                    message: "another console is already connected".into(),
                },
            ));
            transport.close();
            return;
        }
        inner.client = Some(tx);
        inner.command = ControlCommand::default();
        inner.last_input = Some(Instant::now());
    }
    let mut seq = 0u64;
    let mut send = |t: &mut Transport, msg: ServerMessage| {
        let r = t.send(&encode(seq, msg));
        seq += 1;
        r
    };
    let mut last_client_seq: Option<u64> = None;
    let mut alive = send(&mut transport, hello).is_ok();
    while alive && !shared.shutdown.load(Ordering::SeqCst) {
        while let Ok(msg) = rx.try_recv() {
            if send(&mut transport, msg).is_err() {
                alive = false;
                break;
            }
        }
        if !alive {
            break;
        }
        let lines = match transport.poll() {
            Ok(Some(lines)) => lines,
            _ => break,
        };
        for line in lines {
            let msg = match decode_client(&line) {
                Ok(m) => m,
                Err(e) => {
                    alive &= send(&mut transport, ServerMessage::Error { message: format!("malformed message: {e}") }).is_ok();
                    continue;
                }
            };
            if last_client_seq.is_some_and(|s| msg.seq <= s) {
                alive &= send(
                    &mut transport,
                    ServerMessage::Error {
                        message: format!("sequence number {} is not increasing", msg.seq),
                    },
                )
                .is_ok();
                continue;
            }
            last_client_seq = Some(msg.seq);
            let mut inner = shared.lock();
            inner.last_input = Some(Instant::now());
            match msg.body {
                ClientMessage::Control {
                    pitch_rate,
                    yaw_rate,
                    forward_speed,
                } => inner.command = ControlCommand::new(pitch_rate, yaw_rate, forward_speed),
                ClientMessage::Record { on, frames } => inner.record_request = Some((on, frames)),
                ClientMessage::Bye {} => {
                    shared.shutdown.store(true, Ordering::SeqCst);
                }
            }
        }
    }
    // Deliver anything queued (flush notices in particular) before leaving.
    while let Ok(msg) = rx.try_recv() {
        let _ = send(&mut transport, msg);
    }
    {
        let mut inner = shared.lock();
        inner.client = None;
        inner.command = ControlCommand::default();
        inner.last_input = None;
    }
    transport.close();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reef::tests_support::small_scene;
    use crate::render::build_accel;

    fn sim(preview: bool) -> Simulator {
        let scene = Arc::new(small_scene());
        let accel = Arc::new(build_accel(&scene).unwrap());
        let rig = CameraRig {
            width: 16,
            height: 12,
            ..Default::default()
        };
        let start = PoseSample::at_rest(0.0, Point3::new(0.0, 0.0, 1.0), 0.0);
        Simulator::new(scene, accel, start, 10.0, ControlLimits::default(), preview.then_some((rig, RenderOptions::default()))).unwrap()
    }

    #[test]
    fn zero_command_holds_state_and_labels_center() {
        let mut s = sim(true);
        let start = *s.state();
        for k in 0..10 {
            let out = s.tick(&ControlCommand::default());
            assert_eq!(out.label, ControlLabel::CENTER);
            assert_eq!(out.state.position, start.position);
            assert_eq!(out.frame.as_ref().map(|f| (f.width, f.height)), Some((16, 12)));
            assert!((out.state.t - k as f64 * 0.1).abs() < 1e-12);
        }
        assert_eq!(s.state().position, start.position);
    }

    #[test]
    fn alternating_extreme_yaw_alternates_classes() {
        let mut s = sim(false);
        for k in 0..10 {
            let yaw = if k % 2 == 0 { 0.5 } else { -0.5 };
            let out = s.tick(&ControlCommand::new(0.0, yaw, 0.2));
            assert_eq!(out.label.yaw_class, if k % 2 == 0 { 6 } else { 0 });
            assert!(out.frame.is_none());
        }
    }

    #[test]
    fn commands_are_clamped() {
        let mut s = sim(false);
        let out = s.tick(&ControlCommand::new(5.0, -5.0, 9.0));
        assert_eq!(out.command, ControlCommand::new(0.5, -0.5, 1.0));
        assert!((s.state().velocity.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn time_advances_exactly() {
        let mut s = sim(false);
        for _ in 0..1000 {
            s.tick(&ControlCommand::new(0.1, 0.1, 0.3));
        }
        assert_eq!(s.state().t, 1000.0 * 0.1);
    }
}
