//! Command-line entry points. `main` only forwards to [`run`].
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::config::{ConfigError, RunConfig};
use crate::dataset::{export_session_with_progress, SessionManifest, MANIFEST_FILE};
use crate::render::build_accel;
use crate::shellgen::{generate_shell, validate_mesh};
use crate::teleop::TeleopServer;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "reefsim", version, about = "Headless underwater oyster reef simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write `count` oyster shells as OBJ files and report mesh checks.
    GenerateShells {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the reef and export one session per turbidity setting.
    RenderDataset {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for rendering (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and check a config without generating anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the teleop server until a client says bye.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        port: u16,
        /// Bind address.
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Where recordings go (default: the config's output_dir, else ./out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

fn runtime(context: &str) -> impl Fn(&dyn std::fmt::Display) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{context}: {e}"))
}

/// Loads, seeds from the environment and validates a config.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::from_path(path)?;
    cfg.apply_env()?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parses `args` (including the program name) and runs the command. Usage
/// errors print clap's message and return 2.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::GenerateShells { config, count, out } => cmd_generate_shells(&load_config(&config)?, count, &out, stdout).map(|_| ()),
        Command::RenderDataset { config, out, threads } => {
            if let Some(n) = threads {
                if n == 0 {
                    return Err(CliError::Runtime("--threads must be >= 1".into()));
                }
                // Fails only if a pool already exists, which is harmless.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            cmd_render_dataset(&load_config(&config)?, &out, stdout, stderr).map(|_| ())
        }
        Command::Validate { config } => cmd_validate(&config, stdout),
        Command::Serve { config, port, host, out } => {
            let cfg = load_config(&config)?;
            let out = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
            cmd_serve(&cfg, &host, port, &out, stderr)
        }
    }
}

pub fn cmd_generate_shells(cfg: &RunConfig, count: usize, out: &Path, stdout: &mut dyn Write) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out).map_err(|e| runtime(&out.display().to_string())(&e))?;
    let mut written = Vec::with_capacity(count);
    for k in 0..count {
        let seed = cfg.shell_seed(k as u64);
        let mesh = generate_shell(&cfg.shells.spec(seed), cfg.shells.samples_per_layer)
            .map_err(|e| CliError::Config(ConfigError::Invalid {
                field: "shells".into(),
                message: e.to_string(),
            }))?;
        let report = validate_mesh(&mesh);
        let path = out.join(format!("shell_{k:04}.obj"));
        mesh.write_obj(&path).map_err(|e| runtime(&path.display().to_string())(&e))?;
        let _ = writeln!(
            stdout,
            "{} seed={seed} vertices={} triangles={} watertight={} volume={:.6e}",
            path.display(),
            report.vertex_count,
            report.triangle_count,
            report.watertight,
            mesh.signed_volume()
        );
        written.push(path);
    }
    Ok(written)
}

/// Exports every session of the config under `out`. Progress goes to
/// `stderr`, one manifest path per session to `stdout`.
pub fn cmd_render_dataset(
    cfg: &RunConfig,
    out: &Path,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Vec<SessionManifest>, CliError> {
    let traj = cfg.build_trajectory()?;
    let mut manifests = Vec::new();
    for (id, turbidity) in cfg.sessions() {
        let spec = cfg.session_spec(&traj, &id)?;
        let scene = cfg.build_scene_with_turbidity(turbidity).map_err(|e| runtime("building scene")(&e))?;
        let accel = build_accel(&scene).map_err(|e| runtime("building BVH")(&e))?;
        let _ = writeln!(stderr, "{id}: {} instances, {} triangles", scene.instances.len(), scene.triangle_count());
        let mut progress = |done: usize, total: usize| {
            let _ = write!(stderr, "\r{id}: frame {done}/{total}");
            if done == total {
                let _ = writeln!(stderr);
            }
        };
        let m = export_session_with_progress(&scene, &accel, &traj, &spec, out, &mut progress)
            .map_err(|e| runtime(&format!("session {id}"))(&e))?;
        let _ = writeln!(stdout, "{}", out.join(&id).join(MANIFEST_FILE).display());
        manifests.push(m);
    }
    Ok(manifests)
}

pub fn cmd_validate(path: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(path)?;
    let traj = cfg.build_trajectory()?;
    let sessions = cfg.sessions();
    let frames = cfg.session_spec(&traj, &sessions[0].0)?.frame_times.len();
    let _ = writeln!(
        stdout,
        "ok: seed {} | {} session(s) | {:.2} s trajectory | {frames} frames per session",
        cfg.seed,
        sessions.len(),
        traj.duration()
    );
    Ok(())
}

pub fn cmd_serve(cfg: &RunConfig, host: &str, port: u16, out: &Path, stderr: &mut dyn Write) -> Result<(), CliError> {
    let scene = Arc::new(cfg.build_scene().map_err(|e| runtime("building scene")(&e))?);
    let accel = Arc::new(build_accel(&scene).map_err(|e| runtime("building BVH")(&e))?);
    let server = TeleopServer::bind((host, port), cfg.clone(), scene, accel, out).map_err(|e| runtime(&format!("{host}:{port}"))(&e))?;
    let _ = writeln!(stderr, "listening on {}", server.local_addr());
    server.run().map_err(|e| runtime("teleop")(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("reefsim").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_lists_every_command() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, 0);
        for c in ["generate-shells", "render-dataset", "validate", "serve"] {
            assert!(out.contains(c), "{out}");
        }
    }

    #[test]
    fn usage_error_is_config_error() {
        assert_eq!(run_args(&["validate"]).0, EXIT_CONFIG);
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_CONFIG);
    }

    #[test]
    fn missing_config_file() {
        let (code, _, err) = run_args(&["validate", "--config", "/nonexistent/reef.json"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("/nonexistent/reef.json"), "{err}");
    }

    #[test]
    fn zero_threads_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"seed": 1}"#).unwrap();
        let (code, _, _) = run_args(&["render-dataset", "--config", cfg.to_str().unwrap(), "--out", "x", "--threads", "0"]);
        assert_eq!(code, EXIT_RUNTIME);
    }
}
