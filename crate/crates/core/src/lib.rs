//! Headless underwater reef simulator.
//!
//! Builds procedural oyster reefs, renders RGB, depth and instance masks
//! through a turbid water medium, synthesizes IMU and sonar measurements
//! along a point-object ROV trajectory, and exports ground-truth sessions
//! for detection, V-SLAM evaluation and control-label learning.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`shellgen`]: B-spline cross-sections lofted into watertight shells
//! - [`reef`]: seabed heightfield, object placement, water medium, scenes
//! - [`render`]: BVH ray casting and the four ROV camera products
//! - [`trajectory`]: paths, kinematics and pitch/yaw control classes
//! - [`sensors`]: IMU error model and sonar ray casting
//! - [`dataset`]: session export (Netpbm images, CSV logs, TUM poses)
//! - [`config`] / [`cli`]: the run configuration and command entry points
//! - [`teleop`]: live piloting server that records control labels

pub mod cli;
pub mod config;
pub mod dataset;
pub mod netpbm;
pub mod reef;
pub mod render;
pub mod rng;
pub mod sensors;
pub mod shellgen;
pub mod teleop;
pub mod trajectory;
