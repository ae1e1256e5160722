use super::{step_kinematics, ControlCommand, PoseSample, Trajectory, TrajectoryError};

/// Anything that can report ground-truth state and the command that drove
/// it over a closed time range.
pub trait MotionSource {
    fn t0(&self) -> f64;
    fn t1(&self) -> f64;
    fn pose_at(&self, t: f64) -> Result<PoseSample, TrajectoryError>;
    fn command_at(&self, t: f64) -> Result<ControlCommand, TrajectoryError>;

    fn duration(&self) -> f64 {
        self.t1() - self.t0()
    }
}

/// Rates a zero-roll pose implies, expressed as a command: pitch rate is the
/// body y rate, yaw rate is minus the world heading rate.
pub fn command_from_pose(p: &PoseSample) -> ControlCommand {
    let (_, pitch) = p.yaw_pitch();
    let w = p.angular_velocity;
    let heading_rate = w.z * pitch.cos() - w.x * pitch.sin();
    ControlCommand::new(w.y, -heading_rate, p.velocity.norm())
}

impl MotionSource for Trajectory {
    fn t0(&self) -> f64 {
        Trajectory::t0(self)
    }

    fn t1(&self) -> f64 {
        Trajectory::t1(self)
    }

    fn pose_at(&self, t: f64) -> Result<PoseSample, TrajectoryError> {
        self.sample_pose(t)
    }

    fn command_at(&self, t: f64) -> Result<ControlCommand, TrajectoryError> {
        Ok(command_from_pose(&self.sample_pose(t)?))
    }
}

/// States logged by an interactive session, each with the command that was
/// active from that state onwards. Between records the state is rebuilt by
/// stepping the kinematic model from the previous record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordedMotion {
    records: Vec<(PoseSample, ControlCommand)>,
    end: Option<f64>,
}

impl RecordedMotion {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; times must strictly increase.
    pub fn push(&mut self, pose: PoseSample, cmd: ControlCommand) -> Result<(), TrajectoryError> {
        if let Some((last, _)) = self.records.last() {
            if !(pose.t > last.t) {
                return Err(TrajectoryError::Path(format!("record at t={} does not follow t={}", pose.t, last.t)));
            }
        }
        self.records.push((pose, cmd));
        self.end = None;
        Ok(())
    }

    /// Extends the covered range past the last record, which keeps its
    /// command until `t`.
    pub fn set_end(&mut self, t: f64) -> Result<(), TrajectoryError> {
        match self.records.last() {
            Some((last, _)) if t >= last.t => {
                self.end = Some(t);
                Ok(())
            }
            _ => Err(TrajectoryError::Path(format!("end time {t} precedes the last record"))),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[(PoseSample, ControlCommand)] {
        &self.records
    }

    fn locate(&self, t: f64) -> Result<usize, TrajectoryError> {
        let (t0, t1) = (MotionSource::t0(self), MotionSource::t1(self));
        if self.records.is_empty() || !(t >= t0 && t <= t1) {
            return Err(TrajectoryError::Domain { t, t0, t1 });
        }
        Ok(self.records.partition_point(|(p, _)| p.t <= t) - 1)
    }
}

impl MotionSource for RecordedMotion {
    fn t0(&self) -> f64 {
        self.records.first().map_or(f64::NAN, |r| r.0.t)
    }

    fn t1(&self) -> f64 {
        self.end.unwrap_or_else(|| self.records.last().map_or(f64::NAN, |r| r.0.t))
    }

    fn pose_at(&self, t: f64) -> Result<PoseSample, TrajectoryError> {
        let (pose, cmd) = &self.records[self.locate(t)?];
        if t == pose.t {
            return Ok(*pose);
        }
        let mut p = step_kinematics(pose, cmd, t - pose.t)?;
        p.t = t;
        Ok(p)
    }

    fn command_at(&self, t: f64) -> Result<ControlCommand, TrajectoryError> {
        Ok(self.records[self.locate(t)?].1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::yaw_pitch;
    use nalgebra::{Point3, Vector3};

    #[test]
    fn command_round_trips_through_kinematics() {
        let mut p = PoseSample::at_rest(0.0, Point3::origin(), 0.4);
        p.orientation = yaw_pitch(0.4, 0.3);
        let cmd = ControlCommand::new(0.2, -0.35, 0.7);
        let next = step_kinematics(&p, &cmd, 0.01).unwrap();
        let back = command_from_pose(&next);
        assert!((back.pitch_rate - 0.2).abs() < 1e-9);
        assert!((back.yaw_rate + 0.35).abs() < 1e-9);
        assert!((back.forward_speed - 0.7).abs() < 1e-12);
    }

    #[test]
    fn recorded_replays_between_records() {
        let cmd = ControlCommand::new(0.0, 0.5, 1.0);
        let p0 = PoseSample::at_rest(2.0, Point3::origin(), 0.0);
        let p1 = step_kinematics(&p0, &cmd, 0.1).unwrap();
        let mut rec = RecordedMotion::new();
        rec.push(p0, cmd).unwrap();
        rec.push(p1, cmd).unwrap();
        assert!(rec.push(p0, cmd).is_err());
        assert_eq!(rec.pose_at(2.1).unwrap(), p1);
        let mid = rec.pose_at(2.05).unwrap();
        assert!((mid.position - Point3::new(0.05 * (-0.025f64).cos(), 0.05 * (-0.025f64).sin(), 0.0)).norm() < 1e-12);
        assert_eq!(rec.command_at(2.05).unwrap(), cmd);
        assert!(rec.pose_at(1.9).is_err());
        assert!(rec.pose_at(2.2).is_err());
        rec.set_end(2.2).unwrap();
        assert!((rec.pose_at(2.2).unwrap().t - 2.2).abs() < 1e-15);
        assert!(rec.set_end(2.0).is_err());
        assert!(RecordedMotion::new().pose_at(0.0).is_err());
    }

    #[test]
    fn path_commands_follow_curvature() {
        let traj = crate::trajectory::fit_path(
            &[Point3::origin(), Point3::new(5.0, 0.0, 0.0), Point3::new(5.0, 5.0, 0.0)],
            1.0,
        )
        .unwrap();
        let mid = traj.t0() + 0.5 * traj.duration();
        let c = traj.command_at(mid).unwrap();
        // The path bends left, so the commanded yaw rate is negative.
        assert!(c.yaw_rate < -0.05);
        assert!(c.pitch_rate.abs() < 1e-6);
        assert!((traj.pose_at(mid).unwrap().velocity - Vector3::zeros()).norm() > 0.5);
    }
}
