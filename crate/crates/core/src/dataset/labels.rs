use std::io::Write;

use super::DatasetError;
use crate::trajectory::ControlLabel;

pub const LABELS_CSV_HEADER: &str = "frame_id,pitch_class,yaw_class";

pub fn write_control_labels<W: Write>(mut w: W, frames: &[(u64, ControlLabel)]) -> Result<(), DatasetError> {
    if let Some((id, _)) = frames.iter().find(|(_, l)| !l.is_valid()) {
        return Err(DatasetError::Export(format!("control class out of range at frame {id}")));
    }
    let io = |e| DatasetError::io("<labels>", e);
    writeln!(w, "{LABELS_CSV_HEADER}").map_err(io)?;
    for (id, l) in frames {
        writeln!(w, "{id},{},{}", l.pitch_class, l.yaw_class).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_validation() {
        let rows: Vec<(u64, ControlLabel)> = (0..5).map(|k| (k, ControlLabel::CENTER)).collect();
        let mut buf = Vec::new();
        write_control_labels(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "frame_id,pitch_class,yaw_class\n0,3,3\n1,3,3\n2,3,3\n3,3,3\n4,3,3\n");
        let bad = [(0, ControlLabel { pitch_class: 7, yaw_class: 0 })];
        assert!(write_control_labels(Vec::new(), &bad).is_err());
    }
}
