use serde::{Deserialize, Serialize};

use super::{rle_encode, DatasetError};
use crate::reef::ReefScene;
use crate::render::MISS_INSTANCE;

/// Per-instance detection record for one frame. `bbox` is
/// `[x, y, width, height]` in pixels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionAnnotation {
    pub frame_id: u64,
    pub instance_id: u32,
    pub class_id: u8,
    pub pixel_count: u64,
    pub bbox: [u32; 4],
    pub rle: Vec<u32>,
}

/// One annotation per instance id present in the mask, ascending by id.
/// Seabed (0) and misses are skipped.
pub fn annotate_frame(
    frame_id: u64,
    mask: &[u16],
    width: usize,
    height: usize,
    scene: &ReefScene,
) -> Result<Vec<DetectionAnnotation>, DatasetError> {
    if mask.len() != width * height {
        return Err(DatasetError::Annotation(format!(
            "mask has {} pixels, expected {width}×{height}",
            mask.len()
        )));
    }
    // (min_x, min_y, max_x, max_y, count) per id.
    let mut boxes: std::collections::BTreeMap<u16, (usize, usize, usize, usize, u64)> = Default::default();
    for (k, &id) in mask.iter().enumerate() {
        if id == 0 || id == MISS_INSTANCE {
            continue;
        }
        let (x, y) = (k % width, k / width);
        let e = boxes.entry(id).or_insert((x, y, x, y, 0));
        e.0 = e.0.min(x);
        e.1 = e.1.min(y);
        e.2 = e.2.max(x);
        e.3 = e.3.max(y);
        e.4 += 1;
    }
    boxes
        .into_iter()
        .map(|(id, (x0, y0, x1, y1, count))| {
            let inst = scene
                .instance(u32::from(id))
                .ok_or_else(|| DatasetError::Annotation(format!("instance {id} in mask is not in the scene")))?;
            let bits: Vec<bool> = mask.iter().map(|&m| m == id).collect();
            Ok(DetectionAnnotation {
                frame_id,
                instance_id: u32::from(id),
                class_id: inst.class_id as u8,
                pixel_count: count,
                bbox: [x0 as u32, y0 as u32, (x1 - x0 + 1) as u32, (y1 - y0 + 1) as u32],
                rle: rle_encode(&bits),
            })
        })
        .collect()
}
