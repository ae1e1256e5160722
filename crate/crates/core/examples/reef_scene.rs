//! Composes a reef from the default run config and saves it to disk.
//!
//! cargo run --example reef_scene -- [out_dir] [seed]

use std::path::PathBuf;

use reefsim::config::RunConfig;
use reefsim::reef::{ClassId, ReefScene};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("reefsim-scene"));
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    let cfg = RunConfig::with_seed(seed);
    let scene = cfg.build_scene()?;
    for class in ClassId::ALL {
        println!("{:>7}: {}", class.name(), scene.count_class(class));
    }
    let (lo, hi) = scene.heightfield.extent();
    println!("seabed {:.1} x {:.1} m, {} triangles total", hi[0] - lo[0], hi[1] - lo[1], scene.triangle_count());

    scene.save(&out)?;
    let back = ReefScene::load(&out)?;
    assert_eq!(back.instances.len(), scene.instances.len());
    println!("saved to {} (scene.json + meshes/)", out.display());
    Ok(())
}
