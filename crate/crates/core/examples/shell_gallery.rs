//! Generates a handful of oyster shells and writes them as OBJ and PLY.
//!
//! cargo run --example shell_gallery -- [out_dir] [count]

use std::path::PathBuf;

use reefsim::rng::derive_seed_indexed;
use reefsim::shellgen::{generate_shell, validate_mesh, OysterShellSpec, DEFAULT_SAMPLES_PER_LAYER};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("reefsim-shells"));
    let count: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(6);
    std::fs::create_dir_all(&out)?;

    for k in 0..count {
        let seed = derive_seed_indexed(42, "shell", k);
        // Vary the silhouette a little so the gallery is not six twins.
        let mut spec = OysterShellSpec::with_seed(seed);
        spec.base_length *= 0.8 + 0.1 * k as f64;
        spec.perturbation_amplitude *= 1.0 + 0.5 * (k % 3) as f64;

        let mesh = generate_shell(&spec, DEFAULT_SAMPLES_PER_LAYER)?;
        let r = validate_mesh(&mesh);
        let bb = r.bounding_box.expect("non-empty mesh").extent();
        println!(
            "shell {k}: {} tris, watertight {}, chi {}, volume {:.2} cm^3, extent {:.1} x {:.1} x {:.1} cm",
            r.triangle_count,
            r.watertight,
            r.euler_characteristic,
            r.signed_volume * 1e6,
            bb[0] * 100.0,
            bb[1] * 100.0,
            bb[2] * 100.0
        );
        mesh.write_obj(&out.join(format!("oyster_{k:02}.obj")))?;
        mesh.write_ply(&out.join(format!("oyster_{k:02}.ply")))?;
    }
    println!("wrote {count} shells to {}", out.display());
    Ok(())
}
