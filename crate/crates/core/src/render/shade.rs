use nalgebra::Vector3;

use crate::reef::{ClassId, WaterMedium};

/// Direct-lit surface radiance before the water acts on it.
pub fn surface_radiance(
    normal: &Vector3<f64>,
    sun_direction: &Vector3<f64>,
    ambient: f64,
    illumination: f64,
    albedo: [f64; 3],
) -> [f64; 3] {
    let lambert = normal.dot(&(-sun_direction)).max(0.0);
    let light = ambient + illumination * lambert;
    albedo.map(|a| (a * light).clamp(0.0, 1.0))
}

/// Beer–Lambert attenuation of `surface` over `distance` meters, blended with
/// the veiling colour. With zero attenuation the surface value comes back
/// unchanged.
pub fn apply_medium(surface: [f64; 3], distance: f64, medium: &WaterMedium) -> [f64; 3] {
    let mut out = [0.0; 3];
    for c in 0..3 {
        let tr = (-medium.beta_rgb[c] * distance).exp();
        out[c] = (surface[c] * tr + medium.background_rgb[c] * (1.0 - tr)).clamp(0.0, 1.0);
    }
    out
}

pub fn shade_underwater(
    distance: f64,
    normal: &Vector3<f64>,
    medium: &WaterMedium,
    sun_direction: &Vector3<f64>,
    ambient: f64,
    albedo: [f64; 3],
) -> [f64; 3] {
    let j = surface_radiance(normal, sun_direction, ambient, medium.illumination, albedo);
    apply_medium(j, distance, medium)
}

fn hash01(a: u64, b: u64) -> f64 {
    let h = crate::rng::splitmix64(a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ crate::rng::splitmix64(b));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Procedural texture per class, looked up by surface uv.
pub fn albedo(class_id: u8, instance_id: u32, uv: [f64; 2]) -> [f64; 3] {
    let [u, v] = uv;
    match ClassId::from_u8(class_id) {
        Some(ClassId::Seabed) => {
            // Sand with coarse blotches.
            let cu = (u * 96.0).floor() as i64 as u64;
            let cv = (v * 96.0).floor() as i64 as u64;
            let g = 0.82 + 0.18 * hash01(cu, cv);
            [0.56 * g, 0.50 * g, 0.37 * g]
        }
        Some(ClassId::Oyster) => {
            // Gray-beige with growth bands stacked up the shell.
            let tint = 0.9 + 0.1 * hash01(u64::from(instance_id), 1);
            let band = 0.85 + 0.15 * (std::f64::consts::TAU * 9.0 * v).sin();
            let streak = 0.93 + 0.07 * (std::f64::consts::TAU * 24.0 * u).sin();
            let g = tint * band * streak;
            [0.64 * g, 0.60 * g, 0.52 * g]
        }
        Some(ClassId::Rock) => {
            let g = 0.85 + 0.15 * hash01((u * 40.0) as u64, (v * 40.0) as u64);
            [0.40 * g, 0.40 * g, 0.38 * g]
        }
        Some(ClassId::Stone) => {
            let g = 0.9 + 0.1 * (std::f64::consts::TAU * 5.0 * (u + v)).sin();
            [0.55 * g, 0.50 * g, 0.44 * g]
        }
        None => [0.5, 0.5, 0.5],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn medium(beta: [f64; 3], bg: [f64; 3]) -> WaterMedium {
        WaterMedium {
            beta_rgb: beta,
            background_rgb: bg,
            illumination: 1.0,
        }
    }

    #[test]
    fn clear_water_returns_surface_exactly() {
        let n = Vector3::new(0.2, 0.1, 1.0).normalize();
        let sun = Vector3::new(0.1, 0.0, -1.0).normalize();
        let m = medium([0.0; 3], [0.1, 0.4, 0.3]);
        let j = surface_radiance(&n, &sun, 0.3, 1.0, [0.6, 0.5, 0.4]);
        assert_eq!(shade_underwater(17.0, &n, &m, &sun, 0.3, [0.6, 0.5, 0.4]), j);
    }

    #[test]
    fn far_field_is_background() {
        let m = medium([0.5, 0.2, 0.1], [0.0, 0.4, 0.1]);
        let l = apply_medium([0.9, 0.1, 0.7], 1e6, &m);
        for c in 0..3 {
            assert!((l[c] - m.background_rgb[c]).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_form_example() {
        let m = medium([0.5, 0.2, 0.1], [0.0, 0.4, 0.1]);
        let l = apply_medium([1.0, 1.0, 1.0], 2.0, &m);
        let expect = [(-1.0f64).exp(), 0.4 + 0.6 * (-0.4f64).exp(), 0.1 + 0.9 * (-0.2f64).exp()];
        for c in 0..3 {
            assert!((l[c] - expect[c]).abs() < 1e-12);
        }
        assert!((l[0] - 0.3679).abs() < 5e-5 && (l[1] - 0.8022).abs() < 5e-5 && (l[2] - 0.8369).abs() < 5e-5);
    }

    #[test]
    fn back_lit_surface_gets_only_ambient() {
        let j = surface_radiance(&Vector3::z(), &Vector3::z(), 0.25, 1.0, [1.0, 0.5, 0.0]);
        assert_eq!(j, [0.25, 0.125, 0.0]);
    }

    #[test]
    fn albedo_stays_in_unit_range() {
        for class in 0..5u8 {
            for k in 0..50 {
                let a = albedo(class, k, [k as f64 / 50.0, 1.0 - k as f64 / 50.0]);
                assert!(a.iter().all(|c| (0.0..=1.0).contains(c)));
            }
        }
    }

    proptest! {
        #[test]
        fn veiling_is_monotone_in_distance(
            s in prop::array::uniform3(0.0f64..1.0),
            bg in prop::array::uniform3(0.0f64..1.0),
            beta in prop::array::uniform3(0.0f64..2.0),
            d1 in 0.0f64..20.0,
            dd in 0.0f64..20.0,
        ) {
            let m = medium(beta, bg);
            let near = apply_medium(s, d1, &m);
            let far = apply_medium(s, d1 + dd, &m);
            for c in 0..3 {
                prop_assert!((far[c] - bg[c]).abs() <= (near[c] - bg[c]).abs() + 1e-15);
                prop_assert!((0.0..=1.0).contains(&far[c]));
            }
        }
    }
}
