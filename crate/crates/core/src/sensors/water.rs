use serde::{Deserialize, Serialize};

/// Temperature °C, salinity in parts per thousand, depth m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaterProperties {
    pub temperature_c: f64,
    pub salinity_ppt: f64,
    pub depth_m: f64,
}

impl Default for WaterProperties {
    fn default() -> Self {
        Self {
            temperature_c: 20.0,
            salinity_ppt: 35.0,
            depth_m: 5.0,
        }
    }
}

impl WaterProperties {
    pub fn new(temperature_c: f64, salinity_ppt: f64, depth_m: f64) -> Self {
        Self {
            temperature_c,
            salinity_ppt,
            depth_m,
        }
    }

    /// Inside the range the sound-speed polynomial was fitted for.
    pub fn in_envelope(&self) -> bool {
        (-2.0..=40.0).contains(&self.temperature_c) && (0.0..=45.0).contains(&self.salinity_ppt) && self.depth_m >= 0.0
    }
}

/// Sound speed in m/s:
/// `1449.2 + 4.6T − 0.055T² + 0.00029T³ + (1.34 − 0.010T)(S − 35) + 0.016D`.
pub fn sound_speed(w: &WaterProperties) -> f64 {
    let t = w.temperature_c;
    1449.2 + 4.6 * t - 0.055 * t * t + 0.00029 * t * t * t + (1.34 - 0.010 * t) * (w.salinity_ppt - 35.0) + 0.016 * w.depth_m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoundSpeed {
    pub value: f64,
    /// False when the inputs fall outside the fitted envelope; the value is
    /// still computed.
    pub in_envelope: bool,
}

pub fn sound_speed_checked(w: &WaterProperties) -> SoundSpeed {
    SoundSpeed {
        value: sound_speed(w),
        in_envelope: w.in_envelope(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn horner(t: f64, s: f64, d: f64) -> f64 {
        // Same polynomial, regrouped in Horner form.
        let poly_t = 1449.2 + t * (4.6 + t * (-0.055 + t * 0.00029));
        poly_t + 1.34 * (s - 35.0) - 0.010 * t * (s - 35.0) + 0.016 * d
    }

    #[test]
    fn reference_values() {
        assert_eq!(sound_speed(&WaterProperties::new(0.0, 35.0, 0.0)), 1449.2);
        let c = sound_speed(&WaterProperties::new(10.0, 35.0, 0.0));
        assert!((c - 1489.99).abs() / 1489.99 < 1e-9, "{c}");
        let c = sound_speed(&WaterProperties::new(10.0, 30.0, 100.0));
        assert!((c - 1485.39).abs() / 1485.39 < 1e-9, "{c}");
    }

    #[test]
    fn envelope_flag() {
        assert!(sound_speed_checked(&WaterProperties::default()).in_envelope);
        let out = sound_speed_checked(&WaterProperties::new(45.0, 35.0, 0.0));
        assert!(!out.in_envelope && out.value.is_finite());
        assert!(!WaterProperties::new(10.0, 35.0, -1.0).in_envelope());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn matches_horner_form(t in -2.0f64..=40.0, s in 0.0f64..=45.0, d in 0.0f64..=11000.0) {
            let a = sound_speed(&WaterProperties::new(t, s, d));
            let b = horner(t, s, d);
            prop_assert!((a - b).abs() / b < 1e-9);
        }
    }
}
