use serde::{Deserialize, Serialize};

use super::ReefError;

/// Per-channel attenuation (1/m) at turbidity 1. Red is absorbed fastest,
/// which tints distant objects toward the green/blue veiling colour.
pub const BASE_BETA_RGB: [f64; 3] = [0.45, 0.15, 0.10];

/// Green reef water.
pub const DEFAULT_WATER_COLOR: [f64; 3] = [0.08, 0.38, 0.28];

/// Homogeneous water volume seen by the cameras.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaterMedium {
    pub beta_rgb: [f64; 3],
    pub background_rgb: [f64; 3],
    pub illumination: f64,
}

impl WaterMedium {
    pub fn clear() -> Self {
        Self {
            beta_rgb: [0.0; 3],
            background_rgb: DEFAULT_WATER_COLOR,
            illumination: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ReefError> {
        if self.beta_rgb.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(ReefError::InvalidParameter("beta_rgb components must be >= 0".into()));
        }
        if self.background_rgb.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(ReefError::InvalidParameter("background_rgb must lie in [0, 1]".into()));
        }
        if !(self.illumination.is_finite() && self.illumination > 0.0) {
            return Err(ReefError::InvalidParameter("illumination must be > 0".into()));
        }
        Ok(())
    }

    pub fn with_illumination(mut self, illumination: f64) -> Self {
        self.illumination = illumination;
        self
    }
}

/// Water medium for a particle density (`turbidity`, dimensionless, 0 =
/// clear) and veiling colour. Attenuation scales linearly with turbidity.
pub fn turbidity_to_medium(turbidity: f64, color_scheme: [f64; 3]) -> Result<WaterMedium, ReefError> {
    if !(turbidity.is_finite() && turbidity >= 0.0) {
        return Err(ReefError::InvalidParameter("turbidity must be >= 0".into()));
    }
    let medium = WaterMedium {
        beta_rgb: BASE_BETA_RGB.map(|b| turbidity * b),
        background_rgb: color_scheme,
        illumination: 1.0,
    };
    medium.validate()?;
    Ok(medium)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn clear_water_has_no_attenuation() {
        let m = turbidity_to_medium(0.0, DEFAULT_WATER_COLOR).unwrap();
        assert_eq!(m.beta_rgb, [0.0; 3]);
        assert_eq!(m.background_rgb, DEFAULT_WATER_COLOR);
    }

    #[test]
    fn doubling_turbidity_doubles_beta() {
        let one = turbidity_to_medium(1.0, DEFAULT_WATER_COLOR).unwrap();
        let two = turbidity_to_medium(2.0, DEFAULT_WATER_COLOR).unwrap();
        for c in 0..3 {
            assert_eq!(two.beta_rgb[c], 2.0 * one.beta_rgb[c]);
        }
    }

    #[test]
    fn red_attenuates_fastest() {
        let m = turbidity_to_medium(1.0, DEFAULT_WATER_COLOR).unwrap();
        assert!(m.beta_rgb[0] > m.beta_rgb[1] && m.beta_rgb[1] > m.beta_rgb[2]);
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(turbidity_to_medium(-0.1, DEFAULT_WATER_COLOR).is_err());
        assert!(turbidity_to_medium(1.0, [1.2, 0.0, 0.0]).is_err());
        assert!(turbidity_to_medium(f64::NAN, DEFAULT_WATER_COLOR).is_err());
    }

    proptest! {
        #[test]
        fn beta_is_monotone_in_turbidity(a in 0.0f64..50.0, b in 0.0f64..50.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let ml = turbidity_to_medium(lo, DEFAULT_WATER_COLOR).unwrap();
            let mh = turbidity_to_medium(hi, DEFAULT_WATER_COLOR).unwrap();
            for c in 0..3 {
                prop_assert!(mh.beta_rgb[c] >= ml.beta_rgb[c]);
            }
        }
    }
}
