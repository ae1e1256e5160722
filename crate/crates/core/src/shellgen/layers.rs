use nalgebra::{Point2, Vector2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bspline::{clamped_uniform_knots, BSplineCurve};
use super::ShellError;
use crate::rng::{seeded_rng, standard_normal};

/// Data points per half-contour fed to the interpolating spline.
const HALF_CONTOUR_POINTS: usize = 10;
const CONTOUR_DEGREE: usize = 3;
/// Jitter is additionally capped at this fraction of the layer's smaller
/// semi-axis so thin layers keep a simple contour.
const JITTER_AXIS_FRACTION: f64 = 0.1;
/// Dense samples per half-curve used for arc-length reparameterization.
const ARC_TABLE_SAMPLES: usize = 256;

/// One horizontal slice of a shell: two curves joined at both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerProfile {
    pub left_curve: BSplineCurve,
    pub right_curve: BSplineCurve,
    pub height_z: f64,
    pub closed: bool,
}

impl LayerProfile {
    /// Joins two curves into a layer. Both must start at the same point and
    /// end at the same point; the left curve runs counter-clockwise seen
    /// from +z, the right curve runs the mirrored way.
    pub fn new(
        left_curve: BSplineCurve,
        right_curve: BSplineCurve,
        height_z: f64,
    ) -> Result<Self, ShellError> {
        if left_curve.start() != right_curve.start() || left_curve.end() != right_curve.end() {
            return Err(ShellError::OpenLayer);
        }
        if !height_z.is_finite() {
            return Err(ShellError::InvalidSpec("layer height must be finite".into()));
        }
        Ok(Self {
            left_curve,
            right_curve,
            height_z,
            closed: true,
        })
    }

    /// Ellipse with semi-axes `a` (x) and `b` (y) centred at `center`.
    pub fn ellipse(center: Point2<f64>, a: f64, b: f64, height_z: f64) -> Result<Self, ShellError> {
        let (left, right) = half_ellipses(center, a, b);
        Self::new(
            BSplineCurve::interpolate(&left, CONTOUR_DEGREE)?,
            BSplineCurve::interpolate(&right, CONTOUR_DEGREE)?,
            height_z,
        )
    }

    /// A layer collapsed to one point (shell apex).
    pub fn point(p: Point2<f64>, height_z: f64) -> Self {
        let c = BSplineCurve::clamped_uniform(vec![p; CONTOUR_DEGREE + 1], CONTOUR_DEGREE)
            .expect("constant curve is valid");
        Self {
            left_curve: c.clone(),
            right_curve: c,
            height_z,
            closed: true,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        let p0 = self.left_curve.start();
        self.left_curve
            .control_points()
            .iter()
            .chain(self.right_curve.control_points())
            .all(|p| (p - p0).norm() <= 1e-12)
    }

    /// Closed contour of `samples` points, counter-clockwise seen from +z,
    /// starting at the shared start point. Both halves are sampled uniformly
    /// in arc length, so sample `i` lands at the same relative position on
    /// every layer.
    pub fn contour(&self, samples: usize) -> Vec<Point2<f64>> {
        let n_left = samples.div_ceil(2);
        let n_right = samples / 2;
        let left = ArcTable::new(&self.left_curve);
        let right = ArcTable::new(&self.right_curve);
        let mut out = Vec::with_capacity(samples);
        for i in 0..n_left {
            let u = left.param_at(i as f64 / n_left as f64);
            out.push(self.left_curve.eval(u).expect("u in domain"));
        }
        for i in 0..n_right {
            let u = right.param_at(1.0 - i as f64 / n_right as f64);
            out.push(self.right_curve.eval(u).expect("u in domain"));
        }
        out
    }
}

fn half_ellipses(center: Point2<f64>, a: f64, b: f64) -> (Vec<Point2<f64>>, Vec<Point2<f64>>) {
    // Sample angles follow the Greville abscissae of the interpolating
    // spline so curve parameter and polar angle stay proportional.
    let m = HALF_CONTOUR_POINTS;
    let p = CONTOUR_DEGREE;
    let knots = clamped_uniform_knots(m, p);
    let mut left = Vec::with_capacity(m);
    let mut right = Vec::with_capacity(m);
    for i in 0..m {
        let g = knots[i + 1..=i + p].iter().sum::<f64>() / p as f64;
        let th = std::f64::consts::PI * g;
        let (s, c) = match i {
            0 => (0.0, 1.0),
            _ if i == m - 1 => (0.0, -1.0),
            _ => th.sin_cos(),
        };
        left.push(Point2::new(center.x + a * c, center.y + b * s));
        right.push(Point2::new(center.x + a * c, center.y - b * s));
    }
    (left, right)
}

/// Cumulative chord length of a densely sampled curve, inverted by linear
/// interpolation.
struct ArcTable {
    params: Vec<f64>,
    lengths: Vec<f64>,
}

impl ArcTable {
    fn new(curve: &BSplineCurve) -> Self {
        let n = ARC_TABLE_SAMPLES;
        let params: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let pts: Vec<Point2<f64>> = params
            .iter()
            .map(|&u| curve.eval(u).expect("u in domain"))
            .collect();
        let mut lengths = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        lengths.push(0.0);
        for w in pts.windows(2) {
            acc += (w[1] - w[0]).norm();
            lengths.push(acc);
        }
        Self { params, lengths }
    }

    /// Parameter at arc-length fraction `f` in [0, 1].
    fn param_at(&self, f: f64) -> f64 {
        let total = *self.lengths.last().unwrap();
        if total <= 0.0 || f <= 0.0 {
            return if f >= 1.0 { 1.0 } else { f.clamp(0.0, 1.0) };
        }
        if f >= 1.0 {
            return 1.0;
        }
        let target = f * total;
        let j = self.lengths.partition_point(|&l| l <= target).clamp(1, self.lengths.len() - 1);
        let (l0, l1) = (self.lengths[j - 1], self.lengths[j]);
        let w = if l1 > l0 { (target - l0) / (l1 - l0) } else { 0.0 };
        (self.params[j - 1] + w * (self.params[j] - self.params[j - 1])).clamp(0.0, 1.0)
    }
}

/// Parametric description of one oyster shell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OysterShellSpec {
    pub n_layers: usize,
    pub base_length: f64,
    pub base_width: f64,
    pub total_height: f64,
    /// Per-layer scale factors in (0, 1]; one per layer.
    pub taper_profile: Vec<f64>,
    pub perturbation_amplitude: f64,
    pub seed: u64,
}

/// Bump profile, thin at the base and widest at 40% of the height.
pub fn default_taper(n_layers: usize) -> Vec<f64> {
    let gamma = 0.5f64.ln() / 0.4f64.ln();
    (0..n_layers)
        .map(|k| {
            let s = if n_layers > 1 { k as f64 / (n_layers - 1) as f64 } else { 0.0 };
            (std::f64::consts::PI * s.powf(gamma)).sin().clamp(0.05, 1.0)
        })
        .collect()
}

impl OysterShellSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ShellError> {
        let bad = |m: &str| Err(ShellError::InvalidSpec(m.to_string()));
        if self.n_layers < 2 {
            return bad("n_layers must be at least 2");
        }
        for (name, v) in [
            ("base_length", self.base_length),
            ("base_width", self.base_width),
            ("total_height", self.total_height),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ShellError::InvalidSpec(format!("{name} must be > 0")));
            }
        }
        if !(self.perturbation_amplitude.is_finite() && self.perturbation_amplitude >= 0.0) {
            return bad("perturbation_amplitude must be >= 0");
        }
        if self.taper_profile.len() != self.n_layers {
            return Err(ShellError::InvalidSpec(format!(
                "taper_profile has {} entries, expected n_layers = {}",
                self.taper_profile.len(),
                self.n_layers
            )));
        }
        if self.taper_profile.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return bad("taper factors must lie in (0, 1]");
        }
        Ok(())
    }

    /// Uniformly scales every length (not the seed or taper).
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            base_length: self.base_length * k,
            base_width: self.base_width * k,
            total_height: self.total_height * k,
            perturbation_amplitude: self.perturbation_amplitude * k,
            ..self.clone()
        }
    }
}

impl Default for OysterShellSpec {
    fn default() -> Self {
        Self {
            n_layers: 16,
            base_length: 0.08,
            base_width: 0.055,
            total_height: 0.025,
            taper_profile: default_taper(16),
            perturbation_amplitude: 0.002,
            seed: 0,
        }
    }
}

/// Draws a jitter vector: per-axis Gaussian with σ = cap/2, then limited to
/// norm `cap`, so any convex combination of jittered points moves by at
/// most `cap`.
fn jitter<R: Rng>(rng: &mut R, cap: f64) -> Vector2<f64> {
    let v = Vector2::new(standard_normal(rng), standard_normal(rng)) * (0.5 * cap);
    let n = v.norm();
    if n > cap {
        v * (cap / n)
    } else {
        v
    }
}

/// Builds the stacked cross-sections of a shell. With three or more layers
/// the bottom and top layers are collapsed to points so extrusion closes the
/// shell at two apexes.
pub fn generate_layers(spec: &OysterShellSpec) -> Result<Vec<LayerProfile>, ShellError> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let n = spec.n_layers;
    let mut layers = Vec::with_capacity(n);
    for k in 0..n {
        let s = k as f64 / (n - 1) as f64;
        let z = if k == n - 1 { spec.total_height } else { spec.total_height * s };
        let taper = spec.taper_profile[k];
        let a = 0.5 * spec.base_length * taper;
        let b = 0.5 * spec.base_width * taper;
        let cap = spec.perturbation_amplitude.min(JITTER_AXIS_FRACTION * a.min(b));

        // Draw the same number of variates for every layer so the stream
        // layout does not depend on which layers are degenerate.
        let start_jitter = jitter(&mut rng, cap);
        let end_jitter = jitter(&mut rng, cap);
        let interior: Vec<Vector2<f64>> = (0..2 * (HALF_CONTOUR_POINTS - 2))
            .map(|_| jitter(&mut rng, cap))
            .collect();

        if n >= 3 && (k == 0 || k == n - 1) {
            layers.push(LayerProfile::point(Point2::origin(), z));
            continue;
        }

        let base = LayerProfile::ellipse(Point2::origin(), a, b, z)?;
        let last = HALF_CONTOUR_POINTS - 1;
        let perturb = |curve: &BSplineCurve, offset: usize| {
            curve.map_control_points(|i, p| {
                let d = if i == 0 {
                    start_jitter
                } else if i == last {
                    end_jitter
                } else {
                    interior[offset + i - 1]
                };
                p + d
            })
        };
        let left = perturb(&base.left_curve, 0);
        let right = perturb(&base.right_curve, HALF_CONTOUR_POINTS - 2);
        layers.push(LayerProfile::new(left, right, z)?);
    }
    Ok(layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, pert: f64, seed: u64) -> OysterShellSpec {
        OysterShellSpec {
            n_layers: n,
            taper_profile: default_taper(n),
            perturbation_amplitude: pert,
            seed,
            ..OysterShellSpec::default()
        }
    }

    #[test]
    fn two_layer_base_case_is_elliptical() {
        let s = OysterShellSpec {
            n_layers: 2,
            taper_profile: vec![1.0, 0.5],
            perturbation_amplitude: 0.0,
            ..OysterShellSpec::default()
        };
        let layers = generate_layers(&s).unwrap();
        assert_eq!(layers.len(), 2);
        assert_eq!(layers[0].height_z, 0.0);
        assert_eq!(layers[1].height_z, s.total_height);
        for (layer, taper) in layers.iter().zip([1.0, 0.5]) {
            let a = 0.5 * s.base_length * taper;
            let b = 0.5 * s.base_width * taper;
            for p in layer.contour(64) {
                let r = (p.x / a).powi(2) + (p.y / b).powi(2);
                assert!((r - 1.0).abs() < 1e-3, "off ellipse: {r}");
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let s = spec(16, 0.003, 99);
        assert_eq!(generate_layers(&s).unwrap(), generate_layers(&s).unwrap());
        let other = spec(16, 0.003, 100);
        assert_ne!(generate_layers(&s).unwrap(), generate_layers(&other).unwrap());
    }

    #[test]
    fn heights_increase_and_ends_collapse() {
        let layers = generate_layers(&spec(16, 0.002, 5)).unwrap();
        assert!(layers.windows(2).all(|w| w[0].height_z < w[1].height_z));
        assert!(layers[0].is_degenerate());
        assert!(layers[15].is_degenerate());
        assert!(layers[1..15].iter().all(|l| !l.is_degenerate()));
    }

    #[test]
    fn perturbation_is_bounded_pointwise() {
        let mut noisy = spec(16, 0.005, 17);
        noisy.base_width = 0.05;
        let clean = OysterShellSpec {
            perturbation_amplitude: 0.0,
            ..noisy.clone()
        };
        let a = generate_layers(&noisy).unwrap();
        let b = generate_layers(&clean).unwrap();
        for (la, lb) in a.iter().zip(&b) {
            for curve in [
                (&la.left_curve, &lb.left_curve),
                (&la.right_curve, &lb.right_curve),
            ] {
                for i in 0..=200 {
                    let u = i as f64 / 200.0;
                    let d = (curve.0.eval(u).unwrap() - curve.1.eval(u).unwrap()).norm();
                    assert!(d <= 0.005 + 1e-12, "displacement {d}");
                }
            }
        }
    }

    #[test]
    fn shared_endpoints_survive_jitter() {
        for layer in generate_layers(&spec(12, 0.004, 3)).unwrap() {
            assert_eq!(layer.left_curve.start(), layer.right_curve.start());
            assert_eq!(layer.left_curve.end(), layer.right_curve.end());
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = OysterShellSpec::default();
        s.n_layers = 1;
        s.taper_profile = vec![1.0];
        assert!(generate_layers(&s).is_err());
        let mut s = OysterShellSpec::default();
        s.taper_profile[3] = 1.5;
        assert!(generate_layers(&s).is_err());
        let mut s = OysterShellSpec::default();
        s.base_width = 0.0;
        assert!(generate_layers(&s).is_err());
        let mut s = OysterShellSpec::default();
        s.taper_profile.pop();
        assert!(generate_layers(&s).is_err());
    }

    #[test]
    fn open_layers_are_rejected() {
        let l = LayerProfile::ellipse(Point2::origin(), 1.0, 1.0, 0.0).unwrap();
        let moved = l.right_curve.map_control_points(|_, p| p + Vector2::new(0.1, 0.0));
        assert!(matches!(
            LayerProfile::new(l.left_curve.clone(), moved, 0.0),
            Err(ShellError::OpenLayer)
        ));
    }

    #[test]
    fn default_taper_peaks_near_forty_percent() {
        let t = default_taper(101);
        let (imax, _) = t
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        assert!((38..=42).contains(&imax), "peak at {imax}");
        assert!(t.iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn contour_is_counter_clockwise_and_arc_uniform() {
        let l = LayerProfile::ellipse(Point2::origin(), 2.0, 1.0, 0.0).unwrap();
        let c = l.contour(64);
        let area: f64 = (0..c.len())
            .map(|i| {
                let (p, q) = (c[i], c[(i + 1) % c.len()]);
                p.x * q.y - q.x * p.y
            })
            .sum::<f64>()
            * 0.5;
        assert!(area > 0.0);
        let steps: Vec<f64> = (0..c.len()).map(|i| (c[(i + 1) % c.len()] - c[i]).norm()).collect();
        let mean = steps.iter().sum::<f64>() / steps.len() as f64;
        assert!(steps.iter().all(|s| (s / mean - 1.0).abs() < 0.05));
    }
}
