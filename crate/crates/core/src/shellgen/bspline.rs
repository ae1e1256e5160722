use nalgebra::{DMatrix, Point2};
use serde::{Deserialize, Serialize};

use super::ShellError;

/// Planar B-spline with a clamped knot vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BSplineCurve {
    control_points: Vec<Point2<f64>>,
    degree: usize,
    knots: Vec<f64>,
}

/// Clamped uniform knot vector for `n` control points of the given degree.
pub fn clamped_uniform_knots(n: usize, degree: usize) -> Vec<f64> {
    let interior = n - degree - 1;
    let mut knots = Vec::with_capacity(n + degree + 1);
    knots.extend(std::iter::repeat_n(0.0, degree + 1));
    for i in 1..=interior {
        knots.push(i as f64 / (interior + 1) as f64);
    }
    knots.extend(std::iter::repeat_n(1.0, degree + 1));
    knots
}

impl BSplineCurve {
    pub fn new(
        control_points: Vec<Point2<f64>>,
        degree: usize,
        knots: Vec<f64>,
    ) -> Result<Self, ShellError> {
        if degree < 1 {
            return Err(ShellError::InvalidCurve("degree must be at least 1".into()));
        }
        if control_points.len() < degree + 1 {
            return Err(ShellError::InvalidCurve(format!(
                "degree {degree} needs at least {} control points, got {}",
                degree + 1,
                control_points.len()
            )));
        }
        if knots.len() != control_points.len() + degree + 1 {
            return Err(ShellError::InvalidCurve(format!(
                "expected {} knots, got {}",
                control_points.len() + degree + 1,
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(ShellError::InvalidCurve("knots must be non-decreasing".into()));
        }
        let first = knots[0];
        let last = knots[knots.len() - 1];
        let clamped = knots[..=degree].iter().all(|&k| k == first)
            && knots[knots.len() - degree - 1..].iter().all(|&k| k == last);
        if !clamped || !(first < last) {
            return Err(ShellError::InvalidCurve(
                "knot vector must be clamped with multiplicity degree+1 at both ends".into(),
            ));
        }
        if control_points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(ShellError::InvalidCurve("control points must be finite".into()));
        }
        Ok(Self {
            control_points,
            degree,
            knots,
        })
    }

    pub fn clamped_uniform(
        control_points: Vec<Point2<f64>>,
        degree: usize,
    ) -> Result<Self, ShellError> {
        if degree < 1 || control_points.len() < degree + 1 {
            return Self::new(control_points, degree, Vec::new());
        }
        let knots = clamped_uniform_knots(control_points.len(), degree);
        Self::new(control_points, degree, knots)
    }

    /// Clamped uniform curve passing through `points`, collocated at the
    /// Greville abscissae. The first and last points are reproduced exactly.
    pub fn interpolate(points: &[Point2<f64>], degree: usize) -> Result<Self, ShellError> {
        let n = points.len();
        if degree < 1 || n < degree + 1 {
            return Err(ShellError::InvalidCurve(format!(
                "cannot interpolate {n} points with degree {degree}"
            )));
        }
        let knots = clamped_uniform_knots(n, degree);
        let params = greville(&knots, degree, n);
        let mut a = DMatrix::<f64>::zeros(n, n);
        for (row, &u) in params.iter().enumerate() {
            let span = find_span(&knots, degree, n, u);
            let basis = basis_functions(&knots, degree, span, u);
            for (j, b) in basis.iter().enumerate() {
                a[(row, span - degree + j)] = *b;
            }
        }
        let mut rhs = DMatrix::<f64>::zeros(n, 2);
        for (i, p) in points.iter().enumerate() {
            rhs[(i, 0)] = p.x;
            rhs[(i, 1)] = p.y;
        }
        let sol = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| ShellError::InvalidCurve("singular collocation system".into()))?;
        let mut control: Vec<Point2<f64>> =
            (0..n).map(|i| Point2::new(sol[(i, 0)], sol[(i, 1)])).collect();
        control[0] = points[0];
        control[n - 1] = points[n - 1];
        Self::new(control, degree, knots)
    }

    pub fn control_points(&self) -> &[Point2<f64>] {
        &self.control_points
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn start(&self) -> Point2<f64> {
        self.control_points[0]
    }

    pub fn end(&self) -> Point2<f64> {
        self.control_points[self.control_points.len() - 1]
    }

    /// Same knots and degree, control points replaced through `f(index, point)`.
    pub fn map_control_points(&self, mut f: impl FnMut(usize, Point2<f64>) -> Point2<f64>) -> Self {
        Self {
            control_points: self
                .control_points
                .iter()
                .enumerate()
                .map(|(i, p)| f(i, *p))
                .collect(),
            degree: self.degree,
            knots: self.knots.clone(),
        }
    }

    /// De Boor evaluation at normalized parameter `u` in [0, 1].
    pub fn eval(&self, u: f64) -> Result<Point2<f64>, ShellError> {
        if !(0.0..=1.0).contains(&u) {
            return Err(ShellError::Domain(u));
        }
        let p = self.degree;
        let n = self.control_points.len();
        let lo = self.knots[p];
        let hi = self.knots[n];
        let x = if u == 1.0 { hi } else { lo + u * (hi - lo) };
        let k = find_span(&self.knots, p, n, x);
        let t = &self.knots;
        let mut d: Vec<Point2<f64>> = (0..=p).map(|j| self.control_points[j + k - p]).collect();
        for r in 1..=p {
            for j in (r..=p).rev() {
                let left = t[j + k - p];
                let denom = t[j + 1 + k - r] - left;
                let alpha = if denom == 0.0 { 0.0 } else { (x - left) / denom };
                d[j] = Point2::from(d[j - 1].coords * (1.0 - alpha) + d[j].coords * alpha);
            }
        }
        Ok(d[p])
    }
}

fn greville(knots: &[f64], degree: usize, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| knots[i + 1..=i + degree].iter().sum::<f64>() / degree as f64)
        .collect()
}

/// Index `k` with `knots[k] <= u < knots[k+1]`, pinned to the last
/// non-empty span at the right end of the domain.
fn find_span(knots: &[f64], degree: usize, n: usize, u: f64) -> usize {
    if u >= knots[n] {
        let mut k = n - 1;
        while k > degree && knots[k] == knots[k + 1] {
            k -= 1;
        }
        return k;
    }
    let mut lo = degree;
    let mut hi = n;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if u < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Non-zero basis functions N_{span-degree..=span, degree}(u).
fn basis_functions(knots: &[f64], degree: usize, span: usize, u: f64) -> Vec<f64> {
    let mut n = vec![0.0; degree + 1];
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    n[0] = 1.0;
    for j in 1..=degree {
        left[j] = u - knots[span + 1 - j];
        right[j] = knots[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            let tmp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        n[j] = saved;
    }
    n
}
