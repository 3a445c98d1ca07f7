//! Discrete closed curves on R/Z: sampling, derivatives, reparametrization,
//! mollification, and geometric diagnostics.
//!
//! A curve is a list of `n` points in R^3 sampled at the uniform parameters
//! `t_i = i/n`. Indexing is cyclic and the closing point is never stored twice.

use crate::error::{KnotError, Result};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

/// Minimum admissible sample count.
pub const MIN_SAMPLES: usize = 8;

/// Distance of two parameters on R/Z: `min(|x-y|, 1-|x-y|)`.
pub fn geodesic_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).abs() % 1.0;
    d.min(1.0 - d)
}

/// Signed representative of `y - x` in `[-1/2, 1/2)`.
pub fn wrapped_offset(x: f64, y: f64) -> f64 {
    let mut d = (y - x) % 1.0;
    if d < -0.5 {
        d += 1.0;
    } else if d >= 0.5 {
        d -= 1.0;
    }
    d
}

/// Geodesic ball `B(center, radius)` in R/Z; `radius < 1/2` keeps it geodesic.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Interval {
    center: f64,
    radius: f64,
}

impl Interval {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&center) || !center.is_finite() {
            return Err(KnotError::InvalidParams(format!(
                "interval center {center} must lie in [0,1)"
            )));
        }
        if !(radius > 0.0 && radius < 0.5) {
            return Err(KnotError::InvalidParams(format!(
                "interval radius {radius} must lie in (0, 1/2)"
            )));
        }
        Ok(Interval { center, radius })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    /// Half-open membership `[center-radius, center+radius)` so that intervals
    /// stepping by `2*radius` partition R/Z exactly.
    pub fn contains(&self, t: f64) -> bool {
        let s = wrapped_offset(self.center, t);
        (-self.radius..self.radius).contains(&s)
    }

    /// Indices of the grid samples `t_i = i/n` inside the interval.
    pub fn sample_indices(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|&i| self.contains(i as f64 / n as f64)).collect()
    }
}

/// Exponent pair `(p, q)` under the admissibility constraint
/// `q > 1` and `q + 2 <= p < 2q + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub p: f64,
    pub q: f64,
}

impl EnergyParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(q > 1.0) {
            return Err(KnotError::InvalidParams(format!("q = {q} must exceed 1")));
        }
        if !(q + 2.0 <= p && p < 2.0 * q + 1.0) {
            return Err(KnotError::InvalidParams(format!(
                "(p, q) = ({p}, {q}) violates q+2 <= p < 2q+1"
            )));
        }
        Ok(EnergyParams { p, q })
    }

    /// Scale-invariant pair `(q+2, q)`.
    pub fn scale_invariant(q: f64) -> Result<Self> {
        Self::new(q + 2.0, q)
    }

    pub fn is_scale_invariant(&self) -> bool {
        (self.p - self.q - 2.0).abs() < 1e-12
    }
}

/// Closed sampled curve on R/Z with points in R^3.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Curve {
    n: usize,
    points: Vec<Vec3>,
}

impl Curve {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        let n = points.len();
        if n < MIN_SAMPLES {
            return Err(KnotError::InvalidCurve(format!(
                "need at least {MIN_SAMPLES} samples, got {n}"
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(KnotError::InvalidCurve(format!("non-finite point at index {i}")));
            }
        }
        for i in 0..n {
            let j = (i + 1) % n;
            if (points[j] - points[i]).norm2() == 0.0 {
                return Err(KnotError::InvalidCurve(format!(
                    "consecutive points {i} and {j} coincide"
                )));
            }
        }
        Ok(Curve { n, points })
    }

    /// Sample a parametrization at `t_i = i/n`.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> Vec3) -> Result<Self> {
        let points = (0..n).map(|i| f(i as f64 / n as f64)).collect();
        Curve::new(points)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing `1/n`.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn param(&self, i: usize) -> f64 {
        (i % self.n) as f64 / self.n as f64
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Cyclic point access; `i` may exceed `n`.
    pub fn point(&self, i: usize) -> Vec3 {
        self.points[i % self.n]
    }

    fn point_cyc(&self, i: isize) -> Vec3 {
        self.points[i.rem_euclid(self.n as isize) as usize]
    }

    /// Grid index nearest to the parameter `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        let s = t.rem_euclid(1.0);
        ((s * self.n as f64).round() as usize) % self.n
    }

    /// Symmetric central-difference derivative at every sample, five-point
    /// stencil (fourth order on smooth inputs). The symmetry preserves the
    /// antisymmetry under orientation reversal.
    pub fn derivative(&self) -> Vec<Vec3> {
        let w = 1.0 / (12.0 * self.h());
        (0..self.n as isize)
            .map(|i| {
                (self.point_cyc(i - 2) - self.point_cyc(i + 2)
                    + (self.point_cyc(i + 1) - self.point_cyc(i - 1)) * 8.0)
                    * w
            })
            .collect()
    }

    /// Per-sample speed `|gamma'(t_i)|` from central differences.
    pub fn speeds(&self) -> Vec<f64> {
        self.derivative().iter().map(|g| g.norm()).collect()
    }

    /// Unit tangent field from the central-difference derivative.
    pub fn tangent_field(&self) -> TangentField {
        let vectors = self.derivative().iter().map(|g| g.normalized()).collect();
        TangentField { vectors }
    }

    /// Total length of the sample polyline.
    pub fn polyline_length(&self) -> f64 {
        (0..self.n)
            .map(|i| (self.point((i + 1) % self.n) - self.point(i)).norm())
            .sum()
    }

    /// Edge lengths of the sample polyline.
    pub fn edge_lengths(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| (self.point((i + 1) % self.n) - self.point(i)).norm())
            .collect()
    }

    /// Relative spread of edge lengths, `(max - min) / mean`.
    pub fn chord_spread(&self) -> f64 {
        let e = self.edge_lengths();
        let mean = e.iter().sum::<f64>() / e.len() as f64;
        let max = e.iter().cloned().fold(f64::MIN, f64::max);
        let min = e.iter().cloned().fold(f64::MAX, f64::min);
        (max - min) / mean
    }

    pub fn map_points(&self, f: impl Fn(Vec3) -> Vec3) -> Result<Curve> {
        Curve::new(self.points.iter().map(|&p| f(p)).collect())
    }

    pub fn scaled(&self, lambda: f64) -> Result<Curve> {
        self.map_points(|p| p * lambda)
    }

    pub fn translated(&self, b: Vec3) -> Result<Curve> {
        self.map_points(|p| p + b)
    }

    /// Orientation reversal `t -> -t`; the sample set is preserved.
    pub fn reversed(&self) -> Curve {
        let mut points = Vec::with_capacity(self.n);
        for i in 0..self.n {
            points.push(self.points[(self.n - i) % self.n]);
        }
        Curve { n: self.n, points }
    }

    /// Resample to equal chord lengths. The output points lie on the input
    /// polyline and the common chord is found by bisection on the close-up
    /// condition, so consecutive chords agree to ~1e-12 relative.
    pub fn reparametrize_constant_speed(&self) -> Result<Curve> {
        let total = self.polyline_length();
        if !(total > 0.0) {
            return Err(KnotError::InvalidCurve("zero total length".into()));
        }
        let n = self.n;
        let mean = total / n as f64;
        let mut lo = 0.25 * mean;
        let mut hi = 1.75 * mean;
        // traversed(d) is strictly increasing in d; root of traversed(d) = total.
        let traversed = |d: f64| -> f64 { self.equal_chord_walk(d, n).1 };
        if traversed(lo) > total || traversed(hi) < total {
            return Err(KnotError::InvalidCurve(
                "equal-chord resampling failed to bracket the chord length".into(),
            ));
        }
        for _ in 0..90 {
            let mid = 0.5 * (lo + hi);
            if traversed(mid) < total {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let d = 0.5 * (lo + hi);
        let (points, _) = self.equal_chord_walk(d, n);
        Curve::new(points)
    }

    /// March `steps` chords of length `d` along the polyline starting at point 0.
    /// Returns the placed points and the polyline arclength consumed.
    fn equal_chord_walk(&self, d: f64, steps: usize) -> (Vec<Vec3>, f64) {
        let mut placed = Vec::with_capacity(steps);
        let mut seg = 0usize; // current edge index (unbounded, cyclic)
        let mut frac = 0.0f64; // position within the edge, in [0,1)
        let mut cursor = self.points[0];
        let mut consumed = 0.0f64;
        placed.push(cursor);
        for _ in 1..steps {
            let (next, nseg, nfrac, len) = self.step_chord(cursor, seg, frac, d);
            consumed += len;
            cursor = next;
            seg = nseg;
            frac = nfrac;
            placed.push(cursor);
        }
        // Consume the final chord back toward the start to measure closure.
        let (_, _, _, len) = self.step_chord(cursor, seg, frac, d);
        consumed += len;
        (placed, consumed)
    }

    /// Advance from `cursor` (on edge `seg` at fraction `frac`) to the first
    /// polyline point at Euclidean distance `d`. Returns the new point, edge,
    /// fraction, and polyline length traversed.
    fn step_chord(&self, cursor: Vec3, seg: usize, frac: f64, d: f64) -> (Vec3, usize, f64, f64) {
        let n = self.n;
        let mut s = seg;
        let mut f = frac;
        let mut traveled = 0.0f64;
        for _ in 0..4 * n {
            let a = self.point(s);
            let b = self.point(s + 1);
            let e = b - a;
            let elen = e.norm();
            let start = a + e * f;
            let rel_end = b - cursor;
            if rel_end.norm() >= d {
                // Crossing point on this edge: |a + t e - cursor| = d with t >= f.
                let w = a - cursor;
                let aa = e.norm2();
                let bb = 2.0 * w.dot(e);
                let cc = w.norm2() - d * d;
                let disc = (bb * bb - 4.0 * aa * cc).max(0.0).sqrt();
                let t = ((-bb + disc) / (2.0 * aa)).clamp(f, 1.0);
                let p = a + e * t;
                traveled += (t - f) * elen;
                return (p, s, t, traveled);
            }
            traveled += (1.0 - f) * elen;
            let _ = start;
            s += 1;
            f = 0.0;
        }
        // Unreachable for valid inputs; fall back to the edge end.
        (self.point(s), s, 0.0, traveled)
    }

    /// Constant-speed resampling rescaled to total polyline length 1,
    /// the `|gamma'| = 1` convention on R/Z.
    pub fn to_unit_speed(&self) -> Result<Curve> {
        let r = self.reparametrize_constant_speed()?;
        let len = r.polyline_length();
        r.scaled(1.0 / len)
    }

    /// Periodic mollification with the polynomial bump
    /// `eta(t) = C (1 - t^2)^3` on `(-1, 1)`, scaled to width `delta`.
    /// Discrete weights are normalized to unit mass exactly, so the operation
    /// commutes with rigid motions to machine precision.
    pub fn mollify(&self, delta: f64) -> Result<Curve> {
        if !(delta > 0.0 && delta < 0.25) {
            return Err(KnotError::InvalidParams(format!(
                "mollification width {delta} must lie in (0, 1/4)"
            )));
        }
        let n = self.n;
        let h = self.h();
        if delta * (n as f64) < 2.0 {
            return Err(KnotError::InsufficientResolution(format!(
                "delta * n = {} < 2: grid cannot resolve the kernel",
                delta * n as f64
            )));
        }
        let half = (delta / h).floor() as isize;
        let mut weights = Vec::with_capacity(2 * half as usize + 1);
        for j in -half..=half {
            let t = j as f64 * h / delta;
            weights.push(if t.abs() < 1.0 { (1.0 - t * t).powi(3) } else { 0.0 });
        }
        let mass: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= mass;
        }
        let points = (0..n as isize)
            .map(|i| {
                let mut acc = Vec3::default();
                for (k, &w) in weights.iter().enumerate() {
                    let j = k as isize - half;
                    acc += self.point_cyc(i + j) * w;
                }
                acc
            })
            .collect();
        Curve::new(points)
    }

    /// Two-sided chord/parameter ratio bounds over sample pairs.
    ///
    /// Pairs closer than the resolution floor (default `2/n`) are excluded:
    /// nearest-neighbor ratios are quadrature noise.
    pub fn bilipschitz_constant(
        &self,
        window: Option<&Interval>,
        floor: Option<f64>,
    ) -> Result<(f64, f64)> {
        let idx: Vec<usize> = match window {
            Some(w) => w.sample_indices(self.n),
            None => (0..self.n).collect(),
        };
        if idx.len() < 4 {
            return Err(KnotError::EmptyDomain(format!(
                "window holds {} samples, need at least 4",
                idx.len()
            )));
        }
        let floor = floor.unwrap_or(2.0 / self.n as f64);
        let mut lower = f64::MAX;
        let mut upper = f64::MIN;
        for (a, &i) in idx.iter().enumerate() {
            let ti = self.param(i);
            for &j in idx.iter().skip(a + 1) {
                let rho = geodesic_distance(ti, self.param(j));
                if rho < floor {
                    continue;
                }
                let ratio = (self.point(i) - self.point(j)).norm() / rho;
                lower = lower.min(ratio);
                upper = upper.max(ratio);
            }
        }
        if lower > upper {
            return Err(KnotError::EmptyDomain(
                "no sample pair above the resolution floor".into(),
            ));
        }
        Ok((lower, upper))
    }

    /// Residual of the chord-length identity
    /// `|gamma(y)-gamma(x)|^2 = rho^2 (avg |gamma'|^2 - 1/2 avg avg |gamma'(z1)-gamma'(z2)|^2)`
    /// between the samples nearest to `x` and `y`, with both sides evaluated by
    /// the composite trapezoid rule on the shortest arc.
    pub fn ftc_identity_check(&self, x: f64, y: f64) -> Result<f64> {
        let i = self.nearest_index(x);
        let j = self.nearest_index(y);
        if i == j {
            return Err(KnotError::InvalidParams("x and y snap to the same sample".into()));
        }
        Ok(self.ftc_identity_residual(i, j))
    }

    /// Index-pair form of [`Curve::ftc_identity_check`].
    pub fn ftc_identity_residual(&self, i: usize, j: usize) -> f64 {
        let n = self.n;
        let h = self.h();
        let deriv = self.derivative();
        let (start, m) = shortest_arc(i, j, n);
        let rho = m as f64 * h;
        // Trapezoid averages over the arc samples.
        let mut avg_d = Vec3::default();
        let mut avg_sq = 0.0;
        for k in 0..=m {
            let w = if k == 0 || k == m { 0.5 } else { 1.0 };
            let g = deriv[(start + k) % n];
            avg_d += g * w;
            avg_sq += g.norm2() * w;
        }
        avg_d = avg_d * (1.0 / m as f64);
        avg_sq /= m as f64;
        // avg avg |g(z1)-g(z2)|^2 = 2 (avg |g|^2 - |avg g|^2) for product weights.
        let double_avg = 2.0 * (avg_sq - avg_d.norm2());
        let rhs = rho * rho * (avg_sq - 0.5 * double_avg);
        let lhs = (self.point(j) - self.point(i)).norm2();
        (lhs - rhs).abs()
    }

    /// Minimum Euclidean distance between sample pairs whose parameter
    /// distance exceeds `exclusion`.
    pub fn min_self_distance_guard(&self, exclusion: f64) -> Result<f64> {
        if !(exclusion > 0.0 && exclusion < 0.25) {
            return Err(KnotError::InvalidParams(format!(
                "exclusion {exclusion} must lie in (0, 1/4)"
            )));
        }
        let mut min = f64::MAX;
        for i in 0..self.n {
            let ti = self.param(i);
            for j in (i + 1)..self.n {
                if geodesic_distance(ti, self.param(j)) <= exclusion {
                    continue;
                }
                min = min.min((self.point(i) - self.point(j)).norm());
            }
        }
        Ok(min)
    }
}

/// Shortest arc between grid indices `i` and `j`: returns `(start, m)` such
/// that the arc consists of samples `start, start+1, ..., start+m` (mod n).
/// Exact antipodal pairs (`2m = n`) use the positively oriented arc from `i`.
pub fn shortest_arc(i: usize, j: usize, n: usize) -> (usize, usize) {
    let fwd = (j + n - i) % n;
    let bwd = n - fwd;
    if fwd <= bwd {
        (i, fwd)
    } else {
        (j, bwd)
    }
}

/// Per-sample unit vectors, e.g. the normalized tangent `gamma'/|gamma'|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TangentField {
    vectors: Vec<Vec3>,
}

impl TangentField {
    pub fn new(vectors: Vec<Vec3>) -> Result<Self> {
        if vectors.len() < MIN_SAMPLES {
            return Err(KnotError::InvalidCurve(format!(
                "need at least {MIN_SAMPLES} samples, got {}",
                vectors.len()
            )));
        }
        for (i, v) in vectors.iter().enumerate() {
            if (v.norm() - 1.0).abs() > 1e-12 {
                return Err(KnotError::InvalidCurve(format!(
                    "vector {i} has norm {} (must be 1 within 1e-12)",
                    v.norm()
                )));
            }
        }
        Ok(TangentField { vectors })
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec3] {
        &self.vectors
    }

    pub fn mean(&self) -> Vec3 {
        let mut acc = Vec3::default();
        for &v in &self.vectors {
            acc += v;
        }
        acc * (1.0 / self.vectors.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;
    use approx::assert_abs_diff_eq;

    #[test]
    fn geodesic_distance_examples() {
        assert_abs_diff_eq!(geodesic_distance(0.1, 0.9), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(geodesic_distance(0.25, 0.25), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(geodesic_distance(0.0, 0.5), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn derivative_magnitude_on_circle() {
        let c = zoo::make_circle(256, 1.0).unwrap();
        for g in c.derivative() {
            assert!((g.norm() - 2.0 * std::f64::consts::PI).abs() < 1e-3);
        }
    }

    #[test]
    fn derivative_on_double_segment_flips_sign() {
        let c = zoo::make_double_segment(64).unwrap();
        let d = c.derivative();
        // Away from the folds the derivative magnitude is 1 with sign +-1 in x.
        for i in 2..30 {
            assert_abs_diff_eq!(d[i].x, 1.0, epsilon = 1e-12);
        }
        for i in 34..62 {
            assert_abs_diff_eq!(d[i].x, -1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn reparametrize_gives_equal_chords() {
        // Quadratically clustered parameters on the circle.
        let n = 128;
        let c = Curve::from_fn(n, |t| {
            let s = t * t * (3.0 - 2.0 * t); // smooth monotone distortion
            let a = 2.0 * std::f64::consts::PI * s;
            Vec3::new(a.cos(), a.sin(), 0.0)
        })
        .unwrap();
        let r = c.reparametrize_constant_speed().unwrap();
        assert_eq!(r.n(), n);
        assert!(r.chord_spread() < 1e-10, "spread {}", r.chord_spread());
    }

    #[test]
    fn reparametrize_ellipse_equal_chords() {
        let c = Curve::from_fn(200, |t| {
            let a = 2.0 * std::f64::consts::PI * t;
            Vec3::new(2.0 * a.cos(), a.sin(), 0.0)
        })
        .unwrap();
        let r = c.reparametrize_constant_speed().unwrap();
        assert!(r.chord_spread() < 1e-10, "spread {}", r.chord_spread());
    }

    #[test]
    fn reparametrize_is_idempotent() {
        let c = zoo::make_circle(96, 1.0).unwrap();
        let r = c.reparametrize_constant_speed().unwrap();
        for i in 0..c.n() {
            assert!((r.point(i) - c.point(i)).norm() < 1e-12);
        }
    }

    #[test]
    fn mollify_approximate_identity() {
        let c = zoo::make_trefoil(2048, 1.0).unwrap();
        let mut last = f64::MAX;
        for delta in [0.05, 0.01, 0.002] {
            let m = c.mollify(delta).unwrap();
            let sup = (0..c.n())
                .map(|i| (m.point(i) - c.point(i)).norm())
                .fold(0.0f64, f64::max);
            assert!(sup < last, "sup distance must decrease as delta shrinks");
            last = sup;
        }
    }

    #[test]
    fn mollify_circle_shrinks_radius_rotation_equivariantly() {
        let n = 512;
        let c = zoo::make_circle(n, 1.0).unwrap();
        let delta = 0.02;
        let m = c.mollify(delta).unwrap();
        // Fourier multiplier oracle: the smoothed circle is a circle with
        // radius sum_j w_j cos(2 pi j h).
        let h = 1.0 / n as f64;
        let half = (delta / h).floor() as i64;
        let mut num = 0.0;
        let mut den = 0.0;
        for j in -half..=half {
            let t = j as f64 * h / delta;
            let w = (1.0 - t * t).max(0.0).powi(3);
            num += w * (2.0 * std::f64::consts::PI * j as f64 * h).cos();
            den += w;
        }
        let factor = num / den;
        assert!(factor < 1.0);
        for i in 0..n {
            let expect = c.point(i) * factor;
            assert!((m.point(i) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn mollify_rejects_coarse_grid() {
        let c = zoo::make_circle(16, 1.0).unwrap();
        assert!(matches!(
            c.mollify(0.05),
            Err(KnotError::InsufficientResolution(_))
        ));
    }

    #[test]
    fn constant_curve_is_rejected() {
        let points = vec![Vec3::new(1.0, 2.0, 3.0); 32];
        assert!(matches!(Curve::new(points), Err(KnotError::InvalidCurve(_))));
    }

    #[test]
    fn mollify_smooths_the_oscillating_tangent() {
        // The fixture has a tangent discontinuity at t = 0. Mollified at a
        // width below the injectivity scale, the copy stays well inside the
        // self-distance margin and its discrete tangent becomes continuous.
        let c = zoo::make_loglog_curve(2048).unwrap();
        let delta0 = 1.0 / 16.0;
        let eps1 = c.min_self_distance_guard(delta0 / 2.0).unwrap();
        let m = c.mollify(0.01).unwrap();
        let sup = (0..c.n())
            .map(|i| (m.point(i) - c.point(i)).norm())
            .fold(0.0f64, f64::max);
        assert!(sup < 0.1 * eps1, "sup distance {sup} vs margin {eps1}");
        // Tangent jump at the former discontinuity shrinks with the width.
        let jump = |c: &Curve| {
            let u = c.tangent_field();
            (0..c.n())
                .map(|i| (u.vectors()[(i + 1) % c.n()] - u.vectors()[i]).norm())
                .fold(0.0f64, f64::max)
        };
        assert!(jump(&m) < 0.5 * jump(&c), "mollified jump {} vs {}", jump(&m), jump(&c));
    }

    #[test]
    fn reparametrize_stays_near_the_image() {
        // One-sided Hausdorff bounds between the input and resampled
        // polylines, within twice the maximum edge length.
        let c = Curve::from_fn(128, |t| {
            let a = 2.0 * std::f64::consts::PI * t;
            let r = 1.0 + 0.2 * (5.0 * a).cos();
            Vec3::new(r * a.cos(), r * a.sin(), 0.1 * (3.0 * a).sin())
        })
        .unwrap();
        let r = c.reparametrize_constant_speed().unwrap();
        let max_edge = r
            .edge_lengths()
            .iter()
            .cloned()
            .fold(0.0f64, f64::max)
            .max(c.edge_lengths().iter().cloned().fold(0.0f64, f64::max));
        let point_to_polyline = |p: Vec3, poly: &Curve| -> f64 {
            let mut best = f64::MAX;
            for i in 0..poly.n() {
                let a = poly.point(i);
                let b = poly.point(i + 1);
                let e = b - a;
                let t = ((p - a).dot(e) / e.norm2()).clamp(0.0, 1.0);
                best = best.min((p - (a + e * t)).norm());
            }
            best
        };
        let mut hausdorff = 0.0f64;
        for i in 0..c.n() {
            hausdorff = hausdorff.max(point_to_polyline(r.point(i), &c));
            hausdorff = hausdorff.max(point_to_polyline(c.point(i), &r));
        }
        assert!(hausdorff <= 2.0 * max_edge, "hausdorff {hausdorff} vs edge {max_edge}");
    }

    #[test]
    fn bilipschitz_circle_unit_speed() {
        // Circumference-1 circle: lower is 2 sin(pi rho) / (2 pi rho) at rho=1/2.
        let n = 512;
        let r = 1.0 / (2.0 * std::f64::consts::PI);
        let c = zoo::make_circle(n, r).unwrap();
        let (lower, upper) = c.bilipschitz_constant(None, None).unwrap();
        assert!((lower - 2.0 / std::f64::consts::PI).abs() < 1e-4, "lower {lower}");
        assert!((upper - 1.0).abs() < 1e-3, "upper {upper}");
        assert!(upper <= 1.0 + 10.0 / n as f64);
    }

    #[test]
    fn bilipschitz_straight_piece_is_isometric() {
        let c = zoo::make_double_segment(128).unwrap();
        // A window inside the first straight run.
        let w = Interval::new(0.25, 0.1).unwrap();
        let (lower, upper) = c.bilipschitz_constant(Some(&w), None).unwrap();
        assert_abs_diff_eq!(lower, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(upper, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bilipschitz_double_segment_has_fold() {
        let c = zoo::make_double_segment(128).unwrap();
        let (lower, _) = c.bilipschitz_constant(None, None).unwrap();
        assert!(lower < 1e-12, "fold forces lower constant {lower} to 0");
    }

    #[test]
    fn ftc_identity_on_circle() {
        let n = 512;
        let r = 1.0 / (2.0 * std::f64::consts::PI);
        let c = zoo::make_circle(n, r).unwrap();
        let res = c.ftc_identity_check(0.0, 0.5).unwrap();
        // Analytic prediction: the trapezoid arc integral of the derivative
        // field carries the Euler-Maclaurin endpoint term, so the residual is
        // |Delta|^2 (2 pi h)^2 / 6 at the antipodal pair.
        let h = 1.0 / n as f64;
        let dsq = (c.point(0) - c.point(n / 2)).norm2();
        let predicted = dsq * (2.0 * std::f64::consts::PI * h).powi(2) / 6.0;
        assert!(res < 1e-4, "residual {res}");
        assert!((res - predicted).abs() < 0.2 * predicted, "res {res} vs predicted {predicted}");
    }

    #[test]
    fn ftc_identity_neighbors_vanish() {
        let n = 1024;
        let r = 1.0 / (2.0 * std::f64::consts::PI);
        let c = zoo::make_circle(n, r).unwrap();
        let res = c.ftc_identity_residual(10, 11);
        assert!(res < 1e-10, "residual {res}");
    }

    #[test]
    fn ftc_residual_halves_under_refinement() {
        let worst = |n: usize| {
            let c = zoo::make_trefoil(n, 1.0).unwrap().to_unit_speed().unwrap();
            let mut worst = 0.0f64;
            for k in 0..100 {
                let i = (k * 211) % n;
                let j = (i + 17 + (k * 97) % (n / 2 - 17)) % n;
                worst = worst.max(c.ftc_identity_residual(i, j));
            }
            worst
        };
        let r512 = worst(512);
        let r1024 = worst(1024);
        assert!(r1024 <= 0.5 * r512 * 1.05, "{r512} -> {r1024}");
    }

    #[test]
    fn guard_on_circle() {
        // Circumference-1 circle, exclusion 0.1: the nearest admissible pair
        // sits at the first grid distance above the exclusion, with chord
        // sin(pi rho) / pi ~ 0.0984.
        let n = 512;
        let c = zoo::make_circle(n, 1.0 / (2.0 * std::f64::consts::PI)).unwrap();
        let g = c.min_self_distance_guard(0.1).unwrap();
        let rho = (0.1 * n as f64).floor() / n as f64 + 1.0 / n as f64;
        let expect = (rho * std::f64::consts::PI).sin() / std::f64::consts::PI;
        assert!((g - expect).abs() < 1e-12, "guard {g} vs {expect}");
        // Continuum value at the exclusion itself is 0.0984; the grid shifts
        // the nearest admissible pair up by one step.
        assert!((g - 0.0984).abs() < 0.02 * 0.0984, "guard {g}");
    }

    #[test]
    fn guard_on_double_segment_vanishes() {
        let c = zoo::make_double_segment(128).unwrap();
        let g = c.min_self_distance_guard(0.1).unwrap();
        assert!(g < 1e-12);
    }

    #[test]
    fn guard_on_trefoil_stable_under_refinement() {
        let g1 = zoo::make_trefoil(1024, 1.0)
            .unwrap()
            .min_self_distance_guard(0.05)
            .unwrap();
        let g2 = zoo::make_trefoil(2048, 1.0)
            .unwrap()
            .min_self_distance_guard(0.05)
            .unwrap();
        assert!((g1 - g2).abs() / g2 < 0.01, "{g1} vs {g2}");
    }

    #[test]
    fn mollify_commutes_with_rigid_motion() {
        let c = zoo::make_trefoil(256, 1.0).unwrap();
        let angle: f64 = 0.7;
        let rot = |p: Vec3| {
            Vec3::new(
                p.x * angle.cos() - p.y * angle.sin(),
                p.x * angle.sin() + p.y * angle.cos(),
                p.z,
            )
        };
        let b = Vec3::new(0.3, -1.2, 0.5);
        let lhs = c.map_points(|p| rot(p) + b).unwrap().mollify(0.05).unwrap();
        let rhs = c.mollify(0.05).unwrap().map_points(|p| rot(p) + b).unwrap();
        for i in 0..c.n() {
            assert!((lhs.point(i) - rhs.point(i)).norm() < 1e-13);
        }
    }
}
