//! Band-interpolation gluing of two sampled fields on the line with the
//! seminorm cost of the construction, and the derivative-level comparison-map
//! construction on the circle.

use crate::curve::{wrapped_offset, Curve, Interval};
use crate::error::{KnotError, Result};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

/// Antiderivative of `(1 - u^2)^3` used by the smooth step.
fn bump_integral(u: f64) -> f64 {
    u - u.powi(3) + 0.6 * u.powi(5) - u.powi(7) / 7.0
}

/// C^3 monotone step from 0 at `tau <= 0` to 1 at `tau >= 1`.
pub fn smoothstep(tau: f64) -> f64 {
    if tau <= 0.0 {
        0.0
    } else if tau >= 1.0 {
        1.0
    } else {
        let u = 2.0 * tau - 1.0;
        (bump_integral(u) - bump_integral(-1.0)) / (bump_integral(1.0) - bump_integral(-1.0))
    }
}

/// Cutoff of the gluing band: 1 for `|x| <= 1 - delta/2`, 0 for
/// `|x| >= 1 - delta/4`, smooth in between with `|eta'| <= C / delta`.
fn band_cutoff(x: f64, delta: f64) -> f64 {
    let tau = (x.abs() - (1.0 - 0.5 * delta)) / (0.25 * delta);
    1.0 - smoothstep(tau)
}

/// A field sampled at uniform nodes of a real interval.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LineField {
    pub a: f64,
    pub b: f64,
    pub values: Vec<Vec3>,
}

impl LineField {
    pub fn new(a: f64, b: f64, values: Vec<Vec3>) -> Result<Self> {
        if !(b > a) || values.len() < 2 {
            return Err(KnotError::InvalidParams("need b > a and at least 2 samples".into()));
        }
        Ok(LineField { a, b, values })
    }

    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> Vec3) -> Result<Self> {
        let values = (0..n).map(|i| f(a + (b - a) * i as f64 / (n - 1) as f64)).collect();
        LineField::new(a, b, values)
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.values.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.a + self.spacing() * i as f64
    }

    /// Nearest-sample evaluation (the Lebesgue-point convention).
    pub fn nearest(&self, x: f64) -> Vec3 {
        let t = ((x - self.a) / self.spacing()).round();
        let i = (t.max(0.0) as usize).min(self.values.len() - 1);
        self.values[i]
    }
}

/// Result of gluing `v` (inner, rescaled into `|x| < 1 - delta`) into `u`
/// (outer, `|x| > 1`) across bands of width `delta`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GluedField {
    pub field: LineField,
    pub delta: f64,
    pub u_minus: Vec3,
    pub u_plus: Vec3,
    pub v_minus: Vec3,
    pub v_plus: Vec3,
}

/// Piecewise construction: `w = u` outside the unit interval, the rescaled
/// `v` inside, and segment interpolation between the boundary values across
/// the bands `[-1, -1+delta]` and `[1-delta, 1]`.
pub fn luckhaus_glue(u: &LineField, v: &LineField, delta: f64) -> Result<GluedField> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(KnotError::InvalidParams(format!("delta = {delta} must lie in (0, 1/2]")));
    }
    let band_samples = u
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let x = u.node(*i).abs();
            (1.0 - delta..=1.0).contains(&x)
        })
        .count();
    if band_samples < 16 {
        return Err(KnotError::InsufficientResolution(format!(
            "bands hold {band_samples} samples in total, need at least 8 each"
        )));
    }
    let u_minus = u.nearest(-1.0);
    let u_plus = u.nearest(1.0);
    let v_minus = v.nearest(-1.0);
    let v_plus = v.nearest(1.0);
    let values = (0..u.values.len())
        .map(|i| {
            let x = u.node(i);
            if x.abs() > 1.0 {
                u.values[i]
            } else if x.abs() >= 1.0 - delta {
                let eta = band_cutoff(x, delta);
                let (ub, vb) = if x < 0.0 { (u_minus, v_minus) } else { (u_plus, v_plus) };
                ub * (1.0 - eta) + vb * eta
            } else {
                v.nearest(x / (1.0 - delta))
            }
        })
        .collect();
    Ok(GluedField {
        field: LineField::new(u.a, u.b, values)?,
        delta,
        u_minus,
        u_plus,
        v_minus,
        v_plus,
    })
}

/// Gagliardo double sum of a line field restricted to `(-r, r)`.
pub fn line_seminorm_pow(f: &LineField, s: f64, p: f64, r: f64) -> f64 {
    let h = f.spacing();
    let expo = 1.0 + s * p;
    let idx: Vec<usize> =
        (0..f.values.len()).filter(|&i| f.node(i).abs() < r).collect();
    let mut total = 0.0;
    for &i in &idx {
        for &j in &idx {
            if i == j {
                continue;
            }
            let d = (f.node(i) - f.node(j)).abs();
            total += (f.values[i] - f.values[j]).norm().powf(p) / d.powf(expo) * h * h;
        }
    }
    total
}

/// Right-hand-side terms of the gluing estimate (constants set to 1) and the
/// measured seminorm of the glued field.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LuckhausReport {
    pub lhs: f64,
    /// outer/outer cross energy, rescaled inner seminorm, outer/inner cross
    /// term, delta-weighted outer tails, delta-weighted inner tails, and the
    /// delta^(1-sp) boundary mismatch.
    pub terms: [f64; 6],
    pub empirical_c: f64,
    pub delta: f64,
    pub s: f64,
    pub p: f64,
}

pub fn luckhaus_estimate_report(
    u: &LineField,
    v: &LineField,
    delta: f64,
    s: f64,
    p: f64,
    r: f64,
) -> Result<LuckhausReport> {
    if !(r > 1.0 && r <= 2.0) {
        return Err(KnotError::InvalidParams(format!("r = {r} must lie in (1, 2]")));
    }
    let glued = luckhaus_glue(u, v, delta)?;
    let lhs = line_seminorm_pow(&glued.field, s, p, r);

    let hu = u.spacing();
    let hv = v.spacing();
    let expo = 1.0 + s * p;
    let outer: Vec<usize> = (0..u.values.len())
        .filter(|&i| {
            let x = u.node(i).abs();
            x > 1.0 && x < r
        })
        .collect();
    let inner: Vec<usize> =
        (0..v.values.len()).filter(|&i| v.node(i).abs() < 1.0).collect();

    let mut t1 = 0.0;
    for &i in &outer {
        for &j in &outer {
            if i == j {
                continue;
            }
            let d = (u.node(i) - u.node(j)).abs();
            t1 += (u.values[i] - u.values[j]).norm().powf(p) / d.powf(expo) * hu * hu;
        }
    }
    let t2 = (1.0 - delta).powf(1.0 - s * p) * line_seminorm_pow(v, s, p, 1.0);
    let mut t3 = 0.0;
    for &j in &inner {
        let y = v.node(j);
        for &i in &outer {
            let d = (u.node(i) - (1.0 - delta) * y).abs();
            t3 += (u.values[i] - v.values[j]).norm().powf(p) / d.powf(expo) * hu * hv;
        }
    }
    t3 *= 2.0 * (1.0 - delta);
    // Pointwise tails at the boundary values; the boundary node itself is
    // excluded from its own tail.
    let tail_u = |anchor: f64, val: Vec3, restrict: bool| -> f64 {
        let mut acc = 0.0;
        for i in 0..u.values.len() {
            let y = u.node(i);
            if y.abs() <= 1.0 || (restrict && y.abs() >= r) {
                continue;
            }
            let d = (anchor - y).abs();
            if d < 0.5 * hu {
                continue;
            }
            acc += (val - u.values[i]).norm().powf(p) / d.powf(expo) * hu;
        }
        acc
    };
    let t4 = delta * (tail_u(1.0, glued.u_plus, true) + tail_u(-1.0, glued.u_minus, false));
    let tail_v = |anchor: f64, val: Vec3| -> f64 {
        let mut acc = 0.0;
        for i in 0..v.values.len() {
            let y = v.node(i);
            if y.abs() >= 1.0 {
                continue;
            }
            let d = (anchor - y).abs();
            if d < 0.5 * hv {
                continue;
            }
            acc += (val - v.values[i]).norm().powf(p) / d.powf(expo) * hv;
        }
        acc
    };
    let t5 = delta
        * (1.0 - delta).powf(-s * p)
        * (tail_v(1.0, glued.v_plus) + tail_v(-1.0, glued.v_minus));
    let t6 = delta.powf(1.0 - s * p)
        * ((glued.u_plus - glued.v_plus).norm().powf(p)
            + (glued.u_minus - glued.v_minus).norm().powf(p));
    let terms = [t1, t2, t3, t4, t5, t6];
    let total: f64 = terms.iter().sum();
    let empirical_c = if lhs == 0.0 { 0.0 } else { lhs / total };
    Ok(LuckhausReport { lhs, terms, empirical_c, delta, s, p })
}

/// Glues the derivative of `target` into `base` inside the window and
/// integrates back to a closed curve that coincides with `base` outside the
/// window exactly. A step-weighted corrector restores closure.
///
/// The band transition blends the two derivative fields pointwise (rather
/// than interpolating frozen boundary values), so the corrector is exactly
/// zero when target and base coincide.
pub fn comparison_map(
    target: &Curve,
    base: &Curve,
    window: &Interval,
    delta: f64,
    agree_tol: f64,
) -> Result<Curve> {
    let n = base.n();
    if target.n() != n {
        return Err(KnotError::IncompatibleInputs("curves must share the grid".into()));
    }
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(KnotError::InvalidParams(format!("delta = {delta} must lie in (0, 1/2]")));
    }
    let h = base.h();
    for i in 0..n {
        if !window.contains(base.param(i))
            && (target.point(i) - base.point(i)).norm() > agree_tol
        {
            return Err(KnotError::IncompatibleInputs(format!(
                "curves disagree outside the window at sample {i}"
            )));
        }
    }
    let center = window.center();
    let big_r = window.radius();
    // Edge derivatives (forward differences): integration telescopes exactly.
    let edge = |c: &Curve, j: usize| (c.point(j + 1) - c.point(j)) * (1.0 / h);

    let mut glued = Vec::with_capacity(n);
    for j in 0..n {
        let mid = (j as f64 + 0.5) * h;
        let off = wrapped_offset(center, mid);
        let xi = off / big_r;
        let g = if xi.abs() > 1.0 {
            edge(base, j)
        } else {
            // 1 on the window interior, 0 at its boundary, smooth across the
            // bands of relative width delta.
            let blend = band_cutoff(xi, delta);
            edge(base, j) * (1.0 - blend) + edge(target, j) * blend
        };
        glued.push(g);
    }
    let mut corrector = Vec3::default();
    for j in 0..n {
        corrector += (edge(base, j) - glued[j]) * h;
    }
    if corrector.norm() > 4.0 * delta * big_r {
        return Err(KnotError::IncompatibleInputs(format!(
            "corrector magnitude {} exceeds the band width budget",
            corrector.norm()
        )));
    }
    // Walk once around starting at the window's left boundary sample.
    let a0 = base.nearest_index(center - big_r);
    let mut out = vec![Vec3::default(); n];
    out[a0] = base.point(a0);
    let theta = |k: usize| -> f64 {
        let tau = k as f64 * h; // traversal distance from the left boundary
        smoothstep((tau - 0.5 * big_r) / big_r)
    };
    let mut acc = Vec3::default();
    for k in 1..n {
        let j = (a0 + k - 1) % n;
        acc += glued[j] * h;
        out[(a0 + k) % n] = base.point(a0) + acc + corrector * theta(k);
    }
    Curve::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;
    use std::f64::consts::PI;

    fn constant_field(a: f64, b: f64, n: usize, v: Vec3) -> LineField {
        LineField::from_fn(a, b, n, |_| v).unwrap()
    }

    #[test]
    fn glue_of_equal_constants_is_constant() {
        let v = Vec3::new(0.2, -0.4, 1.0);
        let u = constant_field(-2.0, 2.0, 1024, v);
        let w = constant_field(-1.0, 1.0, 512, v);
        let g = luckhaus_glue(&u, &w, 0.25).unwrap();
        for val in &g.field.values {
            assert!((*val - v).norm() < 1e-15);
        }
    }

    #[test]
    fn glue_with_matching_traces_stays_on_the_point() {
        // u and v agree at +-1: band values collapse to that single point.
        let u = LineField::from_fn(-2.0, 2.0, 2048, |x| {
            Vec3::new(x.abs() - 1.0, 0.0, 1.0)
        })
        .unwrap();
        let v = LineField::from_fn(-1.0, 1.0, 1024, |x| {
            Vec3::new(0.5 * (x * x - 1.0), 0.0, 1.0)
        })
        .unwrap();
        let g = luckhaus_glue(&u, &v, 0.25).unwrap();
        for i in 0..g.field.values.len() {
            let x = g.field.node(i);
            if (1.0 - 0.25..=1.0).contains(&x.abs()) {
                let band_val = g.field.values[i];
                let anchor = if x < 0.0 { g.u_minus } else { g.u_plus };
                assert!((band_val - anchor).norm() < 2e-3, "band value off the trace point");
            }
        }
    }

    #[test]
    fn glue_piecewise_definition_is_sample_exact() {
        let u = LineField::from_fn(-2.0, 2.0, 2048, |x| {
            Vec3::new((PI * x).sin(), (PI * x).cos(), 0.2 * x)
        })
        .unwrap();
        let v = LineField::from_fn(-1.0, 1.0, 1024, |x| {
            Vec3::new((2.0 * PI * x).cos(), 0.5, 0.1 * x)
        })
        .unwrap();
        let delta = 0.125;
        let g = luckhaus_glue(&u, &v, delta).unwrap();
        for i in 0..g.field.values.len() {
            let x = g.field.node(i);
            if x.abs() > 1.0 {
                assert_eq!(g.field.values[i], u.values[i]);
            } else if x.abs() < 1.0 - delta {
                assert_eq!(g.field.values[i], v.nearest(x / (1.0 - delta)));
            }
        }
    }

    #[test]
    fn glue_distance_to_union_bound() {
        let u = LineField::from_fn(-2.0, 2.0, 2048, |x| {
            Vec3::new((0.5 * PI * x).sin(), (0.5 * PI * x).cos(), 0.0)
        })
        .unwrap();
        // Rotated copy.
        let rot = |p: Vec3| Vec3::new(p.x * 0.8 - p.y * 0.6, p.x * 0.6 + p.y * 0.8, p.z);
        let v = LineField::from_fn(-1.0, 1.0, 1024, |x| {
            rot(Vec3::new((0.5 * PI * x).sin(), (0.5 * PI * x).cos(), 0.0))
        })
        .unwrap();
        let g = luckhaus_glue(&u, &v, 0.25).unwrap();
        let bound = (g.u_minus - g.v_minus).norm() + (g.u_plus - g.v_plus).norm();
        for val in &g.field.values {
            let du = u.values.iter().map(|&p| (*val - p).norm()).fold(f64::MAX, f64::min);
            let dv = v.values.iter().map(|&p| (*val - p).norm()).fold(f64::MAX, f64::min);
            assert!(du.min(dv) <= bound + 1e-12);
        }
    }

    #[test]
    fn estimate_vanishes_for_equal_constants() {
        let v = Vec3::new(1.0, 0.0, 0.0);
        let u = constant_field(-2.0, 2.0, 1024, v);
        let w = constant_field(-1.0, 1.0, 512, v);
        let r = luckhaus_estimate_report(&u, &w, 0.25, 0.25, 2.0, 1.5).unwrap();
        assert_eq!(r.lhs, 0.0);
        for t in r.terms {
            assert_eq!(t, 0.0);
        }
    }

    #[test]
    fn mismatch_scaling_exponent() {
        // Constant fields differing by e1: the glued field is a double step of
        // height 1 over bands of width ~delta, so the seminorm power scales
        // like delta^(1-sp). The boundary term dominates when sp > 1 (below
        // that the sharp step already has finite seminorm and the slope
        // flattens).
        let (s, p) = (0.75, 2.0);
        let u = constant_field(-2.0, 2.0, 4096, Vec3::default());
        let v = constant_field(-1.0, 1.0, 2048, Vec3::new(1.0, 0.0, 0.0));
        let mut logs = Vec::new();
        for k in 2..=5 {
            let delta = 0.5f64.powi(k);
            let rep = luckhaus_estimate_report(&u, &v, delta, s, p, 1.5).unwrap();
            logs.push((delta.ln(), rep.lhs.ln()));
        }
        // Least-squares slope of log lhs vs log delta.
        let m = logs.len() as f64;
        let sx: f64 = logs.iter().map(|l| l.0).sum();
        let sy: f64 = logs.iter().map(|l| l.1).sum();
        let sxx: f64 = logs.iter().map(|l| l.0 * l.0).sum();
        let sxy: f64 = logs.iter().map(|l| l.0 * l.1).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        let expect = 1.0 - s * p;
        assert!(
            (slope - expect).abs() < 0.1 * expect.abs(),
            "slope {slope} vs {expect}"
        );
    }

    #[test]
    fn delta_weighted_terms_scale_linearly() {
        let u = LineField::from_fn(-2.0, 2.0, 4096, |x| {
            Vec3::new((0.7 * x).sin(), (0.9 * x).cos(), 0.0)
        })
        .unwrap();
        let v = LineField::from_fn(-1.0, 1.0, 2048, |x| {
            Vec3::new((0.7 * x).sin(), (0.9 * x).cos(), 0.0)
        })
        .unwrap();
        let (s, p) = (0.25, 2.0);
        let r8 = luckhaus_estimate_report(&u, &v, 1.0 / 8.0, s, p, 1.5).unwrap();
        let r16 = luckhaus_estimate_report(&u, &v, 1.0 / 16.0, s, p, 1.5).unwrap();
        for idx in [3usize, 4] {
            let ratio = r8.terms[idx] / r16.terms[idx];
            assert!((ratio - 2.0).abs() < 0.4, "term {idx} ratio {ratio}");
        }
    }

    #[test]
    fn comparison_map_identity_inputs() {
        let c = zoo::make_circle(256, 1.0).unwrap();
        let w = Interval::new(0.25, 0.1).unwrap();
        let out = comparison_map(&c, &c, &w, 0.125, 1e-12).unwrap();
        for i in 0..c.n() {
            assert!((out.point(i) - c.point(i)).norm() < 1e-12);
        }
    }

    #[test]
    fn comparison_map_bump_agrees_outside_and_keeps_speed() {
        let n = 512;
        let base = zoo::make_circle(n, 1.0 / (2.0 * PI)).unwrap();
        let w = Interval::new(0.25, 0.08).unwrap();
        let target = Curve::new(
            (0..n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    let s = wrapped_offset(0.25, t) / 0.06;
                    let bump = if s.abs() < 1.0 { (1.0 - s * s).powi(3) } else { 0.0 };
                    base.point(i) + Vec3::new(0.0, 0.0, 0.002) * bump
                })
                .collect(),
        )
        .unwrap();
        for delta in [0.125, 0.0625] {
            let out = comparison_map(&target, &base, &w, delta, 1e-12).unwrap();
            for i in 0..n {
                if !w.contains(out.param(i)) {
                    assert!(
                        (out.point(i) - base.point(i)).norm() < 1e-12,
                        "sample {i} moved outside the window"
                    );
                }
            }
            // Closure is built in; check speeds stay within [1/2, 3/2].
            let h = out.h();
            for i in 0..n {
                let speed = (out.point(i + 1) - out.point(i)).norm() / h;
                assert!((0.5..=1.5).contains(&speed), "speed {speed} at {i}");
            }
        }
    }

    #[test]
    fn comparison_map_closes_up() {
        let n = 256;
        let base = zoo::make_circle(n, 1.0 / (2.0 * PI)).unwrap();
        let w = Interval::new(0.5, 0.1).unwrap();
        let target = Curve::new(
            (0..n)
                .map(|i| {
                    let t = i as f64 / n as f64;
                    let s = wrapped_offset(0.5, t) / 0.08;
                    let bump = if s.abs() < 1.0 { (1.0 - s * s).powi(3) } else { 0.0 };
                    base.point(i) + Vec3::new(0.001 * bump, 0.0, 0.001 * bump)
                })
                .collect(),
        )
        .unwrap();
        // Closure means the walk returns to its anchor; the curve type itself
        // never stores the closing point twice, so verify via the corrector:
        // re-walking the full loop of glued edges plus corrector lands at 0.
        let out = comparison_map(&target, &base, &w, 0.125, 1e-12).unwrap();
        let h = out.h();
        let mut total = Vec3::default();
        for i in 0..n {
            total += out.point(i + 1) - out.point(i);
        }
        let _ = h;
        assert!(total.norm() < 1e-12, "loop fails to close: {}", total.norm());
    }
}
