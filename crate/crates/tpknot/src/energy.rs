//! Tangent-point energies: the two-parameter double sum, localized variants,
//! the pair kernel, and the tangent-field reformulation that depends on the
//! derivative alone.
//!
//! All double sums use the periodic product trapezoid rule (uniform weights
//! `h^2`) with the diagonal pairs excluded, accumulated per outer index and
//! reduced pairwise for run-to-run determinism.

use crate::curve::{shortest_arc, Curve, EnergyParams, Interval, TangentField};
use crate::error::{KnotError, Result};
use crate::quad::{pairwise_sum, ArcScheme, ArcTable, ArcTableVec, DEFAULT_ARC_SCHEME};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

/// Coincidence threshold for off-diagonal sample pairs.
const COINCIDENT: f64 = 1e-14;

/// Energy evaluation result. `value` is `+inf` (never NaN) when the curve
/// violates admissibility, e.g. distinct strands touch with a nonzero wedge.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyValue {
    pub value: f64,
    pub params: EnergyParams,
    pub n: usize,
    pub quadrature: String,
    /// Pairs whose radicand went (infinitesimally) negative and was clamped.
    pub clamped_pairs: usize,
    /// Off-diagonal pairs entering the sum.
    pub pairs: usize,
}

impl EnergyValue {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }

    /// Clamp count above 0.1% of pairs signals insufficient arc resolution.
    pub fn quadrature_warning(&self) -> bool {
        self.pairs > 0 && (self.clamped_pairs as f64) > 1e-3 * self.pairs as f64
    }
}

/// One sample of the pair kernel `mu`; not symmetric in `(x, y)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MuKernelSample {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Restriction mode for localized energies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalMode {
    /// Both arguments restricted to the window: `TP(gamma; A)`.
    Product,
    /// Outer argument in the window, inner over all of R/Z; additive over
    /// disjoint windows.
    HalfRestricted,
}

/// Radius of the smallest sphere through `gamma(y)` tangent to the curve at
/// `gamma(x)`; `+inf` for collinear configurations.
pub fn tangent_point_radius(c: &Curve, x: f64, y: f64) -> Result<f64> {
    let i = c.nearest_index(x);
    let j = c.nearest_index(y);
    if i == j {
        return Err(KnotError::InvalidParams("x and y snap to the same sample".into()));
    }
    tangent_point_radius_idx(c, i, j)
}

/// Index-pair form of [`tangent_point_radius`].
pub fn tangent_point_radius_idx(c: &Curve, i: usize, j: usize) -> Result<f64> {
    let delta = c.point(i) - c.point(j);
    let dist2 = delta.norm2();
    if dist2 < COINCIDENT * COINCIDENT {
        return Err(KnotError::DegeneratePair);
    }
    let u = c.derivative()[i % c.n()].normalized();
    let wedge = u.cross(delta).norm();
    if wedge < COINCIDENT {
        return Ok(f64::INFINITY);
    }
    Ok(dist2 / (2.0 * wedge))
}

enum PairTerm {
    Value(f64),
    /// Coincident points with collinear tangents: the fold contributes zero.
    Fold,
    /// Coincident points on distinct strands: the energy is infinite.
    Contact,
}

fn tp_pair_term(pi: Vec3, pj: Vec3, gi: Vec3, gj: Vec3, p: f64, q: f64) -> PairTerm {
    let delta = pi - pj;
    let dist2 = delta.norm2();
    if dist2 < COINCIDENT * COINCIDENT {
        let parallel = gi.normalized().cross(gj.normalized()).norm() < 1e-7;
        return if parallel { PairTerm::Fold } else { PairTerm::Contact };
    }
    let wedge2 = gi.cross(delta).norm2();
    if wedge2 == 0.0 {
        return PairTerm::Value(0.0);
    }
    let gi2 = gi.norm2();
    let value =
        wedge2.powf(0.5 * q) * gi2.powf(0.5 * (1.0 - q)) * gj.norm() * dist2.powf(-0.5 * p);
    PairTerm::Value(value)
}

/// Per-outer-sample partial sums of the tangent-point double sum, including
/// the `h^2` quadrature weights. Summing the rows gives the energy; a row is
/// the half-restricted local energy of its sample.
pub fn tp_energy_rows(c: &Curve, params: &EnergyParams) -> Result<(Vec<f64>, bool)> {
    let n = c.n();
    let h2 = c.h() * c.h();
    let deriv = c.derivative();
    let mut infinite = false;
    let mut rows = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            match tp_pair_term(c.point(i), c.point(j), deriv[i], deriv[j], params.p, params.q) {
                PairTerm::Value(v) => acc += v,
                PairTerm::Fold => {}
                PairTerm::Contact => infinite = true,
            }
        }
        rows[i] = acc * h2;
    }
    Ok((rows, infinite))
}

/// The tangent-point energy of the curve.
pub fn tp_energy(c: &Curve, params: &EnergyParams) -> Result<EnergyValue> {
    let (rows, infinite) = tp_energy_rows(c, params)?;
    let n = c.n();
    Ok(EnergyValue {
        value: if infinite { f64::INFINITY } else { pairwise_sum(&rows) },
        params: *params,
        n,
        quadrature: "product-trapezoid-diagonal-excluded".into(),
        clamped_pairs: 0,
        pairs: n * (n - 1),
    })
}

/// Localized tangent-point energy over a window.
pub fn tp_energy_local(
    c: &Curve,
    window: &Interval,
    params: &EnergyParams,
    mode: LocalMode,
) -> Result<EnergyValue> {
    let n = c.n();
    let h2 = c.h() * c.h();
    let deriv = c.derivative();
    let outer = window.sample_indices(n);
    if outer.is_empty() {
        return Err(KnotError::EmptyDomain("window holds no samples".into()));
    }
    let mut infinite = false;
    let mut rows = Vec::with_capacity(outer.len());
    let mut pairs = 0usize;
    for &i in &outer {
        let mut acc = 0.0;
        let inner: Box<dyn Iterator<Item = usize>> = match mode {
            LocalMode::Product => Box::new(outer.iter().copied()),
            LocalMode::HalfRestricted => Box::new(0..n),
        };
        for j in inner {
            if i == j {
                continue;
            }
            pairs += 1;
            match tp_pair_term(c.point(i), c.point(j), deriv[i], deriv[j], params.p, params.q) {
                PairTerm::Value(v) => acc += v,
                PairTerm::Fold => {}
                PairTerm::Contact => infinite = true,
            }
        }
        rows.push(acc * h2);
    }
    Ok(EnergyValue {
        value: if infinite { f64::INFINITY } else { pairwise_sum(&rows) },
        params: *params,
        n,
        quadrature: "product-trapezoid-diagonal-excluded".into(),
        clamped_pairs: 0,
        pairs,
    })
}

/// The kernel `mu(gamma, x, y)` of the scale-invariant energy: the
/// tangent-point integrand with exponents `(q+2, q)`.
pub fn mu_kernel(c: &Curve, q: f64, x: f64, y: f64) -> Result<MuKernelSample> {
    let i = c.nearest_index(x);
    let j = c.nearest_index(y);
    if i == j {
        return Err(KnotError::InvalidParams("x and y snap to the same sample".into()));
    }
    let deriv = c.derivative();
    match tp_pair_term(c.point(i), c.point(j), deriv[i], deriv[j], q + 2.0, q) {
        PairTerm::Value(v) => Ok(MuKernelSample { x: c.param(i), y: c.param(j), value: v }),
        PairTerm::Fold => Ok(MuKernelSample { x: c.param(i), y: c.param(j), value: 0.0 }),
        PairTerm::Contact => Err(KnotError::DegeneratePair),
    }
}

/// `k(x, y) = 1 - 1/2 avg avg |u(s) - u(t)|^2` over the shortest arc, the
/// squared chord/arc ratio of the underlying unit-speed curve.
pub fn k_factor(u: &TangentField, x: f64, y: f64) -> Result<f64> {
    let n = u.n();
    let i = ((x.rem_euclid(1.0) * n as f64).round() as usize) % n;
    let j = ((y.rem_euclid(1.0) * n as f64).round() as usize) % n;
    k_factor_idx(u, i, j, DEFAULT_ARC_SCHEME)
}

/// Index-pair form of [`k_factor`].
pub fn k_factor_idx(u: &TangentField, i: usize, j: usize, scheme: ArcScheme) -> Result<f64> {
    let n = u.n();
    if i % n == j % n {
        return Err(KnotError::InvalidParams("coincident parameters".into()));
    }
    let (start, m) = shortest_arc(i % n, j % n, n);
    if 2 * m == n {
        return Err(KnotError::AntipodalPair);
    }
    let vecs = ArcTableVec::new(u.vectors(), scheme);
    let sq: Vec<f64> = u.vectors().iter().map(|v| v.norm2()).collect();
    let sqt = ArcTable::new(&sq, scheme);
    let avg_u = vecs.average(start, m);
    let avg_sq = sqt.average(start, m);
    // avg avg |u(s)-u(t)|^2 = 2 (avg |u|^2 - |avg u|^2) for product weights.
    let c = 2.0 * (avg_sq - avg_u.norm2());
    Ok((1.0 - 0.5 * c).min(1.0))
}

/// Tangent-field energy evaluated on a sampled field (not necessarily unit).
/// With `eta` absent the plain energy is computed; otherwise the weighted
/// variant with the field mean `mean` entering through `eta`.
pub fn e_energy(
    field: &[Vec3],
    params: &EnergyParams,
    eta: Option<&[f64]>,
    mean: Vec3,
) -> Result<EnergyValue> {
    e_energy_scheme(field, params, eta, mean, DEFAULT_ARC_SCHEME)
}

/// [`e_energy`] with an explicit inner-arc quadrature scheme.
pub fn e_energy_scheme(
    field: &[Vec3],
    params: &EnergyParams,
    eta: Option<&[f64]>,
    mean: Vec3,
    scheme: ArcScheme,
) -> Result<EnergyValue> {
    let n = field.len();
    if n < crate::curve::MIN_SAMPLES {
        return Err(KnotError::InvalidCurve(format!("need at least 8 samples, got {n}")));
    }
    if let Some(e) = eta {
        if e.len() != n {
            return Err(KnotError::InvalidParams("eta sample count mismatch".into()));
        }
        if e.iter().any(|&v| v < 0.0) {
            return Err(KnotError::InvalidParams("eta must be nonnegative".into()));
        }
    }
    let h = 1.0 / n as f64;
    let (p, q) = (params.p, params.q);

    let fvec = ArcTableVec::new(field, scheme);
    let fsq_samples: Vec<f64> = field.iter().map(|v| v.norm2()).collect();
    let fsq = ArcTable::new(&fsq_samples, scheme);
    // d(z) = |F(z) - eta(z) mean|^2 = |F|^2 - 2 eta <F, mean> + eta^2 |mean|^2.
    let shifted_sq: Vec<f64> = match eta {
        Some(e) => field
            .iter()
            .zip(e.iter())
            .map(|(v, &w)| (*v - mean * w).norm2())
            .collect(),
        None => fsq_samples.clone(),
    };
    let dsq = ArcTable::new(&shifted_sq, scheme);
    let shifted_norm: Vec<f64> = shifted_sq.iter().map(|v| v.sqrt()).collect();

    let mut infinite = false;
    let mut clamped = 0usize;
    let mut rows = vec![0.0; n];
    for i in 0..n {
        let fi = field[i];
        let e2 = shifted_sq[i];
        let mut acc = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let (start, m) = shortest_arc(i, j, n);
            let rho = m as f64 * h;
            let avg_f = fvec.average(start, m);
            let avg_fsq = fsq.average(start, m);
            let a = (avg_f - fi).norm2();
            let b = avg_fsq - 2.0 * fi.dot(avg_f) + fi.norm2();
            let c = 2.0 * (avg_fsq - avg_f.norm2());
            let d = dsq.average(start, m);
            let rad = e2 * a - 0.25 * (b + e2 - d) * (b + e2 - d);
            if rad <= 0.0 {
                if rad < 0.0 {
                    clamped += 1;
                }
                continue;
            }
            let den = d - 0.5 * c;
            if den <= 0.0 {
                infinite = true;
                continue;
            }
            acc += rad.powf(0.5 * q)
                * den.powf(-0.5 * p)
                * e2.powf(0.5 * (1.0 - q))
                * shifted_norm[j]
                * rho.powf(q - p);
        }
        rows[i] = acc * h * h;
    }
    Ok(EnergyValue {
        value: if infinite { f64::INFINITY } else { pairwise_sum(&rows) },
        params: *params,
        n,
        quadrature: scheme.tag().into(),
        clamped_pairs: clamped,
        pairs: n * (n - 1),
    })
}

/// Relative discrepancy between the tangent-point energy and the
/// tangent-field energy of the derivative, at matched grids.
///
/// Requires a constant-speed curve. Samples of any smooth constant-speed
/// parametrization have chord spread of order `kappa^2 / n^2`, so the gate is
/// a loose sanity bound rather than a machine tolerance.
pub fn tp_equals_e_check(c: &Curve, params: &EnergyParams) -> Result<f64> {
    let spread = c.chord_spread();
    if spread > 1e-2 {
        return Err(KnotError::InvalidParams(format!(
            "curve is not constant speed: chord spread {spread:.2e}"
        )));
    }
    let tp = tp_energy(c, params)?;
    let deriv = c.derivative();
    let mut mean = Vec3::default();
    for g in &deriv {
        mean += *g;
    }
    mean = mean * (1.0 / deriv.len() as f64);
    let e = e_energy(&deriv, params, None, mean)?;
    if !tp.is_finite() || !e.is_finite() {
        return Err(KnotError::InvalidCurve("infinite energy in the comparison".into()));
    }
    Ok((tp.value - e.value).abs() / tp.value)
}
