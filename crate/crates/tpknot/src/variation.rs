//! First variation of the tangent-point energy: analytic differentiation of
//! the discrete double sum, a finite-difference oracle, and the decomposition
//! of the tangent-field energy's derivative into the leading operator and
//! lower-order remainders.

use crate::curve::{shortest_arc, Curve, EnergyParams, Interval, TangentField};
use crate::error::{KnotError, Result};
use crate::quad::{pairwise_sum, ArcScheme, ArcTable, ArcTableVec, DEFAULT_ARC_SCHEME};
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

/// Compactly supported test field on the curve grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VariationField {
    vectors: Vec<Vec3>,
    support: Interval,
}

impl VariationField {
    pub fn new(vectors: Vec<Vec3>, support: Interval) -> Result<Self> {
        let n = vectors.len();
        for (i, v) in vectors.iter().enumerate() {
            let t = i as f64 / n as f64;
            if !support.contains(t) && v.norm2() != 0.0 {
                return Err(KnotError::InvalidParams(format!(
                    "test field does not vanish outside its support (sample {i})"
                )));
            }
            if !v.is_finite() {
                return Err(KnotError::InvalidParams(format!("non-finite test vector {i}")));
            }
        }
        Ok(VariationField { vectors, support })
    }

    /// Smooth scalar bump on the support times a constant direction.
    pub fn bump(n: usize, support: Interval, direction: Vec3) -> Result<Self> {
        let vectors = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                direction * bump_profile(&support, t)
            })
            .collect();
        VariationField::new(vectors, support)
    }

    /// Project pointwise onto the orthogonal complement of `u`, keeping the
    /// support. The result satisfies `phi . u = 0` at every sample.
    pub fn tangential_part(&self, u: &TangentField) -> Result<VariationField> {
        if u.n() != self.vectors.len() {
            return Err(KnotError::InvalidParams("grid size mismatch".into()));
        }
        let vectors = self
            .vectors
            .iter()
            .zip(u.vectors())
            .map(|(&phi, &t)| phi - t * phi.dot(t))
            .collect();
        VariationField::new(vectors, self.support)
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec3] {
        &self.vectors
    }

    pub fn support(&self) -> &Interval {
        &self.support
    }

    pub fn mean(&self) -> Vec3 {
        let mut acc = Vec3::default();
        for &v in &self.vectors {
            acc += v;
        }
        acc * (1.0 / self.vectors.len() as f64)
    }

    /// Checks `phi(t) . u(t) = 0` within 1e-12 at every sample.
    pub fn is_tangential_to(&self, u: &TangentField) -> bool {
        self.vectors
            .iter()
            .zip(u.vectors())
            .all(|(phi, t)| phi.dot(*t).abs() <= 1e-12)
    }

    pub fn scaled(&self, s: f64) -> VariationField {
        VariationField {
            vectors: self.vectors.iter().map(|&v| v * s).collect(),
            support: self.support,
        }
    }
}

/// C^2 bump `(1 - s^2)^3` over the interval, vanishing at its boundary.
fn bump_profile(support: &Interval, t: f64) -> f64 {
    let s = crate::curve::wrapped_offset(support.center(), t) / support.radius();
    if s.abs() < 1.0 {
        (1.0 - s * s).powi(3)
    } else {
        0.0
    }
}

/// Smooth nonnegative weight with unit mass supported on an interval; the
/// derivative of a monotone step built from the same polynomial bump.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EtaWeight {
    pub center: f64,
    pub radius: f64,
    samples: Vec<f64>,
}

impl EtaWeight {
    pub fn bump(center: f64, radius: f64, n: usize) -> Result<Self> {
        let support = Interval::new(center, radius)?;
        let h = 1.0 / n as f64;
        let mut samples: Vec<f64> =
            (0..n).map(|i| bump_profile(&support, i as f64 * h)).collect();
        let mass: f64 = samples.iter().sum::<f64>() * h;
        for s in &mut samples {
            *s /= mass;
        }
        Ok(EtaWeight { center, radius, samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

/// Euclidean gradient of the discrete tangent-point energy with respect to
/// the vertex positions ("discretize then differentiate").
pub fn tp_gradient(c: &Curve, params: &EnergyParams) -> Result<Vec<Vec3>> {
    let n = c.n();
    let h = c.h();
    let h2 = h * h;
    let (p, q) = (params.p, params.q);
    let deriv = c.derivative();
    let mut grad = vec![Vec3::default(); n];
    // Chain rule through the five-point derivative stencil.
    let stencil = [(2usize, -1.0 / (12.0 * h)), (1, 8.0 / (12.0 * h))];
    let spread = |grad: &mut Vec<Vec3>, center: usize, dg: Vec3| {
        for &(off, w) in &stencil {
            grad[(center + off) % n] += dg * w;
            grad[(center + n - off) % n] -= dg * w;
        }
    };
    for i in 0..n {
        let gi = deriv[i];
        let gi2 = gi.norm2();
        let gi_pow = gi2.powf(0.5 * (1.0 - q));
        for j in 0..n {
            if i == j {
                continue;
            }
            let delta = c.point(i) - c.point(j);
            let dist2 = delta.norm2();
            if dist2 < 1e-28 {
                continue;
            }
            let gj = deriv[j];
            let gj_norm = gj.norm();
            let w = gi.cross(delta);
            let w2 = w.norm2();
            let dinv = dist2.powf(-0.5 * p);
            if w2 == 0.0 {
                continue;
            }
            let wq = w2.powf(0.5 * q);
            let term = wq * gi_pow * gj_norm * dinv * h2;

            // d/d(delta): wedge part + distance part.
            let wedge_common = q * w2.powf(0.5 * q - 1.0) * gi_pow * gj_norm * dinv * h2;
            let d_delta = w.cross(gi) * wedge_common - delta * (p * term / dist2);
            grad[i] += d_delta;
            grad[j] -= d_delta;

            // d/d(g_i): wedge part + speed-power part.
            let d_gi = delta.cross(w) * wedge_common + gi * ((1.0 - q) * term / gi2);
            spread(&mut grad, i, d_gi);

            // d/d(g_j): speed factor.
            let d_gj = gj * (term / (gj_norm * gj_norm));
            spread(&mut grad, j, d_gj);
        }
    }
    Ok(grad)
}

/// Directional derivative of the discrete energy along `phi`.
pub fn tp_first_variation(c: &Curve, params: &EnergyParams, phi: &VariationField) -> Result<f64> {
    if phi.n() != c.n() {
        return Err(KnotError::InvalidParams("test field grid mismatch".into()));
    }
    let grad = tp_gradient(c, params)?;
    let terms: Vec<f64> = grad
        .iter()
        .zip(phi.vectors())
        .map(|(g, f)| g.dot(*f))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Central finite-difference oracle `(E(gamma + h phi) - E(gamma - h phi)) / 2h`.
pub fn fd_variation_oracle(
    c: &Curve,
    params: &EnergyParams,
    phi: &VariationField,
    h: f64,
) -> Result<f64> {
    if !(1e-7..=1e-3).contains(&h) {
        return Err(KnotError::InvalidParams(format!("fd step {h} outside [1e-7, 1e-3]")));
    }
    if phi.n() != c.n() {
        return Err(KnotError::InvalidParams("test field grid mismatch".into()));
    }
    let shift = |s: f64| -> Result<f64> {
        let pts = c
            .points()
            .iter()
            .zip(phi.vectors())
            .map(|(&point, &v)| point + v * s)
            .collect();
        Ok(crate::energy::tp_energy(&Curve::new(pts)?, params)?.value)
    };
    Ok((shift(h)? - shift(-h)?) / (2.0 * h))
}

/// Decomposition of the first variation of the weighted tangent-field energy
/// into the leading operator and the seven remainders; `total` is their sum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElBreakdown {
    pub q_term: f64,
    pub r: [f64; 7],
    pub total: f64,
    pub eta_center: f64,
    pub eta_radius: f64,
    pub clamped_pairs: usize,
}

/// Evaluates the leading operator and remainders of the first variation of
/// the weighted tangent-field energy at a unit field `u` along a tangential
/// test field, by the same inner-arc quadrature as the energy itself.
pub fn el_breakdown(
    u: &TangentField,
    params: &EnergyParams,
    phi: &VariationField,
    eta: &EtaWeight,
) -> Result<ElBreakdown> {
    el_breakdown_scheme(u, params, phi, eta, DEFAULT_ARC_SCHEME)
}

pub fn el_breakdown_scheme(
    u: &TangentField,
    params: &EnergyParams,
    phi: &VariationField,
    eta: &EtaWeight,
    scheme: ArcScheme,
) -> Result<ElBreakdown> {
    let n = u.n();
    if phi.n() != n || eta.samples().len() != n {
        return Err(KnotError::InvalidParams("grid size mismatch".into()));
    }
    if !phi.is_tangential_to(u) {
        return Err(KnotError::InvalidParams("test field must be tangential to u".into()));
    }
    let h = 1.0 / n as f64;
    let h2 = h * h;
    let (p, q) = (params.p, params.q);
    let uv = u.vectors();
    let pv = phi.vectors();
    let ev = eta.samples();
    let phi_mean = phi.mean();

    let u_tab = ArcTableVec::new(uv, scheme);
    let usq: Vec<f64> = uv.iter().map(|v| v.norm2()).collect();
    let usq_tab = ArcTable::new(&usq, scheme);
    let phi_tab = ArcTableVec::new(pv, scheme);
    let updotphi: Vec<f64> = uv.iter().zip(pv).map(|(a, b)| a.dot(*b)).collect();
    let updotphi_tab = ArcTable::new(&updotphi, scheme);
    let eta_u: Vec<Vec3> = uv.iter().zip(ev).map(|(v, &e)| *v * e).collect();
    let eta_u_tab = ArcTableVec::new(&eta_u, scheme);

    let mut q_rows = vec![0.0; n];
    let mut r_rows: Vec<[f64; 7]> = vec![[0.0; 7]; n];
    let mut clamped = 0usize;
    let half_exp = 0.5 * (q - 2.0);
    for i in 0..n {
        let ui = uv[i];
        let mut acc_q = 0.0;
        let mut acc_r = [0.0; 7];
        for j in 0..n {
            if i == j {
                continue;
            }
            let (start, m) = shortest_arc(i, j, n);
            let rho = m as f64 * h;
            let rho_pow = rho.powf(q - p);
            let avg_u = u_tab.average(start, m);
            let avg_usq = usq_tab.average(start, m);
            let diff_u = avg_u - ui;
            let a = diff_u.norm2();
            let b = avg_usq - 2.0 * ui.dot(avg_u) + ui.norm2();
            let c = 2.0 * (avg_usq - avg_u.norm2());
            let k = 1.0 - 0.5 * c;
            if k <= 0.0 {
                return Err(KnotError::InvalidCurve(
                    "nonpositive chord/arc factor: field is too irregular".into(),
                ));
            }
            let k_p = k.powf(-0.5 * p);
            let k_p2 = k.powf(-0.5 * (p + 2.0));
            let mut rad = a - 0.25 * b * b;
            if rad < 0.0 {
                clamped += 1;
                rad = 0.0;
            }
            let a_pow = if half_exp == 0.0 { 1.0 } else { a.powf(half_exp) };
            let rad_pow = if half_exp == 0.0 { 1.0 } else { rad.powf(half_exp) };
            let rad_q2 = rad.powf(0.5 * q);

            let avg_phi = phi_tab.average(start, m);
            let diff_phi = avg_phi - pv[i];
            let a_prime = 2.0 * diff_u.dot(diff_phi);
            let b_prime = 2.0
                * (updotphi_tab.average(start, m) - ui.dot(avg_phi) - pv[i].dot(avg_u)
                    + ui.dot(pv[i]));
            let c_prime = 4.0 * (updotphi_tab.average(start, m) - avg_u.dot(avg_phi));
            let avg_eta_u = eta_u_tab.average(start, m);
            let d_prime = -2.0 * avg_eta_u.dot(phi_mean);
            let e_prime = -ev[i] * ui.dot(phi_mean);
            let f_prime = -ev[j] * uv[j].dot(phi_mean);

            acc_q += 0.5 * q * a_pow * k_p * a_prime * rho_pow;
            acc_r[0] += 0.5 * q * (rad_pow - a_pow) * k_p * a_prime * rho_pow;
            acc_r[1] += -0.25 * q * rad_pow * k_p * b * b_prime * rho_pow;
            acc_r[2] += 0.25 * p * rad_q2 * k_p2 * c_prime * rho_pow;
            acc_r[3] += -0.5 * p * rad_q2 * k_p2 * d_prime * rho_pow;
            acc_r[4] += q * rad_pow * k_p * (a - 0.5 * b) * e_prime * rho_pow;
            acc_r[5] += 0.25 * q * rad_pow * k_p * b * d_prime * rho_pow;
            acc_r[6] += rad_q2 * k_p * ((1.0 - q) * e_prime + f_prime) * rho_pow;
        }
        q_rows[i] = acc_q * h2;
        for k in 0..7 {
            r_rows[i][k] = acc_r[k] * h2;
        }
    }
    let q_term = pairwise_sum(&q_rows);
    let mut r = [0.0; 7];
    for k in 0..7 {
        let col: Vec<f64> = r_rows.iter().map(|row| row[k]).collect();
        r[k] = pairwise_sum(&col);
    }
    let total = q_term + r.iter().sum::<f64>();
    Ok(ElBreakdown {
        q_term,
        r,
        total,
        eta_center: eta.center,
        eta_radius: eta.radius,
        clamped_pairs: clamped,
    })
}

/// Leading-operator quadratic form on a window together with the matched
/// derivative seminorm power and their ratio.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QControlReport {
    pub seminorm_q: f64,
    pub q_uu: f64,
    pub ratio: f64,
}

/// `Q(u, u)` restricted to `B x B` vs. `[u]^q` with `s = (p-q-1)/q`;
/// the form is a nonnegative quantity times a positive weight.
pub fn q_controls_seminorm_check(
    u: &TangentField,
    b: &Interval,
    params: &EnergyParams,
) -> Result<QControlReport> {
    let n = u.n();
    if b.diameter() >= 0.5 {
        return Err(KnotError::InvalidParams("window diameter must be below 1/2".into()));
    }
    let idx = b.sample_indices(n);
    if idx.len() < 2 {
        return Err(KnotError::EmptyDomain("window holds fewer than 2 samples".into()));
    }
    let h = 1.0 / n as f64;
    let h2 = h * h;
    let (p, q) = (params.p, params.q);
    let uv = u.vectors();
    let scheme = DEFAULT_ARC_SCHEME;
    let u_tab = ArcTableVec::new(uv, scheme);
    let usq: Vec<f64> = uv.iter().map(|v| v.norm2()).collect();
    let usq_tab = ArcTable::new(&usq, scheme);
    let mut q_uu = 0.0;
    let mut sem = 0.0;
    for &i in &idx {
        for &j in &idx {
            if i == j {
                continue;
            }
            let (start, m) = shortest_arc(i, j, n);
            let rho = m as f64 * h;
            let rho_pow = rho.powf(q - p);
            let avg_u = u_tab.average(start, m);
            let a = (avg_u - uv[i]).norm2();
            let c = 2.0 * (usq_tab.average(start, m) - avg_u.norm2());
            let k = 1.0 - 0.5 * c;
            if k <= 0.0 {
                return Err(KnotError::InvalidCurve("nonpositive chord/arc factor".into()));
            }
            q_uu += q * k.powf(-0.5 * p) * a.powf(0.5 * q) * rho_pow * h2;
            sem += (uv[i] - uv[j]).norm().powf(q) * rho_pow * h2;
        }
    }
    let ratio = if sem == 0.0 && q_uu == 0.0 { 0.0 } else { sem / q_uu };
    Ok(QControlReport { seminorm_q: sem, q_uu, ratio })
}
