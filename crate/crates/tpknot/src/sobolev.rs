//! Gagliardo seminorms on R/Z and its intervals, identification functionals
//! for derivative data, and embedding/gap diagnostics.
//!
//! Windows of diameter below 1/2 use the geodesic distance, which coincides
//! with the Euclidean one there; line mode treats [0,1) as an interval of R
//! with no wrap.

use crate::curve::{geodesic_distance, shortest_arc, wrapped_offset, Curve, EnergyParams, Interval};
use crate::energy::{tp_energy_local, LocalMode};
use crate::error::{KnotError, Result};
use crate::quad::pairwise_sum;
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

/// Gagliardo parameters `(s, p)` together with the evaluation domain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeminormSpec {
    pub s: f64,
    pub p: f64,
    pub domain: SeminormDomain,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum SeminormDomain {
    /// All of R/Z with the wrap distance.
    Circle,
    /// A geodesic window; diameter below 1/2 keeps distances Euclidean.
    Window(Interval),
    /// The full grid viewed as [0,1) in R, no wrap.
    Line,
}

impl SeminormSpec {
    pub fn new(s: f64, p: f64, domain: SeminormDomain) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(KnotError::InvalidParams(format!("s = {s} must lie in (0,1)")));
        }
        if !(p > 1.0) {
            return Err(KnotError::InvalidParams(format!("p = {p} must exceed 1")));
        }
        Ok(SeminormSpec { s, p, domain })
    }

    /// The critical pairing `s = 1/q`, `p = q` used throughout the flow
    /// diagnostics.
    pub fn critical(q: f64, domain: SeminormDomain) -> Result<Self> {
        Self::new(1.0 / q, q, domain)
    }

    /// The derivative-space pairing `s = (p - q - 1)/q`, `p_sob = q` matched
    /// to the energy exponents.
    pub fn derivative_pairing(params: &EnergyParams, domain: SeminormDomain) -> Result<Self> {
        Self::new((params.p - params.q - 1.0) / params.q, params.q, domain)
    }
}

fn window_indices(domain: &SeminormDomain, n: usize) -> Result<Vec<usize>> {
    let idx = match domain {
        SeminormDomain::Circle | SeminormDomain::Line => (0..n).collect::<Vec<_>>(),
        SeminormDomain::Window(w) => w.sample_indices(n),
    };
    if idx.len() < 2 {
        return Err(KnotError::EmptyDomain("domain holds fewer than 2 samples".into()));
    }
    Ok(idx)
}

fn pair_distance(domain: &SeminormDomain, ti: f64, tj: f64) -> f64 {
    match domain {
        SeminormDomain::Line => (ti - tj).abs(),
        _ => geodesic_distance(ti, tj),
    }
}

/// Gagliardo seminorm `[f]_{W^{s,p}}` of a sampled R^3-valued function:
/// `(sum |f_i - f_j|^p / rho^{1+sp} h^2)^{1/p}`, diagonal excluded.
pub fn gagliardo_seminorm(values: &[Vec3], spec: &SeminormSpec) -> Result<f64> {
    Ok(gagliardo_seminorm_pow(values, spec)?.powf(1.0 / spec.p))
}

/// The `p`-th power of the seminorm (the raw double sum).
pub fn gagliardo_seminorm_pow(values: &[Vec3], spec: &SeminormSpec) -> Result<f64> {
    let n = values.len();
    let idx = window_indices(&spec.domain, n)?;
    let h = 1.0 / n as f64;
    let expo = 1.0 + spec.s * spec.p;
    let mut rows = Vec::with_capacity(idx.len());
    for &i in &idx {
        let ti = i as f64 * h;
        let mut acc = 0.0;
        for &j in &idx {
            if i == j {
                continue;
            }
            let rho = pair_distance(&spec.domain, ti, j as f64 * h);
            acc += (values[i] - values[j]).norm().powf(spec.p) / rho.powf(expo);
        }
        rows.push(acc * h * h);
    }
    Ok(pairwise_sum(&rows))
}

/// Scalar convenience wrapper for [`gagliardo_seminorm`].
pub fn gagliardo_seminorm_scalar(values: &[f64], spec: &SeminormSpec) -> Result<f64> {
    let lifted: Vec<Vec3> = values.iter().map(|&v| Vec3::new(v, 0.0, 0.0)).collect();
    gagliardo_seminorm(&lifted, spec)
}

fn require_small_window(b: &Interval) -> Result<()> {
    if b.diameter() >= 0.5 {
        return Err(KnotError::InvalidParams(format!(
            "window diameter {} must be below 1/2",
            b.diameter()
        )));
    }
    Ok(())
}

/// Taylor-remainder identification: the double sum of
/// `|gamma(y) - gamma(x) - gamma'(x)(y-x)|^q / rho^p` over the window,
/// comparable (two-sided) to the q-th power of the derivative seminorm with
/// `s = (p-q-1)/q`.
pub fn identification_taylor(c: &Curve, b: &Interval, params: &EnergyParams) -> Result<f64> {
    require_small_window(b)?;
    let n = c.n();
    let idx = b.sample_indices(n);
    if idx.len() < 2 {
        return Err(KnotError::EmptyDomain("window holds fewer than 2 samples".into()));
    }
    let h = c.h();
    let deriv = c.derivative();
    let mut rows = Vec::with_capacity(idx.len());
    for &i in &idx {
        let ti = c.param(i);
        let mut acc = 0.0;
        for &j in &idx {
            if i == j {
                continue;
            }
            let dt = wrapped_offset(ti, c.param(j));
            let rem = c.point(j) - c.point(i) - deriv[i] * dt;
            acc += rem.norm().powf(params.q) / dt.abs().powf(params.p);
        }
        rows.push(acc * h * h);
    }
    Ok(pairwise_sum(&rows))
}

/// Averaged-difference identification: the double sum of
/// `avg_{(x,y)} |g(x) - g(z)|^p / rho^{1+sp}`, comparable (two-sided) to the
/// p-th power of the Gagliardo seminorm.
pub fn identification_averaged(g: &[Vec3], b: &Interval, s: f64, p: f64) -> Result<f64> {
    require_small_window(b)?;
    let n = g.len();
    let idx = b.sample_indices(n);
    if idx.len() < 2 {
        return Err(KnotError::EmptyDomain("window holds fewer than 2 samples".into()));
    }
    let h = 1.0 / n as f64;
    let expo = 1.0 + s * p;
    let mut rows = Vec::with_capacity(idx.len());
    for &i in &idx {
        let mut acc = 0.0;
        for &j in &idx {
            if i == j {
                continue;
            }
            let (start, m) = shortest_arc(i, j, n);
            // Trapezoid average of |g(x) - g(z)|^p over the arc samples.
            let mut inner = 0.0;
            for k in 0..=m {
                let w = if k == 0 || k == m { 0.5 } else { 1.0 };
                inner += w * (g[i] - g[(start + k) % n]).norm().powf(p);
            }
            inner /= m as f64;
            let rho = m as f64 * h;
            acc += inner / rho.powf(expo);
        }
        rows.push(acc * h * h);
    }
    Ok(pairwise_sum(&rows))
}

/// Report of the embedding inequality
/// `[g]_{W^{t,q}(B)} <= C diam(B)^{s-t-1/p+1/q} [g]_{W^{s,p}(B)}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

pub fn embedding_check(
    g: &[Vec3],
    b: &Interval,
    s: f64,
    t: f64,
    p: f64,
    q: f64,
) -> Result<EmbeddingReport> {
    if !(t < s) {
        return Err(KnotError::InvalidParams(format!("need t = {t} < s = {s}")));
    }
    if s - 1.0 / p < t - 1.0 / q {
        return Err(KnotError::InvalidParams(
            "need s - 1/p >= t - 1/q for the embedding".into(),
        ));
    }
    require_small_window(b)?;
    let lhs = gagliardo_seminorm(g, &SeminormSpec::new(t, q, SeminormDomain::Window(*b))?)?;
    let sem = gagliardo_seminorm(g, &SeminormSpec::new(s, p, SeminormDomain::Window(*b))?)?;
    let rhs = b.diameter().powf(s - t - 1.0 / p + 1.0 / q) * sem;
    let ratio = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(EmbeddingReport { lhs, rhs, ratio })
}

/// Report of the gap estimate: derivative seminorm power vs. local energy
/// plus the quadratic seminorm term, with the smallest constant making
/// `lhs <= C (tp_local + seminorm_2q_term)` hold.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GapReport {
    /// `[gamma']^q` with `s = (p-q-1)/q`.
    pub lhs: f64,
    /// `TP(gamma; B)`, both arguments restricted to the window.
    pub tp_local: f64,
    /// `[gamma']^{2q}`, the same seminorm squared in its q-th power.
    pub seminorm_2q_term: f64,
    /// `lhs / (tp_local + seminorm_2q_term)`; 0 when lhs vanishes.
    pub empirical_c: f64,
}

pub fn gap_estimate_report(c: &Curve, b: &Interval, params: &EnergyParams) -> Result<GapReport> {
    require_small_window(b)?;
    let spec = SeminormSpec::derivative_pairing(params, SeminormDomain::Window(*b))?;
    let deriv = c.derivative();
    let sem_q = gagliardo_seminorm_pow(&deriv, &spec)?;
    let tp_local = tp_energy_local(c, b, params, LocalMode::Product)?.value;
    let sem_2q = sem_q * sem_q;
    let denom = tp_local + sem_2q;
    let empirical_c = if sem_q == 0.0 {
        0.0
    } else if denom > 0.0 {
        sem_q / denom
    } else {
        f64::INFINITY
    };
    Ok(GapReport { lhs: sem_q, tp_local, seminorm_2q_term: sem_2q, empirical_c })
}
