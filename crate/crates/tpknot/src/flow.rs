//! Energy descent with constant-speed reprojection and an embeddedness guard,
//! dyadic energy-concentration detection, and a mollification probe for lower
//! semicontinuity.

use crate::curve::{Curve, EnergyParams, Interval};
use crate::energy::{tp_energy, tp_energy_rows};
use crate::error::{KnotError, Result};
use crate::quad::pairwise_sum;
use crate::variation::tp_gradient;
use crate::vec3::Vec3;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FlowConfig {
    pub max_steps: usize,
    pub step_init: f64,
    /// Step shrink factor on rejection, in (0,1).
    pub backtrack_factor: f64,
    /// Sufficient-decrease constant, in (0,1).
    pub armijo_c: f64,
    /// Parameter-distance exclusion for the self-distance guard.
    pub guard_exclusion: f64,
    /// Steps violating this minimum nonlocal self-distance are rejected.
    pub guard_min_distance: f64,
    /// Constant-speed reprojection period (in accepted steps).
    pub reproject_every: usize,
    /// Stop when the gradient sup-norm falls below this times the energy.
    pub stop_grad_norm: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            max_steps: 500,
            step_init: 1e-3,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
            guard_exclusion: 0.1,
            guard_min_distance: 1e-3,
            reproject_every: 5,
            stop_grad_norm: 1e-6,
        }
    }
}

impl FlowConfig {
    fn validate(&self) -> Result<()> {
        if self.max_steps == 0 || self.reproject_every == 0 {
            return Err(KnotError::InvalidParams("step counts must be positive".into()));
        }
        if !(self.step_init > 0.0 && self.guard_min_distance > 0.0 && self.stop_grad_norm > 0.0) {
            return Err(KnotError::InvalidParams("scales must be positive".into()));
        }
        for (name, v) in [("backtrack_factor", self.backtrack_factor), ("armijo_c", self.armijo_c)]
        {
            if !(v > 0.0 && v < 1.0) {
                return Err(KnotError::InvalidParams(format!("{name} = {v} must lie in (0,1)")));
            }
        }
        if !(self.guard_exclusion > 0.0 && self.guard_exclusion < 0.25) {
            return Err(KnotError::InvalidParams("guard_exclusion must lie in (0, 1/4)".into()));
        }
        Ok(())
    }
}

/// Per-accepted-step record of the descent.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FlowStep {
    pub step: usize,
    pub energy: f64,
    pub step_size: f64,
    pub guard: f64,
    pub bilipschitz_lower: f64,
    pub max_local_energy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowStatus {
    GradientConverged,
    MaxSteps,
    /// No accepted step at the smallest trial size; reported, not fatal.
    Stalled,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowTrace {
    pub steps: Vec<FlowStep>,
    pub status: FlowStatus,
    pub initial_energy: f64,
}

/// Half-restricted local energies over a fixed 8-interval cover, used for the
/// per-step trace diagnostics.
fn max_local_energy(rows: &[f64], n: usize) -> f64 {
    let mut max = 0.0f64;
    for k in 0..8 {
        let w = Interval::new((k as f64 + 0.5) / 8.0, 1.0 / 16.0).expect("fixed cover");
        let sum: f64 = w.sample_indices(n).iter().map(|&i| rows[i]).sum();
        max = max.max(sum);
    }
    max
}

/// Projected gradient descent with Armijo backtracking.
///
/// Each trial step caps the maximum vertex displacement at a quarter of the
/// guard distance and is rejected if the self-distance guard drops below
/// `guard_min_distance`; every `reproject_every`-th accepted step includes
/// the constant-speed reprojection inside the decrease test, so the recorded
/// energies are strictly decreasing.
pub fn minimize(c0: &Curve, params: &EnergyParams, config: &FlowConfig) -> Result<(Curve, FlowTrace)> {
    config.validate()?;
    let guard0 = c0.min_self_distance_guard(config.guard_exclusion)?;
    if guard0 < config.guard_min_distance {
        return Err(KnotError::InvalidCurve(format!(
            "initial curve violates the guard: {guard0} < {}",
            config.guard_min_distance
        )));
    }
    let mut curve = c0.clone();
    let mut energy = tp_energy(&curve, params)?.value;
    let initial_energy = energy;
    if !energy.is_finite() {
        return Err(KnotError::InvalidCurve("initial energy is infinite".into()));
    }
    let mut tau = config.step_init;
    let mut trace = Vec::new();
    let mut status = FlowStatus::MaxSteps;
    let mut accepted = 0usize;
    for step in 0..config.max_steps {
        let grad = tp_gradient(&curve, params)?;
        let sup: f64 = grad.iter().map(|g| g.norm()).fold(0.0, f64::max);
        if sup <= config.stop_grad_norm * energy {
            status = FlowStatus::GradientConverged;
            break;
        }
        let grad_sq: f64 = grad.iter().map(|g| g.norm2()).sum();
        let reproject = (accepted + 1) % config.reproject_every == 0;
        // Cap the vertex displacement at a quarter of the guard distance.
        let tau_cap = 0.25 * config.guard_min_distance / sup;
        let mut t = tau.min(tau_cap);
        let mut moved = None;
        while t >= 1e-12 {
            let candidate = curve.map_points(|p| p)?;
            let pts: Vec<Vec3> = candidate
                .points()
                .iter()
                .zip(&grad)
                .map(|(&p, &g)| p - g * t)
                .collect();
            let stepped = match Curve::new(pts) {
                Ok(c) => c,
                Err(_) => {
                    t *= config.backtrack_factor;
                    continue;
                }
            };
            let stepped = if reproject {
                match stepped.reparametrize_constant_speed() {
                    Ok(c) => c,
                    Err(_) => stepped,
                }
            } else {
                stepped
            };
            let guard = stepped.min_self_distance_guard(config.guard_exclusion)?;
            if guard < config.guard_min_distance {
                t *= config.backtrack_factor;
                continue;
            }
            let (rows, infinite) = tp_energy_rows(&stepped, params)?;
            let e_new = if infinite { f64::INFINITY } else { pairwise_sum(&rows) };
            if e_new.is_finite() && e_new <= energy - config.armijo_c * t * grad_sq {
                moved = Some((stepped, e_new, guard, rows));
                break;
            }
            t *= config.backtrack_factor;
        }
        match moved {
            Some((stepped, e_new, guard, rows)) => {
                curve = stepped;
                energy = e_new;
                accepted += 1;
                let (bilip_lower, _) = curve.bilipschitz_constant(None, None)?;
                trace.push(FlowStep {
                    step,
                    energy,
                    step_size: t,
                    guard,
                    bilipschitz_lower: bilip_lower,
                    max_local_energy: max_local_energy(&rows, curve.n()),
                });
                // Grow the trial step after a first-try acceptance.
                if (t - tau.min(tau_cap)).abs() <= f64::EPSILON * t {
                    tau = t / config.backtrack_factor;
                } else {
                    tau = t;
                }
            }
            None => {
                status = FlowStatus::Stalled;
                break;
            }
        }
    }
    Ok((curve, FlowTrace { steps: trace, status, initial_energy }))
}

/// One dyadic scale of the concentration profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScaleProfile {
    pub radius: f64,
    /// Interval centers with their half-restricted local energies.
    pub entries: Vec<(f64, f64)>,
    /// Centers of the intervals meeting the threshold.
    pub flagged: Vec<f64>,
}

/// Profile of half-restricted local energies over an overlapping dyadic cover
/// (multiplicity at most two per scale).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalEnergyProfile {
    pub epsilon: f64,
    pub lambda: f64,
    pub scales: Vec<ScaleProfile>,
    /// Parameter positions of persistent concentration candidates: flagged
    /// clusters surviving from the coarsest to the finest scale.
    pub candidates: Vec<f64>,
    /// Pigeonhole bound `floor(2 lambda / epsilon)` on flagged intervals.
    pub count_bound: usize,
}

/// Detects energy concentration for a family of curves with energies bounded
/// by `lambda`: covers R/Z at dyadic scales `delta0 * 2^-m`, `m = 0..=scales`,
/// flags intervals whose half-restricted energy (sup over the family) meets
/// `epsilon`, and intersects flagged clusters across scales.
pub fn detect_concentration(
    curves: &[Curve],
    params: &EnergyParams,
    epsilon: f64,
    lambda: f64,
    delta0: f64,
    scales: usize,
) -> Result<LocalEnergyProfile> {
    if curves.is_empty() {
        return Err(KnotError::InvalidParams("need at least one curve".into()));
    }
    if !params.is_scale_invariant() {
        return Err(KnotError::InvalidParams(
            "concentration detection expects the scale-invariant exponents p = q + 2".into(),
        ));
    }
    if !(epsilon > 0.0) || epsilon > lambda {
        return Err(KnotError::InvalidParams(format!(
            "threshold {epsilon} must lie in (0, lambda = {lambda}]"
        )));
    }
    if !(delta0 > 0.0 && delta0 < 0.5) {
        return Err(KnotError::InvalidParams("coarsest radius must lie in (0, 1/2)".into()));
    }
    let n = curves[0].n();
    let finest = delta0 * 0.5f64.powi(scales as i32);
    if 2.0 * finest * (n as f64) < 16.0 {
        return Err(KnotError::InsufficientResolution(format!(
            "finest interval holds {} samples, need at least 16",
            (2.0 * finest * n as f64).floor()
        )));
    }
    // Sup over the family of per-sample half-restricted energies.
    let mut rows = vec![0.0f64; n];
    for c in curves {
        if c.n() != n {
            return Err(KnotError::InvalidParams("family members must share the grid".into()));
        }
        let total = tp_energy(c, params)?.value;
        if !(total <= lambda) {
            return Err(KnotError::InvalidParams(format!(
                "global energy {total} exceeds the bound lambda = {lambda}"
            )));
        }
        let (r, _) = tp_energy_rows(c, params)?;
        for (acc, v) in rows.iter_mut().zip(r) {
            *acc = acc.max(v);
        }
    }
    let count_bound = (2.0 * lambda / epsilon).floor() as usize;

    let mut profiles = Vec::with_capacity(scales + 1);
    let mut survivors: Option<Vec<(f64, f64)>> = None; // clusters as (lo, hi) arcs
    for m in 0..=scales {
        let r = delta0 * 0.5f64.powi(m as i32);
        let count = (1.0 / r).ceil() as usize;
        let mut entries = Vec::with_capacity(count);
        let mut flagged = Vec::new();
        for k in 0..count {
            let center = (k as f64 * r).rem_euclid(1.0);
            let w = Interval::new(center, r)?;
            let local: f64 = w.sample_indices(n).iter().map(|&i| rows[i]).sum();
            entries.push((center, local));
            if local >= epsilon {
                flagged.push(center);
            }
        }
        debug_assert!(flagged.len() <= count_bound + 1);
        let clusters = merge_clusters(&flagged, r);
        survivors = Some(match survivors {
            None => clusters,
            Some(prev) => clusters
                .into_iter()
                .filter(|c| prev.iter().any(|p| arcs_intersect(*c, *p)))
                .collect(),
        });
        profiles.push(ScaleProfile { radius: r, entries, flagged });
    }
    let candidates = survivors
        .unwrap_or_default()
        .into_iter()
        .map(|(lo, hi)| midpoint_arc(lo, hi))
        .collect();
    Ok(LocalEnergyProfile {
        epsilon,
        lambda,
        scales: profiles,
        candidates,
        count_bound,
    })
}

/// Merge flagged interval centers (radius `r`) into disjoint arcs `(lo, hi)`.
fn merge_clusters(flagged: &[f64], r: f64) -> Vec<(f64, f64)> {
    if flagged.is_empty() {
        return Vec::new();
    }
    let mut arcs: Vec<(f64, f64)> = flagged.iter().map(|&c| (c - r, c + r)).collect();
    arcs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for arc in arcs {
        match merged.last_mut() {
            Some(last) if arc.0 <= last.1 + 1e-12 => last.1 = last.1.max(arc.1),
            _ => merged.push(arc),
        }
    }
    // Wrap-around merge between the last and first arcs.
    if merged.len() > 1 {
        let first = merged[0];
        let last = *merged.last().unwrap();
        if last.1 >= first.0 + 1.0 - 1e-12 {
            merged[0].0 = last.0 - 1.0;
            merged.pop();
        }
    }
    merged
}

fn arcs_intersect(a: (f64, f64), b: (f64, f64)) -> bool {
    for shift in [-1.0, 0.0, 1.0] {
        if a.0 + shift <= b.1 && b.0 <= a.1 + shift {
            return true;
        }
    }
    false
}

fn midpoint_arc(lo: f64, hi: f64) -> f64 {
    (0.5 * (lo + hi)).rem_euclid(1.0)
}

/// Energies of mollified copies for a decreasing list of widths; witnesses
/// lower semicontinuity when the minimum stays above the base energy minus
/// the quadrature budget.
pub fn lsc_probe(c: &Curve, params: &EnergyParams, deltas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(KnotError::InvalidParams("widths must be strictly decreasing".into()));
    }
    let mut table = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let e = tp_energy(&c.mollify(d)?, params)?.value;
        table.push((d, e));
    }
    Ok(table)
}
