//! Named verification suites driving the identities and invariants of the
//! library over the fixture zoo at moderate resolutions. The CLI `verify`
//! subcommand runs these; the heavyweight acceptance thresholds live in the
//! integration test suite.

use crate::curve::{Curve, EnergyParams, Interval};
use crate::energy::{
    e_energy_scheme, k_factor_idx, mu_kernel, tp_energy, tp_equals_e_check,
};
use crate::error::Result;
use crate::flow::detect_concentration;
use crate::gluing::{luckhaus_estimate_report, luckhaus_glue, LineField};
use crate::quad::DEFAULT_ARC_SCHEME;
use crate::sobolev::{
    gagliardo_seminorm_pow, gap_estimate_report, identification_averaged,
    identification_taylor, SeminormDomain, SeminormSpec,
};
use crate::variation::{
    el_breakdown, fd_variation_oracle, tp_first_variation, EtaWeight, VariationField,
};
use crate::vec3::Vec3;
use crate::zoo;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(results: &mut Vec<CheckResult>, name: &str, passed: bool, detail: String) {
    results.push(CheckResult { name: name.to_string(), passed, detail });
}

/// Deterministic pseudo-random stream for spot checks (splitmix64).
struct Stream(u64);

impl Stream {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    fn unit_vec(&mut self) -> Vec3 {
        let z = 2.0 * self.next_f64() - 1.0;
        let a = 2.0 * PI * self.next_f64();
        let r = (1.0 - z * z).max(0.0).sqrt();
        Vec3::new(r * a.cos(), r * a.sin(), z)
    }
}

pub fn suite_identities() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    // Lagrange identity on random pairs with |v| = 1.
    let mut rng = Stream(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let v = rng.unit_vec();
        let w = rng.unit_vec() * (0.2 + 1.5 * rng.next_f64());
        let lhs = v.cross(w).norm2();
        let rhs = w.norm2() - v.dot(w).powi(2);
        worst = worst.max((lhs - rhs).abs());
    }
    check(&mut out, "lagrange-identity", worst < 1e-14, format!("max residual {worst:.2e}"));

    // Chord-length identity residuals on the unit-speed circle.
    let c = zoo::make_circle(512, 1.0 / (2.0 * PI))?;
    let mut worst = 0.0f64;
    for k in 1..50 {
        worst = worst.max(c.ftc_identity_residual(0, k * 5));
    }
    check(&mut out, "ftc-identity-circle", worst < 1e-4, format!("max residual {worst:.2e}"));

    // k equals the squared chord/arc ratio on the unit-speed circle.
    let u = c.tangent_field();
    let mut worst = 0.0f64;
    for k in 2..250 {
        let kf = k_factor_idx(&u, 0, k, DEFAULT_ARC_SCHEME)?;
        let rho = k as f64 / 512.0;
        let expect = ((PI * rho).sin() / (PI * rho)).powi(2);
        worst = worst.max((kf - expect).abs());
    }
    check(&mut out, "k-chord-arc-identity", worst < 1e-3, format!("max deviation {worst:.2e}"));

    // The kernel sum reproduces the energy at the scale-invariant exponents.
    let params = EnergyParams::new(4.0, 2.0)?;
    let tre = zoo::make_trefoil(96, 1.0)?.to_unit_speed()?;
    let tp = tp_energy(&tre, &params)?.value;
    let n = tre.n();
    let h2 = tre.h() * tre.h();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += mu_kernel(&tre, 2.0, tre.param(i), tre.param(j))?.value * h2;
            }
        }
    }
    check(
        &mut out,
        "mu-sum-equals-tp",
        (total - tp).abs() < 1e-12 * tp,
        format!("sum {total} vs tp {tp}"),
    );

    // Tangent-field energy agrees with the tangent-point energy.
    for (name, curve) in [
        ("circle", zoo::make_circle(256, 1.0)?),
        ("trefoil", zoo::make_trefoil(256, 1.0)?.to_unit_speed()?),
    ] {
        let rel = tp_equals_e_check(&curve, &params)?;
        check(
            &mut out,
            &format!("tp-equals-e-{name}"),
            rel < 1e-3,
            format!("relative discrepancy {rel:.2e}"),
        );
    }
    Ok(out)
}

pub fn suite_invariance() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let params = EnergyParams::new(4.0, 2.0)?;
    let mut rng = Stream(7);
    for (name, curve) in [
        ("circle", zoo::make_circle(128, 1.0)?),
        ("trefoil", zoo::make_trefoil(128, 1.0)?),
    ] {
        let base = tp_energy(&curve, &params)?.value;
        for lambda in [0.5, 3.0] {
            let e = tp_energy(&curve.scaled(lambda)?, &params)?.value;
            check(
                &mut out,
                &format!("scale-{lambda}-{name}"),
                (e - base).abs() < 1e-12 * base,
                format!("rel change {:.2e}", (e - base).abs() / base),
            );
        }
        let axis = rng.unit_vec();
        let angle = 2.0 * PI * rng.next_f64();
        let shift = rng.unit_vec() * 2.0;
        let rotated = curve.map_points(|p| rotate(p, axis, angle) + shift)?;
        let e = tp_energy(&rotated, &params)?.value;
        check(
            &mut out,
            &format!("isometry-{name}"),
            (e - base).abs() < 1e-12 * base,
            format!("rel change {:.2e}", (e - base).abs() / base),
        );
        let e = tp_energy(&curve.reversed(), &params)?.value;
        check(
            &mut out,
            &format!("reversal-{name}"),
            (e - base).abs() < 1e-12 * base,
            format!("rel change {:.2e}", (e - base).abs() / base),
        );
    }
    Ok(out)
}

/// Rodrigues rotation.
pub fn rotate(p: Vec3, axis: Vec3, angle: f64) -> Vec3 {
    let k = axis.normalized();
    p * angle.cos() + k.cross(p) * angle.sin() + k * (k.dot(p) * (1.0 - angle.cos()))
}

pub fn suite_gap() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let params = EnergyParams::new(4.0, 2.0)?;
    let b = Interval::new(0.0, 0.125)?;
    for (name, gen) in [
        ("circle", |n| zoo::make_circle(n, 1.0 / (2.0 * PI))),
        ("trefoil", |n| zoo::make_trefoil(n, 1.0).and_then(|c| c.to_unit_speed())),
    ] as [(&str, fn(usize) -> Result<Curve>); 2]
    {
        let mut ratios = Vec::new();
        for n in [256usize, 512] {
            let c = gen(n)?;
            let gap = gap_estimate_report(&c, &b, &params)?;
            let taylor = identification_taylor(&c, &b, &params)?;
            let spec = SeminormSpec::derivative_pairing(&params, SeminormDomain::Window(b))?;
            let sem_q = gagliardo_seminorm_pow(&c.derivative(), &spec)?;
            let avg = identification_averaged(&c.derivative(), &b, 0.5, 2.0)?;
            let spec_half = SeminormSpec::new(0.5, 2.0, SeminormDomain::Window(b))?;
            let sem_half = gagliardo_seminorm_pow(&c.derivative(), &spec_half)?;
            ratios.push((gap.empirical_c, taylor / sem_q, avg / sem_half));
        }
        let stable = |a: f64, b: f64| (a - b).abs() / b < 0.2;
        check(
            &mut out,
            &format!("gap-constant-stable-{name}"),
            ratios[0].0.is_finite() && stable(ratios[0].0, ratios[1].0),
            format!("C {} -> {}", ratios[0].0, ratios[1].0),
        );
        check(
            &mut out,
            &format!("taylor-identification-{name}"),
            (0.01..=100.0).contains(&ratios[1].1) && stable(ratios[0].1, ratios[1].1),
            format!("ratio {} -> {}", ratios[0].1, ratios[1].1),
        );
        check(
            &mut out,
            &format!("averaged-identification-{name}"),
            (0.01..=100.0).contains(&ratios[1].2) && stable(ratios[0].2, ratios[1].2),
            format!("ratio {} -> {}", ratios[0].2, ratios[1].2),
        );
    }
    Ok(out)
}

pub fn suite_el() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let params = EnergyParams::new(4.0, 2.0)?;
    // Analytic gradient vs finite differences.
    let c = zoo::make_trefoil(96, 1.0)?;
    let support = Interval::new(0.4, 0.1)?;
    let phi = VariationField::bump(96, support, Vec3::new(0.3, -1.0, 0.7))?;
    let analytic = tp_first_variation(&c, &params, &phi)?;
    let fd = fd_variation_oracle(&c, &params, &phi, 1e-5)?;
    let rel = (analytic - fd).abs() / fd.abs().max(analytic.abs());
    check(&mut out, "gradient-vs-fd", rel < 1e-5, format!("rel {rel:.2e}"));

    // Breakdown vs finite differences of the weighted tangent-field energy.
    let n = 64;
    let circle = zoo::make_circle(n, 1.0)?;
    let u = circle.tangent_field();
    let support = Interval::new(0.3, 0.08)?;
    let phi = VariationField::bump(n, support, Vec3::new(0.5, 0.2, -0.8))?
        .tangential_part(&u)?;
    let eta = EtaWeight::bump(0.3, 0.1, n)?;
    let b = el_breakdown(&u, &params, &phi, &eta)?;
    let evaluate = |eps: f64| -> Result<f64> {
        let field: Vec<Vec3> = u
            .vectors()
            .iter()
            .zip(phi.vectors())
            .map(|(&t, &f)| (t + f * eps).normalized())
            .collect();
        let mut mean = Vec3::default();
        for v in &field {
            mean += *v;
        }
        mean = mean * (1.0 / n as f64);
        Ok(e_energy_scheme(&field, &params, Some(eta.samples()), mean, DEFAULT_ARC_SCHEME)?.value)
    };
    let eps = 1e-5;
    let fd = (evaluate(eps)? - evaluate(-eps)?) / (2.0 * eps);
    let rel = (b.total - fd).abs() / fd.abs().max(b.total.abs());
    check(&mut out, "el-breakdown-vs-fd", rel < 1e-4, format!("rel {rel:.2e}"));
    check(
        &mut out,
        "el-r1-vanishes-at-q2",
        b.r[0].abs() < 1e-14,
        format!("R1 = {:.2e}", b.r[0]),
    );
    Ok(out)
}

pub fn suite_gluing() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let u = LineField::from_fn(-2.0, 2.0, 2048, |x| {
        Vec3::new((0.5 * PI * x).sin(), (0.5 * PI * x).cos(), 0.0)
    })?;
    let v = LineField::from_fn(-1.0, 1.0, 1024, |x| {
        Vec3::new((0.5 * PI * x).cos(), 0.3 * x, 0.2)
    })?;
    let delta = 0.125;
    let g = luckhaus_glue(&u, &v, delta)?;
    let mut exact = true;
    for i in 0..g.field.values.len() {
        let x = g.field.node(i);
        if x.abs() > 1.0 && g.field.values[i] != u.values[i] {
            exact = false;
        }
        if x.abs() < 1.0 - delta && g.field.values[i] != v.nearest(x / (1.0 - delta)) {
            exact = false;
        }
    }
    check(&mut out, "glue-boundary-bullets", exact, "piecewise definition sample-exact".into());

    let bound = (g.u_minus - g.v_minus).norm() + (g.u_plus - g.v_plus).norm();
    let mut ok = true;
    for val in &g.field.values {
        let du = u.values.iter().map(|&p| (*val - p).norm()).fold(f64::MAX, f64::min);
        let dv = v.values.iter().map(|&p| (*val - p).norm()).fold(f64::MAX, f64::min);
        if du.min(dv) > bound + 1e-12 {
            ok = false;
        }
    }
    check(&mut out, "glue-distance-bound", ok, format!("bound {bound:.3}"));

    // Mismatch-only scaling of the glued seminorm; the boundary term
    // dominates in the divergent-trace regime sp > 1.
    let (s, p) = (0.75, 2.0);
    let uc = LineField::from_fn(-2.0, 2.0, 4096, |_| Vec3::default())?;
    let vc = LineField::from_fn(-1.0, 1.0, 2048, |_| Vec3::new(1.0, 0.0, 0.0))?;
    let mut logs = Vec::new();
    for k in 2..=5 {
        let d = 0.5f64.powi(k);
        let rep = luckhaus_estimate_report(&uc, &vc, d, s, p, 1.5)?;
        logs.push((d.ln(), rep.lhs.ln()));
    }
    let m = logs.len() as f64;
    let sx: f64 = logs.iter().map(|l| l.0).sum();
    let sy: f64 = logs.iter().map(|l| l.1).sum();
    let sxx: f64 = logs.iter().map(|l| l.0 * l.0).sum();
    let sxy: f64 = logs.iter().map(|l| l.0 * l.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let expect = 1.0 - s * p;
    check(
        &mut out,
        "glue-mismatch-scaling",
        (slope - expect).abs() < 0.1 * expect.abs(),
        format!("slope {slope:.3} vs {expect}"),
    );
    Ok(out)
}

pub fn suite_concentration() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let params = EnergyParams::new(4.0, 2.0)?;
    let circle = zoo::make_circle(1024, 1.0)?;
    let e = tp_energy(&circle, &params)?.value;
    let profile = detect_concentration(&[circle], &params, 0.5 * e, 1.01 * e, 0.25, 2)?;
    check(
        &mut out,
        "circle-no-concentration",
        profile.candidates.is_empty(),
        format!("{} candidates", profile.candidates.len()),
    );

    let n = 2048;
    for k in [2usize, 3] {
        let c = zoo::make_pulltight(n, k)?;
        let total = tp_energy(&c, &params)?.value;
        let width = 0.5f64.powi(k as i32 + 1);
        let w = Interval::new(0.5, 0.75 * width)?;
        let splice =
            crate::energy::tp_energy_local(&c, &w, &params, crate::energy::LocalMode::HalfRestricted)?
                .value;
        let scales = (0.25 / width).log2().floor().max(0.0) as usize;
        let profile = detect_concentration(
            std::slice::from_ref(&c),
            &params,
            0.5 * splice,
            1.01 * total,
            0.25,
            scales,
        )?;
        let near_splice = profile
            .candidates
            .iter()
            .filter(|&&t| crate::curve::geodesic_distance(t, 0.5) < width)
            .count();
        check(
            &mut out,
            &format!("pulltight-k{k}-one-candidate"),
            profile.candidates.len() == 1 && near_splice == 1,
            format!("candidates {:?}", profile.candidates),
        );
        check(
            &mut out,
            &format!("pulltight-k{k}-count-bound"),
            profile.candidates.len() <= profile.count_bound,
            format!("{} <= {}", profile.candidates.len(), profile.count_bound),
        );
    }
    Ok(out)
}

/// Run a named suite ("all" for everything).
pub fn run_suite(name: &str) -> Result<Vec<CheckResult>> {
    match name {
        "identities" => suite_identities(),
        "invariance" => suite_invariance(),
        "gap" => suite_gap(),
        "el" => suite_el(),
        "gluing" => suite_gluing(),
        "concentration" => suite_concentration(),
        "all" => {
            let mut out = Vec::new();
            out.extend(suite_identities()?);
            out.extend(suite_invariance()?);
            out.extend(suite_gap()?);
            out.extend(suite_el()?);
            out.extend(suite_gluing()?);
            out.extend(suite_concentration()?);
            Ok(out)
        }
        other => Err(crate::error::KnotError::InvalidParams(format!(
            "unknown suite '{other}'"
        ))),
    }
}
