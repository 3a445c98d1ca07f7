//! Property-based invariants over randomized inputs.

use proptest::prelude::*;
use std::f64::consts::PI;
use tpknot::curve::{geodesic_distance, Curve, EnergyParams};
use tpknot::energy::tp_energy;
use tpknot::gluing::{luckhaus_glue, LineField};
use tpknot::sobolev::{gagliardo_seminorm, SeminormDomain, SeminormSpec};
use tpknot::vec3::Vec3;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geodesic_distance_is_a_metric(
        x in 0.0f64..1.0,
        y in 0.0f64..1.0,
        z in 0.0f64..1.0,
    ) {
        let dxy = geodesic_distance(x, y);
        let dyx = geodesic_distance(y, x);
        prop_assert!((dxy - dyx).abs() < 1e-15);
        prop_assert!(dxy >= 0.0 && dxy <= 0.5);
        let dxz = geodesic_distance(x, z);
        let dzy = geodesic_distance(z, y);
        prop_assert!(dxy <= dxz + dzy + 1e-12);
    }
}

/// Closed curve from a few random Fourier modes around the circle; small
/// amplitudes keep it embedded.
fn fourier_curve(amps: &[(f64, f64, f64)]) -> Curve {
    Curve::from_fn(48, |t| {
        let a = 2.0 * PI * t;
        let mut p = Vec3::new(a.cos(), a.sin(), 0.0);
        for (k, &(ax, ay, az)) in amps.iter().enumerate() {
            let f = (k + 2) as f64 * a;
            p += Vec3::new(ax * f.cos(), ay * f.sin(), az * (f + 0.5).cos());
        }
        p
    })
    .unwrap()
}

fn small_amp() -> impl Strategy<Value = (f64, f64, f64)> {
    (-0.08f64..0.08, -0.08f64..0.08, -0.08f64..0.08)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tp_energy_scale_homogeneity(
        amps in proptest::collection::vec(small_amp(), 1..3),
        lambda in 0.3f64..2.5,
        q in 1.5f64..3.0,
        excess_frac in 0.0f64..0.8,
    ) {
        let c = fourier_curve(&amps);
        // Admissibility requires q + 2 <= p < 2q + 1, i.e. excess < q - 1.
        let p = q + 2.0 + excess_frac * (q - 1.0);
        let params = EnergyParams::new(p, q).unwrap();
        let base = tp_energy(&c, &params).unwrap().value;
        let scaled = tp_energy(&c.scaled(lambda).unwrap(), &params).unwrap().value;
        let predicted = lambda.powf(q + 2.0 - p) * base;
        prop_assert!(
            (scaled - predicted).abs() <= 1e-11 * predicted.abs().max(1e-30),
            "homogeneity: {} vs {}", scaled, predicted
        );
    }

    #[test]
    fn tp_energy_reversal_invariance(
        amps in proptest::collection::vec(small_amp(), 1..3),
    ) {
        let c = fourier_curve(&amps);
        let params = EnergyParams::new(4.0, 2.0).unwrap();
        let base = tp_energy(&c, &params).unwrap().value;
        let rev = tp_energy(&c.reversed(), &params).unwrap().value;
        prop_assert!((base - rev).abs() <= 1e-12 * base);
    }

    #[test]
    fn mollify_commutes_with_rigid_motions(
        amps in proptest::collection::vec(small_amp(), 1..3),
        angle in 0.0f64..(2.0 * PI),
        shift in small_amp(),
    ) {
        let c = fourier_curve(&amps);
        let b = Vec3::new(shift.0 * 10.0, shift.1 * 10.0, shift.2 * 10.0);
        let rot = |p: Vec3| Vec3::new(
            p.x * angle.cos() - p.y * angle.sin(),
            p.x * angle.sin() + p.y * angle.cos(),
            p.z,
        );
        let lhs = c.map_points(|p| rot(p) + b).unwrap().mollify(0.08).unwrap();
        let rhs = c.mollify(0.08).unwrap().map_points(|p| rot(p) + b).unwrap();
        for i in 0..c.n() {
            prop_assert!((lhs.point(i) - rhs.point(i)).norm() < 1e-12);
        }
    }

    #[test]
    fn seminorm_triangle_inequality(
        seed_f in proptest::collection::vec(-1.0f64..1.0, 24),
        seed_g in proptest::collection::vec(-1.0f64..1.0, 24),
        s in 0.2f64..0.8,
        p in 1.5f64..3.0,
    ) {
        let f: Vec<Vec3> = seed_f.iter().map(|&v| Vec3::new(v, v * 0.5, -v)).collect();
        let g: Vec<Vec3> = seed_g.iter().map(|&v| Vec3::new(0.3 * v, -v, v * v)).collect();
        let sum: Vec<Vec3> = f.iter().zip(&g).map(|(&a, &b)| a + b).collect();
        let spec = SeminormSpec::new(s, p, SeminormDomain::Circle).unwrap();
        let nf = gagliardo_seminorm(&f, &spec).unwrap();
        let ng = gagliardo_seminorm(&g, &spec).unwrap();
        let nsum = gagliardo_seminorm(&sum, &spec).unwrap();
        prop_assert!(nsum <= nf + ng + 1e-10 * (nf + ng));
    }

    #[test]
    fn glue_stays_near_the_input_images(
        ampu in 0.1f64..1.0,
        ampv in 0.1f64..1.0,
        phase in 0.0f64..PI,
        delta_pow in 2u32..4,
    ) {
        let u = LineField::from_fn(-2.0, 2.0, 1024, |x| {
            Vec3::new(ampu * (x + phase).sin(), ampu * (x - phase).cos(), 0.3 * x)
        }).unwrap();
        let v = LineField::from_fn(-1.0, 1.0, 512, |x| {
            Vec3::new(ampv * (2.0 * x).cos(), ampv * x, -0.2)
        }).unwrap();
        let delta = 0.5f64.powi(delta_pow as i32);
        let g = luckhaus_glue(&u, &v, delta).unwrap();
        let bound = (g.u_minus - g.v_minus).norm() + (g.u_plus - g.v_plus).norm();
        for val in &g.field.values {
            let du = u.values.iter().map(|&p| (*val - p).norm()).fold(f64::MAX, f64::min);
            let dv = v.values.iter().map(|&p| (*val - p).norm()).fold(f64::MAX, f64::min);
            prop_assert!(du.min(dv) <= bound + 1e-12);
        }
    }
}
