mod common;

use blayer::{
    eigen_2x2, trace_gamma, trace_sigma, transonic_frame, CurveLabel, Error, GammaBranch,
    Membership, PhasePoint, Region, Terminal, TraceOptions,
};
use common::*;

#[test]
fn sigma_is_decreasing_graph_inside_region_one() {
    let s = system(SQRT_1_4);
    let frame = transonic_frame(&s, 1e-8).unwrap();
    let c = trace_sigma(&s, &frame, &TraceOptions::default()).unwrap();
    assert_eq!(c.label, CurveLabel::Sigma);
    for w in c.samples.windows(2) {
        assert!(w[1].u < w[0].u, "u must decrease away from S1");
        assert!(w[1].theta > w[0].theta, "theta must increase away from S1");
    }
    // strictly between the nullclines, away from the endpoints
    let n = c.samples.len();
    for p in &c.samples[1..n - 1] {
        assert!(
            s.region_contains(*p, Region::RegionI).unwrap(),
            "{p:?} outside region I"
        );
    }
}

#[test]
fn gamma_curves_follow_the_nullcline_sign_pattern() {
    let s = system(1.0);
    let eig = eigen_2x2(&s.a).unwrap();
    let opts = TraceOptions::default();
    let g1 = trace_gamma(&s, &eig, GammaBranch::Gamma1, &opts).unwrap();
    let g2 = trace_gamma(&s, &eig, GammaBranch::Gamma2, &opts).unwrap();
    let n1 = g1.samples.len();
    for p in &g1.samples[1..n1 - 1] {
        assert!(s.region_contains(*p, Region::RegionI).unwrap());
        // along Γ1 toward S1: U' > 0, Θ' < 0
        let f = s.rhs_poly(*p);
        assert!(f[0] > 0.0 && f[1] < 0.0, "{p:?}: {f:?}");
    }
    let n2 = g2.samples.len();
    for p in &g2.samples[1..n2 - 1] {
        assert!(s.region_contains(*p, Region::RegionII).unwrap());
        let f = s.rhs_poly(*p);
        assert!(f[0] < 0.0 && f[1] > 0.0, "{p:?}: {f:?}");
    }
}

#[test]
fn subcase_b_gamma2_reaches_theta_axis_right_of_s1() {
    let s = system(0.3);
    assert!(s.alpha2 < 0.0);
    let eig = eigen_2x2(&s.a).unwrap();
    let c = trace_gamma(&s, &eig, GammaBranch::Gamma2, &TraceOptions::default()).unwrap();
    let Terminal::HitThetaAxis(z) = c.terminal else {
        panic!("terminal {:?}", c.terminal)
    };
    assert!(z.theta.abs() < 1e-9);
    assert!(z.u > s.u_plus && z.u < s.alpha1 * s.u_plus, "Z2 at {z:?}");
}

#[test]
fn sigma_needs_a_transonic_far_field() {
    let s = system(1.0);
    assert!(matches!(
        transonic_frame(&s, 1e-8),
        Err(Error::RegimeMismatch(_))
    ));
}

#[test]
fn rejects_bad_seed_offset() {
    let s = system(1.0);
    let eig = eigen_2x2(&s.a).unwrap();
    for bad in [0.0, -1e-6, f64::NAN] {
        let opts = TraceOptions {
            seed_offset: Some(bad),
            ..Default::default()
        };
        let r = trace_gamma(&s, &eig, GammaBranch::Gamma1, &opts);
        assert!(
            matches!(r, Err(Error::InvalidParameter { .. })),
            "{bad}: {r:?}"
        );
    }
}

#[test]
fn membership_on_off_and_out_of_range() {
    let eng = engine(1.0);
    let c = eng.curve(CurveLabel::Gamma1).unwrap();
    let p = c.samples[c.samples.len() / 2];
    let m = c.membership(p, 1e-6).unwrap();
    assert!(m.is_on() && m.distance().abs() < 1e-9, "{m:?}");
    let off = PhasePoint::new(p.u, p.theta + 1e-3);
    match c.membership(off, 1e-6).unwrap() {
        Membership::OffCurve { distance, .. } => assert!((distance - 1e-3).abs() < 1e-6),
        m => panic!("{m:?}"),
    }
    let beyond = PhasePoint::new(1.5, 1.0);
    assert!(matches!(
        c.membership(beyond, 1e-6),
        Err(Error::OutOfRange { .. })
    ));
    assert!(matches!(
        c.membership(PhasePoint::new(-0.1, 1.0), 1e-6),
        Err(Error::DomainError(_))
    ));
}

#[test]
fn interpolant_agrees_with_reintegration() {
    // value_at uses the traced samples; membership near the curve re-shoots
    let eng = engine(SQRT_1_4);
    let c = eng.curve(CurveLabel::Sigma).unwrap();
    for frac in [0.1, 0.3, 0.6, 0.9] {
        let u = SQRT_1_4 * (1.0 - frac);
        let th = c.value_at(u).unwrap();
        let m = c.membership(PhasePoint::new(u, th), 1e-6).unwrap();
        assert!(m.distance().abs() < 1e-8, "u = {u}: {m:?}");
    }
}

#[test]
fn csv_and_json_describe_the_same_curve() {
    let eng = engine(1.0);
    let c = eng.curve(CurveLabel::Gamma2).unwrap();
    let mut buf = Vec::new();
    c.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,u,theta"));
    assert_eq!(lines.count(), c.samples.len());
    let j = c.to_json();
    assert_eq!(j["label"], "Gamma2");
    assert_eq!(j["terminal"], "ConvergedToS2");
    assert_eq!(j["samples"], c.samples.len());
}
