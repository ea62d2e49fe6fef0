//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use blayer::{build_system, EndState, Engine, GasParams, SystemData, Tolerances};

pub const GAMMA: f64 = 1.4;

pub fn gas() -> GasParams {
    GasParams::new(GAMMA, 1.0, 1.0, 1.0).unwrap()
}

pub fn right(u_plus: f64) -> EndState {
    EndState::new(1.0, u_plus, 1.0).unwrap()
}

pub fn system(u_plus: f64) -> SystemData {
    build_system(gas(), right(u_plus)).unwrap()
}

pub fn engine(u_plus: f64) -> Engine {
    Engine::new(gas(), right(u_plus), Tolerances::default()).unwrap()
}

/// Left state on the ray fixed by the mass-flux condition.
pub fn left(s: &SystemData, u: f64, theta: f64) -> EndState {
    EndState::new(s.v_plus / s.u_plus * u, u, theta).unwrap()
}

pub const SQRT_1_4: f64 = 1.183_215_956_619_923_2;

/// Integrated layer equations written out term by term.
///
/// Returns `(U', Θ')` and, per component, the sum of the absolute values of
/// the terms, for relative comparisons.
pub fn oracle_rhs(s: &SystemData, u: f64, theta: f64) -> ([f64; 2], [f64; 2]) {
    let (g, r, mu, k) = (s.gas.gamma(), s.gas.r(), s.gas.mu(), s.gas.kappa());
    let (vp, up, tp) = (s.v_plus, s.u_plus, s.theta_plus);
    let sigma = -up / vp;
    let v = vp * u / up;
    let p_plus = r * tp / vp;
    let t1 = [-sigma * (u - up), r * theta / v, -r * tp / vp];
    let t2 = [
        -sigma * r / (g - 1.0) * (theta - tp),
        p_plus * (u - up),
        0.5 * sigma * (u - up) * (u - up),
    ];
    let f = [
        v / mu * t1.iter().sum::<f64>(),
        v / k * t2.iter().sum::<f64>(),
    ];
    let m = [
        v / mu * t1.iter().map(|x| x.abs()).sum::<f64>(),
        v / k * t2.iter().map(|x| x.abs()).sum::<f64>(),
    ];
    (f, m)
}

/// Sup over samples of the integrated-equation residual, scaled by `|σ| u+`
/// and `p+ u+`.
pub fn oracle_residual(s: &SystemData, u: &[f64], th: &[f64], du: &[f64], dth: &[f64]) -> f64 {
    let sigma = s.u_plus / s.v_plus;
    let p_plus = s.gas.r() * s.theta_plus / s.v_plus;
    let scale = (sigma * s.u_plus).max(p_plus * s.u_plus);
    (0..u.len())
        .map(|i| {
            let v = s.v_plus * u[i] / s.u_plus;
            let (f, _) = oracle_rhs(s, u[i], th[i]);
            let r1 = s.gas.mu() * du[i] / v - s.gas.mu() * f[0] / v;
            let r2 = s.gas.kappa() * dth[i] / v - s.gas.kappa() * f[1] / v;
            r1.abs().max(r2.abs())
        })
        .fold(0.0, f64::max)
        / scale
}

/// Least-squares slope of `y` on `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Sum of absolute values of the terms of the polynomial form at `p`, per
/// component.
pub fn poly_magnitude(s: &SystemData, u: f64, theta: f64) -> [f64; 2] {
    let (g, r, mu, k) = (s.gas.gamma(), s.gas.r(), s.gas.mu(), s.gas.kappa());
    let (up, tp) = (s.u_plus, s.theta_plus);
    let (x, y) = (u - up, theta - tp);
    let c2 = r * tp / (k * up) - up / (2.0 * k);
    let c11 = r / (k * (g - 1.0));
    [
        (s.a[0][0] * x).abs() + (s.a[0][1] * y).abs() + x * x / mu,
        (s.a[1][0] * x).abs()
            + (s.a[1][1] * y).abs()
            + (c2 * x * x).abs()
            + (c11 * x * y).abs()
            + (x * x * x / (2.0 * k)).abs(),
    ]
}
