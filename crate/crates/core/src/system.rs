//! The planar layer field in the `(u, θ)` phase plane.
//!
//! Two algebraically identical forms are provided: the rational form obtained
//! by integrating the stationary equations over `[ξ, ∞)` and eliminating
//! `V = (v+/u+) U`, and the polynomial form `A (U - u+, Θ - θ+)ᵀ + F`. The
//! polynomial form extends to the whole plane and is the one used for
//! integration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{mach, pressure, EndState, GasParams};

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub u: f64,
    pub theta: f64,
}

impl PhasePoint {
    pub const fn new(u: f64, theta: f64) -> Self {
        Self { u, theta }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.theta.is_finite()
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.u, self.theta]
    }

    pub fn from_array(a: [f64; 2]) -> Self {
        Self::new(a[0], a[1])
    }

    pub fn dist(&self, other: &PhasePoint) -> f64 {
        (self.u - other.u).hypot(self.theta - other.theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// Between `h1` and `h2` on `0 < u < u+`.
    RegionI,
    /// Between `h2` and `h1` on `u+ < u < α1 u+` (subsonic only).
    RegionII,
}

/// Everything the layer field needs, derived once from the gas constants and
/// the far-field state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemData {
    pub gas: GasParams,
    pub u_plus: f64,
    pub theta_plus: f64,
    pub v_plus: f64,
    pub sigma_minus: f64,
    pub p_plus: f64,
    pub a: Mat2,
    pub alpha1: f64,
    pub alpha2: f64,
    pub mach_plus: f64,
}

pub fn build_system(gas: GasParams, right: EndState) -> Result<SystemData> {
    let u_plus = right.u();
    if u_plus <= 0.0 {
        return Err(Error::InvalidBoundary(format!(
            "far-field velocity u+ = {u_plus} must be positive"
        )));
    }
    let (g, r, mu, kappa) = (gas.gamma(), gas.r(), gas.mu(), gas.kappa());
    let theta_plus = right.theta();
    let v_plus = right.v();
    let mach_plus = mach(&right, &gas);
    let m2 = mach_plus * mach_plus;
    // M+² γ = u+² / (R θ+)
    let m2g = u_plus * u_plus / (r * theta_plus);

    let a = [
        [(m2g - 1.0) * u_plus / (m2g * mu), r / mu],
        [r * theta_plus / kappa, r * u_plus / (kappa * (g - 1.0))],
    ];
    let alpha1 = (m2 * g - m2 + 2.0) / (m2 * (g + 1.0));
    let alpha2 = 1.0 - 2.0 * (1.0 - m2) * (m2 * g + 1.0) * (g - 1.0) / (m2 * (g + 1.0).powi(2));

    Ok(SystemData {
        gas,
        u_plus,
        theta_plus,
        v_plus,
        sigma_minus: -u_plus / v_plus,
        p_plus: pressure(&right, &gas),
        a,
        alpha1,
        alpha2,
        mach_plus,
    })
}

impl SystemData {
    pub fn det_a(&self) -> f64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }

    pub fn tr_a(&self) -> f64 {
        self.a[0][0] + self.a[1][1]
    }

    /// Closed form `R u+² (M+² - 1) / (M+² μ κ (γ - 1))`.
    pub fn det_a_closed_form(&self) -> f64 {
        let (g, r, mu, kappa) = self.constants();
        let m2 = self.mach_plus * self.mach_plus;
        r * self.u_plus * self.u_plus * (m2 - 1.0) / (m2 * mu * kappa * (g - 1.0))
    }

    /// `M+² γ`, written as `u+² / (R θ+)` so that it is exact for the data.
    pub fn m2_gamma(&self) -> f64 {
        self.u_plus * self.u_plus / (self.gas.r() * self.theta_plus)
    }

    pub fn origin(&self) -> PhasePoint {
        PhasePoint::new(0.0, 0.0)
    }

    pub fn s1(&self) -> PhasePoint {
        PhasePoint::new(self.u_plus, self.theta_plus)
    }

    pub fn s2(&self) -> PhasePoint {
        PhasePoint::new(self.alpha1 * self.u_plus, self.alpha2 * self.theta_plus)
    }

    /// Length scale of the phase plane, `max(u+, θ+)`.
    pub fn scale(&self) -> f64 {
        self.u_plus.max(self.theta_plus)
    }

    /// `V = (v+/u+) U`.
    pub fn volume(&self, u: f64) -> f64 {
        self.v_plus / self.u_plus * u
    }

    fn constants(&self) -> (f64, f64, f64, f64) {
        (
            self.gas.gamma(),
            self.gas.r(),
            self.gas.mu(),
            self.gas.kappa(),
        )
    }

    /// Rational form, only defined for `u > 0`.
    pub fn rhs_exact(&self, p: PhasePoint) -> Result<[f64; 2]> {
        if !(p.u > 0.0) {
            return Err(Error::DomainError(format!(
                "rational form requires u > 0, got u = {}",
                p.u
            )));
        }
        let (g, r, mu, kappa) = self.constants();
        let v = self.volume(p.u);
        let s = self.sigma_minus;
        let du = p.u - self.u_plus;
        let dth = p.theta - self.theta_plus;
        let u_dot = v / mu * (-s * du + r * (p.theta / v - self.theta_plus / self.v_plus));
        let th_dot = v / kappa * (-s * r / (g - 1.0) * dth + self.p_plus * du + 0.5 * s * du * du);
        Ok([u_dot, th_dot])
    }

    /// Polynomial form evaluated at a deviation `(x, y) = (u - u+, θ - θ+)`.
    pub fn rhs_deviation(&self, d: [f64; 2]) -> [f64; 2] {
        let [x, y] = d;
        let lin = mat_vec(&self.a, d);
        let (f1, f2) = self.nonlinear(x, y);
        [lin[0] + f1, lin[1] + f2]
    }

    /// The nonlinear terms `F1`, `F2` at a deviation.
    pub fn nonlinear(&self, x: f64, y: f64) -> (f64, f64) {
        let (g, r, mu, kappa) = self.constants();
        let f1 = x * x / mu;
        let c2 = r * self.theta_plus / (kappa * self.u_plus) - self.u_plus / (2.0 * kappa);
        let c11 = r / (kappa * (g - 1.0));
        let f2 = c2 * x * x + c11 * x * y - x * x * x / (2.0 * kappa);
        (f1, f2)
    }

    /// Polynomial form; defined on the whole plane.
    pub fn rhs_poly(&self, p: PhasePoint) -> [f64; 2] {
        self.rhs_deviation([p.u - self.u_plus, p.theta - self.theta_plus])
    }

    /// Analytic Jacobian of [`rhs_poly`](Self::rhs_poly).
    pub fn jacobian(&self, p: PhasePoint) -> Mat2 {
        let (g, r, mu, kappa) = self.constants();
        let x = p.u - self.u_plus;
        let y = p.theta - self.theta_plus;
        let c2 = r * self.theta_plus / (kappa * self.u_plus) - self.u_plus / (2.0 * kappa);
        let c11 = r / (kappa * (g - 1.0));
        [
            [self.a[0][0] + 2.0 * x / mu, self.a[0][1]],
            [
                self.a[1][0] + 2.0 * c2 * x + c11 * y - 1.5 * x * x / kappa,
                self.a[1][1] + c11 * x,
            ],
        ]
    }

    /// Nullcline of the `U` component.
    pub fn h1(&self, u: f64) -> f64 {
        let r = self.gas.r();
        -(u - self.u_plus) * (u - self.u_plus / self.m2_gamma()) / r + self.theta_plus
    }

    /// Nullcline of the `Θ` component.
    pub fn h2(&self, u: f64) -> f64 {
        let (g, r, _, _) = self.constants();
        let q = self.m2_gamma();
        (g - 1.0) / (2.0 * r) * (u - self.u_plus) * (u - (q + 2.0) * self.u_plus / q)
            + self.theta_plus
    }

    /// `θ - h1(u)` at a deviation, evaluated without cancellation near S1.
    pub fn above_h1(&self, d: [f64; 2]) -> f64 {
        let [x, y] = d;
        y + x * (x + self.u_plus - self.u_plus / self.m2_gamma()) / self.gas.r()
    }

    /// `θ - h2(u)` at a deviation.
    pub fn above_h2(&self, d: [f64; 2]) -> f64 {
        let [x, y] = d;
        let (g, r, _, _) = self.constants();
        y - (g - 1.0) / (2.0 * r) * x * (x - 2.0 * self.u_plus / self.m2_gamma())
    }

    /// `(θ - h1)(θ - h2)`, negative strictly between the nullclines.
    pub fn nullcline_indicator(&self, d: [f64; 2]) -> f64 {
        self.above_h1(d) * self.above_h2(d)
    }

    /// Open-region membership. Region II only exists for `M+ < 1`.
    pub fn region_contains(&self, p: PhasePoint, which: Region) -> Result<bool> {
        let d = [p.u - self.u_plus, p.theta - self.theta_plus];
        let between = self.nullcline_indicator(d) < 0.0;
        match which {
            Region::RegionI => Ok(p.u > 0.0 && p.u < self.u_plus && between),
            Region::RegionII => {
                if self.mach_plus >= 1.0 {
                    return Err(Error::RegimeMismatch(format!(
                        "Region II requires M+ < 1, got {}",
                        self.mach_plus
                    )));
                }
                Ok(p.u > self.u_plus && p.u < self.alpha1 * self.u_plus && between)
            }
        }
    }
}

pub fn mat_vec(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}
