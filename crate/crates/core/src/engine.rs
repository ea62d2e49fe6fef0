//! Existence decision for the inflow boundary layer, profile computation and
//! verification of monotonicity, residuals and decay rates.

use std::io::Write;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{
    check_flux_condition, classify_regime, EndState, FluxCheck, GasParams, Regime, RegimeKind,
    DEFAULT_TOL_A, DEFAULT_TOL_M,
};
use crate::integrator::EventKind;
use crate::linear::{eigen_2x2, linear_fit, transonic_frame, EigenPair, TransonicFrame};
use crate::system::{build_system, PhasePoint, SystemData};
use crate::tracer::{
    gamma_direction, shoot, trace_gamma, trace_sigma, Curve, CurveLabel, GammaBranch, Membership,
    Seed, Stop, TraceOptions, STOP,
};

pub const DEFAULT_TOL_MEMBER: f64 = 1e-6;

/// Profiles are checked against the equations between samples too, through
/// the dense output, so they are integrated tighter than curves.
const PROFILE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_a: f64,
    pub tol_m: f64,
    pub tol_member: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_a: DEFAULT_TOL_A,
            tol_m: DEFAULT_TOL_M,
            tol_member: DEFAULT_TOL_MEMBER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub gas: GasParams,
    /// Boundary state at ξ = 0.
    pub left: EndState,
    /// Far-field state.
    pub right: EndState,
    pub tol: Tolerances,
}

impl Query {
    pub fn new(gas: GasParams, left: EndState, right: EndState) -> Self {
        Self {
            gas,
            left,
            right,
            tol: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Reason {
    MassFluxMismatch { gap: f64 },
    NonpositiveUPlus,
    Supersonic,
    OffCurve { distance: f64, curve: CurveLabel },
    OutsideCurveRange { curve: CurveLabel },
}

impl Reason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Reason::MassFluxMismatch { .. } => "MassFluxMismatch",
            Reason::NonpositiveUPlus => "NonpositiveUPlus",
            Reason::Supersonic => "Supersonic",
            Reason::OffCurve { .. } => "OffCurve",
            Reason::OutsideCurveRange { .. } => "OutsideCurveRange",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    /// `curve` is `None` for the constant layer `(u-, θ-) = (u+, θ+)`.
    Exists {
        regime: RegimeKind,
        curve: Option<CurveLabel>,
        parameter: f64,
    },
    NotExists {
        reason: Reason,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    /// `None` when the decision stopped before the regime was needed.
    pub regime: Option<Regime>,
    pub mach_plus: f64,
    /// Signed distance to the tested curve, when one was tested.
    pub distance: Option<f64>,
}

impl Verdict {
    pub fn exists(&self) -> bool {
        matches!(self.outcome, Outcome::Exists { .. })
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self.outcome, Outcome::Exists { curve: None, .. })
    }

    pub fn curve(&self) -> Option<CurveLabel> {
        match self.outcome {
            Outcome::Exists { curve, .. } => curve,
            Outcome::NotExists {
                reason: Reason::OffCurve { curve, .. } | Reason::OutsideCurveRange { curve },
            } => Some(curve),
            Outcome::NotExists { .. } => None,
        }
    }

    pub fn reason(&self) -> Option<Reason> {
        match self.outcome {
            Outcome::NotExists { reason } => Some(reason),
            Outcome::Exists { .. } => None,
        }
    }

    /// JSON with fields `outcome, reason, regime, mach_plus, curve, distance, decay`.
    pub fn to_json(&self, decay: Option<&DecayReport>) -> serde_json::Value {
        let (outcome, reason) = match self.outcome {
            Outcome::Exists { curve: None, .. } => ("Exists", Some("Trivial")),
            Outcome::Exists { .. } => ("Exists", None),
            Outcome::NotExists { reason } => ("NotExists", Some(reason.as_str())),
        };
        serde_json::json!({
            "outcome": outcome,
            "reason": reason,
            "regime": self.regime.map(|r| r.tag.as_str()),
            "mach_plus": self.mach_plus,
            "curve": self.curve().map(|c| c.as_str()),
            "distance": self.distance,
            "decay": decay.map(DecayReport::to_json),
        })
    }
}

/// Decision and profile machinery for one far-field state and gas. The
/// traced curves are computed on first use and shared afterwards.
#[derive(Debug)]
pub struct Engine {
    system: SystemData,
    tol: Tolerances,
    regime: Regime,
    trace: TraceOptions,
    sigma: OnceLock<Result<Curve>>,
    gamma1: OnceLock<Result<Curve>>,
    gamma2: OnceLock<Result<Curve>>,
}

impl Engine {
    pub fn new(gas: GasParams, right: EndState, tol: Tolerances) -> Result<Self> {
        Self::with_trace_options(gas, right, tol, TraceOptions::default())
    }

    pub fn with_trace_options(
        gas: GasParams,
        right: EndState,
        tol: Tolerances,
        trace: TraceOptions,
    ) -> Result<Self> {
        let system = build_system(gas, right)?;
        let regime = classify_regime(system.mach_plus, tol.tol_m);
        Ok(Self {
            system,
            tol,
            regime,
            trace,
            sigma: OnceLock::new(),
            gamma1: OnceLock::new(),
            gamma2: OnceLock::new(),
        })
    }

    pub fn system(&self) -> &SystemData {
        &self.system
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    pub fn frame(&self) -> Result<TransonicFrame> {
        transonic_frame(&self.system, self.tol.tol_m)
    }

    pub fn eigen(&self) -> Result<EigenPair> {
        eigen_2x2(&self.system.a)
    }

    /// Curves that exist in this regime.
    pub fn labels(&self) -> &'static [CurveLabel] {
        match self.regime.tag {
            RegimeKind::Supersonic => &[],
            RegimeKind::Transonic => &[CurveLabel::Sigma],
            RegimeKind::Subsonic => &[CurveLabel::Gamma1, CurveLabel::Gamma2],
        }
    }

    pub fn curve(&self, label: CurveLabel) -> Result<&Curve> {
        let s = &self.system;
        let cell = match label {
            CurveLabel::Sigma => &self.sigma,
            CurveLabel::Gamma1 => &self.gamma1,
            CurveLabel::Gamma2 => &self.gamma2,
        };
        let expected = match label {
            CurveLabel::Sigma => RegimeKind::Transonic,
            _ => RegimeKind::Subsonic,
        };
        if self.regime.tag != expected {
            return Err(Error::RegimeMismatch(format!(
                "{label} needs the {expected} regime, got {} (M+ = {})",
                self.regime.tag, s.mach_plus
            )));
        }
        let traced = cell.get_or_init(|| match label {
            CurveLabel::Sigma => trace_sigma(s, &self.frame()?, &self.trace),
            CurveLabel::Gamma1 => trace_gamma(s, &self.eigen()?, GammaBranch::Gamma1, &self.trace),
            CurveLabel::Gamma2 => trace_gamma(s, &self.eigen()?, GammaBranch::Gamma2, &self.trace),
        });
        traced.as_ref().map_err(Clone::clone)
    }

    fn is_trivial(&self, left: &EndState) -> bool {
        let s = &self.system;
        (left.u() - s.u_plus).abs() <= self.tol.tol_member * s.u_plus
            && (left.theta() - s.theta_plus).abs() <= self.tol.tol_member * s.theta_plus
    }

    /// Which curve a boundary point has to lie on.
    pub fn candidate(&self, left: &EndState) -> Option<CurveLabel> {
        match self.regime.tag {
            RegimeKind::Supersonic => None,
            RegimeKind::Transonic => Some(CurveLabel::Sigma),
            RegimeKind::Subsonic if left.u() <= self.system.u_plus => Some(CurveLabel::Gamma1),
            RegimeKind::Subsonic => Some(CurveLabel::Gamma2),
        }
    }

    pub fn decide(&self, left: &EndState) -> Result<Verdict> {
        let s = &self.system;
        let right = EndState::new(s.v_plus, s.u_plus, s.theta_plus)?;
        let flux = check_flux_condition(left, &right, self.tol.tol_a)?;
        let mut verdict = Verdict {
            outcome: Outcome::NotExists {
                reason: Reason::Supersonic,
            },
            regime: Some(self.regime),
            mach_plus: s.mach_plus,
            distance: None,
        };
        if let FluxCheck::Mismatch { gap, .. } = flux {
            verdict.outcome = Outcome::NotExists {
                reason: Reason::MassFluxMismatch { gap },
            };
            verdict.regime = None;
            return Ok(verdict);
        }
        if self.is_trivial(left) {
            verdict.outcome = Outcome::Exists {
                regime: self.regime.tag,
                curve: None,
                parameter: s.u_plus,
            };
            return Ok(verdict);
        }
        let Some(label) = self.candidate(left) else {
            return Ok(verdict);
        };
        let curve = self.curve(label)?;
        let p = PhasePoint::new(left.u(), left.theta());
        verdict.outcome = match curve.membership(p, self.tol.tol_member) {
            Ok(Membership::OnCurve {
                parameter,
                distance,
            }) => {
                verdict.distance = Some(distance);
                Outcome::Exists {
                    regime: self.regime.tag,
                    curve: Some(label),
                    parameter,
                }
            }
            Ok(Membership::OffCurve { distance, .. }) => {
                verdict.distance = Some(distance);
                Outcome::NotExists {
                    reason: Reason::OffCurve {
                        distance,
                        curve: label,
                    },
                }
            }
            Err(Error::OutOfRange { .. }) => Outcome::NotExists {
                reason: Reason::OutsideCurveRange { curve: label },
            },
            Err(e) => return Err(e),
        };
        Ok(verdict)
    }

    /// Profile through the boundary point of an `Exists` verdict.
    ///
    /// The orbit is shot backward from a seed `1e-10 · max(u+, θ+)` away from
    /// S1 until it reaches the boundary level, then reversed, so that ξ = 0 is
    /// the boundary and ξ increases toward S1.
    pub fn compute_profile(&self, left: &EndState, verdict: &Verdict) -> Result<Profile> {
        let s = &self.system;
        let label = match verdict.outcome {
            Outcome::Exists { curve: None, .. } => {
                return Ok(Profile::constant(s, self.regime.tag))
            }
            Outcome::Exists {
                curve: Some(label), ..
            } => label,
            Outcome::NotExists { reason } => {
                return Err(Error::RegimeMismatch(format!(
                    "no profile for a non-existing layer ({})",
                    reason.as_str()
                )))
            }
        };
        let target = PhasePoint::new(left.u(), left.theta());
        let eps = (1e-10 * s.scale()).min(1e-2 * target.dist(&s.s1()));
        let mut opts = self.trace;
        opts.thin = false;
        opts.rel_tol = opts.rel_tol.min(PROFILE_REL_TOL);
        let frame;
        let (seed, h_max) = match label {
            CurveLabel::Sigma => {
                frame = self.frame()?;
                (Seed::Sigma(&frame), f64::INFINITY)
            }
            CurveLabel::Gamma1 | CurveLabel::Gamma2 => {
                let eig = self.eigen()?;
                let branch = if label == CurveLabel::Gamma1 {
                    GammaBranch::Gamma1
                } else {
                    GammaBranch::Gamma2
                };
                (
                    Seed::Gamma(label, gamma_direction(&eig, branch)),
                    0.1 / eig.lambda2.abs(),
                )
            }
        };
        let stop = if label.parameterized_by_u() {
            Stop::ULevel(target.u)
        } else {
            Stop::ThetaLevel(target.theta)
        };
        let shot = shoot(s, &seed, eps, &opts, Some(stop), h_max)?;
        if shot.event != EventKind::Custom(STOP) {
            return Err(Error::ProfileDiverged(shot.end.dist(&target)));
        }
        let mismatch = if label.parameterized_by_u() {
            (shot.end.theta - target.theta).abs() / s.theta_plus
        } else {
            (shot.end.u - target.u).abs() / s.u_plus
        };
        if mismatch > 10.0 * self.tol.tol_member {
            return Err(Error::ProfileDiverged(mismatch));
        }

        let xi_end = *shot.xi.last().expect("non-empty shot");
        let n = shot.xi.len();
        let mut p = Profile {
            xi: Vec::with_capacity(n),
            v: Vec::with_capacity(n),
            u: Vec::with_capacity(n),
            theta: Vec::with_capacity(n),
            du: Vec::with_capacity(n),
            dtheta: Vec::with_capacity(n),
            checkpoints: Vec::with_capacity(shot.checkpoints.len()),
            curve: Some(label),
            regime: self.regime.tag,
            system: *s,
            start_mismatch: mismatch,
        };
        for i in (0..n).rev() {
            let st = shot.states[i];
            p.xi.push(shot.xi[i] - xi_end);
            p.v.push(s.volume(st.u));
            p.u.push(st.u);
            p.theta.push(st.theta);
            p.du.push(shot.derivs[i][0]);
            p.dtheta.push(shot.derivs[i][1]);
        }
        // the first sample sits exactly on ξ = 0
        p.xi[0] = 0.0;
        let mut cps: Vec<ProfileCheckpoint> = shot
            .checkpoints
            .iter()
            .map(|c| ProfileCheckpoint {
                xi: c.xi - xi_end,
                u: c.point.u,
                theta: c.point.theta,
                du: c.deriv[0],
                dtheta: c.deriv[1],
            })
            .collect();
        cps.sort_by(|a, b| a.xi.total_cmp(&b.xi));
        p.checkpoints = cps;
        Ok(p)
    }
}

/// Runs the full decision procedure for one query.
pub fn decide(q: &Query) -> Result<Verdict> {
    if q.left.u() <= 0.0 {
        return Err(Error::InvalidBoundary(format!(
            "boundary velocity u- = {} is not an inflow (u- > 0 required)",
            q.left.u()
        )));
    }
    if q.right.u() <= 0.0 {
        return Ok(Verdict {
            outcome: Outcome::NotExists {
                reason: Reason::NonpositiveUPlus,
            },
            regime: None,
            mach_plus: crate::gas::mach(&q.right, &q.gas),
            distance: None,
        });
    }
    Engine::new(q.gas, q.right, q.tol)?.decide(&q.left)
}

/// Profile for a query whose verdict is `Exists`.
pub fn compute_profile(q: &Query, verdict: &Verdict) -> Result<Profile> {
    Engine::new(q.gas, q.right, q.tol)?.compute_profile(&q.left, verdict)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileCheckpoint {
    pub xi: f64,
    pub u: f64,
    pub theta: f64,
    pub du: f64,
    pub dtheta: f64,
}

/// Layer `(V, U, Θ)(ξ)` on the integrator's own grid, ξ increasing from 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Profile {
    pub xi: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
    pub du: Vec<f64>,
    pub dtheta: Vec<f64>,
    /// Dense-output evaluations at step midpoints.
    pub checkpoints: Vec<ProfileCheckpoint>,
    /// `None` for the constant layer.
    pub curve: Option<CurveLabel>,
    pub regime: RegimeKind,
    pub system: SystemData,
    /// Relative gap between the requested boundary point and the profile start.
    pub start_mismatch: f64,
}

impl Profile {
    fn constant(s: &SystemData, regime: RegimeKind) -> Self {
        Self {
            xi: vec![0.0],
            v: vec![s.v_plus],
            u: vec![s.u_plus],
            theta: vec![s.theta_plus],
            du: vec![0.0],
            dtheta: vec![0.0],
            checkpoints: Vec::new(),
            curve: None,
            regime,
            system: *s,
            start_mismatch: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.curve.is_none()
    }

    pub fn end(&self) -> PhasePoint {
        let n = self.len() - 1;
        PhasePoint::new(self.u[n], self.theta[n])
    }

    /// Distance of the last sample from S1.
    pub fn endpoint_distance(&self) -> f64 {
        self.end().dist(&self.system.s1())
    }

    /// Strict signs `(V', U', Θ')` expected on this profile's curve.
    pub fn expected_signs(&self) -> Option<[f64; 3]> {
        match self.curve? {
            CurveLabel::Sigma | CurveLabel::Gamma1 => Some([1.0, 1.0, -1.0]),
            CurveLabel::Gamma2 => Some([-1.0, -1.0, 1.0]),
        }
    }

    /// Checks the derivative signs at every sample.
    pub fn monotone_ok(&self) -> bool {
        let Some(sg) = self.expected_signs() else {
            return true;
        };
        let k = self.system.v_plus / self.system.u_plus;
        (0..self.len()).all(|i| {
            k * self.du[i] * sg[0] > 0.0 && self.du[i] * sg[1] > 0.0 && self.dtheta[i] * sg[2] > 0.0
        })
    }

    /// `xi,V,U,Theta` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(e.to_string());
        writeln!(w, "xi,V,U,Theta").map_err(io)?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{}",
                self.xi[i], self.v[i], self.u[i], self.theta[i]
            )
            .map_err(io)?;
        }
        Ok(())
    }
}

/// Residuals of the two integrated equations at one state, in the units of
/// the equations themselves.
pub fn equation_residuals(s: &SystemData, u: f64, theta: f64, du: f64, dtheta: f64) -> [f64; 2] {
    let (g, r, mu, kappa) = (s.gas.gamma(), s.gas.r(), s.gas.mu(), s.gas.kappa());
    let v = s.volume(u);
    let sig = s.sigma_minus;
    let x = u - s.u_plus;
    let r1 = mu * du / v - (-sig * x + r * (theta / v - s.theta_plus / s.v_plus));
    let r2 = kappa * dtheta / v
        - (-sig * r / (g - 1.0) * (theta - s.theta_plus) + s.p_plus * x + 0.5 * sig * x * x);
    [r1, r2]
}

/// Scaled sup norm of both equation residuals over samples and checkpoints.
pub fn verify_residual(p: &Profile, s: &SystemData) -> f64 {
    if p.is_trivial() {
        return 0.0;
    }
    let scale = (s.sigma_minus.abs() * s.u_plus).max(s.p_plus * s.u_plus);
    let rows = (0..p.len()).map(|i| (p.u[i], p.theta[i], p.du[i], p.dtheta[i]));
    let cps = p.checkpoints.iter().map(|c| (c.u, c.theta, c.du, c.dtheta));
    rows.chain(cps)
        .map(|(u, th, du, dth)| {
            let r = equation_residuals(s, u, th, du, dth);
            r[0].abs().max(r[1].abs())
        })
        .fold(0.0, f64::max)
        / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DecayReport {
    NotApplicable,
    /// `|U - u+| ≈ C e^{-c ξ}`.
    Exponential {
        rate: f64,
        expected: f64,
        constant: f64,
        samples: usize,
        ok: bool,
    },
    /// `|U - u+| ≈ C ξ^{exponent}`, with `ξ (u+ - U) → 1/a2`.
    Algebraic {
        exponent: f64,
        derivative_exponent: f64,
        /// Range of `ξ (u+ - U)` over the tail.
        product_min: f64,
        product_max: f64,
        expected_product: f64,
        constant: f64,
        samples: usize,
        ok: bool,
    },
}

impl DecayReport {
    pub fn ok(&self) -> bool {
        match *self {
            DecayReport::NotApplicable => true,
            DecayReport::Exponential { ok, .. } | DecayReport::Algebraic { ok, .. } => ok,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

/// Minimum number of samples in a decay fit window.
pub const MIN_TAIL: usize = 50;

/// Fits the approach of `U` to `u+` over the tail of the profile.
pub fn verify_decay(p: &Profile) -> Result<DecayReport> {
    if p.is_trivial() {
        return Ok(DecayReport::NotApplicable);
    }
    let s = &p.system;
    match p.regime {
        RegimeKind::Supersonic => Ok(DecayReport::NotApplicable),
        RegimeKind::Subsonic => {
            let lambda = eigen_2x2(&s.a)?.lambda2;
            let (xs, ys): (Vec<f64>, Vec<f64>) = (0..p.len())
                .filter_map(|i| {
                    let d = (p.u[i] - s.u_plus).abs();
                    (d > 0.0 && d <= 1e-3 * s.u_plus).then(|| (p.xi[i], d.ln()))
                })
                .unzip();
            if xs.len() < MIN_TAIL {
                return Err(Error::TailTooShort(xs.len()));
            }
            let (slope, intercept) = linear_fit(&xs, &ys);
            let rate = -slope;
            let expected = lambda.abs();
            Ok(DecayReport::Exponential {
                rate,
                expected,
                constant: intercept.exp(),
                samples: xs.len(),
                ok: ((rate - expected) / expected).abs() <= 0.05,
            })
        }
        RegimeKind::Transonic => {
            // band membership was settled by the verdict
            let frame = transonic_frame(s, (s.mach_plus - 1.0).abs() + f64::EPSILON)?;
            let xi_max = *p.xi.last().expect("non-empty profile");
            let idx: Vec<usize> = (0..p.len())
                .filter(|&i| p.xi[i] >= 1e-3 * xi_max && p.xi[i] > 0.0 && p.u[i] < s.u_plus)
                .collect();
            if idx.len() < MIN_TAIL {
                return Err(Error::TailTooShort(idx.len()));
            }
            let lx: Vec<f64> = idx.iter().map(|&i| p.xi[i].ln()).collect();
            let ly: Vec<f64> = idx.iter().map(|&i| (s.u_plus - p.u[i]).ln()).collect();
            let ld: Vec<f64> = idx.iter().map(|&i| p.du[i].abs().ln()).collect();
            let (exponent, intercept) = linear_fit(&lx, &ly);
            let (derivative_exponent, _) = linear_fit(&lx, &ld);
            let prods = idx.iter().map(|&i| p.xi[i] * (s.u_plus - p.u[i]));
            let (pmin, pmax) = prods.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            });
            let ok = (exponent + 1.0).abs() <= 0.1
                && (derivative_exponent + 2.0).abs() <= 0.2
                && (pmin * frame.a2 - 1.0).abs() <= 0.1
                && (pmax * frame.a2 - 1.0).abs() <= 0.1;
            Ok(DecayReport::Algebraic {
                exponent,
                derivative_exponent,
                product_min: pmin,
                product_max: pmax,
                expected_product: 1.0 / frame.a2,
                constant: intercept.exp(),
                samples: idx.len(),
                ok,
            })
        }
    }
}
