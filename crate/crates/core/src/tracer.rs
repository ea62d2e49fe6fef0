//! Existence curves through the far-field equilibrium: the saddle-node orbit
//! Σ (transonic) and the stable-manifold branches Γ1, Γ2 (subsonic), traced
//! by backward shooting from S1.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, EventKind, EventSpec, IntegrationSettings, Trigger};
use crate::linear::{solve_slow_graph, EigenPair, TransonicFrame};
use crate::system::{mat_vec, PhasePoint, SystemData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveLabel {
    Sigma,
    Gamma1,
    Gamma2,
}

impl CurveLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveLabel::Sigma => "Sigma",
            CurveLabel::Gamma1 => "Gamma1",
            CurveLabel::Gamma2 => "Gamma2",
        }
    }

    /// Σ and Γ1 are graphs over `u`, Γ2 over `θ`.
    pub fn parameterized_by_u(&self) -> bool {
        !matches!(self, CurveLabel::Gamma2)
    }
}

impl std::fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaBranch {
    Gamma1,
    Gamma2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Terminal {
    HitUAxis(PhasePoint),
    HitThetaAxis(PhasePoint),
    /// Last sample, inside the capture radius of S2.
    ConvergedToS2(PhasePoint),
    Budget(PhasePoint),
}

impl Terminal {
    pub fn kind(&self) -> &'static str {
        match self {
            Terminal::HitUAxis(_) => "HitUAxis",
            Terminal::HitThetaAxis(_) => "HitThetaAxis",
            Terminal::ConvergedToS2(_) => "ConvergedToS2",
            Terminal::Budget(_) => "Budget",
        }
    }

    pub fn point(&self) -> PhasePoint {
        match *self {
            Terminal::HitUAxis(p)
            | Terminal::HitThetaAxis(p)
            | Terminal::ConvergedToS2(p)
            | Terminal::Budget(p) => p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Seed distance from S1; `None` means `1e-6 · max(u+, θ+)`.
    pub seed_offset: Option<f64>,
    pub rel_tol: f64,
    pub max_steps: usize,
    /// S2 capture radius relative to `max(u+, θ+)`.
    pub capture_radius: f64,
    /// Σ only: `|W1|` below which the flow is reduced to the slow graph,
    /// relative to `u+`.
    pub switch_radius: f64,
    /// Drop samples closer than this (relative) spacing in the curve parameter.
    pub thin: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            seed_offset: None,
            rel_tol: 1e-10,
            max_steps: 1_000_000,
            capture_radius: 1e-8,
            switch_radius: 1e-4,
            thin: true,
        }
    }
}

impl TraceOptions {
    pub fn seed_for(&self, s: &SystemData) -> f64 {
        self.seed_offset.unwrap_or(1e-6 * s.scale())
    }
}

/// A traced existence curve, ordered from S1 outward.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Curve {
    pub label: CurveLabel,
    pub samples: Vec<PhasePoint>,
    /// Backward ξ of each sample, measured from the seed (non-positive).
    pub xi: Vec<f64>,
    pub terminal: Terminal,
    pub seed_offset: f64,
    /// Σ only: estimate `1/(a2 ε)` of the forward ξ from the seed to S1.
    pub xi_offset: f64,
    pub system: SystemData,
    pub frame: Option<TransonicFrame>,
    pub options: TraceOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Membership {
    OnCurve { parameter: f64, distance: f64 },
    OffCurve { parameter: f64, distance: f64 },
}

impl Membership {
    pub fn is_on(&self) -> bool {
        matches!(self, Membership::OnCurve { .. })
    }

    /// Signed distance in the non-parameter coordinate.
    pub fn distance(&self) -> f64 {
        match *self {
            Membership::OnCurve { distance, .. } | Membership::OffCurve { distance, .. } => {
                distance
            }
        }
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            Membership::OnCurve { parameter, .. } | Membership::OffCurve { parameter, .. } => {
                parameter
            }
        }
    }
}

/// Where a shot ends besides the curve's own terminal events.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Stop {
    ULevel(f64),
    ThetaLevel(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Checkpoint {
    pub xi: f64,
    pub point: PhasePoint,
    pub deriv: [f64; 2],
}

/// Raw output of one backward shot, unthinned.
#[derive(Debug, Clone)]
pub(crate) struct Shot {
    pub xi: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub derivs: Vec<[f64; 2]>,
    pub checkpoints: Vec<Checkpoint>,
    pub event: EventKind,
    pub end: PhasePoint,
}

const SWITCH: u32 = 1;
pub(crate) const STOP: u32 = 2;

pub(crate) enum Seed<'a> {
    Sigma(&'a TransonicFrame),
    /// Unit deviation direction at S1.
    Gamma(CurveLabel, [f64; 2]),
}

impl Seed<'_> {
    fn label(&self) -> CurveLabel {
        match self {
            Seed::Sigma(_) => CurveLabel::Sigma,
            Seed::Gamma(l, _) => *l,
        }
    }
}

fn stop_event<'a>(s: &SystemData, stop: Stop) -> EventSpec<'a> {
    let (up, tp) = (s.u_plus, s.theta_plus);
    match stop {
        Stop::ULevel(l) => EventSpec::custom(EventKind::Custom(STOP), Trigger::Either, move |d| {
            d[0] + up - l
        }),
        Stop::ThetaLevel(l) => {
            EventSpec::custom(EventKind::Custom(STOP), Trigger::Either, move |d| {
                d[1] + tp - l
            })
        }
    }
}

fn terminal_events<'a>(s: &'a SystemData, label: CurveLabel, capture: f64) -> Vec<EventSpec<'a>> {
    let (up, tp) = (s.u_plus, s.theta_plus);
    let scale2 = s.scale() * s.scale();
    let mut ev = vec![
        EventSpec::custom(EventKind::UCrossesZero, Trigger::Either, move |d| d[0] + up),
        EventSpec::custom(EventKind::ThetaCrossesZero, Trigger::Either, move |d| {
            d[1] + tp
        }),
        EventSpec::left_region(move |d| s.nullcline_indicator(*d) / scale2),
    ];
    if label == CurveLabel::Gamma2 {
        let s2 = s.s2();
        let target = [s2.u - up, s2.theta - tp];
        ev.push(EventSpec::custom(
            EventKind::NearEquilibrium(s2),
            Trigger::Falling,
            move |d| (d[0] - target[0]).hypot(d[1] - target[1]) - capture,
        ));
    }
    ev
}

fn to_point(s: &SystemData, d: [f64; 2]) -> PhasePoint {
    PhasePoint::new(s.u_plus + d[0], s.theta_plus + d[1])
}

/// Backward shot from the seed at distance `eps` until a terminal event or `stop`.
pub(crate) fn shoot(
    s: &SystemData,
    seed: &Seed<'_>,
    eps: f64,
    opts: &TraceOptions,
    stop: Option<Stop>,
    h_max: f64,
) -> Result<Shot> {
    let label = seed.label();
    let capture = opts.capture_radius * s.scale();
    let mut shot = Shot {
        xi: Vec::new(),
        states: Vec::new(),
        derivs: Vec::new(),
        checkpoints: Vec::new(),
        event: EventKind::Budget,
        end: s.s1(),
    };
    let base = IntegrationSettings {
        rel_tol: opts.rel_tol,
        abs_tol: opts.rel_tol * eps * 1e-2,
        h_max,
        max_steps: opts.max_steps,
        ..Default::default()
    }
    .backward();

    let (d0, xi0, steps_used) = match seed {
        Seed::Gamma(_, dir) => ([eps * dir[0], eps * dir[1]], 0.0, 0),
        Seed::Sigma(frame) => {
            let reduced = ReducedFlow::new(s, frame);
            let switch = opts.switch_radius * s.u_plus;
            let w_seed = -eps;
            if w_seed.abs() >= switch {
                let d = reduced.deviation(w_seed);
                (d, 0.0, 0)
            } else {
                let mut events = vec![EventSpec::custom(
                    EventKind::Custom(SWITCH),
                    Trigger::Either,
                    move |y| y[0] + switch,
                )];
                if let Some(st) = stop {
                    let r = &reduced;
                    let (up, tp) = (s.u_plus, s.theta_plus);
                    events.push(EventSpec::custom(
                        EventKind::Custom(STOP),
                        Trigger::Either,
                        move |y| {
                            let d = r.deviation(y[0]);
                            match st {
                                Stop::ULevel(l) => d[0] + up - l,
                                Stop::ThetaLevel(l) => d[1] + tp - l,
                            }
                        },
                    ));
                }
                let traj = integrate(
                    |y| [reduced.psi(y[0]), 0.0],
                    PhasePoint::new(w_seed, 0.0),
                    &base,
                    &events,
                )?;
                for (i, &x) in traj.xi.iter().enumerate() {
                    let w1 = traj.states[i].u;
                    shot.xi.push(x);
                    shot.states.push(to_point(s, reduced.deviation(w1)));
                    shot.derivs.push(reduced.tangent(w1, traj.derivs[i][0]));
                }
                for seg in &traj.segments {
                    let xm = seg.midpoint();
                    let (y, dy) = seg.eval(xm);
                    shot.checkpoints.push(Checkpoint {
                        xi: xm,
                        point: to_point(s, reduced.deviation(y[0])),
                        deriv: reduced.tangent(y[0], dy[0]),
                    });
                }
                match traj.event.kind {
                    EventKind::Custom(SWITCH) => {}
                    EventKind::Custom(STOP) => {
                        shot.event = EventKind::Custom(STOP);
                        shot.end = shot.last();
                        return Ok(shot);
                    }
                    other => {
                        shot.event = other;
                        shot.end = shot.last();
                        return Ok(shot);
                    }
                }
                let d = reduced.deviation(traj.event.point.u);
                (d, traj.event.xi, traj.steps)
            }
        }
    };

    let mut events = terminal_events(s, label, capture);
    if let Some(st) = stop {
        events.push(stop_event(s, st));
    }
    let settings = IntegrationSettings {
        abs_tol: opts.rel_tol * d0[0].hypot(d0[1]) * 1e-2,
        max_steps: opts.max_steps.saturating_sub(steps_used).max(1),
        ..base
    };
    let traj = integrate(
        |d| s.rhs_deviation(d),
        PhasePoint::from_array(d0),
        &settings,
        &events,
    )?;
    let skip = usize::from(!shot.xi.is_empty());
    for i in skip..traj.xi.len() {
        shot.xi.push(xi0 + traj.xi[i]);
        shot.states.push(to_point(s, traj.states[i].to_array()));
        shot.derivs.push(traj.derivs[i]);
    }
    for seg in &traj.segments {
        let xm = seg.midpoint();
        let (y, dy) = seg.eval(xm);
        shot.checkpoints.push(Checkpoint {
            xi: xi0 + xm,
            point: to_point(s, y),
            deriv: dy,
        });
    }
    shot.event = traj.event.kind;
    shot.end = shot.last();
    Ok(shot)
}

impl Shot {
    fn last(&self) -> PhasePoint {
        *self.states.last().expect("shot holds at least the seed")
    }
}

/// The layer field restricted to the slow graph `W2 = φ(W1)` of the
/// transonic equilibrium, with the exact linear part of the field.
pub(crate) struct ReducedFlow<'a> {
    s: &'a SystemData,
    frame: &'a TransonicFrame,
}

impl<'a> ReducedFlow<'a> {
    pub(crate) fn new(s: &'a SystemData, frame: &'a TransonicFrame) -> Self {
        Self { s, frame }
    }

    fn w_field(&self, w: [f64; 2]) -> [f64; 2] {
        mat_vec(
            &self.frame.p_inv,
            self.s.rhs_deviation(mat_vec(&self.frame.p, w)),
        )
    }

    fn phi(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        solve_slow_graph(&|a, b| self.w_field([a, b])[1], 0.0, x, 0.0).unwrap_or(f64::NAN)
    }

    pub(crate) fn psi(&self, x: f64) -> f64 {
        self.w_field([x, self.phi(x)])[0]
    }

    pub(crate) fn deviation(&self, x: f64) -> [f64; 2] {
        mat_vec(&self.frame.p, [x, self.phi(x)])
    }

    /// Phase-plane velocity of a point moving along the graph with `W1' = dx`.
    fn tangent(&self, x: f64, dx: f64) -> [f64; 2] {
        let h = 1e-3 * x.abs();
        let dphi = if h > 0.0 {
            (self.phi(x + h) - self.phi(x - h)) / (2.0 * h)
        } else {
            0.0
        };
        mat_vec(&self.frame.p, [dx, dphi * dx])
    }
}

fn curve_parameter(label: CurveLabel, p: PhasePoint) -> (f64, f64) {
    if label.parameterized_by_u() {
        (p.u, p.theta)
    } else {
        (p.theta, p.u)
    }
}

fn thin(
    label: CurveLabel,
    s: &SystemData,
    samples: &[PhasePoint],
    xi: &[f64],
) -> (Vec<PhasePoint>, Vec<f64>) {
    let n = samples.len();
    if n <= 2 {
        return (samples.to_vec(), xi.to_vec());
    }
    let (base, origin) = if label.parameterized_by_u() {
        (1e-5 * s.u_plus, s.u_plus)
    } else {
        (1e-5 * s.theta_plus, s.theta_plus)
    };
    let mut out = vec![samples[0]];
    let mut out_xi = vec![xi[0]];
    let mut last = curve_parameter(label, samples[0]).0;
    for i in 1..n - 1 {
        let t = curve_parameter(label, samples[i]).0;
        let spacing = base.min(0.01 * (t - origin).abs());
        if (t - last).abs() >= spacing {
            out.push(samples[i]);
            out_xi.push(xi[i]);
            last = t;
        }
    }
    out.push(samples[n - 1]);
    out_xi.push(xi[n - 1]);
    (out, out_xi)
}

fn build_curve(s: &SystemData, seed: Seed<'_>, opts: &TraceOptions) -> Result<Curve> {
    let label = seed.label();
    let eps = opts.seed_for(s);
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::param(
            "seed_offset",
            format!("must be positive, got {eps}"),
        ));
    }
    let shot = shoot(s, &seed, eps, opts, None, f64::INFINITY)?;
    let end = shot.end;
    let capture = opts.capture_radius * s.scale();
    let terminal = match shot.event {
        EventKind::UCrossesZero => Terminal::HitUAxis(end),
        EventKind::ThetaCrossesZero => Terminal::HitThetaAxis(end),
        EventKind::NearEquilibrium(_) => {
            if s.s2().theta.abs() <= capture {
                Terminal::HitThetaAxis(end)
            } else {
                Terminal::ConvergedToS2(end)
            }
        }
        EventKind::LeftRegion => {
            return Err(Error::TraceFailed {
                curve: label.as_str(),
                reason: format!(
                    "left the region between the nullclines at ({}, {})",
                    end.u, end.theta
                ),
            })
        }
        _ => Terminal::Budget(end),
    };

    let expected = match label {
        CurveLabel::Sigma | CurveLabel::Gamma1 => Some("HitUAxis"),
        CurveLabel::Gamma2 => {
            let th2 = s.s2().theta;
            if th2 > capture {
                Some("ConvergedToS2")
            } else if th2 < -capture {
                Some("HitThetaAxis")
            } else {
                None
            }
        }
    };
    if let (Some(exp), false) = (expected, matches!(terminal, Terminal::Budget(_))) {
        let near_boundary = label == CurveLabel::Gamma2 && s.s2().theta.abs() <= 1e3 * capture;
        if terminal.kind() != exp && !near_boundary {
            return Err(Error::UnexpectedTerminal {
                curve: label.as_str(),
                expected: exp,
                got: terminal.kind().to_string(),
            });
        }
    }

    let (samples, xi) = if opts.thin {
        thin(label, s, &shot.states, &shot.xi)
    } else {
        (shot.states, shot.xi)
    };
    let (frame, xi_offset) = match seed {
        Seed::Sigma(f) => (Some(*f), 1.0 / (f.a2 * eps)),
        Seed::Gamma(..) => (None, 0.0),
    };
    Ok(Curve {
        label,
        samples,
        xi,
        terminal,
        seed_offset: eps,
        xi_offset,
        system: *s,
        frame,
        options: *opts,
    })
}

/// Traces Σ backward from S1 along the negative center direction.
pub fn trace_sigma(s: &SystemData, frame: &TransonicFrame, opts: &TraceOptions) -> Result<Curve> {
    build_curve(s, Seed::Sigma(frame), opts)
}

/// Unit deviation direction in which a stable branch leaves S1.
pub(crate) fn gamma_direction(eig: &EigenPair, branch: GammaBranch) -> [f64; 2] {
    // normalized eigenvectors have a positive u-component
    let e = eig.e2;
    match branch {
        GammaBranch::Gamma1 => [-e[0], -e[1]],
        GammaBranch::Gamma2 => e,
    }
}

/// Traces a stable-manifold branch of the subsonic saddle S1.
pub fn trace_gamma(
    s: &SystemData,
    eig: &EigenPair,
    branch: GammaBranch,
    opts: &TraceOptions,
) -> Result<Curve> {
    if s.mach_plus >= 1.0 || eig.lambda2 >= 0.0 {
        return Err(Error::RegimeMismatch(format!(
            "stable branches need a saddle at S1 (M+ < 1), got M+ = {}",
            s.mach_plus
        )));
    }
    let label = match branch {
        GammaBranch::Gamma1 => CurveLabel::Gamma1,
        GammaBranch::Gamma2 => CurveLabel::Gamma2,
    };
    build_curve(s, Seed::Gamma(label, gamma_direction(eig, branch)), opts)
}

/// Piecewise-cubic Hermite interpolant over increasing knots, with
/// Fritsch-Carlson slopes unless exact ones are supplied.
#[derive(Debug, Clone)]
pub(crate) struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub(crate) fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = del[0];
            d[1] = del[0];
        } else {
            for k in 1..n - 1 {
                if del[k - 1] * del[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
                }
            }
            d[0] = Self::edge(h[0], h[1], del[0], del[1]);
            d[n - 1] = Self::edge(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        }
        Self { x, y, d }
    }

    fn edge(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
        let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
        if d.signum() != m0.signum() {
            0.0
        } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
            3.0 * m0
        } else {
            d
        }
    }

    /// Replaces the slope at every knot where `slope` returns a finite value.
    pub(crate) fn with_slopes(mut self, slope: impl Fn(usize) -> Option<f64>) -> Self {
        for k in 0..self.d.len() {
            if let Some(d) = slope(k).filter(|d| d.is_finite()) {
                self.d[k] = d;
            }
        }
        self
    }

    pub(crate) fn range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    pub(crate) fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (y0, y1, d0, d1) = (self.y[k], self.y[k + 1], self.d[k], self.d[k + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * d1
    }
}

impl Curve {
    /// Σ only: forward ξ still needed from sample `i` to reach S1, up to a
    /// bounded shift (`xi_offset - |ξ_i|`).
    pub fn xi_eff(&self, i: usize) -> f64 {
        self.xi_offset - self.xi[i].abs()
    }

    /// Curve parameter (`u` for Σ/Γ1, `θ` for Γ2) at S1 and at the far end.
    pub fn parameter_span(&self) -> (f64, f64) {
        let s1 = curve_parameter(self.label, self.system.s1()).0;
        let end = curve_parameter(self.label, self.terminal.point()).0;
        (s1, end)
    }

    fn interpolant(&self) -> Pchip {
        // S1 closes the gap to the seed
        let mut knots: Vec<(f64, f64)> = std::iter::once(self.system.s1())
            .chain(self.samples.iter().copied())
            .map(|p| curve_parameter(self.label, p))
            .collect();
        let decreasing = knots.len() > 1 && knots[1].0 < knots[0].0;
        if decreasing {
            knots.reverse();
        }
        let mut x = Vec::with_capacity(knots.len());
        let mut y = Vec::with_capacity(knots.len());
        for (t, v) in knots {
            if x.last().is_none_or(|&l| t > l) {
                x.push(t);
                y.push(v);
            }
        }
        // exact tangent slopes from the field, except at S1 where it vanishes
        let s = &self.system;
        let s1 = curve_parameter(self.label, s.s1()).0;
        let by_u = self.label.parameterized_by_u();
        let slopes: Vec<Option<f64>> = x
            .iter()
            .zip(&y)
            .map(|(&t, &v)| {
                if t == s1 {
                    return None;
                }
                let p = if by_u {
                    PhasePoint::new(t, v)
                } else {
                    PhasePoint::new(v, t)
                };
                let f = s.rhs_poly(p);
                Some(if by_u { f[1] / f[0] } else { f[0] / f[1] })
            })
            .collect();
        Pchip::new(x, y).with_slopes(|k| slopes[k])
    }

    /// Interpolated curve value at parameter `t`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let p = self.interpolant();
        let (lo, hi) = p.range();
        if t < lo || t > hi {
            return Err(Error::OutOfRange { value: t, lo, hi });
        }
        Ok(p.eval(t))
    }

    fn param_scale(&self) -> f64 {
        if self.label.parameterized_by_u() {
            self.system.theta_plus
        } else {
            self.system.u_plus
        }
    }

    /// Re-integrates from the seed to the level of `t` and returns the curve value there.
    fn refine(&self, t: f64) -> Result<f64> {
        let s = &self.system;
        let stop = if self.label.parameterized_by_u() {
            Stop::ULevel(t)
        } else {
            Stop::ThetaLevel(t)
        };
        let seed_param = curve_parameter(self.label, self.samples[0]).0;
        let s1_param = curve_parameter(self.label, s.s1()).0;
        if (t - s1_param).abs() <= (seed_param - s1_param).abs() {
            return self.value_at(t);
        }
        let seed = match (&self.frame, self.label) {
            (Some(f), CurveLabel::Sigma) => Seed::Sigma(f),
            _ => {
                let dir = [
                    (self.samples[0].u - s.u_plus) / self.seed_offset,
                    (self.samples[0].theta - s.theta_plus) / self.seed_offset,
                ];
                Seed::Gamma(self.label, dir)
            }
        };
        let mut opts = self.options;
        opts.thin = false;
        let shot = shoot(s, &seed, self.seed_offset, &opts, Some(stop), f64::INFINITY)?;
        if shot.event != EventKind::Custom(STOP) {
            return self.value_at(t);
        }
        Ok(curve_parameter(self.label, shot.end).1)
    }

    fn u_extent(&self) -> (f64, f64) {
        std::iter::once(self.system.s1())
            .chain(self.samples.iter().copied())
            .chain(std::iter::once(self.terminal.point()))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), q| {
                (a.min(q.u), b.max(q.u))
            })
    }

    /// Decides whether `p` lies on the curve within `tol` relative to `θ+`
    /// (Σ, Γ1) or `u+` (Γ2).
    pub fn membership(&self, p: PhasePoint, tol: f64) -> Result<Membership> {
        if !(p.u > 0.0 && p.theta > 0.0) {
            return Err(Error::DomainError(format!(
                "membership needs u > 0 and theta > 0, got ({}, {})",
                p.u, p.theta
            )));
        }
        let (t, v) = curve_parameter(self.label, p);
        let (s1_param, end_param) = self.parameter_span();
        let (lo, hi) = if s1_param < end_param {
            (s1_param, end_param)
        } else {
            (end_param, s1_param)
        };
        // the axis end point is excluded
        let excluded_end = !matches!(
            self.terminal,
            Terminal::ConvergedToS2(_) | Terminal::Budget(_)
        );
        let outside = t < lo || t > hi || (excluded_end && t == end_param);
        if outside {
            // Γ2 is a graph over θ but is picked by u: a point inside its u
            // extent with θ beyond the curve is off the curve, not out of range
            let (u_lo, u_hi) = self.u_extent();
            if self.label.parameterized_by_u() || !(p.u > u_lo && p.u < u_hi) {
                return Err(Error::OutOfRange { value: t, lo, hi });
            }
            let t = t.clamp(lo, hi);
            return Ok(Membership::OffCurve {
                parameter: t,
                distance: v - self.value_at(t)?,
            });
        }
        let band = tol * self.param_scale();
        let mut dist = v - self.value_at(t)?;
        if dist.abs() <= 10.0 * band {
            dist = v - self.refine(t)?;
        }
        Ok(if dist.abs() <= band {
            Membership::OnCurve {
                parameter: t,
                distance: dist,
            }
        } else {
            Membership::OffCurve {
                parameter: t,
                distance: dist,
            }
        })
    }

    /// Free-function form of [`Curve::membership`].
    pub fn contains(&self, p: PhasePoint, tol: f64) -> Result<bool> {
        Ok(self.membership(p, tol)?.is_on())
    }

    /// `index,u,theta` rows in backward-ξ order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e: std::io::Error| Error::Io(e.to_string());
        writeln!(w, "index,u,theta").map_err(io)?;
        for (i, p) in self.samples.iter().enumerate() {
            writeln!(w, "{i},{},{}", p.u, p.theta).map_err(io)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let t = self.terminal.point();
        serde_json::json!({
            "label": self.label.as_str(),
            "terminal": self.terminal.kind(),
            "terminal_point": { "u": t.u, "theta": t.theta },
            "seed_offset": self.seed_offset,
            "samples": self.samples.len(),
        })
    }
}

/// Free-function form of [`Curve::membership`].
pub fn curve_membership(c: &Curve, p: PhasePoint, tol: f64) -> Result<Membership> {
    c.membership(p, tol)
}
