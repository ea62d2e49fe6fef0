//! Adaptive Dormand–Prince 5(4) integration of planar autonomous fields with
//! dense output and event location.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::PhasePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial step magnitude; estimated from the field when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    pub direction: Direction,
    /// Optional length of the integration interval in `|ξ|`.
    pub horizon: Option<f64>,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
            direction: Direction::Forward,
            horizon: None,
        }
    }
}

impl IntegrationSettings {
    pub fn backward(mut self) -> Self {
        self.direction = Direction::Backward;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::param(
                "tolerance",
                "rel_tol and abs_tol must be positive",
            ));
        }
        if self.max_steps < 1 {
            return Err(Error::param("max_steps", "must be at least 1"));
        }
        if !(self.h_max > 0.0) {
            return Err(Error::param("h_max", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    UCrossesZero,
    ThetaCrossesZero,
    ULevel(f64),
    ThetaLevel(f64),
    NearEquilibrium(PhasePoint),
    LeftRegion,
    Horizon,
    Budget,
    /// Caller-defined event, told apart by its tag.
    Custom(u32),
}

/// When an event function counts as triggered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trigger {
    /// `g <= 0`.
    Falling,
    /// `g >= 0`.
    Rising,
    /// `g` changes sign.
    Either,
}

type EventFn<'a> = Box<dyn Fn(&[f64; 2]) -> f64 + Send + Sync + 'a>;

pub struct EventSpec<'a> {
    pub kind: EventKind,
    func: EventFn<'a>,
    trigger: Trigger,
    /// For [`Trigger::Either`]: a start with `|g| <= zero_tol` triggers at once.
    zero_tol: f64,
}

impl<'a> EventSpec<'a> {
    pub fn custom(
        kind: EventKind,
        trigger: Trigger,
        f: impl Fn(&[f64; 2]) -> f64 + Send + Sync + 'a,
    ) -> Self {
        Self {
            kind,
            func: Box::new(f),
            trigger,
            zero_tol: 1e-12,
        }
    }

    pub fn with_zero_tol(mut self, tol: f64) -> Self {
        self.zero_tol = tol;
        self
    }

    pub fn u_crosses_zero() -> Self {
        Self::custom(EventKind::UCrossesZero, Trigger::Either, |y| y[0])
    }

    pub fn theta_crosses_zero() -> Self {
        Self::custom(EventKind::ThetaCrossesZero, Trigger::Either, |y| y[1])
    }

    pub fn u_level(level: f64) -> Self {
        Self::custom(EventKind::ULevel(level), Trigger::Either, move |y| {
            y[0] - level
        })
    }

    pub fn theta_level(level: f64) -> Self {
        Self::custom(EventKind::ThetaLevel(level), Trigger::Either, move |y| {
            y[1] - level
        })
    }

    pub fn near_equilibrium(target: PhasePoint, radius: f64) -> Self {
        Self::custom(
            EventKind::NearEquilibrium(target),
            Trigger::Falling,
            move |y| (y[0] - target.u).hypot(y[1] - target.theta) - radius,
        )
    }

    /// `indicator` is negative inside the region.
    pub fn left_region(indicator: impl Fn(&[f64; 2]) -> f64 + Send + Sync + 'a) -> Self {
        Self::custom(EventKind::LeftRegion, Trigger::Rising, indicator)
    }

    fn eval(&self, y: &[f64; 2]) -> f64 {
        (self.func)(y)
    }

    fn fired(&self, g: f64, g_ref: f64) -> bool {
        match self.trigger {
            Trigger::Falling => g <= 0.0,
            Trigger::Rising => g >= 0.0,
            Trigger::Either => g == 0.0 || g.signum() != g_ref.signum(),
        }
    }

    fn fired_at_start(&self, g: f64) -> bool {
        match self.trigger {
            Trigger::Falling => g <= 0.0,
            Trigger::Rising => g >= 0.0,
            Trigger::Either => g.abs() <= self.zero_tol,
        }
    }
}

impl std::fmt::Debug for EventSpec<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EventSpec")
            .field("kind", &self.kind)
            .field("trigger", &self.trigger)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub xi: f64,
    pub point: PhasePoint,
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub xi0: f64,
    pub h: f64,
    /// End of the valid range; equals `xi0 + h` unless truncated by an event.
    pub xi1: f64,
    rcont: [[f64; 2]; 5],
}

impl Segment {
    /// State and derivative at `xi`.
    pub fn eval(&self, xi: f64) -> ([f64; 2], [f64; 2]) {
        let t = (xi - self.xi0) / self.h;
        let t1 = 1.0 - t;
        let r = &self.rcont;
        let mut y = [0.0; 2];
        let mut dy = [0.0; 2];
        for i in 0..2 {
            let tt = r[3][i] + t1 * r[4][i];
            let dtt = -r[4][i];
            let s = r[2][i] + t * tt;
            let ds = tt + t * dtt;
            let q = r[1][i] + t1 * s;
            let dq = -s + t1 * ds;
            y[i] = r[0][i] + t * q;
            dy[i] = (q + t * dq) / self.h;
        }
        (y, dy)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.xi0 + self.xi1)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Samples in integration order (decreasing ξ for backward runs).
    pub xi: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub derivs: Vec<[f64; 2]>,
    pub segments: Vec<Segment>,
    pub event: Event,
    pub steps: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn last(&self) -> PhasePoint {
        *self
            .states
            .last()
            .expect("trajectory always holds the start")
    }

    /// Dense evaluation at any `xi` covered by the trajectory.
    pub fn eval(&self, xi: f64) -> Option<([f64; 2], [f64; 2])> {
        let seg = self.segments.iter().find(|s| {
            let (a, b) = if s.h > 0.0 {
                (s.xi0, s.xi1)
            } else {
                (s.xi1, s.xi0)
            };
            xi >= a && xi <= b
        })?;
        Some(seg.eval(xi))
    }
}

// Dormand–Prince 5(4) tableau with Shampine's dense output.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

fn axpy(y: [f64; 2], terms: &[(f64, [f64; 2])], h: f64) -> [f64; 2] {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

fn finite(v: &[f64; 2]) -> bool {
    v[0].is_finite() && v[1].is_finite()
}

struct StepResult {
    y1: [f64; 2],
    k7: [f64; 2],
    err: f64,
    rcont: [[f64; 2]; 5],
}

fn dopri_step<F: Fn([f64; 2]) -> [f64; 2]>(
    f: &F,
    y0: [f64; 2],
    k1: [f64; 2],
    h: f64,
    s: &IntegrationSettings,
) -> Option<StepResult> {
    let k2 = f(axpy(y0, &[(A21, k1)], h));
    let k3 = f(axpy(y0, &[(A31, k1), (A32, k2)], h));
    let k4 = f(axpy(y0, &[(A41, k1), (A42, k2), (A43, k3)], h));
    let k5 = f(axpy(y0, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h));
    let k6 = f(axpy(
        y0,
        &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
        h,
    ));
    let y1 = axpy(
        y0,
        &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)],
        h,
    );
    let k7 = f(y1);
    if ![k2, k3, k4, k5, k6, k7, y1].iter().all(finite) {
        return None;
    }
    let mut sum = 0.0;
    let mut rcont = [[0.0; 2]; 5];
    for i in 0..2 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sk = s.abs_tol + s.rel_tol * y0[i].abs().max(y1[i].abs());
        sum += (e / sk).powi(2);

        let ydiff = y1[i] - y0[i];
        let bspl = h * k1[i] - ydiff;
        rcont[0][i] = y0[i];
        rcont[1][i] = ydiff;
        rcont[2][i] = bspl;
        rcont[3][i] = ydiff - h * k7[i] - bspl;
        rcont[4][i] =
            h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Some(StepResult {
        y1,
        k7,
        err: (sum / 2.0).sqrt(),
        rcont,
    })
}

fn initial_step<F: Fn([f64; 2]) -> [f64; 2]>(
    f: &F,
    y0: [f64; 2],
    f0: [f64; 2],
    s: &IntegrationSettings,
) -> f64 {
    let norm = |v: [f64; 2]| {
        let mut acc = 0.0;
        for i in 0..2 {
            let sk = s.abs_tol + s.rel_tol * y0[i].abs();
            acc += (v[i] / sk).powi(2);
        }
        (acc / 2.0).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(s.h_max);
    let dir = s.direction.sign();
    let y1 = axpy(y0, &[(1.0, f0)], dir * h0);
    let f1 = f(y1);
    let d2 = norm([f1[0] - f0[0], f1[1] - f0[1]]) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(s.h_max)
}

/// Integrates `field` from `start` until the first event, the horizon, or the
/// step budget.
pub fn integrate<F>(
    field: F,
    start: PhasePoint,
    settings: &IntegrationSettings,
    events: &[EventSpec<'_>],
) -> Result<Trajectory>
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    settings.validate()?;
    let dir = settings.direction.sign();
    let mut xi = 0.0f64;
    let mut y = start.to_array();
    let mut k1 = field(y);
    if !finite(&y) || !finite(&k1) {
        return Err(Error::NonFinite(xi));
    }

    let mut traj = Trajectory {
        xi: vec![xi],
        states: vec![start],
        derivs: vec![k1],
        segments: Vec::new(),
        event: Event {
            kind: EventKind::Budget,
            xi,
            point: start,
        },
        steps: 0,
        rejected: 0,
    };

    let mut g_prev: Vec<f64> = events.iter().map(|e| e.eval(&y)).collect();
    if let Some(i) = events
        .iter()
        .zip(&g_prev)
        .position(|(e, &g)| e.fired_at_start(g))
    {
        traj.event.kind = events[i].kind;
        return Ok(traj);
    }

    let mut h = settings
        .h_init
        .map(|h| h.abs().min(settings.h_max))
        .unwrap_or_else(|| initial_step(&field, y, k1, settings));
    let mut last_rejected = false;

    loop {
        if traj.steps >= settings.max_steps {
            traj.event = Event {
                kind: EventKind::Budget,
                xi,
                point: PhasePoint::from_array(y),
            };
            return Ok(traj);
        }
        let mut hit_horizon = false;
        if let Some(span) = settings.horizon {
            let remaining = span - xi.abs();
            if remaining <= 1e-14 * (1.0 + span) {
                traj.event = Event {
                    kind: EventKind::Horizon,
                    xi,
                    point: PhasePoint::from_array(y),
                };
                return Ok(traj);
            }
            if h >= remaining {
                h = remaining;
                hit_horizon = true;
            }
        }
        if h < 1e-14 * (1.0 + xi.abs()) {
            return Err(Error::StepUnderflow { xi, h });
        }

        let hs = dir * h;
        let step = match dopri_step(&field, y, k1, hs, settings) {
            Some(step) => step,
            None => {
                // shrink first: the stage may have left the region where the field is finite
                traj.rejected += 1;
                h *= 0.25;
                last_rejected = true;
                if h < 1e-14 * (1.0 + xi.abs()) {
                    return Err(Error::NonFinite(xi));
                }
                continue;
            }
        };

        if step.err > 1.0 {
            traj.rejected += 1;
            let fac = (SAFETY * step.err.powf(-0.2)).clamp(FAC_MIN, 1.0);
            h *= fac;
            last_rejected = true;
            continue;
        }

        let xi_new = xi + hs;
        let seg = Segment {
            xi0: xi,
            h: hs,
            xi1: xi_new,
            rcont: step.rcont,
        };
        traj.steps += 1;

        // event detection on the step endpoints, located by bisection on the interpolant
        let mut first: Option<(f64, usize)> = None;
        for (i, ev) in events.iter().enumerate() {
            let g_new = ev.eval(&step.y1);
            if ev.fired(g_new, g_prev[i]) {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                // resolve to the last bit of the step fraction
                while hi - lo > 4.0 * f64::EPSILON {
                    let mid = 0.5 * (lo + hi);
                    let (ym, _) = seg.eval(xi + mid * hs);
                    if ev.fired(ev.eval(&ym), g_prev[i]) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                if first.is_none_or(|(t, _)| hi < t) {
                    first = Some((hi, i));
                }
            }
            g_prev[i] = g_new;
        }

        if let Some((t, i)) = first {
            let xe = if t >= 1.0 { xi_new } else { xi + t * hs };
            let (ye, dye) = if t >= 1.0 {
                (step.y1, step.k7)
            } else {
                // the interpolant's derivative is only accurate to the local error
                let (ye, dye) = seg.eval(xe);
                let f = field(ye);
                (
                    ye,
                    if f.iter().all(|v| v.is_finite()) {
                        f
                    } else {
                        dye
                    },
                )
            };
            let mut seg = seg;
            seg.xi1 = xe;
            traj.segments.push(seg);
            traj.xi.push(xe);
            traj.states.push(PhasePoint::from_array(ye));
            traj.derivs.push(dye);
            traj.event = Event {
                kind: events[i].kind,
                xi: xe,
                point: PhasePoint::from_array(ye),
            };
            return Ok(traj);
        }

        traj.segments.push(seg);
        xi = xi_new;
        y = step.y1;
        k1 = step.k7;
        traj.xi.push(xi);
        traj.states.push(PhasePoint::from_array(y));
        traj.derivs.push(k1);

        if hit_horizon {
            traj.event = Event {
                kind: EventKind::Horizon,
                xi,
                point: PhasePoint::from_array(y),
            };
            return Ok(traj);
        }

        let mut fac = SAFETY * step.err.max(1e-10).powf(-0.2);
        fac = fac.clamp(FAC_MIN, FAC_MAX);
        if last_rejected {
            fac = fac.min(1.0);
        }
        last_rejected = false;
        h = (h * fac).min(settings.h_max);
    }
}
