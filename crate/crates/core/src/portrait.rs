//! Phase portraits: a scene of nullclines, region boundaries, equilibria,
//! existence curves and sample trajectories, rendered to SVG.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::gas::RegimeKind;
use crate::integrator::{integrate, EventKind, EventSpec, IntegrationSettings, Trigger};
use crate::linear::{tangent_line, TangentBasis};
use crate::system::PhasePoint;
use crate::tracer::{CurveLabel, Terminal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortraitOptions {
    /// Generic trajectories are seeded on a `grid × grid` lattice.
    pub grid: usize,
    /// ξ length of each generic trajectory, in both directions.
    pub trajectory_span: f64,
    /// Points per nullcline.
    pub resolution: usize,
    pub width: f64,
    pub height: f64,
}

impl Default for PortraitOptions {
    fn default() -> Self {
        Self {
            grid: 5,
            trajectory_span: 3.0,
            resolution: 200,
            width: 800.0,
            height: 600.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub id: String,
    pub class: String,
    pub points: Vec<PhasePoint>,
}

impl Polyline {
    pub fn first(&self) -> PhasePoint {
        self.points[0]
    }

    pub fn last(&self) -> PhasePoint {
        *self.points.last().expect("polylines are never empty")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub id: String,
    pub point: PhasePoint,
}

/// Geometry of a portrait in phase coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub regime: RegimeKind,
    pub u_range: (f64, f64),
    pub theta_range: (f64, f64),
    pub polylines: Vec<Polyline>,
    pub markers: Vec<Marker>,
}

impl Scene {
    pub fn polyline(&self, id: &str) -> Option<&Polyline> {
        self.polylines.iter().find(|p| p.id == id)
    }

    pub fn marker(&self, id: &str) -> Option<&Marker> {
        self.markers.iter().find(|m| m.id == id)
    }

    pub fn by_class<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a Polyline> + 'a {
        self.polylines.iter().filter(move |p| p.class == class)
    }
}

fn sample_graph(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Vec<PhasePoint> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let u = a + (b - a) * i as f64 / (n - 1) as f64;
            PhasePoint::new(u, f(u))
        })
        .collect()
}

fn line(id: &str, class: &str, points: Vec<PhasePoint>) -> Polyline {
    Polyline {
        id: id.to_string(),
        class: class.to_string(),
        points,
    }
}

/// Collects the portrait geometry for the engine's far-field state.
pub fn build_scene(engine: &Engine, opts: &PortraitOptions) -> Result<Scene> {
    let s = *engine.system();
    let regime = engine.regime().tag;
    if regime == RegimeKind::Supersonic {
        return Err(Error::RegimeMismatch(format!(
            "portraits need M+ <= 1, got {}",
            s.mach_plus
        )));
    }
    let (up, tp) = (s.u_plus, s.theta_plus);
    let subsonic = regime == RegimeKind::Subsonic;
    let u_far = if subsonic { s.alpha1 * up } else { up };

    let mut polylines = Vec::new();
    let mut markers = vec![
        Marker {
            id: "O".into(),
            point: s.origin(),
        },
        Marker {
            id: "S1".into(),
            point: s.s1(),
        },
    ];
    if subsonic {
        markers.push(Marker {
            id: "S2".into(),
            point: s.s2(),
        });
    }

    let mut curve_pts = Vec::new();
    for &label in engine.labels() {
        let c = engine.curve(label)?;
        polylines.push(line(label.as_str(), "curve", c.samples.clone()));
        curve_pts.extend(c.samples.iter().copied());
        let z = match (label, c.terminal) {
            (CurveLabel::Sigma, Terminal::HitUAxis(p)) => Some(("Z0", p)),
            (CurveLabel::Gamma1, Terminal::HitUAxis(p)) => Some(("Z1", p)),
            (CurveLabel::Gamma2, Terminal::HitThetaAxis(p)) => Some(("Z2", p)),
            _ => None,
        };
        if let Some((id, p)) = z {
            markers.push(Marker {
                id: id.into(),
                point: p,
            });
        }
    }

    // view box
    let th_lo = [0.0, s.s2().theta.min(0.0)]
        .into_iter()
        .chain(curve_pts.iter().map(|p| p.theta))
        .fold(f64::INFINITY, f64::min);
    let th_hi = [s.h2(0.0), tp]
        .into_iter()
        .chain(curve_pts.iter().map(|p| p.theta))
        .fold(f64::NEG_INFINITY, f64::max);
    let u_hi = 1.15 * u_far.max(up);
    let u_lo = -0.05 * u_hi;
    let pad = 0.1 * (th_hi - th_lo);
    let (th_lo, th_hi) = (th_lo - pad, th_hi + pad);

    let n = opts.resolution;
    polylines.push(line(
        "h1",
        "nullcline",
        sample_graph(|u| s.h1(u), 0.0, u_hi, n),
    ));
    polylines.push(line(
        "h2",
        "nullcline",
        sample_graph(|u| s.h2(u), 0.0, u_hi, n),
    ));
    polylines.push(line(
        "l1",
        "boundary",
        sample_graph(|u| s.h1(u), 0.0, up, n),
    ));
    polylines.push(line(
        "l2",
        "boundary",
        sample_graph(|u| s.h2(u), 0.0, up, n),
    ));
    polylines.push(line(
        "l3",
        "boundary",
        vec![
            PhasePoint::new(0.0, s.h1(0.0)),
            PhasePoint::new(0.0, s.h2(0.0)),
        ],
    ));
    if subsonic {
        polylines.push(line(
            "l4",
            "boundary",
            sample_graph(|u| s.h2(u), up, u_far, n),
        ));
        polylines.push(line(
            "l5",
            "boundary",
            sample_graph(|u| s.h1(u), up, u_far, n),
        ));
    }

    let tangent = if subsonic {
        let eig = engine.eigen()?;
        tangent_line(&s, TangentBasis::Subsonic(&eig))?
    } else {
        let frame = engine.frame()?;
        tangent_line(&s, TangentBasis::Transonic(&frame))?
    };
    let reach = 0.15 * up;
    let tau_end = if tangent.half_line { up } else { up + reach };
    polylines.push(line(
        if subsonic { "tau_prime" } else { "tau" },
        "tangent",
        sample_graph(
            |u| tangent.point.theta + tangent.slope * (u - up),
            up - reach,
            tau_end,
            2,
        ),
    ));

    // generic trajectories, forward and backward from each lattice point
    let g = opts.grid;
    let mut k = 0;
    for i in 0..g {
        for j in 0..g {
            let u0 = u_hi * (i as f64 + 0.5) / g as f64;
            let th0 = th_lo + (th_hi - th_lo) * (j as f64 + 0.5) / g as f64;
            let mut pts = Vec::new();
            for settings in [
                IntegrationSettings {
                    rel_tol: 1e-6,
                    abs_tol: 1e-9,
                    max_steps: 2000,
                    horizon: Some(opts.trajectory_span),
                    ..Default::default()
                }
                .backward(),
                IntegrationSettings {
                    rel_tol: 1e-6,
                    abs_tol: 1e-9,
                    max_steps: 2000,
                    horizon: Some(opts.trajectory_span),
                    ..Default::default()
                },
            ] {
                let events = [EventSpec::custom(
                    EventKind::Custom(0),
                    Trigger::Either,
                    move |y| {
                        if y[0] > u_lo && y[0] < u_hi && y[1] > th_lo && y[1] < th_hi {
                            -1.0
                        } else {
                            1.0
                        }
                    },
                )];
                let t = integrate(
                    |y| s.rhs_poly(PhasePoint::from_array(y)),
                    PhasePoint::new(u0, th0),
                    &settings,
                    &events,
                );
                let Ok(t) = t else { continue };
                let mut part = t.states;
                if pts.is_empty() {
                    part.reverse();
                    pts = part;
                } else {
                    pts.extend(part.into_iter().skip(1));
                }
            }
            if pts.len() >= 2 {
                polylines.push(line(&format!("traj-{k}"), "trajectory", pts));
                k += 1;
            }
        }
    }

    Ok(Scene {
        regime,
        u_range: (u_lo, u_hi),
        theta_range: (th_lo, th_hi),
        polylines,
        markers,
    })
}

struct View {
    u: (f64, f64),
    th: (f64, f64),
    w: f64,
    h: f64,
    m: f64,
}

impl View {
    fn x(&self, u: f64) -> f64 {
        self.m + (u - self.u.0) / (self.u.1 - self.u.0) * (self.w - 2.0 * self.m)
    }

    fn y(&self, th: f64) -> f64 {
        self.h - self.m - (th - self.th.0) / (self.th.1 - self.th.0) * (self.h - 2.0 * self.m)
    }

    fn clamp(&self, p: PhasePoint) -> (f64, f64) {
        let u = p.u.clamp(self.u.0, self.u.1);
        let th = p.theta.clamp(self.th.0, self.th.1);
        (self.x(u), self.y(th))
    }
}

fn style(class: &str) -> &'static str {
    match class {
        "curve" => "stroke=\"#c0392b\" stroke-width=\"2.5\"",
        "nullcline" => "stroke=\"#7f8c8d\" stroke-width=\"1\" stroke-dasharray=\"4 3\"",
        "boundary" => "stroke=\"#2c3e50\" stroke-width=\"1.5\"",
        "tangent" => "stroke=\"#27ae60\" stroke-width=\"1\"",
        _ => "stroke=\"#95a5a6\" stroke-width=\"0.6\"",
    }
}

/// Renders a scene; every element carries its phase coordinates in
/// `data-*` attributes.
pub fn render_svg(scene: &Scene, opts: &PortraitOptions) -> String {
    let v = View {
        u: scene.u_range,
        th: scene.theta_range,
        w: opts.width,
        h: opts.height,
        m: 50.0,
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" data-regime=\"{}\">",
        v.w, v.h, v.w, v.h, scene.regime
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    // axes through the origin when it is in view
    let ax_y = v.y(0.0_f64.clamp(v.th.0, v.th.1));
    let ax_x = v.x(0.0_f64.clamp(v.u.0, v.u.1));
    let _ = writeln!(
        out,
        "<line id=\"axis-u\" x1=\"{}\" y1=\"{ax_y}\" x2=\"{}\" y2=\"{ax_y}\" stroke=\"black\"/>",
        v.m,
        v.w - v.m
    );
    let _ = writeln!(
        out,
        "<line id=\"axis-theta\" x1=\"{ax_x}\" y1=\"{}\" x2=\"{ax_x}\" y2=\"{}\" stroke=\"black\"/>",
        v.h - v.m,
        v.m
    );
    let _ = writeln!(
        out,
        "<text id=\"label-u\" x=\"{}\" y=\"{}\" font-size=\"16\">u</text>",
        v.w - v.m + 8.0,
        ax_y + 5.0
    );
    let _ = writeln!(
        out,
        "<text id=\"label-theta\" x=\"{}\" y=\"{}\" font-size=\"16\">θ</text>",
        ax_x - 5.0,
        v.m - 10.0
    );

    let order = ["trajectory", "nullcline", "boundary", "tangent", "curve"];
    for class in order {
        for p in scene.by_class(class) {
            let pts: Vec<String> = p
                .points
                .iter()
                .map(|&q| {
                    let (x, y) = v.clamp(q);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let (a, b) = (p.first(), p.last());
            let _ = writeln!(
                out,
                "<polyline id=\"{}\" class=\"{}\" fill=\"none\" {} data-start=\"{},{}\" data-end=\"{},{}\" points=\"{}\"/>",
                p.id,
                p.class,
                style(&p.class),
                a.u,
                a.theta,
                b.u,
                b.theta,
                pts.join(" ")
            );
        }
    }
    for m in &scene.markers {
        let (x, y) = v.clamp(m.point);
        let _ = writeln!(
            out,
            "<circle id=\"{}\" class=\"{}\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"black\" data-u=\"{}\" data-theta=\"{}\"/>",
            m.id,
            if m.id.starts_with('Z') { "endpoint" } else { "equilibrium" },
            m.point.u,
            m.point.theta
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\">{}</text>",
            x + 6.0,
            y - 6.0,
            m.id
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn portrait_svg(engine: &Engine, opts: &PortraitOptions) -> Result<String> {
    Ok(render_svg(&build_scene(engine, opts)?, opts))
}
