//! Far-field Mach-number sweeps: regime, spectrum, S2 and the Γ2 terminal
//! at every grid point.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{classify_regime, EndState, GasParams, RegimeKind};
use crate::linear::eigen_2x2;
use crate::system::build_system;
use crate::tracer::{trace_gamma, GammaBranch, TraceOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub gas: GasParams,
    pub v_plus: f64,
    pub theta_plus: f64,
    pub mach_min: f64,
    pub mach_max: f64,
    pub points: usize,
    pub tol_m: f64,
    /// Trace Γ2 on subsonic rows.
    pub trace: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.mach_min > 0.0) || !(self.mach_max > self.mach_min) || !self.mach_max.is_finite()
        {
            return Err(Error::param(
                "mach range",
                format!(
                    "need 0 < min < max, got [{}, {}]",
                    self.mach_min, self.mach_max
                ),
            ));
        }
        if self.points < 2 {
            return Err(Error::param(
                "points",
                format!("need at least 2, got {}", self.points),
            ));
        }
        EndState::new(self.v_plus, 1.0, self.theta_plus)?;
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| self.mach_min + (self.mach_max - self.mach_min) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mach_plus: f64,
    pub regime: RegimeKind,
    pub det_a: f64,
    pub tr_a: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Γ2 terminal kind on subsonic rows.
    pub gamma2_terminal: Option<String>,
}

fn row(spec: &SweepSpec, mach: f64) -> Result<SweepRow> {
    let gas = spec.gas;
    let u_plus = mach * gas.sound_speed(spec.theta_plus);
    let s = build_system(gas, EndState::new(spec.v_plus, u_plus, spec.theta_plus)?)?;
    let regime = classify_regime(s.mach_plus, spec.tol_m).tag;
    let eig = eigen_2x2(&s.a)?;
    let gamma2_terminal = if spec.trace && regime == RegimeKind::Subsonic {
        let c = trace_gamma(&s, &eig, GammaBranch::Gamma2, &TraceOptions::default())?;
        Some(c.terminal.kind().to_string())
    } else {
        None
    };
    Ok(SweepRow {
        mach_plus: s.mach_plus,
        regime,
        det_a: s.det_a(),
        tr_a: s.tr_a(),
        lambda1: eig.lambda1,
        lambda2: eig.lambda2,
        alpha1: s.alpha1,
        alpha2: s.alpha2,
        gamma2_terminal,
    })
}

/// Evaluates the grid concurrently; rows come back in grid order.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.grid().par_iter().map(|&m| row(spec, m)).collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    writeln!(
        w,
        "mach_plus,regime,det_a,tr_a,lambda1,lambda2,alpha1,alpha2,gamma2_terminal"
    )
    .map_err(io)?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.mach_plus,
            r.regime,
            r.det_a,
            r.tr_a,
            r.lambda1,
            r.lambda2,
            r.alpha1,
            r.alpha2,
            r.gamma2_terminal.as_deref().unwrap_or("")
        )
        .map_err(io)?;
    }
    Ok(())
}
