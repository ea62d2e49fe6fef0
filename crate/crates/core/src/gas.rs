//! Gas constants, end states and the Mach-number regime of the far field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default half-width of the transonic band around `M+ = 1`.
pub const DEFAULT_TOL_M: f64 = 1e-8;
/// Default relative tolerance on the mass-flux identity `u-/v- = u+/v+`.
pub const DEFAULT_TOL_A: f64 = 1e-10;

/// Constants of an ideal polytropic gas.
///
/// Internal energy is `e = R θ / (γ - 1)` up to an additive constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    gamma: f64,
    r: f64,
    mu: f64,
    kappa: f64,
}

impl GasParams {
    pub fn new(gamma: f64, r: f64, mu: f64, kappa: f64) -> Result<Self> {
        check_finite("gamma", gamma)?;
        check_finite("R", r)?;
        check_finite("mu", mu)?;
        check_finite("kappa", kappa)?;
        if gamma <= 1.0 {
            return Err(Error::param("gamma", format!("must exceed 1, got {gamma}")));
        }
        if r <= 0.0 {
            return Err(Error::param("R", format!("must be positive, got {r}")));
        }
        if mu <= 0.0 {
            return Err(Error::param("mu", format!("must be positive, got {mu}")));
        }
        if kappa <= 0.0 {
            return Err(Error::param(
                "kappa",
                format!("must be positive, got {kappa}"),
            ));
        }
        Ok(Self {
            gamma,
            r,
            mu,
            kappa,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Specific internal energy `R θ / (γ - 1)`.
    pub fn internal_energy(&self, theta: f64) -> f64 {
        self.r * theta / (self.gamma - 1.0)
    }

    /// Sound speed `sqrt(R γ θ)`.
    pub fn sound_speed(&self, theta: f64) -> f64 {
        (self.r * self.gamma * theta).sqrt()
    }
}

/// A state `(v, u, θ)`: specific volume, velocity and temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndState {
    v: f64,
    u: f64,
    theta: f64,
}

impl EndState {
    pub fn new(v: f64, u: f64, theta: f64) -> Result<Self> {
        check_finite("v", v)?;
        check_finite("u", u)?;
        check_finite("theta", theta)?;
        if v <= 0.0 {
            return Err(Error::param(
                "v",
                format!("specific volume must be positive, got {v}"),
            ));
        }
        if theta <= 0.0 {
            return Err(Error::param(
                "theta",
                format!("temperature must be positive, got {theta}"),
            ));
        }
        Ok(Self { v, u, theta })
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Mass flux `u / v`.
    pub fn flux(&self) -> f64 {
        self.u / self.v
    }
}

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite, got {value}")))
    }
}

pub fn pressure(state: &EndState, gas: &GasParams) -> f64 {
    gas.r * state.theta / state.v
}

pub fn mach(state: &EndState, gas: &GasParams) -> f64 {
    state.u.abs() / gas.sound_speed(state.theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeKind {
    Supersonic,
    Transonic,
    Subsonic,
}

impl RegimeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeKind::Supersonic => "Supersonic",
            RegimeKind::Transonic => "Transonic",
            RegimeKind::Subsonic => "Subsonic",
        }
    }
}

impl std::fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeKind,
    pub mach_plus: f64,
}

/// Places `mach_plus` in one of the three regimes; the transonic band is
/// `|M+ - 1| <= tol_m`.
pub fn classify_regime(mach_plus: f64, tol_m: f64) -> Regime {
    let tag = if (mach_plus - 1.0).abs() <= tol_m {
        RegimeKind::Transonic
    } else if mach_plus > 1.0 {
        RegimeKind::Supersonic
    } else {
        RegimeKind::Subsonic
    };
    Regime { tag, mach_plus }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FluxCheck {
    /// Condition holds; `sigma_minus = -u-/v-` is the boundary speed.
    Ok {
        sigma_minus: f64,
    },
    Mismatch {
        gap: f64,
        sigma_minus: f64,
    },
}

impl FluxCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, FluxCheck::Ok { .. })
    }

    pub fn sigma_minus(&self) -> f64 {
        match *self {
            FluxCheck::Ok { sigma_minus } | FluxCheck::Mismatch { sigma_minus, .. } => sigma_minus,
        }
    }
}

/// Mass-flux compatibility `u-/v- = u+/v+` between boundary and far field.
pub fn check_flux_condition(left: &EndState, right: &EndState, tol_a: f64) -> Result<FluxCheck> {
    if left.u <= 0.0 {
        return Err(Error::InvalidBoundary(format!(
            "boundary velocity u- = {} is not an inflow (u- > 0 required)",
            left.u
        )));
    }
    let flux_left = left.flux();
    let gap = (flux_left - right.flux()).abs();
    let sigma_minus = -flux_left;
    if gap <= tol_a * flux_left {
        Ok(FluxCheck::Ok { sigma_minus })
    } else {
        Ok(FluxCheck::Mismatch { gap, sigma_minus })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_gas() -> GasParams {
        GasParams::new(1.4, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_invalid_constants() {
        assert!(GasParams::new(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(GasParams::new(1.4, 0.0, 1.0, 1.0).is_err());
        assert!(GasParams::new(1.4, 1.0, -1.0, 1.0).is_err());
        assert!(GasParams::new(1.4, 1.0, 1.0, 0.0).is_err());
        assert!(GasParams::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
        assert!(EndState::new(0.0, 1.0, 1.0).is_err());
        assert!(EndState::new(1.0, 1.0, -2.0).is_err());
        assert!(EndState::new(1.0, -1.0, 1.0).is_ok());
    }

    #[test]
    fn pressure_examples() {
        let g = unit_gas();
        assert_eq!(pressure(&EndState::new(1.0, 0.0, 1.0).unwrap(), &g), 1.0);
        assert_eq!(pressure(&EndState::new(2.0, 0.0, 1.0).unwrap(), &g), 0.5);
        let g = GasParams::new(1.4, 8.314, 1.0, 1.0).unwrap();
        assert_eq!(pressure(&EndState::new(1.0, 0.0, 1.0).unwrap(), &g), 8.314);
    }

    #[test]
    fn mach_examples() {
        let g = unit_gas();
        let m = |u: f64| mach(&EndState::new(1.0, u, 1.0).unwrap(), &g);
        assert!((m(1.4f64.sqrt()) - 1.0).abs() < 1e-15);
        assert!((m(1.0) - 0.845_154_254_728_516_6).abs() < 1e-12);
        assert!((m(2.0) - 1.690_308_509_457_033).abs() < 1e-12);
        assert!((m(-2.0) - m(2.0)).abs() == 0.0);
    }

    #[test]
    fn regime_examples() {
        assert_eq!(classify_regime(1.0, 1e-8).tag, RegimeKind::Transonic);
        assert_eq!(classify_regime(0.845154, 1e-8).tag, RegimeKind::Subsonic);
        assert_eq!(classify_regime(1.690308, 1e-8).tag, RegimeKind::Supersonic);
        assert_eq!(classify_regime(1.0 + 5e-9, 1e-8).tag, RegimeKind::Transonic);
    }

    #[test]
    fn flux_examples() {
        let s = |v, u| EndState::new(v, u, 1.0).unwrap();
        let c = check_flux_condition(&s(1.0, 1.0), &s(1.0, 1.0), DEFAULT_TOL_A).unwrap();
        assert_eq!(c, FluxCheck::Ok { sigma_minus: -1.0 });
        let c = check_flux_condition(&s(2.0, 2.0), &s(1.0, 1.0), DEFAULT_TOL_A).unwrap();
        assert_eq!(c, FluxCheck::Ok { sigma_minus: -1.0 });
        let c = check_flux_condition(&s(1.0, 1.0), &s(1.0, 0.5), DEFAULT_TOL_A).unwrap();
        match c {
            FluxCheck::Mismatch { gap, .. } => assert_eq!(gap, 0.5),
            other => panic!("expected mismatch, got {other:?}"),
        }
        assert!(matches!(
            check_flux_condition(&s(1.0, 0.0), &s(1.0, 1.0), DEFAULT_TOL_A),
            Err(Error::InvalidBoundary(_))
        ));
    }

    proptest! {
        #[test]
        fn sigma_minus_negative_for_inflow(v in 1e-3f64..1e3, u in 1e-3f64..1e3) {
            let left = EndState::new(v, u, 1.0).unwrap();
            let c = check_flux_condition(&left, &left, DEFAULT_TOL_A).unwrap();
            prop_assert!(c.sigma_minus() < 0.0);
        }

        #[test]
        fn flux_ok_implies_positive_u_plus(
            vm in 1e-3f64..1e3, um in 1e-3f64..1e3, vp in 1e-3f64..1e3, up in -1e3f64..1e3
        ) {
            let left = EndState::new(vm, um, 1.0).unwrap();
            let right = EndState::new(vp, up, 1.0).unwrap();
            if check_flux_condition(&left, &right, DEFAULT_TOL_A).unwrap().is_ok() {
                prop_assert!(up > 0.0);
            }
            // proportional construction always satisfies the condition
            let matched = EndState::new(vp, um / vm * vp, 1.0).unwrap();
            prop_assert!(check_flux_condition(&left, &matched, DEFAULT_TOL_A).unwrap().is_ok());
            prop_assert!(matched.u() > 0.0);
        }

        #[test]
        fn regime_partition(m in 0.0f64..10.0, tol in 1e-12f64..0.49) {
            let r = classify_regime(m, tol);
            let d = m - 1.0;
            let expected = if d.abs() <= tol {
                RegimeKind::Transonic
            } else if d > tol {
                RegimeKind::Supersonic
            } else {
                RegimeKind::Subsonic
            };
            prop_assert_eq!(r.tag, expected);
        }
    }
}
