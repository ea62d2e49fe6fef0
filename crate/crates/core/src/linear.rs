//! Linearization at the far-field equilibrium: 2×2 eigen-analysis, the
//! transonic diagonalizing frame, tangent lines, and a numerical classifier
//! for degenerate equilibria with one zero eigenvalue.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{classify_regime, RegimeKind};
use crate::system::{mat_vec, Mat2, PhasePoint, SystemData};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    /// Larger eigenvalue.
    pub lambda1: f64,
    pub lambda2: f64,
    pub e1: [f64; 2],
    pub e2: [f64; 2],
}

/// Eigen-decomposition of a real 2×2 matrix with real spectrum.
///
/// Roots come from the cancellation-free form of the quadratic formula on
/// `λ² - λ tr + det`. Eigenvectors are unit length with their first nonzero
/// component positive.
pub fn eigen_2x2(a: &Mat2) -> Result<EigenPair> {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let norm = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        if disc >= -1e-12 * norm.max(1.0).powi(2) {
            disc = 0.0;
        } else {
            return Err(Error::ComplexEigenvalues(disc));
        }
    }
    let sq = disc.sqrt();
    let (l1, l2) = if tr == 0.0 && sq == 0.0 {
        (0.0, 0.0)
    } else {
        let q = 0.5 * (tr + tr.signum() * sq);
        let (r1, r2) = if q != 0.0 {
            (q, det / q)
        } else {
            (0.5 * sq, -0.5 * sq)
        };
        (r1.max(r2), r1.min(r2))
    };

    let scalar = a[0][1].abs() <= 1e-14 * norm
        && a[1][0].abs() <= 1e-14 * norm
        && (a[0][0] - a[1][1]).abs() <= 1e-14 * norm;
    if scalar {
        return Ok(EigenPair {
            lambda1: l1,
            lambda2: l2,
            e1: [1.0, 0.0],
            e2: [0.0, 1.0],
        });
    }
    // a double root of a non-scalar matrix is a Jordan block
    if sq <= 1e-10 * norm {
        return Err(Error::DefectiveMatrix(l1));
    }
    let e1 = null_vector(a, l1, norm).ok_or(Error::DefectiveMatrix(l1))?;
    let e2 = null_vector(a, l2, norm).ok_or(Error::DefectiveMatrix(l2))?;
    Ok(EigenPair {
        lambda1: l1,
        lambda2: l2,
        e1,
        e2,
    })
}

fn null_vector(a: &Mat2, lambda: f64, norm: f64) -> Option<[f64; 2]> {
    let from_row0 = [a[0][1], lambda - a[0][0]];
    let from_row1 = [lambda - a[1][1], a[1][0]];
    let n0 = from_row0[0].hypot(from_row0[1]);
    let n1 = from_row1[0].hypot(from_row1[1]);
    let (v, n) = if n0 >= n1 {
        (from_row0, n0)
    } else {
        (from_row1, n1)
    };
    if n <= 1e-14 * norm.max(f64::MIN_POSITIVE) {
        return None;
    }
    Some(normalize(v))
}

/// Unit length, first nonzero component positive.
pub fn normalize(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    let mut out = [v[0] / n, v[1] / n];
    let lead = if out[0].abs() > 1e-15 { out[0] } else { out[1] };
    if lead < 0.0 {
        out = [-out[0], -out[1]];
    }
    out
}

/// Eigenbasis of `A` in the transonic case, where one eigenvalue vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransonicFrame {
    /// Columns are `e1 = (1, -(γ-1)u+/(Rγ))` and `e2 = (1, μu+/(κ(γ-1)))`.
    pub p: Mat2,
    pub p_inv: Mat2,
    pub lambda2: f64,
    /// Leading coefficient of the reduced field on the slow graph.
    pub a2: f64,
    system: SystemData,
}

pub fn transonic_frame(s: &SystemData, tol_m: f64) -> Result<TransonicFrame> {
    let regime = classify_regime(s.mach_plus, tol_m);
    if regime.tag != RegimeKind::Transonic {
        return Err(Error::RegimeMismatch(format!(
            "transonic frame requires |M+ - 1| <= {tol_m}, got M+ = {}",
            s.mach_plus
        )));
    }
    let (g, r, mu, kappa) = (s.gas.gamma(), s.gas.r(), s.gas.mu(), s.gas.kappa());
    let up = s.u_plus;
    let slope1 = -(g - 1.0) * up / (r * g);
    let slope2 = mu * up / (kappa * (g - 1.0));
    let p = [[1.0, 1.0], [slope1, slope2]];
    let det_p = slope2 - slope1;
    let p_inv = [
        [slope2 / det_p, -1.0 / det_p],
        [-slope1 / det_p, 1.0 / det_p],
    ];
    let lambda2 = ((g - 1.0) / (g * mu) + r / (kappa * (g - 1.0))) * up;
    let a2 = r * g * (g + 1.0) / (2.0 * (r * g * mu + kappa * (g - 1.0).powi(2)));
    Ok(TransonicFrame {
        p,
        p_inv,
        lambda2,
        a2,
        system: *s,
    })
}

impl TransonicFrame {
    pub fn e1(&self) -> [f64; 2] {
        [self.p[0][0], self.p[1][0]]
    }

    pub fn e2(&self) -> [f64; 2] {
        [self.p[0][1], self.p[1][1]]
    }

    pub fn det_p(&self) -> f64 {
        self.p[0][0] * self.p[1][1] - self.p[0][1] * self.p[1][0]
    }

    pub fn to_w(&self, p: PhasePoint) -> [f64; 2] {
        let s = &self.system;
        mat_vec(&self.p_inv, [p.u - s.u_plus, p.theta - s.theta_plus])
    }

    pub fn from_w(&self, w: [f64; 2]) -> PhasePoint {
        let d = self.deviation(w);
        PhasePoint::new(self.system.u_plus + d[0], self.system.theta_plus + d[1])
    }

    /// `P W`, the deviation from the far-field state.
    pub fn deviation(&self, w: [f64; 2]) -> [f64; 2] {
        mat_vec(&self.p, w)
    }

    /// Nonlinear part `(g1, g2) = P⁻¹ F(P W)` of the field in W-coordinates.
    /// The linear part is taken as exactly `diag(0, λ2)`.
    pub fn g(&self, w: [f64; 2]) -> [f64; 2] {
        let d = self.deviation(w);
        let (f1, f2) = self.system.nonlinear(d[0], d[1]);
        mat_vec(&self.p_inv, [f1, f2])
    }

    /// Full W-system `(g1, λ2 W2 + g2)`.
    pub fn w_field(&self, w: [f64; 2]) -> [f64; 2] {
        let g = self.g(w);
        [g[0], self.lambda2 * w[1] + g[1]]
    }

    /// Solves `λ2 φ + g2(x, φ) = 0` for the slow graph `W2 = φ(W1)`.
    pub fn phi(&self, x: f64) -> Result<f64> {
        solve_slow_graph(&|a, b| self.g([a, b])[1], self.lambda2, x, 0.0)
    }

    /// `φ'(x)` from the implicit function theorem.
    pub fn phi_prime(&self, x: f64, phi: f64) -> f64 {
        let g2 = |a: f64, b: f64| self.g([a, b])[1];
        let hx = 1e-6 * x.abs().max(1e-12 * self.system.scale());
        let hy = 1e-6 * phi.abs().max(x.abs()).max(1e-12 * self.system.scale());
        let dgx = (g2(x + hx, phi) - g2(x - hx, phi)) / (2.0 * hx);
        let dgy = (g2(x, phi + hy) - g2(x, phi - hy)) / (2.0 * hy);
        -dgx / (self.lambda2 + dgy)
    }

    /// Reduced field `ψ(x) = g1(x, φ(x))` on the slow graph.
    pub fn psi(&self, x: f64) -> Result<f64> {
        let phi = self.phi(x)?;
        Ok(self.g([x, phi])[0])
    }

    pub fn system(&self) -> &SystemData {
        &self.system
    }
}

/// Damped Newton for `λ φ + g2(x, φ) = 0`.
pub fn solve_slow_graph(
    g2: &dyn Fn(f64, f64) -> f64,
    lambda: f64,
    x: f64,
    guess: f64,
) -> Result<f64> {
    let f = |phi: f64| lambda * phi + g2(x, phi);
    let mut phi = guess;
    let mut fv = f(phi);
    for _ in 0..60 {
        let h = 1e-7 * phi.abs().max(x.abs()).max(f64::MIN_POSITIVE.sqrt());
        let df = (f(phi + h) - f(phi - h)) / (2.0 * h);
        if !df.is_finite() || df == 0.0 {
            return Err(Error::NewtonDiverged(x));
        }
        let step = -fv / df;
        let mut damp = 1.0;
        let mut next = phi + step;
        let mut fn_next = f(next);
        while fn_next.abs() > fv.abs() && damp > 1e-6 {
            damp *= 0.5;
            next = phi + damp * step;
            fn_next = f(next);
        }
        let moved = (next - phi).abs();
        phi = next;
        fv = fn_next;
        if moved <= 1e-13 * (x.abs() + phi.abs()) || fv == 0.0 {
            return if phi.is_finite() {
                Ok(phi)
            } else {
                Err(Error::NewtonDiverged(x))
            };
        }
    }
    Err(Error::NewtonDiverged(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegenerateKind {
    UnstableNode,
    Saddle,
    /// Unique orbit reaching the origin as ξ → ∞, tangent to the negative x-axis.
    SaddleNodeNegAxis,
    /// Unique orbit reaching the origin as ξ → ∞, tangent to the positive x-axis.
    SaddleNodePosAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateClass {
    pub m: u32,
    pub a_m: f64,
    pub kind: DegenerateKind,
    pub fitted_exponent: f64,
}

/// Classifies the isolated equilibrium at the origin of
/// `x' = g1(x, y)`, `y' = λ y + g2(x, y)` with `λ > 0` and `g1`, `g2` at
/// least quadratic.
///
/// The slow graph `φ` is solved on a log-spaced grid `±[δ/100, δ]`, the
/// leading order `m` of `ψ(x) = g1(x, φ(x))` comes from a log-log fit over
/// the inner decade, and `a_m` from the symmetric combination at the smallest
/// `|x|`, which cancels the next order.
pub fn classify_degenerate(
    g1: &dyn Fn(f64, f64) -> f64,
    g2: &dyn Fn(f64, f64) -> f64,
    lambda: f64,
    delta: f64,
) -> Result<DegenerateClass> {
    if !(lambda > 0.0) || !(delta > 0.0) {
        return Err(Error::param("lambda/delta", "must be positive"));
    }
    const N: usize = 21;
    let xs: Vec<f64> = (0..N)
        .map(|i| delta * 10f64.powf(-2.0 + 2.0 * i as f64 / (N - 1) as f64))
        .collect();

    let mut psi_pos = Vec::with_capacity(N);
    let mut psi_neg = Vec::with_capacity(N);
    for side in [1.0, -1.0] {
        let mut guess = 0.0;
        for &ax in &xs {
            let x = side * ax;
            let phi = solve_slow_graph(g2, lambda, x, guess)?;
            guess = phi;
            let psi = g1(x, phi);
            if side > 0.0 {
                psi_pos.push(psi);
            } else {
                psi_neg.push(psi);
            }
        }
    }

    // inner decade: first half of the grid
    let inner = N / 2 + 1;
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (i, &ax) in xs.iter().take(inner).enumerate() {
        for psi in [psi_pos[i], psi_neg[i]] {
            if psi == 0.0 || !psi.is_finite() {
                return Err(Error::FitAmbiguous { exponent: f64::NAN });
            }
            lx.push(ax.ln());
            ly.push(psi.abs().ln());
        }
    }
    let (slope, _) = linear_fit(&lx, &ly);
    let m = slope.round();
    if (slope - m).abs() > 0.1 || m < 2.0 {
        return Err(Error::FitAmbiguous { exponent: slope });
    }
    let m_int = m as i32;
    let x0 = xs[0];
    let c_pos = psi_pos[0] / x0.powi(m_int);
    let c_neg = psi_neg[0] / (-x0).powi(m_int);
    if c_pos.signum() != c_neg.signum() {
        return Err(Error::FitAmbiguous { exponent: slope });
    }
    let a_m = 0.5 * (c_pos + c_neg);
    let even = m_int % 2 == 0;
    let kind = match (even, a_m > 0.0) {
        (false, true) => DegenerateKind::UnstableNode,
        (false, false) => DegenerateKind::Saddle,
        (true, true) => DegenerateKind::SaddleNodeNegAxis,
        (true, false) => DegenerateKind::SaddleNodePosAxis,
    };
    Ok(DegenerateClass {
        m: m_int as u32,
        a_m,
        kind,
        fitted_exponent: slope,
    })
}

/// Least-squares line `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Default probe radius for [`classify_degenerate`] on the layer field.
pub fn default_probe_radius(s: &SystemData) -> f64 {
    1e-2 * s.u_plus.max(1.0)
}

/// Classifies the transonic equilibrium through its W-system.
pub fn classify_transonic(frame: &TransonicFrame) -> Result<DegenerateClass> {
    let g1 = |x: f64, y: f64| frame.g([x, y])[0];
    let g2 = |x: f64, y: f64| frame.g([x, y])[1];
    classify_degenerate(
        &g1,
        &g2,
        frame.lambda2,
        default_probe_radius(frame.system()),
    )
}

#[derive(Debug, Clone, Copy)]
pub enum TangentBasis<'a> {
    Transonic(&'a TransonicFrame),
    Subsonic(&'a EigenPair),
}

/// Line through S1 along which the existence curves leave the equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentLine {
    pub point: PhasePoint,
    /// `dθ/du` along the line.
    pub slope: f64,
    /// Unit direction with positive u-component.
    pub direction: [f64; 2],
    /// Only the half `u <= u+` belongs to the line (transonic case).
    pub half_line: bool,
}

impl TangentLine {
    /// Line equation residual, zero on the line.
    pub fn residual(&self, p: PhasePoint) -> f64 {
        (p.theta - self.point.theta) - self.slope * (p.u - self.point.u)
    }
}

pub fn tangent_line(s: &SystemData, basis: TangentBasis<'_>) -> Result<TangentLine> {
    let (g, r, _, kappa) = (s.gas.gamma(), s.gas.r(), s.gas.mu(), s.gas.kappa());
    let up = s.u_plus;
    let (slope, half_line) = match basis {
        TangentBasis::Transonic(_) => (-(g - 1.0) * up / (r * g), true),
        TangentBasis::Subsonic(eig) => {
            if s.mach_plus >= 1.0 {
                return Err(Error::RegimeMismatch(format!(
                    "tangent line exists only for M+ <= 1, got {}",
                    s.mach_plus
                )));
            }
            let stable = eig.lambda2;
            let coeff = s.m2_gamma() * kappa * (r * up / (kappa * (g - 1.0)) - stable);
            (-up * up / coeff, false)
        }
    };
    Ok(TangentLine {
        point: s.s1(),
        slope,
        direction: normalize([1.0, slope]),
        half_line,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::{EndState, GasParams};
    use crate::system::{build_system, mat_mul, tests::canonical};
    use proptest::prelude::*;

    fn check_pair(a: &Mat2, e: &EigenPair) {
        for (l, v) in [(e.lambda1, e.e1), (e.lambda2, e.e2)] {
            let av = mat_vec(a, v);
            let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!((av[0] - l * v[0]).abs() <= 1e-12 * scale, "{a:?} {e:?}");
            assert!((av[1] - l * v[1]).abs() <= 1e-12 * scale, "{a:?} {e:?}");
        }
    }

    #[test]
    fn eigen_diagonal() {
        let a = [[2.0, 0.0], [0.0, 3.0]];
        let e = eigen_2x2(&a).unwrap();
        assert_eq!((e.lambda1, e.lambda2), (3.0, 2.0));
        assert_eq!(e.e1, [0.0, 1.0]);
        assert_eq!(e.e2, [1.0, 0.0]);
    }

    #[test]
    fn eigen_canonical_subsonic() {
        let a = [[0.0, 1.0], [1.0, 2.5]];
        let e = eigen_2x2(&a).unwrap();
        // quadratic formula oracle
        let l1 = (2.5 + 10.25f64.sqrt()) / 2.0;
        let l2 = (2.5 - 10.25f64.sqrt()) / 2.0;
        assert!((e.lambda1 - l1).abs() <= 1e-14 * l1);
        assert!((e.lambda2 - l2).abs() <= 1e-14 * l2.abs());
        assert!((e.lambda1 - 2.850_781).abs() < 1e-6);
        assert!((e.lambda2 + 0.350_781).abs() < 1e-6);
        check_pair(&a, &e);
    }

    #[test]
    fn eigen_supersonic() {
        let s = canonical(2.0);
        let e = eigen_2x2(&s.a).unwrap();
        assert!((e.lambda1 - 5.265_564).abs() < 1e-6);
        assert!((e.lambda2 - 1.234_436).abs() < 1e-6);
        check_pair(&s.a, &e);
    }

    #[test]
    fn eigen_defective() {
        assert!(matches!(
            eigen_2x2(&[[1.0, 1.0], [0.0, 1.0]]),
            Err(Error::DefectiveMatrix(_))
        ));
        let e = eigen_2x2(&[[2.0, 0.0], [0.0, 2.0]]).unwrap();
        assert_eq!((e.lambda1, e.lambda2), (2.0, 2.0));
        assert!(matches!(
            eigen_2x2(&[[0.0, -1.0], [1.0, 0.0]]),
            Err(Error::ComplexEigenvalues(_))
        ));
    }

    #[test]
    fn transonic_frame_values() {
        let s = canonical(1.4f64.sqrt());
        let f = transonic_frame(&s, 1e-8).unwrap();
        let lambda2 = ((0.4 / 1.4) + 1.0 / 0.4) * 1.4f64.sqrt();
        assert!((f.lambda2 - lambda2).abs() <= 1e-14 * lambda2);
        assert!((f.lambda2 - 3.296_101_593_441_215).abs() < 1e-12);
        assert!((f.a2 - 1.4 * 2.4 / (2.0 * 1.56)).abs() < 1e-14);
        assert!((f.e1()[1] + 0.338_061_701_891_406_7).abs() < 1e-14);

        let d = mat_mul(&f.p_inv, &mat_mul(&s.a, &f.p));
        assert!(d[0][0].abs() < 1e-12 && d[0][1].abs() < 1e-12 && d[1][0].abs() < 1e-12);
        assert!((d[1][1] - f.lambda2).abs() < 1e-12);

        assert!(transonic_frame(&canonical(1.0), 1e-8).is_err());
    }

    /// g1, g2 written out term by term for the exactly transonic field.
    fn g_closed_form(s: &SystemData, f: &TransonicFrame, w: [f64; 2]) -> [f64; 2] {
        let (g, r, mu, k) = (s.gas.gamma(), s.gas.r(), s.gas.mu(), s.gas.kappa());
        let up = s.u_plus;
        let det_p = f.det_p();
        let sum = w[0] + w[1];
        let lin = -(g - 1.0) * up / (r * g) * w[0] + mu * up / (k * (g - 1.0)) * w[1];
        let g1 = ((up / (k * (g - 1.0)) - (2.0 - g) * up / (2.0 * g * k)) * sum * sum
            - r / (k * (g - 1.0)) * sum * lin
            + sum.powi(3) / (2.0 * k))
            / det_p;
        let g2 = (((g - 1.0) * up / (r * g * mu) + (2.0 - g) * up / (2.0 * g * k)) * sum * sum
            + r / (k * (g - 1.0)) * sum * lin
            - sum.powi(3) / (2.0 * k))
            / det_p;
        [g1, g2]
    }

    #[test]
    fn w_frame_round_trip_and_pushforward() {
        let s = canonical(1.4f64.sqrt());
        let f = transonic_frame(&s, 1e-8).unwrap();
        assert_eq!(f.to_w(s.s1()), [0.0, 0.0]);
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let p = PhasePoint::new(0.1 + 2.0 * next(), 0.1 + 2.0 * next());
            let back = f.from_w(f.to_w(p));
            assert!((back.u - p.u).abs() <= 1e-14 * p.u.max(1.0));
            assert!((back.theta - p.theta).abs() <= 1e-14 * p.theta.max(1.0));

            let w = [next() - 0.5, next() - 0.5];
            let pushed = mat_vec(&f.p_inv, s.rhs_poly(f.from_w(w)));
            let g = g_closed_form(&s, &f, w);
            let expect = [g[0], f.lambda2 * w[1] + g[1]];
            for i in 0..2 {
                assert!(
                    (pushed[i] - expect[i]).abs() <= 1e-12,
                    "{pushed:?} vs {expect:?}"
                );
            }
            let mine = f.w_field(w);
            for i in 0..2 {
                assert!((mine[i] - expect[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn lemma_quadratic_example() {
        let c = classify_degenerate(&|x, _| x * x, &|_, _| 0.0, 1.0, 1e-2).unwrap();
        assert_eq!(c.m, 2);
        assert!((c.a_m - 1.0).abs() < 1e-10);
        assert_eq!(c.kind, DegenerateKind::SaddleNodeNegAxis);
    }

    #[test]
    fn lemma_cubic_example() {
        let c = classify_degenerate(&|x, _| -x * x * x, &|x, _| x * x, 1.0, 1e-2).unwrap();
        assert_eq!(c.m, 3);
        assert!((c.a_m + 1.0).abs() < 1e-8);
        assert_eq!(c.kind, DegenerateKind::Saddle);

        let c = classify_degenerate(&|x, y| x * x * x + y * y, &|x, _| x * x, 1.0, 1e-2).unwrap();
        assert_eq!(c.kind, DegenerateKind::UnstableNode);
        let c = classify_degenerate(&|x, _| -2.0 * x * x, &|_, y| y * y, 3.0, 1e-2).unwrap();
        assert_eq!(c.kind, DegenerateKind::SaddleNodePosAxis);
        assert!((c.a_m + 2.0).abs() < 1e-10);
    }

    #[test]
    fn lemma_rejects_non_integer_order() {
        let r = classify_degenerate(&|x, _| x.abs().powf(2.5), &|_, _| 0.0, 1.0, 1e-2);
        assert!(matches!(r, Err(Error::FitAmbiguous { .. })));
        let r = classify_degenerate(&|_, _| 0.0, &|_, _| 0.0, 1.0, 1e-2);
        assert!(matches!(r, Err(Error::FitAmbiguous { .. })));
    }

    #[test]
    fn lemma_on_transonic_w_system() {
        let s = canonical(1.4f64.sqrt());
        let f = transonic_frame(&s, 1e-8).unwrap();
        let c = classify_transonic(&f).unwrap();
        assert_eq!(c.m, 2);
        assert!((c.a_m - 1.076_923).abs() < 0.01 * 1.076_923);
        assert_eq!(c.kind, DegenerateKind::SaddleNodeNegAxis);
    }

    #[test]
    fn tangent_lines() {
        let s = canonical(1.4f64.sqrt());
        let f = transonic_frame(&s, 1e-8).unwrap();
        let t = tangent_line(&s, TangentBasis::Transonic(&f)).unwrap();
        assert!((t.slope + 0.338_062).abs() < 1e-6);
        assert!(t.half_line);
        assert!((t.slope - f.e1()[1]).abs() < 1e-15);

        let s = canonical(1.0);
        let e = eigen_2x2(&s.a).unwrap();
        let t = tangent_line(&s, TangentBasis::Subsonic(&e)).unwrap();
        assert!((t.slope + 1.0 / 2.850_781_059_358_212).abs() < 1e-12);
        assert!((t.slope + 0.350_781).abs() < 1e-6);
        // kernel characterization: the direction is the stable eigenvector
        let d = t.direction;
        let ad = mat_vec(&s.a, d);
        assert!((ad[0] - e.lambda2 * d[0]).abs() < 1e-10);
        assert!((ad[1] - e.lambda2 * d[1]).abs() < 1e-10);

        let sup = canonical(2.0);
        let e = eigen_2x2(&sup.a).unwrap();
        assert!(tangent_line(&sup, TangentBasis::Subsonic(&e)).is_err());
    }

    fn system_with_mach(g: f64, r: f64, mu: f64, k: f64, th: f64, m: f64) -> SystemData {
        let gas = GasParams::new(g, r, mu, k).unwrap();
        let u = m * (r * g * th).sqrt();
        build_system(gas, EndState::new(1.0, u, th).unwrap()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn spectrum_by_regime(
            g in 1.05f64..3.0, r in 0.1f64..10.0, mu in 0.1f64..10.0, k in 0.1f64..10.0,
            th in 0.1f64..5.0, m in 0.05f64..3.0
        ) {
            let s = system_with_mach(g, r, mu, k, th, m);
            let disc = s.tr_a().powi(2) - 4.0 * s.det_a();
            let scale = s.a.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
            prop_assert!(disc >= -1e-12 * scale * scale);
            if (m - 1.0).abs() < 1e-6 { return Ok(()); }
            let e = eigen_2x2(&s.a).unwrap();
            if m > 1.0 {
                prop_assert!(e.lambda1 > 0.0 && e.lambda2 > 0.0);
            } else {
                prop_assert!(e.lambda1 * e.lambda2 < 0.0);
            }
            check_pair(&s.a, &e);
        }

        #[test]
        fn s2_is_unstable_node_in_band(
            g in 1.05f64..3.0, r in 0.1f64..10.0, mu in 0.1f64..10.0, k in 0.1f64..10.0,
            th in 0.1f64..5.0, t in 0.01f64..0.99
        ) {
            let lo = ((g - 1.0) / (2.0 * g)).sqrt();
            let m = lo + t * (1.0 - lo);
            let s = system_with_mach(g, r, mu, k, th, m);
            let b = s.jacobian(s.s2());
            let e = eigen_2x2(&b).unwrap();
            prop_assert!(e.lambda2 > 0.0 && e.lambda1 > e.lambda2);
        }

        #[test]
        fn transonic_w_system_is_saddle_node(
            g in 1.05f64..3.0, r in 0.1f64..10.0, mu in 0.1f64..10.0, k in 0.1f64..10.0,
            th in 0.1f64..5.0
        ) {
            let s = system_with_mach(g, r, mu, k, th, 1.0);
            let f = transonic_frame(&s, 1e-8).unwrap();
            let c = classify_transonic(&f).unwrap();
            prop_assert_eq!(c.m, 2);
            prop_assert!(c.a_m > 0.0);
            prop_assert!((c.a_m - f.a2).abs() < 0.01 * f.a2);
            let e = eigen_2x2(&s.a).unwrap();
            prop_assert!(e.lambda2.abs() <= 1e-10 * scale_of(&s.a));
            prop_assert!((e.lambda1 - f.lambda2).abs() <= 1e-10 * f.lambda2);
        }
    }

    fn scale_of(a: &Mat2) -> f64 {
        a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}
