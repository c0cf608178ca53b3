//! Curvature profiles h(y): the prescribed mean curvature as a function of the
//! angle function y = cos(phi), evaluated on [-1, 1].
//!
//! Three families are supported:
//! - constant profiles,
//! - polynomials in y with ascending coefficients,
//! - the grim-reaper profile, for which the revolution of z = -log(cos x)
//!   around the z-axis solves the n = 2 profile equation exactly.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Absolute slack accepted beyond |y| = 1 before an evaluation is rejected.
const DOMAIN_GRACE: f64 = 1e-12;
/// Above 1 - SERIES_SWITCH the grim-reaper profile evaluates through a series
/// about y = 1; the direct formula is 0/0 there.
const SERIES_SWITCH: f64 = 1e-6;
/// Grid size used by `parity`.
const PARITY_GRID: usize = 1001;
/// Grid size used by `sign_and_zeros`.
const ZERO_GRID: usize = 2048;
/// A refined zero must reach this magnitude to be reported.
const ZERO_ACCEPT: f64 = 1e-12;

/// h(0) for the grim-reaper profile.
const GRIM_H0: f64 = std::f64::consts::FRAC_1_PI;

/// Prescribed mean curvature as a function of the angle function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurvatureProfile {
    /// h(y) = c.
    Constant { c: f64 },
    /// h(y) = coeffs[0] + coeffs[1] y + coeffs[2] y^2 + ...
    #[serde(rename = "poly")]
    Polynomial { coeffs: Vec<f64> },
    /// Mean curvature of the revolved grim-reaper curve as a function of its
    /// angle function: h(y) = (y + sqrt(1 - y^2) / arccos y) / 2 on [0, 1],
    /// extended linearly below 0 with slope h'(0+). C^1 on [-1, 1].
    GrimReaper,
}

/// Result of the parity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    NotEven,
}

/// A located zero of h on [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileZero {
    pub y: f64,
    /// True when no sign change brackets the zero (interior tangency or a
    /// boundary root); the multiplicity is then undetermined.
    pub tangential: bool,
}

/// Extrema and zero set of h over [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignSummary {
    pub min_value: f64,
    pub max_value: f64,
    pub zeros: Vec<ProfileZero>,
}

impl CurvatureProfile {
    pub fn constant(c: f64) -> Self {
        CurvatureProfile::Constant { c }
    }

    /// Polynomial profile with ascending coefficients. The list must be
    /// nonempty and finite.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Precondition(
                "polynomial profile needs at least one coefficient".into(),
            ));
        }
        if let Some(&bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain {
                what: "polynomial coefficient",
                value: bad,
            });
        }
        Ok(CurvatureProfile::Polynomial { coeffs })
    }

    pub fn grim_reaper() -> Self {
        CurvatureProfile::GrimReaper
    }

    /// h(y). Rejects |y| > 1 beyond a small grace band.
    pub fn eval(&self, y: f64) -> Result<f64> {
        let y = check_domain(y)?;
        Ok(self.eval_clamped(y))
    }

    /// h'(y). One-sided derivatives apply at the endpoints; at a point where
    /// the two one-sided slopes agree the common value is returned.
    pub fn eval_deriv(&self, y: f64) -> Result<f64> {
        let y = check_domain(y)?;
        Ok(self.eval_deriv_clamped(y))
    }

    /// Evaluation with |y| clamped into [-1, 1]; hot path for the integrator,
    /// where y = cos(phi) can overshoot by rounding only.
    pub(crate) fn eval_clamped(&self, y: f64) -> f64 {
        let y = y.clamp(-1.0, 1.0);
        match self {
            CurvatureProfile::Constant { c } => *c,
            CurvatureProfile::Polynomial { coeffs } => {
                let mut v = 0.0;
                for &c in coeffs.iter().rev() {
                    v = v * y + c;
                }
                v
            }
            CurvatureProfile::GrimReaper => grim_eval(y),
        }
    }

    pub(crate) fn eval_deriv_clamped(&self, y: f64) -> f64 {
        let y = y.clamp(-1.0, 1.0);
        match self {
            CurvatureProfile::Constant { .. } => 0.0,
            CurvatureProfile::Polynomial { coeffs } => {
                let mut v = 0.0;
                for (k, &c) in coeffs.iter().enumerate().skip(1).rev() {
                    v = v * y + c * k as f64;
                }
                v
            }
            CurvatureProfile::GrimReaper => grim_deriv(y),
        }
    }

    /// Even / not-even decision on a symmetric grid of 1001 points with
    /// tolerance `tol`; polynomial profiles must additionally have every
    /// odd-degree coefficient below `tol` in magnitude.
    pub fn parity(&self, tol: f64) -> Parity {
        let mut grid_dev: f64 = 0.0;
        for i in 0..PARITY_GRID {
            let y = -1.0 + 2.0 * i as f64 / (PARITY_GRID - 1) as f64;
            let d = (self.eval_clamped(y) - self.eval_clamped(-y)).abs();
            grid_dev = grid_dev.max(d);
        }
        let coeffs_even = match self {
            CurvatureProfile::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .filter(|(k, _)| k % 2 == 1)
                .all(|(_, c)| c.abs() <= tol),
            _ => true,
        };
        if grid_dev <= tol && coeffs_even {
            Parity::Even
        } else {
            Parity::NotEven
        }
    }

    /// Extrema and zeros of h over [-1, 1]. Zeros bracketed by a sign change
    /// are bisected; interior minima of |h| that reach zero without a sign
    /// change and boundary roots are reported as tangential.
    pub fn sign_and_zeros(&self) -> SignSummary {
        let n = ZERO_GRID;
        let ys: Vec<f64> = (0..n)
            .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
            .collect();
        let vs: Vec<f64> = ys.iter().map(|&y| self.eval_clamped(y)).collect();

        let mut min_v = f64::INFINITY;
        let mut max_v = f64::NEG_INFINITY;
        for &v in &vs {
            min_v = min_v.min(v);
            max_v = max_v.max(v);
        }

        let mut zeros: Vec<ProfileZero> = Vec::new();
        let push_zero = |y: f64, tangential: bool, zeros: &mut Vec<ProfileZero>| {
            if zeros.iter().all(|z| (z.y - y).abs() > 1e-9) {
                zeros.push(ProfileZero { y, tangential });
            }
        };

        // Transversal zeros: bisection on bracketing sign changes.
        for i in 0..n - 1 {
            if vs[i] == 0.0 {
                push_zero(ys[i], !(i > 0 && vs[i - 1] * vs[i + 1] < 0.0), &mut zeros);
                continue;
            }
            if vs[i] * vs[i + 1] < 0.0 {
                let (mut a, mut b) = (ys[i], ys[i + 1]);
                let (mut fa, _fb) = (vs[i], vs[i + 1]);
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    let fm = self.eval_clamped(m);
                    if fa * fm <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                        fa = fm;
                    }
                }
                let root = 0.5 * (a + b);
                if self.eval_clamped(root).abs() < ZERO_ACCEPT {
                    push_zero(root, false, &mut zeros);
                }
            }
        }

        // Tangencies: refine every interior local minimum of |h| that is not
        // adjacent to a sign change, accept when it reaches zero.
        for i in 1..n - 1 {
            let (a0, a1, a2) = (vs[i - 1].abs(), vs[i].abs(), vs[i + 1].abs());
            if a1 <= a0 && a1 <= a2 && vs[i - 1] * vs[i + 1] > 0.0 && a1 > 0.0 {
                let y_min = golden_min_abs(self, ys[i - 1], ys[i + 1]);
                let v = self.eval_clamped(y_min).abs();
                min_v = min_v.min(self.eval_clamped(y_min));
                max_v = max_v.max(self.eval_clamped(y_min));
                if v < ZERO_ACCEPT {
                    push_zero(y_min, true, &mut zeros);
                }
            }
        }

        // Boundary roots carry no observable sign change.
        for &y in &[-1.0, 1.0] {
            if self.eval_clamped(y).abs() < ZERO_ACCEPT {
                push_zero(y, true, &mut zeros);
            }
        }

        zeros.sort_by(|a, b| a.y.total_cmp(&b.y));
        SignSummary {
            min_value: min_v,
            max_value: max_v,
            zeros,
        }
    }

    /// Largest |h| over [-1, 1], from the same scan as `sign_and_zeros`.
    pub fn max_abs(&self) -> f64 {
        let s = self.sign_and_zeros();
        s.min_value.abs().max(s.max_value.abs())
    }
}

fn check_domain(y: f64) -> Result<f64> {
    if !y.is_finite() || y.abs() > 1.0 + DOMAIN_GRACE {
        return Err(Error::Domain {
            what: "angle function y",
            value: y,
        });
    }
    Ok(y.clamp(-1.0, 1.0))
}

/// sqrt(1 - y^2) / arccos(y) through its series about y = 1; u = 1 - y.
fn grim_ratio_series(u: f64) -> f64 {
    1.0 - u / 3.0 - u * u / 45.0 - u * u * u / 189.0
}

fn grim_eval(y: f64) -> f64 {
    if y < 0.0 {
        GRIM_H0 + grim_slope_at_zero() * y
    } else if y > 1.0 - SERIES_SWITCH {
        0.5 * (y + grim_ratio_series(1.0 - y))
    } else {
        0.5 * (y + (1.0 - y * y).sqrt() / y.acos())
    }
}

fn grim_slope_at_zero() -> f64 {
    use std::f64::consts::PI;
    0.5 * (1.0 + 4.0 / (PI * PI))
}

fn grim_deriv(y: f64) -> f64 {
    if y < 0.0 {
        grim_slope_at_zero()
    } else if y > 1.0 - SERIES_SWITCH {
        let u = 1.0 - y;
        0.5 * (1.0 + 1.0 / 3.0 + 2.0 * u / 45.0 + u * u / 63.0)
    } else if y == 0.0 {
        grim_slope_at_zero()
    } else {
        let a = (1.0 - y * y).sqrt();
        let b = y.acos();
        0.5 * (1.0 + (a - y * b) / (a * b * b))
    }
}

/// Golden-section minimization of |h| on [a, b].
fn golden_min_abs(h: &CurvatureProfile, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = h.eval_clamped(c).abs();
    let mut fd = h.eval_clamped(d).abs();
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = h.eval_clamped(c).abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = h.eval_clamped(d).abs();
        }
        if b - a < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn poly(coeffs: &[f64]) -> CurvatureProfile {
        CurvatureProfile::polynomial(coeffs.to_vec()).unwrap()
    }

    #[test]
    fn constant_eval() {
        let h = CurvatureProfile::constant(1.0);
        assert_eq!(h.eval(0.3).unwrap(), 1.0);
        assert_eq!(h.eval_deriv(0.9).unwrap(), 0.0);
    }

    #[test]
    fn polynomial_eval_matches_horner() {
        let h = poly(&[2.0, 1.0]); // 2 + y
        assert_eq!(h.eval(0.5).unwrap(), 2.5);
        let h = poly(&[-1.0, 0.0, 1.0]); // y^2 - 1
        assert_eq!(h.eval(0.5).unwrap(), -0.75);
        assert_eq!(h.eval_deriv(0.5).unwrap(), 1.0);
    }

    #[test]
    fn grim_reaper_pinned_values() {
        let h = CurvatureProfile::grim_reaper();
        // h(0) = 1/pi and h(1) = 1: the revolved profile z = -log cos x then
        // satisfies the n = 2 profile equation with apex curvature h(1).
        assert!((h.eval(0.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert!((h.eval(1.0).unwrap() - 1.0).abs() < 1e-12);
        // Direct formula midrange.
        let y: f64 = 0.5;
        let expect = 0.5 * (y + (1.0f64 - y * y).sqrt() / y.acos());
        assert_eq!(h.eval(y).unwrap(), expect);
    }

    #[test]
    fn grim_reaper_series_switch_is_continuous() {
        let h = CurvatureProfile::grim_reaper();
        let yc = 1.0 - 1e-6;
        let lo = h.eval(yc - 1e-9).unwrap();
        let hi = h.eval(yc + 1e-9).unwrap();
        assert!((hi - lo).abs() < 1e-8, "jump {}", (hi - lo).abs());
    }

    #[test]
    fn domain_rejection() {
        let h = CurvatureProfile::constant(1.0);
        assert!(h.eval(1.0 + 1e-13).is_ok()); // grace band
        assert!(h.eval(1.1).is_err());
        assert!(h.eval(f64::NAN).is_err());
    }

    #[test]
    fn parity_decisions() {
        assert_eq!(poly(&[-1.0, 0.0, 1.0]).parity(1e-9), Parity::Even);
        assert_eq!(poly(&[1.0, 0.0, 1.0]).parity(1e-9), Parity::Even);
        assert_eq!(poly(&[2.0, 1.0]).parity(1e-9), Parity::NotEven);
        assert_eq!(CurvatureProfile::grim_reaper().parity(1e-9), Parity::NotEven);
        assert_eq!(CurvatureProfile::constant(3.0).parity(1e-9), Parity::Even);
    }

    #[test]
    fn zeros_transversal() {
        let s = poly(&[-0.5, 1.0]).sign_and_zeros(); // y - 1/2
        assert_eq!(s.zeros.len(), 1);
        assert!((s.zeros[0].y - 0.5).abs() < 1e-12);
        assert!(!s.zeros[0].tangential);
        assert!((s.min_value + 1.5).abs() < 1e-12);
        assert!((s.max_value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zeros_boundary() {
        let s = poly(&[-1.0, 0.0, 1.0]).sign_and_zeros(); // y^2 - 1
        let ys: Vec<f64> = s.zeros.iter().map(|z| z.y).collect();
        assert_eq!(ys.len(), 2);
        assert!((ys[0] + 1.0).abs() < 1e-9 && (ys[1] - 1.0).abs() < 1e-9);
        assert!((s.max_value - 0.0).abs() < 1e-12);
    }

    #[test]
    fn zeros_tangential() {
        let s = poly(&[0.0, 0.0, 2.0, 1.0]).sign_and_zeros(); // y^2 (y + 2)
        assert_eq!(s.zeros.len(), 1);
        let z = s.zeros[0];
        assert!(z.y.abs() < 1e-7, "zero at {}", z.y);
        assert!(z.tangential);
    }

    #[test]
    fn no_zeros_for_positive_profile() {
        let s = poly(&[1.0, 0.0, 1.0]).sign_and_zeros(); // 1 + y^2
        assert!(s.zeros.is_empty());
        assert!((s.min_value - 1.0).abs() < 1e-12);
        assert!((s.max_value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let h: CurvatureProfile = serde_json::from_str(r#"{"kind":"poly","coeffs":[2.0,1.0]}"#).unwrap();
        assert_eq!(h, poly(&[2.0, 1.0]));
        let h: CurvatureProfile = serde_json::from_str(r#"{"kind":"constant","c":1.0}"#).unwrap();
        assert_eq!(h, CurvatureProfile::constant(1.0));
        let h: CurvatureProfile = serde_json::from_str(r#"{"kind":"grim_reaper"}"#).unwrap();
        assert_eq!(h, CurvatureProfile::GrimReaper);
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, r#"{"kind":"grim_reaper"}"#);
    }

    /// Shared derivative check: central differences in the interior, one-sided
    /// at the endpoints, step 1e-5, agreement to 1e-6.
    fn assert_deriv_agrees(h: &CurvatureProfile, y: f64) {
        let d = 1e-5;
        let fd = if y > 1.0 - d {
            (h.eval(1.0).unwrap() - h.eval(1.0 - d).unwrap()) / d
        } else if y < -1.0 + d {
            (h.eval(-1.0 + d).unwrap() - h.eval(-1.0).unwrap()) / d
        } else {
            (h.eval(y + d).unwrap() - h.eval(y - d).unwrap()) / (2.0 * d)
        };
        let an = h.eval_deriv(y.clamp(-1.0 + d, 1.0 - d)).unwrap();
        assert!(
            (fd - an).abs() <= 1e-6,
            "derivative mismatch at y = {y}: fd {fd} vs analytic {an}"
        );
    }

    proptest! {
        #[test]
        fn prop_deriv_matches_fd(y in -1.0f64..1.0) {
            assert_deriv_agrees(&CurvatureProfile::grim_reaper(), y);
            assert_deriv_agrees(&poly(&[0.3, -0.2, 0.8, 0.1, -0.4]), y);
            assert_deriv_agrees(&CurvatureProfile::constant(2.0), y);
        }

        #[test]
        fn prop_even_profiles_are_symmetric(y in -1.0f64..1.0) {
            let h = poly(&[1.0, 0.0, 1.0]);
            prop_assert!((h.eval(y).unwrap() - h.eval(-y).unwrap()).abs() <= 1e-12);
        }
    }
}
