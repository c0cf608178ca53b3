//! Phase-plane analysis of the first-order profile system on the strip
//! Theta_eps = (0, inf) x (-1, 1):
//!
//!   x' = y
//!   y' = (n - 1)(1 - y^2)/x - n eps h(y) sqrt(1 - y^2)
//!
//! where eps is the sign of z' on the arc under study. The module provides
//! the vector field, the rest point, the nullcline Gamma, the sign of dy/dx
//! by quadrant, and a finite-difference check of the linearization.

use crate::curvfn::CurvatureProfile;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

/// Grace band absorbing floating-point overshoot at the strip boundary.
const BOUNDARY_GRACE: f64 = 1e-12;
/// |x - Gamma(y)| below this counts as sitting on the nullcline.
const EXTREMUM_TOL: f64 = 1e-10;
/// Central-difference step used by `linearize_check`.
const FD_STEP: f64 = 1e-5;

/// Sign of dy/dx along an orbit through a point, per quadrant of the strip
/// relative to the nullcline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DyDxSign {
    Negative,
    Zero,
    Positive,
    /// On the axis y = 0 the orbit crosses x-levels orthogonally and y is not
    /// locally a function of x.
    Undefined,
}

/// Monotonicity verdict at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Monotonicity {
    pub dy_dx_sign: DyDxSign,
    /// True when the point lies on the nullcline, where orbits attain a local
    /// extremum of y as a function of x.
    pub y_extremum: bool,
}

/// Rest point data: location, linearization, and its spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumInfo {
    pub point: (f64, f64),
    pub jacobian: [[f64; 2]; 2],
    pub eigenvalues: (Complex64, Complex64),
}

/// One branch of the phase plane: dimension n, profile h, sign eps of z'.
#[derive(Debug, Clone)]
pub struct PhaseContext {
    n: u32,
    h: CurvatureProfile,
    eps: i8,
}

impl PhaseContext {
    pub fn new(n: u32, h: CurvatureProfile, eps: i8) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain {
                what: "dimension n",
                value: n as f64,
            });
        }
        if eps != 1 && eps != -1 {
            return Err(Error::Domain {
                what: "branch sign eps",
                value: eps as f64,
            });
        }
        Ok(PhaseContext { n, h, eps })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn h(&self) -> &CurvatureProfile {
        &self.h
    }

    pub fn eps(&self) -> i8 {
        self.eps
    }

    fn check_point(&self, x: f64, y: f64) -> Result<f64> {
        if !(x.is_finite() && y.is_finite()) || x <= 0.0 || y.abs() > 1.0 + BOUNDARY_GRACE {
            return Err(Error::OutsidePhaseSpace { x, y });
        }
        Ok(y.clamp(-1.0, 1.0))
    }

    /// The field (x', y') at a point of the strip.
    pub fn vector_field(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let y = self.check_point(x, y)?;
        let n = self.n as f64;
        let e = self.eps as f64;
        let root = (1.0 - y * y).max(0.0).sqrt();
        let f2 = (n - 1.0) * (1.0 - y * y) / x - n * e * self.h.eval_clamped(y) * root;
        Ok((y, f2))
    }

    /// Rest point ((n-1)/(n eps h(0)), 0) with its linearization, when
    /// eps h(0) > 0; None otherwise.
    pub fn equilibrium(&self) -> Option<EquilibriumInfo> {
        let n = self.n as f64;
        let e = self.eps as f64;
        let h0 = self.h.eval_clamped(0.0);
        if e * h0 <= 0.0 {
            return None;
        }
        let x0 = (n - 1.0) / (n * e * h0);
        let a = -(n - 1.0) / (x0 * x0);
        let b = -n * e * self.h.eval_deriv_clamped(0.0);
        let jacobian = [[0.0, 1.0], [a, b]];
        // Spectrum of [[0, 1], [a, b]]: roots of t^2 - b t - a.
        let disc = b * b + 4.0 * a;
        let eigenvalues = if disc >= 0.0 {
            let r = disc.sqrt();
            (
                Complex64::new(0.5 * (b + r), 0.0),
                Complex64::new(0.5 * (b - r), 0.0),
            )
        } else {
            let r = (-disc).sqrt();
            (
                Complex64::new(0.5 * b, 0.5 * r),
                Complex64::new(0.5 * b, -0.5 * r),
            )
        };
        Some(EquilibriumInfo {
            point: (x0, 0.0),
            jacobian,
            eigenvalues,
        })
    }

    /// Nullcline Gamma_eps(y) = (n-1) sqrt(1-y^2) / (n eps h(y)), defined
    /// where eps h(y) > 0.
    pub fn gamma(&self, y: f64) -> Option<f64> {
        if !y.is_finite() || y.abs() > 1.0 + BOUNDARY_GRACE {
            return None;
        }
        let y = y.clamp(-1.0, 1.0);
        let n = self.n as f64;
        let e = self.eps as f64;
        let hv = self.h.eval_clamped(y);
        if e * hv <= 0.0 {
            return None;
        }
        Some((n - 1.0) * (1.0 - y * y).max(0.0).sqrt() / (n * e * hv))
    }

    /// Sign of dy/dx at a point, and whether the point sits on the nullcline.
    /// Orbits are monotone in each region cut out by y = 0 and the nullcline:
    /// above the nullcline-crossing value of x the branch with y > 0 falls and
    /// the branch with y < 0 rises, and conversely below it.
    pub fn monotonicity(&self, x: f64, y: f64) -> Result<Monotonicity> {
        let y = self.check_point(x, y)?;
        let y_extremum = match self.gamma(y) {
            Some(g) => (x - g).abs() <= EXTREMUM_TOL,
            None => false,
        };
        if y.abs() < BOUNDARY_GRACE {
            return Ok(Monotonicity {
                dy_dx_sign: DyDxSign::Undefined,
                y_extremum,
            });
        }
        if y_extremum {
            return Ok(Monotonicity {
                dy_dx_sign: DyDxSign::Zero,
                y_extremum,
            });
        }
        let (_, f2) = self.vector_field(x, y)?;
        let s = f2 / y;
        let dy_dx_sign = if s > 0.0 {
            DyDxSign::Positive
        } else if s < 0.0 {
            DyDxSign::Negative
        } else {
            DyDxSign::Zero
        };
        Ok(Monotonicity {
            dy_dx_sign,
            y_extremum,
        })
    }

    /// Max-abs discrepancy between the analytic Jacobian at the rest point and
    /// a central finite-difference Jacobian with step 1e-5.
    pub fn linearize_check(&self) -> Result<f64> {
        let eq = self.equilibrium().ok_or(Error::NoEquilibrium)?;
        let (x0, y0) = eq.point;
        let d = FD_STEP;
        let fxp = self.vector_field(x0 + d, y0)?;
        let fxm = self.vector_field(x0 - d, y0)?;
        let fyp = self.vector_field(x0, y0 + d)?;
        let fym = self.vector_field(x0, y0 - d)?;
        let fd = [
            [(fxp.0 - fxm.0) / (2.0 * d), (fyp.0 - fym.0) / (2.0 * d)],
            [(fxp.1 - fxm.1) / (2.0 * d), (fyp.1 - fym.1) / (2.0 * d)],
        ];
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((fd[i][j] - eq.jacobian[i][j]).abs());
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(n: u32, coeffs: &[f64], eps: i8) -> PhaseContext {
        PhaseContext::new(
            n,
            CurvatureProfile::polynomial(coeffs.to_vec()).unwrap(),
            eps,
        )
        .unwrap()
    }

    #[test]
    fn field_pinned_values() {
        let c = ctx(2, &[1.0], 1);
        let (f1, f2) = c.vector_field(1.0, 0.0).unwrap();
        assert_eq!(f1, 0.0);
        assert!((f2 + 1.0).abs() < 1e-15);

        let c = ctx(3, &[0.0], 1);
        let (f1, f2) = c.vector_field(2.0, 0.6).unwrap();
        assert!((f1 - 0.6).abs() < 1e-15);
        assert!((f2 - 0.64).abs() < 1e-15);
    }

    #[test]
    fn field_domain_errors() {
        let c = ctx(2, &[1.0], 1);
        assert!(c.vector_field(0.0, 0.0).is_err());
        assert!(c.vector_field(-1.0, 0.0).is_err());
        assert!(c.vector_field(1.0, 1.5).is_err());
    }

    #[test]
    fn equilibrium_location_and_absence() {
        let c = ctx(2, &[1.0], 1);
        let eq = c.equilibrium().unwrap();
        assert!((eq.point.0 - 0.5).abs() < 1e-15);
        assert_eq!(eq.point.1, 0.0);
        // Same profile on the opposite branch has no rest point.
        assert!(ctx(2, &[1.0], -1).equilibrium().is_none());
        assert!(ctx(2, &[0.0], 1).equilibrium().is_none());
    }

    #[test]
    fn jacobian_corner_entry() {
        // n = 3, h = 2: x0 = 1/3 and the lower-left entry is -18.
        let c = ctx(3, &[2.0], 1);
        let eq = c.equilibrium().unwrap();
        assert!((eq.point.0 - 1.0 / 3.0).abs() < 1e-15);
        assert!((eq.jacobian[1][0] + 18.0).abs() < 1e-10);
        assert_eq!(eq.jacobian[0][0], 0.0);
        assert_eq!(eq.jacobian[0][1], 1.0);
    }

    #[test]
    fn even_profile_center_spectrum() {
        // n = 2, h = 1 + y^2: eigenvalues are +-2i.
        let c = ctx(2, &[1.0, 0.0, 1.0], 1);
        let eq = c.equilibrium().unwrap();
        let (l1, l2) = eq.eigenvalues;
        assert!(l1.re.abs() < 1e-12 && l2.re.abs() < 1e-12);
        assert!((l1.im.abs() - 2.0).abs() < 1e-12);
        assert!((l1.im + l2.im).abs() < 1e-15);
    }

    #[test]
    fn even_profile_spectrum_formula() {
        // For even h the spectrum is +- i n h(0) / sqrt(n - 1).
        for (n, coeffs) in [(2u32, vec![1.5, 0.0, 0.5]), (4, vec![0.7, 0.0, 0.0, 0.0, 0.2])] {
            let c = ctx(n, &coeffs, 1);
            let eq = c.equilibrium().unwrap();
            let nf = n as f64;
            let expect = nf * coeffs[0] / (nf - 1.0).sqrt();
            assert!((eq.eigenvalues.0.im.abs() - expect).abs() < 1e-8);
            assert!(eq.eigenvalues.0.re.abs() < 1e-8);
        }
    }

    #[test]
    fn gamma_pinned_value_and_domain() {
        let c = ctx(2, &[1.0], 1);
        assert!((c.gamma(0.8).unwrap() - 0.3).abs() < 1e-15);
        // h <= 0 on the branch: no nullcline anywhere.
        let c = ctx(2, &[-1.0, 0.0, 1.0], 1);
        assert!(c.gamma(0.0).is_none());
        assert!(c.gamma(0.9).is_none());
    }

    #[test]
    fn nullcline_kills_second_component() {
        let c = ctx(2, &[1.0, 0.0, 1.0], 1);
        for &y in &[-0.9, -0.4, 0.0, 0.3, 0.8] {
            let g = c.gamma(y).unwrap();
            let (_, f2) = c.vector_field(g, y).unwrap();
            assert!(f2.abs() <= 1e-10, "f2 = {f2} at y = {y}");
        }
    }

    #[test]
    fn monotonicity_cases() {
        let c = ctx(2, &[1.0], 1);
        // x beyond the nullcline, upper half: y falls along increasing x.
        let m = c.monotonicity(1.0, 0.5).unwrap();
        assert_eq!(m.dy_dx_sign, DyDxSign::Negative);
        assert!(!m.y_extremum);
        // On the nullcline: extremum.
        let m = c.monotonicity(0.3, 0.8).unwrap();
        assert_eq!(m.dy_dx_sign, DyDxSign::Zero);
        assert!(m.y_extremum);
        // Orthogonal crossing of y = 0.
        let m = c.monotonicity(2.0, 0.0).unwrap();
        assert_eq!(m.dy_dx_sign, DyDxSign::Undefined);
        // Inside the nullcline, lower half: y falls along increasing x.
        let m = c.monotonicity(0.1, -0.5).unwrap();
        assert_eq!(m.dy_dx_sign, DyDxSign::Negative);
    }

    #[test]
    fn linearize_check_small() {
        for c in [
            ctx(2, &[1.0], 1),
            ctx(2, &[1.0, 0.0, 1.0], 1),
            ctx(3, &[2.0, 0.7], 1),
            ctx(5, &[0.4, -0.1, 0.3], 1),
        ] {
            let worst = c.linearize_check().unwrap();
            assert!(worst <= 1e-6, "discrepancy {worst}");
        }
        assert!(matches!(
            ctx(2, &[-1.0], 1).linearize_check(),
            Err(Error::NoEquilibrium)
        ));
    }

    proptest! {
        /// Consistency between the field and the monotonicity verdict at
        /// points off the special sets.
        #[test]
        fn prop_field_matches_monotonicity(
            x in 0.05f64..3.0,
            y in -0.99f64..0.99,
        ) {
            let c = ctx(2, &[1.0, 0.5, 1.0], 1);
            prop_assume!(y.abs() > 1e-6);
            if let Some(g) = c.gamma(y) {
                prop_assume!((x - g).abs() > 1e-6);
            }
            let (_, f2) = c.vector_field(x, y).unwrap();
            let m = c.monotonicity(x, y).unwrap();
            let expect = if f2 / y > 0.0 { DyDxSign::Positive } else { DyDxSign::Negative };
            prop_assert_eq!(m.dy_dx_sign, expect);
        }

        /// For even h the field is symmetric under y -> -y.
        #[test]
        fn prop_even_field_symmetry(x in 0.05f64..3.0, y in -0.99f64..0.99) {
            let c = ctx(3, &[1.0, 0.0, 0.4], 1);
            let (f1p, f2p) = c.vector_field(x, y).unwrap();
            let (f1m, f2m) = c.vector_field(x, -y).unwrap();
            prop_assert!((f1p + f1m).abs() <= 1e-12);
            prop_assert!((f2p - f2m).abs() <= 1e-12);
        }
    }
}
