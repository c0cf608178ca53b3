//! Closed-form reference profiles and solvability checks used to validate
//! the integrator: round spheres and cylinders of constant mean curvature,
//! the minimal catenoid, the rotated grim-reaper graph, and the ball-domain
//! Dirichlet solvability test.

use crate::curvfn::CurvatureProfile;
use crate::error::{Error, Result};
use crate::integrate::ProfileState;
use serde::Serialize;

/// Which closed form a profile samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleKind {
    /// x = sin(Hs)/H, z = (1 - cos(Hs))/H, phi = Hs; parameter is arclength.
    CmcSphere { mean_curvature: f64 },
    /// x = c cosh(z/c) by arclength: x = sqrt(c^2 + s^2), z = c asinh(s/c).
    MinimalCatenoid { neck: f64 },
    /// z = -log cos x; parameter is x in [0, pi/2).
    GrimReaperBowl,
}

/// A closed-form profile: a sampler over a stated parameter range.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleProfile {
    pub name: &'static str,
    pub kind: OracleKind,
    /// Valid parameter interval (inclusive endpoints are sampleable).
    pub range: (f64, f64),
}

impl OracleProfile {
    /// Exact state at parameter t (arclength for the sphere and catenoid,
    /// axis distance for the grim-reaper graph).
    pub fn sample(&self, t: f64) -> ProfileState {
        match self.kind {
            OracleKind::CmcSphere { mean_curvature: hh } => {
                ProfileState::new(t, (hh * t).sin() / hh, (1.0 - (hh * t).cos()) / hh, hh * t)
            }
            OracleKind::MinimalCatenoid { neck: c } => ProfileState::new(
                t,
                (c * c + t * t).sqrt(),
                c * (t / c).asinh(),
                // Tangent angle from (x', z') = (s, c)/sqrt(c^2+s^2).
                c.atan2(t),
            ),
            OracleKind::GrimReaperBowl => {
                ProfileState::new((t.tan()).asinh(), t, -(t.cos().ln()), t)
            }
        }
    }

    /// `count` evenly spaced samples across the parameter range.
    pub fn samples(&self, count: usize) -> Vec<ProfileState> {
        let (lo, hi) = self.range;
        let m = count.max(2);
        (0..m)
            .map(|i| self.sample(lo + (hi - lo) * i as f64 / (m - 1) as f64))
            .collect()
    }

    /// The curvature profile this oracle solves.
    pub fn matching_h(&self) -> CurvatureProfile {
        match self.kind {
            OracleKind::CmcSphere { mean_curvature } => {
                CurvatureProfile::constant(mean_curvature)
            }
            OracleKind::MinimalCatenoid { .. } => CurvatureProfile::constant(0.0),
            OracleKind::GrimReaperBowl => CurvatureProfile::grim_reaper(),
        }
    }
}

/// Round sphere of constant mean curvature H: radius 1/H, profile a
/// semicircle from pole to pole.
pub fn cmc_sphere(mean_curvature: f64, n: u32) -> Result<OracleProfile> {
    if !(mean_curvature > 0.0) {
        return Err(Error::Domain {
            what: "sphere mean curvature (must be positive)",
            value: mean_curvature,
        });
    }
    let _ = n; // The profile is dimension-independent; all curvatures equal H.
    Ok(OracleProfile {
        name: "cmc-sphere",
        kind: OracleKind::CmcSphere { mean_curvature },
        range: (0.0, std::f64::consts::PI / mean_curvature),
    })
}

/// Radius of the right circular cylinder with mean curvature |h0|.
pub fn cmc_cylinder(h0: f64, n: u32) -> Result<f64> {
    if h0 == 0.0 || !h0.is_finite() {
        return Err(Error::Domain {
            what: "cylinder mean curvature (must be nonzero)",
            value: h0,
        });
    }
    Ok((n as f64 - 1.0) / (n as f64 * h0.abs()))
}

/// Minimal catenoid x = c cosh(z/c) in R^3, arclength-parametrized.
pub fn minimal_catenoid(c: f64) -> Result<OracleProfile> {
    if !(c > 0.0) {
        return Err(Error::Domain {
            what: "catenoid neck radius (must be positive)",
            value: c,
        });
    }
    Ok(OracleProfile {
        name: "minimal-catenoid",
        kind: OracleKind::MinimalCatenoid { neck: c },
        range: (-4.0 * c, 4.0 * c),
    })
}

/// The rotated grim-reaper graph z = -log cos x, asymptotic to the cylinder
/// of radius pi/2.
pub fn grim_reaper_bowl() -> OracleProfile {
    OracleProfile {
        name: "grim-reaper-bowl",
        kind: OracleKind::GrimReaperBowl,
        range: (0.0, std::f64::consts::FRAC_PI_2 - 0.1),
    }
}

/// Solvability record for the Dirichlet problem on a ball of radius rho.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DirichletBallCheck {
    pub cond_volume: bool,
    pub cond_boundary: bool,
    pub solvable: bool,
}

/// Volume of the unit ball in R^n by the two-step recursion
/// w_n = w_{n-2} * 2 pi / n.
pub fn unit_ball_volume(n: u32) -> f64 {
    let mut w = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = n % 2;
    while k < n {
        k += 2;
        w *= 2.0 * std::f64::consts::PI / k as f64;
    }
    w
}

/// Hypothesis check for solving the prescribed-curvature Dirichlet problem
/// on the ball of radius rho: a volume pinch and a boundary mean-curvature
/// bound (the sphere of radius rho has boundary mean curvature 1/rho).
pub fn dirichlet_ball_check(n: u32, h_max: f64, rho: f64) -> Result<DirichletBallCheck> {
    if n < 2 {
        return Err(Error::Domain {
            what: "dimension n",
            value: n as f64,
        });
    }
    if !(h_max >= 0.0) {
        return Err(Error::Domain {
            what: "curvature bound (must be nonnegative)",
            value: h_max,
        });
    }
    if !(rho > 0.0) {
        return Err(Error::Domain {
            what: "ball radius (must be positive)",
            value: rho,
        });
    }
    let wn = unit_ball_volume(n);
    let cond_volume = h_max.powi(n as i32) * (wn * rho.powi(n as i32)) < wn;
    let cond_boundary = 1.0 / rho >= (n as f64 / (n as f64 - 1.0)) * h_max;
    Ok(DirichletBallCheck {
        cond_volume,
        cond_boundary,
        solvable: cond_volume && cond_boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::pmc_residual;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn sphere_profile_anchors() {
        let sph = cmc_sphere(1.0, 2).unwrap();
        let eq = sph.sample(FRAC_PI_2);
        assert!((eq.x - 1.0).abs() < 1e-15);
        assert!((eq.phi - FRAC_PI_2).abs() < 1e-15);
        // Radius 1/H caps the axis distance.
        let sph2 = cmc_sphere(2.0, 2).unwrap();
        let top = sph2.sample(FRAC_PI_2 / 2.0);
        assert!((top.x - 0.5).abs() < 1e-15);
        assert!(cmc_sphere(0.0, 2).is_err());
    }

    #[test]
    fn sphere_residual_is_rounding_level() {
        for n in [2u32, 3] {
            let sph = cmc_sphere(1.0, n).unwrap();
            let pts = sph.samples(3142);
            assert!(pmc_residual(&pts, n, &sph.matching_h()) <= 1e-10);
        }
    }

    #[test]
    fn cylinder_radius_matches_equilibrium() {
        assert!((cmc_cylinder(1.0, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!((cmc_cylinder(2.0, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let ctx = crate::phase::PhaseContext::new(
            2,
            CurvatureProfile::constant(1.0),
            1,
        )
        .unwrap();
        assert_eq!(ctx.equilibrium().unwrap().point.0, cmc_cylinder(1.0, 2).unwrap());
        assert!(cmc_cylinder(0.0, 2).is_err());
    }

    #[test]
    fn catenoid_profile_anchors() {
        let cat = minimal_catenoid(1.0).unwrap();
        let neck = cat.sample(0.0);
        assert!((neck.x - 1.0).abs() < 1e-15);
        assert!(neck.z.abs() < 1e-15);
        assert!((neck.phi - FRAC_PI_2).abs() < 1e-15);
        // At z = 1 the radius is cosh 1.
        let s_at_z1 = 1f64.sinh(); // z = asinh(s) = 1
        let p = cat.sample(s_at_z1);
        assert!((p.z - 1.0).abs() < 1e-12);
        assert!((p.x - 1f64.cosh()).abs() < 1e-12);
        assert!(minimal_catenoid(-1.0).is_err());
    }

    #[test]
    fn catenoid_residual_is_rounding_level() {
        let cat = minimal_catenoid(1.0).unwrap();
        let pts = cat.samples(8000);
        assert!(pmc_residual(&pts, 2, &cat.matching_h()) <= 1e-10);
    }

    #[test]
    fn grim_reaper_anchors_and_residual() {
        let g = grim_reaper_bowl();
        let apex = g.sample(0.0);
        assert_eq!(apex.x, 0.0);
        assert_eq!(apex.z, 0.0);
        assert_eq!(apex.phi, 0.0);
        let p = g.sample(1.0);
        assert!((p.z - 0.6156264703860142).abs() < 1e-12);
        // Arclength is the inverse Gudermannian of x.
        assert!((p.s - (1f64.tan()).asinh()).abs() < 1e-12);
        let pts = g.samples(4000);
        assert!(pmc_residual(&pts, 2, &g.matching_h()) <= 1e-8);
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_truth_table() {
        let r = dirichlet_ball_check(2, 1.0, 0.4).unwrap();
        assert!(r.cond_volume && r.cond_boundary && r.solvable);
        let r = dirichlet_ball_check(2, 1.0, 0.6).unwrap();
        assert!(r.cond_volume && !r.cond_boundary && !r.solvable);
        for n in [2u32, 3, 5] {
            for rho in [0.1, 1.0, 10.0] {
                let r = dirichlet_ball_check(n, 0.0, rho).unwrap();
                assert!(r.solvable, "minimal case must be solvable");
            }
        }
    }

    #[test]
    fn dirichlet_monotone_in_curvature_and_radius() {
        let grid: Vec<f64> = (0..20).map(|i| 0.05 + 0.15 * i as f64).collect();
        for n in [2u32, 3] {
            for w in grid.windows(2) {
                for &rho in &grid {
                    let lo = dirichlet_ball_check(n, w[0], rho).unwrap();
                    let hi = dirichlet_ball_check(n, w[1], rho).unwrap();
                    // Raising the curvature bound never helps.
                    assert!(lo.cond_volume || !hi.cond_volume);
                    assert!(lo.cond_boundary || !hi.cond_boundary);
                }
                for &hm in &grid {
                    let lo = dirichlet_ball_check(n, hm, w[0]).unwrap();
                    let hi = dirichlet_ball_check(n, hm, w[1]).unwrap();
                    assert!(lo.cond_volume || !hi.cond_volume);
                    assert!(lo.cond_boundary || !hi.cond_boundary);
                }
            }
        }
    }
}
