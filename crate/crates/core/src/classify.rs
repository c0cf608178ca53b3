//! Map integrated profile traces onto the surface taxonomy: spheres, bowls,
//! catenoids, unduloids, nodoids, wing-like annuli, and the disk-type
//! surfaces that spiral toward or wind around the cylinder. Verdicts come
//! from a decision table over terminal events, event counts, monotonicity,
//! convexity, and embeddedness; Unknown is a first-class outcome.

use crate::curvfn::{CurvatureProfile, Parity, SignSummary};
use crate::error::{Error, Result};
use crate::integrate::{
    integrate_orbit, launch_from_axis, EventKind, IntegrationOptions, OrbitTrace, ProfileState,
};
use serde::Serialize;

/// Samples this close to the axis are excluded from curvature scans.
const AXIS_GUARD_FACTOR: f64 = 10.0;
/// |sin phi| and phi-span bound identifying a horizontal hyperplane trace.
const FLAT_TOL: f64 = 1e-9;
/// (x, y)-span bound identifying a stationary cylinder trace.
const STATIONARY_SPAN: f64 = 1e-4;
/// Zero threshold for the limiting curvature value of a bowl end.
const BOWL_LIMIT_TOL: f64 = 1e-6;
/// Tail fraction of samples averaged to estimate the limiting y.
const TAIL_FRACTION: f64 = 0.1;
/// Polyline length fed to the self-intersection sweep after decimation.
const SWEEP_POINTS: usize = 2500;
/// Orientation slack of the crossing predicate.
const SWEEP_SLACK: f64 = 1e-10;
/// Per-step backsliding tolerated by the y-monotonicity scan.
const MONOTONE_SLACK: f64 = 1e-10;

/// Surface taxonomy verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Hyperplane,
    Cylinder,
    ConvexSphere,
    Bowl,
    Catenoid,
    Unduloid,
    Nodoid,
    WingLike,
    WigglingDisk,
    ConvergentGraph,
    NonEmbeddedDisk,
    EmbeddedAnnulus,
    Unknown,
}

/// Quantitative companions to a verdict, always filled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub pole_crossings: usize,
    pub gamma_crossings: usize,
    pub closed: bool,
    pub embedded: bool,
    pub strictly_convex: bool,
    /// Attained interval of the angle function y (pole events count as +-1).
    pub gauss_image: (f64, f64),
    pub period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceClass {
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

/// Global shape information about h used by the decision table.
#[derive(Debug, Clone)]
pub struct HInfo {
    pub parity: Parity,
    pub signs: SignSummary,
}

impl HInfo {
    pub fn of(h: &CurvatureProfile) -> HInfo {
        HInfo {
            parity: h.parity(1e-12),
            signs: h.sign_and_zeros(),
        }
    }
}

/// One trace (axis launch or single direction) or a backward/forward pair
/// from an interior initial state.
pub enum TraceSet<'a> {
    Single(&'a OrbitTrace),
    /// (backward, forward), both with samples ascending in s.
    Pair(&'a OrbitTrace, &'a OrbitTrace),
}

impl<'a> TraceSet<'a> {
    fn members(&self) -> Vec<&'a OrbitTrace> {
        match self {
            TraceSet::Single(t) => vec![t],
            TraceSet::Pair(b, f) => vec![b, f],
        }
    }
}

/// Analytic principal curvatures (kappa1, kappa2) = (phi', sin phi / x) at
/// every sample of a trace.
pub fn curvature_samples(trace: &OrbitTrace) -> Vec<(f64, f64)> {
    let nf = trace.n as f64;
    trace
        .samples
        .iter()
        .map(|p| {
            let y = p.y();
            let k1 = nf * trace.h.eval_clamped(y) - (nf - 1.0) * p.phi.sin() / p.x;
            (k1, p.phi.sin() / p.x)
        })
        .collect()
}

/// Classify a trace or a bidirectional pair.
pub fn classify(set: &TraceSet, h_info: &HInfo) -> Result<SurfaceClass> {
    let members = set.members();
    if members.is_empty() || members.iter().any(|t| t.samples.is_empty()) {
        return Err(Error::EmptyTrace);
    }
    let diagnostics = build_diagnostics(set);
    let verdict = decide(set, h_info, &diagnostics);
    Ok(SurfaceClass {
        verdict,
        diagnostics,
    })
}

fn axis_guard() -> f64 {
    AXIS_GUARD_FACTOR * IntegrationOptions::default().axis_tol
}

fn build_diagnostics(set: &TraceSet) -> Diagnostics {
    let members = set.members();
    let mut pole_crossings = 0;
    let mut gamma_crossings = 0;
    let mut closed = false;
    let mut period = None;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for t in &members {
        for e in &t.events {
            match &e.kind {
                EventKind::PoleCross => {
                    pole_crossings += 1;
                    // The angle function touches +-1 exactly at a pole.
                    let y = e.state_at.y().signum();
                    y_lo = y_lo.min(y);
                    y_hi = y_hi.max(y);
                }
                EventKind::GammaCross => gamma_crossings += 1,
                EventKind::Closure { period: t_per } => {
                    closed = true;
                    period = Some(*t_per);
                }
                EventKind::AxisOrthogonal => {
                    // An orthogonal axis contact has vertical normal: the
                    // Gauss map attains the pole exactly.
                    let y = e.state_at.y().signum();
                    y_lo = y_lo.min(y);
                    y_hi = y_hi.max(y);
                }
                _ => {
                    let y = e.state_at.y();
                    y_lo = y_lo.min(y);
                    y_hi = y_hi.max(y);
                }
            }
        }
        for p in &t.samples {
            let y = p.y();
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }

    let guard = axis_guard();
    let mut convex_pos = true;
    let mut convex_neg = true;
    for t in &members {
        for (i, (k1, k2)) in curvature_samples(t).into_iter().enumerate() {
            if t.samples[i].x < guard {
                continue;
            }
            convex_pos &= k1 > 0.0 && k2 > 0.0;
            convex_neg &= k1 < 0.0 && k2 < 0.0;
        }
    }

    let polyline = sweep_polyline(set, closed);
    let embedded_flag = embedded(&polyline);

    Diagnostics {
        pole_crossings,
        gamma_crossings,
        closed,
        embedded: embedded_flag,
        strictly_convex: convex_pos || convex_neg,
        gauss_image: (y_lo, y_hi),
        period,
    }
}

/// Build the polyline the embeddedness sweep runs on: merged samples,
/// decimated; a closed trace contributes two vertically stacked periods so
/// crossings that straddle the period boundary are still seen.
fn sweep_polyline(set: &TraceSet, closed: bool) -> Vec<ProfileState> {
    let mut pts: Vec<ProfileState> = Vec::new();
    match set {
        TraceSet::Single(t) => pts.extend_from_slice(&t.samples),
        TraceSet::Pair(b, f) => {
            pts.extend_from_slice(&b.samples);
            let skip = if b
                .samples
                .last()
                .map(|p| f.samples.first().map(|q| p.s == q.s).unwrap_or(false))
                .unwrap_or(false)
            {
                1
            } else {
                0
            };
            pts.extend_from_slice(&f.samples[skip..]);
        }
    }
    let stride = (pts.len() / SWEEP_POINTS).max(1);
    let mut thin: Vec<ProfileState> = pts.iter().copied().step_by(stride).collect();
    if let (Some(last), Some(kept)) = (pts.last(), thin.last()) {
        if kept.s != last.s {
            thin.push(*last);
        }
    }
    if closed && thin.len() > 1 {
        let dz = thin.last().unwrap().z - thin.first().unwrap().z;
        let ds = thin.last().unwrap().s - thin.first().unwrap().s;
        let copy: Vec<ProfileState> = thin
            .iter()
            .skip(1)
            .map(|p| ProfileState::new(p.s + ds, p.x, p.z + dz, p.phi))
            .collect();
        thin.extend(copy);
    }
    thin
}

/// True iff the (x, z) polyline has no transversal self-intersection.
/// Plane sweep over segment x-extents; adjacent segments share an endpoint
/// and are skipped.
pub fn embedded(samples: &[ProfileState]) -> bool {
    let pts: Vec<(f64, f64)> = samples.iter().map(|p| (p.x, p.z)).collect();
    if pts.len() < 3 {
        return true;
    }
    let nseg = pts.len() - 1;
    // (xmin, xmax) per segment; sweep events sorted by x.
    let mut order: Vec<usize> = (0..nseg).collect();
    let xmin = |i: usize| pts[i].0.min(pts[i + 1].0);
    let xmax = |i: usize| pts[i].0.max(pts[i + 1].0);
    order.sort_by(|&i, &j| xmin(i).total_cmp(&xmin(j)));
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let lo = xmin(i);
        active.retain(|&j| xmax(j) >= lo);
        for &j in &active {
            if i.abs_diff(j) <= 1 {
                continue;
            }
            if segments_cross(pts[i], pts[i + 1], pts[j], pts[j + 1]) {
                return false;
            }
        }
        active.push(i);
    }
    true
}

fn segments_cross(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let area = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| -> f64 {
        (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0)
    };
    let scale = (b.0 - a.0).abs().max((b.1 - a.1).abs()).max((d.0 - c.0).abs())
        .max((d.1 - c.1).abs())
        .max(1e-300);
    let slack = SWEEP_SLACK * scale;
    let d1 = area(a, b, c);
    let d2 = area(a, b, d);
    let d3 = area(c, d, a);
    let d4 = area(c, d, b);
    d1 * d2 < -slack * slack && d3 * d4 < -slack * slack
}

fn decide(set: &TraceSet, h_info: &HInfo, diag: &Diagnostics) -> Verdict {
    let members = set.members();

    // Degenerate stationary solutions first: they would otherwise shadow the
    // axis and escape rows.
    let flat = members.iter().all(|t| {
        let phis: Vec<f64> = t.samples.iter().map(|p| p.phi).collect();
        let span = phis.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - phis.iter().cloned().fold(f64::INFINITY, f64::min);
        span <= FLAT_TOL && t.samples.iter().all(|p| p.phi.sin().abs() <= FLAT_TOL)
    });
    if flat {
        return Verdict::Hyperplane;
    }

    let stationary = members.iter().all(|t| {
        if t.termination != EventKind::EquilibriumApproach {
            return false;
        }
        let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &t.samples {
            x_lo = x_lo.min(p.x);
            x_hi = x_hi.max(p.x);
            y_lo = y_lo.min(p.y());
            y_hi = y_hi.max(p.y());
        }
        x_hi - x_lo < STATIONARY_SPAN && y_hi - y_lo < STATIONARY_SPAN
    });
    if stationary {
        return Verdict::Cylinder;
    }

    // Axis-orthogonal endpoints across the set, in s order.
    let mut axis_y: Vec<f64> = Vec::new();
    for t in &members {
        for e in &t.events {
            if e.kind == EventKind::AxisOrthogonal {
                axis_y.push(e.state_at.y());
            }
        }
    }

    if axis_y.len() >= 2 {
        // Closed profile from pole to pole.
        if axis_y.len() == 2
            && axis_y[0] * axis_y[1] < 0.0
            && diag.pole_crossings == 0
            && diag.strictly_convex
        {
            return Verdict::ConvexSphere;
        }
        return Verdict::Unknown;
    }

    if axis_y.len() == 1 {
        let far = far_termination(set);
        match far {
            EventKind::Escape if diag.pole_crossings == 0 => {
                if let Some(y_limit) = monotone_y_limit(set) {
                    let h = &members[0].h;
                    if h.eval_clamped(y_limit).abs() <= BOWL_LIMIT_TOL {
                        return Verdict::Bowl;
                    }
                }
                return Verdict::Unknown;
            }
            EventKind::Escape => return Verdict::NonEmbeddedDisk,
            EventKind::EquilibriumApproach if diag.gamma_crossings <= 1 => {
                return Verdict::ConvergentGraph;
            }
            EventKind::EquilibriumApproach | EventKind::BudgetExhausted => {
                if diag.gamma_crossings >= 3 && gamma_signs_alternate(set) {
                    return Verdict::WigglingDisk;
                }
                return Verdict::Unknown;
            }
            _ => return Verdict::Unknown,
        }
    }

    // No axis contact from here on.
    if diag.closed {
        if diag.pole_crossings == 0 {
            return Verdict::Unduloid;
        }
        if diag.pole_crossings >= 2 {
            return Verdict::Nodoid;
        }
        return Verdict::Unknown;
    }

    if let TraceSet::Pair(back, fwd) = set {
        if back.termination == EventKind::Escape && fwd.termination == EventKind::Escape {
            // Outward vertical drift at the two open ends: +sin phi at the
            // forward end, -sin phi at the backward end (which opens toward
            // decreasing s).
            let fwd_drift = fwd.samples.last().unwrap().phi.sin();
            let bwd_drift = -back.samples.first().unwrap().phi.sin();
            if fwd_drift * bwd_drift > 0.0 {
                return Verdict::WingLike;
            }
            if diag.embedded {
                let h = &fwd.h;
                let (y_lo, y_hi) = diag.gauss_image;
                let mut h_max = f64::NEG_INFINITY;
                for i in 0..=256 {
                    let y = y_lo + (y_hi - y_lo) * i as f64 / 256.0;
                    h_max = h_max.max(h.eval_clamped(y.clamp(-1.0, 1.0)));
                }
                // A curvature profile nonpositive on the attained range gives
                // the catenoid-type annulus of negative Gauss-Kronecker
                // curvature; otherwise a general embedded annulus.
                if h_max <= 0.0 {
                    return Verdict::Catenoid;
                }
                return Verdict::EmbeddedAnnulus;
            }
            // Annulus with a loop that never closes: unnamed, reported with
            // diagnostics only.
            return Verdict::Unknown;
        }
    }

    let _ = h_info;
    Verdict::Unknown
}

/// Termination of the far (non-axis) end of the set.
fn far_termination(set: &TraceSet) -> EventKind {
    match set {
        TraceSet::Single(t) => t.termination.clone(),
        // For a pair, the forward member's termination stands in; axis-launch
        // sets are always Single.
        TraceSet::Pair(_, f) => f.termination.clone(),
    }
}

/// Limiting y of an escaping end if y is monotone along the whole set;
/// estimated as the mean over the trailing samples.
fn monotone_y_limit(set: &TraceSet) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    match set {
        TraceSet::Single(t) => pts.extend(t.samples.iter().map(|p| (p.x, p.y()))),
        TraceSet::Pair(b, f) => {
            pts.extend(b.samples.iter().map(|p| (p.x, p.y())));
            pts.extend(f.samples.iter().map(|p| (p.x, p.y())));
        }
    }
    if pts.len() < 3 {
        return None;
    }
    let increasing = pts.windows(2).all(|w| w[1].1 >= w[0].1 - MONOTONE_SLACK);
    let decreasing = pts.windows(2).all(|w| w[1].1 <= w[0].1 + MONOTONE_SLACK);
    if !increasing && !decreasing {
        return None;
    }
    // Graph ends approach their angle limit like y(x) = y_inf + c/x + O(1/x^2),
    // so a plain tail average carries an O(1/x) bias. Eliminate the leading
    // term: average the two halves of the far tail (ordered by x) and
    // extrapolate linearly in u = 1/x to u = 0.
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let tail = ((pts.len() as f64 * TAIL_FRACTION) as usize)
        .max(10)
        .min(pts.len());
    let tail_pts = &pts[pts.len() - tail..];
    let (near, far) = tail_pts.split_at(tail / 2);
    let mean = |ps: &[(f64, f64)]| -> (f64, f64) {
        let inv = ps.len() as f64;
        (
            ps.iter().map(|p| 1.0 / p.0).sum::<f64>() / inv,
            ps.iter().map(|p| p.1).sum::<f64>() / inv,
        )
    };
    let (u1, y1) = mean(near);
    let (u2, y2) = mean(far);
    if (u1 - u2).abs() < f64::EPSILON {
        return Some(y2);
    }
    let c = (y1 - y2) / (u1 - u2);
    Some(y2 - c * u2)
}

/// True when the y-values at nullcline crossings alternate sign around the
/// equilibrium level at least twice (a spiral, not a transversal pass).
fn gamma_signs_alternate(set: &TraceSet) -> bool {
    let mut signs: Vec<f64> = Vec::new();
    for t in set.members() {
        for e in &t.events {
            if e.kind == EventKind::GammaCross {
                let y = e.state_at.y();
                if y.abs() > FLAT_TOL {
                    signs.push(y.signum());
                }
            }
        }
    }
    signs.windows(2).filter(|w| w[0] != w[1]).count() >= 2
}

/// First vertical-tangent radius of the axis orbit: the equator radius of
/// the convex sphere when h admits one.
pub fn sphere_equator_radius(
    n: u32,
    h: &CurvatureProfile,
    opts: &IntegrationOptions,
) -> Result<f64> {
    let trace = launch_from_axis(n, h, 1, opts)?;
    trace
        .events
        .iter()
        .find(|e| e.kind == EventKind::EquatorCross)
        .map(|e| e.state_at.x)
        .ok_or_else(|| {
            Error::Precondition("axis orbit never crosses the equator section".into())
        })
}

/// Launch `count` orbits from the section y = 0 at evenly spaced radii in
/// [x_lo, x_hi] and classify each; h must be even and positive.
pub fn delaunay_family(
    n: u32,
    h: &CurvatureProfile,
    x_lo: f64,
    x_hi: f64,
    count: usize,
    opts: &IntegrationOptions,
) -> Result<Vec<(f64, SurfaceClass)>> {
    if h.parity(1e-12) != Parity::Even {
        return Err(Error::Precondition(
            "family generation requires an even curvature profile".into(),
        ));
    }
    let signs = h.sign_and_zeros();
    if !(signs.min_value > 0.0) {
        return Err(Error::Precondition(
            "family generation requires a positive curvature profile".into(),
        ));
    }
    if !(x_lo > 0.0) || !(x_hi >= x_lo) || count == 0 {
        return Err(Error::Precondition(
            "family radii must satisfy 0 < x_lo <= x_hi with count >= 1".into(),
        ));
    }
    let h_info = HInfo::of(h);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let x = if count == 1 {
            x_lo
        } else {
            x_lo + (x_hi - x_lo) * i as f64 / (count - 1) as f64
        };
        let init = ProfileState::new(0.0, x, 0.0, std::f64::consts::FRAC_PI_2);
        let trace = integrate_orbit(n, h, init, opts)?;
        let class = classify(&TraceSet::Single(&trace), &h_info)?;
        out.push((x, class));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::integrate_bidirectional;
    use std::f64::consts::FRAC_PI_2;

    fn poly(coeffs: &[f64]) -> CurvatureProfile {
        CurvatureProfile::polynomial(coeffs.to_vec()).unwrap()
    }

    fn classify_single(trace: &OrbitTrace) -> SurfaceClass {
        let info = HInfo::of(&trace.h);
        classify(&TraceSet::Single(trace), &info).unwrap()
    }

    #[test]
    fn sphere_verdicts() {
        let opts = IntegrationOptions::default();
        for h in [poly(&[1.0]), poly(&[1.0, 0.0, 1.0])] {
            let trace = launch_from_axis(2, &h, 1, &opts).unwrap();
            let c = classify_single(&trace);
            assert_eq!(c.verdict, Verdict::ConvexSphere);
            assert!(c.diagnostics.strictly_convex);
            assert!(c.diagnostics.embedded);
            assert_eq!(c.diagnostics.pole_crossings, 0);
            assert_eq!(c.diagnostics.gauss_image, (-1.0, 1.0));
        }
    }

    #[test]
    fn hyperplane_verdict() {
        // h(1) = 0: the axis seed never bends and x runs off to the cap.
        let opts = IntegrationOptions {
            x_max: 20.0,
            ..IntegrationOptions::default()
        };
        let trace = launch_from_axis(2, &poly(&[-1.0, 1.0]), 1, &opts).unwrap();
        let c = classify_single(&trace);
        assert_eq!(c.verdict, Verdict::Hyperplane);
    }

    #[test]
    fn cylinder_verdict() {
        let opts = IntegrationOptions::default();
        let init = ProfileState::new(0.0, 0.5, 0.0, FRAC_PI_2);
        let trace = integrate_orbit(2, &poly(&[1.0]), init, &opts).unwrap();
        let c = classify_single(&trace);
        assert_eq!(c.verdict, Verdict::Cylinder);
    }

    #[test]
    fn bowl_verdict() {
        let opts = IntegrationOptions {
            x_max: 1e3,
            s_max: 5e3,
            ..IntegrationOptions::default()
        };
        let trace = launch_from_axis(2, &poly(&[-0.5, 1.0]), 1, &opts).unwrap();
        let c = classify_single(&trace);
        assert_eq!(c.verdict, Verdict::Bowl);
        assert!(c.diagnostics.strictly_convex);
        assert!(!c.diagnostics.closed);
    }

    #[test]
    fn delaunay_verdicts_bracket_the_sphere_orbit() {
        let opts = IntegrationOptions {
            closure_tol: 1e-6,
            ..IntegrationOptions::default()
        };
        let h = poly(&[1.0]);
        // Unit sphere equator separates the two families.
        let r_eq = sphere_equator_radius(2, &h, &opts).unwrap();
        assert!((r_eq - 1.0).abs() < 1e-6);

        let fam = delaunay_family(2, &h, 0.65, 0.9, 2, &opts).unwrap();
        for (x, class) in &fam {
            assert_eq!(class.verdict, Verdict::Unduloid, "at x = {x}");
            assert!(class.diagnostics.closed);
            assert!(class.diagnostics.embedded);
            let (lo, hi) = class.diagnostics.gauss_image;
            assert!(lo > -1.0 && hi < 1.0);
        }

        let nod = delaunay_family(2, &h, 1.5, 1.5, 1, &opts).unwrap();
        let class = &nod[0].1;
        assert_eq!(class.verdict, Verdict::Nodoid);
        assert!(class.diagnostics.pole_crossings >= 2);
        assert!(!class.diagnostics.embedded);
        assert_eq!(class.diagnostics.gauss_image, (-1.0, 1.0));
        let dz = class.diagnostics.period.unwrap();
        assert!(dz > 0.0);

        // The equilibrium radius itself stays put.
        let cyl = delaunay_family(2, &h, 0.5, 0.5, 1, &opts).unwrap();
        assert_eq!(cyl[0].1.verdict, Verdict::Cylinder);
    }

    #[test]
    fn family_preconditions() {
        let opts = IntegrationOptions::default();
        assert!(delaunay_family(2, &poly(&[2.0, 1.0]), 0.5, 1.0, 2, &opts).is_err());
        assert!(delaunay_family(2, &poly(&[-1.0, 0.0, 1.0]), 0.5, 1.0, 2, &opts).is_err());
        assert!(delaunay_family(2, &poly(&[1.0]), -0.5, 1.0, 2, &opts).is_err());
    }

    #[test]
    fn catenoid_verdict() {
        let opts = IntegrationOptions {
            x_max: 40.0,
            ..IntegrationOptions::default()
        };
        let init = ProfileState::new(0.0, 1.0, 0.0, FRAC_PI_2);
        let h = poly(&[-1.0, 0.0, 1.0]);
        let (back, fwd) = integrate_bidirectional(2, &h, init, &opts).unwrap();
        let info = HInfo::of(&h);
        let c = classify(&TraceSet::Pair(&back, &fwd), &info).unwrap();
        assert_eq!(c.verdict, Verdict::Catenoid);
        assert!(c.diagnostics.embedded);
        assert_eq!(c.diagnostics.pole_crossings, 0);
    }

    #[test]
    fn wing_verdict() {
        // h(0) = 0 makes the far ends nearly vertical: x grows like the
        // square root of arclength, so the budget must outlast the escape
        // radius squared.
        let opts = IntegrationOptions {
            x_max: 30.0,
            s_max: 2500.0,
            ..IntegrationOptions::default()
        };
        let init = ProfileState::new(0.0, 1.0, 0.0, FRAC_PI_2);
        let h = poly(&[0.0, 2.0, 1.0]);
        let (back, fwd) = integrate_bidirectional(2, &h, init, &opts).unwrap();
        let info = HInfo::of(&h);
        let c = classify(&TraceSet::Pair(&back, &fwd), &info).unwrap();
        assert_eq!(c.verdict, Verdict::WingLike);
    }

    #[test]
    fn embedded_sweep_basics() {
        // A semicircle is simple.
        let sphere = crate::oracles::cmc_sphere(1.0, 2).unwrap();
        assert!(embedded(&sphere.samples(500)));
        // A hand-built bowtie crosses itself.
        let cross: Vec<ProfileState> = [
            (1.0, 0.0),
            (2.0, 1.0),
            (2.0, 0.0),
            (1.0, 1.0),
        ]
        .iter()
        .enumerate()
        .map(|(i, &(x, z))| ProfileState::new(i as f64, x, z, 0.0))
        .collect();
        assert!(!embedded(&cross));
        // Shared endpoints of consecutive segments are not crossings.
        let chain: Vec<ProfileState> = [(1.0, 0.0), (2.0, 1.0), (1.0, 2.0), (2.0, 3.0)]
            .iter()
            .enumerate()
            .map(|(i, &(x, z))| ProfileState::new(i as f64, x, z, 0.0))
            .collect();
        assert!(embedded(&chain));
    }

    #[test]
    fn nodoid_single_period_self_intersects() {
        let opts = IntegrationOptions {
            closure_tol: 1e-6,
            ..IntegrationOptions::default()
        };
        let init = ProfileState::new(0.0, 1.5, 0.0, FRAC_PI_2);
        let trace = integrate_orbit(2, &poly(&[1.0]), init, &opts).unwrap();
        assert!(matches!(trace.termination, EventKind::Closure { .. }));
        assert!(!embedded(&trace.samples));
    }
}
