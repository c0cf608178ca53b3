//! Profile-curve integration in the tangent-angle chart (x, z, phi):
//!
//!   x' = cos phi,  z' = sin phi,  phi' = n h(cos phi) - (n - 1) sin phi / x
//!
//! The chart is regular across sin phi = 0, so branch switches of the
//! (x, y) phase plane happen implicitly. The driver is an embedded
//! Dormand-Prince 4(5) pair with PI step control; step size is additionally
//! capped by a curvature-adaptive sampling bound so that every accepted step
//! endpoint doubles as a trace sample meeting the discrete unit-speed and
//! residual budgets. Events are bracketed on step endpoints and refined by
//! bisection over re-integrated partial steps, which keeps event states as
//! accurate as the trace itself.

use crate::curvfn::CurvatureProfile;
use crate::error::{Error, Result};
use serde::Serialize;

/// Arclength offset of the synthetic axis seed.
const SEED_ARC: f64 = 1e-4;
/// Step sizes below this magnitude abort integration.
const STEP_FLOOR: f64 = 1e-14;
/// Hard cap on the sampling spacing (flat-field regions).
const SPACING_CAP_CURV: f64 = 0.02;
/// Safety factor applied to the chord-defect spacing bound.
const SPACING_SAFETY: f64 = 0.6;
/// Squared-chord defect budget: |c^2 - ds^2| <= DEFECT_BUDGET * ds per step.
const DEFECT_BUDGET: f64 = 1e-8;
/// |sin phi| at an axis hit at or below this means an orthogonal meeting.
const AXIS_ORTHO_SIN: f64 = 1e-4;
/// Poincare-section hits and pole/equator crossings slower than this in the
/// indicator derivative are treated as numerical noise and skipped.
const TRANSVERSAL_TOL: f64 = 1e-10;
/// A gamma crossing this close to a pole is the pole itself, not an extremum.
const GAMMA_POLE_GUARD: f64 = 1e-9;
/// |cos phi| below this at the initial state seeds the closure section ledger.
const SECTION_SEED_TOL: f64 = 1e-12;
/// Minimum arclength between a ledger hit and a matching return; a section
/// crossing never re-closes on itself within the same step.
const MIN_CLOSURE_ARC: f64 = 1e-3;
/// x floor in the near-axis five-point spacing bound.
const SPACING_X_FLOOR: f64 = 1e-3;
/// Entering x < this while x is shrinking marks the terminal axis funnel.
/// Inside it the x'/x feedback amplifies double-precision state error like
/// 1/x, so steps taken there are provisional: kept if the orbit climbs back
/// out, discarded (samples and events alike) when integration ends on the
/// axis, where they carry no usable curvature information.
const AXIS_FUNNEL_X: f64 = 1e-3;
/// |sin phi| / x at funnel entry at or below this means the approach has
/// contact geometry (sin phi shrinking proportionally to x, slope kappa =
/// h at the pole); far larger ratios belong to singular approaches.
const RATIO_ORTHO: f64 = 100.0;
/// A funnel x-minimum at or below this is indistinguishable from contact:
/// the squared miss distance sits at the scale of accumulated rounding.
const AXIS_CONTACT_X: f64 = 1e-5;
/// x growing past this multiple of the funnel minimum is a bounce.
const BOUNCE_FACTOR: f64 = 4.0;
/// Arclength the orbit must remain inside the capture ball around e0.
const CAPTURE_WINDOW: f64 = 1.0;
/// Bisection iterations for event refinement.
const REFINE_ITERS: u32 = 60;

/// One point of the profile curve: arclength, distance to the axis, height,
/// and tangent angle. The angle function is y = cos phi and the branch sign
/// is eps = sign(sin phi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileState {
    pub s: f64,
    pub x: f64,
    pub z: f64,
    pub phi: f64,
}

impl ProfileState {
    pub fn new(s: f64, x: f64, z: f64, phi: f64) -> Self {
        ProfileState { s, x, z, phi }
    }

    /// Angle function y = cos phi.
    pub fn y(&self) -> f64 {
        self.phi.cos()
    }

    /// Branch sign eps = sign(sin phi); 0 exactly at poles.
    pub fn eps(&self) -> i8 {
        let sp = self.phi.sin();
        if sp > 0.0 {
            1
        } else if sp < 0.0 {
            -1
        } else {
            0
        }
    }
}

/// Tolerances and budgets for one integration run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrationOptions {
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub s_max: f64,
    pub x_max: f64,
    pub axis_tol: f64,
    pub e0_tol: f64,
    pub closure_tol: f64,
    pub max_step: f64,
    pub max_pole_crossings: usize,
    pub max_samples: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            tol_abs: 1e-10,
            tol_rel: 1e-10,
            s_max: 1e3,
            x_max: 1e3,
            axis_tol: 1e-8,
            e0_tol: 1e-6,
            closure_tol: 1e-8,
            max_step: 0.25,
            max_pole_crossings: 32,
            max_samples: 1_500_000,
        }
    }
}

impl IntegrationOptions {
    fn validate(&self) -> Result<()> {
        let fields = [
            ("tol_abs", self.tol_abs),
            ("tol_rel", self.tol_rel),
            ("s_max", self.s_max),
            ("x_max", self.x_max),
            ("axis_tol", self.axis_tol),
            ("e0_tol", self.e0_tol),
            ("closure_tol", self.closure_tol),
            ("max_step", self.max_step),
        ];
        for (what, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain {
                    what: match what {
                        "tol_abs" => "tol_abs (must be positive)",
                        "tol_rel" => "tol_rel (must be positive)",
                        "s_max" => "s_max (must be positive)",
                        "x_max" => "x_max (must be positive)",
                        "axis_tol" => "axis_tol (must be positive)",
                        "e0_tol" => "e0_tol (must be positive)",
                        "closure_tol" => "closure_tol (must be positive)",
                        _ => "max_step (must be positive)",
                    },
                    value: v,
                });
            }
        }
        Ok(())
    }
}

/// What happened along an orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum EventKind {
    /// Axis contact with vertical normal (|sin phi| small): a regular pole of
    /// the hypersurface.
    AxisOrthogonal,
    /// Axis contact with |sin phi| not small: inadmissible endpoint, flagged
    /// and never repaired.
    AxisSingular,
    /// Sign change of cos phi: the profile tangent passes through vertical.
    EquatorCross,
    /// Sign change of sin phi away from the axis: the angle function touches
    /// +-1 and the branch sign flips.
    PoleCross,
    /// Sign change of phi': the projected orbit crosses the nullcline and y
    /// attains a local extremum.
    GammaCross,
    /// Entered the e0 capture ball and stayed for one arclength unit; s_at
    /// records the entry.
    EquilibriumApproach,
    /// Returned to the section {cos phi = 0, same crossing signs} within
    /// closure_tol in x: a periodic profile.
    Closure { period: f64 },
    /// Reached x >= x_max.
    Escape,
    /// Ran out of arclength, samples, or pole-crossing budget.
    BudgetExhausted,
}

impl EventKind {
    /// Stable name used in CSV comment lines and diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::AxisOrthogonal => "AxisOrthogonal",
            EventKind::AxisSingular => "AxisSingular",
            EventKind::EquatorCross => "EquatorCross",
            EventKind::PoleCross => "PoleCross",
            EventKind::GammaCross => "GammaCross",
            EventKind::EquilibriumApproach => "EquilibriumApproach",
            EventKind::Closure { .. } => "Closure",
            EventKind::Escape => "Escape",
            EventKind::BudgetExhausted => "BudgetExhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub s_at: f64,
    pub state_at: ProfileState,
}

/// A sampled profile orbit: strictly s-increasing samples, s-ordered events,
/// and the kind that terminated integration.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitTrace {
    pub n: u32,
    pub h: CurvatureProfile,
    /// +1 if integrated toward increasing s, -1 if integrated backward and
    /// reported reversed.
    pub direction: i8,
    pub samples: Vec<ProfileState>,
    pub events: Vec<Event>,
    pub termination: EventKind,
}

impl OrbitTrace {
    /// Max over consecutive samples of |(dx^2 + dz^2) - ds^2| / ds.
    pub fn unit_speed_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for w in self.samples.windows(2) {
            let ds = w[1].s - w[0].s;
            if ds <= 0.0 {
                continue;
            }
            let dx = w[1].x - w[0].x;
            let dz = w[1].z - w[0].z;
            worst = worst.max(((dx * dx + dz * dz) - ds * ds).abs() / ds);
        }
        worst
    }

    /// Residual of the prescribed-curvature equation over this trace.
    pub fn pmc_residual(&self) -> f64 {
        pmc_residual(&self.samples, self.n, &self.h)
    }

    /// State at arclength s by monotone cubic interpolation between the two
    /// bracketing samples, with slopes from the field.
    pub fn state_at(&self, s: f64) -> Result<ProfileState> {
        if self.samples.is_empty() {
            return Err(Error::EmptyTrace);
        }
        let first = self.samples.first().unwrap();
        let last = self.samples.last().unwrap();
        if s <= first.s {
            return Ok(*first);
        }
        if s >= last.s {
            return Ok(*last);
        }
        let idx = self
            .samples
            .partition_point(|p| p.s < s)
            .clamp(1, self.samples.len() - 1);
        let a = self.samples[idx - 1];
        let b = self.samples[idx];
        let fa = profile_field(self.n, &self.h, &a)?;
        let fb = profile_field(self.n, &self.h, &b)?;
        let dt = b.s - a.s;
        if dt <= 0.0 {
            return Ok(a);
        }
        let t = (s - a.s) / dt;
        let hermite = |ya: f64, da: f64, yb: f64, db: f64| -> f64 {
            let t2 = t * t;
            let t3 = t2 * t;
            ya * (2.0 * t3 - 3.0 * t2 + 1.0)
                + da * dt * (t3 - 2.0 * t2 + t)
                + yb * (-2.0 * t3 + 3.0 * t2)
                + db * dt * (t3 - t2)
        };
        Ok(ProfileState {
            s,
            x: hermite(a.x, fa.0, b.x, fb.0),
            z: hermite(a.z, fa.1, b.z, fb.1),
            phi: hermite(a.phi, fa.2, b.phi, fb.2),
        })
    }
}

/// The chart vector field (dx/ds, dz/ds, dphi/ds).
pub fn profile_field(
    n: u32,
    h: &CurvatureProfile,
    state: &ProfileState,
) -> Result<(f64, f64, f64)> {
    if n < 2 {
        return Err(Error::Domain {
            what: "dimension n",
            value: n as f64,
        });
    }
    if !(state.x > 0.0) {
        return Err(Error::Domain {
            what: "axis distance x (must be positive)",
            value: state.x,
        });
    }
    let (c, sn) = (state.phi.cos(), state.phi.sin());
    let nf = n as f64;
    Ok((c, sn, nf * h.eval_clamped(c) - (nf - 1.0) * sn / state.x))
}

/// Taylor seed of the orbit meeting the axis orthogonally with normal sign
/// delta, placed one SEED_ARC away from the axis point. For delta = -1 the
/// axis point is the s-maximal end: the seed sits at s = -SEED_ARC and the
/// orbit is integrated in decreasing s.
pub fn start_at_axis(n: u32, h: &CurvatureProfile, delta: i8) -> Result<ProfileState> {
    if n < 2 {
        return Err(Error::Domain {
            what: "dimension n",
            value: n as f64,
        });
    }
    if delta != 1 && delta != -1 {
        return Err(Error::Domain {
            what: "axis normal sign delta",
            value: delta as f64,
        });
    }
    // At an axis point all principal curvatures coincide with h(delta).
    let kappa = h.eval_clamped(delta as f64);
    let s0 = SEED_ARC;
    Ok(if delta == 1 {
        ProfileState::new(s0, s0, 0.5 * kappa * s0 * s0, kappa * s0)
    } else {
        ProfileState::new(
            -s0,
            s0,
            -0.5 * kappa * s0 * s0,
            std::f64::consts::PI - kappa * s0,
        )
    })
}

/// Integrate forward in s from an interior initial state.
pub fn integrate_orbit(
    n: u32,
    h: &CurvatureProfile,
    init: ProfileState,
    opts: &IntegrationOptions,
) -> Result<OrbitTrace> {
    integrate_directed(n, h, init, 1, opts)
}

/// Integrate both directions from an interior state; returns (backward,
/// forward), the backward trace reported with samples ascending in s.
pub fn integrate_bidirectional(
    n: u32,
    h: &CurvatureProfile,
    init: ProfileState,
    opts: &IntegrationOptions,
) -> Result<(OrbitTrace, OrbitTrace)> {
    let back = integrate_directed(n, h, init, -1, opts)?;
    let fwd = integrate_directed(n, h, init, 1, opts)?;
    Ok((back, fwd))
}

/// Seed at the axis and integrate away from it; the synthetic axis endpoint
/// event (and the seed's Taylor data) are part of the returned trace.
pub fn launch_from_axis(
    n: u32,
    h: &CurvatureProfile,
    delta: i8,
    opts: &IntegrationOptions,
) -> Result<OrbitTrace> {
    let seed = start_at_axis(n, h, delta)?;
    let mut trace = integrate_directed(n, h, seed, delta, opts)?;
    let axis_state = ProfileState::new(
        0.0,
        0.0,
        0.0,
        if delta == 1 { 0.0 } else { std::f64::consts::PI },
    );
    let axis_event = Event {
        kind: EventKind::AxisOrthogonal,
        s_at: 0.0,
        state_at: axis_state,
    };
    if delta == 1 {
        trace.events.insert(0, axis_event);
    } else {
        trace.events.push(axis_event);
    }
    Ok(trace)
}

/// Maximum PMC residual |n h(y) - (kappa1 + (n-1) kappa2)| over interior
/// samples, kappa1 finite-differenced from five-point stencils (offset
/// stencils near the ends), samples hugging the axis excluded.
pub fn pmc_residual(samples: &[ProfileState], n: u32, h: &CurvatureProfile) -> f64 {
    let nf = n as f64;
    let axis_guard = 10.0 * IntegrationOptions::default().axis_tol;
    // Near-axis samples are excluded from the whole computation, stencils
    // included: at x of a few axis_tol the curvature terms are dominated by
    // rounding and would poison neighbouring windows.
    let kept: Vec<ProfileState> = samples
        .iter()
        .filter(|p| p.x >= axis_guard)
        .copied()
        .collect();
    let len = kept.len();
    if len < 3 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 1..len - 1 {
        let p = &kept[i];
        let lo = i.saturating_sub(2).min(len.saturating_sub(5));
        let hi = (lo + 5).min(len);
        let lo = hi.saturating_sub(5.min(len));
        let kappa1 = lagrange_derivative(&kept[lo..hi], i - lo);
        let kappa2 = p.phi.sin() / p.x;
        let res = (nf * h.eval_clamped(p.y()) - (kappa1 + (nf - 1.0) * kappa2)).abs();
        worst = worst.max(res);
    }
    worst
}

/// Derivative at node `at` of the Lagrange interpolant of phi over the
/// window's (s, phi) pairs. Exact for polynomials of degree < window length.
pub(crate) fn lagrange_derivative(window: &[ProfileState], at: usize) -> f64 {
    let m = window.len();
    let sc = window[at].s;
    let mut total = 0.0;
    for j in 0..m {
        let lj_prime = if j == at {
            let mut acc = 0.0;
            for k in 0..m {
                if k != at {
                    acc += 1.0 / (sc - window[k].s);
                }
            }
            acc
        } else {
            let mut num = 1.0;
            for k in 0..m {
                if k != j && k != at {
                    num *= sc - window[k].s;
                }
            }
            let mut den = 1.0;
            for k in 0..m {
                if k != j {
                    den *= window[j].s - window[k].s;
                }
            }
            num / den
        };
        total += window[j].phi * lj_prime;
    }
    total
}

// Dormand-Prince 4(5) coefficients.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// B5 minus the embedded 4th-order weights; the 7th entry multiplies the FSAL
// stage.
const ERRW: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type Vec3 = [f64; 3];

fn field_raw(n: f64, h: &CurvatureProfile, u: &Vec3) -> Option<Vec3> {
    if !(u[0] > 0.0) {
        return None;
    }
    let (c, sn) = (u[2].cos(), u[2].sin());
    Some([c, sn, n * h.eval_clamped(c) - (n - 1.0) * sn / u[0]])
}

/// One Dormand-Prince step of signed size hs from (u, k1 = f(u)).
/// Returns (u_new, f(u_new), error norm) or None if any stage left x > 0.
fn dp_step(
    n: f64,
    h: &CurvatureProfile,
    u: &Vec3,
    k1: &Vec3,
    hs: f64,
    tol_abs: f64,
    tol_rel: f64,
) -> Option<(Vec3, Vec3, f64)> {
    let mut k = [[0.0; 3]; 7];
    k[0] = *k1;
    let stage = |k: &[Vec3; 7], coeffs: &[f64]| -> Vec3 {
        let mut v = *u;
        for (j, &a) in coeffs.iter().enumerate() {
            for d in 0..3 {
                v[d] += hs * a * k[j][d];
            }
        }
        v
    };
    k[1] = field_raw(n, h, &stage(&k, &A2))?;
    k[2] = field_raw(n, h, &stage(&k, &A3))?;
    k[3] = field_raw(n, h, &stage(&k, &A4))?;
    k[4] = field_raw(n, h, &stage(&k, &A5))?;
    k[5] = field_raw(n, h, &stage(&k, &A6))?;
    let u_new = stage(&k, &B5);
    k[6] = field_raw(n, h, &u_new)?;
    let mut err_sq = 0.0;
    for d in 0..3 {
        let mut e = 0.0;
        for j in 0..7 {
            e += ERRW[j] * k[j][d];
        }
        e *= hs;
        let sc = tol_abs + tol_rel * u[d].abs().max(u_new[d].abs());
        err_sq += (e / sc) * (e / sc);
    }
    Some((u_new, k[6], (err_sq / 3.0).sqrt()))
}

/// Sampling spacing keeping the chord defect and the five-point derivative
/// error within budget. kappa_eff combines the local turning rate, its
/// growth, and a floor; a separate bound tightens sampling where the
/// curvature's higher derivatives blow up near the axis.
fn sampling_spacing(n: f64, h: &CurvatureProfile, u: &Vec3, f: &Vec3) -> f64 {
    let (x, phi) = (u[0], u[2]);
    let (c, sn) = (phi.cos(), phi.sin());
    let dphi = f[2];
    // phi'' by the chain rule through h(cos phi) and sin(phi)/x.
    let ddphi = -n * h.eval_deriv_clamped(c) * sn * dphi
        - (n - 1.0) * (c * dphi * x - sn * c) / (x * x);
    let kappa_eff = dphi
        .abs()
        .max((ddphi.abs() / 2.0).sqrt())
        .max(SPACING_CAP_CURV);
    let chord = SPACING_SAFETY * (12.0 * DEFECT_BUDGET / (kappa_eff * kappa_eff)).cbrt();
    // Five-point derivative error ~ |phi^(5)| d^4 / 30 <= 1e-7; the dominant
    // term of phi^(5) near the axis scales like (n-1) 4! sin(phi) / x^5.
    // Floored in x: for a regular axis touch sin(phi) ~ kappa x cancels the
    // blowup, and an unfloored bound collapses the spacing until finite
    // differences drown in rounding noise.
    let fifth = 24.0 * (n - 1.0) * sn.abs().max(0.1) / x.max(SPACING_X_FLOOR).powi(5) + 1.0;
    let stencil = (3.0e-6 / fifth).powf(0.25);
    chord.min(stencil)
}

/// Closure-section ledger entry: a transversal hit of {cos phi = 0}.
#[derive(Clone, Copy)]
struct SectionHit {
    s: f64,
    x: f64,
    sin_positive: bool,
    dphi_positive: bool,
}

struct Driver<'a> {
    nf: f64,
    h: &'a CurvatureProfile,
    opts: &'a IntegrationOptions,
    sigma: f64,
    /// x-coordinate of e0 paired with the sin-phi sign on whose branch it
    /// lives; None when h(0) = 0.
    e0: Option<(f64, f64)>,
    samples: Vec<ProfileState>,
    events: Vec<Event>,
    section_hits: Vec<SectionHit>,
    pole_count: usize,
    capture_entry: Option<ProfileState>,
    /// Set while the orbit is inside the terminal axis funnel; everything
    /// recorded past its marks is rolled back if integration ends on the
    /// axis.
    funnel_mark: Option<FunnelMark>,
}

/// Bookkeeping for one visit to the terminal axis funnel: rollback marks for
/// everything recorded since entry, plus the entry state and the running
/// x-minimum used to recognise a rounding-scale bounce off the axis.
#[derive(Clone, Copy)]
struct FunnelMark {
    samples: usize,
    events: usize,
    hits: usize,
    poles: usize,
    entry: ProfileState,
    min_x: f64,
    /// Entry had contact geometry: |sin phi| proportional to x rather than
    /// order one.
    contact_track: bool,
}

impl<'a> Driver<'a> {
    fn dist_e0(&self, st: &ProfileState) -> f64 {
        dist_to(self.e0, st)
    }

    fn push_event(&mut self, kind: EventKind, state: ProfileState) {
        self.events.push(Event {
            kind,
            s_at: state.s,
            state_at: state,
        });
    }

    /// Seal the trace. `push_terminal_sample` appends the terminal state to
    /// the samples; pass false when it already is the final sample (budget
    /// and capture terminals). The terminal event is inserted at its s-slot
    /// so events stay ordered even when capture is confirmed after later
    /// recorded events.
    fn finish(mut self, n: u32, terminal: Event, push_terminal_sample: bool) -> OrbitTrace {
        let term_kind = terminal.kind.clone();
        if push_terminal_sample {
            self.samples.push(terminal.state_at);
        }
        let sigma = self.sigma;
        let slot = self
            .events
            .iter()
            .position(|e| (e.s_at - terminal.s_at) * sigma > 0.0)
            .unwrap_or(self.events.len());
        self.events.insert(slot, terminal);
        let mut trace = OrbitTrace {
            n,
            h: self.h.clone(),
            direction: self.sigma as i8,
            samples: self.samples,
            events: self.events,
            termination: term_kind,
        };
        if self.sigma < 0.0 {
            trace.samples.reverse();
            trace.events.reverse();
        }
        trace
    }
}

/// Candidate event found inside one accepted step, ranked by integration time.
struct Candidate {
    order: f64,
    state: ProfileState,
    kind: CandidateKind,
}

enum CandidateKind {
    Axis,
    Escape,
    Pole,
    Equator,
    Gamma,
    CaptureEntry,
}

pub(crate) fn integrate_directed(
    n: u32,
    h: &CurvatureProfile,
    init: ProfileState,
    direction: i8,
    opts: &IntegrationOptions,
) -> Result<OrbitTrace> {
    if n < 2 {
        return Err(Error::Domain {
            what: "dimension n",
            value: n as f64,
        });
    }
    if direction != 1 && direction != -1 {
        return Err(Error::Domain {
            what: "integration direction",
            value: direction as f64,
        });
    }
    opts.validate()?;
    if !(init.x > 0.0) {
        return Err(Error::OutsidePhaseSpace {
            x: init.x,
            y: init.y(),
        });
    }
    let nf = n as f64;
    let sigma = direction as f64;
    let h0 = h.eval_clamped(0.0);
    let e0 = if h0 != 0.0 {
        Some(((nf - 1.0) / (nf * h0.abs()), h0.signum()))
    } else {
        None
    };
    let mut drv = Driver {
        nf,
        h,
        opts,
        sigma,
        e0,
        samples: vec![init],
        events: Vec::new(),
        section_hits: Vec::new(),
        pole_count: 0,
        capture_entry: None,
        funnel_mark: None,
    };

    let mut u: Vec3 = [init.x, init.z, init.phi];
    let mut s = init.s;
    let s_budget = init.s + sigma * opts.s_max;
    let mut k1 = match field_raw(nf, h, &u) {
        Some(k) => k,
        None => {
            return Err(Error::OutsidePhaseSpace {
                x: init.x,
                y: init.y(),
            })
        }
    };

    // Seed the section ledger and the capture window from the initial state.
    if init.phi.cos().abs() < SECTION_SEED_TOL && k1[2].abs() > TRANSVERSAL_TOL {
        drv.section_hits.push(SectionHit {
            s,
            x: init.x,
            sin_positive: init.phi.sin() > 0.0,
            dphi_positive: k1[2] > 0.0,
        });
    }
    if drv.dist_e0(&init) < opts.e0_tol {
        drv.capture_entry = Some(init);
    }

    let mut step = sigma * sampling_spacing(nf, h, &u, &k1).min(1e-3).min(opts.max_step);
    let mut err_prev: f64 = 1.0;
    // PI controller exponents (order-5 error estimate).
    let beta = 0.04;
    let alpha = 0.2 - 0.75 * beta;

    loop {
        // Land exactly on the arclength budget.
        let mut on_budget = false;
        if (s_budget - s - step) * sigma <= 0.0 {
            step = s_budget - s;
            on_budget = true;
        }
        if step.abs() < STEP_FLOOR {
            if on_budget {
                // The remaining budget itself is below the floor.
                let here = ProfileState::new(s, u[0], u[1], u[2]);
                let ev = Event {
                    kind: EventKind::BudgetExhausted,
                    s_at: here.s,
                    state_at: here,
                };
                return Ok(drv.finish(n, ev, false));
            }
            return Err(Error::StepUnderflow {
                s,
                x: u[0],
                z: u[1],
                phi: u[2],
            });
        }

        let attempt = dp_step(nf, h, &u, &k1, step, opts.tol_abs, opts.tol_rel);
        let (u_new, k_new, err) = match attempt {
            Some(t) if t.0[0] > 0.0 => t,
            _ => {
                // A stage or the endpoint left the half-space x > 0.
                step *= 0.5;
                err_prev = 1.0;
                continue;
            }
        };
        if err > 1.0 {
            let fac = (0.9 * err.powf(-0.2)).max(0.1);
            step *= fac;
            err_prev = 1.0;
            continue;
        }

        // Accepted.
        let s_new = if on_budget { s_budget } else { s + step };
        let a = ProfileState::new(s, u[0], u[1], u[2]);
        let b = ProfileState::new(s_new, u_new[0], u_new[1], u_new[2]);

        if let Some(mut m) = drv.funnel_mark {
            if b.x >= AXIS_FUNNEL_X {
                drv.funnel_mark = None;
            } else {
                m.min_x = m.min_x.min(b.x);
                drv.funnel_mark = Some(m);
                if m.contact_track && m.min_x <= AXIS_CONTACT_X && b.x >= BOUNCE_FACTOR * m.min_x
                {
                    // The descent bottomed out at rounding scale and turned
                    // around. The underlying profile meets the axis head on;
                    // only the drifted numerical orbit misses it, by a
                    // distance squared error cannot go below. Drop the
                    // funnel and end at the straight continuation of the
                    // entry state onto the axis, the mirror image of how
                    // axis launches are seeded.
                    drv.samples.truncate(m.samples);
                    drv.events.truncate(m.events);
                    drv.section_hits.truncate(m.hits);
                    drv.pole_count = m.poles;
                    drv.funnel_mark = None;
                    let run = m.entry.x / m.entry.phi.cos().abs().max(0.5);
                    let s_star = m.entry.s + sigma * run;
                    let z_star = m.entry.z + (s_star - m.entry.s) * 0.5 * m.entry.phi.sin();
                    let pole_turn = std::f64::consts::PI;
                    let phi_star = (m.entry.phi / pole_turn).round() * pole_turn;
                    let contact = ProfileState::new(s_star, 0.0, z_star, phi_star);
                    let ev = Event {
                        kind: EventKind::AxisOrthogonal,
                        s_at: s_star,
                        state_at: contact,
                    };
                    return Ok(drv.finish(n, ev, true));
                }
            }
        } else if b.x < AXIS_FUNNEL_X && b.x < a.x {
            drv.funnel_mark = Some(FunnelMark {
                samples: drv.samples.len(),
                events: drv.events.len(),
                hits: drv.section_hits.len(),
                poles: drv.pole_count,
                entry: b,
                min_x: b.x,
                contact_track: b.phi.sin().abs() <= RATIO_ORTHO * b.x,
            });
        }

        if let Some((terminal, has_sample)) = process_step(&mut drv, &a, &k1, &b, &k_new, step)? {
            if matches!(
                terminal.kind,
                EventKind::AxisOrthogonal | EventKind::AxisSingular
            ) {
                if let Some(m) = drv.funnel_mark.take() {
                    drv.samples.truncate(m.samples);
                    drv.events.truncate(m.events);
                    drv.section_hits.truncate(m.hits);
                    drv.pole_count = m.poles;
                }
            }
            return Ok(drv.finish(n, terminal, !has_sample));
        }

        drv.samples.push(b);
        if drv.samples.len() >= opts.max_samples || on_budget {
            let ev = Event {
                kind: EventKind::BudgetExhausted,
                s_at: b.s,
                state_at: b,
            };
            return Ok(drv.finish(n, ev, false));
        }

        // PI step-size update, then the sampling cap.
        let fac = if err > 0.0 {
            (0.9 * err.powf(-alpha) * err_prev.powf(beta)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        err_prev = err.max(1e-10);
        let accuracy = (step * fac).abs();
        let spacing = sampling_spacing(nf, h, &u_new, &k_new);
        step = sigma * accuracy.min(spacing).min(opts.max_step);
        u = u_new;
        k1 = k_new;
        s = s_new;
    }
}

/// Detect, refine, and record all events inside one accepted step. Returns
/// the terminal event if integration must stop, paired with a flag saying
/// whether the terminal state was already pushed as a sample.
fn process_step(
    drv: &mut Driver,
    a: &ProfileState,
    ka: &Vec3,
    b: &ProfileState,
    kb: &Vec3,
    step: f64,
) -> Result<Option<(Event, bool)>> {
    let opts = drv.opts;
    let sigma = drv.sigma;
    let nf = drv.nf;
    let h = drv.h;
    let ua: Vec3 = [a.x, a.z, a.phi];

    // Re-integrate a partial step of signed size ds from the step start; the
    // full step was accepted, so any sub-step is at least as accurate.
    let sub_state = |ds: f64| -> ProfileState {
        if ds.abs() < 1e-300 {
            return *a;
        }
        match dp_step(nf, h, &ua, ka, ds, opts.tol_abs, opts.tol_rel) {
            Some((u, _, _)) => ProfileState::new(a.s + ds, u[0], u[1], u[2]),
            // A sub-step can only fail by driving x <= 0 transiently; fall
            // back on the endpoint, which the caller verified.
            None => *b,
        }
    };
    let refine = |gate: &dyn Fn(&ProfileState) -> bool| -> ProfileState {
        // Invariant: gate is false at ds = 0, true at ds = step.
        let mut lo = 0.0;
        let mut hi = step;
        for _ in 0..REFINE_ITERS {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if gate(&sub_state(mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        sub_state(hi)
    };

    let mut found: Vec<Candidate> = Vec::new();

    // Terminal indicators first: axis contact and escape.
    if a.x > opts.axis_tol && b.x <= opts.axis_tol {
        let tol = opts.axis_tol;
        let st = refine(&|p: &ProfileState| p.x <= tol);
        found.push(Candidate {
            order: (st.s - a.s) * sigma,
            state: st,
            kind: CandidateKind::Axis,
        });
    }
    if a.x < opts.x_max && b.x >= opts.x_max {
        let xm = opts.x_max;
        let st = refine(&|p: &ProfileState| p.x >= xm);
        found.push(Candidate {
            order: (st.s - a.s) * sigma,
            state: st,
            kind: CandidateKind::Escape,
        });
    }

    // Branch-sign flip: sin phi crosses zero away from the axis. The crossing
    // must be transversal in d(sin phi)/ds = cos(phi) phi'; an asymptotic
    // approach to a pole drifts across zero at rounding speed and is not a
    // branch change.
    let (sin_a, sin_b) = (a.phi.sin(), b.phi.sin());
    if (sin_a < 0.0) != (sin_b < 0.0) {
        let want = sin_b < 0.0;
        let st = refine(&|p: &ProfileState| (p.phi.sin() < 0.0) == want);
        let transversal = match field_raw(nf, h, &[st.x, st.z, st.phi]) {
            Some(f) => (st.phi.cos() * f[2]).abs() > TRANSVERSAL_TOL,
            None => false,
        };
        if st.x > opts.axis_tol && transversal {
            found.push(Candidate {
                order: (st.s - a.s) * sigma,
                state: st,
                kind: CandidateKind::Pole,
            });
        }
    }

    // Vertical-tangent crossing: cos phi crosses zero.
    let (cos_a, cos_b) = (a.y(), b.y());
    if (cos_a < 0.0) != (cos_b < 0.0) {
        let want = cos_b < 0.0;
        let st = refine(&|p: &ProfileState| (p.phi.cos() < 0.0) == want);
        found.push(Candidate {
            order: (st.s - a.s) * sigma,
            state: st,
            kind: CandidateKind::Equator,
        });
    }

    // Nullcline crossing: phi' changes sign.
    if (ka[2] < 0.0) != (kb[2] < 0.0) {
        let want = kb[2] < 0.0;
        let st = refine(&|p: &ProfileState| {
            match field_raw(nf, h, &[p.x, p.z, p.phi]) {
                Some(f) => (f[2] < 0.0) == want,
                None => true,
            }
        });
        if st.phi.sin().abs() > GAMMA_POLE_GUARD {
            found.push(Candidate {
                order: (st.s - a.s) * sigma,
                state: st,
                kind: CandidateKind::Gamma,
            });
        }
    }

    // Capture-ball entry (exit merely resets the window).
    let (da, db) = (drv.dist_e0(a), drv.dist_e0(b));
    if drv.capture_entry.is_some() && db >= opts.e0_tol {
        drv.capture_entry = None;
    }
    if drv.capture_entry.is_none() && da >= opts.e0_tol && db < opts.e0_tol {
        let tol = opts.e0_tol;
        let e0 = drv.e0;
        let st = refine(&|p: &ProfileState| dist_to(e0, p) < tol);
        found.push(Candidate {
            order: (st.s - a.s) * sigma,
            state: st,
            kind: CandidateKind::CaptureEntry,
        });
    }

    found.sort_by(|p, q| p.order.total_cmp(&q.order));

    for c in found {
        match c.kind {
            CandidateKind::Axis => {
                let kind = if c.state.phi.sin().abs() <= AXIS_ORTHO_SIN {
                    EventKind::AxisOrthogonal
                } else {
                    EventKind::AxisSingular
                };
                return Ok(Some((
                    Event {
                        kind,
                        s_at: c.state.s,
                        state_at: c.state,
                    },
                    false,
                )));
            }
            CandidateKind::Escape => {
                return Ok(Some((
                    Event {
                        kind: EventKind::Escape,
                        s_at: c.state.s,
                        state_at: c.state,
                    },
                    false,
                )));
            }
            CandidateKind::Pole => {
                drv.push_event(EventKind::PoleCross, c.state);
                drv.pole_count += 1;
                if drv.pole_count >= opts.max_pole_crossings {
                    return Ok(Some((
                        Event {
                            kind: EventKind::BudgetExhausted,
                            s_at: c.state.s,
                            state_at: c.state,
                        },
                        false,
                    )));
                }
            }
            CandidateKind::Equator => {
                let st = c.state;
                let f = match field_raw(nf, h, &[st.x, st.z, st.phi]) {
                    Some(f) => f,
                    None => continue,
                };
                // d(cos phi)/ds = -sin(phi) phi'; skip grazing hits.
                if (st.phi.sin() * f[2]).abs() <= TRANSVERSAL_TOL {
                    continue;
                }
                drv.push_event(EventKind::EquatorCross, st);
                let hit = SectionHit {
                    s: st.s,
                    x: st.x,
                    sin_positive: st.phi.sin() > 0.0,
                    dphi_positive: f[2] > 0.0,
                };
                let matched = drv.section_hits.iter().find(|p| {
                    p.sin_positive == hit.sin_positive
                        && p.dphi_positive == hit.dphi_positive
                        && (p.x - hit.x).abs() <= opts.closure_tol
                        && (hit.s - p.s).abs() >= MIN_CLOSURE_ARC
                });
                if let Some(prev) = matched {
                    let period = (hit.s - prev.s).abs();
                    return Ok(Some((
                        Event {
                            kind: EventKind::Closure { period },
                            s_at: st.s,
                            state_at: st,
                        },
                        false,
                    )));
                }
                drv.section_hits.push(hit);
            }
            CandidateKind::Gamma => {
                drv.push_event(EventKind::GammaCross, c.state);
            }
            CandidateKind::CaptureEntry => {
                drv.capture_entry = Some(c.state);
            }
        }
    }

    // Capture persistence: inside the ball for a full arclength window.
    if let Some(entry) = drv.capture_entry {
        if (b.s - entry.s) * sigma >= CAPTURE_WINDOW {
            drv.samples.push(*b);
            return Ok(Some((
                Event {
                    kind: EventKind::EquilibriumApproach,
                    s_at: entry.s,
                    state_at: entry,
                },
                true,
            )));
        }
    }
    Ok(None)
}

fn dist_to(e0: Option<(f64, f64)>, st: &ProfileState) -> f64 {
    match e0 {
        Some((x0, branch)) => {
            if st.phi.sin() * branch > 0.0 {
                ((st.x - x0).powi(2) + st.y().powi(2)).sqrt()
            } else {
                f64::INFINITY
            }
        }
        None => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn poly(coeffs: &[f64]) -> CurvatureProfile {
        CurvatureProfile::polynomial(coeffs.to_vec()).unwrap()
    }

    #[test]
    fn field_pinned_values() {
        // Stationary cylinder: phi' vanishes at the equilibrium radius.
        let st = ProfileState::new(0.0, 0.5, 0.0, FRAC_PI_2);
        let f = profile_field(2, &poly(&[1.0]), &st).unwrap();
        assert!(f.0.abs() < 1e-15 && (f.1 - 1.0).abs() < 1e-15 && f.2.abs() < 1e-12);

        // Minimal-surface neck curvature.
        let st = ProfileState::new(0.0, 1.0, 0.0, FRAC_PI_2);
        let f = profile_field(2, &poly(&[0.0]), &st).unwrap();
        assert!((f.2 + 1.0).abs() < 1e-12);

        // sin phi = 0 kills the 1/x term regardless of x.
        let st = ProfileState::new(0.0, 0.3, 0.0, 0.0);
        let f = profile_field(2, &poly(&[1.0]), &st).unwrap();
        assert_eq!(f.0, 1.0);
        assert_eq!(f.1, 0.0);
        assert!((f.2 - 2.0).abs() < 1e-15);

        assert!(profile_field(2, &poly(&[1.0]), &ProfileState::new(0.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn axis_seed_both_signs() {
        let st = start_at_axis(2, &poly(&[1.0]), 1).unwrap();
        assert_eq!(st.s, 1e-4);
        assert_eq!(st.x, 1e-4);
        assert!((st.phi - 1e-4).abs() < 1e-18);
        assert!((st.z - 5e-9).abs() < 1e-20);

        // h = y + 2 at y = -1 gives common curvature 1.
        let st = start_at_axis(2, &poly(&[2.0, 1.0]), -1).unwrap();
        assert_eq!(st.s, -1e-4);
        assert_eq!(st.x, 1e-4);
        assert!((st.phi - (PI - 1e-4)).abs() < 1e-15);
        assert!(st.z < 0.0);

        assert!(start_at_axis(2, &poly(&[1.0]), 0).is_err());
        assert!(start_at_axis(1, &poly(&[1.0]), 1).is_err());
    }

    #[test]
    fn round_sphere_closes_on_axis() {
        let opts = IntegrationOptions::default();
        let trace = launch_from_axis(2, &poly(&[1.0]), 1, &opts).unwrap();
        assert_eq!(trace.termination, EventKind::AxisOrthogonal);
        // Unit sphere: meets the axis again at arclength pi with y = -1.
        let last = trace.samples.last().unwrap();
        assert!((last.s - PI).abs() < 1e-6, "s_end = {}", last.s);
        assert!((last.y() + 1.0).abs() < 1e-6);
        // Equator crossing at x = 1.
        let eq = trace
            .events
            .iter()
            .find(|e| e.kind == EventKind::EquatorCross)
            .expect("equator crossing");
        assert!((eq.state_at.x - 1.0).abs() < 1e-8, "x_eq = {}", eq.state_at.x);
        // Synthetic axis endpoint at s = 0 heads the event list.
        assert_eq!(trace.events[0].kind, EventKind::AxisOrthogonal);
        assert_eq!(trace.events[0].s_at, 0.0);
        assert!(trace.pmc_residual() <= 1e-6);
        assert!(trace.unit_speed_defect() <= 1e-8);
    }

    #[test]
    fn cylinder_initial_condition_is_captured_immediately() {
        let opts = IntegrationOptions::default();
        let init = ProfileState::new(0.0, 0.5, 0.0, FRAC_PI_2);
        let trace = integrate_orbit(2, &poly(&[1.0, 0.0, 1.0]), init, &opts).unwrap();
        assert_eq!(trace.termination, EventKind::EquilibriumApproach);
        let term = trace.events.last().unwrap();
        assert!(term.s_at.abs() < 1e-12, "entry at {}", term.s_at);
        // Confirmation takes one arclength unit.
        let last = trace.samples.last().unwrap();
        assert!(last.s >= 1.0 - 1e-9);
        assert!(trace.pmc_residual() <= 1e-10);
    }

    #[test]
    fn cmc_unduloid_closes() {
        let opts = IntegrationOptions {
            closure_tol: 1e-6,
            ..IntegrationOptions::default()
        };
        let init = ProfileState::new(0.0, 0.75, 0.0, FRAC_PI_2);
        let trace = integrate_orbit(2, &poly(&[1.0]), init, &opts).unwrap();
        match trace.termination {
            EventKind::Closure { period } => assert!(period > 0.1, "period {period}"),
            ref k => panic!("expected closure, got {k:?}"),
        }
        assert!(!trace.events.iter().any(|e| e.kind == EventKind::PoleCross));
    }

    #[test]
    fn exterior_bigraph_escapes_without_poles() {
        // h = y^2 - 1 vanishes at the poles; the orbit escapes on both sides
        // and never crosses them.
        let opts = IntegrationOptions {
            x_max: 50.0,
            ..IntegrationOptions::default()
        };
        let init = ProfileState::new(0.0, 1.0, 0.0, FRAC_PI_2);
        let (back, fwd) = integrate_bidirectional(2, &poly(&[-1.0, 0.0, 1.0]), init, &opts).unwrap();
        assert_eq!(back.termination, EventKind::Escape);
        assert_eq!(fwd.termination, EventKind::Escape);
        for t in [&back, &fwd] {
            assert!(!t.events.iter().any(|e| e.kind == EventKind::PoleCross));
        }
        // Reversed reporting: backward samples ascend in s and end at s = 0.
        assert!(back.samples.windows(2).all(|w| w[1].s > w[0].s));
        assert!(back.samples.last().unwrap().s.abs() < 1e-12);
        assert_eq!(back.direction, -1);
        // Exactly one equator crossing total: the launch point itself, which
        // sits on the section; neither direction ever returns to it. Rounding
        // decides which member records the pass.
        let eq_total = back
            .events
            .iter()
            .chain(fwd.events.iter())
            .filter(|e| e.kind == EventKind::EquatorCross)
            .count();
        assert_eq!(eq_total, 1);
    }

    #[test]
    fn minimal_catenoid_profile_matches_closed_form() {
        let opts = IntegrationOptions {
            s_max: 2.0,
            ..IntegrationOptions::default()
        };
        let init = ProfileState::new(0.0, 1.0, 0.0, FRAC_PI_2);
        let trace = integrate_orbit(2, &poly(&[0.0]), init, &opts).unwrap();
        assert_eq!(trace.termination, EventKind::BudgetExhausted);
        for p in &trace.samples {
            let x_exact = (1.0 + p.s * p.s).sqrt();
            assert!(
                (p.x - x_exact).abs() < 1e-8,
                "x({}) = {}, exact {}",
                p.s,
                p.x,
                x_exact
            );
        }
    }

    #[test]
    fn terminal_location_stable_under_tolerance_halving() {
        let coarse = IntegrationOptions::default();
        let fine = IntegrationOptions {
            tol_abs: 5e-11,
            tol_rel: 5e-11,
            ..coarse.clone()
        };
        let t1 = launch_from_axis(2, &poly(&[1.0]), 1, &coarse).unwrap();
        let t2 = launch_from_axis(2, &poly(&[1.0]), 1, &fine).unwrap();
        let s1 = t1.samples.last().unwrap().s;
        let s2 = t2.samples.last().unwrap().s;
        assert!((s1 - s2).abs() <= 1e-6, "drift {}", (s1 - s2).abs());
    }

    #[test]
    fn even_profile_forward_backward_symmetry() {
        let opts = IntegrationOptions {
            s_max: 2.0,
            ..IntegrationOptions::default()
        };
        let h = poly(&[1.0, 0.0, 1.0]);
        let init = ProfileState::new(0.0, 0.7, 0.0, FRAC_PI_2);
        let (back, fwd) = integrate_bidirectional(2, &h, init, &opts).unwrap();
        for k in 1..20 {
            let s = 0.1 * k as f64;
            let p = fwd.state_at(s).unwrap();
            let q = back.state_at(-s).unwrap();
            assert!((p.x - q.x).abs() <= 1e-6, "x mismatch at s={s}");
            assert!((p.y() + q.y()).abs() <= 1e-6, "y mismatch at s={s}");
        }
    }

    #[test]
    fn step_underflow_is_reported() {
        let opts = IntegrationOptions {
            axis_tol: 1e-16,
            ..IntegrationOptions::default()
        };
        let init = ProfileState::new(0.0, 1e-13, 0.0, PI);
        let err = integrate_orbit(2, &poly(&[1.0]), init, &opts).unwrap_err();
        assert!(matches!(err, Error::StepUnderflow { .. }));
    }

    #[test]
    fn budget_lands_exactly() {
        let opts = IntegrationOptions {
            s_max: 3.0,
            ..IntegrationOptions::default()
        };
        let init = ProfileState::new(0.0, 2.0, 0.0, FRAC_PI_2);
        let trace = integrate_orbit(2, &poly(&[0.0]), init, &opts).unwrap();
        assert_eq!(trace.termination, EventKind::BudgetExhausted);
        let last = trace.samples.last().unwrap();
        assert!((last.s - 3.0).abs() < 1e-12);
        assert!(trace.samples.windows(2).all(|w| w[1].s > w[0].s));
    }

    #[test]
    fn residual_rejects_corrupted_samples() {
        let opts = IntegrationOptions {
            s_max: 2.0,
            ..IntegrationOptions::default()
        };
        let init = ProfileState::new(0.0, 1.0, 0.0, FRAC_PI_2);
        let h = poly(&[1.0]);
        let trace = integrate_orbit(2, &h, init, &opts).unwrap();
        assert!(trace.pmc_residual() <= 1e-6);
        let mut bad = trace.samples.clone();
        let mid = bad.len() / 2;
        bad[mid].phi += 1e-3;
        assert!(pmc_residual(&bad, 2, &h) > 1e-3);
    }
}
