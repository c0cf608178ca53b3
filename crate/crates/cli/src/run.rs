//! Mode execution: integrate the configured orbit, classify or render it,
//! and write the requested artifacts. All outputs are deterministic
//! functions of the config; no timestamps or machine identity leak in.

use crate::config::{ConfigSource, InitSpec, Mode};
use crate::Failure;
use pmc_rotor_core::classify::{classify, delaunay_family, Diagnostics, HInfo, SurfaceClass,
    TraceSet, Verdict};
use pmc_rotor_core::geomio::{obj_string, portrait_svg, profile_csv, revolve, PortraitOptions};
use pmc_rotor_core::integrate::{integrate_bidirectional, launch_from_axis, Event, EventKind};
use pmc_rotor_core::oracles::dirichlet_ball_check;
use pmc_rotor_core::phase::PhaseContext;
use pmc_rotor_core::{verify, CurvatureProfile, IntegrationOptions, OrbitTrace, ProfileState};
use serde::Serialize;
use std::path::Path;

/// Segments around the axis when the config does not say.
const MESH_SEGMENTS: usize = 64;
/// Family workers when `PMC_ROTOR_THREADS` is unset.
const DEFAULT_WORKERS: usize = 8;

/// Command-line overrides applied on top of the config.
pub struct Overrides {
    pub out: Option<String>,
    pub tol: Option<f64>,
    pub s_max: Option<f64>,
}

pub fn run_verify() -> Result<(), Failure> {
    let report = verify::run_all();
    for line in report.lines() {
        println!("{line}");
    }
    let failed = report.outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(Failure::Runtime(format!(
            "{failed} of {} verification criteria failed",
            report.outcomes.len()
        )));
    }
    Ok(())
}

pub fn run_with_config(mode: Mode, src: &ConfigSource, over: &Overrides) -> Result<(), Failure> {
    match mode {
        Mode::Verify => run_verify(),
        Mode::CheckDirichlet => check_dirichlet(src),
        Mode::Portrait => portrait(src, over),
        Mode::Orbit => orbit(src, over),
        Mode::Classify => classify_mode(src, over),
        Mode::Family => family(src, over),
        Mode::Mesh => mesh(src, over),
    }
}

// ---- field resolution ----------------------------------------------------

fn resolve_n(src: &ConfigSource) -> Result<u32, Failure> {
    let n = src
        .cfg
        .n
        .ok_or_else(|| Failure::Config(src.complain("n", "field `n` is required for this mode")))?;
    if n < 2 {
        return Err(Failure::Config(
            src.complain("n", "the dimension n must be at least 2"),
        ));
    }
    Ok(n)
}

fn resolve_h(src: &ConfigSource) -> Result<&CurvatureProfile, Failure> {
    src.cfg
        .h
        .as_ref()
        .ok_or_else(|| Failure::Config(src.complain("h", "field `h` is required for this mode")))
}

fn resolve_init(src: &ConfigSource) -> Result<InitSpec, Failure> {
    let init = src.cfg.init.ok_or_else(|| {
        Failure::Config(src.complain("init", "field `init` is required for this mode"))
    })?;
    validate_init(src, init)?;
    Ok(init)
}

fn validate_init(src: &ConfigSource, init: InitSpec) -> Result<(), Failure> {
    match init {
        InitSpec::Axis { delta } if delta != 1 && delta != -1 => Err(Failure::Config(
            src.complain("delta", "axis launch delta must be +1 or -1"),
        )),
        InitSpec::Point { x, .. } if !(x.is_finite() && x > 0.0) => Err(Failure::Config(
            src.complain("x", "initial x must be positive and finite"),
        )),
        InitSpec::Point { phi, .. } if !phi.is_finite() => Err(Failure::Config(
            src.complain("phi", "initial phi must be finite"),
        )),
        _ => Ok(()),
    }
}

fn resolve_opts(src: &ConfigSource, over: &Overrides) -> Result<IntegrationOptions, Failure> {
    if let Some((field, why)) = src.cfg.options.first_invalid() {
        return Err(Failure::Config(src.complain(field, &why)));
    }
    let mut opts = src.cfg.options.apply(IntegrationOptions::default());
    if let Some(tol) = over.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Failure::Config(format!(
                "--tol must be a positive finite number, got {tol}"
            )));
        }
        opts.tol_abs = tol;
        opts.tol_rel = tol;
    }
    if let Some(s_max) = over.s_max {
        if !(s_max.is_finite() && s_max > 0.0) {
            return Err(Failure::Config(format!(
                "--s-max must be a positive finite number, got {s_max}"
            )));
        }
        opts.s_max = s_max;
    }
    Ok(opts)
}

fn resolve_prefix(src: &ConfigSource, over: &Overrides) -> Result<String, Failure> {
    over.out
        .clone()
        .or_else(|| src.cfg.output.clone())
        .ok_or_else(|| {
            Failure::Config(src.complain(
                "output",
                "an output prefix is required: set `output` in the config or pass --out",
            ))
        })
}

// ---- orbit plumbing ------------------------------------------------------

enum Orbits {
    Single(OrbitTrace),
    /// Backward and forward halves from an interior start, both ascending
    /// in s.
    Pair(OrbitTrace, OrbitTrace),
}

impl Orbits {
    fn trace_set(&self) -> TraceSet<'_> {
        match self {
            Orbits::Single(t) => TraceSet::Single(t),
            Orbits::Pair(b, f) => TraceSet::Pair(b, f),
        }
    }

    fn members(&self) -> Vec<&OrbitTrace> {
        match self {
            Orbits::Single(t) => vec![t],
            Orbits::Pair(b, f) => vec![b, f],
        }
    }

    fn terminations(&self) -> Vec<&EventKind> {
        self.members().into_iter().map(|t| &t.termination).collect()
    }

    /// One s-ascending trace covering the whole profile; the duplicate
    /// interior start of a pair is dropped from the forward half.
    fn merged(&self) -> OrbitTrace {
        match self {
            Orbits::Single(t) => (*t).clone(),
            Orbits::Pair(back, fwd) => {
                let mut samples = back.samples.clone();
                samples.extend(fwd.samples.iter().skip(1).copied());
                let mut events: Vec<Event> = back.events.clone();
                events.extend(fwd.events.iter().cloned());
                events.sort_by(|a, b| a.s_at.total_cmp(&b.s_at));
                OrbitTrace {
                    n: fwd.n,
                    h: fwd.h.clone(),
                    direction: 1,
                    samples,
                    events,
                    termination: fwd.termination.clone(),
                }
            }
        }
    }
}

fn compute_orbits(
    n: u32,
    h: &CurvatureProfile,
    init: InitSpec,
    opts: &IntegrationOptions,
) -> Result<Orbits, Failure> {
    let numerical = |e: pmc_rotor_core::Error| Failure::Runtime(format!("numerical failure: {e}"));
    match init {
        InitSpec::Axis { delta } => Ok(Orbits::Single(
            launch_from_axis(n, h, delta, opts).map_err(numerical)?,
        )),
        InitSpec::Point { x, phi } => {
            let start = ProfileState::new(0.0, x, 0.0, phi);
            let (back, fwd) = integrate_bidirectional(n, h, start, opts).map_err(numerical)?;
            Ok(Orbits::Pair(back, fwd))
        }
    }
}

// ---- modes ---------------------------------------------------------------

#[derive(Serialize)]
struct ClassifyRecord<'a> {
    n: u32,
    h: &'a CurvatureProfile,
    init: InitSpec,
    verdict: Verdict,
    diagnostics: &'a Diagnostics,
}

fn classify_mode(src: &ConfigSource, over: &Overrides) -> Result<(), Failure> {
    let (n, h) = (resolve_n(src)?, resolve_h(src)?);
    let init = resolve_init(src)?;
    let opts = resolve_opts(src, over)?;
    let prefix = resolve_prefix(src, over)?;
    let orbits = compute_orbits(n, h, init, &opts)?;
    let class = classify(&orbits.trace_set(), &HInfo::of(h))
        .map_err(|e| Failure::Runtime(format!("classification failed: {e}")))?;
    let merged = orbits.merged();
    write_artifact(&format!("{prefix}.csv"), &profile_csv(&merged))?;
    let record = ClassifyRecord {
        n,
        h,
        init,
        verdict: class.verdict,
        diagnostics: &class.diagnostics,
    };
    write_artifact(&format!("{prefix}.json"), &pretty_json(&record)?)?;
    println!("verdict {:?}", class.verdict);
    println!("wrote {prefix}.csv and {prefix}.json");
    Ok(())
}

#[derive(Serialize)]
struct OrbitRecord<'a> {
    n: u32,
    h: &'a CurvatureProfile,
    init: InitSpec,
    terminations: Vec<&'a EventKind>,
    sample_count: usize,
    pmc_residual: f64,
    unit_speed_defect: f64,
    events: &'a [Event],
}

fn orbit(src: &ConfigSource, over: &Overrides) -> Result<(), Failure> {
    let (n, h) = (resolve_n(src)?, resolve_h(src)?);
    let init = resolve_init(src)?;
    let opts = resolve_opts(src, over)?;
    let prefix = resolve_prefix(src, over)?;
    let orbits = compute_orbits(n, h, init, &opts)?;
    let merged = orbits.merged();
    write_artifact(&format!("{prefix}.csv"), &profile_csv(&merged))?;
    let record = OrbitRecord {
        n,
        h,
        init,
        terminations: orbits.terminations(),
        sample_count: merged.samples.len(),
        pmc_residual: merged.pmc_residual(),
        unit_speed_defect: merged.unit_speed_defect(),
        events: &merged.events,
    };
    write_artifact(&format!("{prefix}.json"), &pretty_json(&record)?)?;
    let names: Vec<&str> = record.terminations.iter().map(|k| k.name()).collect();
    println!("terminated {}", names.join(", "));
    println!("wrote {prefix}.csv and {prefix}.json");
    Ok(())
}

fn portrait(src: &ConfigSource, over: &Overrides) -> Result<(), Failure> {
    let (n, h) = (resolve_n(src)?, resolve_h(src)?);
    let opts = resolve_opts(src, over)?;
    let prefix = resolve_prefix(src, over)?;
    // The orbit overlay is optional; without an init the portrait still
    // shows the nullcline, the equilibrium, and the monotonicity arrows.
    let orbits = match src.cfg.init {
        Some(init) => {
            validate_init(src, init)?;
            Some(compute_orbits(n, h, init, &opts)?)
        }
        None => None,
    };
    let eps = match src.cfg.init {
        Some(InitSpec::Point { phi, .. }) if phi.sin() < 0.0 => -1,
        _ => 1,
    };
    let ctx = PhaseContext::new(n, h.clone(), eps)
        .map_err(|e| Failure::Runtime(format!("phase context failed: {e}")))?;
    let traces = orbits.as_ref().map(|o| o.members()).unwrap_or_default();
    let svg = portrait_svg(&ctx, &traces, &PortraitOptions::default());
    write_artifact(&format!("{prefix}.svg"), &svg)?;
    println!("wrote {prefix}.svg");
    Ok(())
}

fn mesh(src: &ConfigSource, over: &Overrides) -> Result<(), Failure> {
    let (n, h) = (resolve_n(src)?, resolve_h(src)?);
    let init = resolve_init(src)?;
    let opts = resolve_opts(src, over)?;
    let prefix = resolve_prefix(src, over)?;
    let segments = src
        .cfg
        .mesh
        .and_then(|m| m.segments)
        .unwrap_or(MESH_SEGMENTS);
    if segments < 3 {
        return Err(Failure::Config(
            src.complain("segments", "a mesh needs at least 3 segments around the axis"),
        ));
    }
    let merged = compute_orbits(n, h, init, &opts)?.merged();
    let mesh = revolve(&merged.samples, segments)
        .map_err(|e| Failure::Runtime(format!("mesh generation failed: {e}")))?;
    write_artifact(&format!("{prefix}.obj"), &obj_string(&mesh))?;
    println!(
        "wrote {prefix}.obj ({} vertices, {} triangles)",
        mesh.vertices.len(),
        mesh.triangles.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct FamilyMember {
    x: f64,
    verdict: Verdict,
    diagnostics: Diagnostics,
}

fn family(src: &ConfigSource, over: &Overrides) -> Result<(), Failure> {
    let (n, h) = (resolve_n(src)?, resolve_h(src)?);
    let opts = resolve_opts(src, over)?;
    let prefix = resolve_prefix(src, over)?;
    let fam = src.cfg.family.ok_or_else(|| {
        Failure::Config(src.complain("family", "field `family` is required for family mode"))
    })?;
    if !(fam.x_lo.is_finite() && fam.x_lo > 0.0) {
        return Err(Failure::Config(
            src.complain("x_lo", "family x_lo must be positive and finite"),
        ));
    }
    if !(fam.x_hi.is_finite() && fam.x_hi >= fam.x_lo) {
        return Err(Failure::Config(
            src.complain("x_hi", "family x_hi must be finite and at least x_lo"),
        ));
    }
    if fam.count == 0 {
        return Err(Failure::Config(
            src.complain("count", "family count must be at least 1"),
        ));
    }

    let radius = |i: usize| {
        if fam.count == 1 {
            fam.x_lo
        } else {
            fam.x_lo + (fam.x_hi - fam.x_lo) * i as f64 / (fam.count - 1) as f64
        }
    };
    type MemberResult = Result<(f64, SurfaceClass), pmc_rotor_core::Error>;
    let mut slots: Vec<Option<MemberResult>> = vec![None; fam.count];
    let workers = worker_count(fam.count);
    let chunk = fam.count.div_ceil(workers);
    let radius = &radius;
    let opts = &opts;
    std::thread::scope(|scope| {
        for (w, block) in slots.chunks_mut(chunk).enumerate() {
            scope.spawn(move || {
                for (j, slot) in block.iter_mut().enumerate() {
                    let x = radius(w * chunk + j);
                    *slot = Some(delaunay_family(n, h, x, x, 1, opts).map(|mut v| v.remove(0)));
                }
            });
        }
    });

    let mut members = Vec::with_capacity(fam.count);
    for slot in slots {
        let (x, class) = slot
            .expect("every slot is filled by its worker")
            .map_err(|e| Failure::Runtime(format!("family member failed: {e}")))?;
        members.push(FamilyMember {
            x,
            verdict: class.verdict,
            diagnostics: class.diagnostics,
        });
    }
    write_artifact(&format!("{prefix}_family.json"), &pretty_json(&members)?)?;
    let closed = members.iter().filter(|m| m.diagnostics.closed).count();
    println!(
        "wrote {prefix}_family.json ({} members, {closed} closed)",
        members.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct DirichletRecord {
    n: u32,
    h_max: f64,
    rho: f64,
    cond_volume: bool,
    cond_boundary: bool,
    solvable: bool,
}

fn check_dirichlet(src: &ConfigSource) -> Result<(), Failure> {
    let n = resolve_n(src)?;
    let d = src.cfg.dirichlet.ok_or_else(|| {
        Failure::Config(src.complain(
            "dirichlet",
            "field `dirichlet` is required for check-dirichlet mode",
        ))
    })?;
    if !(d.h_max.is_finite() && d.h_max >= 0.0) {
        return Err(Failure::Config(
            src.complain("h_max", "dirichlet h_max must be finite and nonnegative"),
        ));
    }
    if !(d.rho.is_finite() && d.rho > 0.0) {
        return Err(Failure::Config(
            src.complain("rho", "dirichlet rho must be positive and finite"),
        ));
    }
    let check = dirichlet_ball_check(n, d.h_max, d.rho)
        .map_err(|e| Failure::Runtime(format!("dirichlet check failed: {e}")))?;
    let record = DirichletRecord {
        n,
        h_max: d.h_max,
        rho: d.rho,
        cond_volume: check.cond_volume,
        cond_boundary: check.cond_boundary,
        solvable: check.solvable,
    };
    println!(
        "{}",
        serde_json::to_string(&record)
            .map_err(|e| Failure::Runtime(format!("serialization failed: {e}")))?
    );
    Ok(())
}

// ---- helpers -------------------------------------------------------------

/// Family worker count: `PMC_ROTOR_THREADS` caps it when set and sane;
/// never more workers than members, never fewer than one.
fn worker_count(members: usize) -> usize {
    let cap = match std::env::var("PMC_ROTOR_THREADS") {
        Ok(text) => match text.trim().parse::<usize>() {
            Ok(v) if v >= 1 => v,
            _ => {
                eprintln!(
                    "warning: ignoring PMC_ROTOR_THREADS={text:?}; expected a positive integer"
                );
                default_workers()
            }
        },
        Err(_) => default_workers(),
    };
    cap.min(members).max(1)
}

fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(DEFAULT_WORKERS)
}

fn pretty_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|mut text| {
            text.push('\n');
            text
        })
        .map_err(|e| Failure::Runtime(format!("serialization failed: {e}")))
}

fn write_artifact(path: &str, content: &str) -> Result<(), Failure> {
    if let Some(dir) = Path::new(path).parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| Failure::Runtime(format!("cannot write {path}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use std::f64::consts::FRAC_PI_2;

    fn source(raw: &str) -> ConfigSource {
        ConfigSource {
            path: "test.json".into(),
            raw: raw.into(),
            cfg: serde_json::from_str::<RunConfig>(raw).expect("config"),
        }
    }

    #[test]
    fn missing_required_field_is_anchored() {
        let src = source("{\n  \"n\": 2\n}");
        let err = resolve_h(&src).unwrap_err();
        match err {
            Failure::Config(msg) => assert!(msg.starts_with("test.json: "), "{msg}"),
            other => panic!("expected config failure, got {other:?}"),
        }
    }

    #[test]
    fn bad_dimension_is_anchored_to_its_line() {
        let src = source("{\n  \"n\": 1\n}");
        match resolve_n(&src).unwrap_err() {
            Failure::Config(msg) => assert!(msg.starts_with("test.json:2:"), "{msg}"),
            other => panic!("expected config failure, got {other:?}"),
        }
    }

    #[test]
    fn cli_tol_overrides_both_tolerances() {
        let src = source(r#"{"options": {"tol_abs": 1e-6}}"#);
        let over = Overrides {
            out: None,
            tol: Some(1e-12),
            s_max: None,
        };
        let opts = resolve_opts(&src, &over).expect("opts");
        assert_eq!(opts.tol_abs, 1e-12);
        assert_eq!(opts.tol_rel, 1e-12);
    }

    #[test]
    fn merged_pair_drops_the_duplicate_seed() {
        let h = CurvatureProfile::constant(1.0);
        let opts = IntegrationOptions::default();
        let init = InitSpec::Point {
            x: 1.0,
            phi: FRAC_PI_2,
        };
        let orbits = compute_orbits(2, &h, init, &opts).expect("orbits");
        let merged = orbits.merged();
        let (back, fwd) = match &orbits {
            Orbits::Pair(b, f) => (b, f),
            Orbits::Single(_) => panic!("point init must integrate both ways"),
        };
        assert_eq!(
            merged.samples.len(),
            back.samples.len() + fwd.samples.len() - 1
        );
        assert!(merged
            .samples
            .windows(2)
            .all(|w| w[0].s < w[1].s));
        let mut last = f64::NEG_INFINITY;
        for e in &merged.events {
            assert!(e.s_at >= last);
            last = e.s_at;
        }
    }

    #[test]
    fn worker_count_respects_member_count() {
        assert_eq!(worker_count(1), 1);
        assert!(worker_count(64) >= 1);
    }
}
