//! Run configuration: a JSON document naming the dimension, the curvature
//! profile, the mode, the launch data, and optional overrides for the
//! integrator tolerances and budgets. Configs are archivable: a mode only
//! reads the sections it needs, so one file can serve several modes, but
//! unknown keys are rejected everywhere to catch typos.

use pmc_rotor_core::{CurvatureProfile, IntegrationOptions};
use serde::{Deserialize, Serialize};

/// What the invocation should do. The command line names the mode; a config
/// may repeat it, in which case the two must agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Portrait,
    Orbit,
    Classify,
    Family,
    Mesh,
    CheckDirichlet,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Portrait => "portrait",
            Mode::Orbit => "orbit",
            Mode::Classify => "classify",
            Mode::Family => "family",
            Mode::Mesh => "mesh",
            Mode::CheckDirichlet => "check-dirichlet",
            Mode::Verify => "verify",
        }
    }

    pub fn parse(text: &str) -> Option<Mode> {
        match text {
            "portrait" => Some(Mode::Portrait),
            "orbit" => Some(Mode::Orbit),
            "classify" => Some(Mode::Classify),
            "family" => Some(Mode::Family),
            "mesh" => Some(Mode::Mesh),
            "check-dirichlet" => Some(Mode::CheckDirichlet),
            "verify" => Some(Mode::Verify),
            _ => None,
        }
    }
}

/// Where the orbit starts: on the axis with the normal pointing up or down,
/// or at an interior profile point (integrated in both directions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum InitSpec {
    Axis { delta: i8 },
    Point { x: f64, phi: f64 },
}

/// Integrator overrides; anything left out keeps its default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsPatch {
    pub tol_abs: Option<f64>,
    pub tol_rel: Option<f64>,
    pub s_max: Option<f64>,
    pub x_max: Option<f64>,
    pub axis_tol: Option<f64>,
    pub e0_tol: Option<f64>,
    pub closure_tol: Option<f64>,
    pub max_step: Option<f64>,
    pub max_pole_crossings: Option<usize>,
    pub max_samples: Option<usize>,
}

impl OptionsPatch {
    pub fn apply(&self, mut base: IntegrationOptions) -> IntegrationOptions {
        if let Some(v) = self.tol_abs {
            base.tol_abs = v;
        }
        if let Some(v) = self.tol_rel {
            base.tol_rel = v;
        }
        if let Some(v) = self.s_max {
            base.s_max = v;
        }
        if let Some(v) = self.x_max {
            base.x_max = v;
        }
        if let Some(v) = self.axis_tol {
            base.axis_tol = v;
        }
        if let Some(v) = self.e0_tol {
            base.e0_tol = v;
        }
        if let Some(v) = self.closure_tol {
            base.closure_tol = v;
        }
        if let Some(v) = self.max_step {
            base.max_step = v;
        }
        if let Some(v) = self.max_pole_crossings {
            base.max_pole_crossings = v;
        }
        if let Some(v) = self.max_samples {
            base.max_samples = v;
        }
        base
    }

    /// First out-of-range override, as (field, complaint).
    pub fn first_invalid(&self) -> Option<(&'static str, String)> {
        let positives = [
            ("tol_abs", self.tol_abs),
            ("tol_rel", self.tol_rel),
            ("s_max", self.s_max),
            ("x_max", self.x_max),
            ("axis_tol", self.axis_tol),
            ("e0_tol", self.e0_tol),
            ("closure_tol", self.closure_tol),
            ("max_step", self.max_step),
        ];
        for (name, value) in positives {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Some((name, format!("must be a positive finite number, got {v}")));
                }
            }
        }
        if let Some(0) = self.max_pole_crossings {
            return Some(("max_pole_crossings", "must be at least 1".into()));
        }
        if let Some(c) = self.max_samples {
            if c < 2 {
                return Some(("max_samples", "must be at least 2".into()));
            }
        }
        None
    }
}

/// Radius grid for family mode: evenly spaced section launches in
/// [x_lo, x_hi].
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub x_lo: f64,
    pub x_hi: f64,
    pub count: usize,
}

/// Mesh tessellation control.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    /// Segments around the rotation axis.
    pub segments: Option<usize>,
}

/// Parameters of the Dirichlet ball solvability record.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletSpec {
    pub h_max: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<u32>,
    pub h: Option<CurvatureProfile>,
    pub mode: Option<Mode>,
    pub init: Option<InitSpec>,
    #[serde(default)]
    pub options: OptionsPatch,
    /// Output path prefix; the mode appends its own extensions.
    pub output: Option<String>,
    pub family: Option<FamilySpec>,
    pub mesh: Option<MeshSpec>,
    pub dirichlet: Option<DirichletSpec>,
}

/// A parsed config together with its raw text and origin, kept for
/// line-anchored complaints about semantic problems.
#[derive(Debug, Clone)]
pub struct ConfigSource {
    pub path: String,
    pub raw: String,
    pub cfg: RunConfig,
}

impl ConfigSource {
    pub fn load(path: &std::path::Path) -> Result<ConfigSource, String> {
        let shown = path.display().to_string();
        let raw = std::fs::read_to_string(path)
            .map_err(|e| format!("{shown}: cannot read config: {e}"))?;
        let cfg: RunConfig = serde_json::from_str(&raw)
            .map_err(|e| format!("{shown}:{}:{}: {e}", e.line(), e.column()))?;
        Ok(ConfigSource { path: shown, raw, cfg })
    }

    /// Complaint about `key`, anchored to the line where the key appears
    /// (or to the file as a whole when it does not).
    pub fn complain(&self, key: &str, message: &str) -> String {
        match key_line(&self.raw, key) {
            Some(line) => format!("{}:{line}: {message}", self.path),
            None => format!("{}: {message}", self.path),
        }
    }
}

/// 1-based line of the first occurrence of the quoted key.
fn key_line(raw: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    raw.find(&needle)
        .map(|off| raw[..off].bytes().filter(|&b| b == b'\n').count() + 1)
}
