//! Human-inspectable artifacts: OBJ meshes of revolved profiles (n = 2),
//! SVG phase portraits with the nullcline, equilibrium, orbits, and a
//! monotonicity arrow grid, and CSV profile tables. All emitters are pure
//! and byte-deterministic.

use crate::curvfn::CurvatureProfile;
use crate::error::{Error, Result};
use crate::integrate::{lagrange_derivative, IntegrationOptions, OrbitTrace, ProfileState};
use crate::phase::{DyDxSign, PhaseContext};
use std::fmt::Write as _;

/// Fixed SVG viewport.
const SVG_W: f64 = 800.0;
const SVG_H: f64 = 600.0;
const SVG_MARGIN: f64 = 10.0;
/// Sample count for the nullcline polyline.
const GAMMA_SAMPLES: usize = 1200;
/// Arrow glyph dimensions in pixels.
const ARROW_LEN: f64 = 14.0;
const ARROW_HEAD: f64 = 4.0;

/// Triangle mesh of a surface of revolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

impl Mesh {
    /// Total area, summed over triangles.
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
                let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
                let cx = u[1] * v[2] - u[2] * v[1];
                let cy = u[2] * v[0] - u[0] * v[2];
                let cz = u[0] * v[1] - u[1] * v[0];
                0.5 * (cx * cx + cy * cy + cz * cz).sqrt()
            })
            .sum()
    }
}

/// Revolve a profile polyline about the z-axis with `m` angular samples.
/// Rows hugging the axis collapse to pole vertices joined by triangle fans;
/// regular consecutive rows are joined by quads split into two triangles.
pub fn revolve(samples: &[ProfileState], m: usize) -> Result<Mesh> {
    if samples.len() < 2 {
        return Err(Error::Precondition(
            "revolve needs at least two profile samples".into(),
        ));
    }
    if m < 3 {
        return Err(Error::Precondition(
            "revolve needs at least three angular samples".into(),
        ));
    }
    let axis_tol = IntegrationOptions::default().axis_tol;
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    // Each row is either a full ring of m indices or a single pole index.
    enum Row {
        Ring(usize),
        Pole(usize),
    }
    let mut rows: Vec<Row> = Vec::with_capacity(samples.len());
    for p in samples {
        if p.x <= axis_tol {
            rows.push(Row::Pole(vertices.len()));
            vertices.push([0.0, 0.0, p.z]);
        } else {
            rows.push(Row::Ring(vertices.len()));
            for j in 0..m {
                let th = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                vertices.push([p.x * th.cos(), p.x * th.sin(), p.z]);
            }
        }
    }
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for w in rows.windows(2) {
        match (&w[0], &w[1]) {
            (Row::Ring(a), Row::Ring(b)) => {
                for j in 0..m {
                    let jn = (j + 1) % m;
                    triangles.push([a + j, b + j, b + jn]);
                    triangles.push([a + j, b + jn, a + jn]);
                }
            }
            (Row::Pole(p), Row::Ring(b)) => {
                for j in 0..m {
                    let jn = (j + 1) % m;
                    triangles.push([*p, b + j, b + jn]);
                }
            }
            (Row::Ring(a), Row::Pole(p)) => {
                for j in 0..m {
                    let jn = (j + 1) % m;
                    triangles.push([a + j, *p, a + jn]);
                }
            }
            // Two consecutive axis touches bound no area.
            (Row::Pole(_), Row::Pole(_)) => {}
        }
    }
    Ok(Mesh {
        vertices,
        triangles,
    })
}

/// Wavefront OBJ text: one `v` line per vertex, one `f` line per triangle,
/// 1-based indices, no normals.
pub fn obj_string(mesh: &Mesh) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {:.9} {:.9} {:.9}", v[0], v[1], v[2]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

/// Rendering options for `portrait_svg`.
#[derive(Debug, Clone, PartialEq)]
pub struct PortraitOptions {
    /// Right edge of the x-axis; autoscaled from the content when None.
    pub x_view: Option<f64>,
    /// Monotonicity arrow grid density (columns, rows).
    pub arrow_grid: (usize, usize),
}

impl Default for PortraitOptions {
    fn default() -> Self {
        PortraitOptions {
            x_view: None,
            arrow_grid: (16, 12),
        }
    }
}

struct Frame {
    x_view: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        SVG_MARGIN + (x / self.x_view).clamp(0.0, 1.0) * (SVG_W - 2.0 * SVG_MARGIN)
    }
    fn py(&self, y: f64) -> f64 {
        SVG_MARGIN + (1.0 - (y + 1.0) / 2.0).clamp(0.0, 1.0) * (SVG_H - 2.0 * SVG_MARGIN)
    }
}

/// Phase portrait of one branch: nullcline polyline(s), equilibrium marker,
/// orbit traces projected to (x, cos phi), and an arrow grid showing the
/// monotonicity direction of y along orbits. Output bytes depend only on the
/// inputs.
pub fn portrait_svg(ctx: &PhaseContext, traces: &[&OrbitTrace], options: &PortraitOptions) -> String {
    let gamma_pts = gamma_polyline_data(ctx);
    let e0 = ctx.equilibrium().map(|info| info.point);
    let x_view = options.x_view.unwrap_or_else(|| {
        let mut view = f64::NEG_INFINITY;
        for t in traces {
            for p in &t.samples {
                view = view.max(p.x);
            }
        }
        if let Some((x0, _)) = e0 {
            view = view.max(2.0 * x0);
        }
        if let Some(gmax) = gamma_pts
            .iter()
            .flatten()
            .map(|&(x, _)| x)
            .fold(None::<f64>, |acc, x| Some(acc.map_or(x, |a: f64| a.max(x))))
        {
            view = view.max(1.25 * gmax);
        }
        view
    });

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_W:.0}\" height=\"{SVG_H:.0}\" viewBox=\"0 0 {SVG_W:.0} {SVG_H:.0}\">"
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{SVG_W:.0}\" height=\"{SVG_H:.0}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        out,
        "<rect class=\"frame\" x=\"{m:.0}\" y=\"{m:.0}\" width=\"{w:.0}\" height=\"{h:.0}\" fill=\"none\" stroke=\"black\"/>",
        m = SVG_MARGIN,
        w = SVG_W - 2.0 * SVG_MARGIN,
        h = SVG_H - 2.0 * SVG_MARGIN
    );
    if !(x_view.is_finite() && x_view > 0.0) {
        // Nothing to scale against: a bare frame is the whole portrait.
        let _ = writeln!(out, "</svg>");
        return out;
    }
    let frame = Frame { x_view };

    // Horizontal midline y = 0.
    let _ = writeln!(
        out,
        "<line class=\"midline\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#cccccc\"/>",
        frame.px(0.0),
        frame.py(0.0),
        frame.px(x_view),
        frame.py(0.0)
    );

    for component in &gamma_pts {
        if component.len() < 2 {
            continue;
        }
        let mut pts = String::new();
        for &(x, y) in component {
            let _ = write!(pts, "{:.2},{:.2} ", frame.px(x), frame.py(y));
        }
        let _ = writeln!(
            out,
            "<polyline class=\"gamma\" points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>",
            pts.trim_end()
        );
    }

    arrow_grid(ctx, &frame, options.arrow_grid, &mut out);

    for t in traces {
        let mut runs: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for p in &t.samples {
            if p.x <= x_view {
                runs.last_mut().unwrap().push((p.x, p.y()));
            } else if !runs.last().unwrap().is_empty() {
                runs.push(Vec::new());
            }
        }
        for run in runs.iter().filter(|r| r.len() >= 2) {
            let mut pts = String::new();
            for &(x, y) in run {
                let _ = write!(pts, "{:.2},{:.2} ", frame.px(x), frame.py(y));
            }
            let _ = writeln!(
                out,
                "<polyline class=\"trace\" points=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1\"/>",
                pts.trim_end()
            );
        }
    }

    if let Some((x0, y0)) = e0 {
        if x0 <= x_view {
            let _ = writeln!(
                out,
                "<circle class=\"equilibrium\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"black\"/>",
                frame.px(x0),
                frame.py(y0)
            );
        }
    }

    let _ = writeln!(out, "</svg>");
    out
}

/// Nullcline sampled into components: maximal y-runs where it is defined.
fn gamma_polyline_data(ctx: &PhaseContext) -> Vec<Vec<(f64, f64)>> {
    let mut components: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    for i in 0..=GAMMA_SAMPLES {
        let y = -1.0 + 2.0 * i as f64 / GAMMA_SAMPLES as f64;
        match ctx.gamma(y) {
            Some(x) if x.is_finite() => current.push((x, y)),
            _ => {
                if current.len() >= 2 {
                    components.push(std::mem::take(&mut current));
                } else {
                    current.clear();
                }
            }
        }
    }
    if current.len() >= 2 {
        components.push(current);
    }
    components
}

fn arrow_grid(ctx: &PhaseContext, frame: &Frame, grid: (usize, usize), out: &mut String) {
    let (cols, rows) = grid;
    for i in 0..cols {
        for j in 0..rows {
            let x = frame.x_view * (i as f64 + 0.5) / cols as f64;
            let y = -1.0 + 2.0 * (j as f64 + 0.5) / rows as f64;
            let mono = match ctx.monotonicity(x, y) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let (f1, f2) = match ctx.vector_field(x, y) {
                Ok(f) => f,
                Err(_) => continue,
            };
            // Screen direction of the flow; y grows downward on screen.
            let norm = (f1 * f1 + f2 * f2).sqrt();
            if norm < 1e-300 {
                continue;
            }
            let (dx, dy) = (f1 / norm, -f2 / norm);
            let cx = frame.px(x);
            let cy = frame.py(y);
            let (x1, y1) = (cx - 0.5 * ARROW_LEN * dx, cy - 0.5 * ARROW_LEN * dy);
            let (x2, y2) = (cx + 0.5 * ARROW_LEN * dx, cy + 0.5 * ARROW_LEN * dy);
            let (hx1, hy1) = (
                x2 - ARROW_HEAD * (dx - 0.6 * dy),
                y2 - ARROW_HEAD * (dy + 0.6 * dx),
            );
            let (hx2, hy2) = (
                x2 - ARROW_HEAD * (dx + 0.6 * dy),
                y2 - ARROW_HEAD * (dy - 0.6 * dx),
            );
            let class = match mono.dy_dx_sign {
                DyDxSign::Positive => "arrow rising",
                DyDxSign::Negative => "arrow falling",
                DyDxSign::Zero => "arrow turning",
                DyDxSign::Undefined => "arrow vertical",
            };
            let _ = writeln!(
                out,
                "<path class=\"{class}\" d=\"M {x1:.2} {y1:.2} L {x2:.2} {y2:.2} M {hx1:.2} {hy1:.2} L {x2:.2} {y2:.2} L {hx2:.2} {hy2:.2}\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>"
            );
        }
    }
}

/// One parsed profile table.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvProfile {
    pub samples: Vec<ProfileState>,
    /// (kappa1, kappa2) columns as written.
    pub kappas: Vec<(f64, f64)>,
    pub events: Vec<CsvEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvEvent {
    pub kind: String,
    pub s: f64,
    pub x: f64,
    pub y: f64,
}

const CSV_HEADER: &str = "s,x,z,phi,y,kappa1,kappa2";

/// CSV table of a trace: header, one row per sample with 17 significant
/// digits, then one `# event` comment line per event. kappa1 is the observed
/// five-point finite difference of phi, kappa2 = sin(phi)/x.
pub fn profile_csv(trace: &OrbitTrace) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let len = trace.samples.len();
    for i in 0..len {
        let p = &trace.samples[i];
        let k1 = kappa1_observed(&trace.samples, i, trace.n, &trace.h);
        let k2 = p.phi.sin() / p.x;
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.s,
            p.x,
            p.z,
            p.phi,
            p.y(),
            k1,
            k2
        );
    }
    for e in &trace.events {
        let _ = writeln!(
            out,
            "# event,{},{:.16e},{:.16e},{:.16e}",
            e.kind.name(),
            e.s_at,
            e.state_at.x,
            e.state_at.y()
        );
    }
    out
}

/// Five-point finite-difference curvature at sample i, offset windows near
/// the ends; traces too short for a stencil fall back to the field value.
fn kappa1_observed(samples: &[ProfileState], i: usize, n: u32, h: &CurvatureProfile) -> f64 {
    let len = samples.len();
    if len >= 2 {
        let width = 5.min(len);
        let lo = i.saturating_sub(width / 2).min(len - width);
        lagrange_derivative(&samples[lo..lo + width], i - lo)
    } else {
        let p = &samples[i];
        n as f64 * h.eval_clamped(p.y()) - (n as f64 - 1.0) * p.phi.sin() / p.x
    }
}

/// Parse text produced by `profile_csv`. Floats round-trip bitwise.
pub fn parse_profile_csv(text: &str) -> Result<CsvProfile> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first == CSV_HEADER => {}
        _ => {
            return Err(Error::Precondition(format!(
                "line 1: expected header `{CSV_HEADER}`"
            )))
        }
    }
    let mut profile = CsvProfile {
        samples: Vec::new(),
        kappas: Vec::new(),
        events: Vec::new(),
    };
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# event,") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 4 {
                return Err(Error::Precondition(format!(
                    "line {lineno}: event line needs kind,s,x,y"
                )));
            }
            let nums: Vec<f64> = parse_floats(&parts[1..], lineno)?;
            profile.events.push(CsvEvent {
                kind: parts[0].to_string(),
                s: nums[0],
                x: nums[1],
                y: nums[2],
            });
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 7 {
            return Err(Error::Precondition(format!(
                "line {lineno}: expected 7 columns, found {}",
                parts.len()
            )));
        }
        let nums = parse_floats(&parts, lineno)?;
        profile
            .samples
            .push(ProfileState::new(nums[0], nums[1], nums[2], nums[3]));
        profile.kappas.push((nums[5], nums[6]));
    }
    Ok(profile)
}

fn parse_floats(parts: &[&str], lineno: usize) -> Result<Vec<f64>> {
    parts
        .iter()
        .map(|p| {
            p.trim().parse::<f64>().map_err(|_| {
                Error::Precondition(format!("line {lineno}: `{p}` is not a number"))
            })
        })
        .collect()
}
