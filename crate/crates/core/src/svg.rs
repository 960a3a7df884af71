//! SVG wireframes of sampled surfaces.
//!
//! Three chosen real coordinates are mapped to the page by a fixed cabinet
//! projection: the first axis runs horizontally, the second recedes at 45
//! degrees with half length, and the third runs vertically. Each axis is
//! scaled to the unit interval before projecting.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::field::ComplexVector;
use crate::surface::{Node, SurfaceMesh};

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 24.0;
const DEPTH: f64 = 0.5;
const REAL_TIME_COLOR: &str = "#d62728";

#[derive(Debug, Error)]
pub enum SvgError {
    #[error("axis {axis} is not valid for a {dim}-dimensional mesh")]
    InvalidAxis { axis: String, dim: usize },
    #[error("cannot parse axis '{0}': expected re<k> or im<k>")]
    BadAxisName(String),
    #[error("mesh has no valid nodes")]
    EmptyMesh,
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

/// One real coordinate of a complex state: `Re z_k` or `Im z_k` (0-based `k`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Axis {
    pub component: usize,
    pub part: Part,
}

impl Axis {
    pub fn re(component: usize) -> Self {
        Self {
            component,
            part: Part::Re,
        }
    }

    pub fn im(component: usize) -> Self {
        Self {
            component,
            part: Part::Im,
        }
    }

    fn pick(self, z: &ComplexVector) -> f64 {
        match self.part {
            Part::Re => z[self.component].re,
            Part::Im => z[self.component].im,
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let part = match self.part {
            Part::Re => "re",
            Part::Im => "im",
        };
        write!(f, "{part}{}", self.component + 1)
    }
}

/// Parses `re1`, `im2`, ... (1-based, as in expression variables).
impl FromStr for Axis {
    type Err = SvgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SvgError::BadAxisName(s.to_string());
        let lower = s.trim().to_ascii_lowercase();
        let (part, rest) = if let Some(rest) = lower.strip_prefix("re") {
            (Part::Re, rest)
        } else if let Some(rest) = lower.strip_prefix("im") {
            (Part::Im, rest)
        } else {
            return Err(bad());
        };
        let k: usize = rest
            .trim_start_matches(['_', 'z', 'x'])
            .parse()
            .map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        Ok(Self {
            component: k - 1,
            part,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Projection {
    pub axes: [Axis; 3],
}

impl Default for Projection {
    /// `(Re z1, Im z1, Re z2)`: the slow mode spans the floor, the second
    /// component is the height.
    fn default() -> Self {
        Self {
            axes: [Axis::re(0), Axis::im(0), Axis::re(1)],
        }
    }
}

impl Projection {
    pub fn new(axes: [Axis; 3]) -> Self {
        Self { axes }
    }

    pub fn validate(&self, dim: usize) -> Result<(), SvgError> {
        for axis in self.axes {
            if axis.component >= dim {
                return Err(SvgError::InvalidAxis {
                    axis: axis.to_string(),
                    dim,
                });
            }
        }
        Ok(())
    }
}

struct Scale {
    lo: [f64; 3],
    span: [f64; 3],
}

impl Scale {
    fn unit(&self, p: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|a| {
            if self.span[a] > 0.0 {
                (p[a] - self.lo[a]) / self.span[a]
            } else {
                0.5
            }
        })
    }

    fn degenerate(&self) -> bool {
        self.span.iter().all(|&s| s == 0.0)
    }
}

fn page(u: [f64; 3]) -> (f64, f64) {
    let c = DEPTH * std::f64::consts::FRAC_1_SQRT_2;
    let x = u[0] + c * u[1];
    let y = u[2] + c * u[1];
    let extent = 1.0 + c;
    let sx = (WIDTH - 2.0 * MARGIN) / extent;
    let sy = (HEIGHT - 2.0 * MARGIN) / extent;
    (MARGIN + sx * x, HEIGHT - MARGIN - sy * y)
}

/// Runs of consecutive valid nodes.
fn runs<'a>(nodes: impl Iterator<Item = &'a Node>) -> Vec<Vec<&'a ComplexVector>> {
    let mut out = vec![];
    let mut current: Vec<&ComplexVector> = vec![];
    for node in nodes {
        match node.value() {
            Some(z) => current.push(z),
            None => {
                if !current.is_empty() {
                    out.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Render the mesh as an SVG document.
///
/// Columns (fixed sigma) and rows (fixed tau) become grey polylines, the
/// real-time trajectory a red one. A mesh whose projected nodes all coincide
/// is drawn as a single point marker.
pub fn surface_svg(mesh: &SurfaceMesh, projection: &Projection) -> Result<String, SvgError> {
    projection.validate(mesh.dim)?;
    let coords =
        |z: &ComplexVector| -> [f64; 3] { std::array::from_fn(|a| projection.axes[a].pick(z)) };

    let valid: Vec<[f64; 3]> = mesh
        .nodes
        .iter()
        .flatten()
        .chain(&mesh.real_row)
        .filter_map(Node::value)
        .map(coords)
        .collect();
    if valid.is_empty() {
        return Err(SvgError::EmptyMesh);
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in &valid {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let span: [f64; 3] = std::array::from_fn(|a| {
        let s = hi[a] - lo[a];
        if s > 1e-12 * (1.0 + lo[a].abs().max(hi[a].abs())) {
            s
        } else {
            0.0
        }
    });
    let scale = Scale { lo, span };
    let point = |z: &ComplexVector| page(scale.unit(coords(z)));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<desc>axes: {}, {}, {}; {}</desc>"#,
        projection.axes[0], projection.axes[1], projection.axes[2], mesh.convention
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    let polyline = |svg: &mut String, run: &[&ComplexVector], class: &str, style: &str| {
        let pts: Vec<String> = run
            .iter()
            .map(|z| {
                let (x, y) = point(z);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="{class}" points="{}" fill="none" {style}/>"#,
            pts.join(" ")
        );
    };

    if scale.degenerate() {
        let (x, y) = page(scale.unit(valid[0]));
        let _ = writeln!(
            svg,
            r#"<circle class="degenerate" cx="{x:.3}" cy="{y:.3}" r="4" fill="black"/>"#
        );
    } else {
        let grid_style = r##"stroke="#7f7f7f" stroke-width="0.6""##;
        let _ = writeln!(svg, r#"<g class="mesh">"#);
        for column in &mesh.nodes {
            for run in runs(column.iter()).into_iter().filter(|r| r.len() > 1) {
                polyline(&mut svg, &run, "tau-line", grid_style);
            }
        }
        for i in 0..mesh.taus.len() {
            for run in runs(mesh.nodes.iter().map(|c| &c[i]))
                .into_iter()
                .filter(|r| r.len() > 1)
            {
                polyline(&mut svg, &run, "sigma-line", grid_style);
            }
        }
        let _ = writeln!(svg, "</g>");
    }
    let red = format!(r#"stroke="{REAL_TIME_COLOR}" stroke-width="2""#);
    for run in runs(mesh.real_row.iter()) {
        polyline(&mut svg, &run, "real-time", &red);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Write [`surface_svg`] output to `path`.
pub fn project_surface_svg(
    mesh: &SurfaceMesh,
    projection: &Projection,
    path: &Path,
) -> Result<(), SvgError> {
    let svg = surface_svg(mesh, projection)?;
    std::fs::write(path, svg).map_err(|source| SvgError::Io {
        path: path.display().to_string(),
        source,
    })
}
