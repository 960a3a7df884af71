//! Riemann-surface sampling: the image of a complex-time rectangle under the
//! flow from one initial value.
//!
//! Nodes are reached by L-paths: along the real axis from `0` to `sigma_j`,
//! then along the imaginary direction to `sigma_j + i tau_i`. Each column is
//! an independent pair of imaginary legs (one for `tau > 0`, one for
//! `tau < 0`), so a singularity only poisons nodes further along its leg.

use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

use crate::field::{ComplexVector, VectorField};
use crate::integrator::{integrate_segment, IntegratorConfig, Status};

/// Tag recorded in every mesh produced by [`sample_surface`].
pub const L_PATH_CONVENTION: &str = "L-path: real axis 0 -> sigma, then imaginary axis 0 -> tau";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("invalid surface request: {0}")]
    Invalid(String),
    #[error("mesh needs at least 3 nodes per axis, got {0} x {1}")]
    TooSmall(usize, usize),
    #[error("no interior node has a complete five-point stencil ({skipped} skipped)")]
    NoValidInterior { skipped: usize },
}

/// Rectangle `[sigma.0, sigma.1] x [tau.0, tau.1]` in complex time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub sigma: (f64, f64),
    pub tau: (f64, f64),
}

impl Rect {
    pub fn new(sigma: (f64, f64), tau: (f64, f64)) -> Self {
        Self { sigma, tau }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Value(ComplexVector),
    Failed(String),
}

impl Node {
    pub fn value(&self) -> Option<&ComplexVector> {
        match self {
            Node::Value(z) => Some(z),
            Node::Failed(_) => None,
        }
    }

    pub fn is_failed(&self) -> bool {
        matches!(self, Node::Failed(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub sigmas: Vec<f64>,
    pub taus: Vec<f64>,
    /// `nodes[j][i]` is the value at `sigmas[j] + i taus[i]`.
    pub nodes: Vec<Vec<Node>>,
    /// Real-time trajectory at each `sigmas[j]` (the `tau = 0` anchors).
    pub real_row: Vec<Node>,
    pub convention: &'static str,
    pub dim: usize,
}

impl SurfaceMesh {
    pub fn node(&self, j: usize, i: usize) -> &Node {
        &self.nodes[j][i]
    }

    pub fn failure_count(&self) -> usize {
        self.nodes
            .iter()
            .flatten()
            .filter(|n| n.is_failed())
            .count()
    }

    pub fn failure_fraction(&self) -> f64 {
        let total = self.sigmas.len() * self.taus.len();
        self.failure_count() as f64 / total as f64
    }

    /// Index of the `tau = 0` row, when the grid contains it.
    pub fn zero_tau_row(&self) -> Option<usize> {
        self.taus.iter().position(|&t| t == 0.0)
    }

    /// Sum over columns of the Euclidean length of each `tau` polyline.
    pub fn tau_total_variation(&self) -> f64 {
        let mut total = 0.0;
        for column in &self.nodes {
            for pair in column.windows(2) {
                if let (Some(a), Some(b)) = (pair[0].value(), pair[1].value()) {
                    total += a
                        .iter()
                        .zip(b.iter())
                        .map(|(p, q)| (p - q).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                }
            }
        }
        total
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k + 1 == n { hi } else { lo + step * k as f64 })
        .collect()
}

/// Integrate from `start` along a straight leg of `length` in direction
/// `theta` and return one node per offset (all in `[0, length]`).
fn leg(
    field: &VectorField,
    start: &ComplexVector,
    theta: f64,
    length: f64,
    offsets: &[f64],
    cfg: &IntegratorConfig,
) -> Vec<Node> {
    if offsets.is_empty() {
        return vec![];
    }
    // offsets are ascending in magnitude; zero offsets map to the start value
    let positive: Vec<f64> = offsets
        .iter()
        .filter(|&&o| o > 0.0)
        .map(|&o| o / length)
        .collect();
    let mut out: Vec<Node> = offsets
        .iter()
        .take_while(|&&o| o == 0.0)
        .map(|_| Node::Value(start.clone()))
        .collect();
    if positive.is_empty() {
        return out;
    }
    let run = integrate_segment(&field.rotated(theta), start, length, &positive, cfg);
    let reached = run.samples.len();
    out.extend(run.samples.into_iter().map(|(_, z, _)| Node::Value(z)));
    if reached < positive.len() {
        let reason = match &run.failure {
            Some((Status::StepUnderflow, frac, r)) => {
                format!("step underflow at offset {}: {r}", frac * length)
            }
            Some((_, frac, r)) => format!("singularity at offset {}: {r}", frac * length),
            None => "leg ended early".to_string(),
        };
        out.extend((reached..positive.len()).map(|_| Node::Failed(reason.clone())));
    }
    out
}

/// Nodes along one axis from the origin, for grid values on both sides.
///
/// Returns nodes in grid order. `theta_pos` is the direction for positive
/// grid values.
fn two_sided_leg(
    field: &VectorField,
    start: &ComplexVector,
    theta_pos: f64,
    values: &[f64],
    cfg: &IntegratorConfig,
) -> Vec<Node> {
    let mut nodes: Vec<Option<Node>> = vec![None; values.len()];

    let pos_idx: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= 0.0).collect();
    if let Some(&last) = pos_idx.last() {
        let length = values[last];
        let offsets: Vec<f64> = pos_idx.iter().map(|&i| values[i]).collect();
        let leg_len = if length > 0.0 { length } else { 1.0 };
        for (i, node) in pos_idx
            .iter()
            .zip(leg(field, start, theta_pos, leg_len, &offsets, cfg))
        {
            nodes[*i] = Some(node);
        }
    }
    let mut neg_idx: Vec<usize> = (0..values.len()).filter(|&i| values[i] < 0.0).collect();
    neg_idx.reverse();
    if let Some(&last) = neg_idx.last() {
        let length = -values[last];
        let offsets: Vec<f64> = neg_idx.iter().map(|&i| -values[i]).collect();
        for (i, node) in
            neg_idx
                .iter()
                .zip(leg(field, start, theta_pos + PI, length, &offsets, cfg))
        {
            nodes[*i] = Some(node);
        }
    }
    nodes
        .into_iter()
        .map(|n| n.expect("every grid value is on one leg"))
        .collect()
}

/// Sample the continued solution through `z0` on an `n_sigma x n_tau` grid.
///
/// Per-node failures (singularities, step underflow) are recorded in the
/// mesh; only malformed requests are errors.
pub fn sample_surface(
    field: &VectorField,
    z0: &ComplexVector,
    rect: Rect,
    n_sigma: usize,
    n_tau: usize,
    cfg: &IntegratorConfig,
) -> Result<SurfaceMesh, SurfaceError> {
    let (s0, s1) = rect.sigma;
    let (t0, t1) = rect.tau;
    if n_sigma < 2 || n_tau < 2 {
        return Err(SurfaceError::Invalid(format!(
            "grid {n_sigma} x {n_tau} needs at least 2 x 2"
        )));
    }
    if ![s0, s1, t0, t1].iter().all(|v| v.is_finite()) || s0 >= s1 || t0 >= t1 {
        return Err(SurfaceError::Invalid(format!(
            "rectangle [{s0}, {s1}] x [{t0}, {t1}] is not strictly increasing"
        )));
    }
    if !(s0 <= 0.0 && 0.0 <= s1) {
        return Err(SurfaceError::Invalid(format!(
            "sigma range [{s0}, {s1}] must contain the initial time 0"
        )));
    }
    if z0.dim() != field.dim() || !z0.is_finite() {
        return Err(SurfaceError::Invalid(
            "initial value has wrong dimension or is not finite".into(),
        ));
    }
    cfg.validate()
        .map_err(|e| SurfaceError::Invalid(e.to_string()))?;

    let sigmas = grid(s0, s1, n_sigma);
    let taus = grid(t0, t1, n_tau);
    let real_row = two_sided_leg(field, z0, 0.0, &sigmas, cfg);

    let column = |anchor: &Node| -> Vec<Node> {
        match anchor {
            Node::Value(a) => two_sided_leg(field, a, FRAC_PI_2, &taus, cfg),
            Node::Failed(reason) => {
                vec![Node::Failed(format!("real-axis leg: {reason}")); taus.len()]
            }
        }
    };

    #[cfg(feature = "parallel")]
    let nodes: Vec<Vec<Node>> = {
        use rayon::prelude::*;
        real_row.par_iter().map(column).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let nodes: Vec<Vec<Node>> = real_row.iter().map(column).collect();

    Ok(SurfaceMesh {
        sigmas,
        taus,
        nodes,
        real_row,
        convention: L_PATH_CONVENTION,
        dim: field.dim(),
    })
}

/// Holomorphy check on a sampled mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyRiemannResidual {
    pub max: f64,
    /// `grid[j][i]` for interior nodes with a full stencil; `None` elsewhere.
    pub grid: Vec<Vec<Option<f64>>>,
    pub evaluated: usize,
    pub skipped: usize,
}

/// `max_k |dz_k/dtau - i dz_k/dsigma|` by central differences on every
/// interior node whose five-point stencil is complete.
#[allow(clippy::needless_range_loop)]
pub fn cauchy_riemann_residual(mesh: &SurfaceMesh) -> Result<CauchyRiemannResidual, SurfaceError> {
    let ns = mesh.sigmas.len();
    let nt = mesh.taus.len();
    if ns < 3 || nt < 3 {
        return Err(SurfaceError::TooSmall(ns, nt));
    }
    let i_unit = num_complex::Complex64::new(0.0, 1.0);
    let mut grid = vec![vec![None; nt]; ns];
    let mut max: f64 = 0.0;
    let mut evaluated = 0;
    let mut skipped = 0;
    for j in 1..ns - 1 {
        for i in 1..nt - 1 {
            let stencil = (
                mesh.nodes[j][i].value(),
                mesh.nodes[j - 1][i].value(),
                mesh.nodes[j + 1][i].value(),
                mesh.nodes[j][i - 1].value(),
                mesh.nodes[j][i + 1].value(),
            );
            let (Some(_), Some(west), Some(east), Some(south), Some(north)) = stencil else {
                skipped += 1;
                continue;
            };
            let ds = mesh.sigmas[j + 1] - mesh.sigmas[j - 1];
            let dt = mesh.taus[i + 1] - mesh.taus[i - 1];
            let r = (0..mesh.dim)
                .map(|k| {
                    let d_sigma = (east[k] - west[k]) / ds;
                    let d_tau = (north[k] - south[k]) / dt;
                    (d_tau - i_unit * d_sigma).norm()
                })
                .fold(0.0, f64::max);
            grid[j][i] = Some(r);
            max = max.max(r);
            evaluated += 1;
        }
    }
    if evaluated == 0 {
        return Err(SurfaceError::NoValidInterior { skipped });
    }
    Ok(CauchyRiemannResidual {
        max,
        grid,
        evaluated,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Params;
    use crate::integrator::{integrate_path, TimePath};
    use num_complex::Complex64;

    fn lin() -> VectorField {
        VectorField::linear2d(5.0).unwrap()
    }

    #[test]
    fn zero_field_mesh_is_constant() {
        let f = VectorField::from_expressions("zero", &["0", "0"], Params::new()).unwrap();
        let z0 = ComplexVector::from_real(&[0.4, -1.0]);
        let mesh = sample_surface(
            &f,
            &z0,
            Rect::new((-1.0, 1.0), (-1.0, 1.0)),
            5,
            4,
            &Default::default(),
        )
        .unwrap();
        for node in mesh.nodes.iter().flatten() {
            assert_eq!(node.value(), Some(&z0));
        }
        assert_eq!(mesh.failure_fraction(), 0.0);
        let cr = cauchy_riemann_residual(&mesh).unwrap();
        assert_eq!(cr.max, 0.0);
    }

    #[test]
    fn linear_mesh_matches_exponentials() {
        let z0 = ComplexVector::from_real(&[1.0, 1.0]);
        let mesh = sample_surface(
            &lin(),
            &z0,
            Rect::new((-0.5, 1.0), (-2.0, 3.0)),
            7,
            11,
            &Default::default(),
        )
        .unwrap();
        for (j, &s) in mesh.sigmas.iter().enumerate() {
            for (i, &t) in mesh.taus.iter().enumerate() {
                let tc = Complex64::new(s, t);
                let z = mesh.node(j, i).value().unwrap();
                assert!((z[0] - (-tc).exp()).norm() < 1e-8, "({s},{t})");
                assert!((z[1] - (-5.0 * tc).exp()).norm() < 1e-8, "({s},{t})");
            }
        }
        assert_eq!(mesh.convention, L_PATH_CONVENTION);
    }

    #[test]
    fn real_row_matches_direct_integration() {
        let z0 = ComplexVector::from_real(&[1.0, 1.0]);
        let mesh = sample_surface(
            &lin(),
            &z0,
            Rect::new((0.0, 2.0), (-1.0, 1.0)),
            9,
            3,
            &Default::default(),
        )
        .unwrap();
        let row = mesh.zero_tau_row().unwrap();
        for (j, &s) in mesh.sigmas.iter().enumerate().skip(1) {
            let path = TimePath::segment(Complex64::new(0.0, 0.0), Complex64::new(s, 0.0)).unwrap();
            let traj = integrate_path(&lin(), &z0, &path, &Default::default()).unwrap();
            let direct = &traj.last().z;
            assert!(mesh.node(j, row).value().unwrap().distance(direct) < 1e-9);
            assert!(mesh.real_row[j].value().unwrap().distance(direct) < 1e-9);
        }
    }

    #[test]
    fn pole_poisons_downstream_nodes_only() {
        let ds = VectorField::davis_skodje(10.0).unwrap();
        let z0 = ComplexVector::from_real(&[1.0, 0.5]);
        // tau grid step 0.25 * pi: node 4 sits exactly on the pole crossing
        let mesh = sample_surface(
            &ds,
            &z0,
            Rect::new((0.0, 1.0), (0.0, 2.0 * PI)),
            3,
            9,
            &Default::default(),
        )
        .unwrap();
        let col = &mesh.nodes[0];
        for (i, node) in col.iter().enumerate() {
            assert_eq!(
                node.is_failed(),
                mesh.taus[i] >= PI - 1e-12,
                "tau = {}",
                mesh.taus[i]
            );
        }
        // columns with sigma > 0 stay clear of x = -1
        assert!(mesh.nodes[1]
            .iter()
            .chain(&mesh.nodes[2])
            .all(|n| !n.is_failed()));
        assert!(mesh.failure_fraction() > 0.0);
        let cr = cauchy_riemann_residual(&mesh).unwrap();
        assert_eq!(cr.evaluated + cr.skipped, 7);
    }

    #[test]
    fn cr_residual_second_order() {
        let z0 = ComplexVector::from_real(&[1.0, 1.0]);
        let rect = Rect::new((0.0, 1.0), (-1.0, 1.0));
        let coarse = sample_surface(&lin(), &z0, rect, 41, 41, &Default::default()).unwrap();
        let fine = sample_surface(&lin(), &z0, rect, 81, 81, &Default::default()).unwrap();
        let a = cauchy_riemann_residual(&coarse).unwrap().max;
        let b = cauchy_riemann_residual(&fine).unwrap().max;
        assert!(a / b >= 3.5, "{a} / {b}");
    }

    #[test]
    fn invalid_requests() {
        let z0 = ComplexVector::from_real(&[1.0, 1.0]);
        let cfg = IntegratorConfig::default();
        assert!(
            sample_surface(&lin(), &z0, Rect::new((0.5, 1.0), (0.0, 1.0)), 3, 3, &cfg).is_err()
        );
        assert!(
            sample_surface(&lin(), &z0, Rect::new((0.0, 1.0), (1.0, 0.0)), 3, 3, &cfg).is_err()
        );
        assert!(
            sample_surface(&lin(), &z0, Rect::new((0.0, 1.0), (0.0, 1.0)), 1, 3, &cfg).is_err()
        );
        let small =
            sample_surface(&lin(), &z0, Rect::new((0.0, 1.0), (0.0, 1.0)), 2, 5, &cfg).unwrap();
        assert_eq!(
            cauchy_riemann_residual(&small),
            Err(SurfaceError::TooSmall(2, 5))
        );
    }

    #[test]
    fn deterministic() {
        let z0 = ComplexVector::from_real(&[1.0, 1.0]);
        let rect = Rect::new((-0.3, 0.7), (-1.0, 2.0));
        let a = sample_surface(&lin(), &z0, rect, 13, 17, &Default::default()).unwrap();
        let b = sample_surface(&lin(), &z0, rect, 13, 17, &Default::default()).unwrap();
        assert_eq!(a, b);
    }
}
