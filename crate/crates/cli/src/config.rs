//! Run configuration, read from a single JSON file.

use std::collections::BTreeMap;
use std::path::PathBuf;

use holoflow_core::sim::SimGraph;
use holoflow_core::svg::{Axis, Projection};
use holoflow_core::{
    Complex64, ComplexVector, IntegratorConfig, Rect, SpectrumSettings, TimePath, VectorField,
    Window,
};
use serde::Deserialize;

use crate::CliError;

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex([f64; 2]),
}

impl Scalar {
    pub fn value(self) -> Complex64 {
        match self {
            Scalar::Real(x) => Complex64::new(x, 0.0),
            Scalar::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    pub fn real(self) -> Option<f64> {
        match self {
            Scalar::Real(x) => Some(x),
            Scalar::Complex([re, 0.0]) => Some(re),
            Scalar::Complex(_) => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub builtin: Option<String>,
    pub expressions: Option<Vec<String>>,
    pub dimension: Option<usize>,
    pub name: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorBlock {
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_step_fraction: Option<f64>,
    pub blowup_threshold: Option<f64>,
    pub min_step_fraction: Option<f64>,
    pub dense_samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceBlock {
    pub sigma: [f64; 2],
    pub tau: [f64; 2],
    pub n_sigma: usize,
    pub n_tau: usize,
    pub axes: Option<[String; 3]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    pub sigma_anchor: Option<f64>,
    pub tau_span: Option<f64>,
    pub n: Option<usize>,
    pub window: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyBlock {
    pub band: Option<[f64; 2]>,
    pub band_point: Option<Vec<Scalar>>,
    pub slow_dimension: Option<usize>,
    pub epsilon: Option<f64>,
    pub power_floor: Option<f64>,
}

/// Candidate manifold `x_fast = h(x_slow)`; indices are 1-based like `x1`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphBlock {
    pub slow: Vec<usize>,
    pub fast: Vec<usize>,
    pub h: Vec<String>,
    pub points: Vec<Vec<Scalar>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub initial_values: Vec<Vec<Scalar>>,
    #[serde(default)]
    pub integrator: IntegratorBlock,
    pub path: Option<Vec<Scalar>>,
    pub surface: Option<SurfaceBlock>,
    #[serde(default)]
    pub spectrum: SpectrumBlock,
    #[serde(default)]
    pub classify: ClassifyBlock,
    pub graph: Option<GraphBlock>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("missing key `{key}`"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn field(&self) -> Result<VectorField, CliError> {
        let s = &self.system;
        let field = match (&s.builtin, &s.expressions) {
            (Some(name), None) => {
                if s.dimension.is_some_and(|d| d != 2) {
                    return Err(bad(format!("builtin `{name}` is 2-dimensional")));
                }
                VectorField::builtin(name, &s.params)
            }
            (None, Some(exprs)) => {
                if let Some(d) = s.dimension {
                    if d != exprs.len() {
                        return Err(bad(format!(
                            "system.dimension is {d} but {} expressions were given",
                            exprs.len()
                        )));
                    }
                }
                let name = s.name.clone().unwrap_or_else(|| "expressions".into());
                VectorField::from_expressions(&name, exprs, s.params.clone())
            }
            (Some(_), Some(_)) => {
                return Err(bad(
                    "system: give either `builtin` or `expressions`, not both",
                ))
            }
            (None, None) => return Err(bad("system: missing key `builtin` or `expressions`")),
        };
        field.map_err(|e| bad(format!("system: {e}")))
    }

    pub fn initial_values(&self, dim: usize) -> Result<Vec<ComplexVector>, CliError> {
        if self.initial_values.is_empty() {
            return Err(bad("initial_values is empty"));
        }
        self.initial_values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                if v.len() != dim {
                    return Err(bad(format!(
                        "initial_values[{k}] has {} components, system has {dim}",
                        v.len()
                    )));
                }
                Ok(ComplexVector(v.iter().map(|s| s.value()).collect()))
            })
            .collect()
    }

    /// Initial values as real points, when all of them are real.
    pub fn real_initial_values(&self) -> Option<Vec<Vec<f64>>> {
        self.initial_values
            .iter()
            .map(|v| v.iter().map(|s| s.real()).collect())
            .collect()
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        let b = &self.integrator;
        let d = IntegratorConfig::default();
        let cfg = IntegratorConfig {
            rtol: b.rtol.unwrap_or(d.rtol),
            atol: b.atol.unwrap_or(d.atol),
            max_step_fraction: b.max_step_fraction.unwrap_or(d.max_step_fraction),
            blowup_threshold: b.blowup_threshold.unwrap_or(d.blowup_threshold),
            min_step_fraction: b.min_step_fraction.unwrap_or(d.min_step_fraction),
            dense_samples: b.dense_samples.unwrap_or(d.dense_samples),
        };
        cfg.validate()
            .map_err(|e| bad(format!("integrator: {e}")))?;
        Ok(cfg)
    }

    pub fn path(&self) -> Result<TimePath, CliError> {
        let points = self.path.as_ref().ok_or_else(|| missing("path"))?;
        TimePath::new(points.iter().map(|s| s.value()).collect())
            .map_err(|e| bad(format!("path: {e}")))
    }

    pub fn surface(&self, dim: usize) -> Result<(Rect, usize, usize, Projection), CliError> {
        let b = self.surface.as_ref().ok_or_else(|| missing("surface"))?;
        let projection = match &b.axes {
            None => Projection::default(),
            Some(names) => {
                let mut axes = [Axis::re(0); 3];
                for (slot, name) in axes.iter_mut().zip(names) {
                    *slot = name
                        .parse()
                        .map_err(|e| bad(format!("surface.axes: {e}")))?;
                }
                Projection::new(axes)
            }
        };
        projection
            .validate(dim)
            .map_err(|e| bad(format!("surface.axes: {e}")))?;
        let rect = Rect::new((b.sigma[0], b.sigma[1]), (b.tau[0], b.tau[1]));
        Ok((rect, b.n_sigma, b.n_tau, projection))
    }

    pub fn spectrum(&self) -> Result<SpectrumSettings, CliError> {
        let b = &self.spectrum;
        let d = SpectrumSettings::default();
        let window = match &b.window {
            None => d.window,
            Some(name) => Window::from_name(name)
                .ok_or_else(|| bad(format!("spectrum.window: unknown window `{name}`")))?,
        };
        let settings = SpectrumSettings {
            sigma_anchor: b.sigma_anchor.unwrap_or(d.sigma_anchor),
            tau_span: b.tau_span.unwrap_or(d.tau_span),
            n: b.n.unwrap_or(d.n),
            window,
        };
        settings
            .validate()
            .map_err(|e| bad(format!("spectrum: {e}")))?;
        Ok(settings)
    }

    pub fn band_point(&self, dim: usize) -> Result<ComplexVector, CliError> {
        match &self.classify.band_point {
            None => Ok(ComplexVector::zeros(dim)),
            Some(p) if p.len() == dim => Ok(ComplexVector(p.iter().map(|s| s.value()).collect())),
            Some(p) => Err(bad(format!(
                "classify.band_point has {} components, system has {dim}",
                p.len()
            ))),
        }
    }

    pub fn graph(&self, field: &VectorField) -> Result<(SimGraph, Vec<Vec<Complex64>>), CliError> {
        let g = self.graph.as_ref().ok_or_else(|| missing("graph"))?;
        let zero_based = |v: &[usize], key: &str| -> Result<Vec<usize>, CliError> {
            v.iter()
                .map(|&k| {
                    k.checked_sub(1)
                        .ok_or_else(|| bad(format!("graph.{key}: indices start at 1")))
                })
                .collect()
        };
        let graph = SimGraph::new(
            field.dim(),
            zero_based(&g.slow, "slow")?,
            zero_based(&g.fast, "fast")?,
            &g.h,
            field.params(),
        )
        .map_err(|e| bad(format!("graph: {e}")))?;
        if g.points.is_empty() {
            return Err(bad("graph.points is empty"));
        }
        let points = g
            .points
            .iter()
            .enumerate()
            .map(|(k, p)| {
                if p.len() != g.slow.len() {
                    return Err(bad(format!(
                        "graph.points[{k}] has {} components, graph has {} slow coordinates",
                        p.len(),
                        g.slow.len()
                    )));
                }
                Ok(p.iter().map(|s| s.value()).collect())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((graph, points))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, CliError> {
        RunConfig::parse(text)
    }

    #[test]
    fn minimal_builtin() {
        let cfg = parse(r#"{"system": {"builtin": "linear2d", "params": {"gamma": 5}}, "initial_values": [[1, [1, 0.5]]]}"#)
            .unwrap();
        let f = cfg.field().unwrap();
        assert_eq!(f.dim(), 2);
        let z = cfg.initial_values(2).unwrap();
        assert_eq!(z[0][1], Complex64::new(1.0, 0.5));
        assert_eq!(cfg.real_initial_values(), None);
    }

    #[test]
    fn missing_system_is_named() {
        let err = parse(r#"{"initial_values": [[1, 1]]}"#).unwrap_err();
        assert!(err.to_string().contains("missing field `system`"), "{err}");
    }

    #[test]
    fn system_source_exclusive() {
        let both = parse(r#"{"system": {"builtin": "linear2d", "expressions": ["-x1"]}}"#).unwrap();
        assert!(both.field().is_err());
        let neither = parse(r#"{"system": {"params": {}}}"#).unwrap();
        assert!(neither.field().unwrap_err().to_string().contains("builtin"));
        let dim = parse(r#"{"system": {"expressions": ["-x1"], "dimension": 2}}"#).unwrap();
        assert!(dim.field().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse(r#"{"system": {"builtin": "linear2d"}, "colour": 1}"#).unwrap_err();
        assert!(err.to_string().contains("colour"));
    }

    #[test]
    fn dimension_checks() {
        let cfg = parse(r#"{"system": {"builtin": "linear2d", "params": {"gamma": 5}}, "initial_values": [[1]]}"#).unwrap();
        assert!(cfg.initial_values(2).is_err());
        let cfg = parse(
            r#"{"system": {"builtin": "linear2d", "params": {"gamma": 5}},
                "surface": {"sigma": [0, 1], "tau": [0, 1], "n_sigma": 3, "n_tau": 3, "axes": ["re1", "im3", "re2"]}}"#,
        )
        .unwrap();
        assert!(cfg.surface(2).is_err());
        assert!(cfg.path().unwrap_err().to_string().contains("`path`"));
    }
}
