//! Ground truth for slow-manifold membership.
//!
//! A candidate manifold is a graph `x_f = h(x_s)` over the slow coordinates.
//! It is invariant when the fast velocity equals the slow velocity pushed
//! through `Dh`, i.e. `R = Dh(x_s) f_s - f_f` vanishes on it.

use num_complex::Complex64;
use thiserror::Error;

use crate::expr::{parse_expression, EvalError, Expr, Params, ParseError};
use crate::field::{ComplexVector, VectorField};
use crate::integrator::IntegratorConfig;
use crate::spectral::{
    classify_sim_membership, imaginary_time_spectrum, suggest_fast_band, SpectralError,
    SpectrumSettings, Verdict, DEFAULT_EPSILON, DEFAULT_POWER_FLOOR,
};

/// Real distance below which a point counts as lying on the benchmark manifold.
pub const TRUTH_CUTOFF: f64 = 1e-12;
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph component {component}: {source}")]
    Parse {
        component: usize,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("no benchmark manifold known for system `{0}`")]
    UnknownSystem(String),
    #[error("point has {got} coordinates, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("point is not finite")]
    NonFinite,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Graph `x_fast = h(x_slow)` over a partition of the coordinates.
///
/// Indices are 0-based. Inside `h`, `x1, x2, ...` name the slow coordinates
/// in the order given by `slow`.
#[derive(Debug, Clone)]
pub struct SimGraph {
    slow: Vec<usize>,
    fast: Vec<usize>,
    h: Vec<Expr>,
}

impl SimGraph {
    pub fn new<S: AsRef<str>>(
        dim: usize,
        slow: Vec<usize>,
        fast: Vec<usize>,
        h: &[S],
        params: &Params,
    ) -> Result<Self, SimError> {
        if slow.is_empty() || fast.is_empty() {
            return Err(SimError::InvalidGraph(
                "slow and fast index sets must be non-empty".into(),
            ));
        }
        let mut seen = vec![false; dim];
        for &k in slow.iter().chain(&fast) {
            if k >= dim {
                return Err(SimError::InvalidGraph(format!(
                    "index {k} out of range for dimension {dim}"
                )));
            }
            if seen[k] {
                return Err(SimError::InvalidGraph(format!("index {k} listed twice")));
            }
            seen[k] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(SimError::InvalidGraph(
                "slow and fast indices must cover every coordinate".into(),
            ));
        }
        if h.len() != fast.len() {
            return Err(SimError::InvalidGraph(format!(
                "{} graph expressions for {} fast coordinates",
                h.len(),
                fast.len()
            )));
        }
        let h = h
            .iter()
            .enumerate()
            .map(|(component, src)| {
                let e = parse_expression(src.as_ref(), slow.len())
                    .map_err(|source| SimError::Parse { component, source })?;
                Ok(e.bind(params)?)
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        Ok(Self { slow, fast, h })
    }

    /// Known manifold of a builtin benchmark.
    pub fn benchmark(name: &str) -> Result<Self, SimError> {
        let h = match name {
            "linear2d" => "0",
            "davis_skodje" => "x1/(1+x1)",
            other => return Err(SimError::UnknownSystem(other.to_string())),
        };
        Self::new(2, vec![0], vec![1], &[h], &Params::new())
    }

    pub fn slow(&self) -> &[usize] {
        &self.slow
    }

    pub fn fast(&self) -> &[usize] {
        &self.fast
    }

    pub fn dim(&self) -> usize {
        self.slow.len() + self.fast.len()
    }

    /// `h(x_s)`.
    pub fn eval(&self, slow_point: &[Complex64]) -> Result<Vec<Complex64>, EvalError> {
        let none = Params::new();
        self.h.iter().map(|e| e.eval(slow_point, &none)).collect()
    }

    /// Full state `(x_s, h(x_s))` in the field's coordinate order.
    pub fn lift(&self, slow_point: &[Complex64]) -> Result<ComplexVector, EvalError> {
        let mut z = ComplexVector::zeros(self.dim());
        for (&k, &v) in self.slow.iter().zip(slow_point) {
            z[k] = v;
        }
        for (&k, v) in self.fast.iter().zip(self.eval(slow_point)?) {
            z[k] = v;
        }
        Ok(z)
    }
}

/// `R = Dh(x_s) f_s - f_f` at `(x_s, h(x_s))`, one entry per fast coordinate.
pub fn invariance_residual(
    field: &VectorField,
    graph: &SimGraph,
    slow_point: &[Complex64],
) -> Result<Vec<Complex64>, SimError> {
    invariance_residual_with_step(field, graph, slow_point, FD_STEP)
}

/// As [`invariance_residual`], with `Dh` column `j` differenced at step
/// `step * max(1, |x_s[j]|)`.
pub fn invariance_residual_with_step(
    field: &VectorField,
    graph: &SimGraph,
    slow_point: &[Complex64],
    step: f64,
) -> Result<Vec<Complex64>, SimError> {
    if graph.dim() != field.dim() {
        return Err(SimError::Dimension {
            expected: field.dim(),
            got: graph.dim(),
        });
    }
    if slow_point.len() != graph.slow.len() {
        return Err(SimError::Dimension {
            expected: graph.slow.len(),
            got: slow_point.len(),
        });
    }
    if slow_point
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(SimError::NonFinite);
    }
    let z = graph.lift(slow_point)?;
    let f = field.eval(&z)?;
    let mut residual: Vec<Complex64> = graph.fast.iter().map(|&k| -f[k]).collect();
    let mut probe = slow_point.to_vec();
    for (j, &k) in graph.slow.iter().enumerate() {
        let h = step * slow_point[j].norm().max(1.0);
        probe[j] = slow_point[j] + h;
        let plus = graph.eval(&probe)?;
        probe[j] = slow_point[j] - h;
        let minus = graph.eval(&probe)?;
        probe[j] = slow_point[j];
        for (r, (p, m)) in residual.iter_mut().zip(plus.iter().zip(&minus)) {
            *r += (p - m) / (2.0 * h) * f[k];
        }
    }
    Ok(residual)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    OnSim,
    OffSim,
}

impl Truth {
    pub fn as_str(self) -> &'static str {
        match self {
            Truth::OnSim => "OnSIM",
            Truth::OffSim => "OffSIM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthReport {
    pub truth: Truth,
    /// Distance from the benchmark manifold along the fast coordinate.
    pub distance: f64,
}

/// Membership of a real point in the known manifold of a builtin benchmark.
pub fn benchmark_truth(name: &str, gamma: f64, point: &[f64]) -> Result<TruthReport, SimError> {
    if !matches!(name, "linear2d" | "davis_skodje") {
        return Err(SimError::UnknownSystem(name.to_string()));
    }
    if point.len() != 2 {
        return Err(SimError::Dimension {
            expected: 2,
            got: point.len(),
        });
    }
    if !gamma.is_finite() || point.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFinite);
    }
    let (x, y) = (point[0], point[1]);
    let distance = match name {
        "linear2d" => y.abs(),
        _ => {
            if x == -1.0 {
                return Err(EvalError::PoleOrBranch {
                    what: "manifold y = x/(1+x) at x = -1".into(),
                    span: Default::default(),
                }
                .into());
            }
            (y - x / (1.0 + x)).abs()
        }
    };
    let truth = if distance < TRUTH_CUTOFF {
        Truth::OnSim
    } else {
        Truth::OffSim
    };
    Ok(TruthReport { truth, distance })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSettings {
    pub spectrum: SpectrumSettings,
    pub integrator: IntegratorConfig,
    /// Fast band; suggested from the Jacobian at `band_point` when `None`.
    pub band: Option<(f64, f64)>,
    pub band_point: Option<ComplexVector>,
    pub slow_dimension: usize,
    pub epsilon: f64,
    pub power_floor: f64,
}

impl Default for ValidationSettings {
    fn default() -> Self {
        Self {
            spectrum: SpectrumSettings::default(),
            integrator: IntegratorConfig::default(),
            band: None,
            band_point: None,
            slow_dimension: 1,
            epsilon: DEFAULT_EPSILON,
            power_floor: DEFAULT_POWER_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub point: Vec<f64>,
    pub truth: Truth,
    pub distance: f64,
    /// `None` when the point could not be classified.
    pub verdict: Option<Verdict>,
    pub rho: Option<f64>,
    pub error: Option<String>,
}

impl PointOutcome {
    /// An `Equilibrium` verdict agrees with on-manifold truth: the
    /// equilibrium lies on the manifold.
    pub fn correct(&self) -> Option<bool> {
        self.verdict.map(|v| {
            matches!(
                (self.truth, v),
                (Truth::OnSim, Verdict::OnSim | Verdict::Equilibrium)
                    | (Truth::OffSim, Verdict::OffSim)
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionTable {
    pub system: String,
    pub gamma: f64,
    pub band: (f64, f64),
    pub epsilon: f64,
    /// `counts[truth][verdict]` with truth rows `OnSIM, OffSIM` and verdict
    /// columns `OnSIM, OffSIM, Equilibrium`.
    pub counts: [[usize; 3]; 2],
    pub unclassified: usize,
    pub correct: usize,
    pub incorrect: usize,
    pub total: usize,
    pub points: Vec<PointOutcome>,
}

fn classify_point(
    field: &VectorField,
    point: &[f64],
    truth: TruthReport,
    band: (f64, f64),
    settings: &ValidationSettings,
) -> PointOutcome {
    let result = imaginary_time_spectrum(
        field,
        &ComplexVector::from_real(point),
        &settings.spectrum,
        &settings.integrator,
    )
    .and_then(|s| classify_sim_membership(&s, band, settings.epsilon, settings.power_floor));
    let (verdict, rho, error) = match result {
        Ok(report) => (Some(report.verdict), Some(report.rho), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    PointOutcome {
        point: point.to_vec(),
        truth: truth.truth,
        distance: truth.distance,
        verdict,
        rho,
        error,
    }
}

/// Classify each initial value spectrally and compare with benchmark truth.
///
/// Integration failures become unclassified rows; the table keeps the input
/// order.
pub fn classifier_validation(
    field: &VectorField,
    points: &[Vec<f64>],
    settings: &ValidationSettings,
) -> Result<ConfusionTable, SimError> {
    let gamma = field
        .gamma()
        .ok_or_else(|| SimError::UnknownSystem(field.name().to_string()))?;
    let truths = points
        .iter()
        .map(|p| benchmark_truth(field.name(), gamma, p))
        .collect::<Result<Vec<_>, _>>()?;
    settings.spectrum.validate()?;
    let band = match settings.band {
        Some(b) => b,
        None => {
            let at = settings
                .band_point
                .clone()
                .unwrap_or_else(|| ComplexVector::zeros(field.dim()));
            suggest_fast_band(field, &at, settings.slow_dimension)?
        }
    };

    let work = |(p, t): (&Vec<f64>, &TruthReport)| classify_point(field, p, *t, band, settings);
    #[cfg(feature = "parallel")]
    let outcomes: Vec<PointOutcome> = {
        use rayon::prelude::*;
        points.par_iter().zip(truths.par_iter()).map(work).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<PointOutcome> = points.iter().zip(truths.iter()).map(work).collect();

    let mut table = ConfusionTable {
        system: field.name().to_string(),
        gamma,
        band,
        epsilon: settings.epsilon,
        counts: [[0; 3]; 2],
        unclassified: 0,
        correct: 0,
        incorrect: 0,
        total: outcomes.len(),
        points: vec![],
    };
    for o in &outcomes {
        let row = match o.truth {
            Truth::OnSim => 0,
            Truth::OffSim => 1,
        };
        match o.verdict {
            None => table.unclassified += 1,
            Some(v) => {
                let col = match v {
                    Verdict::OnSim => 0,
                    Verdict::OffSim => 1,
                    Verdict::Equilibrium => 2,
                };
                table.counts[row][col] += 1;
                if o.correct() == Some(true) {
                    table.correct += 1;
                } else {
                    table.incorrect += 1;
                }
            }
        }
    }
    table.points = outcomes;
    Ok(table)
}
