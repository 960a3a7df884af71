//! Analytic vector fields on complexified phase space.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::ops::{Deref, DerefMut};

use num_complex::Complex64;
use thiserror::Error;

use crate::expr::{parse_expression, EvalError, Expr, Params, ParseError};

/// A point of ℂⁿ.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexVector(pub Vec<Complex64>);

impl ComplexVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Max-norm distance to `other`.
    pub fn distance(&self, other: &ComplexVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Deref for ComplexVector {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for ComplexVector {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

impl From<Vec<Complex64>> for ComplexVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("gamma must exceed 1 for time-scale separation, got {0}")]
    NoSeparation(f64),
    #[error("component {component}: {source}")]
    Parse {
        component: usize,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("expected {expected} components, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("unknown builtin system `{0}`")]
    UnknownSystem(String),
}

#[derive(Debug, Clone)]
enum Rule {
    Linear2d { gamma: f64 },
    DavisSkodje { gamma: f64 },
    Expressions(Vec<Expr>),
}

/// An analytic vector field `F`, continued to complex arguments.
///
/// Values are immutable; [`VectorField::rotated`] returns a new field
/// scaled by a unit complex factor.
#[derive(Debug, Clone)]
pub struct VectorField {
    name: String,
    dim: usize,
    params: Params,
    rule: Rule,
    rotation: Complex64,
}

/// Names of the built-in benchmark systems.
pub const BUILTIN_SYSTEMS: [&str; 2] = ["linear2d", "davis_skodje"];

impl VectorField {
    /// Diagonal linear benchmark `(-x1, -gamma x2)`; slow manifold `x2 = 0`.
    pub fn linear2d(gamma: f64) -> Result<Self, FieldError> {
        check_gamma(gamma)?;
        Ok(Self::new_builtin(
            "linear2d",
            Rule::Linear2d { gamma },
            gamma,
        ))
    }

    /// Davis–Skodje system
    /// `(-x, -gamma y + ((gamma - 1) x + gamma x^2) / (1 + x)^2)`
    /// with slow manifold `y = x / (1 + x)` and a pole at `x = -1`.
    pub fn davis_skodje(gamma: f64) -> Result<Self, FieldError> {
        check_gamma(gamma)?;
        Ok(Self::new_builtin(
            "davis_skodje",
            Rule::DavisSkodje { gamma },
            gamma,
        ))
    }

    /// Look up a builtin by name; `gamma` is read from `params`.
    pub fn builtin(name: &str, params: &Params) -> Result<Self, FieldError> {
        let gamma = *params
            .get("gamma")
            .ok_or_else(|| FieldError::Eval(EvalError::UnboundParameter("gamma".into())))?;
        match name {
            "linear2d" => Self::linear2d(gamma),
            "davis_skodje" => Self::davis_skodje(gamma),
            other => Err(FieldError::UnknownSystem(other.to_string())),
        }
    }

    fn new_builtin(name: &str, rule: Rule, gamma: f64) -> Self {
        Self {
            name: name.to_string(),
            dim: 2,
            params: Params::from([("gamma".to_string(), gamma)]),
            rule,
            rotation: Complex64::new(1.0, 0.0),
        }
    }

    /// Field whose k-th component is the k-th source expression.
    /// Parameters are bound once here.
    pub fn from_expressions<S: AsRef<str>>(
        name: &str,
        sources: &[S],
        params: Params,
    ) -> Result<Self, FieldError> {
        let dim = sources.len();
        if dim == 0 {
            return Err(FieldError::Dimension {
                expected: 1,
                got: 0,
            });
        }
        let exprs = sources
            .iter()
            .enumerate()
            .map(|(component, src)| {
                let ast = parse_expression(src.as_ref(), dim)
                    .map_err(|source| FieldError::Parse { component, source })?;
                Ok(ast.bind(&params)?)
            })
            .collect::<Result<Vec<_>, FieldError>>()?;
        Ok(Self {
            name: name.to_string(),
            dim,
            params,
            rule: Rule::Expressions(exprs),
            rotation: Complex64::new(1.0, 0.0),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn gamma(&self) -> Option<f64> {
        self.params.get("gamma").copied()
    }

    /// Unit factor applied to every evaluation.
    pub fn rotation(&self) -> Complex64 {
        self.rotation
    }

    /// Field evaluating to `e^{i theta} F(z)`.
    ///
    /// Quarter turns use the exact factors `1, i, -1, -i`, so `theta = pi/2`
    /// gives exactly `i F`, the imaginary-time flow.
    pub fn rotated(&self, theta: f64) -> Self {
        let mut out = self.clone();
        out.rotation = self.rotation * unit_phase(theta);
        out
    }

    /// Field scaled by an arbitrary unit factor (used for path segments).
    pub(crate) fn with_direction(&self, direction: Complex64) -> Self {
        let mut out = self.clone();
        out.rotation = self.rotation * direction;
        out
    }

    /// Evaluate `F(z)` into `out`.
    pub fn eval_into(&self, z: &[Complex64], out: &mut [Complex64]) -> Result<(), EvalError> {
        if z.len() != self.dim || out.len() != self.dim {
            return Err(EvalError::Dimension {
                need: self.dim,
                got: z.len(),
            });
        }
        match &self.rule {
            Rule::Linear2d { gamma } => {
                out[0] = -z[0];
                out[1] = -z[1] * *gamma;
            }
            Rule::DavisSkodje { gamma } => {
                let (x, y) = (z[0], z[1]);
                let d = Complex64::new(1.0, 0.0) + x;
                if d.re == 0.0 && d.im == 0.0 {
                    return Err(EvalError::PoleOrBranch {
                        what: "davis_skodje pole at x = -1".into(),
                        span: Default::default(),
                    });
                }
                out[0] = -x;
                out[1] = -y * *gamma + (x * (*gamma - 1.0) + x * x * *gamma) / (d * d);
            }
            Rule::Expressions(exprs) => {
                let empty = Params::new();
                for (slot, e) in out.iter_mut().zip(exprs) {
                    *slot = e.eval(z, &empty)?;
                }
            }
        }
        if self.rotation != Complex64::new(1.0, 0.0) {
            for v in out.iter_mut() {
                *v *= self.rotation;
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: &ComplexVector) -> Result<ComplexVector, EvalError> {
        let mut out = ComplexVector::zeros(self.dim);
        self.eval_into(z, &mut out)?;
        Ok(out)
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n = {})", self.name, self.dim)?;
        for (k, v) in &self.params {
            write!(f, " {k} = {v}")?;
        }
        Ok(())
    }
}

fn check_gamma(gamma: f64) -> Result<(), FieldError> {
    if gamma.is_finite() && gamma > 1.0 {
        Ok(())
    } else {
        Err(FieldError::NoSeparation(gamma))
    }
}

/// `e^{i theta}`, exact at multiples of pi/2.
pub fn unit_phase(theta: f64) -> Complex64 {
    let quarters = theta / FRAC_PI_2;
    let nearest = quarters.round();
    if (quarters - nearest).abs() < 1e-12 {
        match (nearest as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, theta)
    }
}
