//! Dormand–Prince 5(4) integration of `dz/dt = F(z)` along polylines in the
//! complex time plane.
//!
//! Each segment `t_a -> t_b` is integrated in its real arc length `s`, with
//! `dw/ds = d F(w)` where `d = (t_b - t_a) / |t_b - t_a|`. The state is
//! complex throughout.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::field::{ComplexVector, VectorField};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("invalid time path: {0}")]
    InvalidPath(String),
    #[error("invalid integrator config: {0}")]
    InvalidConfig(String),
    #[error("invalid initial value: {0}")]
    InvalidInitial(String),
    #[error("singularity encountered near t = {t}: {reason}")]
    SingularityEncountered { t: Complex64, reason: String },
    #[error("step size underflow at t = {t} (step {step:e})")]
    StepSizeUnderflow { t: Complex64, step: f64 },
    #[error("{leg} leg: {source}")]
    Leg {
        leg: String,
        #[source]
        source: Box<IntegrateError>,
    },
}

/// Ordered waypoints in the complex time plane.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePath {
    waypoints: Vec<Complex64>,
}

impl TimePath {
    pub fn new(waypoints: Vec<Complex64>) -> Result<Self, IntegrateError> {
        if waypoints.len() < 2 {
            return Err(IntegrateError::InvalidPath(
                "need at least two waypoints".into(),
            ));
        }
        for (i, w) in waypoints.iter().enumerate() {
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(IntegrateError::InvalidPath(format!(
                    "waypoint {i} is not finite"
                )));
            }
        }
        if let Some(i) = waypoints.windows(2).position(|w| w[0] == w[1]) {
            return Err(IntegrateError::InvalidPath(format!(
                "waypoints {i} and {} coincide",
                i + 1
            )));
        }
        Ok(Self { waypoints })
    }

    /// Straight segment from `a` to `b`.
    pub fn segment(a: Complex64, b: Complex64) -> Result<Self, IntegrateError> {
        Self::new(vec![a, b])
    }

    pub fn waypoints(&self) -> &[Complex64] {
        &self.waypoints
    }

    pub fn start(&self) -> Complex64 {
        self.waypoints[0]
    }

    pub fn end(&self) -> Complex64 {
        *self.waypoints.last().unwrap()
    }

    pub fn segments(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        self.waypoints.windows(2).map(|w| (w[0], w[1]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step as a fraction of the segment length.
    pub max_step_fraction: f64,
    /// Any `|z_k|` above this declares a singularity.
    pub blowup_threshold: f64,
    /// Smallest step as a fraction of the segment length.
    pub min_step_fraction: f64,
    /// Dense-output samples per segment, evenly spaced, ending at the waypoint.
    pub dense_samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step_fraction: 0.1,
            blowup_threshold: 1e12,
            min_step_fraction: 1e-14,
            dense_samples: 64,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegrateError> {
        let positive = [
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("max_step_fraction", self.max_step_fraction),
            ("blowup_threshold", self.blowup_threshold),
            ("min_step_fraction", self.min_step_fraction),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(IntegrateError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.rtol < 10.0 * f64::EPSILON {
            return Err(IntegrateError::InvalidConfig(format!(
                "rtol {} is below 10 machine epsilons",
                self.rtol
            )));
        }
        if self.min_step_fraction >= self.max_step_fraction {
            return Err(IntegrateError::InvalidConfig(
                "min_step_fraction must be below max_step_fraction".into(),
            ));
        }
        if self.dense_samples == 0 {
            return Err(IntegrateError::InvalidConfig(
                "dense_samples must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Completed,
    Singularity,
    StepUnderflow,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Completed => "completed",
            Status::Singularity => "singularity",
            Status::StepUnderflow => "step-underflow",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: Complex64,
    pub z: ComplexVector,
    /// Max-component local error estimate of the step that produced the sample.
    pub err_est: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Weighted error norm of every accepted step, in order.
    pub step_errors: Vec<f64>,
    pub status: Status,
    pub failure: Option<IntegrateError>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory always holds its initial sample")
    }

    pub fn is_completed(&self) -> bool {
        self.status == Status::Completed
    }

    /// Endpoint, or the failure that stopped the integration.
    pub fn endpoint(&self) -> Result<&ComplexVector, IntegrateError> {
        match &self.failure {
            None => Ok(&self.last().z),
            Some(e) => Err(e.clone()),
        }
    }
}

/// Result of one straight segment.
#[derive(Debug, Clone)]
pub(crate) struct SegmentRun {
    /// `(fraction, state, err_est)` for each requested fraction reached.
    pub samples: Vec<(f64, ComplexVector, f64)>,
    pub step_errors: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    /// Failure kind and the arc-length fraction last reached.
    pub failure: Option<(Status, f64, String)>,
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights equal the last row of A (FSAL); E = b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Continuous extension (Hairer's contd5 coefficients).
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

const SAFETY: f64 = 0.9;
const GROWTH_MIN: f64 = 0.2;
const GROWTH_MAX: f64 = 5.0;
const PI_BETA: f64 = 0.04;
const PI_ALPHA: f64 = 0.2 - 0.75 * PI_BETA;

fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}

fn is_finite(v: &[Complex64]) -> bool {
    v.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Integrate `dw/ds = field(w)` for `s` in `[0, length]` and report the state
/// at each requested fraction of `length` (ascending, in `(0, 1]`).
///
/// `field` must already carry the segment direction.
pub(crate) fn integrate_segment(
    field: &VectorField,
    z0: &[Complex64],
    length: f64,
    fractions: &[f64],
    cfg: &IntegratorConfig,
) -> SegmentRun {
    let n = z0.len();
    let h_max = cfg.max_step_fraction * length;
    let h_min = cfg.min_step_fraction * length;
    let mut run = SegmentRun {
        samples: Vec::with_capacity(fractions.len()),
        step_errors: Vec::new(),
        accepted: 0,
        rejected: 0,
        failure: None,
    };
    let fail = |run: &mut SegmentRun, status: Status, s: f64, reason: String| {
        run.failure = Some((status, s / length, reason));
    };

    let mut y = z0.to_vec();
    let mut k: [Vec<Complex64>; 7] = std::array::from_fn(|_| zeros(n));
    if let Err(e) = field.eval_into(&y, &mut k[0]) {
        fail(&mut run, Status::Singularity, 0.0, e.to_string());
        return run;
    }
    let mut s = 0.0;
    let mut next_out = 0;

    // Initial step (Hairer & Wanner, II.4).
    let mut h = {
        let sk: Vec<f64> = y.iter().map(|v| cfg.atol + cfg.rtol * v.norm()).collect();
        let d0 = y
            .iter()
            .zip(&sk)
            .map(|(v, s)| v.norm() / s)
            .fold(0.0, f64::max);
        let d1 = k[0]
            .iter()
            .zip(&sk)
            .map(|(v, s)| v.norm() / s)
            .fold(0.0, f64::max);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6 * length
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(h_max);
        let y1: Vec<Complex64> = y.iter().zip(&k[0]).map(|(a, f)| a + f * h0).collect();
        let mut f1 = zeros(n);
        let d2 = match field.eval_into(&y1, &mut f1) {
            Ok(()) => {
                f1.iter()
                    .zip(&k[0])
                    .zip(&sk)
                    .map(|((a, b), s)| (a - b).norm() / s)
                    .fold(0.0, f64::max)
                    / h0
            }
            Err(_) => f64::INFINITY,
        };
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * length)
        } else {
            (0.01 / dmax).powf(0.2)
        };
        (100.0 * h0).min(h1).min(h_max).max(h_min)
    };

    let mut err_old: f64 = 1e-4;
    let mut last_rejected = false;
    let mut stage = zeros(n);
    let mut y_new = zeros(n);
    let mut err_vec = zeros(n);

    while s < length {
        let mut last = false;
        if s + h >= length || length - (s + h) < h_min {
            h = length - s;
            last = true;
        }

        // Stages 2..7; k[6] is f(y_new) for FSAL.
        let mut eval_failure = None;
        for i in 1..7 {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, a) in A[i].iter().enumerate().take(i) {
                    if *a != 0.0 {
                        acc += k[m][j] * *a;
                    }
                }
                stage[j] = y[j] + acc * h;
            }
            if i == 6 {
                y_new.copy_from_slice(&stage);
            }
            if let Err(e) = field.eval_into(&stage, &mut k[i]) {
                eval_failure = Some(e);
                break;
            }
        }

        let err = if eval_failure.is_some() || !is_finite(&y_new) {
            f64::INFINITY
        } else {
            let mut worst: f64 = 0.0;
            for j in 0..n {
                let mut e = Complex64::new(0.0, 0.0);
                for (m, coef) in E.iter().enumerate() {
                    if *coef != 0.0 {
                        e += k[m][j] * *coef;
                    }
                }
                err_vec[j] = e * h;
                let scale = cfg.atol + cfg.rtol * y[j].norm().max(y_new[j].norm());
                worst = worst.max(err_vec[j].norm() / scale);
            }
            if worst.is_nan() {
                f64::INFINITY
            } else {
                worst
            }
        };

        if err <= 1.0 {
            let s_new = if last { length } else { s + h };
            let abs_err = err_vec.iter().map(|e| e.norm()).fold(0.0, f64::max);

            // Dense output for requested fractions inside (s, s_new].
            if next_out < fractions.len() && fractions[next_out] * length <= s_new {
                let mut cont: [Vec<Complex64>; 5] = std::array::from_fn(|_| zeros(n));
                for j in 0..n {
                    let ydiff = y_new[j] - y[j];
                    let bspl = k[0][j] * h - ydiff;
                    cont[0][j] = y[j];
                    cont[1][j] = ydiff;
                    cont[2][j] = bspl;
                    cont[3][j] = ydiff - k[6][j] * h - bspl;
                    let mut d = Complex64::new(0.0, 0.0);
                    for (m, coef) in D.iter().enumerate() {
                        if *coef != 0.0 {
                            d += k[m][j] * *coef;
                        }
                    }
                    cont[4][j] = d * h;
                }
                while next_out < fractions.len() {
                    let frac = fractions[next_out];
                    let target = frac * length;
                    if target > s_new {
                        break;
                    }
                    let value: Vec<Complex64> = if frac >= 1.0 || (last && target >= s_new) {
                        y_new.clone()
                    } else {
                        let theta = ((target - s) / h).clamp(0.0, 1.0);
                        let theta1 = 1.0 - theta;
                        (0..n)
                            .map(|j| {
                                cont[0][j]
                                    + (cont[1][j]
                                        + (cont[2][j] + (cont[3][j] + cont[4][j] * theta1) * theta)
                                            * theta1)
                                        * theta
                            })
                            .collect()
                    };
                    run.samples.push((frac, ComplexVector(value), abs_err));
                    next_out += 1;
                }
            }

            run.accepted += 1;
            run.step_errors.push(err);
            y.copy_from_slice(&y_new);
            let (head, tail) = k.split_at_mut(6);
            head[0].copy_from_slice(&tail[0]);
            s = s_new;

            let peak = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
            if peak > cfg.blowup_threshold {
                fail(
                    &mut run,
                    Status::Singularity,
                    s,
                    format!(
                        "|z| = {peak:e} exceeds blow-up threshold {:e}",
                        cfg.blowup_threshold
                    ),
                );
                return run;
            }

            let mut fac = SAFETY * err.max(1e-10).powf(-PI_ALPHA) * err_old.powf(PI_BETA);
            fac = fac.clamp(GROWTH_MIN, GROWTH_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            err_old = err.max(1e-4);
            last_rejected = false;
            h = (h * fac).min(h_max);
        } else {
            run.rejected += 1;
            last_rejected = true;
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-PI_ALPHA)).clamp(GROWTH_MIN, 1.0)
            } else {
                GROWTH_MIN
            };
            h *= fac;
            if h < h_min {
                let (status, reason) = match eval_failure {
                    Some(e) => (Status::Singularity, e.to_string()),
                    None => (
                        Status::StepUnderflow,
                        format!("step {h:e} below minimum {h_min:e}"),
                    ),
                };
                fail(&mut run, status, s, reason);
                return run;
            }
        }
    }
    run
}

/// Integrate `field` from `z0` along `path`.
///
/// On singularity or step underflow the partial trajectory is returned with
/// the matching status and `failure` set. Only malformed input is an `Err`.
pub fn integrate_path(
    field: &VectorField,
    z0: &ComplexVector,
    path: &TimePath,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, IntegrateError> {
    cfg.validate()?;
    if z0.dim() != field.dim() {
        return Err(IntegrateError::InvalidInitial(format!(
            "dimension {} does not match field dimension {}",
            z0.dim(),
            field.dim()
        )));
    }
    if !z0.is_finite() {
        return Err(IntegrateError::InvalidInitial(
            "initial value is not finite".into(),
        ));
    }
    let fractions: Vec<f64> = (1..=cfg.dense_samples)
        .map(|j| j as f64 / cfg.dense_samples as f64)
        .collect();

    let mut traj = Trajectory {
        samples: vec![Sample {
            t: path.start(),
            z: z0.clone(),
            err_est: 0.0,
        }],
        step_errors: Vec::new(),
        status: Status::Completed,
        failure: None,
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let mut z = z0.clone();
    for (ta, tb) in path.segments() {
        let delta = tb - ta;
        let length = delta.norm();
        let seg_field = field.with_direction(delta / length);
        let run = integrate_segment(&seg_field, &z, length, &fractions, cfg);
        traj.accepted_steps += run.accepted;
        traj.rejected_steps += run.rejected;
        traj.step_errors.extend(run.step_errors);
        for (frac, state, err_est) in run.samples {
            let t = if frac >= 1.0 { tb } else { ta + delta * frac };
            traj.samples.push(Sample {
                t,
                z: state,
                err_est,
            });
        }
        if let Some((status, frac, reason)) = run.failure {
            let t = ta + delta * frac;
            traj.status = status;
            traj.failure = Some(match status {
                Status::StepUnderflow => IntegrateError::StepSizeUnderflow {
                    t,
                    step: cfg.min_step_fraction * length,
                },
                _ => IntegrateError::SingularityEncountered { t, reason },
            });
            return Ok(traj);
        }
        z = traj.last().z.clone();
    }
    Ok(traj)
}

/// Endpoint of a completed integration along `path`.
pub fn integrate_to(
    field: &VectorField,
    z0: &ComplexVector,
    path: &TimePath,
    cfg: &IntegratorConfig,
) -> Result<ComplexVector, IntegrateError> {
    let cfg = IntegratorConfig {
        dense_samples: 1,
        ..cfg.clone()
    };
    let traj = integrate_path(field, z0, path, &cfg)?;
    traj.endpoint().cloned()
}

/// Max-norm distance between the endpoints of the two L-paths to `sigma + i tau`:
/// real-then-imaginary versus imaginary-then-real.
///
/// Near zero for systems whose continued solutions are single-valued on the
/// rectangle; large when the rectangle encloses a branch point.
pub fn path_commutativity_defect(
    field: &VectorField,
    z0: &ComplexVector,
    sigma: f64,
    tau: f64,
    cfg: &IntegratorConfig,
) -> Result<f64, IntegrateError> {
    let origin = Complex64::new(0.0, 0.0);
    let corner = Complex64::new(sigma, tau);
    let legs = [
        ("sigma-first", Complex64::new(sigma, 0.0)),
        ("tau-first", Complex64::new(0.0, tau)),
    ];
    let mut ends = Vec::with_capacity(2);
    for (name, elbow) in legs {
        let mut waypoints = vec![origin];
        if elbow != origin {
            waypoints.push(elbow);
        }
        if corner != elbow {
            waypoints.push(corner);
        }
        if waypoints.len() < 2 {
            // Degenerate rectangle: both paths are empty.
            return Ok(0.0);
        }
        let path = TimePath::new(waypoints).map_err(|e| IntegrateError::Leg {
            leg: name.to_string(),
            source: Box::new(e),
        })?;
        let end = integrate_to(field, z0, &path, cfg).map_err(|e| IntegrateError::Leg {
            leg: name.to_string(),
            source: Box::new(e),
        })?;
        ends.push(end);
    }
    Ok(ends[0].distance(&ends[1]))
}
