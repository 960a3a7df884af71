//! Fourier spectra of imaginary-time trajectories and the spectral
//! on/off slow-manifold classifier.
//!
//! Along `t = sigma_anchor + i tau`, a linear mode with eigenvalue `lambda`
//! behaves as `exp(i lambda tau)`, a pure tone at `lambda / (2 pi)` cycles per
//! unit imaginary time. Stable modes (`lambda < 0`) therefore sit at negative
//! frequencies, and an active fast mode shows up as power in the band around
//! `|lambda_fast| / (2 pi)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::eigen::{jacobian_spectrum, EigenError};
use crate::fft::{fft, two_sided, FftError};
use crate::field::{ComplexVector, VectorField};
use crate::integrator::{integrate_segment, IntegrateError, IntegratorConfig, Status};

pub const DEFAULT_EPSILON: f64 = 1e-4;
pub const DEFAULT_POWER_FLOOR: f64 = 1e-18;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("invalid spectral settings: {0}")]
    InvalidSettings(String),
    #[error("invalid band [{lo}, {hi}]: {reason}")]
    InvalidBand { lo: f64, hi: f64, reason: String },
    #[error("no frequency bins fall inside [{lo}, {hi}]")]
    EmptyBand { lo: f64, hi: f64 },
    #[error("imaginary-time leg failed after tau = {tau_reached}: {source}")]
    Integration {
        tau_reached: f64,
        #[source]
        source: IntegrateError,
    },
    #[error("anchor leg failed: {0}")]
    Anchor(IntegrateError),
    #[error(transparent)]
    Fft(#[from] FftError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("slow dimension {slow} leaves no fast modes in dimension {n}")]
    NoFastModes { slow: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    Rect,
    Hann,
}

impl Window {
    pub fn name(self) -> &'static str {
        match self {
            Window::Rect => "rect",
            Window::Hann => "hann",
        }
    }

    pub fn from_name(name: &str) -> Option<Window> {
        match name {
            "rect" => Some(Window::Rect),
            "hann" => Some(Window::Hann),
            _ => None,
        }
    }

    /// Periodic window coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rect => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|j| 0.5 * (1.0 - (TAU * j as f64 / n as f64).cos()))
                .collect(),
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSettings {
    /// Real time at which the imaginary leg starts.
    pub sigma_anchor: f64,
    pub tau_span: f64,
    /// Sample count; a power of two.
    pub n: usize,
    pub window: Window,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        Self {
            sigma_anchor: 0.0,
            tau_span: 16.0 * PI,
            n: 1024,
            window: Window::Hann,
        }
    }
}

impl SpectrumSettings {
    pub fn validate(&self) -> Result<(), SpectralError> {
        if !self.sigma_anchor.is_finite() {
            return Err(SpectralError::InvalidSettings(
                "sigma_anchor must be finite".into(),
            ));
        }
        if !(self.tau_span.is_finite() && self.tau_span > 0.0) {
            return Err(SpectralError::InvalidSettings(format!(
                "tau_span must be positive, got {}",
                self.tau_span
            )));
        }
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(SpectralError::InvalidSettings(format!(
                "sample count {} is not a power of two >= 2",
                self.n
            )));
        }
        Ok(())
    }

    pub fn nyquist(&self) -> f64 {
        self.n as f64 / (2.0 * self.tau_span)
    }
}

/// Two-sided power spectrum of an imaginary-time trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub n: usize,
    pub tau_span: f64,
    pub window: Window,
    /// `k / tau_span` for `k = -N/2 .. N/2`.
    pub frequencies: Vec<f64>,
    /// Per component, two-sided order.
    pub amplitudes: Vec<Vec<Complex64>>,
    /// `|X_k|^2 / N` per component, so bins sum to the windowed-signal energy.
    pub power: Vec<Vec<f64>>,
    /// Sum of `power` over components.
    pub total: Vec<f64>,
    /// Windowed, mean-removed signal energy summed over components.
    pub signal_energy: f64,
}

impl Spectrum {
    /// Build a spectrum from uniformly sampled signals (one per component).
    pub fn from_signals(
        signals: &[Vec<Complex64>],
        tau_span: f64,
        window: Window,
    ) -> Result<Self, SpectralError> {
        let n = signals.first().map_or(0, Vec::len);
        if signals.iter().any(|s| s.len() != n) {
            return Err(SpectralError::InvalidSettings(
                "components differ in length".into(),
            ));
        }
        let coeffs = window.coefficients(n);
        let mut amplitudes = Vec::with_capacity(signals.len());
        let mut power = Vec::with_capacity(signals.len());
        let mut signal_energy = 0.0;
        for signal in signals {
            let mean = signal.iter().sum::<Complex64>() / n as f64;
            let windowed: Vec<Complex64> = signal
                .iter()
                .zip(&coeffs)
                .map(|(v, w)| (v - mean) * *w)
                .collect();
            signal_energy += windowed.iter().map(|v| v.norm_sqr()).sum::<f64>();
            let spec = two_sided(&fft(&windowed)?);
            power.push(
                spec.iter()
                    .map(|x| x.norm_sqr() / n as f64)
                    .collect::<Vec<_>>(),
            );
            amplitudes.push(spec);
        }
        let total = (0..n).map(|k| power.iter().map(|p| p[k]).sum()).collect();
        let half = (n / 2) as i64;
        let frequencies = (-half..half).map(|k| k as f64 / tau_span).collect();
        Ok(Self {
            n,
            tau_span,
            window,
            frequencies,
            amplitudes,
            power,
            total,
            signal_energy,
        })
    }

    pub fn total_power(&self) -> f64 {
        self.total.iter().sum()
    }

    pub fn bin_width(&self) -> f64 {
        1.0 / self.tau_span
    }

    /// Local maxima of the aggregate power, strongest first, as `(frequency, power)`.
    pub fn peaks(&self, count: usize) -> Vec<(f64, f64)> {
        let p = &self.total;
        let mut found: Vec<(f64, f64)> = (0..p.len())
            .filter(|&k| {
                let left = if k > 0 { p[k - 1] } else { f64::NEG_INFINITY };
                let right = if k + 1 < p.len() {
                    p[k + 1]
                } else {
                    f64::NEG_INFINITY
                };
                p[k] > 0.0 && p[k] >= left && p[k] > right
            })
            .map(|k| (self.frequencies[k], p[k]))
            .collect();
        found.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
        found.truncate(count);
        found
    }
}

/// Sample `z(sigma_anchor + i tau)` at `tau = k tau_span / N`, `k = 0..N`.
pub fn imaginary_time_samples(
    field: &VectorField,
    z0: &ComplexVector,
    settings: &SpectrumSettings,
    cfg: &IntegratorConfig,
) -> Result<Vec<ComplexVector>, SpectralError> {
    settings.validate()?;
    cfg.validate().map_err(SpectralError::Anchor)?;
    if z0.dim() != field.dim() {
        return Err(SpectralError::InvalidSettings(format!(
            "initial value has dimension {}, field has {}",
            z0.dim(),
            field.dim()
        )));
    }
    let anchor = if settings.sigma_anchor != 0.0 {
        let direction = if settings.sigma_anchor > 0.0 { 0.0 } else { PI };
        let run = integrate_segment(
            &field.rotated(direction),
            z0,
            settings.sigma_anchor.abs(),
            &[1.0],
            cfg,
        );
        if let Some((status, frac, reason)) = run.failure {
            let t = Complex64::new(settings.sigma_anchor * frac, 0.0);
            return Err(SpectralError::Anchor(to_error(
                status,
                t,
                reason,
                cfg,
                settings.sigma_anchor.abs(),
            )));
        }
        run.samples
            .into_iter()
            .next()
            .map(|s| s.1)
            .unwrap_or_else(|| z0.clone())
    } else {
        z0.clone()
    };

    let n = settings.n;
    let fractions: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
    let run = integrate_segment(
        &field.rotated(FRAC_PI_2),
        &anchor,
        settings.tau_span,
        &fractions,
        cfg,
    );
    if let Some((status, frac, reason)) = run.failure {
        let tau = settings.tau_span * frac;
        let t = Complex64::new(settings.sigma_anchor, tau);
        return Err(SpectralError::Integration {
            tau_reached: tau,
            source: to_error(status, t, reason, cfg, settings.tau_span),
        });
    }
    let mut samples = Vec::with_capacity(n);
    samples.push(anchor);
    samples.extend(run.samples.into_iter().take(n - 1).map(|s| s.1));
    Ok(samples)
}

fn to_error(
    status: Status,
    t: Complex64,
    reason: String,
    cfg: &IntegratorConfig,
    length: f64,
) -> IntegrateError {
    match status {
        Status::StepUnderflow => IntegrateError::StepSizeUnderflow {
            t,
            step: cfg.min_step_fraction * length,
        },
        _ => IntegrateError::SingularityEncountered { t, reason },
    }
}

/// Power spectrum of the imaginary-time trajectory through `z0`.
///
/// Each component has its mean removed and the window applied before the
/// transform.
pub fn imaginary_time_spectrum(
    field: &VectorField,
    z0: &ComplexVector,
    settings: &SpectrumSettings,
    cfg: &IntegratorConfig,
) -> Result<Spectrum, SpectralError> {
    let samples = imaginary_time_samples(field, z0, settings, cfg)?;
    let signals: Vec<Vec<Complex64>> = (0..field.dim())
        .map(|k| samples.iter().map(|s| s[k]).collect())
        .collect();
    Spectrum::from_signals(&signals, settings.tau_span, settings.window)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    OnSim,
    OffSim,
    Equilibrium,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::OnSim => "OnSIM",
            Verdict::OffSim => "OffSIM",
            Verdict::Equilibrium => "Equilibrium",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    /// Fast band `[lo, hi]`; its mirror `[-hi, -lo]` is included.
    pub band: (f64, f64),
    pub band_power: f64,
    pub total_power: f64,
    /// `band_power / total_power`, zero when there is no power at all.
    pub rho: f64,
    pub epsilon: f64,
    pub power_floor: f64,
    pub verdict: Verdict,
}

/// On/off slow-manifold verdict from the fraction of power in the fast band.
pub fn classify_sim_membership(
    spectrum: &Spectrum,
    band: (f64, f64),
    epsilon: f64,
    power_floor: f64,
) -> Result<ClassificationReport, SpectralError> {
    let (lo, hi) = band;
    let nyquist = spectrum.n as f64 / (2.0 * spectrum.tau_span);
    let bad = |reason: &str| SpectralError::InvalidBand {
        lo,
        hi,
        reason: reason.to_string(),
    };
    if !(lo > 0.0 && lo < hi) {
        return Err(bad("need 0 < lo < hi"));
    }
    if hi > nyquist * (1.0 + 1e-12) {
        return Err(bad(&format!("hi exceeds the Nyquist frequency {nyquist}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(SpectralError::InvalidSettings(format!(
            "epsilon {epsilon} outside (0, 1)"
        )));
    }
    if power_floor.is_nan() || power_floor < 0.0 {
        return Err(SpectralError::InvalidSettings(format!(
            "power floor {power_floor} is negative"
        )));
    }
    let mut in_band = 0usize;
    let mut band_power = 0.0;
    for (f, p) in spectrum.frequencies.iter().zip(&spectrum.total) {
        if f.abs() >= lo && f.abs() <= hi {
            in_band += 1;
            band_power += p;
        }
    }
    if in_band == 0 {
        return Err(SpectralError::EmptyBand { lo, hi });
    }
    let total_power = spectrum.total_power();
    let rho = if total_power > 0.0 {
        (band_power / total_power).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let verdict = if total_power < power_floor {
        Verdict::Equilibrium
    } else if rho < epsilon {
        Verdict::OnSim
    } else {
        Verdict::OffSim
    };
    Ok(ClassificationReport {
        band,
        band_power,
        total_power,
        rho,
        epsilon,
        power_floor,
        verdict,
    })
}

/// Fast band from the Jacobian at `point`: the `slow_dimension` eigenvalues
/// with smallest `|Re lambda|` are slow, the rest fast, and the band spans
/// `[0.5 min |lambda_fast|, 1.5 max |lambda_fast|] / (2 pi)`.
pub fn suggest_fast_band(
    field: &VectorField,
    point: &ComplexVector,
    slow_dimension: usize,
) -> Result<(f64, f64), SpectralError> {
    let n = field.dim();
    if slow_dimension >= n {
        return Err(SpectralError::NoFastModes {
            slow: slow_dimension,
            n,
        });
    }
    let spectrum = jacobian_spectrum(field, point)?;
    let mut eig = spectrum.eigenvalues;
    eig.sort_by(|a, b| a.re.abs().total_cmp(&b.re.abs()));
    let fast: Vec<f64> = eig[slow_dimension..].iter().map(|l| l.norm()).collect();
    let min = fast.iter().copied().fold(f64::INFINITY, f64::min);
    let max = fast.iter().copied().fold(0.0, f64::max);
    if min.is_nan() || min <= 0.0 {
        return Err(SpectralError::InvalidBand {
            lo: 0.0,
            hi: 1.5 * max / TAU,
            reason: "fast eigenvalue is zero".into(),
        });
    }
    Ok((0.5 * min / TAU, 1.5 * max / TAU))
}
