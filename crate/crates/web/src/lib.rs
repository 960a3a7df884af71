//! Browser bindings: surface drawings, imaginary-time spectra and on/off
//! slow-manifold verdicts for a system given as text.
//!
//! A system is either a builtin name (`linear2d`, `davis_skodje`, using
//! `gamma`) or component expressions separated by `;`, e.g. `-x1; -4*x2`.

use holoflow_core::svg::{surface_svg, Projection};
use holoflow_core::{
    classify_sim_membership, imaginary_time_spectrum, sample_surface, suggest_fast_band,
    ComplexVector, IntegratorConfig, Params, Rect, SpectrumSettings, VectorField, Window,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_SURFACE_NODES: usize = 40_000;
const MAX_SPECTRUM_SAMPLES: usize = 1 << 14;

pub fn system(source: &str, gamma: f64) -> Result<VectorField, String> {
    let source = source.trim();
    let params = Params::from([("gamma".to_string(), gamma)]);
    if holoflow_core::field::BUILTIN_SYSTEMS.contains(&source) {
        return VectorField::builtin(source, &params).map_err(|e| e.to_string());
    }
    let parts: Vec<&str> = source
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    VectorField::from_expressions("custom", &parts, params).map_err(|e| e.to_string())
}

fn initial(field: &VectorField, z0: &[f64]) -> Result<ComplexVector, String> {
    if z0.len() != field.dim() {
        return Err(format!(
            "system has {} components but {} initial values were given",
            field.dim(),
            z0.len()
        ));
    }
    if z0.iter().any(|v| !v.is_finite()) {
        return Err("initial values must be finite".into());
    }
    Ok(ComplexVector::from_real(z0))
}

#[allow(clippy::too_many_arguments)]
pub fn render_surface(
    source: &str,
    gamma: f64,
    z0: &[f64],
    sigma: (f64, f64),
    tau: (f64, f64),
    n_sigma: usize,
    n_tau: usize,
) -> Result<String, String> {
    if n_sigma.saturating_mul(n_tau) > MAX_SURFACE_NODES {
        return Err(format!("at most {MAX_SURFACE_NODES} nodes"));
    }
    let field = system(source, gamma)?;
    let z0 = initial(&field, z0)?;
    let mesh = sample_surface(
        &field,
        &z0,
        Rect::new(sigma, tau),
        n_sigma,
        n_tau,
        &IntegratorConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let projection = if field.dim() >= 2 {
        Projection::default()
    } else {
        Projection::new([
            "re1".parse().unwrap(),
            "im1".parse().unwrap(),
            "re1".parse().unwrap(),
        ])
    };
    surface_svg(&mesh, &projection).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct SpectrumView {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
    pub peaks: Vec<(f64, f64)>,
    pub band: Option<(f64, f64)>,
    pub rho: Option<f64>,
    pub verdict: Option<String>,
}

pub fn spectrum_view(
    source: &str,
    gamma: f64,
    z0: &[f64],
    tau_span: f64,
    n: usize,
) -> Result<SpectrumView, String> {
    if n > MAX_SPECTRUM_SAMPLES {
        return Err(format!("at most {MAX_SPECTRUM_SAMPLES} samples"));
    }
    let field = system(source, gamma)?;
    let z = initial(&field, z0)?;
    let settings = SpectrumSettings {
        sigma_anchor: 0.0,
        tau_span,
        n,
        window: Window::Hann,
    };
    let spectrum = imaginary_time_spectrum(&field, &z, &settings, &IntegratorConfig::default())
        .map_err(|e| e.to_string())?;
    let band = if field.dim() >= 2 {
        suggest_fast_band(&field, &ComplexVector::zeros(field.dim()), 1).ok()
    } else {
        None
    };
    let report = band
        .map(|b| classify_sim_membership(&spectrum, b, 1e-4, 1e-18))
        .transpose()
        .map_err(|e| e.to_string())?;
    Ok(SpectrumView {
        frequencies: spectrum.frequencies.clone(),
        power: spectrum.total.clone(),
        peaks: spectrum.peaks(5),
        band,
        rho: report.as_ref().map(|r| r.rho),
        verdict: report.map(|r| r.verdict.as_str().to_string()),
    })
}

#[derive(Debug, Serialize)]
pub struct Classification {
    pub points: Vec<PointVerdict>,
    pub band: (f64, f64),
}

#[derive(Debug, Serialize)]
pub struct PointVerdict {
    pub z0: Vec<f64>,
    pub verdict: Option<String>,
    pub rho: Option<f64>,
    pub error: Option<String>,
}

/// Verdicts for every point of a `nx` by `ny` grid over the first two coordinates.
pub fn classify_grid(
    source: &str,
    gamma: f64,
    x: (f64, f64),
    y: (f64, f64),
    nx: usize,
    ny: usize,
) -> Result<Classification, String> {
    let field = system(source, gamma)?;
    if field.dim() != 2 {
        return Err("grid classification needs a two-component system".into());
    }
    if nx == 0 || ny == 0 || nx * ny > 400 {
        return Err("grid needs between 1 and 400 points".into());
    }
    let band = suggest_fast_band(&field, &ComplexVector::zeros(2), 1).map_err(|e| e.to_string())?;
    let settings = SpectrumSettings {
        n: 512,
        ..Default::default()
    };
    let cfg = IntegratorConfig::default();
    let at = |lo: f64, hi: f64, k: usize, n: usize| {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    };
    let mut points = vec![];
    for j in 0..ny {
        for i in 0..nx {
            let z0 = vec![at(x.0, x.1, i, nx), at(y.0, y.1, j, ny)];
            let outcome =
                imaginary_time_spectrum(&field, &ComplexVector::from_real(&z0), &settings, &cfg)
                    .and_then(|s| classify_sim_membership(&s, band, 1e-4, 1e-18));
            points.push(match outcome {
                Ok(r) => PointVerdict {
                    z0,
                    verdict: Some(r.verdict.as_str().into()),
                    rho: Some(r.rho),
                    error: None,
                },
                Err(e) => PointVerdict {
                    z0,
                    verdict: None,
                    rho: None,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    Ok(Classification { points, band })
}

fn to_js<T: Serialize>(value: Result<T, String>) -> Result<String, JsValue> {
    value
        .and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = surfaceSvg)]
#[allow(clippy::too_many_arguments)]
pub fn surface_svg_js(
    source: &str,
    gamma: f64,
    z0: Vec<f64>,
    sigma_lo: f64,
    sigma_hi: f64,
    tau_lo: f64,
    tau_hi: f64,
    n_sigma: usize,
    n_tau: usize,
) -> Result<String, JsValue> {
    render_surface(
        source,
        gamma,
        &z0,
        (sigma_lo, sigma_hi),
        (tau_lo, tau_hi),
        n_sigma,
        n_tau,
    )
    .map_err(|e| JsValue::from_str(&e))
}

/// JSON `{frequencies, power, peaks, band, rho, verdict}`.
#[wasm_bindgen(js_name = spectrum)]
pub fn spectrum_js(
    source: &str,
    gamma: f64,
    z0: Vec<f64>,
    tau_span: f64,
    n: usize,
) -> Result<String, JsValue> {
    to_js(spectrum_view(source, gamma, &z0, tau_span, n))
}

/// JSON `{points: [{z0, verdict, rho, error}], band}`.
#[wasm_bindgen(js_name = classifyGrid)]
#[allow(clippy::too_many_arguments)]
pub fn classify_grid_js(
    source: &str,
    gamma: f64,
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
    nx: usize,
    ny: usize,
) -> Result<String, JsValue> {
    to_js(classify_grid(
        source,
        gamma,
        (x_lo, x_hi),
        (y_lo, y_hi),
        nx,
        ny,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn systems_from_text() {
        assert_eq!(system("linear2d", 5.0).unwrap().dim(), 2);
        assert_eq!(system(" -x1 ; -gamma*x2 ;", 3.0).unwrap().dim(), 2);
        assert!(system("x1 +", 1.0).is_err());
        assert!(system("", 1.0).is_err());
    }

    #[test]
    fn surface_is_svg() {
        let svg =
            render_surface("linear2d", 5.0, &[1.0, 1.0], (0.0, 1.0), (-1.0, 1.0), 5, 9).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("real-time"));
        let one = render_surface("-x1", 1.0, &[1.0], (0.0, 1.0), (-1.0, 1.0), 3, 3).unwrap();
        assert!(one.contains("real-time"));
        assert!(render_surface("linear2d", 5.0, &[1.0], (0.0, 1.0), (-1.0, 1.0), 5, 9).is_err());
        assert!(render_surface(
            "linear2d",
            5.0,
            &[1.0, 1.0],
            (0.0, 1.0),
            (-1.0, 1.0),
            1000,
            1000
        )
        .is_err());
    }

    #[test]
    fn spectrum_sorted_with_verdict() {
        let v = spectrum_view(
            "linear2d",
            5.0,
            &[1.0, 1.0],
            16.0 * std::f64::consts::PI,
            256,
        )
        .unwrap();
        assert!(v.frequencies.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(v.power.len(), 256);
        assert_eq!(v.verdict.as_deref(), Some("OffSIM"));
        let on = spectrum_view(
            "linear2d",
            5.0,
            &[1.0, 0.0],
            16.0 * std::f64::consts::PI,
            256,
        )
        .unwrap();
        assert_eq!(on.verdict.as_deref(), Some("OnSIM"));
        assert!(spectrum_view("linear2d", 5.0, &[1.0, 0.0], 1.0, 100).is_err());
    }

    #[test]
    fn grid_verdicts() {
        let c = classify_grid("linear2d", 5.0, (1.0, 2.0), (0.0, 1.0), 2, 2).unwrap();
        let verdicts: Vec<_> = c
            .points
            .iter()
            .map(|p| p.verdict.as_deref().unwrap())
            .collect();
        assert_eq!(verdicts, ["OnSIM", "OnSIM", "OffSIM", "OffSIM"]);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"band\""));
        assert!(classify_grid("-x1", 1.0, (0.0, 1.0), (0.0, 1.0), 2, 2).is_err());
    }
}
