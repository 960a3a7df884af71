//! The five commands. Each returns file contents in a fixed order; nothing
//! touches the filesystem here.

use holoflow_core::export::{
    mesh_csv, num, residual_csv, spectrum_csv, trajectory_csv, validation_csv,
};
use holoflow_core::sim::{benchmark_truth, SimError};
use holoflow_core::spectral::{classify_sim_membership, suggest_fast_band};
use holoflow_core::svg::surface_svg;
use holoflow_core::{
    cauchy_riemann_residual, classifier_validation, imaginary_time_spectrum, integrate_path,
    invariance_residual, Complex64, IntegrateError, SpectralError, ValidationSettings, VectorField,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::json_bytes;
use crate::{exit_code_for, CliError, Command, EXIT_OK, EXIT_SINGULARITY, EXIT_UNDERFLOW};

#[derive(Debug, Default)]
pub struct Produced {
    pub exit_code: i32,
    pub files: Vec<(String, Vec<u8>)>,
    pub warnings: Vec<String>,
}

impl Produced {
    fn add(&mut self, name: String, bytes: impl Into<Vec<u8>>) {
        self.files.push((name, bytes.into()));
    }

    /// The first failure decides the exit code.
    fn fail(&mut self, code: i32) {
        if self.exit_code == EXIT_OK {
            self.exit_code = code;
        }
    }
}

pub fn run(command: Command, config: &RunConfig) -> Result<Produced, CliError> {
    let field = config.field()?;
    match command {
        Command::Integrate => integrate(config, &field),
        Command::Surface => surface(config, &field),
        Command::Spectrum => spectrum(config, &field),
        Command::Classify => classify(config, &field),
        Command::Residual => residual(config, &field),
    }
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn vector(z: &[Complex64]) -> Value {
    Value::Array(z.iter().map(|&v| complex(v)).collect())
}

fn error_code(e: &IntegrateError) -> i32 {
    match e {
        IntegrateError::SingularityEncountered { .. } => EXIT_SINGULARITY,
        IntegrateError::StepSizeUnderflow { .. } => EXIT_UNDERFLOW,
        IntegrateError::Leg { source, .. } => error_code(source),
        _ => crate::EXIT_CONFIG,
    }
}

fn integrate(config: &RunConfig, field: &VectorField) -> Result<Produced, CliError> {
    let initial = config.initial_values(field.dim())?;
    let path = config.path()?;
    let cfg = config.integrator()?;
    let runs = initial
        .par_iter()
        .map(|z0| integrate_path(field, z0, &path, &cfg))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut out = Produced::default();
    let mut summary = vec![];
    for (k, (z0, traj)) in initial.iter().zip(&runs).enumerate() {
        let name = format!("trajectory_{k}.csv");
        out.add(name.clone(), trajectory_csv(traj, field.dim()));
        out.fail(exit_code_for(traj.status));
        let last = traj.last();
        summary.push(json!({
            "index": k,
            "initial": vector(z0),
            "status": traj.status.as_str(),
            "t_reached": complex(last.t),
            "z_reached": vector(&last.z),
            "accepted_steps": traj.accepted_steps,
            "rejected_steps": traj.rejected_steps,
            "failure": traj.failure.as_ref().map(|e| e.to_string()),
            "file": name,
        }));
    }
    let status = json!({
        "command": "integrate",
        "system": field.to_string(),
        "path": vector(path.waypoints()),
        "runs": summary,
    });
    out.add("status.json".into(), json_bytes(&status));
    Ok(out)
}

fn surface(config: &RunConfig, field: &VectorField) -> Result<Produced, CliError> {
    let initial = config.initial_values(field.dim())?;
    let (rect, n_sigma, n_tau, projection) = config.surface(field.dim())?;
    let cfg = config.integrator()?;
    let meshes = initial
        .iter()
        .map(|z0| holoflow_core::sample_surface(field, z0, rect, n_sigma, n_tau, &cfg))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(format!("surface: {e}")))?;

    let mut out = Produced::default();
    let mut summary = vec![];
    for (k, (z0, mesh)) in initial.iter().zip(&meshes).enumerate() {
        let csv = format!("mesh_{k}.csv");
        let svg = format!("surface_{k}.svg");
        out.add(csv.clone(), mesh_csv(mesh));
        let drawing = surface_svg(mesh, &projection)
            .map_err(|e| CliError::Config(format!("surface {k}: {e}")))?;
        out.add(svg.clone(), drawing);
        let failed = mesh.failure_count();
        if failed > 0 {
            out.warnings.push(format!(
                "mesh {k}: {failed} of {} nodes failed",
                mesh.sigmas.len() * mesh.taus.len()
            ));
        }
        let cr = cauchy_riemann_residual(mesh).ok();
        summary.push(json!({
            "index": k,
            "initial": vector(z0),
            "convention": mesh.convention,
            "failed_nodes": failed,
            "failure_fraction": mesh.failure_fraction(),
            "tau_total_variation": mesh.tau_total_variation(),
            "cauchy_riemann_max": cr.as_ref().map(|c| c.max),
            "cauchy_riemann_skipped": cr.as_ref().map(|c| c.skipped),
            "mesh": csv,
            "svg": svg,
        }));
    }
    let doc = json!({
        "command": "surface",
        "system": field.to_string(),
        "sigma": [rect.sigma.0, rect.sigma.1],
        "tau": [rect.tau.0, rect.tau.1],
        "n_sigma": n_sigma,
        "n_tau": n_tau,
        "axes": projection.axes.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "meshes": summary,
    });
    out.add("surface.json".into(), json_bytes(&doc));
    Ok(out)
}

fn spectral_code(e: &SpectralError) -> i32 {
    match e {
        SpectralError::Integration { source, .. } | SpectralError::Anchor(source) => {
            error_code(source)
        }
        _ => crate::EXIT_CONFIG,
    }
}

fn spectrum(config: &RunConfig, field: &VectorField) -> Result<Produced, CliError> {
    let initial = config.initial_values(field.dim())?;
    let settings = config.spectrum()?;
    let cfg = config.integrator()?;
    let spectra: Vec<_> = initial
        .par_iter()
        .map(|z0| imaginary_time_spectrum(field, z0, &settings, &cfg))
        .collect();

    let mut out = Produced::default();
    let mut summary = vec![];
    for (k, (z0, result)) in initial.iter().zip(&spectra).enumerate() {
        match result {
            Ok(s) => {
                let name = format!("spectrum_{k}.csv");
                out.add(name.clone(), spectrum_csv(s));
                summary.push(json!({
                    "index": k,
                    "initial": vector(z0),
                    "total_power": s.total_power(),
                    "bin_width": s.bin_width(),
                    "peaks": s.peaks(5).iter().map(|(f, p)| json!({"f": f, "power": p})).collect::<Vec<_>>(),
                    "file": name,
                }));
            }
            Err(e) => {
                out.fail(spectral_code(e));
                summary.push(json!({"index": k, "initial": vector(z0), "error": e.to_string()}));
            }
        }
    }
    let doc = json!({
        "command": "spectrum",
        "system": field.to_string(),
        "sigma_anchor": settings.sigma_anchor,
        "tau_span": settings.tau_span,
        "n": settings.n,
        "window": settings.window.name(),
        "spectra": summary,
    });
    out.add("spectrum.json".into(), json_bytes(&doc));
    Ok(out)
}

fn classify(config: &RunConfig, field: &VectorField) -> Result<Produced, CliError> {
    let initial = config.initial_values(field.dim())?;
    let d = ValidationSettings::default();
    let settings = ValidationSettings {
        spectrum: config.spectrum()?,
        integrator: config.integrator()?,
        band: config.classify.band.map(|[lo, hi]| (lo, hi)),
        band_point: Some(config.band_point(field.dim())?),
        slow_dimension: config.classify.slow_dimension.unwrap_or(d.slow_dimension),
        epsilon: config.classify.epsilon.unwrap_or(d.epsilon),
        power_floor: config.classify.power_floor.unwrap_or(d.power_floor),
    };
    let band = match settings.band {
        Some(b) => b,
        None => suggest_fast_band(
            field,
            settings.band_point.as_ref().unwrap(),
            settings.slow_dimension,
        )
        .map_err(|e| CliError::Config(format!("classify: {e}")))?,
    };
    let settings = ValidationSettings {
        band: Some(band),
        ..settings
    };

    let mut out = Produced::default();
    let truth_known = config.real_initial_values().filter(|pts| {
        field.gamma().is_some_and(|g| {
            pts.iter()
                .all(|p| benchmark_truth(field.name(), g, p).is_ok())
        })
    });

    let doc = if let Some(points) = truth_known {
        let table = classifier_validation(field, &points, &settings)
            .map_err(|e| CliError::Config(format!("classify: {e}")))?;
        for p in &table.points {
            if let Some(e) = &p.error {
                out.warnings
                    .push(format!("point {:?} unclassified: {e}", p.point));
            }
        }
        out.add("rho.csv".into(), validation_csv(&table));
        let points: Vec<Value> = table
            .points
            .iter()
            .map(|p| {
                json!({
                    "initial": p.point,
                    "truth": p.truth.as_str(),
                    "distance": p.distance,
                    "verdict": p.verdict.map_or("Unclassified", |v| v.as_str()),
                    "rho": p.rho,
                    "correct": p.correct(),
                    "error": p.error,
                })
            })
            .collect();
        let [[on_on, on_off, on_eq], [off_on, off_off, off_eq]] = table.counts;
        json!({
            "command": "classify",
            "system": field.to_string(),
            "band": [band.0, band.1],
            "epsilon": settings.epsilon,
            "power_floor": settings.power_floor,
            "points": points,
            "confusion": {
                "truth_OnSIM": {"OnSIM": on_on, "OffSIM": on_off, "Equilibrium": on_eq},
                "truth_OffSIM": {"OnSIM": off_on, "OffSIM": off_off, "Equilibrium": off_eq},
                "unclassified": table.unclassified,
                "correct": table.correct,
                "incorrect": table.incorrect,
                "total": table.total,
            },
        })
    } else {
        let reports: Vec<_> = initial
            .par_iter()
            .map(|z0| {
                imaginary_time_spectrum(field, z0, &settings.spectrum, &settings.integrator)
                    .and_then(|s| {
                        classify_sim_membership(&s, band, settings.epsilon, settings.power_floor)
                    })
            })
            .collect();
        let mut csv = String::from("index,verdict,rho\n");
        let mut points = vec![];
        for (k, (z0, r)) in initial.iter().zip(&reports).enumerate() {
            match r {
                Ok(rep) => {
                    csv.push_str(&format!("{k},{},{}\n", rep.verdict.as_str(), num(rep.rho)));
                    points.push(json!({
                        "initial": vector(z0),
                        "verdict": rep.verdict.as_str(),
                        "rho": rep.rho,
                        "band_power": rep.band_power,
                        "total_power": rep.total_power,
                    }));
                }
                Err(e) => {
                    out.warnings.push(format!("point {k} unclassified: {e}"));
                    csv.push_str(&format!("{k},Unclassified,nan\n"));
                    points.push(json!({"initial": vector(z0), "verdict": "Unclassified", "error": e.to_string()}));
                }
            }
        }
        out.add("rho.csv".into(), csv);
        json!({
            "command": "classify",
            "system": field.to_string(),
            "band": [band.0, band.1],
            "epsilon": settings.epsilon,
            "power_floor": settings.power_floor,
            "points": points,
            "confusion": null,
        })
    };
    out.add("classification.json".into(), json_bytes(&doc));
    Ok(out)
}

fn residual(config: &RunConfig, field: &VectorField) -> Result<Produced, CliError> {
    let (graph, points) = config.graph(field)?;
    let mut out = Produced::default();
    let mut rows = Vec::with_capacity(points.len());
    for (k, p) in points.iter().enumerate() {
        match invariance_residual(field, &graph, p) {
            Ok(r) => rows.push((p.clone(), r)),
            Err(SimError::Eval(e)) => {
                out.fail(EXIT_SINGULARITY);
                out.warnings.push(format!("point {k} {p:?}: {e}"));
                break;
            }
            Err(e) => return Err(CliError::Config(format!("residual: {e}"))),
        }
    }
    out.add("residual.csv".into(), residual_csv(&rows));
    Ok(out)
}
