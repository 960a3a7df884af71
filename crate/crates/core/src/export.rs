//! CSV renderings of results. Numbers carry 17 significant digits so values
//! round-trip exactly; lines end in `\n`.

use std::fmt::Write as _;

use crate::integrator::Trajectory;
use crate::sim::ConfusionTable;
use crate::spectral::Spectrum;
use crate::surface::{Node, SurfaceMesh};
use num_complex::Complex64;

/// `x` in scientific notation with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn component_header(dim: usize) -> String {
    (1..=dim)
        .map(|k| format!("re_z{k},im_z{k}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn push_complex(line: &mut String, values: &[Complex64]) {
    for v in values {
        let _ = write!(line, ",{},{}", num(v.re), num(v.im));
    }
}

/// `re_t,im_t,re_z1,im_z1,...,err_est`
pub fn trajectory_csv(traj: &Trajectory, dim: usize) -> String {
    let mut out = format!("re_t,im_t,{},err_est\n", component_header(dim));
    for s in &traj.samples {
        let mut line = format!("{},{}", num(s.t.re), num(s.t.im));
        push_complex(&mut line, &s.z);
        let _ = writeln!(line, ",{}", num(s.err_est));
        out.push_str(&line);
    }
    out
}

/// `sigma,tau,re_z1,im_z1,...,status`; failed nodes have `nan` values and
/// status `failed`.
pub fn mesh_csv(mesh: &SurfaceMesh) -> String {
    let mut out = format!("sigma,tau,{},status\n", component_header(mesh.dim));
    for (j, column) in mesh.nodes.iter().enumerate() {
        for (i, node) in column.iter().enumerate() {
            let mut line = format!("{},{}", num(mesh.sigmas[j]), num(mesh.taus[i]));
            match node {
                Node::Value(z) => {
                    push_complex(&mut line, z);
                    line.push_str(",ok\n");
                }
                Node::Failed(_) => {
                    line.push_str(&",nan".repeat(2 * mesh.dim));
                    line.push_str(",failed\n");
                }
            }
            out.push_str(&line);
        }
    }
    out
}

/// `f,power_total,power_z1,...` in two-sided frequency order.
pub fn spectrum_csv(spectrum: &Spectrum) -> String {
    let dim = spectrum.power.len();
    let header: Vec<String> = (1..=dim).map(|k| format!("power_z{k}")).collect();
    let mut out = format!("f,power_total,{}\n", header.join(","));
    for (k, f) in spectrum.frequencies.iter().enumerate() {
        let mut line = format!("{},{}", num(*f), num(spectrum.total[k]));
        for p in &spectrum.power {
            let _ = write!(line, ",{}", num(p[k]));
        }
        line.push('\n');
        out.push_str(&line);
    }
    out
}

/// Per-point validation rows: `x1,...,truth,distance,verdict,rho`.
pub fn validation_csv(table: &ConfusionTable) -> String {
    let dim = table.points.first().map_or(0, |p| p.point.len());
    let coords: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{}{}truth,distance,verdict,rho",
        coords.join(","),
        if dim > 0 { "," } else { "" }
    );
    for p in &table.points {
        for x in &p.point {
            let _ = write!(out, "{},", num(*x));
        }
        let verdict = p.verdict.map_or("Unclassified", |v| v.as_str());
        let rho = p.rho.map_or_else(|| "nan".to_string(), num);
        let _ = writeln!(
            out,
            "{},{},{verdict},{rho}",
            p.truth.as_str(),
            num(p.distance)
        );
    }
    out
}

/// Invariance residual rows: `re_xs1,im_xs1,...,re_r1,im_r1,...,norm`.
pub fn residual_csv(rows: &[(Vec<Complex64>, Vec<Complex64>)]) -> String {
    let (ns, nf) = rows.first().map_or((0, 0), |(s, r)| (s.len(), r.len()));
    let mut header: Vec<String> = (1..=ns).map(|k| format!("re_xs{k},im_xs{k}")).collect();
    header.extend((1..=nf).map(|k| format!("re_r{k},im_r{k}")));
    header.push("norm".into());
    let mut out = header.join(",") + "\n";
    for (slow, r) in rows {
        let mut line = String::new();
        for v in slow.iter().chain(r) {
            let _ = write!(line, "{},{},", num(v.re), num(v.im));
        }
        let norm = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let _ = writeln!(line, "{}", num(norm));
        out.push_str(&line);
    }
    out
}
