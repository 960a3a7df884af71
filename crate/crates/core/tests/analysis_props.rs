use std::f64::consts::TAU;

use holoflow_core::fft::{fft, ifft};
use holoflow_core::sim::benchmark_truth;
use holoflow_core::{
    classifier_validation, classify_sim_membership, imaginary_time_spectrum, integrate_path,
    sample_surface, suggest_fast_band, Complex64, ComplexVector, IntegratorConfig, Rect, Spectrum,
    SpectrumSettings, TimePath, ValidationSettings, VectorField, Window,
};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn signal(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(r, i)| c(r, i)), n)
}

fn sized_signal() -> impl Strategy<Value = Vec<Complex64>> {
    (1u32..=12).prop_flat_map(|p| signal(1 << p))
}

fn rho(field: &VectorField, z: &[f64], band: (f64, f64)) -> f64 {
    let s = imaginary_time_spectrum(
        field,
        &ComplexVector::from_real(z),
        &SpectrumSettings::default(),
        &IntegratorConfig::default(),
    )
    .unwrap();
    classify_sim_membership(&s, band, 1e-4, 1e-18).unwrap().rho
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_undoes_forward(x in sized_signal()) {
        let back = ifft(&fft(&x).unwrap()).unwrap();
        let worst = x.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-12, "n = {}: {worst}", x.len());
    }

    #[test]
    fn modulation_moves_peaks_by_m(x in signal(256), m in 0usize..256) {
        let n = x.len();
        let base = fft(&x).unwrap();
        let shifted: Vec<Complex64> = x
            .iter()
            .enumerate()
            .map(|(j, v)| v * Complex64::from_polar(1.0, TAU * ((m * j) % n) as f64 / n as f64))
            .collect();
        let spec = fft(&shifted).unwrap();
        for k in 0..n {
            prop_assert!((spec[(k + m) % n] - base[k]).norm() < 1e-10);
        }
    }

    #[test]
    fn parseval(a in sized_signal(), hann in any::<bool>(), span in 1.0f64..100.0) {
        let n = a.len();
        let b: Vec<Complex64> = a.iter().rev().map(|v| v * c(0.0, 2.0)).collect();
        let window = if hann { Window::Hann } else { Window::Rect };
        let s = Spectrum::from_signals(&[a, b], span, window).unwrap();
        prop_assert!((s.total_power() - s.signal_energy).abs() <= 1e-12 * s.signal_energy.max(1e-300));
        prop_assert_eq!(s.frequencies.len(), n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn rho_grows_with_fast_amplitude(gamma in 3.0f64..20.0, x1 in 0.5f64..2.0) {
        let f = VectorField::linear2d(gamma).unwrap();
        let band = suggest_fast_band(&f, &ComplexVector::zeros(2), 1).unwrap();
        let mut previous = -1.0;
        for k in 0..10 {
            let r = rho(&f, &[x1, 0.25 * k as f64], band);
            prop_assert!(r >= previous, "amplitude step {k}: {r} < {previous}");
            previous = r;
        }
    }

    #[test]
    fn linear_surface_nodes_match_closed_form(
        a in -1.5f64..1.5, b in -1.5f64..1.5,
        s0 in -0.5f64..0.0, s1 in 0.1f64..1.0,
        t0 in -3.0f64..0.0, t1 in 0.1f64..3.0,
    ) {
        let f = VectorField::linear2d(5.0).unwrap();
        let cfg = IntegratorConfig::default();
        let z0 = ComplexVector::from_real(&[a, b]);
        let mesh = sample_surface(&f, &z0, Rect::new((s0, s1), (t0, t1)), 5, 6, &cfg).unwrap();
        for (j, &s) in mesh.sigmas.iter().enumerate() {
            for (i, &t) in mesh.taus.iter().enumerate() {
                let time = c(s, t);
                let exact = [(-time).exp() * a, (-5.0 * time).exp() * b];
                let z = mesh.node(j, i).value().unwrap();
                for k in 0..2 {
                    let tol = 10.0 * (cfg.rtol * exact[k].norm().max(z0.norm_inf()) + cfg.atol);
                    prop_assert!((z[k] - exact[k]).norm() <= tol, "({s}, {t}) component {k}");
                }
            }
        }
    }

    #[test]
    fn surface_real_row_and_determinism(x in 0.1f64..0.9, y in -0.5f64..0.5, s0 in -0.4f64..0.0, s1 in 0.2f64..1.5) {
        let f = VectorField::davis_skodje(10.0).unwrap();
        let cfg = IntegratorConfig::default();
        let z0 = ComplexVector::from_real(&[x, y]);
        let rect = Rect::new((s0, s1), (-0.5, 0.5));
        let mesh = sample_surface(&f, &z0, rect, 6, 3, &cfg).unwrap();
        prop_assert_eq!(&mesh, &sample_surface(&f, &z0, rect, 6, 3, &cfg).unwrap());
        let row = mesh.zero_tau_row().unwrap();
        for (j, &s) in mesh.sigmas.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let path = TimePath::segment(c(0.0, 0.0), c(s, 0.0)).unwrap();
            let traj = integrate_path(&f, &z0, &path, &cfg).unwrap();
            let node = mesh.node(j, row).value().unwrap();
            prop_assert!(node.distance(&traj.last().z) < 1e-9);
            prop_assert!(node.iter().all(|v| v.im == 0.0));
        }
    }

    #[test]
    fn validation_accounts_for_every_point(pts in prop::collection::vec((0.2f64..2.0, -1.0f64..1.0), 0..5)) {
        let f = VectorField::linear2d(5.0).unwrap();
        let mut points: Vec<Vec<f64>> = pts.iter().map(|&(x, y)| vec![x, y]).collect();
        let table = classifier_validation(&f, &points, &ValidationSettings::default()).unwrap();
        prop_assert_eq!(table.total, points.len());
        prop_assert_eq!(table.points.len(), points.len());
        prop_assert_eq!(table.unclassified + table.correct + table.incorrect, table.total);

        // truth is a pure function of the point
        if let Some(first) = points.first().cloned() {
            points.push(first.clone());
            let again = classifier_validation(&f, &points, &ValidationSettings::default()).unwrap();
            prop_assert_eq!(&again.points[0], &table.points[0]);
            prop_assert_eq!(&again.points[points.len() - 1], &table.points[0]);
        }
    }
}

proptest! {
    #[test]
    fn truth_is_pure_and_nonnegative(x in -0.9f64..3.0, y in -2.0f64..2.0) {
        for name in ["linear2d", "davis_skodje"] {
            let a = benchmark_truth(name, 10.0, &[x, y]).unwrap();
            let b = benchmark_truth(name, 10.0, &[x, y]).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!(a.distance >= 0.0);
        }
        let on = benchmark_truth("davis_skodje", 10.0, &[x, x / (1.0 + x)]).unwrap();
        prop_assert_eq!(on.truth, holoflow_core::Truth::OnSim);
    }
}

#[test]
fn on_off_separation() {
    let f = VectorField::linear2d(5.0).unwrap();
    let band = suggest_fast_band(&f, &ComplexVector::zeros(2), 1).unwrap();
    let on = rho(&f, &[1.0, 0.0], band);
    let off = rho(&f, &[1.0, 1.0], band);
    assert!(off >= 1e3 * on, "on {on:e}, off {off:e}");
}
