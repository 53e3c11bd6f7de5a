use kitune::spin::{
    find_clock_transition, labeled_spectrum, labeled_sweep, linewidth_estimate,
    scan_clock_transitions, transitions, LabeledSpectrum, LevelLabel, SpinSystem, TransitionKind,
};
use nalgebra::DMatrix;
use num_complex::Complex;

fn bi() -> SpinSystem<f64> {
    SpinSystem::bismuth()
}

// Independent Breit-Rabi energies for S = 1/2 with the -gamma*B Zeeman sign.
fn breit_rabi(sys: &SpinSystem<f64>, bz: f64) -> Vec<f64> {
    let a = sys.hyperfine;
    let i = sys.i();
    let (ge, gn) = (sys.gamma_e, sys.gamma_n);
    let mut out = Vec::new();
    let mut m = -(i + 0.5);
    while m <= i + 0.5 + 1e-9 {
        if (m.abs() - (i + 0.5)).abs() < 1e-9 {
            // stretched states: mS = sign(m)/2, mI = sign(m) I
            let s = m.signum();
            let ms = 0.5 * s;
            let mi = i * s;
            out.push(-(ge * ms + gn * mi) * bz + a * ms * mi);
        } else {
            // 2x2 block {|+1/2, m-1/2>, |-1/2, m+1/2>}
            let (m1, m2) = (m - 0.5, m + 0.5);
            let h11 = -(ge * 0.5 + gn * m1) * bz + a * 0.5 * m1;
            let h22 = -(-ge * 0.5 + gn * m2) * bz - a * 0.5 * m2;
            let off = 0.5 * a * (i * (i + 1.0) - m1 * (m1 + 1.0)).sqrt();
            let mean = 0.5 * (h11 + h22);
            let r = (0.25 * (h11 - h22).powi(2) + off * off).sqrt();
            out.push(mean - r);
            out.push(mean + r);
        }
        m += 1.0;
    }
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

#[test]
fn spectrum_matches_breit_rabi() {
    let sys = bi();
    for bz in [0.0, 1e-6, 0.0135, 0.0256, 0.065, 0.3] {
        let spec = labeled_spectrum(&sys, bz).unwrap();
        let oracle = breit_rabi(&sys, bz);
        for (e, o) in spec.energies.iter().zip(&oracle) {
            assert!((e - o).abs() < 1e-3, "bz={bz}: {e} vs {o}");
        }
    }
}

#[test]
fn spectrum_invariants() {
    let sys = bi();
    for bz in [0.0, 0.0256, 0.065, 1.0] {
        let spec = labeled_spectrum(&sys, bz).unwrap();
        assert_eq!(spec.energies.len(), 20);
        assert!(spec.energies.windows(2).all(|w| w[0] <= w[1]));
        assert!(spec.unitarity_error() < 1e-12);
        let trace: f64 = spec.energies.iter().sum();
        assert!(trace.abs() < 1e-6 * sys.hyperfine);
        let mut labels = spec.labels.clone();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 20);
    }
}

#[test]
fn zero_field_labels_and_splitting() {
    let sys = bi();
    let spec = labeled_spectrum(&sys, 0.0).unwrap();
    let f4 = spec.labels.iter().filter(|l| l.twice_f == 8).count();
    let f5 = spec.labels.iter().filter(|l| l.twice_f == 10).count();
    assert_eq!((f4, f5), (9, 11));
    let esr = transitions(&sys, &spec, Some(TransitionKind::Esr)).unwrap();
    for t in esr {
        assert!((t.frequency / (5.0 * sys.hyperfine) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn tiny_field_labels_continue_from_zero() {
    let sys = bi();
    let zero = labeled_spectrum(&sys, 0.0).unwrap();
    let tiny = labeled_spectrum(&sys, 1e-6).unwrap();
    for (k, label) in tiny.labels.iter().enumerate() {
        let f = zero.energy_of(*label).unwrap();
        // each level moves by at most |gamma_e| * 1 uT
        assert!((tiny.energies[k] - f).abs() < 28.0e9 * 1e-6, "{label}");
    }
}

#[test]
fn sweep_requires_ascending_fields() {
    let sys = bi();
    let ok = labeled_sweep(&sys, &[0.0, 0.01, 0.02]).unwrap();
    assert_eq!(ok.len(), 3);
    assert!(labeled_sweep(&sys, &[0.02, 0.01]).is_err());
}

#[test]
fn sensitivity_matches_hellmann_feynman() {
    let sys = bi();
    let model = sys.model();
    let dh = model.field_derivative();
    let spec = labeled_spectrum(&sys, 0.0135).unwrap();
    let hf = |s: &LabeledSpectrum<f64>, l: LevelLabel| {
        let v = s.vector_of(l).unwrap();
        (v.adjoint() * dh * &v)[(0, 0)].re
    };
    for t in transitions(&sys, &spec, None).unwrap() {
        let exact = hf(&spec, t.upper) - hf(&spec, t.lower);
        let scale = exact.abs().max(1e6);
        assert!((t.sensitivity - exact).abs() < 1e-4 * scale, "{} {} vs {}", t.lower, t.sensitivity, exact);
    }
}

#[test]
fn forbidden_dipoles_vanish() {
    let sys = bi();
    let model = sys.model();
    let spec = labeled_spectrum(&sys, 0.0256).unwrap();
    let sx: &DMatrix<Complex<f64>> = &model.ops.sx;
    for a in 0..20 {
        for b in 0..20 {
            let dm = (spec.labels[a].twice_m - spec.labels[b].twice_m).abs();
            if dm == 2 {
                continue;
            }
            let va = spec.eigenvectors.column(a);
            let vb = spec.eigenvectors.column(b);
            let d = (va.adjoint() * sx * vb)[(0, 0)].norm();
            assert!(d < 1e-10, "{} {} {d}", spec.labels[a], spec.labels[b]);
        }
    }
}

#[test]
fn clock_pair_near_the_reference_point() {
    let sys = bi();
    let spec = labeled_spectrum(&sys, 0.0256).unwrap();
    let esr = transitions(&sys, &spec, Some(TransitionKind::Esr)).unwrap();
    for (a, b) in [((4, -1), (5, 0)), ((4, 0), (5, -1))] {
        let t = esr
            .iter()
            .find(|t| t.connects(LevelLabel::new(a.0, a.1), LevelLabel::new(b.0, b.1)))
            .unwrap();
        assert!((t.frequency - 7.3382e9).abs() < 2e6, "{}", t.frequency);
    }
}

#[test]
fn six_nmr_lines_at_endor_field() {
    let sys = bi();
    let spec = labeled_spectrum(&sys, 0.01349).unwrap();
    let nmr = transitions(&sys, &spec, Some(TransitionKind::Nmr)).unwrap();
    let wanted = [
        ((5, 2), (5, 1)),
        ((4, 2), (4, 1)),
        ((5, 1), (5, 0)),
        ((4, 1), (4, 0)),
        ((5, 0), (5, -1)),
        ((4, 0), (4, -1)),
    ];
    let mut freqs = Vec::new();
    for (a, b) in wanted {
        let t = nmr
            .iter()
            .find(|t| t.connects(LevelLabel::new(a.0, a.1), LevelLabel::new(b.0, b.1)))
            .unwrap();
        assert!(t.frequency < 1e9);
        freqs.push(t.frequency);
    }
    // the listed order is ascending in frequency
    assert!(freqs.windows(2).all(|w| w[0] < w[1]), "{freqs:?}");
}

#[test]
fn clock_transition_is_stationary() {
    let sys = bi();
    let ct = find_clock_transition(&sys, LevelLabel::new(4, 0), LevelLabel::new(5, -1), (0.010, 0.040)).unwrap();
    assert!(ct.sensitivity.abs() < 1e6);
    assert!((ct.frequency - 7.3382e9).abs() < 1e6);
    let probe = kitune::spin::Transition {
        lower: ct.lower,
        upper: ct.upper,
        frequency: ct.frequency,
        dipole: 0.0,
        sensitivity: ct.sensitivity,
        kind: TransitionKind::Esr,
    };
    assert!(linewidth_estimate(&probe, 4e-6) < 1e3);
}

#[test]
fn scan_finds_clock_transitions_below_300_mt() {
    let sys = bi();
    let cts = scan_clock_transitions(&sys, 0.3, 0.002).unwrap();
    let fields: Vec<f64> = cts.iter().map(|c| c.field).collect();
    assert_eq!(cts.len(), 8, "{fields:?}");
    for c in &cts {
        assert!(c.sensitivity.abs() < 1e6);
        assert_eq!(c.lower.twice_f, 8);
        assert_eq!(c.upper.twice_f, 10);
    }
}
