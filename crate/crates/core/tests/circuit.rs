use kitune::circuit::{
    closed_form, induced_loss, inversion_residual, quantize_circuit, quantize_series, TuningPoint,
    three_wave_coupling, tuning_curve, InductiveElements,
};
use kitune::series::TruncatedSeries;
use kitune::{CircuitNetlist, KineticInductor};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

// Residual coefficients made dimensionless with flux unit `phi0`: a
// degree-d coefficient of Phi(Phi) carries units phi0^(1-d).
fn max_rel_residual(res: &[TruncatedSeries<f64>], phi0: f64) -> f64 {
    res.iter()
        .flat_map(|s| {
            s.terms()
                .map(|(e, c)| c.abs() * phi0.powi(e.iter().sum::<u32>() as i32 - 1))
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

fn sweep(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

prop_compose! {
    fn exact_elements()(
        la in 1i64..50, lb in 1i64..50, lc in 1i64..50,
        ca in proptest::array::uniform4(-20i64..20),
        cn in proptest::array::uniform4(-20i64..20),
        den in 1i64..7,
    ) -> InductiveElements<BigRational> {
        InductiveElements {
            la0: rational(la, 10),
            lb: rational(lb, 10),
            lc0: rational(lc, 10 * den),
            coeffs_a: ca.map(|c| rational(c, 7)),
            coeffs_c: cn.map(|c| rational(c, 3 * den)),
        }
    }
}

prop_compose! {
    // realistic netlists: nH wires, pH couplers, mA critical currents
    fn device_netlist()(
        lk0a in 10e-12..200e-12f64, lga in 0.2e-9..2e-9f64,
        lk0c in 0.5e-12..20e-12f64, lgc in 0.0..50e-12f64,
        lb in 0.3e-9..3e-9f64,
        isa in 3e-3..20e-3f64, isc in 2e-3..10e-3f64,
        alpha_a in 0.0..1.0f64, alpha_c in 0.0..1.0f64,
        xa in -0.6..0.6f64, xb in -0.3..0.3f64,
    ) -> CircuitNetlist {
        let mut net = CircuitNetlist::device();
        net.inductor_a = KineticInductor::new(lk0a, lga, isa, alpha_a).unwrap();
        net.inductor_c = KineticInductor::new(lk0c, lgc, isc, alpha_c).unwrap();
        net.lb = lb;
        net.set_capacitances_for(7.4e9, 6.6e9).unwrap();
        let ia = xa * isa.min(isc);
        let ib = xb * isc;
        net.with_bias(ia, ib)
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn exact_inverse_is_identity(el in exact_elements(), order in 2u32..5) {
        let q = quantize_series(&el, order).unwrap();
        for r in inversion_residual(&q) {
            prop_assert!(r.is_zero(), "{r:?}");
        }
    }

    #[test]
    fn float_inverse_residual_is_tiny(net in device_netlist()) {
        let el = net.elements().unwrap();
        let q = quantize_series(&el, 3).unwrap();
        // natural flux unit: wire inductance times coupler critical current
        let phi0 = el.la0 * net.inductor_c.istar;
        let rel = max_rel_residual(&inversion_residual(&q), phi0);
        prop_assert!(rel < 1e-10, "{rel}");
    }

    #[test]
    fn closed_forms_match_series(net in device_netlist()) {
        let el = net.elements().unwrap();
        let cs = quantize_circuit(&net, 3).unwrap();
        let (lta, ltb) = closed_form::dressed_inductances(el.la0, el.lb, el.lc0);
        prop_assert!((cs.ltilde_a / lta - 1.0).abs() < 1e-10);
        prop_assert!((cs.ltilde_b / ltb - 1.0).abs() < 1e-10);
        // typeset dressed form La + Lc / (1 + Lc/Lb)
        let lta_alt = el.la0 + el.lc0 / (1.0 + el.lc0 / el.lb);
        prop_assert!((cs.ltilde_a / lta_alt - 1.0).abs() < 1e-10);
        let g11 = closed_form::g11(el.la0, el.lb, el.lc0);
        prop_assert!((cs.g11 / g11 - 1.0).abs() < 1e-10);
        let cubic = closed_form::cubic_couplings(el.la0, el.lb, el.lc0, el.coeffs_a[0], el.coeffs_c[0]);
        let brute = [cs.g30, cs.g21, cs.g12, cs.g03];
        let scale = cubic.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        for (c, b) in cubic.iter().zip(brute) {
            prop_assert!((c - b).abs() <= 1e-10 * scale, "{c} vs {b}");
        }
        if cs.g12 != 0.0 {
            prop_assert!((cs.g12 / cubic[2] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn global_bias_flip_is_symmetric(net in device_netlist()) {
        let (ia, ib) = net.bias;
        let (fa, fb) = net.mode_frequencies().unwrap();
        let (fa2, fb2) = net.with_bias(-ia, -ib).mode_frequencies().unwrap();
        prop_assert!((fa - fa2).abs() <= 1e-12 * fa);
        prop_assert!((fb - fb2).abs() <= 1e-12 * fb);
    }
}

#[test]
fn expansion_reconstructs_inductance() {
    for alpha in [0.0, 0.3, 1.0] {
        let w = KineticInductor::new(65e-12, 0.9e-9, 9.53e-3, alpha).unwrap();
        for idc in [0.0, 2e-3, -4.7e-3, 7e-3] {
            let d = 0.01 * w.istar;
            let c = w.expansion_coeffs(idc).unwrap();
            let series: f64 = c.iter().enumerate().map(|(k, ck)| ck * d.powi(k as i32 + 1)).sum();
            let recon = w.kinetic_inductance(idc).unwrap() + w.lk0 * series;
            let direct = w.kinetic_inductance(idc + d).unwrap();
            assert!((recon / direct - 1.0).abs() < 1e-12, "{alpha} {idc}");
        }
    }
}

#[test]
fn linear_kic_gives_no_cubic_terms() {
    let mut net = CircuitNetlist::device().with_bias(0.0, 0.0);
    net.inductor_a.alpha = 0.0;
    let cs = quantize_circuit(&net, 3).unwrap();
    assert_eq!([cs.g30, cs.g21, cs.g12, cs.g03], [0.0; 4]);
    let el = net.elements().unwrap();
    let expect = el.la0 + el.lc0 / (1.0 + el.lc0 / el.lb);
    assert!((cs.ltilde_a / expect - 1.0).abs() < 1e-14);
}

#[test]
fn decoupling_limit() {
    let mut net = CircuitNetlist::device();
    net.inductor_c = KineticInductor::new(1e-30, 0.0, 5.73e-3, 0.3).unwrap();
    let net = net.with_bias(3e-3, 0.0);
    let cs = quantize_circuit(&net, 3).unwrap();
    let la = net.inductor_a.kinetic_inductance(3e-3).unwrap();
    let fa = 1.0 / (2.0 * std::f64::consts::PI * (la * net.ca).sqrt());
    let fb = 1.0 / (2.0 * std::f64::consts::PI * (net.lb * net.cb).sqrt());
    assert!((cs.fa / fa - 1.0).abs() < 1e-12);
    assert!((cs.fb / fb - 1.0).abs() < 1e-12);
    assert!(cs.g12.abs() < 1e-12 * cs.g30.abs().max(1.0));
}

#[test]
fn element_rescaling() {
    let net = CircuitNetlist::device().with_bias(2e-3, 1e-3);
    let s = 3.0;
    let mut scaled = net.clone();
    for ind in [&mut scaled.inductor_a, &mut scaled.inductor_c] {
        ind.lk0 *= s;
        ind.lg *= s;
    }
    scaled.lb *= s;
    scaled.ca /= s;
    scaled.cb /= s;
    let a = quantize_circuit(&net, 3).unwrap();
    let b = quantize_circuit(&scaled, 3).unwrap();
    assert!((a.fa / b.fa - 1.0).abs() < 1e-12);
    assert!((a.fb / b.fb - 1.0).abs() < 1e-12);
    assert!((b.za / a.za - s).abs() < 1e-12);
    assert!((b.zb / a.zb - s).abs() < 1e-12);
    let ga = three_wave_coupling(&a, 3e-3, 1e-5).unwrap();
    let gb = three_wave_coupling(&b, 3e-3, 1e-5).unwrap();
    assert!((ga / gb - 1.0).abs() < 1e-12);
}

#[test]
fn device_tuning_span() {
    let net = CircuitNetlist::device();
    let (fa, _) = net.mode_frequencies().unwrap();
    assert!((fa - 7.422e9).abs() < 1.0);
    let rows = tuning_curve(&net, &sweep(-5e-3, 5e-3, 41), &sweep(-5e-3, 5e-3, 41)).unwrap();
    let span = |f: &dyn Fn(&TuningPoint<f64>) -> f64| {
        let v: Vec<f64> = rows.iter().map(f).collect();
        v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
    };
    let a_span = span(&|r| r.fa);
    let b_span = span(&|r| r.fb);
    assert!((a_span - 80e6).abs() < 8e6, "{a_span}");
    assert!(b_span < 10e6, "{b_span}");
}

#[test]
fn three_wave_scaling() {
    let net = CircuitNetlist::device().with_bias(0.0, 3e-3);
    let cs = quantize_circuit(&net, 3).unwrap();
    assert_eq!(three_wave_coupling(&cs, 0.0, 1e-5).unwrap(), 0.0);
    let g1 = three_wave_coupling(&cs, 3e-3, 1e-5).unwrap();
    let g2 = three_wave_coupling(&cs, 3e-3, 2e-5).unwrap();
    assert!((g2 / g1 - 2.0).abs() < 1e-14);
    // loss grows linearly in pump power and in (I_A + I_B)^2
    let kb = 3.17e7;
    let l1 = induced_loss(g1, kb).unwrap();
    let l2 = induced_loss(three_wave_coupling(&cs, 3e-3, 1e-5 * 2f64.sqrt()).unwrap(), kb).unwrap();
    assert!((l2 / l1 - 2.0).abs() < 1e-12);
    let l3 = induced_loss(three_wave_coupling(&cs, 1.5e-3, 1e-5).unwrap(), kb).unwrap();
    assert!((l1 / l3 - 4.0).abs() < 1e-12);
    assert!(three_wave_coupling(&cs, 6e-3, 1e-5).is_err());
    let pumped = cs.pumped(1e-5, kb).unwrap();
    assert_eq!(pumped.induced_loss, 4.0 * pumped.g3wm.powi(2) / kb);
}

#[test]
fn induced_loss_reference_value() {
    let l: f64 = induced_loss(1.0e5, 3.17e7).unwrap();
    assert!((l - 1.26e3).abs() < 0.01e3, "{l}");
    assert_eq!(induced_loss(0.0, 3.17e7).unwrap(), 0.0);
    assert!((induced_loss(2.0e5f64, 3.17e7).unwrap() / l - 4.0).abs() < 1e-12);
}

#[test]
fn exact_series_has_no_residual_at_higher_order() {
    let el = InductiveElements {
        la0: rational(9, 10),
        lb: rational(6, 5),
        lc0: rational(1, 50),
        coeffs_a: [rational(3, 7), rational(1, 2), rational(-2, 9), rational(1, 11)],
        coeffs_c: [rational(5, 3), rational(-1, 4), rational(1, 13), rational(2, 3)],
    };
    let q = quantize_series(&el, 6).unwrap();
    assert!(inversion_residual(&q).iter().all(|r| r.is_zero()));
    assert!(!q.hamiltonian.coefficient(&[1, 2]).is_zero());
}
