//! Registered scenarios, one per reproduced figure panel.

use std::thread;

use kitune::circuit::{quantize_circuit, tuning_points, TuningPoint};
use kitune::dynamics::{
    absorption_map, converted_reflection, echo_spectrum, endor_scan, hahn_echo, hahn_schedule, integrate_modes,
    AbsorptionModel, EventKind, Probe,
};
use kitune::fitting::{
    fit_exponential, fit_lorentzian_peaks, fit_tuning, ExponentialModel, LmOptions, TuningElement, TuningFitOptions,
};
use kitune::spin::{labeled_spectrum, labeled_sweep, linewidth_estimate, scan_clock_transitions, transitions, LevelLabel, TransitionKind};
use kitune::{CircuitNetlist, EndorModel, EnsembleModel, FitResult, ModePair, PulseEvent, PulseSchedule, Trace};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::Config;
use crate::failure::Failure;
use crate::output::{linspace, Output};

/// Options that only some scenarios read.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Restricts the ringdown family to a single pump delay (s).
    pub pump_delay: Option<f64>,
}

pub struct Scenario {
    pub id: &'static str,
    pub figure: &'static str,
    pub description: &'static str,
    run: fn(&Config, &RunOptions) -> Result<Vec<Output>, Failure>,
}

impl Scenario {
    pub fn run(&self, cfg: &Config, opts: &RunOptions) -> Result<Vec<Output>, Failure> {
        (self.run)(cfg, opts)
    }
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario { id: "fig2a", figure: "Fig. 2a", description: "mode shifts vs I_A at I_B offsets, with a GL fit of microwire A", run: fig2a },
    Scenario { id: "fig2b", figure: "Fig. 2b", description: "mode shifts vs I_B at I_A offsets, with a GL fit of the coupler", run: fig2b },
    Scenario { id: "fig2c", figure: "Fig. 2c", description: "reflection near mode B vs pump frequency", run: fig2c },
    Scenario { id: "fig2d", figure: "Fig. 2d", description: "reflection near mode A vs pump frequency", run: fig2d },
    Scenario { id: "fig2e", figure: "Fig. 2e", description: "mode-A internal loss vs pump current at several coupler biases", run: fig2e },
    Scenario { id: "fig2f", figure: "Fig. 2f", description: "mode-A ringdown with the pump switched on after a delay", run: fig2f },
    Scenario { id: "fig3a", figure: "Fig. 3a", description: "donor energy levels vs Bz and the clock transitions", run: fig3a },
    Scenario { id: "fig3b", figure: "Fig. 3b", description: "spin-induced loss of mode A over (f, Bz)", run: fig3b },
    Scenario { id: "fig3c", figure: "Fig. 3c", description: "absorption cut at low field and line widths vs df/dB", run: fig3c },
    Scenario { id: "fig4a", figure: "Fig. 4a", description: "echo spectroscopy near the clock transitions", run: fig4a },
    Scenario { id: "fig4b", figure: "Fig. 4b", description: "inversion recovery and T1 fit", run: fig4b },
    Scenario { id: "fig4c", figure: "Fig. 4c", description: "Hahn-echo decay and T2 fit", run: fig4c },
    Scenario { id: "fig4d", figure: "Fig. 4d", description: "echo silencing by detuning the resonator", run: fig4d },
    Scenario { id: "fig4e", figure: "Fig. 4e", description: "ENDOR scan with Lorentzian dip fits", run: fig4e },
];

pub fn find(id: &str) -> Option<&'static Scenario> {
    SCENARIOS.iter().find(|s| s.id == id)
}

fn rng(cfg: &Config, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    r.set_stream(stream);
    r
}

fn normal(sigma: f64) -> Result<Normal<f64>, Failure> {
    Normal::new(0.0, sigma).map_err(|e| Failure::config(format!("noise level: {e}")))
}

fn symmetric(max: f64, n: usize) -> Vec<f64> {
    linspace(-max, max, n)
}

/// Adds Gaussian noise of `rel` times the larger frequency span.
fn noisy(rows: &[TuningPoint<f64>], rel: f64, rng: &mut ChaCha8Rng) -> Result<(Vec<TuningPoint<f64>>, f64), Failure> {
    let span = |g: fn(&TuningPoint<f64>) -> f64| {
        let (lo, hi) = rows.iter().map(g).fold((f64::MAX, f64::MIN), |(l, h), v| (l.min(v), h.max(v)));
        hi - lo
    };
    let sigma = (rel * span(|p| p.fa).max(span(|p| p.fb))).max(f64::MIN_POSITIVE);
    let gauss = normal(sigma)?;
    let out = rows
        .iter()
        .map(|r| TuningPoint {
            fa: r.fa + gauss.sample(rng),
            fb: r.fb + gauss.sample(rng),
            ..*r
        })
        .collect();
    Ok((out, sigma))
}

const TUNING_HEADER: [&str; 8] = ["I_A_A", "I_B_A", "fa_Hz", "fb_Hz", "dfa_Hz", "dfb_Hz", "fa_meas_Hz", "fb_meas_Hz"];

fn tuning_rows(model: &[TuningPoint<f64>], meas: &[TuningPoint<f64>]) -> Vec<Vec<f64>> {
    model
        .iter()
        .zip(meas)
        .map(|(m, d)| vec![m.ia, m.ib, m.fa, m.fb, m.dfa, m.dfb, d.fa, d.fb])
        .collect()
}

/// Mode-A span over a symmetric `I_A` sweep of the given netlist.
pub fn tuning_span(net: &CircuitNetlist, max: f64, n: usize) -> Result<f64, Failure> {
    let pts: Vec<(f64, f64)> = symmetric(max, n).into_iter().map(|i| (i, 0.0)).collect();
    let rows = tuning_points(net, &pts)?;
    let (lo, hi) = rows.iter().fold((f64::MAX, f64::MIN), |(l, h), r| (l.min(r.fa), h.max(r.fa)));
    Ok(hi - lo)
}

fn tuning_scenario(cfg: &Config, id: &str, element: TuningElement) -> Result<Vec<Output>, Failure> {
    let net = cfg.netlist()?;
    let c = &cfg.circuit;
    let mut pts = Vec::new();
    for &off in &c.offsets {
        for i in symmetric(c.sweep_max, c.sweep_points) {
            pts.push(match element {
                TuningElement::MicrowireA => (i, off),
                TuningElement::Coupler => (off, i),
            });
        }
    }
    let model = tuning_points(&net, &pts)?;
    let (meas, sigma) = noisy(&model, c.noise, &mut rng(cfg, 1))?;
    let opts = TuningFitOptions { sigma, ..TuningFitOptions::new(element) };
    let fit = fit_tuning(&net, &meas, &opts)?;
    let mut text = fit.to_key_value();
    if element == TuningElement::MicrowireA {
        let mut fitted = net.clone();
        fitted.inductor_a.lk0 = value(&fit, "lk0")?;
        fitted.inductor_a.istar = value(&fit, "istar")?;
        fitted.inductor_a.alpha = value(&fit, "alpha")?;
        let span = tuning_span(&fitted, c.sweep_max, 201)?;
        text.push_str(&format!("fa_span = {}\n", kitune::io::fmt_num(span)));
    }
    Ok(vec![
        Output::table(format!("{id}.csv"), &TUNING_HEADER, &tuning_rows(&model, &meas))?,
        Output::text(format!("{id}_fit.txt"), text),
    ])
}

fn value(fit: &FitResult, name: &str) -> Result<f64, Failure> {
    fit.value(name).ok_or_else(|| Failure::numeric(format!("fit result lacks {name}")))
}

fn fig2a(cfg: &Config, _: &RunOptions) -> Result<Vec<Output>, Failure> {
    tuning_scenario(cfg, "fig2a", TuningElement::MicrowireA)
}

fn fig2b(cfg: &Config, _: &RunOptions) -> Result<Vec<Output>, Failure> {
    tuning_scenario(cfg, "fig2b", TuningElement::Coupler)
}

fn pumped_map(cfg: &Config, id: &str, probe: Probe) -> Result<Vec<Output>, Failure> {
    let p = &cfg.pump;
    let modes = ModePair { g3wm: p.g3wm, ..cfg.modes() };
    let diff = modes.fa - modes.fb;
    let (centre, width) = match probe {
        Probe::A => (modes.fa, modes.kappa_a_total() / std::f64::consts::TAU),
        Probe::B => (modes.fb, modes.kappa_b() / std::f64::consts::TAU),
    };
    let probes = symmetric(p.probe_span * width, p.probe_points);
    let mut rows = Vec::new();
    for fp in symmetric(p.pump_span, p.pump_points) {
        for &df in &probes {
            let z = converted_reflection(&modes, probe, centre + df, diff + fp)?;
            rows.push(vec![diff + fp, centre + df, z.re, z.im, z.norm()]);
        }
    }
    Ok(vec![Output::table(
        format!("{id}.csv"),
        &["f_pump_Hz", "f_probe_Hz", "real", "imag", "abs"],
        &rows,
    )?])
}

fn fig2c(cfg: &Config, _: &RunOptions) -> Result<Vec<Output>, Failure> {
    pumped_map(cfg, "fig2c", Probe::B)
}

fn fig2d(cfg: &Config, _: &RunOptions) -> Result<Vec<Output>, Failure> {
    pumped_map(cfg, "fig2d", Probe::A)
}

fn fig2e(cfg: &Config, _: &RunOptions) -> Result<Vec<Output>, Failure> {
    let p = &cfg.pump;
    let modes = cfg.modes();
    let net = cfg.netlist()?;
    let mut rows = Vec::new();
    for &ib in &p.ib_biases {
        let cs = quantize_circuit(&net.with_bias(0.0, ib), cfg.circuit.order)?;
        for irf in linspace(0.0, p.irf_max, p.irf_points) {
            let pumped = cs.pumped(irf, modes.kappa_b())?;
            rows.push(vec![ib, irf, pumped.g3wm, modes.kappa_ia + pumped.induced_loss]);
        }
    }
    Ok(vec![Output::table("fig2e.csv", &["I_B_A", "I_rf_A", "g3wm_per_s", "kappa_i_A_per_s"], &rows)?])
}

/// Ringdown of mode A after a resonant drive, with the pump switched on
/// `delay` after the drive ends.
pub fn ringdown(cfg: &Config, delay: f64) -> Result<Trace, Failure> {
    let r = &cfg.ringdown;
    if !(delay >= 0.0) {
        return Err(Failure::config(format!("pump delay {delay} must be non-negative")));
    }
    let schedule = PulseSchedule::new(vec![
        PulseEvent::new(EventKind::MicrowaveDrive, 0.0, r.drive, r.amplitude),
        PulseEvent::new(EventKind::PumpWindow, r.drive + delay, r.pump_duration, r.g3wm),
    ])?;
    let n = (r.window / r.step).round() as usize + 1;
    let grid = linspace(r.drive, r.drive + r.window, n);
    let out = integrate_modes(&cfg.modes(), &schedule, &grid, None)?;
    Ok(out.a.with_meta("pump_delay_s", delay).with_meta("g3wm_per_s", r.g3wm))
}

fn fig2f(cfg: &Config, opts: &RunOptions) -> Result<Vec<Output>, Failure> {
    let delays = match opts.pump_delay {
        Some(d) => vec![d],
        None => cfg.ringdown.delays.clone(),
    };
    // one worker per delay; results come back in delay order
    let traces: Vec<Result<Trace, Failure>> = thread::scope(|s| {
        let handles: Vec<_> = delays.iter().map(|&d| s.spawn(move || ringdown(cfg, d))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Failure::numeric("ringdown worker panicked"))))
            .collect()
    });
    traces
        .into_iter()
        .zip(&delays)
        .map(|(t, d)| Output::trace(format!("fig2f_delay_{:.0}ns.csv", d * 1e9), &t?))
        .collect()
}

fn level_row(l: LevelLabel) -> [f64; 2] {
    [l.f(), l.m()]
}

fn fig3a(cfg: &Config, _: &RunOptions) -> Result<Vec<Output>, Failure> {
    let sys = cfg.spin_system()?;
    let s = &cfg.spin;
    let n = (s.bz_max / s.bz_step).round() as usize + 1;
    let fields = linspace(0.0, s.bz_max, n);
    let mut rows = Vec::new();
    for spec in labeled_sweep(&sys, &fields)? {
        for (e, l) in spec.energies.iter().zip(&spec.labels) {
            let [f, m] = level_row(*l);
            rows.push(vec![spec.bz, f, m, *e]);
        }
    }
    let cts = scan_clock_transitions(&sys, s.bz_max, s.bz_step)?;
    let ct_rows: Vec<Vec<f64>> = cts
        .iter()
        .map(|c| {
            let [fl, ml] = level_row(c.lower);
            let [fu, mu] = level_row(c.upper);
            vec![fl, ml, fu, mu, c.field, c.frequency]
        })
        .collect();
    Ok(vec![
        Output::table("fig3a.csv", &["Bz_T", "F", "m", "energy_Hz"], &rows)?,
        Output::table(
            "fig3a_clock.csv",
            &["F_lower", "m_lower", "F_upper", "m_upper", "Bz_T", "freq_Hz"],
            &ct_rows,
        )?,
    ])
}

fn absorption_model(cfg: &Config) -> AbsorptionModel<f64> {
    let a = &cfg.absorption;
    AbsorptionModel {
        scale: a.scale,
        delta_b0: a.delta_b0,
        extra_width: a.extra_width,
        temperature: cfg.spin.temperature,
    }
}

fn frequency_grid(cfg: &Config) -> Vec<f64> {
    let a = &cfg.absorption;
    let n = ((a.f_max - a.f_min) / a.f_step).round() as usize + 1;
    linspace(a.f_min, a.f_max, n)
}

fn fig3b(cfg: &Config, _: &RunOptions) -> Result<Vec<Output>, Failure> {
    let a = &cfg.absorption;
    let sys = cfg.spin_system()?;
    let nb = ((a.bz_max - a.bz_min) / a.bz_step).round() as usize + 1;
    let fields = linspace(a.bz_min, a.bz_max, nb);
    let map = absorption_map(&sys, &absorption_model(cfg), &frequency_grid(cfg), &fields)?;
    let rows: Vec<Vec<f64>> = map.iter().map(|p| vec![p.f, p.bz, p.dkappa]).collect();
    Ok(vec![Output::table("fig3b.csv", &["f_Hz", "Bz_T", "dkappa_per_s"], &rows)?])
}

fn fig3c(cfg: &Config, _: &RunOptions) -> Result<Vec<Output>, Failure> {
    let a = &cfg.absorption;
    let sys = cfg.spin_system()?;
    let freqs = frequency_grid(cfg);
    let map = absorption_map(&sys, &absorption_model(cfg), &freqs, &[a.bz_cut])?;
    let cut = Trace::from_real(freqs, &map.iter().map(|p| p.dkappa).collect::<Vec<_>>())?;
    let widths = line_widths(cfg, a.bz_cut, TransitionKind::Esr, a.delta_b0)?;
    Ok(vec![
        Output::trace("fig3c.csv", &cut.with_meta("Bz_T", a.bz_cut))?,
        Output::table("fig3c_widths.csv", &WIDTH_HEADER, &widths)?,
    ])
}

const WIDTH_HEADER: [&str; 8] = [
    "F_lower", "m_lower", "F_upper", "m_upper", "freq_Hz", "dfdB_Hz_per_T", "gamma_over_gamma_e", "width_Hz",
];

/// Every transition of `kind` with its field-noise linewidth.
fn line_widths(cfg: &Config, bz: f64, kind: TransitionKind, delta_b0: f64) -> Result<Vec<Vec<f64>>, Failure> {
    let sys = cfg.spin_system()?;
    let spec = labeled_spectrum(&sys, bz)?;
    Ok(transitions(&sys, &spec, Some(kind))?
        .iter()
        .map(|t| {
            let [fl, ml] = level_row(t.lower);
            let [fu, mu] = level_row(t.upper);
            vec![
                fl,
                ml,
                fu,
                mu,
                t.frequency,
                t.sensitivity,
                (t.sensitivity / sys.gamma_e).abs(),
                linewidth_estimate(t, delta_b0),
            ]
        })
        .collect())
}

const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

fn fig4a(cfg: &Config, _: &RunOptions) -> Result<Vec<Output>, Failure> {
    let e = &cfg.echo;
    let sys = cfg.spin_system()?;
    let f = linspace(e.f_center - e.f_span / 2.0, e.f_center + e.f_span / 2.0, e.f_points);
    let tr = echo_spectrum(&sys, e.bz, &f, e.linewidth / FWHM_PER_SIGMA, cfg.spin.temperature)?;
    Ok(vec![Output::trace("fig4a.csv", &tr.with_meta("Bz_T", e.bz))?])
}

/// Thermal ensemble on the `|4,0> - |5,-1>` clock transition.
pub fn clock_ensemble(cfg: &Config) -> Result<EnsembleModel, Failure> {
    let e = &cfg.echo;
    let sys = cfg.spin_system()?;
    let spec = labeled_spectrum(&sys, e.bz)?;
    let mut ens = EnsembleModel::thermal(&spec, (LevelLabel::new(4, 0), LevelLabel::new(5, -1)), cfg.spin.temperature)?;
    ens.t1 = e.t1;
    ens.t2 = e.t2;
    ens.detuning_sigma = e.linewidth / FWHM_PER_SIGMA;
    ens.resonator_linewidth = cfg.modes.kappa_ca + cfg.modes.kappa_ia;
    Ok(ens)
}

fn echo_at(ens: &EnsembleModel, schedule: &PulseSchedule) -> Result<Complex<f64>, Failure> {
    Ok(hahn_echo(ens, schedule, &[])?.amplitude)
}

/// Inversion-recovery echo, projected on the phase of the uninverted echo
/// so that it changes sign.
pub fn inversion_recovery(cfg: &Config, waits: &[f64]) -> Result<Vec<f64>, Failure> {
    let e = &cfg.echo;
    let ens = clock_ensemble(cfg)?;
    let reference = echo_at(&ens, &hahn_schedule(e.tau, e.pulse, None)?)?;
    let unit = reference / reference.norm();
    waits
        .iter()
        .map(|&w| Ok((echo_at(&ens, &hahn_schedule(e.tau, e.pulse, Some(w))?)? * unit.conj()).re / reference.norm()))
        .collect()
}

/// Normalised echo magnitude against the total delay `2 tau`.
pub fn echo_decay(cfg: &Config, two_tau: &[f64]) -> Result<Vec<f64>, Failure> {
    let e = &cfg.echo;
    let ens = clock_ensemble(cfg)?;
    let reference = echo_at(&ens, &hahn_schedule(e.tau, e.pulse, None)?)?.norm() * (2.0 * e.tau / e.t2).exp();
    two_tau
        .iter()
        .map(|&t| Ok(echo_at(&ens, &hahn_schedule(t / 2.0, e.pulse, None)?)?.norm() / reference))
        .collect()
}

fn fig4b(cfg: &Config, _: &RunOptions) -> Result<Vec<Output>, Failure> {
    let e = &cfg.echo;
    let waits = linspace(e.wait_max / e.wait_points as f64, e.wait_max, e.wait_points);
    let clean = inversion_recovery(cfg, &waits)?;
    let gauss = normal(e.noise)?;
    let mut r = rng(cfg, 2);
    let y: Vec<f64> = clean.iter().map(|v| v + gauss.sample(&mut r)).collect();
    let fit = fit_exponential(&waits, &y, ExponentialModel::InversionRecovery, &LmOptions::default())?;
    Ok(vec![
        Output::trace("fig4b.csv", &Trace::from_real(waits, &y)?)?,
        Output::text("fig4b_fit.txt", fit.to_key_value()),
    ])
}

fn fig4c(cfg: &Config, _: &RunOptions) -> Result<Vec<Output>, Failure> {
    let e = &cfg.echo;
    let t = linspace(e.decay_max / e.decay_points as f64, e.decay_max, e.decay_points);
    let clean = echo_decay(cfg, &t)?;
    let gauss = normal(e.noise)?;
    let mut r = rng(cfg, 3);
    let y: Vec<f64> = clean.iter().map(|v| v * (1.0 + gauss.sample(&mut r))).collect();
    let fit = fit_exponential(&t, &y, ExponentialModel::Decay, &LmOptions::default())?;
    Ok(vec![
        Output::trace("fig4c.csv", &Trace::from_real(t, &y)?)?,
        Output::text("fig4c_fit.txt", fit.to_key_value()),
    ])
}

/// Echo magnitude with mode A detuned by each of `shifts` (Hz) during
/// emission, normalised to the undetuned echo.
pub fn silencing(cfg: &Config, shifts: &[f64]) -> Result<Vec<f64>, Failure> {
    let e = &cfg.echo;
    let ens = clock_ensemble(cfg)?;
    let base = hahn_schedule(e.tau, e.pulse, None)?;
    let reference = echo_at(&ens, &base)?.norm();
    let start = e.pulse + e.tau + e.pulse;
    shifts
        .iter()
        .map(|&df| {
            let mut events = base.events().to_vec();
            events.push(PulseEvent::new(EventKind::DetuningRamp, start, 2.0 * e.tau, df));
            Ok(echo_at(&ens, &PulseSchedule::new(events)?)?.norm() / reference)
        })
        .collect()
}

fn fig4d(cfg: &Config, _: &RunOptions) -> Result<Vec<Output>, Failure> {
    let e = &cfg.echo;
    let shifts = linspace(0.0, e.detuning_max, e.detuning_points);
    let y = silencing(cfg, &shifts)?;
    Ok(vec![Output::trace("fig4d.csv", &Trace::from_real(shifts, &y)?)?])
}

pub fn endor_model(cfg: &Config) -> EndorModel {
    let e = &cfg.endor;
    EndorModel {
        bz: e.bz,
        rf_area: e.rf_area,
        delta_b0: e.delta_b0,
        temperature: cfg.spin.temperature,
        ..EndorModel::bismuth()
    }
}

pub fn endor_trace(cfg: &Config) -> Result<Trace, Failure> {
    let e = &cfg.endor;
    let f = linspace(e.f_min, e.f_max, e.points);
    Ok(endor_scan(&cfg.spin_system()?, &endor_model(cfg), &f)?.with_meta("Bz_T", e.bz))
}

/// NMR lines touching a probed level: the ones that produce dips.
pub fn endor_lines(cfg: &Config) -> Result<Vec<kitune::Transition>, Failure> {
    let sys = cfg.spin_system()?;
    let model = endor_model(cfg);
    let spec = labeled_spectrum(&sys, model.bz)?;
    Ok(transitions(&sys, &spec, Some(TransitionKind::Nmr))?
        .into_iter()
        .filter(|t| model.probes.iter().any(|p| t.involves(p.lower) || t.involves(p.upper)))
        .collect())
}

fn fig4e(cfg: &Config, _: &RunOptions) -> Result<Vec<Output>, Failure> {
    let tr = endor_trace(cfg)?;
    let lines = endor_lines(cfg)?;
    let fit = fit_lorentzian_peaks(&tr, lines.len().max(1), &LmOptions::default())?;
    let widths = line_widths(cfg, cfg.endor.bz, TransitionKind::Nmr, cfg.endor.delta_b0)?;
    Ok(vec![
        Output::trace("fig4e.csv", &tr)?,
        Output::text("fig4e_fit.txt", fit.to_key_value()),
        Output::table("fig4e_widths.csv", &WIDTH_HEADER, &widths)?,
    ])
}
