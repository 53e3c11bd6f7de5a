//! `kitune`: runs the simulation and fitting toolkit from the command line.

mod config;
mod failure;
mod output;
mod scenarios;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kitune::circuit::{quantize_circuit, tuning_curve, write_tuning_csv, TuningPoint};
use kitune::dynamics::{hahn_echo, hahn_schedule, reflection_s11};
use kitune::fitting::{
    fit_exponential, fit_lorentzian_peaks, fit_resonance, fit_tuning, CouplingRegime, ExponentialModel, LmOptions,
    ResonanceFitOptions, TuningElement, TuningFitOptions,
};
use kitune::io::fmt_num;
use kitune::spin::{find_clock_transition, labeled_spectrum, write_transitions_csv, LevelLabel};
use kitune::trace::read_trace_csv;
use kitune::{ModePair, Trace};

use config::Config;
use failure::Failure;
use output::{linspace, Meta, Output};
use scenarios::RunOptions;

#[derive(Parser)]
#[command(name = "kitune", version, about = "Tunable-resonator and bismuth-donor simulations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; built-in defaults when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Parameter override `section.key=value`, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Seed for synthetic noise (same as `--set run.seed=N`).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Energy levels at one field, or transitions with `--transitions`.
    Spectrum {
        /// T
        #[arg(long)]
        bz: f64,
        #[arg(long)]
        transitions: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Locates a clock transition between two |F, m> levels.
    ClockFind {
        /// Lower level as `F,m`.
        #[arg(long, default_value = "4,0", value_parser = parse_level)]
        lower: LevelLabel,
        #[arg(long, default_value = "5,-1", value_parser = parse_level)]
        upper: LevelLabel,
        /// Field bracket `lo,hi` in T.
        #[arg(long, default_value = "0.005,0.06", value_parser = parse_pair)]
        bracket: (f64, f64),
    },
    /// Mode frequencies over a bias sweep of one line.
    Tune {
        #[arg(long, value_enum, default_value_t = Line::A)]
        line: Line,
        /// Largest bias current (A); the `[circuit]` value when absent.
        #[arg(long)]
        max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Quantized-circuit coefficients at one bias point.
    Quantize {
        #[arg(long, default_value_t = 0.0)]
        ia: f64,
        #[arg(long, default_value_t = 0.0)]
        ib: f64,
        /// Pump current through the coupler (A).
        #[arg(long, default_value_t = 0.0)]
        irf: f64,
    },
    /// Reflection near mode A.
    S11 {
        /// Conversion rate (s^-1).
        #[arg(long, default_value_t = 0.0)]
        g3wm: f64,
        /// Half span in linewidths.
        #[arg(long, default_value_t = 6.0)]
        span: f64,
        #[arg(long, default_value_t = 601)]
        points: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Mode-A ringdown with a delayed pump.
    Ringdown {
        /// s
        #[arg(long, default_value_t = 0.0)]
        pump_delay: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Hahn echo trace of the clock-transition ensemble.
    Echo {
        /// s; the `[echo]` value when absent.
        #[arg(long)]
        tau: Option<f64>,
        /// Inversion pulse this long (s) before the echo sequence.
        #[arg(long)]
        inversion_wait: Option<f64>,
        /// Readout half window around the echo (s).
        #[arg(long, default_value_t = 40e-6)]
        window: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Normalised echo against the RF frequency.
    Endor {
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fits a model to a CSV file.
    Fit {
        #[arg(value_enum)]
        model: FitModel,
        #[arg(long)]
        input: PathBuf,
        /// Resonance: fit |S11| only.
        #[arg(long)]
        magnitude_only: bool,
        /// Resonance: starting side of the coupling.
        #[arg(long, value_enum)]
        regime: Option<Regime>,
        /// Tuning: the element to fit.
        #[arg(long, value_enum, default_value_t = Line::A)]
        element: Line,
        /// Tuning: frequency noise (Hz).
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Lorentzian: number of peaks.
        #[arg(long, default_value_t = 1)]
        peaks: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Runs a registered scenario into the output directory.
    Run {
        scenario: String,
        /// Output directory.
        #[arg(long, env = "KITUNE_OUT_DIR", default_value = "out")]
        out: PathBuf,
        /// fig2f: run a single pump delay (s).
        #[arg(long)]
        pump_delay: Option<f64>,
    },
    /// Lists the registered scenarios.
    List {
        /// One id per line.
        #[arg(long)]
        machine: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Line {
    /// Microwire A (bias line A).
    A,
    /// The coupler (bias line B).
    Coupler,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitModel {
    Resonance,
    Tuning,
    Exponential,
    Decay,
    Inversion,
    Lorentzian,
}

#[derive(Clone, Copy, ValueEnum)]
enum Regime {
    Under,
    Over,
}

fn parse_level(s: &str) -> Result<LevelLabel, String> {
    let (f, m) = s.split_once(',').ok_or("expected F,m")?;
    let f: i32 = f.trim().parse().map_err(|e| format!("F: {e}"))?;
    let m: i32 = m.trim().parse().map_err(|e| format!("m: {e}"))?;
    Ok(LevelLabel::new(f, m))
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

/// Writes to `path`, or to stdout when `None`.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let name = p
                .file_name()
                .ok_or_else(|| Failure::config(format!("{} is not a file path", p.display())))?;
            output::write_atomic(dir, &name.to_string_lossy(), bytes).map(|_| ())
        }
        None => std::io::stdout().write_all(bytes).map_err(|e| Failure::io(format!("stdout: {e}"))),
    }
}

fn emit_trace(path: Option<&Path>, trace: &Trace) -> Result<(), Failure> {
    emit(path, &Output::trace("", trace)?.bytes)
}

fn load_config(common: &Common) -> Result<Config, Failure> {
    let mut overrides = common.overrides.clone();
    if let Some(seed) = common.seed {
        overrides.push(format!("run.seed={seed}"));
    }
    Config::load(common.config.as_deref(), &overrides)
}

fn list(machine: bool) {
    for s in scenarios::SCENARIOS {
        if machine {
            println!("{}", s.id);
        } else {
            println!("{:<7} {:<8} {}", s.id, s.figure, s.description);
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Command::List { machine } = cli.command {
        list(machine);
        return Ok(());
    }
    let cfg = load_config(&cli.common)?;
    match cli.command {
        Command::List { .. } => unreachable!("handled above"),
        Command::Spectrum { bz, transitions, output } => {
            let sys = cfg.spin_system()?;
            let spec = labeled_spectrum(&sys, bz)?;
            let mut buf = Vec::new();
            if transitions {
                let rows: Vec<(f64, kitune::Transition)> =
                    kitune::spin::transitions(&sys, &spec, None)?.into_iter().map(|t| (bz, t)).collect();
                write_transitions_csv(&mut buf, &rows)?;
                emit(output.as_deref(), &buf)
            } else {
                let rows: Vec<Vec<f64>> = spec
                    .energies
                    .iter()
                    .zip(&spec.labels)
                    .map(|(e, l)| vec![bz, l.f(), l.m(), *e])
                    .collect();
                emit(output.as_deref(), &Output::table("", &["Bz_T", "F", "m", "energy_Hz"], &rows)?.bytes)
            }
        }
        Command::ClockFind { lower, upper, bracket } => {
            let ct = find_clock_transition(&cfg.spin_system()?, lower, upper, bracket)?;
            println!("lower = \"{}\"", ct.lower);
            println!("upper = \"{}\"", ct.upper);
            println!("field = {}", fmt_num(ct.field));
            println!("frequency = {}", fmt_num(ct.frequency));
            println!("sensitivity = {}", fmt_num(ct.sensitivity));
            Ok(())
        }
        Command::Tune { line, max, points, output } => {
            let net = cfg.netlist()?;
            let sweep = linspace(
                -max.unwrap_or(cfg.circuit.sweep_max),
                max.unwrap_or(cfg.circuit.sweep_max),
                points.unwrap_or(cfg.circuit.sweep_points),
            );
            let rows = match line {
                Line::A => tuning_curve(&net, &sweep, &[])?,
                Line::Coupler => tuning_curve(&net, &[], &sweep)?,
            };
            let mut buf = Vec::new();
            write_tuning_csv(&mut buf, &rows)?;
            emit(output.as_deref(), &buf)
        }
        Command::Quantize { ia, ib, irf } => {
            let net = cfg.netlist()?.with_bias(ia, ib);
            let cs = quantize_circuit(&net, cfg.circuit.order)?.pumped(irf, cfg.modes().kappa_b())?;
            for (k, v) in [
                ("ltilde_a", cs.ltilde_a),
                ("ltilde_b", cs.ltilde_b),
                ("za", cs.za),
                ("zb", cs.zb),
                ("fa", cs.fa),
                ("fb", cs.fb),
                ("g11", cs.g11),
                ("g21", cs.g21),
                ("g12", cs.g12),
                ("g30", cs.g30),
                ("g03", cs.g03),
                ("k", cs.k),
                ("g3wm", cs.g3wm),
                ("induced_loss", cs.induced_loss),
            ] {
                println!("{k} = {}", fmt_num(v));
            }
            Ok(())
        }
        Command::S11 { g3wm, span, points, output } => {
            let modes = ModePair { g3wm, ..cfg.modes() };
            let half = span * modes.kappa_a_total() / std::f64::consts::TAU;
            let tr = reflection_s11(&modes, &linspace(modes.fa - half, modes.fa + half, points))?;
            emit_trace(output.as_deref(), &tr)
        }
        Command::Ringdown { pump_delay, output } => emit_trace(output.as_deref(), &scenarios::ringdown(&cfg, pump_delay)?),
        Command::Echo { tau, inversion_wait, window, points, output } => {
            let e = &cfg.echo;
            let ens = scenarios::clock_ensemble(&cfg)?;
            let sched = hahn_schedule(tau.unwrap_or(e.tau), e.pulse, inversion_wait)?;
            let centre = hahn_echo(&ens, &sched, &[])?.echo_time;
            let res = hahn_echo(&ens, &sched, &linspace(centre - window, centre + window, points))?;
            emit_trace(output.as_deref(), &res.trace)
        }
        Command::Endor { output } => emit_trace(output.as_deref(), &scenarios::endor_trace(&cfg)?),
        Command::Fit { model, input, magnitude_only, regime, element, sigma, peaks, output } => {
            let open = || {
                std::fs::File::open(&input)
                    .map_err(|e| Failure::config(format!("cannot read input file {}: {e}", input.display())))
            };
            let lm = LmOptions::default();
            let fit = match model {
                FitModel::Resonance => {
                    let opts = ResonanceFitOptions {
                        magnitude_only,
                        regime: regime.map(|r| match r {
                            Regime::Under => CouplingRegime::Under,
                            Regime::Over => CouplingRegime::Over,
                        }),
                        lm,
                    };
                    fit_resonance(&read_trace_csv(open()?)?, &opts)?
                }
                FitModel::Tuning => {
                    let element = match element {
                        Line::A => TuningElement::MicrowireA,
                        Line::Coupler => TuningElement::Coupler,
                    };
                    let data = read_tuning(open()?)?;
                    fit_tuning(&cfg.netlist()?, &data, &TuningFitOptions { sigma, ..TuningFitOptions::new(element) })?
                }
                FitModel::Exponential | FitModel::Decay | FitModel::Inversion => {
                    let tr = read_trace_csv(open()?)?;
                    let m = match model {
                        FitModel::Exponential => ExponentialModel::Simple,
                        FitModel::Decay => ExponentialModel::Decay,
                        _ => ExponentialModel::InversionRecovery,
                    };
                    fit_exponential(&tr.axis, &tr.real_parts(), m, &lm)?
                }
                FitModel::Lorentzian => fit_lorentzian_peaks(&read_trace_csv(open()?)?, peaks, &lm)?,
            };
            emit(output.as_deref(), fit.to_key_value().as_bytes())
        }
        Command::Run { scenario, out, pump_delay } => {
            let sc = scenarios::find(&scenario).ok_or_else(|| {
                Failure::config(format!("unknown scenario {scenario:?}; `kitune list` shows the registered ids"))
            })?;
            let outputs = sc.run(&cfg, &RunOptions { pump_delay })?;
            let meta = Meta {
                scenario: sc.id,
                figure: sc.figure,
                description: sc.description,
                seed: cfg.run.seed,
                files: outputs.iter().map(|o| o.name.clone()).collect(),
                config: &cfg,
            };
            for p in output::write_all(&out, &outputs, &meta)? {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}

/// Reads `I_A, I_B, fa, fb` from the first four columns of a tuning CSV.
fn read_tuning(file: std::fs::File) -> Result<Vec<TuningPoint<f64>>, Failure> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Failure::config(format!("tuning csv: {e}")))?;
        let num = |k: usize| -> Result<f64, Failure> {
            rec.get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Failure::config(format!("tuning csv: bad column {} in {:?}", k + 1, rec)))
        };
        rows.push(TuningPoint { ia: num(0)?, ib: num(1)?, fa: num(2)?, fb: num(3)?, dfa: 0.0, dfb: 0.0 });
    }
    Ok(rows)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("kitune: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
