//! Run configuration: one TOML section per module, every value optional.
//! Defaults are the measured device and bismuth-donor constants.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use kitune::{CircuitNetlist, KineticInductor, ModePair, SpinSystem};

use crate::failure::Failure;

#[derive(Clone, Debug, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunSection,
    pub spin: SpinSection,
    pub circuit: CircuitSection,
    pub modes: ModesSection,
    pub pump: PumpSection,
    pub ringdown: RingdownSection,
    pub s11: S11Section,
    pub absorption: AbsorptionSection,
    pub echo: EchoSection,
    pub endor: EndorSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Seed for every synthetic-noise draw.
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinSection {
    pub s: f64,
    pub i: f64,
    /// Hz/T
    pub gamma_e: f64,
    pub gamma_n: f64,
    /// Hz
    pub hyperfine: f64,
    /// Field noise for linewidth estimates (T).
    pub delta_b0: f64,
    /// K
    pub temperature: f64,
    pub bz_max: f64,
    pub bz_step: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitSection {
    pub lk0_a: f64,
    pub lg_a: f64,
    pub istar_a: f64,
    pub alpha_a: f64,
    pub lk0_c: f64,
    pub lg_c: f64,
    pub istar_c: f64,
    pub alpha_c: f64,
    pub lb: f64,
    /// Zero-bias mode frequencies; the capacitances are solved from them.
    pub fa: f64,
    pub fb: f64,
    pub order: u32,
    /// Largest bias current of a tuning sweep (A).
    pub sweep_max: f64,
    pub sweep_points: usize,
    /// Bias offsets of the other line (A).
    pub offsets: Vec<f64>,
    /// Relative frequency noise on synthetic tuning data.
    pub noise: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModesSection {
    pub fa: f64,
    pub fb: f64,
    /// s^-1
    pub kappa_ca: f64,
    pub kappa_ia: f64,
    pub kappa_cb: f64,
    pub kappa_ib: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PumpSection {
    /// Conversion rate used by the pumped-reflection maps (s^-1).
    pub g3wm: f64,
    /// Pump-frequency half span around `fa - fb` (Hz).
    pub pump_span: f64,
    pub pump_points: usize,
    pub probe_points: usize,
    /// Probe half span in units of the pumped linewidth.
    pub probe_span: f64,
    /// Largest pump current through the coupler (A).
    pub irf_max: f64,
    pub irf_points: usize,
    /// Coupler DC biases through line B (A).
    pub ib_biases: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RingdownSection {
    /// Length of the resonant drive (s).
    pub drive: f64,
    /// Input field amplitude (sqrt(photons/s)).
    pub amplitude: f64,
    /// Pump delays after the drive ends (s).
    pub delays: Vec<f64>,
    pub pump_duration: f64,
    pub g3wm: f64,
    /// Observation window after the drive and its sampling step (s).
    pub window: f64,
    pub step: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct S11Section {
    pub points: usize,
    /// Half span in linewidths.
    pub half_span: f64,
    /// Complex noise relative to the background amplitude.
    pub noise: f64,
    pub amplitude: f64,
    pub phase: f64,
    /// Cable delay (s).
    pub delay: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbsorptionSection {
    pub scale: f64,
    pub delta_b0: f64,
    pub extra_width: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub f_step: f64,
    pub bz_min: f64,
    pub bz_max: f64,
    pub bz_step: f64,
    /// Field of the single-cut spectrum (T).
    pub bz_cut: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EchoSection {
    pub bz: f64,
    /// Gaussian FWHM of the spin line (Hz).
    pub linewidth: f64,
    pub t1: f64,
    pub t2: f64,
    /// Hahn delay (s) and pulse length (s).
    pub tau: f64,
    pub pulse: f64,
    /// Resonator span of the echo spectrum around `f_center` (Hz).
    pub f_center: f64,
    pub f_span: f64,
    pub f_points: usize,
    /// Inversion-recovery waits (s).
    pub wait_max: f64,
    pub wait_points: usize,
    /// Largest `2 tau` of the decay scan (s).
    pub decay_max: f64,
    pub decay_points: usize,
    /// Proportional noise on synthetic echo amplitudes.
    pub noise: f64,
    /// Largest resonator detuning of the silencing scan (Hz).
    pub detuning_max: f64,
    pub detuning_points: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EndorSection {
    pub bz: f64,
    pub rf_area: f64,
    pub delta_b0: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { seed: 1 }
    }
}

impl Default for SpinSection {
    fn default() -> Self {
        Self {
            s: 0.5,
            i: 4.5,
            gamma_e: -28.0e9,
            gamma_n: 8.0e6,
            hyperfine: 1.47507e9,
            delta_b0: 4e-6,
            temperature: 10e-3,
            bz_max: 65e-3,
            bz_step: 0.5e-3,
        }
    }
}

impl Default for CircuitSection {
    fn default() -> Self {
        Self {
            lk0_a: 65e-12,
            lg_a: 0.9e-9,
            istar_a: 9.53e-3,
            alpha_a: 0.3,
            lk0_c: 2e-12,
            lg_c: 0.0,
            istar_c: 5.73e-3,
            alpha_c: 0.3,
            lb: 1.2e-9,
            fa: 7.422e9,
            fb: 6.605e9,
            order: 3,
            sweep_max: 5.0e-3,
            sweep_points: 41,
            offsets: vec![-0.5e-3, 0.0, 0.5e-3],
            noise: 1e-3,
        }
    }
}

impl Default for ModesSection {
    fn default() -> Self {
        Self {
            fa: 7.422e9,
            fb: 6.605e9,
            kappa_ca: 9.4e4,
            kappa_ia: 7.5e5,
            kappa_cb: 2.6e7,
            kappa_ib: 5.7e6,
        }
    }
}

impl Default for PumpSection {
    fn default() -> Self {
        Self {
            g3wm: 3e6,
            pump_span: 30e6,
            pump_points: 121,
            probe_points: 201,
            probe_span: 3.0,
            irf_max: 50e-6,
            irf_points: 11,
            ib_biases: vec![1e-3, 2e-3, 3e-3],
        }
    }
}

impl Default for RingdownSection {
    fn default() -> Self {
        Self {
            drive: 5e-6,
            amplitude: 1.0,
            delays: vec![0.0, 1e-6, 2e-6, 3e-6, 4e-6],
            pump_duration: 20e-6,
            g3wm: 1.5e6,
            window: 8e-6,
            step: 10e-9,
        }
    }
}

impl Default for S11Section {
    fn default() -> Self {
        Self {
            points: 8001,
            half_span: 3.0,
            noise: 0.01,
            amplitude: 0.8,
            phase: 0.4,
            delay: 3e-9,
        }
    }
}

impl Default for AbsorptionSection {
    fn default() -> Self {
        Self {
            scale: 1e10,
            delta_b0: 4e-6,
            extra_width: 300e3,
            f_min: 7.342e9,
            f_max: 7.422e9,
            f_step: 0.2e6,
            bz_min: 0.0,
            bz_max: 65e-3,
            bz_step: 0.5e-3,
            bz_cut: 2.1e-3,
        }
    }
}

impl Default for EchoSection {
    fn default() -> Self {
        Self {
            bz: 25.6e-3,
            linewidth: 90e3,
            t1: 53.0,
            t2: 0.45,
            tau: 10e-3,
            pulse: 2e-6,
            f_center: 7.3382e9,
            f_span: 2e6,
            f_points: 401,
            wait_max: 250.0,
            wait_points: 40,
            decay_max: 1.5,
            decay_points: 30,
            noise: 0.02,
            detuning_max: 5e6,
            detuning_points: 51,
        }
    }
}

impl Default for EndorSection {
    fn default() -> Self {
        Self {
            bz: 13.49e-3,
            rf_area: 1.0,
            delta_b0: 4e-6,
            f_min: 36.9e6,
            f_max: 38.2e6,
            points: 2601,
        }
    }
}


/// Parses the right-hand side of `--set key=value` as a TOML value, and
/// as a bare string when it is not one.
fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

impl Config {
    /// Reads `path` (defaults when `None`) and applies `section.key=value`
    /// overrides. Every key must name an existing parameter.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, Failure> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::config(format!("cannot read config file {}: {e}", p.display())))?;
                let cfg: Config = toml::from_str(&text)
                    .map_err(|e| Failure::config(format!("config file {}: {e}", p.display())))?;
                Table::try_from(cfg).expect("config serializes")
            }
            None => Table::try_from(Config::default()).expect("defaults serialize"),
        };
        for ov in overrides {
            let (key, raw) = ov
                .split_once('=')
                .ok_or_else(|| Failure::config(format!("override {ov:?} is not of the form section.key=value")))?;
            let (section, name) = key
                .trim()
                .split_once('.')
                .ok_or_else(|| Failure::config(format!("override key {key:?} must be section.key")))?;
            let slot = table
                .get_mut(section)
                .and_then(Value::as_table_mut)
                .and_then(|t| t.get_mut(name))
                .ok_or_else(|| Failure::config(format!("unknown parameter {section}.{name}")))?;
            let mut value = parse_value(raw.trim());
            // integers are accepted where floats are expected
            if let (Value::Float(_), Value::Integer(i)) = (&*slot, &value) {
                value = Value::Float(*i as f64);
            }
            *slot = value;
        }
        Table::try_into(table).map_err(|e| Failure::config(format!("invalid override: {e}")))
    }
}

impl Config {
    pub fn spin_system(&self) -> Result<SpinSystem, Failure> {
        let s = &self.spin;
        Ok(SpinSystem::new(s.s, s.i, s.gamma_e, s.gamma_n, s.hyperfine)?)
    }

    /// Device netlist at zero bias with the capacitances solved for the
    /// configured mode frequencies.
    pub fn netlist(&self) -> Result<CircuitNetlist, Failure> {
        let c = &self.circuit;
        let mut net = CircuitNetlist {
            inductor_a: KineticInductor::new(c.lk0_a, c.lg_a, c.istar_a, c.alpha_a)?,
            inductor_c: KineticInductor::new(c.lk0_c, c.lg_c, c.istar_c, c.alpha_c)?,
            lb: c.lb,
            ca: 1.0,
            cb: 1.0,
            bias: (0.0, 0.0),
        };
        net.set_capacitances_for(c.fa, c.fb)?;
        Ok(net)
    }

    pub fn modes(&self) -> ModePair {
        let m = &self.modes;
        ModePair {
            fa: m.fa,
            fb: m.fb,
            kappa_ca: m.kappa_ca,
            kappa_ia: m.kappa_ia,
            kappa_cb: m.kappa_cb,
            kappa_ib: m.kappa_ib,
            g3wm: 0.0,
            delta_a: 0.0,
            delta_b: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_replace_values() {
        let c = Config::load(None, &["ringdown.g3wm=2e6".into(), "run.seed=9".into()]).unwrap();
        assert_eq!(c.ringdown.g3wm, 2e6);
        assert_eq!(c.run.seed, 9);
    }

    #[test]
    fn integer_literal_for_a_float() {
        let c = Config::load(None, &["echo.t1=60".into()]).unwrap();
        assert_eq!(c.echo.t1, 60.0);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let e = Config::load(None, &["echo.t3=1".into()]).unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("echo.t3"));
    }
}
