//! Kinetic-inductance tuning and quantization of the two-mode circuit:
//! resonator A (microwire `La`, capacitor `Ca`), resonator B (`Lb`, `Cb`)
//! and the shared kinetic-inductance coupler `Lc` carrying `I_A + I_B`.

pub mod closed_form;
mod inductor;
pub mod quantize;

use std::io::Write;

pub use inductor::{resonance_frequency, KineticInductor};
pub use quantize::{inversion_residual, kinetic_lagrangian, quantize_series, InductiveElements, QuantizedSeries};

use crate::error::{Error, Result};
use crate::io::fmt_num;
use crate::scalar::{lit, Real};
use crate::series::TruncatedSeries;

/// Characteristic impedance used to convert pump power into current (Ω).
pub const Z0: f64 = 50.0;

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitNetlist<T> {
    /// Microwire A.
    pub inductor_a: KineticInductor<T>,
    /// Kinetic-inductance coupler.
    pub inductor_c: KineticInductor<T>,
    /// Linear inductance of microwire B (H).
    pub lb: T,
    pub ca: T,
    pub cb: T,
    /// DC bias `(I_A, I_B)` in A.
    pub bias: (T, T),
}

impl<T: Real> CircuitNetlist<T> {
    /// Fitted device at zero bias with capacitances chosen so that the
    /// modes sit at `fa` and `fb`.
    pub fn device_with_frequencies(fa: T, fb: T) -> Result<Self> {
        let inductor_a = KineticInductor::new(lit(65e-12), lit(0.9e-9), lit(9.53e-3), lit(0.3))?;
        let inductor_c = KineticInductor::new(lit(2e-12), T::zero(), lit(5.73e-3), lit(0.3))?;
        let mut net = Self {
            inductor_a,
            inductor_c,
            lb: lit(1.2e-9),
            ca: T::one(),
            cb: T::one(),
            bias: (T::zero(), T::zero()),
        };
        net.set_capacitances_for(fa, fb)?;
        Ok(net)
    }

    /// Default device: `f_A = 7.422 GHz`, `f_B = 6.605 GHz` at zero bias.
    pub fn device() -> Self {
        Self::device_with_frequencies(lit(7.422e9), lit(6.605e9)).expect("default device is valid")
    }

    /// Chooses `Ca`, `Cb` so that the dressed modes at zero bias are at
    /// `fa` and `fb`.
    pub fn set_capacitances_for(&mut self, fa: T, fb: T) -> Result<()> {
        if !(fa > T::zero() && fb > T::zero()) {
            return Err(Error::InvalidArgument("target frequencies must be positive".into()));
        }
        let zero = self.with_bias(T::zero(), T::zero());
        let el = zero.elements()?;
        let (lta, ltb) = closed_form::dressed_inductances(el.la0, el.lb, el.lc0);
        let w = |f: T| T::two_pi() * f;
        self.ca = T::one() / (w(fa).powi(2) * lta);
        self.cb = T::one() / (w(fb).powi(2) * ltb);
        Ok(())
    }

    pub fn with_bias(&self, ia: T, ib: T) -> Self {
        Self {
            bias: (ia, ib),
            ..self.clone()
        }
    }

    /// DC current through the coupler.
    pub fn kic_current(&self) -> T {
        self.bias.0 + self.bias.1
    }

    pub fn validate(&self) -> Result<()> {
        self.inductor_a.validate()?;
        self.inductor_c.validate()?;
        for (name, v) in [("Lb", self.lb), ("Ca", self.ca), ("Cb", self.cb)] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Inductive element values at the current bias point.
    pub fn elements(&self) -> Result<InductiveElements<T>> {
        self.validate()?;
        let (ia, _) = self.bias;
        let ic = self.kic_current();
        let a = &self.inductor_a;
        let c = &self.inductor_c;
        let ca = a.expansion_coeffs(ia)?.map(|x| x * a.lk0);
        let cn = c.expansion_coeffs(ic)?.map(|x| x * c.lk0);
        Ok(InductiveElements {
            la0: a.kinetic_inductance(ia)?,
            lb: self.lb,
            lc0: c.kinetic_inductance(ic)?,
            coeffs_a: ca,
            coeffs_c: cn,
        })
    }

    /// Dressed mode frequencies `(fa, fb)` at the current bias.
    pub fn mode_frequencies(&self) -> Result<(T, T)> {
        let el = self.elements()?;
        let (lta, ltb) = closed_form::dressed_inductances(el.la0, el.lb, el.lc0);
        Ok((resonance_frequency(lta, self.ca)?, resonance_frequency(ltb, self.cb)?))
    }
}

impl Default for CircuitNetlist<f64> {
    fn default() -> Self {
        Self::device()
    }
}

/// Hamiltonian coefficients of the quantized circuit at one bias point.
#[derive(Clone, Debug)]
pub struct CouplingSet<T: Real> {
    pub ltilde_a: T,
    pub ltilde_b: T,
    /// Ω
    pub za: T,
    pub zb: T,
    /// Hz
    pub fa: T,
    pub fb: T,
    /// Coefficients of `Phi_a^i Phi_b^j` in the inductive energy (SI).
    pub g11: T,
    pub g21: T,
    pub g12: T,
    pub g30: T,
    pub g03: T,
    /// Coupler participation `Lk0_c / sqrt(Ltilde_a Ltilde_b)`.
    pub k: T,
    /// Coupler critical current (A).
    pub kic_istar: T,
    /// DC current through the coupler (A).
    pub kic_current: T,
    /// Conversion rate (s^-1, angular); zero until a pump is applied.
    pub g3wm: T,
    /// Pump-induced loss of mode A (s^-1); zero until a pump is applied.
    pub induced_loss: T,
    /// Inductive energy as a truncated series in `(Phi_a, Phi_b)`.
    pub hamiltonian: TruncatedSeries<T>,
}

impl<T: Real> CouplingSet<T> {
    /// Fills `g3wm` and `induced_loss` for a pump current `irf` through the
    /// coupler and a buffer linewidth `kappa_b`.
    pub fn pumped(&self, irf: T, kappa_b: T) -> Result<Self> {
        let g = three_wave_coupling(self, self.kic_current, irf)?;
        let loss = induced_loss(g, kappa_b)?;
        Ok(Self {
            g3wm: g,
            induced_loss: loss,
            ..self.clone()
        })
    }
}

/// Quantizes the circuit at its bias point, truncating at `order`.
pub fn quantize_circuit<T: Real>(netlist: &CircuitNetlist<T>, order: u32) -> Result<CouplingSet<T>> {
    let el = netlist.elements()?;
    let q = quantize_series(&el, order)?;
    let h = q.hamiltonian;
    let two: T = lit(2.0);
    let quad_a = h.coefficient(&[2, 0]);
    let quad_b = h.coefficient(&[0, 2]);
    if !(quad_a > T::zero() && quad_b > T::zero()) {
        return Err(Error::DegenerateCircuit(
            "inductive energy is not positive definite".into(),
        ));
    }
    let ltilde_a = T::one() / (two * quad_a);
    let ltilde_b = T::one() / (two * quad_b);
    let za = (ltilde_a / netlist.ca).sqrt();
    let zb = (ltilde_b / netlist.cb).sqrt();
    Ok(CouplingSet {
        ltilde_a,
        ltilde_b,
        za,
        zb,
        fa: resonance_frequency(ltilde_a, netlist.ca)?,
        fb: resonance_frequency(ltilde_b, netlist.cb)?,
        g11: h.coefficient(&[1, 1]),
        g21: h.coefficient(&[2, 1]),
        g12: h.coefficient(&[1, 2]),
        g30: h.coefficient(&[3, 0]),
        g03: h.coefficient(&[0, 3]),
        k: netlist.inductor_c.lk0 / (ltilde_a * ltilde_b).sqrt(),
        kic_istar: netlist.inductor_c.istar,
        kic_current: netlist.kic_current(),
        g3wm: T::zero(),
        induced_loss: T::zero(),
        hamiltonian: h,
    })
}

/// `g3wm = 12 k (Idc Irf / I*^2) sqrt(wa wb)` in s^-1 (angular), with
/// `Idc` the total coupler bias.
pub fn three_wave_coupling<T: Real>(couplings: &CouplingSet<T>, idc: T, irf: T) -> Result<T> {
    let istar = couplings.kic_istar;
    if !idc.is_finite() || idc.abs() >= istar {
        return Err(Error::BeyondCriticalCurrent {
            current: idc.to_f64_lossy(),
            istar: istar.to_f64_lossy(),
        });
    }
    if !(irf >= T::zero() && irf.is_finite()) {
        return Err(Error::InvalidArgument("pump current must be non-negative".into()));
    }
    let wa = T::two_pi() * couplings.fa;
    let wb = T::two_pi() * couplings.fb;
    Ok(lit::<T>(12.0) * couplings.k * idc * irf / (istar * istar) * (wa * wb).sqrt())
}

/// Extra decay of mode A through the buffer, `4 g^2 / kappa_b`.
pub fn induced_loss<T: Real>(g3wm: T, kappa_b: T) -> Result<T> {
    if !(kappa_b > T::zero()) {
        return Err(Error::InvalidArgument("kappa_b must be positive".into()));
    }
    Ok(lit::<T>(4.0) * g3wm * g3wm / kappa_b)
}

/// Pump current `sqrt(P * attenuation / Z0)` for an input power `p_in` (W)
/// and a linear power transmission `attenuation` to the device.
pub fn pump_current<T: Real>(p_in: T, attenuation: T, z0: T) -> Result<T> {
    if !(p_in >= T::zero() && attenuation >= T::zero() && z0 > T::zero()) {
        return Err(Error::InvalidArgument(
            "pump power and attenuation must be non-negative, Z0 positive".into(),
        ));
    }
    Ok((p_in * attenuation / z0).sqrt())
}

/// Converts dBm to W.
pub fn dbm_to_watts<T: Real>(dbm: T) -> T {
    lit::<T>(1e-3) * lit::<T>(10.0).powf(dbm / lit(10.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TuningPoint<T> {
    pub ia: T,
    pub ib: T,
    pub fa: T,
    pub fb: T,
    /// Shifts from the zero-bias frequencies (Hz).
    pub dfa: T,
    pub dfb: T,
}

/// Frequency shifts for an `I_A` sweep at `I_B = 0` followed by an `I_B`
/// sweep at `I_A = 0`.
pub fn tuning_curve<T: Real>(
    netlist: &CircuitNetlist<T>,
    ia_sweep: &[T],
    ib_sweep: &[T],
) -> Result<Vec<TuningPoint<T>>> {
    let points: Vec<(T, T)> = ia_sweep
        .iter()
        .map(|&ia| (ia, T::zero()))
        .chain(ib_sweep.iter().map(|&ib| (T::zero(), ib)))
        .collect();
    tuning_points(netlist, &points)
}

/// Frequency shifts at arbitrary `(I_A, I_B)` bias points.
pub fn tuning_points<T: Real>(netlist: &CircuitNetlist<T>, points: &[(T, T)]) -> Result<Vec<TuningPoint<T>>> {
    let (fa0, fb0) = netlist.with_bias(T::zero(), T::zero()).mode_frequencies()?;
    points
        .iter()
        .map(|&(ia, ib)| {
            let (fa, fb) = netlist.with_bias(ia, ib).mode_frequencies()?;
            Ok(TuningPoint {
                ia,
                ib,
                fa,
                fb,
                dfa: fa - fa0,
                dfb: fb - fb0,
            })
        })
        .collect()
}

pub fn write_tuning_csv<T: Real, W: Write>(out: W, rows: &[TuningPoint<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["I_A_A", "I_B_A", "fa_Hz", "fb_Hz", "dfa_Hz", "dfb_Hz"])?;
    for r in rows {
        w.write_record([r.ia, r.ib, r.fa, r.fb, r.dfa, r.dfb].map(|x| fmt_num(x.to_f64_lossy())))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_couplings_csv<T: Real, W: Write>(out: W, rows: &[CouplingSet<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "I_kic_A",
        "Ltilde_a_H",
        "Ltilde_b_H",
        "Za_Ohm",
        "Zb_Ohm",
        "fa_Hz",
        "fb_Hz",
        "g11",
        "g21",
        "g12",
        "g30",
        "g03",
        "k",
        "g3wm_per_s",
        "induced_loss_per_s",
    ])?;
    for c in rows {
        let vals = [
            c.kic_current,
            c.ltilde_a,
            c.ltilde_b,
            c.za,
            c.zb,
            c.fa,
            c.fb,
            c.g11,
            c.g21,
            c.g12,
            c.g30,
            c.g03,
            c.k,
            c.g3wm,
            c.induced_loss,
        ];
        w.write_record(vals.map(|x| fmt_num(x.to_f64_lossy())))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device_frequencies() {
        let net = CircuitNetlist::<f64>::device();
        let (fa, fb) = net.mode_frequencies().unwrap();
        assert!((fa - 7.422e9).abs() < 1.0);
        assert!((fb - 6.605e9).abs() < 1.0);
        let cs = quantize_circuit(&net, 3).unwrap();
        assert!((cs.fa - fa).abs() < 1e-3);
        // no bias: every cubic term vanishes
        for g in [cs.g21, cs.g12, cs.g30, cs.g03] {
            assert_eq!(g, 0.0);
        }
    }

    #[test]
    fn beyond_critical_bias_propagates() {
        let net = CircuitNetlist::<f64>::device();
        // each wire is fine on its own, the coupler carries the sum
        let r = tuning_curve(&net.with_bias(0.0, 0.0), &[], &[6e-3]);
        assert!(matches!(r, Err(Error::BeyondCriticalCurrent { .. })));
    }

    #[test]
    fn loss_and_pump_arithmetic() {
        let l: f64 = induced_loss(1.0e5, 3.17e7).unwrap();
        assert!((l - 4.0e10 / 3.17e7).abs() < 1e-9);
        assert!(induced_loss(1.0, 0.0).is_err());
        let i: f64 = pump_current(2e-3, 1.0, Z0).unwrap();
        assert!((i - (2e-3f64 / 50.0).sqrt()).abs() < 1e-18);
        assert!((dbm_to_watts(0.0f64) - 1e-3).abs() < 1e-18);
    }
}
