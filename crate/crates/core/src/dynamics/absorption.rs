use std::io::Write;

use super::ensemble::thermal_populations;
use crate::error::{Error, Result};
use crate::io::fmt_num;
use crate::scalar::{lit, Real};
use crate::spin::{labeled_sweep, transitions, SpinSystem, TransitionKind};

/// Spin-induced extra loss of mode A over a (frequency, field) grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AbsorptionModel<T> {
    /// Loss (s^-1) of a unit-dipole, fully polarised line integrated over 1 Hz.
    pub scale: T,
    /// Field noise for the homogeneous width (T).
    pub delta_b0: T,
    /// Width added to every line (Hz).
    pub extra_width: T,
    /// K
    pub temperature: T,
}

impl<T: Real> Default for AbsorptionModel<T> {
    fn default() -> Self {
        Self {
            scale: lit(1e10),
            delta_b0: lit(4e-6),
            extra_width: lit(300e3),
            temperature: lit(10e-3),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsorptionPoint<T> {
    /// Hz
    pub f: T,
    /// T
    pub bz: T,
    /// s^-1
    pub dkappa: T,
}

/// Lorentzian of FWHM `width` centred on `f0`, averaged over `[lo, hi]`.
fn bin_lorentzian<T: Real>(f0: T, width: T, lo: T, hi: T) -> T {
    let g = width * lit(0.5);
    (((hi - f0) / g).atan() - ((lo - f0) / g).atan()) / (T::pi() * (hi - lo))
}

/// `dkappa(f, B) = scale * sum dipole^2 * dp * L(f)` over the microwave
/// transitions, each line bin-averaged over the frequency step so that
/// lines narrower than the grid are not lost. `freqs` and `fields` must be
/// ascending with at least two frequencies.
pub fn absorption_map<T: Real>(
    system: &SpinSystem<T>,
    model: &AbsorptionModel<T>,
    freqs: &[T],
    fields: &[T],
) -> Result<Vec<AbsorptionPoint<T>>> {
    if freqs.len() < 2 || freqs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("need an ascending frequency grid of two or more points".into()));
    }
    if !(model.extra_width + model.delta_b0 > T::zero()) {
        return Err(Error::InvalidArgument("lines need a positive width".into()));
    }
    let spectra = labeled_sweep(system, fields)?;
    let half: T = lit(0.5);
    let n = freqs.len();
    let edge = |k: usize| -> (T, T) {
        let lo = if k == 0 { freqs[0] - (freqs[1] - freqs[0]) * half } else { (freqs[k - 1] + freqs[k]) * half };
        let hi = if k + 1 == n { freqs[n - 1] + (freqs[n - 1] - freqs[n - 2]) * half } else { (freqs[k] + freqs[k + 1]) * half };
        (lo, hi)
    };
    let mut out = Vec::with_capacity(n * fields.len());
    for spec in &spectra {
        let pops = thermal_populations(spec, model.temperature)?;
        let lines: Vec<(T, T, T)> = transitions(system, spec, Some(TransitionKind::Esr))?
            .into_iter()
            .map(|t| {
                let a = spec.index_of(t.lower).expect("label present");
                let b = spec.index_of(t.upper).expect("label present");
                let weight = t.dipole * t.dipole * (pops[a] - pops[b]);
                let width = t.sensitivity.abs() * model.delta_b0 + model.extra_width;
                (t.frequency, width, weight)
            })
            .collect();
        for (k, &f) in freqs.iter().enumerate() {
            let (lo, hi) = edge(k);
            let dk = lines
                .iter()
                .fold(T::zero(), |s, &(f0, w, a)| s + a * bin_lorentzian(f0, w, lo, hi));
            out.push(AbsorptionPoint {
                f,
                bz: spec.bz,
                dkappa: dk * model.scale,
            });
        }
    }
    Ok(out)
}

pub fn write_absorption_csv<T: Real, W: Write>(out: W, rows: &[AbsorptionPoint<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["f_Hz", "Bz_T", "dkappa_per_s"])?;
    for p in rows {
        w.write_record([
            fmt_num(p.f.to_f64_lossy()),
            fmt_num(p.bz.to_f64_lossy()),
            fmt_num(p.dkappa.to_f64_lossy()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
