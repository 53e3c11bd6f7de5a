use std::io::Write;

use super::operators::{CMatrix, CVector};
use super::{LabeledSpectrum, LevelLabel, SpinModel, SpinSystem};
use crate::error::Result;
use crate::io::{fmt_half, fmt_num};
use crate::scalar::{lit, Real};

/// Field step for the centered finite-difference `df/dB` (T).
pub const SENSITIVITY_STEP: f64 = 1.0e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransitionKind {
    /// Between the two hyperfine manifolds (microwave).
    Esr,
    /// Within one manifold (radio frequency).
    Nmr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition<T> {
    pub lower: LevelLabel,
    pub upper: LevelLabel,
    /// Hz, non-negative.
    pub frequency: T,
    /// `|<upper|Sx|lower>|`.
    pub dipole: T,
    /// `df/dB` in Hz/T.
    pub sensitivity: T,
    pub kind: TransitionKind,
}

impl<T: Real> Transition<T> {
    pub fn involves(&self, label: LevelLabel) -> bool {
        self.lower == label || self.upper == label
    }

    pub fn connects(&self, a: LevelLabel, b: LevelLabel) -> bool {
        (self.lower == a && self.upper == b) || (self.lower == b && self.upper == a)
    }
}

pub(crate) fn matrix_element<T: Real>(op: &CMatrix<T>, a: &CVector<T>, b: &CVector<T>) -> T {
    (a.adjoint() * op * b)[(0, 0)].norm_sqr().sqrt()
}

/// All `|dm| = 1` transitions of the requested kind (or all when `kind` is
/// `None`), sorted by frequency.
pub fn transitions<T: Real>(
    system: &SpinSystem<T>,
    spectrum: &LabeledSpectrum<T>,
    kind: Option<TransitionKind>,
) -> Result<Vec<Transition<T>>> {
    let model = system.model();
    transitions_with_model(&model, spectrum, kind)
}

pub(crate) fn transitions_with_model<T: Real>(
    model: &SpinModel<T>,
    spectrum: &LabeledSpectrum<T>,
    kind: Option<TransitionKind>,
) -> Result<Vec<Transition<T>>> {
    let h: T = lit(SENSITIVITY_STEP);
    let plus = spectrum.continue_to(model, spectrum.bz + h)?;
    let minus = spectrum.continue_to(model, spectrum.bz - h)?;
    let n = spectrum.labels.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let (la, lb) = (spectrum.labels[a], spectrum.labels[b]);
            if (la.twice_m - lb.twice_m).abs() != 2 {
                continue;
            }
            let this_kind = if la.twice_f == lb.twice_f {
                TransitionKind::Nmr
            } else {
                TransitionKind::Esr
            };
            if kind.is_some_and(|k| k != this_kind) {
                continue;
            }
            // energies are ascending, so a is the lower level
            let gap = |s: &LabeledSpectrum<T>| -> T {
                s.energy_of(lb).expect("label present") - s.energy_of(la).expect("label present")
            };
            let frequency = spectrum.energies[b] - spectrum.energies[a];
            let sensitivity = (gap(&plus) - gap(&minus)) / (h + h);
            let dipole = matrix_element(
                &model.ops.sx,
                &spectrum.eigenvectors.column(b).into_owned(),
                &spectrum.eigenvectors.column(a).into_owned(),
            );
            out.push(Transition {
                lower: la,
                upper: lb,
                frequency,
                dipole,
                sensitivity,
                kind: this_kind,
            });
        }
    }
    out.sort_by(|x, y| x.frequency.partial_cmp(&y.frequency).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Homogeneous linewidth from field noise: `|df/dB| * delta_b0` (Hz).
pub fn linewidth_estimate<T: Real>(transition: &Transition<T>, delta_b0: T) -> T {
    transition.sensitivity.abs() * delta_b0
}

/// Writes `(Bz_T, F_lower, m_lower, F_upper, m_upper, freq_Hz, dipole,
/// dfdB_Hz_per_T)` rows.
pub fn write_transitions_csv<T: Real, W: Write>(
    out: W,
    rows: &[(T, Transition<T>)],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "Bz_T",
        "F_lower",
        "m_lower",
        "F_upper",
        "m_upper",
        "freq_Hz",
        "dipole",
        "dfdB_Hz_per_T",
    ])?;
    for (bz, t) in rows {
        w.write_record([
            fmt_num(bz.to_f64_lossy()),
            fmt_half(t.lower.twice_f),
            fmt_half(t.lower.twice_m),
            fmt_half(t.upper.twice_f),
            fmt_half(t.upper.twice_m),
            fmt_num(t.frequency.to_f64_lossy()),
            fmt_num(t.dipole.to_f64_lossy()),
            fmt_num(t.sensitivity.to_f64_lossy()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::labeled_spectrum;

    #[test]
    fn zero_field_esr_is_single_line() {
        let sys = SpinSystem::<f64>::bismuth();
        let spec = labeled_spectrum(&sys, 0.0).unwrap();
        let esr = transitions(&sys, &spec, Some(TransitionKind::Esr)).unwrap();
        assert!(!esr.is_empty());
        for t in &esr {
            assert!((t.frequency - 5.0 * sys.hyperfine).abs() < 1e-3, "{}", t.frequency);
        }
    }

    #[test]
    fn dipoles_bounded_and_kinds_consistent() {
        let sys = SpinSystem::<f64>::bismuth();
        let spec = labeled_spectrum(&sys, 0.0135).unwrap();
        let all = transitions(&sys, &spec, None).unwrap();
        // 18 Esr-like and 18 Nmr-like dm = 1 pairs
        let esr = all.iter().filter(|t| t.kind == TransitionKind::Esr).count();
        let nmr = all.iter().filter(|t| t.kind == TransitionKind::Nmr).count();
        assert_eq!((esr, nmr), (18, 18));
        for t in &all {
            assert!(t.frequency >= 0.0);
            assert!(t.dipole >= 0.0 && t.dipole <= 5.0);
            assert_eq!((t.lower.twice_m - t.upper.twice_m).abs(), 2);
        }
    }

    #[test]
    fn linewidth_is_linear_in_noise() {
        let t = Transition::<f64> {
            lower: LevelLabel::new(4, 0),
            upper: LevelLabel::new(5, 1),
            frequency: 7.4e9,
            dipole: 0.4,
            sensitivity: -28.0e9,
            kind: TransitionKind::Esr,
        };
        let g1 = linewidth_estimate(&t, 4e-6);
        let g2 = linewidth_estimate(&t, 8e-6);
        assert!((g1 - 112.0e3).abs() < 1e-6);
        assert!((g2 - 2.0 * g1).abs() < 1e-9);
    }

    #[test]
    fn csv_layout() {
        let t = Transition::<f64> {
            lower: LevelLabel::new(4, 0),
            upper: LevelLabel::new(5, -1),
            frequency: 7.3382e9,
            dipole: 0.5,
            sensitivity: 0.0,
            kind: TransitionKind::Esr,
        };
        let mut buf = Vec::new();
        write_transitions_csv(&mut buf, &[(0.0256, t)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "Bz_T,F_lower,m_lower,F_upper,m_upper,freq_Hz,dipole,dfdB_Hz_per_T"
        );
        assert_eq!(
            lines.next().unwrap(),
            "2.56000000000e-2,4,0,5,-1,7.33820000000e9,5.00000000000e-1,0.00000000000e0"
        );
    }
}
