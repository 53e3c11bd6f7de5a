use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;

use super::operators::{CMatrix, CVector};
use super::{complex, LevelLabel, SpinModel, SpinSystem};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Default field increment used while following levels from zero field.
pub const DEFAULT_LABEL_STEP: f64 = 1.0e-4;
const MIN_LABEL_STEP: f64 = 1.0e-10;
const MAX_FIELD: f64 = 1.0;

/// Eigenvalues sorted ascending with matching eigenvector columns.
///
/// Within numerically degenerate clusters the vectors are rotated to
/// diagonalize `Fz` (plus a small `F^2` admixture), which commutes with the
/// Hamiltonian. That makes the basis well defined at zero field and at
/// level crossings between different `m`.
#[derive(Clone, Debug)]
pub struct Eigensystem<T: Real> {
    pub bz: T,
    pub energies: Vec<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> Eigensystem<T> {
    pub fn new(model: &SpinModel<T>, bz: T) -> Self {
        let h = model.hamiltonian(bz);
        let n = h.nrows();
        let eig = SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut energies: Vec<T> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = CMatrix::<T>::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }

        let scale = energies
            .iter()
            .fold(T::zero(), |m, e| m.max(e.abs()))
            .max(T::one());
        let tol = scale * lit(1.0e-9);
        let resolver = cluster_resolver(model);

        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && energies[end] - energies[end - 1] <= tol {
                end += 1;
            }
            if end - start > 1 {
                resolve_cluster(&h, &resolver, &mut vectors, &mut energies, start, end);
            }
            start = end;
        }

        // Rayleigh quotients may reorder a resolved cluster by a few ulps.
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| energies[a].partial_cmp(&energies[b]).unwrap_or(std::cmp::Ordering::Equal));
        let sorted_e = idx.iter().map(|&k| energies[k]).collect();
        let mut sorted_v = CMatrix::<T>::zeros(n, n);
        for (dst, &src) in idx.iter().enumerate() {
            sorted_v.set_column(dst, &vectors.column(src));
        }

        Self {
            bz,
            energies: sorted_e,
            vectors: sorted_v,
        }
    }
}

/// `Fz + eps F^2` with eps small enough that distinct (F, m) stay distinct.
fn cluster_resolver<T: Real>(model: &SpinModel<T>) -> CMatrix<T> {
    let ops = &model.ops;
    let fmax = (ops.twice_s + ops.twice_i) as f64 / 2.0;
    let eps = 0.25 / (fmax * (fmax + 1.0) + 1.0);
    ops.fz() + ops.f_squared() * complex(lit::<T>(eps))
}

fn resolve_cluster<T: Real>(
    h: &CMatrix<T>,
    resolver: &CMatrix<T>,
    vectors: &mut CMatrix<T>,
    energies: &mut [T],
    start: usize,
    end: usize,
) {
    let sub = vectors.columns(start, end - start).into_owned();
    let restricted = sub.adjoint() * resolver * &sub;
    let restricted = (&restricted + restricted.adjoint()) * complex(lit::<T>(0.5));
    let eig = SymmetricEigen::new(restricted);
    let rotated = &sub * &eig.eigenvectors;
    for k in 0..(end - start) {
        let col = rotated.column(k).into_owned();
        let e = (col.adjoint() * h * &col)[(0, 0)].re;
        vectors.set_column(start + k, &col);
        energies[start + k] = e;
    }
}

fn expectation<T: Real>(op: &CMatrix<T>, v: &CMatrix<T>, k: usize) -> T {
    let col = v.column(k);
    (col.adjoint() * op * col)[(0, 0)].re
}

/// Energy levels at a field with adiabatic `|F, m>` labels.
#[derive(Clone, Debug)]
pub struct LabeledSpectrum<T: Real> {
    pub bz: T,
    /// Ascending eigenfrequencies (Hz).
    pub energies: Vec<T>,
    pub labels: Vec<LevelLabel>,
    /// Columns are eigenvectors in the `|mS, mI>` product basis.
    pub eigenvectors: CMatrix<T>,
}

impl<T: Real> LabeledSpectrum<T> {
    /// Zero-field spectrum labeled by the exact `F` and `m` quantum numbers.
    pub fn zero_field(model: &SpinModel<T>) -> Result<Self> {
        let eig = Eigensystem::new(model, T::zero());
        let f2 = model.ops.f_squared();
        let fz = model.ops.fz();
        let n = eig.energies.len();
        let mut labels = Vec::with_capacity(n);
        for k in 0..n {
            let x = expectation(&f2, &eig.vectors, k).to_f64_lossy();
            let f = (-1.0 + (1.0 + 4.0 * x).sqrt()) / 2.0;
            let m = expectation(&fz, &eig.vectors, k).to_f64_lossy();
            let twice_f = (2.0 * f).round();
            let twice_m = (2.0 * m).round();
            if (2.0 * f - twice_f).abs() > 1e-6 || (2.0 * m - twice_m).abs() > 1e-6 {
                return Err(Error::LabelingFailure {
                    field: 0.0,
                    reason: format!("level {k} is not an F/m eigenstate (F={f}, m={m})"),
                });
            }
            labels.push(LevelLabel::from_twice(twice_f as i32, twice_m as i32));
        }
        let spec = Self {
            bz: T::zero(),
            energies: eig.energies,
            labels,
            eigenvectors: eig.vectors,
        };
        spec.check_labels(model)?;
        Ok(spec)
    }

    fn check_labels(&self, model: &SpinModel<T>) -> Result<()> {
        let mut expected = Vec::new();
        let (ts, ti) = (model.ops.twice_s as i32, model.ops.twice_i as i32);
        let mut tf = (ts - ti).abs();
        while tf <= ts + ti {
            let mut tm = -tf;
            while tm <= tf {
                expected.push(LevelLabel::from_twice(tf, tm));
                tm += 2;
            }
            tf += 2;
        }
        let mut got = self.labels.clone();
        got.sort();
        expected.sort();
        if got != expected {
            return Err(Error::LabelingFailure {
                field: self.bz.to_f64_lossy(),
                reason: "labels are not a permutation of the |F,m> set".into(),
            });
        }
        Ok(())
    }

    pub fn index_of(&self, label: LevelLabel) -> Option<usize> {
        self.labels.iter().position(|l| *l == label)
    }

    pub fn energy_of(&self, label: LevelLabel) -> Option<T> {
        self.index_of(label).map(|k| self.energies[k])
    }

    pub fn vector_of(&self, label: LevelLabel) -> Option<CVector<T>> {
        self.index_of(label)
            .map(|k| self.eigenvectors.column(k).into_owned())
    }

    /// Follows the labels from this spectrum to `target`.
    pub fn continue_to(&self, model: &SpinModel<T>, target: T) -> Result<Self> {
        self.continue_with_step(model, target, lit(DEFAULT_LABEL_STEP))
    }

    pub fn continue_with_step(&self, model: &SpinModel<T>, target: T, step: T) -> Result<Self> {
        if !target.is_finite() {
            return Err(Error::InvalidArgument("field must be finite".into()));
        }
        let max_step = step.abs();
        let min_step: T = lit(MIN_LABEL_STEP);
        let mut cur = self.clone();
        let mut h = max_step;
        while cur.bz != target {
            let remaining = target - cur.bz;
            let next_bz = if remaining.abs() <= h {
                target
            } else {
                cur.bz + h * remaining.signum()
            };
            let eig = Eigensystem::new(model, next_bz);
            match assign_by_overlap(&cur, &eig) {
                Some(next) => {
                    cur = next;
                    h = (h * lit(2.0)).min(max_step);
                }
                None => {
                    h *= lit(0.5);
                    if h < min_step {
                        return Err(Error::LabelingFailure {
                            field: next_bz.to_f64_lossy(),
                            reason: "no predecessor overlap above 0.5 even at minimum step".into(),
                        });
                    }
                }
            }
        }
        Ok(cur)
    }

    /// Checks unitarity of the eigenvector matrix.
    pub fn unitarity_error(&self) -> T {
        let n = self.eigenvectors.ncols();
        let prod = self.eigenvectors.adjoint() * &self.eigenvectors;
        let id = DMatrix::<Complex<T>>::identity(n, n);
        (prod - id).iter().fold(T::zero(), |m, z| m.max(z.norm_sqr().sqrt()))
    }
}

/// Matches each predecessor level to the new eigenvector with squared
/// overlap above 1/2; `None` when any level is ambiguous.
fn assign_by_overlap<T: Real>(prev: &LabeledSpectrum<T>, eig: &Eigensystem<T>) -> Option<LabeledSpectrum<T>> {
    let n = prev.energies.len();
    let overlaps = prev.eigenvectors.adjoint() * &eig.vectors;
    let half: T = lit(0.5);
    let mut labels = vec![None; n];
    for j in 0..n {
        let (best, prob) = (0..n)
            .map(|k| (k, overlaps[(j, k)].norm_sqr()))
            .fold((0, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if prob <= half || labels[best].is_some() {
            return None;
        }
        labels[best] = Some(prev.labels[j]);
    }
    let labels: Vec<LevelLabel> = labels.into_iter().collect::<Option<_>>()?;

    // Fix the gauge so each vector overlaps its predecessor with a real
    // positive amplitude.
    let mut vectors = eig.vectors.clone();
    for k in 0..n {
        let j = prev.index_of(labels[k])?;
        let ov = overlaps[(j, k)];
        let norm = ov.norm_sqr().sqrt();
        if norm > T::zero() {
            let phase = ov.conj() / complex(norm);
            let col = vectors.column(k) * phase;
            vectors.set_column(k, &col);
        }
    }
    Some(LabeledSpectrum {
        bz: eig.bz,
        energies: eig.energies.clone(),
        labels,
        eigenvectors: vectors,
    })
}

fn check_field<T: Real>(bz: T) -> Result<()> {
    if !bz.is_finite() || bz < T::zero() || bz > lit(MAX_FIELD) {
        return Err(Error::InvalidArgument(format!(
            "field {} T outside [0, {MAX_FIELD}] T",
            bz.to_f64_lossy()
        )));
    }
    Ok(())
}

/// Labeled spectrum at `bz`, obtained by stepping the field up from zero.
pub fn labeled_spectrum<T: Real>(system: &SpinSystem<T>, bz: T) -> Result<LabeledSpectrum<T>> {
    check_field(bz)?;
    let model = system.model();
    LabeledSpectrum::zero_field(&model)?.continue_to(&model, bz)
}

/// Labeled spectra at each field of an ascending sweep, continuing from one
/// point to the next.
pub fn labeled_sweep<T: Real>(system: &SpinSystem<T>, fields: &[T]) -> Result<Vec<LabeledSpectrum<T>>> {
    if fields.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("field sweep must be ascending".into()));
    }
    let model = system.model();
    let mut cur = LabeledSpectrum::zero_field(&model)?;
    let mut out = Vec::with_capacity(fields.len());
    for &b in fields {
        check_field(b)?;
        cur = cur.continue_to(&model, b)?;
        out.push(cur.clone());
    }
    Ok(out)
}
