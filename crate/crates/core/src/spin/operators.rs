use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Validates a spin quantum number and returns `2j`.
pub fn twice_spin(j: f64) -> Result<u32> {
    let twice = 2.0 * j;
    if !j.is_finite() || j < 0.0 || (twice - twice.round()).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "spin quantum number {j} is not a non-negative half-integer"
        )));
    }
    Ok(twice.round() as u32)
}

/// `(Jx, Jy, Jz)` for a single spin `j = twice_j / 2` in the basis
/// `m = j, j-1, ..., -j`.
pub fn single_spin<T: Real>(twice_j: u32) -> [CMatrix<T>; 3] {
    let dim = twice_j as usize + 1;
    let j = twice_j as f64 / 2.0;
    let m = |k: usize| j - k as f64;

    let mut jz = CMatrix::<T>::zeros(dim, dim);
    let mut jplus = CMatrix::<T>::zeros(dim, dim);
    for k in 0..dim {
        jz[(k, k)] = Complex::new(lit(m(k)), T::zero());
        if k + 1 < dim {
            // <m+1| J+ |m> with |m> = column k+1
            let mk = m(k + 1);
            let amp = (j * (j + 1.0) - mk * (mk + 1.0)).sqrt();
            jplus[(k, k + 1)] = Complex::new(lit(amp), T::zero());
        }
    }
    let jminus = jplus.adjoint();
    let half = Complex::new(lit::<T>(0.5), T::zero());
    let jx = (&jplus + &jminus) * half;
    // (J+ - J-) / 2i = -i/2 (J+ - J-)
    let jy = (&jplus - &jminus) * Complex::new(T::zero(), lit::<T>(-0.5));
    [jx, jy, jz]
}

/// Angular-momentum operators of an electron spin `S` and a nuclear spin `I`
/// on the product space, basis index `k = iS * (2I+1) + iI` with
/// `mS = S - iS` and `mI = I - iI`.
#[derive(Clone, Debug)]
pub struct SpinOperators<T: Real> {
    pub twice_s: u32,
    pub twice_i: u32,
    pub sx: CMatrix<T>,
    pub sy: CMatrix<T>,
    pub sz: CMatrix<T>,
    pub ix: CMatrix<T>,
    pub iy: CMatrix<T>,
    pub iz: CMatrix<T>,
}

impl<T: Real> SpinOperators<T> {
    pub fn dim(&self) -> usize {
        self.sz.nrows()
    }

    /// Total projection `Fz = Sz + Iz`.
    pub fn fz(&self) -> CMatrix<T> {
        &self.sz + &self.iz
    }

    /// `F^2 = (S + I)^2`.
    pub fn f_squared(&self) -> CMatrix<T> {
        let fx = &self.sx + &self.ix;
        let fy = &self.sy + &self.iy;
        let fz = self.fz();
        &fx * &fx + &fy * &fy + &fz * &fz
    }

    /// `S . I`
    pub fn s_dot_i(&self) -> CMatrix<T> {
        &self.sx * &self.ix + &self.sy * &self.iy + &self.sz * &self.iz
    }
}

/// Builds the six spin operators for spins `s` and `i` (half-integers).
pub fn build_operators<T: Real>(s: f64, i: f64) -> Result<SpinOperators<T>> {
    let twice_s = twice_spin(s)?;
    let twice_i = twice_spin(i)?;
    Ok(build_operators_twice(twice_s, twice_i))
}

pub(crate) fn build_operators_twice<T: Real>(twice_s: u32, twice_i: u32) -> SpinOperators<T> {
    let [sx1, sy1, sz1] = single_spin::<T>(twice_s);
    let [ix1, iy1, iz1] = single_spin::<T>(twice_i);
    let id_s = CMatrix::<T>::identity(twice_s as usize + 1, twice_s as usize + 1);
    let id_i = CMatrix::<T>::identity(twice_i as usize + 1, twice_i as usize + 1);
    SpinOperators {
        twice_s,
        twice_i,
        sx: sx1.kronecker(&id_i),
        sy: sy1.kronecker(&id_i),
        sz: sz1.kronecker(&id_i),
        ix: id_s.kronecker(&ix1),
        iy: id_s.kronecker(&iy1),
        iz: id_s.kronecker(&iz1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(m: &CMatrix<f64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn electron_only_sz() {
        let ops = build_operators::<f64>(0.5, 0.0).unwrap();
        assert_eq!(ops.dim(), 2);
        assert_eq!(ops.sz[(0, 0)].re, 0.5);
        assert_eq!(ops.sz[(1, 1)].re, -0.5);
    }

    #[test]
    fn bismuth_dimension() {
        let ops = build_operators::<f64>(0.5, 4.5).unwrap();
        assert_eq!(ops.dim(), 20);
    }

    #[test]
    fn commutation_relations() {
        let ops = build_operators::<f64>(0.5, 4.5).unwrap();
        let i = Complex::new(0.0, 1.0);
        for (x, y, z) in [(&ops.sx, &ops.sy, &ops.sz), (&ops.ix, &ops.iy, &ops.iz)] {
            let comm = x * y - y * x - z * i;
            assert!(max_abs(&comm) < 1e-14);
        }
        // electron and nuclear operators commute
        let mixed = &ops.sx * &ops.iy - &ops.iy * &ops.sx;
        assert!(max_abs(&mixed) < 1e-14);
    }

    #[test]
    fn operators_are_hermitian() {
        let ops = build_operators::<f64>(1.5, 2.0).unwrap();
        for m in [&ops.sx, &ops.sy, &ops.sz, &ops.ix, &ops.iy, &ops.iz] {
            assert!(max_abs(&(m - m.adjoint())) < 1e-15);
        }
    }

    #[test]
    fn casimir_is_j_j_plus_one() {
        let [x, y, z] = single_spin::<f64>(9);
        let c = &x * &x + &y * &y + &z * &z;
        for k in 0..10 {
            assert!((c[(k, k)].re - 4.5 * 5.5).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_half_integer() {
        assert!(matches!(
            build_operators::<f64>(0.3, 4.5),
            Err(Error::InvalidArgument(_))
        ));
        assert!(build_operators::<f64>(0.5, -1.0).is_err());
    }
}
