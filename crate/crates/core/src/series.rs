//! Truncated multivariate power series.
//!
//! A [`TruncatedSeries`] is a polynomial in a fixed number of variables in
//! which every monomial of total degree above `order` is discarded after each
//! operation. Coefficients live in any [`Field`], so the same code runs on
//! `f64` and on exact rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Field;

/// Exponent vector of a monomial, one entry per variable.
pub type Exponents = Vec<u32>;

#[derive(Clone, PartialEq)]
pub struct TruncatedSeries<T> {
    nvars: usize,
    order: u32,
    terms: BTreeMap<Exponents, T>,
}

fn degree(exps: &[u32]) -> u32 {
    exps.iter().sum()
}

impl<T: Field> TruncatedSeries<T> {
    pub fn zero(nvars: usize, order: u32) -> Self {
        Self {
            nvars,
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, order: u32, value: T) -> Self {
        let mut s = Self::zero(nvars, order);
        s.add_term(vec![0; nvars], value);
        s
    }

    /// The series `x_index`.
    pub fn variable(nvars: usize, order: u32, index: usize) -> Self {
        assert!(index < nvars, "variable index {index} out of range");
        let mut exps = vec![0; nvars];
        exps[index] = 1;
        let mut s = Self::zero(nvars, order);
        s.add_term(exps, T::one());
        s
    }

    pub fn monomial(nvars: usize, order: u32, exps: Exponents, coeff: T) -> Self {
        assert_eq!(exps.len(), nvars);
        let mut s = Self::zero(nvars, order);
        s.add_term(exps, coeff);
        s
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Adds `coeff` to the coefficient of the given monomial, dropping it if
    /// it is above the truncation order or cancels to zero.
    pub fn add_term(&mut self, exps: Exponents, coeff: T) {
        debug_assert_eq!(exps.len(), self.nvars);
        if degree(&exps) > self.order || coeff.is_zero() {
            return;
        }
        match self.terms.remove(&exps) {
            Some(old) => {
                let sum = old + coeff;
                if !sum.is_zero() {
                    self.terms.insert(exps, sum);
                }
            }
            None => {
                self.terms.insert(exps, coeff);
            }
        }
    }

    pub fn coefficient(&self, exps: &[u32]) -> T {
        self.terms.get(exps).cloned().unwrap_or_else(T::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &T)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest total degree present, `None` for the zero series.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| degree(e)).max()
    }

    /// Same terms, different truncation order (higher orders keep all terms).
    pub fn with_order(&self, order: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| degree(e) <= order)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Self {
            nvars: self.nvars,
            order,
            terms,
        }
    }

    /// Terms of exactly the given total degree.
    pub fn homogeneous_part(&self, deg: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| degree(e) == deg)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Self {
            nvars: self.nvars,
            order: self.order,
            terms,
        }
    }

    /// Terms of total degree at least `deg`.
    pub fn tail_from(&self, deg: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| degree(e) >= deg)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        Self {
            nvars: self.nvars,
            order: self.order,
            terms,
        }
    }

    pub fn scale(&self, factor: &T) -> Self {
        let mut out = Self::zero(self.nvars, self.order);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone() * factor.clone());
        }
        out
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(self.nvars, other.nvars, "series variable counts differ");
    }

    /// Truncated product; the result keeps the smaller of the two orders.
    pub fn mul_series(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let order = self.order.min(other.order);
        let mut out = Self::zero(self.nvars, order);
        for (ea, ca) in &self.terms {
            let da = degree(ea);
            if da > order {
                continue;
            }
            for (eb, cb) in &other.terms {
                if da + degree(eb) > order {
                    continue;
                }
                let exps: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exps, ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Self::constant(self.nvars, self.order, T::one());
        for _ in 0..n {
            acc = acc.mul_series(self);
        }
        acc
    }

    /// Formal partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.order);
        for (e, c) in &self.terms {
            let p = e[var];
            if p == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[var] -= 1;
            let mut factor = T::zero();
            for _ in 0..p {
                factor = factor + T::one();
            }
            out.add_term(exps, c.clone() * factor);
        }
        out
    }

    /// Substitutes variable `i` by `subs[i]` and truncates at the order of
    /// the substitutes.
    pub fn compose(&self, subs: &[TruncatedSeries<T>]) -> TruncatedSeries<T> {
        assert_eq!(subs.len(), self.nvars, "one substitute per variable");
        let target_vars = subs[0].nvars;
        let order = subs.iter().map(|s| s.order).min().unwrap_or(self.order);
        let max_pow = self.max_degree().unwrap_or(0);

        // powers[i][k] = subs[i]^k
        let powers: Vec<Vec<TruncatedSeries<T>>> = subs
            .iter()
            .map(|s| {
                let s = s.with_order(order);
                let mut pw = Vec::with_capacity(max_pow as usize + 1);
                pw.push(TruncatedSeries::constant(target_vars, order, T::one()));
                for k in 1..=max_pow as usize {
                    let next = pw[k - 1].mul_series(&s);
                    pw.push(next);
                }
                pw
            })
            .collect();

        let mut out = TruncatedSeries::zero(target_vars, order);
        for (e, c) in &self.terms {
            let mut term = TruncatedSeries::constant(target_vars, order, c.clone());
            for (i, &p) in e.iter().enumerate() {
                if p > 0 {
                    term = term.mul_series(&powers[i][p as usize]);
                }
            }
            for (te, tc) in term.terms {
                out.add_term(te, tc);
            }
        }
        out
    }

    pub fn evaluate(&self, point: &[T]) -> T {
        assert_eq!(point.len(), self.nvars);
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &p) in point.iter().zip(e) {
                for _ in 0..p {
                    term = term * x.clone();
                }
            }
            acc = acc + term;
        }
        acc
    }
}

impl<T: Field> Add for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;
    fn add(self, rhs: Self) -> TruncatedSeries<T> {
        self.check_compatible(rhs);
        let mut out = self.with_order(self.order.min(rhs.order));
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<T: Field> Sub for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;
    fn sub(self, rhs: Self) -> TruncatedSeries<T> {
        self + &(-rhs)
    }
}

impl<T: Field> Neg for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;
    fn neg(self) -> TruncatedSeries<T> {
        let mut out = TruncatedSeries::zero(self.nvars, self.order);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), T::zero() - c.clone());
        }
        out
    }
}

impl<T: Field> Mul for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;
    fn mul(self, rhs: Self) -> TruncatedSeries<T> {
        self.mul_series(rhs)
    }
}

impl<T: Field> fmt::Debug for TruncatedSeries<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c:?}")?;
            for (i, p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*x{i}")?,
                    _ => write!(f, "*x{i}^{p}")?,
                }
            }
        }
        write!(f, " + O({})", self.order + 1)
    }
}

/// Square matrix inverse by Gauss-Jordan elimination with exact-zero pivot
/// detection.
pub fn invert_matrix<T: Field>(m: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let n = m.len();
    let mut a: Vec<Vec<T>> = m.to_vec();
    let mut inv: Vec<Vec<T>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::InvalidArgument("singular linear part".into()))?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = a[col][j].clone() / p.clone();
            inv[col][j] = inv[col][j].clone() / p.clone();
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for j in 0..n {
                a[r][j] = a[r][j].clone() - factor.clone() * a[col][j].clone();
                inv[r][j] = inv[r][j].clone() - factor.clone() * inv[col][j].clone();
            }
        }
    }
    Ok(inv)
}

/// Linear coefficients `lambda[i][j] = d forward_i / d x_j` at the origin.
pub fn linear_part<T: Field>(forward: &[TruncatedSeries<T>]) -> Vec<Vec<T>> {
    let n = forward.len();
    forward
        .iter()
        .map(|f| {
            (0..n)
                .map(|j| {
                    let mut e = vec![0; n];
                    e[j] = 1;
                    f.coefficient(&e)
                })
                .collect()
        })
        .collect()
}

fn apply_matrix<T: Field>(m: &[Vec<T>], v: &[TruncatedSeries<T>]) -> Vec<TruncatedSeries<T>> {
    m.iter()
        .map(|row| {
            let mut acc = TruncatedSeries::zero(v[0].nvars(), v[0].order());
            for (c, s) in row.iter().zip(v) {
                acc = &acc + &s.scale(c);
            }
            acc
        })
        .collect()
}

/// Inverts the map `y = forward(x)` as truncated series `x = g(y)`.
///
/// Writes `forward = Lambda x + R(x)` with `R` of degree at least two and
/// iterates `x <- Lambda^-1 y - Lambda^-1 R(x)`, truncating at `order`. Each
/// sweep fixes one more degree, so `order` sweeps give the exact truncated
/// inverse.
pub fn invert_series<T: Field>(
    forward: &[TruncatedSeries<T>],
    order: u32,
) -> Result<Vec<TruncatedSeries<T>>> {
    let n = forward.len();
    if n == 0 || forward.iter().any(|f| f.nvars() != n) {
        return Err(Error::InvalidArgument(
            "series inversion needs a square system".into(),
        ));
    }
    if forward.iter().any(|f| !f.coefficient(&vec![0; n]).is_zero()) {
        return Err(Error::InvalidArgument(
            "series inversion needs forward(0) = 0".into(),
        ));
    }
    let lambda = linear_part(forward);
    let lambda_inv = invert_matrix(&lambda)?;
    let remainder: Vec<TruncatedSeries<T>> =
        forward.iter().map(|f| f.with_order(order).tail_from(2)).collect();

    let y: Vec<TruncatedSeries<T>> = (0..n)
        .map(|i| TruncatedSeries::variable(n, order, i))
        .collect();
    let base = apply_matrix(&lambda_inv, &y);
    let mut x = base.clone();
    for _ in 0..order {
        let r: Vec<TruncatedSeries<T>> = remainder.iter().map(|ri| ri.compose(&x)).collect();
        let correction = apply_matrix(&lambda_inv, &r);
        let next: Vec<TruncatedSeries<T>> =
            base.iter().zip(&correction).map(|(b, c)| b - c).collect();
        if next == x {
            break;
        }
        x = next;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = TruncatedSeries<f64>;

    #[test]
    fn product_truncates_above_order() {
        let x = S::variable(2, 3, 0);
        let y = S::variable(2, 3, 1);
        let sum = &x + &y;
        let cube = sum.powi(3);
        assert_eq!(cube.coefficient(&[2, 1]), 3.0);
        let fourth = sum.powi(4);
        assert!(fourth.is_zero());
    }

    #[test]
    fn derivative_of_cubic() {
        let x = S::variable(2, 4, 0);
        let y = S::variable(2, 4, 1);
        let p = &x.powi(3) + &(&x * &y).scale(&2.0);
        let dx = p.derivative(0);
        assert_eq!(dx.coefficient(&[2, 0]), 3.0);
        assert_eq!(dx.coefficient(&[0, 1]), 2.0);
    }

    #[test]
    fn single_variable_inverse_matches_known_series() {
        // y = x + x^2  =>  x = y - y^2 + 2 y^3 - 5 y^4 + ...
        let x = S::variable(1, 4, 0);
        let f = &x + &x.powi(2);
        let inv = invert_series(&[f], 4).unwrap();
        assert_eq!(inv[0].coefficient(&[1]), 1.0);
        assert_eq!(inv[0].coefficient(&[2]), -1.0);
        assert_eq!(inv[0].coefficient(&[3]), 2.0);
        assert_eq!(inv[0].coefficient(&[4]), -5.0);
    }

    #[test]
    fn singular_linear_part_is_rejected() {
        let x = S::variable(2, 3, 0);
        let f = vec![x.clone(), x.scale(&2.0)];
        assert!(invert_series(&f, 3).is_err());
    }

    #[test]
    fn evaluate_matches_manual() {
        let x = S::variable(2, 3, 0);
        let y = S::variable(2, 3, 1);
        let p = &(&x * &y).scale(&3.0) + &S::constant(2, 3, 1.5);
        assert_eq!(p.evaluate(&[2.0, -1.0]), 1.5 - 6.0);
    }
}
