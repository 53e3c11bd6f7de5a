//! Legendre transform of the two-mode circuit with current-dependent
//! inductors, carried out on truncated power series.

use crate::error::{Error, Result};
use crate::scalar::Field;
use crate::series::{invert_series, TruncatedSeries};

type Series<F> = TruncatedSeries<F>;

/// Inductive element values at a fixed DC bias point.
///
/// `coeffs_a[k]` and `coeffs_c[k]` are the prefactors of `Idot^(k+1)` in
/// the inductance of microwire A and of the coupler, in H/A^(k+1)
/// (i.e. `Lk0 * c_(k+1)`).
#[derive(Clone, Debug, PartialEq)]
pub struct InductiveElements<F> {
    pub la0: F,
    pub lb: F,
    pub lc0: F,
    pub coeffs_a: [F; 4],
    pub coeffs_c: [F; 4],
}

/// Truncated series produced by quantization. Variables are
/// `(Qdot_a, Qdot_b)` for `flux` and `(Phi_a, Phi_b)` for `rates` and
/// `hamiltonian`.
#[derive(Clone, Debug)]
pub struct QuantizedSeries<F: Field> {
    pub order: u32,
    /// `Phi(Qdot)`.
    pub flux: Vec<Series<F>>,
    /// `Qdot(Phi)`, the truncated inverse of `flux`.
    pub rates: Vec<Series<F>>,
    /// Inductive energy as a function of `Phi`.
    pub hamiltonian: Series<F>,
}

fn half<F: Field>() -> F {
    F::one() / (F::one() + F::one())
}

/// Kinetic term of the Lagrangian in the branch currents,
/// `La(Ia) Ia^2/2 + Lb Ib^2/2 + Lc(Ia+Ib) (Ia+Ib)^2/2`.
pub fn kinetic_lagrangian<F: Field>(el: &InductiveElements<F>, order: u32) -> Series<F> {
    let qa = Series::variable(2, order, 0);
    let qb = Series::variable(2, order, 1);
    let s = &qa + &qb;
    let inductance = |l0: &F, coeffs: &[F; 4], x: &Series<F>| {
        let mut l = Series::constant(2, order, l0.clone());
        for (k, c) in coeffs.iter().enumerate() {
            l = &l + &x.powi(k as u32 + 1).scale(c);
        }
        l
    };
    let la = inductance(&el.la0, &el.coeffs_a, &qa);
    let lc = inductance(&el.lc0, &el.coeffs_c, &s);
    let h = half::<F>();
    let ta = la.mul_series(&qa.powi(2));
    let tb = qb.powi(2).scale(&el.lb);
    let tc = lc.mul_series(&s.powi(2));
    (&(&ta + &tb) + &tc).scale(&h)
}

/// Runs the full quantization at truncation `order` (>= 2).
pub fn quantize_series<F: Field>(el: &InductiveElements<F>, order: u32) -> Result<QuantizedSeries<F>> {
    if order < 2 {
        return Err(Error::InvalidArgument(format!(
            "truncation order must be at least 2, got {order}"
        )));
    }
    // One extra degree so that dT/dQdot keeps every term up to `order`.
    let lagrangian = kinetic_lagrangian(el, order + 1);
    let flux: Vec<Series<F>> = (0..2)
        .map(|i| lagrangian.derivative(i).with_order(order))
        .collect();
    let rates = invert_series(&flux, order).map_err(|e| match e {
        Error::InvalidArgument(msg) => Error::DegenerateCircuit(msg),
        other => other,
    })?;

    let t = lagrangian.with_order(order);
    let qa = Series::variable(2, order, 0);
    let qb = Series::variable(2, order, 1);
    let legendre = &(&flux[0].mul_series(&qa) + &flux[1].mul_series(&qb)) - &t;
    let hamiltonian = legendre.compose(&rates);
    Ok(QuantizedSeries {
        order,
        flux,
        rates,
        hamiltonian,
    })
}

/// `flux(rates(Phi)) - Phi`, which vanishes identically up to the
/// truncation order for an exact inverse.
pub fn inversion_residual<F: Field>(q: &QuantizedSeries<F>) -> Vec<Series<F>> {
    q.flux
        .iter()
        .enumerate()
        .map(|(i, f)| &f.compose(&q.rates) - &Series::variable(2, q.order, i))
        .collect()
}
