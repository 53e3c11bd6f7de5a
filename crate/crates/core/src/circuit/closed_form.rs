//! Closed-form third-order coefficients of the inductive Hamiltonian.
//!
//! With `Lambda = [[La+Lc, Lc], [Lc, Lb+Lc]]` and
//! `det = La Lb + Lc (La + Lb)`, the quadratic part is
//! `Phi^T Lambda^-1 Phi / 2` and the cubic part is `-T3(Lambda^-1 Phi)`,
//! where `T3 = c1a Ia^3/2 + c1n (Ia+Ib)^3/2` is the cubic kinetic term.

use crate::scalar::{lit, Real};

pub fn determinant<T: Real>(la: T, lb: T, lc: T) -> T {
    la * lb + lc * (la + lb)
}

/// `(Ltilde_a, Ltilde_b)`; `Ltilde_a = La + Lc / (1 + Lc/Lb)`.
pub fn dressed_inductances<T: Real>(la: T, lb: T, lc: T) -> (T, T) {
    let det = determinant(la, lb, lc);
    (det / (lb + lc), det / (la + lc))
}

/// Bilinear `Phi_a Phi_b` coefficient.
pub fn g11<T: Real>(la: T, lb: T, lc: T) -> T {
    -lc / determinant(la, lb, lc)
}

/// Cubic coefficients `[g30, g21, g12, g03]` given the first-order
/// inductance slopes `c1a = Lk0_a c1(I_A)` and `c1n = Lk0_c c1(I_A+I_B)`
/// in H/A.
pub fn cubic_couplings<T: Real>(la: T, lb: T, lc: T, c1a: T, c1n: T) -> [T; 4] {
    let det3 = determinant(la, lb, lc).powi(3);
    // Lambda^-1 * det: Ia = p Phi_a + q Phi_b, Ia + Ib = Lb Phi_a + La Phi_b
    let p = lb + lc;
    let q = -lc;
    let half: T = lit(0.5);
    let three_half: T = lit(1.5);
    [
        -half * (c1a * p.powi(3) + c1n * lb.powi(3)) / det3,
        -three_half * (c1a * p * p * q + c1n * lb * lb * la) / det3,
        -three_half * (c1a * p * q * q + c1n * lb * la * la) / det3,
        -half * (c1a * q.powi(3) + c1n * la.powi(3)) / det3,
    ]
}

/// `g12 = -3/2 c1a Lc^2 (Lb+Lc)/det^3 - 3/2 c1n La^2 Lb/det^3`.
pub fn g12<T: Real>(la: T, lb: T, lc: T, c1a: T, c1n: T) -> T {
    cubic_couplings(la, lb, lc, c1a, c1n)[2]
}
