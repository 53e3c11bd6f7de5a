use super::levmar::{levenberg_marquardt, LmOptions};
use super::FitResult;
use crate::circuit::{tuning_points, CircuitNetlist, KineticInductor, TuningPoint};
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Which kinetic inductor of the netlist the fit adjusts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TuningElement {
    MicrowireA,
    Coupler,
}

impl TuningElement {
    fn get<T: Real>(self, net: &CircuitNetlist<T>) -> &KineticInductor<T> {
        match self {
            TuningElement::MicrowireA => &net.inductor_a,
            TuningElement::Coupler => &net.inductor_c,
        }
    }

    fn set<T: Real>(self, net: &mut CircuitNetlist<T>, ind: KineticInductor<T>) {
        match self {
            TuningElement::MicrowireA => net.inductor_a = ind,
            TuningElement::Coupler => net.inductor_c = ind,
        }
    }

    /// DC current through the element at a bias point.
    fn current<T: Real>(self, p: &TuningPoint<T>) -> T {
        match self {
            TuningElement::MicrowireA => p.ia,
            TuningElement::Coupler => p.ia + p.ib,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuningFitOptions<T> {
    pub element: TuningElement,
    /// Frequency noise (Hz) used as the residual weight.
    pub sigma: T,
    pub lm: LmOptions<T>,
}

impl<T: Real> TuningFitOptions<T> {
    pub fn new(element: TuningElement) -> Self {
        Self {
            element,
            sigma: T::one(),
            lm: LmOptions::default(),
        }
    }
}

/// Fits `Lk0`, `I*` and `alpha` of one kinetic inductor to measured mode
/// frequencies, re-deriving both dressed modes at every bias point. All
/// other elements (and the fitted element's `Lg`) are taken from
/// `netlist`, whose values for the fitted element are the starting guess.
/// Also reports `lk0_fraction = Lk0 / (Lg + Lk0)`.
pub fn fit_tuning<T: Real>(
    netlist: &CircuitNetlist<T>,
    data: &[TuningPoint<T>],
    opts: &TuningFitOptions<T>,
) -> Result<FitResult<T>> {
    if data.len() < 4 {
        return Err(Error::InvalidArgument("tuning fit needs at least four bias points".into()));
    }
    if !(opts.sigma > T::zero()) {
        return Err(Error::InvalidArgument("noise level must be positive".into()));
    }
    let el = opts.element;
    let start = *el.get(netlist);
    let points: Vec<(T, T)> = data.iter().map(|p| (p.ia, p.ib)).collect();
    let residuals = |p: &[T]| -> Result<Vec<T>> {
        let mut net = netlist.clone();
        el.set(&mut net, KineticInductor::new(p[0], start.lg, p[1], p[2])?);
        let model = tuning_points(&net, &points)?;
        Ok(model
            .iter()
            .zip(data)
            .flat_map(|(m, d)| [(m.fa - d.fa) / opts.sigma, (m.fb - d.fb) / opts.sigma])
            .collect())
    };
    // the guess must keep every bias point below the critical current
    let peak = data.iter().fold(T::zero(), |m, p| m.max(el.current(p).abs()));
    let istar0 = start.istar.max(peak * lit(1.2));
    let p0 = [start.lk0, istar0, start.alpha];
    let scales = [start.lk0 * lit(0.1), istar0 * lit(0.1), lit(0.1)];
    let out = levenberg_marquardt(residuals, &p0, &scales, &opts.lm)?;

    let mut warnings = Vec::new();
    let (lk0, istar, alpha) = (out.params[0], out.params[1], out.params[2]);
    let reach = peak / istar;
    if data.len() < 8 || reach < lit(0.3) {
        warnings.push(format!(
            "ill-conditioned: {} points reaching {:.2} of I*; need 8 reaching 0.30",
            data.len(),
            reach.to_f64_lossy()
        ));
    }
    if !(alpha >= T::zero() && alpha <= T::one()) {
        warnings.push(format!("alpha = {:.3} lies outside [0, 1]", alpha.to_f64_lossy()));
    }
    if out.degenerate {
        warnings.push("degenerate: some parameters are not constrained by the data".into());
    }
    let total = start.lg + lk0;
    let frac = lk0 / total;
    let frac_sigma = out.sigmas[0] * start.lg / (total * total);
    let mut result = FitResult::from_outcome(&["lk0", "istar", "alpha"], out);
    result.names.push("lk0_fraction".into());
    result.values.push(frac);
    result.sigmas.push(frac_sigma);
    result.warnings = warnings;
    Ok(result)
}
