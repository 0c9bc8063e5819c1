//! Explicit-constant lower and upper bounds on the minimax excess risk per scenario.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracles::Scenario;
use crate::problems::{ClassKind, FunctionClass};
use crate::scalar::Real;

/// Inputs consulted by [`table1_bounds`]; only the ones a scenario needs must be set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundInputs<T> {
    pub bound: T,
    pub mu: T,
    pub kappa: T,
    /// Total sample budget.
    pub n: Option<usize>,
    /// `d_TV(D, D')` for transfer learning.
    pub tv: Option<T>,
    /// Contamination rate for robust learning.
    pub eta: Option<T>,
    /// `var(xi)` of the clean law.
    pub var_xi: Option<T>,
    /// `P_D({xi'_1, ..., xi'_n})` of a fixed design.
    pub design_mass: Option<T>,
    /// `E_D[min_i ||xi - xi'_i||]` of a fixed design.
    pub mean_min_dist: Option<T>,
    /// `d_G(D, D_q)^2` at the chosen federated weights.
    pub fl_bias_sq: Option<T>,
    /// `sum_i q_i^2 SV(D_i) / n_i` at the chosen federated weights.
    pub fl_variance: Option<T>,
    /// Initial excess-risk scale `sigma(E_D | O_1)^2 / (2 mu)`; defaults to `2B^2/mu` for `Bnd`.
    pub delta_tilde: Option<T>,
}

impl<T: Real> BoundInputs<T> {
    pub fn new(bound: T, mu: T, kappa: T) -> Self {
        Self {
            bound,
            mu,
            kappa,
            n: None,
            tv: None,
            eta: None,
            var_xi: None,
            design_mass: None,
            mean_min_dist: None,
            fl_bias_sq: None,
            fl_variance: None,
            delta_tilde: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport<T> {
    pub scenario: Scenario,
    pub class: ClassKind,
    /// `None` where no lower bound is known.
    pub lower: Option<T>,
    pub upper: Option<T>,
    pub constants: BTreeMap<&'static str, T>,
    pub inputs: BoundInputs<T>,
}

fn need<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::invalid(format!("missing bound input `{name}`")))
}

/// Lower and upper bounds with all constants explicit.
pub fn table1_bounds<T: Real>(
    scenario: Scenario,
    class: &FunctionClass<T>,
    inputs: &BoundInputs<T>,
) -> Result<BoundReport<T>> {
    if class.bound != inputs.bound {
        return Err(Error::invalid("class bound and input bound disagree"));
    }
    let (b, mu, kappa) = (inputs.bound, inputs.mu, inputs.kappa);
    if !(mu > T::zero()) || !(kappa >= T::one()) {
        return Err(Error::invalid("need mu > 0 and kappa >= 1"));
    }
    let b2 = b * b;
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let mut constants = BTreeMap::new();
    let count = |name: &str| -> Result<T> {
        let n = need(inputs.n, name)?;
        if n == 0 {
            return Err(Error::invalid("sample budget must be positive"));
        }
        Ok(T::count(n))
    };
    let delta_tilde = || -> Result<T> {
        match (inputs.delta_tilde, class.kind) {
            (Some(d), _) => Ok(d),
            (None, ClassKind::Bnd) => Ok(two * b2 / mu),
            (None, _) => Err(Error::invalid("missing bound input `delta_tilde`")),
        }
    };
    // a/(2 mu) + 6 kappa (b/n)/mu + delta e^{-n/(6 kappa)}
    let prop4 = |a: T, b_over_n: T, n: T, delta: T| {
        a / (two * mu) + six * kappa * b_over_n / mu + delta * (-n / (six * kappa)).exp()
    };
    let lower_tl = |dist: T, n: T| {
        (two - T::lit(3.0).ln()) * b2 * (dist * dist + T::one() / n) / (T::lit(32.0) * mu)
    };

    let (lower, upper) = match (scenario, class.kind) {
        (Scenario::SL, ClassKind::Bnd) => {
            let n = count("n")?;
            constants.insert("lower_constant", T::one() / T::lit(8.0));
            constants.insert("upper_constant", T::lit(11.0));
            (
                Some(b2 / (T::lit(8.0) * mu * n)),
                Some(T::lit(11.0) * kappa * b2 / (mu * n)),
            )
        }
        (Scenario::TL, ClassKind::Bnd) | (Scenario::RL, ClassKind::Bnd) => {
            let n = count("n")?;
            let dist = if scenario == Scenario::TL {
                need(inputs.tv, "tv")?
            } else {
                need(inputs.eta, "eta")?
            };
            let a = T::lit(4.0) * b2 * dist * dist;
            let delta = delta_tilde()?;
            constants.insert("lower_constant", (two - T::lit(3.0).ln()) / T::lit(32.0));
            constants.insert("a", a);
            constants.insert("b", b2);
            constants.insert("delta_tilde", delta);
            (Some(lower_tl(dist, n)), Some(prop4(a, b2 / n, n, delta)))
        }
        (Scenario::RL, ClassKind::Lip) => {
            let n = count("n")?;
            let eta = need(inputs.eta, "eta")?;
            let var = need(inputs.var_xi, "var_xi")?;
            let c = T::lit(3200.0);
            constants.insert("c", c);
            (None, Some(c * b2 * var * (eta + T::one() / n) / (two * mu)))
        }
        (Scenario::FL, _) => {
            let n = count("n")?;
            let bias = need(inputs.fl_bias_sq, "fl_bias_sq")?;
            let var = need(inputs.fl_variance, "fl_variance")?;
            let delta = delta_tilde()?;
            constants.insert("delta_tilde", delta);
            (None, Some(prop4(bias, var, n, delta)))
        }
        (Scenario::FD, ClassKind::Bnd) => {
            let p = need(inputs.design_mass, "design_mass")?;
            let miss = (T::one() - p).max(T::zero());
            let v = two * b2 * miss * miss / mu;
            (Some(v), Some(v))
        }
        (Scenario::FD, ClassKind::Lip) => {
            let e = need(inputs.mean_min_dist, "mean_min_dist")?;
            let v = b2 * e * e / (two * mu);
            (Some(v), Some(v))
        }
        (s, k) => {
            return Err(Error::Unsupported(format!(
                "no explicit bounds for {s} with class {k}"
            )));
        }
    };
    Ok(BoundReport {
        scenario,
        class: class.kind,
        lower,
        upper,
        constants,
        inputs: inputs.clone(),
    })
}
