use crate::error::{Error, Result};
use crate::scalar::Real;

/// Guards the ceilings below against `ln(e) = 1 + ulp` style rounding.
fn ceil_guarded(x: f64) -> f64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil()
}

/// Exponentially increasing batch sizes for a budget of `n` points.
///
/// With `c = sqrt(1 - 1/kappa)` and `T = floor((n - 1) / 2)`,
/// `n_t = max(1, ceil((n - 1)(1 - c) c^(T - t - 1) / 2))`, truncated so that
/// the sizes sum to at most `n - 1`.
pub fn batch_schedule(n: usize, kappa: f64) -> Result<Vec<usize>> {
    if n < 3 {
        return Err(Error::invalid(format!(
            "batch schedule needs n >= 3, got {n}"
        )));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::invalid(format!(
            "kappa must be finite and >= 1, got {kappa}"
        )));
    }
    let c = (1.0 - 1.0 / kappa).sqrt();
    let steps = (n - 1) / 2;
    let budget = n - 1;
    let mut out = Vec::with_capacity(steps);
    let mut used = 0usize;
    for t in 0..steps {
        let raw = (n - 1) as f64 * (1.0 - c) * c.powi((steps - t - 1) as i32) / 2.0;
        let size = (ceil_guarded(raw) as usize).max(1);
        let size = size.min(budget - used);
        if size == 0 {
            break;
        }
        out.push(size);
        used += size;
    }
    Ok(out)
}

/// Constant batch `floor((n - 1) / (1 + a kappa ln n))` repeated `ceil(a kappa ln n)` times.
pub fn fixed_batch(n: usize, kappa: f64, a: f64) -> Result<(usize, usize)> {
    if n < 3 {
        return Err(Error::invalid(format!("fixed batch needs n >= 3, got {n}")));
    }
    if !(kappa >= 1.0) || !(a > 0.0) || !a.is_finite() {
        return Err(Error::invalid("need kappa >= 1 and a > 0"));
    }
    let growth = a * kappa * (n as f64).ln();
    let batch = ((n - 1) as f64 / (1.0 + growth)).floor() as usize;
    if batch == 0 {
        return Err(Error::invalid(format!(
            "budget {n} too small for a = {a}, kappa = {kappa}"
        )));
    }
    Ok((batch, ceil_guarded(growth) as usize))
}

/// `ceil(kappa ln((||phi_1(o)||^2 + noise) / (eps mu)))`, floored at zero.
pub fn warmup_length<T: Real>(
    first_estimate: &[T],
    noise_sq: T,
    eps: T,
    kappa: T,
    mu: T,
) -> Result<usize> {
    if !(eps > T::zero()) || !(mu > T::zero()) {
        return Err(Error::invalid("warmup needs eps > 0 and mu > 0"));
    }
    let s: T = first_estimate.iter().map(|&v| v * v).sum::<T>() + noise_sq;
    let arg = (s / (eps * mu)).as_f64();
    if !(arg > 1.0) {
        return Ok(0);
    }
    if !arg.is_finite() {
        return Err(Error::invalid("warmup argument is not finite"));
    }
    Ok(ceil_guarded(kappa.as_f64() * arg.ln()).max(0.0) as usize)
}
