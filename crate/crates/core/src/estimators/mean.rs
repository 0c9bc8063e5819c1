use crate::error::{Error, Result};
use crate::linalg;
use crate::oracles::Observation;
use crate::scalar::Real;

/// `(1/n) sum_i o_i`.
pub fn sample_mean<T: Real>(obs: &Observation<T>) -> Result<Vec<T>> {
    linalg::mean_rows(&obs.values).ok_or(Error::Empty("sample mean of an empty observation"))
}

/// Per-agent means and counts; agents without points get `None`.
pub fn agent_means<T: Real>(
    obs: &Observation<T>,
    agents: usize,
) -> Result<Vec<(Option<Vec<T>>, usize)>> {
    let tags = obs
        .agents
        .as_deref()
        .ok_or_else(|| Error::invalid("observation carries no agent tags"))?;
    let dim = obs.dim();
    let mut sums = vec![vec![T::zero(); dim]; agents];
    let mut counts = vec![0usize; agents];
    for (v, &a) in obs.values.iter().zip(tags) {
        if a >= agents {
            return Err(Error::invalid(format!("agent {a} has no weight")));
        }
        linalg::axpy(T::one(), v, &mut sums[a]);
        counts[a] += 1;
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| {
            let m = (c > 0).then(|| linalg::scale(&s, T::one() / T::count(c)));
            (m, c)
        })
        .collect())
}

/// `sum_i q_i * mean_i` over agents. The weights need not be a probability vector.
pub fn fl_weighted_mean<T: Real>(obs: &Observation<T>, q: &[T]) -> Result<Vec<T>> {
    if q.iter().any(|w| !w.is_finite()) {
        return Err(Error::invalid("federated weights must be finite"));
    }
    if obs.is_empty() {
        return Err(Error::Empty("federated observation"));
    }
    let mut out = vec![T::zero(); obs.dim()];
    for (i, ((mean, _), &w)) in agent_means(obs, q.len())?.iter().zip(q).enumerate() {
        if w == T::zero() {
            continue;
        }
        let m = mean
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("agent {i} has weight {w} but no samples")))?;
        linalg::axpy(w, m, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tagged(values: Vec<Vec<f64>>, agents: Vec<usize>) -> Observation<f64> {
        Observation {
            values,
            agents: Some(agents),
        }
    }

    #[test]
    fn mean_of_constant_and_symmetric_values() {
        let o = Observation::new(vec![vec![2.0, 1.0]; 4]);
        assert_eq!(sample_mean(&o).unwrap(), vec![2.0, 1.0]);
        let o = Observation::new(vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 0.0]]);
        assert_eq!(sample_mean(&o).unwrap(), vec![0.0, 0.0]);
        assert!(sample_mean(&Observation::<f64>::new(vec![])).is_err());
    }

    #[test]
    fn single_agent_weight_one_is_sample_mean() {
        let o = tagged(vec![vec![1.0], vec![4.0]], vec![0, 0]);
        assert_eq!(
            fl_weighted_mean(&o, &[1.0]).unwrap(),
            sample_mean(&o).unwrap()
        );
    }

    #[test]
    fn weights_combine_agent_means() {
        let o = tagged(vec![vec![1.0], vec![3.0], vec![10.0]], vec![0, 0, 1]);
        let v = fl_weighted_mean(&o, &[0.5, -1.0]).unwrap();
        assert!((v[0] - (1.0 - 10.0)).abs() < 1e-12);
    }

    #[test]
    fn empty_agent_with_weight_is_an_error() {
        let o = tagged(vec![vec![1.0]], vec![0]);
        assert!(fl_weighted_mean(&o, &[1.0, 0.5]).is_err());
        assert!(fl_weighted_mean(&o, &[1.0, 0.0]).is_ok());
    }
}
