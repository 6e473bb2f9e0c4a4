use crate::error::{Error, Result};

/// Weights scaled to sum to one.
pub fn normalize_weights(weights: &[f64]) -> Result<Vec<f64>> {
    if weights
        .iter()
        .any(|w| w.is_nan() || *w < 0.0 || !w.is_finite())
    {
        return Err(Error::InvalidParameter(format!(
            "aggregation weights {weights:?} must be finite and >= 0"
        )));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter(
            "aggregation weights are all zero".into(),
        ));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Weighted elementwise average of equal-length parameter vectors.
pub fn fedavg(param_sets: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    if param_sets.is_empty() || param_sets.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} parameter sets, {} weights",
            param_sets.len(),
            weights.len()
        )));
    }
    let len = param_sets[0].len();
    if param_sets.iter().any(|p| p.len() != len) {
        return Err(Error::DimensionMismatch(
            "parameter vectors differ in length".into(),
        ));
    }
    let w = normalize_weights(weights)?;
    let mut out = vec![0.0; len];
    for (set, wk) in param_sets.iter().zip(&w) {
        for (o, v) in out.iter_mut().zip(set) {
            *o += wk * v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_means() {
        assert_eq!(
            fedavg(&[vec![0.0], vec![2.0]], &[1.0, 1.0]).unwrap(),
            vec![1.0]
        );
        assert_eq!(
            fedavg(&[vec![0.0], vec![4.0]], &[3.0, 1.0]).unwrap(),
            vec![1.0]
        );
        let same = vec![0.3, -1.2];
        assert_eq!(
            fedavg(&[same.clone(), same.clone()], &[0.2, 5.0]).unwrap(),
            same
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(fedavg(&[vec![0.0], vec![1.0, 2.0]], &[1.0, 1.0]).is_err());
        assert!(fedavg(&[vec![0.0]], &[0.0]).is_err());
        assert!(fedavg(&[vec![0.0]], &[-1.0]).is_err());
        assert!(fedavg(&[], &[]).is_err());
    }
}
