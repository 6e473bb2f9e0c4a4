use crate::error::{Error, Result};

pub(crate) fn check_link(link: [f64; 3]) -> Result<()> {
    let total: f64 = link.iter().sum();
    if link.iter().any(|p| !(0.0..=1.0).contains(p)) || total > 1.0 + 1e-12 {
        return Err(Error::InvalidProbability(format!(
            "link probabilities {link:?}"
        )));
    }
    Ok(())
}

/// Entanglement-assisted classical capacity of a Pauli channel, in bits per
/// use: `2 - H(q_I, q_X, q_Y, q_Z)`.
pub fn channel_capacity(link: [f64; 3]) -> Result<f64> {
    check_link(link)?;
    let q_i = (1.0 - link.iter().sum::<f64>()).max(0.0);
    let h: f64 = std::iter::once(q_i)
        .chain(link)
        .filter(|&q| q > 0.0)
        .map(|q| -q * q.log2())
        .sum();
    Ok((2.0 - h).clamp(0.0, 2.0))
}

/// `alpha * d / d_max + (1 - alpha) * (1 - ce / 2)`.
pub fn distance_metric(d: f64, ce: f64, alpha: f64, d_max: f64) -> f64 {
    let spatial = if d_max > 0.0 { d / d_max } else { 0.0 };
    alpha * spatial + (1.0 - alpha) * (1.0 - ce / 2.0)
}

/// Pauli channel standing for the link between two endpoints with link
/// parameters `a` and `b`: the element-wise mismatch `|a - b|`, rescaled if
/// it would sum above one. Identical endpoints give a noiseless link.
pub fn mismatch_link(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    let diff = [0, 1, 2].map(|i| (a[i] - b[i]).abs());
    let total: f64 = diff.iter().sum();
    if total > 1.0 {
        diff.map(|x| x / total)
    } else {
        diff
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_limits() {
        assert_eq!(channel_capacity([0.0; 3]).unwrap(), 2.0);
        assert!(channel_capacity([0.25; 3]).unwrap().abs() < 1e-12);
        assert!(channel_capacity([0.5, 0.6, 0.0]).is_err());
    }

    #[test]
    fn metric_endpoints() {
        assert_eq!(distance_metric(0.0, 2.0, 0.5, 10.0), 0.0);
        assert_eq!(distance_metric(10.0, 0.0, 0.5, 10.0), 1.0);
    }

    #[test]
    fn mismatch_of_identical_links_is_noiseless() {
        let l = [0.1, 0.02, 0.05];
        assert_eq!(mismatch_link(l, l), [0.0; 3]);
        let m = mismatch_link([1.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
