use super::capacity::channel_capacity;
use super::device::DeviceProfile;
use crate::error::{Error, Result};

/// `lambda * ce_hat + (1 - lambda) * r_hat`.
pub fn head_score(ce_hat: f64, r_hat: f64, lambda: f64) -> f64 {
    lambda * ce_hat + (1.0 - lambda) * r_hat
}

/// Picks the best `(id, ce_hat, r_hat)` candidate; ties go to the smallest id.
pub fn elect_from_scores(candidates: &[(String, f64, f64)], lambda: f64) -> Result<(String, f64)> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda {lambda} outside (0, 1)"
        )));
    }
    let mut best: Option<(&str, f64)> = None;
    for (id, ce, r) in candidates {
        let s = head_score(*ce, *r, lambda);
        best = match best {
            Some((bid, bs)) if bs > s || (bs == s && bid <= id.as_str()) => Some((bid, bs)),
            _ => Some((id.as_str(), s)),
        };
    }
    best.map(|(id, s)| (id.to_string(), s))
        .ok_or_else(|| Error::InvalidParameter("cannot elect a head of an empty cluster".into()))
}

/// Elects the member maximising the head score, with channel capacity and
/// classical resources each divided by their maximum over `fleet`.
pub fn elect_head(
    members: &[&DeviceProfile],
    fleet: &[DeviceProfile],
    lambda: f64,
) -> Result<(String, f64)> {
    let ce_max = fleet
        .iter()
        .map(|d| channel_capacity(d.link_pauli))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let r_max = fleet
        .iter()
        .map(|d| d.classical_resources)
        .fold(0.0, f64::max);
    let norm = |v: f64, m: f64| if m > 0.0 { v / m } else { 0.0 };
    let candidates = members
        .iter()
        .map(|d| {
            Ok((
                d.id.clone(),
                norm(channel_capacity(d.link_pauli)?, ce_max),
                norm(d.classical_resources, r_max),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    elect_from_scores(&candidates, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn higher_score_wins() {
        let c = vec![("A".to_string(), 1.0, 0.2), ("B".to_string(), 0.4, 1.0)];
        let (id, s) = elect_from_scores(&c, 0.5).unwrap();
        assert_eq!(id, "B");
        assert!((s - 0.7).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_smallest_id() {
        let c = vec![("b".to_string(), 0.5, 0.5), ("a".to_string(), 0.5, 0.5)];
        assert_eq!(elect_from_scores(&c, 0.3).unwrap().0, "a");
    }

    #[test]
    fn lambda_range_is_open() {
        let c = vec![("a".to_string(), 0.5, 0.5)];
        assert!(elect_from_scores(&c, 0.0).is_err());
        assert!(elect_from_scores(&c, 1.0).is_err());
        assert!(elect_from_scores(&[], 0.5).is_err());
    }
}
