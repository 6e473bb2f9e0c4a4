use std::cmp::Ordering;

use super::problem::{Candidate, Constraint, SelectionProblem, SelectionResult};
use crate::error::{Error, Result};

/// Largest instance the exhaustive search accepts: any number of devices up
/// to this bound, or any subset cap up to [`MAX_UNBOUNDED_CAP`].
pub const MAX_ORACLE_DEVICES: usize = 20;
pub const MAX_UNBOUNDED_CAP: usize = 4;

/// Default subset-size cap: the device limit.
pub fn default_subset_cap(problem: &SelectionProblem) -> usize {
    problem.params.device_limit
}

/// `sum_{k <= p} C(n, k)`: subsets of size at most `p`, the empty set included.
pub fn subsets_up_to(n: usize, p: usize) -> u64 {
    let mut total = 0u64;
    let mut binom = 1u64;
    for k in 0..=p.min(n) {
        total += binom;
        binom = binom * (n - k) as u64 / (k + 1) as u64;
    }
    total
}

/// Exhaustive search over all subsets of size `<= min(cap, n)`. Returns the
/// feasible subset with the least aggregate noise; ties go to fewer devices,
/// then to the lexicographically smaller sorted id list.
pub fn brute_force_select(problem: &SelectionProblem, cap: usize) -> Result<SelectionResult> {
    let n = problem.candidates.len();
    if n > MAX_ORACLE_DEVICES && cap > MAX_UNBOUNDED_CAP {
        return Err(Error::EnumerationBound { devices: n, cap });
    }
    let mut sorted: Vec<&Candidate> = problem.candidates.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let p = cap.min(n);

    let mut count = 0u64;
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut blocked_by_noise = false;
    let mut idx: Vec<usize> = Vec::with_capacity(p);
    for k in 0..=p {
        idx.clear();
        idx.extend(0..k);
        loop {
            count += 1;
            let chosen: Vec<&Candidate> = idx.iter().map(|&i| sorted[i]).collect();
            let r = problem.result_for(&chosen, &[]);
            if r.feasible {
                let better = match &best {
                    None => true,
                    Some((bn, bi)) => match r.aggregate_noise.total_cmp(bn) {
                        Ordering::Less => true,
                        Ordering::Greater => false,
                        Ordering::Equal => (idx.len(), &idx) < (bi.len(), bi),
                    },
                };
                if better {
                    best = Some((r.aggregate_noise, idx.clone()));
                }
            } else if r.violations == [Constraint::NoiseThreshold] {
                blocked_by_noise = true;
            }
            if !next_combination(&mut idx, n) {
                break;
            }
        }
    }

    let mut result = match best {
        Some((_, i)) => {
            let chosen: Vec<&Candidate> = i.iter().map(|&i| sorted[i]).collect();
            problem.result_for(&chosen, &[])
        }
        None => {
            let extra: &[Constraint] = if blocked_by_noise {
                &[Constraint::NoiseThreshold]
            } else {
                &[]
            };
            problem.result_for(&[], extra)
        }
    };
    result.subsets_enumerated = count;
    Ok(result)
}

/// Advances `idx` to the next k-combination of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::problem::SelectionParams;

    fn problem(n: usize) -> SelectionProblem {
        let candidates = (0..n)
            .map(|i| Candidate {
                id: format!("d{i:02}"),
                capacity: 3,
                n_eff: 0.1 * (n - i) as f64,
                quantum_volume: 4,
            })
            .collect();
        SelectionProblem::new(
            candidates,
            SelectionParams {
                model_capacity: 5,
                noise_threshold: 10.0,
                parallel_limit: 4,
                data_dim: 4,
                device_limit: n,
            },
        )
        .unwrap()
    }

    #[test]
    fn counts_match_binomial_sums() {
        assert_eq!(subsets_up_to(3, 3), 8);
        assert_eq!(subsets_up_to(10, 3), 1 + 10 + 45 + 120);
        let r = brute_force_select(&problem(6), 2).unwrap();
        assert_eq!(r.subsets_enumerated, subsets_up_to(6, 2));
    }

    #[test]
    fn picks_least_noisy_feasible_pair() {
        let r = brute_force_select(&problem(4), 4).unwrap();
        assert!(r.feasible);
        let mut s = r.selected.clone();
        s.sort();
        assert_eq!(s, vec!["d02", "d03"]);
    }

    #[test]
    fn enumeration_bound() {
        assert!(matches!(
            brute_force_select(&problem(21), 5),
            Err(Error::EnumerationBound { .. })
        ));
        assert!(brute_force_select(&problem(21), 2).is_ok());
    }
}
