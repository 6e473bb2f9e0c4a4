use rand::seq::SliceRandom;

use super::problem::{Candidate, Constraint, SelectionProblem, SelectionResult};
use crate::rng;

/// Scans devices from least to most noisy, accepting each one that keeps
/// the aggregate under the threshold and the count under the device limit,
/// and stops once capacity and parallelisation are covered. Infeasibility is
/// reported in the result.
pub fn greedy_select(problem: &SelectionProblem) -> SelectionResult {
    let p = &problem.params;
    let mut chosen: Vec<&Candidate> = Vec::new();
    let mut noise_rejected = false;
    for c in problem.sorted_by_noise() {
        if problem.covers(&chosen) {
            break;
        }
        if chosen.len() + 1 > p.device_limit {
            break;
        }
        let mut trial = chosen.clone();
        trial.push(c);
        let (_, v) = problem
            .check_feasible(&trial.iter().map(|c| c.id.clone()).collect::<Vec<_>>())
            .expect("candidates come from the problem");
        if v.contains(&Constraint::NoiseThreshold) {
            noise_rejected = true;
            continue;
        }
        chosen = trial;
    }
    let mut result = problem.result_for(&chosen, &[]);
    if !result.feasible
        && noise_rejected
        && !result.violations.contains(&Constraint::NoiseThreshold)
    {
        result.violations.push(Constraint::NoiseThreshold);
        result.violations.sort();
    }
    result
}

/// Noise-blind baseline: devices in seeded random order, taken until
/// capacity and parallelisation are covered (or the device limit is hit).
pub fn random_select(problem: &SelectionProblem, seed: u64) -> SelectionResult {
    let mut order: Vec<&Candidate> = problem.candidates.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    order.shuffle(&mut rng::rng(seed));
    let mut chosen = Vec::new();
    for c in order {
        if problem.covers(&chosen) || chosen.len() >= problem.params.device_limit {
            break;
        }
        chosen.push(c);
    }
    problem.result_for(&chosen, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::problem::SelectionParams;

    fn problem(model: usize, delta: f64, d: usize, plim: usize) -> SelectionProblem {
        let candidates = [("c", 7, 0.3), ("a", 5, 0.1), ("b", 5, 0.2)]
            .iter()
            .map(|&(id, capacity, n_eff)| Candidate {
                id: id.into(),
                capacity,
                n_eff,
                quantum_volume: 16,
            })
            .collect();
        SelectionProblem::new(
            candidates,
            SelectionParams {
                model_capacity: model,
                noise_threshold: delta,
                parallel_limit: plim,
                data_dim: d,
                device_limit: 3,
            },
        )
        .unwrap()
    }

    #[test]
    fn small_model_takes_least_noisy_device() {
        let r = greedy_select(&problem(4, 1.0, 4, 4));
        assert!(r.feasible);
        assert_eq!(r.selected, vec!["a"]);
        assert!((r.aggregate_noise - 0.1).abs() < 1e-15);
        assert_eq!(r.avg_quantum_volume, 16.0);
    }

    #[test]
    fn larger_model_takes_two() {
        let r = greedy_select(&problem(10, 1.0, 8, 4));
        assert_eq!(r.selected, vec!["a", "b"]);
        assert!((r.aggregate_noise - 0.15).abs() < 1e-12);
    }

    #[test]
    fn tight_threshold_is_infeasible() {
        let r = greedy_select(&problem(4, 0.05, 4, 4));
        assert!(!r.feasible);
        assert!(r.violations.contains(&Constraint::NoiseThreshold));
        assert!(r.selected.is_empty());
    }

    #[test]
    fn random_selection_is_seeded() {
        let p = problem(10, 1.0, 8, 4);
        assert_eq!(random_select(&p, 3), random_select(&p, 3));
        assert!(random_select(&p, 3).selected.len() >= 2);
    }
}
