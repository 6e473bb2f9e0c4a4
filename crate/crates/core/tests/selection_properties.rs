use nacqfl::noise::{make_depolarizing, IdealNoise, UniformNoise};
use nacqfl::selection::{
    brute_force_select, greedy_select, quantum_volume, subsets_up_to, Candidate, Constraint,
    SelectionParams, SelectionProblem,
};
use proptest::prelude::*;

fn candidates(caps: &[usize], noise: &[f64]) -> Vec<Candidate> {
    caps.iter()
        .zip(noise)
        .enumerate()
        .map(|(i, (&capacity, &n_eff))| Candidate {
            id: format!("d{i}"),
            capacity,
            n_eff,
            quantum_volume: 1,
        })
        .collect()
}

fn params(
    model_capacity: usize,
    noise_threshold: f64,
    parallel_limit: usize,
    data_dim: usize,
) -> SelectionParams {
    SelectionParams {
        model_capacity,
        noise_threshold,
        parallel_limit,
        data_dim,
        device_limit: 3,
    }
}

fn instance() -> impl Strategy<Value = SelectionProblem> {
    (1usize..=10)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(1usize..=8, n),
                prop::collection::vec(0.0f64..1.0, n),
                1usize..=12,
                0.05f64..1.0,
                1usize..=4,
                1usize..=8,
                1usize..=3,
            )
        })
        .prop_map(|(caps, noise, mc, delta, plim, d, p)| {
            let mut prm = params(mc, delta, plim, d);
            prm.device_limit = p;
            SelectionProblem::new(candidates(&caps, &noise), prm).unwrap()
        })
}

proptest! {
    #[test]
    fn greedy_is_sound_and_oracle_dominates(problem in instance()) {
        let p = problem.params.device_limit;
        let greedy = greedy_select(&problem);
        let oracle = brute_force_select(&problem, p).unwrap();
        prop_assert_eq!(oracle.subsets_enumerated, subsets_up_to(problem.candidates.len(), p));
        if greedy.feasible {
            prop_assert!(problem.check_feasible(&greedy.selected).unwrap().0);
            prop_assert!(oracle.feasible);
            prop_assert!(oracle.aggregate_noise <= greedy.aggregate_noise + 1e-12);
        }
        if !oracle.feasible {
            prop_assert!(!greedy.feasible);
        }
    }

    #[test]
    fn relaxing_the_threshold_keeps_feasibility(problem in instance(), extra in 0.0f64..1.0) {
        let p = problem.params.device_limit;
        let before = brute_force_select(&problem, p).unwrap();
        let mut relaxed = problem.clone();
        relaxed.params.noise_threshold += extra;
        let after = brute_force_select(&relaxed, p).unwrap();
        if before.feasible {
            prop_assert!(after.feasible);
            prop_assert!(after.aggregate_noise <= before.aggregate_noise + 1e-12);
            prop_assert!(relaxed.check_feasible(&before.selected).unwrap().0);
        }
    }
}

#[test]
fn greedy_hand_traces() {
    let devs = candidates(&[5, 5, 7], &[0.1, 0.2, 0.3]);
    let one = greedy_select(&SelectionProblem::new(devs.clone(), params(4, 1.0, 4, 4)).unwrap());
    assert_eq!(one.selected, ["d0"]);
    assert!((one.aggregate_noise - 0.1).abs() < 1e-12);

    let two = greedy_select(&SelectionProblem::new(devs.clone(), params(10, 10.0, 4, 8)).unwrap());
    assert_eq!(two.selected, ["d0", "d1"]);
    assert!(two.feasible);

    let none = greedy_select(&SelectionProblem::new(devs, params(4, 0.05, 4, 4)).unwrap());
    assert!(!none.feasible);
    assert!(none.violations.contains(&Constraint::NoiseThreshold));
}

#[test]
fn constraint_arithmetic() {
    let problem =
        SelectionProblem::new(candidates(&[5, 5], &[0.1, 0.1]), params(8, 1.0, 4, 16)).unwrap();
    let (ok, v) = problem.check_feasible(&["d0".into(), "d1".into()]).unwrap();
    assert!(!ok);
    assert_eq!(v, [Constraint::Parallelization]);
    let (ok, v) = problem.check_feasible(&[]).unwrap();
    assert!(!ok && v.contains(&Constraint::Capacity));
}

#[test]
fn three_devices_enumerate_every_subset() {
    let problem = SelectionProblem::new(
        candidates(&[1, 1, 1], &[0.3, 0.1, 0.2]),
        params(2, 1.0, 4, 1),
    )
    .unwrap();
    let r = brute_force_select(&problem, 3).unwrap();
    // seven non-empty subsets plus the empty one
    assert_eq!(r.subsets_enumerated, 8);
    assert_eq!(r.selected.len(), 2);
    assert!((r.aggregate_noise - 0.15).abs() < 1e-12);
}

#[test]
fn quantum_volume_brackets() {
    assert_eq!(quantum_volume(&IdealNoise, 3, 1).unwrap().quantum_volume, 8);
    let noisy = UniformNoise::new(make_depolarizing(0.5).unwrap()).unwrap();
    assert_eq!(quantum_volume(&noisy, 3, 1).unwrap().quantum_volume, 1);
    assert_eq!(
        quantum_volume(&noisy, 3, 9).unwrap(),
        quantum_volume(&noisy, 3, 9).unwrap()
    );
}
