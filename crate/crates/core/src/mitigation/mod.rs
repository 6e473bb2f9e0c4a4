//! Error-mitigated expectation values: zero-noise extrapolation by gate
//! folding, and probabilistic error cancellation for Pauli noise.

mod pec;
mod zne;

use serde::{Deserialize, Serialize};

pub use pec::{
    pauli_inverse_of, pauli_transfer_matrix, pec_estimate, pec_representation, PecEstimate,
    PecRepresentation,
};
pub use zne::{fold_circuit, zne_estimate, Extrapolation, ZneConfig};

use crate::error::{Error, Result};
use crate::noise::{ChannelSpec, Executor, IdealNoise, NoiseModel, UniformNoise};
use crate::rng;
use crate::sim::{Circuit, Gate, Observable, Pauli};

/// Mitigation applied to every expectation a model evaluates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Mitigation {
    #[default]
    None,
    Zne(ZneConfig),
    /// Infinite-sample cancellation against the Pauli-twirled gate noise.
    Pec,
}

impl Mitigation {
    pub fn label(&self) -> &'static str {
        match self {
            Mitigation::None => "none",
            Mitigation::Zne(_) => "zne",
            Mitigation::Pec => "pec",
        }
    }
}

/// Mitigated `<Z_q>` for every qubit of `circuit`. `inverted` must be the
/// executor's noise-inverting variant when PEC is requested.
pub fn mitigated_z(
    executor: &Executor,
    inverted: Option<&Executor>,
    mitigation: &Mitigation,
    circuit: &Circuit,
) -> Result<Vec<f64>> {
    match mitigation {
        Mitigation::None => executor.z_expectations(circuit),
        Mitigation::Pec => inverted
            .ok_or_else(|| {
                Error::InvalidParameter("PEC requested without an inverted executor".into())
            })?
            .z_expectations(circuit),
        Mitigation::Zne(cfg) => {
            let base = executor.z_expectations(circuit)?;
            if executor.is_noiseless() {
                return Ok(base);
            }
            let mut scaled = vec![base];
            for &c in &cfg.scale_factors[1..] {
                scaled.push(executor.z_expectations(&fold_circuit(circuit, c)?)?);
            }
            Ok((0..scaled[0].len())
                .map(|q| {
                    let pts: Vec<(f64, f64)> = cfg
                        .scale_factors
                        .iter()
                        .zip(&scaled)
                        .map(|(&c, z)| (c as f64, z[q]))
                        .collect();
                    // a failed fit leaves the unmitigated value
                    zne_estimate(&pts, cfg.method).unwrap_or(pts[0].1)
                })
                .collect())
        }
    }
}

/// Three-qubit circuit used to benchmark mitigation.
pub fn benchmark_circuit() -> Circuit {
    Circuit::from_gates(
        3,
        vec![
            Gate::Ry(0, 0.5),
            Gate::Rx(1, 0.3),
            Gate::Cnot {
                control: 0,
                target: 1,
            },
            Gate::Ry(2, 0.4),
            Gate::Cnot {
                control: 1,
                target: 2,
            },
            Gate::Rz(0, 0.7),
            Gate::Ry(1, -0.2),
            Gate::Cnot {
                control: 0,
                target: 2,
            },
            Gate::Rx(2, 0.25),
            Gate::Ry(0, 0.15),
        ],
    )
    .expect("valid benchmark circuit")
}

/// Observable measured on [`benchmark_circuit`]: `Z` on qubit 0.
pub fn benchmark_observable() -> Observable {
    Observable::new(vec![Pauli::Z, Pauli::I, Pauli::I])
}

/// Finite-shot estimate of a diagonal observable.
pub fn shot_expectation(
    executor: &Executor,
    circuit: &Circuit,
    obs: &Observable,
    shots: usize,
    seed: u64,
) -> Result<f64> {
    if !obs.is_diagonal() {
        return Err(Error::InvalidParameter(
            "shot estimates need an I/Z observable".into(),
        ));
    }
    let counts = executor.sample_counts(circuit, shots, seed)?;
    let mask = obs.support_mask();
    let total: f64 = counts
        .iter()
        .map(|(bits, &c)| {
            let idx = usize::from_str_radix(bits, 2).expect("binary key");
            let parity = (idx & mask).count_ones();
            if parity.is_multiple_of(2) {
                c as f64
            } else {
                -(c as f64)
            }
        })
        .sum();
    Ok(total / shots as f64)
}

/// Shots per circuit used by the mitigation benchmark unless overridden.
pub const DEFAULT_SHOTS: usize = 10_000;

/// Mitigation method for [`benchmark_row`].
#[derive(Clone, Debug, PartialEq)]
pub enum BenchMethod {
    Zne { config: ZneConfig, shots: usize },
    Pec { samples: usize },
}

/// One benchmark outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub ideal: f64,
    pub raw: f64,
    pub mitigated: f64,
    pub abs_error: f64,
}

/// Runs the benchmark circuit under `noise` on every gate: ideal value,
/// finite-shot unmitigated value, and the mitigated estimate.
pub fn benchmark_row(noise: &ChannelSpec, method: &BenchMethod, seed: u64) -> Result<BenchRow> {
    let circuit = benchmark_circuit();
    let obs = benchmark_observable();
    let model = UniformNoise::new(noise.channel()?)?;
    let ideal = Executor::new(&IdealNoise, 3)?.expectation(&circuit, &obs)?;
    let noisy = Executor::new(&model, 3)?;
    let (name, raw, mitigated) = match method {
        BenchMethod::Zne { config, shots } => {
            config.validate()?;
            let mut pts = Vec::new();
            for (i, &c) in config.scale_factors.iter().enumerate() {
                let folded = fold_circuit(&circuit, c)?;
                let v = shot_expectation(
                    &noisy,
                    &folded,
                    &obs,
                    *shots,
                    rng::derive(seed, &[1, i as u64]),
                )?;
                pts.push((c as f64, v));
            }
            ("zne", pts[0].1, zne_estimate(&pts, config.method)?)
        }
        BenchMethod::Pec { samples } => {
            let raw =
                shot_expectation(&noisy, &circuit, &obs, *samples, rng::derive(seed, &[1, 0]))?;
            let est = pec_estimate(
                &circuit,
                &model as &dyn NoiseModel,
                &obs,
                *samples,
                rng::derive(seed, &[2]),
            )?;
            ("pec", raw, est.value)
        }
    };
    Ok(BenchRow {
        method: name.into(),
        ideal,
        raw,
        mitigated,
        abs_error: (mitigated - ideal).abs(),
    })
}
