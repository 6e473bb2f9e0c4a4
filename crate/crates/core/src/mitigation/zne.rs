use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Circuit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extrapolation {
    /// Least-squares line evaluated at scale 0.
    Linear,
    /// Interpolating polynomial through all points, evaluated at 0.
    Richardson,
    /// Fit of `a * b^c`, returning `a`.
    Exponential,
}

impl fmt::Display for Extrapolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Extrapolation::Linear => "linear",
            Extrapolation::Richardson => "richardson",
            Extrapolation::Exponential => "exponential",
        })
    }
}

impl FromStr for Extrapolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Extrapolation::Linear),
            "richardson" => Ok(Extrapolation::Richardson),
            "exponential" | "exp" => Ok(Extrapolation::Exponential),
            other => Err(Error::InvalidParameter(format!(
                "unknown extrapolation `{other}`"
            ))),
        }
    }
}

/// Noise scale factors (odd integers starting at 1) and the fit used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZneConfig {
    pub scale_factors: Vec<usize>,
    pub method: Extrapolation,
}

impl Default for ZneConfig {
    fn default() -> Self {
        Self {
            scale_factors: vec![1, 3, 5],
            method: Extrapolation::Linear,
        }
    }
}

impl ZneConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.scale_factors;
        if s.len() < 2 || s[0] != 1 {
            return Err(Error::InvalidParameter(
                "ZNE needs at least two scale factors starting at 1".into(),
            ));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) || s.iter().any(|c| c % 2 == 0) {
            return Err(Error::InvalidParameter(format!(
                "ZNE scale factors {s:?} must be strictly increasing odd integers"
            )));
        }
        Ok(())
    }
}

/// Replaces every gate `G` with `G (G^dagger G)^((c-1)/2)`.
pub fn fold_circuit(circuit: &Circuit, scale: usize) -> Result<Circuit> {
    if scale.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "fold scale {scale} must be an odd positive integer"
        )));
    }
    let reps = (scale - 1) / 2;
    let mut gates = Vec::with_capacity(circuit.len() * scale);
    for g in circuit.gates() {
        gates.push(*g);
        for _ in 0..reps {
            gates.push(g.inverse());
            gates.push(*g);
        }
    }
    Circuit::from_gates(circuit.n_qubits(), gates)
}

fn linear_fit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(Error::DegenerateFit("all scale factors coincide".into()));
    }
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    Ok((my - slope * mx, slope))
}

/// Zero-noise estimate from `(scale, value)` points, clamped to `[-1, 1]`.
pub fn zne_estimate(points: &[(f64, f64)], method: Extrapolation) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].iter().any(|b| b.0 == a.0) {
            return Err(Error::DegenerateFit(format!(
                "repeated scale factor {}",
                a.0
            )));
        }
    }
    let value = match method {
        Extrapolation::Linear => linear_fit(points)?.0,
        Extrapolation::Richardson => points
            .iter()
            .enumerate()
            .map(|(i, &(xi, yi))| {
                let basis: f64 = points
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, &(xj, _))| xj / (xj - xi))
                    .product();
                yi * basis
            })
            .sum(),
        Extrapolation::Exponential => {
            let sign = points[0].1.signum();
            if points.iter().any(|p| p.1 == 0.0 || p.1.signum() != sign) {
                return Err(Error::DegenerateFit(
                    "exponential fit needs values of one sign".into(),
                ));
            }
            let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x, (y * sign).ln())).collect();
            sign * linear_fit(&logs)?.0.exp()
        }
    };
    if !value.is_finite() {
        return Err(Error::DegenerateFit(format!("non-finite estimate {value}")));
    }
    Ok(value.clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Gate;

    #[test]
    fn folding_scales_gate_count() {
        let c = Circuit::from_gates(
            2,
            vec![
                Gate::H(0),
                Gate::Cnot {
                    control: 0,
                    target: 1,
                },
            ],
        )
        .unwrap();
        assert_eq!(fold_circuit(&c, 1).unwrap(), c);
        assert_eq!(fold_circuit(&c, 5).unwrap().len(), 10);
        assert!(fold_circuit(&c, 2).is_err());
    }

    #[test]
    fn estimates() {
        assert!(
            (zne_estimate(&[(1.0, 0.3), (3.0, 0.3)], Extrapolation::Linear).unwrap() - 0.3).abs()
                < 1e-15
        );
        assert!(
            (zne_estimate(&[(1.0, 0.8), (3.0, 0.4)], Extrapolation::Linear).unwrap() - 1.0).abs()
                < 1e-12
        );
        let pts: Vec<(f64, f64)> = [1.0, 3.0, 5.0]
            .iter()
            .map(|&c| (c, 0.9 * 0.8f64.powf(c)))
            .collect();
        assert!((zne_estimate(&pts, Extrapolation::Exponential).unwrap() - 0.9).abs() < 1e-6);
        let quad: Vec<(f64, f64)> = [1.0, 3.0, 5.0]
            .iter()
            .map(|&c| (c, 0.5 - 0.05 * c + 0.002 * c * c))
            .collect();
        assert!((zne_estimate(&quad, Extrapolation::Richardson).unwrap() - 0.5).abs() < 1e-12);
        assert!(zne_estimate(&[(1.0, 0.5)], Extrapolation::Linear).is_err());
        assert!(zne_estimate(&[(1.0, 0.5), (1.0, 0.4)], Extrapolation::Linear).is_err());
        assert!(zne_estimate(&[(1.0, 0.5), (3.0, -0.1)], Extrapolation::Exponential).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ZneConfig::default().validate().is_ok());
        for bad in [vec![1], vec![3, 5], vec![1, 2], vec![1, 5, 3]] {
            let c = ZneConfig {
                scale_factors: bad,
                method: Extrapolation::Linear,
            };
            assert!(c.validate().is_err());
        }
    }
}
