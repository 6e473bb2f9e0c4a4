use serde::{Deserialize, Serialize};

use super::calibration::CalibrationData;
use crate::error::{Error, Result};

/// Weights of the five error aggregates: coherence, single-qubit gates,
/// two-qubit gates, readout, state preparation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseWeights(pub [f64; 5]);

impl Default for NoiseWeights {
    /// Two-qubit gate errors weigh the most.
    fn default() -> Self {
        Self([0.2, 0.1, 0.4, 0.2, 0.1])
    }
}

impl NoiseWeights {
    pub fn uniform() -> Self {
        Self([0.2; 5])
    }

    /// Rescaled to sum to one.
    pub fn normalized(&self) -> Result<Self> {
        if self.0.iter().any(|w| *w < 0.0 || w.is_nan()) {
            return Err(Error::InvalidParameter(format!(
                "negative noise weight in {:?}",
                self.0
            )));
        }
        let total: f64 = self.0.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("noise weights sum to zero".into()));
        }
        Ok(Self(self.0.map(|w| w / total)))
    }
}

/// Normalisers applied to the raw aggregates before weighting.
///
/// `t_eff_max` is the best total coherence `sum_j (T1_j + T2_j)` in the fleet;
/// the coherence term is `1 - T_eff / t_eff_max`. The four error sums are
/// divided by their own maxima.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseScale {
    pub t_eff_max: f64,
    pub g1_max: f64,
    pub g2_max: f64,
    pub readout_max: f64,
    pub prep_max: f64,
}

impl NoiseScale {
    /// Only the coherence term is normalised; error sums are used as is.
    pub fn coherence_only(t_eff_max: f64) -> Self {
        Self {
            t_eff_max,
            g1_max: 1.0,
            g2_max: 1.0,
            readout_max: 1.0,
            prep_max: 1.0,
        }
    }

    /// Per-component maxima over a fleet, so every term lies in `[0, 1]`.
    pub fn from_fleet<'a, I>(calibrations: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a CalibrationData>,
    {
        let mut s = Self {
            t_eff_max: 0.0,
            g1_max: 0.0,
            g2_max: 0.0,
            readout_max: 0.0,
            prep_max: 0.0,
        };
        let mut any = false;
        for c in calibrations {
            let raw = RawAggregates::of(c)?;
            s.t_eff_max = s.t_eff_max.max(raw.t_eff);
            s.g1_max = s.g1_max.max(raw.g1);
            s.g2_max = s.g2_max.max(raw.g2);
            s.readout_max = s.readout_max.max(raw.readout);
            s.prep_max = s.prep_max.max(raw.prep);
            any = true;
        }
        if !any {
            return Err(Error::Calibration("empty fleet".into()));
        }
        // an all-zero component contributes zero whatever the divisor
        for m in [
            &mut s.g1_max,
            &mut s.g2_max,
            &mut s.readout_max,
            &mut s.prep_max,
        ] {
            if *m <= 0.0 {
                *m = 1.0;
            }
        }
        Ok(s)
    }
}

struct RawAggregates {
    t_eff: f64,
    g1: f64,
    g2: f64,
    readout: f64,
    prep: f64,
}

impl RawAggregates {
    fn of(c: &CalibrationData) -> Result<Self> {
        if c.n_qubits() == 0 {
            return Err(Error::Calibration("empty calibration".into()));
        }
        Ok(Self {
            t_eff: c.t1.iter().zip(&c.t2).map(|(a, b)| a + b).sum(),
            g1: c.single_gate_err.values().flatten().sum(),
            g2: c.two_gate_err.iter().map(|e| e.error).sum(),
            readout: c.readout_err.iter().sum(),
            prep: c.prep01.iter().chain(&c.prep10).sum(),
        })
    }
}

/// Raw aggregates, the coherence term and the weighted score.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveNoiseBreakdown {
    /// `sum_j (T1_j + T2_j)` in microseconds.
    pub t_eff: f64,
    /// `1 - t_eff / t_eff_max`, clamped to `[0, 1]`.
    pub t_term: f64,
    pub g1_err: f64,
    pub g2_err: f64,
    pub readout_err: f64,
    pub prep_err: f64,
    pub n_eff: f64,
}

/// Weighted effective-noise score of one device; higher means noisier.
pub fn effective_noise(
    calib: &CalibrationData,
    weights: &NoiseWeights,
    scale: &NoiseScale,
) -> Result<EffectiveNoiseBreakdown> {
    let raw = RawAggregates::of(calib)?;
    let w = weights.normalized()?.0;
    let t_term = if raw.t_eff.is_finite() && scale.t_eff_max.is_finite() && scale.t_eff_max > 0.0 {
        (1.0 - raw.t_eff / scale.t_eff_max).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let terms = [
        t_term,
        raw.g1 / scale.g1_max,
        raw.g2 / scale.g2_max,
        raw.readout / scale.readout_max,
        raw.prep / scale.prep_max,
    ];
    let n_eff = w.iter().zip(terms).map(|(w, t)| w * t).sum();
    Ok(EffectiveNoiseBreakdown {
        t_eff: raw.t_eff,
        t_term,
        g1_err: raw.g1,
        g2_err: raw.g2,
        readout_err: raw.readout,
        prep_err: raw.prep,
        n_eff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::calibration::all_ordered_pairs;

    #[test]
    fn noiseless_at_fleet_max_scores_zero() {
        let c =
            CalibrationData::uniform(2, 100.0, 100.0, 0.0, 0.0, &all_ordered_pairs(2), 0.0, 0.0);
        let b = effective_noise(
            &c,
            &NoiseWeights::default(),
            &NoiseScale::coherence_only(400.0),
        )
        .unwrap();
        assert_eq!(b.n_eff, 0.0);
    }

    #[test]
    fn weight_normalisation() {
        let w = NoiseWeights([1.0, 1.0, 2.0, 0.0, 0.0])
            .normalized()
            .unwrap();
        assert_eq!(w.0, [0.25, 0.25, 0.5, 0.0, 0.0]);
        assert!(NoiseWeights([0.0; 5]).normalized().is_err());
        assert!(NoiseWeights([-1.0, 1.0, 1.0, 1.0, 1.0])
            .normalized()
            .is_err());
    }

    #[test]
    fn fleet_scale_bounds_terms() {
        let a = CalibrationData::uniform(
            2,
            100.0,
            80.0,
            1e-3,
            1e-2,
            &all_ordered_pairs(2),
            0.02,
            0.01,
        );
        let b =
            CalibrationData::uniform(3, 50.0, 40.0, 2e-3, 3e-2, &all_ordered_pairs(3), 0.05, 0.02);
        let s = NoiseScale::from_fleet([&a, &b]).unwrap();
        for c in [&a, &b] {
            let n = effective_noise(c, &NoiseWeights::default(), &s)
                .unwrap()
                .n_eff;
            assert!((0.0..=1.0).contains(&n));
        }
        assert!(NoiseScale::from_fleet(std::iter::empty()).is_err());
    }
}
