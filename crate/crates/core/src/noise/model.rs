use super::calibration::CalibrationData;
use super::channels::{make_amplitude_damping, make_depolarizing, make_phase_damping};
use crate::error::{Error, Result};
use crate::sim::{Gate, GateKind, KrausChannel};

/// Channels applied after a gate, each with the qubits it acts on.
pub type GateNoise = Vec<(KrausChannel, Vec<usize>)>;

/// Source of noise for circuit execution.
pub trait NoiseModel: Send + Sync {
    /// Channels appended after `gate`.
    fn gate_noise(&self, gate: &Gate) -> Result<GateNoise>;

    /// Probability that a measured bit of qubit `q` is reported flipped.
    fn readout_error(&self, _q: usize) -> f64 {
        0.0
    }

    /// Probability that qubit `q` starts in `|1>` instead of `|0>`.
    fn prep_error(&self, _q: usize) -> f64 {
        0.0
    }
}

/// No noise at all.
#[derive(Clone, Copy, Debug, Default)]
pub struct IdealNoise;

impl NoiseModel for IdealNoise {
    fn gate_noise(&self, _gate: &Gate) -> Result<GateNoise> {
        Ok(Vec::new())
    }
}

/// The same single-qubit channel after every gate, on each of its targets.
#[derive(Clone, Debug)]
pub struct UniformNoise {
    channel: KrausChannel,
    readout: f64,
}

impl UniformNoise {
    pub fn new(channel: KrausChannel) -> Result<Self> {
        if channel.n_qubits() != 1 {
            return Err(Error::ArityMismatch {
                expected: 1,
                got: channel.n_qubits(),
            });
        }
        Ok(Self {
            channel,
            readout: 0.0,
        })
    }

    pub fn with_readout(mut self, p: f64) -> Self {
        self.readout = p;
        self
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }
}

impl NoiseModel for UniformNoise {
    fn gate_noise(&self, gate: &Gate) -> Result<GateNoise> {
        Ok(gate
            .targets()
            .into_iter()
            .map(|q| (self.channel.clone(), vec![q]))
            .collect())
    }

    fn readout_error(&self, _q: usize) -> f64 {
        self.readout
    }
}

/// Noise derived from a device calibration (see [`gate_noise_channel`]).
#[derive(Clone, Debug)]
pub struct CalibratedNoise {
    calib: CalibrationData,
}

impl CalibratedNoise {
    pub fn new(calib: CalibrationData) -> Result<Self> {
        calib.validate()?;
        Ok(Self { calib })
    }

    pub fn calibration(&self) -> &CalibrationData {
        &self.calib
    }
}

impl NoiseModel for CalibratedNoise {
    fn gate_noise(&self, gate: &Gate) -> Result<GateNoise> {
        gate_noise_channel(&self.calib, gate)
    }

    fn readout_error(&self, q: usize) -> f64 {
        measurement_noise(&self.calib, q)
    }

    fn prep_error(&self, q: usize) -> f64 {
        self.calib.prep01.get(q).copied().unwrap_or(0.0)
    }
}

/// `1 - exp(-t / T)` with `t` in ns and `T` in µs.
pub fn decay_probability(duration_ns: f64, time_us: f64) -> f64 {
    if !time_us.is_finite() || duration_ns <= 0.0 {
        return 0.0;
    }
    1.0 - (-duration_ns / (time_us * 1e3)).exp()
}

/// Per-target channels following `gate` on a calibrated device: depolarizing
/// at the gate's calibrated error, then amplitude damping over the gate
/// duration against T1 and phase damping against T2. Zero-strength channels
/// are omitted.
pub fn gate_noise_channel(calib: &CalibrationData, gate: &Gate) -> Result<GateNoise> {
    let kind = gate.kind();
    let targets = gate.targets();
    let n = calib.n_qubits();
    if let Some(&q) = targets.iter().find(|&&q| q >= n) {
        return Err(Error::InvalidTarget {
            index: q,
            n_qubits: n,
        });
    }
    let err = match (kind, targets.as_slice()) {
        (GateKind::Cnot, &[c, t]) => calib.two_error(kind, c, t)?,
        (_, &[q]) => calib.single_error(kind, q)?,
        _ => unreachable!("gate arity is 1 or 2"),
    };
    let duration = calib.duration_ns(kind)?;
    let mut out = Vec::new();
    for &q in &targets {
        if err > 0.0 {
            out.push((make_depolarizing(err)?, vec![q]));
        }
        let p1 = decay_probability(duration, calib.t1[q]);
        if p1 > 0.0 {
            out.push((make_amplitude_damping(p1)?, vec![q]));
        }
        let p2 = decay_probability(duration, calib.t2[q]);
        if p2 > 0.0 {
            out.push((make_phase_damping(p2)?, vec![q]));
        }
    }
    Ok(out)
}

/// Readout flip probability of qubit `q` (independent of the ideal bit).
pub fn measurement_noise(calib: &CalibrationData, q: usize) -> f64 {
    calib.readout_err.get(q).copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::calibration::all_ordered_pairs;
    use crate::sim::ChannelLabel;

    #[test]
    fn ideal_device_has_no_gate_noise() {
        let c = CalibrationData::ideal(2);
        assert!(gate_noise_channel(&c, &Gate::H(0)).unwrap().is_empty());
        assert!(gate_noise_channel(
            &c,
            &Gate::Cnot {
                control: 0,
                target: 1
            }
        )
        .unwrap()
        .is_empty());
    }

    #[test]
    fn cnot_error_maps_to_depolarizing_on_both_targets() {
        let mut c = CalibrationData::uniform(
            2,
            f64::INFINITY,
            f64::INFINITY,
            0.0,
            0.01,
            &all_ordered_pairs(2),
            0.0,
            0.0,
        );
        c.gate_duration.insert("cx".into(), 0.0);
        let noise = gate_noise_channel(
            &c,
            &Gate::Cnot {
                control: 1,
                target: 0,
            },
        )
        .unwrap();
        assert_eq!(noise.len(), 2);
        for ((ch, t), q) in noise.iter().zip([1, 0]) {
            assert_eq!(ch.label(), &ChannelLabel::Depolarizing(0.01));
            assert_eq!(t, &vec![q]);
        }
    }

    #[test]
    fn missing_gate_kind_errors() {
        let mut c = CalibrationData::ideal(1);
        c.single_gate_err.remove("h");
        assert!(matches!(
            gate_noise_channel(&c, &Gate::H(0)),
            Err(Error::MissingCalibration { .. })
        ));
    }

    #[test]
    fn decay_from_duration() {
        let p = decay_probability(100.0, 100.0);
        assert!((p - (1.0 - (-0.001f64).exp())).abs() < 1e-15);
        assert_eq!(decay_probability(100.0, f64::INFINITY), 0.0);
    }
}
