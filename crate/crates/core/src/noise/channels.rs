use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{pauli_matrices, CMatrix, ChannelLabel, KrausChannel, C64};

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidProbability(format!(
            "{name} = {p} not in [0, 1]"
        )));
    }
    Ok(())
}

/// Builds a channel from `(weight, operator)` pairs, skipping zero weights.
fn weighted(terms: Vec<(f64, CMatrix)>, label: ChannelLabel) -> Result<KrausChannel> {
    let ops = terms
        .into_iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, m)| m.scale(C64::new(w.sqrt(), 0.0)))
        .collect();
    KrausChannel::new(ops, label)
}

/// `sqrt(1-p) I`, `sqrt(p) X`.
pub fn make_bit_flip(p: f64) -> Result<KrausChannel> {
    check_probability("p", p)?;
    let [i, x, _, _] = pauli_matrices();
    weighted(vec![(1.0 - p, i), (p, x)], ChannelLabel::BitFlip(p))
}

/// `sqrt(1-p) I`, `sqrt(p) Z`.
pub fn make_phase_flip(p: f64) -> Result<KrausChannel> {
    check_probability("p", p)?;
    let [i, _, _, z] = pauli_matrices();
    weighted(vec![(1.0 - p, i), (p, z)], ChannelLabel::PhaseFlip(p))
}

/// `sqrt(1-3p/4) I` and `sqrt(p/4)` times each of `X`, `Y`, `Z`; `p = 1` is
/// the completely depolarizing map `rho -> I/2`.
pub fn make_depolarizing(p: f64) -> Result<KrausChannel> {
    check_probability("p", p)?;
    let [i, x, y, z] = pauli_matrices();
    let q = p / 4.0;
    weighted(
        vec![(1.0 - 3.0 * q, i), (q, x), (q, y), (q, z)],
        ChannelLabel::Depolarizing(p),
    )
}

/// `K0 = diag(1, sqrt(1-p))`, `K1 = [[0, sqrt(p)], [0, 0]]`.
pub fn make_amplitude_damping(p: f64) -> Result<KrausChannel> {
    check_probability("p", p)?;
    let k0 = CMatrix::from_real(&[&[1.0, 0.0], &[0.0, (1.0 - p).sqrt()]]);
    let k1 = CMatrix::from_real(&[&[0.0, p.sqrt()], &[0.0, 0.0]]);
    let ops = if p > 0.0 { vec![k0, k1] } else { vec![k0] };
    KrausChannel::new(ops, ChannelLabel::AmplitudeDamping(p))
}

/// `K0 = diag(1, sqrt(1-p))`, `K1 = diag(0, sqrt(p))`.
pub fn make_phase_damping(p: f64) -> Result<KrausChannel> {
    check_probability("p", p)?;
    let k0 = CMatrix::from_real(&[&[1.0, 0.0], &[0.0, (1.0 - p).sqrt()]]);
    let k1 = CMatrix::from_real(&[&[0.0, 0.0], &[0.0, p.sqrt()]]);
    let ops = if p > 0.0 { vec![k0, k1] } else { vec![k0] };
    KrausChannel::new(ops, ChannelLabel::PhaseDamping(p))
}

/// General single-qubit Pauli channel.
pub fn make_pauli(px: f64, py: f64, pz: f64) -> Result<KrausChannel> {
    for (name, p) in [("px", px), ("py", py), ("pz", pz)] {
        check_probability(name, p)?;
    }
    let total = px + py + pz;
    if total > 1.0 + 1e-12 {
        return Err(Error::InvalidProbability(format!(
            "px + py + pz = {total} exceeds 1"
        )));
    }
    let [i, x, y, z] = pauli_matrices();
    weighted(
        vec![((1.0 - total).max(0.0), i), (px, x), (py, y), (pz, z)],
        ChannelLabel::Pauli { px, py, pz },
    )
}

/// Named single-qubit channel family used for transmission noise and
/// benchmarks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    None,
    BitFlip,
    PhaseFlip,
    Depolarizing,
    AmpDamp,
}

impl ChannelKind {
    /// The four noisy kinds, in reporting order.
    pub const NOISY: [ChannelKind; 4] = [
        ChannelKind::BitFlip,
        ChannelKind::PhaseFlip,
        ChannelKind::Depolarizing,
        ChannelKind::AmpDamp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::None => "none",
            ChannelKind::BitFlip => "bitflip",
            ChannelKind::PhaseFlip => "phaseflip",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::AmpDamp => "ampdamp",
        }
    }

    pub fn channel(self, p: f64) -> Result<KrausChannel> {
        match self {
            ChannelKind::None => Ok(KrausChannel::identity(1)),
            ChannelKind::BitFlip => make_bit_flip(p),
            ChannelKind::PhaseFlip => make_phase_flip(p),
            ChannelKind::Depolarizing => make_depolarizing(p),
            ChannelKind::AmpDamp => make_amplitude_damping(p),
        }
    }

    /// `(px, py, pz)` when the channel is a Pauli channel.
    pub fn pauli_probs(self, p: f64) -> Option<(f64, f64, f64)> {
        match self {
            ChannelKind::None => Some((0.0, 0.0, 0.0)),
            ChannelKind::BitFlip => Some((p, 0.0, 0.0)),
            ChannelKind::PhaseFlip => Some((0.0, 0.0, p)),
            ChannelKind::Depolarizing => Some((p / 4.0, p / 4.0, p / 4.0)),
            ChannelKind::AmpDamp => None,
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(ChannelKind::None),
            "bitflip" | "bit-flip" | "bit_flip" => Ok(ChannelKind::BitFlip),
            "phaseflip" | "phase-flip" | "phase_flip" => Ok(ChannelKind::PhaseFlip),
            "depolarizing" | "depolarising" | "depol" => Ok(ChannelKind::Depolarizing),
            "ampdamp" | "amplitude-damping" | "amplitude_damping" => Ok(ChannelKind::AmpDamp),
            other => Err(Error::InvalidParameter(format!(
                "unknown channel kind `{other}`"
            ))),
        }
    }
}

/// A channel kind with its intensity, written `kind:p` (e.g. `depolarizing:0.02`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub p: f64,
}

impl ChannelSpec {
    pub fn none() -> Self {
        Self {
            kind: ChannelKind::None,
            p: 0.0,
        }
    }

    pub fn new(kind: ChannelKind, p: f64) -> Result<Self> {
        check_probability("p", p)?;
        Ok(Self { kind, p })
    }

    pub fn is_identity(&self) -> bool {
        self.kind == ChannelKind::None || self.p == 0.0
    }

    pub fn channel(&self) -> Result<KrausChannel> {
        self.kind.channel(self.p)
    }
}

impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None => {
                let kind: ChannelKind = s.parse()?;
                if kind != ChannelKind::None {
                    return Err(Error::InvalidParameter(format!(
                        "channel `{s}` needs an intensity, e.g. `{s}:0.01`"
                    )));
                }
                Ok(Self::none())
            }
            Some((k, p)) => {
                let p: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad intensity in `{s}`")))?;
                Self::new(k.trim().parse()?, p)
            }
        }
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_flip_operators() {
        let ch = make_bit_flip(0.25).unwrap();
        let [i, x, _, _] = pauli_matrices();
        assert_eq!(ch.operators().len(), 2);
        assert!(ch.operators()[0].approx_eq(&i.scale(C64::new(0.75f64.sqrt(), 0.0)), 1e-15));
        assert!(ch.operators()[1].approx_eq(&x.scale(C64::new(0.5, 0.0)), 1e-15));
    }

    #[test]
    fn amplitude_damping_operators() {
        let ch = make_amplitude_damping(0.5).unwrap();
        let h = 0.5f64.sqrt();
        assert!(ch.operators()[0].approx_eq(&CMatrix::from_real(&[&[1.0, 0.0], &[0.0, h]]), 1e-15));
        assert!(ch.operators()[1].approx_eq(&CMatrix::from_real(&[&[0.0, h], &[0.0, 0.0]]), 1e-15));
    }

    #[test]
    fn zero_depolarizing_is_single_identity() {
        let ch = make_depolarizing(0.0).unwrap();
        assert_eq!(ch.operators(), &[CMatrix::identity(2)]);
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(make_bit_flip(1.5).is_err());
        assert!(make_depolarizing(-0.1).is_err());
        assert!(make_pauli(0.5, 0.4, 0.2).is_err());
        assert!(make_pauli(-0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn spec_parsing() {
        let s: ChannelSpec = "depolarizing:0.02".parse().unwrap();
        assert_eq!(s.kind, ChannelKind::Depolarizing);
        assert_eq!(s.p, 0.02);
        assert!("none".parse::<ChannelSpec>().unwrap().is_identity());
        assert!("bitflip".parse::<ChannelSpec>().is_err());
        assert!("warp:0.1".parse::<ChannelSpec>().is_err());
        assert_eq!(s.to_string().parse::<ChannelSpec>().unwrap(), s);
    }
}
