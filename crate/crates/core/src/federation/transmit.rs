use std::f64::consts::{PI, TAU};

use crate::error::Result;
use crate::noise::ChannelSpec;
use crate::sim::{Superop1, C64};

/// Parameters after a trip through a noisy link.
#[derive(Clone, Debug, PartialEq)]
pub struct Transmitted {
    pub params: Vec<f64>,
    /// Indices whose Bloch vector collapsed to the origin; these decode to 0.
    pub degenerate: Vec<usize>,
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

const DEGENERATE_RADIUS: f64 = 1e-12;

/// Sends each angle as the qubit `RY(theta)|0>` through `channel` and reads
/// it back as `atan2(<X>, <Z>)`. The channels are deterministic maps, so
/// no randomness is involved.
pub fn transmit_params(params: &[f64], channel: &ChannelSpec) -> Result<Transmitted> {
    if channel.is_identity() {
        return Ok(Transmitted {
            params: params.to_vec(),
            degenerate: Vec::new(),
        });
    }
    let s: Superop1 = channel.channel()?.superop().expect("single-qubit channel");
    let mut out = Vec::with_capacity(params.len());
    let mut degenerate = Vec::new();
    for (i, &theta) in params.iter().enumerate() {
        let (sn, cs) = (0.5 * theta).sin_cos();
        let block = [
            C64::new(cs * cs, 0.0),
            C64::new(cs * sn, 0.0),
            C64::new(cs * sn, 0.0),
            C64::new(sn * sn, 0.0),
        ];
        let r = s.apply_block(block);
        let z = (r[0] - r[3]).re;
        let x = (r[1] + r[2]).re;
        if x.hypot(z) < DEGENERATE_RADIUS {
            degenerate.push(i);
            out.push(0.0);
        } else {
            out.push(x.atan2(z));
        }
    }
    Ok(Transmitted {
        params: out,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::ChannelKind;

    fn spec(kind: ChannelKind, p: f64) -> ChannelSpec {
        ChannelSpec::new(kind, p).unwrap()
    }

    #[test]
    fn zero_intensity_round_trips() {
        let theta = [-3.0, -0.4, 0.0, 1.3, 3.1];
        for kind in ChannelKind::NOISY {
            let t = transmit_params(&theta, &spec(kind, 0.0)).unwrap();
            for (a, b) in t.params.iter().zip(&theta) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn half_bit_flip_maps_to_quarter_turn() {
        let t = transmit_params(&[0.3, 1.0, 2.9, -0.7], &spec(ChannelKind::BitFlip, 0.5)).unwrap();
        for (v, s) in t.params.iter().zip([1.0, 1.0, 1.0, -1.0]) {
            assert!((v - s * PI / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn full_depolarizing_is_degenerate() {
        let t = transmit_params(&[0.3, 1.0], &spec(ChannelKind::Depolarizing, 1.0)).unwrap();
        assert_eq!(t.params, vec![0.0, 0.0]);
        assert_eq!(t.degenerate, vec![0, 1]);
    }

    #[test]
    fn wrapping() {
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(0.5), 0.5);
    }
}
