use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{
    effective_noise, CalibrationData, EffectiveNoiseBreakdown, NoiseScale, NoiseWeights,
};

/// A simulated quantum device.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub id: String,
    /// Qubit count.
    pub capacity: usize,
    /// Planar coordinates in km.
    pub position: [f64; 2],
    pub calibration: CalibrationData,
    /// Normalised classical compute units.
    pub classical_resources: f64,
    /// `(px, py, pz)` of the device's quantum link.
    pub link_pauli: [f64; 3],
    /// Cached quantum volume.
    pub quantum_volume: u64,
}

impl DeviceProfile {
    pub fn validate(&self) -> Result<()> {
        if self.capacity == 0 {
            return Err(Error::InvalidParameter(format!(
                "{}: capacity must be >= 1",
                self.id
            )));
        }
        if self.calibration.n_qubits() != self.capacity {
            return Err(Error::Calibration(format!(
                "{}: calibration covers {} qubits, capacity is {}",
                self.id,
                self.calibration.n_qubits(),
                self.capacity
            )));
        }
        self.calibration
            .validate()
            .map_err(|e| Error::Calibration(format!("{}: {e}", self.id)))?;
        if self.classical_resources.is_nan() || self.classical_resources < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "{}: negative classical resources",
                self.id
            )));
        }
        super::capacity::check_link(self.link_pauli)?;
        if self.quantum_volume == 0 || !self.quantum_volume.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "{}: quantum volume {} is not a power of two",
                self.id, self.quantum_volume
            )));
        }
        Ok(())
    }
}

/// Parses and validates a fleet file (a JSON array of profiles).
pub fn parse_fleet(json: &str) -> Result<Vec<DeviceProfile>> {
    let fleet: Vec<DeviceProfile> = serde_json::from_str(json)?;
    validate_fleet(&fleet)?;
    Ok(fleet)
}

pub fn load_fleet(path: impl AsRef<Path>) -> Result<Vec<DeviceProfile>> {
    parse_fleet(&std::fs::read_to_string(path)?)
}

pub fn validate_fleet(fleet: &[DeviceProfile]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for d in fleet {
        d.validate()?;
        if !seen.insert(d.id.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "duplicate device id `{}`",
                d.id
            )));
        }
    }
    Ok(())
}

/// Effective-noise breakdown of every device, normalised against the fleet.
pub fn fleet_noise(
    fleet: &[DeviceProfile],
    weights: &NoiseWeights,
) -> Result<BTreeMap<String, EffectiveNoiseBreakdown>> {
    let scale = NoiseScale::from_fleet(fleet.iter().map(|d| &d.calibration))?;
    fleet
        .iter()
        .map(|d| {
            Ok((
                d.id.clone(),
                effective_noise(&d.calibration, weights, &scale)?,
            ))
        })
        .collect()
}

pub fn find_device<'a>(fleet: &'a [DeviceProfile], id: &str) -> Result<&'a DeviceProfile> {
    fleet
        .iter()
        .find(|d| d.id == id)
        .ok_or_else(|| Error::UnknownDevice(id.to_string()))
}
