//! Declared-power energy model. Nothing here is metered.

use rcsim_core::{Error, Result};
use serde::Serialize;

const JOULES_PER_KWH: f64 = 3.6e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyModel {
    pub device_power_watts: f64,
    pub device_count: u64,
    pub wall_seconds: f64,
}

impl EnergyModel {
    pub fn energy_kwh(&self) -> f64 {
        self.device_power_watts * self.device_count as f64 * self.wall_seconds / JOULES_PER_KWH
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferencePoint {
    pub name: &'static str,
    pub energy_kwh: f64,
    /// Modelled energy divided by the reference.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    /// Always "model": the figure is power × devices × time.
    pub kind: &'static str,
    pub inputs: EnergyModel,
    pub energy_kwh: f64,
    pub references: Vec<ReferencePoint>,
}

/// Published energy figures the model is compared against.
pub const REFERENCES: [(&str, f64); 3] = [
    ("Sycamore processor, 26 kW cooling for 600 s", 4.3),
    ("512-GPU tensor-network sampling run", 2688.0),
    ("Sunway supercomputer, 35 MW for 304 s", 35e6 * 304.0 / JOULES_PER_KWH),
];

pub fn cmd_energy(model: EnergyModel) -> Result<EnergyReport> {
    if model.device_power_watts <= 0.0 || !model.device_power_watts.is_finite() {
        return Err(Error::Config(format!("device power must be positive, got {} W", model.device_power_watts)));
    }
    if model.device_count == 0 {
        return Err(Error::Config("device count must be at least 1".into()));
    }
    if model.wall_seconds < 0.0 || !model.wall_seconds.is_finite() {
        return Err(Error::Config(format!("wall time must be non-negative, got {} s", model.wall_seconds)));
    }
    let energy_kwh = model.energy_kwh();
    Ok(EnergyReport {
        kind: "model",
        inputs: model,
        energy_kwh,
        references: REFERENCES
            .iter()
            .map(|&(name, kwh)| ReferencePoint { name, energy_kwh: kwh, ratio: energy_kwh / kwh })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kwh(w: f64, n: u64, s: f64) -> f64 {
        cmd_energy(EnergyModel { device_power_watts: w, device_count: n, wall_seconds: s }).unwrap().energy_kwh
    }

    #[test]
    fn documented_figures() {
        assert!((kwh(400.0, 1024, 3600.0) - 409.6).abs() < 1e-9);
        assert!((kwh(26_000.0, 1, 600.0) - 4.3333).abs() < 1e-4);
        assert!((kwh(400.0, 1024, 1477.0) - 168.05).abs() < 0.01);
        assert_eq!(kwh(400.0, 1024, 0.0), 0.0);
    }

    #[test]
    fn report_is_labelled_and_validated() {
        let r = cmd_energy(EnergyModel { device_power_watts: 26_000.0, device_count: 1, wall_seconds: 600.0 }).unwrap();
        assert_eq!(r.kind, "model");
        assert!((r.references[0].ratio - 4.3333 / 4.3).abs() < 1e-4);
        assert!(cmd_energy(EnergyModel { device_power_watts: 0.0, device_count: 1, wall_seconds: 1.0 }).is_err());
        assert!(cmd_energy(EnergyModel { device_power_watts: 1.0, device_count: 0, wall_seconds: 1.0 }).is_err());
        assert!(cmd_energy(EnergyModel { device_power_watts: 1.0, device_count: 1, wall_seconds: -1.0 }).is_err());
    }
}
