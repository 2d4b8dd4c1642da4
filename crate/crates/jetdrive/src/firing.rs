//! Lumped thermal model of droplet ejection.
//!
//! A firing pulse dissipates `v²/r` watts in the heater for its width. The
//! thin ink layer must reach the superheat limit (312 °C at 1 bar) for a
//! vapor bubble to nucleate and eject a droplet. With no loss terms the
//! temperature rise is proportional to pulse energy, so the model is a
//! single line through a calibration point:
//!
//! ```text
//! peak = ambient + rise_ref * (power * width) / (power_ref * width_ref)
//! ```
//!
//! The default calibration puts the nominal operating point (8.0 V into
//! 40 Ω for 3 µs) exactly at the 312 °C limit. Keeping the reference as a
//! (power, width, rise) triple instead of one pre-divided coefficient
//! makes the calibration point land exactly even in floating point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::Picos;

/// Reference pulse anchoring the linear heating law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Calibration {
    /// Electrical power of the reference pulse, watts.
    pub power: f64,
    /// Width of the reference pulse, seconds.
    pub duration: f64,
    /// Temperature rise above ambient that the reference pulse produces, °C.
    pub rise: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            power: 8.0 * 8.0 / 40.0,
            duration: 3e-6,
            rise: 312.0 - 25.0,
        }
    }
}

/// Thermal environment and calibration of the heater stack.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThermalParams {
    /// Resting ink temperature, °C.
    pub ambient_temp: f64,
    /// Superheat limit the ink layer must reach to eject, °C.
    pub superheat_limit: f64,
    /// Ambient pressure, bar. Informational; the limit already assumes it.
    pub ambient_pressure: f64,
    pub calibration: Calibration,
}

impl Default for ThermalParams {
    fn default() -> Self {
        ThermalParams {
            ambient_temp: 25.0,
            superheat_limit: 312.0,
            ambient_pressure: 1.0,
            calibration: Calibration::default(),
        }
    }
}

impl ThermalParams {
    /// Builds params from a plain heating-rate coefficient in °C per
    /// watt-second, for configurations that specify the slope directly.
    pub fn with_coefficient(ambient_temp: f64, superheat_limit: f64, coefficient: f64) -> Self {
        ThermalParams {
            ambient_temp,
            superheat_limit,
            ambient_pressure: 1.0,
            calibration: Calibration {
                power: 1.0,
                duration: 1.0,
                rise: coefficient,
            },
        }
    }

    /// The model slope in °C per watt-second.
    pub fn heating_rate_coefficient(&self) -> f64 {
        self.calibration.rise / (self.calibration.power * self.calibration.duration)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.superheat_limit > self.ambient_temp) {
            return Err(Error::Config(format!(
                "superheat limit {} °C must exceed ambient {} °C",
                self.superheat_limit, self.ambient_temp
            )));
        }
        if !(self.calibration.rise > 0.0
            && self.calibration.power > 0.0
            && self.calibration.duration > 0.0)
        {
            return Err(Error::Config(
                "thermal calibration values must all be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Peak ink-layer temperature after a constant pulse of `v` volts into
/// `r` ohms for `duration` seconds.
pub fn pulse_temperature(v: f64, r: f64, duration: f64, params: &ThermalParams) -> f64 {
    debug_assert!(r > 0.0 && duration >= 0.0);
    let cal = &params.calibration;
    let power = v * v / r;
    params.ambient_temp + cal.rise * (power * duration) / (cal.power * cal.duration)
}

/// One scheduled electrical pulse, as handed over by the engine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub nozzle: usize,
    pub slot: usize,
    /// Pulse start, absolute simulation time.
    pub start_time: Picos,
    /// Pulse end, absolute simulation time.
    pub end_time: Picos,
    pub drive_voltage: f64,
    pub resistance: f64,
    /// Pulse width in seconds (the timing parameter, kept in its native
    /// unit so thermal results match the calibration exactly).
    pub width: f64,
}

/// Outcome of one firing pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiringRecord {
    pub nozzle: usize,
    pub slot: usize,
    /// Pulse start, integer picoseconds.
    pub start_time: Picos,
    /// Pulse end, integer picoseconds; what the analytic schedule calls
    /// the time to fire.
    pub fire_time: Picos,
    pub drive_voltage: f64,
    /// Peak ink-layer temperature, °C.
    pub peak_temp: f64,
    pub ejected: bool,
    /// Electrical energy delivered, joules.
    pub energy: f64,
}

/// Applies the thermal model to one pulse and fills in the record.
pub fn droplet_ejected(pulse: &Pulse, params: &ThermalParams) -> FiringRecord {
    let peak_temp = pulse_temperature(pulse.drive_voltage, pulse.resistance, pulse.width, params);
    let power = pulse.drive_voltage * pulse.drive_voltage / pulse.resistance;
    FiringRecord {
        nozzle: pulse.nozzle,
        slot: pulse.slot,
        start_time: pulse.start_time,
        fire_time: pulse.end_time,
        drive_voltage: pulse.drive_voltage,
        peak_temp,
        ejected: peak_temp >= params.superheat_limit,
        energy: power * pulse.width,
    }
}
