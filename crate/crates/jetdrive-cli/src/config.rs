//! TOML parameter file. Every section and key is optional; absent keys
//! take the library defaults, unknown keys are rejected. Environment
//! variables are deliberately not consulted so that the same file and
//! arguments always reproduce the same run.

use jetdrive::driver::ElectricalParams;
use jetdrive::firing::ThermalParams;
use jetdrive::scheduler::TimingParams;
use jetdrive::topology::FactorizationStrategy;
use jetdrive::{Error, Result};
use serde::Deserialize;
use std::path::Path;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub timing: TimingParams,
    pub electrical: ElectricalParams,
    pub thermal: ThermalSection,
    pub factorization: FactorizationSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalSection {
    pub ambient_temp: f64,
    pub superheat_limit: f64,
    pub ambient_pressure: f64,
    /// Overrides the nominal-pulse calibration with a flat °C per joule
    /// heating rate.
    pub heating_rate_coefficient: Option<f64>,
}

impl Default for ThermalSection {
    fn default() -> ThermalSection {
        let p = ThermalParams::default();
        ThermalSection {
            ambient_temp: p.ambient_temp,
            superheat_limit: p.superheat_limit,
            ambient_pressure: p.ambient_pressure,
            heating_rate_coefficient: None,
        }
    }
}

impl ThermalSection {
    pub fn to_params(&self) -> ThermalParams {
        match self.heating_rate_coefficient {
            Some(coeff) => {
                ThermalParams::with_coefficient(self.ambient_temp, self.superheat_limit, coeff)
            }
            None => ThermalParams {
                ambient_temp: self.ambient_temp,
                superheat_limit: self.superheat_limit,
                ambient_pressure: self.ambient_pressure,
                ..ThermalParams::default()
            },
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorizationSection {
    pub strategy: String,
}

impl Default for FactorizationSection {
    fn default() -> FactorizationSection {
        FactorizationSection {
            strategy: "equal".into(),
        }
    }
}

impl FactorizationSection {
    pub fn to_strategy(&self) -> Result<FactorizationStrategy> {
        match self.strategy.as_str() {
            "equal" => Ok(FactorizationStrategy::Equal),
            "pow2" => Ok(FactorizationStrategy::Pow2),
            other => Err(Error::Config(format!(
                "unknown factorization strategy {other:?} (expected \"equal\" or \"pow2\")"
            ))),
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let config = match path {
            None => Config::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                toml::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
        };
        config.timing.validate()?;
        config.electrical.validate()?;
        config.thermal.to_params().validate()?;
        config.factorization.to_strategy()?;
        Ok(config)
    }
}
