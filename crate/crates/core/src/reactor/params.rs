use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bounds::Interval;
use crate::error::{Error, Result};
use crate::kv::KvDocument;

/// Shipped reactor constants.
pub const DEFAULT_REACTOR_FILE: &str = include_str!("../../config/reactor.kv");

pub const SUPPORTED_FORMAT_VERSION: f64 = 1.0;

/// Admissible range of each physical input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorBox {
    /// kg/h
    pub feed: Interval,
    /// K
    pub jacket_inlet: Interval,
    /// K
    pub ehe_inlet: Interval,
}

/// Process bounds, all in the `g(x) <= 0` convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintBounds {
    pub reactor_temp: Interval,
    pub adiabatic_temp_max: f64,
    pub accumulated_feed_max: f64,
}

/// Constants of the reactor right-hand side. Rates are per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    pub gas_constant: f64,
    pub activation_energy: f64,
    pub rate_constant: f64,
    pub rate_factor_monomer: f64,
    pub rate_factor_product: f64,
    pub reaction_enthalpy: f64,
    pub ehe_reaction_switch: f64,
    pub feed_temperature: f64,
    pub feed_water_fraction: f64,
    pub feed_monomer_fraction: f64,
    pub jacket_area: f64,
    pub htc_water_steel: f64,
    pub htc_monomer_steel: f64,
    pub htc_product_steel: f64,
    pub ehe_heat_transfer: f64,
    pub jacket_coolant_mass: f64,
    pub jacket_coolant_flow: f64,
    pub ehe_coolant_mass: f64,
    pub ehe_coolant_flow: f64,
    pub ehe_content_mass: f64,
    pub ehe_content_flow: f64,
    pub steel_mass: f64,
    pub cp_water: f64,
    pub cp_steel: f64,
    pub cp_feed: f64,
    pub cp_reactor: f64,
    pub actuators: ActuatorBox,
    pub constraints: ConstraintBounds,
}

/// Uniform sampling boxes for the initial state. `m_P` and `m_acc` always
/// start at zero and `T_ad` follows from the sampled masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialRanges {
    pub water: Interval,
    pub monomer: Interval,
    pub reactor_temp: Interval,
    pub wall_temp: Interval,
    pub jacket_temp: Interval,
    pub ehe_temp: Interval,
    pub ehe_coolant_temp: Interval,
}

impl InitialRanges {
    /// Collapses every box onto its midpoint.
    pub fn nominal(&self) -> Self {
        let p = |iv: Interval| Interval::point(iv.midpoint());
        Self {
            water: p(self.water),
            monomer: p(self.monomer),
            reactor_temp: p(self.reactor_temp),
            wall_temp: p(self.wall_temp),
            jacket_temp: p(self.jacket_temp),
            ehe_temp: p(self.ehe_temp),
            ehe_coolant_temp: p(self.ehe_coolant_temp),
        }
    }
}

/// Everything read from a reactor parameter file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantConfig {
    pub model: ModelParameters,
    pub initial: InitialRanges,
}

fn interval(doc: &KvDocument, lo: &str, hi: &str) -> Result<Interval> {
    Interval::new(doc.get(lo)?, doc.get(hi)?)
        .map_err(|_| Error::Config(format!("`{lo}` must not exceed `{hi}`")))
}

impl PlantConfig {
    pub fn from_kv(doc: &KvDocument) -> Result<Self> {
        let version = doc.get("format_version")?;
        if version != SUPPORTED_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "reactor file format_version {version} is not supported"
            )));
        }
        let model = ModelParameters {
            gas_constant: doc.get("gas_constant")?,
            activation_energy: doc.get("activation_energy")?,
            rate_constant: doc.get("rate_constant")?,
            rate_factor_monomer: doc.get("rate_factor_monomer")?,
            rate_factor_product: doc.get("rate_factor_product")?,
            reaction_enthalpy: doc.get("reaction_enthalpy")?,
            ehe_reaction_switch: doc.get("ehe_reaction_switch")?,
            feed_temperature: doc.get("feed_temperature")?,
            feed_water_fraction: doc.get("feed_water_fraction")?,
            feed_monomer_fraction: doc.get("feed_monomer_fraction")?,
            jacket_area: doc.get("jacket_area")?,
            htc_water_steel: doc.get("htc_water_steel")?,
            htc_monomer_steel: doc.get("htc_monomer_steel")?,
            htc_product_steel: doc.get("htc_product_steel")?,
            ehe_heat_transfer: doc.get("ehe_heat_transfer")?,
            jacket_coolant_mass: doc.get("jacket_coolant_mass")?,
            jacket_coolant_flow: doc.get("jacket_coolant_flow")?,
            ehe_coolant_mass: doc.get("ehe_coolant_mass")?,
            ehe_coolant_flow: doc.get("ehe_coolant_flow")?,
            ehe_content_mass: doc.get("ehe_content_mass")?,
            ehe_content_flow: doc.get("ehe_content_flow")?,
            steel_mass: doc.get("steel_mass")?,
            cp_water: doc.get("cp_water")?,
            cp_steel: doc.get("cp_steel")?,
            cp_feed: doc.get("cp_feed")?,
            cp_reactor: doc.get("cp_reactor")?,
            actuators: ActuatorBox {
                feed: interval(doc, "feed_min", "feed_max")?,
                jacket_inlet: interval(doc, "jacket_inlet_min", "jacket_inlet_max")?,
                ehe_inlet: interval(doc, "ehe_inlet_min", "ehe_inlet_max")?,
            },
            constraints: ConstraintBounds {
                reactor_temp: interval(doc, "reactor_temp_min", "reactor_temp_max")?,
                adiabatic_temp_max: doc.get("adiabatic_temp_max")?,
                accumulated_feed_max: doc.get("accumulated_feed_max")?,
            },
        };
        model.validate()?;
        let initial = InitialRanges {
            water: interval(doc, "init_water_min", "init_water_max")?,
            monomer: interval(doc, "init_monomer_min", "init_monomer_max")?,
            reactor_temp: interval(doc, "init_reactor_temp_min", "init_reactor_temp_max")?,
            wall_temp: interval(doc, "init_wall_temp_min", "init_wall_temp_max")?,
            jacket_temp: interval(doc, "init_jacket_temp_min", "init_jacket_temp_max")?,
            ehe_temp: interval(doc, "init_ehe_temp_min", "init_ehe_temp_max")?,
            ehe_coolant_temp: interval(
                doc,
                "init_ehe_coolant_temp_min",
                "init_ehe_coolant_temp_max",
            )?,
        };
        Ok(Self { model, initial })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let doc = KvDocument::load(path)?;
        Self::from_kv(&doc).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

impl Default for PlantConfig {
    fn default() -> Self {
        let doc = KvDocument::parse(DEFAULT_REACTOR_FILE).expect("shipped reactor file parses");
        Self::from_kv(&doc).expect("shipped reactor file is valid")
    }
}

impl ModelParameters {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gas_constant", self.gas_constant),
            ("activation_energy", self.activation_energy),
            ("rate_constant", self.rate_constant),
            ("rate_factor_monomer", self.rate_factor_monomer),
            ("rate_factor_product", self.rate_factor_product),
            ("reaction_enthalpy", self.reaction_enthalpy),
            ("feed_temperature", self.feed_temperature),
            ("feed_water_fraction", self.feed_water_fraction),
            ("feed_monomer_fraction", self.feed_monomer_fraction),
            ("jacket_area", self.jacket_area),
            ("htc_water_steel", self.htc_water_steel),
            ("htc_monomer_steel", self.htc_monomer_steel),
            ("htc_product_steel", self.htc_product_steel),
            ("ehe_heat_transfer", self.ehe_heat_transfer),
            ("jacket_coolant_mass", self.jacket_coolant_mass),
            ("jacket_coolant_flow", self.jacket_coolant_flow),
            ("ehe_coolant_mass", self.ehe_coolant_mass),
            ("ehe_coolant_flow", self.ehe_coolant_flow),
            ("ehe_content_mass", self.ehe_content_mass),
            ("ehe_content_flow", self.ehe_content_flow),
            ("steel_mass", self.steel_mass),
            ("cp_water", self.cp_water),
            ("cp_steel", self.cp_steel),
            ("cp_feed", self.cp_feed),
            ("cp_reactor", self.cp_reactor),
            ("adiabatic_temp_max", self.constraints.adiabatic_temp_max),
            ("accumulated_feed_max", self.constraints.accumulated_feed_max),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("`{name}` must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.ehe_reaction_switch) {
            return Err(Error::Config("`ehe_reaction_switch` must lie in [0, 1]".into()));
        }
        if self.constraints.reactor_temp.width() <= 0.0 {
            return Err(Error::Config(
                "reactor temperature band needs lower bound < upper bound".into(),
            ));
        }
        for (name, iv) in [
            ("feed", self.actuators.feed),
            ("jacket_inlet", self.actuators.jacket_inlet),
            ("ehe_inlet", self.actuators.ehe_inlet),
        ] {
            if iv.width() <= 0.0 {
                return Err(Error::Config(format!("actuator box `{name}` is empty")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_file_loads() {
        let cfg = PlantConfig::default();
        assert_eq!(cfg.model.actuators.feed.hi, 30000.0);
        assert_eq!(cfg.model.constraints.reactor_temp.lo, 361.15);
        assert_eq!(cfg.model.constraints.reactor_temp.hi, 365.15);
    }

    #[test]
    fn missing_key_is_named() {
        let text = DEFAULT_REACTOR_FILE.replace("steel_mass", "steel_mas");
        let err = PlantConfig::from_kv(&KvDocument::parse(&text).unwrap()).unwrap_err();
        assert!(err.to_string().contains("steel_mass"), "{err}");
    }

    #[test]
    fn rejects_nonpositive_constant() {
        let text = DEFAULT_REACTOR_FILE.replace("cp_feed = 3.0", "cp_feed = 0.0");
        assert!(PlantConfig::from_kv(&KvDocument::parse(&text).unwrap()).is_err());
    }

    #[test]
    fn rejects_reversed_constraint_band() {
        let text = DEFAULT_REACTOR_FILE.replace("reactor_temp_min = 361.15", "reactor_temp_min = 366.0");
        assert!(PlantConfig::from_kv(&KvDocument::parse(&text).unwrap()).is_err());
    }

    #[test]
    fn rejects_unknown_version() {
        let text = DEFAULT_REACTOR_FILE.replace("format_version = 1", "format_version = 2");
        assert!(PlantConfig::from_kv(&KvDocument::parse(&text).unwrap()).is_err());
    }
}
