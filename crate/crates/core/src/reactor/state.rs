use serde::{Deserialize, Serialize};

use super::params::ActuatorBox;
use crate::error::{Error, Result};

pub const N_STATES: usize = 10;
pub const N_INPUTS: usize = 3;

/// Temperatures outside this band mean the integration went wrong; it is
/// far wider than any process constraint.
pub const PLAUSIBLE_TEMP_MIN: f64 = 273.15;
pub const PLAUSIBLE_TEMP_MAX: f64 = 500.0;

pub const STATE_NAMES: [&str; N_STATES] = [
    "m_W", "m_M", "m_P", "T_R", "T_S", "T_J", "T_EHE", "T_CW_EHE", "m_acc", "T_ad",
];
pub const INPUT_NAMES: [&str; N_INPUTS] = ["m_dot_feed", "T_J_in", "T_CW_EHE_in"];

/// Reactor state: masses in kg, temperatures in K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalState {
    pub m_water: f64,
    pub m_monomer: f64,
    pub m_product: f64,
    pub t_reactor: f64,
    pub t_wall: f64,
    pub t_jacket: f64,
    pub t_ehe: f64,
    pub t_ehe_coolant: f64,
    pub m_accumulated: f64,
    pub t_adiabatic: f64,
}

impl PhysicalState {
    pub fn to_array(&self) -> [f64; N_STATES] {
        [
            self.m_water,
            self.m_monomer,
            self.m_product,
            self.t_reactor,
            self.t_wall,
            self.t_jacket,
            self.t_ehe,
            self.t_ehe_coolant,
            self.m_accumulated,
            self.t_adiabatic,
        ]
    }

    pub fn from_array(a: [f64; N_STATES]) -> Self {
        Self {
            m_water: a[0],
            m_monomer: a[1],
            m_product: a[2],
            t_reactor: a[3],
            t_wall: a[4],
            t_jacket: a[5],
            t_ehe: a[6],
            t_ehe_coolant: a[7],
            m_accumulated: a[8],
            t_adiabatic: a[9],
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.m_water + self.m_monomer + self.m_product
    }

    /// Checks finiteness, non-negative masses and the plausibility band.
    pub fn check_plausible(&self) -> Result<()> {
        let a = self.to_array();
        for (i, v) in a.iter().enumerate() {
            let name = STATE_NAMES[i];
            if !v.is_finite() {
                return Err(Error::Simulation(format!("state {name} is not finite")));
            }
            let is_mass = matches!(i, 0 | 1 | 2 | 8);
            if is_mass && *v < 0.0 {
                return Err(Error::Simulation(format!("mass {name} = {v} is negative")));
            }
            if !is_mass && !(PLAUSIBLE_TEMP_MIN..=PLAUSIBLE_TEMP_MAX).contains(v) {
                return Err(Error::Simulation(format!(
                    "temperature {name} = {v} K left the plausible band"
                )));
            }
        }
        Ok(())
    }
}

/// Physical inputs, always inside the actuator box they were built against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    feed: f64,
    jacket_inlet: f64,
    ehe_inlet: f64,
}

impl ControlInput {
    /// `feed` in kg/h, inlet temperatures in K.
    pub fn new(feed: f64, jacket_inlet: f64, ehe_inlet: f64, bounds: &ActuatorBox) -> Result<Self> {
        let checks = [
            (INPUT_NAMES[0], feed, bounds.feed),
            (INPUT_NAMES[1], jacket_inlet, bounds.jacket_inlet),
            (INPUT_NAMES[2], ehe_inlet, bounds.ehe_inlet),
        ];
        for (name, v, iv) in checks {
            if !iv.contains(v) {
                return Err(Error::Contract(format!(
                    "input {name} = {v} outside actuator box [{}, {}]",
                    iv.lo, iv.hi
                )));
            }
        }
        Ok(Self {
            feed,
            jacket_inlet,
            ehe_inlet,
        })
    }

    /// Clamps each component into the box.
    pub fn saturated(feed: f64, jacket_inlet: f64, ehe_inlet: f64, bounds: &ActuatorBox) -> Self {
        Self {
            feed: bounds.feed.clamp(feed),
            jacket_inlet: bounds.jacket_inlet.clamp(jacket_inlet),
            ehe_inlet: bounds.ehe_inlet.clamp(ehe_inlet),
        }
    }

    pub fn feed(&self) -> f64 {
        self.feed
    }

    pub fn jacket_inlet(&self) -> f64 {
        self.jacket_inlet
    }

    pub fn ehe_inlet(&self) -> f64 {
        self.ehe_inlet
    }

    pub fn to_array(&self) -> [f64; N_INPUTS] {
        [self.feed, self.jacket_inlet, self.ehe_inlet]
    }

    /// Squared Euclidean distance after mapping both inputs onto `[-1, 1]^3`.
    pub fn normalized_step_sq(&self, prev: &ControlInput, bounds: &ActuatorBox) -> f64 {
        let boxes = [bounds.feed, bounds.jacket_inlet, bounds.ehe_inlet];
        self.to_array()
            .iter()
            .zip(prev.to_array())
            .zip(boxes)
            .map(|((a, b), iv)| {
                let d = iv.normalize(*a) - iv.normalize(b);
                d * d
            })
            .sum()
    }
}
