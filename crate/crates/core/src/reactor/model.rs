//! Right-hand side, discrete step and constraint evaluation of the
//! semi-batch polymerization reactor.
//!
//! Water and monomer enter with the feed; monomer converts to product in the
//! reactor and in the external heat exchanger (EHE) loop. Heat leaves through
//! the wall into the jacket and through the EHE into its cooling water.
//! `m_acc` integrates the feed and `T_ad` tracks the temperature reached if
//! all monomer present reacted adiabatically.

use serde::{Deserialize, Serialize};

use super::integrator::rk4_step;
use super::params::ModelParameters;
use super::state::{ControlInput, PhysicalState, N_STATES, STATE_NAMES};
use crate::error::{Error, Result};

/// Time derivative of a [`PhysicalState`], per second, in state order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative(pub [f64; N_STATES]);

fn rhs_array(y: &[f64; N_STATES], u: &ControlInput, p: &ModelParameters) -> Result<[f64; N_STATES]> {
    let [m_w, m_a, m_p, t_r, t_s, t_m, t_ek, t_awt, _acc, _t_ad] = *y;
    let feed = u.feed() / 3600.0; // kg/s

    let m_tot = m_w + m_a + m_p;
    if m_tot <= 0.0 {
        return Err(Error::Simulation("reactor is empty (total mass <= 0)".into()));
    }
    let reacting = m_a + m_p;
    let u_m = if reacting > 0.0 { m_p / reacting } else { 0.0 };
    let gel = p.rate_factor_monomer * (1.0 - u_m) + p.rate_factor_product * u_m;
    let k_r1 = p.rate_constant * (-p.activation_energy / (p.gas_constant * t_r)).exp() * gel;
    let k_r2 = p.rate_constant * (-p.activation_energy / (p.gas_constant * t_ek)).exp() * gel;
    let k_k = (m_w * p.htc_water_steel + m_a * p.htc_monomer_steel + m_p * p.htc_product_steel) / m_tot;
    let ua = k_k * p.jacket_area;

    // reaction in the vessel (content not in the EHE loop) and in the EHE
    let r_vessel = k_r1 * (m_a - m_a * p.ehe_content_mass / m_tot);
    let r_ehe = p.ehe_reaction_switch * k_r2 * (m_a / m_tot) * p.ehe_content_mass;

    let d_w = feed * p.feed_water_fraction;
    let d_a = feed * p.feed_monomer_fraction - r_vessel - r_ehe;
    let d_p = r_vessel + r_ehe;

    let d_tr = (feed * p.cp_feed * (p.feed_temperature - t_r)
        - ua * (t_r - t_s)
        - p.ehe_content_flow * p.cp_reactor * (t_r - t_ek)
        + p.reaction_enthalpy * r_vessel)
        / (p.cp_reactor * m_tot);
    let d_ts = (ua * (t_r - t_s) - ua * (t_s - t_m)) / (p.cp_steel * p.steel_mass);
    let d_tm = (p.jacket_coolant_flow * p.cp_water * (u.jacket_inlet() - t_m) + ua * (t_s - t_m))
        / (p.cp_water * p.jacket_coolant_mass);
    let d_tek = (p.ehe_content_flow * p.cp_reactor * (t_r - t_ek)
        - p.ehe_heat_transfer * (t_ek - t_awt)
        + r_ehe * p.reaction_enthalpy)
        / (p.cp_reactor * p.ehe_content_mass);
    let d_tawt = (p.ehe_coolant_flow * p.cp_water * (u.ehe_inlet() - t_awt)
        - p.ehe_heat_transfer * (t_awt - t_ek))
        / (p.cp_water * p.ehe_coolant_mass);
    let d_acc = feed;
    let d_tad = p.reaction_enthalpy / (m_tot * p.cp_reactor) * d_a
        - (d_a + d_w + d_p) * (m_a * p.reaction_enthalpy / (m_tot * m_tot * p.cp_reactor))
        + d_tr;

    let d = [d_w, d_a, d_p, d_tr, d_ts, d_tm, d_tek, d_tawt, d_acc, d_tad];
    if let Some(i) = d.iter().position(|v| !v.is_finite()) {
        return Err(Error::Simulation(format!(
            "derivative of {} is not finite",
            STATE_NAMES[i]
        )));
    }
    Ok(d)
}

/// dx/dt at `(x, u)`, per second.
pub fn rhs(x: &PhysicalState, u: &ControlInput, p: &ModelParameters) -> Result<Derivative> {
    rhs_array(&x.to_array(), u, p).map(Derivative)
}

/// One RK4 step of length `dt` seconds with `u` held constant.
pub fn step(x: &PhysicalState, u: &ControlInput, dt: f64, p: &ModelParameters) -> Result<PhysicalState> {
    let y = rk4_step(|y| rhs_array(y, u, p), &x.to_array(), dt)?;
    let next = PhysicalState::from_array(y);
    next.check_plausible()?;
    Ok(next)
}

/// Integrates over `interval` seconds using equal RK4 substeps no longer
/// than `max_substep`.
pub fn advance(
    x: &PhysicalState,
    u: &ControlInput,
    interval: f64,
    max_substep: f64,
    p: &ModelParameters,
) -> Result<PhysicalState> {
    if !(interval > 0.0 && max_substep > 0.0) {
        return Err(Error::Contract("interval and substep must be positive".into()));
    }
    let n = (interval / max_substep).ceil().max(1.0) as usize;
    let h = interval / n as f64;
    let mut state = *x;
    for _ in 0..n {
        state = step(&state, u, h, p)?;
    }
    Ok(state)
}

/// Algebraic adiabatic temperature `T_R + m_M dH / (m_tot cp_R)`.
pub fn adiabatic_temperature(x: &PhysicalState, p: &ModelParameters) -> f64 {
    x.t_reactor + x.m_monomer * p.reaction_enthalpy / (x.total_mass() * p.cp_reactor)
}

/// Fraction of reactable monomer already converted, `m_P / (m_P + m_M)`.
pub fn conversion(x: &PhysicalState) -> Result<f64> {
    let reacting = x.m_product + x.m_monomer;
    if reacting <= 0.0 {
        return Err(Error::Simulation(
            "conversion undefined: no monomer and no product".into(),
        ));
    }
    Ok(x.m_product / reacting)
}

pub const N_CONSTRAINTS: usize = 4;
pub const CONSTRAINT_NAMES: [&str; N_CONSTRAINTS] =
    ["T_R_min", "T_R_max", "T_ad_max", "m_acc_max"];

/// Signed slacks in the `g <= 0 satisfied` convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub slack: [f64; N_CONSTRAINTS],
    pub violated: [bool; N_CONSTRAINTS],
}

impl ConstraintReport {
    pub fn count(&self) -> usize {
        self.violated.iter().filter(|v| **v).count()
    }

    /// Sum of positive slacks, mixed units; used by the magnitude penalty.
    pub fn magnitude(&self) -> f64 {
        self.slack.iter().map(|g| g.max(0.0)).sum()
    }

    /// Slacks with the three temperature bounds tightened by `backoff` K.
    pub fn tightened(&self, backoff: f64) -> ConstraintReport {
        let mut slack = self.slack;
        slack[..3].iter_mut().for_each(|g| *g += backoff);
        ConstraintReport {
            slack,
            violated: slack.map(|g| g > 0.0),
        }
    }
}

/// Process constraints on the state. `u` is accepted for interface symmetry
/// with input-dependent constraint sets; none of the shipped bounds use it.
pub fn check_constraints(x: &PhysicalState, _u: &ControlInput, p: &ModelParameters) -> ConstraintReport {
    let c = &p.constraints;
    let slack = [
        c.reactor_temp.lo - x.t_reactor,
        x.t_reactor - c.reactor_temp.hi,
        x.t_adiabatic - c.adiabatic_temp_max,
        x.m_accumulated - c.accumulated_feed_max,
    ];
    ConstraintReport {
        slack,
        violated: slack.map(|g| g > 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reactor::PlantConfig;

    fn nominal() -> (PhysicalState, ControlInput, ModelParameters) {
        let p = PlantConfig::default().model;
        let mut x = PhysicalState::from_array([
            10000.0, 853.0, 26.5, 363.15, 363.15, 363.15, 308.15, 308.15, 300.0, 0.0,
        ]);
        x.t_adiabatic = adiabatic_temperature(&x, &p);
        let u = ControlInput::new(12000.0, 353.15, 340.15, &p.actuators).unwrap();
        (x, u, p)
    }

    #[test]
    fn no_feed_no_accumulation() {
        let (x, _, p) = nominal();
        let u = ControlInput::new(0.0, 353.15, 340.15, &p.actuators).unwrap();
        let d = rhs(&x, &u, &p).unwrap().0;
        assert_eq!(d[8], 0.0);
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn no_monomer_no_reaction() {
        let (mut x, u, p) = nominal();
        x.m_monomer = 0.0;
        let d = rhs(&x, &u, &p).unwrap().0;
        assert_eq!(d[2], 0.0);
        x.m_product = 0.0;
        let d = rhs(&x, &u, &p).unwrap().0;
        assert_eq!(d[2], 0.0);
    }

    #[test]
    fn empty_reactor_faults() {
        let (mut x, u, p) = nominal();
        x.m_water = 0.0;
        x.m_monomer = 0.0;
        x.m_product = 0.0;
        assert!(rhs(&x, &u, &p).is_err());
    }

    #[test]
    fn step_rejects_zero_dt() {
        let (x, u, p) = nominal();
        assert!(step(&x, &u, 0.0, &p).is_err());
    }

    #[test]
    fn step_halving_agrees() {
        // the EHE loop has |lambda| ~ 1.3/s, so the check runs at a quarter second
        let (x, u, p) = nominal();
        let h = 0.25;
        let one = step(&x, &u, h, &p).unwrap().to_array();
        let half = step(&step(&x, &u, h / 2.0, &p).unwrap(), &u, h / 2.0, &p).unwrap().to_array();
        for (a, b) in one.iter().zip(half) {
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn interval_converges_under_refinement() {
        let (x, u, p) = nominal();
        let coarse = advance(&x, &u, 30.0, 1.0, &p).unwrap().to_array();
        let fine = advance(&x, &u, 30.0, 0.05, &p).unwrap().to_array();
        for (a, b) in coarse.iter().zip(fine) {
            assert!((a - b).abs() <= 1e-3 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn step_is_deterministic() {
        let (x, u, p) = nominal();
        let a = step(&x, &u, 1.0, &p).unwrap();
        let b = step(&x, &u, 1.0, &p).unwrap();
        assert_eq!(a.to_array().map(f64::to_bits), b.to_array().map(f64::to_bits));
    }

    #[test]
    fn conversion_values() {
        let (mut x, _, _) = nominal();
        x.m_product = 99.0;
        x.m_monomer = 1.0;
        assert!((conversion(&x).unwrap() - 0.99).abs() < 1e-15);
        x.m_product = 0.0;
        assert_eq!(conversion(&x).unwrap(), 0.0);
        x.m_product = 5.0;
        x.m_monomer = 5.0;
        assert_eq!(conversion(&x).unwrap(), 0.5);
        x.m_product = 0.0;
        x.m_monomer = 0.0;
        assert!(conversion(&x).is_err());
    }

    #[test]
    fn constraint_boundaries() {
        let (mut x, u, p) = nominal();
        let r = check_constraints(&x, &u, &p);
        assert_eq!(r.count(), 0);
        x.t_reactor = p.constraints.reactor_temp.hi;
        assert_eq!(check_constraints(&x, &u, &p).count(), 0);
        x.t_reactor = p.constraints.reactor_temp.hi + 1.0;
        let r = check_constraints(&x, &u, &p);
        assert_eq!(r.count(), 1);
        assert!(r.violated[1]);
        assert!((r.slack[1] - 1.0).abs() < 1e-9);
        x.t_reactor = 300.0;
        x.t_adiabatic = 400.0;
        x.m_accumulated = 30001.0;
        let r = check_constraints(&x, &u, &p);
        assert_eq!(r.violated, [true, false, true, true]);
        assert_eq!(r.count(), 3);
    }
}
