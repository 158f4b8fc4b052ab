//! Per-interval classical reward and its configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reactor::{check_constraints, ControlInput, ModelParameters, PhysicalState};

/// Objective of the reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "maximize_mP")]
    MaximizeProduct,
    #[serde(rename = "minimize_t")]
    MinimizeTime,
    #[serde(rename = "hybrid")]
    Hybrid,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::MaximizeProduct, Scenario::MinimizeTime, Scenario::Hybrid];

    /// 1, 2 or 3.
    pub fn index(self) -> usize {
        match self {
            Scenario::MaximizeProduct => 1,
            Scenario::MinimizeTime => 2,
            Scenario::Hybrid => 3,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Scenario::MaximizeProduct),
            2 => Ok(Scenario::MinimizeTime),
            3 => Ok(Scenario::Hybrid),
            _ => Err(Error::Config(format!("scenario must be 1, 2 or 3, got {i}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::MaximizeProduct => "maximize_mP",
            Scenario::MinimizeTime => "minimize_t",
            Scenario::Hybrid => "hybrid",
        }
    }
}

/// How violated constraints enter the penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationPenalty {
    /// `lambda_cv` per violated constraint
    Count,
    /// `lambda_cv` per unit of positive slack
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub scenario: Scenario,
    /// 1/kg
    pub w_mp: f64,
    /// 1/s
    pub w_t: f64,
    pub lambda_cv: f64,
    pub lambda_du: f64,
    /// 1/K^2
    pub lambda_track: f64,
    pub gamma: f64,
    pub violation_penalty: ViolationPenalty,
    /// K; the penalty treats the temperature bounds as this much tighter.
    /// Reported violation counts always use the true bounds.
    pub backoff: f64,
    /// Apply the tracking term in the direct-control environment too.
    pub direct_tracking: bool,
    /// K, reference used by the direct environment's tracking term.
    pub direct_setpoint: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::MinimizeTime,
            w_mp: 1.0 / 30000.0,
            w_t: 1.0 / 3600.0,
            lambda_cv: 10.0,
            lambda_du: 0.1,
            lambda_track: 1e-4,
            gamma: 0.99,
            violation_penalty: ViolationPenalty::Count,
            backoff: 0.0,
            direct_tracking: false,
            direct_setpoint: 363.15,
        }
    }
}

impl RewardConfig {
    pub fn with_scenario(mut self, scenario: Scenario) -> Self {
        self.scenario = scenario;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let weights = [self.w_mp, self.w_t, self.lambda_cv, self.lambda_du, self.lambda_track, self.backoff];
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Config("reward weights must be finite and >= 0".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma = {} outside (0, 1]", self.gamma)));
        }
        Ok(())
    }
}

/// Reward of one control interval from `x` to `x_next` under input `u`.
/// `setpoint` enables the tracking term.
#[allow(clippy::too_many_arguments)]
pub fn classical_reward(
    x: &PhysicalState,
    u: &ControlInput,
    u_prev: &ControlInput,
    x_next: &PhysicalState,
    dt: f64,
    setpoint: Option<f64>,
    cfg: &RewardConfig,
    model: &ModelParameters,
) -> f64 {
    debug_assert!(dt > 0.0);
    let gain = cfg.w_mp * (x_next.m_product - x.m_product);
    let cost = cfg.w_t * dt;
    let objective = match cfg.scenario {
        Scenario::MaximizeProduct => gain,
        Scenario::MinimizeTime => -cost,
        Scenario::Hybrid => gain - cost,
    };
    let report = check_constraints(x_next, u, model).tightened(cfg.backoff);
    let violation = match cfg.violation_penalty {
        ViolationPenalty::Count => report.count() as f64,
        ViolationPenalty::Magnitude => report.magnitude(),
    };
    let smooth = u.normalized_step_sq(u_prev, &model.actuators);
    let track = setpoint.map_or(0.0, |sp| (x_next.t_reactor - sp).powi(2));
    objective - cfg.lambda_cv * violation - cfg.lambda_du * smooth - cfg.lambda_track * track
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reactor::PlantConfig;

    fn quiet() -> (PhysicalState, ControlInput, ModelParameters) {
        let p = PlantConfig::default().model;
        let x = PhysicalState {
            m_water: 10000.0,
            m_monomer: 850.0,
            m_product: 0.0,
            t_reactor: 363.15,
            t_wall: 363.15,
            t_jacket: 363.15,
            t_ehe: 308.15,
            t_ehe_coolant: 308.15,
            m_accumulated: 0.0,
            t_adiabatic: 370.0,
        };
        let u = ControlInput::new(0.0, 363.15, 340.15, &p.actuators).unwrap();
        (x, u, p)
    }

    #[test]
    fn all_terms_vanish() {
        let (x, u, p) = quiet();
        let cfg = RewardConfig::default().with_scenario(Scenario::MaximizeProduct);
        assert_eq!(classical_reward(&x, &u, &u, &x, 30.0, Some(363.15), &cfg, &p), 0.0);
    }

    #[test]
    fn time_cost_per_interval() {
        let (x, u, p) = quiet();
        let cfg = RewardConfig::default();
        let r = classical_reward(&x, &u, &u, &x, 30.0, None, &cfg, &p);
        assert!((r + 1.0 / 120.0).abs() < 1e-15);
    }

    #[test]
    fn one_violation_costs_lambda() {
        let (x, u, p) = quiet();
        let mut hot = x;
        hot.t_reactor = 366.15;
        let cfg = RewardConfig::default().with_scenario(Scenario::MaximizeProduct);
        assert_eq!(classical_reward(&x, &u, &u, &hot, 30.0, None, &cfg, &p), -10.0);
        let mag = RewardConfig {
            violation_penalty: ViolationPenalty::Magnitude,
            ..cfg
        };
        let r = classical_reward(&x, &u, &u, &hot, 30.0, None, &mag, &p);
        assert!((r + 10.0).abs() < 1e-9);
    }

    #[test]
    fn backoff_penalizes_near_bound() {
        let (x, u, p) = quiet();
        let mut warm = x;
        warm.t_reactor = 365.0;
        let cfg = RewardConfig::default().with_scenario(Scenario::MaximizeProduct);
        let near = |b| classical_reward(&x, &u, &u, &warm, 30.0, None, &RewardConfig { backoff: b, ..cfg }, &p);
        assert_eq!(near(0.0), 0.0);
        assert_eq!(near(0.2), -10.0);
    }

    #[test]
    fn hybrid_is_sum_of_objectives() {
        let (x, u, p) = quiet();
        let mut next = x;
        next.m_product = 300.0;
        next.m_monomer = 550.0;
        let r = |s| {
            let cfg = RewardConfig::default().with_scenario(s);
            classical_reward(&x, &u, &u, &next, 30.0, None, &cfg, &p)
        };
        let h = r(Scenario::Hybrid);
        assert!((h - (r(Scenario::MaximizeProduct) + r(Scenario::MinimizeTime))).abs() < 1e-15);
        assert!((r(Scenario::MaximizeProduct) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn smoothness_and_tracking() {
        let (x, u, p) = quiet();
        let prev = ControlInput::new(30000.0, 363.15, 340.15, &p.actuators).unwrap();
        let cfg = RewardConfig::default().with_scenario(Scenario::MaximizeProduct);
        // feed moves across its whole box: normalized step 2
        assert!((classical_reward(&x, &u, &prev, &x, 30.0, None, &cfg, &p) + 0.4).abs() < 1e-12);
        let r = classical_reward(&x, &u, &u, &x, 30.0, Some(361.15), &cfg, &p);
        assert!((r + 4.0e-4).abs() < 1e-12);
    }

    #[test]
    fn invalid_weights_rejected() {
        let bad = RewardConfig {
            gamma: 0.0,
            ..RewardConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = RewardConfig {
            lambda_cv: -1.0,
            ..RewardConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(RewardConfig::default().validate().is_ok());
    }

    #[test]
    fn scenario_json_names() {
        assert_eq!(serde_json::to_string(&Scenario::MaximizeProduct).unwrap(), "\"maximize_mP\"");
        assert_eq!(serde_json::to_string(&Scenario::MinimizeTime).unwrap(), "\"minimize_t\"");
        for s in Scenario::ALL {
            assert_eq!(Scenario::from_index(s.index()).unwrap(), s);
        }
    }
}
