//! Normalized observation vectors.

use serde::{Deserialize, Serialize};

use crate::bounds::Interval;
use crate::error::{Error, Result};
use crate::reactor::{ActuatorBox, ControlInput, PhysicalState, N_INPUTS, N_STATES};
use crate::recipe::{RecipeParameters, N_PARAMS};

/// Ranges mapped onto [-1, 1] before states reach a policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservationScales {
    pub states: [Interval; N_STATES],
    /// s
    pub time: Interval,
}

impl Default for ObservationScales {
    fn default() -> Self {
        let iv = |lo, hi| Interval { lo, hi };
        Self {
            states: [
                iv(0.0, 25000.0),
                iv(0.0, 5000.0),
                iv(0.0, 25000.0),
                iv(355.0, 370.0),
                iv(340.0, 375.0),
                iv(330.0, 375.0),
                iv(300.0, 375.0),
                iv(300.0, 375.0),
                iv(0.0, 30000.0),
                iv(355.0, 385.0),
            ],
            time: iv(0.0, 18000.0),
        }
    }
}

impl ObservationScales {
    pub fn encode_state(&self, x: &PhysicalState) -> [f64; N_STATES] {
        let a = x.to_array();
        std::array::from_fn(|i| self.states[i].normalize(a[i]))
    }

    pub fn decode_state(&self, v: &[f64]) -> PhysicalState {
        PhysicalState::from_array(std::array::from_fn(|i| self.states[i].unnormalize(v[i])))
    }
}

/// Recipe-environment observation: plant state, the partially assigned
/// recipe, the next step index and the batch clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecipeObservation {
    pub x: PhysicalState,
    pub theta: RecipeParameters,
    /// next step to assign, 1..=15
    pub c: usize,
    /// s
    pub t: f64,
}

const STEP_RANGE: Interval = Interval { lo: 1.0, hi: N_PARAMS as f64 };

impl RecipeObservation {
    /// states, theta, set flags, c, t
    pub const DIM: usize = N_STATES + 2 * N_PARAMS + 2;
    const THETA_AT: usize = N_STATES;
    const FLAGS_AT: usize = N_STATES + N_PARAMS;
    const STEP_AT: usize = N_STATES + 2 * N_PARAMS;

    /// Unset parameters appear as their box midpoint (0 after
    /// normalization) with flag -1; set ones carry flag +1.
    pub fn encode(&self, scales: &ObservationScales, boxes: &[Interval; N_PARAMS]) -> Vec<f64> {
        let mut v = Vec::with_capacity(Self::DIM);
        v.extend(scales.encode_state(&self.x));
        let mask = self.theta.set_mask();
        v.extend((0..N_PARAMS).map(|i| {
            if mask[i] {
                boxes[i].normalize(self.theta.values()[i])
            } else {
                0.0
            }
        }));
        v.extend(mask.iter().map(|&m| if m { 1.0 } else { -1.0 }));
        v.push(STEP_RANGE.normalize(self.c as f64));
        v.push(scales.time.normalize(self.t));
        v
    }

    pub fn decode(v: &[f64], scales: &ObservationScales, boxes: &[Interval; N_PARAMS]) -> Result<Self> {
        if v.len() != Self::DIM {
            return Err(Error::Shape(format!(
                "recipe observation has {} entries, expected {}",
                v.len(),
                Self::DIM
            )));
        }
        let c = Self::decode_step(v)?;
        let n_set = v[Self::FLAGS_AT..Self::STEP_AT].iter().filter(|f| **f > 0.0).count();
        if n_set + 1 != c {
            return Err(Error::Shape(format!("step {c} inconsistent with {n_set} set flags")));
        }
        let values: Vec<f64> = (0..N_PARAMS)
            .map(|i| boxes[i].unnormalize(v[Self::THETA_AT + i]))
            .collect();
        Ok(Self {
            x: scales.decode_state(&v[..N_STATES]),
            theta: RecipeParameters::from_prefix(&values, n_set, boxes)?,
            c,
            t: scales.time.unnormalize(v[Self::STEP_AT + 1]),
        })
    }

    /// Step index stored in an encoded observation.
    pub fn decode_step(v: &[f64]) -> Result<usize> {
        let raw = v
            .get(Self::STEP_AT)
            .map(|n| STEP_RANGE.unnormalize(*n))
            .ok_or_else(|| Error::Shape("observation too short for step index".into()))?;
        let c = raw.round();
        if !(1.0..=(N_PARAMS + 1) as f64).contains(&c) || (raw - c).abs() > 1e-6 {
            return Err(Error::Shape(format!("invalid step index {raw}")));
        }
        Ok(c as usize)
    }
}

/// Direct-environment observation: state, previous input, clock.
pub fn encode_direct(
    x: &PhysicalState,
    u_prev: &ControlInput,
    t: f64,
    scales: &ObservationScales,
    actuators: &ActuatorBox,
) -> Vec<f64> {
    let boxes = [actuators.feed, actuators.jacket_inlet, actuators.ehe_inlet];
    let mut v = Vec::with_capacity(DIRECT_DIM);
    v.extend(scales.encode_state(x));
    v.extend(u_prev.to_array().iter().zip(boxes).map(|(u, b)| b.normalize(*u)));
    v.push(scales.time.normalize(t));
    v
}

pub const DIRECT_DIM: usize = N_STATES + N_INPUTS + 1;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recipe::{apply_set_step, RecipeSettings};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn recipe_observation_round_trips(
            raw in proptest::collection::vec(-1.0f64..=1.0, N_STATES + N_PARAMS),
            n_set in 0usize..=N_PARAMS,
            t in 0.0f64..18000.0,
        ) {
            let s = RecipeSettings::default();
            let scales = ObservationScales::default();
            let x = scales.decode_state(&raw[..N_STATES]);
            let mut theta = RecipeParameters::unset();
            for c in 1..=n_set {
                theta = apply_set_step(&theta, &s.boxes, c, s.boxes[c - 1].denormalize(raw[N_STATES + c - 1])).unwrap();
            }
            let obs = RecipeObservation { x, theta, c: n_set + 1, t };
            let v = obs.encode(&scales, &s.boxes);
            prop_assert_eq!(v.len(), RecipeObservation::DIM);
            let back = RecipeObservation::decode(&v, &scales, &s.boxes).unwrap();
            prop_assert_eq!(back.c, obs.c);
            prop_assert_eq!(back.theta.n_set(), n_set);
            for (a, b) in back.x.to_array().iter().zip(x.to_array()) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
            for (a, b) in back.theta.values().iter().zip(theta.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
            prop_assert!((back.t - t).abs() <= 1e-12 * t.max(1.0));
        }
    }

    #[test]
    fn unset_entries_sit_at_midpoint() {
        let s = RecipeSettings::default();
        let scales = ObservationScales::default();
        let x = scales.decode_state(&[0.0; N_STATES]);
        let obs = RecipeObservation { x, theta: RecipeParameters::unset(), c: 1, t: 0.0 };
        let v = obs.encode(&scales, &s.boxes);
        assert!(v[N_STATES..N_STATES + N_PARAMS].iter().all(|e| *e == 0.0));
        assert!(v[N_STATES + N_PARAMS..N_STATES + 2 * N_PARAMS].iter().all(|e| *e == -1.0));
        assert_eq!(RecipeObservation::decode_step(&v).unwrap(), 1);
    }

    #[test]
    fn decode_rejects_bad_shapes() {
        let s = RecipeSettings::default();
        let scales = ObservationScales::default();
        assert!(RecipeObservation::decode(&[0.0; 3], &scales, &s.boxes).is_err());
        let mut v = vec![0.0; RecipeObservation::DIM];
        v[RecipeObservation::STEP_AT] = 0.123;
        assert!(RecipeObservation::decode(&v, &scales, &s.boxes).is_err());
    }
}
