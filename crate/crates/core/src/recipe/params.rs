use std::path::Path;

use serde::{Deserialize, Serialize};

use super::program::N_PARAMS;
use crate::bounds::Interval;
use crate::control::{CascadeConfig, OuterLoop, OutputMap, PidConfig};
use crate::error::{Error, Result};
use crate::kv::KvDocument;

pub const DEFAULT_RECIPE_FILE: &str = include_str!("../../config/recipe.kv");

/// Batch-level timing and termination settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchSettings {
    /// s
    pub control_interval: f64,
    /// s
    pub integrator_step: f64,
    /// kg
    pub batch_feed_mass: f64,
    pub conversion_target: f64,
    /// s
    pub truncation_time: f64,
}

impl BatchSettings {
    /// Tolerance on `m_acc` for considering the feed delivered.
    pub const FEED_TOLERANCE: f64 = 1e-6;
}

/// Everything read from a recipe file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecipeSettings {
    pub batch: BatchSettings,
    /// Cascade structure; outer gains and setpoint are overwritten per phase.
    pub cascade: CascadeConfig,
    pub boxes: [Interval; N_PARAMS],
    pub baseline: [f64; N_PARAMS],
}

impl RecipeSettings {
    pub fn from_kv(doc: &KvDocument) -> Result<Self> {
        if doc.get("format_version")? != 1.0 {
            return Err(Error::Config("recipe file format_version must be 1".into()));
        }
        let iv = |lo: &str, hi: &str| -> Result<Interval> {
            Interval::new(doc.get(lo)?, doc.get(hi)?)
                .map_err(|_| Error::Config(format!("`{lo}` must not exceed `{hi}`")))
        };
        let batch = BatchSettings {
            control_interval: doc.get("control_interval")?,
            integrator_step: doc.get("integrator_step")?,
            batch_feed_mass: doc.get("batch_feed_mass")?,
            conversion_target: doc.get("conversion_target")?,
            truncation_time: doc.get("truncation_time")?,
        };
        let map = |prefix: &str| -> Result<OutputMap> {
            Ok(OutputMap {
                u_ss: doc.get(&format!("{prefix}_map_u_ss"))?,
                scale: doc.get(&format!("{prefix}_map_scale"))?,
                output: iv(&format!("{prefix}_setpoint_min"), &format!("{prefix}_setpoint_max"))?,
            })
        };
        let jacket_map = map("jacket")?;
        let ehe_map = map("ehe")?;
        let inner = |prefix: &str, output: Interval| -> Result<PidConfig> {
            Ok(PidConfig {
                kp: doc.get(&format!("{prefix}_kp"))?,
                ki: doc.get(&format!("{prefix}_ki"))?,
                kd: doc.get(&format!("{prefix}_kd"))?,
                setpoint: output.midpoint(),
                u_ss: output.midpoint(),
                output,
            })
        };
        let cascade = CascadeConfig {
            outer: OuterLoop {
                kp: 0.0,
                ki: 0.0,
                kd: doc.get("outer_kd")?,
                setpoint: 0.5 * (jacket_map.output.lo + jacket_map.output.hi),
                jacket_map,
                ehe_map,
            },
            // inner outputs are the physical inlet temperatures; their boxes
            // are clipped again by the actuator box when applied
            jacket: inner("jacket", jacket_map.output)?,
            ehe: inner("ehe", ehe_map.output)?,
            inner_period: batch.control_interval,
            outer_period: doc.get("outer_period")?,
            inner_feedforward: doc.get("inner_feedforward")? != 0.0,
        };
        let mut boxes = [Interval::point(0.0); N_PARAMS];
        let mut baseline = [0.0; N_PARAMS];
        for i in 0..N_PARAMS {
            boxes[i] = iv(&format!("box_{}_min", i + 1), &format!("box_{}_max", i + 1))?;
            baseline[i] = doc.get(&format!("baseline_{}", i + 1))?;
        }
        let s = Self {
            batch,
            cascade,
            boxes,
            baseline,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let doc = KvDocument::load(path)?;
        Self::from_kv(&doc).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.batch;
        if !(b.control_interval > 0.0 && b.integrator_step > 0.0 && b.integrator_step <= b.control_interval) {
            return Err(Error::Config("need 0 < integrator_step <= control_interval".into()));
        }
        if !(b.batch_feed_mass >= 0.0) {
            return Err(Error::Config("batch_feed_mass must be non-negative".into()));
        }
        if !(b.conversion_target > 0.0 && b.conversion_target < 1.0) {
            return Err(Error::Config("conversion_target must lie in (0, 1)".into()));
        }
        if !(b.truncation_time > 0.0) {
            return Err(Error::Config("truncation_time must be positive".into()));
        }
        self.cascade.validate()?;
        for (i, (iv, v)) in self.boxes.iter().zip(self.baseline).enumerate() {
            if !iv.contains(v) {
                return Err(Error::Config(format!(
                    "baseline_{} = {v} lies outside its expert box [{}, {}]",
                    i + 1,
                    iv.lo,
                    iv.hi
                )));
            }
        }
        Ok(())
    }
}

impl Default for RecipeSettings {
    fn default() -> Self {
        let doc = KvDocument::parse(DEFAULT_RECIPE_FILE).expect("shipped recipe file parses");
        Self::from_kv(&doc).expect("shipped recipe file is valid")
    }
}

/// Ordered recipe parameter vector. Entries are assigned strictly in index
/// order; unassigned entries hold 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecipeParameters {
    values: [f64; N_PARAMS],
    n_set: usize,
}

impl Default for RecipeParameters {
    fn default() -> Self {
        Self::unset()
    }
}

impl RecipeParameters {
    pub fn unset() -> Self {
        Self {
            values: [0.0; N_PARAMS],
            n_set: 0,
        }
    }

    /// Fully assigned vector; every value must lie in its box.
    pub fn full(values: [f64; N_PARAMS], boxes: &[Interval; N_PARAMS]) -> Result<Self> {
        let mut p = Self::unset();
        for (i, v) in values.into_iter().enumerate() {
            if !boxes[i].contains(v) {
                return Err(Error::Contract(format!(
                    "theta_{} = {v} outside expert box [{}, {}]",
                    i + 1,
                    boxes[i].lo,
                    boxes[i].hi
                )));
            }
            p = apply_set_step(&p, boxes, i + 1, v)?;
        }
        Ok(p)
    }

    /// First `n_set` entries of `values` assigned in order.
    pub fn from_prefix(values: &[f64], n_set: usize, boxes: &[Interval; N_PARAMS]) -> Result<Self> {
        if n_set > N_PARAMS || values.len() < n_set {
            return Err(Error::Contract(format!("cannot assign {n_set} recipe parameters")));
        }
        let mut p = Self::unset();
        for (i, v) in values[..n_set].iter().enumerate() {
            p = apply_set_step(&p, boxes, i + 1, *v)?;
        }
        Ok(p)
    }

    /// 1-based access; `None` while unassigned.
    pub fn get(&self, c: usize) -> Option<f64> {
        (c >= 1 && c <= self.n_set).then(|| self.values[c - 1])
    }

    /// 1-based access for parameters that must already be assigned.
    pub fn require(&self, c: usize) -> Result<f64> {
        self.get(c)
            .ok_or_else(|| Error::Contract(format!("theta_{c} has not been set")))
    }

    pub fn values(&self) -> &[f64; N_PARAMS] {
        &self.values
    }

    pub fn n_set(&self) -> usize {
        self.n_set
    }

    pub fn set_mask(&self) -> [bool; N_PARAMS] {
        std::array::from_fn(|i| i < self.n_set)
    }

    pub fn is_complete(&self) -> bool {
        self.n_set == N_PARAMS
    }

    /// Next step index to be assigned (1-based); `N_PARAMS + 1` when full.
    pub fn next_step(&self) -> usize {
        self.n_set + 1
    }
}

/// `theta + e_c * value` with `value` clamped into box `c`. Only the lowest
/// unset index may be assigned.
pub fn apply_set_step(
    theta: &RecipeParameters,
    boxes: &[Interval; N_PARAMS],
    c: usize,
    value: f64,
) -> Result<RecipeParameters> {
    if c != theta.next_step() || c > N_PARAMS {
        return Err(Error::Contract(format!(
            "cannot set theta_{c}: next assignable index is {}",
            theta.next_step()
        )));
    }
    if !value.is_finite() {
        return Err(Error::Contract(format!("theta_{c} value is not finite")));
    }
    let mut next = *theta;
    next.values[c - 1] += boxes[c - 1].clamp(value);
    next.n_set += 1;
    Ok(next)
}

/// The fixed expert recipe shipped in the recipe file.
pub fn baseline_recipe(settings: &RecipeSettings) -> RecipeParameters {
    RecipeParameters::full(settings.baseline, &settings.boxes)
        .expect("validated baseline lies in its boxes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_sets_only_first_component() {
        let s = RecipeSettings::default();
        let t = apply_set_step(&RecipeParameters::unset(), &s.boxes, 1, 5000.0).unwrap();
        assert_eq!(t.values()[0], 5000.0);
        assert!(t.values()[1..].iter().all(|v| *v == 0.0));
        assert!(t.set_mask()[0]);
        assert!(t.set_mask()[1..].iter().all(|m| !m));
    }

    #[test]
    fn out_of_order_rejected() {
        let s = RecipeSettings::default();
        let t = apply_set_step(&RecipeParameters::unset(), &s.boxes, 1, 5000.0).unwrap();
        assert!(apply_set_step(&t, &s.boxes, 3, 1.0).is_err());
        assert!(apply_set_step(&t, &s.boxes, 1, 1.0).is_err());
    }

    #[test]
    fn fourteen_steps_fill_mask() {
        let s = RecipeSettings::default();
        let mut t = RecipeParameters::unset();
        for c in 1..=N_PARAMS {
            t = apply_set_step(&t, &s.boxes, c, s.boxes[c - 1].midpoint()).unwrap();
        }
        assert!(t.is_complete());
        assert!(t.set_mask().iter().all(|m| *m));
        assert!(apply_set_step(&t, &s.boxes, 15, 0.0).is_err());
    }

    #[test]
    fn values_are_clamped_into_box() {
        let s = RecipeSettings::default();
        let t = apply_set_step(&RecipeParameters::unset(), &s.boxes, 1, 1e9).unwrap();
        assert_eq!(t.get(1), Some(s.boxes[0].hi));
        assert_eq!(t.get(2), None);
    }

    #[test]
    fn baseline_is_stable_and_inside_boxes() {
        let s = RecipeSettings::default();
        let a = baseline_recipe(&s);
        let b = baseline_recipe(&s);
        assert_eq!(a, b);
        assert!(a.is_complete());
        for (i, v) in a.values().iter().enumerate() {
            assert!(s.boxes[i].contains(*v));
        }
    }

    #[test]
    fn baseline_outside_box_rejected() {
        let text = DEFAULT_RECIPE_FILE.replace("baseline_3 = 5.0", "baseline_3 = 50.0");
        let err = RecipeSettings::from_kv(&KvDocument::parse(&text).unwrap()).unwrap_err();
        assert!(err.to_string().contains("baseline_3"));
    }
}
