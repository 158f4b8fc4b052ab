//! Policy optimizers (TD3 and the cross-entropy method), replay storage,
//! learning curves and return estimators.

mod cem;
mod replay;
mod td3;

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use cem::{cem_train, CemConfig, CemOutcome};
pub use replay::{ReplayBuffer, Transition};
pub use td3::{td3_train, Td3Agent, Td3Config, Td3Outcome, UpdateInfo};

use crate::env::{rollout, Env};
use crate::error::{Error, Result};
use crate::neural::Mlp;

/// Builds fresh, independent environment instances.
pub type EnvFactory<'a> = dyn Fn() -> Box<dyn Env> + Sync + 'a;

/// Training episodes draw seeds below this; learning-curve evaluation uses
/// seeds from here up to 1e6; final evaluation starts at 1e6.
pub const CURVE_SEED_BASE: u64 = 500_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub steps: u64,
    pub mean_return: f64,
    pub std_return: f64,
}

/// Noise-free evaluation returns against environment steps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LearningCurve {
    pub points: Vec<CurvePoint>,
}

impl LearningCurve {
    pub fn push(&mut self, p: CurvePoint) -> Result<()> {
        if self.points.last().is_some_and(|q| q.steps >= p.steps) {
            return Err(Error::Contract(format!(
                "learning-curve steps must increase (got {} after {})",
                p.steps,
                self.points.last().unwrap().steps
            )));
        }
        self.points.push(p);
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Config(format!("writing learning curve: {e}"));
        out.write_record(["steps", "mean_return", "std_return"]).map_err(csv_err)?;
        for p in &self.points {
            out.write_record([p.steps.to_string(), format!("{:?}", p.mean_return), format!("{:?}", p.std_return)])
                .map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::Config(format!("writing learning curve: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(f)
    }
}

/// Mean and sample standard deviation; the deviation of one value is 0.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Runs the policy without noise on each seed and returns undiscounted returns.
pub fn policy_returns(factory: &EnvFactory, policy: &Mlp, seeds: &[u64]) -> Result<Vec<f64>> {
    let mut env = factory();
    seeds
        .iter()
        .map(|&s| {
            let (stats, _) = rollout(env.as_mut(), s, |o| policy.forward(o), false)?;
            Ok(stats.undiscounted_return)
        })
        .collect()
}

pub(crate) fn curve_point(factory: &EnvFactory, policy: &Mlp, n: usize, steps: u64) -> Result<CurvePoint> {
    let seeds: Vec<u64> = (0..n as u64).map(|i| CURVE_SEED_BASE + i).collect();
    let returns = policy_returns(factory, policy, &seeds)?;
    if returns.iter().any(|r| !r.is_finite()) {
        return Err(Error::Diverged(format!("non-finite evaluation return at step {steps}")));
    }
    let (mean_return, std_return) = mean_std(&returns);
    Ok(CurvePoint { steps, mean_return, std_return })
}

/// `sum_k gamma^k r_k`.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    let mut g = 1.0;
    let mut total = 0.0;
    for r in rewards {
        total += g * r;
        g *= gamma;
    }
    total
}

/// `V_k = r_k + gamma V_{k+1}` accumulated from the end; returns `V_0`.
pub fn backward_value(rewards: &[f64], gamma: f64) -> f64 {
    rewards.iter().rev().fold(0.0, |v, r| r + gamma * v)
}

/// Monte-Carlo estimate of the expected discounted return from the seeded
/// initial states.
pub fn soft_return_estimate(factory: &EnvFactory, policy: &Mlp, gamma: f64, seeds: &[u64]) -> Result<f64> {
    if seeds.is_empty() {
        return Err(Error::Contract("at least one seed is required".into()));
    }
    let mut env = factory();
    let mut total = 0.0;
    for &s in seeds {
        let (_, log) = rollout(env.as_mut(), s, |o| policy.forward(o), true)?;
        let rewards: Vec<f64> = log.iter().map(|t| t.r).collect();
        total += discounted_return(&rewards, gamma);
    }
    Ok(total / seeds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_conventions() {
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn curve_requires_increasing_steps() {
        let mut c = LearningCurve::default();
        let p = |steps| CurvePoint { steps, mean_return: 0.0, std_return: 0.0 };
        c.push(p(10)).unwrap();
        assert!(c.push(p(10)).is_err());
        c.push(p(20)).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "steps,mean_return,std_return");
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn discounting_by_hand() {
        assert_eq!(discounted_return(&[1.0, 1.0, 1.0], 0.5), 1.75);
        assert_eq!(backward_value(&[1.0, 1.0, 1.0], 0.5), 1.75);
        assert_eq!(discounted_return(&[], 0.9), 0.0);
    }
}
