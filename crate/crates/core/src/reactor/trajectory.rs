//! Trajectory CSV export, one row per control interval boundary.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::state::{ControlInput, PhysicalState, INPUT_NAMES, STATE_NAMES};
use crate::error::{Error, Result};

pub const TRAJECTORY_HEADER: &str = "t_s,m_W,m_M,m_P,T_R,T_S,T_J,T_EHE,T_CW_EHE,m_acc,T_ad,m_dot_feed,T_J_in,T_CW_EHE_in,n_violations";

/// Extra columns appended by recipe runs.
pub const RECIPE_COLUMNS: [&str; 3] = ["phase", "step_c", "exit_reason"];

/// State at the end of an interval together with the input applied during it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t_s: f64,
    pub state: PhysicalState,
    pub input: ControlInput,
    pub n_violations: usize,
    /// `(phase, step_c, exit_reason)` for recipe runs.
    pub recipe: Option<(usize, usize, String)>,
}

fn header(with_recipe: bool) -> Vec<String> {
    let mut h: Vec<String> = std::iter::once("t_s")
        .chain(STATE_NAMES)
        .chain(INPUT_NAMES)
        .chain(std::iter::once("n_violations"))
        .map(String::from)
        .collect();
    if with_recipe {
        h.extend(RECIPE_COLUMNS.iter().map(|s| s.to_string()));
    }
    h
}

/// Writes rows as CSV. Recipe columns are emitted when any row carries them.
pub fn write_trajectory_csv<W: Write>(out: W, rows: &[TrajectoryRow]) -> Result<()> {
    let with_recipe = rows.iter().any(|r| r.recipe.is_some());
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header(with_recipe)).map_err(to_err)?;
    for r in rows {
        let mut rec: Vec<String> = Vec::with_capacity(18);
        rec.push(format!("{:?}", r.t_s));
        rec.extend(r.state.to_array().iter().map(|v| format!("{v:?}")));
        rec.extend(r.input.to_array().iter().map(|v| format!("{v:?}")));
        rec.push(r.n_violations.to_string());
        if with_recipe {
            match &r.recipe {
                Some((z, c, reason)) => {
                    rec.push(z.to_string());
                    rec.push(c.to_string());
                    rec.push(reason.clone());
                }
                None => rec.extend(["", "", ""].map(String::from)),
            }
        }
        w.write_record(&rec).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(())
}

/// Sum of the `n_violations` column and row count of a trajectory CSV.
pub fn read_violation_column<R: std::io::Read>(input: R) -> Result<(usize, usize)> {
    let mut rdr = csv::Reader::from_reader(input);
    let to_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    let idx = rdr
        .headers()
        .map_err(to_err)?
        .iter()
        .position(|h| h == "n_violations")
        .ok_or_else(|| Error::Config("csv lacks n_violations column".into()))?;
    let (mut total, mut rows) = (0usize, 0usize);
    for rec in rdr.records() {
        let rec = rec.map_err(to_err)?;
        total += rec[idx]
            .parse::<usize>()
            .map_err(|e| Error::Config(format!("csv: bad n_violations: {e}")))?;
        rows += 1;
    }
    Ok((total, rows))
}
