//! Sweeps over the norm `c` of a one-parameter family, recording whether the
//! real backward flow from a point next to `d(0)` survives to the horizon.

use rayon::prelude::*;
use thiserror::Error;

use crate::driving::{DrivingError, DrivingTerm};
use crate::flow::{advance_bwr, FlowError, RealStatus, SolverConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThresholdError {
    #[error("invalid parameter grid: {0}")]
    BadGrid(String),
    #[error("family at c = {c}: {source}")]
    Driving { c: f64, source: DrivingError },
    #[error("flow at c = {c}: {source}")]
    Flow { c: f64, source: FlowError },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdOutcome {
    /// Survived: `x(T) - d(T)` at the horizon.
    Gap(f64),
    Caught { t_star: f64, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRow {
    pub c: f64,
    pub x0: f64,
    pub outcome: ThresholdOutcome,
}

impl ThresholdRow {
    pub fn gap(&self) -> Option<f64> {
        match self.outcome {
            ThresholdOutcome::Gap(g) => Some(g),
            ThresholdOutcome::Caught { .. } => None,
        }
    }

    pub fn is_caught(&self) -> bool {
        matches!(self.outcome, ThresholdOutcome::Caught { .. })
    }
}

/// `from, from + step, ...` up to `to` inclusive, computed as `from + k step`
/// and rounded to 12 significant digits so that `3.0 + 9 * 0.1` prints as `3.9`.
pub fn c_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, ThresholdError> {
    if !(step > 0.0) || !from.is_finite() || !to.is_finite() || to < from {
        return Err(ThresholdError::BadGrid(format!(
            "need from <= to and step > 0, got from={from} to={to} step={step}"
        )));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|k| {
            let v = from + k as f64 * step;
            format!("{v:.11e}").parse().unwrap_or(v)
        })
        .collect())
}

/// Runs the backward flow from `d(0) + x0` for the family member at `c`.
pub fn catching_gap<F>(c: f64, x0: f64, family: F, cfg: &SolverConfig) -> Result<ThresholdRow, ThresholdError>
where
    F: Fn(f64) -> Result<DrivingTerm, DrivingError>,
{
    let d = family(c).map_err(|source| ThresholdError::Driving { c, source })?;
    let out = advance_bwr(d.initial() + x0, &d, d.horizon(), cfg)
        .map_err(|source| ThresholdError::Flow { c, source })?;
    let outcome = match out.status {
        RealStatus::Alive { t, x } => ThresholdOutcome::Gap(x - d.eval(t)),
        RealStatus::Caught { t_star, value } => ThresholdOutcome::Caught { t_star, value },
    };
    Ok(ThresholdRow { c, x0, outcome })
}

/// [`catching_gap`] over `cs` in parallel; rows come back in the order of `cs`.
pub fn threshold_sweep<F>(
    cs: &[f64],
    x0: f64,
    family: F,
    cfg: &SolverConfig,
) -> Result<Vec<ThresholdRow>, ThresholdError>
where
    F: Fn(f64) -> Result<DrivingTerm, DrivingError> + Sync,
{
    cs.par_iter()
        .map(|&c| catching_gap(c, x0, &family, cfg))
        .collect()
}
