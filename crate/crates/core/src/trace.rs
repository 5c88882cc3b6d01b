//! The curve generated by a driving term.
//!
//! Two independent schemes: composing elementary vertical-slit maps over a
//! piecewise-constant approximation, and running the forward flow from a
//! lifted tip. Both evaluate `gamma(t) = g_t^{-1}(d(t))`.

use rayon::prelude::*;
use thiserror::Error;

use crate::driving::{DrivingError, DrivingTerm};
use crate::flow::{advance_fw, vertical_slit_map, FlowError, SolverConfig};
use crate::Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Driving(#[from] DrivingError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceScheme {
    Composition,
    Flow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// `(t, gamma(t))` with `t` strictly increasing.
    pub samples: Vec<(f64, Complex64)>,
    pub n_steps: usize,
    pub scheme: TraceScheme,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    /// Largest `| |gamma - center| - radius |` over the samples.
    pub fn max_circle_deviation(&self, center: Complex64, radius: f64) -> f64 {
        self.points()
            .map(|z| ((z - center).norm() - radius).abs())
            .fold(0.0, f64::max)
    }
}

/// Trace at `t_k = k T / n`, `k = 0..=n`, by composing slit maps.
///
/// On step `j` the driving term is frozen at its midpoint value `d_j`; then
/// `gamma(t_k) = F_0 o ... o F_{k-2}(d_{k-1} + 2i sqrt(dt))` with `F_j` the
/// vertical slit map at `d_j`. Each sample costs `k` map applications, so the
/// samples are computed in parallel.
pub fn compose_trace(d: &DrivingTerm, n: usize) -> Result<Trace, TraceError> {
    if n == 0 {
        return Err(TraceError::InvalidArgument("n must be at least 1".into()));
    }
    let horizon = d.horizon();
    let dt = horizon / n as f64;
    let mids: Vec<f64> = (0..n).map(|j| d.eval((j as f64 + 0.5) * dt)).collect();
    let tip = 2.0 * dt.sqrt();
    let mut samples: Vec<(f64, Complex64)> = (1..=n)
        .into_par_iter()
        .map(|k| {
            let mut z = Complex64::new(mids[k - 1], tip);
            for j in (0..k - 1).rev() {
                z = vertical_slit_map(z, mids[j], dt);
            }
            (k as f64 * dt, z)
        })
        .collect();
    samples.insert(0, (0.0, Complex64::new(d.initial(), 0.0)));
    Ok(Trace {
        samples,
        n_steps: n,
        scheme: TraceScheme::Composition,
    })
}

/// Default tip lift for a step size `dt`: one tenth of `sqrt(dt)`.
pub fn default_lift(dt: f64) -> f64 {
    dt.sqrt() / 10.0
}

/// `gamma(t)` by the forward flow from `d(t) + i eps` under `s -> d(t - s)`, `s in [0, t]`.
pub fn tip_by_flow(
    d: &DrivingTerm,
    t: f64,
    eps: f64,
    cfg: &SolverConfig,
) -> Result<Complex64, TraceError> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(TraceError::InvalidArgument(format!(
            "lift must be positive, got {eps}"
        )));
    }
    if !(t >= 0.0) || t > d.horizon() {
        return Err(TraceError::InvalidArgument(format!(
            "t = {t} outside [0, {}]",
            d.horizon()
        )));
    }
    let start = Complex64::new(d.eval(t), eps);
    if t == 0.0 {
        return Ok(start);
    }
    let reversed = d.truncate(t)?.reverse();
    Ok(advance_fw(start, &reversed, t, cfg)?.z)
}

/// Trace at `t_k = k T / n` from independent forward-flow runs.
pub fn flow_trace(
    d: &DrivingTerm,
    n: usize,
    eps: f64,
    cfg: &SolverConfig,
) -> Result<Trace, TraceError> {
    if n == 0 {
        return Err(TraceError::InvalidArgument("n must be at least 1".into()));
    }
    let dt = d.horizon() / n as f64;
    let mut samples = (1..=n)
        .into_par_iter()
        .map(|k| {
            let t = k as f64 * dt;
            tip_by_flow(d, t, eps, cfg).map(|z| (t, z))
        })
        .collect::<Result<Vec<_>, _>>()?;
    samples.insert(0, (0.0, Complex64::new(d.initial(), 0.0)));
    Ok(Trace {
        samples,
        n_steps: n,
        scheme: TraceScheme::Flow,
    })
}

/// Cutoffs for [`slit_diagnostics`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticThresholds {
    /// Minimum of `Im gamma(t) / |gamma(t) - gamma(0)|` over `t > 0`.
    ///
    /// A return to the real axis is only resolved to about `sqrt(dt)`, so the
    /// ratio of such a trace decays slowly with `n`.
    pub min_height_ratio: f64,
    /// Minimum chord-to-arc ratio between non-adjacent samples.
    pub min_chord_arc: f64,
}

impl Default for DiagnosticThresholds {
    fn default() -> Self {
        Self {
            min_height_ratio: 0.1,
            min_chord_arc: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitReport {
    /// Smallest distance between samples at least two indices apart.
    pub min_separation: f64,
    /// Smallest `Im gamma(t)` over `t > 0`.
    pub min_im: f64,
    /// Smallest `Im gamma(t) / |gamma(t) - gamma(0)|`; near zero when the curve returns to the real axis.
    pub min_height_ratio: f64,
    /// Smallest `|gamma(s) - gamma(t)| / arclength(s, t)`; near zero at near self-intersections.
    pub min_chord_arc: f64,
    pub simple_plausible: bool,
}

/// Heuristic check that a sampled trace looks like a simple curve in the upper half-plane.
pub fn slit_diagnostics(tr: &Trace, thresholds: DiagnosticThresholds) -> Result<SlitReport, TraceError> {
    let pts: Vec<Complex64> = tr.points().collect();
    if pts.len() < 3 {
        return Err(TraceError::InvalidArgument(
            "diagnostics need at least 3 samples".into(),
        ));
    }
    let mut arc = Vec::with_capacity(pts.len());
    arc.push(0.0);
    for w in pts.windows(2) {
        arc.push(arc.last().unwrap() + (w[1] - w[0]).norm());
    }
    let origin = pts[0];
    let min_im = pts[1..].iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    let min_height_ratio = pts[1..]
        .iter()
        .map(|z| {
            let r = (z - origin).norm();
            if r > 0.0 {
                z.im / r
            } else {
                0.0
            }
        })
        .fold(f64::INFINITY, f64::min);
    let (min_separation, min_chord_arc) = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut sep = f64::INFINITY;
            let mut ratio = f64::INFINITY;
            for j in i + 2..pts.len() {
                let dist = (pts[j] - pts[i]).norm();
                sep = sep.min(dist);
                let len = arc[j] - arc[i];
                if len > 0.0 {
                    ratio = ratio.min(dist / len);
                }
            }
            (sep, ratio)
        })
        .reduce(
            || (f64::INFINITY, f64::INFINITY),
            |a, b| (a.0.min(b.0), a.1.min(b.1)),
        );
    let simple_plausible = min_im > 0.0
        && min_height_ratio >= thresholds.min_height_ratio
        && min_chord_arc >= thresholds.min_chord_arc;
    Ok(SlitReport {
        min_separation,
        min_im,
        min_height_ratio,
        min_chord_arc,
        simple_plausible,
    })
}
