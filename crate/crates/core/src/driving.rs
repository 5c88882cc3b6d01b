//! Driving terms: piecewise real functions of time steering the Loewner singularity.
//!
//! A [`DrivingTerm`] covers `[0, T]` with contiguous [`Piece`]s. Evaluation past
//! the horizon returns the terminal value, so every term is implicitly extended
//! as a constant for `t > T`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

/// Jump allowed at interior breakpoints of closed-form pieces, relative to `max(1, |value|)`.
pub const CLOSED_FORM_JUMP_TOL: f64 = 1e-12;

/// Number of dyadic offsets probed on each side of a knot by the sampled norm estimate.
const KNOT_REFINEMENT_LEVELS: i32 = 30;

/// Knots beyond this count are not promoted into the all-pairs grid.
const MAX_GRID_KNOTS: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DrivingError {
    #[error("driving term needs at least one piece")]
    Empty,
    #[error("piece {index} has an empty or reversed interval [{start}, {end}]")]
    BadInterval { index: usize, start: f64, end: f64 },
    #[error("pieces must be contiguous from t = 0; gap at piece {index} (expected start {expected}, found {found})")]
    NotContiguous {
        index: usize,
        expected: f64,
        found: f64,
    },
    #[error("jump of {jump:e} at breakpoint t = {at} exceeds continuity tolerance {tolerance:e}")]
    Discontinuous { at: f64, jump: f64, tolerance: f64 },
    #[error("square-root piece {index} would be evaluated outside the real domain")]
    SqrtDomain { index: usize },
    #[error("tabulated samples are malformed: {0}")]
    BadSamples(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Closed form of one piece. Times in the formulas are absolute.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Constant {
        value: f64,
    },
    /// `base + slope * (t - start)`.
    Linear {
        base: f64,
        slope: f64,
    },
    /// `base + coeff * sqrt(t - center)`, with `center <= start`.
    SqrtForward {
        base: f64,
        coeff: f64,
        center: f64,
    },
    /// `base + coeff * sqrt(center - t)`, with `center >= end`.
    SqrtBackward {
        base: f64,
        coeff: f64,
        center: f64,
    },
    /// Linear interpolation through `(times[i], values[i])`; `times` spans the piece.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub shape: Shape,
}

impl Piece {
    pub fn new(start: f64, end: f64, shape: Shape) -> Self {
        Self { start, end, shape }
    }

    fn eval(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Constant { value } => *value,
            Shape::Linear { base, slope } => base + slope * (t - self.start),
            Shape::SqrtForward {
                base,
                coeff,
                center,
            } => base + coeff * (t - center).max(0.0).sqrt(),
            Shape::SqrtBackward {
                base,
                coeff,
                center,
            } => base + coeff * (center - t).max(0.0).sqrt(),
            Shape::Tabulated { times, values } => interp_table(times, values, t),
        }
    }

    /// Exact Lip(1/2) norm of this piece on its own interval, when it has a closed form.
    pub fn exact_norm(&self) -> Option<f64> {
        let len = self.end - self.start;
        match &self.shape {
            Shape::Constant { .. } => Some(0.0),
            Shape::Linear { slope, .. } => Some(slope.abs() * len.sqrt()),
            // |sqrt(u) - sqrt(v)| <= sqrt(|u - v|) with equality at u = 0, so the
            // norm is |coeff| exactly when the root's zero sits on the piece.
            Shape::SqrtForward { coeff, center, .. } if *center == self.start => Some(coeff.abs()),
            Shape::SqrtBackward { coeff, center, .. } if *center == self.end => Some(coeff.abs()),
            Shape::Tabulated { times, values } if times.len() == 2 => {
                Some((values[1] - values[0]).abs() / len.sqrt())
            }
            _ => None,
        }
    }

    fn knots_into(&self, out: &mut Vec<f64>) {
        out.push(self.start);
        if let Shape::Tabulated { times, .. } = &self.shape {
            out.extend_from_slice(&times[1..times.len() - 1]);
        }
    }
}

fn interp_table(times: &[f64], values: &[f64], t: f64) -> f64 {
    let i = times.partition_point(|&s| s <= t);
    if i == 0 {
        return values[0];
    }
    if i >= times.len() {
        return values[values.len() - 1];
    }
    let (t0, t1) = (times[i - 1], times[i]);
    let (v0, v1) = (values[i - 1], values[i]);
    if t == t0 {
        return v0;
    }
    v0 + (v1 - v0) * ((t - t0) / (t1 - t0))
}

/// A continuous real function on `[0, T]`, extended by its terminal value for `t > T`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingTerm {
    pieces: Vec<Piece>,
    max_jump: f64,
}

/// Result of a Lip(1/2) norm computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipHalfEstimate {
    pub norm: f64,
    /// `true` when `norm` comes from a closed form rather than a sampled supremum.
    pub exact: bool,
    pub grid: usize,
}

impl DrivingTerm {
    /// Builds a term from contiguous pieces starting at `t = 0`.
    ///
    /// Closed-form pieces must meet within [`CLOSED_FORM_JUMP_TOL`]; tabulated
    /// neighbours are accepted regardless and the largest jump is recorded.
    pub fn from_pieces(pieces: Vec<Piece>) -> Result<Self, DrivingError> {
        Self::with_tolerance(pieces, f64::INFINITY)
    }

    /// As [`DrivingTerm::from_pieces`] but rejecting tabulated jumps above `tolerance`.
    pub fn with_tolerance(pieces: Vec<Piece>, tolerance: f64) -> Result<Self, DrivingError> {
        if pieces.is_empty() {
            return Err(DrivingError::Empty);
        }
        let mut expected = 0.0;
        for (index, p) in pieces.iter().enumerate() {
            if !(p.start < p.end) || !p.start.is_finite() || !p.end.is_finite() {
                return Err(DrivingError::BadInterval {
                    index,
                    start: p.start,
                    end: p.end,
                });
            }
            if p.start != expected {
                return Err(DrivingError::NotContiguous {
                    index,
                    expected,
                    found: p.start,
                });
            }
            expected = p.end;
            match &p.shape {
                Shape::SqrtForward { center, .. } if *center > p.start => {
                    return Err(DrivingError::SqrtDomain { index })
                }
                Shape::SqrtBackward { center, .. } if *center < p.end => {
                    return Err(DrivingError::SqrtDomain { index })
                }
                Shape::Tabulated { times, values } => {
                    check_table(times, values)?;
                    if times[0] != p.start || times[times.len() - 1] != p.end {
                        return Err(DrivingError::BadSamples(format!(
                            "table spans [{}, {}] but piece {index} spans [{}, {}]",
                            times[0],
                            times[times.len() - 1],
                            p.start,
                            p.end
                        )));
                    }
                }
                _ => {}
            }
        }

        let mut max_jump: f64 = 0.0;
        for pair in pieces.windows(2) {
            let (left, right) = (&pair[0], &pair[1]);
            let at = left.end;
            let l = left.eval(at);
            let r = right.eval(at);
            let jump = (l - r).abs();
            let tabulated = matches!(left.shape, Shape::Tabulated { .. })
                || matches!(right.shape, Shape::Tabulated { .. });
            let tol = if tabulated {
                tolerance
            } else {
                CLOSED_FORM_JUMP_TOL * l.abs().max(r.abs()).max(1.0)
            };
            if !(jump <= tol) {
                return Err(DrivingError::Discontinuous {
                    at,
                    jump,
                    tolerance: tol,
                });
            }
            max_jump = max_jump.max(jump);
        }
        Ok(Self { pieces, max_jump })
    }

    pub fn constant(value: f64, horizon: f64) -> Result<Self, DrivingError> {
        Self::single(horizon, Shape::Constant { value })
    }

    /// `base + slope * t` on `[0, horizon]`.
    pub fn linear(base: f64, slope: f64, horizon: f64) -> Result<Self, DrivingError> {
        Self::single(horizon, Shape::Linear { base, slope })
    }

    /// `base + coeff * sqrt(t)` on `[0, horizon]`.
    pub fn sqrt_t(base: f64, coeff: f64, horizon: f64) -> Result<Self, DrivingError> {
        Self::single(
            horizon,
            Shape::SqrtForward {
                base,
                coeff,
                center: 0.0,
            },
        )
    }

    /// `base + coeff * sqrt(horizon - t)` on `[0, horizon]`.
    pub fn sqrt_to_horizon(base: f64, coeff: f64, horizon: f64) -> Result<Self, DrivingError> {
        Self::single(
            horizon,
            Shape::SqrtBackward {
                base,
                coeff,
                center: horizon,
            },
        )
    }

    /// `c - c * sqrt(1 - t)` on `[0, 1]`; catches boundary points exactly when `c >= 4`.
    pub fn catching_family(c: f64) -> Result<Self, DrivingError> {
        Self::sqrt_to_horizon(c, -c, 1.0)
    }

    /// `3/2 - (3/2) sqrt(1 - 8t)` on `[0, 1/8]`, generating the half-circle `|z - 1/2| = 1/2`.
    pub fn half_circle() -> Self {
        Self::half_circle_until(0.125).expect("valid horizon")
    }

    /// The half-circle driving term truncated to `[0, horizon]`, `horizon <= 1/8`.
    pub fn half_circle_until(horizon: f64) -> Result<Self, DrivingError> {
        if !(horizon > 0.0 && horizon <= 0.125) {
            return Err(DrivingError::InvalidParameter(format!(
                "half-circle horizon must lie in (0, 1/8], got {horizon}"
            )));
        }
        Self::single(
            horizon,
            Shape::SqrtBackward {
                base: 1.5,
                coeff: -1.5 * 8f64.sqrt(),
                center: 0.125,
            },
        )
    }

    /// Piecewise-linear term through `(times[i], values[i])`; `times[0]` must be 0.
    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self, DrivingError> {
        check_table(&times, &values)?;
        if times[0] != 0.0 {
            return Err(DrivingError::BadSamples(format!(
                "first sample time must be 0, got {}",
                times[0]
            )));
        }
        let end = times[times.len() - 1];
        Self::from_pieces(vec![Piece::new(0.0, end, Shape::Tabulated { times, values })])
    }

    fn single(horizon: f64, shape: Shape) -> Result<Self, DrivingError> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(DrivingError::InvalidParameter(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        Self::from_pieces(vec![Piece::new(0.0, horizon, shape)])
    }

    pub fn horizon(&self) -> f64 {
        self.pieces[self.pieces.len() - 1].end
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Largest jump observed at an interior breakpoint.
    pub fn max_jump(&self) -> f64 {
        self.max_jump
    }

    /// Value at time `t`; `t > T` yields the terminal value, `t < 0` the initial one.
    pub fn eval(&self, t: f64) -> f64 {
        let last = &self.pieces[self.pieces.len() - 1];
        if t >= last.end {
            return last.eval(last.end);
        }
        if t <= 0.0 {
            return self.pieces[0].eval(0.0);
        }
        let i = self.pieces.partition_point(|p| p.end <= t);
        self.pieces[i].eval(t)
    }

    pub fn initial(&self) -> f64 {
        self.eval(0.0)
    }

    pub fn terminal(&self) -> f64 {
        self.eval(self.horizon())
    }

    /// First breakpoint (piece boundary or table node) strictly after `t`, if any before `T`.
    pub fn next_knot(&self, t: f64) -> Option<f64> {
        if t >= self.horizon() {
            return None;
        }
        let i = self.pieces.partition_point(|p| p.end <= t);
        let p = &self.pieces[i];
        if let Shape::Tabulated { times, .. } = &p.shape {
            let j = times.partition_point(|&s| s <= t);
            if j < times.len() {
                return Some(times[j]);
            }
        }
        Some(p.end)
    }

    /// All breakpoints in `[0, T]`, including table nodes.
    pub fn knots(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for p in &self.pieces {
            p.knots_into(&mut out);
        }
        out.push(self.horizon());
        out
    }

    /// Exact per-piece norms, `None` for pieces without a closed form.
    pub fn local_norms(&self) -> Vec<Option<f64>> {
        self.pieces.iter().map(Piece::exact_norm).collect()
    }

    /// Lip(1/2) norm: exact for single closed-form pieces, otherwise the largest
    /// quotient `|d(s) - d(t)| / sqrt|s - t|` over a sampled pair set.
    pub fn lip_half_norm(&self, grid: usize) -> LipHalfEstimate {
        let grid = grid.max(2);
        if self.pieces.len() == 1 {
            if let Some(norm) = self.pieces[0].exact_norm() {
                return LipHalfEstimate {
                    norm,
                    exact: true,
                    grid,
                };
            }
        }
        if self
            .pieces
            .iter()
            .all(|p| matches!(p.shape, Shape::Constant { .. }))
            && self.max_jump == 0.0
        {
            return LipHalfEstimate {
                norm: 0.0,
                exact: true,
                grid,
            };
        }
        LipHalfEstimate {
            norm: self.sampled_norm(grid),
            exact: false,
            grid,
        }
    }

    fn sampled_norm(&self, grid: usize) -> f64 {
        let horizon = self.horizon();
        let knots = self.knots();
        let mut times: Vec<f64> = (0..=grid)
            .map(|i| horizon * i as f64 / grid as f64)
            .collect();
        if knots.len() <= MAX_GRID_KNOTS {
            times.extend_from_slice(&knots);
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        let values: Vec<f64> = times.iter().map(|&t| self.eval(t)).collect();

        let mut best: f64 = 0.0;
        for i in 0..times.len() {
            for j in (i + 1)..times.len() {
                let q = (values[j] - values[i]).abs() / (times[j] - times[i]).sqrt();
                best = best.max(q);
            }
        }

        // Square-root suprema are attained as one point approaches a knot.
        let probe_knots = if knots.len() <= MAX_GRID_KNOTS {
            knots.as_slice()
        } else {
            &knots[..0]
        };
        for &k in probe_knots.iter().chain([0.0, horizon].iter()) {
            let vk = self.eval(k);
            for level in 1..=KNOT_REFINEMENT_LEVELS {
                let delta = horizon * 2f64.powi(-level);
                for s in [k - delta, k + delta] {
                    if s < 0.0 || s > horizon || s == k {
                        continue;
                    }
                    let q = (self.eval(s) - vk).abs() / (s - k).abs().sqrt();
                    best = best.max(q);
                }
            }
        }
        best
    }

    /// `t -> d(r^2 t) / r` on `[0, T / r^2]`.
    pub fn rescale(&self, r: f64) -> Result<Self, DrivingError> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(DrivingError::InvalidParameter(format!(
                "scale factor must be positive, got {r}"
            )));
        }
        if r == 1.0 {
            return Ok(self.clone());
        }
        let r2 = r * r;
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let shape = match &p.shape {
                    Shape::Constant { value } => Shape::Constant { value: value / r },
                    Shape::Linear { base, slope } => Shape::Linear {
                        base: base / r,
                        slope: slope * r,
                    },
                    Shape::SqrtForward {
                        base,
                        coeff,
                        center,
                    } => Shape::SqrtForward {
                        base: base / r,
                        coeff: *coeff,
                        center: center / r2,
                    },
                    Shape::SqrtBackward {
                        base,
                        coeff,
                        center,
                    } => Shape::SqrtBackward {
                        base: base / r,
                        coeff: *coeff,
                        center: center / r2,
                    },
                    Shape::Tabulated { times, values } => Shape::Tabulated {
                        times: times.iter().map(|t| t / r2).collect(),
                        values: values.iter().map(|v| v / r).collect(),
                    },
                };
                Piece::new(p.start / r2, p.end / r2, shape)
            })
            .collect();
        Ok(Self {
            pieces,
            max_jump: self.max_jump / r,
        })
    }

    /// `t -> d(T - t)` on `[0, T]`.
    pub fn reverse(&self) -> Self {
        let horizon = self.horizon();
        let flip = |t: f64| horizon - t;
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|p| {
                let (start, end) = (flip(p.end), flip(p.start));
                let shape = match &p.shape {
                    Shape::Constant { value } => Shape::Constant { value: *value },
                    Shape::Linear { base, slope } => Shape::Linear {
                        base: base + slope * (p.end - p.start),
                        slope: -slope,
                    },
                    Shape::SqrtForward {
                        base,
                        coeff,
                        center,
                    } => Shape::SqrtBackward {
                        base: *base,
                        coeff: *coeff,
                        center: flip(*center),
                    },
                    Shape::SqrtBackward {
                        base,
                        coeff,
                        center,
                    } => Shape::SqrtForward {
                        base: *base,
                        coeff: *coeff,
                        center: flip(*center),
                    },
                    Shape::Tabulated { times, values } => {
                        let mut ts: Vec<f64> = times.iter().rev().map(|&t| flip(t)).collect();
                        // keep the table aligned with the flipped piece bounds exactly
                        ts[0] = start;
                        let last = ts.len() - 1;
                        ts[last] = end;
                        Shape::Tabulated {
                            times: ts,
                            values: values.iter().rev().copied().collect(),
                        }
                    }
                };
                Piece::new(start, end, shape)
            })
            .collect::<Vec<_>>();
        let mut pieces = pieces;
        pieces[0].start = 0.0;
        if let Shape::Tabulated { times, .. } = &mut pieces[0].shape {
            times[0] = 0.0;
        }
        Self {
            pieces,
            max_jump: self.max_jump,
        }
    }

    /// The term restricted to `[0, t]`; `t` is clamped to the horizon.
    pub fn truncate(&self, t: f64) -> Result<Self, DrivingError> {
        if !(t > 0.0) {
            return Err(DrivingError::InvalidParameter(format!(
                "truncation time must be positive, got {t}"
            )));
        }
        if t >= self.horizon() {
            return Ok(self.clone());
        }
        let mut pieces = Vec::new();
        for p in &self.pieces {
            if p.start >= t {
                break;
            }
            let mut q = p.clone();
            if q.end > t {
                q.end = t;
                // closed forms keep their parameters; only tables need trimming
                if let Shape::Tabulated { times, values } = &mut q.shape {
                    let v = interp_table(times, values, t);
                    let keep = times.partition_point(|&s| s < t);
                    times.truncate(keep);
                    values.truncate(keep);
                    times.push(t);
                    values.push(v);
                }
            }
            pieces.push(q);
        }
        Ok(Self {
            pieces,
            max_jump: self.max_jump,
        })
    }

    /// Values at `t_k = k T / n` for `k = 0..=n`.
    pub fn sample_uniform(&self, n: usize) -> Vec<f64> {
        let horizon = self.horizon();
        (0..=n)
            .map(|k| self.eval(knot_time(k, n, horizon)))
            .collect()
    }
}

fn knot_time(k: usize, n: usize, horizon: f64) -> f64 {
    if k == n {
        horizon
    } else {
        horizon * k as f64 / n as f64
    }
}

fn check_table(times: &[f64], values: &[f64]) -> Result<(), DrivingError> {
    if times.len() != values.len() {
        return Err(DrivingError::BadSamples(format!(
            "{} times but {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < 2 {
        return Err(DrivingError::BadSamples("need at least two samples".into()));
    }
    if times.iter().chain(values).any(|v| !v.is_finite()) {
        return Err(DrivingError::BadSamples("non-finite sample".into()));
    }
    if let Some(w) = times.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(DrivingError::BadSamples(format!(
            "times not strictly increasing at {} -> {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Piecewise-linear interpolant through `samples[k]` at `t_k = k T / n`, `n = samples.len() - 1`.
///
/// Slopes are `m_k = (samples[k+1] - samples[k]) n / T`; the interpolant never
/// exceeds the Lip(1/2) norm of the function it was sampled from.
pub fn interpolate_linear(samples: &[f64], horizon: f64) -> Result<DrivingTerm, DrivingError> {
    let n = check_samples(samples, horizon)?;
    let pieces = (0..n)
        .map(|k| {
            let start = knot_time(k, n, horizon);
            let end = knot_time(k + 1, n, horizon);
            let slope = (samples[k + 1] - samples[k]) * n as f64 / horizon;
            Piece::new(
                start,
                end,
                Shape::Linear {
                    base: samples[k],
                    slope,
                },
            )
        })
        .collect();
    DrivingTerm::from_pieces(pieces)
}

/// Square-root interpolant: on `[t_k, t_{k+1}]` the term is
/// `c_k sqrt(t_{k+1} - t) + samples[k+1]` with `c_k = (samples[k] - samples[k+1]) sqrt(n / T)`.
pub fn interpolate_sqrt(samples: &[f64], horizon: f64) -> Result<DrivingTerm, DrivingError> {
    let n = check_samples(samples, horizon)?;
    let scale = (n as f64 / horizon).sqrt();
    let pieces = (0..n)
        .map(|k| {
            let start = knot_time(k, n, horizon);
            let end = knot_time(k + 1, n, horizon);
            Piece::new(
                start,
                end,
                Shape::SqrtBackward {
                    base: samples[k + 1],
                    coeff: (samples[k] - samples[k + 1]) * scale,
                    center: end,
                },
            )
        })
        .collect();
    DrivingTerm::from_pieces(pieces)
}

fn check_samples(samples: &[f64], horizon: f64) -> Result<usize, DrivingError> {
    if samples.len() < 2 {
        return Err(DrivingError::BadSamples(
            "interpolation needs at least two samples".into(),
        ));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(DrivingError::InvalidParameter(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(DrivingError::BadSamples("non-finite sample".into()));
    }
    Ok(samples.len() - 1)
}

/// Scaled Brownian path `sqrt(kappa) B_t` sampled `resolution` times per unit time.
///
/// Uses ChaCha8 seeded from `seed`, so equal arguments give identical paths on
/// every platform.
pub fn brownian(
    kappa: f64,
    seed: u64,
    horizon: f64,
    resolution: usize,
) -> Result<DrivingTerm, DrivingError> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(DrivingError::InvalidParameter(format!(
            "kappa must be nonnegative, got {kappa}"
        )));
    }
    if resolution == 0 {
        return Err(DrivingError::InvalidParameter(
            "resolution must be at least 1".into(),
        ));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(DrivingError::InvalidParameter(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let steps = ((horizon * resolution as f64).ceil() as usize).max(1);
    let dt = horizon / steps as f64;
    let sd = (kappa * dt).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let times: Vec<f64> = (0..=steps).map(|k| knot_time(k, steps, horizon)).collect();
    let mut values = Vec::with_capacity(steps + 1);
    let mut b = 0.0;
    values.push(b);
    for _ in 0..steps {
        let z: f64 = StandardNormal.sample(&mut rng);
        b += sd * z;
        values.push(b);
    }
    DrivingTerm::tabulated(times, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_examples() {
        let zero = DrivingTerm::constant(0.0, 1.0).unwrap();
        assert_eq!(zero.eval(0.7), 0.0);
        let circle = DrivingTerm::half_circle();
        assert_eq!(circle.eval(0.125), 1.5);
        assert_abs_diff_eq!(circle.eval(0.0), 0.0, epsilon = 1e-15);
        let fam = DrivingTerm::catching_family(4.0).unwrap();
        assert_eq!(fam.eval(1.0), 4.0);
        // extension past the horizon
        assert_eq!(fam.eval(3.0), 4.0);
    }

    #[test]
    fn exact_norms() {
        let c = DrivingTerm::constant(2.5, 3.0).unwrap().lip_half_norm(16);
        assert!(c.exact);
        assert_eq!(c.norm, 0.0);

        let circle = DrivingTerm::half_circle().lip_half_norm(16);
        assert!(circle.exact);
        assert_abs_diff_eq!(circle.norm, 3.0 * 2f64.sqrt(), epsilon = 1e-12);

        let fam = DrivingTerm::catching_family(4.0).unwrap().lip_half_norm(16);
        assert!(fam.exact);
        assert_eq!(fam.norm, 4.0);
    }

    #[test]
    fn sampled_norm_approaches_exact_from_below() {
        let fam = DrivingTerm::catching_family(4.0).unwrap();
        let sampled = fam.sampled_norm(200);
        // rounding in d(s) - d(t) is amplified by 1/sqrt|s - t| at the finest probe
        assert!(sampled <= 4.0 + 1e-9);
        assert!(sampled > 3.99, "sampled {sampled}");
    }

    #[test]
    fn rescale_examples() {
        let fam = DrivingTerm::catching_family(4.0).unwrap();
        assert_eq!(fam.rescale(1.0).unwrap(), fam);
        let half = fam.rescale(2.0).unwrap();
        assert_eq!(half.horizon(), 0.25);
        for i in 0..=100 {
            let t = 0.25 * i as f64 / 100.0;
            let expected = 2.0 - 2.0 * (1.0 - 4.0 * t).max(0.0).sqrt();
            assert_abs_diff_eq!(half.eval(t), expected, epsilon = 1e-12);
        }
        let five = DrivingTerm::constant(5.0, 1.0).unwrap();
        let scaled = five.rescale(4.0).unwrap();
        assert_eq!(scaled.eval(0.01), 1.25);
        assert!(fam.rescale(0.0).is_err());
    }

    #[test]
    fn reverse_examples() {
        let zero = DrivingTerm::constant(0.0, 2.0).unwrap();
        assert_eq!(zero.reverse().eval(0.3), 0.0);

        let fam = DrivingTerm::catching_family(4.0).unwrap().reverse();
        for i in 0..=50 {
            let t = i as f64 / 50.0;
            assert_abs_diff_eq!(fam.eval(t), 4.0 - 4.0 * t.sqrt(), epsilon = 1e-12);
        }

        let tab = DrivingTerm::tabulated(vec![0.0, 1.0], vec![0.0, 3.0])
            .unwrap()
            .reverse();
        match &tab.pieces()[0].shape {
            Shape::Tabulated { times, values } => {
                assert_eq!(times, &vec![0.0, 1.0]);
                assert_eq!(values, &vec![3.0, 0.0]);
            }
            other => panic!("unexpected shape {other:?}"),
        }
    }

    #[test]
    fn linear_interpolation_examples() {
        let zero = interpolate_linear(&[0.0; 5], 1.0).unwrap();
        assert!((0..=20).all(|i| zero.eval(i as f64 / 20.0) == 0.0));

        // xi(t) = 4 - 4 sqrt(t) has xi(0) = 4 and xi(1) = 0, so the chord is 4 - 4t
        let xi = DrivingTerm::catching_family(4.0).unwrap().reverse();
        let one = interpolate_linear(&xi.sample_uniform(1), 1.0).unwrap();
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            assert_abs_diff_eq!(one.eval(t), 4.0 - 4.0 * t, epsilon = 1e-15);
        }

        let root = DrivingTerm::sqrt_t(0.0, 1.0, 1.0).unwrap();
        let two = interpolate_linear(&root.sample_uniform(2), 1.0).unwrap();
        let slopes: Vec<f64> = two
            .pieces()
            .iter()
            .map(|p| match p.shape {
                Shape::Linear { slope, .. } => slope,
                _ => unreachable!(),
            })
            .collect();
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(slopes[0], 2.0 * h, epsilon = 1e-15);
        assert_abs_diff_eq!(slopes[1], 2.0 * (1.0 - h), epsilon = 1e-15);
    }

    #[test]
    fn sqrt_interpolation_examples() {
        let zero = interpolate_sqrt(&[0.0; 3], 1.0).unwrap();
        assert!((0..=20).all(|i| zero.eval(i as f64 / 20.0) == 0.0));

        let fam = DrivingTerm::catching_family(4.0).unwrap();
        let interp = interpolate_sqrt(&fam.sample_uniform(1), 1.0).unwrap();
        assert_eq!(interp.pieces(), fam.pieces());

        let root = DrivingTerm::sqrt_t(0.0, 1.0, 1.0).unwrap();
        let two = interpolate_sqrt(&root.sample_uniform(2), 1.0).unwrap();
        let norms: Vec<f64> = two.local_norms().into_iter().map(Option::unwrap).collect();
        let coeffs: Vec<f64> = two
            .pieces()
            .iter()
            .map(|p| match p.shape {
                Shape::SqrtBackward { coeff, .. } => coeff,
                _ => unreachable!(),
            })
            .collect();
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(coeffs[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(coeffs[1], (h - 1.0) * 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(norms[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn brownian_examples() {
        let still = brownian(0.0, 7, 1.0, 100).unwrap();
        assert!((0..=100).all(|i| still.eval(i as f64 / 100.0) == 0.0));

        let a = brownian(2.0, 42, 1.0, 1000).unwrap();
        let b = brownian(2.0, 42, 1.0, 1000).unwrap();
        assert_eq!(a, b);
        let c = brownian(2.0, 43, 1.0, 1000).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn brownian_increment_variance() {
        let steps = 100_000;
        let path = brownian(4.0, 2024, 1.0, steps).unwrap();
        let (times, values) = match &path.pieces()[0].shape {
            Shape::Tabulated { times, values } => (times, values),
            _ => unreachable!(),
        };
        let mean_sq: f64 = times
            .windows(2)
            .zip(values.windows(2))
            .map(|(t, v)| (v[1] - v[0]).powi(2) / (t[1] - t[0]))
            .sum::<f64>()
            / steps as f64;
        assert!((mean_sq - 4.0).abs() < 0.2, "variance ratio {mean_sq}");
    }

    #[test]
    fn rejects_bad_construction() {
        assert_eq!(
            DrivingTerm::from_pieces(vec![]).unwrap_err(),
            DrivingError::Empty
        );
        let gap = DrivingTerm::from_pieces(vec![
            Piece::new(0.0, 1.0, Shape::Constant { value: 0.0 }),
            Piece::new(1.5, 2.0, Shape::Constant { value: 0.0 }),
        ]);
        assert!(matches!(gap, Err(DrivingError::NotContiguous { .. })));
        let jump = DrivingTerm::from_pieces(vec![
            Piece::new(0.0, 1.0, Shape::Constant { value: 0.0 }),
            Piece::new(1.0, 2.0, Shape::Constant { value: 1e-6 }),
        ]);
        assert!(matches!(jump, Err(DrivingError::Discontinuous { .. })));
        let root = DrivingTerm::from_pieces(vec![Piece::new(
            0.0,
            1.0,
            Shape::SqrtBackward {
                base: 0.0,
                coeff: 1.0,
                center: 0.5,
            },
        )]);
        assert!(matches!(root, Err(DrivingError::SqrtDomain { .. })));
        assert!(DrivingTerm::tabulated(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(DrivingTerm::tabulated(vec![0.1, 1.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn tabulated_jumps_are_reported() {
        let term = DrivingTerm::from_pieces(vec![
            Piece::new(
                0.0,
                1.0,
                Shape::Tabulated {
                    times: vec![0.0, 1.0],
                    values: vec![0.0, 1.0],
                },
            ),
            Piece::new(1.0, 2.0, Shape::Constant { value: 1.25 }),
        ])
        .unwrap();
        assert_abs_diff_eq!(term.max_jump(), 0.25, epsilon = 1e-15);
        let strict = DrivingTerm::with_tolerance(term.pieces().to_vec(), 0.1);
        assert!(matches!(strict, Err(DrivingError::Discontinuous { .. })));
    }

    #[test]
    fn truncate_and_knots() {
        let tab = DrivingTerm::tabulated(vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        let cut = tab.truncate(0.75).unwrap();
        assert_eq!(cut.horizon(), 0.75);
        assert_abs_diff_eq!(cut.eval(0.75), 0.5, epsilon = 1e-15);
        assert_eq!(tab.next_knot(0.2), Some(0.5));
        assert_eq!(tab.next_knot(0.5), Some(1.0));
        assert_eq!(tab.next_knot(1.0), None);
        assert_eq!(tab.knots(), vec![0.0, 0.5, 1.0]);
    }
}
