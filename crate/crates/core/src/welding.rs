//! Hitting times of the real forward flow and the conformal welding they induce.
//!
//! For a driving term with Lip(1/2) norm below 4 every real point other than
//! `d(0)` reaches the singularity in finite time `T(x)`, and exactly one point
//! on the opposite side shares that time. The welding `phi` swaps the two.

use rayon::prelude::*;
use thiserror::Error;

use crate::driving::DrivingTerm;
use crate::flow::{advance_fwr, FlowError, RealStatus, SolverConfig};

/// Relative width at which the partner bisection stops.
pub const BISECTION_REL_TOL: f64 = 1e-13;

/// Bracket expansions allowed before giving up on a partner search.
const MAX_BRACKET_STEPS: usize = 64;

/// Grid used when checking the norm precondition on non-exact terms.
const NORM_CHECK_GRID: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeldingError {
    #[error("no hit within the step budget from x0 = {x0}: {source}")]
    NoHitWithinBudget { x0: f64, source: FlowError },
    #[error("bisection bracket for the partner of {x} not found")]
    BracketFailure { x: f64 },
    #[error("driving term has Lip(1/2) norm {norm} >= 4; the welding is undefined")]
    NormTooLarge { norm: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Flow(FlowError),
}

impl From<FlowError> for WeldingError {
    fn from(e: FlowError) -> Self {
        WeldingError::Flow(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingRecord {
    pub x0: f64,
    pub t_hit: f64,
    /// Driving value at the hit, `d(t_hit)`.
    pub terminal: f64,
    /// Time uncertainty: how long the constant-driving flow needs to cross the guard.
    pub resolution: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeldingPair {
    pub x: f64,
    pub phi_x: f64,
    pub t_hit: f64,
    /// `|T(x) - T(phi(x))|`.
    pub residual: f64,
}

/// First time the forward flow from `x0` meets the singularity.
///
/// Past the horizon the driving term is frozen at `d(T)`, where the flow is
/// explicit: `(x - d(T))^2` decreases at rate 4.
pub fn hitting_time(
    x0: f64,
    d: &DrivingTerm,
    cfg: &SolverConfig,
) -> Result<HittingRecord, WeldingError> {
    if x0 == d.initial() {
        return Err(WeldingError::InvalidArgument(format!(
            "x0 = {x0} sits on the singularity"
        )));
    }
    let horizon = d.horizon();
    let out = advance_fwr(x0, d, horizon, cfg).map_err(|e| match e {
        FlowError::StepLimitExceeded { .. } => WeldingError::NoHitWithinBudget { x0, source: e },
        other => WeldingError::Flow(other),
    })?;
    let guard = cfg.eps_sing * x0.abs().max(1.0);
    let t_hit = match out.status {
        RealStatus::Caught { t_star, .. } => t_star,
        RealStatus::Alive { t, x } => {
            let g = x - d.eval(t);
            t + g * g / 4.0
        }
    };
    Ok(HittingRecord {
        x0,
        t_hit,
        terminal: d.eval(t_hit),
        resolution: guard * guard / 4.0,
    })
}

/// Ratio spread `max / min` of `T(x) / (x - d(0))^2` over the given points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KBounds {
    pub k1: f64,
    pub k2: f64,
}

impl KBounds {
    pub fn spread(&self) -> f64 {
        self.k2 / self.k1
    }
}

/// Empirical constants with `k1 (x - d(0))^2 <= T(x) <= k2 (x - d(0))^2` on `points`.
pub fn k_bounds(
    d: &DrivingTerm,
    points: &[f64],
    cfg: &SolverConfig,
) -> Result<KBounds, WeldingError> {
    let xi0 = d.initial();
    let ratios = points
        .par_iter()
        .map(|&x| hitting_time(x, d, cfg).map(|h| h.t_hit / (x - xi0).powi(2)))
        .collect::<Result<Vec<_>, _>>()?;
    if ratios.is_empty() {
        return Err(WeldingError::InvalidArgument("no points given".into()));
    }
    Ok(KBounds {
        k1: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        k2: ratios.iter().copied().fold(0.0, f64::max),
    })
}

/// Rejects driving terms whose (exact or sampled) norm is at least 4.
pub fn check_norm(d: &DrivingTerm) -> Result<f64, WeldingError> {
    let est = d.lip_half_norm(NORM_CHECK_GRID);
    if est.norm >= 4.0 {
        return Err(WeldingError::NormTooLarge { norm: est.norm });
    }
    Ok(est.norm)
}

/// Point on the other side of `d(0)` with the same hitting time as `x`.
fn partner(x: f64, d: &DrivingTerm, cfg: &SolverConfig) -> Result<WeldingPair, WeldingError> {
    let xi0 = d.initial();
    if x == xi0 {
        return Ok(WeldingPair {
            x,
            phi_x: xi0,
            t_hit: 0.0,
            residual: 0.0,
        });
    }
    let target = hitting_time(x, d, cfg)?.t_hit;
    let side = if x > xi0 { -1.0 } else { 1.0 };
    let at = |u: f64| hitting_time(xi0 + side * u, d, cfg).map(|h| h.t_hit);

    // T grows with the distance from d(0), so bracket the offset u geometrically
    let mut lo = (x - xi0).abs();
    let mut hi = lo;
    let t0 = at(lo)?;
    if t0 < target {
        let mut steps = 0;
        loop {
            hi *= 2.0;
            if at(hi)? >= target {
                break;
            }
            lo = hi;
            steps += 1;
            if steps > MAX_BRACKET_STEPS {
                return Err(WeldingError::BracketFailure { x });
            }
        }
    } else {
        let mut steps = 0;
        loop {
            lo *= 0.5;
            if at(lo)? <= target {
                break;
            }
            hi = lo;
            steps += 1;
            if steps > MAX_BRACKET_STEPS {
                return Err(WeldingError::BracketFailure { x });
            }
        }
    }
    while hi - lo > BISECTION_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    let phi_x = xi0 + side * u;
    let t_phi = hitting_time(phi_x, d, cfg)?.t_hit;
    Ok(WeldingPair {
        x,
        phi_x,
        t_hit: target,
        residual: (t_phi - target).abs(),
    })
}

/// `phi(x)` for `x > d(0)`: the left point with the same hitting time.
pub fn welding_point(
    x: f64,
    d: &DrivingTerm,
    cfg: &SolverConfig,
) -> Result<WeldingPair, WeldingError> {
    if !(x > d.initial()) {
        return Err(WeldingError::InvalidArgument(format!(
            "welding_point expects x > d(0) = {}, got {x}",
            d.initial()
        )));
    }
    check_norm(d)?;
    partner(x, d, cfg)
}

/// Welding partners for many points on either side, computed in parallel.
pub fn welding_table(
    xs: &[f64],
    d: &DrivingTerm,
    cfg: &SolverConfig,
) -> Result<Vec<WeldingPair>, WeldingError> {
    check_norm(d)?;
    xs.par_iter().map(|&x| partner(x, d, cfg)).collect()
}

/// Monotone piecewise-linear interpolation of `phi` between tabulated pairs.
///
/// Numerical only: the welding carries no certified modulus of continuity.
pub fn interpolate_phi(pairs: &[WeldingPair], x: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = pairs.iter().map(|p| (p.x, p.phi_x)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let i = pts.partition_point(|p| p.0 <= x);
    if i == 0 || i == pts.len() && pts.last()?.0 != x {
        return None;
    }
    if pts[i - 1].0 == x {
        return Some(pts[i - 1].1);
    }
    let (x0, y0) = pts[i - 1];
    let (x1, y1) = pts[i];
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleRatio {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// `(phi(x) - phi(y)) / (phi(y) - phi(z))`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasisymmetryReport {
    pub rows: Vec<TripleRatio>,
    pub max: f64,
    pub min: f64,
}

impl QuasisymmetryReport {
    /// Smallest `A` with every ratio in `[1/A, A]`.
    pub fn constant(&self) -> f64 {
        self.max.max(1.0 / self.min)
    }
}

/// Equally spaced triples `d(0) <= x < y < z` drawn from `d(0) + k * max_offset / 2^levels`.
pub fn dyadic_triples(xi0: f64, max_offset: f64, levels: u32) -> Vec<(f64, f64, f64)> {
    let n = 1usize << levels;
    let h = max_offset / n as f64;
    let at = |k: usize| xi0 + h * k as f64;
    let mut out = Vec::new();
    for m in 1..=n / 2 {
        for k in 0..=(n - 2 * m) {
            out.push((at(k), at(k + m), at(k + 2 * m)));
        }
    }
    out
}

fn check_triple(xi0: f64, (x, y, z): (f64, f64, f64)) -> Result<(), WeldingError> {
    let scale = z.abs().max(1.0);
    if !(xi0 <= x && x < y && y < z) || ((y - x) - (z - y)).abs() > 1e-12 * scale {
        return Err(WeldingError::InvalidArgument(format!(
            "triple ({x}, {y}, {z}) is not an equally spaced triple right of d(0) = {xi0}"
        )));
    }
    Ok(())
}

/// Welding partners of every distinct coordinate in `points`, keyed by bit pattern.
fn partners_of(
    points: impl IntoIterator<Item = f64>,
    d: &DrivingTerm,
    cfg: &SolverConfig,
) -> Result<std::collections::HashMap<u64, f64>, WeldingError> {
    let mut pts: Vec<f64> = points.into_iter().collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let pairs: Vec<WeldingPair> = pts
        .par_iter()
        .map(|&x| partner(x, d, cfg))
        .collect::<Result<_, _>>()?;
    Ok(pairs.into_iter().map(|p| (p.x.to_bits(), p.phi_x)).collect())
}

/// Ratios `(phi(x) - phi(y)) / (phi(y) - phi(z))` over equally spaced triples.
pub fn quasisymmetry_scan(
    d: &DrivingTerm,
    triples: &[(f64, f64, f64)],
    cfg: &SolverConfig,
) -> Result<QuasisymmetryReport, WeldingError> {
    check_norm(d)?;
    let xi0 = d.initial();
    for &t in triples {
        check_triple(xi0, t)?;
    }
    if triples.is_empty() {
        return Err(WeldingError::InvalidArgument("no triples given".into()));
    }
    let phi = partners_of(triples.iter().flat_map(|&(x, y, z)| [x, y, z]), d, cfg)?;
    let rows: Vec<TripleRatio> = triples
        .iter()
        .map(|&(x, y, z)| {
            let (px, py, pz) = (phi[&x.to_bits()], phi[&y.to_bits()], phi[&z.to_bits()]);
            TripleRatio {
                x,
                y,
                z,
                ratio: (px - py) / (py - pz),
            }
        })
        .collect();
    let max = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    Ok(QuasisymmetryReport { rows, max, min })
}

/// `(phi(beta) - d(0)) / (phi(alpha) - d(0))` for `alpha`, `beta` on one side with
/// `(beta - d(0)) / (alpha - d(0)) > 1`.
pub fn ratio_check(
    d: &DrivingTerm,
    alpha: f64,
    beta: f64,
    cfg: &SolverConfig,
) -> Result<f64, WeldingError> {
    let xi0 = d.initial();
    let (a, b) = (alpha - xi0, beta - xi0);
    if a == 0.0 || !(b / a > 1.0) {
        return Err(WeldingError::InvalidArgument(format!(
            "need alpha, beta on one side of d(0) with (beta - d(0)) / (alpha - d(0)) > 1; got {alpha}, {beta}"
        )));
    }
    check_norm(d)?;
    let pa = partner(alpha, d, cfg)?.phi_x;
    let pb = partner(beta, d, cfg)?.phi_x;
    Ok((pb - xi0) / (pa - xi0))
}

/// Points probed by [`quasislit_conditions`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasislitGrid {
    /// Largest offset from `d(0)`.
    pub max_offset: f64,
    /// The grid has `2^levels` points right of `d(0)`.
    pub levels: u32,
}

impl Default for QuasislitGrid {
    fn default() -> Self {
        Self {
            max_offset: 4.0,
            levels: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasislitReport {
    /// Smallest `M` with `(x - d(0)) / (d(0) - phi(x))` in `[1/M, M]` on the grid.
    pub m_symmetry: f64,
    /// Smallest `M` bounding the triple ratios.
    pub m_triples: f64,
    pub m: f64,
    pub cap: f64,
    pub pass: bool,
}

/// Numerical check of the two welding conditions characterising quasislits.
pub fn quasislit_conditions(
    d: &DrivingTerm,
    grid: QuasislitGrid,
    cap: f64,
    cfg: &SolverConfig,
) -> Result<QuasislitReport, WeldingError> {
    if !(grid.max_offset > 0.0) || grid.levels == 0 {
        return Err(WeldingError::InvalidArgument(
            "grid needs a positive offset and at least one level".into(),
        ));
    }
    check_norm(d)?;
    let xi0 = d.initial();
    let triples = dyadic_triples(xi0, grid.max_offset, grid.levels);
    let phi = partners_of(triples.iter().flat_map(|&(x, y, z)| [x, y, z]), d, cfg)?;

    let m_symmetry = phi
        .iter()
        .filter_map(|(&bits, &p)| {
            let x = f64::from_bits(bits);
            (x > xi0).then(|| {
                let r = (x - xi0) / (xi0 - p);
                r.max(1.0 / r)
            })
        })
        .fold(1.0, f64::max);
    let m_triples = triples
        .iter()
        .map(|&(x, y, z)| {
            let (px, py, pz) = (phi[&x.to_bits()], phi[&y.to_bits()], phi[&z.to_bits()]);
            let q = (px - py) / (py - pz);
            q.max(1.0 / q)
        })
        .fold(1.0, f64::max);
    let m = m_symmetry.max(m_triples);
    Ok(QuasislitReport {
        m_symmetry,
        m_triples,
        m,
        cap,
        pass: m < cap,
    })
}
