//! Integrators for the chordal Loewner equation and its time-reversed form.
//!
//! Four kernels share one adaptive stepper:
//!
//! | kernel | equation | state |
//! |--------|----------|-------|
//! | [`advance_bw`]  | `dz/dt =  2 / (z - d(t))` | upper half-plane |
//! | [`advance_fw`]  | `dz/dt = -2 / (z - d(t))` | upper half-plane |
//! | [`advance_bwr`] | `dx/dt =  2 / (x - d(t))` | real line |
//! | [`advance_fwr`] | `dx/dt = -2 / (x - d(t))` | real line |
//!
//! The vector field blows up like `1 / gap`, so steps are capped by
//! `substep_factor * gap^2` on top of step-doubling error control. Real
//! solutions meeting the singularity are reported as caught, with the
//! meeting time extrapolated from the local model `gap^2 ~ C (t* - t)`.

use num_complex::Complex64;
use thiserror::Error;

use crate::driving::DrivingTerm;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("step limit of {max_steps} reached at t = {t} before t_end = {t_end}")]
    StepLimitExceeded {
        t: f64,
        t_end: f64,
        max_steps: usize,
    },
    #[error("integrator produced a non-finite state at t = {t}; the configuration is too coarse")]
    NonFiniteState { t: f64 },
    #[error("invalid initial point: {0}")]
    InvalidInitial(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Step-doubling RK4 with gap-dependent step caps.
    AdaptiveRk4,
    /// Driving frozen at the step midpoint; each step is an exact square-root map.
    ClosedFormPiecewise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Largest step taken anywhere.
    pub dt: f64,
    /// Singularity guard at unit scale; the effective guard is `eps_sing * max(1, |start|)`.
    pub eps_sing: f64,
    /// Steps never exceed `substep_factor * gap^2`.
    pub substep_factor: f64,
    /// Attempted steps allowed before giving up.
    pub max_steps: usize,
    /// Local error target relative to the current gap.
    pub rtol: f64,
    pub scheme: Scheme,
    /// Keep the accepted steps of the trajectory.
    pub record: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            eps_sing: 1e-8,
            substep_factor: 0.01,
            max_steps: 5_000_000,
            rtol: 1e-11,
            scheme: Scheme::AdaptiveRk4,
            record: false,
        }
    }
}

impl SolverConfig {
    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }

    pub fn with_eps_sing(self, eps_sing: f64) -> Self {
        Self { eps_sing, ..self }
    }

    pub fn with_max_steps(self, max_steps: usize) -> Self {
        Self { max_steps, ..self }
    }

    pub fn with_scheme(self, scheme: Scheme) -> Self {
        Self { scheme, ..self }
    }

    pub fn recording(self) -> Self {
        Self {
            record: true,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |msg: String| Err(FlowError::InvalidConfig(msg));
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.eps_sing > 0.0) {
            return bad(format!("eps_sing must be positive, got {}", self.eps_sing));
        }
        if !(self.substep_factor > 0.0) {
            return bad(format!(
                "substep_factor must be positive, got {}",
                self.substep_factor
            ));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        if !(self.rtol > 0.0) {
            return bad(format!("rtol must be positive, got {}", self.rtol));
        }
        Ok(())
    }

    fn guard(&self, scale: f64) -> f64 {
        self.eps_sing * scale.max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RealStatus {
    /// Reached `t` with the solution still separated from the singularity.
    Alive { t: f64, x: f64 },
    /// Met the singularity at `t_star`; `value` is the driving term there.
    Caught { t_star: f64, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealFlowOutcome {
    pub status: RealStatus,
    /// `(t, x(t))` at every accepted step when the config asks for it.
    pub trajectory: Option<Vec<(f64, f64)>>,
    pub steps: usize,
}

impl RealFlowOutcome {
    pub fn is_caught(&self) -> bool {
        matches!(self.status, RealStatus::Caught { .. })
    }

    pub fn caught_at(&self) -> Option<f64> {
        match self.status {
            RealStatus::Caught { t_star, .. } => Some(t_star),
            RealStatus::Alive { .. } => None,
        }
    }

    pub fn alive_value(&self) -> Option<f64> {
        match self.status {
            RealStatus::Alive { x, .. } => Some(x),
            RealStatus::Caught { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexFlowOutcome {
    /// State at the final time reached.
    pub z: Complex64,
    /// Time at which the point left the domain (backward flow only).
    pub swallowed_at: Option<f64>,
    pub steps: usize,
    /// Accepted `(t, z)` pairs when recording.
    pub trajectory: Option<Vec<(f64, Complex64)>>,
}

/// Direction of the vector field: `+2 / (z - d)` or `-2 / (z - d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Backward,
    Forward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Backward => 2.0,
            Direction::Forward => -2.0,
        }
    }
}

trait FlowState: Copy {
    fn field(self, xi: f64, dir: Direction) -> Self;
    fn add_scaled(self, h: f64, k: Self) -> Self;
    fn distance(self, other: Self) -> f64;
    fn gap(self, xi: f64) -> f64;
    fn finite(self) -> bool;
    fn magnitude(self) -> f64;
}

impl FlowState for f64 {
    fn field(self, xi: f64, dir: Direction) -> Self {
        dir.sign() / (self - xi)
    }
    fn add_scaled(self, h: f64, k: Self) -> Self {
        self + h * k
    }
    fn distance(self, other: Self) -> f64 {
        (self - other).abs()
    }
    fn gap(self, xi: f64) -> f64 {
        self - xi
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl FlowState for Complex64 {
    fn field(self, xi: f64, dir: Direction) -> Self {
        dir.sign() / (self - xi)
    }
    fn add_scaled(self, h: f64, k: Self) -> Self {
        self + k * h
    }
    fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
    fn gap(self, xi: f64) -> f64 {
        (self - xi).norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

fn rk4<S: FlowState>(d: &DrivingTerm, dir: Direction, t: f64, s: S, h: f64) -> S {
    let mid = d.eval(t + 0.5 * h);
    let k1 = s.field(d.eval(t), dir);
    let k2 = s.add_scaled(0.5 * h, k1).field(mid, dir);
    let k3 = s.add_scaled(0.5 * h, k2).field(mid, dir);
    let k4 = s.add_scaled(h, k3).field(d.eval(t + h), dir);
    let sum = k1.add_scaled(2.0, k2).add_scaled(2.0, k3).add_scaled(1.0, k4);
    s.add_scaled(h / 6.0, sum)
}

/// One exact step with the driving term frozen at `xi`; `None` when the point
/// reaches the singularity inside the step.
trait ClosedFormStep: FlowState {
    fn frozen_step(self, xi: f64, h: f64, dir: Direction) -> Option<Self>;
}

impl ClosedFormStep for f64 {
    fn frozen_step(self, xi: f64, h: f64, dir: Direction) -> Option<Self> {
        let g = self - xi;
        let g2 = match dir {
            Direction::Backward => g * g + 4.0 * h,
            Direction::Forward => g * g - 4.0 * h,
        };
        if g2 <= 0.0 {
            return None;
        }
        Some(xi + g.signum() * g2.sqrt())
    }
}

impl ClosedFormStep for Complex64 {
    fn frozen_step(self, xi: f64, h: f64, dir: Direction) -> Option<Self> {
        Some(match dir {
            Direction::Backward => vertical_slit_inverse(self, xi, h),
            Direction::Forward => vertical_slit_map(self, xi, h),
        })
    }
}

/// Why a run stopped short of `t_end`.
enum Stop {
    Reached,
    /// Guard hit; carries the extrapolated meeting time.
    Met(f64),
}

struct Run<S> {
    t: f64,
    state: S,
    stop: Stop,
    steps: usize,
    trajectory: Option<Vec<(f64, S)>>,
}

/// Shared driver. `closeness` is the quantity compared against the guard: the
/// gap for real flows, the imaginary part for backward complex flows.
fn integrate<S: ClosedFormStep>(
    d: &DrivingTerm,
    dir: Direction,
    start: S,
    t_end: f64,
    cfg: &SolverConfig,
    guard: f64,
    closeness: impl Fn(S, f64) -> f64,
) -> Result<Run<S>, FlowError> {
    cfg.validate()?;
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(FlowError::InvalidConfig(format!(
            "t_end must be finite and nonnegative, got {t_end}"
        )));
    }
    let mut run = Run {
        t: 0.0,
        state: start,
        stop: Stop::Reached,
        steps: 0,
        trajectory: cfg.record.then(|| vec![(0.0, start)]),
    };
    // previous accepted (t, gap^2), for the square-root extrapolation
    let mut prev: Option<(f64, f64)> = None;
    let mut h_ctrl = cfg.dt;

    let meet_time = |prev: Option<(f64, f64)>, t: f64, g2: f64, h_max: f64| -> f64 {
        let rate = prev.map_or(f64::NAN, |(t0, g0)| (g0 - g2) / (t - t0));
        let dt = if rate.is_finite() && rate > 0.0 {
            g2 / rate
        } else {
            // fall back to the frozen-driving rate |d(g^2)/dt| = 4
            g2 / 4.0
        };
        t + dt.min(h_max).max(0.0)
    };

    while run.t < t_end {
        let xi = d.eval(run.t);
        let gap = run.state.gap(xi);
        let g2 = gap * gap;
        if closeness(run.state, xi) < guard {
            run.stop = Stop::Met(meet_time(prev, run.t, g2, t_end - run.t));
            return Ok(run);
        }
        let mut h = h_ctrl
            .min(cfg.dt)
            .min(cfg.substep_factor * g2)
            .min(t_end - run.t);
        if let Some(knot) = d.next_knot(run.t) {
            h = h.min(knot - run.t);
        }
        if run.t + h <= run.t {
            // time resolution exhausted next to the singularity
            run.stop = Stop::Met(meet_time(prev, run.t, g2, t_end - run.t));
            return Ok(run);
        }
        if run.steps >= cfg.max_steps {
            return Err(FlowError::StepLimitExceeded {
                t: run.t,
                t_end,
                max_steps: cfg.max_steps,
            });
        }
        run.steps += 1;

        let next = match cfg.scheme {
            Scheme::AdaptiveRk4 => {
                let full = rk4(d, dir, run.t, run.state, h);
                let half = rk4(d, dir, run.t, run.state, 0.5 * h);
                let fine = rk4(d, dir, run.t + 0.5 * h, half, 0.5 * h);
                let err = fine.distance(full) / 15.0;
                // errors below a few ulps of the state cannot be resolved
                let tol = (cfg.rtol * gap.abs())
                    .max(16.0 * f64::EPSILON * run.state.magnitude().max(xi.abs()))
                    .max(f64::MIN_POSITIVE);
                let factor = if err > 0.0 {
                    0.9 * (tol / err).powf(0.2)
                } else {
                    4.0
                };
                if !fine.finite() {
                    if h > 1e-3 * cfg.substep_factor * g2 {
                        h_ctrl = 0.25 * h;
                        continue;
                    }
                    return Err(FlowError::NonFiniteState { t: run.t });
                }
                if err > tol && run.t + 0.5 * h > run.t {
                    h_ctrl = h * factor.max(0.2);
                    continue;
                }
                h_ctrl = h * factor.clamp(0.2, 4.0);
                Some(fine)
            }
            Scheme::ClosedFormPiecewise => {
                h_ctrl = cfg.dt;
                run.state.frozen_step(d.eval(run.t + 0.5 * h), h, dir)
            }
        };

        let Some(next) = next else {
            // frozen-driving step reached the singularity: solve g^2 = 4 s
            run.stop = Stop::Met(run.t + g2 / 4.0);
            return Ok(run);
        };
        let t_next = run.t + h;
        let gap_next = next.gap(d.eval(t_next));
        if gap_next * gap < 0.0 {
            // real state jumped across the singularity inside the step
            run.stop = Stop::Met(meet_time(prev, run.t, g2, h));
            return Ok(run);
        }
        prev = Some((run.t, g2));
        run.t = t_next;
        run.state = next;
        if let Some(tr) = run.trajectory.as_mut() {
            tr.push((run.t, run.state));
        }
    }
    Ok(run)
}

fn check_real_start(x0: f64, d: &DrivingTerm) -> Result<(), FlowError> {
    if !x0.is_finite() {
        return Err(FlowError::InvalidInitial(format!("x0 = {x0} is not finite")));
    }
    if x0 == d.initial() {
        return Err(FlowError::InvalidInitial(format!(
            "x0 = {x0} coincides with the singularity"
        )));
    }
    Ok(())
}

fn real_flow(
    x0: f64,
    d: &DrivingTerm,
    t_end: f64,
    cfg: &SolverConfig,
    dir: Direction,
) -> Result<RealFlowOutcome, FlowError> {
    check_real_start(x0, d)?;
    let guard = cfg.guard(x0.abs());
    let run = integrate(d, dir, x0, t_end, cfg, guard, |x: f64, xi| (x - xi).abs())?;
    let status = match run.stop {
        Stop::Reached => RealStatus::Alive {
            t: run.t,
            x: run.state,
        },
        Stop::Met(t_star) => RealStatus::Caught {
            t_star,
            value: d.eval(t_star),
        },
    };
    Ok(RealFlowOutcome {
        status,
        trajectory: run.trajectory,
        steps: run.steps,
    })
}

/// Real backward flow `dx/dt = 2 / (x - d(t))` from `x0` up to `t_end`.
///
/// Points right of `d(0)` move right, points left move left; the run stops
/// early if the driving term catches the point.
pub fn advance_bwr(
    x0: f64,
    d: &DrivingTerm,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<RealFlowOutcome, FlowError> {
    real_flow(x0, d, t_end, cfg, Direction::Backward)
}

/// Real forward flow `dx/dt = -2 / (x - d(t))`; points drift toward the singularity.
pub fn advance_fwr(
    x0: f64,
    d: &DrivingTerm,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<RealFlowOutcome, FlowError> {
    real_flow(x0, d, t_end, cfg, Direction::Forward)
}

fn check_complex_start(z0: Complex64) -> Result<(), FlowError> {
    if !(z0.im > 0.0) || !z0.re.is_finite() || !z0.im.is_finite() {
        return Err(FlowError::InvalidInitial(format!(
            "z0 = {z0} must lie in the open upper half-plane"
        )));
    }
    Ok(())
}

/// Backward flow `g(t, z)`; stops and reports the swallowing time once `Im z` drops below the guard.
pub fn advance_bw(
    z0: Complex64,
    d: &DrivingTerm,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<ComplexFlowOutcome, FlowError> {
    check_complex_start(z0)?;
    let guard = cfg.guard(z0.norm());
    let run = integrate(d, Direction::Backward, z0, t_end, cfg, guard, |z: Complex64, _| {
        z.im
    })?;
    let swallowed_at = match run.stop {
        Stop::Reached => None,
        Stop::Met(_) => Some(run.t),
    };
    Ok(ComplexFlowOutcome {
        z: run.state,
        swallowed_at,
        steps: run.steps,
        trajectory: run.trajectory,
    })
}

/// Forward flow `f(t, z)`; exists for all `t` on the upper half-plane.
pub fn advance_fw(
    z0: Complex64,
    d: &DrivingTerm,
    t_end: f64,
    cfg: &SolverConfig,
) -> Result<ComplexFlowOutcome, FlowError> {
    check_complex_start(z0)?;
    let run = integrate(
        d,
        Direction::Forward,
        z0,
        t_end,
        cfg,
        0.0,
        |_: Complex64, _| f64::INFINITY,
    )?;
    Ok(ComplexFlowOutcome {
        z: run.state,
        swallowed_at: None,
        steps: run.steps,
        trajectory: run.trajectory,
    })
}

/// Square root with `Im >= 0`; on the real axis the sign follows `orient`.
fn upper_sqrt(w: Complex64, orient: f64) -> Complex64 {
    let s = w.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && s.re * orient < 0.0) {
        -s
    } else {
        s
    }
}

/// `xi + sqrt((z - xi)^2 - 4 dt)`: maps the upper half-plane onto itself minus
/// the segment `[xi, xi + 2i sqrt(dt)]`.
pub fn vertical_slit_map(z: Complex64, xi: f64, dt: f64) -> Complex64 {
    if dt == 0.0 {
        return z;
    }
    let w = z - xi;
    xi + upper_sqrt(w * w - 4.0 * dt, w.re)
}

/// `xi + sqrt((z - xi)^2 + 4 dt)`: inverse of [`vertical_slit_map`].
pub fn vertical_slit_inverse(z: Complex64, xi: f64, dt: f64) -> Complex64 {
    if dt == 0.0 {
        return z;
    }
    let w = z - xi;
    xi + upper_sqrt(w * w + 4.0 * dt, w.re)
}

/// Half-plane capacity at time `t`, read off the expansion `g_t(z) = z + a/z + ...` at `z = i R`.
pub fn capacity_estimate(
    d: &DrivingTerm,
    t: f64,
    radius: f64,
    cfg: &SolverConfig,
) -> Result<f64, FlowError> {
    let z = Complex64::new(0.0, radius);
    let out = advance_bw(z, d, t, cfg)?;
    Ok(((out.z - z) * z).re)
}
