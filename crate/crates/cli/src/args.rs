use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Numerical experiments with the chordal Loewner equation.
///
/// Times are in half-plane capacity units (capacity 2t at time t). Tables are
/// CSV with a header row and 12 significant digits, written to --out or stdout.
#[derive(Debug, Parser)]
#[command(name = "loewner", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Maximum integrator step (time units)
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub dt: f64,

    /// Relative singularity guard: a point is caught when its gap falls below eps-sing * max(1, |x0|)
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub eps_sing: f64,

    /// Step budget per integration
    #[arg(long, global = true, default_value_t = 5_000_000)]
    pub max_steps: usize,

    /// Seed for random driving terms (required by the brownian family)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// CSV output path (stdout when omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// SVG figure path (trace only)
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generated curve gamma(t) sampled at t_k = k T / n; CSV t,re,im
    Trace(TraceArgs),
    /// One trajectory of a Loewner flow; CSV t,x (real kinds) or t,re,im (complex kinds)
    Flow(FlowArgs),
    /// Hitting times of the real forward flow; CSV x0,T_hit,terminal,resolution
    Hitting(HittingArgs),
    /// Conformal welding partners phi(x); CSV x,phi_x,T_hit,residual
    Weld(WeldArgs),
    /// Quasisymmetry ratios of the welding over dyadic triples
    Qsweep(QsweepArgs),
    /// Recursion table h_n, x_n, e_n for one c, or epsilon certificates over a c range
    Recursion(RecursionArgs),
    /// Catching experiment over a c range: gap x(T) - d(T) or catch time per c
    Threshold(ThresholdArgs),
}

/// Driving term selection. Built-in families: constant (d = value), linear
/// (d = value + slope t), circle (d = 3/2 - 3/2 sqrt(1 - 8t), T <= 1/8),
/// sqrt1mt (d = c - c sqrt(1 - t), T = 1), sqrtt (d = c sqrt(t)), brownian
/// (sqrt(kappa) B_t, needs --seed). Anything else is read as a `t,value` CSV file.
#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// Family name or path to a `t,value` CSV file
    #[arg(long, default_value = "constant")]
    pub family: String,

    /// Norm parameter c for sqrt1mt and sqrtt
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,

    /// Constant value, or starting value for linear
    #[arg(long, default_value_t = 0.0)]
    pub value: f64,

    /// Slope for linear (space per time unit)
    #[arg(long, default_value_t = 1.0)]
    pub slope: f64,

    /// Horizon T (defaults: 1, or 1/8 for circle)
    #[arg(long)]
    pub horizon: Option<f64>,

    /// Diffusivity for brownian
    #[arg(long, default_value_t = 2.0)]
    pub kappa: f64,

    /// Brownian samples per unit time
    #[arg(long, default_value_t = 1000)]
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceScheme {
    /// Compose vertical-slit maps, O(n^2)
    Composition,
    /// Independent forward flows from the lifted tip
    Flow,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub family: FamilyArgs,

    /// Number of time steps
    #[arg(long, default_value_t = 1000)]
    pub n: usize,

    #[arg(long, value_enum, default_value_t = TraceScheme::Composition)]
    pub scheme: TraceScheme,

    /// Tip lift for the flow scheme (default sqrt(T/n)/10)
    #[arg(long)]
    pub lift: Option<f64>,

    /// SVG stroke width in plot units (default: fitted to the trace)
    #[arg(long)]
    pub stroke_width: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlowKind {
    /// Real backward: dx/dt = 2 / (x - d)
    Bwr,
    /// Real forward: dx/dt = -2 / (x - d)
    Fwr,
    /// Complex backward g_t(z)
    Bw,
    /// Complex forward f_t(z)
    Fw,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    pub family: FamilyArgs,

    #[arg(long, value_enum, default_value_t = FlowKind::Bwr)]
    pub kind: FlowKind,

    /// Starting point (real part)
    #[arg(long, allow_negative_numbers = true)]
    pub x0: f64,

    /// Imaginary part of the starting point for complex kinds
    #[arg(long, default_value_t = 1.0)]
    pub y0: f64,

    /// Final time (default: the horizon)
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Args)]
pub struct HittingArgs {
    #[command(flatten)]
    pub family: FamilyArgs,

    /// Starting points, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub x0: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct WeldArgs {
    #[command(flatten)]
    pub family: FamilyArgs,

    /// Points to weld, comma separated (either side of d(0))
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub x: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct QsweepArgs {
    #[command(flatten)]
    pub family: FamilyArgs,

    /// Largest offset of the triple grid from d(0)
    #[arg(long, default_value_t = 4.0)]
    pub max_offset: f64,

    /// The grid has 2^levels points right of d(0)
    #[arg(long, default_value_t = 4)]
    pub levels: u32,

    /// Sweep the family parameter c from here (writes c,min_ratio,max_ratio,distortion)
    #[arg(long, requires_all = ["c_to", "step"])]
    pub c_from: Option<f64>,

    #[arg(long)]
    pub c_to: Option<f64>,

    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RecursionArgs {
    /// Norm parameter c (single table n,h_n,x_n,e_n)
    #[arg(long, conflicts_with = "c_from")]
    pub c: Option<f64>,

    /// Number of rows
    #[arg(long, default_value_t = 20)]
    pub rows: usize,

    /// Error parameter for e_n (default: the certified epsilon when c < 4)
    #[arg(long)]
    pub eps: Option<f64>,

    /// Largest index searched for h_n(c) <= 0
    #[arg(long, default_value_t = 10_000)]
    pub cap: usize,

    /// Sweep c from here (writes c,n_star,epsilon)
    #[arg(long, requires_all = ["c_to", "step"])]
    pub c_from: Option<f64>,

    #[arg(long)]
    pub c_to: Option<f64>,

    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// c-parametrized family: sqrt1mt or sqrtt
    #[arg(long, default_value = "sqrt1mt")]
    pub family: String,

    /// Horizon for sqrtt
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,

    #[arg(long)]
    pub c_from: f64,

    #[arg(long)]
    pub c_to: f64,

    #[arg(long, default_value_t = 0.1)]
    pub step: f64,

    /// Offset of the starting point from d(0)
    #[arg(long, default_value_t = 1e-4)]
    pub x0: f64,
}
