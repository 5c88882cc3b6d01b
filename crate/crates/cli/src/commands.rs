use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use loewner_core::driving::{brownian, DrivingError, DrivingTerm};
use loewner_core::flow::{advance_bw, advance_bwr, advance_fw, advance_fwr, RealStatus, SolverConfig};
use loewner_core::io;
use loewner_core::recursion::report;
use loewner_core::svg::{render, SvgOptions};
use loewner_core::threshold::{c_grid, threshold_sweep};
use loewner_core::trace::{compose_trace, default_lift, flow_trace, slit_diagnostics, DiagnosticThresholds};
use loewner_core::welding::{dyadic_triples, hitting_time, quasisymmetry_scan, welding_table};
use loewner_core::Complex64;

use crate::args::*;
use crate::error::CliError;

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = SolverConfig::default()
        .with_dt(cli.dt)
        .with_eps_sing(cli.eps_sing)
        .with_max_steps(cli.max_steps);
    cfg.validate()?;
    if cli.svg.is_some() && !matches!(cli.command, Command::Trace(_)) {
        return Err(CliError::Invalid("--svg is only produced by `trace`".into()));
    }
    match &cli.command {
        Command::Trace(a) => trace(cli, a, &cfg),
        Command::Flow(a) => flow(cli, a, &cfg),
        Command::Hitting(a) => hitting(cli, a, &cfg),
        Command::Weld(a) => weld(cli, a, &cfg),
        Command::Qsweep(a) => qsweep(cli, a, &cfg),
        Command::Recursion(a) => recursion(cli, a),
        Command::Threshold(a) => threshold(cli, a, &cfg),
    }
}

fn output(cli: &Cli) -> Result<Box<dyn Write>> {
    Ok(match &cli.out {
        Some(p) => Box::new(BufWriter::new(create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Invalid(format!("--{name} must be finite, got {v}")))
    }
}

/// Member of a c-parametrized family.
fn family_at(name: &str, c: f64, horizon: f64) -> std::result::Result<DrivingTerm, DrivingError> {
    match name {
        "sqrt1mt" => DrivingTerm::catching_family(c),
        "sqrtt" => DrivingTerm::sqrt_t(0.0, c, horizon),
        other => Err(DrivingError::InvalidParameter(format!(
            "family `{other}` has no parameter c; use sqrt1mt or sqrtt"
        ))),
    }
}

fn driving(f: &FamilyArgs, seed: Option<u64>) -> Result<DrivingTerm> {
    let horizon = f.horizon.map(|h| finite("horizon", h)).transpose()?;
    let t = horizon.unwrap_or(1.0);
    Ok(match f.family.as_str() {
        "constant" => DrivingTerm::constant(finite("value", f.value)?, t)?,
        "linear" => DrivingTerm::linear(finite("value", f.value)?, finite("slope", f.slope)?, t)?,
        "circle" => match horizon {
            None => DrivingTerm::half_circle(),
            Some(h) => DrivingTerm::half_circle_until(h)?,
        },
        "sqrt1mt" => {
            if horizon.is_some_and(|h| h != 1.0) {
                return Err(CliError::Invalid("sqrt1mt is defined on [0, 1]".into()));
            }
            DrivingTerm::catching_family(finite("c", f.c)?)?
        }
        "sqrtt" => DrivingTerm::sqrt_t(0.0, finite("c", f.c)?, t)?,
        "brownian" => {
            let seed = seed.ok_or_else(|| CliError::Invalid("the brownian family needs --seed".into()))?;
            brownian(finite("kappa", f.kappa)?, seed, t, f.resolution)?
        }
        path => {
            let file = File::open(path).map_err(|e| {
                CliError::Invalid(format!("`{path}` is neither a known family nor a readable CSV file: {e}"))
            })?;
            io::read_driving(file)?
        }
    })
}

fn trace(cli: &Cli, a: &TraceArgs, cfg: &SolverConfig) -> Result<()> {
    let d = driving(&a.family, cli.seed)?;
    if a.n == 0 {
        return Err(CliError::Invalid("--n must be at least 1".into()));
    }
    let tr = match a.scheme {
        TraceScheme::Composition => compose_trace(&d, a.n)?,
        TraceScheme::Flow => {
            let lift = a.lift.unwrap_or_else(|| default_lift(d.horizon() / a.n as f64));
            flow_trace(&d, a.n, lift, cfg)?
        }
    };
    io::write_trace(output(cli)?, &tr)?;
    if let Some(path) = &cli.svg {
        let mut opts = SvgOptions::fitted(&[&tr]);
        if let Some(w) = a.stroke_width {
            if !(w > 0.0) {
                return Err(CliError::Invalid("--stroke-width must be positive".into()));
            }
            opts.stroke_width = w;
        }
        create(path)?.write_all(render(&[&tr], &opts).as_bytes())?;
    }
    if let Ok(rep) = slit_diagnostics(&tr, DiagnosticThresholds::default()) {
        eprintln!(
            "simple curve plausible: {} (min height ratio {}, min chord-arc {})",
            rep.simple_plausible,
            io::format_number(rep.min_height_ratio),
            io::format_number(rep.min_chord_arc)
        );
    }
    Ok(())
}

fn flow(cli: &Cli, a: &FlowArgs, cfg: &SolverConfig) -> Result<()> {
    let d = driving(&a.family, cli.seed)?;
    let t_end = finite("t-end", a.t_end.unwrap_or(d.horizon()))?;
    let x0 = finite("x0", a.x0)?;
    let cfg = cfg.recording();
    match a.kind {
        FlowKind::Bwr | FlowKind::Fwr => {
            let out = if a.kind == FlowKind::Bwr {
                advance_bwr(x0, &d, t_end, &cfg)?
            } else {
                advance_fwr(x0, &d, t_end, &cfg)?
            };
            io::write_real_trajectory(output(cli)?, out.trajectory.as_deref().unwrap_or_default())?;
            match out.status {
                RealStatus::Alive { t, x } => eprintln!("alive at t = {}, x = {}", io::format_number(t), io::format_number(x)),
                RealStatus::Caught { t_star, value } => eprintln!(
                    "caught at t = {}, value {}",
                    io::format_number(t_star),
                    io::format_number(value)
                ),
            }
        }
        FlowKind::Bw | FlowKind::Fw => {
            let z0 = Complex64::new(x0, finite("y0", a.y0)?);
            let out = if a.kind == FlowKind::Bw {
                advance_bw(z0, &d, t_end, &cfg)?
            } else {
                advance_fw(z0, &d, t_end, &cfg)?
            };
            io::write_complex_trajectory(output(cli)?, out.trajectory.as_deref().unwrap_or_default())?;
            if let Some(t) = out.swallowed_at {
                eprintln!("swallowed at t = {}", io::format_number(t));
            }
        }
    }
    Ok(())
}

fn hitting(cli: &Cli, a: &HittingArgs, cfg: &SolverConfig) -> Result<()> {
    let d = driving(&a.family, cli.seed)?;
    let records = a
        .x0
        .iter()
        .map(|&x| hitting_time(finite("x0", x)?, &d, cfg).map_err(CliError::from))
        .collect::<Result<Vec<_>>>()?;
    io::write_hitting(output(cli)?, &records)?;
    Ok(())
}

fn weld(cli: &Cli, a: &WeldArgs, cfg: &SolverConfig) -> Result<()> {
    let d = driving(&a.family, cli.seed)?;
    for &x in &a.x {
        finite("x", x)?;
    }
    let pairs = welding_table(&a.x, &d, cfg)?;
    io::write_welding(output(cli)?, &pairs)?;
    Ok(())
}

fn qsweep(cli: &Cli, a: &QsweepArgs, cfg: &SolverConfig) -> Result<()> {
    if !(a.max_offset > 0.0) || a.levels == 0 || a.levels > 12 {
        return Err(CliError::Invalid("need --max-offset > 0 and 1 <= --levels <= 12".into()));
    }
    match (a.c_from, a.c_to, a.step) {
        (Some(from), Some(to), Some(step)) => {
            let horizon = a.family.horizon.unwrap_or(1.0);
            let rows = c_grid(from, to, step)?
                .into_iter()
                .map(|c| {
                    let d = family_at(&a.family.family, c, horizon)?;
                    let triples = dyadic_triples(d.initial(), a.max_offset, a.levels);
                    Ok((c, quasisymmetry_scan(&d, &triples, cfg)?))
                })
                .collect::<Result<Vec<_>>>()?;
            io::write_quasisymmetry_sweep(output(cli)?, &rows)?;
        }
        _ => {
            let d = driving(&a.family, cli.seed)?;
            let triples = dyadic_triples(d.initial(), a.max_offset, a.levels);
            let rep = quasisymmetry_scan(&d, &triples, cfg)?;
            io::write_quasisymmetry(output(cli)?, &rep.rows)?;
        }
    }
    Ok(())
}

fn recursion(cli: &Cli, a: &RecursionArgs) -> Result<()> {
    if let Some(eps) = a.eps {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(CliError::Invalid("--eps must be positive".into()));
        }
    }
    match (a.c, a.c_from, a.c_to, a.step) {
        (Some(c), ..) => {
            let c = finite("c", c)?;
            if !(c > 0.0) {
                return Err(CliError::Invalid("--c must be positive".into()));
            }
            io::write_recursion(output(cli)?, &report(c, a.rows, a.eps, a.cap))?;
        }
        (None, Some(from), Some(to), Some(step)) => {
            let grid = c_grid(from, to, step)?;
            if grid.iter().any(|&c| !(c > 0.0)) {
                return Err(CliError::Invalid("c values must be positive".into()));
            }
            let reports: Vec<_> = grid.iter().map(|&c| report(c, 0, None, a.cap)).collect();
            io::write_recursion_sweep(output(cli)?, &reports)?;
        }
        _ => return Err(CliError::Invalid("give --c or --c-from/--c-to/--step".into())),
    }
    Ok(())
}

fn threshold(cli: &Cli, a: &ThresholdArgs, cfg: &SolverConfig) -> Result<()> {
    let x0 = finite("x0", a.x0)?;
    if x0 == 0.0 {
        return Err(CliError::Invalid("--x0 must be nonzero".into()));
    }
    let grid = c_grid(a.c_from, a.c_to, a.step)?;
    // validate the family name before fanning out
    family_at(&a.family, grid[0], a.horizon)?;
    let rows = threshold_sweep(&grid, x0, |c| family_at(&a.family, c, a.horizon), cfg)?;
    io::write_threshold(output(cli)?, &rows)?;
    Ok(())
}
