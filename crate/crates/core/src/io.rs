//! CSV import and export. Numbers are written with 12 significant digits.

use std::io::{Read, Write};

use thiserror::Error;

use crate::driving::{DrivingError, DrivingTerm};
use crate::recursion::{RecursionReport, RecursionRow};
use crate::threshold::{ThresholdOutcome, ThresholdRow};
use crate::trace::Trace;
use crate::welding::{HittingRecord, QuasisymmetryReport, TripleRatio, WeldingPair};
use crate::Complex64;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
    #[error(transparent)]
    Driving(#[from] DrivingError),
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros dropped,
/// exponent notation outside `1e-5 <= |x| < 1e12`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn write_rows<W, I>(out: W, header: &[&str], rows: I) -> Result<(), IoError>
where
    W: Write,
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `t,value` table into a piecewise-linear driving term.
///
/// Times must be strictly increasing and start at 0.
pub fn read_driving<R: Read>(input: R) -> Result<DrivingTerm, IoError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = r.headers()?.clone();
    if header.len() != 2 || &header[0] != "t" || &header[1] != "value" {
        return Err(IoError::Format {
            line: 1,
            message: format!("expected header `t,value`, found `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<f64, IoError> {
            rec.get(i)
                .ok_or_else(|| IoError::Format {
                    line,
                    message: "missing field".into(),
                })?
                .parse::<f64>()
                .map_err(|e| IoError::Format {
                    line,
                    message: e.to_string(),
                })
        };
        times.push(field(0)?);
        values.push(field(1)?);
    }
    Ok(DrivingTerm::tabulated(times, values)?)
}

/// Writes `d` sampled at `n + 1` equally spaced times as `t,value`.
pub fn write_driving<W: Write>(out: W, d: &DrivingTerm, n: usize) -> Result<(), IoError> {
    let n = n.max(1);
    let dt = d.horizon() / n as f64;
    write_rows(
        out,
        &["t", "value"],
        d.sample_uniform(n)
            .into_iter()
            .enumerate()
            .map(|(k, v)| vec![format_number(k as f64 * dt), format_number(v)]),
    )
}

pub fn write_real_trajectory<W: Write>(out: W, points: &[(f64, f64)]) -> Result<(), IoError> {
    write_rows(
        out,
        &["t", "x"],
        points.iter().map(|&(t, x)| vec![format_number(t), format_number(x)]),
    )
}

pub fn write_complex_trajectory<W: Write>(out: W, points: &[(f64, Complex64)]) -> Result<(), IoError> {
    write_rows(
        out,
        &["t", "re", "im"],
        points
            .iter()
            .map(|&(t, z)| vec![format_number(t), format_number(z.re), format_number(z.im)]),
    )
}

pub fn write_trace<W: Write>(out: W, tr: &Trace) -> Result<(), IoError> {
    write_complex_trajectory(out, &tr.samples)
}

pub fn write_welding<W: Write>(out: W, pairs: &[WeldingPair]) -> Result<(), IoError> {
    write_rows(
        out,
        &["x", "phi_x", "T_hit", "residual"],
        pairs.iter().map(|p| {
            vec![
                format_number(p.x),
                format_number(p.phi_x),
                format_number(p.t_hit),
                format_number(p.residual),
            ]
        }),
    )
}

pub fn write_quasisymmetry<W: Write>(out: W, rows: &[TripleRatio]) -> Result<(), IoError> {
    write_rows(
        out,
        &["x", "y", "z", "ratio"],
        rows.iter().map(|r| {
            vec![
                format_number(r.x),
                format_number(r.y),
                format_number(r.z),
                format_number(r.ratio),
            ]
        }),
    )
}

pub fn write_hitting<W: Write>(out: W, records: &[HittingRecord]) -> Result<(), IoError> {
    write_rows(
        out,
        &["x0", "T_hit", "terminal", "resolution"],
        records.iter().map(|r| {
            vec![
                format_number(r.x0),
                format_number(r.t_hit),
                format_number(r.terminal),
                format_number(r.resolution),
            ]
        }),
    )
}

/// `c,min_ratio,max_ratio,distortion`; one row per family member.
pub fn write_quasisymmetry_sweep<W: Write>(
    out: W,
    rows: &[(f64, QuasisymmetryReport)],
) -> Result<(), IoError> {
    write_rows(
        out,
        &["c", "min_ratio", "max_ratio", "distortion"],
        rows.iter().map(|(c, r)| {
            vec![
                format_number(*c),
                format_number(r.min),
                format_number(r.max),
                format_number(r.constant()),
            ]
        }),
    )
}

/// `n,h_n,x_n,e_n`; undefined entries are left empty.
pub fn write_recursion<W: Write>(out: W, report: &RecursionReport) -> Result<(), IoError> {
    write_rows(
        out,
        &["n", "h_n", "x_n", "e_n"],
        report.rows.iter().map(|r: &RecursionRow| {
            vec![r.n.to_string(), format_number(r.h), format_number(r.x), opt(r.e)]
        }),
    )
}

/// `c,n_star,epsilon`; one row per report.
pub fn write_recursion_sweep<W: Write>(out: W, reports: &[RecursionReport]) -> Result<(), IoError> {
    write_rows(
        out,
        &["c", "n_star", "epsilon"],
        reports.iter().map(|r| {
            vec![
                format_number(r.c),
                r.n_star.map(|n| n.to_string()).unwrap_or_default(),
                opt(r.certificate.map(|c| c.epsilon)),
            ]
        }),
    )
}

/// `c,x0,status,gap,t_star`: `gap` for survivors, `t_star` for caught runs.
pub fn write_threshold<W: Write>(out: W, rows: &[ThresholdRow]) -> Result<(), IoError> {
    write_rows(
        out,
        &["c", "x0", "status", "gap", "t_star"],
        rows.iter().map(|r| {
            let (status, gap, t_star) = match r.outcome {
                ThresholdOutcome::Gap(g) => ("alive", Some(g), None),
                ThresholdOutcome::Caught { t_star, .. } => ("caught", None, Some(t_star)),
            };
            vec![
                format_number(r.c),
                format_number(r.x0),
                status.to_string(),
                opt(gap),
                opt(t_star),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_use_twelve_significant_digits() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(2.0f64.sqrt() * 1e3), "1414.21356237");
        assert_eq!(format_number(1e-4), "0.0001");
        assert_eq!(format_number(5.512658e-6), "5.512658e-06");
        assert_eq!(format_number(9.8e-77), "9.8e-77");
        assert_eq!(format_number(1e12), "1e+12");
        assert_eq!(format_number(0.1 + 0.2), "0.3");
    }

    #[test]
    fn driving_round_trip() {
        let d = DrivingTerm::catching_family(2.0).unwrap();
        let mut buf = Vec::new();
        write_driving(&mut buf, &d, 8).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,value\n0,0\n0.125,"));
        let back = read_driving(buf.as_slice()).unwrap();
        assert_eq!(back.horizon(), 1.0);
        assert!((back.eval(0.5) - d.eval(0.5)).abs() < 1e-11);
    }

    #[test]
    fn driving_import_rejects_bad_input() {
        assert!(matches!(
            read_driving("time,v\n0,0\n".as_bytes()),
            Err(IoError::Format { .. })
        ));
        assert!(matches!(
            read_driving("t,value\n0,0\n1,abc\n".as_bytes()),
            Err(IoError::Format { line: 3, .. })
        ));
        assert!(matches!(
            read_driving("t,value\n0,0\n1,1\n0.5,2\n".as_bytes()),
            Err(IoError::Driving(_))
        ));
    }

    #[test]
    fn recursion_table_leaves_undefined_entries_empty() {
        let rep = crate::recursion::report(2.0, 5, Some(0.1), 100);
        let mut buf = Vec::new();
        write_recursion(&mut buf, &rep).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("n,h_n,x_n,e_n"));
        assert!(lines.next().unwrap().starts_with("1,0,2,"));
    }

    #[test]
    fn threshold_rows_mark_status() {
        let rows = [
            ThresholdRow {
                c: 3.0,
                x0: 1e-4,
                outcome: ThresholdOutcome::Gap(0.125),
            },
            ThresholdRow {
                c: 4.5,
                x0: 1e-4,
                outcome: ThresholdOutcome::Caught {
                    t_star: 0.75,
                    value: 2.0,
                },
            },
        ];
        let mut buf = Vec::new();
        write_threshold(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "c,x0,status,gap,t_star\n3,0.0001,alive,0.125,\n4.5,0.0001,caught,,0.75\n"
        );
    }
}
