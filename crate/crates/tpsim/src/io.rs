//! CSV and JSON writers. Floats are written positionally with 17
//! significant digits so every file round-trips `f64` exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use tpsim_core::validation::QqSeries;
use tpsim_core::{Snapshot, Trajectory};

use crate::error::CliError;

/// 17 significant digits in positional notation, e.g. `4.0000000000000000`.
pub fn fmt17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let n = digits.len() as i32;
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point >= n {
        format!("{}{}.0", digits, "0".repeat((point - n) as usize))
    } else {
        format!("{}.{}", &digits[..point as usize], &digits[point as usize..])
    };
    format!("{sign}{body}")
}

pub fn write_events(path: &Path, tr: &Trajectory) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["time", "process_index"])?;
    for e in tr.events.events() {
        w.write_record([fmt17(e.time), e.process.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshots(path: &Path, snapshots: &[Snapshot]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    let width = snapshots.first().map_or(0, |s| s.state.len());
    let mut header = vec!["time".to_string()];
    header.extend((0..width).map(|k| format!("state_{k}")));
    w.write_record(&header)?;
    for s in snapshots {
        let mut row = vec![fmt17(s.time)];
        row.extend(s.state.iter().map(|&v| fmt17(v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_qq(path: &Path, series: &[QqSeries]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["process_index", "prob", "theoretical", "empirical"])?;
    for s in series {
        for q in &s.points {
            w.write_record([s.process.to_string(), fmt17(q.prob), fmt17(q.theoretical), fmt17(q.empirical)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positional_seventeen_digits() {
        assert_eq!(fmt17(4.0), "4.0000000000000000");
        assert_eq!(fmt17(0.0), "0.0000000000000000");
        assert_eq!(fmt17(123.456), "123.45600000000000");
        assert_eq!(fmt17(0.001), "0.0010000000000000000");
        assert_eq!(fmt17(-2.5), "-2.5000000000000000");
        assert_eq!(fmt17(1e20), "100000000000000000000.0");
    }

    #[test]
    fn round_trips_exactly() {
        for x in [0.1, 1.0 / 3.0, 199.99999999999997, 5e-324, 12345.678901234567, f64::MAX] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }
}
