//! CSV emission. Floats use 9 significant digits, lines end in LF, and row
//! order is whatever the caller passes, so equal inputs give equal bytes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::scaling::{DetectionMode, ModelKind, TimingBreakdown};

pub const CSV_HEADER: &str = "M,a,model,mode,t_detect,t_recruit,t_expand,t_total,seed,trial";

/// `trial` value marking a summary (mean) row.
pub const SUMMARY_TRIAL: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub mass: f64,
    pub exponent: f64,
    pub model: ModelKind,
    pub mode: DetectionMode,
    pub timing: TimingBreakdown,
    pub seed: u64,
    pub trial: i64,
}

impl CsvRow {
    pub fn new(
        mass: f64,
        exponent: f64,
        mode: DetectionMode,
        timing: TimingBreakdown,
        seed: u64,
        trial: i64,
    ) -> Self {
        Self {
            mass,
            exponent,
            model: ModelKind::from_exponent(exponent),
            mode,
            timing,
            seed,
            trial,
        }
    }
}

/// C-style `%.9g`.
pub fn format_sig9(x: f64) -> String {
    format_significant(x, 9)
}

pub fn format_significant(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv_to<W: Write + ?Sized>(rows: &[CsvRow], out: &mut W) -> io::Result<()> {
    out.write_all(CSV_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            format_sig9(r.mass),
            format_sig9(r.exponent),
            r.model,
            r.mode,
            format_sig9(r.timing.t_detect()),
            format_sig9(r.timing.t_recruit()),
            format_sig9(r.timing.t_expand()),
            format_sig9(r.timing.t_total()),
            r.seed,
            r.trial
        )?;
    }
    Ok(())
}

pub fn write_csv(rows: &[CsvRow], path: &Path) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv_to(rows, &mut out)?;
    out.flush()
}
