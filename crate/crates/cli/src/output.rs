//! Record formatting: `key=value` lines and the sweep CSV.

use std::io::{self, Read, Write};

use eventready::optimizer::SweepRow;
use eventready::Angles;

use crate::CliError;

pub const CSV_HEADER: [&str; 8] = [
    "v",
    "rho",
    "R",
    "eta_min",
    "theta1_deg",
    "theta2_deg",
    "theta1p_deg",
    "theta2p_deg",
];

/// Shortest decimal that survives rounding to 12 significant digits.
pub fn fmt_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}")
        .parse()
        .expect("scientific notation parses");
    // avoid "-0"
    if rounded == 0.0 {
        return "0".into();
    }
    rounded.to_string()
}

/// Ordered `key=value` lines.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Record {
    lines: Vec<(String, String)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.lines.push((key.into(), value.to_string()));
        self
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.lines.push((key.into(), fmt_float(value)));
        self
    }

    pub fn opt(&mut self, key: impl Into<String>, value: Option<f64>) -> &mut Self {
        self.lines
            .push((key.into(), value.map(fmt_float).unwrap_or_default()));
        self
    }

    pub fn angles(&mut self, prefix: &str, angles: Option<&Angles>) -> &mut Self {
        let deg = angles.map(Angles::to_degrees);
        for (k, name) in ["theta1", "theta2", "theta1p", "theta2p"]
            .iter()
            .enumerate()
        {
            self.opt(format!("{prefix}{name}_deg"), deg.map(|d| d[k]));
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn write_to(&self, out: &mut dyn Write) -> io::Result<()> {
        for (k, v) in &self.lines {
            writeln!(out, "{k}={v}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("records are UTF-8")
    }
}

fn row_fields(row: &SweepRow) -> [String; 8] {
    let deg = row.angles.map(|a| a.to_degrees());
    let angle = |k: usize| deg.map(|d| fmt_float(d[k])).unwrap_or_default();
    [
        fmt_float(row.v),
        fmt_float(row.rho),
        fmt_float(row.reflectivity),
        row.eta_min.map(fmt_float).unwrap_or_default(),
        angle(0),
        angle(1),
        angle(2),
        angle(3),
    ]
}

pub fn write_sweep_csv(rows: &[SweepRow], out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row_fields(row))?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a sweep CSV back into rows. Angles come back through degrees, so
/// the result matches the written file field for field.
pub fn read_sweep_csv(input: impl Read) -> Result<Vec<SweepRow>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(CliError::Usage(format!(
            "unexpected sweep header {header:?}"
        )));
    }
    let num = |s: &str| -> Result<f64, CliError> {
        s.parse()
            .map_err(|_| CliError::Usage(format!("bad number `{s}` in sweep file")))
    };
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let field = |k: usize| record.get(k).unwrap_or("");
        let eta_min = match field(3) {
            "" => None,
            s => Some(num(s)?),
        };
        let angles = if field(4).is_empty() {
            None
        } else {
            Some(Angles::from_degrees(
                num(field(4))?,
                num(field(5))?,
                num(field(6))?,
                num(field(7))?,
            ))
        };
        rows.push(SweepRow {
            v: num(field(0))?,
            rho: num(field(1))?,
            reflectivity: num(field(2))?,
            eta_min,
            angles,
        });
    }
    Ok(rows)
}
