//! Deterministic JSON reports and plot-data CSV.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::error::{CliError, Result};

/// Pretty JSON with every float written to 17 significant digits, so a
/// report is byte-identical across runs and round-trips exactly.
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, FixedDigits(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Parse(format!("serialising report: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

pub fn write_json<T: Serialize>(out: impl Write, value: &T) -> Result<()> {
    let mut out = out;
    out.write_all(&to_json_bytes(value)?)
        .map_err(|e| CliError::Parse(format!("writing report: {e}")))
}

/// One named column of the plot data. `None` marks an undefined point.
pub struct Column<'a> {
    pub name: &'a str,
    pub values: &'a [Option<f64>],
}

/// Plot CSV with header `t,actual,<columns...>`.
pub fn write_plot_csv(out: impl Write, t: &[usize], actual: &[f64], columns: &[Column<'_>]) -> Result<()> {
    let err = |e: csv::Error| CliError::Parse(format!("writing plot data: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t", "actual"];
    header.extend(columns.iter().map(|c| c.name));
    w.write_record(&header).map_err(err)?;
    for (row, (&ti, &a)) in t.iter().zip(actual).enumerate() {
        let mut rec = vec![ti.to_string(), format!("{a:.16e}")];
        rec.extend(
            columns
                .iter()
                .map(|c| c.values[row].map_or(String::new(), |v| format!("{v:.16e}"))),
        );
        w.write_record(&rec).map_err(err)?;
    }
    w.flush()
        .map_err(|e| CliError::Parse(format!("writing plot data: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        #[derive(Serialize)]
        struct R {
            x: f64,
            y: Vec<f64>,
            z: Option<f64>,
        }
        let r = R { x: 0.1, y: vec![1.0 / 3.0], z: None };
        let text = String::from_utf8(to_json_bytes(&r).unwrap()).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("3.3333333333333331e-1"));
        assert!(text.contains("null"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
        assert_eq!(back["y"][0].as_f64(), Some(1.0 / 3.0));
    }

    #[test]
    fn plot_layout() {
        let mut buf = Vec::new();
        let a = [Some(1.0), None];
        write_plot_csv(&mut buf, &[0, 1], &[1.0, 2.0], &[Column { name: "hybrid", values: &a }]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,actual,hybrid"));
        assert_eq!(lines.nth(1), Some("1,2.0000000000000000e0,"));
    }
}
