//! Series CSV input, count fixtures and forecast CSV output.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use greycast_core::TimeSeries;
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Parse a `value` or `date,value` CSV. Row numbers in errors count the
/// header as row 1.
pub fn parse_series_csv(input: impl Read) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(CliError::Parse("empty file".into())),
        Some(r) => r.map_err(|e| CliError::Parse(format!("row 1: {e}")))?,
    };
    let names: Vec<String> = header.iter().map(str::to_ascii_lowercase).collect();
    let dated = match names.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["value"] => false,
        ["date", "value"] => true,
        ["value", "value"] | ["date", "date"] => {
            return Err(CliError::Parse("row 1: duplicate column in header".into()))
        }
        _ => {
            return Err(CliError::Parse(format!(
                "row 1: expected header \"date,value\" or \"value\", found \"{}\"",
                header.iter().collect::<Vec<_>>().join(",")
            )))
        }
    };

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| CliError::Parse(e.to_string()))?;
        let row = rec.position().map_or(0, |p| p.line());
        if rec.iter().map(str::to_ascii_lowercase).eq(names.iter().cloned()) {
            return Err(CliError::Parse(format!("row {row}: duplicate header")));
        }
        if rec.len() != names.len() {
            return Err(CliError::Parse(format!(
                "row {row}: expected {} fields, found {}",
                names.len(),
                rec.len()
            )));
        }
        let raw = &rec[names.len() - 1];
        let v: f64 = raw
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| CliError::Parse(format!("row {row}: \"{raw}\" is not a finite number")))?;
        values.push(v);
        if dated {
            labels.push(rec[0].to_owned());
        }
    }
    if values.is_empty() {
        return Err(CliError::Parse("no data rows after the header".into()));
    }
    let series = if dated {
        TimeSeries::with_labels(values, labels)?
    } else {
        TimeSeries::new(values)?
    };
    Ok(series)
}

pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_series_csv(file).map_err(|e| match e {
        CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Transition counts supplied directly rather than derived from a series.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsFixture {
    pub counts: Vec<Vec<u64>>,
    pub occupancy: Vec<u64>,
    pub total: u64,
}

pub fn read_counts(path: &Path) -> Result<CountsFixture> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

pub fn write_forecast_csv(out: impl Write, forecast: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| CliError::Parse(e.to_string());
    w.write_record(["step", "forecast"]).map_err(err)?;
    for (i, v) in forecast.iter().enumerate() {
        w.write_record([(i + 1).to_string(), format!("{v:.16e}")]).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(())
}

pub fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<TimeSeries> {
        parse_series_csv(s.as_bytes())
    }

    #[test]
    fn value_column() {
        assert_eq!(parse("value\n1\n2\n3").unwrap().values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn dated_column() {
        let s = parse("date,value\n1994-09-01,99.1\n1994-09-02,99.4").unwrap();
        assert_eq!(s.values(), &[99.1, 99.4]);
        assert_eq!(s.labels().unwrap(), &["1994-09-01", "1994-09-02"]);
    }

    #[test]
    fn errors_name_the_row() {
        let msg = parse("value\n1\nabc").unwrap_err().to_string();
        assert!(msg.contains("row 3"), "{msg}");
        let msg = parse("value\n1\nvalue\n2").unwrap_err().to_string();
        assert!(msg.contains("row 3") && msg.contains("duplicate header"), "{msg}");
        assert!(parse("value\nNaN").is_err());
    }

    #[test]
    fn empty_and_headerless() {
        assert!(parse("").unwrap_err().to_string().contains("empty"));
        assert!(parse("value\n").is_err());
        assert!(parse("1\n2\n").unwrap_err().to_string().contains("header"));
        assert!(parse("value,value\n1,2").is_err());
    }

    #[test]
    fn forecast_csv_layout() {
        let mut buf = Vec::new();
        write_forecast_csv(&mut buf, &[1.5, 2.0]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "step,forecast\n1,1.5000000000000000e0\n2,2.0000000000000000e0\n");
    }
}
