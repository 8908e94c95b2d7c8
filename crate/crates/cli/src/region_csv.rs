//! Region CSV: header `E,R,input_dist`, one boundary point per row, values
//! with 12 significant digits and the input distribution `;`-joined.

use jcsd_core::RegionPoint;

use crate::Units;

pub const HEADER: [&str; 3] = ["E", "R", "input_dist"];

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow {
    pub exponent: f64,
    pub rate: f64,
    pub input_dist: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvError(pub String);

impl std::fmt::Display for CsvError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "region csv: {}", self.0)
    }
}

impl std::error::Error for CsvError {}

fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Serializes boundary points, converting exponents and rates to `units`.
pub fn emit_region_csv(points: &[RegionPoint], units: Units) -> Result<String, CsvError> {
    if points.is_empty() {
        return Err(CsvError("no points to write".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CsvError(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for p in points {
        let dist = p
            .argmax
            .probs()
            .iter()
            .map(|&v| sig12(v))
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([sig12(units.convert(p.exponent)), sig12(units.convert(p.rate)), dist])
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CsvError(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CsvError(e.to_string()))
}

fn number(field: &str, row: usize, what: &str) -> Result<f64, CsvError> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| CsvError(format!("row {row}: {what} `{field}` is not a number")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CsvError(format!("row {row}: {what} is not finite")))
    }
}

/// Reads a region CSV back. Values stay in whatever units were written.
pub fn parse_region_csv(text: &str) -> Result<Vec<RegionRow>, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CsvError(e.to_string()))?
        .clone();
    if header.iter().ne(HEADER) {
        return Err(CsvError(format!(
            "expected header `{}`",
            HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| CsvError(e.to_string()))?;
        if record.len() != 3 {
            return Err(CsvError(format!("row {row}: expected 3 fields")));
        }
        let input_dist = record[2]
            .split(';')
            .map(|f| number(f, row, "probability"))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(RegionRow {
            exponent: number(&record[0], row, "E")?,
            rate: number(&record[1], row, "R")?,
            input_dist,
        });
    }
    if rows.is_empty() {
        return Err(CsvError("no data rows".into()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use jcsd_core::presets::example_one;
    use jcsd_core::{capacity_cost, region_sweep, Criterion};

    #[test]
    fn single_capacity_point_is_two_lines() {
        let p = example_one(0.11, 0.1, 1.0).unwrap();
        let text = emit_region_csv(&[capacity_cost(&p).unwrap()], Units::Nats).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "E,R,input_dist");
        assert!(lines[1].starts_with("0.00000000000e0,3.46631843641e-1,"));
    }

    #[test]
    fn bits_are_nats_over_ln2() {
        let p = example_one(0.11, 0.1, 0.7).unwrap();
        let pts = region_sweep(&p, Criterion::MaxError, 5).unwrap();
        let nats = parse_region_csv(&emit_region_csv(&pts, Units::Nats).unwrap()).unwrap();
        let bits = parse_region_csv(&emit_region_csv(&pts, Units::Bits).unwrap()).unwrap();
        for (a, b) in nats.iter().zip(&bits) {
            assert!((a.rate / std::f64::consts::LN_2 - b.rate).abs() < 1e-10);
            assert!((a.exponent / std::f64::consts::LN_2 - b.exponent).abs() < 1e-10);
            assert_eq!(a.input_dist, b.input_dist);
        }
    }

    #[test]
    fn round_trip_within_1e10() {
        let p = example_one(0.11, 0.1, 0.7).unwrap();
        let pts = region_sweep(&p, Criterion::NeymanPearson, 7).unwrap();
        let rows = parse_region_csv(&emit_region_csv(&pts, Units::Nats).unwrap()).unwrap();
        assert_eq!(rows.len(), pts.len());
        for (row, pt) in rows.iter().zip(&pts) {
            assert!((row.exponent - pt.exponent).abs() <= 1e-10);
            assert!((row.rate - pt.rate).abs() <= 1e-10);
            for (a, b) in row.input_dist.iter().zip(pt.argmax.probs()) {
                assert!((a - b).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(emit_region_csv(&[], Units::Nats).is_err());
        assert!(parse_region_csv("").is_err());
        assert!(parse_region_csv("E,R,input_dist\n").is_err());
        assert!(parse_region_csv("E,R\n1,2\n").is_err());
        assert!(parse_region_csv("E,R,input_dist\n1,x,0.5;0.5\n").is_err());
        assert!(parse_region_csv("E,R,input_dist\n1,2,0.5;;0.5\n").is_err());
        assert!(parse_region_csv("E,R,input_dist\n1,inf,1\n").is_err());
        assert!(parse_region_csv("E,R,input_dist\n1,2\n").is_err());
    }
}
