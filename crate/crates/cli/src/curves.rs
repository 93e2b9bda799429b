//! Plot-ready curve data: one series per detector, sorted by Eb/N0.

use std::io::Write;

use anyhow::Context;

use crate::sweep::BerRecord;

/// One row of curve data.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub scheme: String,
    pub detector: String,
    pub ebn0_db: f64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub const CURVE_CSV_HEADER: &str = "scheme,detector,ebn0_db,ber,ci_low,ci_high";

/// Sorts records into series keyed by `(scheme, detector)`, ascending in
/// Eb/N0 inside each series, and writes them as CSV.
pub fn emit_curves<W: Write>(records: &[BerRecord], mut w: W) -> anyhow::Result<()> {
    anyhow::ensure!(!records.is_empty(), "no records to emit");
    let mut points: Vec<CurvePoint> = records
        .iter()
        .map(|r| CurvePoint {
            scheme: r.scheme.clone(),
            detector: r.detector.clone(),
            ebn0_db: r.ebn0_db,
            ber: r.ber,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
        })
        .collect();
    points.sort_by(|a, b| {
        (&a.scheme, &a.detector)
            .cmp(&(&b.scheme, &b.detector))
            .then(a.ebn0_db.total_cmp(&b.ebn0_db))
    });
    writeln!(w, "{CURVE_CSV_HEADER}")?;
    for p in &points {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            p.scheme, p.detector, p.ebn0_db, p.ber, p.ci_low, p.ci_high
        )?;
    }
    Ok(())
}

/// Parses a CSV produced by [`emit_curves`].
pub fn parse_curves(text: &str) -> anyhow::Result<Vec<CurvePoint>> {
    let mut lines = text.lines();
    let header = lines.next().context("empty curve csv")?;
    anyhow::ensure!(
        header == CURVE_CSV_HEADER,
        "unexpected curve csv header: {header}"
    );
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        anyhow::ensure!(fields.len() == 6, "line {}: expected 6 fields", i + 2);
        let parse_f = |s: &str| -> anyhow::Result<f64> {
            s.parse().with_context(|| format!("bad float `{s}`"))
        };
        points.push(CurvePoint {
            scheme: fields[0].into(),
            detector: fields[1].into(),
            ebn0_db: parse_f(fields[2])?,
            ber: parse_f(fields[3])?,
            ci_low: parse_f(fields[4])?,
            ci_high: parse_f(fields[5])?,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(detector: &str, ebn0_db: f64) -> BerRecord {
        BerRecord {
            scheme: "pcmfm".into(),
            detector: detector.into(),
            ebn0_db,
            bits: 1_000_000,
            errors: 120,
            ber: 1.2e-4,
            ci_low: 1.0e-4,
            ci_high: 1.4e-4,
            elapsed_seconds: 0.5,
            seed: 1,
        }
    }

    #[test]
    fn rows_are_grouped_and_sorted() {
        let records = vec![
            record("proposed-1", 9.0),
            record("mlsd-coherent", 8.0),
            record("proposed-1", 7.0),
            record("mlsd-coherent", 10.0),
            record("proposed-1", 8.0),
        ];
        let mut buf = Vec::new();
        emit_curves(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("pcmfm,mlsd-coherent,8"));
        assert!(lines[2].starts_with("pcmfm,mlsd-coherent,10"));
        assert!(lines[3].starts_with("pcmfm,proposed-1,7"));
        assert!(lines[5].starts_with("pcmfm,proposed-1,9"));
    }

    #[test]
    fn emit_parse_round_trip() {
        let records = vec![record("proposed-2", 6.5), record("msd-5", 9.25)];
        let mut buf = Vec::new();
        emit_curves(&records, &mut buf).unwrap();
        let parsed = parse_curves(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].detector, "msd-5");
        assert_eq!(parsed[0].ebn0_db, 9.25);
        assert_eq!(parsed[1].ber, 1.2e-4);
    }

    #[test]
    fn empty_input_is_an_error() {
        let mut buf = Vec::new();
        assert!(emit_curves(&[], &mut buf).is_err());
    }
}
