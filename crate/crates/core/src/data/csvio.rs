//! CSV ingestion and export for flow-feature datasets.
//!
//! The schema names the feature columns and the label column; rows are
//! grouped into consecutive ten-packet flows (an incomplete trailing
//! group is dropped) and features are min-max normalized per column.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{normalize_flows, Flow, PacketRecord, FLOW_LEN};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvSchema {
    pub feature_columns: Vec<String>,
    pub label_column: String,
}

impl CsvSchema {
    /// Column names f0..f{n-1} with a `label` column, as written by
    /// `write_csv`.
    pub fn generated(features: usize) -> Self {
        Self {
            feature_columns: (0..features).map(|j| format!("f{j}")).collect(),
            label_column: "label".into(),
        }
    }
}

/// Load flows from a CSV export. Fails on a missing schema column, a
/// non-numeric cell (with its line number), or a non-binary label.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Vec<Flow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let feature_idx: Vec<usize> = schema
        .feature_columns
        .iter()
        .map(|c| col(c))
        .collect::<Result<_>>()?;
    let label_idx = col(&schema.label_column)?;

    let mut packets = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let line = row_no + 2; // 1-based, after the header
        let record = record?;
        let parse = |idx: usize| -> Result<f64> {
            record
                .get(idx)
                .ok_or_else(|| Error::CsvRow { line, message: "short row".into() })?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::CsvRow { line, message: e.to_string() })
        };
        let features: Vec<f64> = feature_idx.iter().map(|&i| parse(i)).collect::<Result<_>>()?;
        let label_raw = parse(label_idx)?;
        if label_raw != 0.0 && label_raw != 1.0 {
            return Err(Error::CsvRow { line, message: format!("label must be 0 or 1, got {label_raw}") });
        }
        packets.push(PacketRecord { features, label: label_raw as u8 });
    }

    let mut flows: Vec<Flow> = packets
        .chunks_exact(FLOW_LEN)
        .map(|chunk| {
            let packets = chunk.to_vec();
            let mal = packets.iter().filter(|p| p.label == 1).count();
            let label = u8::from(mal as f64 / FLOW_LEN as f64 > 0.7);
            Flow { packets, label }
        })
        .collect();
    normalize_flows(&mut flows);
    Ok(flows)
}

/// Write flows as one packet per row under the generated schema
/// (f0..fN, label). Floats use the shortest round-trip representation.
pub fn write_csv(path: &Path, flows: &[Flow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let dim = flows
        .first()
        .map(|f| f.packets[0].features.len())
        .unwrap_or(0);
    let schema = CsvSchema::generated(dim);
    let mut header = schema.feature_columns.clone();
    header.push(schema.label_column.clone());
    writer.write_record(&header)?;
    for flow in flows {
        for p in &flow.packets {
            let mut row: Vec<String> = p.features.iter().map(|v| format!("{v}")).collect();
            row.push(p.label.to_string());
            writer.write_record(&row)?;
        }
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticParams};
    use crate::rng::stream;
    use std::io::Write;

    fn write_raw(dir: &tempfile::TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn trailing_rows_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let mut content = String::from("f0,f1,label\n");
        for i in 0..25 {
            content.push_str(&format!("{}.0,{}.5,{}\n", i, i, i % 2));
        }
        let path = write_raw(&dir, "t.csv", &content);
        let flows = load_csv(&path, &CsvSchema::generated(2)).unwrap();
        assert_eq!(flows.len(), 2);
    }

    #[test]
    fn constant_column_normalizes_to_zero() {
        let dir = tempfile::tempdir().unwrap();
        let mut content = String::from("f0,f1,label\n");
        for i in 0..10 {
            content.push_str(&format!("5.0,{i}.0,0\n"));
        }
        let path = write_raw(&dir, "t.csv", &content);
        let flows = load_csv(&path, &CsvSchema::generated(2)).unwrap();
        for p in &flows[0].packets {
            assert_eq!(p.features[0], 0.0);
        }
    }

    #[test]
    fn missing_column_and_bad_cell_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_raw(&dir, "t.csv", "f0,label\n1.0,0\n");
        let schema = CsvSchema {
            feature_columns: vec!["f0".into(), "nope".into()],
            label_column: "label".into(),
        };
        assert!(matches!(load_csv(&path, &schema), Err(Error::MissingColumn(c)) if c == "nope"));

        let path = write_raw(&dir, "bad.csv", "f0,label\nx,0\n");
        match load_csv(&path, &CsvSchema::generated(1)) {
            Err(Error::CsvRow { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_preserves_flows() {
        let dir = tempfile::tempdir().unwrap();
        let params = SyntheticParams { features: 5, flows: 12, class_sep: 2.0, malicious_fraction: 0.5 };
        let flows = generate_synthetic(&mut stream(17, "rt"), &params);
        let path = dir.path().join("rt.csv");
        write_csv(&path, &flows).unwrap();
        let loaded = load_csv(&path, &CsvSchema::generated(5)).unwrap();
        assert_eq!(loaded.len(), flows.len());
        for (a, b) in loaded.iter().zip(&flows) {
            assert_eq!(a.label, b.label);
            for (pa, pb) in a.packets.iter().zip(&b.packets) {
                assert_eq!(pa.label, pb.label);
                for (va, vb) in pa.features.iter().zip(&pb.features) {
                    assert!((va - vb).abs() < 1e-9);
                }
            }
        }
    }
}
