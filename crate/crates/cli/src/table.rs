//! Sequence files: a header row, then one row per atom with columns
//! `weight`, optional `rank`, optional `limit`, and `u0 … u{N-1}`.

use std::path::Path;

use cesaro_core::gallery::{load_sequence, FunctionSequence, SequenceTable};
use cesaro_core::Error as CoreError;

use crate::error::{CliError, Result};
use crate::report::num;

/// Writes `seq` in the sequence schema. The `rank` column is written only
/// when the exhaustion differs from row order; `limit` is always written.
pub fn write_sequence(path: &Path, seq: &FunctionSequence) -> Result<()> {
    let table = SequenceTable::from_sequence(seq);
    let with_rank = table.ranks.as_ref().is_some_and(|r| r.iter().enumerate().any(|(i, &k)| i != k));
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Csv { path: path.into(), source: e })?;
    let csv_err = |e| CliError::Csv { path: path.into(), source: e };
    let mut header = vec!["weight".to_string()];
    if with_rank {
        header.push("rank".into());
    }
    header.push("limit".into());
    header.extend((0..seq.len()).map(|n| format!("u{n}")));
    w.write_record(&header).map_err(csv_err)?;
    let limit = table.limit.as_deref().unwrap_or(&[]);
    for (i, row) in table.rows.iter().enumerate() {
        let mut rec = vec![num(table.weights[i])];
        if let (true, Some(r)) = (with_rank, &table.ranks) {
            rec.push(r[i].to_string());
        }
        rec.push(num(limit[i]));
        rec.extend(row.iter().map(|&v| num(v)));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Reads a sequence file. The label is the file stem. Errors name the file
/// line and column of the first violation.
pub fn read_sequence(path: &Path) -> Result<FunctionSequence> {
    let schema = |row: Option<usize>, column: Option<&str>, reason: String| CliError::Schema {
        path: path.into(),
        row,
        column: column.map(str::to_string),
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Csv { path: path.into(), source: e })?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Csv { path: path.into(), source: e })?
        .iter()
        .map(str::to_string)
        .collect();

    if header.first().map(String::as_str) != Some("weight") {
        return Err(schema(Some(1), Some("weight"), "missing column (must be the first column)".into()));
    }
    let mut col = 1;
    let rank_col = (header.get(col).map(String::as_str) == Some("rank")).then(|| {
        col += 1;
        col - 1
    });
    let limit_col = (header.get(col).map(String::as_str) == Some("limit")).then(|| {
        col += 1;
        col - 1
    });
    let first_term = col;
    for (n, name) in header[first_term..].iter().enumerate() {
        if *name != format!("u{n}") {
            return Err(schema(Some(1), Some(name), format!("expected column `u{n}`")));
        }
    }
    if header.len() == first_term {
        return Err(schema(Some(1), Some("u0"), "missing column: no sequence terms".into()));
    }

    let mut weights = Vec::new();
    let mut ranks = rank_col.map(|_| Vec::new());
    let mut limit = limit_col.map(|_| Vec::new());
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| CliError::Csv { path: path.into(), source: e })?;
        if rec.len() != header.len() {
            return Err(schema(Some(line), None, format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        let real = |c: usize| -> Result<f64> {
            rec[c].parse::<f64>().map_err(|_| schema(Some(line), Some(&header[c]), format!("not a number: `{}`", &rec[c])))
        };
        let w = real(0)?;
        if !(w > 0.0 && w.is_finite()) {
            return Err(schema(Some(line), Some("weight"), format!("weight must be positive and finite, got {w}")));
        }
        weights.push(w);
        if let (Some(c), Some(r)) = (rank_col, ranks.as_mut()) {
            let v = rec[c]
                .parse::<usize>()
                .map_err(|_| schema(Some(line), Some("rank"), format!("not a rank: `{}`", &rec[c])))?;
            r.push(v);
        }
        if let (Some(c), Some(l)) = (limit_col, limit.as_mut()) {
            let v = real(c)?;
            if !v.is_finite() {
                return Err(schema(Some(line), Some("limit"), "non-finite value".into()));
            }
            l.push(v);
        }
        let mut row = Vec::with_capacity(header.len() - first_term);
        for (c, name) in header.iter().enumerate().skip(first_term) {
            let v = real(c)?;
            if !v.is_finite() {
                return Err(schema(Some(line), Some(name), "non-finite value".into()));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if weights.is_empty() {
        return Err(schema(None, None, "no atom rows".into()));
    }
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let table = SequenceTable { label, weights, ranks, limit, rows };
    load_sequence(&table).map_err(|e| match e {
        CoreError::NotAPermutation { .. } => {
            schema(None, Some("rank"), "ranks are not a permutation of 0..atoms".into())
        }
        other => CliError::Stage { stage: "sequence file", source: other },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use cesaro_core::gallery::{make_moving_bump, make_rademacher_with};

    fn roundtrip(seq: &FunctionSequence) -> FunctionSequence {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.csv");
        write_sequence(&path, seq).unwrap();
        read_sequence(&path).unwrap()
    }

    #[test]
    fn rademacher_round_trips_bit_for_bit() {
        let seq = make_rademacher_with(6, 5, true).unwrap();
        let back = roundtrip(&seq);
        assert_eq!(back.space().weights(), seq.space().weights());
        assert_eq!(back.limit().values(), seq.limit().values());
        for n in 0..seq.len() {
            assert_eq!(back.term(n).values(), seq.term(n).values());
        }
        assert_eq!(back.norm_bound(), seq.norm_bound());
    }

    #[test]
    fn bumps_round_trip() {
        let seq = make_moving_bump(4, 3).unwrap();
        let back = roundtrip(&seq);
        assert_eq!(back.space().exhaustion_order(), seq.space().exhaustion_order());
    }

    fn read_text(text: &str) -> Result<FunctionSequence> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, text).unwrap();
        read_sequence(&path)
    }

    #[test]
    fn missing_weight_column_is_named() {
        match read_text("limit,u0\n0,1\n") {
            Err(CliError::Schema { column: Some(c), .. }) => assert_eq!(c, "weight"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_cells_report_line_and_column() {
        match read_text("weight,u0,u1\n0.5,1,2\n0.5,1,x\n") {
            Err(CliError::Schema { row: Some(3), column: Some(c), .. }) => assert_eq!(c, "u1"),
            other => panic!("{other:?}"),
        }
        match read_text("weight,u0\n-0.5,1\n") {
            Err(CliError::Schema { row: Some(2), column: Some(c), .. }) => assert_eq!(c, "weight"),
            other => panic!("{other:?}"),
        }
        match read_text("weight,u0\n0.5,inf\n") {
            Err(CliError::Schema { row: Some(2), column: Some(c), .. }) => assert_eq!(c, "u0"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_text("weight,u0,u1\n0.5,1\n"), Err(CliError::Schema { row: Some(2), .. })));
    }

    #[test]
    fn limit_column_is_declared() {
        let seq = read_text("weight,rank,limit,u0,u1\n0.5,1,1,2,0\n0.5,0,1,0,2\n").unwrap();
        assert_eq!(seq.limit().values(), &[1.0, 1.0]);
        assert_eq!(seq.space().exhaustion_order(), &[1, 0]);
    }
}
