//! CSV ingestion.
//!
//! Comma-separated, header row required, `.` decimal point. A column with
//! no numeric cell at all is treated as a label column and ignored. Among
//! the remaining columns, a row with any missing or non-numeric cell is
//! rejected as a whole and counted.

use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericTable {
    /// Names of the retained numeric columns, in file order.
    pub names: Vec<String>,
    /// Column-major values of complete rows.
    pub columns: Vec<Vec<f64>>,
    pub ignored_columns: Vec<String>,
    pub rejected_rows: usize,
    /// 1-based line numbers of rejected rows (header is line 1).
    pub rejected_lines: Vec<u64>,
}

impl NumericTable {
    pub fn n(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    /// Position of a column given by header name, or by 0-based index among
    /// the retained columns when no header matches.
    pub fn position(&self, key: &str) -> CliResult<usize> {
        if let Some(i) = self.names.iter().position(|n| n == key) {
            return Ok(i);
        }
        if self.ignored_columns.iter().any(|n| n == key) {
            return Err(CliError::Data(format!("column '{key}' is not numeric")));
        }
        match key.parse::<usize>() {
            Ok(i) if i < self.names.len() => Ok(i),
            Ok(i) => Err(CliError::Usage(format!(
                "column index {i} out of range ({} numeric columns)",
                self.names.len()
            ))),
            Err(_) => Err(CliError::Usage(format!("no column named '{key}'"))),
        }
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    let t = cell.trim();
    if t.is_empty() {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn read_table<R: Read>(reader: R) -> CliResult<NumericTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if headers.is_empty() {
        return Err(CliError::Data("empty header row".into()));
    }
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let cells: Vec<Option<f64>> = rec.iter().map(parse_cell).collect();
        records.push((line, cells));
    }
    let numeric: Vec<bool> = (0..headers.len())
        .map(|j| records.iter().any(|(_, cells)| cells[j].is_some()))
        .collect();
    let keep: Vec<usize> = (0..headers.len()).filter(|&j| numeric[j]).collect();

    let mut columns = vec![Vec::with_capacity(records.len()); keep.len()];
    let mut rejected_lines = Vec::new();
    for (line, cells) in &records {
        if keep.iter().any(|&j| cells[j].is_none()) {
            rejected_lines.push(*line);
            continue;
        }
        for (col, &j) in columns.iter_mut().zip(&keep) {
            col.push(cells[j].expect("checked"));
        }
    }
    Ok(NumericTable {
        names: keep.iter().map(|&j| headers[j].clone()).collect(),
        columns,
        ignored_columns: (0..headers.len())
            .filter(|&j| !numeric[j])
            .map(|j| headers[j].clone())
            .collect(),
        rejected_rows: rejected_lines.len(),
        rejected_lines,
    })
}

pub fn read_table_path(path: &Path) -> CliResult<NumericTable> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    read_table(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_columns_ignored_and_bad_rows_counted() {
        let text = "id,y,x1,x2\na,1,2,3\nb,2,,4\nc,3,1,x\nd,4,5,6\ne,5,7,1\n";
        let t = read_table(text.as_bytes()).unwrap();
        assert_eq!(t.names, ["y", "x1", "x2"]);
        assert_eq!(t.ignored_columns, ["id"]);
        assert_eq!(t.rejected_rows, 2);
        assert_eq!(t.rejected_lines, [3, 4]);
        assert_eq!(t.columns[0], [1.0, 4.0, 5.0]);
    }

    #[test]
    fn ragged_rows_are_parse_errors() {
        let err = read_table("a,b\n1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CliError::Data(m) if m.contains("line 3")));
    }

    #[test]
    fn column_lookup() {
        let t = read_table("lab,y,x\nq,1,2\nr,2,1\n".as_bytes()).unwrap();
        assert_eq!(t.position("x").unwrap(), 1);
        assert_eq!(t.position("0").unwrap(), 0);
        assert!(matches!(t.position("lab"), Err(CliError::Data(_))));
        assert!(matches!(t.position("zz"), Err(CliError::Usage(_))));
        assert!(matches!(t.position("5"), Err(CliError::Usage(_))));
    }
}
