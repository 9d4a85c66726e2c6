//! Cell-by-cell comparison of a CSV output against a stored fixture.

use std::fmt::Write;

use crate::config::Tolerance;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnDeviation {
    pub name: String,
    /// Largest `|out − fixture|`; infinite for non-numeric mismatches.
    pub max_deviation: f64,
    /// 1-based data row of the largest deviation.
    pub row: Option<usize>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub columns: Vec<ColumnDeviation>,
    /// First failing cell, per failing column.
    pub failures: Vec<String>,
}

impl CompareReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.columns {
            let row = c.row.map_or_else(|| "-".to_string(), |r| r.to_string());
            let _ = writeln!(
                s,
                "column {}: max deviation {:e} at row {row} {}",
                c.name,
                c.max_deviation,
                if c.passed { "ok" } else { "FAIL" }
            );
        }
        for f in &self.failures {
            let _ = writeln!(s, "mismatch: {f}");
        }
        let _ = writeln!(s, "{}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

struct Table<'a> {
    header: Vec<&'a str>,
    rows: Vec<Vec<&'a str>>,
}

/// Lines starting with `#` are footers or comments and are skipped.
fn parse<'a>(text: &'a str, what: &str) -> Result<Table<'a>, CliError> {
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| CliError::Config(format!("{what} has no header")))?
        .split(',')
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Vec<&str> = line.split(',').collect();
        if row.len() != header.len() {
            return Err(CliError::Config(format!(
                "{what} row {} has {} fields, header has {}",
                i + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

fn deviation(out: &str, fixture: &str) -> (f64, f64) {
    match (out.trim().parse::<f64>(), fixture.trim().parse::<f64>()) {
        (Ok(a), Ok(b)) if a.is_nan() && b.is_nan() => (0.0, 0.0),
        (Ok(a), Ok(b)) if a == b => (0.0, b.abs()),
        (Ok(a), Ok(b)) => ((a - b).abs(), b.abs()),
        _ if out.trim() == fixture.trim() => (0.0, 0.0),
        _ => (f64::INFINITY, 0.0),
    }
}

/// Every cell must satisfy `|out − fixture| ≤ abs + rel·|fixture|`; text cells
/// must match exactly. Differing headers or row counts are schema errors.
pub fn compare_fixture(
    output: &str,
    fixture: &str,
    tol: Tolerance,
) -> Result<CompareReport, CliError> {
    let out = parse(output, "output")?;
    let fix = parse(fixture, "fixture")?;
    if out.header != fix.header {
        return Err(CliError::Config(format!(
            "schema mismatch: output columns [{}] vs fixture columns [{}]",
            out.header.join(","),
            fix.header.join(",")
        )));
    }
    if out.rows.len() != fix.rows.len() {
        return Err(CliError::Config(format!(
            "schema mismatch: output has {} rows, fixture has {}",
            out.rows.len(),
            fix.rows.len()
        )));
    }
    let mut columns = Vec::with_capacity(out.header.len());
    let mut failures = Vec::new();
    for (c, name) in out.header.iter().enumerate() {
        let mut col = ColumnDeviation {
            name: name.to_string(),
            max_deviation: 0.0,
            row: None,
            passed: true,
        };
        for (r, (a, b)) in out.rows.iter().zip(&fix.rows).enumerate() {
            let (dev, scale) = deviation(a[c], b[c]);
            if dev > col.max_deviation || (col.row.is_none() && dev > 0.0) {
                col.max_deviation = dev;
                col.row = Some(r + 1);
            }
            if !(dev <= tol.abs + tol.rel * scale) && col.passed {
                col.passed = false;
                failures.push(format!(
                    "row {}, column {name}: output {} vs fixture {}",
                    r + 1,
                    a[c],
                    b[c]
                ));
            }
        }
        columns.push(col);
    }
    Ok(CompareReport { columns, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIX: &str =
        "n,rate,kind\n0,1.0000000000000000e0,a\n1,2.5000000000000000e0,b\n# sum=3.5\n";

    #[test]
    fn identical_files_pass() {
        let r = compare_fixture(FIX, FIX, Tolerance::default()).unwrap();
        assert!(r.passed());
        assert!(r.columns.iter().all(|c| c.max_deviation == 0.0));
    }

    #[test]
    fn perturbation_names_row_and_column() {
        let out = FIX.replace("2.5000000000000000e0", "2.5000001e0");
        let r = compare_fixture(&out, FIX, Tolerance::default()).unwrap();
        assert!(!r.passed());
        assert_eq!(r.failures.len(), 1);
        assert!(
            r.failures[0].starts_with("row 2, column rate"),
            "{}",
            r.failures[0]
        );
        assert_eq!(r.columns[1].row, Some(2));
    }

    #[test]
    fn absolute_and_relative_tolerances() {
        let out = FIX.replace("2.5000000000000000e0", "2.5000001e0");
        // deviation 1e-7 against |fixture| 2.5
        assert!(compare_fixture(
            &out,
            FIX,
            Tolerance {
                abs: 2e-7,
                rel: 0.0
            }
        )
        .unwrap()
        .passed());
        assert!(compare_fixture(
            &out,
            FIX,
            Tolerance {
                abs: 0.0,
                rel: 5e-8
            }
        )
        .unwrap()
        .passed());
        assert!(!compare_fixture(
            &out,
            FIX,
            Tolerance {
                abs: 0.0,
                rel: 3e-8
            }
        )
        .unwrap()
        .passed());
        assert!(!compare_fixture(
            &out,
            FIX,
            Tolerance {
                abs: 5e-8,
                rel: 0.0
            }
        )
        .unwrap()
        .passed());
    }

    #[test]
    fn text_cells_compare_exactly() {
        let out = FIX.replace(",b\n", ",c\n");
        let r = compare_fixture(&out, FIX, Tolerance { abs: 1.0, rel: 1.0 }).unwrap();
        assert!(r.failures[0].contains("column kind"));
    }

    #[test]
    fn nan_matches_nan() {
        let a = "x\nNaN\n";
        assert!(compare_fixture(a, a, Tolerance::default())
            .unwrap()
            .passed());
    }

    #[test]
    fn schema_mismatch_is_an_error() {
        let out = FIX.replace("n,rate,kind", "n,rates,kind");
        assert!(matches!(
            compare_fixture(&out, FIX, Tolerance::default()),
            Err(CliError::Config(_))
        ));
        let out = "n,rate,kind\n0,1.0,a\n";
        assert!(compare_fixture(out, FIX, Tolerance::default()).is_err());
    }
}
