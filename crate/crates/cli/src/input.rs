//! Sample files for the `entropy` command.

use std::fs;
use std::path::Path;

use crate::CliError;

/// Reads a sample either as one number per line (blank lines and `#`
/// comments skipped) or, when `column` is given, from that column of a
/// headed CSV file.
pub fn read_sample(path: &Path, column: Option<&str>) -> Result<Vec<f64>, CliError> {
    let values = match column {
        None => read_plain(path)?,
        Some(col) => read_csv_column(path, col)?,
    };
    if values.is_empty() {
        return Err(CliError::Validation(format!("{} contains no observations", path.display())));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Validation(format!("{}: non-finite observation {v}", path.display())));
    }
    Ok(values)
}

fn parse(path: &Path, line: usize, field: &str) -> Result<f64, CliError> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::Validation(format!("{}:{line}: cannot parse '{}' as a number", path.display(), field.trim())))
}

fn read_plain(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(parse(path, i + 1, t)?);
    }
    Ok(out)
}

fn read_csv_column(path: &Path, column: &str) -> Result<Vec<f64>, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
        .clone();
    let idx = headers
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| CliError::Validation(format!("{} has no column '{column}'", path.display())))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let field = rec.get(idx).unwrap_or("");
        if field.trim().is_empty() {
            continue;
        }
        out.push(parse(path, i + 2, field)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn plain_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        fs::File::create(&p).unwrap().write_all(b"# header\n1.5\n\n2\n").unwrap();
        assert_eq!(read_sample(&p, None).unwrap(), vec![1.5, 2.0]);

        let c = dir.path().join("b.csv");
        fs::write(&c, "id,x\n1,0.5\n2,3\n").unwrap();
        assert_eq!(read_sample(&c, Some("x")).unwrap(), vec![0.5, 3.0]);
        assert!(matches!(read_sample(&c, Some("y")), Err(CliError::Validation(_))));
    }

    #[test]
    fn rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        fs::write(&p, "1\nabc\n").unwrap();
        assert!(matches!(read_sample(&p, None), Err(CliError::Validation(_))));
        fs::write(&p, "\n").unwrap();
        assert!(read_sample(&p, None).is_err());
    }
}
