use std::path::{Path, PathBuf};

use sequil_core::{Error, Result};

/// A named table printed as aligned text and optionally written as CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Columns padded to their widest cell; columns whose cells are all
    /// numbers are right-aligned, header included.
    pub fn text(&self) -> String {
        let mut width: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        let mut numeric = vec![!self.rows.is_empty(); self.headers.len()];
        for r in &self.rows {
            for (i, c) in r.iter().enumerate() {
                width[i] = width[i].max(c.chars().count());
                numeric[i] &= c.parse::<f64>().is_ok();
            }
        }
        let line = |cells: &[String]| -> String {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let w = width[i];
                    if numeric[i] {
                        format!("{c:>w$}")
                    } else {
                        format!("{c:<w$}")
                    }
                })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = line(&self.headers);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io_err = |e: std::io::Error| Error::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        w.write_record(&self.headers).map_err(|e| csv_err(path, e))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(io_err)
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        context: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Prints every table; with a CSV target, a single table goes to that path
/// and several go to `<stem>-<name>.csv` next to it.
pub fn emit(tables: &[Table], csv: Option<&Path>) -> Result<()> {
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            println!();
        }
        if tables.len() > 1 {
            println!("# {}", t.name);
        }
        print!("{}", t.text());
    }
    if let Some(path) = csv {
        if tables.len() == 1 {
            tables[0].write_csv(path)?;
        } else {
            for t in tables {
                t.write_csv(&sibling(path, &t.name))?;
            }
        }
    }
    Ok(())
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}-{name}.csv"))
}

pub fn num(x: f64, digits: usize) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        // no "-0.000"
        let s = format!("{x:.digits$}");
        match s.strip_prefix('-') {
            Some(rest) if rest.chars().all(|c| c == '0' || c == '.') => rest.to_string(),
            _ => s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligns_columns() {
        let mut t = Table::new("t", &["game", "g"]);
        t.push(vec!["g1".into(), "1.5".into()]);
        t.push(vec!["pooled".into(), "10.25".into()]);
        assert_eq!(t.text(), "game        g\ng1        1.5\npooled  10.25\n");
    }

    #[test]
    fn negative_zero_prints_plain() {
        assert_eq!(num(-0.0, 1), "0.0");
        assert_eq!(num(-0.0004, 3), "0.000");
        assert_eq!(num(-0.5, 1), "-0.5");
    }

    #[test]
    fn several_tables_get_named_files() {
        let p = Path::new("/tmp/out.csv");
        assert_eq!(sibling(p, "ks"), Path::new("/tmp/out-ks.csv"));
    }
}
