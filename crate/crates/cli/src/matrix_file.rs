//! Matrix files.
//!
//! Text form:
//!
//! ```text
//! # optional comments; "# name: ..." sets the name
//! q p e k n
//! <k rows of n integers>
//! ```
//!
//! The JSON mirror is `{"p":..,"e":..,"k":..,"n":..,"rows":[[..]],"name":..}`.

use std::fmt::Write as _;
use std::path::Path;

use asbpir_core::{field_of_order, make_field, GeneratorMatrix};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub p: u32,
    pub e: u32,
    pub k: usize,
    pub n: usize,
    pub rows: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl MatrixFile {
    pub fn from_generator(g: &GeneratorMatrix, name: Option<String>) -> MatrixFile {
        let m = g.matrix();
        MatrixFile {
            p: g.field().characteristic(),
            e: g.field().degree(),
            k: g.k(),
            n: g.n(),
            rows: (0..g.k()).map(|r| m.row(r).iter().map(|&x| u32::from(x)).collect()).collect(),
            name,
        }
    }

    pub fn q(&self) -> u32 {
        self.p.pow(self.e)
    }

    /// Validates entries and rank.
    pub fn generator(&self) -> Result<GeneratorMatrix, CliError> {
        let field = make_field(self.p, self.e)?;
        if self.rows.len() != self.k || self.rows.iter().any(|r| r.len() != self.n) {
            return Err(CliError::Input(format!("expected {} rows of {} entries", self.k, self.n)));
        }
        Ok(GeneratorMatrix::from_rows(field, &self.rows)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(name) = &self.name {
            let _ = writeln!(out, "# name: {name}");
        }
        let _ = writeln!(out, "{} {} {} {} {}", self.q(), self.p, self.e, self.k, self.n);
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<MatrixFile, CliError> {
        let mut name = None;
        let mut lines = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(n) = comment.trim().strip_prefix("name:") {
                    name = Some(n.trim().to_string());
                }
                continue;
            }
            if !line.is_empty() {
                lines.push((no + 1, line));
            }
        }
        let ints = |no: usize, line: &str| -> Result<Vec<u64>, CliError> {
            line.split_whitespace()
                .map(|w| w.parse::<u64>().map_err(|_| CliError::Input(format!("line {no}: {w:?} is not a non-negative integer"))))
                .collect()
        };
        let Some(&(hno, header)) = lines.first() else {
            return Err(CliError::Input("empty matrix file".into()));
        };
        let h = ints(hno, header)?;
        let [q, p, e, k, n] = h[..] else {
            return Err(CliError::Input(format!("line {hno}: header must be `q p e k n`")));
        };
        let small = |v: u64| u32::try_from(v).map_err(|_| CliError::Input(format!("line {hno}: {v} is too large")));
        let (q, p, e) = (small(q)?, small(p)?, small(e)?);
        let field = field_of_order(q)?;
        if field.characteristic() != p || field.degree() != e {
            return Err(CliError::Input(format!("line {hno}: q = {q} does not equal {p}^{e}")));
        }
        let (k, n) = (k as usize, n as usize);
        let body = &lines[1..];
        if body.len() != k {
            return Err(CliError::Input(format!("expected {k} rows, found {}", body.len())));
        }
        let mut rows = Vec::with_capacity(k);
        for &(no, line) in body {
            let row = ints(no, line)?;
            if row.len() != n {
                return Err(CliError::Input(format!("line {no}: expected {n} entries, found {}", row.len())));
            }
            rows.push(row.into_iter().map(|v| u32::try_from(v).unwrap_or(u32::MAX)).collect());
        }
        let file = MatrixFile { p, e, k, n, rows, name };
        file.generator()?;
        Ok(file)
    }

    pub fn parse_json(text: &str) -> Result<MatrixFile, CliError> {
        let file: MatrixFile = serde_json::from_str(text).map_err(|e| CliError::Input(format!("matrix JSON: {e}")))?;
        file.generator()?;
        Ok(file)
    }

    /// JSON when the file name ends in `.json` or the content starts with `{`.
    pub fn load(path: &Path) -> Result<MatrixFile, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|x| x == "json") || text.trim_start().starts_with('{');
        if is_json {
            MatrixFile::parse_json(&text)
        } else {
            MatrixFile::parse_text(&text)
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let body = if path.extension().is_some_and(|x| x == "json") {
            serde_json::to_string_pretty(self).expect("matrix serializes") + "\n"
        } else {
            self.to_text()
        };
        std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let text = "# name: parity\n# another comment\n2 2 1 2 3\n1 0 1\n0 1 1\n";
        let m = MatrixFile::parse_text(text).unwrap();
        assert_eq!(m.name.as_deref(), Some("parity"));
        assert_eq!(m.rows, vec![vec![1, 0, 1], vec![0, 1, 1]]);
        assert_eq!(m.to_text(), text.replace("# another comment\n", ""));
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(MatrixFile::parse_json(&json).unwrap(), m);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "",
            "2 2 1 2\n1 0\n0 1\n",
            "4 2 1 1 1\n1\n",
            "2 2 1 2 2\n1 0\n",
            "2 2 1 2 2\n1 0\n1 0\n",
            "3 3 1 1 2\n1 3\n",
            "2 2 1 1 2\n1 x\n",
        ] {
            assert!(MatrixFile::parse_text(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn extension_field_entries() {
        let m = MatrixFile::parse_text("9 3 2 1 3\n1 4 8\n").unwrap();
        assert_eq!(m.generator().unwrap().field().order(), 9);
    }
}
