//! Typed result tables and their CSV / aligned-text renderings.

use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnType {
    Integer,
    Real,
    Bool,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: &'static str,
    pub ty: ColumnType,
}

pub const fn col(name: &'static str, ty: ColumnType) -> Column {
    Column { name, ty }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
    /// No value, e.g. the population of a grid point whose solve failed.
    Missing,
}

impl Cell {
    fn matches(&self, ty: ColumnType) -> bool {
        matches!(
            (self, ty),
            (Cell::Int(_), ColumnType::Integer)
                | (Cell::Real(_), ColumnType::Real)
                | (Cell::Bool(_), ColumnType::Bool)
                | (Cell::Text(_), ColumnType::Text)
                | (Cell::Missing, _)
        )
    }

    /// Seventeen significant digits for reals, so values survive a round trip.
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Real(v) => format!("{v:.9e}"),
            Cell::Missing => "-".into(),
            other => other.csv(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    columns: Vec<Column>,
    rows: Vec<Vec<Cell>>,
    /// TOML text written as `#` lines above the header.
    pub metadata: String,
}

impl ResultTable {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            metadata: String::new(),
        }
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// Appends a row.
    ///
    /// # Panics
    /// If the row does not match the column schema; rows are built by the
    /// experiments in this crate, so a mismatch is a programming error.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match schema"
        );
        for (cell, column) in row.iter().zip(&self.columns) {
            assert!(
                cell.matches(column.ty),
                "column `{}` expects {:?}, got {cell:?}",
                column.name,
                column.ty
            );
        }
        self.rows.push(row);
    }

    fn write_metadata(&self, out: &mut impl Write) -> std::io::Result<()> {
        for line in self.metadata.lines() {
            if line.is_empty() {
                writeln!(out, "#")?;
            } else {
                writeln!(out, "# {line}")?;
            }
        }
        Ok(())
    }

    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        self.write_metadata(out)?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()
    }

    /// Fixed-width columns: numbers right-aligned, text left-aligned.
    pub fn write_text(&self, out: &mut impl Write) -> std::io::Result<()> {
        self.write_metadata(out)?;
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::text).collect())
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                cells
                    .iter()
                    .map(|r| r[i].len())
                    .fold(c.name.len(), usize::max)
            })
            .collect();
        let line = |values: Vec<&str>| -> String {
            let parts: Vec<String> = values
                .iter()
                .zip(&self.columns)
                .zip(&widths)
                .map(|((v, c), &w)| match c.ty {
                    ColumnType::Text | ColumnType::Bool => format!("{v:<w$}"),
                    _ => format!("{v:>w$}"),
                })
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        writeln!(
            out,
            "{}",
            line(self.columns.iter().map(|c| c.name).collect())
        )?;
        for row in &cells {
            writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
        }
        Ok(())
    }
}

/// Leading `#` block of a table file with the markers removed.
pub fn metadata_block(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix('#') else {
            break;
        };
        out.push_str(rest.strip_prefix(' ').unwrap_or(rest));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new(vec![
            col("site", ColumnType::Integer),
            col("population", ColumnType::Real),
            col("verdict", ColumnType::Text),
        ]);
        t.metadata = "g = 0.1\n\n[solver]\nepsilon = 1e-8\n".into();
        t.push(vec![1usize.into(), 0.25.into(), "positive".into()]);
        t.push(vec![2usize.into(), Cell::Missing, "needs, quoting".into()]);
        t
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# g = 0.1\n#\n# [solver]\n# epsilon = 1e-8\nsite,population,verdict\n\
             1,2.5000000000000000e-1,positive\n2,,\"needs, quoting\"\n"
        );
        assert_eq!(
            metadata_block(&text),
            "g = 0.1\n\n[solver]\nepsilon = 1e-8\n"
        );
    }

    #[test]
    fn text_layout_is_fixed_width() {
        let mut buf = Vec::new();
        sample().write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body.len(), 3);
        assert!(body[1].starts_with("   1  2.500000000e-1  positive"));
        assert!(body[2].contains("               -"));
    }

    #[test]
    fn empty_table_has_header_only() {
        let mut t = ResultTable::new(vec![col("g", ColumnType::Real)]);
        t.metadata = "a = 1\n".into();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# a = 1\ng\n");
    }

    #[test]
    #[should_panic(expected = "column `site`")]
    fn schema_is_enforced() {
        let mut t = ResultTable::new(vec![col("site", ColumnType::Integer)]);
        t.push(vec![Cell::Real(1.0)]);
    }
}
