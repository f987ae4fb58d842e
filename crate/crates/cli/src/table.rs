//! CSV tables with a fixed column order and 17-significant-digit numbers.

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
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

/// Scientific notation with 17 significant digits, enough to round-trip any
/// `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    /// UTF-8, comma separated, `\n` line endings, header first.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Output(format!("CSV encoding failed: {e}"));
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Output(format!("CSV encoding failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(format_number(0.5), "5.0000000000000000e-1");
        assert_eq!(format_number(0.1).parse::<f64>().unwrap(), 0.1);
        let x = std::f64::consts::PI / 7.0;
        assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["h", "n", "name"]);
        t.push(vec![0.25.into(), 10usize.into(), "normal:sigma=1,scale=2".into()]);
        let text = t.to_csv().unwrap();
        assert_eq!(text, "h,n,name\n2.5000000000000000e-1,10,\"normal:sigma=1,scale=2\"\n");
    }
}
