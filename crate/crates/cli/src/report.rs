//! Result tables, their CSV form and the markdown summary.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => format_real(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
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

/// Reals with 17 significant digits, `%.17g` style: trailing zeros
/// dropped, exponent form outside `[1e-4, 1e17)`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_fraction(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_fraction(mantissa), sign, exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Compact rendering for human-facing text.
pub fn format_short(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) {
        format!("{x:.4e}")
    } else {
        trim_fraction(&format!("{x:.4}")).to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem, e.g. `bias-sweep`.
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: Vec<&'static str>) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    /// Comma-separated, header first, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "| {} |", self.columns.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(self.columns.len()));
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Real(x) => format_short(*x),
                    other => other.render(),
                })
                .collect();
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
        out
    }
}

/// Everything one experiment produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub tables: Vec<Table>,
    /// Markdown body written after the metadata block.
    pub summary: String,
    /// Lines echoed to stdout.
    pub stdout: Vec<String>,
    pub seed: u64,
    pub total_proposals: u64,
}

pub fn version_string() -> String {
    format!("abc-rates {}", env!("CARGO_PKG_VERSION"))
}

/// Markdown file: title, metadata block, then the experiment summary.
pub fn render_markdown(
    experiment: &str,
    result: &ResultTable,
    config_json: &str,
    wall_clock_s: f64,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {experiment}\n");
    let _ = writeln!(out, "- version: {}", version_string());
    let _ = writeln!(out, "- seed: {}", result.seed);
    let _ = writeln!(out, "- total proposals: {}", result.total_proposals);
    let _ = writeln!(out, "- wall clock: {wall_clock_s:.2} s\n");
    out.push_str(&result.summary);
    let _ = writeln!(out, "\n## Configuration\n\n```json\n{config_json}\n```");
    out
}
