use std::io::{self, Write};

use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => {
                let n: Number =
                    serde_json::from_str(&fmt_num(*x)).expect("formatted float is valid JSON");
                Value::Number(n)
            }
            Cell::Num(_) => Value::Null,
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.clone()),
        }
    }
}

/// 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Result table of one run. Every row ends with a `status` cell:
/// `pass`, `fail` or `error: ...`.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        let mut columns: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
        columns.push("status".into());
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    /// Appends a row; `ok` decides the status.
    pub fn push(&mut self, mut cells: Vec<Cell>, ok: bool) {
        debug_assert_eq!(cells.len() + 1, self.columns.len());
        cells.push(Cell::Text(if ok { "pass" } else { "fail" }.into()));
        self.rows.push(cells);
    }

    /// Appends a row whose computation failed; missing cells are NaN.
    pub fn push_error(&mut self, mut leading: Vec<Cell>, err: &str) {
        leading.resize(self.columns.len() - 1, Cell::Num(f64::NAN));
        leading.push(Cell::Text(format!("error: {err}")));
        self.rows.push(leading);
    }

    /// Index and status of the first row that did not pass.
    pub fn first_failure(&self) -> Option<(usize, &str)> {
        self.rows
            .iter()
            .enumerate()
            .find_map(|(i, r)| match r.last() {
                Some(Cell::Text(s)) if s != "pass" => Some((i, s.as_str())),
                _ => None,
            })
    }

    pub fn write_csv<W: Write>(
        &self,
        w: &mut W,
        schema: &str,
        config: &[(String, Cell)],
    ) -> io::Result<()> {
        writeln!(w, "# schema={schema}/v1")?;
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        for (k, v) in config {
            writeln!(w, "# config {k}={}", v.csv())?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(
        &self,
        w: &mut W,
        schema: &str,
        config: &[(String, Cell)],
    ) -> io::Result<()> {
        let cfg: Map<String, Value> = config.iter().map(|(k, v)| (k.clone(), v.json())).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .cloned()
                        .zip(r.iter().map(Cell::json))
                        .collect(),
                )
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("schema".into(), Value::from(format!("{schema}/v1")));
        doc.insert("config".into(), Value::Object(cfg));
        doc.insert("rows".into(), Value::Array(rows));
        serde_json::to_writer_pretty(&mut *w, &Value::Object(doc))?;
        writeln!(w)
    }
}
