//! TSV + JSON report pair. The TSV is the human-diffable table, the
//! JSON mirror carries the same rows plus structured payloads. Both
//! are byte-stable for a fixed config and seed: headers echo every
//! parameter, and all collections are emitted in sorted order.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

pub struct Report {
    command: String,
    header: Vec<(String, String)>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    data: Value,
}

impl Report {
    pub fn new(command: &str, columns: Vec<&'static str>) -> Report {
        Report {
            command: command.to_string(),
            header: Vec::new(),
            columns,
            rows: Vec::new(),
            data: Value::Null,
        }
    }

    pub fn kv(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn set_data(&mut self, data: Value) {
        self.data = data;
    }

    pub fn tsv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# command\t{}\n", self.command));
        for (k, v) in &self.header {
            out.push_str(&format!("# {k}\t{v}\n"));
        }
        out.push_str(&self.columns.join("\t"));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn json(&self) -> Value {
        let header: serde_json::Map<String, Value> = self
            .header
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        json!({
            "command": self.command,
            "params": header,
            "columns": self.columns,
            "rows": self.rows,
            "data": self.data,
        })
    }

    /// Writes `<prefix>.tsv` and `<prefix>.json` and echoes the TSV to
    /// stdout.
    pub fn write(&self, prefix: &str) -> std::io::Result<()> {
        let tsv = self.tsv();
        let json = serde_json::to_string_pretty(&self.json()).expect("report serializes");
        if let Some(parent) = Path::new(prefix).parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        fs::write(format!("{prefix}.tsv"), &tsv)?;
        fs::write(format!("{prefix}.json"), format!("{json}\n"))?;
        std::io::stdout().write_all(tsv.as_bytes())?;
        Ok(())
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt_f64(x),
        None => "-".to_string(),
    }
}
