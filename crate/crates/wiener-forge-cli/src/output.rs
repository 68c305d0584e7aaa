use crate::{Format, RunConfig};
use anyhow::{Context, Result};
use serde_json::Value;
use std::io::Write;
use wiener_forge::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_INVERTIBLE: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;
pub const EXIT_INVALID: u8 = 4;

pub struct Table {
    pub name: &'static str,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub struct Output {
    pub command: &'static str,
    pub report: Value,
    pub tables: Vec<Table>,
    pub code: u8,
}

impl Output {
    pub fn new(command: &'static str, report: impl serde::Serialize) -> Result<Self> {
        Ok(Self { command, report: serde_json::to_value(report)?, tables: Vec::new(), code: EXIT_OK })
    }

    pub fn with_table(mut self, t: Table) -> Self {
        self.tables.push(t);
        self
    }

    pub fn with_code(mut self, code: u8) -> Self {
        self.code = code;
        self
    }
}

fn write_csv<W: Write>(w: W, t: &Table) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(&t.header)?;
    for r in &t.rows {
        wr.write_record(r)?;
    }
    wr.flush()?;
    Ok(())
}

fn scalar_rows(report: &Value) -> Table {
    let mut rows = Vec::new();
    if let Value::Object(map) = report {
        for (k, v) in map {
            match v {
                Value::Number(_) | Value::Bool(_) | Value::String(_) | Value::Null => rows.push(vec![k.clone(), v.to_string()]),
                _ => {}
            }
        }
    }
    Table { name: "report", header: vec!["key".into(), "value".into()], rows }
}

/// Writes the report (with the run configuration embedded) and returns the exit code.
pub fn emit(out: &Output, cfg: &RunConfig) -> Result<u8> {
    let mut report = out.report.clone();
    if let Value::Object(map) = &mut report {
        map.insert("config".into(), serde_json::to_value(cfg)?);
    } else {
        report = serde_json::json!({ "result": report, "config": cfg });
    }
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(format!("{}.json", out.command));
        std::fs::write(&path, serde_json::to_string_pretty(&report)?).with_context(|| format!("writing {}", path.display()))?;
        for t in &out.tables {
            let path = dir.join(format!("{}.csv", t.name));
            let file = std::fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
            write_csv(file, t)?;
        }
    }
    let stdout = std::io::stdout();
    match cfg.format {
        Format::Json => {
            let mut lock = stdout.lock();
            writeln!(lock, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Format::Csv => match out.tables.first() {
            Some(t) => write_csv(stdout.lock(), t)?,
            None => write_csv(stdout.lock(), &scalar_rows(&report))?,
        },
    }
    Ok(out.code)
}

pub fn error_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::NotInvertibleOnTorus(_) | Error::NotInvertibleOnAxis(_)) => EXIT_NOT_INVERTIBLE,
        Some(Error::NoConvergence(_) | Error::Inaccurate { .. }) => EXIT_INCONCLUSIVE,
        _ => EXIT_INVALID,
    }
}
