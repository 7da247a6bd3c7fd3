use crate::config::SCHEMA_VERSION;
use crate::CliError;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Where records go. JSON lines carry the schema version and the resolved
/// configuration on every record; CSV gets a single header line and the
/// configuration is reported on stderr instead.
pub struct Sink {
    format: Format,
    command: &'static str,
    config: Value,
    out: Box<dyn Write>,
    columns: Option<Vec<String>>,
}

impl Sink {
    pub fn open<C: Serialize>(
        format: Format,
        out: Option<&Path>,
        command: &'static str,
        config: &C,
    ) -> Result<Self, CliError> {
        let out: Box<dyn Write> = match out {
            Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
                CliError::Validation(format!("cannot create {}: {e}", path.display()))
            })?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        let config = serde_json::to_value(config).expect("configuration serializes");
        if format == Format::Csv {
            eprintln!(
                "{}",
                serde_json::json!({ "schema_version": SCHEMA_VERSION, "command": command, "config": config })
            );
        }
        Ok(Self {
            format,
            command,
            config,
            out,
            columns: None,
        })
    }

    /// Write one table row (or one JSON record).
    pub fn row<R: Serialize>(&mut self, row: &R) -> Result<(), CliError> {
        let Value::Object(fields) = serde_json::to_value(row).expect("rows serialize") else {
            panic!("rows must serialize to objects");
        };
        match self.format {
            Format::Json => self.json(fields),
            Format::Csv => self.csv(fields),
        }
    }

    /// A closing record. In CSV mode it goes to stderr so the table stays
    /// rectangular.
    pub fn summary<R: Serialize>(&mut self, summary: &R) -> Result<(), CliError> {
        let Value::Object(mut fields) = serde_json::to_value(summary).expect("summaries serialize")
        else {
            panic!("summaries must serialize to objects");
        };
        fields.insert("record".into(), "summary".into());
        match self.format {
            Format::Json => self.json(fields),
            Format::Csv => {
                eprintln!("{}", Value::Object(fields));
                Ok(())
            }
        }
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(io_error)
    }

    fn json(&mut self, fields: Map<String, Value>) -> Result<(), CliError> {
        let mut record = Map::new();
        record.insert("schema_version".into(), SCHEMA_VERSION.into());
        record.insert("command".into(), self.command.into());
        record.insert("config".into(), self.config.clone());
        record.extend(fields);
        serde_json::to_writer(&mut self.out, &record)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        self.out.write_all(b"\n").map_err(io_error)
    }

    fn csv(&mut self, fields: Map<String, Value>) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(&mut self.out);
        match &self.columns {
            None => {
                let names: Vec<String> = fields.keys().cloned().collect();
                w.write_record(&names).map_err(csv_error)?;
                self.columns = Some(names);
            }
            Some(names) => {
                if !names.iter().eq(fields.keys()) {
                    panic!("CSV rows must share one set of columns");
                }
            }
        }
        w.write_record(fields.values().map(cell))
            .map_err(csv_error)?;
        w.flush().map_err(io_error)
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn io_error(e: io::Error) -> CliError {
    CliError::Numerical(format!("write failed: {e}"))
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Numerical(format!("write failed: {e}"))
}
