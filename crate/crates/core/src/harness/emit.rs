//! Table and metadata writers. Outputs are byte-deterministic: rows are
//! written in a fixed order and floats use the shortest round-trip form.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

pub struct Emitter {
    dir: PathBuf,
    format: OutputFormat,
    written: Vec<String>,
}

impl Emitter {
    pub fn new(dir: impl Into<PathBuf>, format: OutputFormat) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            format,
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File names written so far, in order.
    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn table<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<PathBuf> {
        let file = format!("{name}.{}", self.format.extension());
        let path = self.dir.join(&file);
        match self.format {
            OutputFormat::Csv => write_csv(&path, rows)?,
            OutputFormat::Json => write_json(&path, &rows)?,
        }
        self.record(file);
        Ok(path)
    }

    /// JSON document regardless of the table format.
    pub fn document<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let file = format!("{name}.json");
        let path = self.dir.join(&file);
        write_json(&path, value)?;
        self.record(file);
        Ok(path)
    }

    fn record(&mut self, file: String) {
        if !self.written.contains(&file) {
            self.written.push(file);
        }
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()?)
}
