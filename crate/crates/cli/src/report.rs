//! Report assembly and serialization. A report is a JSON document holding
//! the resolved config, the rng stream layout, named tables of columns, and
//! pass/fail assertions. `report.json` bytes are a pure function of the
//! config; wall-clock timing lives in a `timing.json` sidecar instead.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct StreamBlock {
    pub purpose: String,
    pub block: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RngInfo {
    /// How stream indices are formed from (seed, block, replica).
    pub scheme: String,
    pub seed: u64,
    pub stream_blocks: Vec<StreamBlock>,
}

/// Column payload; a table mixes numeric, integer, and text columns.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Values {
    Num(Vec<f64>),
    Int(Vec<i64>),
    Text(Vec<String>),
}

impl Values {
    fn len(&self) -> usize {
        match self {
            Values::Num(v) => v.len(),
            Values::Int(v) => v.len(),
            Values::Text(v) => v.len(),
        }
    }

    fn csv_field(&self, i: usize) -> String {
        match self {
            Values::Num(v) => format!("{}", v[i]),
            Values::Int(v) => format!("{}", v[i]),
            Values::Text(v) => {
                let s = &v[i];
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Column {
    pub name: String,
    pub values: Values,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
}

impl Table {
    pub fn new(name: &str) -> Self {
        Table { name: name.to_owned(), columns: Vec::new() }
    }

    pub fn num(mut self, name: &str, values: Vec<f64>) -> Self {
        self.push(name, Values::Num(values));
        self
    }

    pub fn int(mut self, name: &str, values: Vec<i64>) -> Self {
        self.push(name, Values::Int(values));
        self
    }

    pub fn text(mut self, name: &str, values: Vec<String>) -> Self {
        self.push(name, Values::Text(values));
        self
    }

    fn push(&mut self, name: &str, values: Values) {
        if let Some(first) = self.columns.first() {
            assert_eq!(
                first.values.len(),
                values.len(),
                "ragged column {name} in table {}",
                self.name
            );
        }
        self.columns.push(Column { name: name.to_owned(), values });
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        let rows = self.columns.first().map_or(0, |c| c.values.len());
        for i in 0..rows {
            let row: Vec<String> =
                self.columns.iter().map(|c| c.values.csv_field(i)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub experiment: String,
    pub version: String,
    pub config: serde_json::Value,
    pub rng: RngInfo,
    pub tables: Vec<Table>,
    pub assertions: Vec<Assertion>,
    pub pass: bool,
}

impl Report {
    pub fn new(experiment: &str, config: serde_json::Value, rng: RngInfo) -> Self {
        Report {
            experiment: experiment.to_owned(),
            version: permax_core::VERSION.to_owned(),
            config,
            rng,
            tables: Vec::new(),
            assertions: Vec::new(),
            pass: true,
        }
    }

    pub fn table(&mut self, table: Table) {
        self.tables.push(table);
    }

    pub fn assert_that(&mut self, name: &str, pass: bool, detail: String) {
        self.pass &= pass;
        self.assertions.push(Assertion { name: name.to_owned(), pass, detail });
    }

    pub fn to_json_bytes(&self) -> Result<Vec<u8>> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    /// Write `report.json` and one `<table>.csv` per table under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output dir {}", dir.display()))?;
        let path = dir.join("report.json");
        fs::write(&path, self.to_json_bytes()?)
            .with_context(|| format!("writing {}", path.display()))?;
        for table in &self.tables {
            let path = dir.join(format!("{}.csv", table.name));
            fs::write(&path, table.to_csv())
                .with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

/// Timing sidecar, deliberately outside `report.json` so reruns and worker
/// sweeps can be compared byte for byte.
pub fn write_timing(dir: &Path, experiment: &str, seconds: f64) -> Result<()> {
    #[derive(Serialize)]
    struct Timing<'a> {
        experiment: &'a str,
        wall_clock_seconds: f64,
    }
    let mut bytes =
        serde_json::to_vec_pretty(&Timing { experiment, wall_clock_seconds: seconds })?;
    bytes.push(b'\n');
    let path = dir.join("timing.json");
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
