//! Tables, documents and plot data written into the output directory.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use perfolayer::cell::{EffectiveModel, Tensor2d};

use crate::config::parse_config;
use crate::error::{CliError, CliResult};

pub const CONFIG_ECHO: &str = "config.echo.toml";
pub const EFFECTIVE: &str = "effective.json";
pub const SUMMARY: &str = "summary.json";
pub const ERROR: &str = "error.json";
pub const TWO_SCALE: &str = "two_scale.csv";
pub const MOMENTS: &str = "moments.csv";
pub const MOMENTS_HEADER: &str = "eps,t,moment_u,moment_r";
pub const HELMHOLTZ: &str = "helmholtz.csv";
pub const HELMHOLTZ_HEADER: &str = "fields,gradients,reconstruction,orthogonality,idempotence";
pub const CELL_RESIDUALS: &str = "cell_residuals.csv";
pub const CELL_RESIDUALS_HEADER: &str = "load,i,j,iterations,residual";
pub const APRIORI_HEADER: &str = "t,apriori_v,apriori_D";

/// `1/ε` as used in file names.
pub fn inv(eps: f64) -> usize {
    (1.0 / eps).round() as usize
}

/// Writes a file through a buffered closure; errors become IO failures
/// naming the path.
pub fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> CliResult<()> {
    let wrap = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let f = fs::File::create(path).map_err(wrap)?;
    let mut w = BufWriter::new(f);
    body(&mut w).map_err(wrap)?;
    w.flush().map_err(wrap)
}

pub fn write_json(path: &Path, v: &impl Serialize) -> CliResult<()> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, v).map_err(std::io::Error::other)?;
        writeln!(w)
    })
}

fn nested(t: &Tensor2d) -> Value {
    json!(t)
}

/// On-disk form of the homogenized tensors.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EffectiveDocument {
    pub a_star: Tensor2d,
    pub b_star: Tensor2d,
    pub c_star: Tensor2d,
    pub solid_volume: f64,
    pub geometry_hash: String,
    pub resolution: Resolution,
    pub max_cell_residual: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Resolution {
    pub m: usize,
    pub n: usize,
}

impl EffectiveDocument {
    pub fn new(eff: &EffectiveModel, hash: String, resolution: Resolution, residual: f64) -> Self {
        EffectiveDocument {
            a_star: eff.a,
            b_star: eff.b,
            c_star: eff.c,
            solid_volume: eff.solid_volume,
            geometry_hash: hash,
            resolution,
            max_cell_residual: residual,
        }
    }
}

/// A comma-separated table read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut lines = text.lines();
        let header = lines.next().unwrap_or("").split(',').map(str::to_string).collect();
        let rows = lines.filter(|l| !l.is_empty()).map(|l| l.split(',').map(str::to_string).collect()).collect();
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn numbers(&self, col: usize) -> CliResult<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                r.get(col)
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| CliError::Io(format!("malformed value in column {}", self.header[col])))
            })
            .collect()
    }
}

/// `(ε, sup over rows)` per distinct ε, ordered by decreasing ε.
pub fn sup_by_eps(eps: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let mut by: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    for (&e, &v) in eps.iter().zip(values) {
        let entry = by.entry(inv(e)).or_insert((e, 0.0));
        entry.1 = entry.1.max(v);
    }
    by.into_values().collect()
}

fn write_plot(out: &Path, name: &str, series: &[(f64, f64)]) -> CliResult<PathBuf> {
    let path = out.join(format!("plot_{name}.dat"));
    write_file(&path, |w| {
        for (x, y) in series {
            writeln!(w, "{x:.12e} {y:.12e}")?;
        }
        Ok(())
    })?;
    Ok(path)
}

fn series_json(series: &[(f64, f64)]) -> Value {
    Value::Array(series.iter().map(|(e, v)| json!({"eps": e, "value": v})).collect())
}

/// Rebuilds plot data and `summary.json` from whatever tables exist in `out`.
/// Contains no timings, so identical runs give identical summaries.
pub fn write_report(out: &Path) -> CliResult<Value> {
    let mut summary = serde_json::Map::new();
    let echo = out.join(CONFIG_ECHO);
    if echo.exists() {
        let text = fs::read_to_string(&echo)?;
        let cfg = parse_config(&text)?;
        let geom = perfolayer::geometry::build_cell_geometry(&cfg.geometry.perforation()?, cfg.geometry.m())?;
        summary.insert("geometry_hash".into(), json!(geom.hash()));
        summary.insert("config".into(), serde_json::to_value(&cfg).map_err(|e| CliError::Io(e.to_string()))?);
    }
    let eff = out.join(EFFECTIVE);
    if eff.exists() {
        let doc: EffectiveDocument = serde_json::from_str(&fs::read_to_string(&eff)?)
            .map_err(|e| CliError::Io(format!("{}: {e}", eff.display())))?;
        summary.insert(
            "effective".into(),
            json!({
                "a_star": nested(&doc.a_star),
                "b_star": nested(&doc.b_star),
                "c_star": nested(&doc.c_star),
                "solid_volume": doc.solid_volume,
                "resolution": doc.resolution,
                "max_cell_residual": doc.max_cell_residual,
            }),
        );
    }
    let two = out.join(TWO_SCALE);
    if two.exists() {
        let t = Table::read(&two)?;
        let eps = t.numbers(0)?;
        let mut errors = serde_json::Map::new();
        for name in ["err_u3", "err_u1_1", "err_u1_2", "err_symgrad"] {
            if let Some(c) = t.column(name) {
                let s = sup_by_eps(&eps, &t.numbers(c)?);
                write_plot(out, name, &s)?;
                errors.insert(name.into(), series_json(&s));
            }
        }
        summary.insert("two_scale_sup_errors".into(), Value::Object(errors));
    }
    let mom = out.join(MOMENTS);
    if mom.exists() {
        let t = Table::read(&mom)?;
        let eps = t.numbers(0)?;
        let mut m = serde_json::Map::new();
        for name in ["moment_u", "moment_r"] {
            if let Some(c) = t.column(name) {
                let s = sup_by_eps(&eps, &t.numbers(c)?);
                write_plot(out, name, &s)?;
                m.insert(name.into(), series_json(&s));
            }
        }
        summary.insert("moments".into(), Value::Object(m));
    }
    let mut constants = serde_json::Map::new();
    for name in ["korn", "extension", "trace"] {
        let p = out.join(format!("constants_{name}.csv"));
        if p.exists() {
            let t = Table::read(&p)?;
            let (Some(ce), Some(cc)) = (t.column("eps"), t.column("constant")) else { continue };
            let s: Vec<(f64, f64)> = t.numbers(ce)?.into_iter().zip(t.numbers(cc)?).collect();
            write_plot(out, name, &s)?;
            constants.insert(name.into(), series_json(&s));
        }
    }
    if !constants.is_empty() {
        summary.insert("constants".into(), Value::Object(constants));
    }
    let hh = out.join(HELMHOLTZ);
    if hh.exists() {
        let t = Table::read(&hh)?;
        if let Some(row) = t.rows.first() {
            let m: serde_json::Map<String, Value> = t
                .header
                .iter()
                .zip(row)
                .map(|(k, v)| (k.clone(), v.parse::<f64>().map(|x| json!(x)).unwrap_or(json!(v))))
                .collect();
            summary.insert("helmholtz".into(), Value::Object(m));
        }
    }
    let v = Value::Object(summary);
    write_json(&out.join(SUMMARY), &v)?;
    Ok(v)
}
