//! JSON documents and long-format `series,x,y` CSV for each command.

use std::io::Write;
use std::path::Path;

use ghost_slopes::suites::{Metric, SuiteReport, SweepConfig};
use ghost_slopes::{GhostCoefficient, GhostContext, NewtonPolygon, Rat, Tally, WeightPoint};
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;
use crate::Format;

pub trait Report {
    fn json(&self) -> Result<Value, CliError>;
    fn rows(&self) -> Vec<[String; 3]>;
}

pub struct Rendered {
    json: Value,
    rows: Vec<[String; 3]>,
    code: u8,
}

impl Rendered {
    fn build(report: impl Report, code: u8) -> Self {
        // Serializing our own report types cannot fail; keep the error path
        // anyway so a bug surfaces as output rather than a panic.
        let json = report.json().unwrap_or_else(|e| Value::String(e.to_string()));
        Rendered { json, rows: report.rows(), code }
    }

    pub fn ok(report: impl Report) -> Self {
        Self::build(report, 0)
    }

    pub fn counterexample(report: impl Report) -> Self {
        Self::build(report, 1)
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> Result<(), CliError> {
        let mut bytes = Vec::new();
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut bytes, &self.json)?;
                bytes.push(b'\n');
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut bytes);
                w.write_record(["series", "x", "y"])?;
                for row in &self.rows {
                    w.write_record(row)?;
                }
                w.flush()?;
            }
        }
        match out {
            Some(path) => std::fs::write(path, bytes)?,
            None => std::io::stdout().lock().write_all(&bytes)?,
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Zero {
    k: i64,
    mult: u32,
}

#[derive(Serialize)]
pub struct CoeffReport {
    p: i64,
    a: i64,
    b: i64,
    s_eps: i64,
    n: u64,
    degree: u64,
    zeros: Vec<Zero>,
}

impl CoeffReport {
    pub fn new(ctx: &GhostContext, g: GhostCoefficient) -> Self {
        CoeffReport {
            p: ctx.p(),
            a: ctx.a(),
            b: ctx.b(),
            s_eps: ctx.s(),
            n: g.n,
            degree: g.degree,
            zeros: g.zeros.into_iter().map(|(k, mult)| Zero { k, mult }).collect(),
        }
    }
}

impl Report for CoeffReport {
    fn json(&self) -> Result<Value, CliError> {
        Ok(serde_json::to_value(self)?)
    }

    fn rows(&self) -> Vec<[String; 3]> {
        self.zeros
            .iter()
            .map(|z| ["zero".to_string(), z.k.to_string(), z.mult.to_string()])
            .collect()
    }
}

#[derive(Serialize)]
pub struct NpReport {
    p: i64,
    a: i64,
    b: i64,
    s_eps: i64,
    center: i64,
    radius: Rat,
    count: usize,
    vertices: NewtonPolygon,
    slopes: Vec<Rat>,
}

impl NpReport {
    pub fn new(ctx: &GhostContext, w: &WeightPoint, count: usize, polygon: &NewtonPolygon) -> Self {
        NpReport {
            p: ctx.p(),
            a: ctx.a(),
            b: ctx.b(),
            s_eps: ctx.s(),
            center: w.center(),
            radius: w.radius().clone(),
            count,
            vertices: polygon.clone(),
            slopes: polygon.slopes().into_iter().map(Rat::Finite).collect(),
        }
    }
}

impl Report for NpReport {
    fn json(&self) -> Result<Value, CliError> {
        Ok(serde_json::to_value(self)?)
    }

    fn rows(&self) -> Vec<[String; 3]> {
        let vertices = self
            .vertices
            .vertices()
            .iter()
            .map(|(x, y)| ["vertex".to_string(), x.to_string(), Rat::Finite(y.clone()).to_string()]);
        let slopes = self
            .slopes
            .iter()
            .enumerate()
            .map(|(i, s)| ["slope".to_string(), (i + 1).to_string(), s.to_string()]);
        vertices.chain(slopes).collect()
    }
}

#[derive(Serialize)]
pub struct VerifyReport {
    suite: String,
    status: &'static str,
    config: SweepConfig,
    #[serde(flatten)]
    tally: Tally,
    metrics: Vec<Metric>,
}

impl VerifyReport {
    pub fn new(cfg: &SweepConfig, report: SuiteReport) -> Self {
        VerifyReport {
            suite: report.suite.to_string(),
            status: if report.tally.ok() { "pass" } else { "fail" },
            config: cfg.clone(),
            tally: report.tally,
            metrics: report.metrics,
        }
    }
}

impl Report for VerifyReport {
    fn json(&self) -> Result<Value, CliError> {
        Ok(serde_json::to_value(self)?)
    }

    /// Metrics become one series per local datum, indexed by the last key
    /// entry; the tally follows as `tally` rows.
    fn rows(&self) -> Vec<[String; 3]> {
        let mut rows: Vec<[String; 3]> = self
            .metrics
            .iter()
            .map(|m| {
                let (x, head) = m.key.split_last().map(|(x, h)| (x.to_string(), h)).unwrap_or_default();
                let tag: Vec<String> = head.iter().map(i64::to_string).collect();
                [format!("{}[{}]", m.series, tag.join(";")), x, m.value.to_string()]
            })
            .collect();
        for (name, count) in [
            ("passed", self.tally.passed),
            ("inapplicable", self.tally.inapplicable),
            ("failed", self.tally.failed),
        ] {
            rows.push(["tally".to_string(), name.to_string(), count.to_string()]);
        }
        rows
    }
}
