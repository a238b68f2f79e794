//! Report assembly and file output. Every float is written with 17
//! significant digits so that reruns compare byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use holonomy_core::CMatrix64;
use serde::Serialize;
use serde_json::ser::Formatter;

use crate::CliError;

pub const SUMMARY_FILE: &str = "summary.txt";
pub const MATRICES_FILE: &str = "matrices.json";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const COMPILE_FILE: &str = "compile.json";

pub const SWEEP_HEADER: [&str; 8] = ["model", "loop_id", "T", "M", "K", "residual", "leakage", "ratio"];

pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedMatrix {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// Row-major `[re, im]` pairs.
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl NamedMatrix {
    pub fn new(name: impl Into<String>, m: &CMatrix64) -> Self {
        Self {
            name: name.into(),
            rows: m.nrows(),
            cols: m.ncols(),
            entries: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub loop_id: String,
    pub total_time: f64,
    pub steps: usize,
    pub k: usize,
    pub residual: f64,
    pub leakage: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TracePoint {
    pub length: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompileReport {
    pub target_phases: Vec<f64>,
    pub max_len: usize,
    pub word: Vec<i8>,
    pub word_text: String,
    pub distance: f64,
    pub explored: usize,
    pub trace: Vec<TracePoint>,
    /// Distance between the cached product and the word's composite loop;
    /// absent when the search stopped on its budget.
    pub recheck: Option<f64>,
    pub budget_exceeded: bool,
}

/// One assertion from the scenario's `[assert]` table.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub observed: String,
    pub expected: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            observed: sci(value),
            expected: format!("<= {}", sci(bound)),
            pass: value <= bound,
        }
    }

    pub fn equals<T: PartialEq + std::fmt::Display>(name: impl Into<String>, value: T, want: T) -> Self {
        Self {
            name: name.into(),
            observed: value.to_string(),
            expected: format!("== {want}"),
            pass: value == want,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct MatricesFile<'a> {
    experiment: &'a str,
    model: &'a str,
    matrices: &'a [NamedMatrix],
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub experiment: String,
    pub model: String,
    /// `(key, value)` lines for the summary.
    pub lines: Vec<(String, String)>,
    pub matrices: Vec<NamedMatrix>,
    pub sweep: Option<Vec<SweepRow>>,
    pub compile: Option<CompileReport>,
    pub checks: Vec<Check>,
    pub budget_error: Option<String>,
}

impl Report {
    pub fn new(experiment: &str, model: &str) -> Self {
        Self {
            experiment: experiment.into(),
            model: model.into(),
            ..Self::default()
        }
    }

    pub fn line(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.lines.push((key.into(), value.into()));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {}", self.experiment);
        let _ = writeln!(s, "model: {}", self.model);
        for (k, v) in &self.lines {
            let _ = writeln!(s, "{k}: {v}");
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "assert {} {}: {} (expected {})",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.observed,
                c.expected
            );
        }
        if let Some(e) = &self.budget_error {
            let _ = writeln!(s, "budget: {e}");
        }
        let _ = writeln!(s, "status: {}", if self.passed() && self.budget_error.is_none() { "ok" } else { "failed" });
        s
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let io_err = |e: io::Error| CliError::Output(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir).map_err(io_err)?;
        fs::write(dir.join(SUMMARY_FILE), self.summary()).map_err(io_err)?;
        let matrices = MatricesFile {
            experiment: &self.experiment,
            model: &self.model,
            matrices: &self.matrices,
        };
        fs::write(dir.join(MATRICES_FILE), to_json(&matrices)?).map_err(io_err)?;
        if let Some(rows) = &self.sweep {
            write_sweep(&dir.join(SWEEP_FILE), &self.model, rows)?;
        }
        if let Some(c) = &self.compile {
            fs::write(dir.join(COMPILE_FILE), to_json(c)?).map_err(io_err)?;
        }
        Ok(())
    }
}

/// Compact JSON whose floats use the 17-digit scientific form.
struct SciFormatter;

impl Formatter for SciFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{}", sci(value))
        } else {
            writer.write_all(b"null")
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Output(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

fn write_sweep(path: &Path, model: &str, rows: &[SweepRow]) -> Result<(), CliError> {
    let err = |e: csv::Error| CliError::Output(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(err)?;
    w.write_record(SWEEP_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            model.to_string(),
            r.loop_id.clone(),
            sci(r.total_time),
            r.steps.to_string(),
            r.k.to_string(),
            sci(r.residual),
            sci(r.leakage),
            sci(r.ratio),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}
