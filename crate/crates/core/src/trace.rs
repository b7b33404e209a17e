//! Per-iteration records and their CSV form.

use std::fmt::Write as _;
use std::path::Path;

use crate::linalg::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    /// Columns `k,i_k,alpha_k,err,obj,staleness`.
    Primal,
    /// Columns `k,residual,lambda_err,alpha_k,i_k,staleness`.
    Dual,
    /// Primal columns plus `mu_min,x_min`.
    Positive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    /// Component selected to produce this iterate; `None` for the start point
    /// and for full-batch steps.
    pub index: Option<usize>,
    pub alpha: Option<f64>,
    /// Distance to the reference solution (`‖x_k − x*‖` or `‖λ_k − λ*‖`).
    pub err: Option<f64>,
    /// Objective value, or the constraint residual norm for dual methods.
    pub obj: f64,
    /// Largest `k − ℓ_i` over the table used to produce this iterate.
    pub staleness: usize,
    pub mu_min: Option<f64>,
    pub x_min: Option<f64>,
}

impl TraceRow {
    pub fn initial(err: Option<f64>, obj: f64) -> Self {
        Self {
            k: 0,
            index: None,
            alpha: None,
            err,
            obj,
            staleness: 0,
            mu_min: None,
            x_min: None,
        }
    }
}

/// Record of a run: one row per iterate including the start point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub kind: TraceKind,
    pub rows: Vec<TraceRow>,
    /// Iterates `x_0, x_1, …` when recording was requested.
    pub iterates: Vec<Vector>,
    /// Table stamps in force at each step, when recording was requested.
    pub stamps: Vec<Vec<usize>>,
    /// Gradient (or block) evaluations spent.
    pub evaluations: usize,
}

impl Trace {
    pub fn new(kind: TraceKind) -> Self {
        Self {
            kind,
            rows: Vec::new(),
            iterates: Vec::new(),
            stamps: Vec::new(),
            evaluations: 0,
        }
    }

    /// Number of completed iterations.
    pub fn iterations(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Error column with missing values as NaN.
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.err.unwrap_or(f64::NAN)).collect()
    }

    pub fn max_staleness(&self) -> usize {
        self.rows.iter().map(|r| r.staleness).max().unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.kind {
            TraceKind::Primal => "k,i_k,alpha_k,err,obj,staleness\n",
            TraceKind::Dual => "k,residual,lambda_err,alpha_k,i_k,staleness\n",
            TraceKind::Positive => "k,i_k,alpha_k,err,obj,staleness,mu_min,x_min\n",
        });
        for r in &self.rows {
            let idx = r.index.map(|i| i.to_string()).unwrap_or_default();
            let _ = match self.kind {
                TraceKind::Primal => writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.k,
                    idx,
                    float(r.alpha),
                    float(r.err),
                    float(Some(r.obj)),
                    r.staleness
                ),
                TraceKind::Dual => writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.k,
                    float(Some(r.obj)),
                    float(r.err),
                    float(r.alpha),
                    idx,
                    r.staleness
                ),
                TraceKind::Positive => writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    r.k,
                    idx,
                    float(r.alpha),
                    float(r.err),
                    float(Some(r.obj)),
                    r.staleness,
                    float(r.mu_min),
                    float(r.x_min)
                ),
            };
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

// 17 significant digits so files replay bit-for-bit.
fn float(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.16e}"),
        None => String::new(),
    }
}
