use std::fmt;
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    Korn,
    Extension,
    Trace,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inequality::Korn => "korn",
            Inequality::Extension => "extension",
            Inequality::Trace => "trace",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub n: usize,
    pub constant: f64,
    pub residual: f64,
}

/// Constants of one inequality over several (ε, resolution) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantSweep {
    pub inequality: Inequality,
    pub geometry_hash: String,
    pub rows: Vec<SweepRow>,
}

impl ConstantSweep {
    pub const HEADER: &'static str = "inequality,eps,n,constant,residual";

    pub fn write_rows(&self, out: &mut impl Write) -> std::io::Result<()> {
        for r in &self.rows {
            writeln!(out, "{},{:.12e},{},{:.12e},{:.6e}", self.inequality, r.eps, r.n, r.constant, r.residual)?;
        }
        Ok(())
    }

    /// Largest over smallest constant.
    pub fn spread(&self) -> f64 {
        let max = self.rows.iter().map(|r| r.constant).fold(f64::NEG_INFINITY, f64::max);
        let min = self.rows.iter().map(|r| r.constant).fold(f64::INFINITY, f64::min);
        max / min
    }
}
