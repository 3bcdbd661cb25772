//! Per-iteration traces of the energy, the CPS quantity and norm growth.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::State;
use crate::error::{invalid, Error, Result};
use crate::mesh::{norm_linf, Mesh};

pub const TRACE_HEADER: &str = "iter,J,cps,wu,wv,lu,lv,step";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    #[serde(rename = "J")]
    pub energy: f64,
    pub cps: f64,
    pub wu: f64,
    pub wv: f64,
    pub lu: f64,
    pub lv: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CpsTrace {
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinfVerdict {
    pub pass: bool,
    pub max: f64,
    /// First row above the threshold.
    pub row: Option<usize>,
}

#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub final_J: f64,
    pub final_cps: f64,
    pub iters: usize,
    pub linf_max: f64,
}

impl CpsTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Appends a row for `state`, numbered one past the previous row.
    pub fn record(&mut self, mesh: &Mesh, state: &State, energy: f64, cps: f64, step: f64) {
        let (wu, wv) = state.norms_w(mesh);
        let iter = self.rows.last().map_or(0, |r| r.iter + 1);
        self.rows.push(TraceRow {
            iter,
            energy,
            cps,
            wu,
            wv,
            lu: norm_linf(&state.u),
            lv: norm_linf(&state.v),
            step,
        });
    }

    pub fn push(&mut self, row: TraceRow) -> Result<()> {
        if let Some(prev) = self.rows.last() {
            if row.iter <= prev.iter {
                return Err(invalid(format!(
                    "trace index {} does not follow {}",
                    row.iter, prev.iter
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn linf_monitor(&self, threshold: f64) -> LinfVerdict {
        let mut max = 0.0f64;
        let mut row = None;
        for (i, r) in self.rows.iter().enumerate() {
            let m = r.lu.max(r.lv);
            if (!(m <= threshold)) && row.is_none() {
                row = Some(i);
            }
            max = max.max(m);
        }
        LinfVerdict {
            pass: row.is_none(),
            max,
            row,
        }
    }

    pub fn summary(&self) -> TraceSummary {
        let last = self.rows.last();
        TraceSummary {
            final_J: last.map_or(f64::NAN, |r| r.energy),
            final_cps: last.map_or(f64::NAN, |r| r.cps),
            iters: self.rows.len().saturating_sub(1),
            linf_max: self.linf_monitor(f64::INFINITY).max,
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.iter, r.energy, r.cps, r.wu, r.wv, r.lu, r.lv, r.step
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim() != TRACE_HEADER {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header {TRACE_HEADER:?}"),
            });
        }
        let mut trace = CpsTrace::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: i + 2, msg };
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 8 {
                return Err(bad(format!("expected 8 columns, got {}", cols.len())));
            }
            let iter = cols[0]
                .parse()
                .map_err(|e| bad(format!("iteration index: {e}")))?;
            let mut vals = [0.0; 7];
            for (v, c) in vals.iter_mut().zip(&cols[1..]) {
                *v = c.parse().map_err(|e| bad(format!("{c:?}: {e}")))?;
            }
            trace
                .push(TraceRow {
                    iter,
                    energy: vals[0],
                    cps: vals[1],
                    wu: vals[2],
                    wv: vals[3],
                    lu: vals[4],
                    lv: vals[5],
                    step: vals[6],
                })
                .map_err(|e| bad(e.to_string()))?;
        }
        Ok(trace)
    }

    pub fn export(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        write_atomic(path, &buf)
    }

    pub fn import(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// Writes through a sibling temporary file and renames it into place.
/// Missing parent directories are created.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| invalid(format!("{} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
