//! Chain traces and their CSV representation.
//!
//! Schema: `iter,accepted,flipped,resampled,z_0,...,z_{d-1}`, one row per
//! post-burn-in iteration, flags as 0/1, floats in shortest round-trip form.
//! Writing the same trace twice produces byte-identical files.

use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Ordered record of a chain: states plus per-step bookkeeping flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    dim: usize,
    /// Row-major `[iteration][coordinate]`.
    states: Vec<f64>,
    accepted: Vec<bool>,
    flipped: Vec<bool>,
    resampled: Vec<bool>,
    /// Absolute iteration index of the first recorded row.
    first_iter: u64,
    /// RNG seed that produced the trace, when known.
    seed: Option<u64>,
}

impl ChainTrace {
    pub fn new(dim: usize, seed: Option<u64>, first_iter: u64) -> Self {
        ChainTrace {
            dim,
            states: Vec::new(),
            accepted: Vec::new(),
            flipped: Vec::new(),
            resampled: Vec::new(),
            first_iter,
            seed,
        }
    }

    pub fn with_capacity(dim: usize, seed: Option<u64>, first_iter: u64, rows: usize) -> Self {
        let mut t = ChainTrace::new(dim, seed, first_iter);
        t.states.reserve(rows * dim);
        t.accepted.reserve(rows);
        t.flipped.reserve(rows);
        t.resampled.reserve(rows);
        t
    }

    pub fn push(&mut self, state: &[f64], accepted: bool, flipped: bool, resampled: bool) {
        debug_assert_eq!(state.len(), self.dim);
        self.states.extend_from_slice(state);
        self.accepted.push(accepted);
        self.flipped.push(flipped);
        self.resampled.push(resampled);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.accepted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepted.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }

    pub fn accepted(&self) -> &[bool] {
        &self.accepted
    }

    pub fn flipped(&self) -> &[bool] {
        &self.flipped
    }

    pub fn resampled(&self) -> &[bool] {
        &self.resampled
    }

    /// Copy of one coordinate as a contiguous series.
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        assert!(j < self.dim, "coordinate {j} out of range for dim {}", self.dim);
        self.states.iter().skip(j).step_by(self.dim).cloned().collect()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.accepted.is_empty() {
            return 0.0;
        }
        self.accepted.iter().filter(|&&a| a).count() as f64 / self.accepted.len() as f64
    }

    /// Per-coordinate sample mean.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.len().max(1) as f64;
        let mut m = vec![0.0; self.dim];
        for row in self.states() {
            for (acc, &x) in m.iter_mut().zip(row) {
                *acc += x;
            }
        }
        m.iter_mut().for_each(|x| *x /= n);
        m
    }

    /// Per-coordinate sample variance (denominator N−1).
    pub fn variance(&self) -> Vec<f64> {
        let n = self.len() as f64;
        let m = self.mean();
        let mut v = vec![0.0; self.dim];
        for row in self.states() {
            for ((acc, &mu), &x) in v.iter_mut().zip(&m).zip(row) {
                *acc += (x - mu) * (x - mu);
            }
        }
        v.iter_mut().for_each(|x| *x /= (n - 1.0).max(1.0));
        v
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = BufWriter::new(writer);
        write!(w, "iter,accepted,flipped,resampled")?;
        for j in 0..self.dim {
            write!(w, ",z_{j}")?;
        }
        writeln!(w)?;
        for i in 0..self.len() {
            write!(
                w,
                "{},{},{},{}",
                self.first_iter + i as u64,
                u8::from(self.accepted[i]),
                u8::from(self.flipped[i]),
                u8::from(self.resampled[i])
            )?;
            for &x in self.state(i) {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty trace file".to_string()))??;
        let cols: Vec<&str> = header.trim_end().split(',').collect();
        let fixed = ["iter", "accepted", "flipped", "resampled"];
        if cols.len() < fixed.len() + 1 {
            return Err(Error::parse(
                1,
                format!("header has {} columns, expected at least 5", cols.len()),
            ));
        }
        for (want, got) in fixed.iter().zip(&cols) {
            if want != got {
                return Err(Error::parse(
                    1,
                    format!("header mismatch: expected column '{want}', found '{got}'"),
                ));
            }
        }
        let dim = cols.len() - fixed.len();
        for (j, got) in cols[fixed.len()..].iter().enumerate() {
            let want = format!("z_{j}");
            if *got != want {
                return Err(Error::parse(
                    1,
                    format!("header mismatch: expected column '{want}', found '{got}'"),
                ));
            }
        }

        let mut trace = ChainTrace::new(dim, None, 0);
        let mut first = true;
        let mut last_good = 1usize;
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim_end().split(',').collect();
            if fields.len() != cols.len() {
                return Err(Error::parse(
                    line_no,
                    format!(
                        "expected {} fields, found {} (last good row at line {last_good})",
                        cols.len(),
                        fields.len()
                    ),
                ));
            }
            let iter_idx: u64 = fields[0].parse().map_err(|_| {
                Error::parse(line_no, format!("bad iteration index '{}'", fields[0]))
            })?;
            if first {
                trace.first_iter = iter_idx;
                first = false;
            }
            let mut flags = [false; 3];
            for (k, f) in flags.iter_mut().enumerate() {
                *f = match fields[k + 1] {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(Error::parse(
                            line_no,
                            format!("bad flag value '{other}' in column {}", fixed[k + 1]),
                        ))
                    }
                };
            }
            let mut row = Vec::with_capacity(dim);
            for (j, raw) in fields[4..].iter().enumerate() {
                let v: f64 = raw.parse().map_err(|_| {
                    Error::parse(line_no, format!("bad value '{raw}' in column z_{j}"))
                })?;
                row.push(v);
            }
            trace.push(&row, flags[0], flags[1], flags[2]);
            last_good = line_no;
        }
        if trace.is_empty() {
            return Err(Error::parse(1, "trace has a header but no rows".to_string()));
        }
        Ok(trace)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        ChainTrace::read_csv(std::fs::File::open(path)?)
    }
}
