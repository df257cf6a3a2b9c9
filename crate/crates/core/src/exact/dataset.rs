//! Measurement datasets and their text format.
//!
//! One sample per line, `N` space-separated `0`/`1` characters. Lines starting
//! with `#` are comments; blank lines are ignored.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng as _;

use super::GroundState;
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::spin::SpinConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    samples: Vec<SpinConfig>,
    /// 1-based source line of each sample when read from a file.
    source_lines: Vec<usize>,
}

impl Dataset {
    pub fn new(n: usize, samples: Vec<SpinConfig>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("dataset is empty".into()));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("dataset has zero sites".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "sample {i} has {} sites, expected {n}",
                    s.len()
                )));
            }
            if s.iter().any(|&x| x > 1) {
                return Err(Error::InvalidArgument(format!("sample {i} is not binary")));
            }
        }
        Ok(Self {
            n,
            samples,
            source_lines: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[SpinConfig] {
        &self.samples
    }

    /// Source line of sample `index`, if the dataset was parsed from text.
    pub fn source_line(&self, index: usize) -> Option<usize> {
        self.source_lines.get(index).copied()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut samples = Vec::new();
        let mut lines = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| match tok {
                    "0" => Ok(0u8),
                    "1" => Ok(1u8),
                    other => Err(Error::Parse(format!(
                        "line {}: unexpected token {other:?}",
                        lineno + 1
                    ))),
                })
                .collect::<Result<Vec<u8>>>()?;
            match n {
                None => n = Some(row.len()),
                Some(width) if width != row.len() => {
                    return Err(Error::Parse(format!(
                        "line {}: {} sites, expected {width}",
                        lineno + 1,
                        row.len()
                    )))
                }
                _ => {}
            }
            samples.push(row);
            lines.push(lineno + 1);
        }
        let n = n.ok_or_else(|| Error::Parse("no samples found".into()))?;
        let mut ds = Self::new(n, samples)?;
        ds.source_lines = lines;
        Ok(ds)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let mut line = String::with_capacity(2 * self.n);
        for s in &self.samples {
            line.clear();
            for (i, &x) in s.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                line.push(if x == 0 { '0' } else { '1' });
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

/// `m` independent draws from `q(σ) = ψ_GS(σ)²` by inverse CDF over the
/// sector basis.
pub fn sample_dataset(gs: &GroundState, m: usize, rng: &mut Rng) -> Result<Dataset> {
    if m == 0 {
        return Err(Error::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    let mut cdf = Vec::with_capacity(gs.amplitudes.len());
    let mut acc = 0.0;
    for a in &gs.amplitudes {
        acc += a * a;
        cdf.push(acc);
    }
    let total = acc;
    let last = cdf.len() - 1;
    let samples = (0..m)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(last);
            gs.basis.config(idx)
        })
        .collect();
    Dataset::new(gs.chain.n, samples)
}
