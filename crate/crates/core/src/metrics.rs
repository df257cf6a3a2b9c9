//! Per-evaluation training metrics and their CSV form.

use std::io::Write;

use crate::error::Result;

pub const METRICS_HEADER: &str =
    "epoch,nll,energy,energy_stderr,epsilon,infidelity,frac_out_sector,seconds";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub epoch: usize,
    /// Training-set NLL.
    pub nll_train: Option<f64>,
    pub energy: f64,
    pub energy_stderr: f64,
    pub epsilon: f64,
    pub infidelity: Option<f64>,
    pub frac_out_of_sector: f64,
    pub wall_seconds: Option<f64>,
}

impl MetricsRecord {
    pub fn csv_row(&self) -> String {
        fn opt(x: Option<f64>) -> String {
            x.map(|v| v.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{}",
            self.epoch,
            opt(self.nll_train),
            self.energy,
            self.energy_stderr,
            self.epsilon,
            opt(self.infidelity),
            self.frac_out_of_sector,
            opt(self.wall_seconds),
        )
    }
}

/// Receives metrics and scheduled checkpoints while a model trains.
pub trait TrainingSink<P> {
    fn record(&mut self, metrics: &MetricsRecord) -> Result<()>;

    fn checkpoint(&mut self, _epoch: usize, _params: &P) -> Result<()> {
        Ok(())
    }
}

impl<P> TrainingSink<P> for Vec<MetricsRecord> {
    fn record(&mut self, metrics: &MetricsRecord) -> Result<()> {
        self.push(metrics.clone());
        Ok(())
    }
}

/// Streams metrics rows to a writer, header first.
pub struct CsvMetricsWriter<W: Write> {
    out: W,
}

impl<W: Write> CsvMetricsWriter<W> {
    pub fn new(mut out: W) -> Result<Self> {
        writeln!(out, "{METRICS_HEADER}")?;
        Ok(Self { out })
    }

    pub fn write(&mut self, m: &MetricsRecord) -> Result<()> {
        writeln!(self.out, "{}", m.csv_row())?;
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_values_are_empty() {
        let m = MetricsRecord {
            epoch: 3,
            nll_train: None,
            energy: -1.5,
            energy_stderr: 0.25,
            epsilon: 0.125,
            infidelity: None,
            frac_out_of_sector: 0.0,
            wall_seconds: None,
        };
        assert_eq!(m.csv_row(), "3,,-1.5,0.25,0.125,,0,");
        let mut w = CsvMetricsWriter::new(Vec::new()).unwrap();
        w.write(&m).unwrap();
        let text = String::from_utf8(w.into_inner()).unwrap();
        assert_eq!(text, format!("{METRICS_HEADER}\n3,,-1.5,0.25,0.125,,0,\n"));
    }
}
