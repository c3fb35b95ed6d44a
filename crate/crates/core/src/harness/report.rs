//! Summary and trace CSV files.

use std::path::Path;

use super::HarnessError;
use crate::simulation::RoundTrace;

pub const SUMMARY_HEADER: [&str; 10] =
    ["axis", "value", "replication", "RT", "RT_sw", "RT_dev", "bound", "relative", "stderr", "seed"];

/// One replication of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub axis: String,
    pub value: f64,
    pub replication: u64,
    pub rt: f64,
    pub rt_sw: f64,
    pub rt_dev: f64,
    pub bound: f64,
    pub relative: f64,
    /// Standard error of `rt` across the replications of this point.
    pub stderr: f64,
    pub seed: u64,
}

impl SummaryRow {
    /// Field-wise equality that treats identical NaN bit patterns as equal.
    pub fn same_bits(&self, other: &Self) -> bool {
        let f = |a: f64, b: f64| a.to_bits() == b.to_bits();
        self.axis == other.axis
            && self.replication == other.replication
            && self.seed == other.seed
            && f(self.value, other.value)
            && f(self.rt, other.rt)
            && f(self.rt_sw, other.rt_sw)
            && f(self.rt_dev, other.rt_dev)
            && f(self.bound, other.bound)
            && f(self.relative, other.relative)
            && f(self.stderr, other.stderr)
    }
}

/// Formats with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn parse_f64(field: &str, what: &str) -> Result<f64, HarnessError> {
    field.parse().map_err(|_| HarnessError::Config(format!("bad {what} value {field:?}")))
}

/// Writes rows sorted by `(value, replication)`.
pub fn emit_csv(rows: &[SummaryRow], path: &Path) -> Result<(), HarnessError> {
    let mut sorted: Vec<&SummaryRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.replication.cmp(&b.replication)));
    let mut w = csv::Writer::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    w.write_record(SUMMARY_HEADER).map_err(|e| HarnessError::csv(path, e))?;
    for r in sorted {
        w.write_record([
            r.axis.clone(),
            fmt_f64(r.value),
            r.replication.to_string(),
            fmt_f64(r.rt),
            fmt_f64(r.rt_sw),
            fmt_f64(r.rt_dev),
            fmt_f64(r.bound),
            fmt_f64(r.relative),
            fmt_f64(r.stderr),
            r.seed.to_string(),
        ])
        .map_err(|e| HarnessError::csv(path, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Parses a summary CSV written by [`emit_csv`].
pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>, HarnessError> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
    let header = rd.headers().map_err(|e| HarnessError::csv(path, e))?.clone();
    if header.iter().ne(SUMMARY_HEADER) {
        return Err(HarnessError::Config(format!("{}: unexpected header {header:?}", path.display())));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| HarnessError::csv(path, e))?;
        let u = |i: usize| rec[i].parse::<u64>().map_err(|_| HarnessError::Config(format!("bad integer {:?}", &rec[i])));
        out.push(SummaryRow {
            axis: rec[0].to_string(),
            value: parse_f64(&rec[1], "value")?,
            replication: u(2)?,
            rt: parse_f64(&rec[3], "RT")?,
            rt_sw: parse_f64(&rec[4], "RT_sw")?,
            rt_dev: parse_f64(&rec[5], "RT_dev")?,
            bound: parse_f64(&rec[6], "bound")?,
            relative: parse_f64(&rec[7], "relative")?,
            stderr: parse_f64(&rec[8], "stderr")?,
            seed: u(9)?,
        });
    }
    Ok(out)
}

pub const TRACE_HEADER: [&str; 7] =
    ["replication", "t", "phase", "ranking", "clicked", "expected_revenue", "realized_revenue"];

/// Streaming writer for per-round traces.
pub struct TraceWriter {
    inner: csv::Writer<std::fs::File>,
    path: std::path::PathBuf,
    n_slots: usize,
}

impl TraceWriter {
    pub fn create(path: &Path, n_slots: usize) -> Result<Self, HarnessError> {
        let mut inner = csv::Writer::from_path(path).map_err(|e| HarnessError::csv(path, e))?;
        inner.write_record(TRACE_HEADER).map_err(|e| HarnessError::csv(path, e))?;
        Ok(Self { inner, path: path.to_path_buf(), n_slots })
    }

    pub fn write(&mut self, replication: u64, trace: &RoundTrace) -> Result<(), HarnessError> {
        let ranking: Vec<String> = trace.allocation.ranking()[..self.n_slots].iter().map(|a| a.to_string()).collect();
        let clicked: String = trace.clicks.clicked.iter().map(|&c| if c { '1' } else { '0' }).collect();
        let phase = match trace.phase {
            crate::mechanisms::Phase::Exploration => "explore",
            crate::mechanisms::Phase::Exploitation => "exploit",
        };
        self.inner
            .write_record([
                replication.to_string(),
                trace.t.to_string(),
                phase.to_string(),
                ranking.join(" "),
                clicked,
                fmt_f64(trace.expected_payments.iter().sum()),
                fmt_f64(trace.realized_payments.iter().sum()),
            ])
            .map_err(|e| HarnessError::csv(&self.path, e))
    }

    pub fn finish(mut self) -> Result<(), HarnessError> {
        self.inner.flush().map_err(|e| HarnessError::io(&self.path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 665.476_123_456_789, 1e-300, -2.5e17, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert!(fmt_f64(f64::NAN).parse::<f64>().unwrap().is_nan());
        assert_eq!(fmt_f64(0.25), "2.5000000000000000e-1");
    }
}
