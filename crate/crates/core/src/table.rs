//! Experiment output rows and their CSV/JSON serialization.

use std::cmp::Ordering;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::value::{fmt_f64, Extended};

/// Exact CSV header of every table written by the library.
pub const CSV_HEADER: [&str; 11] = [
    "experiment",
    "n",
    "beta",
    "t",
    "metric",
    "bound_type",
    "value",
    "mc_estimate",
    "mc_stderr",
    "replicas",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundType {
    Exact,
    Lower,
    Upper,
    /// A single simulated value (trajectory output), not a bound.
    Sample,
}

impl BoundType {
    pub fn name(self) -> &'static str {
        match self {
            BoundType::Exact => "exact",
            BoundType::Lower => "lower",
            BoundType::Upper => "upper",
            BoundType::Sample => "sample",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub experiment: String,
    pub n: usize,
    pub beta: f64,
    pub t: f64,
    pub metric: String,
    pub bound_type: BoundType,
    pub value: Extended,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub replicas: Option<usize>,
    pub seed: Option<u64>,
}

impl CurveRow {
    pub fn exact(experiment: &str, n: usize, beta: f64, t: f64, metric: &str, bound_type: BoundType, value: Extended) -> Self {
        CurveRow {
            experiment: experiment.to_string(),
            n,
            beta,
            t,
            metric: metric.to_string(),
            bound_type,
            value,
            mc_estimate: None,
            mc_stderr: None,
            replicas: None,
            seed: None,
        }
    }

    /// Attach a Monte Carlo estimate; estimate and standard error always come together.
    pub fn with_mc(mut self, estimate: f64, stderr: f64, replicas: usize, seed: u64) -> Self {
        self.mc_estimate = Some(estimate);
        self.mc_stderr = Some(stderr);
        self.replicas = Some(replicas);
        self.seed = Some(seed);
        self
    }

    fn fields(&self) -> [String; 11] {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        [
            self.experiment.clone(),
            self.n.to_string(),
            fmt_f64(self.beta),
            fmt_f64(self.t),
            self.metric.clone(),
            self.bound_type.name().to_string(),
            self.value.to_string(),
            opt(self.mc_estimate),
            opt(self.mc_stderr),
            self.replicas.map(|r| r.to_string()).unwrap_or_default(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
        ]
    }

    fn canonical_cmp(&self, o: &Self) -> Ordering {
        self.experiment
            .cmp(&o.experiment)
            .then(self.n.cmp(&o.n))
            .then(self.beta.total_cmp(&o.beta))
            .then(self.metric.cmp(&o.metric))
            .then(self.bound_type.cmp(&o.bound_type))
            .then(self.t.total_cmp(&o.t))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CurveTable {
    pub rows: Vec<CurveRow>,
}

impl CurveTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: CurveRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: CurveTable) {
        self.rows.extend(other.rows);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sort rows by (experiment, n, beta, metric, bound_type, t).
    pub fn sort_canonical(&mut self) {
        self.rows.sort_by(|a, b| a.canonical_cmp(b));
    }

    /// Rows matching a metric and bound type, in table order.
    pub fn select<'a>(&'a self, metric: &'a str, bound: BoundType) -> impl Iterator<Item = &'a CurveRow> + 'a {
        self.rows.iter().filter(move |r| r.metric == metric && r.bound_type == bound)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        wr.write_record(CSV_HEADER)?;
        for r in &self.rows {
            wr.write_record(r.fields())?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.rows).expect("rows serialize")
    }
}

fn parse_value(s: &str) -> bool {
    s == "inf" || s.parse::<f64>().map(|v| !v.is_nan()).unwrap_or(false)
}

/// Check a CSV document against the table schema. Returns the row count.
pub fn validate_csv(text: &str) -> Result<usize> {
    let bad = |line: usize, msg: &str| Error::DataQuality(format!("csv line {line}: {msg}"));
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut count = 0;
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| bad(i + 1, &e.to_string()))?;
        if i == 0 {
            let h: Vec<&str> = rec.iter().collect();
            if h != CSV_HEADER {
                return Err(bad(1, "header mismatch"));
            }
            continue;
        }
        let line = i + 1;
        if rec.len() != CSV_HEADER.len() {
            return Err(bad(line, "wrong field count"));
        }
        if rec[0].is_empty() {
            return Err(bad(line, "empty experiment"));
        }
        rec[1].parse::<usize>().map_err(|_| bad(line, "n is not an integer"))?;
        for (idx, name) in [(2, "beta"), (3, "t")] {
            if rec[idx].parse::<f64>().map(|v| !v.is_finite()).unwrap_or(true) {
                return Err(bad(line, &format!("{name} is not a finite number")));
            }
        }
        if rec[4].is_empty() {
            return Err(bad(line, "empty metric"));
        }
        if !["exact", "lower", "upper", "sample"].contains(&&rec[5]) {
            return Err(bad(line, "unknown bound_type"));
        }
        if !parse_value(&rec[6]) {
            return Err(bad(line, "value is not numeric"));
        }
        let est = &rec[7];
        let se = &rec[8];
        if est.is_empty() != se.is_empty() {
            return Err(bad(line, "mc_estimate and mc_stderr must be present together"));
        }
        if !est.is_empty() && !(parse_value(est) && parse_value(se)) {
            return Err(bad(line, "mc fields are not numeric"));
        }
        if !rec[9].is_empty() {
            rec[9].parse::<usize>().map_err(|_| bad(line, "replicas is not an integer"))?;
        }
        if !rec[10].is_empty() {
            rec[10].parse::<u64>().map_err(|_| bad(line, "seed is not an integer"))?;
        }
        count += 1;
    }
    if count == 0 && text.trim().is_empty() {
        return Err(bad(1, "missing header"));
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = CurveTable::new();
        let s = t.to_csv_string();
        assert_eq!(s, format!("{}\n", CSV_HEADER.join(",")));
        assert_eq!(validate_csv(&s).unwrap(), 0);
    }

    #[test]
    fn optional_fields_are_empty_strings() {
        let mut t = CurveTable::new();
        t.push(CurveRow::exact("e", 3, 0.0, 0.5, "kullback", BoundType::Exact, Extended::Finite(0.25)));
        t.push(CurveRow::exact("e", 3, 0.0, 0.5, "chi2", BoundType::Exact, Extended::Infinite).with_mc(1.5, 0.1, 10, 7));
        let s = t.to_csv_string();
        assert!(s.contains("e,3,0,0.5,kullback,exact,0.25,,,,\n"));
        assert!(s.contains("e,3,0,0.5,chi2,exact,inf,1.5,0.1,10,7\n"));
        assert_eq!(validate_csv(&s).unwrap(), 2);
    }

    #[test]
    fn validator_rejects_half_mc_pair() {
        let s = format!("{}\ne,1,0,0,tv,lower,0.1,0.2,,,\n", CSV_HEADER.join(","));
        assert!(validate_csv(&s).is_err());
    }
}
