//! Flat result rows and their CSV form.

use std::io::Write;

use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "experiment,n,N,trial,seed,metric,value";

/// One metric of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub trial: usize,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

impl ResultRow {
    pub fn new(experiment: &str, n: usize, big_n: usize, trial: usize, seed: u64, metric: &str, value: f64) -> Self {
        Self {
            experiment: experiment.to_string(),
            n,
            big_n,
            trial,
            seed,
            metric: metric.to_string(),
            value,
        }
    }
}

/// 17 significant digits, enough to round-trip every `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

pub fn write_csv<W: Write>(mut w: W, rows: &[ResultRow]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.experiment,
            r.n,
            r.big_n,
            r.trial,
            r.seed,
            r.metric,
            format_float(r.value)
        )?;
    }
    w.flush()
}

pub fn to_csv_string(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Values of `metric` across rows.
pub fn metric_values<'a>(rows: &'a [ResultRow], metric: &'a str) -> impl Iterator<Item = &'a ResultRow> {
    rows.iter().filter(move |r| r.metric == metric)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456789.12345679, -2.5e17, 0.0] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn csv_layout() {
        let rows = vec![ResultRow::new("scaling", 4, 16, 0, 7, "error", 0.5)];
        assert_eq!(
            to_csv_string(&rows),
            "experiment,n,N,trial,seed,metric,value\nscaling,4,16,0,7,error,5.0000000000000000e-1\n"
        );
    }
}
