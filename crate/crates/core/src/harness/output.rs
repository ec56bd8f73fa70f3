//! Result rows and their CSV form.

use std::io::Write;

use crate::metrics::RateEstimate;
use crate::Result;

pub const CSV_HEADER: [&str; 9] = [
    "scenario_id",
    "snr_db",
    "metric",
    "value",
    "ci_low",
    "ci_high",
    "samples",
    "seed",
    "note",
];

/// One measured or computed quantity at one operating point.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub scenario_id: String,
    pub snr_db: f64,
    pub metric: String,
    pub value: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub samples: u64,
    pub seed: u64,
    /// Free text, e.g. grid coordinates or a budget warning.
    pub note: String,
}

impl ResultRow {
    pub fn point(scenario_id: &str, snr_db: f64, metric: &str, value: f64, samples: u64, seed: u64) -> Self {
        Self {
            scenario_id: scenario_id.to_string(),
            snr_db,
            metric: metric.to_string(),
            value,
            ci_low: None,
            ci_high: None,
            samples,
            seed,
            note: String::new(),
        }
    }

    pub fn rate(scenario_id: &str, snr_db: f64, metric: &str, rate: &RateEstimate, seed: u64) -> Self {
        Self {
            ci_low: Some(rate.ci_low),
            ci_high: Some(rate.ci_high),
            ..Self::point(scenario_id, snr_db, metric, rate.value, rate.trials, seed)
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// Plain decimal for ordinary magnitudes, exponent form for very small or
/// large ones. Both are shortest round-trip representations.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let opt = |v: Option<f64>| v.map(format_number).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.scenario_id.clone(),
            format_number(r.snr_db),
            r.metric.clone(),
            format_number(r.value),
            opt(r.ci_low),
            opt(r.ci_high),
            r.samples.to_string(),
            r.seed.to_string(),
            r.note.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_quoting() {
        let rows = [
            ResultRow::point("A-2,C-12", 3.0, "ber", 0.25, 1000, 7),
            ResultRow::rate("A-none,C-1", -1.5, "bler", &RateEstimate::new(1, 4), 7).with_note("low budget"),
        ];
        let text = to_csv_string(&rows).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("scenario_id,snr_db,metric,value,ci_low,ci_high,samples,seed,note")
        );
        assert_eq!(lines.next(), Some("\"A-2,C-12\",3,ber,0.25,,,1000,7,"));
        let third = lines.next().unwrap();
        assert!(third.starts_with("\"A-none,C-1\",-1.5,bler,0.25,0.0"), "{third}");
        assert!(third.ends_with(",4,7,low budget"));
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, 1.0, 0.5, 1e-4, 3.2e-7, 1e-300, 123456.789, -2.5, 1e20] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_number(3.2e-7), "3.2e-7");
        assert_eq!(format_number(0.001), "0.001");
    }
}
