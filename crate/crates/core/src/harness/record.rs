use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Exact header of every sweep CSV.
pub const CSV_HEADER: &str = "model,estimator,T,N0,inner_budget,seed,estimate,truth,abs_error,sq_error,wall_time_s";

/// One replicate at one ladder point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: String,
    pub estimator: String,
    #[serde(rename = "T")]
    pub t: u64,
    #[serde(rename = "N0")]
    pub n0: u64,
    pub inner_budget: String,
    pub seed: u64,
    pub estimate: f64,
    pub truth: Option<f64>,
    pub abs_error: Option<f64>,
    pub sq_error: Option<f64>,
    pub wall_time_s: f64,
}

impl RunRecord {
    /// Fills the error columns from `truth`.
    pub fn with_truth(mut self, truth: Option<f64>) -> Self {
        self.truth = truth;
        self.abs_error = truth.map(|t| (self.estimate - t).abs());
        self.sq_error = self.abs_error.map(|e| e * e);
        self
    }
}

pub fn write_records<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(crate::error::Error::config(format!("unexpected CSV header `{}`", header.join(","))));
    }
    Ok(r.deserialize().collect::<std::result::Result<Vec<RunRecord>, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(estimate: f64, truth: Option<f64>, wall: f64) -> RunRecord {
        RunRecord {
            model: "analytic".into(),
            estimator: "nmc".into(),
            t: 1000,
            n0: 99,
            inner_budget: "N1=10".into(),
            seed: 3,
            estimate,
            truth: None,
            abs_error: None,
            sq_error: None,
            wall_time_s: wall,
        }
        .with_truth(truth)
    }

    #[test]
    fn header_is_exact() {
        let mut buf = Vec::new();
        write_records(&[record(1.5, Some(1.0), 0.25)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.next().unwrap(), "analytic,nmc,1000,99,N1=10,3,1.5,1.0,0.5,0.25,0.25");
    }

    #[test]
    fn missing_truth_leaves_empty_cells() {
        let r = record(2.0, None, 0.0);
        assert_eq!(r.sq_error, None);
        let mut buf = Vec::new();
        write_records(std::slice::from_ref(&r), &mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().contains(",2.0,,,,"));
        assert_eq!(read_records(&buf[..]).unwrap(), vec![r]);
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(read_records("a,b\n1,2\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip(estimate in -1e6f64..1e6, truth in proptest::option::of(-1e6f64..1e6), wall in 0f64..100.0) {
            let r = record(estimate, truth, wall);
            if let Some(t) = truth {
                prop_assert_eq!(r.sq_error.unwrap(), (estimate - t).abs().powi(2));
            }
            let mut buf = Vec::new();
            write_records(std::slice::from_ref(&r), &mut buf).unwrap();
            prop_assert_eq!(read_records(&buf[..]).unwrap(), vec![r]);
        }
    }
}
