//! Per-interval counters and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Counters for the queries issued in one metric interval.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsRecord {
    pub queries_issued: u64,
    /// Queries with at least one hit.
    pub hits: u64,
    pub success_rate: f64,
    /// First-hit hop counts summed over successful queries.
    pub sum_hops_on_hits: u64,
    pub avg_hops: f64,
    /// Every hit report, including later hits of an already answered query.
    pub hits_per_query: f64,
    pub duplicates_generated: u64,
    pub duplicates_forwarded: u64,
    pub duplicates_dropped: u64,
    pub coverage_fraction: f64,
    pub ttl_enhancements_used: u64,
    /// Successful queries whose first hit came after the original budget ran out.
    pub hits_via_enhancement: u64,
    pub hits_by_ordinary: u64,
    pub hits_by_power: u64,
    pub hits_via_query_table: u64,
    pub hits_via_parallel_routing: u64,
    pub free_rider_msgs_received: u64,
    /// Raw hit reports behind `hits_per_query`.
    pub hit_reports: u64,
}

pub const CSV_HEADER: [&str; 17] = [
    "queries_issued",
    "hits",
    "success_rate",
    "sum_hops_on_hits",
    "avg_hops",
    "hits_per_query",
    "duplicates_generated",
    "duplicates_forwarded",
    "duplicates_dropped",
    "coverage_fraction",
    "ttl_enhancements_used",
    "hits_via_enhancement",
    "hits_by_ordinary",
    "hits_by_power",
    "hits_via_query_table",
    "hits_via_parallel_routing",
    "free_rider_msgs_received",
];

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

impl MetricsRecord {
    /// Recomputes the derived ratios from the raw counters.
    pub fn finish(&mut self) {
        self.success_rate = ratio(self.hits, self.queries_issued);
        self.avg_hops = ratio(self.sum_hops_on_hits, self.hits);
        self.hits_per_query = ratio(self.hit_reports, self.queries_issued);
    }

    fn to_row(&self) -> Vec<String> {
        vec![
            self.queries_issued.to_string(),
            self.hits.to_string(),
            fmt6(self.success_rate),
            self.sum_hops_on_hits.to_string(),
            fmt6(self.avg_hops),
            fmt6(self.hits_per_query),
            self.duplicates_generated.to_string(),
            self.duplicates_forwarded.to_string(),
            self.duplicates_dropped.to_string(),
            fmt6(self.coverage_fraction),
            self.ttl_enhancements_used.to_string(),
            self.hits_via_enhancement.to_string(),
            self.hits_by_ordinary.to_string(),
            self.hits_by_power.to_string(),
            self.hits_via_query_table.to_string(),
            self.hits_via_parallel_routing.to_string(),
            self.free_rider_msgs_received.to_string(),
        ]
    }

    fn from_row(row: &csv::StringRecord) -> Result<Self> {
        if row.len() != CSV_HEADER.len() {
            return Err(Error::Internal(format!(
                "expected {} columns, found {}",
                CSV_HEADER.len(),
                row.len()
            )));
        }
        let int = |i: usize| -> Result<u64> {
            row[i]
                .parse()
                .map_err(|_| Error::Internal(format!("column {} is not an integer: {:?}", CSV_HEADER[i], &row[i])))
        };
        let real = |i: usize| -> Result<f64> {
            row[i]
                .parse()
                .map_err(|_| Error::Internal(format!("column {} is not a number: {:?}", CSV_HEADER[i], &row[i])))
        };
        let mut r = MetricsRecord {
            queries_issued: int(0)?,
            hits: int(1)?,
            success_rate: real(2)?,
            sum_hops_on_hits: int(3)?,
            avg_hops: real(4)?,
            hits_per_query: real(5)?,
            duplicates_generated: int(6)?,
            duplicates_forwarded: int(7)?,
            duplicates_dropped: int(8)?,
            coverage_fraction: real(9)?,
            ttl_enhancements_used: int(10)?,
            hits_via_enhancement: int(11)?,
            hits_by_ordinary: int(12)?,
            hits_by_power: int(13)?,
            hits_via_query_table: int(14)?,
            hits_via_parallel_routing: int(15)?,
            free_rider_msgs_received: int(16)?,
            hit_reports: 0,
        };
        r.hit_reports = (r.hits_per_query * r.queries_issued as f64).round() as u64;
        Ok(r)
    }
}

/// Ordered interval records of one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsSeries {
    pub records: Vec<MetricsRecord>,
}

impl MetricsSeries {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(w);
        out.write_record(CSV_HEADER)?;
        for r in &self.records {
            out.write_record(r.to_row())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    /// Header plus one row per interval.
    pub fn emit_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        if self.records.is_empty() {
            return Err(Error::Internal("refusing to write an empty series".into()));
        }
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        if header.iter().ne(CSV_HEADER.iter().copied()) {
            return Err(Error::Internal("unexpected metrics header".into()));
        }
        let mut records = Vec::new();
        for row in rd.records() {
            records.push(MetricsRecord::from_row(&row?)?);
        }
        Ok(Self { records })
    }

    /// Sums the raw counters over `range` and recomputes the ratios. Coverage is
    /// the query-weighted mean of the interval values.
    pub fn aggregate(&self, range: std::ops::Range<usize>) -> MetricsRecord {
        let mut t = MetricsRecord::default();
        let mut cov = 0.0;
        for r in &self.records[range] {
            t.queries_issued += r.queries_issued;
            t.hits += r.hits;
            t.sum_hops_on_hits += r.sum_hops_on_hits;
            t.hit_reports += r.hit_reports;
            t.duplicates_generated += r.duplicates_generated;
            t.duplicates_forwarded += r.duplicates_forwarded;
            t.duplicates_dropped += r.duplicates_dropped;
            t.ttl_enhancements_used += r.ttl_enhancements_used;
            t.hits_via_enhancement += r.hits_via_enhancement;
            t.hits_by_ordinary += r.hits_by_ordinary;
            t.hits_by_power += r.hits_by_power;
            t.hits_via_query_table += r.hits_via_query_table;
            t.hits_via_parallel_routing += r.hits_via_parallel_routing;
            t.free_rider_msgs_received += r.free_rider_msgs_received;
            cov += r.coverage_fraction * r.queries_issued as f64;
        }
        t.finish();
        t.coverage_fraction = if t.queries_issued == 0 {
            0.0
        } else {
            cov / t.queries_issued as f64
        };
        t
    }

    /// Interval index ranges of the four quartiles of the run.
    pub fn quartile_ranges(&self) -> [std::ops::Range<usize>; 4] {
        let n = self.records.len();
        std::array::from_fn(|q| q * n / 4..(q + 1) * n / 4)
    }

    pub fn quartiles(&self) -> [MetricsRecord; 4] {
        self.quartile_ranges().map(|r| self.aggregate(r))
    }

    /// Everything after the first half of the intervals.
    pub fn second_half(&self) -> MetricsRecord {
        let n = self.records.len();
        self.aggregate(n / 2..n)
    }

    pub fn total(&self) -> MetricsRecord {
        self.aggregate(0..self.records.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MetricsSeries {
        let mut r = MetricsRecord {
            queries_issued: 3,
            hits: 2,
            sum_hops_on_hits: 7,
            hit_reports: 5,
            duplicates_generated: 4,
            duplicates_forwarded: 3,
            duplicates_dropped: 1,
            coverage_fraction: 0.25,
            ..MetricsRecord::default()
        };
        r.finish();
        MetricsSeries { records: vec![r] }
    }

    #[test]
    fn one_interval_two_lines() {
        let text = sample().to_csv_string();
        assert_eq!(text.lines().count(), 2);
        assert!(!text.contains('\r'));
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("3,2,0.666667,7,3.500000,1.666667,"));
    }

    #[test]
    fn round_trip() {
        let s = sample();
        let back = MetricsSeries::read_csv(s.to_csv_string().as_bytes()).unwrap();
        assert_eq!(back.records[0].hits, 2);
        assert_eq!(back.records[0].hit_reports, 5);
        assert!((back.records[0].success_rate - 2.0 / 3.0).abs() < 1e-6);
        assert_eq!(back.to_csv_string(), s.to_csv_string());
    }

    #[test]
    fn quartiles_cover_all() {
        let mut s = MetricsSeries::default();
        for _ in 0..10 {
            s.records.push(MetricsRecord {
                queries_issued: 1,
                ..Default::default()
            });
        }
        let total: u64 = s.quartiles().iter().map(|q| q.queries_issued).sum();
        assert_eq!(total, 10);
    }
}
