//! Wait-time statistics, level-of-service grading and fleet-sweep summaries.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::OrderOutcome;

/// Level-of-service grade for a wait time. There is no grade E: the scale
/// jumps from D straight to F for anything over 50 minutes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LosCategory {
    A,
    B,
    C,
    D,
    F,
}

impl LosCategory {
    pub const ALL: [LosCategory; 5] = [
        LosCategory::A,
        LosCategory::B,
        LosCategory::C,
        LosCategory::D,
        LosCategory::F,
    ];

    fn index(self) -> usize {
        match self {
            LosCategory::A => 0,
            LosCategory::B => 1,
            LosCategory::C => 2,
            LosCategory::D => 3,
            LosCategory::F => 4,
        }
    }
}

impl fmt::Display for LosCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            LosCategory::A => 'A',
            LosCategory::B => 'B',
            LosCategory::C => 'C',
            LosCategory::D => 'D',
            LosCategory::F => 'F',
        };
        write!(f, "{c}")
    }
}

/// Customer wait for a delivered order: drop-off minus request time.
pub fn wait_time(order: &OrderOutcome) -> u64 {
    order.dropoff - order.request_time
}

/// Grade a wait in seconds.
///
/// Bands are closed on the right in minutes: A up to 20, B up to 30, C up
/// to 40, D up to 50, F beyond. Waits under a minute grade A.
pub fn los_of(wait_secs: u64) -> LosCategory {
    match wait_secs {
        0..=1200 => LosCategory::A,
        1201..=1800 => LosCategory::B,
        1801..=2400 => LosCategory::C,
        2401..=3000 => LosCategory::D,
        _ => LosCategory::F,
    }
}

/// Grade a (possibly fractional) wait in minutes; used for the system-level
/// grade computed from the mean.
pub fn los_of_minutes(wait_min: f64) -> LosCategory {
    if wait_min <= 20.0 {
        LosCategory::A
    } else if wait_min <= 30.0 {
        LosCategory::B
    } else if wait_min <= 40.0 {
        LosCategory::C
    } else if wait_min <= 50.0 {
        LosCategory::D
    } else {
        LosCategory::F
    }
}

/// Per-order LOS counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LosHistogram {
    counts: [usize; 5],
}

impl LosHistogram {
    pub fn add(&mut self, cat: LosCategory) {
        self.counts[cat.index()] += 1;
    }

    pub fn count(&self, cat: LosCategory) -> usize {
        self.counts[cat.index()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Distribution summary of one scenario's waits, in minutes.
///
/// `system_los` grades the mean; the histogram grades each order. The two
/// are reported independently: a comfortable mean can hide a tail of
/// LOS-F orders.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaitSummary {
    pub n: usize,
    pub mean_min: f64,
    pub median_min: f64,
    pub min_min: f64,
    pub max_min: f64,
    pub q1_min: f64,
    pub q3_min: f64,
    pub los_histogram: LosHistogram,
    pub system_los: LosCategory,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("cannot summarize an empty wait list")]
    EmptyInput,
    #[error("a fleet sweep needs at least two fleet sizes, got {0}")]
    TooFewFleetSizes(usize),
    #[error("duplicate fleet size {0} in sweep input")]
    DuplicateFleetSize(u32),
}

/// Median of a sorted slice of second counts, in seconds.
fn median_secs(sorted: &[u64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    }
}

/// Summarize waits (given in seconds) into minute-valued statistics.
///
/// Quartiles use the median-of-halves rule: the lower half excludes the
/// middle element when the count is odd, q1/q3 are the medians of the two
/// halves.
pub fn summarize(waits_secs: &[u64]) -> Result<WaitSummary, AnalyticsError> {
    if waits_secs.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    let mut sorted = waits_secs.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    let median = median_secs(&sorted);
    let (lower, upper) = if n == 1 {
        (&sorted[..1], &sorted[..1])
    } else {
        (&sorted[..n / 2], &sorted[n.div_ceil(2)..])
    };
    let q1 = median_secs(lower);
    let q3 = median_secs(upper);
    let total: u64 = sorted.iter().sum();
    let mean_min = total as f64 / (60.0 * n as f64);

    let mut histogram = LosHistogram::default();
    for &w in &sorted {
        histogram.add(los_of(w));
    }

    Ok(WaitSummary {
        n,
        mean_min,
        median_min: median / 60.0,
        min_min: sorted[0] as f64 / 60.0,
        max_min: sorted[n - 1] as f64 / 60.0,
        q1_min: q1 / 60.0,
        q3_min: q3 / 60.0,
        los_histogram: histogram,
        system_los: los_of_minutes(mean_min),
    })
}

/// One row of a fleet-size sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub fleet_size: u32,
    pub mean_wait_min: f64,
}

/// Fleet sweep with its plateau flag: the smallest fleet whose mean wait is
/// within 5% of the largest fleet's mean wait.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub plateau_fleet: u32,
}

/// Smallest fleet within 5% of the largest fleet's mean. `rows` must be
/// sorted by fleet size and non-empty.
pub fn plateau_fleet(rows: &[SweepRow]) -> Option<u32> {
    let asymptote = rows.last()?.mean_wait_min;
    rows.iter()
        .find(|r| r.mean_wait_min <= asymptote * 1.05)
        .map(|r| r.fleet_size)
}

/// Build the sweep table for scenarios that share system and demand but
/// differ in fleet size.
pub fn fleet_sweep_summary(
    results: &[(u32, WaitSummary)],
) -> Result<SweepTable, AnalyticsError> {
    if results.len() < 2 {
        return Err(AnalyticsError::TooFewFleetSizes(results.len()));
    }
    let mut rows: Vec<SweepRow> = results
        .iter()
        .map(|(fleet_size, s)| SweepRow {
            fleet_size: *fleet_size,
            mean_wait_min: s.mean_min,
        })
        .collect();
    rows.sort_by_key(|r| r.fleet_size);
    for w in rows.windows(2) {
        if w[0].fleet_size == w[1].fleet_size {
            return Err(AnalyticsError::DuplicateFleetSize(w[0].fleet_size));
        }
    }
    let plateau_fleet = plateau_fleet(&rows).expect("rows non-empty");
    Ok(SweepTable {
        rows,
        plateau_fleet,
    })
}
