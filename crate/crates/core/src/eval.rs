//! Ground-truth matching, confusion counts, signed error statistics and the
//! six detection-quality percentages.

use alloc::vec::Vec;

use crate::short_time::mean_std;
use crate::{AeEvent, Error, Result};

/// Closed time interval in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub onset: f64,
    pub endpoint: f64,
}

impl Interval {
    pub fn new(onset: f64, endpoint: f64) -> Self {
        Self { onset, endpoint }
    }

    pub fn from_event(event: &AeEvent, sample_rate: f64) -> Self {
        Self {
            onset: event.onset as f64 / sample_rate,
            endpoint: event.endpoint as f64 / sample_rate,
        }
    }

    pub fn length(&self) -> f64 {
        self.endpoint - self.onset
    }

    pub fn overlap(&self, other: &Interval) -> f64 {
        self.endpoint.min(other.endpoint) - self.onset.max(other.onset)
    }
}

/// Converts detector output to seconds.
pub fn events_to_intervals(events: &[AeEvent], sample_rate: f64) -> Vec<Interval> {
    events.iter().map(|e| Interval::from_event(e, sample_rate)).collect()
}

/// Reference events: ordered, non-overlapping, each with `endpoint > onset`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    events: Vec<Interval>,
}

impl GroundTruth {
    pub fn new(events: Vec<Interval>) -> Result<Self> {
        for (i, e) in events.iter().enumerate() {
            if !(e.onset.is_finite() && e.endpoint.is_finite() && e.endpoint > e.onset) {
                return Err(Error::param("truth", "each event needs finite onset < endpoint"));
            }
            if i > 0 && e.onset <= events[i - 1].endpoint {
                return Err(Error::param("truth", "events must be ordered and non-overlapping"));
            }
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[Interval] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total_detected(&self) -> usize {
        self.tp + self.fp
    }

    pub fn total_truth(&self) -> usize {
        self.tp + self.fn_
    }
}

impl core::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl core::ops::AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub detected: Interval,
    pub truth: Interval,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matching {
    pub counts: ConfusionCounts,
    pub pairs: Vec<MatchedPair>,
    /// `(detected index, truth index)` for each pair.
    pub indices: Vec<(usize, usize)>,
}

/// Whether `d` may be matched to truth `t`: positive overlap of at least
/// `min_overlap` times the truth length.
pub fn eligible(d: &Interval, t: &Interval, min_overlap: f64) -> bool {
    let ov = d.overlap(t);
    ov > 0.0 && ov >= min_overlap * t.length()
}

/// One-to-one matching in time order: each truth takes the earliest
/// still-unmatched eligible detection. Unmatched detections count as false
/// positives, unmatched truths as false negatives.
///
/// Both inputs must be ordered and non-overlapping.
pub fn match_events(detected: &[Interval], truth: &GroundTruth, min_overlap: f64) -> Matching {
    let mut out = Matching::default();
    let mut next = 0;
    for (ti, t) in truth.events().iter().enumerate() {
        // detections ending before this truth cannot reach any later one
        while next < detected.len() && detected[next].endpoint <= t.onset {
            next += 1;
        }
        let mut j = next;
        while j < detected.len() && detected[j].onset < t.endpoint {
            if eligible(&detected[j], t, min_overlap) {
                out.pairs.push(MatchedPair {
                    detected: detected[j],
                    truth: *t,
                });
                out.indices.push((j, ti));
                next = j + 1;
                break;
            }
            j += 1;
        }
    }
    let tp = out.pairs.len();
    out.counts = ConfusionCounts {
        tp,
        fp: detected.len() - tp,
        fn_: truth.len() - tp,
    };
    out
}

/// The six quality percentages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub sensitivity: f64,
    pub f1: f64,
    pub fdr: f64,
    pub fnr: f64,
}

/// Percentages from confusion counts. Fails when nothing was detected or
/// there is no truth, since precision or sensitivity would be undefined.
pub fn quality_metrics(c: &ConfusionCounts) -> Result<QualityMetrics> {
    if c.total_detected() == 0 {
        return Err(Error::UndefinedMetric("precision: no detections"));
    }
    if c.total_truth() == 0 {
        return Err(Error::UndefinedMetric("sensitivity: no truth events"));
    }
    let (tp, fp, fn_) = (c.tp as f64, c.fp as f64, c.fn_ as f64);
    let pct = |num: f64, den: f64| 100.0 * num / den;
    Ok(QualityMetrics {
        accuracy: pct(tp, tp + fp + fn_),
        precision: pct(tp, tp + fp),
        sensitivity: pct(tp, tp + fn_),
        // 2PS/(P+S) reduces to this
        f1: pct(2.0 * tp, 2.0 * tp + fp + fn_),
        fdr: pct(fp, tp + fp),
        fnr: pct(fn_, tp + fn_),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Summary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub mean_abs: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        let mean_abs = values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64;
        Self { mean, std, mean_abs }
    }
}

/// Signed errors (detected minus truth, seconds) over matched pairs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorStats {
    pub onset: Summary,
    pub endpoint: Summary,
    pub lifespan: Summary,
    pub pairs: usize,
}

/// Per-pair `(onset, endpoint, lifespan)` errors. The lifespan error is
/// defined as `endpoint - onset` error, so the identity holds exactly.
pub fn pair_errors(p: &MatchedPair) -> (f64, f64, f64) {
    let on = p.detected.onset - p.truth.onset;
    let end = p.detected.endpoint - p.truth.endpoint;
    (on, end, end - on)
}

pub fn error_stats(pairs: &[MatchedPair]) -> Result<ErrorStats> {
    if pairs.is_empty() {
        return Err(Error::UndefinedMetric("error statistics need at least one pair"));
    }
    let errs: Vec<(f64, f64, f64)> = pairs.iter().map(pair_errors).collect();
    let col = |f: fn(&(f64, f64, f64)) -> f64| Summary::of(&errs.iter().map(f).collect::<Vec<_>>());
    Ok(ErrorStats {
        onset: col(|e| e.0),
        endpoint: col(|e| e.1),
        lifespan: col(|e| e.2),
        pairs: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b)
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 0.005
    }

    #[test]
    fn table_counts_to_percentages() {
        let m = quality_metrics(&ConfusionCounts { tp: 338, fp: 29, fn_: 42 }).unwrap();
        for (got, want) in [
            (m.accuracy, 82.64),
            (m.precision, 92.10),
            (m.sensitivity, 88.95),
            (m.f1, 90.50),
            (m.fdr, 7.90),
            (m.fnr, 11.05),
        ] {
            assert!(close(got, want), "{got} vs {want}");
        }
        let m = quality_metrics(&ConfusionCounts { tp: 322, fp: 51, fn_: 58 }).unwrap();
        assert!(close(m.accuracy, 74.71) && close(m.precision, 86.33));
    }

    #[test]
    fn perfect_and_undefined() {
        let m = quality_metrics(&ConfusionCounts { tp: 5, fp: 0, fn_: 0 }).unwrap();
        assert_eq!((m.accuracy, m.precision, m.sensitivity, m.f1), (100.0, 100.0, 100.0, 100.0));
        assert_eq!((m.fdr, m.fnr), (0.0, 0.0));
        assert!(quality_metrics(&ConfusionCounts { tp: 0, fp: 0, fn_: 3 }).is_err());
        assert!(quality_metrics(&ConfusionCounts { tp: 0, fp: 2, fn_: 0 }).is_err());
    }

    #[test]
    fn exact_detection_matches_all() {
        let t = GroundTruth::new(vec![iv(0.0, 1.0), iv(2.0, 3.0)]).unwrap();
        let m = match_events(t.events(), &t, 0.0);
        assert_eq!(m.counts, ConfusionCounts { tp: 2, fp: 0, fn_: 0 });
        let m = match_events(&[], &t, 0.0);
        assert_eq!(m.counts.fn_, 2);
    }

    #[test]
    fn one_detection_spanning_two_truths() {
        let t = GroundTruth::new(vec![iv(0.0, 1.0), iv(2.0, 3.0)]).unwrap();
        let m = match_events(&[iv(0.5, 2.5)], &t, 0.0);
        assert_eq!(m.counts, ConfusionCounts { tp: 1, fp: 0, fn_: 1 });
    }

    #[test]
    fn min_overlap_rejects_grazing() {
        let t = GroundTruth::new(vec![iv(0.0, 1.0)]).unwrap();
        assert_eq!(match_events(&[iv(0.9, 2.0)], &t, 0.5).counts.tp, 0);
        assert_eq!(match_events(&[iv(0.9, 2.0)], &t, 0.0).counts.tp, 1);
        // touching endpoints is not overlap
        assert_eq!(match_events(&[iv(1.0, 2.0)], &t, 0.0).counts.tp, 0);
    }

    #[test]
    fn truth_validation() {
        assert!(GroundTruth::new(vec![iv(1.0, 1.0)]).is_err());
        assert!(GroundTruth::new(vec![iv(0.0, 2.0), iv(1.0, 3.0)]).is_err());
    }

    #[test]
    fn lifespan_identity() {
        let p = MatchedPair {
            detected: iv(10e-6, 1.0 + 25e-6),
            truth: iv(0.0, 1.0),
        };
        let (on, end, life) = pair_errors(&p);
        assert_eq!(life, end - on);
        assert!((life - 15e-6).abs() < 1e-12);
        assert!(error_stats(&[]).is_err());
        let s = error_stats(&[MatchedPair { detected: iv(0.0, 1.0), truth: iv(0.0, 1.0) }]).unwrap();
        assert_eq!(s.onset, Summary::default());
        assert_eq!(s.lifespan.mean_abs, 0.0);
    }
}
