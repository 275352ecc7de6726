//! Threshold + hit-definition/lockout timers on a characteristic function.

use alloc::vec::Vec;

/// One hit from [`timer_hits`], in CF indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimerHit {
    /// First index at or above the threshold.
    pub trigger: usize,
    /// Last index at or above the threshold before the hit closed.
    pub last_above: usize,
    /// The frame ended before the hit-definition time elapsed, or the hit
    /// was already open at index 0.
    pub truncated: bool,
}

/// Scans `cf` for hits. A hit opens at the first value `>= threshold`
/// outside a lockout, and closes once `max(hdt, 1)` consecutive values are
/// below the threshold. New hits are locked out for `hlt` samples after the
/// close.
pub fn timer_hits(cf: &[f64], threshold: f64, hdt: usize, hlt: usize) -> Vec<TimerHit> {
    let mut hits = Vec::new();
    let n = cf.len();
    let need_below = hdt.max(1);
    let mut i = 0;
    while i < n {
        if cf[i] < threshold {
            i += 1;
            continue;
        }
        let trigger = i;
        let mut last_above = i;
        let mut closed_at = None;
        let mut j = i + 1;
        while j < n {
            if cf[j] >= threshold {
                last_above = j;
            } else if j - last_above >= need_below {
                closed_at = Some(j);
                break;
            }
            j += 1;
        }
        hits.push(TimerHit {
            trigger,
            last_above,
            truncated: closed_at.is_none() || trigger == 0,
        });
        match closed_at {
            Some(c) => i = c + 1 + hlt,
            None => break,
        }
    }
    hits
}
