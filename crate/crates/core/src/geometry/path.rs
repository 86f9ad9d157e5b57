use std::borrow::Borrow;

use super::metric::MetricState;
use crate::error::{Error, Result};

/// Composite Simpson weights for `intervals` (even) equal sub-intervals.
pub(crate) fn simpson_weight(i: usize, intervals: usize) -> f64 {
    if i == 0 || i == intervals {
        1.0
    } else if i % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// Energy `∫ |γ̇|²_{g(t)} dt` of the constant-speed coordinate path from
/// `(x1, t1)` to `(x2, t2)`.
///
/// `metric_at` is sampled at `num_samples + 1` equally spaced times (rounded
/// up to an even number of intervals) and the integral is taken with
/// composite Simpson.
pub fn meridian_path_energy<F, M>(
    metric_at: F,
    x1: f64,
    t1: f64,
    x2: f64,
    t2: f64,
    num_samples: usize,
) -> Result<f64>
where
    F: Fn(f64) -> M,
    M: Borrow<MetricState>,
{
    if t2 <= t1 {
        return Err(Error::Ordering(format!("path needs t1 < t2, got {t1} >= {t2}")));
    }
    if x1 == x2 {
        return Ok(0.0);
    }
    let intervals = num_samples.max(2).next_multiple_of(2);
    let duration = t2 - t1;
    let speed = (x2 - x1) / duration;
    let dt = duration / intervals as f64;
    let mut acc = 0.0;
    for i in 0..=intervals {
        let frac = i as f64 / intervals as f64;
        let t = t1 + frac * duration;
        let x = x1 + frac * (x2 - x1);
        let m = metric_at(t);
        acc += simpson_weight(i, intervals) * m.borrow().coordinate_scale_at(x) * speed * speed;
    }
    Ok(acc * dt / 3.0)
}
