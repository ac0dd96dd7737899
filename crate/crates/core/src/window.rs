//! Rolling-window arithmetic and threshold runs.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Window width and step in samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowPlan {
    pub width: usize,
    pub step: usize,
}

impl WindowPlan {
    /// 7 days of minutes, shifted by one day.
    pub const WEEK_BY_DAY: WindowPlan = WindowPlan {
        width: 10_080,
        step: 1_440,
    };
    /// 10 days of minutes, shifted by one day.
    pub const TEN_DAYS_BY_DAY: WindowPlan = WindowPlan {
        width: 14_400,
        step: 1_440,
    };
}

impl Default for WindowPlan {
    fn default() -> Self {
        Self::WEEK_BY_DAY
    }
}

/// Half-open sample range `start..end` of one window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub index: usize,
    pub start: usize,
    pub end: usize,
}

/// Windows at offsets `0, step, 2 step, ...` while they fit inside `len`.
pub fn rolling_windows(len: usize, plan: WindowPlan) -> Result<Vec<Window>> {
    if plan.width == 0 || plan.step == 0 {
        return Err(Error::InvalidWindowPlan {
            width: plan.width,
            step: plan.step,
        });
    }
    if len < plan.width {
        return Err(Error::SeriesShorterThanWindow {
            len,
            width: plan.width,
        });
    }
    let count = (len - plan.width) / plan.step + 1;
    Ok((0..count)
        .map(|index| {
            let start = index * plan.step;
            Window {
                index,
                start,
                end: start + plan.width,
            }
        })
        .collect())
}

/// Maximal runs of consecutive points with value strictly above
/// `threshold`, as `(first, last)` timestamps. Input must be in time order.
pub fn threshold_periods(points: &[(i64, f64)], threshold: f64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    let mut open: Option<(i64, i64)> = None;
    for &(t, v) in points {
        if v > threshold {
            open = Some(match open {
                Some((start, _)) => (start, t),
                None => (t, t),
            });
        } else if let Some(run) = open.take() {
            out.push(run);
        }
    }
    out.extend(open);
    out
}
