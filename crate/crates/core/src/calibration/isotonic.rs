//! Least-squares isotonic regression by pool-adjacent-violators.

use std::cmp::Ordering;

use crate::{Error, Result};

/// A non-decreasing step function fitted to `(score, label)` points.
///
/// Points are kept in stable score order, so duplicated scores stay adjacent
/// in their original order and may end up in different blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicFit {
    scores: Vec<f64>,
    fitted: Vec<f64>,
}

impl IsotonicFit {
    /// `(score, fitted_value)` pairs in ascending score order.
    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.scores.iter().copied().zip(self.fitted.iter().copied())
    }

    pub fn fitted_values(&self) -> &[f64] {
        &self.fitted
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Right-continuous step evaluation: the fitted value of the last point
    /// whose score is `<= score`, or the first value below the range.
    pub fn evaluate(&self, score: f64) -> f64 {
        let idx = self.scores.partition_point(|&s| s <= score);
        if idx == 0 {
            self.fitted[0]
        } else {
            self.fitted[idx - 1]
        }
    }
}

/// Fits a least-squares non-decreasing function to `points`.
pub fn fit_isotonic(points: &[(f64, f64)]) -> Result<IsotonicFit> {
    if points.is_empty() {
        return Err(Error::NoCalibrationPoints);
    }
    for &(s, y) in points {
        if !s.is_finite() {
            return Err(Error::NonFinite(s));
        }
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::InvalidLabel(y));
        }
    }
    let mut sorted = points.to_vec();
    // stable: equal scores keep their input order
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let labels: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    Ok(IsotonicFit {
        scores: sorted.iter().map(|p| p.0).collect(),
        fitted: pool_adjacent_violators(&labels),
    })
}

/// Unit-weight PAV over a sequence; returns one fitted value per element.
pub fn pool_adjacent_violators(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<Block> = Vec::with_capacity(values.len());
    for &v in values {
        push_block(&mut blocks, Block { sum: v, len: 1 });
    }
    expand(&blocks)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Block {
    pub sum: f64,
    pub len: usize,
}

impl Block {
    #[inline]
    pub fn mean(&self) -> f64 {
        self.sum / self.len as f64
    }
}

/// Pushes `block` and merges backwards while the means decrease.
#[inline]
pub(crate) fn push_block(blocks: &mut Vec<Block>, mut block: Block) {
    while let Some(last) = blocks.last() {
        // compare means without division: last.sum/last.len > block.sum/block.len
        if last.sum * block.len as f64 > block.sum * last.len as f64 {
            block.sum += last.sum;
            block.len += last.len;
            blocks.pop();
        } else {
            break;
        }
    }
    blocks.push(block);
}

fn expand(blocks: &[Block]) -> Vec<f64> {
    let mut out = Vec::with_capacity(blocks.iter().map(|b| b.len).sum());
    for b in blocks {
        let m = b.mean();
        out.extend(std::iter::repeat_n(m, b.len));
    }
    out
}
