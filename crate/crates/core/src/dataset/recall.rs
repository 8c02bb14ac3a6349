use crate::error::{Error, Result};
use crate::quantizer::Score;

/// Per-query true nearest neighbors, nearest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    lists: Vec<Vec<u32>>,
}

impl GroundTruth {
    pub fn new(lists: Vec<Vec<u32>>) -> Result<Self> {
        if let Some(first) = lists.first() {
            if let Some(bad) = lists.iter().find(|l| l.len() != first.len()) {
                return Err(Error::LengthMismatch {
                    left: first.len(),
                    right: bad.len(),
                });
            }
            if first.is_empty() {
                return Err(Error::InvalidParameter(
                    "ground-truth lists are empty".into(),
                ));
            }
        }
        Ok(GroundTruth { lists })
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn lists(&self) -> &[Vec<u32>] {
        &self.lists
    }

    pub fn nearest(&self, query: usize) -> u32 {
        self.lists[query][0]
    }
}

/// Fraction of queries whose true nearest neighbor is among the first `r`
/// returned identifiers.
pub fn recall_at(results: &[Vec<Score>], gt: &GroundTruth, r: usize) -> Result<f64> {
    if results.len() != gt.len() {
        return Err(Error::LengthMismatch {
            left: results.len(),
            right: gt.len(),
        });
    }
    if results.is_empty() {
        return Ok(0.0);
    }
    let hits = results
        .iter()
        .enumerate()
        .filter(|(q, res)| {
            let target = gt.nearest(*q);
            res.iter().take(r).any(|s| s.id == target)
        })
        .count();
    Ok(hits as f64 / results.len() as f64)
}
