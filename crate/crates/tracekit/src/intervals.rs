//! Half-open integer interval sets.
//!
//! The overlap analyses (communication/computation breakdown, exclusive-time
//! segmentation) work on unions of `[lo, hi)` nanosecond intervals. An
//! [`IntervalSet`] keeps its intervals sorted, disjoint, and non-adjacent,
//! so measures and intersections are exact integer arithmetic.

/// A normalized set of half-open intervals `[lo, hi)` over `i64` time.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntervalSet {
    /// Sorted by `lo`; pairwise disjoint with gaps (no touching intervals).
    iv: Vec<(i64, i64)>,
}

impl IntervalSet {
    pub fn new() -> Self {
        IntervalSet::default()
    }

    /// Builds a set from arbitrary intervals: empty ones are dropped,
    /// overlapping or touching ones are merged.
    pub fn from_intervals(mut raw: Vec<(i64, i64)>) -> Self {
        raw.retain(|&(lo, hi)| lo < hi);
        raw.sort_unstable();
        let mut iv: Vec<(i64, i64)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match iv.last_mut() {
                Some((_, prev_hi)) if lo <= *prev_hi => *prev_hi = (*prev_hi).max(hi),
                _ => iv.push((lo, hi)),
            }
        }
        IntervalSet { iv }
    }

    pub fn is_empty(&self) -> bool {
        self.iv.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.iv.iter().copied()
    }

    /// Total covered time. Exact; saturates only on astronomically wide
    /// inputs (full i64 range).
    pub fn measure(&self) -> i64 {
        self.iv.iter().map(|&(lo, hi)| hi - lo).sum()
    }

    /// Set union.
    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = self.iv.clone();
        all.extend_from_slice(&other.iv);
        IntervalSet::from_intervals(all)
    }

    /// Set intersection via a linear merge of the two sorted lists.
    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let (mut i, mut j) = (0usize, 0usize);
        let mut out: Vec<(i64, i64)> = Vec::new();
        while i < self.iv.len() && j < other.iv.len() {
            let (a_lo, a_hi) = self.iv[i];
            let (b_lo, b_hi) = other.iv[j];
            let lo = a_lo.max(b_lo);
            let hi = a_hi.min(b_hi);
            if lo < hi {
                out.push((lo, hi));
            }
            if a_hi <= b_hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        // Outputs are produced in order and disjoint; no renormalization
        // needed.
        IntervalSet { iv: out }
    }

    /// True if `t` lies inside the set.
    pub fn contains(&self, t: i64) -> bool {
        match self.iv.partition_point(|&(lo, _)| lo <= t) {
            0 => false,
            idx => t < self.iv[idx - 1].1,
        }
    }
}
