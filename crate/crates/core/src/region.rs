//! Finite unions of closed intervals on the half line.
//!
//! Sets are kept up to measure zero: degenerate intervals are dropped and
//! intervals that touch are merged, so two sets with the same integrals have
//! the same representation.

use std::fmt;

/// A closed interval `[lo, hi]` with `lo < hi`. `hi` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, r: f64) -> bool {
        self.lo <= r && r <= self.hi
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegionSet {
    intervals: Vec<Interval>,
}

impl RegionSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Self::from_intervals([(lo, hi)])
    }

    /// Builds a normalized set from arbitrary (possibly overlapping, unsorted
    /// or empty) pairs. Pairs with `hi <= lo` or NaN bounds are discarded.
    pub fn from_intervals<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut v: Vec<Interval> = pairs
            .into_iter()
            .filter(|&(lo, hi)| hi > lo)
            .map(|(lo, hi)| Interval::new(lo.max(0.0), hi))
            .filter(|iv| iv.hi > iv.lo)
            .collect();
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => out.push(iv),
            }
        }
        Self { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn contains(&self, r: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(r))
    }

    /// Smallest lower bound, if any.
    pub fn inf(&self) -> Option<f64> {
        self.intervals.first().map(|iv| iv.lo)
    }

    /// Largest upper bound, if any.
    pub fn sup(&self) -> Option<f64> {
        self.intervals.last().map(|iv| iv.hi)
    }

    /// Complement within `[lo, hi]`.
    pub fn complement_within(&self, lo: f64, hi: f64) -> Self {
        let mut out = Vec::new();
        let mut cursor = lo;
        for iv in &self.intervals {
            if iv.hi <= cursor {
                continue;
            }
            if iv.lo >= hi {
                break;
            }
            if iv.lo > cursor {
                out.push((cursor, iv.lo));
            }
            cursor = iv.hi;
        }
        if cursor < hi {
            out.push((cursor, hi));
        }
        Self::from_intervals(out)
    }

    pub fn clip(&self, lo: f64, hi: f64) -> Self {
        Self::from_intervals(self.intervals.iter().map(|iv| (iv.lo.max(lo), iv.hi.min(hi))))
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_intervals(
            self.intervals
                .iter()
                .chain(other.intervals.iter())
                .map(|iv| (iv.lo, iv.hi)),
        )
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = self.intervals[i];
            let b = other.intervals[j];
            let lo = a.lo.max(b.lo);
            let hi = a.hi.min(b.hi);
            if hi > lo {
                out.push((lo, hi));
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_intervals(out)
    }

    /// Largest gap between the boundaries of two sets with the same number of
    /// intervals, or `None` when the interval counts differ.
    pub fn max_boundary_gap(&self, other: &Self) -> Option<f64> {
        if self.intervals.len() != other.intervals.len() {
            return None;
        }
        let gap = |x: f64, y: f64| if x == y { 0.0 } else { (x - y).abs() };
        Some(
            self.intervals
                .iter()
                .zip(&other.intervals)
                .map(|(a, b)| gap(a.lo, b.lo).max(gap(a.hi, b.hi)))
                .fold(0.0, f64::max),
        )
    }

    /// Drops intervals shorter than `min_len`.
    pub fn without_slivers(&self, min_len: f64) -> Self {
        Self {
            intervals: self.intervals.iter().copied().filter(|iv| iv.len() >= min_len).collect(),
        }
    }
}

impl fmt::Display for RegionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        for (k, iv) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "[{}, {}]", iv.lo, iv.hi)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalizes() {
        let s = RegionSet::from_intervals([(5.0, 7.0), (0.0, 2.0), (1.0, 3.0), (4.0, 4.0), (3.0, 3.5)]);
        assert_eq!(s.intervals(), &[Interval::new(0.0, 3.5), Interval::new(5.0, 7.0)]);
        assert_eq!(s.measure(), 5.5);
    }

    #[test]
    fn complement_with_infinite_bound() {
        let s = RegionSet::from_intervals([(0.0, 100.0), (570.0, 600.0)]);
        let c = s.complement_within(0.0, f64::INFINITY);
        assert_eq!(c.intervals(), &[Interval::new(100.0, 570.0), Interval::new(600.0, f64::INFINITY)]);
        assert!(RegionSet::empty().complement_within(0.0, 10.0) == RegionSet::interval(0.0, 10.0));
    }

    fn arb_set() -> impl Strategy<Value = RegionSet> {
        prop::collection::vec((0.0..100.0f64, 0.0..30.0f64), 0..6)
            .prop_map(|v| RegionSet::from_intervals(v.into_iter().map(|(a, w)| (a, a + w))))
    }

    proptest! {
        #[test]
        fn complement_partitions_domain(s in arb_set()) {
            let c = s.complement_within(0.0, 200.0);
            let inside = s.clip(0.0, 200.0);
            prop_assert!((inside.measure() + c.measure() - 200.0).abs() < 1e-9);
            prop_assert!(inside.intersect(&c).measure() < 1e-9);
            prop_assert!((inside.union(&c).measure() - 200.0).abs() < 1e-9);
        }

        #[test]
        fn intersection_is_bounded_by_both(a in arb_set(), b in arb_set()) {
            let i = a.intersect(&b);
            prop_assert!(i.measure() <= a.measure() + 1e-9);
            prop_assert!(i.measure() <= b.measure() + 1e-9);
            let u = a.union(&b);
            prop_assert!((u.measure() + i.measure() - a.measure() - b.measure()).abs() < 1e-9);
        }
    }
}
