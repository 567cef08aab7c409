//! Open interval covers of a bounded range ("gomics": generic, open, minimal
//! interval covers) and the staircases derived from them.
//!
//! In a gomic only consecutive intervals meet, so every interval `U` splits as
//! `U = lower overlap ⊔ proper part ⊔ upper overlap`. The staircases are
//! unions of half-squares over such pieces:
//!
//! * above half-square `Q⁺(a,b) = {a ≤ x ≤ y ≤ b}`
//! * below half-square `Q⁻(a,b) = {a ≤ y < x ≤ b}`
//!
//! Membership uses these inequalities on the interval endpoints whatever the
//! openness of the interval; distances are ℓ∞ distances to the closures.
//!
//! Only bounded covers are supported.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn point(x: f64) -> Self {
        Interval::closed(x, x)
    }

    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Interval { lo, hi, lo_closed, hi_closed }
    }

    pub fn is_open(&self) -> bool {
        !self.lo_closed && !self.hi_closed
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn length(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn midpoint(&self) -> f64 {
        (self.lo + self.hi) / 2.0
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Whether the closed segment `[m, big_m]` meets this interval.
    pub fn meets_closed(&self, m: f64, big_m: f64) -> bool {
        if self.is_empty() || m > big_m {
            return false;
        }
        let right_of_lo = big_m > self.lo || (big_m == self.lo && self.lo_closed);
        let left_of_hi = m < self.hi || (m == self.hi && self.hi_closed);
        right_of_lo && left_of_hi
    }

    /// Whether the open segment `(m, big_m)` meets this interval.
    pub fn meets_open(&self, m: f64, big_m: f64) -> bool {
        !self.is_empty() && m < big_m && big_m > self.lo && m < self.hi
    }

    /// Whether this interval is contained in the open segment `(m, big_m)`.
    pub fn inside_open(&self, m: f64, big_m: f64) -> bool {
        let lo_ok = if self.lo_closed { self.lo > m } else { self.lo >= m };
        let hi_ok = if self.hi_closed { self.hi < big_m } else { self.hi <= big_m };
        lo_ok && hi_ok
    }

    /// Union of two abutting or overlapping intervals, `self` being the lower one.
    fn hull(&self, upper: &Interval) -> Interval {
        Interval::new(self.lo, upper.hi, self.lo_closed, upper.hi_closed)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CoverViolation {
    #[error("interval #{index} is not open")]
    NotOpen { index: usize },
    #[error("interval #{index} has an infinite or NaN endpoint")]
    Unbounded { index: usize },
    #[error("interval #{index} is empty")]
    Empty { index: usize },
    #[error("interval #{index} lies inside the union of the others")]
    NotMinimal { index: usize },
    #[error("intervals #{first} and #{second} meet but are not consecutive")]
    TripleOverlap { first: usize, second: usize },
    #[error("interval #{index} has a single-point proper part")]
    NotGeneric { index: usize },
    #[error("the union is not an interval: gap at {at}")]
    Disconnected { at: f64 },
}

impl CoverViolation {
    pub fn name(&self) -> &'static str {
        match self {
            CoverViolation::NotOpen { .. } => "NotOpen",
            CoverViolation::Unbounded { .. } => "Unbounded",
            CoverViolation::Empty { .. } => "Empty",
            CoverViolation::NotMinimal { .. } => "NotMinimal",
            CoverViolation::TripleOverlap { .. } => "TripleOverlap",
            CoverViolation::NotGeneric { .. } => "NotGeneric",
            CoverViolation::Disconnected { .. } => "Disconnected",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum CoverError {
    #[error("a cover needs at least one interval")]
    EmptyCover,
    #[error("invalid cover: {}", list(.0))]
    Invalid(Vec<CoverViolation>),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

fn list(v: &[CoverViolation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl CoverError {
    pub fn violations(&self) -> &[CoverViolation] {
        match self {
            CoverError::Invalid(v) => v,
            _ => &[],
        }
    }
}

/// A validated gomic, intervals sorted by left endpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct GomicCover {
    intervals: Vec<Interval>,
}

/// The three pieces of a cover element.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition {
    pub lower: Option<Interval>,
    pub proper: Interval,
    pub upper: Option<Interval>,
}

/// Checks every gomic condition and reports all violations at once.
/// Violation indices refer to positions in the input slice.
pub fn validate_gomic(intervals: &[Interval]) -> Result<GomicCover, CoverError> {
    if intervals.is_empty() {
        return Err(CoverError::EmptyCover);
    }
    let mut violations = Vec::new();
    for (i, iv) in intervals.iter().enumerate() {
        if !iv.lo.is_finite() || !iv.hi.is_finite() {
            violations.push(CoverViolation::Unbounded { index: i });
        } else if iv.lo >= iv.hi {
            violations.push(CoverViolation::Empty { index: i });
        }
        if !iv.is_open() {
            violations.push(CoverViolation::NotOpen { index: i });
        }
    }
    // The structural checks below read endpoints as open ones; they only need
    // every interval to be a proper bounded one.
    if violations.iter().any(|v| matches!(v, CoverViolation::Unbounded { .. } | CoverViolation::Empty { .. })) {
        return Err(CoverError::Invalid(violations));
    }

    let mut order: Vec<usize> = (0..intervals.len()).collect();
    order.sort_by(|&a, &b| {
        intervals[a].lo.total_cmp(&intervals[b].lo).then(intervals[a].hi.total_cmp(&intervals[b].hi))
    });
    let sorted: Vec<Interval> = order.iter().map(|&i| intervals[i]).collect();
    let n = sorted.len();

    // Minimality: an open interval lies in the union of open intervals iff one
    // merged run of the others covers it.
    for k in 0..n {
        let mut runs: Vec<(f64, f64)> = Vec::new();
        for (j, iv) in sorted.iter().enumerate() {
            if j == k {
                continue;
            }
            match runs.last_mut() {
                Some(last) if iv.lo < last.1 => last.1 = last.1.max(iv.hi),
                _ => runs.push((iv.lo, iv.hi)),
            }
        }
        let me = sorted[k];
        if runs.iter().any(|&(c, d)| c <= me.lo && d >= me.hi) {
            violations.push(CoverViolation::NotMinimal { index: order[k] });
        }
    }

    for a in 0..n {
        for b in a + 2..n {
            if sorted[a].lo.max(sorted[b].lo) < sorted[a].hi.min(sorted[b].hi) {
                let (x, y) = (order[a].min(order[b]), order[a].max(order[b]));
                violations.push(CoverViolation::TripleOverlap { first: x, second: y });
            }
        }
    }

    let mut reach = sorted[0].hi;
    for iv in &sorted[1..] {
        if iv.lo >= reach {
            violations.push(CoverViolation::Disconnected { at: reach });
        }
        reach = reach.max(iv.hi);
    }

    // Genericity is only meaningful once the overlap pattern is a chain.
    let chain = violations
        .iter()
        .all(|v| !matches!(v, CoverViolation::TripleOverlap { .. } | CoverViolation::Disconnected { .. }));
    if chain {
        for k in 1..n.saturating_sub(1) {
            if sorted[k - 1].hi == sorted[k + 1].lo {
                violations.push(CoverViolation::NotGeneric { index: order[k] });
            }
        }
    }

    if violations.is_empty() {
        Ok(GomicCover { intervals: sorted })
    } else {
        Err(CoverError::Invalid(violations))
    }
}

/// Convenience wrapper for `validate_gomic` over open `(lo, hi)` pairs.
pub fn cover_from_pairs(pairs: &[(f64, f64)]) -> Result<GomicCover, CoverError> {
    let ivs: Vec<Interval> = pairs.iter().map(|&(a, b)| Interval::open(a, b)).collect();
    validate_gomic(&ivs)
}

/// Splits cover element `index` into lower overlap, proper part and upper overlap.
pub fn decompose_interval(cover: &GomicCover, index: usize) -> (Option<Interval>, Interval, Option<Interval>) {
    let d = cover.decompose(index);
    (d.lower, d.proper, d.upper)
}

/// `n` open intervals of common length `L` covering `(lo, hi)`, consecutive
/// ones overlapping on `overlap·L`, so that `(n − overlap·(n−1))·L = hi − lo`.
///
/// For `(0, 3, 2, 0.25)` this gives `L = 12/7` and the cover
/// `{(0, 12/7), (9/7, 3)}`: overlap `3/7 = 0.25·L`. Presenting it as
/// `{(0,2),(1.5,3.5)}` would keep the overlap fraction but overshoot `hi`.
/// The endpoints `lo` and `hi` themselves are not covered, so callers covering
/// a closed range `[m, M]` should pass slightly wider bounds.
pub fn uniform_cover(lo: f64, hi: f64, n: usize, overlap: f64) -> Result<GomicCover, CoverError> {
    if n == 0 {
        return Err(CoverError::InvalidParameters("n must be at least 1".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CoverError::InvalidParameters(format!("need finite lo < hi, got {lo}, {hi}")));
    }
    if !(overlap > 0.0 && overlap < 0.5) {
        return Err(CoverError::InvalidParameters(format!("overlap fraction must lie in (0, 0.5), got {overlap}")));
    }
    let len = (hi - lo) / (n as f64 - overlap * (n as f64 - 1.0));
    let step = (1.0 - overlap) * len;
    let intervals: Vec<Interval> = (0..n)
        .map(|k| {
            let a = lo + k as f64 * step;
            let b = if k + 1 == n { hi } else { a + len };
            Interval::open(a, b)
        })
        .collect();
    validate_gomic(&intervals)
}

impl GomicCover {
    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Maximal interval length.
    pub fn granularity(&self) -> f64 {
        self.intervals.iter().map(|i| i.length()).fold(0.0, f64::max)
    }

    /// The covered range `(lo, hi)` (open at both ends).
    pub fn range(&self) -> Interval {
        Interval::open(self.intervals[0].lo, self.intervals[self.len() - 1].hi)
    }

    /// All interval endpoints, sorted.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.intervals.iter().flat_map(|i| [i.lo, i.hi]).collect();
        e.sort_by(f64::total_cmp);
        e.dedup();
        e
    }

    pub fn is_endpoint(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.lo == x || i.hi == x)
    }

    pub fn covers(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    /// Overlap of elements `k` and `k+1`.
    pub fn intersection(&self, k: usize) -> Interval {
        Interval::open(self.intervals[k + 1].lo, self.intervals[k].hi)
    }

    pub fn intersections(&self) -> Vec<Interval> {
        (0..self.len().saturating_sub(1)).map(|k| self.intersection(k)).collect()
    }

    pub fn decompose(&self, index: usize) -> Decomposition {
        let me = self.intervals[index];
        let lower = (index > 0).then(|| self.intersection(index - 1));
        let upper = (index + 1 < self.len()).then(|| self.intersection(index));
        let (plo, plc) = match lower {
            Some(l) => (l.hi, true),
            None => (me.lo, false),
        };
        let (phi, phc) = match upper {
            Some(u) => (u.lo, true),
            None => (me.hi, false),
        };
        Decomposition { lower, proper: Interval::new(plo, phi, plc, phc), upper }
    }

    /// Proper parts of all elements, in order.
    pub fn proper_parts(&self) -> Vec<Interval> {
        (0..self.len()).map(|k| self.decompose(k).proper).collect()
    }
}

impl fmt::Display for GomicCover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.intervals.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl Serialize for GomicCover {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.intervals.iter().map(|i| [i.lo, i.hi]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GomicCover {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        let pairs: Vec<(f64, f64)> = pairs.into_iter().map(|[a, b]| (a, b)).collect();
        cover_from_pairs(&pairs).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Above,
    Below,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Square {
    pub interval: Interval,
    pub side: Side,
}

impl Square {
    pub fn contains(&self, (x, y): (f64, f64)) -> bool {
        let (a, b) = (self.interval.lo, self.interval.hi);
        match self.side {
            Side::Above => a <= x && x <= y && y <= b,
            Side::Below => a <= y && y < x && x <= b,
        }
    }

    /// ℓ∞ distance to the closed half-square: the least `r` for which the
    /// box of radius `r` around the point meets it.
    pub fn distance(&self, (x, y): (f64, f64)) -> f64 {
        let (a, b) = (self.interval.lo, self.interval.hi);
        let (u, v) = match self.side {
            Side::Above => (x, y),
            Side::Below => (y, x),
        };
        [0.0, a - u, v - b, (u - v) / 2.0, u - b, a - v].into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// The corner of the closure farthest from the diagonal.
    pub fn corner(&self) -> (f64, f64) {
        let (a, b) = (self.interval.lo, self.interval.hi);
        match self.side {
            Side::Above => (a, b),
            Side::Below => (b, a),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StairKind {
    /// Above half-squares over proper part ∪ upper overlap.
    Ord,
    /// Below half-squares over proper part ∪ lower overlap.
    Rel,
    /// Below half-squares over each cover element.
    ExtMinus,
    /// Below half-squares over each union of two consecutive elements.
    Ext,
}

impl StairKind {
    pub const ALL: [StairKind; 4] = [StairKind::Ord, StairKind::Rel, StairKind::ExtMinus, StairKind::Ext];
}

#[derive(Clone, Debug, PartialEq)]
pub struct Staircase {
    pub squares: Vec<Square>,
}

pub fn build_staircase(cover: &GomicCover, kind: StairKind) -> Staircase {
    let n = cover.len();
    let below = |interval| Square { interval, side: Side::Below };
    let squares = match kind {
        StairKind::Ord => (0..n)
            .map(|k| {
                let d = cover.decompose(k);
                let iv = d.upper.map_or(d.proper, |u| d.proper.hull(&u));
                Square { interval: iv, side: Side::Above }
            })
            .collect(),
        StairKind::Rel => (0..n)
            .map(|k| {
                let d = cover.decompose(k);
                below(d.lower.map_or(d.proper, |l| l.hull(&d.proper)))
            })
            .collect(),
        StairKind::ExtMinus => cover.intervals().iter().map(|&i| below(i)).collect(),
        // A one-element cover has no consecutive pair; fall back to the element
        // itself so that the extended staircase always contains ExtMinus.
        StairKind::Ext if n == 1 => vec![below(cover.intervals()[0])],
        StairKind::Ext => cover.intervals().windows(2).map(|w| below(w[0].hull(&w[1]))).collect(),
    };
    Staircase { squares }
}

/// `(inside, distance)` of a point with respect to a staircase.
pub fn classify_point(stair: &Staircase, p: (f64, f64)) -> (bool, f64) {
    if stair.contains(p) {
        (true, 0.0)
    } else {
        (false, stair.distance(p))
    }
}

impl Staircase {
    pub fn contains(&self, p: (f64, f64)) -> bool {
        self.squares.iter().any(|s| s.contains(p))
    }

    /// ℓ∞ distance to the closure; infinite for an empty staircase.
    pub fn distance(&self, p: (f64, f64)) -> f64 {
        self.squares.iter().map(|s| s.distance(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let items: Vec<serde_json::Value> = self
            .squares
            .iter()
            .map(|s| {
                serde_json::json!({
                    "interval": [s.interval.lo, s.interval.hi],
                    "side": s.side,
                })
            })
            .collect();
        serde_json::Value::Array(items)
    }
}

/// Directed ℓ∞ Hausdorff excess `sup_{p∈A} d(p, B)` between staircases of the
/// same side. Distance to a same-side half-square is monotone in each
/// coordinate over the closure, so the supremum is attained at a corner.
pub fn directed_excess(a: &Staircase, b: &Staircase) -> f64 {
    a.squares.iter().map(|s| b.distance(s.corner())).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cov(p: &[(f64, f64)]) -> GomicCover {
        cover_from_pairs(p).unwrap()
    }

    #[test]
    fn validates_three_element_chain() {
        let c = cov(&[(2.5, 4.0), (0.0, 2.0), (1.0, 3.0)]);
        assert_eq!(c.intervals()[0], Interval::open(0.0, 2.0));
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn containment_is_not_minimal() {
        let err = cover_from_pairs(&[(0.0, 3.0), (1.0, 2.0), (2.5, 4.0)]).unwrap_err();
        assert!(err.violations().contains(&CoverViolation::NotMinimal { index: 1 }));
    }

    #[test]
    fn covered_by_neighbours_is_not_minimal() {
        let err = cover_from_pairs(&[(0.0, 2.0), (1.0, 3.0), (1.5, 4.0)]).unwrap_err();
        assert!(err.violations().contains(&CoverViolation::NotMinimal { index: 1 }));
    }

    #[test]
    fn reports_all_violations() {
        let ivs = [Interval::closed(0.0, 1.0), Interval::open(2.0, 3.0), Interval::new(4.0, 5.0, false, true)];
        let err = validate_gomic(&ivs).unwrap_err();
        let names: Vec<&str> = err.violations().iter().map(|v| v.name()).collect();
        assert_eq!(names, ["NotOpen", "NotOpen", "Disconnected", "Disconnected"]);
        let err = cover_from_pairs(&[(0.0, 1.0), (1.0, 2.0), (3.0, 4.0)]).unwrap_err();
        let gaps = err.violations().iter().filter(|v| v.name() == "Disconnected").count();
        assert_eq!(gaps, 2);
    }

    #[test]
    fn singleton_proper_part_is_not_generic() {
        let err = cover_from_pairs(&[(0.0, 2.0), (1.0, 3.0), (2.0, 4.0)]).unwrap_err();
        assert_eq!(err.violations(), &[CoverViolation::NotGeneric { index: 1 }]);
    }

    #[test]
    fn decomposition_examples() {
        let c = cov(&[(0.0, 2.0), (1.0, 3.0), (2.5, 4.0)]);
        assert_eq!(
            decompose_interval(&c, 0),
            (None, Interval::new(0.0, 1.0, false, true), Some(Interval::open(1.0, 2.0)))
        );
        assert_eq!(
            decompose_interval(&c, 1),
            (Some(Interval::open(1.0, 2.0)), Interval::closed(2.0, 2.5), Some(Interval::open(2.5, 3.0)))
        );
        let single = cov(&[(0.0, 5.0)]);
        assert_eq!(decompose_interval(&single, 0), (None, Interval::open(0.0, 5.0), None));
    }

    #[test]
    fn uniform_cover_shapes() {
        let c = uniform_cover(0.0, 10.0, 1, 0.2).unwrap();
        assert_eq!(c.intervals(), &[Interval::open(0.0, 10.0)]);
        let c = uniform_cover(0.0, 3.0, 2, 0.25).unwrap();
        let len = 3.0 / 1.75;
        assert!((c.granularity() - len).abs() < 1e-12);
        assert!((c.intersection(0).length() - 0.25 * len).abs() < 1e-12);
        let c = uniform_cover(0.0, 1.0, 4, 0.3).unwrap();
        assert_eq!(c.len(), 4);
        for k in 0..3 {
            assert!((c.intersection(k).length() - 0.3 * c.granularity()).abs() < 1e-12);
        }
        assert!(uniform_cover(0.0, 1.0, 3, 0.5).is_err());
        assert!(uniform_cover(1.0, 1.0, 3, 0.2).is_err());
    }

    #[test]
    fn staircase_shapes() {
        let c = cov(&[(0.0, 2.0), (1.0, 3.0)]);
        let o = build_staircase(&c, StairKind::Ord);
        assert_eq!(o.squares[0].interval, Interval::open(0.0, 2.0));
        assert_eq!(o.squares[1].interval, Interval::new(2.0, 3.0, true, false));
        let e = build_staircase(&c, StairKind::Ext);
        assert_eq!(e.squares.len(), 1);
        assert_eq!(e.squares[0].interval, Interval::open(0.0, 3.0));
    }

    #[test]
    fn classify_examples() {
        let c = cov(&[(0.0, 2.0), (1.0, 3.0)]);
        let o = build_staircase(&c, StairKind::Ord);
        assert_eq!(classify_point(&o, (0.5, 1.5)), (true, 0.0));
        let (inside, d) = classify_point(&o, (0.5, 2.6));
        assert!(!inside);
        assert!((d - 0.6).abs() < 1e-12);
        let em = build_staircase(&c, StairKind::ExtMinus);
        let (inside, d) = classify_point(&em, (2.9, 0.5));
        assert!(!inside);
        assert!((d - 0.5).abs() < 1e-12);
        let e = build_staircase(&c, StairKind::Ext);
        assert_eq!(classify_point(&e, (2.9, 0.5)), (true, 0.0));
    }

    #[test]
    fn below_square_excludes_diagonal() {
        let s = Square { interval: Interval::open(0.0, 1.0), side: Side::Below };
        assert!(!s.contains((0.5, 0.5)));
        assert_eq!(s.distance((0.5, 0.5)), 0.0);
    }
}
