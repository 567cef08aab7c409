//! Extended persistence diagrams, the Merge / Split / Shift transforms on
//! them, and staircase pruning into Mapper signatures.
//!
//! Every point stores `(birth value, death value)`. Ordinary points sit above
//! the diagonal, relative points below it, and extended points on either side
//! (`ExtPlus` on or above, `ExtMinus` strictly below).

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::covers::{build_staircase, GomicCover, StairKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PointKind {
    Ord,
    Rel,
    ExtPlus,
    ExtMinus,
}

impl PointKind {
    pub fn is_extended(self) -> bool {
        matches!(self, PointKind::ExtPlus | PointKind::ExtMinus)
    }
}

/// Which graph a signature describes: the MultiNerve Mapper (parallel edges
/// kept) or the ordinary Mapper (nerve, parallel edges collapsed).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    MultiNerve,
    Mapper,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint {
    pub birth: f64,
    pub death: f64,
    pub kind: PointKind,
    pub dim: usize,
}

impl DiagramPoint {
    pub fn new(birth: f64, death: f64, kind: PointKind, dim: usize) -> Self {
        // Adding 0.0 turns -0.0 into 0.0 so that sorting and equality agree.
        DiagramPoint { birth: birth + 0.0, death: death + 0.0, kind, dim }
    }

    pub fn coords(&self) -> (f64, f64) {
        (self.birth, self.death)
    }

    /// Whether the coordinates satisfy the side constraint of the kind.
    pub fn is_consistent(&self) -> bool {
        match self.kind {
            PointKind::Ord => self.birth < self.death,
            PointKind::Rel | PointKind::ExtMinus => self.birth > self.death,
            PointKind::ExtPlus => self.birth <= self.death,
        }
    }

    pub fn span(&self) -> f64 {
        (self.death - self.birth).abs()
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.birth
            .total_cmp(&other.birth)
            .then(self.death.total_cmp(&other.death))
            .then(self.kind.cmp(&other.kind))
            .then(self.dim.cmp(&other.dim))
    }
}

impl fmt::Display for DiagramPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}_{} ({}, {})", self.kind, self.dim, self.birth, self.death)
    }
}

/// A multiset of diagram points kept in a canonical order, so that equality
/// is multiset equality and serialization is deterministic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExtendedDiagram {
    points: Vec<DiagramPoint>,
}

impl ExtendedDiagram {
    pub fn new(points: Vec<DiagramPoint>) -> Self {
        let mut points: Vec<DiagramPoint> =
            points.into_iter().map(|p| DiagramPoint::new(p.birth, p.death, p.kind, p.dim)).collect();
        points.sort_by(DiagramPoint::total_cmp);
        ExtendedDiagram { points }
    }

    pub fn empty() -> Self {
        ExtendedDiagram::default()
    }

    pub fn points(&self) -> &[DiagramPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn filter(&self, keep: impl Fn(&DiagramPoint) -> bool) -> Self {
        ExtendedDiagram { points: self.points.iter().copied().filter(|p| keep(p)).collect() }
    }

    pub fn of_kind(&self, kind: PointKind, dim: usize) -> Self {
        self.filter(|p| p.kind == kind && p.dim == dim)
    }

    pub fn of_dim(&self, dim: usize) -> Self {
        self.filter(|p| p.dim == dim)
    }

    /// Keeps the classes a Reeb-graph quotient can carry: everything in
    /// dimension 0 and the relative and below-diagonal extended classes in
    /// dimension 1.
    pub fn quotient_part(&self) -> Self {
        self.filter(|p| match p.dim {
            0 => true,
            1 => matches!(p.kind, PointKind::Rel | PointKind::ExtMinus),
            _ => false,
        })
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points);
        ExtendedDiagram::new(pts)
    }

    pub fn map_points(&self, f: impl Fn(&DiagramPoint) -> Option<DiagramPoint>) -> Self {
        ExtendedDiagram::new(self.points.iter().filter_map(f).collect())
    }

    /// Smallest `|death − birth|` over points off the diagonal, if any.
    pub fn min_span(&self) -> Option<f64> {
        self.points.iter().map(|p| p.span()).filter(|&s| s > 0.0).min_by(f64::total_cmp)
    }
}

impl Serialize for ExtendedDiagram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.points.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExtendedDiagram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let points: Vec<DiagramPoint> = Vec::deserialize(d)?;
        if let Some(bad) = points.iter().find(|p| !p.is_consistent()) {
            return Err(serde::de::Error::custom(format!("point {bad} violates its kind's side constraint")));
        }
        Ok(ExtendedDiagram::new(points))
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DiagramError {
    #[error("point {point} has a coordinate inside the band around {at} of width {eps}")]
    BandOccupied { point: DiagramPoint, at: f64, eps: f64 },
    #[error("point {point} has a coordinate equal to a cover endpoint")]
    DegenerateCover { point: DiagramPoint },
    #[error("split width must be positive, got {0}")]
    InvalidEpsilon(f64),
}

/// The value a Merge over `[a, b]` collapses to. Shared with the telescope
/// operations so both sides produce bit-identical coordinates.
pub fn merge_value(a: f64, b: f64) -> f64 {
    (a + b) / 2.0
}

/// Snaps every coordinate in `[a, b]` to the midpoint. Ordinary and relative
/// points that land on the diagonal disappear; `ExtMinus` points that land on
/// it become `ExtPlus`.
pub fn merge_transform(d: &ExtendedDiagram, a: f64, b: f64) -> ExtendedDiagram {
    let mid = merge_value(a, b);
    let snap = |x: f64| if a <= x && x <= b { mid } else { x };
    d.map_points(|p| {
        let (x, y) = (snap(p.birth), snap(p.death));
        let kind = match p.kind {
            PointKind::Ord | PointKind::Rel if x == y => return None,
            PointKind::ExtMinus if x <= y => PointKind::ExtPlus,
            k => k,
        };
        Some(DiagramPoint::new(x, y, kind, p.dim))
    })
}

fn check_band(d: &ExtendedDiagram, lo: f64, hi: f64, at: f64, eps: f64) -> Result<(), DiagramError> {
    let inside = |x: f64| lo < x && x < hi && x != at;
    match d.points.iter().find(|p| inside(p.birth) || inside(p.death)) {
        Some(&point) => Err(DiagramError::BandOccupied { point, at, eps }),
        None => Ok(()),
    }
}

/// Moves coordinates equal to `a_i` to `a_i ± eps`: relative births and
/// non-ordinary deaths go up, ordinary deaths and other births go down.
pub fn split_transform(d: &ExtendedDiagram, a_i: f64, eps: f64) -> Result<ExtendedDiagram, DiagramError> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(DiagramError::InvalidEpsilon(eps));
    }
    check_band(d, a_i - eps, a_i + eps, a_i, eps)?;
    let (down, up) = (a_i - eps, a_i + eps);
    Ok(d.map_points(|p| {
        let x = match (p.birth == a_i, p.kind) {
            (true, PointKind::Rel) => up,
            (true, _) => down,
            (false, _) => p.birth,
        };
        let y = match (p.death == a_i, p.kind) {
            (true, PointKind::Ord) => down,
            (true, _) => up,
            (false, _) => p.death,
        };
        Some(DiagramPoint::new(x, y, p.kind, p.dim))
    }))
}

/// Moves coordinates equal to `a_i` to `a_i + eps` (`eps` may be negative).
pub fn shift_transform(d: &ExtendedDiagram, a_i: f64, eps: f64) -> Result<ExtendedDiagram, DiagramError> {
    let target = a_i + eps;
    check_band(d, a_i.min(target), a_i.max(target), a_i, eps)?;
    Ok(d.map_points(|p| {
        let mv = |x: f64| if x == a_i { target } else { x };
        Some(DiagramPoint::new(mv(p.birth), mv(p.death), p.kind, p.dim))
    }))
}

/// The signature of a cover: the quotient part of `d` with the points inside
/// the staircases removed. Ordinary points are tested against the ordinary
/// staircase, relative ones against the relative staircase, and `ExtMinus`
/// points against the ExtMinus staircase (MultiNerve) or the wider extended
/// staircase (Mapper). `ExtPlus` points always survive.
pub fn prune_signature(
    d: &ExtendedDiagram,
    cover: &GomicCover,
    variant: Variant,
) -> Result<ExtendedDiagram, DiagramError> {
    let q = d.quotient_part();
    if let Some(&point) = q.points.iter().find(|p| cover.is_endpoint(p.birth) || cover.is_endpoint(p.death)) {
        return Err(DiagramError::DegenerateCover { point });
    }
    let ord = build_staircase(cover, StairKind::Ord);
    let rel = build_staircase(cover, StairKind::Rel);
    let ext = build_staircase(
        cover,
        match variant {
            Variant::MultiNerve => StairKind::ExtMinus,
            Variant::Mapper => StairKind::Ext,
        },
    );
    Ok(q.filter(|p| {
        let c = p.coords();
        match p.kind {
            PointKind::Ord => !ord.contains(c),
            PointKind::Rel => !rel.contains(c),
            PointKind::ExtMinus => !ext.contains(c),
            PointKind::ExtPlus => true,
        }
    }))
}
