//! Directional spatial predicates between field boxes, refined with neighbourhood
//! levels that count intervening fields.
//!
//! A relation `r(a, b)` describes where `b` lies with respect to `a` on each axis of the
//! 3×3 projection grid around `a`. Interval endpoints are compared strictly, so boxes
//! that touch are considered overlapping.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::doc_model::BBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HPred {
    Left,
    HOverlap,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VPred {
    Above,
    VOverlap,
    Below,
}

impl HPred {
    pub fn converse(self) -> Self {
        match self {
            HPred::Left => HPred::Right,
            HPred::HOverlap => HPred::HOverlap,
            HPred::Right => HPred::Left,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            HPred::Left => "left",
            HPred::HOverlap => "h_overlap",
            HPred::Right => "right",
        }
    }
}

impl VPred {
    pub fn converse(self) -> Self {
        match self {
            VPred::Above => VPred::Below,
            VPred::VOverlap => VPred::VOverlap,
            VPred::Below => VPred::Above,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            VPred::Above => "above",
            VPred::VOverlap => "v_overlap",
            VPred::Below => "below",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub hpred: HPred,
    pub vpred: VPred,
    pub k1: usize,
    pub k2: usize,
}

impl Relation {
    pub fn converse(&self) -> Relation {
        Relation {
            hpred: self.hpred.converse(),
            vpred: self.vpred.converse(),
            ..*self
        }
    }

    pub fn same_predicates(&self, other: &Relation) -> bool {
        self.hpred == other.hpred && self.vpred == other.vpred
    }

    /// Same predicates with each level off by at most `slack`.
    pub fn compatible(&self, other: &Relation, slack: usize) -> bool {
        self.same_predicates(other)
            && self.k1.abs_diff(other.k1) <= slack
            && self.k2.abs_diff(other.k2) <= slack
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.hpred.as_str(),
            self.vpred.as_str(),
            self.k1,
            self.k2
        )
    }
}

/// Where `b` lies relative to `a`, per axis.
pub fn base_predicates(a: &BBox, b: &BBox) -> (HPred, VPred) {
    let h = if b.right < a.left {
        HPred::Left
    } else if b.left > a.right {
        HPred::Right
    } else {
        HPred::HOverlap
    };
    let v = if b.bottom < a.top {
        VPred::Above
    } else if b.top > a.bottom {
        VPred::Below
    } else {
        VPred::VOverlap
    };
    (h, v)
}

fn x_overlaps(a: &BBox, b: &BBox) -> bool {
    a.left <= b.right && b.left <= a.right
}

fn y_overlaps(a: &BBox, b: &BBox) -> bool {
    a.top <= b.bottom && b.top <= a.bottom
}

/// Counts of fields strictly between `a` and `b` horizontally (sharing rows with both)
/// and vertically (sharing columns with both). `others` may include `a` and `b`
/// themselves; they are skipped by index.
pub fn neighborhood_levels_of(a: usize, b: usize, boxes: &[BBox]) -> (usize, usize) {
    let (ba, bb) = (&boxes[a], &boxes[b]);
    let (h, v) = base_predicates(ba, bb);
    let others = boxes
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != a && i != b)
        .map(|(_, c)| c);

    let (lo, hi) = match h {
        HPred::Right => (ba, bb),
        HPred::Left => (bb, ba),
        HPred::HOverlap => (ba, ba),
    };
    let (top, bottom) = match v {
        VPred::Below => (ba, bb),
        VPred::Above => (bb, ba),
        VPred::VOverlap => (ba, ba),
    };

    let mut k1 = 0;
    let mut k2 = 0;
    for c in others {
        if h != HPred::HOverlap
            && c.left > lo.right
            && c.right < hi.left
            && y_overlaps(c, ba)
            && y_overlaps(c, bb)
        {
            k1 += 1;
        }
        if v != VPred::VOverlap
            && c.top > top.bottom
            && c.bottom < bottom.top
            && x_overlaps(c, ba)
            && x_overlaps(c, bb)
        {
            k2 += 1;
        }
    }
    (k1, k2)
}

/// Relation of `boxes[b]` with respect to `boxes[a]`, levels counted over `boxes`.
pub fn relation_of(a: usize, b: usize, boxes: &[BBox]) -> Relation {
    let (hpred, vpred) = base_predicates(&boxes[a], &boxes[b]);
    let (k1, k2) = neighborhood_levels_of(a, b, boxes);
    Relation {
        hpred,
        vpred,
        k1,
        k2,
    }
}

/// Field-level convenience wrappers.
pub mod fields {
    use super::*;
    use crate::field_former::Field;

    fn boxes_and_positions(a: &Field, b: &Field, all: &[Field]) -> (Vec<BBox>, usize, usize) {
        let boxes: Vec<BBox> = all.iter().map(|f| *f.bbox()).collect();
        let pa = all
            .iter()
            .position(|f| f.field_id == a.field_id)
            .expect("`a` must be one of `all`");
        let pb = all
            .iter()
            .position(|f| f.field_id == b.field_id)
            .expect("`b` must be one of `all`");
        (boxes, pa, pb)
    }

    pub fn neighborhood_levels(a: &Field, b: &Field, all: &[Field]) -> (usize, usize) {
        let (boxes, pa, pb) = boxes_and_positions(a, b, all);
        neighborhood_levels_of(pa, pb, &boxes)
    }

    pub fn relation(a: &Field, b: &Field, all: &[Field]) -> Relation {
        let (boxes, pa, pb) = boxes_and_positions(a, b, all);
        relation_of(pa, pb, &boxes)
    }
}
