//! Oracles shared by the integration tests. Everything here is written from the
//! definitions, without calling into the code it checks.

#![allow(dead_code)]

use argmine::field_former::FieldFeatures;
use argmine::miner::Feature;
use argmine::{Arg, BBox, Field, LabelName, ScoreWeights, Taxonomy};
use rand::Rng;

/// Full-matrix edit distance.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = if a[i - 1] == b[j - 1] { 0 } else { 1 };
            d[i][j] = (d[i - 1][j] + 1)
                .min(d[i][j - 1] + 1)
                .min(d[i - 1][j - 1] + cost);
        }
    }
    d[a.len()][b.len()]
}

pub fn sim_type(x: &str, y: &str) -> f64 {
    let m = x.chars().count().max(y.chars().count()) as f64;
    1.0 - edit_distance(x, y) as f64 / m
}

pub fn sim_count(x: usize, y: usize) -> f64 {
    if x == 0 && y == 0 {
        return 1.0;
    }
    let (lo, hi) = if x < y { (x, y) } else { (y, x) };
    lo as f64 / hi as f64
}

pub fn node_score(q: &Field, d: &Field, w: &ScoreWeights) -> f64 {
    let (ql, dl) = (q.features.label.name, d.features.label.name);
    if ql == dl && ql != LabelName::Other {
        return 1.0;
    }
    let mut total = 0.0;
    for (f, l) in &w.lambda {
        let s = match f {
            Feature::Type => sim_type(&q.features.ftype, &d.features.ftype),
            Feature::Word => sim_count(q.features.now, d.features.now),
            Feature::Length => sim_count(q.features.size, d.features.size),
        };
        total += l * s;
    }
    total / w.lambda.len() as f64
}

/// (horizontal, vertical, k1, k2) with -1/0/1 for left|above / overlap / right|below.
pub type Rel = (i8, i8, usize, usize);

fn side(lo_a: i64, hi_a: i64, lo_b: i64, hi_b: i64) -> i8 {
    if hi_b < lo_a {
        -1
    } else if lo_b > hi_a {
        1
    } else {
        0
    }
}

pub fn rel(i: usize, j: usize, boxes: &[BBox]) -> Rel {
    let (a, b) = (boxes[i], boxes[j]);
    let h = side(a.left, a.right, b.left, b.right);
    let v = side(a.top, a.bottom, b.top, b.bottom);
    let closed = |p: i64, q: i64, r: i64, s: i64| p <= s && r <= q;
    let mut k1 = 0;
    let mut k2 = 0;
    for (n, c) in boxes.iter().enumerate() {
        if n == i || n == j {
            continue;
        }
        if h != 0 {
            let (gap_lo, gap_hi) = if h > 0 { (a.right, b.left) } else { (b.right, a.left) };
            if c.left > gap_lo
                && c.right < gap_hi
                && closed(c.top, c.bottom, a.top, a.bottom)
                && closed(c.top, c.bottom, b.top, b.bottom)
            {
                k1 += 1;
            }
        }
        if v != 0 {
            let (gap_lo, gap_hi) = if v > 0 { (a.bottom, b.top) } else { (b.bottom, a.top) };
            if c.top > gap_lo
                && c.bottom < gap_hi
                && closed(c.left, c.right, a.left, a.right)
                && closed(c.left, c.right, b.left, b.right)
            {
                k2 += 1;
            }
        }
    }
    (h, v, k1, k2)
}

fn close_enough(p: Rel, d: Rel) -> bool {
    p.0 == d.0 && p.1 == d.1 && p.2.abs_diff(d.2) <= 1 && p.3.abs_diff(d.3) <= 1
}

/// The anchor node: selected, labelled, rarest non-zero label count in the document,
/// ties to the lower field id.
pub fn anchor_node(q: &Arg, fields: &[Field]) -> Option<usize> {
    let count = |l: LabelName| fields.iter().filter(|f| f.features.label.name == l).count();
    q.nodes()
        .iter()
        .filter(|n| n.selected && n.label.name != LabelName::Other && count(n.label.name) > 0)
        .min_by_key(|n| (count(n.label.name), n.field.field_id))
        .map(|n| n.node_id)
}

/// Score of one assignment, or `None` when some placed pair breaks a pattern relation
/// beyond the tolerated level drift.
pub fn score_assignment(q: &Arg, fields: &[Field], w: &ScoreWeights, a: &[Option<usize>]) -> Option<f64> {
    let qboxes: Vec<BBox> = q.nodes().iter().map(|n| *n.field.bbox()).collect();
    let dboxes: Vec<BBox> = fields.iter().map(|f| *f.bbox()).collect();
    let v = q.len();
    let mut edges = 0.0;
    for i in 0..v {
        for j in i + 1..v {
            if let (Some(fi), Some(fj)) = (a[i], a[j]) {
                let (pr, dr) = (rel(i, j, &qboxes), rel(fi, fj, &dboxes));
                if !close_enough(pr, dr) {
                    return None;
                }
                if pr == dr {
                    edges += 1.0;
                }
            }
        }
    }
    let nodes: f64 = (0..v)
        .filter_map(|i| a[i].map(|f| node_score(&q.nodes()[i].field, &fields[f], w)))
        .sum();
    let r = (v * (v - 1) / 2) as f64;
    Some(if r == 0.0 {
        nodes / v as f64
    } else {
        w.alpha * edges / r + (1.0 - w.alpha) * nodes / v as f64
    })
}

/// Every admissible assignment with `pivot_node` fixed on `pivot_field`: other nodes
/// take distinct fields or stay absent. Returns the best score and all assignments
/// reaching it.
pub fn exhaustive_at(
    q: &Arg,
    fields: &[Field],
    w: &ScoreWeights,
    pivot_node: usize,
    pivot_field: usize,
) -> (f64, Vec<Vec<Option<usize>>>) {
    fn rec(k: usize, a: &mut Vec<Option<usize>>, fixed: usize, n: usize, out: &mut Vec<Vec<Option<usize>>>) {
        if k == a.len() {
            out.push(a.clone());
            return;
        }
        if k == fixed {
            return rec(k + 1, a, fixed, n, out);
        }
        a[k] = None;
        rec(k + 1, a, fixed, n, out);
        for f in 0..n {
            if !a.contains(&Some(f)) {
                a[k] = Some(f);
                rec(k + 1, a, fixed, n, out);
                a[k] = None;
            }
        }
    }
    let mut all = Vec::new();
    let mut a = vec![None; q.len()];
    a[pivot_node] = Some(pivot_field);
    rec(0, &mut a, pivot_node, fields.len(), &mut all);

    let scored: Vec<(f64, Vec<Option<usize>>)> = all
        .into_iter()
        .filter_map(|a| score_assignment(q, fields, w, &a).map(|s| (s, a)))
        .collect();
    let best = scored.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
    let argmax = scored.into_iter().filter(|x| x.0 >= best - 1e-12).map(|x| x.1).collect();
    (best, argmax)
}

/// Best matching score over every admissible assignment of every pivot.
pub fn exhaustive_best(q: &Arg, fields: &[Field], w: &ScoreWeights) -> Option<f64> {
    let anchor = anchor_node(q, fields)?;
    let label = q.nodes()[anchor].label.name;
    fields
        .iter()
        .filter(|f| f.features.label.name == label)
        .map(|p| exhaustive_at(q, fields, w, anchor, p.field_id).0)
        .reduce(f64::max)
}

const VALUES: &[&str] = &[
    "12.50", "3", "17", "AB1234", "XK0042", "Blue widget", "Steel bolt large", "01/02/2013",
    "15 %", "Total", "EUR", "4,200.00", "7", "ref", "Copper cable",
];

/// A free-standing field; ids are assigned by position in the caller's list.
pub fn make_field(id: usize, value: &str, bbox: BBox) -> Field {
    let label = Taxonomy::builtin().label(value).unwrap();
    Field {
        field_id: id,
        token_ids: vec![],
        features: FieldFeatures {
            bbox,
            value: value.to_string(),
            ftype: argmine::type_signature(value),
            size: value.chars().filter(|c| !c.is_whitespace()).count(),
            wsep: 0,
            now: value.split_whitespace().count(),
            nol: 1,
            label,
        },
    }
}

pub fn random_box(rng: &mut impl Rng) -> BBox {
    let l = rng.gen_range(0..12) * 20;
    let t = rng.gen_range(0..8) * 20;
    let w = rng.gen_range(1..4) * 15;
    BBox::new(l, t, l + w, t + 12)
}

/// A pattern of up to `max_nodes` nodes and a document of up to `max_fields` fields.
/// Half the documents contain a slightly disturbed copy of the pattern.
pub fn random_instance(rng: &mut impl Rng, max_nodes: usize, max_fields: usize) -> (Arg, Vec<Field>) {
    let v = rng.gen_range(1..=max_nodes);
    let mut pfields: Vec<Field> = (0..v)
        .map(|i| make_field(i, VALUES[rng.gen_range(0..VALUES.len())], random_box(rng)))
        .collect();
    // the first node is a selected, labelled one
    pfields[0] = make_field(0, ["12.50", "3", "AB1234"][rng.gen_range(0..3)], *pfields[0].bbox());
    let n_sel = rng.gen_range(1..=v);
    let completion = pfields.split_off(n_sel);
    let q = Arg::from_fields(pfields, completion, argmine::Zone::Body, 12, true);

    let n = rng.gen_range(1..=max_fields);
    let mut values: Vec<(String, BBox)> = Vec::new();
    if rng.gen_bool(0.5) {
        let (dx, dy) = (rng.gen_range(0..3) * 20, rng.gen_range(0..3) * 20);
        for node in q.nodes().iter().take(n) {
            let value = if rng.gen_bool(0.2) {
                VALUES[rng.gen_range(0..VALUES.len())].to_string()
            } else {
                node.field.features.value.clone()
            };
            values.push((value, node.field.bbox().translated(dx, dy)));
        }
    }
    while values.len() < n {
        values.push((VALUES[rng.gen_range(0..VALUES.len())].to_string(), random_box(rng)));
    }
    let fields = values
        .iter()
        .enumerate()
        .map(|(i, (value, b))| make_field(i, value, *b))
        .collect();
    (q, fields)
}
