//! Area-ratio evaluation of mined tables against ground truth.
//!
//! Three levels: `or1` compares two boxes, `or2` compares two items (box lists) and
//! `eval_table` compares whole tables (item lists). At both upper levels the elements
//! are paired one-to-one greedily by descending overlap, and the sum over pairs is
//! normalised by the larger of the two counts, so missing or spurious elements cost.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::doc_model::{BBox, GroundTruthTable, Zone};
use crate::error::{Error, Result};
use crate::miner::TableResult;

/// Dice-style overlap `2|A∩B| / (|A|+|B|)`; 0 when both boxes have zero area.
pub fn or1(a: &BBox, b: &BBox) -> f64 {
    let denom = a.area() + b.area();
    if denom == 0 {
        return 0.0;
    }
    2.0 * a.intersection_area(b) as f64 / denom as f64
}

/// Greedy one-to-one pairing over a score matrix, best pairs first. Ties resolve to
/// the lower row, then the lower column. Returns the sum of paired scores.
fn greedy_pairing(scores: &[Vec<f64>]) -> f64 {
    let mut cells: Vec<(f64, usize, usize)> = scores
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, &s)| (s, i, j)))
        .filter(|c| c.0 > 0.0)
        .collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let rows = scores.len();
    let cols = scores.first().map_or(0, Vec::len);
    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    let mut sum = 0.0;
    for (s, i, j) in cells {
        if !row_used[i] && !col_used[j] {
            row_used[i] = true;
            col_used[j] = true;
            sum += s;
        }
    }
    sum
}

pub fn or2(gt_item: &[BBox], item: &[BBox]) -> Result<f64> {
    if gt_item.is_empty() || item.is_empty() {
        return Err(Error::EmptyItem);
    }
    let scores: Vec<Vec<f64>> = gt_item
        .iter()
        .map(|g| item.iter().map(|d| or1(g, d)).collect())
        .collect();
    Ok(greedy_pairing(&scores) / gt_item.len().max(item.len()) as f64)
}

pub fn eval_table(gt: &GroundTruthTable, result: &TableResult) -> Result<f64> {
    if gt.doc_id != result.doc_id {
        return Err(Error::DocMismatch {
            expected: gt.doc_id.clone(),
            found: result.doc_id.clone(),
        });
    }
    let denom = gt.items.len().max(result.items.len());
    if denom == 0 {
        return Ok(0.0);
    }
    let scores: Vec<Vec<f64>> = gt
        .items
        .iter()
        .map(|g| {
            result
                .items
                .iter()
                // an item with no selected-field boxes overlaps nothing
                .map(|d| or2(g, &d.boxes).unwrap_or(0.0))
                .collect()
        })
        .collect();
    Ok(greedy_pairing(&scores) / denom as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocEval {
    pub doc_id: String,
    pub eval: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub overall: f64,
    pub per_zone: BTreeMap<Zone, f64>,
    pub per_doc: Vec<DocEval>,
}

/// Where the input patterns came from; only changes the report's row label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternSource {
    Lab,
    Client,
}

impl PatternSource {
    pub fn row_label(&self) -> &'static str {
        match self {
            PatternSource::Lab => "Eval. 1 (lab patterns)",
            PatternSource::Client => "Eval. 2 (client patterns)",
        }
    }
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Evaluates every document and aggregates per zone and overall. Documents are matched
/// by id; any id present on only one side is an error. `zones` maps doc ids to the zone
/// of their table; documents without a zone only count towards the overall figure.
pub fn report(
    corpus_gt: &[GroundTruthTable],
    corpus_results: &[TableResult],
    zones: &HashMap<String, Zone>,
) -> Result<EvalReport> {
    let by_id: HashMap<&str, &TableResult> =
        corpus_results.iter().map(|r| (r.doc_id.as_str(), r)).collect();
    let gt_ids: std::collections::HashSet<&str> =
        corpus_gt.iter().map(|g| g.doc_id.as_str()).collect();
    let mut unmatched: Vec<String> = corpus_gt
        .iter()
        .filter(|g| !by_id.contains_key(g.doc_id.as_str()))
        .map(|g| g.doc_id.clone())
        .chain(
            corpus_results
                .iter()
                .filter(|r| !gt_ids.contains(r.doc_id.as_str()))
                .map(|r| r.doc_id.clone()),
        )
        .collect();
    if !unmatched.is_empty() {
        unmatched.sort();
        unmatched.dedup();
        return Err(Error::UnmatchedDocs(unmatched));
    }

    let mut per_doc = Vec::with_capacity(corpus_gt.len());
    for gt in corpus_gt {
        let eval = eval_table(gt, by_id[gt.doc_id.as_str()])?;
        per_doc.push(DocEval {
            doc_id: gt.doc_id.clone(),
            eval,
        });
    }
    let mut per_zone = BTreeMap::new();
    for zone in Zone::ALL {
        let vals: Vec<f64> = per_doc
            .iter()
            .filter(|d| zones.get(&d.doc_id) == Some(&zone))
            .map(|d| d.eval)
            .collect();
        if !vals.is_empty() {
            per_zone.insert(zone, mean(vals));
        }
    }
    Ok(EvalReport {
        overall: mean(per_doc.iter().map(|d| d.eval)),
        per_zone,
        per_doc,
    })
}

impl EvalReport {
    /// Percentages laid out as zones × pattern source, plus the average column.
    pub fn to_table(&self, source: PatternSource) -> String {
        let pct = |v: Option<&f64>| v.map_or_else(|| "-".to_string(), |v| format!("{:.1}", v * 100.0));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<28}{:>8}{:>8}{:>8}{:>8}",
            "Table type", "Header", "Body", "Footer", "Avg."
        );
        let _ = writeln!(
            out,
            "{:<28}{:>8}{:>8}{:>8}{:>8}",
            source.row_label(),
            pct(self.per_zone.get(&Zone::Header)),
            pct(self.per_zone.get(&Zone::Body)),
            pct(self.per_zone.get(&Zone::Footer)),
            pct(Some(&self.overall)),
        );
        let _ = writeln!(out, "documents: {}", self.per_doc.len());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::MinedItem;
    use proptest::prelude::*;

    fn item(boxes: Vec<BBox>) -> MinedItem {
        MinedItem {
            score: 1.0,
            matches: vec![],
            edge_scores: vec![],
            boxes,
        }
    }

    fn row(y: i64) -> Vec<BBox> {
        vec![BBox::new(0, y, 50, y + 20), BBox::new(100, y, 150, y + 20)]
    }

    #[test]
    fn or1_cases() {
        let a = BBox::new(0, 0, 10, 10);
        assert_eq!(or1(&a, &a), 1.0);
        assert_eq!(or1(&a, &BBox::new(20, 20, 30, 30)), 0.0);
        assert_eq!(or1(&a, &BBox::new(5, 0, 15, 10)), 0.5);
        let z = BBox::new(3, 3, 3, 3);
        assert_eq!(or1(&z, &z), 0.0);
    }

    #[test]
    fn or2_normalises_by_larger_item() {
        let gt = [row(0), row(100)].concat();
        assert_eq!(or2(&gt, &gt).unwrap(), 1.0);
        assert_eq!(or2(&gt, &row(0)).unwrap(), 0.5);
        assert!(matches!(or2(&[], &row(0)), Err(Error::EmptyItem)));
    }

    #[test]
    fn eval_five_of_seven() {
        let gt = GroundTruthTable {
            doc_id: "d".into(),
            items: (0..7).map(|i| row(i * 50)).collect(),
        };
        let result = TableResult {
            items: (0..5).map(|i| item(row(i * 50))).collect(),
            ..TableResult::empty("d", "p")
        };
        let e = eval_table(&gt, &result).unwrap();
        assert!((e - 5.0 / 7.0).abs() < 1e-12);
        let perfect = TableResult {
            items: (0..7).map(|i| item(row(i * 50))).collect(),
            ..TableResult::empty("d", "p")
        };
        assert_eq!(eval_table(&gt, &perfect).unwrap(), 1.0);
        assert_eq!(eval_table(&gt, &TableResult::empty("d", "p")).unwrap(), 0.0);
        let other = TableResult::empty("x", "p");
        assert!(matches!(eval_table(&gt, &other), Err(Error::DocMismatch { .. })));
    }

    #[test]
    fn report_means() {
        let gt = |id: &str| GroundTruthTable {
            doc_id: id.into(),
            items: vec![row(0), row(50)],
        };
        let full = |id: &str| TableResult {
            items: vec![item(row(0)), item(row(50))],
            ..TableResult::empty(id, "p")
        };
        let half = |id: &str| TableResult {
            items: vec![item(row(0))],
            ..TableResult::empty(id, "p")
        };
        let zones: HashMap<String, Zone> =
            [("a".to_string(), Zone::Body), ("b".to_string(), Zone::Footer)].into();
        let r = report(&[gt("a"), gt("b")], &[half("b"), full("a")], &zones).unwrap();
        assert_eq!(r.overall, 0.75);
        assert_eq!(r.per_zone[&Zone::Body], 1.0);
        assert_eq!(r.per_zone[&Zone::Footer], 0.5);
        assert!(!r.per_zone.contains_key(&Zone::Header));
        let table = r.to_table(PatternSource::Lab);
        assert!(table.contains("75.0"), "{table}");

        let err = report(&[gt("a")], &[full("a"), full("z")], &zones).unwrap_err();
        assert!(matches!(err, Error::UnmatchedDocs(ref ids) if ids == &["z".to_string()]));
    }

    fn arb_box() -> impl Strategy<Value = BBox> {
        (0i64..100, 0i64..100, 0i64..50, 0i64..50).prop_map(|(l, t, w, h)| BBox::new(l, t, l + w, t + h))
    }

    proptest! {
        #[test]
        fn or1_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
            let x = or1(&a, &b);
            prop_assert!((0.0..=1.0).contains(&x));
            prop_assert_eq!(x, or1(&b, &a));
        }

        #[test]
        fn shrinking_inside_decreases(l in 0i64..50, t in 0i64..50, w in 4i64..50, h in 4i64..50) {
            let a = BBox::new(l, t, l + w, t + h);
            let inner = BBox::new(l + 1, t + 1, l + w - 1, t + h - 1);
            let smaller = BBox::new(l + 2, t + 2, l + w - 2, t + h - 2);
            prop_assert!(or1(&a, &inner) < 1.0);
            prop_assert!(or1(&a, &smaller) < or1(&a, &inner));
        }

        #[test]
        fn count_mismatch_caps_eval(n_gt in 1usize..6, n_det in 0usize..6) {
            let gt = GroundTruthTable { doc_id: "d".into(), items: (0..n_gt as i64).map(|i| row(i * 50)).collect() };
            let res = TableResult { items: (0..n_det as i64).map(|i| item(row(i * 50))).collect(), ..TableResult::empty("d", "p") };
            let e = eval_table(&gt, &res).unwrap();
            let cap = n_gt.min(n_det) as f64 / n_gt.max(n_det) as f64;
            prop_assert!(e <= cap + 1e-12);
        }
    }
}
