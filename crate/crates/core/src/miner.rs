//! Mining items similar to a pattern graph out of a document.
//!
//! Mining starts from pivotal fields (document fields sharing the pattern's anchor
//! label) and assigns the remaining pattern nodes by walking the pivot's relation
//! vector. A document field is a candidate for a pattern node only when its relation to
//! every already assigned field has the same predicates as the pattern edge, with levels
//! allowed to drift by one. Nodes without an acceptable field stay absent and score
//! zero. Among all such assignments the one with the highest matching score wins; the
//! search is exhaustive with branch-and-bound pruning, capped by [`SEARCH_BUDGET`].
//!
//! Matching score, with `R = V(V-1)/2` pattern edges and `V` pattern nodes:
//!
//! ```text
//! S = alpha * (sum of edge scores) / R + (1 - alpha) * (sum of node scores) / V
//! ```
//!
//! Edge scores are 1 when the document relation equals the pattern relation exactly
//! (predicates and levels), else 0. Node scores come from [`feature_score`].

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::doc_model::{BBox, Document};
use crate::error::{Error, Result};
use crate::field_former::{form_fields, Field, LabelName, Taxonomy};
use crate::pattern_graph::{relation_vector, Arg, ArgNode};
use crate::spatial::{base_predicates, neighborhood_levels_of, Relation};

/// Node expansions allowed per pivot before the search settles for its best so far.
pub const SEARCH_BUDGET: usize = 2_000_000;

/// Level drift tolerated when filtering candidates.
const LEVEL_SLACK: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Type,
    Word,
    Length,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreWeights {
    pub alpha: f64,
    pub lambda: BTreeMap<Feature, f64>,
    pub accept_threshold: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            alpha: 0.5,
            lambda: [(Feature::Type, 1.0), (Feature::Word, 1.0), (Feature::Length, 1.0)]
                .into_iter()
                .collect(),
            accept_threshold: 0.7,
        }
    }
}

impl ScoreWeights {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.alpha) {
            return Err(Error::InvalidWeights(format!("alpha {} not in [0,1]", self.alpha)));
        }
        if !unit(self.accept_threshold) {
            return Err(Error::InvalidWeights(format!(
                "accept_threshold {} not in [0,1]",
                self.accept_threshold
            )));
        }
        if self.lambda.is_empty() {
            return Err(Error::InvalidWeights("lambda is empty".into()));
        }
        if let Some((f, l)) = self.lambda.iter().find(|(_, l)| !unit(**l)) {
            return Err(Error::InvalidWeights(format!("lambda[{f:?}] = {l} not in [0,1]")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeMatch {
    pub q_node: usize,
    pub field_id: Option<usize>,
    pub fscore: f64,
}

/// Relation score of the unordered pattern edge `{i, j}`, `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeScore {
    pub i: usize,
    pub j: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinedItem {
    #[serde(rename = "S")]
    pub score: f64,
    pub matches: Vec<NodeMatch>,
    pub edge_scores: Vec<EdgeScore>,
    /// Boxes of the fields matched to client-selected pattern nodes, in node order.
    pub boxes: Vec<BBox>,
}

impl MinedItem {
    pub fn field_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.matches.iter().filter_map(|m| m.field_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableResult {
    pub doc_id: String,
    pub pattern_id: String,
    pub cs: f64,
    pub items: Vec<MinedItem>,
}

impl TableResult {
    pub fn empty(doc_id: impl Into<String>, pattern_id: impl Into<String>) -> Self {
        TableResult {
            doc_id: doc_id.into(),
            pattern_id: pattern_id.into(),
            cs: 0.0,
            items: Vec::new(),
        }
    }
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.chars().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != *cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - d/max` for two counts; two zeros are identical.
fn count_similarity(x: usize, y: usize) -> f64 {
    let max = x.max(y);
    if max == 0 {
        1.0
    } else {
        1.0 - x.abs_diff(y) as f64 / max as f64
    }
}

/// Normalised Levenshtein similarity of two type signatures.
pub fn string_sim_type(x: &str, y: &str) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySignature);
    }
    let max = x.chars().count().max(y.chars().count());
    Ok(1.0 - levenshtein(x, y) as f64 / max as f64)
}

pub fn string_sim_word(x: &Field, y: &Field) -> f64 {
    count_similarity(x.features.now, y.features.now)
}

pub fn string_sim_length(x: &Field, y: &Field) -> f64 {
    count_similarity(x.features.size, y.features.size)
}

fn feature_sim(feature: Feature, x: &Field, y: &Field) -> f64 {
    match feature {
        // signatures of token-backed fields are never empty
        Feature::Type => string_sim_type(&x.features.ftype, &y.features.ftype).unwrap_or(0.0),
        Feature::Word => string_sim_word(x, y),
        Feature::Length => string_sim_length(x, y),
    }
}

/// Node similarity: 1 when both carry the same real label, else the weighted mean of
/// the feature similarities.
pub fn feature_score(vq: &ArgNode, v: &Field, w: &ScoreWeights) -> f64 {
    if vq.label.name == v.label() && vq.label.name != LabelName::Other {
        return 1.0;
    }
    let sum: f64 = w
        .lambda
        .iter()
        .map(|(&f, &l)| l * feature_sim(f, &vq.field, v))
        .sum();
    sum / w.lambda.len() as f64
}

/// Blends mean edge score and mean node score. A single-node pattern has no edges and
/// is scored on its node alone.
fn blend(edge_sum: f64, node_sum: f64, nodes: usize, alpha: f64) -> f64 {
    let edges = nodes * nodes.saturating_sub(1) / 2;
    let node_mean = node_sum / nodes as f64;
    let s = if edges == 0 {
        node_mean
    } else {
        alpha * (edge_sum / edges as f64) + (1.0 - alpha) * node_mean
    };
    s.clamp(0.0, 1.0)
}

pub fn matching_score(item: &MinedItem, q: &Arg, w: &ScoreWeights) -> f64 {
    let edge_sum: f64 = item.edge_scores.iter().map(|e| e.score).sum();
    let node_sum: f64 = item.matches.iter().map(|m| m.fscore).sum();
    blend(edge_sum, node_sum, q.len(), w.alpha)
}

/// Picks the anchor node (the selected, labelled node whose label is rarest among the
/// document fields, ignoring labels absent from the document) and returns every
/// document field carrying that label, in reading order.
pub fn select_pivots(q: &Arg, fields: &[Field]) -> Result<Vec<(usize, usize)>> {
    let labelled: Vec<&ArgNode> = q
        .nodes()
        .iter()
        .filter(|n| n.selected && n.label.name != LabelName::Other)
        .collect();
    if labelled.is_empty() {
        return Err(Error::NoLabeledNode);
    }
    let count = |l: LabelName| fields.iter().filter(|f| f.label() == l).count();
    let anchor = labelled
        .iter()
        .map(|n| (count(n.label.name), n.field.field_id, n.node_id, n.label.name))
        .filter(|&(c, ..)| c > 0)
        .min();
    let Some((_, _, node_id, label)) = anchor else {
        return Ok(Vec::new());
    };
    Ok(fields
        .iter()
        .filter(|f| f.label() == label)
        .map(|f| (node_id, f.field_id))
        .collect())
}

/// Document fields plus lazily computed pairwise relations (levels counted over every
/// field of the document).
pub struct DocGraph<'a> {
    fields: &'a [Field],
    boxes: Vec<BBox>,
    levels: Vec<OnceLock<(usize, usize)>>,
}

impl<'a> DocGraph<'a> {
    pub fn new(fields: &'a [Field]) -> Self {
        debug_assert!(fields.iter().enumerate().all(|(i, f)| f.field_id == i));
        let n = fields.len();
        DocGraph {
            fields,
            boxes: fields.iter().map(|f| *f.bbox()).collect(),
            levels: (0..n * n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn fields(&self) -> &'a [Field] {
        self.fields
    }

    fn levels(&self, a: usize, b: usize) -> (usize, usize) {
        let (lo, hi) = (a.min(b), a.max(b));
        *self.levels[lo * self.fields.len() + hi]
            .get_or_init(|| neighborhood_levels_of(lo, hi, &self.boxes))
    }

    pub fn relation(&self, a: usize, b: usize) -> Relation {
        let (hpred, vpred) = base_predicates(&self.boxes[a], &self.boxes[b]);
        let (k1, k2) = self.levels(a, b);
        Relation { hpred, vpred, k1, k2 }
    }

    /// Cheap predicate check before paying for levels.
    fn compatible(&self, a: usize, b: usize, pattern: &Relation) -> bool {
        let (h, v) = base_predicates(&self.boxes[a], &self.boxes[b]);
        h == pattern.hpred && v == pattern.vpred && {
            let (k1, k2) = self.levels(a, b);
            k1.abs_diff(pattern.k1) <= LEVEL_SLACK && k2.abs_diff(pattern.k2) <= LEVEL_SLACK
        }
    }
}

struct Search<'s, 'a> {
    q: &'s Arg,
    doc: &'s DocGraph<'a>,
    w: &'s ScoreWeights,
    order: Vec<usize>,
    excluded: &'s [bool],
    used: Vec<bool>,
    assign: Vec<Option<usize>>,
    fscores: Vec<Vec<Option<f64>>>,
    best: Option<(f64, Vec<Option<usize>>)>,
    budget: usize,
}

impl Search<'_, '_> {
    fn fscore(&mut self, node: usize, field: usize) -> f64 {
        if let Some(s) = self.fscores[node][field] {
            return s;
        }
        let s = feature_score(&self.q.nodes()[node], &self.doc.fields()[field], self.w);
        self.fscores[node][field] = Some(s);
        s
    }

    fn run(&mut self, pos: usize, edge_sum: f64, node_sum: f64) {
        if self.budget == 0 {
            return;
        }
        self.budget -= 1;
        let v = self.order.len();
        let total_edges = v * v.saturating_sub(1) / 2;
        let best = self.best.as_ref().map_or(f64::NEG_INFINITY, |b| b.0);

        if pos == v {
            let s = blend(edge_sum, node_sum, v, self.w.alpha);
            if s > best {
                self.best = Some((s, self.assign.clone()));
            }
            return;
        }
        let decided_edges = pos * pos.saturating_sub(1) / 2;
        let bound = blend(
            edge_sum + (total_edges - decided_edges) as f64,
            node_sum + (v - pos) as f64,
            v,
            self.w.alpha,
        );
        if bound <= best {
            return;
        }

        let node = self.order[pos];
        let assigned: Vec<(usize, usize)> = self.order[..pos]
            .iter()
            .filter_map(|&m| self.assign[m].map(|f| (m, f)))
            .collect();

        let mut candidates: Vec<(f64, usize, f64)> = Vec::new();
        for f in 0..self.doc.fields().len() {
            if self.used[f] || self.excluded[f] {
                continue;
            }
            let ok = assigned.iter().all(|&(m, fm)| {
                let pattern = self.q.edge(m, node).expect("complete graph");
                self.doc.compatible(fm, f, pattern)
            });
            if !ok {
                continue;
            }
            let gains = assigned
                .iter()
                .filter(|&&(m, fm)| self.doc.relation(fm, f) == *self.q.edge(m, node).expect("complete graph"))
                .count() as f64;
            let fs = self.fscore(node, f);
            candidates.push((fs, f, gains));
        }
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

        for (fs, f, gains) in candidates {
            self.used[f] = true;
            self.assign[node] = Some(f);
            self.run(pos + 1, edge_sum + gains, node_sum + fs);
            self.assign[node] = None;
            self.used[f] = false;
        }
        self.run(pos + 1, edge_sum, node_sum);
    }
}

fn assemble_item(q: &Arg, doc: &DocGraph, w: &ScoreWeights, assign: &[Option<usize>]) -> MinedItem {
    let fields = doc.fields();
    let matches: Vec<NodeMatch> = q
        .nodes()
        .iter()
        .map(|n| NodeMatch {
            q_node: n.node_id,
            field_id: assign[n.node_id],
            fscore: assign[n.node_id].map_or(0.0, |f| feature_score(n, &fields[f], w)),
        })
        .collect();
    let mut edge_scores = Vec::with_capacity(q.len() * q.len().saturating_sub(1) / 2);
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            let score = match (assign[i], assign[j]) {
                (Some(fi), Some(fj)) if doc.relation(fi, fj) == *q.edge(i, j).expect("complete graph") => 1.0,
                _ => 0.0,
            };
            edge_scores.push(EdgeScore { i, j, score });
        }
    }
    let boxes = q
        .nodes()
        .iter()
        .filter(|n| n.selected)
        .filter_map(|n| assign[n.node_id].map(|f| *fields[f].bbox()))
        .collect();
    let mut item = MinedItem {
        score: 0.0,
        matches,
        edge_scores,
        boxes,
    };
    item.score = matching_score(&item, q, w);
    item
}

fn assign_with(
    q: &Arg,
    pivot: (usize, usize),
    doc: &DocGraph,
    w: &ScoreWeights,
    excluded: &[bool],
) -> MinedItem {
    let (pivot_node, pivot_field) = pivot;
    let rv = relation_vector(q, pivot_node).expect("pivot node comes from the pattern");
    let mut order = vec![pivot_node];
    order.extend(rv.entries.iter().map(|e| e.0));

    let n_fields = doc.fields().len();
    let mut search = Search {
        q,
        doc,
        w,
        order,
        excluded,
        used: vec![false; n_fields],
        assign: vec![None; q.len()],
        fscores: vec![vec![None; n_fields]; q.len()],
        best: None,
        budget: SEARCH_BUDGET,
    };
    search.used[pivot_field] = true;
    search.assign[pivot_node] = Some(pivot_field);
    let fs = search.fscore(pivot_node, pivot_field);
    search.run(1, 0.0, fs);

    let assign = search.best.map(|b| b.1).unwrap_or_else(|| {
        let mut a = vec![None; q.len()];
        a[pivot_node] = Some(pivot_field);
        a
    });
    assemble_item(q, doc, w, &assign)
}

/// Best item anchored at `pivot = (pattern node, document field)`.
pub fn assign_relations(q: &Arg, pivot: (usize, usize), fields: &[Field], w: &ScoreWeights) -> MinedItem {
    let doc = DocGraph::new(fields);
    let excluded = vec![false; fields.len()];
    assign_with(q, pivot, &doc, w, &excluded)
}

/// Mines all non-overlapping items whose score reaches the acceptance threshold.
/// Items are accepted best-first; each accepted item consumes its fields, and pivots
/// whose best assignment touched a consumed field are re-searched without it.
pub fn mine_fields(
    q: &Arg,
    fields: &[Field],
    w: &ScoreWeights,
    doc_id: &str,
    pattern_id: &str,
) -> TableResult {
    let Ok(pivots) = select_pivots(q, fields) else {
        return TableResult::empty(doc_id, pattern_id);
    };
    let doc = DocGraph::new(fields);
    let mut consumed = vec![false; fields.len()];
    let mut pending: Vec<((usize, usize), Option<MinedItem>)> =
        pivots.into_iter().map(|p| (p, None)).collect();
    let mut items: Vec<MinedItem> = Vec::new();

    loop {
        pending.retain(|((_, f), _)| !consumed[*f]);
        for (pivot, cached) in pending.iter_mut() {
            let stale = cached
                .as_ref()
                .is_none_or(|item| item.field_ids().any(|f| consumed[f]));
            if stale {
                *cached = Some(assign_with(q, *pivot, &doc, w, &consumed));
            }
        }
        let mut best: Option<usize> = None;
        for (i, (_, cached)) in pending.iter().enumerate() {
            let s = cached.as_ref().expect("filled above").score;
            if best.is_none_or(|b| s > pending[b].1.as_ref().expect("filled above").score) {
                best = Some(i);
            }
        }
        let Some(b) = best else { break };
        let item = pending[b].1.take().expect("filled above");
        if item.score < w.accept_threshold {
            break;
        }
        for f in item.field_ids() {
            consumed[f] = true;
        }
        pending.remove(b);
        items.push(item);
    }

    items.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.field_ids().min().cmp(&b.field_ids().min()))
    });
    let cs = if items.is_empty() {
        0.0
    } else {
        items.iter().map(|i| i.score).sum::<f64>() / items.len() as f64
    };
    TableResult {
        doc_id: doc_id.to_string(),
        pattern_id: pattern_id.to_string(),
        cs,
        items,
    }
}

/// Forms the document's fields the same way the pattern's were formed, then mines.
pub fn mine_table(
    q: &Arg,
    doc: &Document,
    w: &ScoreWeights,
    taxonomy: &Taxonomy,
    pattern_id: &str,
) -> TableResult {
    let fields = form_fields(doc, q.gap(), q.line_merge(), taxonomy);
    mine_fields(q, &fields, w, doc.doc_id(), pattern_id)
}

/// Orders results by descending confidence; equal confidences keep submission order.
pub fn rank_results(mut results: Vec<(String, TableResult)>) -> Vec<(String, TableResult)> {
    results.sort_by(|a, b| b.1.cs.total_cmp(&a.1.cs));
    results
}
