//! The attributed relational graph (ARG) built from a client's pattern selection.
//!
//! Nodes are fields with their features and semantic label; every ordered pair of
//! distinct nodes carries a [`Relation`]. Besides the client-selected key fields, the
//! graph holds completion nodes: every other field touching the item band, i.e. the hull
//! of the selected fields grown by half a field height above and below.

use std::fmt::Write as _;

use serde::Serialize;

use crate::doc_model::{BBox, Document, PatternSelection, Zone};
use crate::error::{Error, Result};
use crate::field_former::{
    fields_from_selection, form_fields, intra_field_gap, Field, LabelName, SemanticLabel, Taxonomy,
};
use crate::spatial::{relation_of, Relation};

/// How tokens are grouped into fields, both for the pattern and for mined documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldOptions {
    /// Fixed intra-field gap; learnt from the selection when `None`.
    pub gap: Option<i64>,
    pub line_merge: bool,
}

impl Default for FieldOptions {
    fn default() -> Self {
        FieldOptions {
            gap: None,
            line_merge: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArgNode {
    pub node_id: usize,
    pub field: Field,
    pub selected: bool,
    pub label: SemanticLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arg {
    nodes: Vec<ArgNode>,
    edges: Vec<Vec<Option<Relation>>>,
    zone: Zone,
    gap: i64,
    line_merge: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationVector {
    pub pivot: usize,
    pub entries: Vec<(usize, Relation)>,
}

impl Arg {
    /// Builds the complete graph over `selected` followed by `completion` fields.
    /// Relations and their levels are computed over exactly these fields.
    pub fn from_fields(
        selected: Vec<Field>,
        completion: Vec<Field>,
        zone: Zone,
        gap: i64,
        line_merge: bool,
    ) -> Arg {
        let nodes: Vec<ArgNode> = selected
            .into_iter()
            .map(|f| (f, true))
            .chain(completion.into_iter().map(|f| (f, false)))
            .enumerate()
            .map(|(node_id, (field, selected))| ArgNode {
                node_id,
                label: field.features.label.clone(),
                field,
                selected,
            })
            .collect();
        let boxes: Vec<BBox> = nodes.iter().map(|n| *n.field.bbox()).collect();
        let n = nodes.len();
        let edges = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (i != j).then(|| relation_of(i, j, &boxes)))
                    .collect()
            })
            .collect();
        Arg {
            nodes,
            edges,
            zone,
            gap,
            line_merge,
        }
    }

    pub fn nodes(&self) -> &[ArgNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn zone(&self) -> Zone {
        self.zone
    }

    pub fn gap(&self) -> i64 {
        self.gap
    }

    pub fn line_merge(&self) -> bool {
        self.line_merge
    }

    /// Relation of node `j` with respect to node `i`; `None` on the diagonal.
    pub fn edge(&self, i: usize, j: usize) -> Option<&Relation> {
        self.edges.get(i)?.get(j)?.as_ref()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().flatten().filter(|e| e.is_some()).count()
    }

    /// Adjacency matrix as text: one tab-separated row per node, each off-diagonal cell
    /// `hpred,vpred,k1,k2`, diagonal `0`. Preceded by a node listing.
    pub fn to_matrix_text(&self) -> String {
        let mut out = String::from("# nodes\n");
        for n in &self.nodes {
            let b = n.field.bbox();
            let _ = writeln!(
                out,
                "v{}\tfield={}\t{}\tlabel={}\tbox=[{},{},{},{}]\tvalue={:?}",
                n.node_id,
                n.field.field_id,
                if n.selected { "selected" } else { "completion" },
                n.label.name,
                b.left,
                b.top,
                b.right,
                b.bottom,
                n.field.features.value,
            );
        }
        out.push_str("# adjacency\n");
        for n in &self.nodes {
            let _ = write!(out, "\tv{}", n.node_id);
        }
        out.push('\n');
        for (i, row) in self.edges.iter().enumerate() {
            let _ = write!(out, "v{i}");
            for cell in row {
                match cell {
                    Some(r) => {
                        let _ = write!(out, "\t{r}");
                    }
                    None => out.push_str("\t0"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> ArgSummary {
        ArgSummary {
            zone: self.zone,
            gap: self.gap,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeSummary {
                    node_id: n.node_id,
                    field_id: n.field.field_id,
                    selected: n.selected,
                    label: n.label.name,
                    value: n.field.features.value.clone(),
                    bbox: *n.field.bbox(),
                })
                .collect(),
            matrix: self
                .edges
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|c| c.map_or_else(|| "0".to_string(), |r| r.to_string()))
                        .collect()
                })
                .collect(),
        }
    }
}

/// Compact view of an [`Arg`] for service responses.
#[derive(Debug, Clone, Serialize)]
pub struct ArgSummary {
    pub zone: Zone,
    pub gap: i64,
    pub nodes: Vec<NodeSummary>,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeSummary {
    pub node_id: usize,
    pub field_id: usize,
    pub selected: bool,
    pub label: LabelName,
    pub value: String,
    #[serde(rename = "box")]
    pub bbox: BBox,
}

/// Builds the pattern graph for a client selection on its source document.
pub fn build_pattern_graph(
    selection: &PatternSelection,
    doc: &Document,
    opts: &FieldOptions,
    taxonomy: &Taxonomy,
) -> Result<Arg> {
    selection.validate()?;
    if selection.doc_id != doc.doc_id() {
        return Err(Error::DocMismatch {
            expected: doc.doc_id().to_string(),
            found: selection.doc_id.clone(),
        });
    }
    let gap = match opts.gap {
        Some(g) => g,
        None => intra_field_gap(selection, doc)?,
    };
    let fields = form_fields(doc, gap, opts.line_merge, taxonomy);
    let selected = fields_from_selection(selection, &fields)?;
    if selected.iter().all(|f| f.label() == LabelName::Other) {
        return Err(Error::NoLabeledNode);
    }

    let hull = BBox::union_all(selected.iter().map(|f| f.bbox())).expect("selection non-empty");
    let field_h = selected.iter().map(|f| f.bbox().height()).min().unwrap_or(0);
    // doubled coordinates: growing by h/2 on each side stays exact
    let band = BBox {
        left: 2 * hull.left,
        top: 2 * hull.top - field_h,
        right: 2 * hull.right,
        bottom: 2 * hull.bottom + field_h,
    };
    let completion: Vec<Field> = fields
        .iter()
        .filter(|f| selected.iter().all(|s| s.field_id != f.field_id))
        .filter(|f| f.bbox().scaled(2).touches(&band))
        .cloned()
        .collect();

    Ok(Arg::from_fields(
        selected,
        completion,
        selection.zone,
        gap,
        opts.line_merge,
    ))
}

/// Linearises the pivot's edges: targets ordered by total level, then reading order.
pub fn relation_vector(g: &Arg, pivot: usize) -> Result<RelationVector> {
    if pivot >= g.len() {
        return Err(Error::UnknownNode(pivot));
    }
    let mut entries: Vec<(usize, Relation)> = (0..g.len())
        .filter(|&j| j != pivot)
        .map(|j| (j, *g.edge(pivot, j).expect("complete graph")))
        .collect();
    entries.sort_by_key(|&(j, r)| (r.k1 + r.k2, g.nodes[j].field.field_id));
    Ok(RelationVector { pivot, entries })
}
