//! Client-driven table extraction: a user marks one table item on one document, the
//! selection becomes an attributed relational graph, and that graph is searched for in
//! every document to pull out all similar items.
//!
//! ```no_run
//! use argmine::{build_pattern_graph, load_document, load_selection, mine_table};
//! use argmine::{FieldOptions, ScoreWeights, Taxonomy};
//!
//! let doc = load_document("docs/invoice.json")?;
//! let sel = load_selection("patterns/invoice.json")?;
//! let tax = Taxonomy::builtin();
//! let arg = build_pattern_graph(&sel, &doc, &FieldOptions::default(), tax)?;
//! let table = mine_table(&arg, &doc, &ScoreWeights::default(), tax, "invoice");
//! println!("{} items, cs = {:.3}", table.items.len(), table.cs);
//! # Ok::<(), argmine::Error>(())
//! ```

pub mod doc_model;
pub mod error;
pub mod evaluator;
pub mod field_former;
pub mod miner;
pub mod pattern_graph;
pub mod spatial;
pub mod synth;

pub use doc_model::{
    load_document, load_ground_truth, load_result, load_selection, save_json, save_result,
    to_wire_string, BBox, Document, GroundTruthTable, PatternSelection, Token, Zone,
};
pub use error::{Error, Result};
pub use evaluator::{eval_table, or1, or2, report, EvalReport, PatternSource};
pub use field_former::{
    form_fields, intra_field_gap, label_field, type_signature, Field, LabelName, SemanticLabel,
    Taxonomy, DEFAULT_GAP,
};
pub use miner::{
    assign_relations, matching_score, mine_fields, mine_table, rank_results, MinedItem,
    ScoreWeights, TableResult,
};
pub use pattern_graph::{build_pattern_graph, relation_vector, Arg, ArgNode, FieldOptions};
pub use spatial::{HPred, Relation, VPred};
