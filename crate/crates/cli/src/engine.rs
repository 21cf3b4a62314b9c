//! Loading corpora from disk and running the library pipeline the same way for the CLI
//! and the service.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use argmine::field_former::BUILTIN_TAXONOMY;
use argmine::miner::Feature;
use argmine::{
    build_pattern_graph, load_document, load_ground_truth, load_result, load_selection, mine_table,
    rank_results, Arg, Document, FieldOptions, GroundTruthTable, PatternSelection, ScoreWeights,
    TableResult, Taxonomy, Zone,
};

use crate::args::Tuning;

/// Everything needed to turn a selection into mined tables.
#[derive(Debug, Clone)]
pub struct Engine {
    pub weights: ScoreWeights,
    pub options: FieldOptions,
    pub taxonomy: Arc<Taxonomy>,
}

impl Engine {
    pub fn from_tuning(t: &Tuning) -> anyhow::Result<Self> {
        let weights = ScoreWeights {
            alpha: t.alpha,
            lambda: [(Feature::Type, 1.0), (Feature::Word, 1.0), (Feature::Length, 1.0)]
                .into_iter()
                .collect(),
            accept_threshold: t.threshold,
        };
        weights.validate()?;
        if let Some(g) = t.gap {
            if g < 0 {
                bail!("--gap must be non-negative, got {g}");
            }
        }
        let taxonomy = match &t.taxonomy {
            Some(p) => Taxonomy::load(p).with_context(|| format!("loading taxonomy {}", p.display()))?,
            None => Taxonomy::from_json(BUILTIN_TAXONOMY)?,
        };
        Ok(Engine {
            weights,
            options: FieldOptions {
                gap: t.gap,
                line_merge: !t.no_line_merge,
            },
            taxonomy: Arc::new(taxonomy),
        })
    }

    pub fn pattern(&self, selection: &PatternSelection, source: &Document) -> argmine::Result<Arg> {
        build_pattern_graph(selection, source, &self.options, &self.taxonomy)
    }

    pub fn mine(&self, q: &Arg, doc: &Document, pattern_id: &str) -> TableResult {
        mine_table(q, doc, &self.weights, &self.taxonomy, pattern_id)
    }

    /// Mines every document with one pattern; results follow `docs` order.
    pub fn mine_all<'a>(
        &self,
        q: &Arg,
        docs: impl IntoIterator<Item = &'a Document>,
        pattern_id: &str,
    ) -> Vec<TableResult> {
        docs.into_iter().map(|d| self.mine(q, d, pattern_id)).collect()
    }

    /// Mines one document with several patterns and ranks them by confidence.
    pub fn rank(&self, patterns: &[(String, Arg)], doc: &Document) -> Vec<(String, TableResult)> {
        rank_results(
            patterns
                .iter()
                .map(|(id, q)| (id.clone(), self.mine(q, doc, id)))
                .collect(),
        )
    }
}

/// `*.json` files of each directory (sorted by name) and plain files as given.
pub fn expand_paths(paths: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("reading directory {}", p.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            files.retain(|f| f.extension().is_some_and(|e| e == "json"));
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn load_documents(paths: &[PathBuf]) -> anyhow::Result<BTreeMap<String, Document>> {
    let mut docs = BTreeMap::new();
    for path in expand_paths(paths)? {
        let doc = load_document(&path).with_context(|| format!("loading document {}", path.display()))?;
        let id = doc.doc_id().to_string();
        if docs.insert(id.clone(), doc).is_some() {
            bail!("document id {id} appears twice");
        }
    }
    if docs.is_empty() {
        bail!("no documents found");
    }
    Ok(docs)
}

pub fn load_ground_truths(paths: &[PathBuf]) -> anyhow::Result<Vec<GroundTruthTable>> {
    expand_paths(paths)?
        .iter()
        .map(|p| load_ground_truth(p).with_context(|| format!("loading ground truth {}", p.display())))
        .collect()
}

pub fn load_results(paths: &[PathBuf]) -> anyhow::Result<Vec<TableResult>> {
    expand_paths(paths)?
        .iter()
        .filter(|p| p.file_name().is_none_or(|n| n != RANKING_FILE))
        .map(|p| load_result(p).with_context(|| format!("loading result {}", p.display())))
        .collect()
}

pub const RANKING_FILE: &str = "ranking.json";

/// A named selection; the name is the file stem.
pub fn load_named_selection(path: &Path) -> anyhow::Result<(String, PatternSelection)> {
    let sel = load_selection(path).with_context(|| format!("loading pattern {}", path.display()))?;
    let id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .with_context(|| format!("pattern file name {} is not usable as an id", path.display()))?
        .to_string();
    Ok((id, sel))
}

/// Zones of every selection in a directory, keyed by the selection's document.
pub fn zones_from_patterns(dir: &Path) -> anyhow::Result<HashMap<String, Zone>> {
    expand_paths(&[dir.to_path_buf()])?
        .iter()
        .map(|p| load_named_selection(p).map(|(_, s)| (s.doc_id, s.zone)))
        .collect()
}
