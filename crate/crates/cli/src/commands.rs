use std::collections::HashMap;
use std::fs;

use anyhow::{bail, Context};
use argmine::synth::{generate, write_corpus, CorpusSpec};
use argmine::{report, save_json, save_result, PatternSource, Zone};
use serde::Serialize;

use crate::args::{EvalArgs, ExtractArgs, GenArgs, Source, ZoneArg};
use crate::engine::{
    load_documents, load_ground_truths, load_named_selection, load_results, zones_from_patterns,
    Engine, RANKING_FILE,
};

#[derive(Debug, Serialize)]
struct RankEntry {
    pattern_id: String,
    cs: f64,
}

#[derive(Debug, Serialize)]
struct DocRanking {
    doc_id: String,
    ranking: Vec<RankEntry>,
}

/// Writes `<out>/<doc_id>.json` per document. With several patterns the file holds the
/// best-ranked result and `<out>/ranking.json` lists every pattern's confidence.
pub fn extract(args: &ExtractArgs) -> anyhow::Result<()> {
    let engine = Engine::from_tuning(&args.tuning)?;
    let docs = load_documents(&args.docs)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;

    if let Some(dir) = &args.own_patterns {
        for (id, doc) in &docs {
            let path = dir.join(format!("{id}.json"));
            let (pattern_id, sel) = load_named_selection(&path)?;
            let q = engine
                .pattern(&sel, doc)
                .with_context(|| format!("building pattern {}", path.display()))?;
            let result = engine.mine(&q, doc, &pattern_id);
            save_result(&result, args.out.join(format!("{id}.json")))?;
        }
        println!("mined {} documents with their own patterns", docs.len());
        return Ok(());
    }

    if args.pattern.is_empty() {
        bail!("give at least one --pattern or --own-patterns");
    }
    let mut patterns = Vec::with_capacity(args.pattern.len());
    for path in &args.pattern {
        let (id, sel) = load_named_selection(path)?;
        let Some(source) = docs.get(&sel.doc_id) else {
            bail!("pattern {} refers to document {} which was not loaded", path.display(), sel.doc_id);
        };
        let q = engine
            .pattern(&sel, source)
            .with_context(|| format!("building pattern {}", path.display()))?;
        patterns.push((id, q));
    }

    let mut rankings = Vec::new();
    for (id, doc) in &docs {
        let ranked = engine.rank(&patterns, doc);
        save_result(&ranked[0].1, args.out.join(format!("{id}.json")))?;
        rankings.push(DocRanking {
            doc_id: id.clone(),
            ranking: ranked
                .iter()
                .map(|(p, r)| RankEntry { pattern_id: p.clone(), cs: r.cs })
                .collect(),
        });
    }
    if patterns.len() > 1 {
        save_json(&rankings, args.out.join(RANKING_FILE))?;
    }
    println!("mined {} documents with {} pattern(s)", docs.len(), patterns.len());
    Ok(())
}

pub fn zone_of(z: ZoneArg) -> Zone {
    match z {
        ZoneArg::Header => Zone::Header,
        ZoneArg::Body => Zone::Body,
        ZoneArg::Footer => Zone::Footer,
    }
}

pub fn source_of(s: Source) -> PatternSource {
    match s {
        Source::Lab => PatternSource::Lab,
        Source::Client => PatternSource::Client,
    }
}

pub fn eval(args: &EvalArgs) -> anyhow::Result<()> {
    let gts = load_ground_truths(&args.gt)?;
    let results = load_results(&args.results)?;
    let zones: HashMap<String, Zone> = match &args.patterns {
        Some(dir) => zones_from_patterns(dir)?,
        None => gts.iter().map(|g| (g.doc_id.clone(), zone_of(args.zone))).collect(),
    };
    let rep = report(&gts, &results, &zones)?;
    print!("{}", rep.to_table(source_of(args.source)));
    if let Some(out) = &args.out {
        save_json(&rep, out)?;
    }
    Ok(())
}

pub fn gen(args: &GenArgs) -> anyhow::Result<()> {
    let mut spec = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            CorpusSpec::from_json(&text).with_context(|| format!("corpus spec {}", p.display()))?
        }
        None => CorpusSpec::default(),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let docs = generate(&spec)?;
    write_corpus(&docs, &args.out)?;
    let items: usize = docs.iter().map(|d| d.ground_truth.items.len()).sum();
    let tokens: usize = docs.iter().map(|d| d.document.tokens().len()).sum();
    let noise: usize = docs.iter().map(|d| d.noise_events).sum();
    println!(
        "generated {} documents, {items} items, {tokens} tokens, {noise} noise events in {}",
        docs.len(),
        args.out.display()
    );
    Ok(())
}
