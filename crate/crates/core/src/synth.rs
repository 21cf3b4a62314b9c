//! Synthetic invoice-like documents with planted table items, layout jitter and
//! OCR-style character noise, together with exact ground truth and pattern selections.
//!
//! Every document is drawn from three independent random streams derived from
//! `(seed, doc index)`: layout, character noise and client-selection sloppiness. Noise
//! never moves a box, so a corpus generated twice with different noise rates has
//! identical geometry.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::doc_model::{
    parse_json, save_json, BBox, Document, GroundTruthTable, PatternSelection, Token, Zone,
};
use crate::error::{Error, Result};

pub const CHAR_W: i64 = 10;
pub const TEXT_H: i64 = 20;
const WORD_GAP: i64 = 10;
const WRAP_PITCH: i64 = 24;
const ZIGZAG_PITCH: i64 = 32;
const ROW_GAP: i64 = 28;
const BLOCK_GAP: i64 = 60;
const COLUMN_GAP: i64 = 50;
const MARGIN: i64 = 80;
const PAGE_W: i64 = 1240;
const PAGE_H: i64 = 1754;
const MAX_JITTER: i64 = COLUMN_GAP / 2 - 1;

const WORDS: &[&str] = &[
    "blue", "steel", "widget", "bracket", "copper", "cable", "large", "small", "plastic",
    "hinge", "bolt", "washer", "panel", "green", "frame", "valve", "pump", "filter", "sensor",
    "module", "cover", "spring", "wooden", "crate", "paper", "roll", "glass", "tube", "handle",
    "motor", "belt", "chain", "clamp", "socket", "adapter", "lamp", "switch", "fuse", "drill",
];

const CONFUSABLES: &[(char, char)] = &[
    ('0', 'O'),
    ('O', '0'),
    ('1', 'l'),
    ('l', '1'),
    ('5', 'S'),
    ('S', '5'),
    ('8', 'B'),
    ('B', '8'),
];

const SPURIOUS: &[char] = &['.', ':', ';', ','];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Date,
    Price,
    Quantity,
    Code,
    Description,
}

impl Generator {
    fn max_chars(&self) -> i64 {
        match self {
            Generator::Date => 10,
            Generator::Price => 8,
            Generator::Quantity => 2,
            Generator::Code => 6,
            Generator::Description => 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    /// Column header text.
    pub label: String,
    pub generator: Generator,
    /// Key columns are selected by the client and ground-truthed.
    #[serde(default = "yes")]
    pub key: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// One line per item.
    #[default]
    Linear,
    /// Odd columns drop to a second line inside each item.
    Zigzag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub seed: u64,
    pub n_docs: usize,
    /// Inclusive range of planted items per document.
    pub items_per_doc: [usize; 2],
    pub columns: Vec<ColumnSpec>,
    pub jitter_px: i64,
    pub char_noise_rate: f64,
    pub multiline_rate: f64,
    pub zone: Zone,
    pub layout: Layout,
    /// Decoy lines carrying item-like values outside the table.
    pub decoys: usize,
    /// Largest margin a sloppy client adds around each selected field.
    pub client_margin_px: i64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        let col = |label: &str, generator| ColumnSpec {
            label: label.into(),
            generator,
            key: true,
        };
        CorpusSpec {
            seed: 7,
            n_docs: 10,
            items_per_doc: [3, 8],
            columns: vec![
                col("Code", Generator::Code),
                col("Description", Generator::Description),
                col("Qty", Generator::Quantity),
                col("Unit Price", Generator::Price),
                col("Amount", Generator::Price),
            ],
            jitter_px: 4,
            char_noise_rate: 0.0,
            multiline_rate: 0.2,
            zone: Zone::Body,
            layout: Layout::Linear,
            decoys: 2,
            client_margin_px: 8,
        }
    }
}

impl CorpusSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: CorpusSpec = parse_json(text, "corpus spec")?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidCorpusSpec(m));
        if self.n_docs == 0 {
            return bad("n_docs must be positive".into());
        }
        let [lo, hi] = self.items_per_doc;
        if lo == 0 || lo > hi {
            return bad(format!("items_per_doc [{lo}, {hi}] is not a positive range"));
        }
        if self.columns.is_empty() {
            return bad("no columns".into());
        }
        if !self.columns.iter().any(|c| c.key) {
            return bad("at least one column must be a key column".into());
        }
        for (name, r) in [
            ("char_noise_rate", self.char_noise_rate),
            ("multiline_rate", self.multiline_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{name} {r} not in [0,1]"));
            }
        }
        if !(0..=MAX_JITTER).contains(&self.jitter_px) {
            return bad(format!("jitter_px {} not in [0,{MAX_JITTER}]", self.jitter_px));
        }
        if self.client_margin_px < 0 {
            return bad("client_margin_px must be non-negative".into());
        }
        Ok(())
    }
}

/// One generated page with everything needed to mine and score it.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDoc {
    pub document: Document,
    pub ground_truth: GroundTruthTable,
    /// Selection boxes equal to the first item's key fields.
    pub lab_selection: PatternSelection,
    /// The same selection drawn loosely, possibly clipping neighbours.
    pub client_selection: PatternSelection,
    /// Characters substituted plus spurious punctuation inserted.
    pub noise_events: usize,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn stream(seed: u64, doc: usize, purpose: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(splitmix(seed ^ splitmix(doc as u64)) ^ purpose))
}

pub fn generate(spec: &CorpusSpec) -> Result<Vec<SynthDoc>> {
    spec.validate()?;
    (0..spec.n_docs).map(|i| generate_doc(spec, i)).collect()
}

/// Applies character noise: each character independently, with probability `rate`,
/// is swapped for its OCR confusable or, lacking one, followed by a spurious mark.
pub fn add_char_noise(text: &str, rate: f64, rng: &mut impl Rng) -> (String, usize) {
    let mut out = String::with_capacity(text.len() + 2);
    let mut events = 0;
    for c in text.chars() {
        if rate > 0.0 && rng.gen_bool(rate) {
            events += 1;
            match CONFUSABLES.iter().find(|(from, _)| *from == c) {
                Some(&(_, to)) => out.push(to),
                None => {
                    out.push(c);
                    out.push(*SPURIOUS.choose(rng).expect("non-empty"));
                }
            }
        } else {
            out.push(c);
        }
    }
    (out, events)
}

struct Cell {
    lines: Vec<Vec<String>>,
}

impl Cell {
    fn single(text: String) -> Self {
        Cell {
            lines: vec![vec![text]],
        }
    }

    fn height(&self) -> i64 {
        TEXT_H + WRAP_PITCH * (self.lines.len() as i64 - 1)
    }
}

fn gen_value(generator: Generator, rng: &mut ChaCha8Rng, multiline_rate: f64) -> Cell {
    match generator {
        Generator::Date => Cell::single(format!(
            "{:02}/{:02}/{}",
            rng.gen_range(1..=28),
            rng.gen_range(1..=12),
            rng.gen_range(2005..=2024)
        )),
        Generator::Price => {
            let cents: u64 = rng.gen_range(100..=999_999);
            let units = cents / 100;
            let text = if units >= 1000 {
                format!("{},{:03}.{:02}", units / 1000, units % 1000, cents % 100)
            } else {
                format!("{units}.{:02}", cents % 100)
            };
            Cell::single(text)
        }
        Generator::Quantity => Cell::single(rng.gen_range(1..=99).to_string()),
        Generator::Code => {
            let letters: String = (0..2).map(|_| rng.gen_range(b'A'..=b'Z') as char).collect();
            Cell::single(format!("{letters}{:04}", rng.gen_range(0..10_000)))
        }
        Generator::Description => {
            let n: usize = rng.gen_range(2..=4);
            let mut words: Vec<String> = (0..n)
                .map(|_| WORDS.choose(rng).expect("non-empty").to_string())
                .collect();
            let mut first = words[0].chars();
            let head = first.next().expect("words are non-empty").to_ascii_uppercase();
            words[0] = std::iter::once(head).chain(first).collect();
            if n >= 3 && rng.gen_bool(multiline_rate) {
                let rest = words.split_off(n.div_ceil(2));
                Cell {
                    lines: vec![words, rest],
                }
            } else {
                Cell { lines: vec![words] }
            }
        }
    }
}

/// Accumulates tokens and remembers the box of every placed cell.
struct Page {
    tokens: Vec<Token>,
}

impl Page {
    fn place_words(&mut self, x: i64, y: i64, words: &[String]) -> BBox {
        let mut cx = x;
        let mut hull: Option<BBox> = None;
        for w in words {
            let width = w.chars().count() as i64 * CHAR_W;
            let b = BBox::new(cx, y, cx + width, y + TEXT_H);
            self.tokens.push(Token::new(self.tokens.len(), w.clone(), b));
            hull = Some(hull.map_or(b, |h| h.union(&b)));
            cx += width + WORD_GAP;
        }
        hull.expect("at least one word")
    }

    fn place_cell(&mut self, x: i64, y: i64, cell: &Cell) -> BBox {
        let mut hull: Option<BBox> = None;
        for (i, line) in cell.lines.iter().enumerate() {
            let b = self.place_words(x, y + WRAP_PITCH * i as i64, line);
            hull = Some(hull.map_or(b, |h| h.union(&b)));
        }
        hull.expect("at least one line")
    }

    fn place_text(&mut self, x: i64, y: i64, text: &str) -> BBox {
        let words: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        self.place_words(x, y, &words)
    }
}

fn column_lefts(spec: &CorpusSpec) -> Vec<i64> {
    let mut x = MARGIN;
    spec.columns
        .iter()
        .map(|c| {
            let left = x;
            let width = (c.generator.max_chars() * CHAR_W)
                .max(c.label.chars().count() as i64 * CHAR_W + WORD_GAP * 2);
            x += width + COLUMN_GAP;
            left
        })
        .collect()
}

fn generate_doc(spec: &CorpusSpec, index: usize) -> Result<SynthDoc> {
    let doc_id = format!("doc{index:04}");
    let mut rng = stream(spec.seed, index, 0);
    let mut noise_rng = stream(spec.seed, index, 1);
    let mut client_rng = stream(spec.seed, index, 2);

    let lefts = column_lefts(spec);
    let right_edge = lefts.last().copied().unwrap_or(MARGIN)
        + spec.columns.last().map_or(0, |c| c.generator.max_chars() * CHAR_W);
    if right_edge + MAX_JITTER > PAGE_W {
        return Err(Error::InvalidCorpusSpec(format!(
            "columns need {right_edge}px but the page is {PAGE_W}px wide"
        )));
    }
    let n_items = rng.gen_range(spec.items_per_doc[0]..=spec.items_per_doc[1]);
    let line_pitch = TEXT_H + ROW_GAP;
    let amount_x = lefts.last().copied().unwrap_or(MARGIN);

    let mut page = Page { tokens: Vec::new() };
    let mut y = MARGIN;

    let info_block = |page: &mut Page, y: &mut i64, rng: &mut ChaCha8Rng| {
        page.place_text(MARGIN, *y, "Acme Industrial Supplies");
        *y += line_pitch;
        page.place_text(MARGIN, *y, &format!("{} Rue Victor Hugo", rng.gen_range(1..200)));
        *y += line_pitch;
        page.place_text(MARGIN, *y, "Invoice No");
        page.place_text(MARGIN + 200, *y, &format!("INV{}", rng.gen_range(10_000..100_000)));
        *y += line_pitch;
        page.place_text(MARGIN, *y, "Issued");
        page.place_text(
            MARGIN + 200,
            *y,
            &format!("{:02}/{:02}/20{:02}", rng.gen_range(1..=28), rng.gen_range(1..=12), rng.gen_range(5..=24)),
        );
        *y += line_pitch;
        for _ in 0..spec.decoys {
            page.place_text(MARGIN, *y, "Parcels");
            page.place_text(MARGIN + 200, *y, &rng.gen_range(1..=99).to_string());
            *y += line_pitch;
        }
        *y += BLOCK_GAP - ROW_GAP;
    };
    let totals_block = |page: &mut Page, y: &mut i64, rng: &mut ChaCha8Rng| {
        for label in ["Subtotal", "VAT 20 %", "Total due"] {
            page.place_text(amount_x - 200, *y, label);
            page.place_text(amount_x, *y, &format!("{}.{:02}", rng.gen_range(10..999), rng.gen_range(0..100)));
            *y += line_pitch;
        }
        *y += BLOCK_GAP - ROW_GAP;
    };

    match spec.zone {
        Zone::Header => {}
        Zone::Body => info_block(&mut page, &mut y, &mut rng),
        Zone::Footer => {
            info_block(&mut page, &mut y, &mut rng);
            totals_block(&mut page, &mut y, &mut rng);
        }
    }

    // column headers
    for (c, &x) in spec.columns.iter().zip(&lefts) {
        page.place_text(x, y, &c.label);
    }
    y += line_pitch;

    let mut gt_items = Vec::with_capacity(n_items);
    let dy_max = spec.jitter_px.min(TEXT_H / 4);
    for _ in 0..n_items {
        let cells: Vec<Cell> = spec
            .columns
            .iter()
            .map(|c| gen_value(c.generator, &mut rng, spec.multiline_rate))
            .collect();
        let mut item_boxes = Vec::new();
        let mut bottom = y;
        for (ci, (cell, col)) in cells.iter().zip(&spec.columns).enumerate() {
            let line_off = match spec.layout {
                Layout::Zigzag if ci % 2 == 1 => ZIGZAG_PITCH,
                _ => 0,
            };
            let dx = rng.gen_range(-spec.jitter_px..=spec.jitter_px);
            let dy = rng.gen_range(-dy_max..=dy_max);
            let b = page.place_cell(lefts[ci] + dx, y + line_off + dy, cell);
            bottom = bottom.max(y + line_off + cell.height());
            if col.key {
                item_boxes.push(b);
            }
        }
        gt_items.push(item_boxes);
        y = bottom + ROW_GAP;
    }
    y += BLOCK_GAP - ROW_GAP;

    match spec.zone {
        Zone::Header => {
            info_block(&mut page, &mut y, &mut rng);
            totals_block(&mut page, &mut y, &mut rng);
        }
        Zone::Body => totals_block(&mut page, &mut y, &mut rng),
        Zone::Footer => {}
    }
    if y > PAGE_H {
        return Err(Error::PageOverflow {
            needed: y,
            page_h: PAGE_H,
        });
    }

    let mut noise_events = 0;
    for t in &mut page.tokens {
        let (noisy, n) = add_char_noise(&t.text, spec.char_noise_rate, &mut noise_rng);
        t.text = noisy;
        noise_events += n;
    }

    let lab_boxes = gt_items[0].clone();
    let client_boxes = lab_boxes
        .iter()
        .map(|b| {
            let mut m = || client_rng.gen_range(0..=spec.client_margin_px);
            BBox::new(
                (b.left - m()).max(0),
                (b.top - m()).max(0),
                (b.right + m()).min(PAGE_W),
                (b.bottom + m()).min(PAGE_H),
            )
        })
        .collect();

    let document = Document::new(doc_id.clone(), PAGE_W, PAGE_H, page.tokens)?;
    Ok(SynthDoc {
        document,
        ground_truth: GroundTruthTable {
            doc_id: doc_id.clone(),
            items: gt_items,
        },
        lab_selection: PatternSelection {
            doc_id: doc_id.clone(),
            zone: spec.zone,
            boxes: lab_boxes,
        },
        client_selection: PatternSelection {
            doc_id,
            zone: spec.zone,
            boxes: client_boxes,
        },
        noise_events,
    })
}

/// Writes `docs/`, `gt/`, `patterns/` (lab) and `patterns_client/` under `dir`, one
/// `<doc_id>.json` per document in each.
pub fn write_corpus(docs: &[SynthDoc], dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    for sub in ["docs", "gt", "patterns", "patterns_client"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    for d in docs {
        let name = format!("{}.json", d.document.doc_id());
        save_json(&d.document, dir.join("docs").join(&name))?;
        save_json(&d.ground_truth, dir.join("gt").join(&name))?;
        save_json(&d.lab_selection, dir.join("patterns").join(&name))?;
        save_json(&d.client_selection, dir.join("patterns_client").join(&name))?;
    }
    Ok(())
}
