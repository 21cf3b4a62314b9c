//! Token grouping into fields, per-field features and regex-driven semantic labels.

use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use fancy_regex::Regex;
use serde::{Deserialize, Serialize};

use crate::doc_model::{parse_json, BBox, Document, PatternSelection};
use crate::error::{Error, Result};
use crate::evaluator::or1;

/// Gap used when the selection holds no multi-word field to learn from.
pub const DEFAULT_GAP: i64 = 12;

/// The built-in taxonomy, shipped verbatim as the default rules file.
pub const BUILTIN_TAXONOMY: &str = include_str!("../data/taxonomy.json");

/// Characters OCR tends to hallucinate at the end of a value.
const TRAILING_NOISE: &[char] = &['.', ',', ';', ':'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelName {
    Date,
    Price,
    Quantity,
    Percentage,
    Code,
    Description,
    Address,
    Other,
}

impl LabelName {
    pub fn as_str(&self) -> &'static str {
        match self {
            LabelName::Date => "date",
            LabelName::Price => "price",
            LabelName::Quantity => "quantity",
            LabelName::Percentage => "percentage",
            LabelName::Code => "code",
            LabelName::Description => "description",
            LabelName::Address => "address",
            LabelName::Other => "other",
        }
    }
}

impl fmt::Display for LabelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SemanticLabel {
    pub name: LabelName,
    /// Identifier `name@priority` of the rule that fired, `none` for [`LabelName::Other`].
    pub matched_by: String,
}

impl SemanticLabel {
    pub fn other() -> Self {
        SemanticLabel {
            name: LabelName::Other,
            matched_by: "none".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFeatures {
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub value: String,
    pub ftype: String,
    pub size: usize,
    pub wsep: i64,
    pub now: usize,
    pub nol: usize,
    pub label: SemanticLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub field_id: usize,
    pub token_ids: Vec<usize>,
    pub features: FieldFeatures,
}

impl Field {
    pub fn bbox(&self) -> &BBox {
        &self.features.bbox
    }

    pub fn label(&self) -> LabelName {
        self.features.label.name
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleSpec {
    pub name: LabelName,
    pub pattern: String,
    pub priority: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RulesFile {
    pub rules: Vec<RuleSpec>,
}

#[derive(Debug)]
struct Rule {
    name: LabelName,
    id: String,
    regex: Regex,
}

/// Ordered regex rules; the first match decides the label.
#[derive(Debug)]
pub struct Taxonomy {
    rules: Vec<Rule>,
}

impl Taxonomy {
    pub fn from_rules(file: RulesFile) -> Result<Self> {
        let mut specs = file.rules;
        specs.sort_by_key(|r| r.priority);
        let mut rules = Vec::with_capacity(specs.len());
        for spec in specs {
            if spec.name == LabelName::Other {
                return Err(Error::InvalidRule {
                    name: spec.name.to_string(),
                    reason: "`other` is the fallback and cannot have a rule".into(),
                });
            }
            let regex = Regex::new(&spec.pattern).map_err(|e| Error::InvalidRule {
                name: spec.name.to_string(),
                reason: e.to_string(),
            })?;
            rules.push(Rule {
                name: spec.name,
                id: format!("{}@{}", spec.name, spec.priority),
                regex,
            });
        }
        Ok(Taxonomy { rules })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_rules(parse_json(text, "taxonomy")?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Shared instance of the built-in rules.
    pub fn builtin() -> &'static Taxonomy {
        static BUILTIN: OnceLock<Taxonomy> = OnceLock::new();
        BUILTIN.get_or_init(|| {
            Taxonomy::from_json(BUILTIN_TAXONOMY).expect("built-in taxonomy compiles")
        })
    }

    pub fn label(&self, value: &str) -> Result<SemanticLabel> {
        if value.trim().is_empty() {
            return Err(Error::EmptyValue);
        }
        let cleaned = value.trim().trim_end_matches(TRAILING_NOISE).trim_end();
        if cleaned.is_empty() {
            return Ok(SemanticLabel::other());
        }
        for rule in &self.rules {
            // Backtracking limits only trip on pathological input; treat as no match.
            if rule.regex.is_match(cleaned).unwrap_or(false) {
                return Ok(SemanticLabel {
                    name: rule.name,
                    matched_by: rule.id.clone(),
                });
            }
        }
        Ok(SemanticLabel::other())
    }
}

/// Labels a field value with the given taxonomy.
pub fn label_field(value: &str, taxonomy: &Taxonomy) -> Result<SemanticLabel> {
    taxonomy.label(value)
}

/// Run-length signature over `A` (letters), `9` (digits) and `S` (anything else).
/// Whitespace is skipped and does not break runs.
pub fn type_signature(value: &str) -> String {
    let mut sig = String::new();
    let mut last = None;
    for c in value.chars().filter(|c| !c.is_whitespace()) {
        let class = if c.is_alphabetic() {
            'A'
        } else if c.is_numeric() {
            '9'
        } else {
            'S'
        };
        if last != Some(class) {
            sig.push(class);
            last = Some(class);
        }
    }
    sig
}

/// Largest horizontal gap between consecutive same-line tokens inside any selected
/// field, or [`DEFAULT_GAP`] when every selected field is a single word.
pub fn intra_field_gap(selection: &PatternSelection, doc: &Document) -> Result<i64> {
    let mut best: Option<i64> = None;
    for (index, sel) in selection.boxes.iter().enumerate() {
        let inside: Vec<_> = doc
            .tokens()
            .iter()
            .filter(|t| sel.contains_center_of(&t.bbox))
            .collect();
        if inside.is_empty() {
            return Err(Error::NoTokenInBox { index, bbox: *sel });
        }
        // tokens are in reading order, so same-band neighbours are adjacent
        for pair in inside.windows(2) {
            if doc.band_of(pair[0].id) == doc.band_of(pair[1].id) {
                let gap = (pair[1].bbox.left - pair[0].bbox.right).max(0);
                best = Some(best.map_or(gap, |b| b.max(gap)));
            }
        }
    }
    Ok(best.unwrap_or(DEFAULT_GAP))
}

/// Groups the document's tokens into fields.
///
/// Within each line band, consecutive tokens join while the horizontal gap stays within
/// `gap`. With `line_merge`, a field continues onto the next band when a piece there
/// overlaps it horizontally by at least half the narrower width and the vertical gap is
/// at most half the smaller height.
pub fn form_fields(doc: &Document, gap: i64, line_merge: bool, taxonomy: &Taxonomy) -> Vec<Field> {
    let tokens = doc.tokens();

    // pieces: single-line runs, each a list of token ids
    let mut pieces_by_band: Vec<Vec<Vec<usize>>> = Vec::with_capacity(doc.bands().len());
    for band in doc.bands() {
        let mut pieces: Vec<Vec<usize>> = Vec::new();
        let mut right = i64::MIN;
        for id in band.clone() {
            let b = &tokens[id].bbox;
            match pieces.last_mut() {
                Some(cur) if b.left - right <= gap => {
                    cur.push(id);
                    right = right.max(b.right);
                }
                _ => {
                    pieces.push(vec![id]);
                    right = b.right;
                }
            }
        }
        pieces_by_band.push(pieces);
    }

    let piece_box = |ids: &[usize]| {
        BBox::union_all(ids.iter().map(|&i| &tokens[i].bbox)).expect("pieces are non-empty")
    };

    // groups: list of lines, each line a piece
    let mut groups: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut open: Vec<usize> = Vec::new(); // groups whose last line is the previous band
    for pieces in pieces_by_band {
        let mut next_open = Vec::with_capacity(pieces.len());
        let mut taken = vec![false; groups.len()];
        for piece in pieces {
            let pb = piece_box(&piece);
            let target = if line_merge {
                open.iter()
                    .copied()
                    .filter(|&g| !taken[g])
                    .filter_map(|g| {
                        let last = piece_box(groups[g].last().expect("group has a line"));
                        let vgap = pb.top - last.bottom;
                        let hoverlap = pb.right.min(last.right) - pb.left.max(last.left);
                        let fits = 2 * vgap <= pb.height().min(last.height())
                            && hoverlap >= 0
                            && 2 * hoverlap >= pb.width().min(last.width());
                        fits.then_some((hoverlap, g))
                    })
                    .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
                    .map(|(_, g)| g)
            } else {
                None
            };
            match target {
                Some(g) => {
                    taken[g] = true;
                    groups[g].push(piece);
                    next_open.push(g);
                }
                None => {
                    groups.push(vec![piece]);
                    taken.push(true);
                    next_open.push(groups.len() - 1);
                }
            }
        }
        open = next_open;
    }

    groups.sort_by_key(|g| g[0][0]);
    groups
        .into_iter()
        .enumerate()
        .map(|(field_id, lines)| build_field(field_id, &lines, doc, taxonomy))
        .collect()
}

fn build_field(field_id: usize, lines: &[Vec<usize>], doc: &Document, taxonomy: &Taxonomy) -> Field {
    let tokens = doc.tokens();
    let token_ids: Vec<usize> = lines.iter().flatten().copied().collect();
    let bbox = BBox::union_all(token_ids.iter().map(|&i| &tokens[i].bbox)).expect("non-empty field");
    let value = token_ids
        .iter()
        .map(|&i| tokens[i].text.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    let wsep = lines
        .iter()
        .flat_map(|line| {
            line.windows(2)
                .map(|w| (tokens[w[1]].bbox.left - tokens[w[0]].bbox.right).max(0))
        })
        .max()
        .unwrap_or(0);
    let label = taxonomy
        .label(&value)
        .expect("token texts are non-empty");
    Field {
        field_id,
        features: FieldFeatures {
            bbox,
            ftype: type_signature(&value),
            size: value.chars().filter(|c| !c.is_whitespace()).count(),
            wsep,
            now: token_ids.len(),
            nol: lines.len(),
            label,
            value,
        },
        token_ids,
    }
}

/// Resolves each selection box to the field it overlaps most (by OR₁), keeping the
/// selection order.
pub fn fields_from_selection(selection: &PatternSelection, fields: &[Field]) -> Result<Vec<Field>> {
    let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(selection.boxes.len());
    for (index, sel) in selection.boxes.iter().enumerate() {
        let mut best: Option<(f64, usize)> = None;
        for (pos, f) in fields.iter().enumerate() {
            let r = or1(sel, f.bbox());
            if r > 0.0 && best.is_none_or(|(b, _)| r > b) {
                best = Some((r, pos));
            }
        }
        let Some((_, pos)) = best else {
            return Err(Error::NoFieldOverlap { index, bbox: *sel });
        };
        if let Some(&(first, _)) = chosen.iter().find(|(_, p)| *p == pos) {
            return Err(Error::DuplicateField {
                first,
                second: index,
                field_id: fields[pos].field_id,
            });
        }
        chosen.push((index, pos));
    }
    Ok(chosen.into_iter().map(|(_, pos)| fields[pos].clone()).collect())
}
