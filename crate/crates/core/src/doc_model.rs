//! Geometric primitives, documents, client selections and ground truth, plus their
//! JSON wire formats.
//!
//! Coordinates are integer page pixels with the origin at the top-left corner and `y`
//! growing downward. Boxes travel on the wire as `[left, top, right, bottom]`.

use std::cmp::Ordering;
use std::fmt;
use std::fs;
use std::ops::Range;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::miner::TableResult;

/// Most key fields a single pattern selection may carry.
pub const MAX_SELECTION_BOXES: usize = 16;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[i64; 4]", into = "[i64; 4]")]
pub struct BBox {
    pub left: i64,
    pub top: i64,
    pub right: i64,
    pub bottom: i64,
}

impl BBox {
    /// Builds a box, panicking when the corners are swapped. Use [`BBox::try_new`] for
    /// untrusted input.
    pub fn new(left: i64, top: i64, right: i64, bottom: i64) -> Self {
        Self::try_new(left, top, right, bottom)
            .unwrap_or_else(|| panic!("invalid box [{left}, {top}, {right}, {bottom}]"))
    }

    pub fn try_new(left: i64, top: i64, right: i64, bottom: i64) -> Option<Self> {
        let b = BBox {
            left,
            top,
            right,
            bottom,
        };
        b.is_valid().then_some(b)
    }

    pub fn is_valid(&self) -> bool {
        self.left <= self.right && self.top <= self.bottom
    }

    pub fn width(&self) -> i64 {
        self.right - self.left
    }

    pub fn height(&self) -> i64 {
        self.bottom - self.top
    }

    pub fn area(&self) -> i64 {
        self.width() * self.height()
    }

    /// Area of the intersection, 0 when the boxes are disjoint or only touch.
    pub fn intersection_area(&self, other: &BBox) -> i64 {
        let w = self.right.min(other.right) - self.left.max(other.left);
        let h = self.bottom.min(other.bottom) - self.top.max(other.top);
        if w <= 0 || h <= 0 {
            0
        } else {
            w * h
        }
    }

    /// Closed-interval intersection test: touching boxes intersect.
    pub fn touches(&self, other: &BBox) -> bool {
        self.left <= other.right
            && other.left <= self.right
            && self.top <= other.bottom
            && other.top <= self.bottom
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            left: self.left.min(other.left),
            top: self.top.min(other.top),
            right: self.right.max(other.right),
            bottom: self.bottom.max(other.bottom),
        }
    }

    /// Tight hull of a non-empty box sequence.
    pub fn union_all<'a>(boxes: impl IntoIterator<Item = &'a BBox>) -> Option<BBox> {
        boxes.into_iter().copied().reduce(|acc, b| acc.union(&b))
    }

    /// Whether the center of `other` falls inside this box (closed). Works in doubled
    /// coordinates so no rounding is involved.
    pub fn contains_center_of(&self, other: &BBox) -> bool {
        let cx = other.left + other.right;
        let cy = other.top + other.bottom;
        2 * self.left <= cx && cx <= 2 * self.right && 2 * self.top <= cy && cy <= 2 * self.bottom
    }

    pub fn translated(&self, dx: i64, dy: i64) -> BBox {
        BBox {
            left: self.left + dx,
            top: self.top + dy,
            right: self.right + dx,
            bottom: self.bottom + dy,
        }
    }

    pub fn scaled(&self, factor: i64) -> BBox {
        BBox {
            left: self.left * factor,
            top: self.top * factor,
            right: self.right * factor,
            bottom: self.bottom * factor,
        }
    }
}

impl fmt::Debug for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}, {}, {}]",
            self.left, self.top, self.right, self.bottom
        )
    }
}

impl From<[i64; 4]> for BBox {
    fn from([left, top, right, bottom]: [i64; 4]) -> Self {
        BBox {
            left,
            top,
            right,
            bottom,
        }
    }
}

impl From<BBox> for [i64; 4] {
    fn from(b: BBox) -> Self {
        [b.left, b.top, b.right, b.bottom]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Token {
    pub id: usize,
    pub text: String,
    #[serde(rename = "box")]
    pub bbox: BBox,
}

impl Token {
    pub fn new(id: usize, text: impl Into<String>, bbox: BBox) -> Self {
        Token {
            id,
            text: text.into(),
            bbox,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Zone {
    Header,
    Body,
    Footer,
}

impl Zone {
    pub const ALL: [Zone; 3] = [Zone::Header, Zone::Body, Zone::Footer];

    pub fn as_str(&self) -> &'static str {
        match self {
            Zone::Header => "header",
            Zone::Body => "body",
            Zone::Footer => "footer",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DocumentWire {
    doc_id: String,
    page_w: i64,
    page_h: i64,
    tokens: Vec<Token>,
}

/// An OCR'd page: tokens in reading order with dense ids `0..T`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DocumentWire", into = "DocumentWire")]
pub struct Document {
    doc_id: String,
    page_w: i64,
    page_h: i64,
    tokens: Vec<Token>,
    bands: Vec<Range<usize>>,
    token_band: Vec<usize>,
}

impl PartialEq for Document {
    fn eq(&self, other: &Self) -> bool {
        self.doc_id == other.doc_id
            && self.page_w == other.page_w
            && self.page_h == other.page_h
            && self.tokens == other.tokens
    }
}

impl TryFrom<DocumentWire> for Document {
    type Error = Error;

    fn try_from(w: DocumentWire) -> Result<Self> {
        Document::new(w.doc_id, w.page_w, w.page_h, w.tokens)
    }
}

impl From<Document> for DocumentWire {
    fn from(d: Document) -> Self {
        DocumentWire {
            doc_id: d.doc_id,
            page_w: d.page_w,
            page_h: d.page_h,
            tokens: d.tokens,
        }
    }
}

/// Two boxes share a line band when their vertical overlap covers at least half of the
/// smaller height.
pub fn same_line(a: &BBox, b: &BBox) -> bool {
    let overlap = a.bottom.min(b.bottom) - a.top.max(b.top);
    overlap >= 0 && 2 * overlap >= a.height().min(b.height())
}

impl Document {
    /// Validates the tokens, sorts them into reading order and renumbers ids densely.
    pub fn new(
        doc_id: impl Into<String>,
        page_w: i64,
        page_h: i64,
        tokens: Vec<Token>,
    ) -> Result<Self> {
        let doc_id = doc_id.into();
        if doc_id.is_empty() {
            return Err(Error::Schema("doc_id must not be empty".into()));
        }
        if page_w <= 0 || page_h <= 0 {
            return Err(Error::Schema(format!(
                "page size must be positive, got {page_w}x{page_h}"
            )));
        }
        let mut seen = std::collections::HashSet::with_capacity(tokens.len());
        for t in &tokens {
            if !seen.insert(t.id) {
                return Err(Error::Schema(format!("duplicate token id {}", t.id)));
            }
            if t.text.is_empty() {
                return Err(Error::Schema(format!("token {} has empty text", t.id)));
            }
            if t.text.contains(['\n', '\r']) {
                return Err(Error::Schema(format!("token {} text contains a line break", t.id)));
            }
            let b = t.bbox;
            if b.left < 0 || b.top < 0 || b.right < 0 || b.bottom < 0 {
                return Err(Error::Schema(format!(
                    "token {} has a negative coordinate in {b:?}",
                    t.id
                )));
            }
            if !b.is_valid() {
                return Err(Error::DegenerateBox {
                    token_id: t.id,
                    bbox: b,
                });
            }
            if b.right > page_w || b.bottom > page_h {
                return Err(Error::OutsidePage {
                    token_id: t.id,
                    bbox: b,
                    page_w,
                    page_h,
                });
            }
        }

        let (tokens, bands) = reading_order(tokens);
        let mut token_band = vec![0; tokens.len()];
        for (bi, r) in bands.iter().enumerate() {
            for slot in &mut token_band[r.clone()] {
                *slot = bi;
            }
        }
        Ok(Document {
            doc_id,
            page_w,
            page_h,
            tokens,
            bands,
            token_band,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: DocumentWire = parse_json(text, "document")?;
        Document::try_from(wire)
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn page_w(&self) -> i64 {
        self.page_w
    }

    pub fn page_h(&self) -> i64 {
        self.page_h
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    /// Line bands as contiguous token-id ranges, top to bottom.
    pub fn bands(&self) -> &[Range<usize>] {
        &self.bands
    }

    pub fn band_of(&self, token_id: usize) -> usize {
        self.token_band[token_id]
    }

    /// Same page with every box moved by `(dx, dy)`; the page grows to keep tokens inside.
    pub fn translated(&self, dx: i64, dy: i64) -> Result<Document> {
        let tokens = self
            .tokens
            .iter()
            .map(|t| Token::new(t.id, t.text.clone(), t.bbox.translated(dx, dy)))
            .collect();
        Document::new(
            self.doc_id.clone(),
            self.page_w + dx.max(0),
            self.page_h + dy.max(0),
            tokens,
        )
    }

    pub fn scaled(&self, factor: i64) -> Result<Document> {
        let tokens = self
            .tokens
            .iter()
            .map(|t| Token::new(t.id, t.text.clone(), t.bbox.scaled(factor)))
            .collect();
        Document::new(
            self.doc_id.clone(),
            self.page_w * factor,
            self.page_h * factor,
            tokens,
        )
    }
}

/// Groups tokens into line bands (transitive closure of [`same_line`]), orders bands by
/// their top edge and tokens inside a band by their left edge. Returns the sorted tokens,
/// renumbered `0..T`, with the band ranges.
fn reading_order(tokens: Vec<Token>) -> (Vec<Token>, Vec<Range<usize>>) {
    let n = tokens.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if same_line(&tokens[i].bbox, &tokens[j].bbox) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }

    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut bands: Vec<Vec<usize>> = groups.into_values().collect();
    let band_key = |band: &Vec<usize>| {
        let top = band.iter().map(|&i| tokens[i].bbox.top).min().unwrap_or(0);
        let left = band.iter().map(|&i| tokens[i].bbox.left).min().unwrap_or(0);
        (top, left)
    };
    bands.sort_by_key(|b| band_key(b));
    for band in &mut bands {
        band.sort_by(|&a, &b| token_order(&tokens[a], &tokens[b]));
    }

    let mut slots: Vec<Option<Token>> = tokens.into_iter().map(Some).collect();
    let mut out = Vec::with_capacity(n);
    let mut ranges = Vec::with_capacity(bands.len());
    for band in bands {
        let start = out.len();
        for i in band {
            let mut t = slots[i].take().expect("token placed twice");
            t.id = out.len();
            out.push(t);
        }
        ranges.push(start..out.len());
    }
    (out, ranges)
}

fn token_order(a: &Token, b: &Token) -> Ordering {
    (a.bbox.left, a.bbox.top, a.bbox.right, a.bbox.bottom, a.id).cmp(&(
        b.bbox.left,
        b.bbox.top,
        b.bbox.right,
        b.bbox.bottom,
        b.id,
    ))
}

/// The client's input pattern: one box per selected key field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSelection {
    pub doc_id: String,
    pub zone: Zone,
    pub boxes: Vec<BBox>,
}

impl PatternSelection {
    pub fn validate(&self) -> Result<()> {
        if self.boxes.is_empty() {
            return Err(Error::EmptySelection);
        }
        if self.boxes.len() > MAX_SELECTION_BOXES {
            return Err(Error::TooManyBoxes(self.boxes.len()));
        }
        if let Some(b) = self.boxes.iter().find(|b| !b.is_valid()) {
            return Err(Error::Schema(format!("selection box {b:?} is degenerate")));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: PatternSelection = parse_json(text, "pattern selection")?;
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthTable {
    pub doc_id: String,
    pub items: Vec<Vec<BBox>>,
}

impl GroundTruthTable {
    pub fn validate(&self) -> Result<()> {
        if self.items.is_empty() {
            return Err(Error::Schema(format!(
                "ground truth for `{}` has no items",
                self.doc_id
            )));
        }
        for (i, item) in self.items.iter().enumerate() {
            if item.is_empty() {
                return Err(Error::Schema(format!("ground-truth item {i} has no boxes")));
            }
            if let Some(b) = item.iter().find(|b| !b.is_valid()) {
                return Err(Error::Schema(format!(
                    "ground-truth item {i} has a degenerate box {b:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GroundTruthTable = parse_json(text, "ground truth")?;
        g.validate()?;
        Ok(g)
    }
}

pub(crate) fn parse_json<T: DeserializeOwned>(text: &str, context: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => Error::Schema(format!("{context}: {e}")),
        _ => Error::json(context, e),
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_document(path: impl AsRef<Path>) -> Result<Document> {
    let path = path.as_ref();
    let wire: DocumentWire = parse_json(&read(path)?, &path.display().to_string())?;
    Document::try_from(wire)
}

pub fn load_selection(path: impl AsRef<Path>) -> Result<PatternSelection> {
    PatternSelection::from_json(&read(path.as_ref())?)
}

pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruthTable> {
    GroundTruthTable::from_json(&read(path.as_ref())?)
}

pub fn load_result(path: impl AsRef<Path>) -> Result<TableResult> {
    let path = path.as_ref();
    parse_json(&read(path)?, &path.display().to_string())
}

/// Canonical text form of any wire object; every writer in the workspace goes through
/// this so files and service payloads are byte-identical.
pub fn to_wire_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("wire types always serialize")
}

pub fn save_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = to_wire_string(value);
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn save_result(result: &TableResult, path: impl AsRef<Path>) -> Result<()> {
    save_json(result, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(id: usize, text: &str, l: i64, t: i64, r: i64, b: i64) -> Token {
        Token::new(id, text, BBox::new(l, t, r, b))
    }

    #[test]
    fn single_line_sorted_by_left() {
        let doc = Document::new(
            "d",
            500,
            500,
            vec![
                tok(7, "c", 200, 10, 230, 30),
                tok(3, "a", 10, 12, 40, 30),
                tok(5, "b", 100, 9, 130, 29),
            ],
        )
        .unwrap();
        let texts: Vec<_> = doc.tokens().iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["a", "b", "c"]);
        let ids: Vec<_> = doc.tokens().iter().map(|t| t.id).collect();
        assert_eq!(ids, [0, 1, 2]);
        assert_eq!(doc.bands().len(), 1);
    }

    #[test]
    fn swapped_corners_name_the_token() {
        let err = Document::new("d", 500, 500, vec![tok(0, "ok", 0, 0, 10, 10), Token {
            id: 4,
            text: "bad".into(),
            bbox: BBox::from([50, 0, 40, 10]),
        }])
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateBox { token_id: 4, .. }), "{err}");
    }

    #[test]
    fn negative_coordinate_is_schema_error() {
        let text = r#"{"doc_id":"d","page_w":100,"page_h":100,
            "tokens":[{"id":0,"text":"x","box":[-1,0,5,5]}]}"#;
        assert!(matches!(Document::from_json(text), Err(Error::Schema(_))));
    }

    #[test]
    fn unknown_and_missing_keys_rejected() {
        let extra = r#"{"doc_id":"d","page_w":100,"page_h":100,"tokens":[],"dpi":300}"#;
        assert!(matches!(Document::from_json(extra), Err(Error::Schema(_))));
        let missing = r#"{"doc_id":"d","page_w":100,"tokens":[]}"#;
        assert!(matches!(Document::from_json(missing), Err(Error::Schema(_))));
        let sel = r#"{"doc_id":"d","zone":"body","boxes":[[0,0,1,1]],"x":1}"#;
        assert!(PatternSelection::from_json(sel).is_err());
    }

    #[test]
    fn token_outside_page() {
        let err = Document::new("d", 100, 100, vec![tok(0, "x", 90, 0, 110, 10)]).unwrap_err();
        assert_eq!(err.code(), "box_outside_page");
    }

    #[test]
    fn selection_bounds() {
        let empty = PatternSelection {
            doc_id: "d".into(),
            zone: Zone::Body,
            boxes: vec![],
        };
        assert!(matches!(empty.validate(), Err(Error::EmptySelection)));
        let many = PatternSelection {
            boxes: vec![BBox::new(0, 0, 1, 1); 17],
            ..empty
        };
        assert!(matches!(many.validate(), Err(Error::TooManyBoxes(17))));
    }

    #[test]
    fn bands_need_half_overlap() {
        // 20px tall boxes: 10px overlap is exactly half -> same band; 9px is not.
        assert!(same_line(&BBox::new(0, 0, 10, 20), &BBox::new(20, 10, 30, 30)));
        assert!(!same_line(&BBox::new(0, 0, 10, 20), &BBox::new(20, 11, 30, 31)));
        assert!(!same_line(&BBox::new(0, 0, 10, 20), &BBox::new(20, 40, 30, 60)));
    }

    #[test]
    fn bbox_wire_is_array() {
        let b = BBox::new(1, 2, 3, 4);
        assert_eq!(serde_json::to_string(&b).unwrap(), "[1,2,3,4]");
        assert_eq!(b.area(), 4);
    }
}
