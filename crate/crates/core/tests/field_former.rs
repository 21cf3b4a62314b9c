use argmine::field_former::{fields_from_selection, BUILTIN_TAXONOMY};
use argmine::{
    form_fields, intra_field_gap, or1, type_signature, BBox, Document, LabelName, PatternSelection,
    Taxonomy, Token, Zone,
};
use proptest::prelude::*;

fn doc(words: &[(&str, [i64; 4])]) -> Document {
    let tokens = words
        .iter()
        .enumerate()
        .map(|(i, (t, [l, tp, r, b]))| Token::new(i, *t, BBox::new(*l, *tp, *r, *b)))
        .collect();
    Document::new("d", 1000, 400, tokens).unwrap()
}

#[test]
fn gap_is_the_largest_selected_gap() {
    // gaps 7, 15 and 11 inside three separate fields
    let d = doc(&[
        ("Blue", [40, 100, 80, 120]),
        ("widget", [87, 100, 147, 120]),
        ("Steel", [300, 100, 350, 120]),
        ("bolt", [365, 100, 405, 120]),
        ("Copper", [600, 100, 660, 120]),
        ("cable", [671, 100, 721, 120]),
    ]);
    let sel = PatternSelection {
        doc_id: "d".into(),
        zone: Zone::Body,
        boxes: vec![
            BBox::new(38, 98, 150, 122),
            BBox::new(298, 98, 408, 122),
            BBox::new(598, 98, 724, 122),
        ],
    };
    assert_eq!(intra_field_gap(&sel, &d).unwrap(), 15);
}

#[test]
fn invoice_line_partition() {
    // gaps: "2"->"Widgets" 8, "Widgets"->"10.00" 72, "10.00"->"20.00" 70
    let d = doc(&[
        ("2", [40, 100, 50, 120]),
        ("Widgets", [58, 100, 128, 120]),
        ("10.00", [200, 100, 250, 120]),
        ("20.00", [320, 100, 370, 120]),
    ]);
    let fields = form_fields(&d, 12, true, Taxonomy::builtin());
    let parts: Vec<Vec<usize>> = fields.iter().map(|f| f.token_ids.clone()).collect();
    assert_eq!(parts, [vec![0, 1], vec![2], vec![3]]);
    assert_eq!(fields[0].features.value, "2 Widgets");
    assert_eq!(fields[0].features.wsep, 8);
    assert_eq!(fields[1].label(), LabelName::Price);
}

#[test]
fn clipping_client_box_resolves_to_main_field() {
    let d = doc(&[
        ("Blue", [100, 100, 140, 120]),
        ("widget", [150, 100, 210, 120]),
        ("12.50", [230, 100, 280, 120]),
    ]);
    let fields = form_fields(&d, 12, true, Taxonomy::builtin());
    assert_eq!(fields.len(), 2);
    let client = BBox::new(95, 96, 240, 124);
    // 2*2200/(4060+2200) against the description, 2*200/(4060+1000) against the price
    assert_eq!(or1(&client, fields[0].bbox()), 4400.0 / 6260.0);
    assert_eq!(or1(&client, fields[1].bbox()), 400.0 / 5060.0);
    let sel = PatternSelection { doc_id: "d".into(), zone: Zone::Body, boxes: vec![client] };
    let chosen = fields_from_selection(&sel, &fields).unwrap();
    assert_eq!(chosen[0].field_id, 0);
}

#[test]
fn builtin_taxonomy_matches_shipped_rules_file() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/taxonomy.json");
    assert_eq!(std::fs::read_to_string(path).unwrap(), BUILTIN_TAXONOMY);
    let loaded = Taxonomy::load(path).unwrap();
    for v in ["12/04/2013", "1O0.50 €", "15 %", "42", "AB1234", "12 Rue Victor Hugo", "Blue widget", "x"] {
        assert_eq!(loaded.label(v).unwrap(), Taxonomy::builtin().label(v).unwrap());
    }
}

fn arb_line_doc() -> impl Strategy<Value = Document> {
    prop::collection::vec(("[A-Za-z0-9./]{1,6}", 0i64..40, 0i64..6, 1i64..3), 1..20).prop_map(|ws| {
        let mut x = 0;
        let tokens = ws
            .into_iter()
            .enumerate()
            .map(|(i, (text, gap, row, lines))| {
                x += gap;
                let w = text.len() as i64 * 10;
                let top = row * 24 * lines;
                let b = BBox::new(x % 600, top, x % 600 + w, top + 20);
                x += w;
                Token::new(i, text, b)
            })
            .collect();
        Document::new("p", 700, 400, tokens).unwrap()
    })
}

proptest! {
    #[test]
    fn fields_partition_tokens(d in arb_line_doc(), gap in 0i64..50, merge in any::<bool>()) {
        let fields = form_fields(&d, gap, merge, Taxonomy::builtin());
        let mut ids: Vec<usize> = fields.iter().flat_map(|f| f.token_ids.clone()).collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..d.tokens().len()).collect::<Vec<_>>());
        for f in &fields {
            prop_assert!(f.features.now >= 1 && f.features.nol >= 1 && f.features.size >= 1);
            prop_assert!(f.features.wsep >= 0);
            if f.features.now == 1 {
                prop_assert_eq!(f.features.wsep, 0);
            }
            let hull = BBox::union_all(f.token_ids.iter().map(|&i| &d.tokens()[i].bbox)).unwrap();
            prop_assert_eq!(*f.bbox(), hull);
        }
    }

    #[test]
    fn wider_gap_never_adds_fields(d in arb_line_doc(), gap in 0i64..40, extra in 0i64..40) {
        let tax = Taxonomy::builtin();
        prop_assert!(form_fields(&d, gap + extra, false, tax).len() <= form_fields(&d, gap, false, tax).len());
    }

    #[test]
    fn alphabetic_values_have_signature_a(s in "[A-Za-z]{1,12}( [A-Za-z]{1,8}){0,3}") {
        prop_assert_eq!(type_signature(&s), "A");
        let tax = Taxonomy::builtin();
        prop_assert_eq!(tax.label(&s).unwrap(), tax.label(&s).unwrap());
    }
}

#[test]
fn date_signature() {
    assert_eq!(type_signature("12/04/13"), "9S9S9");
}
