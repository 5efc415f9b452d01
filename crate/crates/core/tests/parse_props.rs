mod common;

use proptest::prelude::*;
use tmlang::{fixtures, parse, parse_source, print};

fn assert_spans_inside(text: &str, errors: &[tmlang::ParseError]) -> Result<(), TestCaseError> {
    let lines: Vec<&str> = text.split('\n').collect();
    for e in errors {
        prop_assert!(!e.message.is_empty());
        let s = &e.span;
        prop_assert!(s.line >= 1 && s.line <= lines.len(), "line {} of {}", s.line, lines.len());
        let width = lines[s.line - 1].chars().count();
        // a zero-length span may sit just past the last character
        prop_assert!(s.column >= 1 && s.column + s.length.max(1) <= width + 2, "{:?} in line of width {}", s, width);
        prop_assert!(s.length == 0 || s.column + s.length <= width + 1, "{:?} in line of width {}", s, width);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_is_identity(m in common::arb_model_with_events(12)) {
        let text = print(&m);
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(print(&back), text);
    }

    #[test]
    fn error_spans_point_into_the_text(
        which in 0..fixtures::ALL.len(),
        cut in any::<prop::sample::Index>(),
        len in 0..12usize,
        insert in prop::sample::select(vec!["", "{", "}", ";", "->", "@", "\"", "machine", "Ghost.x", "flow", "\n"]),
    ) {
        let src = fixtures::ALL[which].1;
        let chars: Vec<char> = src.chars().collect();
        let at = cut.index(chars.len());
        let end = (at + len).min(chars.len());
        let mutated: String = chars[..at].iter().collect::<String>() + insert + &chars[end..].iter().collect::<String>();
        if let Err(errors) = parse_source("m.tm", &mutated) {
            prop_assert!(!errors.is_empty());
            assert_spans_inside(&mutated, &errors)?;
        }
    }

    #[test]
    fn arbitrary_text_never_panics(text in "[a-z{};.\\->:\" \n#0-9]{0,80}") {
        if let Err(errors) = parse(&text) {
            assert_spans_inside(&text, &errors)?;
        }
    }
}

#[test]
fn parse_print_fixpoint_on_fixtures() {
    for (name, src) in fixtures::ALL {
        let m = parse(src).unwrap();
        let once = print(&m);
        let twice = print(&parse(&once).unwrap());
        assert_eq!(once, twice, "{name}");
        assert_eq!(parse(&once).unwrap(), m, "{name}");
    }
}

#[test]
fn duplicate_ids_never_accepted() {
    let cases = [
        "model m { machine A { create x; create x; } }",
        "model m { machine A { create x; process y as create_x; } }",
        "model m { machine A { machine B { } machine B { } } }",
        "model m { machine A { create x; machine create_x { } } }",
    ];
    for src in cases {
        let errs = parse(src).unwrap_err();
        assert!(errs.iter().any(|e| e.message.contains("duplicate id")), "{src}: {errs:?}");
    }
}

#[test]
fn unresolved_reference_is_named() {
    let errs = parse("model m { machine A { create x; } flow A.create_x -> Ghost.transfer_x; }").unwrap_err();
    assert_eq!(errs.len(), 1);
    assert!(errs[0].message.contains("Ghost.transfer_x"));
}

#[test]
fn order_making_has_five_top_level_machines() {
    let m = parse(fixtures::ORDER_MAKING).unwrap();
    let names: Vec<&str> = m.top_level_machines().map(|m| m.name.as_str()).collect();
    assert_eq!(names, ["Customer", "Management", "Inventory", "Supplier", "Production"]);
}
