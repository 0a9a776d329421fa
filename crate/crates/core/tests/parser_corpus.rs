mod common;

use common::corpus;
use proptest::prelude::*;
use qwalk_core::{format_protocol, parse_protocol, PlateOp, Protocol};

#[test]
fn golden_corpus() {
    let cases = corpus::cases();
    assert_eq!(cases.len(), 20);
    let failures: Vec<String> = cases
        .iter()
        .filter_map(|c| corpus::check(c).err().map(|e| format!("{}: {e}", c.name)))
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn diagnostics_carry_messages() {
    let d = parse_protocol("REPEAT 0 { C(1) }").unwrap_err();
    assert!(d.message.contains("at least 1"), "{}", d.message);
    let d = parse_protocol("C(1) }").unwrap_err();
    assert!(d.message.contains("unbalanced"), "{}", d.message);
    assert_eq!(d.to_string(), format!("1:6: {}", d.message));
}

fn plate() -> impl Strategy<Value = PlateOp> {
    let angle = prop_oneof![
        -100.0f64..100.0,
        Just(0.0),
        Just(std::f64::consts::PI),
        any::<f64>().prop_filter("finite", |a| a.is_finite()),
    ];
    (0..3u8, angle).prop_map(|(k, a)| match k {
        0 => PlateOp::coin(a).unwrap(),
        1 => PlateOp::shift_x(a).unwrap(),
        _ => PlateOp::shift_y(a).unwrap(),
    })
}

fn protocol() -> impl Strategy<Value = Protocol> {
    (
        prop::collection::vec(plate(), 0..24),
        prop::collection::vec(any::<bool>(), 24),
    )
        .prop_map(|(plates, cuts)| {
            let mut bounds: Vec<usize> = (1..plates.len()).filter(|&i| cuts[i]).collect();
            if !plates.is_empty() {
                bounds.push(plates.len());
            }
            Protocol::new(plates, bounds).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn format_then_parse_is_identity(p in protocol()) {
        let text = format_protocol(&p);
        let back = parse_protocol(&text).map_err(|d| TestCaseError::fail(d.to_string()))?;
        prop_assert_eq!(back, p);
    }
}

proptest! {
    #[test]
    fn repeat_expands_to_copies(p in protocol(), k in 1usize..5) {
        let body = format_protocol(&p);
        let once = parse_protocol(&body).unwrap();
        let repeated = parse_protocol(&format!("REPEAT {k} {{ {body} }}")).unwrap();
        prop_assert_eq!(repeated.len(), k * once.len());
        for (i, op) in repeated.plates().iter().enumerate() {
            prop_assert_eq!(*op, once.plates()[i % once.len().max(1)]);
        }
        prop_assert_eq!(repeated.step_count(), if once.is_empty() { 0 } else { k * once.step_count() });
    }

    #[test]
    fn diagnostics_point_inside_the_source(src in "[CTXYPIREPATS(){}*/0-9 .#\n-]{0,40}") {
        if let Err(d) = parse_protocol(&src) {
            let lines: Vec<&str> = src.split('\n').collect();
            prop_assert!(d.line >= 1 && d.line <= lines.len(), "{d} in {src:?}");
            let width = lines[d.line - 1].chars().count();
            prop_assert!(d.column >= 1 && d.column <= width, "{d} in {src:?}");
        }
    }
}
