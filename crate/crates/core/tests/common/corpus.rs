//! Golden protocol sources with their exact expected parse.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use qwalk_core::{parse_protocol, PlateOp};

pub enum Expect {
    Ok {
        plates: Vec<PlateOp>,
        boundaries: Vec<usize>,
    },
    Err {
        line: usize,
        column: usize,
    },
}

pub struct Case {
    pub name: &'static str,
    pub source: &'static str,
    pub expect: Expect,
}

fn ok(plates: Vec<PlateOp>, boundaries: Vec<usize>) -> Expect {
    Expect::Ok { plates, boundaries }
}

fn err(line: usize, column: usize) -> Expect {
    Expect::Err { line, column }
}

macro_rules! case {
    ($file:literal, $expect:expr) => {
        Case {
            name: $file,
            source: include_str!(concat!("../corpus/", $file, ".qwp")),
            expect: $expect,
        }
    };
}

pub fn cases() -> Vec<Case> {
    use PlateOp::{Coin, ShiftX, ShiftY};
    let balanced = vec![Coin(PI / 4.0), ShiftX(PI), Coin(PI / 4.0), ShiftY(PI)];
    let three: Vec<PlateOp> = balanced.iter().cycle().take(12).copied().collect();
    vec![
        case!("01_balanced_step", ok(balanced.clone(), vec![4])),
        case!("02_three_steps", ok(three, vec![4, 8, 12])),
        case!("03_empty", ok(vec![], vec![])),
        case!("04_scaled_pi", ok(vec![ShiftX(0.5 * PI)], vec![1])),
        case!("05_comments", ok(vec![Coin(0.25), ShiftY(0.1)], vec![2])),
        case!(
            "06_nested_repeat",
            ok(
                vec![
                    Coin(PI / 2.0),
                    ShiftX(PI),
                    ShiftX(PI),
                    Coin(PI / 2.0),
                    ShiftX(PI),
                    ShiftX(PI),
                ],
                vec![3, 6],
            )
        ),
        case!(
            "07_negative_angle",
            ok(vec![Coin(-0.25 * PI + TAU)], vec![1])
        ),
        case!(
            "08_empty_step",
            ok(vec![ShiftY(PI / 3.0), Coin(2.0)], vec![1, 2])
        ),
        case!("09_whitespace", ok(vec![Coin(PI), ShiftX(3.0)], vec![2])),
        case!("10_reduced_angle", ok(vec![Coin(7.5 - TAU)], vec![1])),
        case!(
            "11_exponent_and_sign",
            ok(vec![ShiftX(0.25 * PI), ShiftY(1.5)], vec![2])
        ),
        case!("12_empty_repeat", ok(vec![], vec![])),
        case!("13_unknown_word", err(1, 9)),
        case!("14_unknown_char", err(2, 10)),
        case!("15_unclosed_brace", err(1, 10)),
        case!("16_stray_brace", err(1, 6)),
        case!("17_zero_repeat", err(1, 8)),
        case!("18_overflow_number", err(1, 3)),
        case!("19_divide_by_zero", err(1, 7)),
        case!("20_missing_paren", err(2, 3)),
    ]
}

/// Runs one case; `Err` carries a description of the mismatch.
pub fn check(case: &Case) -> Result<(), String> {
    let got = parse_protocol(case.source);
    match (&case.expect, got) {
        (Expect::Ok { plates, boundaries }, Ok(p)) => {
            if p.plates() != plates.as_slice() {
                return Err(format!("plates {:?} != {:?}", p.plates(), plates));
            }
            if p.step_boundaries() != boundaries.as_slice() {
                return Err(format!(
                    "boundaries {:?} != {:?}",
                    p.step_boundaries(),
                    boundaries
                ));
            }
            Ok(())
        }
        (Expect::Err { line, column }, Err(d)) => {
            if (d.line, d.column) == (*line, *column) {
                Ok(())
            } else {
                Err(format!("diagnostic {d} expected at {line}:{column}"))
            }
        }
        (Expect::Ok { .. }, Err(d)) => Err(format!("unexpected diagnostic {d}")),
        (Expect::Err { .. }, Ok(p)) => Err(format!("accepted with {} plates", p.len())),
    }
}
