mod common;

use common::*;
use mvss::carrier::Carrier;
use mvss::io::{
    emit_barcode, emit_carrier, emit_complex, emit_cover, emit_points, parse_barcode, parse_carrier, parse_complex,
    parse_cover, parse_points,
};
use mvss::persistence::compute_ph;
use mvss::{FieldSpec, FilteredComplex32, FilteredComplex64};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn complexes_round_trip(seed in any::<u64>(), p in prop::sample::select(vec![2u32, 3, 7])) {
        let mut r = rng(seed);
        let k = random_simplicial(&mut r, 6, 3, 6, 4, FieldSpec::new(p).unwrap());
        let text = emit_complex(&k);
        let back: FilteredComplex64 = parse_complex(&text).unwrap();
        prop_assert_eq!(&back, &k);
        prop_assert_eq!(emit_complex(&back), text);
    }

    #[test]
    fn covers_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_simplicial(&mut r, 6, 2, 6, 3, FieldSpec::f2());
        let cover = random_cover(&mut r, &k, 3);
        let text = emit_cover(&cover);
        let parsed = parse_cover(&text, &k).unwrap();
        prop_assert!(parsed.closed.is_empty());
        prop_assert_eq!(&parsed.cover, &cover);
        prop_assert_eq!(emit_cover(&parsed.cover), text);
    }

    #[test]
    fn carriers_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = random_simplicial(&mut r, 5, 2, 5, 3, FieldSpec::f2());
        let y = x.clone();
        let c = Carrier::from_fn(x.clone(), y.clone(), 0.0, |_, c| vec![c]).unwrap();
        let text = emit_carrier(&c);
        let back = parse_carrier(&text, &x, &y).unwrap();
        prop_assert_eq!(emit_carrier(&back), text);
    }

    #[test]
    fn points_round_trip_exactly(seed in any::<u64>(), dim in 1usize..4) {
        let mut r = rng(seed);
        let pts: Vec<Vec<f64>> = (0..r.gen_range(1..12)).map(|_| (0..dim).map(|_| r.gen_range(-1e3..1e3)).collect()).collect();
        let back: Vec<Vec<f64>> = parse_points(&emit_points(&pts)).unwrap();
        prop_assert_eq!(back, pts);
    }

    #[test]
    fn barcodes_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = random_simplicial(&mut r, 6, 2, 6, 4, FieldSpec::f2());
        for b in compute_ph(&k, 1) {
            let text = emit_barcode(&b);
            let back = parse_barcode::<f64>(&text).unwrap();
            prop_assert!(back.same_bars(&b));
            prop_assert_eq!(emit_barcode(&back), text);
        }
    }
}

#[test]
fn emission_is_deterministic_and_canonical() {
    let fx = mvss::fixtures::fig4();
    let a = emit_complex(&fx.complex);
    let b = emit_complex(&fx.complex.clone());
    assert_eq!(a, b);
    assert!(a.ends_with("}\n"));
    assert!(a.find("\"cells\"").unwrap() < a.find("\"field\"").unwrap());
    assert!(a.contains("\"schema\": \"mvss.complex/1\""));
}

#[test]
fn fig4_file_loads() {
    let text = emit_complex(&mvss::fixtures::fig4().complex);
    let k: FilteredComplex64 = parse_complex(&text).unwrap();
    assert_eq!(k.len(), 21);
    let k32: FilteredComplex32 = parse_complex(&text).unwrap();
    assert_eq!(k32.len(), 21);
}

#[test]
fn a_single_vertex_is_a_complex() {
    let k: FilteredComplex64 =
        parse_complex(r#"{"field": 2, "grid": [0.0], "cells": [{"id": 0, "dim": 0, "birth": 0, "boundary": []}]}"#)
            .unwrap();
    assert_eq!(k.len(), 1);
    assert_eq!(compute_ph(&k, 0)[0].bars.len(), 1);
}

#[test]
fn negative_coefficients_reduce_mod_p() {
    let text = r#"{"field": 3, "grid": [0.0], "cells": [
        {"id": 0, "dim": 0, "birth": 0, "boundary": []},
        {"id": 1, "dim": 0, "birth": 0, "boundary": []},
        {"id": 2, "dim": 1, "birth": 0, "boundary": [[0, -1], [1, 4]]}]}"#;
    let k: FilteredComplex64 = parse_complex(text).unwrap();
    assert_eq!(k.cell(2).boundary, vec![(0, 2), (1, 1)]);
}

#[test]
fn input_errors_say_where() {
    let bad = parse_complex::<f64>("{\"field\": 2,\n \"grid\": [0.0],\n \"cells\": [ }").unwrap_err();
    assert_eq!(bad.exit_code(), 2);
    assert!(bad.to_string().contains("line 3"), "{bad}");

    let dup = parse_complex::<f64>(
        r#"{"field": 2, "grid": [0.0], "cells": [{"id": 0, "dim": 0, "birth": 0, "boundary": []},
            {"id": 0, "dim": 0, "birth": 0, "boundary": []}]}"#,
    )
    .unwrap_err();
    assert!(dup.to_string().contains("duplicate"), "{dup}");

    let schema = parse_complex::<f64>(r#"{"schema": "mvss.cover/1", "field": 2, "grid": [0.0], "cells": []}"#);
    assert_eq!(schema.unwrap_err().exit_code(), 2);

    let k = mvss::fixtures::fig4().complex;
    let cover = parse_cover(r#"{"sets": {"A": [0, 1], "B": [999]}}"#, &k).unwrap_err();
    assert_eq!(cover.exit_code(), 2);
    assert!(cover.to_string().contains("\"B\"") && cover.to_string().contains("999"), "{cover}");

    let pts = parse_points::<f64>("# two points\n0.0, 1.0\n2.0, x\n").unwrap_err();
    assert!(pts.to_string().contains("line 3, field 2"), "{pts}");
    let ragged = parse_points::<f64>("0,1\n2\n").unwrap_err();
    assert!(ragged.to_string().contains("line 2"), "{ragged}");
}

#[test]
fn carriers_reject_unknown_targets() {
    let k = mvss::fixtures::fig4().complex;
    let n = k.grid().len();
    let mut maps = vec!["{}"; n];
    maps[0] = r#"{"0": [500]}"#;
    let text = format!(r#"{{"eps": 0.0, "assignments": [{}]}}"#, maps.join(","));
    let err = parse_carrier(&text, &k, &k).unwrap_err();
    assert!(err.to_string().contains("500"), "{err}");
}
