use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use t2d_core::compose::{compose_words, eval_restriction};
use t2d_core::expr::{eval, EquationSystem};
use t2d_core::grid::parse_words;
use t2d_core::interact::Datum;
use t2d_core::{Bounds, CompareOp, ContourSelector, ElementKind, Expr, Extremeness, Position, Restriction, Word};

fn word_from(m: &BTreeMap<(i32, i32), char>) -> Word {
    Word::from_cells(m.iter().map(|(&(r, c), &l)| (Position::new(r, c), l))).unwrap()
}

fn word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::btree_map((0..4i32, 0..4i32), prop::sample::select(vec!['a', 'b', 'c']), 1..=max)
        .prop_map(|m| word_from(&m))
}

fn selector() -> impl Strategy<Value = ContourSelector> {
    (
        prop::sample::select(ElementKind::ALL.to_vec()),
        prop::sample::select(vec![Extremeness::Any, Extremeness::Extreme, Extremeness::NonExtreme]),
    )
        .prop_map(|(kind, filter)| ContourSelector { kind, filter })
}

fn restriction() -> impl Strategy<Value = Restriction> {
    let op = prop::sample::select(vec![CompareOp::Equal, CompareOp::Included, CompareOp::Includes, CompareOp::Meets]);
    let leaf = (selector(), op, selector()).prop_map(|(l, op, r)| Restriction::atom(l, op, r));
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Restriction::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Restriction::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Restriction::or(a, b)),
        ]
    })
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        prop::sample::select(vec!['a', 'b', '0', '2']).prop_map(Expr::atom),
        prop::sample::select(vec!["X", "Y", "X5'"]).prop_map(Expr::var),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Expr::Sum),
            (inner.clone(), restriction(), inner.clone()).prop_map(|(l, r, rt)| Expr::compose(l, r, rt)),
            (inner, restriction()).prop_map(|(b, r)| Expr::star(b, r)),
        ]
    })
}

fn datum() -> impl Strategy<Value = Datum> {
    let leaf = prop_oneof![
        Just(Datum::Empty),
        (-50i64..50).prop_map(Datum::Int),
        prop::sample::select(vec!["a", "OK", "end", "?"]).prop_map(Datum::sym),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Datum::pair(a, b)),
            prop::collection::vec(inner, 0..3).prop_map(Datum::set),
        ]
    })
}

/// All contact placements of `w` against `v`, found by scanning offsets and
/// checking cell pairs directly.
fn contact_placements(v: &Word, w: &Word) -> BTreeSet<Word> {
    let vc: BTreeMap<Position, char> = v.cells().collect();
    let wc: Vec<(Position, char)> = w.cells().collect();
    let mut out = BTreeSet::new();
    for dr in -(w.rows() as i32) - 1..=v.rows() as i32 + 1 {
        for dc in -(w.cols() as i32) - 1..=v.cols() as i32 + 1 {
            let moved: Vec<(Position, char)> = wc.iter().map(|&(p, l)| (p.offset(dr, dc), l)).collect();
            if moved.iter().any(|(p, _)| vc.contains_key(p)) {
                continue;
            }
            let touches =
                moved.iter().any(|(p, _)| vc.keys().any(|q| (p.row - q.row).abs() <= 1 && (p.col - q.col).abs() <= 1));
            if touches {
                out.insert(Word::from_cells(vc.iter().map(|(&p, &l)| (p, l)).chain(moved)).unwrap());
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 500, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn restriction_print_parse(r in restriction()) {
        prop_assert_eq!(Restriction::parse(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn expr_print_parse(e in expr()) {
        let printed = e.to_string();
        let back = Expr::parse(&printed).unwrap();
        prop_assert_eq!(back.to_string(), printed);
        prop_assert_eq!(back.classify(), e.classify());
        prop_assert_eq!(back.variables(), e.variables());
    }

    #[test]
    fn system_print_parse(x in expr(), y in expr(), z in expr()) {
        let sys = EquationSystem::new(vec![("X".into(), x), ("Y".into(), y), ("X5'".into(), z)]).unwrap();
        let back = EquationSystem::parse(&sys.to_string()).unwrap();
        prop_assert_eq!(back.to_string(), sys.to_string());
    }

    #[test]
    fn datum_print_parse(d in datum()) {
        prop_assert_eq!(Datum::parse(&d.to_string()).unwrap(), d);
    }

    #[test]
    fn word_text_roundtrip(ws in prop::collection::vec(word(8), 1..4)) {
        let text: String = ws.iter().map(|w| w.to_text()).collect::<Vec<_>>().join("\n");
        prop_assert_eq!(parse_words(&text).unwrap(), ws);
    }

    #[test]
    fn de_morgan(v in word(4), w in word(4), p in restriction(), q in restriction(), dr in -4..5i32, dc in -4..5i32) {
        let lhs = Restriction::not(Restriction::and(p.clone(), q.clone()));
        let rhs = Restriction::or(Restriction::not(p), Restriction::not(q));
        prop_assert_eq!(eval_restriction(&lhs, &v, &w, (dr, dc)), eval_restriction(&rhs, &v, &w, (dr, dc)));
    }

    #[test]
    fn contact_only_composition(v in word(5), w in word(5)) {
        prop_assert_eq!(compose_words(&v, &w, &Restriction::True), contact_placements(&v, &w));
    }

    #[test]
    fn restricted_composition_is_a_subset(v in word(4), w in word(4), r in restriction()) {
        prop_assert!(compose_words(&v, &w, &r).is_subset(&contact_placements(&v, &w)));
    }

    #[test]
    fn sum_is_idempotent(e in expr()) {
        let bounds = Bounds::new(3, 3, 3).unwrap();
        let env = BTreeMap::from([
            ("X".to_string(), BTreeSet::from([Word::letter('a').unwrap()])),
            ("Y".to_string(), BTreeSet::new()),
            ("X5'".to_string(), BTreeSet::from([Word::letter('b').unwrap()])),
        ]);
        let once = eval(&e, &env, &bounds).unwrap();
        prop_assert_eq!(eval(&Expr::Sum(vec![e.clone(), e]), &env, &bounds).unwrap(), once);
    }
}
