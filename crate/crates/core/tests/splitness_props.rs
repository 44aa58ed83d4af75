use proptest::prelude::*;
use superlie::coeff::{q, Q};
use superlie::splitness::*;

fn class(k: i64, terms: &[Term]) -> Option<ObstructionClass> {
    match splitting_attempt(&make_superstring(k, terms).unwrap()).unwrap().outcome {
        SplitOutcome::Split(_) => None,
        SplitOutcome::Obstructed(c) => Some(c),
    }
}

fn vector(k: i64, terms: &[Term]) -> Vec<Q> {
    class(k, terms).map(|c| c.vector).unwrap_or_else(|| vec![Q::from_integer(0.into()); obstruction_space(k).0])
}

fn terms_strategy(k: i64) -> impl Strategy<Value = Vec<(i64, i64)>> {
    let (lo, hi) = window(k);
    prop::collection::vec((lo..=hi, -5i64..=5), 0..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn split_above_minus_four(k in -3i64..=4, ts in terms_strategy(0)) {
        let (lo, hi) = window(k);
        let terms: Vec<Term> = ts.iter().filter(|(e, _)| *e >= lo && *e <= hi).map(|(e, c)| Term::phi(*e, &["tau"], q(*c))).collect();
        let t = make_superstring(k, &terms).unwrap();
        let r = splitting_attempt(&t).unwrap();
        match &r.outcome {
            SplitOutcome::Split(w) => prop_assert!(verify_witness(&t, w)),
            SplitOutcome::Obstructed(c) => prop_assert!(false, "k = {k}: {}", c.rendered),
        }
        prop_assert!(r.window_ok);
    }

    /// Splits exactly when the correction avoids x^(k+3)..x^(-1).
    #[test]
    fn split_iff_coboundary_supported(k in -7i64..=-4, ts in terms_strategy(-7)) {
        let (lo, hi) = window(k);
        let terms: Vec<Term> = ts.iter().filter(|(e, _)| *e >= lo && *e <= hi).map(|(e, c)| Term::phi(*e, &["tau"], q(*c))).collect();
        let mut gap = std::collections::BTreeMap::new();
        for t in &terms {
            if t.exponent >= k + 3 && t.exponent <= -1 {
                *gap.entry(t.exponent).or_insert(Q::from_integer(0.into())) += &t.coeff;
            }
        }
        gap.retain(|_, c| *c != Q::from_integer(0.into()));
        prop_assert_eq!(class(k, &terms).is_none(), gap.is_empty());
    }

    #[test]
    fn class_is_linear(k in -7i64..=-4, a in terms_strategy(-7), b in terms_strategy(-7)) {
        let (lo, hi) = window(k);
        let mk = |ts: &Vec<(i64, i64)>| -> Vec<Term> {
            ts.iter().filter(|(e, _)| *e >= lo && *e <= hi).map(|(e, c)| Term::phi(*e, &["tau"], q(*c))).collect()
        };
        let (ta, tb) = (mk(&a), mk(&b));
        let both: Vec<Term> = ta.iter().chain(&tb).cloned().collect();
        let sum: Vec<Q> = vector(k, &ta).iter().zip(vector(k, &tb)).map(|(x, y)| x + y).collect();
        prop_assert_eq!(vector(k, &both), sum);
    }

    #[test]
    fn retract_is_idempotent(k in -6i64..=3, ts in terms_strategy(-6)) {
        let (lo, hi) = window(k);
        let terms: Vec<Term> = ts.iter().filter(|(e, _)| *e >= lo && *e <= hi).map(|(e, c)| Term::phi(*e, &["tau"], q(*c))).collect();
        let t = make_superstring(k, &terms).unwrap();
        let r = retract(&t);
        prop_assert!(r.is_split_model());
        prop_assert_eq!(retract(&r), r);
    }
}

#[test]
fn obstruction_dims() {
    for k in -8..=-4 {
        assert_eq!(obstruction_space(k).0 as i64, (k + 2).abs() - 1);
    }
}
