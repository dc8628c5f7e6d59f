use std::collections::BTreeMap;

use gtens::combinatorics::{binomial, rational};
use gtens::detection::DdRule;
use gtens::enumerator::{
    comp_irregular, comp_regular, dd_irregular, dd_regular, error_polynomial, error_probability,
    fa_probability, horner, md_probability,
};
use gtens::oracle::{exact_enumerators, exact_error_probability, OracleOptions};
use gtens::{
    Algorithm, BigRational, DegreeDistribution, EnsembleSpec, EnumeratorTable, Error, Method,
};
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn mixed() -> EnsembleSpec {
    EnsembleSpec::new(
        3,
        2,
        DegreeDistribution::new([(1, rational(2, 3)), (2, rational(1, 3))]),
        DegreeDistribution::single(2),
    )
}

type Frozen = &'static [((usize, usize), (i64, i64))];

// Tables produced by a standalone brute-force script that enumerates every
// socket matching and defectivity pattern. Keys are (defectives, errors);
// absent cells are zero.
const COMP_4_1_2: Frozen = &[
    ((0, 0), (1, 1)),
    ((1, 1), (4, 1)),
    ((2, 0), (2, 1)),
    ((2, 2), (4, 1)),
    ((3, 1), (4, 1)),
    ((4, 0), (1, 1)),
];
const DD_4_1_2: Frozen = &[
    ((0, 0), (1, 1)),
    ((1, 1), (4, 1)),
    ((2, 2), (6, 1)),
    ((3, 3), (4, 1)),
    ((4, 4), (1, 1)),
];
const COMP_4_2_2: Frozen = &[
    ((0, 0), (1, 1)),
    ((1, 0), (116, 35)),
    ((1, 1), (24, 35)),
    ((2, 0), (114, 35)),
    ((2, 1), (48, 35)),
    ((2, 2), (48, 35)),
    ((3, 0), (4, 7)),
    ((3, 1), (24, 7)),
    ((4, 0), (1, 1)),
];
const DD_4_2_2: Frozen = &[
    ((0, 0), (1, 1)),
    ((1, 0), (96, 35)),
    ((1, 1), (44, 35)),
    ((2, 0), (64, 35)),
    ((2, 1), (32, 35)),
    ((2, 2), (114, 35)),
    ((3, 3), (4, 1)),
    ((4, 4), (1, 1)),
];
const COMP_MIXED: Frozen = &[
    ((0, 0), (1, 1)),
    ((1, 0), (5, 3)),
    ((1, 1), (2, 3)),
    ((1, 2), (2, 3)),
    ((2, 0), (1, 3)),
    ((2, 1), (8, 3)),
    ((3, 0), (1, 1)),
];
const DD_MIXED: Frozen = &[
    ((0, 0), (1, 1)),
    ((1, 0), (4, 3)),
    ((1, 1), (5, 3)),
    ((2, 2), (3, 1)),
    ((3, 3), (1, 1)),
];
const DD_2_1_2: Frozen = &[((0, 0), (1, 1)), ((1, 1), (2, 1)), ((2, 2), (1, 1))];

fn expand(frozen: Frozen) -> BTreeMap<(usize, usize), BigRational> {
    frozen
        .iter()
        .map(|&(k, (p, q))| (k, rational(p, q)))
        .collect()
}

fn nonzero(table: &EnumeratorTable) -> BTreeMap<(usize, usize), BigRational> {
    table
        .values
        .iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(k, v)| (*k, v.clone()))
        .collect()
}

fn frozen_cases() -> Vec<(EnsembleSpec, Algorithm, Frozen)> {
    vec![
        (
            EnsembleSpec::regular(4, 1, 2).unwrap(),
            Algorithm::Comp,
            COMP_4_1_2,
        ),
        (
            EnsembleSpec::regular(4, 1, 2).unwrap(),
            Algorithm::Dd,
            DD_4_1_2,
        ),
        (
            EnsembleSpec::regular(4, 2, 2).unwrap(),
            Algorithm::Comp,
            COMP_4_2_2,
        ),
        (
            EnsembleSpec::regular(4, 2, 2).unwrap(),
            Algorithm::Dd,
            DD_4_2_2,
        ),
        (
            EnsembleSpec::regular(2, 1, 2).unwrap(),
            Algorithm::Dd,
            DD_2_1_2,
        ),
        (mixed(), Algorithm::Comp, COMP_MIXED),
        (mixed(), Algorithm::Dd, DD_MIXED),
    ]
}

#[test]
fn closed_forms_reproduce_brute_force_tables() {
    for (spec, algorithm, frozen) in frozen_cases() {
        let expected = expand(frozen);
        let mut methods = vec![Method::Irregular];
        if spec.as_regular().is_some() {
            methods.push(Method::Regular);
        }
        for method in methods {
            let table = EnumeratorTable::compute(&spec, algorithm, method).unwrap();
            assert_eq!(
                nonzero(&table),
                expected,
                "{algorithm} {method:?} n={}",
                spec.n
            );
        }
        let oracle = exact_enumerators(&spec, algorithm, OracleOptions::default()).unwrap();
        assert_eq!(nonzero(&oracle.exact_table), expected);
    }
}

#[test]
fn single_cell_entry_points_match_tables() {
    let spec = EnsembleSpec::regular(4, 2, 2).unwrap();
    let comp = expand(COMP_4_2_2);
    let dd = expand(DD_4_2_2);
    for i in 0..=4u64 {
        for j in 0..=4 - i {
            let key = (i as usize, j as usize);
            let c = comp.get(&key).cloned().unwrap_or_else(BigRational::zero);
            assert_eq!(comp_regular(4, 2, 2, i, j).unwrap(), c);
            assert_eq!(comp_irregular(&spec, i, j).unwrap(), c);
            // DD cells are indexed by (found, missed).
            let key = ((i + j) as usize, j as usize);
            let d = dd.get(&key).cloned().unwrap_or_else(BigRational::zero);
            assert_eq!(dd_regular(4, 2, 2, i, j).unwrap(), d);
            assert_eq!(dd_irregular(&spec, i, j).unwrap(), d);
        }
    }
    assert!(comp_regular(4, 2, 2, 3, 2).is_err());
}

#[test]
fn closed_forms_match_the_oracle_on_small_ensembles() {
    let specs = vec![
        EnsembleSpec::regular(3, 1, 3).unwrap(),
        EnsembleSpec::regular(6, 1, 2).unwrap(),
        EnsembleSpec::regular(6, 1, 3).unwrap(),
        EnsembleSpec::regular(3, 2, 3).unwrap(),
        EnsembleSpec::regular(4, 2, 4).unwrap(),
        EnsembleSpec::new(
            4,
            2,
            DegreeDistribution::new([(1, rational(1, 2)), (2, rational(1, 2))]),
            DegreeDistribution::new([(2, rational(1, 2)), (4, rational(1, 2))]),
        ),
        EnsembleSpec::new(
            5,
            3,
            DegreeDistribution::new([(1, rational(3, 5)), (2, rational(2, 5))]),
            DegreeDistribution::new([(2, rational(2, 3)), (3, rational(1, 3))]),
        ),
    ];
    for spec in specs {
        for algorithm in [Algorithm::Comp, Algorithm::Dd] {
            let oracle = exact_enumerators(&spec, algorithm, OracleOptions::default()).unwrap();
            assert_eq!(oracle.impossible_errors, 0);
            let table = EnumeratorTable::compute(&spec, algorithm, Method::Auto).unwrap();
            assert_eq!(
                table.values, oracle.exact_table.values,
                "{algorithm} {spec:?}"
            );
            let irregular = EnumeratorTable::compute(&spec, algorithm, Method::Irregular).unwrap();
            assert_eq!(irregular.values, table.values);
        }
    }
}

#[test]
fn node_set_rule_departs_from_socket_closed_forms_on_multigraphs() {
    let spec = EnsembleSpec::regular(4, 2, 2).unwrap();
    let node_set = OracleOptions {
        rule: DdRule::NodeSet,
        ..Default::default()
    };
    let socket = exact_enumerators(&spec, Algorithm::Dd, OracleOptions::default()).unwrap();
    let nodes = exact_enumerators(&spec, Algorithm::Dd, node_set).unwrap();
    assert_ne!(socket.exact_table.values, nodes.exact_table.values);
    assert!(nodes.exact_table.row_sum_violations().is_empty());
}

#[test]
fn row_sums_are_binomials() {
    let specs = [
        EnsembleSpec::regular(12, 2, 4).unwrap(),
        EnsembleSpec::regular(10, 3, 5).unwrap(),
        EnsembleSpec::new(
            12,
            6,
            DegreeDistribution::new([(2, rational(1, 2)), (3, rational(1, 2))]),
            DegreeDistribution::single(5),
        ),
    ];
    for spec in &specs {
        for algorithm in [Algorithm::Comp, Algorithm::Dd] {
            let table = EnumeratorTable::compute(spec, algorithm, Method::Auto).unwrap();
            assert!(
                table.row_sum_violations().is_empty(),
                "{algorithm} n={}",
                spec.n
            );
            assert_eq!(
                table.row_sum(spec.n as usize - 1),
                rational(spec.n as i64, 1)
            );
        }
    }
}

#[test]
fn everything_defective_is_detected_exactly() {
    let spec = EnsembleSpec::regular(12, 2, 4).unwrap();
    let comp = EnumeratorTable::compute(&spec, Algorithm::Comp, Method::Regular).unwrap();
    assert_eq!(comp.get(12, 0), rational(1, 1));
    // DD with every item defective has no definite defectives: all missed.
    let dd = EnumeratorTable::compute(&spec, Algorithm::Dd, Method::Regular).unwrap();
    assert_eq!(dd.get(12, 12), rational(1, 1));
}

#[test]
fn probabilities_match_the_oracle_expectation() {
    let cases = [
        (EnsembleSpec::regular(4, 1, 2).unwrap(), Algorithm::Comp),
        (EnsembleSpec::regular(4, 1, 2).unwrap(), Algorithm::Dd),
        (EnsembleSpec::regular(4, 2, 2).unwrap(), Algorithm::Comp),
        (EnsembleSpec::regular(4, 2, 2).unwrap(), Algorithm::Dd),
        (mixed(), Algorithm::Comp),
        (mixed(), Algorithm::Dd),
    ];
    for (spec, algorithm) in cases {
        let table = EnumeratorTable::compute(&spec, algorithm, Method::Auto).unwrap();
        for delta in [rational(1, 2), rational(1, 10), rational(2, 3)] {
            let analytic: BigRational = error_probability(&table, delta.clone()).unwrap();
            let oracle =
                exact_error_probability(&spec, algorithm, &delta, OracleOptions::default())
                    .unwrap();
            assert_eq!(analytic, oracle, "{algorithm} n={} delta={delta}", spec.n);
        }
    }
    let mixed_comp = EnumeratorTable::compute(&mixed(), Algorithm::Comp, Method::Auto).unwrap();
    assert_eq!(
        fa_probability(&mixed_comp, &rational(1, 2)).unwrap(),
        rational(11, 24)
    );
    let mixed_dd = EnumeratorTable::compute(&mixed(), Algorithm::Dd, Method::Auto).unwrap();
    assert_eq!(
        md_probability(&mixed_dd, &rational(1, 2)).unwrap(),
        rational(17, 24)
    );
}

#[test]
fn probability_errors() {
    let spec = EnsembleSpec::regular(4, 1, 2).unwrap();
    let mut table = EnumeratorTable::compute(&spec, Algorithm::Comp, Method::Auto).unwrap();
    assert!(matches!(
        md_probability(&table, &rational(1, 2)),
        Err(Error::WrongAlgorithm { .. })
    ));
    assert!(fa_probability(&table, &rational(3, 2)).is_err());
    assert!(error_probability(&table, -0.1f64).is_err());
    table.values.remove(&(1, 1));
    assert!(matches!(
        fa_probability(&table, &rational(1, 2)),
        Err(Error::IncompleteTable { a: 1, j: 1 })
    ));
}

#[test]
fn dd_never_misses_with_no_defectives_and_comp_never_alarms_when_all_defective() {
    let spec = EnsembleSpec::regular(10, 3, 5).unwrap();
    let comp = EnumeratorTable::compute(&spec, Algorithm::Comp, Method::Auto).unwrap();
    let dd = EnumeratorTable::compute(&spec, Algorithm::Dd, Method::Auto).unwrap();
    let one = rational(1, 1);
    let zero = rational(0, 1);
    assert_eq!(fa_probability(&comp, &one).unwrap(), zero);
    assert_eq!(fa_probability(&comp, &zero).unwrap(), zero);
    assert_eq!(md_probability(&dd, &zero).unwrap(), zero);
    // All items defective: every one is missed.
    assert_eq!(md_probability(&dd, &one).unwrap(), one);
}

#[test]
fn csv_layout() {
    let spec = EnsembleSpec::regular(4, 1, 2).unwrap();
    let table = EnumeratorTable::compute(&spec, Algorithm::Comp, Method::Auto).unwrap();
    let mut out = Vec::new();
    table.write_csv(&mut out, "closed-form", 6).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        format!(
            "# algorithm=COMP source=closed-form spec_hash={}",
            spec.hash()
        )
    );
    assert_eq!(lines[1], "# n=4 m=2");
    assert_eq!(lines[2], "a,j,numerator,denominator,decimal");
    assert_eq!(lines.len(), 3 + 15);
    assert!(lines.contains(&"1,1,4,1,4"));
    assert!(lines.contains(&"2,1,0,1,0"));
}

fn table_6_2_3() -> &'static EnumeratorTable {
    use std::sync::OnceLock;
    static TABLE: OnceLock<EnumeratorTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let spec = EnsembleSpec::regular(6, 2, 3).unwrap();
        EnumeratorTable::compute(&spec, Algorithm::Dd, Method::Auto).unwrap()
    })
}

proptest! {
    #[test]
    fn polynomial_form_agrees_with_direct_sum(p in 0i64..=60, q in 1i64..=60) {
        prop_assume!(p <= q);
        let delta = rational(p, q);
        let table = table_6_2_3();
        let direct: BigRational = error_probability(table, delta.clone()).unwrap();
        let coeffs = error_polynomial(table).unwrap();
        prop_assert_eq!(horner(&coeffs, delta.clone()), direct.clone());
        let float = error_probability(table, delta.to_f64().unwrap()).unwrap();
        prop_assert!((float - direct.to_f64().unwrap()).abs() < 1e-12);
        prop_assert!(direct >= rational(0, 1) && direct <= rational(1, 1));
    }

    #[test]
    fn row_sums_hold_for_random_regular_ensembles(n in 2u64..10, l in 1u32..4, r in 2u32..6) {
        prop_assume!((n * l as u64).is_multiple_of(r as u64) && r as u64 <= n);
        let spec = EnsembleSpec::regular(n, l, r).unwrap();
        for algorithm in [Algorithm::Comp, Algorithm::Dd] {
            let table = EnumeratorTable::compute(&spec, algorithm, Method::Regular).unwrap();
            prop_assert!(table.row_sum_violations().is_empty());
            for a in 0..=n as usize {
                let expected = BigRational::from_integer(binomial(n, a as i64));
                prop_assert_eq!(table.row_sum(a), expected);
            }
        }
    }
}
