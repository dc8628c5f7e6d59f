use std::collections::BTreeMap;

use gtens::ensemble::{enumerate_matchings, sample_graph, PoolingGraph};
use gtens::EnsembleSpec;

fn structure(g: &PoolingGraph) -> Vec<Vec<usize>> {
    g.adj
        .iter()
        .map(|t| {
            let mut t = t.clone();
            t.sort_unstable();
            t
        })
        .collect()
}

#[test]
fn sampler_is_uniform_over_matchings() {
    let spec = EnsembleSpec::regular(4, 2, 4).unwrap();
    let mut exact: BTreeMap<Vec<Vec<usize>>, u64> = BTreeMap::new();
    let mut total = 0u64;
    for g in enumerate_matchings(&spec, 1_000_000).unwrap() {
        *exact.entry(structure(&g)).or_default() += 1;
        total += 1;
    }
    assert_eq!(total, 40320);

    let draws = 60_000u64;
    let mut seen: BTreeMap<Vec<Vec<usize>>, u64> = BTreeMap::new();
    for seed in 0..draws {
        let g = sample_graph(&spec, seed).unwrap();
        assert!(g.is_consistent_with(&spec));
        *seen.entry(structure(&g)).or_default() += 1;
    }
    assert!(seen.keys().all(|k| exact.contains_key(k)));

    // Pearson chi-square against the exact structure distribution.
    let chi2: f64 = exact
        .iter()
        .map(|(k, &count)| {
            let expected = draws as f64 * count as f64 / total as f64;
            let observed = *seen.get(k).unwrap_or(&0) as f64;
            (observed - expected).powi(2) / expected
        })
        .sum();
    let dof = (exact.len() - 1) as f64;
    // Roughly a 5-sigma upper bound for a chi-square with `dof` degrees.
    let bound = dof + 5.0 * (2.0 * dof).sqrt();
    assert!(chi2 < bound, "chi2 {chi2:.1} over {dof} degrees of freedom");
}
