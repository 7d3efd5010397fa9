use bdscore::analysis::bayes_factor;
use bdscore::entropy::posterior_expected_entropy;
use bdscore::graph::is_covered;
use bdscore::learn::{exhaustive_best, hill_climb, HillClimbOptions};
use bdscore::scores::{alpha_table, local_log_score, total_score, BicPenalty};
use bdscore::{AlphaSpec, Dag, Dataset, LocalCounts, Score};
use proptest::prelude::*;

/// Random categorical data over `n` variables with cardinalities 2..=3.
fn arb_data(n: usize, max_rows: usize) -> impl Strategy<Value = Dataset> {
    prop::collection::vec(2usize..=3, n).prop_flat_map(move |card| {
        let row = card.iter().map(|&r| 0..r).collect::<Vec<_>>();
        prop::collection::vec(row, 1..=max_rows).prop_map(move |rows| {
            let names: Vec<String> = (0..card.len()).map(|i| format!("V{i}")).collect();
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            Dataset::from_codes(&names, &card, &rows).unwrap()
        })
    })
}

/// Random DAG on `n` nodes: arcs only go forward in a random permutation.
fn arb_dag(n: usize) -> impl Strategy<Value = Dag> {
    let pairs = n * (n - 1) / 2;
    (
        Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
        prop::collection::vec(any::<bool>(), pairs),
    )
        .prop_map(move |(order, bits)| {
            let mut arcs = Vec::new();
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if bits[k] {
                        arcs.push((order[a], order[b]));
                    }
                    k += 1;
                }
            }
            Dag::from_arcs(n, &arcs).unwrap()
        })
}

fn arb_alpha() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), 0.01f64..100.0]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covered_reversal_keeps_equivalent_scores(
        data in arb_data(4, 40),
        dag in arb_dag(4),
        alpha in arb_alpha(),
    ) {
        for (from, to) in dag.arcs() {
            if !is_covered(&dag, from, to) {
                continue;
            }
            let rev = dag.with_reversed(from, to).unwrap();
            for score in [Score::Bd(AlphaSpec::bdeu(alpha)), Score::Bic(BicPenalty::Literal)] {
                let a = total_score(&data, &dag, &score).unwrap().total;
                let b = total_score(&data, &rev, &score).unwrap().total;
                prop_assert!(close(a, b), "{} {a} vs {b}", score.name());
            }
        }
    }

    #[test]
    fn bd_equals_product_of_sequential_predictions(
        data in arb_data(2, 30),
        alpha in arb_alpha(),
        kind in prop_oneof![Just("bdeu"), Just("k2"), Just("bdj")],
    ) {
        let spec = AlphaSpec::new(kind.parse().unwrap(), alpha);
        let counts = data.counts(0, &[1]).unwrap();
        let table = alpha_table(&spec, &counts).unwrap();
        let (r, q) = (data.cardinality(0), data.cardinality(1));
        let mut seen = vec![vec![0.0; r]; q];
        let mut log_p = 0.0;
        for row in data.rows() {
            let (k, j) = (row[0] as usize, row[1] as usize);
            let a_ij: f64 = table.row(j).iter().sum();
            let n_ij: f64 = seen[j].iter().sum();
            log_p += ((table.row(j)[k] + seen[j][k]) / (a_ij + n_ij)).ln();
            seen[j][k] += 1.0;
        }
        let direct = local_log_score(&counts, &spec).unwrap();
        prop_assert!(close(direct, log_p), "{direct} vs {log_p}");
    }

    #[test]
    fn log_bd_is_not_positive(
        data in arb_data(3, 40),
        dag in arb_dag(3),
        alpha in arb_alpha(),
    ) {
        for spec in [AlphaSpec::bdeu(alpha), AlphaSpec::bds(alpha), AlphaSpec::k2(), AlphaSpec::bdla(alpha, 2)] {
            let s = total_score(&data, &dag, &Score::Bd(spec)).unwrap().total;
            prop_assert!(s <= 0.0);
        }
    }

    #[test]
    fn bds_ignores_unobserved_parent_configurations(
        rows in prop::collection::vec(prop::collection::vec(0u64..6, 3), 2..6),
        extra in 1usize..4,
        alpha in arb_alpha(),
    ) {
        let observed: Vec<Vec<u64>> = rows.into_iter().filter(|r| r.iter().sum::<u64>() > 0).collect();
        prop_assume!(!observed.is_empty());
        let mut padded = observed.clone();
        padded.extend(std::iter::repeat_n(vec![0; 3], extra));
        let spec = AlphaSpec::bds(alpha);
        let a = local_log_score(&LocalCounts::from_table(&observed).unwrap(), &spec).unwrap();
        let b = local_log_score(&LocalCounts::from_table(&padded).unwrap(), &spec).unwrap();
        prop_assert!(close(a, b), "{a} vs {b}");
    }

    #[test]
    fn expected_entropy_is_bounded(
        rows in prop::collection::vec(prop::collection::vec(0u64..8, 3), 1..6),
        alpha in arb_alpha(),
    ) {
        let counts = LocalCounts::from_table(&rows).unwrap();
        for spec in [AlphaSpec::bdeu(alpha), AlphaSpec::bdj(), AlphaSpec::k2()] {
            let table = alpha_table(&spec, &counts).unwrap();
            let ee = posterior_expected_entropy(&counts, &table).unwrap();
            let bound = counts.q() as f64 * (counts.r() as f64).ln();
            prop_assert!(ee >= 0.0 && ee <= bound + 1e-12, "{ee} outside [0, {bound}]");
        }
    }

    #[test]
    fn bayes_factor_is_antisymmetric(
        data in arb_data(3, 40),
        alpha in arb_alpha(),
    ) {
        let minus = Dag::from_arcs(3, &[(0, 2)]).unwrap();
        let plus = minus.with_arc(1, 2).unwrap();
        let spec = AlphaSpec::bdeu(alpha);
        let forward = bayes_factor(&data, &minus, &plus, &spec).unwrap();
        let backward = bayes_factor(&data, &plus, &minus, &spec).unwrap();
        prop_assert!(close(forward, -backward));
        prop_assert_eq!(bayes_factor(&data, &plus, &plus, &spec).unwrap(), 0.0);
    }

    #[test]
    fn hill_climb_never_beats_exhaustive_search(data in arb_data(3, 30), alpha in arb_alpha()) {
        let score = Score::Bd(AlphaSpec::bdeu(alpha));
        let result = hill_climb(&data, &score, HillClimbOptions::default()).unwrap();
        let (_, best) = exhaustive_best(&data, &score).unwrap();
        prop_assert!(result.score <= best + 1e-9);
        prop_assert!(result.moves.iter().all(|m| m.delta > 0.0));
        let empty = total_score(&data, &Dag::empty(3), &score).unwrap().total;
        prop_assert!(result.score >= empty);
        prop_assert!(close(result.score, total_score(&data, &result.dag, &score).unwrap().total));
    }

    #[test]
    fn csv_round_trip(data in arb_data(4, 20)) {
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let back = Dataset::from_reader(buf.as_slice(), true).unwrap();
        prop_assert_eq!(back.names(), data.names());
        prop_assert_eq!(back.n_rows(), data.n_rows());
        for r in 0..data.n_rows() {
            let a: Vec<&str> = data.row(r).iter().enumerate()
                .map(|(v, &c)| data.variables()[v].levels[c as usize].as_str()).collect();
            let b: Vec<&str> = back.row(r).iter().enumerate()
                .map(|(v, &c)| back.variables()[v].levels[c as usize].as_str()).collect();
            prop_assert_eq!(a, b);
        }
    }
}
