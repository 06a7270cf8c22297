use proptest::prelude::*;

use regret_gls::bench::{parse_report_csv, GapReport, GapRow, GapSummary, Reference, ReferenceSource};
use regret_gls::construct::{farthest_insertion, nearest_insertion, nearest_neighbor, regret_greedy};
use regret_gls::data::split_dataset;
use regret_gls::gls::{GuidedSearchState, Guide, PenaltyMode};
use regret_gls::instance::{format_instance_line, parse_instance_line, DistanceMatrix, Instance};
use regret_gls::regret::{format_regret_csv, oracle, parse_regret_csv, Provenance, RegretMatrix};
use regret_gls::search::{is_local_optimum, local_search};
use regret_gls::tour::{apply_move, format_tour_line, parse_tour_line, tour_cost, Move, Tour};

fn plain_cost(dm: &DistanceMatrix, order: &[usize]) -> f64 {
    let n = order.len();
    (0..n).map(|k| dm.get(order[k], order[(k + 1) % n])).sum()
}

fn instance_and_tour() -> impl Strategy<Value = (DistanceMatrix, Tour)> {
    (4usize..40, any::<u64>()).prop_flat_map(|(n, seed)| {
        Just((0..n).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(move |order| (Instance::random(n, seed).unwrap().distance_matrix(), Tour::new(order).unwrap()))
    })
}

fn any_move(n: usize) -> impl Strategy<Value = Move> {
    prop_oneof![
        (0..n - 1).prop_flat_map(move |a| (Just(a), a + 1..n)).prop_map(|(a, b)| Move::TwoOpt { a, b }),
        (0..n, 0..n - 1).prop_map(|(from, to)| Move::Relocate { from, to }),
    ]
}

fn small_regret_instance() -> impl Strategy<Value = Instance> {
    (4usize..9, any::<u64>()).prop_map(|(n, seed)| Instance::random(n, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn moves_keep_permutations_and_deltas_match(
        (dm, t, m) in instance_and_tour().prop_flat_map(|(dm, t)| {
            let n = t.len();
            (Just(dm), Just(t), any_move(n))
        })
    ) {
        let after = apply_move(&t, m);
        prop_assert!(Tour::for_size(after.order().to_vec(), t.len()).is_ok());
        let before = plain_cost(&dm, t.order());
        let expected = plain_cost(&dm, after.order()) - before;
        prop_assert!((m.delta(&dm, &t) - expected).abs() <= 1e-9 * before);
    }

    #[test]
    fn local_search_never_worsens((dm, t) in instance_and_tour()) {
        let out = local_search(&dm, &t, None);
        prop_assert!(tour_cost(&dm, &out) <= tour_cost(&dm, &t) + 1e-12);
        prop_assert!(is_local_optimum(&dm, &out));
    }

    #[test]
    fn cost_is_representation_free((dm, t) in instance_and_tour(), shift in 0usize..40, reverse: bool) {
        let n = t.len();
        let mut order: Vec<usize> = (0..n).map(|k| t.order()[(k + shift) % n]).collect();
        if reverse {
            order.reverse();
        }
        let other = Tour::new(order).unwrap();
        prop_assert!(other.same_cycle(&t));
        prop_assert_eq!(tour_cost(&dm, &other).to_bits(), tour_cost(&dm, &t).to_bits());
    }

    #[test]
    fn constructors_emit_permutations(n in 3usize..60, seed: u64, start_frac in 0.0f64..1.0) {
        let dm = Instance::random(n, seed).unwrap().distance_matrix();
        let start = ((n as f64 * start_frac) as usize).min(n - 1);
        let flat = RegretMatrix::from_fn(n, Provenance::Predicted, |i, j| ((i * 7 + j * 7) % 5) as f64);
        for t in [nearest_neighbor(&dm, start), farthest_insertion(&dm), nearest_insertion(&dm, start), regret_greedy(&dm, &flat, start)] {
            prop_assert_eq!(t.len(), n);
        }
        prop_assert_eq!(nearest_neighbor(&dm, start).node_at(0), start);
    }

    #[test]
    fn regret_is_symmetric_nonnegative_and_zero_on_optimum(inst in small_regret_instance()) {
        let dm = inst.distance_matrix();
        let sol = oracle(&dm).unwrap();
        let n = inst.n();
        for i in 0..n {
            prop_assert_eq!(sol.regret.get(i, i), 0.0);
            for j in 0..n {
                prop_assert_eq!(sol.regret.get(i, j), sol.regret.get(j, i));
                prop_assert!(sol.regret.get(i, j) >= 0.0);
            }
        }
        for (i, j) in sol.tour.edges() {
            prop_assert_eq!(sol.regret.get(i, j), 0.0);
        }
        let back = parse_regret_csv(&format_regret_csv(&sol.regret)).unwrap();
        prop_assert_eq!(back.matrix, sol.regret);
    }

    #[test]
    fn penalized_edges_invariant_under_guide_scaling((dm, t) in instance_and_tour(), factor in 0.01f64..100.0, rounds in 1usize..6) {
        let n = t.len();
        let r = RegretMatrix::from_fn(n, Provenance::Predicted, |i, j| dm.get(i, j).sqrt() + ((i + j) % 3) as f64);
        let mut a = GuidedSearchState::new(&dm, &Guide::Regret(r.clone()));
        let mut b = GuidedSearchState::new(&dm, &Guide::Regret(r.scaled(factor)));
        for _ in 0..rounds {
            prop_assert_eq!(a.penalize(&t, PenaltyMode::AllTied), b.penalize(&t, PenaltyMode::AllTied));
        }
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(a.penalty(i, j), a.penalty(j, i));
            }
        }
    }

    #[test]
    fn text_formats_roundtrip(n in 3usize..30, seed: u64, cost in 0.0f64..1e6) {
        let inst = Instance::random(n, seed).unwrap();
        prop_assert_eq!(parse_instance_line(&format_instance_line(&inst), 1).unwrap(), inst.clone());
        let t = nearest_neighbor(&inst.distance_matrix(), 0);
        let (name, c, back) = parse_tour_line(&format_tour_line(&inst.name, cost, &t)).unwrap();
        prop_assert_eq!(name, inst.name);
        prop_assert_eq!(c, cost);
        prop_assert_eq!(back, t);
    }

    #[test]
    fn summary_recomputes_from_report(costs in prop::collection::vec((1.0f64..2.0, 1.0f64..1.5, proptest::bool::ANY), 1..30)) {
        let rows: Vec<GapRow> = costs
            .iter()
            .enumerate()
            .map(|(k, &(opt, ratio, known))| {
                let reference = known.then_some(Reference { value: opt, source: ReferenceSource::Oracle });
                GapRow::new(format!("i{k}"), opt * ratio, reference, ratio).unwrap()
            })
            .collect();
        let tours = vec![Tour::identity(3); rows.len()];
        let report = GapReport::from_rows("p", rows.clone(), tours);
        let csv = report.to_csv();
        let a = GapSummary::from_rows(&rows);
        let b = GapSummary::from_rows(&parse_report_csv(&csv).unwrap());
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
        prop_assert_eq!(format!("{:?}", report.summary), format!("{b:?}"));
    }

    #[test]
    fn split_partitions(len in 2usize..200, frac in 0.05f64..0.95, seed: u64) {
        let records: Vec<usize> = (0..len).collect();
        match split_dataset(records, (frac, 1.0 - frac), seed) {
            Ok((train, val)) => {
                let mut all: Vec<usize> = train.iter().chain(&val).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..len).collect::<Vec<_>>());
                prop_assert!(!train.is_empty() && !val.is_empty());
            }
            Err(_) => {
                let t = (frac * len as f64).round() as usize;
                prop_assert!(t == 0 || t >= len);
            }
        }
    }
}
