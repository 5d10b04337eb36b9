//! Property tests for the pure invariants: exact arithmetic, graph
//! serialization, and compound labeling.

use std::collections::BTreeSet;

use proptest::prelude::*;
use qwalk_core::{
    build_corona, classify_quadratic, is_perfect_square, perfect_sqrt, square_free_divisors,
    square_free_part, CoronaSpec, CoronaVertex, Graph, QuadraticClass,
};

fn naive_square_free(n: u64) -> bool {
    let mut p = 2u64;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

proptest! {
    #[test]
    fn square_free_part_reconstructs_its_input(n in 1u64..10_000_000) {
        let d = square_free_part(n).unwrap();
        prop_assert_eq!(d.square_free * d.root * d.root, n);
        prop_assert!(naive_square_free(d.square_free));
    }

    #[test]
    fn perfect_squares_are_recognized_exactly(r in 1u64..1_000_000, k in 1u64..=10) {
        prop_assert_eq!(perfect_sqrt(r * r), Some(r));
        // offsets below the next square must be rejected
        let off = k.min(2 * r - 1);
        prop_assert!(!is_perfect_square(r * r + off));
    }

    #[test]
    fn square_free_divisor_lists_are_exactly_that(n in 1u64..2000) {
        let divs = square_free_divisors(n).unwrap();
        let expected: Vec<u64> = (1..=n)
            .filter(|d| n % d == 0 && naive_square_free(*d))
            .collect();
        prop_assert_eq!(divs, expected);
    }

    #[test]
    fn edge_lists_round_trip(n in 1usize..=12, raw in prop::collection::vec((0usize..12, 0usize..12), 0..30)) {
        let edges: BTreeSet<(usize, usize)> = raw
            .into_iter()
            .filter(|&(u, v)| u != v && u < n && v < n)
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        let g = Graph::new(n, edges).unwrap();
        let parsed = Graph::parse_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(parsed, g);
    }

    #[test]
    fn compound_labels_are_bijective_and_degrees_obey_the_join(
        family in 0usize..3,
        nb in 3usize..=5,
        sizes in prop::collection::vec(1usize..=3, 5),
    ) {
        let base = match family {
            0 => Graph::path(nb).unwrap(),
            1 => Graph::cycle(nb).unwrap(),
            _ => Graph::complete(nb).unwrap(),
        };
        let sizes = &sizes[..nb];
        let satellites: Vec<Graph> =
            sizes.iter().map(|&m| Graph::complete(m).unwrap()).collect();
        let base_degrees = base.degrees();
        let spec = CoronaSpec::new(base, satellites).unwrap();
        let (g, labeling) = build_corona(&spec);

        let total_sat: usize = sizes.iter().sum();
        prop_assert_eq!(labeling.total(), nb + total_sat);
        prop_assert_eq!(g.n(), labeling.total());

        for f in 0..labeling.total() {
            let v = labeling.label(f).unwrap();
            prop_assert_eq!(labeling.flat(v), Some(f));
        }
        prop_assert!(labeling.label(labeling.total()).is_none());

        let degrees = g.degrees();
        for i in 0..nb {
            let flat = labeling.flat(CoronaVertex::Base(i)).unwrap();
            prop_assert_eq!(degrees[flat], base_degrees[i] + total_sat - sizes[i]);
        }
        for i in 0..nb {
            for w in 0..sizes[i] {
                let flat = labeling
                    .flat(CoronaVertex::Satellite { owner: i, vertex: w })
                    .unwrap();
                prop_assert_eq!(degrees[flat], (sizes[i] - 1) + (nb - 1));
            }
        }
    }

    #[test]
    fn noisy_integer_spectra_classify_as_integer(
        ints in prop::collection::vec(-50i64..=50, 1..=8),
        noise in prop::collection::vec(-5e-8f64..5e-8, 8),
    ) {
        let values: Vec<f64> = ints
            .iter()
            .zip(&noise)
            .map(|(&z, &e)| z as f64 + e)
            .collect();
        match classify_quadratic(&values, 1e-6) {
            QuadraticClass::AllInteger { values: got } => prop_assert_eq!(got, ints),
            other => prop_assert!(false, "expected integer class, got {:?}", other),
        }
    }
}
