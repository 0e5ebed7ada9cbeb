mod common;

use navflow::route_graph::{generate_path, shortest_path, NodeId, RouteError};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn node(i: usize) -> NodeId {
    NodeId(common::node_name(i))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dijkstra_matches_enumeration(seed in any::<u64>(), n in 2usize..=8, density in 0.1f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = common::random_graph(&mut rng, n, density, 30);
        for s in 0..n {
            for g in 0..n {
                if s == g {
                    continue;
                }
                let oracle = common::brute_force_shortest(&map, &node(s), &node(g));
                match (shortest_path(&map, &node(s), &node(g)), oracle) {
                    (Ok(route), Some((w, seq))) => {
                        prop_assert_eq!(route.total_weight, w);
                        prop_assert_eq!(route.nodes, seq);
                    }
                    (Err(RouteError::NoPath { .. }), None) => {}
                    (got, want) => prop_assert!(false, "{got:?} vs {want:?}"),
                }
            }
        }
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>(), n in 3usize..=9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = common::random_connected_graph(&mut rng, n, n, 50);
        let d = |a: usize, b: usize| shortest_path(&map, &node(a), &node(b)).unwrap().total_weight;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if a != b && b != c && a != c {
                        prop_assert!(d(a, c) <= d(a, b) + d(b, c));
                    }
                }
            }
        }
    }

    #[test]
    fn generated_paths_chain_and_repeat(seed in any::<u64>(), n in 2usize..=10, terminals: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = common::random_connected_graph(&mut rng, n, n / 2, 60);
        let ann = common::full_annotations(&mut rng, &map, terminals);
        let path = generate_path(&map, &ann, seed).unwrap();
        prop_assert!(path.check_chaining(&map).is_ok(), "{:?}", path.check_chaining(&map));
        let interior: Vec<_> = path.triplets.iter().filter(|t| t.key.is_interior()).map(|t| t.key.clone()).collect();
        prop_assert_eq!(interior, path.route.interior_triplets());
        prop_assert_eq!(generate_path(&map, &ann, seed).unwrap(), path);
    }
}
