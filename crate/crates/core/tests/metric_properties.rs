use navflow::heading::DirectionLabelSeries;
use navflow::nav_metrics::{
    accuracy, angle_error, f1_direction_change, f1_macro_turns, ConfusionMatrix,
};
use proptest::prelude::*;

fn pair() -> impl Strategy<Value = (Vec<u8>, Vec<u8>)> {
    (1usize..200).prop_flat_map(|n| {
        (
            prop::collection::vec(0u8..8, n),
            prop::collection::vec(0u8..8, n),
        )
    })
}

fn series(v: &[u8]) -> DirectionLabelSeries {
    DirectionLabelSeries::from_indices(v).unwrap()
}

proptest! {
    #[test]
    fn joint_permutation_invariance((p, g) in pair(), perm_seed in any::<u64>()) {
        let mut order: Vec<usize> = (0..p.len()).collect();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(perm_seed);
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let pp: Vec<u8> = order.iter().map(|&i| p[i]).collect();
        let gg: Vec<u8> = order.iter().map(|&i| g[i]).collect();
        let (a, b) = ((series(&p), series(&g)), (series(&pp), series(&gg)));
        prop_assert_eq!(accuracy(&a.0, &a.1).unwrap(), accuracy(&b.0, &b.1).unwrap());
        prop_assert_eq!(f1_direction_change(&a.0, &a.1).unwrap(), f1_direction_change(&b.0, &b.1).unwrap());
        prop_assert_eq!(f1_macro_turns(&a.0, &a.1).unwrap(), f1_macro_turns(&b.0, &b.1).unwrap());
        let (ea, eb) = (angle_error(&a.0, &a.1).unwrap(), angle_error(&b.0, &b.1).unwrap());
        prop_assert!((ea - eb).abs() < 1e-12);
    }

    #[test]
    fn angle_error_is_bounded_and_symmetric((p, g) in pair()) {
        let e = angle_error(&series(&p), &series(&g)).unwrap();
        prop_assert!((0.0..=180.0).contains(&e));
        prop_assert_eq!(e, angle_error(&series(&g), &series(&p)).unwrap());
    }

    #[test]
    fn binary_f1_only_sees_forward_vs_turn((p, g) in pair(), shift in 0u8..7) {
        // Any bijection of the seven non-forward classes.
        let relabel = |c: u8| if c == 0 { 0 } else { 1 + (c - 1 + shift) % 7 };
        let p2: Vec<u8> = p.iter().map(|&c| relabel(c)).collect();
        let g2: Vec<u8> = g.iter().map(|&c| relabel(c)).collect();
        prop_assert_eq!(
            f1_direction_change(&series(&p), &series(&g)).unwrap(),
            f1_direction_change(&series(&p2), &series(&g2)).unwrap()
        );
    }

    #[test]
    fn confusion_totals((p, g) in pair()) {
        let c = ConfusionMatrix::build(&series(&p), &series(&g)).unwrap();
        prop_assert_eq!(c.total(), p.len());
        let mut per_class = [0usize; 8];
        for x in &g {
            per_class[*x as usize] += 1;
        }
        prop_assert_eq!(c.row_sums(), per_class);
        prop_assert_eq!(accuracy(&series(&p), &series(&g)).unwrap(), c.trace() as f64 / c.total() as f64);
    }
}
