use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dualperiods::check::all_passed;
use dualperiods::dualpair::random_pair;
use dualperiods::exactla::ratio;
use dualperiods::periods::WeightSystem;
use dualperiods::{verify, PairInput};

#[test]
fn pair_input_round_trip() {
    let text = r#"{"k": 1, "B": [["1", "1", "1", "0"], ["0", "-1", "-2", "1"]], "alpha": ["1/2", "3/4", "1"]}"#;
    let input = PairInput::from_json(text).unwrap();
    let d = input.pair().unwrap();
    let w = input.weights(d.num_hyperplanes()).unwrap();
    assert_eq!(w.alphas()[1], ratio(3, 4));
    let again = PairInput::from_pair(&d, Some(&w));
    assert_eq!(again, input);
    assert!(PairInput::from_json(r#"{"k": 1, "B": [["1", "x"]]}"#).unwrap().pair().is_err());
    let short = PairInput { alpha: Some(vec!["1".into()]), ..input };
    assert!(short.weights(3).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn every_exact_group_passes(seed in 0u64..100_000, shape in 0usize..4) {
        let (k, n) = [(1, 1), (1, 2), (2, 1), (2, 2)][shape];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_pair(&mut rng, k, n, 3);
        let w = WeightSystem::new((0..d.num_hyperplanes()).map(|j| ratio(5 + j as i64, 4)).collect()).unwrap();
        prop_assert!(all_passed(&verify::matroid_checks(&d).unwrap()));
        prop_assert!(all_passed(&verify::minor_checks(&d).unwrap()));
        prop_assert!(all_passed(&verify::plucker_checks(&d)));
        prop_assert!(all_passed(&verify::weak_checks(&d).unwrap()));
        prop_assert!(all_passed(&verify::geometry_checks(&d).unwrap()));
        prop_assert!(all_passed(&verify::branch_checks(&d, &w).unwrap()));
    }
}
