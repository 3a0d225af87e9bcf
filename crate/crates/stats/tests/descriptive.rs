use coach_stats::{moving_average, pearson, sus_composite};
use proptest::prelude::*;

proptest! {
    #[test]
    fn moving_average_keeps_length_and_bounds(series in prop::collection::vec(-50.0f64..50.0, 1..60), window in 1usize..8) {
        let ma = moving_average(&series, window).unwrap();
        prop_assert_eq!(ma.len(), series.len());
        let lo = series.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = series.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for v in ma {
            prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
        }
    }

    #[test]
    fn pearson_symmetric_and_bounded(pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..40)) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        if let (Ok(a), Ok(b)) = (pearson(&x, &y), pearson(&y, &x)) {
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn sus_in_range_and_multiple_of_2_5(items in prop::collection::vec(1u8..=5, 10)) {
        let s = sus_composite(&items).unwrap();
        prop_assert!((0.0..=100.0).contains(&s));
        prop_assert!((s / 2.5).fract() == 0.0);
    }
}
