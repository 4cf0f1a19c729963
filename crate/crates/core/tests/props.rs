//! Property tests for the arithmetic primitives.

use lastmile_core::{los_of, scale_demand, summarize, travel_time, Speed, VehicleMode};
use proptest::prelude::*;

proptest! {
    /// ceil quantization: the vehicle can always cover the distance within
    /// the returned whole seconds, and one second less would not suffice.
    #[test]
    fn travel_time_is_the_exact_ceiling(
        distance in 0.0f64..50_000.0,
        mode in prop_oneof![Just(VehicleMode::Robot), Just(VehicleMode::Drone)],
    ) {
        let speed = mode.speed();
        let t = travel_time(distance, speed);
        let exact = distance * speed.seconds as f64 / speed.meters as f64;
        prop_assert!(t as f64 >= exact);
        if t > 0 {
            prop_assert!(((t - 1) as f64) < exact);
        }
    }

    #[test]
    fn scale_demand_rounds_half_up(base in 0u32..10_000, pct in 0u32..500) {
        let exact = f64::from(base) * (1.0 + f64::from(pct) / 100.0);
        let got = f64::from(scale_demand(base, pct));
        // round-half-up lands within half a unit of the exact product
        prop_assert!((got - exact).abs() <= 0.5 + 1e-9);
        prop_assert!(got >= exact - 0.5 - 1e-9);
    }

    #[test]
    fn los_total_and_monotone(a in 0u64..20_000, b in 0u64..20_000) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(los_of(lo) <= los_of(hi));
    }

    #[test]
    fn summary_statistics_are_ordered(waits in prop::collection::vec(0u64..20_000, 1..200)) {
        let s = summarize(&waits).unwrap();
        prop_assert!(s.min_min <= s.q1_min);
        prop_assert!(s.q1_min <= s.median_min);
        prop_assert!(s.median_min <= s.q3_min);
        prop_assert!(s.q3_min <= s.max_min);
        prop_assert_eq!(s.los_histogram.total(), waits.len());
    }

    #[test]
    fn custom_speed_zero_distance_is_free(meters in 1u64..1000, seconds in 1u64..1000) {
        prop_assert_eq!(travel_time(0.0, Speed { meters, seconds }), 0);
    }
}
