mod common;

use common::{engset_call_congestion, erlang_direct};
use fluxramp::queueing::{
    blocking_table, erlang_b, min_slots, savings_report, simulate_blocking, ArrivalModel,
    TrafficModel,
};

fn paper_traffic(slots: usize) -> TrafficModel {
    TrafficModel::per_channel(20.0, 20, 3.5e-3, slots)
}

#[test]
fn pooled_monte_carlo_agrees_with_formula() {
    let m = paper_traffic(5);
    let want = erlang_b(m.offered_load(), 5).unwrap();
    let est = simulate_blocking(&m, 1_000_000, 20240601, ArrivalModel::Pooled).unwrap();
    assert_eq!(est.pileups, 0);
    assert_eq!(est.requests, 1_000_000);
    assert!(
        (est.loss_fraction - want).abs() < 3.0 * est.std_error,
        "{} ± {} vs {want}",
        est.loss_fraction,
        est.std_error
    );
}

/// A drain of d·τ lengthens the mean holding time to (1 + d)·τ, and
/// Erlang-B depends on the holding time only through its mean.
#[test]
fn evacuation_delay_acts_as_longer_holding() {
    for (d, seed) in [(0.01, 3u64), (0.1, 7)] {
        let mut m = paper_traffic(5);
        m.evacuation_time_s = d * m.event_duration_s;
        let est = simulate_blocking(&m, 1_000_000, seed, ArrivalModel::Pooled).unwrap();
        let stretched = erlang_b(m.offered_load() * (1.0 + d), 5).unwrap();
        // Serialized draining adds a little waiting on top of the stretch.
        assert!(
            est.loss_fraction > stretched - 3.0 * est.std_error
                && est.loss_fraction < stretched * 1.05,
            "d={d}: {} ± {} vs {stretched}",
            est.loss_fraction,
            est.std_error
        );
    }
    let mut m = paper_traffic(5);
    m.evacuation_time_s = 0.01 * m.event_duration_s;
    let est = simulate_blocking(&m, 1_000_000, 3, ArrivalModel::Pooled).unwrap();
    let ideal = erlang_b(1.4, 5).unwrap();
    assert!((est.loss_fraction - ideal).abs() / ideal < 0.2);
}

#[test]
fn per_channel_arrivals_follow_finite_source_loss() {
    let m = paper_traffic(5);
    let est = simulate_blocking(&m, 1_000_000, 11, ArrivalModel::PerChannel).unwrap();
    // An idle channel offers 20 Hz × 3.5 ms.
    let want = engset_call_congestion(20, 0.07, 5);
    assert!(est.pileups > 0);
    assert_eq!(est.requests + est.pileups, est.arrivals);
    assert!(
        (est.loss_fraction - want).abs() < 3.0 * est.std_error,
        "{} ± {} vs {want}",
        est.loss_fraction,
        est.std_error
    );
    assert!(est.loss_fraction < erlang_b(1.4, 5).unwrap());
}

#[test]
fn full_population_per_channel_is_lossless() {
    let mut m = paper_traffic(20);
    m.event_rate_hz *= 20.0;
    let est = simulate_blocking(&m, 200_000, 5, ArrivalModel::PerChannel).unwrap();
    assert_eq!(est.losses, 0);
}

#[test]
fn slot_sizing_examples() {
    assert_eq!(min_slots(1.4, 0.012).unwrap(), 5);
    assert_eq!(min_slots(1.4, 0.01).unwrap(), 6);
    assert_eq!(min_slots(1e-6, 0.999999).unwrap(), 1);
    for target in [0.5, 0.1, 1e-3, 1e-6] {
        let n = min_slots(3.0, target).unwrap();
        assert!(erlang_direct(3.0, n) <= target);
        assert!(erlang_direct(3.0, n - 1) > target);
    }
}

#[test]
fn savings_for_the_reference_load() {
    let r = savings_report(&paper_traffic(0), 0.988).unwrap();
    assert!((r.offered_load - 1.4).abs() < 1e-12);
    assert_eq!((r.slots_needed, r.full_population), (5, 20));
    assert!((r.memory_saving - 0.75).abs() < 1e-12);
    assert!((r.blocking - erlang_direct(1.4, 5)).abs() < 1e-15);
}

#[test]
fn savings_at_vanishing_load() {
    let m = TrafficModel {
        event_rate_hz: 1e-6,
        event_duration_s: 1.0,
        slot_count: 0,
        evacuation_time_s: 0.0,
        active_channels: 8,
    };
    let r = savings_report(&m, 1.0 - 1e-9).unwrap();
    assert_eq!(r.slots_needed, 2);
}

#[test]
fn table_is_monotone_and_matches_direct_sums() {
    for e in [0.05, 0.7, 1.4, 4.0, 25.0] {
        let rows = blocking_table(e, 40, 40).unwrap();
        assert_eq!(rows[0].blocking, 1.0);
        for w in rows.windows(2) {
            assert!(w[1].blocking < w[0].blocking);
            assert!(w[1].memory_saving < w[0].memory_saving);
        }
        for r in &rows {
            let d = erlang_direct(e, r.slots);
            assert!(((r.blocking - d) / d).abs() < 1e-12, "E={e} N={}", r.slots);
            assert!((r.capture + r.blocking - 1.0).abs() < 1e-15);
        }
    }
    let grid = [0.1, 0.5, 1.0, 1.4, 2.0, 8.0];
    for n in 1..20 {
        for w in grid.windows(2) {
            assert!(erlang_b(w[0], n).unwrap() < erlang_b(w[1], n).unwrap());
        }
    }
}
