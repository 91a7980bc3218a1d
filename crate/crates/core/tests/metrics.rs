mod common;

use adhocsim::analysis::{
    band_for, compute_metrics, compute_metrics_script_compat, AnalysisError, Band, Metric, MetricsReport, SweepKind,
};
use adhocsim::traffic::TrafficKind;
use common::{brute_force, matches_recount, random_trace, rng};
use proptest::prelude::*;

#[test]
fn agrees_with_brute_force_recount() {
    let mut r = rng(11);
    let mut analyzed = 0;
    for _ in 0..2_000 {
        let trace = random_trace(&mut r, 120);
        for kind in TrafficKind::ALL {
            let oracle = brute_force(&trace, kind);
            match compute_metrics(&trace, kind) {
                Ok(report) => {
                    analyzed += 1;
                    matches_recount(&report, &oracle).unwrap();
                    assert_eq!(report.pdr + report.lpr, 100.0);
                }
                Err(AnalysisError::NoTraffic(_)) => assert_eq!(oracle.n_sent, 0),
                Err(e) => assert!(oracle.n_received > oracle.n_sent, "{e}"),
            }
        }
    }
    assert!(analyzed > 3_000);
}

#[test]
fn script_compat_matches_on_clean_single_flow_trace() {
    // one flow, unique seqnos, only agent records: the quirks never bite
    use adhocsim::packet::{FlowId, PacketKind};
    use adhocsim::sim::SimTime;
    use adhocsim::trace::{Layer, TraceEvent, TraceRecord};
    let flow = FlowId::new(0, 3, 0, 0);
    let rec = |event, us, seqno| TraceRecord {
        event,
        time: SimTime::from_micros(us),
        node: 0,
        layer: Layer::Agt,
        seqno,
        pkt_type: PacketKind::Cbr,
        size: 512,
        flow,
    };
    let trace = [
        rec(TraceEvent::Send, 1_000_000, 1),
        rec(TraceEvent::Recv, 1_030_000, 1),
        rec(TraceEvent::Send, 1_250_000, 2),
        rec(TraceEvent::Send, 1_500_000, 3),
        rec(TraceEvent::Recv, 1_510_000, 3),
    ];
    let exact = compute_metrics(&trace, TrafficKind::Cbr).unwrap();
    let script = compute_metrics_script_compat(&trace, TrafficKind::Cbr).unwrap();
    assert_eq!(exact, script);
    assert_eq!(exact.avg_e2e_ms, 20.0);
}

proptest! {
    #[test]
    fn ratios_are_complementary(sent in 1u64..1_000_000, frac in 0.0f64..=1.0) {
        let received = ((sent as f64) * frac) as u64;
        let r = MetricsReport::from_counts(TrafficKind::Tcp, sent, received, 0, 0).unwrap();
        prop_assert_eq!(r.pdr + r.lpr, 100.0);
        prop_assert!((0.0..=100.0).contains(&r.pdr));
    }

    #[test]
    fn bands_are_monotone(a in -10.0f64..1000.0, b in -10.0f64..1000.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for metric in Metric::ALL {
            for sweep in [SweepKind::Pause, SweepKind::Speed] {
                prop_assert!(band_for(metric, sweep, lo) <= band_for(metric, sweep, hi));
            }
        }
    }
}

#[test]
fn band_probes() {
    let pause = SweepKind::Pause;
    assert_eq!(band_for(Metric::Pdr, pause, 98.0), Band::High);
    assert_eq!(band_for(Metric::Pdr, pause, 96.0), Band::Average);
    assert_eq!(band_for(Metric::Pdr, pause, 95.0), Band::Low);
    assert_eq!(band_for(Metric::E2e, pause, 351.0), Band::High);
    assert_eq!(band_for(Metric::E2e, pause, 150.0), Band::Low);
    assert_eq!(band_for(Metric::Lpr, pause, 2.1), Band::High);
    assert_eq!(band_for(Metric::Lpr, pause, 0.9), Band::Low);
}
