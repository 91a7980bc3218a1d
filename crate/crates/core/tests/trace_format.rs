use adhocsim::packet::{FlowId, PacketKind};
use adhocsim::sim::SimTime;
use adhocsim::trace::{emit, parse_line, parse_trace, write_trace, Layer, TraceError, TraceEvent, TraceRecord};
use proptest::prelude::*;

fn record() -> impl Strategy<Value = TraceRecord> {
    (
        prop::sample::select(vec![
            TraceEvent::Send,
            TraceEvent::Recv,
            TraceEvent::Drop,
            TraceEvent::Forward,
        ]),
        0u64..10_000_000_000,
        any::<u32>(),
        prop::sample::select(vec![Layer::Agt, Layer::Rtr, Layer::Mac]),
        any::<u64>(),
        prop::sample::select(PacketKind::ALL.to_vec()),
        any::<u32>(),
        (any::<u32>(), any::<u32>(), any::<u16>(), any::<u16>()),
    )
        .prop_map(
            |(event, us, node, layer, seqno, pkt_type, size, (s, d, sp, dp))| TraceRecord {
                event,
                time: SimTime::from_micros(us),
                node,
                layer,
                seqno,
                pkt_type,
                size,
                flow: FlowId::new(s, d, sp, dp),
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn parse_inverts_emit(r in record()) {
        let line = emit(&r);
        prop_assert_eq!(parse_line(&line).unwrap(), r);
    }

    #[test]
    fn whole_traces_round_trip(mut rs in prop::collection::vec(record(), 0..40)) {
        rs.sort_by_key(|r| r.time);
        let mut buf = Vec::new();
        write_trace(&mut buf, &rs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        prop_assert_eq!(parse_trace(&text).unwrap(), rs);
    }
}

#[test]
fn positioned_errors() {
    let good = "s 1.000000000 _3_ AGT --- 7 cbr 512 [1:0 5:0]";
    let text = format!("{good}\n{good}\nr 1.000000000 _3_ AGT --- -7 cbr 512 [1:0 5:0]\n");
    let err = parse_trace(&text).unwrap_err();
    assert_eq!(err.line(), Some(3));
    assert!(err.to_string().contains("seqno"), "{err}");

    let text = format!("{good}\ns 0.999999000 _3_ AGT --- 8 cbr 512 [1:0 5:0]\n");
    assert!(matches!(
        parse_trace(&text),
        Err(TraceError::TimeRegression { line: 2, .. })
    ));
}
