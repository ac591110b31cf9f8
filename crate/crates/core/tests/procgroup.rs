use hybrid_amr::forest::{uniform_bounds, CoarseMesh};
use hybrid_amr::procgroup::{run, PayloadReader, PayloadWriter, RESERVED_TAG};
use hybrid_amr::{AmrError, GroupError};
use proptest::prelude::*;

#[test]
fn empty_program_leaves_an_empty_log() {
    let (res, log) = run(1, |_| Ok(())).unwrap();
    assert_eq!(res.len(), 1);
    assert!(log.log.is_empty());
    assert_eq!(log.dump(), "");
}

#[test]
fn group_size_and_peers_are_checked() {
    assert_eq!(run(0, |_| Ok(())).unwrap_err(), GroupError::EmptyGroup);
    let err = run(2, |c| c.send(5, 1, vec![])).unwrap_err();
    assert!(matches!(err, GroupError::RankFailed { .. }), "{err}");
    let err = run(1, |c| c.send(0, RESERVED_TAG, vec![])).unwrap_err();
    assert!(matches!(err, GroupError::RankFailed { .. }), "{err}");
}

#[test]
fn failing_and_panicking_ranks_are_reported() {
    let err = run(3, |c| if c.rank() == 1 { Err(AmrError::Domain("boom".into())) } else { Ok(()) }).unwrap_err();
    assert!(matches!(err, GroupError::RankFailed { rank: 1, .. }), "{err}");
    let err = run(2, |c| if c.rank() == 0 { panic!("rank 0 gives up") } else { Ok(()) }).unwrap_err();
    assert_eq!(err, GroupError::Panicked { rank: 0 });
}

#[test]
fn uniform_bounds_runs_are_byte_identical() {
    let cmesh = CoarseMesh::builtin("hybrid").unwrap();
    let once = || run(7, |c| uniform_bounds(&cmesh, 2, c)).unwrap();
    let (a, la) = once();
    let (b, lb) = once();
    assert_eq!(a, b);
    assert_eq!(la, lb);
    assert_eq!(la.dump(), lb.dump());
    assert!(la.total_bytes() > 0);
}

#[test]
fn collectives_agree_with_serial_results() {
    let (res, _) = run(5, |c| {
        let r = c.rank() as u64;
        let all = c.allgather_u64(r * r)?;
        let sum = c.allreduce_sum(r + 1)?;
        c.barrier()?;
        let bytes = c.allgather(vec![r as u8; c.rank()])?;
        Ok((all, sum, bytes.iter().map(Vec::len).collect::<Vec<_>>()))
    })
    .unwrap();
    for (all, sum, lens) in res {
        assert_eq!(all, vec![0, 1, 4, 9, 16]);
        assert_eq!(sum, 15);
        assert_eq!(lens, vec![0, 1, 2, 3, 4]);
    }
}

#[test]
fn receive_from_a_range_of_senders() {
    let (res, _) = run(4, |c| {
        if c.rank() == 0 {
            let msgs = c.recv_range(1, 3, 9)?;
            Ok(msgs.into_iter().map(|(src, b)| (src, b[0])).collect())
        } else {
            c.send(0, 9, vec![c.rank() as u8 * 10])?;
            Ok(vec![])
        }
    })
    .unwrap();
    assert_eq!(res[0], vec![(1, 10), (2, 20), (3, 30)]);
}

#[test]
fn payload_round_trip_and_truncation() {
    let mut w = PayloadWriter::new();
    w.u8(7).i8(-3).i32(-123_456).u64(u64::MAX).u128(1 << 100);
    let buf = w.finish();
    let mut r = PayloadReader::new(&buf);
    assert_eq!((r.u8().unwrap(), r.i8().unwrap(), r.i32().unwrap()), (7, -3, -123_456));
    assert_eq!((r.u64().unwrap(), r.u128().unwrap()), (u64::MAX, 1 << 100));
    assert!(r.is_empty());
    assert!(r.u8().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exclusive_scan_matches_the_serial_prefix_sum(locals in prop::collection::vec(0u64..1_000_000, 1..12)) {
        let (res, _) = run(locals.len(), |c| c.exclusive_prefix_scan(locals[c.rank()])).unwrap();
        let mut acc = 0;
        for (q, &v) in locals.iter().enumerate() {
            prop_assert_eq!(res[q], acc);
            acc += v;
        }
        prop_assert!(res.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(res[locals.len() - 1] + locals[locals.len() - 1], locals.iter().sum::<u64>());
    }
}
