mod common;

use std::collections::BTreeMap;
use std::io::Cursor;

use proptest::prelude::*;

use vprunc::io::descriptors::{encode_descriptors, HEADER_LEN};
use vprunc::io::records::parse_results;
use vprunc::io::{
    encoded_len, read_descriptors, read_poses, read_results, read_scored, write_descriptors,
    write_poses, write_results, write_scored, ScoreMeta, ScoredResult, UncertaintyRecord,
};
use vprunc::{DescriptorSet, Error, Metric, Neighbor, Pose, PoseMode, PoseTable, RetrievalResult};

fn descriptor_set() -> impl Strategy<Value = DescriptorSet> {
    (0usize..30, 1usize..17).prop_flat_map(|(n, dim)| {
        (
            prop::collection::hash_set(any::<u64>(), n),
            prop::collection::vec(-1e6f32..1e6, n * dim),
        )
            .prop_map(move |(ids, data)| DescriptorSet::new(ids.into_iter().collect(), dim, data).unwrap())
    })
}

fn result() -> impl Strategy<Value = RetrievalResult> {
    (any::<u64>(), prop::collection::btree_map(any::<u64>(), -1.0f64..=1.0, 1..15)).prop_map(|(q, m)| {
        let mut nn: Vec<Neighbor> = m.into_iter().map(|(ref_id, score)| Neighbor { ref_id, score }).collect();
        nn.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.ref_id.cmp(&b.ref_id)));
        RetrievalResult::new(q, nn).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vprd_round_trip(set in descriptor_set()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.vprd");
        write_descriptors(&set, &path).unwrap();
        let len = std::fs::metadata(&path).unwrap().len();
        prop_assert_eq!(len, encoded_len(set.len() as u64, set.dim() as u32));
        prop_assert_eq!(read_descriptors(&path).unwrap(), set);
    }

    #[test]
    fn jsonl_round_trip(results in prop::collection::vec(result(), 0..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        write_results(&path, &results).unwrap();
        prop_assert_eq!(read_results(&path).unwrap(), results);
    }

    #[test]
    fn planar_poses_round_trip(pts in prop::collection::btree_map(any::<u64>(), (-1e7f64..1e7, -1e7f64..1e7), 0..40)) {
        let mut table = PoseTable::new(PoseMode::Planar);
        for (&id, &(x, y)) in &pts {
            table.insert(id, Pose::Planar { x, y }).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_poses(&table, &path).unwrap();
        prop_assert_eq!(read_poses(&path, PoseMode::Planar).unwrap(), table);
    }

    #[test]
    fn frame_poses_round_trip(frames in prop::collection::btree_map(any::<u64>(), any::<i64>(), 0..40)) {
        let mut table = PoseTable::new(PoseMode::Frame);
        for (&id, &f) in &frames {
            table.insert(id, Pose::Frame(f)).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_poses(&table, &path).unwrap();
        prop_assert_eq!(read_poses(&path, PoseMode::Frame).unwrap(), table);
    }
}

#[test]
fn large_file_size_formula() {
    assert_eq!(encoded_len(250_000, 512), 64 + 250_000 * 8 + 250_000 * 512 * 4);
    assert_eq!(encoded_len(0, 7), HEADER_LEN as u64);
}

#[test]
fn header_layout() {
    let set = DescriptorSet::new(vec![5, 2], 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    let mut buf = Vec::new();
    encode_descriptors(&set, &mut buf).unwrap();
    assert_eq!(&buf[0..4], b"VPRD");
    assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
    assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 2);
    assert_eq!(u32::from_le_bytes(buf[16..20].try_into().unwrap()), 3);
    assert_eq!(buf[20], 1);
    assert!(buf[21..64].iter().all(|&b| b == 0));
    assert_eq!(u64::from_le_bytes(buf[64..72].try_into().unwrap()), 5);
    assert_eq!(f32::from_le_bytes(buf[80..84].try_into().unwrap()), 1.0);
    assert_eq!(buf.len() as u64, encoded_len(2, 3));
}

#[test]
fn truncated_file_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.vprd");
    let set = DescriptorSet::new(vec![0, 1], 4, vec![0.5; 8]).unwrap();
    write_descriptors(&set, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    match read_descriptors(&path) {
        Err(Error::Truncated { expected, found }) => {
            assert_eq!(expected, bytes.len() as u64);
            assert_eq!(found, bytes.len() as u64 - 3);
        }
        other => panic!("expected truncation error, got {other:?}"),
    }
}

#[test]
fn unsorted_line_is_rejected_with_its_line_number() {
    let text = "{\"q\":0,\"nn\":[[1,0.9],[2,0.8]]}\n\n{\"q\":1,\"nn\":[[1,0.5],[2,0.7]]}\n";
    let parsed: Vec<_> = parse_results(Cursor::new(text)).collect();
    assert!(parsed[0].is_ok());
    match &parsed[1] {
        Err(Error::Line { line, message }) => {
            assert_eq!(*line, 3);
            assert!(message.contains("not sorted"), "{message}");
        }
        other => panic!("expected line error, got {other:?}"),
    }
}

#[test]
fn tie_order_and_duplicates_are_validated() {
    let n = |ref_id, score| Neighbor { ref_id, score };
    assert!(RetrievalResult::new(0, vec![n(2, 0.5), n(1, 0.5)]).is_err());
    assert!(RetrievalResult::new(0, vec![n(1, 0.5), n(2, 0.5)]).is_ok());
    assert!(RetrievalResult::new(0, vec![n(1, 0.9), n(1, 0.5)]).is_err());
    assert!(RetrievalResult::new(0, vec![n(1, 1.5)]).is_err());
    assert!(RetrievalResult::new(0, vec![]).is_err());
}

#[test]
fn thousand_scored_records_round_trip() {
    use rand::Rng;
    let mut rng = common::rng(99);
    let records: Vec<ScoredResult> = (0..1000u64)
        .map(|q| {
            let mut scores: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..=1.0)).collect();
            scores.sort_by(|a, b| b.total_cmp(a));
            let nn: Vec<Neighbor> = scores
                .iter()
                .enumerate()
                .map(|(i, &score)| Neighbor { ref_id: q * 100 + i as u64, score })
                .collect();
            let result = RetrievalResult::new(q, nn).unwrap();
            let values: BTreeMap<Metric, f64> = Metric::ALL
                .into_iter()
                .map(|m| (m, rng.random_range(0.0..1.0)))
                .collect();
            ScoredResult {
                record: UncertaintyRecord { query_id: q, predicted_ref: result.top().ref_id, values },
                result,
                meta: ScoreMeta { alpha: 0.35, k: 10, shift: true },
            }
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.jsonl");
    write_scored(&path, &records).unwrap();
    assert_eq!(read_scored(&path).unwrap(), records);
    // scored files still read as plain results
    let plain = read_results(&path).unwrap();
    assert!(plain.iter().zip(&records).all(|(a, b)| *a == b.result));
}

#[test]
fn pose_csv_rejects_bad_rows() {
    use vprunc::io::poses::parse_poses;
    let dup = "id,x,y\n1,0,0\n1,2,3\n";
    assert!(matches!(parse_poses(dup.as_bytes(), PoseMode::Planar), Err(Error::Line { line: 3, .. })));
    let bad = "id,x,y\n1,zero,0\n";
    assert!(matches!(parse_poses(bad.as_bytes(), PoseMode::Planar), Err(Error::Line { line: 2, .. })));
    assert!(parse_poses("id,frame\n1,4\n".as_bytes(), PoseMode::Planar).is_err());
}
