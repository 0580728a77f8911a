//! Byte layouts pinned by fixtures written from the layout description by
//! `tests/fixtures/make_golden.py`.

use ndarray::Array3;
use ppda_core::dataio::{BatchFrame, Message, RewardFrame};

const BATCH: &[u8] = include_bytes!("fixtures/golden_batch.bin");
const REWARD: &[u8] = include_bytes!("fixtures/golden_reward.bin");
const META: &str = include_str!("fixtures/golden.json");

fn golden_frame() -> BatchFrame {
    BatchFrame {
        subpolicy: 17,
        data: Array3::from_shape_fn((2, 3, 4), |(n, t, c)| (n * 100 + t * 10 + c) as f32 * 0.5 - 7.25),
        labels: vec![4, 9],
    }
}

#[test]
fn batch_encoding_matches_golden_bytes() {
    assert_eq!(golden_frame().encode(), BATCH);
}

#[test]
fn golden_batch_decodes_to_recorded_checksum() {
    let meta: serde_json::Value = serde_json::from_str(META).unwrap();
    let frame = BatchFrame::decode(BATCH).unwrap();
    let (n, t, c) = frame.shape();
    assert_eq!(serde_json::json!([n, t, c]), meta["batch"]["shape"]);
    assert_eq!(serde_json::json!(frame.labels), meta["batch"]["labels"]);
    assert_eq!(u64::from(frame.subpolicy), meta["batch"]["subpolicy"].as_u64().unwrap());
    let sum: f64 = frame.data.iter().map(|&v| f64::from(v)).sum();
    assert_eq!(sum, meta["batch"]["payload_sum"].as_f64().unwrap());
}

#[test]
fn reward_encoding_matches_golden_bytes() {
    let frame = RewardFrame {
        rewards: vec![(0, 0.5), (809, -0.25), (17, 1.0)],
    };
    assert_eq!(frame.encode(), REWARD);
    assert_eq!(Message::decode(REWARD).unwrap(), Message::Reward(frame));
}

#[test]
fn empty_batch_is_legal() {
    let frame = BatchFrame {
        subpolicy: 0,
        data: Array3::zeros((0, 100, 12)),
        labels: vec![],
    };
    let bytes = frame.encode();
    assert_eq!(bytes.len(), 24 + 4);
    // CRC-32 of zero bytes is zero
    assert_eq!(&bytes[24..], &[0u8; 4]);
    assert_eq!(BatchFrame::decode(&bytes).unwrap(), frame);
}
