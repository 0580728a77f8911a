//! Binary batch and reward frames.
//!
//! Batch frame, all little-endian:
//!
//! | offset | size | field |
//! |---|---|---|
//! | 0 | 4 | magic `PPDA` |
//! | 4 | 2 | version (1) |
//! | 6 | 4 | N windows |
//! | 10 | 4 | T samples per window |
//! | 14 | 4 | C channels |
//! | 18 | 2 | dtype (1 = f32) |
//! | 20 | 4 | sub-policy index |
//! | 24 | 4·N·T·C | samples, window-major then time then channel |
//! | .. | 4·N | labels |
//! | .. | 4 | CRC-32 of the sample bytes |
//!
//! Reward frame: magic `REWD`, version u16, count u32, then `count` pairs of
//! (sub-policy index u32, reward f32).
//!
//! On a stream every frame is preceded by its byte length as a u32.

use std::io::{self, Read, Write};

use ndarray::Array3;

use crate::error::FrameError;
use crate::stda::SignalWindow;

pub const BATCH_MAGIC: [u8; 4] = *b"PPDA";
pub const REWARD_MAGIC: [u8; 4] = *b"REWD";
pub const FRAME_VERSION: u16 = 1;
pub const DTYPE_F32: u16 = 1;
pub const BATCH_HEADER_LEN: usize = 24;
/// Largest frame accepted from a stream.
pub const MAX_MESSAGE_LEN: u32 = 1 << 30;

#[derive(Debug, Clone, PartialEq)]
pub struct BatchFrame {
    pub subpolicy: u32,
    /// `(N, T, C)`.
    pub data: Array3<f32>,
    pub labels: Vec<u32>,
}

impl BatchFrame {
    /// Stacks equally shaped windows; samples are narrowed to f32.
    pub fn from_windows(windows: &[SignalWindow], subpolicy: u32) -> Result<Self, FrameError> {
        let (t, c) = windows.first().map_or((0, 0), |w| (w.len(), w.channels()));
        if windows.iter().any(|w| w.len() != t || w.channels() != c) {
            return Err(FrameError::RaggedWindows);
        }
        let mut data = Array3::zeros((windows.len(), t, c));
        for (n, w) in windows.iter().enumerate() {
            data.index_axis_mut(ndarray::Axis(0), n)
                .assign(&w.data.mapv(|v| v as f32));
        }
        Ok(BatchFrame {
            subpolicy,
            data,
            labels: windows.iter().map(|w| w.label).collect(),
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.data.dim()
    }

    pub fn encode(&self) -> Vec<u8> {
        let (n, t, c) = self.data.dim();
        let mut out = Vec::with_capacity(BATCH_HEADER_LEN + 4 * (n * t * c + n + 1));
        out.extend_from_slice(&BATCH_MAGIC);
        out.extend_from_slice(&FRAME_VERSION.to_le_bytes());
        for dim in [n, t, c] {
            out.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        out.extend_from_slice(&DTYPE_F32.to_le_bytes());
        out.extend_from_slice(&self.subpolicy.to_le_bytes());
        let start = out.len();
        for v in self.data.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let crc = crc32fast::hash(&out[start..]);
        for l in &self.labels {
            out.extend_from_slice(&l.to_le_bytes());
        }
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, FrameError> {
        let mut r = Cursor::new(bytes);
        r.magic(BATCH_MAGIC)?;
        r.version()?;
        let n = r.u32()? as usize;
        let t = r.u32()? as usize;
        let c = r.u32()? as usize;
        let dtype = r.u16()?;
        if dtype != DTYPE_F32 {
            return Err(FrameError::UnsupportedDtype(dtype));
        }
        let subpolicy = r.u32()?;
        let samples = n
            .checked_mul(t)
            .and_then(|v| v.checked_mul(c))
            .ok_or(FrameError::ShapeOverflow)?;
        let payload_len = samples.checked_mul(4).ok_or(FrameError::ShapeOverflow)?;
        let payload = r.take(payload_len)?;
        let labels = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
        let expected = r.u32()?;
        if r.remaining() != 0 {
            return Err(FrameError::TrailingBytes(r.remaining()));
        }
        let actual = crc32fast::hash(payload);
        if expected != actual {
            return Err(FrameError::CrcMismatch { expected, actual });
        }
        let values: Vec<f32> = payload
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().expect("4-byte chunk")))
            .collect();
        let data = Array3::from_shape_vec((n, t, c), values).map_err(|_| FrameError::ShapeOverflow)?;
        Ok(BatchFrame {
            subpolicy,
            data,
            labels,
        })
    }
}

/// Rewards the client reports for the sub-policies it trained on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RewardFrame {
    pub rewards: Vec<(u32, f32)>,
}

impl RewardFrame {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(10 + 8 * self.rewards.len());
        out.extend_from_slice(&REWARD_MAGIC);
        out.extend_from_slice(&FRAME_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.rewards.len() as u32).to_le_bytes());
        for (i, r) in &self.rewards {
            out.extend_from_slice(&i.to_le_bytes());
            out.extend_from_slice(&r.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, FrameError> {
        let mut r = Cursor::new(bytes);
        r.magic(REWARD_MAGIC)?;
        r.version()?;
        let m = r.u32()? as usize;
        let needed = m.checked_mul(8).ok_or(FrameError::ShapeOverflow)?;
        if r.remaining() < needed {
            return Err(FrameError::Truncated {
                needed: r.pos + needed,
                available: bytes.len(),
            });
        }
        let mut rewards = Vec::with_capacity(m);
        for _ in 0..m {
            let idx = r.u32()?;
            let reward = f32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
            rewards.push((idx, reward));
        }
        if r.remaining() != 0 {
            return Err(FrameError::TrailingBytes(r.remaining()));
        }
        Ok(RewardFrame { rewards })
    }
}

/// A decoded frame of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Batch(BatchFrame),
    Reward(RewardFrame),
}

impl Message {
    pub fn decode(bytes: &[u8]) -> Result<Self, FrameError> {
        match bytes.get(..4) {
            Some(m) if m == BATCH_MAGIC => BatchFrame::decode(bytes).map(Message::Batch),
            Some(m) if m == REWARD_MAGIC => RewardFrame::decode(bytes).map(Message::Reward),
            _ => {
                let mut found = [0u8; 4];
                let n = bytes.len().min(4);
                found[..n].copy_from_slice(&bytes[..n]);
                Err(FrameError::BadMagic {
                    expected: BATCH_MAGIC,
                    found,
                })
            }
        }
    }
}

/// Writes `payload` preceded by its u32 length.
pub fn write_message(w: &mut impl Write, payload: &[u8]) -> io::Result<()> {
    let len = u32::try_from(payload.len())
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "frame longer than u32::MAX"))?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(payload)
}

/// Reads one length-prefixed frame; `None` on a clean end of stream.
pub fn read_message(r: &mut impl Read) -> crate::Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut len[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => {
                return Err(FrameError::Truncated {
                    needed: 4,
                    available: got,
                }
                .into())
            }
            Ok(k) => got += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_le_bytes(len);
    if len > MAX_MESSAGE_LEN {
        return Err(FrameError::Oversized(len).into());
    }
    let mut buf = vec![0u8; len as usize];
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => {
                return Err(FrameError::Truncated {
                    needed: len as usize,
                    available: filled,
                }
                .into())
            }
            Ok(k) => filled += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Some(buf))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Cursor { bytes, pos: 0 }
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FrameError> {
        let end = self.pos.checked_add(n).ok_or(FrameError::ShapeOverflow)?;
        if end > self.bytes.len() {
            return Err(FrameError::Truncated {
                needed: end,
                available: self.bytes.len(),
            });
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u16(&mut self) -> Result<u16, FrameError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32, FrameError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn magic(&mut self, expected: [u8; 4]) -> Result<(), FrameError> {
        let n = self.remaining().min(4);
        let mut found = [0u8; 4];
        found[..n].copy_from_slice(&self.bytes[self.pos..self.pos + n]);
        if n < 4 || found != expected {
            return Err(FrameError::BadMagic { expected, found });
        }
        self.pos += 4;
        Ok(())
    }

    fn version(&mut self) -> Result<(), FrameError> {
        match self.u16()? {
            FRAME_VERSION => Ok(()),
            v => Err(FrameError::UnsupportedVersion(v)),
        }
    }
}

#[cfg(test)]
mod tests {
    use ndarray::Array2;
    use proptest::prelude::*;

    use super::*;

    fn sample_frame() -> BatchFrame {
        BatchFrame {
            subpolicy: 17,
            data: Array3::from_shape_fn((2, 3, 4), |(n, t, c)| (n * 100 + t * 10 + c) as f32 * 0.5),
            labels: vec![4, 9],
        }
    }

    #[test]
    fn header_layout() {
        let bytes = sample_frame().encode();
        assert_eq!(&bytes[..4], b"PPDA");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(u32::from_le_bytes(bytes[6..10].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[10..14].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(bytes[14..18].try_into().unwrap()), 4);
        assert_eq!(u16::from_le_bytes([bytes[18], bytes[19]]), 1);
        assert_eq!(u32::from_le_bytes(bytes[20..24].try_into().unwrap()), 17);
        assert_eq!(bytes.len(), 24 + 4 * 24 + 8 + 4);
        // payload starts with element (0, 0, 0), then (0, 0, 1)
        assert_eq!(f32::from_le_bytes(bytes[28..32].try_into().unwrap()), 0.5);
    }

    #[test]
    fn corruption_is_detected() {
        let good = sample_frame().encode();
        let mut bad = good.clone();
        bad[30] ^= 0x01;
        assert!(matches!(BatchFrame::decode(&bad), Err(FrameError::CrcMismatch { .. })));
        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(BatchFrame::decode(&bad), Err(FrameError::BadMagic { .. })));
        let mut bad = good.clone();
        bad[4] = 2;
        assert_eq!(BatchFrame::decode(&bad), Err(FrameError::UnsupportedVersion(2)));
        let mut bad = good.clone();
        bad[18] = 2;
        assert_eq!(BatchFrame::decode(&bad), Err(FrameError::UnsupportedDtype(2)));
        assert!(matches!(
            BatchFrame::decode(&good[..good.len() - 1]),
            Err(FrameError::Truncated { .. })
        ));
        let mut long = good.clone();
        long.push(0);
        assert_eq!(BatchFrame::decode(&long), Err(FrameError::TrailingBytes(1)));
        let mut huge = good[..24].to_vec();
        huge[6..10].copy_from_slice(&u32::MAX.to_le_bytes());
        huge[10..14].copy_from_slice(&u32::MAX.to_le_bytes());
        huge[14..18].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(BatchFrame::decode(&huge).is_err());
    }

    #[test]
    fn from_windows_checks_shapes() {
        let a = SignalWindow::new(Array2::zeros((5, 6)), 50.0, 1).unwrap();
        let b = SignalWindow::new(Array2::zeros((4, 6)), 50.0, 2).unwrap();
        assert!(BatchFrame::from_windows(&[a.clone(), b], 0).is_err());
        let f = BatchFrame::from_windows(&[a.clone(), a], 3).unwrap();
        assert_eq!(f.shape(), (2, 5, 6));
        assert_eq!(f.labels, vec![1, 1]);
    }

    #[test]
    fn stream_framing() {
        let mut buf = Vec::new();
        let batch = sample_frame().encode();
        let reward = RewardFrame { rewards: vec![(3, 0.25), (810, -1.5)] }.encode();
        write_message(&mut buf, &batch).unwrap();
        write_message(&mut buf, &reward).unwrap();
        let mut r = &buf[..];
        let m1 = Message::decode(&read_message(&mut r).unwrap().unwrap()).unwrap();
        let m2 = Message::decode(&read_message(&mut r).unwrap().unwrap()).unwrap();
        assert_eq!(m1, Message::Batch(sample_frame()));
        assert_eq!(m2, Message::Reward(RewardFrame { rewards: vec![(3, 0.25), (810, -1.5)] }));
        assert!(read_message(&mut r).unwrap().is_none());
        let mut cut = &buf[..buf.len() - 2];
        read_message(&mut cut).unwrap();
        assert!(read_message(&mut cut).is_err());
    }

    proptest! {
        #[test]
        fn batch_round_trip(
            n in 0usize..4, t in 0usize..6, c in 0usize..7,
            seed in any::<u32>(), subpolicy in any::<u32>(),
        ) {
            let data = Array3::from_shape_fn((n, t, c), |(a, b, d)| {
                f32::from_bits(seed.wrapping_mul(2654435761).wrapping_add((a * 1000 + b * 10 + d) as u32) & 0x7f7f_ffff)
            });
            let labels = (0..n as u32).map(|i| i ^ seed).collect();
            let frame = BatchFrame { subpolicy, data, labels };
            prop_assert_eq!(BatchFrame::decode(&frame.encode()).unwrap(), frame);
        }

        #[test]
        fn reward_round_trip(pairs in prop::collection::vec((any::<u32>(), -1e6f32..1e6), 0..20)) {
            let frame = RewardFrame { rewards: pairs };
            prop_assert_eq!(RewardFrame::decode(&frame.encode()).unwrap(), frame);
        }
    }
}
