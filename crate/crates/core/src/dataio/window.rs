use std::collections::BTreeMap;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::model::SensorTrace;
use crate::stda::SignalWindow;

fn check(size: usize, stride: usize) -> Result<()> {
    if size == 0 {
        return Err(Error::param("window", "window size must be >= 1"));
    }
    if stride == 0 {
        return Err(Error::param("stride", "stride must be >= 1"));
    }
    Ok(())
}

/// `⌊(len − size)/stride⌋ + 1` windows when `len ≥ size`, otherwise none.
pub fn window_count(len: usize, size: usize, stride: usize) -> Result<usize> {
    check(size, stride)?;
    Ok(if len < size { 0 } else { (len - size) / stride + 1 })
}

pub fn window_spans(len: usize, size: usize, stride: usize) -> Result<Vec<Range<usize>>> {
    let n = window_count(len, size, stride)?;
    Ok((0..n).map(|i| i * stride..i * stride + size).collect())
}

/// Most frequent label; ties go to the smallest label.
pub fn majority_label(labels: &[u32]) -> Option<u32> {
    let mut counts = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    // BTreeMap iterates in ascending label order, and max_by_key keeps the
    // last maximum, so iterate in reverse to keep the smallest on ties.
    counts.into_iter().rev().max_by_key(|&(_, c)| c).map(|(l, _)| l)
}

/// Window spans paired with their majority label.
pub fn labelled_spans(labels: &[u32], size: usize, stride: usize) -> Result<Vec<(Range<usize>, u32)>> {
    Ok(window_spans(labels.len(), size, stride)?
        .into_iter()
        .map(|span| {
            let label = majority_label(&labels[span.clone()]).expect("non-empty window");
            (span, label)
        })
        .collect())
}

/// Cuts synchronized traces into labelled signal windows.
pub fn window_traces(
    traces: &[SensorTrace],
    labels: &[u32],
    size: usize,
    stride: usize,
) -> Result<Vec<SignalWindow>> {
    for trace in traces {
        trace.validate()?;
        if trace.len() != labels.len() {
            return Err(Error::LengthMismatch {
                field: format!("trace `{}`", trace.sensor_id),
                expected: labels.len(),
                found: trace.len(),
            });
        }
    }
    labelled_spans(labels, size, stride)?
        .into_iter()
        .map(|(span, label)| SignalWindow::from_traces(traces, span, label))
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn counts() {
        assert_eq!(window_count(10, 4, 2).unwrap(), 4);
        assert_eq!(window_count(3, 4, 1).unwrap(), 0);
        assert_eq!(window_count(4, 4, 100).unwrap(), 1);
        assert!(window_count(10, 0, 1).is_err());
        assert!(window_count(10, 2, 0).is_err());
    }

    #[test]
    fn majority_prefers_lowest_on_ties() {
        assert_eq!(majority_label(&[3, 1, 3, 1]), Some(1));
        assert_eq!(majority_label(&[2, 2, 0]), Some(2));
        assert_eq!(majority_label(&[]), None);
    }

    proptest! {
        #[test]
        fn spans_match_formula(len in 0usize..500, size in 1usize..60, stride in 1usize..30) {
            let spans = window_spans(len, size, stride).unwrap();
            let expected = if len >= size { (len - size) / stride + 1 } else { 0 };
            prop_assert_eq!(spans.len(), expected);
            for s in &spans {
                prop_assert_eq!(s.len(), size);
                prop_assert!(s.end <= len);
            }
        }
    }
}
