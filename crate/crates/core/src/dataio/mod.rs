//! Bundle documents, CSV traces, windowing and binary frames.

pub mod bundle;
pub mod frame;
pub mod trace_csv;
pub mod window;

pub use bundle::{bundle_from_str, bundle_to_string, load_bundle, save_bundle, LabelledBundle};
pub use frame::{read_message, write_message, BatchFrame, Message, RewardFrame};
pub use trace_csv::{read_traces, traces_from_str, traces_to_string, write_traces};
pub use window::{labelled_spans, majority_label, window_count, window_spans, window_traces};
