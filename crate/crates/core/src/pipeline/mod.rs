//! Batch pipeline over a dataset directory: shape caching, coupling,
//! evaluation and segmentation, driven by a [`PipelineConfig`].
//!
//! Dataset layout: `<root>/shapes/<name>.{off,ply,xyz}` and optional ground
//! truth under `<root>/corres/`.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod store;

pub use commands::{
    couple, couple_pair, format_eval_csv, match_eval, pair_dir, pair_id, plot_trace, precompute, segment,
    EvalRow, Outcome, SegmentTarget, MATCH_EVAL_HEADER, METHODS,
};
pub use config::{DescriptorChoice, PipelineConfig, CACHE_ENV};
pub use dataset::ground_truth;
pub use store::{cache_key, ensure_entry, entry_dir, list_shapes, load_entry, EntryStatus, ShapeEntry};
