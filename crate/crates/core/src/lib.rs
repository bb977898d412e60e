//! Movement-oriented video indexing.
//!
//! Video is described as a storyboard of Begin/Middle/End story units plus a
//! cut list of fragments; feature detectors turn fragment frames into
//! attribute tuples. Everything ends up as text in one inverted index that
//! answers boolean queries.
//!
//! - [`storyboard`]: story-unit trees, `B1,M2,E3` addressing, flattening.
//! - [`textindex`]: tokenizer, boolean queries, inverted index, scan baseline, benchmark.
//! - [`partition`]: AST near-square frame tiling.
//! - [`detectors`]: detector grammars, parse trees, feature tuples.
//! - [`catalog`]: metadata files and the ingest pipeline.

pub mod catalog;
pub mod detectors;
pub mod partition;
pub mod storyboard;
pub mod textindex;

pub use catalog::{ingest_pipeline, load_catalog, load_index, save_index, Catalog, CatalogError};
pub use partition::{ast_partition, layout_stats, verify_layout, PartitionLayout, Tile, TileClass};
pub use storyboard::{flatten_storyboard, parse_address, StoryAddress, Storyboard};
pub use textindex::{build_index, parse_query, query_index, scan_query, Document, InvertedIndex, QueryResult};
