//! Boolean full-text search over story-unit and feature-tuple documents.
//!
//! Two evaluation paths share one semantics: [`query_index`] walks an
//! [`InvertedIndex`], [`scan_query`] re-tokenizes every document at query time.
//! The scan path is the un-indexed baseline for [`run_benchmark`] and the
//! oracle the index is tested against.

mod bench;
mod index;
mod query;
mod scan;
mod tokenize;

use serde::{Deserialize, Serialize};

pub use bench::{generate_corpus, generate_queries, run_benchmark, BenchConfig, BenchError, BenchReport};
pub use index::{build_index, query_index, IndexError, InvertedIndex, Posting};
pub use query::{parse_query, QueryAst, QueryError};
pub use scan::scan_query;
pub use tokenize::{is_term_char, tokenize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hit {
    pub doc_id: String,
    pub score: u64,
}

/// Hits ordered by descending score, then ascending doc id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResult {
    pub hits: Vec<Hit>,
}

impl QueryResult {
    pub(crate) fn from_unsorted(mut hits: Vec<Hit>) -> Self {
        hits.sort_by(|x, y| y.score.cmp(&x.score).then_with(|| x.doc_id.cmp(&y.doc_id)));
        QueryResult { hits }
    }

    pub fn ids(&self) -> Vec<&str> {
        self.hits.iter().map(|h| h.doc_id.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }
}
