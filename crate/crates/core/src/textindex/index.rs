use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::query::QueryAst;
use super::tokenize::tokenize;
use super::{Document, Hit, QueryResult};

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
    #[error("empty document id")]
    EmptyId,
    #[error("index json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("corrupt index: {0}")]
    Corrupt(String),
}

/// Posting in ordinal form: `doc` indexes into the sorted doc-id table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

/// Term → postings map.
///
/// Document ids are interned into a table sorted lexicographically, so
/// ordinal order and doc-id order coincide and every posting list is
/// sorted by doc id. Documents without any token are counted in
/// `doc_count` but have no entry in the table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InvertedIndex {
    doc_ids: Vec<String>,
    terms: BTreeMap<String, Vec<Posting>>,
    doc_count: u64,
    total_terms: u64,
}

/// Serialized layout. Field order and `BTreeMap` key order make the
/// output byte-stable.
#[derive(Serialize, Deserialize)]
struct IndexFile {
    doc_count: u64,
    total_terms: u64,
    terms: BTreeMap<String, Vec<(String, u32)>>,
}

pub fn build_index(docs: &[Document]) -> Result<InvertedIndex, IndexError> {
    let mut seen = HashSet::with_capacity(docs.len());
    for d in docs {
        if d.id.is_empty() {
            return Err(IndexError::EmptyId);
        }
        if !seen.insert(d.id.as_str()) {
            return Err(IndexError::DuplicateId(d.id.clone()));
        }
    }

    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.sort_by(|&x, &y| docs[x].id.cmp(&docs[y].id));

    let mut index = InvertedIndex {
        doc_count: docs.len() as u64,
        ..Default::default()
    };
    let mut counts: HashMap<String, u32> = HashMap::new();
    for i in order {
        counts.clear();
        for tok in tokenize(&docs[i].text) {
            *counts.entry(tok).or_insert(0) += 1;
        }
        if counts.is_empty() {
            continue;
        }
        let ord = index.doc_ids.len() as u32;
        index.doc_ids.push(docs[i].id.clone());
        for (term, tf) in counts.drain() {
            index.total_terms += u64::from(tf);
            index
                .terms
                .entry(term)
                .or_default()
                .push(Posting { doc: ord, tf });
        }
    }
    Ok(index)
}

impl InvertedIndex {
    pub fn doc_count(&self) -> u64 {
        self.doc_count
    }

    pub fn total_terms(&self) -> u64 {
        self.total_terms
    }

    /// Ids of documents that contributed at least one token, sorted.
    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(String::as_str)
    }

    /// `(doc id, tf)` pairs for a term, sorted by doc id.
    pub fn postings(&self, term: &str) -> Vec<(&str, u32)> {
        self.terms
            .get(term)
            .map(|ps| {
                ps.iter()
                    .map(|p| (self.doc_ids[p.doc as usize].as_str(), p.tf))
                    .collect()
            })
            .unwrap_or_default()
    }

    fn raw_postings(&self, term: &str) -> &[Posting] {
        self.terms.get(term).map_or(&[], Vec::as_slice)
    }

    pub fn to_json(&self) -> String {
        let file = IndexFile {
            doc_count: self.doc_count,
            total_terms: self.total_terms,
            terms: self
                .terms
                .iter()
                .map(|(t, ps)| {
                    let list = ps
                        .iter()
                        .map(|p| (self.doc_ids[p.doc as usize].clone(), p.tf))
                        .collect();
                    (t.clone(), list)
                })
                .collect(),
        };
        let mut s = serde_json::to_string(&file).expect("index serialization cannot fail");
        s.push('\n');
        s
    }

    /// Parses and checks an index file: postings strictly sorted by doc id,
    /// tf ≥ 1, and tf sum equal to `total_terms`.
    pub fn from_json(text: &str) -> Result<Self, IndexError> {
        let file: IndexFile = serde_json::from_str(text)?;
        let mut ids: Vec<&str> = file
            .terms
            .values()
            .flat_map(|ps| ps.iter().map(|(id, _)| id.as_str()))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() as u64 > file.doc_count {
            return Err(IndexError::Corrupt(format!(
                "{} distinct documents in postings but doc_count is {}",
                ids.len(),
                file.doc_count
            )));
        }
        let ordinal: HashMap<&str, u32> =
            ids.iter().enumerate().map(|(i, id)| (*id, i as u32)).collect();

        let mut tf_sum = 0u64;
        let mut terms = BTreeMap::new();
        for (term, list) in &file.terms {
            if term.is_empty() || tokenize(term) != [term.as_str()] {
                return Err(IndexError::Corrupt(format!("term {term:?} is not normalized")));
            }
            let mut postings = Vec::with_capacity(list.len());
            for (id, tf) in list {
                if *tf == 0 {
                    return Err(IndexError::Corrupt(format!("zero tf for {term:?} in {id:?}")));
                }
                let doc = ordinal[id.as_str()];
                if postings.last().is_some_and(|p: &Posting| p.doc >= doc) {
                    return Err(IndexError::Corrupt(format!(
                        "postings for {term:?} not strictly sorted at {id:?}"
                    )));
                }
                tf_sum += u64::from(*tf);
                postings.push(Posting { doc, tf: *tf });
            }
            if postings.is_empty() {
                return Err(IndexError::Corrupt(format!("term {term:?} has no postings")));
            }
            terms.insert(term.clone(), postings);
        }
        if tf_sum != file.total_terms {
            return Err(IndexError::Corrupt(format!(
                "tf sum {tf_sum} != total_terms {}",
                file.total_terms
            )));
        }
        Ok(InvertedIndex {
            doc_ids: ids.into_iter().map(str::to_string).collect(),
            terms,
            doc_count: file.doc_count,
            total_terms: file.total_terms,
        })
    }
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut j = 0;
    let mut out = Vec::with_capacity(a.len());
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j >= b.len() || b[j] != x {
            out.push(x);
        }
    }
    out
}

impl InvertedIndex {
    fn doc_set(&self, term: &str) -> Vec<u32> {
        self.raw_postings(term).iter().map(|p| p.doc).collect()
    }

    fn eval(&self, node: &QueryAst, universe: &[u32]) -> Vec<u32> {
        match node {
            QueryAst::Term(t) => intersect(&self.doc_set(t), universe),
            QueryAst::And(l, r) => {
                let left = self.eval(l, universe);
                if left.is_empty() {
                    return left;
                }
                intersect(&left, &self.eval(r, &left))
            }
            QueryAst::Or(l, r) => union(&self.eval(l, universe), &self.eval(r, universe)),
            QueryAst::Not(c) => difference(universe, &self.eval(c, universe)),
        }
    }
}

/// Boolean set evaluation. NOT complements within the candidate set (every
/// document holding at least one positive term); a hit's score is the sum
/// of tf over the positive terms it contains.
pub fn query_index(index: &InvertedIndex, q: &QueryAst) -> QueryResult {
    let positives = q.positive_terms();
    let mut universe = Vec::new();
    for t in &positives {
        universe = union(&universe, &index.doc_set(t));
    }
    let hits = index.eval(q, &universe);

    let mut scores = vec![0u64; hits.len()];
    for t in &positives {
        let ps = index.raw_postings(t);
        let mut j = 0;
        for (slot, &doc) in hits.iter().enumerate() {
            while j < ps.len() && ps[j].doc < doc {
                j += 1;
            }
            if j < ps.len() && ps[j].doc == doc {
                scores[slot] += u64::from(ps[j].tf);
            }
        }
    }
    QueryResult::from_unsorted(
        hits.iter()
            .zip(scores)
            .map(|(&doc, score)| Hit {
                doc_id: index.doc_ids[doc as usize].clone(),
                score,
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textindex::parse_query;

    #[test]
    fn counts_by_hand() {
        let idx = build_index(&[Document::new("d", "a a b")]).unwrap();
        assert_eq!(idx.postings("a"), [("d", 2)]);
        assert_eq!(idx.postings("b"), [("d", 1)]);
        assert_eq!(idx.total_terms(), 3);
        assert_eq!(idx.doc_count(), 1);
    }

    #[test]
    fn empty_corpus() {
        let idx = build_index(&[]).unwrap();
        assert_eq!(idx.doc_count(), 0);
        assert_eq!(idx.term_count(), 0);
        assert!(query_index(&idx, &parse_query("x").unwrap()).is_empty());
        assert_eq!(idx.to_json(), "{\"doc_count\":0,\"total_terms\":0,\"terms\":{}}\n");
    }

    #[test]
    fn rejects_bad_ids() {
        let docs = [Document::new("x", "a"), Document::new("x", "b")];
        assert!(matches!(build_index(&docs), Err(IndexError::DuplicateId(_))));
        assert!(matches!(build_index(&[Document::new("", "a")]), Err(IndexError::EmptyId)));
    }

    #[test]
    fn postings_sorted_by_id_regardless_of_input_order() {
        let docs = [Document::new("c", "t"), Document::new("a", "t t"), Document::new("b", "u")];
        let idx = build_index(&docs).unwrap();
        assert_eq!(idx.postings("t"), [("a", 2), ("c", 1)]);
        let mut rev = docs.to_vec();
        rev.reverse();
        assert_eq!(build_index(&rev).unwrap().to_json(), idx.to_json());
    }

    #[test]
    fn not_complements_within_candidates() {
        let docs = [
            Document::new("1", "a c"),
            Document::new("2", "c"),
            Document::new("3", "b"),
            Document::new("4", "x"),
        ];
        let idx = build_index(&docs).unwrap();
        let r = query_index(&idx, &parse_query("c NOT a").unwrap());
        assert_eq!(r.ids(), ["2"]);
        let r = query_index(&idx, &parse_query("b OR NOT a").unwrap());
        // only b is positive, so the candidate set is {3}.
        assert_eq!(r.ids(), ["3"]);
    }

    #[test]
    fn scores_and_order() {
        let docs = [
            Document::new("b", "ohm ohm law"),
            Document::new("a", "ohm law"),
            Document::new("c", "ohm ohm"),
        ];
        let idx = build_index(&docs).unwrap();
        let r = query_index(&idx, &parse_query("ohm law").unwrap());
        assert_eq!(r.hits, [
            Hit { doc_id: "b".into(), score: 3 },
            Hit { doc_id: "a".into(), score: 2 },
        ]);
        let r = query_index(&idx, &parse_query("ohm OR ohm").unwrap());
        assert_eq!(r.ids(), ["b", "c", "a"]);
        assert_eq!(r.hits[0].score, 2);
    }

    #[test]
    fn json_round_trip_and_corruption() {
        let docs = [Document::new("B1", "Ohm's law"), Document::new("M1", ""), Document::new("E1", "law")];
        let idx = build_index(&docs).unwrap();
        let text = idx.to_json();
        assert_eq!(
            text,
            "{\"doc_count\":3,\"total_terms\":4,\"terms\":{\"law\":[[\"B1\",1],[\"E1\",1]],\"ohm\":[[\"B1\",1]],\"s\":[[\"B1\",1]]}}\n"
        );
        let back = InvertedIndex::from_json(&text).unwrap();
        assert_eq!(back, idx);
        assert_eq!(back.to_json(), text);

        assert!(matches!(InvertedIndex::from_json(&text[..text.len() / 2]), Err(IndexError::Json(_))));
        let bad = text.replace("\"total_terms\":4", "\"total_terms\":5");
        assert!(matches!(InvertedIndex::from_json(&bad), Err(IndexError::Corrupt(_))));
        let bad = text.replace("[[\"B1\",1],[\"E1\",1]]", "[[\"E1\",1],[\"B1\",1]]");
        assert!(matches!(InvertedIndex::from_json(&bad), Err(IndexError::Corrupt(_))));
        let bad = text.replace("\"ohm\":[[\"B1\",1]]", "\"ohm\":[[\"B1\",0]]").replace(":4", ":3");
        assert!(matches!(InvertedIndex::from_json(&bad), Err(IndexError::Corrupt(_))));
        let bad = text.replace("\"doc_count\":3", "\"doc_count\":1");
        assert!(matches!(InvertedIndex::from_json(&bad), Err(IndexError::Corrupt(_))));
        let bad = text.replace("\"ohm\"", "\"Ohm\"");
        assert!(matches!(InvertedIndex::from_json(&bad), Err(IndexError::Corrupt(_))));
    }

    #[test]
    fn set_helpers() {
        assert_eq!(intersect(&[1, 3, 5], &[2, 3, 5, 7]), [3, 5]);
        assert_eq!(union(&[1, 3], &[2, 3, 9]), [1, 2, 3, 9]);
        assert_eq!(difference(&[1, 2, 3, 4], &[2, 4, 8]), [1, 3]);
        assert!(difference(&[], &[1]).is_empty());
    }
}
