use super::query::QueryAst;
use super::tokenize::tokenize;
use super::{Document, Hit, QueryResult};

/// Per-document term frequencies for the terms a query mentions.
struct DocTerms<'q> {
    terms: Vec<&'q str>,
    tf: Vec<u64>,
}

impl<'q> DocTerms<'q> {
    fn count(&mut self, text: &str) {
        self.tf.iter_mut().for_each(|c| *c = 0);
        for tok in tokenize(text) {
            if let Some(i) = self.terms.iter().position(|t| *t == tok) {
                self.tf[i] += 1;
            }
        }
    }

    fn has(&self, term: &str) -> bool {
        self.terms
            .iter()
            .position(|t| *t == term)
            .is_some_and(|i| self.tf[i] > 0)
    }
}

fn all_terms<'q>(q: &'q QueryAst, out: &mut Vec<&'q str>) {
    match q {
        QueryAst::Term(t) => {
            if !out.contains(&t.as_str()) {
                out.push(t);
            }
        }
        QueryAst::And(l, r) | QueryAst::Or(l, r) => {
            all_terms(l, out);
            all_terms(r, out);
        }
        QueryAst::Not(c) => all_terms(c, out),
    }
}

fn matches(q: &QueryAst, doc: &DocTerms<'_>) -> bool {
    match q {
        QueryAst::Term(t) => doc.has(t),
        QueryAst::And(l, r) => matches(l, doc) && matches(r, doc),
        QueryAst::Or(l, r) => matches(l, doc) || matches(r, doc),
        QueryAst::Not(c) => !matches(c, doc),
    }
}

/// Linear-scan evaluation: every document is tokenized at query time.
/// Same semantics, scores and ordering as [`super::query_index`].
pub fn scan_query(docs: &[Document], q: &QueryAst) -> QueryResult {
    let positives = q.positive_terms();
    let mut terms = Vec::new();
    all_terms(q, &mut terms);
    let mut state = DocTerms {
        tf: vec![0; terms.len()],
        terms,
    };

    let mut hits = Vec::new();
    for doc in docs {
        state.count(&doc.text);
        // Only documents holding a positive term are candidates.
        if !positives.iter().any(|t| state.has(t)) || !matches(q, &state) {
            continue;
        }
        let score = state
            .terms
            .iter()
            .zip(&state.tf)
            .filter(|(t, _)| positives.contains(*t))
            .map(|(_, tf)| *tf)
            .sum();
        hits.push(Hit {
            doc_id: doc.id.clone(),
            score,
        });
    }
    QueryResult::from_unsorted(hits)
}
