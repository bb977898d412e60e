/// Characters that belong to a term: alphanumerics plus `_`, which joins
/// the parts of a feature-tuple term such as `histogram_dominant_bin_0`.
pub fn is_term_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Lowercases and splits on every non-term character. No stemming, no stopwords.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !is_term_char(c))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}
