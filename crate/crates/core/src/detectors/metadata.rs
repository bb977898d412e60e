//! Voice and text detectors. Real audio and caption analysis is out of
//! reach here, so these read pre-extracted metadata fields and normalize
//! them into attributes.

use std::collections::HashMap;

use crate::textindex::tokenize;

use super::{Attributes, DetectError, Detector, DetectorInput, MediaKind, Params};

fn required<'a>(input: &'a DetectorInput<'_>, rule: &str, field: &str) -> Result<&'a str, DetectError> {
    input
        .metadata
        .get(field)
        .map(String::as_str)
        .ok_or_else(|| DetectError::MissingInput {
            rule: rule.to_string(),
            what: format!("metadata field {field:?}"),
        })
}

/// Decade band such as `30-39`.
pub fn age_band(age: u32) -> String {
    let lo = age / 10 * 10;
    format!("{lo}-{}", lo + 9)
}

/// Speaker gender, region of origin and age band.
pub struct Speaker;

impl Detector for Speaker {
    fn kind(&self) -> MediaKind {
        MediaKind::Voice
    }

    fn name(&self) -> &str {
        "speaker"
    }

    fn detect(&self, input: &DetectorInput<'_>, params: &Params) -> Result<Attributes, DetectError> {
        params.allow_only("voice:speaker", &[])?;
        let mut attrs = vec![("gender".to_string(), required(input, "voice:speaker", "gender")?.to_string())];
        if let Some(region) = input.metadata.get("region") {
            attrs.push(("region".into(), region.clone()));
        }
        if let Some(age) = input.metadata.get("age") {
            let years: u32 = age.trim().parse().map_err(|_| DetectError::BadInput {
                rule: "voice:speaker".into(),
                what: format!("age {age:?} is not a whole number of years"),
            })?;
            attrs.push(("age_band".into(), age_band(years)));
        }
        Ok(attrs)
    }
}

const INSTRUMENT_FAMILIES: &[(&str, &[&str])] = &[
    (
        "percussion",
        &["drum", "tabuh", "gamelan", "kendang", "gong", "cymbal", "tambourine", "xylophone"],
    ),
    (
        "stringed",
        &["guitar", "violin", "viola", "cello", "bass", "harp", "sitar", "kecapi", "rebab"],
    ),
    (
        "wind",
        &["flute", "suling", "saxophone", "trumpet", "clarinet", "oboe", "horn", "trombone"],
    ),
    ("keyboard", &["piano", "organ", "harpsichord", "synthesizer"]),
];

pub fn instrument_family(instrument: &str) -> &'static str {
    let key = instrument.trim().to_lowercase();
    INSTRUMENT_FAMILIES
        .iter()
        .find(|(_, members)| members.contains(&key.as_str()))
        .map_or("other", |(family, _)| family)
}

/// Instrument name and its family.
pub struct Music;

impl Detector for Music {
    fn kind(&self) -> MediaKind {
        MediaKind::Voice
    }

    fn name(&self) -> &str {
        "music"
    }

    fn detect(&self, input: &DetectorInput<'_>, params: &Params) -> Result<Attributes, DetectError> {
        params.allow_only("voice:music", &[])?;
        let instrument = required(input, "voice:music", "instrument")?;
        Ok(vec![
            ("instrument".into(), instrument.to_string()),
            ("family".into(), instrument_family(instrument).to_string()),
        ])
    }
}

/// Word count and most frequent words of a caption field.
///
/// Params: `field` (default `caption`), `top` (default 5).
pub struct Caption;

impl Detector for Caption {
    fn kind(&self) -> MediaKind {
        MediaKind::Text
    }

    fn name(&self) -> &str {
        "caption"
    }

    fn detect(&self, input: &DetectorInput<'_>, params: &Params) -> Result<Attributes, DetectError> {
        const RULE: &str = "text:caption";
        params.allow_only(RULE, &["field", "top"])?;
        let field = params.get("field").unwrap_or("caption");
        let top: usize = params.parse_or(RULE, "top", 5)?;
        let words = tokenize(required(input, RULE, field)?);

        let mut freq: HashMap<&str, (usize, usize)> = HashMap::new();
        for (pos, w) in words.iter().enumerate() {
            freq.entry(w).or_insert((0, pos)).0 += 1;
        }
        let mut ranked: Vec<(&str, usize, usize)> = freq.into_iter().map(|(w, (n, p))| (w, n, p)).collect();
        ranked.sort_by(|x, y| y.1.cmp(&x.1).then(x.2.cmp(&y.2)));

        let mut attrs = vec![("words".to_string(), words.len().to_string())];
        attrs.extend(
            ranked
                .into_iter()
                .take(top)
                .enumerate()
                .map(|(i, (w, _, _))| (format!("kw_{i}"), w.to_string())),
        );
        Ok(attrs)
    }
}
