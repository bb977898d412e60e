//! Grammar-driven feature detection.
//!
//! A [`DetectorGrammar`] lists which detectors run for each media kind.
//! Running it over one media object yields a [`ParseTree`] with one node per
//! executed rule; flattening the tree gives unique
//! `(object, path, attribute, value)` [`FeatureTuple`]s, which are rewritten
//! into index terms such as `histogram_dominant_bin_0`.

mod frame;
mod image;
mod metadata;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::partition::{ast_partition, PartitionError};
use crate::textindex::Document;

pub use frame::{FrameError, SyntheticFrame};
pub use image::{color_histogram, dominant_bin, edge_density};
pub use metadata::{age_band, instrument_family, Caption, Music, Speaker};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("no {kind} detector named {name:?} is registered")]
    Unregistered { kind: MediaKind, name: String },
    #[error("grammar lists {kind}:{name} more than once")]
    DuplicateRule { kind: MediaKind, name: String },
    #[error("rule {rule} is missing its input: {what}")]
    MissingInput { rule: String, what: String },
    #[error("rule {rule}: bad input: {what}")]
    BadInput { rule: String, what: String },
    #[error("rule {rule}: parameter {param:?}: {reason}")]
    BadParam {
        rule: String,
        param: String,
        reason: String,
    },
    #[error("edge detection needs at least a 2x2 frame (got {width}x{height})")]
    DegenerateFrame { width: u32, height: u32 },
    #[error("duplicate tuple ({object_id}, {path}, {attribute})")]
    DuplicateTuple {
        object_id: String,
        path: String,
        attribute: String,
    },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("grammar json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaKind {
    Voice,
    Image,
    Text,
}

impl MediaKind {
    pub const ALL: [MediaKind; 3] = [MediaKind::Voice, MediaKind::Image, MediaKind::Text];

    pub fn as_str(self) -> &'static str {
        match self {
            MediaKind::Voice => "voice",
            MediaKind::Image => "image",
            MediaKind::Text => "text",
        }
    }
}

impl fmt::Display for MediaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MediaKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MediaKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown media kind {s:?}"))
    }
}

/// Ordered `(name, value)` attributes emitted by one detector.
pub type Attributes = Vec<(String, String)>;

/// Detector parameters. Stored as strings; in JSON, numbers and booleans
/// are accepted and converted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        Params(pairs.into_iter().collect())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn parse_or<T: std::str::FromStr>(&self, rule: &str, key: &str, default: T) -> Result<T, DetectError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.trim().parse().map_err(|_| DetectError::BadParam {
                rule: rule.to_string(),
                param: key.to_string(),
                reason: format!("cannot parse {v:?}"),
            }),
        }
    }

    pub fn allow_only(&self, rule: &str, known: &[&str]) -> Result<(), DetectError> {
        match self.0.keys().find(|k| !known.contains(&k.as_str())) {
            None => Ok(()),
            Some(k) => Err(DetectError::BadParam {
                rule: rule.to_string(),
                param: k.clone(),
                reason: "unknown parameter".into(),
            }),
        }
    }
}

impl<'de> Deserialize<'de> for Params {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde_json::Value;
        let raw = BTreeMap::<String, Value>::deserialize(deserializer)?;
        raw.into_iter()
            .map(|(k, v)| {
                let s = match v {
                    Value::String(s) => s,
                    Value::Number(n) => n.to_string(),
                    Value::Bool(b) => b.to_string(),
                    other => {
                        return Err(serde::de::Error::custom(format!(
                            "parameter {k:?} must be a string, number or boolean, got {other}"
                        )))
                    }
                };
                Ok((k, s))
            })
            .collect::<Result<_, _>>()
            .map(Params)
    }
}

pub struct DetectorInput<'a> {
    pub frame: Option<&'a SyntheticFrame>,
    pub metadata: &'a BTreeMap<String, String>,
}

/// A deterministic feature detector for one media kind.
pub trait Detector: Send + Sync {
    fn kind(&self) -> MediaKind;
    fn name(&self) -> &str;
    fn detect(&self, input: &DetectorInput<'_>, params: &Params) -> Result<Attributes, DetectError>;
}

fn require_frame<'a>(input: &DetectorInput<'a>, rule: &str) -> Result<&'a SyntheticFrame, DetectError> {
    input.frame.ok_or_else(|| DetectError::MissingInput {
        rule: rule.to_string(),
        what: "a frame".into(),
    })
}

/// `histogram` (param `bins`, default 16): `dominant_bin` then `bin_<i>` for
/// every non-empty bin.
pub struct Histogram;

impl Detector for Histogram {
    fn kind(&self) -> MediaKind {
        MediaKind::Image
    }

    fn name(&self) -> &str {
        "histogram"
    }

    fn detect(&self, input: &DetectorInput<'_>, params: &Params) -> Result<Attributes, DetectError> {
        const RULE: &str = "image:histogram";
        params.allow_only(RULE, &["bins"])?;
        let bins = params.parse_or(RULE, "bins", 16usize)?;
        let counts = color_histogram(require_frame(input, RULE)?, bins)?;
        let mut attrs = vec![("dominant_bin".to_string(), dominant_bin(&counts).to_string())];
        attrs.extend(
            counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, c)| (format!("bin_{i}"), c.to_string())),
        );
        Ok(attrs)
    }
}

/// `edges` (param `threshold`, default 32): `edge_density` to 4 decimals.
pub struct Edges;

impl Detector for Edges {
    fn kind(&self) -> MediaKind {
        MediaKind::Image
    }

    fn name(&self) -> &str {
        "edges"
    }

    fn detect(&self, input: &DetectorInput<'_>, params: &Params) -> Result<Attributes, DetectError> {
        const RULE: &str = "image:edges";
        params.allow_only(RULE, &["threshold"])?;
        let threshold: u8 = params.parse_or(RULE, "threshold", 32)?;
        let density = edge_density(require_frame(input, RULE)?, threshold)?;
        Ok(vec![("edge_density".into(), format!("{density:.4}"))])
    }
}

/// Detectors available to grammars, keyed by `(kind, name)`.
pub struct DetectorRegistry {
    detectors: BTreeMap<(MediaKind, String), Box<dyn Detector>>,
}

impl DetectorRegistry {
    pub fn empty() -> Self {
        DetectorRegistry {
            detectors: BTreeMap::new(),
        }
    }

    /// `image:histogram`, `image:edges`, `voice:speaker`, `voice:music`, `text:caption`.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Histogram));
        r.register(Box::new(Edges));
        r.register(Box::new(Speaker));
        r.register(Box::new(Music));
        r.register(Box::new(Caption));
        r
    }

    pub fn builtin() -> &'static DetectorRegistry {
        static BUILTIN: OnceLock<DetectorRegistry> = OnceLock::new();
        BUILTIN.get_or_init(Self::with_builtins)
    }

    /// Adds or replaces a detector.
    pub fn register(&mut self, detector: Box<dyn Detector>) {
        self.detectors
            .insert((detector.kind(), detector.name().to_string()), detector);
    }

    pub fn get(&self, kind: MediaKind, name: &str) -> Option<&dyn Detector> {
        self.detectors.get(&(kind, name.to_string())).map(Box::as_ref)
    }

    pub fn names(&self) -> impl Iterator<Item = (MediaKind, &str)> {
        self.detectors.keys().map(|(k, n)| (*k, n.as_str()))
    }

    /// Fails on the first rule that names an unknown detector.
    pub fn check(&self, grammar: &DetectorGrammar) -> Result<(), DetectError> {
        for rule in grammar.rules() {
            if self.get(rule.kind, &rule.detector).is_none() {
                return Err(DetectError::Unregistered {
                    kind: rule.kind,
                    name: rule.detector.clone(),
                });
            }
        }
        Ok(())
    }

    fn run_rule(&self, rule: &GrammarRule, input: &DetectorInput<'_>) -> Result<ParseNode, DetectError> {
        let detector = self
            .get(rule.kind, &rule.detector)
            .ok_or_else(|| DetectError::Unregistered {
                kind: rule.kind,
                name: rule.detector.clone(),
            })?;
        Ok(ParseNode {
            name: rule.detector.clone(),
            attributes: detector.detect(input, &rule.params)?,
            children: Vec::new(),
        })
    }

    /// Runs every rule for `kind`, in grammar order.
    pub fn run_grammar(
        &self,
        grammar: &DetectorGrammar,
        object_id: &str,
        kind: MediaKind,
        frame: Option<&SyntheticFrame>,
        metadata: &BTreeMap<String, String>,
    ) -> Result<ParseTree, DetectError> {
        let input = DetectorInput { frame, metadata };
        let nodes = grammar
            .rules_for(kind)
            .map(|rule| self.run_rule(rule, &input))
            .collect::<Result<_, _>>()?;
        Ok(ParseTree {
            object_id: object_id.to_string(),
            nodes,
        })
    }

    /// Runs the whole grammar over one object.
    ///
    /// Voice and text rules read `metadata`. Image rules run on `frame` when
    /// given; rules that need a frame fail without one. With `tiles = Some(n)`
    /// the frame is split by AST into `n` tiles, image rules run per tile in
    /// parallel, and each tile becomes a `tile_<row>_<col>` node holding that
    /// tile's detector nodes. Nodes follow grammar order; tile nodes take the
    /// place of the first image rule and are ordered by (col, row).
    pub fn detect_object(
        &self,
        grammar: &DetectorGrammar,
        object_id: &str,
        frame: Option<&SyntheticFrame>,
        metadata: &BTreeMap<String, String>,
        tiles: Option<u32>,
    ) -> Result<ParseTree, DetectError> {
        let input = DetectorInput { frame, metadata };
        let mut nodes = Vec::new();
        let mut tiled_done = false;
        for rule in grammar.rules() {
            if rule.kind != MediaKind::Image || tiles.is_none() {
                nodes.push(self.run_rule(rule, &input)?);
                continue;
            }
            if tiled_done {
                continue;
            }
            tiled_done = true;
            let frame = require_frame(&input, &format!("image:{}", rule.detector))?;
            let layout = ast_partition(tiles.unwrap_or(1), frame.width(), frame.height())?;
            let tile_nodes: Vec<ParseNode> = layout
                .tiles
                .par_iter()
                .map(|tile| {
                    let crop = frame.crop(tile)?;
                    let tile_input = DetectorInput {
                        frame: Some(&crop),
                        metadata,
                    };
                    let children = grammar
                        .rules_for(MediaKind::Image)
                        .map(|r| self.run_rule(r, &tile_input))
                        .collect::<Result<_, _>>()?;
                    Ok(ParseNode {
                        name: format!("tile_{}_{}", tile.row_index, tile.col_index),
                        attributes: Vec::new(),
                        children,
                    })
                })
                .collect::<Result<_, DetectError>>()?;
            nodes.extend(tile_nodes);
        }
        Ok(ParseTree {
            object_id: object_id.to_string(),
            nodes,
        })
    }
}

/// [`DetectorRegistry::run_grammar`] on the built-in registry.
pub fn run_grammar(
    grammar: &DetectorGrammar,
    object_id: &str,
    kind: MediaKind,
    frame: Option<&SyntheticFrame>,
    metadata: &BTreeMap<String, String>,
) -> Result<ParseTree, DetectError> {
    DetectorRegistry::builtin().run_grammar(grammar, object_id, kind, frame, metadata)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrammarRule {
    pub kind: MediaKind,
    pub detector: String,
    #[serde(default)]
    pub params: Params,
}

impl GrammarRule {
    pub fn new(kind: MediaKind, detector: &str, params: &[(&str, &str)]) -> Self {
        GrammarRule {
            kind,
            detector: detector.to_string(),
            params: Params::from_pairs(params.iter().map(|(k, v)| (k.to_string(), v.to_string()))),
        }
    }
}

/// Ordered detector rules; each `(kind, detector)` pair appears once.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<GrammarRule>", into = "Vec<GrammarRule>")]
pub struct DetectorGrammar {
    rules: Vec<GrammarRule>,
}

impl TryFrom<Vec<GrammarRule>> for DetectorGrammar {
    type Error = DetectError;

    fn try_from(rules: Vec<GrammarRule>) -> Result<Self, Self::Error> {
        DetectorGrammar::new(rules)
    }
}

impl From<DetectorGrammar> for Vec<GrammarRule> {
    fn from(g: DetectorGrammar) -> Self {
        g.rules
    }
}

impl DetectorGrammar {
    pub fn new(rules: Vec<GrammarRule>) -> Result<Self, DetectError> {
        let mut seen = HashSet::new();
        for r in &rules {
            if !seen.insert((r.kind, r.detector.as_str())) {
                return Err(DetectError::DuplicateRule {
                    kind: r.kind,
                    name: r.detector.clone(),
                });
            }
        }
        Ok(DetectorGrammar { rules })
    }

    pub fn rules(&self) -> &[GrammarRule] {
        &self.rules
    }

    pub fn rules_for(&self, kind: MediaKind) -> impl Iterator<Item = &GrammarRule> {
        self.rules.iter().filter(move |r| r.kind == kind)
    }

    pub fn from_json(text: &str) -> Result<Self, DetectError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grammar serialization cannot fail")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseNode {
    pub name: String,
    pub attributes: Attributes,
    pub children: Vec<ParseNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseTree {
    pub object_id: String,
    pub nodes: Vec<ParseNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureTuple {
    pub object_id: String,
    /// Slash-joined node names from the root, e.g. `tile_0_1/histogram`.
    pub path: String,
    pub attribute: String,
    pub value: String,
}

impl FeatureTuple {
    /// `path_attribute_value` with every non-alphanumeric character turned
    /// into `_`, which keeps it a single index term.
    pub fn term(&self) -> String {
        format!("{}_{}_{}", self.path, self.attribute, self.value)
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { '_' })
            .collect()
    }
}

/// Depth-first extraction of every attribute in the tree.
pub fn tuples_from_tree(tree: &ParseTree) -> Result<Vec<FeatureTuple>, DetectError> {
    fn walk(
        object_id: &str,
        prefix: &str,
        node: &ParseNode,
        seen: &mut HashSet<(String, String)>,
        out: &mut Vec<FeatureTuple>,
    ) -> Result<(), DetectError> {
        let path = if prefix.is_empty() {
            node.name.clone()
        } else {
            format!("{prefix}/{}", node.name)
        };
        for (attribute, value) in &node.attributes {
            if !seen.insert((path.clone(), attribute.clone())) {
                return Err(DetectError::DuplicateTuple {
                    object_id: object_id.to_string(),
                    path,
                    attribute: attribute.clone(),
                });
            }
            out.push(FeatureTuple {
                object_id: object_id.to_string(),
                path: path.clone(),
                attribute: attribute.clone(),
                value: value.clone(),
            });
        }
        for child in &node.children {
            walk(object_id, &path, child, seen, out)?;
        }
        Ok(())
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for node in &tree.nodes {
        walk(&tree.object_id, "", node, &mut seen, &mut out)?;
    }
    Ok(out)
}

/// One document per object id (in id order) whose text is the
/// space-joined [`FeatureTuple::term`]s of that object, in tuple order.
pub fn tuples_to_terms(tuples: &[FeatureTuple]) -> Vec<Document> {
    let mut groups: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for t in tuples {
        groups.entry(&t.object_id).or_default().push(t.term());
    }
    groups
        .into_iter()
        .map(|(id, terms)| Document::new(id, terms.join(" ")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    fn image_grammar() -> DetectorGrammar {
        DetectorGrammar::new(vec![
            GrammarRule::new(MediaKind::Image, "histogram", &[("bins", "4")]),
            GrammarRule::new(MediaKind::Image, "edges", &[("threshold", "32")]),
        ])
        .unwrap()
    }

    #[test]
    fn image_rules_on_uniform_frame() {
        let f = SyntheticFrame::uniform(8, 8, 0).unwrap();
        let tree = run_grammar(&image_grammar(), "clip7/f3", MediaKind::Image, Some(&f), &meta(&[])).unwrap();
        assert_eq!(tree.nodes.len(), 2);
        assert_eq!(tree.nodes[0].name, "histogram");
        assert_eq!(tree.nodes[0].attributes, [
            ("dominant_bin".to_string(), "0".to_string()),
            ("bin_0".to_string(), "64".to_string()),
        ]);
        assert_eq!(tree.nodes[1].attributes, [("edge_density".to_string(), "0.0000".to_string())]);
    }

    #[test]
    fn no_rules_for_kind() {
        let tree = run_grammar(&image_grammar(), "x", MediaKind::Voice, None, &meta(&[])).unwrap();
        assert!(tree.nodes.is_empty());
    }

    #[test]
    fn speaker_rule() {
        let g = DetectorGrammar::new(vec![GrammarRule::new(MediaKind::Voice, "speaker", &[])]).unwrap();
        let tree = run_grammar(&g, "v", MediaKind::Voice, None, &meta(&[("gender", "female"), ("age", "34")])).unwrap();
        let tuples = tuples_from_tree(&tree).unwrap();
        assert_eq!(tuples.len(), 2);
        assert!(tuples.iter().all(|t| t.path == "speaker"));
        assert_eq!(tuples[1].value, "30-39");
        let docs = tuples_to_terms(&tuples);
        assert!(docs[0].text.split(' ').any(|t| t == "speaker_gender_female"));
        assert!(docs[0].text.contains("speaker_age_band_30_39"));
    }

    #[test]
    fn errors_name_rule() {
        let g = DetectorGrammar::new(vec![GrammarRule::new(MediaKind::Image, "sift", &[])]).unwrap();
        let e = run_grammar(&g, "x", MediaKind::Image, None, &meta(&[])).unwrap_err();
        assert!(matches!(e, DetectError::Unregistered { .. }));
        assert!(DetectorRegistry::builtin().check(&g).is_err());

        let e = run_grammar(&image_grammar(), "x", MediaKind::Image, None, &meta(&[])).unwrap_err();
        assert!(e.to_string().contains("image:histogram"), "{e}");

        let dup = vec![
            GrammarRule::new(MediaKind::Image, "edges", &[]),
            GrammarRule::new(MediaKind::Image, "edges", &[("threshold", "3")]),
        ];
        assert!(matches!(DetectorGrammar::new(dup), Err(DetectError::DuplicateRule { .. })));
        // Same name under different kinds is allowed.
        let ok = vec![
            GrammarRule::new(MediaKind::Image, "edges", &[]),
            GrammarRule::new(MediaKind::Text, "edges", &[]),
        ];
        assert!(DetectorGrammar::new(ok).is_ok());
    }

    #[test]
    fn tuples_examples() {
        let tree = ParseTree {
            object_id: "clip7/f3".into(),
            nodes: vec![ParseNode {
                name: "histogram".into(),
                attributes: vec![("dominant_bin".into(), "0".into())],
                children: vec![],
            }],
        };
        let tuples = tuples_from_tree(&tree).unwrap();
        assert_eq!(tuples, [FeatureTuple {
            object_id: "clip7/f3".into(),
            path: "histogram".into(),
            attribute: "dominant_bin".into(),
            value: "0".into(),
        }]);
        assert_eq!(tuples_to_terms(&tuples), [Document::new("clip7/f3", "histogram_dominant_bin_0")]);

        let empty = ParseTree { object_id: "e".into(), nodes: vec![] };
        assert!(tuples_from_tree(&empty).unwrap().is_empty());
        assert!(tuples_to_terms(&[]).is_empty());
    }

    #[test]
    fn duplicate_tuples_rejected() {
        let node = ParseNode {
            name: "h".into(),
            attributes: vec![("a".into(), "1".into())],
            children: vec![],
        };
        let tree = ParseTree { object_id: "o".into(), nodes: vec![node.clone(), node] };
        assert!(matches!(tuples_from_tree(&tree), Err(DetectError::DuplicateTuple { .. })));
    }

    #[test]
    fn tiled_detection_nests_tiles() {
        let f = SyntheticFrame::uniform(100, 100, 3).unwrap();
        let g = DetectorGrammar::new(vec![
            GrammarRule::new(MediaKind::Voice, "speaker", &[]),
            GrammarRule::new(MediaKind::Image, "histogram", &[("bins", "4")]),
            GrammarRule::new(MediaKind::Image, "edges", &[]),
        ])
        .unwrap();
        let m = meta(&[("gender", "male")]);
        let tree = DetectorRegistry::builtin().detect_object(&g, "o", Some(&f), &m, Some(5)).unwrap();
        let names: Vec<_> = tree.nodes.iter().map(|n| n.name.as_str()).collect();
        assert_eq!(names, ["speaker", "tile_0_0", "tile_1_0", "tile_0_1", "tile_1_1", "tile_0_2"]);
        assert!(tree.nodes[1..].iter().all(|n| n.children.len() == 2));
        let tuples = tuples_from_tree(&tree).unwrap();
        assert!(tuples.iter().any(|t| t.path == "tile_0_2/histogram" && t.attribute == "bin_0" && t.value == "2000"));
        assert!(tuples_to_terms(&tuples)[0].text.contains("tile_0_2_histogram_dominant_bin_0"));

        let flat = DetectorRegistry::builtin().detect_object(&g, "o", Some(&f), &m, None).unwrap();
        assert_eq!(flat.nodes.len(), 3);
        assert_eq!(
            DetectorRegistry::builtin().detect_object(&g, "o", Some(&f), &m, Some(5)).unwrap(),
            tree
        );
    }

    #[test]
    fn custom_detectors_plug_in() {
        struct Constant;
        impl Detector for Constant {
            fn kind(&self) -> MediaKind {
                MediaKind::Text
            }
            fn name(&self) -> &str {
                "constant"
            }
            fn detect(&self, _: &DetectorInput<'_>, _: &Params) -> Result<Attributes, DetectError> {
                Ok(vec![("k".into(), "v".into())])
            }
        }
        let mut reg = DetectorRegistry::empty();
        reg.register(Box::new(Constant));
        let g = DetectorGrammar::new(vec![GrammarRule::new(MediaKind::Text, "constant", &[])]).unwrap();
        let tree = reg.run_grammar(&g, "o", MediaKind::Text, None, &BTreeMap::new()).unwrap();
        assert_eq!(tree.nodes[0].attributes, [("k".to_string(), "v".to_string())]);
    }

    #[test]
    fn grammar_json() {
        let g = DetectorGrammar::from_json(
            r#"[{"kind":"image","detector":"histogram","params":{"bins":4}},
                {"kind":"voice","detector":"speaker"}]"#,
        )
        .unwrap();
        assert_eq!(g.rules()[0].params.get("bins"), Some("4"));
        assert!(g.rules()[1].params.get("bins").is_none());
        assert_eq!(DetectorGrammar::from_json(&g.to_json()).unwrap(), g);
        assert!(DetectorGrammar::from_json(r#"[{"kind":"smell","detector":"x"}]"#).is_err());
        assert!(DetectorGrammar::from_json(
            r#"[{"kind":"text","detector":"x"},{"kind":"text","detector":"x"}]"#
        )
        .is_err());
        assert!(DetectorGrammar::from_json(r#"[{"kind":"image","detector":"x","params":{"a":[1]}}]"#).is_err());
    }
}
