//! Metadata database: a storyboard, a detector grammar, and the cut list of
//! video fragments that link source time ranges to story units and frames.
//! [`ingest_pipeline`] turns all of it into one inverted index.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detectors::{
    tuples_from_tree, tuples_to_terms, DetectError, DetectorGrammar, DetectorRegistry, FrameError,
    ParseNode, SyntheticFrame,
};
use crate::storyboard::{flatten_storyboard, StoryAddress, Storyboard, StoryboardError, StoryboardFile};
use crate::textindex::{build_index, Document, IndexError, InvertedIndex};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("catalog json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("storyboard: {0}")]
    Storyboard(#[from] StoryboardError),
    #[error("grammar: {0}")]
    Grammar(DetectError),
    #[error("fragment {fragment_id:?}: field {field}: {reason}")]
    Field {
        fragment_id: String,
        field: &'static str,
        reason: String,
    },
    #[error("fragment {fragment_id:?}: story address {address} is not in the storyboard")]
    DanglingAddress {
        fragment_id: String,
        address: StoryAddress,
    },
    #[error("duplicate fragment id {0:?}")]
    DuplicateFragment(String),
    #[error("fragment {fragment_id:?}, frame {frame_index}: {source}")]
    Detection {
        fragment_id: String,
        frame_index: usize,
        #[source]
        source: DetectError,
    },
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// Where a frame's pixels come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameSource {
    /// PGM file, relative to the catalog's directory unless absolute.
    Path(String),
    /// Generated with [`SyntheticFrame::from_seed`].
    Seed(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FrameRefFile", into = "FrameRefFile")]
pub struct FrameRef {
    pub source: FrameSource,
    pub width: u32,
    pub height: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRefFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    width: u32,
    height: u32,
}

impl TryFrom<FrameRefFile> for FrameRef {
    type Error = String;

    fn try_from(f: FrameRefFile) -> Result<Self, Self::Error> {
        let source = match (f.path, f.seed) {
            (Some(p), None) => FrameSource::Path(p),
            (None, Some(s)) => FrameSource::Seed(s),
            _ => return Err("a frame needs exactly one of \"path\" or \"seed\"".into()),
        };
        Ok(FrameRef {
            source,
            width: f.width,
            height: f.height,
        })
    }
}

impl From<FrameRef> for FrameRefFile {
    fn from(f: FrameRef) -> Self {
        let (path, seed) = match f.source {
            FrameSource::Path(p) => (Some(p), None),
            FrameSource::Seed(s) => (None, Some(s)),
        };
        FrameRefFile {
            path,
            seed,
            width: f.width,
            height: f.height,
        }
    }
}

impl FrameRef {
    pub fn load(&self, base_dir: Option<&Path>) -> Result<SyntheticFrame, FrameError> {
        match &self.source {
            FrameSource::Seed(seed) => SyntheticFrame::from_seed(*seed, self.width, self.height),
            FrameSource::Path(p) => {
                let path = match base_dir {
                    Some(dir) if Path::new(p).is_relative() => dir.join(p),
                    _ => PathBuf::from(p),
                };
                let frame = SyntheticFrame::read_pgm(fs::File::open(path)?)?;
                if (frame.width(), frame.height()) != (self.width, self.height) {
                    return Err(FrameError::Pgm(format!(
                        "{p} is {}x{}, catalog says {}x{}",
                        frame.width(),
                        frame.height(),
                        self.width,
                        self.height
                    )));
                }
                Ok(frame)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentRecord {
    pub fragment_id: String,
    pub source: String,
    pub start_ms: u64,
    pub end_ms: u64,
    pub story_address: StoryAddress,
    #[serde(default)]
    pub frames: Vec<FrameRef>,
    #[serde(default, rename = "metadata")]
    pub media_metadata: BTreeMap<String, String>,
}

/// Two fragments of the same source whose time ranges intersect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapWarning {
    pub source: String,
    pub first: String,
    pub second: String,
}

#[derive(Debug, Clone)]
pub struct Catalog {
    pub storyboard: Storyboard,
    pub grammar: DetectorGrammar,
    /// Sorted by `(source, start_ms, fragment_id)`.
    pub fragments: Vec<FragmentRecord>,
    /// Directory that relative frame paths resolve against.
    pub base_dir: Option<PathBuf>,
}

impl PartialEq for Catalog {
    fn eq(&self, other: &Self) -> bool {
        self.storyboard == other.storyboard
            && self.grammar == other.grammar
            && self.fragments == other.fragments
    }
}

#[derive(Serialize, Deserialize)]
struct CatalogFile {
    storyboard: StoryboardFile,
    grammar: DetectorGrammar,
    fragments: Vec<FragmentRecord>,
}

impl Catalog {
    /// Checks every invariant and sorts the fragments.
    pub fn new(
        storyboard: Storyboard,
        grammar: DetectorGrammar,
        mut fragments: Vec<FragmentRecord>,
    ) -> Result<Self, CatalogError> {
        let violations = crate::storyboard::validate_storyboard(&storyboard);
        if !violations.is_empty() {
            return Err(StoryboardError::Invalid(violations).into());
        }
        DetectorRegistry::builtin()
            .check(&grammar)
            .map_err(CatalogError::Grammar)?;

        let mut ids = HashSet::new();
        for f in &fragments {
            let field_err = |field, reason: String| CatalogError::Field {
                fragment_id: f.fragment_id.clone(),
                field,
                reason,
            };
            if f.fragment_id.is_empty() {
                return Err(field_err("fragment_id", "must not be empty".into()));
            }
            if !ids.insert(f.fragment_id.as_str()) {
                return Err(CatalogError::DuplicateFragment(f.fragment_id.clone()));
            }
            if f.start_ms >= f.end_ms {
                return Err(field_err(
                    "start_ms",
                    format!("start {} is not before end {}", f.start_ms, f.end_ms),
                ));
            }
            if !storyboard.contains(&f.story_address) {
                return Err(CatalogError::DanglingAddress {
                    fragment_id: f.fragment_id.clone(),
                    address: f.story_address.clone(),
                });
            }
            if let Some(i) = f.frames.iter().position(|fr| fr.width == 0 || fr.height == 0) {
                return Err(field_err("frames", format!("frame {i} has a zero dimension")));
            }
        }
        fragments.sort_by(|x, y| {
            (&x.source, x.start_ms, &x.fragment_id).cmp(&(&y.source, y.start_ms, &y.fragment_id))
        });
        Ok(Catalog {
            storyboard,
            grammar,
            fragments,
            base_dir: None,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let file: CatalogFile = serde_json::from_str(text)?;
        Catalog::new(Storyboard::try_from(file.storyboard)?, file.grammar, file.fragments)
    }

    pub fn to_json(&self) -> String {
        let file = CatalogFile {
            storyboard: StoryboardFile::from(&self.storyboard),
            grammar: self.grammar.clone(),
            fragments: self.fragments.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("catalog serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn overlap_warnings(&self) -> Vec<OverlapWarning> {
        let mut out = Vec::new();
        for pair in self.fragments.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            if a.source == b.source && b.start_ms < a.end_ms {
                out.push(OverlapWarning {
                    source: a.source.clone(),
                    first: a.fragment_id.clone(),
                    second: b.fragment_id.clone(),
                });
            }
        }
        out
    }
}

fn read(path: &Path) -> Result<String, CatalogError> {
    fs::read_to_string(path).map_err(|source| CatalogError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CatalogError> {
    fs::write(path, contents).map_err(|source| CatalogError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads and validates a catalog; relative frame paths resolve against the
/// file's directory.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let path = path.as_ref();
    let mut catalog = Catalog::from_json(&read(path)?)?;
    catalog.base_dir = path.parent().map(Path::to_path_buf);
    Ok(catalog)
}

pub fn save_catalog(catalog: &Catalog, path: impl AsRef<Path>) -> Result<(), CatalogError> {
    write(path.as_ref(), &catalog.to_json())
}

pub fn load_storyboard(path: impl AsRef<Path>) -> Result<Storyboard, CatalogError> {
    Ok(Storyboard::from_json(&read(path.as_ref())?)?)
}

pub fn save_storyboard(board: &Storyboard, path: impl AsRef<Path>) -> Result<(), CatalogError> {
    write(path.as_ref(), &board.to_json())
}

pub fn save_index(index: &InvertedIndex, path: impl AsRef<Path>) -> Result<(), CatalogError> {
    write(path.as_ref(), &index.to_json())
}

pub fn load_index(path: impl AsRef<Path>) -> Result<InvertedIndex, CatalogError> {
    Ok(InvertedIndex::from_json(&read(path.as_ref())?)?)
}

/// Documents for one fragment: one per frame, id `fragment_id/frame_index`.
/// Each frame's tree starts with a `fragment` node carrying the fragment
/// id, source and story address, followed by the grammar's detector nodes.
fn fragment_documents(
    catalog: &Catalog,
    fragment: &FragmentRecord,
    ast_partitions: Option<u32>,
) -> Result<Vec<Document>, CatalogError> {
    let registry = DetectorRegistry::builtin();
    let mut docs = Vec::with_capacity(fragment.frames.len());
    for (i, frame_ref) in fragment.frames.iter().enumerate() {
        let annotate = |source: DetectError| CatalogError::Detection {
            fragment_id: fragment.fragment_id.clone(),
            frame_index: i,
            source,
        };
        let frame = frame_ref
            .load(catalog.base_dir.as_deref())
            .map_err(|e| annotate(e.into()))?;
        let object_id = format!("{}/{i}", fragment.fragment_id);
        let mut tree = registry
            .detect_object(
                &catalog.grammar,
                &object_id,
                Some(&frame),
                &fragment.media_metadata,
                ast_partitions,
            )
            .map_err(annotate)?;
        tree.nodes.insert(
            0,
            ParseNode {
                name: "fragment".into(),
                attributes: vec![
                    ("id".into(), fragment.fragment_id.clone()),
                    ("source".into(), fragment.source.clone()),
                    ("story".into(), fragment.story_address.to_string()),
                ],
                children: Vec::new(),
            },
        );
        let tuples = tuples_from_tree(&tree).map_err(annotate)?;
        docs.extend(tuples_to_terms(&tuples));
    }
    Ok(docs)
}

/// Storyboard documents plus per-frame detector documents, sorted by id.
pub fn ingest_documents(catalog: &Catalog, ast_partitions: Option<u32>) -> Result<Vec<Document>, CatalogError> {
    let mut docs = flatten_storyboard(&catalog.storyboard)?;
    let per_fragment: Vec<Vec<Document>> = catalog
        .fragments
        .par_iter()
        .map(|f| fragment_documents(catalog, f, ast_partitions))
        .collect::<Result<_, _>>()?;
    docs.extend(per_fragment.into_iter().flatten());
    docs.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(docs)
}

/// Builds the combined index. With `ast_partitions`, image detectors run per
/// AST tile and their terms carry a `tile_<row>_<col>` prefix.
pub fn ingest_pipeline(catalog: &Catalog, ast_partitions: Option<u32>) -> Result<InvertedIndex, CatalogError> {
    Ok(build_index(&ingest_documents(catalog, ast_partitions)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::{GrammarRule, MediaKind};
    use crate::storyboard::{parse_address, Role};

    fn board() -> Storyboard {
        let mut b = Storyboard::new("Robots", "Education");
        b.add_root(Role::Begin, None, "A robot walks").unwrap();
        b.add_root(Role::Middle, None, "It lifts a box").unwrap();
        b
    }

    fn fragment(id: &str, source: &str, start: u64, end: u64, addr: &str) -> FragmentRecord {
        FragmentRecord {
            fragment_id: id.into(),
            source: source.into(),
            start_ms: start,
            end_ms: end,
            story_address: parse_address(addr).unwrap(),
            frames: vec![FrameRef {
                source: FrameSource::Seed(1),
                width: 16,
                height: 12,
            }],
            media_metadata: BTreeMap::new(),
        }
    }

    fn grammar() -> DetectorGrammar {
        DetectorGrammar::new(vec![GrammarRule::new(MediaKind::Image, "histogram", &[("bins", "4")])]).unwrap()
    }

    #[test]
    fn validates_fragments() {
        let ok = Catalog::new(board(), grammar(), vec![
            fragment("b", "v1", 40, 80, "M1"),
            fragment("a", "v1", 0, 40, "B1"),
        ])
        .unwrap();
        assert_eq!(ok.fragments[0].fragment_id, "a");
        assert!(ok.overlap_warnings().is_empty());

        let e = Catalog::new(board(), grammar(), vec![fragment("x", "v", 0, 1, "E1")]).unwrap_err();
        assert!(matches!(e, CatalogError::DanglingAddress { .. }));
        let e = Catalog::new(board(), grammar(), vec![fragment("x", "v", 5, 5, "B1")]).unwrap_err();
        assert!(matches!(e, CatalogError::Field { field: "start_ms", .. }));
        let e = Catalog::new(board(), grammar(), vec![
            fragment("x", "v", 0, 1, "B1"),
            fragment("x", "w", 0, 1, "B1"),
        ])
        .unwrap_err();
        assert!(matches!(e, CatalogError::DuplicateFragment(_)));
        let bad = DetectorGrammar::new(vec![GrammarRule::new(MediaKind::Image, "sift", &[])]).unwrap();
        assert!(matches!(Catalog::new(board(), bad, vec![]), Err(CatalogError::Grammar(_))));
    }

    #[test]
    fn overlap_is_a_warning() {
        let c = Catalog::new(board(), grammar(), vec![
            fragment("a", "v1", 0, 50, "B1"),
            fragment("b", "v1", 40, 80, "M1"),
            fragment("c", "v2", 10, 20, "M1"),
        ])
        .unwrap();
        assert_eq!(c.overlap_warnings(), [OverlapWarning {
            source: "v1".into(),
            first: "a".into(),
            second: "b".into(),
        }]);
    }

    #[test]
    fn frame_ref_json() {
        let f: FrameRef = serde_json::from_str(r#"{"seed":3,"width":4,"height":5}"#).unwrap();
        assert_eq!(f.source, FrameSource::Seed(3));
        assert_eq!(serde_json::to_string(&f).unwrap(), r#"{"seed":3,"width":4,"height":5}"#);
        assert!(serde_json::from_str::<FrameRef>(r#"{"width":4,"height":5}"#).is_err());
        assert!(serde_json::from_str::<FrameRef>(r#"{"seed":1,"path":"a","width":4,"height":5}"#).is_err());
    }

    #[test]
    fn fragment_docs_link_story_units() {
        let c = Catalog::new(board(), grammar(), vec![fragment("clip1", "v1", 0, 40, "M1")]).unwrap();
        let docs = ingest_documents(&c, None).unwrap();
        let ids: Vec<_> = docs.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["B1", "M1", "clip1/0"]);
        let text = &docs[2].text;
        assert!(text.starts_with("fragment_id_clip1 fragment_source_v1 fragment_story_M1 histogram_dominant_bin_"));
    }

    #[test]
    fn detection_errors_name_the_fragment() {
        let mut f = fragment("clip9", "v1", 0, 40, "B1");
        f.frames[0].source = FrameSource::Path("does-not-exist.pgm".into());
        let c = Catalog::new(board(), grammar(), vec![f]).unwrap();
        let e = ingest_pipeline(&c, None).unwrap_err();
        assert!(e.to_string().contains("clip9"), "{e}");
    }
}
