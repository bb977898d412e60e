//! Recursive Begin/Middle/End story-unit trees.
//!
//! A storyboard decomposes a main problem into up to three stage-1 units
//! (Begin, Middle, End). Each unit can be expanded again into its own
//! Begin/Middle/End children at the next stage, so every unit is addressed
//! by the path of roles leading to it, e.g. `B1,M2,E3`.
//!
//! Units may be declared without content ("un-instantiated"); those are kept
//! in the tree but never produce indexable documents.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textindex::Document;

/// Depth above which [`storyboard_warnings`] flags a unit.
pub const DEEP_STAGE_WARNING: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AddressError {
    #[error("empty story address")]
    Empty,
    #[error("malformed address token {token:?}: {reason}")]
    Token { token: String, reason: &'static str },
    #[error("non-consecutive stage in {token:?}: expected stage {expected}")]
    NonConsecutive { token: String, expected: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoryboardError {
    #[error(transparent)]
    Address(#[from] AddressError),
    #[error("story unit {0} not found")]
    NotFound(StoryAddress),
    #[error("unit {parent} already has a {role:?} child")]
    DuplicateRole { parent: StoryAddress, role: Role },
    #[error("duplicate story unit {0}")]
    DuplicateUnit(StoryAddress),
    #[error("parent of {0} is missing")]
    MissingParent(StoryAddress),
    #[error("unknown story type {0:?}")]
    UnknownStoryType(String),
    #[error("invalid storyboard: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("storyboard json: {0}")]
    Json(String),
}

/// Position of a unit inside its parent's story arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Begin,
    Middle,
    End,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Begin, Role::Middle, Role::End];

    pub fn code(self) -> char {
        match self {
            Role::Begin => 'B',
            Role::Middle => 'M',
            Role::End => 'E',
        }
    }

    pub fn from_code(c: char) -> Option<Role> {
        match c {
            'B' | 'b' => Some(Role::Begin),
            'M' | 'm' => Some(Role::Middle),
            'E' | 'e' => Some(Role::End),
            _ => None,
        }
    }
}

/// Path of `(role, stage)` steps from a stage-1 unit down to a unit.
///
/// Stages are implied by position (the i-th step is stage i), so only the
/// roles are stored; the textual form still carries the stage numbers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StoryAddress(Vec<Role>);

impl StoryAddress {
    pub fn root(role: Role) -> Self {
        StoryAddress(vec![role])
    }

    /// Builds an address from roles; `None` when `roles` is empty.
    pub fn from_roles(roles: Vec<Role>) -> Option<Self> {
        (!roles.is_empty()).then_some(StoryAddress(roles))
    }

    pub fn roles(&self) -> &[Role] {
        &self.0
    }

    /// Number of stages in the path, equal to the stage of the last step.
    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn last_role(&self) -> Role {
        *self.0.last().expect("addresses are non-empty")
    }

    /// `(role, stage)` pairs, stages starting at 1.
    pub fn steps(&self) -> impl Iterator<Item = (Role, usize)> + '_ {
        self.0.iter().enumerate().map(|(i, r)| (*r, i + 1))
    }

    pub fn child(&self, role: Role) -> Self {
        let mut roles = self.0.clone();
        roles.push(role);
        StoryAddress(roles)
    }

    pub fn parent(&self) -> Option<Self> {
        (self.0.len() > 1).then(|| StoryAddress(self.0[..self.0.len() - 1].to_vec()))
    }
}

impl fmt::Display for StoryAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (role, stage)) in self.steps().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}{}", role.code(), stage)?;
        }
        Ok(())
    }
}

impl FromStr for StoryAddress {
    type Err = AddressError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_address(s)
    }
}

impl Serialize for StoryAddress {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StoryAddress {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_address(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses `"B1,M2,E3"`; whitespace around tokens is ignored.
pub fn parse_address(text: &str) -> Result<StoryAddress, AddressError> {
    if text.trim().is_empty() {
        return Err(AddressError::Empty);
    }
    let mut roles = Vec::new();
    for (i, raw) in text.split(',').enumerate() {
        let token = raw.trim();
        let mut chars = token.chars();
        let role = match chars.next() {
            None => {
                return Err(AddressError::Token {
                    token: token.to_string(),
                    reason: "empty token",
                })
            }
            Some(c) => Role::from_code(c).ok_or_else(|| AddressError::Token {
                token: token.to_string(),
                reason: "unknown role letter",
            })?,
        };
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(AddressError::Token {
                token: token.to_string(),
                reason: "stage is not an integer",
            });
        }
        let expected = i + 1;
        if digits.parse::<usize>().ok() != Some(expected) {
            return Err(AddressError::NonConsecutive {
                token: token.to_string(),
                expected,
            });
        }
        roles.push(role);
    }
    Ok(StoryAddress(roles))
}

pub fn format_address(addr: &StoryAddress) -> String {
    addr.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoryUnit {
    pub address: StoryAddress,
    pub problem: Option<String>,
    pub narrative: String,
    pub instantiated: bool,
    pub children: BTreeMap<Role, StoryUnit>,
}

impl StoryUnit {
    pub fn new(address: StoryAddress, problem: Option<String>, narrative: impl Into<String>) -> Self {
        let narrative = narrative.into();
        StoryUnit {
            address,
            problem,
            instantiated: !narrative.is_empty(),
            narrative,
            children: BTreeMap::new(),
        }
    }

    /// Pre-order walk, children visited Begin, Middle, End.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a StoryUnit)) {
        visit(self);
        for child in self.children.values() {
            child.walk(visit);
        }
    }

    /// Searchable text: the problem statement (if any) followed by the narrative.
    pub fn text(&self) -> String {
        match &self.problem {
            Some(p) if !p.is_empty() => {
                if self.narrative.is_empty() {
                    p.clone()
                } else {
                    format!("{p}\n{}", self.narrative)
                }
            }
            _ => self.narrative.clone(),
        }
    }
}

/// Story types and the character types they call for.
pub const CHARACTER_TYPES: [(&str, &str); 8] = [
    ("Humanistic", "Human Beings"),
    ("Animated", "Animation Beings"),
    ("Game", "Game Beings"),
    ("Education", "Knowledge elements"),
    ("Song", "Word, metaphors"),
    ("Music", "Notes, Movements"),
    ("Multisensory story", "Any of the above + Touch, Smell & Taste"),
    ("Formal Story", "Any of the above"),
];

fn canonical_story_type(story_type: &str) -> Option<(&'static str, &'static str)> {
    let key = story_type.trim();
    // "Musik" is the spelling used in the original table.
    let key = if key.eq_ignore_ascii_case("musik") { "Music" } else { key };
    CHARACTER_TYPES
        .iter()
        .copied()
        .find(|(t, _)| t.eq_ignore_ascii_case(key))
}

/// Character type required by a story type; case-insensitive on the key.
pub fn character_type_for(story_type: &str) -> Result<&'static str, StoryboardError> {
    canonical_story_type(story_type)
        .map(|(_, c)| c)
        .ok_or_else(|| StoryboardError::UnknownStoryType(story_type.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Storyboard {
    pub main_problem: String,
    pub story_type: String,
    pub units: BTreeMap<Role, StoryUnit>,
}

impl Storyboard {
    pub fn new(main_problem: impl Into<String>, story_type: impl Into<String>) -> Self {
        Storyboard {
            main_problem: main_problem.into(),
            story_type: story_type.into(),
            units: BTreeMap::new(),
        }
    }

    /// Adds a stage-1 unit.
    pub fn add_root(
        &mut self,
        role: Role,
        problem: Option<&str>,
        narrative: &str,
    ) -> Result<StoryAddress, StoryboardError> {
        let addr = StoryAddress::root(role);
        if self.units.contains_key(&role) {
            return Err(StoryboardError::DuplicateUnit(addr));
        }
        self.units.insert(
            role,
            StoryUnit::new(addr.clone(), problem.map(str::to_string), narrative),
        );
        Ok(addr)
    }

    pub fn get_unit(&self, addr: &StoryAddress) -> Result<&StoryUnit, StoryboardError> {
        let mut roles = addr.roles().iter();
        let first = roles.next().expect("addresses are non-empty");
        let mut unit = self.units.get(first);
        for role in roles {
            unit = unit.and_then(|u| u.children.get(role));
        }
        unit.ok_or_else(|| StoryboardError::NotFound(addr.clone()))
    }

    fn get_unit_mut(&mut self, addr: &StoryAddress) -> Option<&mut StoryUnit> {
        let mut roles = addr.roles().iter();
        let mut unit = self.units.get_mut(roles.next()?);
        for role in roles {
            unit = unit.and_then(|u| u.children.get_mut(role));
        }
        unit
    }

    pub fn contains(&self, addr: &StoryAddress) -> bool {
        self.get_unit(addr).is_ok()
    }

    /// Adds a child under `parent` at the next stage. The child counts as
    /// instantiated iff `narrative` is non-empty.
    pub fn expand_unit(
        &mut self,
        parent: &StoryAddress,
        role: Role,
        problem: Option<&str>,
        narrative: &str,
    ) -> Result<StoryAddress, StoryboardError> {
        let unit = self
            .get_unit_mut(parent)
            .ok_or_else(|| StoryboardError::NotFound(parent.clone()))?;
        if unit.children.contains_key(&role) {
            return Err(StoryboardError::DuplicateRole {
                parent: parent.clone(),
                role,
            });
        }
        let addr = parent.child(role);
        unit.children.insert(
            role,
            StoryUnit::new(addr.clone(), problem.map(str::to_string), narrative),
        );
        Ok(addr)
    }

    /// Every unit in pre-order (roots Begin, Middle, End; children likewise).
    pub fn units_preorder(&self) -> Vec<&StoryUnit> {
        let mut out = Vec::new();
        for root in self.units.values() {
            root.walk(&mut |u| out.push(u));
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self, StoryboardError> {
        let file: StoryboardFile =
            serde_json::from_str(text).map_err(|e| StoryboardError::Json(e.to_string()))?;
        Storyboard::try_from(file)
    }

    /// Pretty JSON with units listed in pre-order; stable across round-trips.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&StoryboardFile::from(self))
            .expect("storyboard serialization cannot fail");
        s.push('\n');
        s
    }
}

/// One flattened unit in the storyboard file format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub address: StoryAddress,
    pub problem: Option<String>,
    pub narrative: String,
    pub instantiated: bool,
}

/// On-disk storyboard: units as a flat list, tree rebuilt from addresses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryboardFile {
    pub main_problem: String,
    pub story_type: String,
    pub units: Vec<UnitRecord>,
}

impl From<&Storyboard> for StoryboardFile {
    fn from(board: &Storyboard) -> Self {
        StoryboardFile {
            main_problem: board.main_problem.clone(),
            story_type: board.story_type.clone(),
            units: board
                .units_preorder()
                .into_iter()
                .map(|u| UnitRecord {
                    address: u.address.clone(),
                    problem: u.problem.clone(),
                    narrative: u.narrative.clone(),
                    instantiated: u.instantiated,
                })
                .collect(),
        }
    }
}

impl TryFrom<StoryboardFile> for Storyboard {
    type Error = StoryboardError;

    fn try_from(mut file: StoryboardFile) -> Result<Self, Self::Error> {
        let mut board = Storyboard::new(file.main_problem, file.story_type);
        // Parents before children; ties keep file order.
        file.units.sort_by_key(|u| u.address.depth());
        for rec in file.units {
            let unit = StoryUnit {
                address: rec.address.clone(),
                problem: rec.problem,
                narrative: rec.narrative,
                instantiated: rec.instantiated,
                children: BTreeMap::new(),
            };
            let role = rec.address.last_role();
            let slot = match rec.address.parent() {
                None => &mut board.units,
                Some(parent) => {
                    &mut board
                        .get_unit_mut(&parent)
                        .ok_or_else(|| StoryboardError::MissingParent(rec.address.clone()))?
                        .children
                }
            };
            if slot.contains_key(&role) {
                return Err(StoryboardError::DuplicateUnit(rec.address));
            }
            slot.insert(role, unit);
        }
        Ok(board)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    /// A stage-1 unit whose address is longer than one step.
    RootDepth,
    /// A unit stored under a role key that differs from its address's last role.
    RoleKeyMismatch { key: Role },
    /// A child whose address is not its parent's address extended by one step.
    ChildAddress { expected: StoryAddress },
    /// `instantiated == false` but the narrative is non-empty.
    UninstantiatedWithNarrative,
    /// `instantiated == true` but the narrative is empty.
    InstantiatedWithoutNarrative,
    UnknownStoryType(String),
}

/// A broken invariant; `address` is `None` for board-level rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub address: Option<StoryAddress>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = self
            .address
            .as_ref()
            .map_or_else(|| "storyboard".to_string(), |a| a.to_string());
        match &self.rule {
            Rule::RootDepth => write!(f, "{at}: stage-1 unit has a multi-stage address"),
            Rule::RoleKeyMismatch { key } => {
                write!(f, "{at}: stored under role {} but address ends in another role", key.code())
            }
            Rule::ChildAddress { expected } => write!(f, "{at}: child address should be {expected}"),
            Rule::UninstantiatedWithNarrative => {
                write!(f, "{at}: un-instantiated unit has a narrative")
            }
            Rule::InstantiatedWithoutNarrative => {
                write!(f, "{at}: instantiated unit has an empty narrative")
            }
            Rule::UnknownStoryType(t) => write!(f, "{at}: unknown story type {t:?}"),
        }
    }
}

/// Checks every structural invariant; an empty result means the board is valid.
pub fn validate_storyboard(board: &Storyboard) -> Vec<Violation> {
    let mut out = Vec::new();
    if canonical_story_type(&board.story_type).is_none() {
        out.push(Violation {
            address: None,
            rule: Rule::UnknownStoryType(board.story_type.clone()),
        });
    }
    for (key, unit) in &board.units {
        if unit.address.depth() != 1 {
            out.push(Violation {
                address: Some(unit.address.clone()),
                rule: Rule::RootDepth,
            });
        }
        validate_unit(*key, unit, &mut out);
    }
    out
}

fn validate_unit(key: Role, unit: &StoryUnit, out: &mut Vec<Violation>) {
    let here = || Some(unit.address.clone());
    if unit.address.last_role() != key {
        out.push(Violation {
            address: here(),
            rule: Rule::RoleKeyMismatch { key },
        });
    }
    if unit.instantiated == unit.narrative.is_empty() {
        out.push(Violation {
            address: here(),
            rule: if unit.instantiated {
                Rule::InstantiatedWithoutNarrative
            } else {
                Rule::UninstantiatedWithNarrative
            },
        });
    }
    for (child_key, child) in &unit.children {
        let expected = unit.address.child(*child_key);
        // A child whose only defect is its last role is reported once, as a key mismatch.
        let same_prefix = child.address.parent().as_ref() == Some(&unit.address);
        if child.address != expected && !same_prefix {
            out.push(Violation {
                address: Some(child.address.clone()),
                rule: Rule::ChildAddress { expected },
            });
        }
        validate_unit(*child_key, child, out);
    }
}

/// Units nested deeper than [`DEEP_STAGE_WARNING`] stages. Not an error.
pub fn storyboard_warnings(board: &Storyboard) -> Vec<StoryAddress> {
    board
        .units_preorder()
        .into_iter()
        .filter(|u| u.address.depth() > DEEP_STAGE_WARNING)
        .map(|u| u.address.clone())
        .collect()
}

/// One document per instantiated unit, in pre-order (B, M, E).
pub fn flatten_storyboard(board: &Storyboard) -> Result<Vec<Document>, StoryboardError> {
    let violations = validate_storyboard(board);
    if !violations.is_empty() {
        return Err(StoryboardError::Invalid(violations));
    }
    Ok(board
        .units_preorder()
        .into_iter()
        .filter(|u| u.instantiated)
        .map(|u| Document::new(u.address.to_string(), u.text()))
        .collect())
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn role() -> impl Strategy<Value = Role> {
        prop_oneof![Just(Role::Begin), Just(Role::Middle), Just(Role::End)]
    }

    fn address() -> impl Strategy<Value = StoryAddress> {
        prop::collection::vec(role(), 1..24).prop_map(|r| StoryAddress::from_roles(r).unwrap())
    }

    /// A sequence of expansions: (index of existing unit, role, instantiated?).
    fn ops() -> impl Strategy<Value = Vec<(usize, Role, bool)>> {
        prop::collection::vec((any::<usize>(), role(), any::<bool>()), 0..40)
    }

    fn grow(ops: &[(usize, Role, bool)]) -> Storyboard {
        let mut b = Storyboard::new("m", "Education");
        b.add_root(Role::Begin, None, "root").unwrap();
        let mut known = vec![StoryAddress::root(Role::Begin)];
        for (i, (pick, role, inst)) in ops.iter().enumerate() {
            let parent = known[pick % known.len()].clone();
            let narrative = if *inst { format!("n{i}") } else { String::new() };
            if let Ok(a) = b.expand_unit(&parent, *role, None, &narrative) {
                known.push(a);
            }
        }
        b
    }

    proptest! {
        #[test]
        fn address_round_trip(a in address()) {
            prop_assert_eq!(parse_address(&format_address(&a)).unwrap(), a);
        }

        #[test]
        fn grown_boards_validate(ops in ops()) {
            let b = grow(&ops);
            prop_assert!(validate_storyboard(&b).is_empty());
            for u in b.units_preorder() {
                prop_assert_eq!(u.address.depth(), u.address.steps().last().unwrap().1);
            }
            let docs = flatten_storyboard(&b).unwrap();
            let mut ids: Vec<_> = docs.iter().map(|d| d.id.clone()).collect();
            for id in &ids {
                prop_assert!(b.contains(&parse_address(id).unwrap()));
            }
            ids.sort();
            ids.dedup();
            prop_assert_eq!(ids.len(), docs.len());
            prop_assert_eq!(Storyboard::from_json(&b.to_json()).unwrap(), b);
        }

        #[test]
        fn expansion_is_monotone(ops in ops(), role in role()) {
            let mut b = grow(&ops);
            let before: Vec<StoryUnit> = b.units_preorder().into_iter().cloned().collect();
            let target = before[ops.len() % before.len()].address.clone();
            let _ = b.expand_unit(&target, role, None, "new");
            for old in &before {
                let now = b.get_unit(&old.address).unwrap();
                prop_assert_eq!(&now.problem, &old.problem);
                prop_assert_eq!(&now.narrative, &old.narrative);
                prop_assert_eq!(now.instantiated, old.instantiated);
                for (r, c) in &old.children {
                    prop_assert_eq!(&now.children[r].address, &c.address);
                }
            }
        }
    }
}
