//! Ground terms, finite types and switch instances.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::DomainError;

/// An atomic constant. Integers order before symbolic atoms, integers by
/// value and atoms lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundTerm {
    Int(i64),
    Atom(Arc<str>),
}

impl GroundTerm {
    pub fn atom(name: &str) -> Self {
        GroundTerm::Atom(Arc::from(name))
    }

    pub fn int(v: i64) -> Self {
        GroundTerm::Int(v)
    }
}

impl From<i64> for GroundTerm {
    fn from(v: i64) -> Self {
        GroundTerm::Int(v)
    }
}

impl From<&str> for GroundTerm {
    fn from(v: &str) -> Self {
        GroundTerm::atom(v)
    }
}

pub(crate) fn atom_needs_quotes(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => !chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => true,
    }
}

impl fmt::Display for GroundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundTerm::Int(v) => write!(f, "{v}"),
            GroundTerm::Atom(a) if atom_needs_quotes(a) => write!(f, "'{}'", a.replace('\'', "\\'")),
            GroundTerm::Atom(a) => f.write_str(a),
        }
    }
}

/// A finite, nonempty collection of distinct ground terms.
#[derive(Clone, Debug)]
pub struct TypeDomain {
    name: Arc<str>,
    values: Vec<GroundTerm>,
    index: HashMap<GroundTerm, usize>,
}

impl TypeDomain {
    pub fn new(name: &str, values: Vec<GroundTerm>) -> Result<Self, DomainError> {
        if values.is_empty() {
            return Err(DomainError::Empty(name.to_string()));
        }
        let mut index = HashMap::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(DomainError::Duplicate(name.to_string(), v.to_string()));
            }
        }
        Ok(TypeDomain { name: Arc::from(name), values, index })
    }

    /// Integer range `lo..=hi`.
    pub fn range(name: &str, lo: i64, hi: i64) -> Result<Self, DomainError> {
        Self::new(name, (lo..=hi).map(GroundTerm::Int).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[GroundTerm] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn contains(&self, v: &GroundTerm) -> bool {
        self.index.contains_key(v)
    }

    pub fn position(&self, v: &GroundTerm) -> Option<usize> {
        self.index.get(v).copied()
    }
}

impl PartialEq for TypeDomain {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.values == other.values
    }
}

impl Eq for TypeDomain {}

/// A ground switch instance `(s, k)`. Ordered by instance first, then by switch.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SwitchInstance {
    pub switch: Arc<str>,
    pub instance: GroundTerm,
}

impl SwitchInstance {
    pub fn new(switch: &str, instance: impl Into<GroundTerm>) -> Self {
        SwitchInstance { switch: Arc::from(switch), instance: instance.into() }
    }
}

impl Ord for SwitchInstance {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.instance
            .cmp(&other.instance)
            .then_with(|| self.switch.cmp(&other.switch))
    }
}

impl PartialOrd for SwitchInstance {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SwitchInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.switch, self.instance)
    }
}
