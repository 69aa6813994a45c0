use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::AstError;

/// Primitive attribute value carried by AST nodes.
///
/// Floats compare and hash by bit pattern so values can key maps; the
/// parser never produces NaN, so this agrees with numeric equality in
/// practice.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl Value {
    fn rank(&self) -> u8 {
        match self {
            Value::Bool(_) => 0,
            Value::Int(_) => 1,
            Value::Float(_) => 2,
            Value::Str(_) => 3,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Int(_) | Value::Float(_))
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Bool(b) => b.hash(state),
            Value::Int(i) => i.hash(state),
            Value::Float(f) => f.to_bits().hash(state),
            Value::Str(s) => s.hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Str(s) => f.write_str(s),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

/// One node of a query syntax tree: a type tag, named primitive
/// attributes and ordered children.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AstNode {
    #[serde(rename = "type")]
    pub node_type: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<AstNode>,
}

impl AstNode {
    pub fn new(node_type: impl Into<String>) -> Self {
        AstNode { node_type: node_type.into(), attrs: BTreeMap::new(), children: Vec::new() }
    }

    pub fn with_attr(mut self, name: impl Into<String>, value: impl Into<Value>) -> Self {
        self.attrs.insert(name.into(), value.into());
        self
    }

    pub fn with_child(mut self, child: AstNode) -> Self {
        self.children.push(child);
        self
    }

    pub fn with_children(mut self, children: impl IntoIterator<Item = AstNode>) -> Self {
        self.children.extend(children);
        self
    }

    pub fn attr(&self, name: &str) -> Option<&Value> {
        self.attrs.get(name)
    }

    /// Number of nodes in this subtree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(AstNode::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(AstNode::depth).max().unwrap_or(0)
    }

    /// Same type and attributes; children are not compared.
    pub fn same_label(&self, other: &AstNode) -> bool {
        self.node_type == other.node_type && self.attrs == other.attrs
    }

    pub fn subtree_at(&self, path: &DiffPath) -> Result<&AstNode, AstError> {
        let mut node = self;
        for (depth, &i) in path.0.iter().enumerate() {
            node = node.children.get(i).ok_or_else(|| AstError::PathNotFound {
                path: path.clone(),
                resolved: DiffPath(path.0[..depth].to_vec()),
            })?;
        }
        Ok(node)
    }

    pub fn subtree_at_mut(&mut self, path: &DiffPath) -> Result<&mut AstNode, AstError> {
        let mut node = self;
        for (depth, &i) in path.0.iter().enumerate() {
            if i >= node.children.len() {
                return Err(AstError::PathNotFound {
                    path: path.clone(),
                    resolved: DiffPath(path.0[..depth].to_vec()),
                });
            }
            node = &mut node.children[i];
        }
        Ok(node)
    }

    /// Preorder walk yielding each node with its path.
    pub fn walk(&self, mut visit: impl FnMut(&DiffPath, &AstNode)) {
        fn go(node: &AstNode, path: &mut Vec<usize>, visit: &mut dyn FnMut(&DiffPath, &AstNode)) {
            let p = DiffPath(path.clone());
            visit(&p, node);
            for (i, c) in node.children.iter().enumerate() {
                path.push(i);
                go(c, path, visit);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), &mut visit);
    }

    /// Compact one-line rendering used in diagnostics, e.g. `ColExpr(sales)`.
    pub fn label(&self) -> String {
        let mut out = self.node_type.clone();
        if !self.attrs.is_empty() || !self.children.is_empty() {
            out.push('(');
            let mut first = true;
            for v in self.attrs.values() {
                if !first {
                    out.push_str(", ");
                }
                first = false;
                out.push_str(&v.to_string());
            }
            for c in &self.children {
                if !first {
                    out.push_str(", ");
                }
                first = false;
                out.push_str(&c.label());
            }
            out.push(')');
        }
        out
    }
}

/// Child-index path from the root; the empty path addresses the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiffPath(pub Vec<usize>);

impl DiffPath {
    pub fn root() -> Self {
        DiffPath(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> DiffPath {
        let mut v = self.0.clone();
        v.push(i);
        DiffPath(v)
    }

    pub fn parent(&self) -> Option<DiffPath> {
        if self.0.is_empty() {
            None
        } else {
            Some(DiffPath(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn prefix(&self, len: usize) -> DiffPath {
        DiffPath(self.0[..len].to_vec())
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn starts_with(&self, other: &DiffPath) -> bool {
        self.0.starts_with(&other.0)
    }
}

impl fmt::Display for DiffPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

impl FromStr for DiffPath {
    type Err = AstError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_matches('/');
        if s.is_empty() {
            return Ok(DiffPath::root());
        }
        s.split('/')
            .map(|part| part.parse::<usize>().map_err(|_| AstError::BadPath(s.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(DiffPath)
    }
}

impl From<Vec<usize>> for DiffPath {
    fn from(v: Vec<usize>) -> Self {
        DiffPath(v)
    }
}

impl Serialize for DiffPath {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DiffPath {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
