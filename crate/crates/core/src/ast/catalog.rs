use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{AstError, AstNode, DiffPath};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrimitiveKind {
    String,
    Integer,
    Float,
    Boolean,
}

/// Node-type catalog of a dialect: which types are literals (and of what
/// primitive kind), which are variable-arity lists, and which are grouping
/// nodes that path expressions look through.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCatalog {
    pub dialect: String,
    pub literal_types: BTreeMap<String, PrimitiveKind>,
    pub list_types: BTreeMap<String, String>,
    #[serde(default)]
    pub transparent_types: BTreeSet<String>,
    #[serde(default)]
    pub interior_types: BTreeSet<String>,
}

/// Attribute carrying a literal node's value.
pub const VALUE_ATTR: &str = "value";

impl NodeCatalog {
    pub fn from_json(text: &str) -> Result<Self, AstError> {
        let cat: NodeCatalog =
            serde_json::from_str(text).map_err(|e| AstError::Catalog(e.to_string()))?;
        if let Some(t) = cat.literal_types.keys().find(|t| cat.list_types.contains_key(*t)) {
            return Err(AstError::Catalog(format!("{t} is both a literal and a list type")));
        }
        Ok(cat)
    }

    pub fn is_literal(&self, node_type: &str) -> bool {
        self.literal_types.contains_key(node_type)
    }

    pub fn is_list(&self, node_type: &str) -> bool {
        self.list_types.contains_key(node_type)
    }

    pub fn is_transparent(&self, node_type: &str) -> bool {
        self.transparent_types.contains(node_type)
    }

    pub fn list_element(&self, node_type: &str) -> Option<&str> {
        self.list_types.get(node_type).map(String::as_str)
    }

    pub fn knows(&self, node_type: &str) -> bool {
        self.is_literal(node_type) || self.is_list(node_type) || self.interior_types.contains(node_type)
    }

    /// Checks the literal and list invariants over a whole tree.
    pub fn check(&self, root: &AstNode) -> Result<(), AstError> {
        let mut err = None;
        root.walk(|path, node| {
            if err.is_some() {
                return;
            }
            if let Err(e) = self.check_node(node, path) {
                err = Some(e);
            }
        });
        err.map_or(Ok(()), Err)
    }

    fn check_node(&self, node: &AstNode, path: &DiffPath) -> Result<(), AstError> {
        let bad = |reason: String| AstError::MalformedTree {
            node_type: node.node_type.clone(),
            path: path.clone(),
            reason,
        };
        if self.is_literal(&node.node_type) {
            if !node.children.is_empty() {
                return Err(bad("literal node has children".into()));
            }
            if node.attrs.len() != 1 || !node.attrs.contains_key(VALUE_ATTR) {
                return Err(bad("literal node must carry exactly one value attribute".into()));
            }
        }
        if let Some(elem) = self.list_element(&node.node_type) {
            if !node.attrs.is_empty() {
                return Err(bad("list node has attributes".into()));
            }
            if let Some(c) = node.children.iter().find(|c| c.node_type != elem) {
                return Err(bad(format!("list element {} is not {elem}", c.node_type)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_catalog_loads() {
        let cat = crate::ast::sql_catalog();
        assert!(cat.is_literal("StrExpr"));
        assert_eq!(cat.list_element("Where"), Some("Or"));
        assert!(cat.is_transparent("Or"));
        assert!(!cat.is_literal("ColExpr"));
    }

    #[test]
    fn overlapping_catalog_is_rejected() {
        let text = r#"{"dialect":"x","literal_types":{"A":"string"},"list_types":{"A":"B"}}"#;
        assert!(NodeCatalog::from_json(text).is_err());
    }

    #[test]
    fn literal_with_child_is_malformed() {
        let cat = crate::ast::sql_catalog();
        let bad = AstNode::new("IntExpr").with_attr("value", 1).with_child(AstNode::new("ColExpr"));
        assert!(matches!(cat.check(&bad), Err(AstError::MalformedTree { .. })));
    }
}
