//! Parameterized subtrees: primitive attribute values replaced by numbered
//! slots in preorder (attributes within a node in key order).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{AstError, AstNode, DiffPath, NodeCatalog, Value, VALUE_ATTR};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Slot {
    Param { param: usize },
    Const(Value),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Template {
    #[serde(rename = "type")]
    pub node_type: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: BTreeMap<String, Slot>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Template>,
}

impl Template {
    /// Every primitive value becomes a parameter; returns the values in
    /// parameter order.
    pub fn parameterize(node: &AstNode) -> (Template, Vec<Value>) {
        let mut values = Vec::new();
        let t = Self::build(node, &mut |_, _, v: &Value, out: &mut Vec<Value>| {
            out.push(v.clone());
            true
        }, &mut values);
        (t, values)
    }

    /// Only literal-node values become parameters; also returns the path
    /// of each parameterized literal relative to `node`.
    pub fn parameterize_literals(node: &AstNode, catalog: &NodeCatalog) -> (Template, Vec<Value>, Vec<DiffPath>) {
        let mut values = Vec::new();
        let t = Self::build(
            node,
            &mut |n: &AstNode, attr: &str, v: &Value, out: &mut Vec<Value>| {
                if catalog.is_literal(&n.node_type) && attr == VALUE_ATTR {
                    out.push(v.clone());
                    true
                } else {
                    false
                }
            },
            &mut values,
        );
        let mut paths = Vec::new();
        node.walk(|p, n| {
            if catalog.is_literal(&n.node_type) && n.attrs.contains_key(VALUE_ATTR) {
                paths.push(p.clone());
            }
        });
        (t, values, paths)
    }

    fn build(
        node: &AstNode,
        pick: &mut dyn FnMut(&AstNode, &str, &Value, &mut Vec<Value>) -> bool,
        values: &mut Vec<Value>,
    ) -> Template {
        let mut attrs = BTreeMap::new();
        for (k, v) in &node.attrs {
            let idx = values.len();
            let slot = if pick(node, k, v, values) { Slot::Param { param: idx } } else { Slot::Const(v.clone()) };
            attrs.insert(k.clone(), slot);
        }
        let children = node.children.iter().map(|c| Self::build(c, pick, values)).collect();
        Template { node_type: node.node_type.clone(), attrs, children }
    }

    pub fn param_count(&self) -> usize {
        self.attrs.values().filter(|s| matches!(s, Slot::Param { .. })).count()
            + self.children.iter().map(Template::param_count).sum::<usize>()
    }

    pub fn instantiate(&self, values: &[Value]) -> Result<AstNode, AstError> {
        let mut attrs = BTreeMap::new();
        for (k, slot) in &self.attrs {
            let v = match slot {
                Slot::Const(v) => v.clone(),
                Slot::Param { param } => values
                    .get(*param)
                    .cloned()
                    .ok_or(AstError::Arity { expected: param + 1, found: values.len() })?,
            };
            attrs.insert(k.clone(), v);
        }
        let children = self.children.iter().map(|c| c.instantiate(values)).collect::<Result<_, _>>()?;
        Ok(AstNode { node_type: self.node_type.clone(), attrs, children })
    }

    /// Binds every parameter not listed in `keep` to its value in `values`
    /// and renumbers the kept ones `0..keep.len()` in order.
    pub fn bind_except(&self, values: &[Value], keep: &[usize]) -> Template {
        let mut t = self.clone();
        t.rebind(values, keep);
        t
    }

    fn rebind(&mut self, values: &[Value], keep: &[usize]) {
        for slot in self.attrs.values_mut() {
            if let Slot::Param { param } = *slot {
                *slot = match keep.iter().position(|&k| k == param) {
                    Some(pos) => Slot::Param { param: pos },
                    None => Slot::Const(values[param].clone()),
                };
            }
        }
        for c in &mut self.children {
            c.rebind(values, keep);
        }
    }
}
