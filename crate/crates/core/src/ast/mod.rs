//! Query syntax trees: parsing, CNF canonicalization, unparsing, path
//! addressing and subtree substitution.

mod canonical;
mod catalog;
mod lexer;
mod node;
mod parser;
mod template;
mod unparse;

use std::sync::OnceLock;

use thiserror::Error;

pub use canonical::canonicalize;
pub use catalog::{NodeCatalog, PrimitiveKind, VALUE_ATTR};
pub use node::{AstNode, DiffPath, Value};
pub use parser::{parse_raw, SELECT_SLOTS};
pub use template::{Slot, Template};
pub use unparse::{unparse, unparse_fragment};

pub const SQL_SUBSET: &str = "sql-subset";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AstError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("empty query text")]
    EmptySource,
    #[error("unknown dialect '{0}'")]
    UnknownDialect(String),
    #[error("malformed {node_type} at '{path}': {reason}")]
    MalformedTree { node_type: String, path: DiffPath, reason: String },
    #[error("path '{path}' not found (resolved up to '{resolved}')")]
    PathNotFound { path: DiffPath, resolved: DiffPath },
    #[error("cannot delete '{0}': parent is not a list node")]
    IllegalDeletion(DiffPath),
    #[error("type clash at '{path}': list expects {expected}, got {found}")]
    TypeClash { path: DiffPath, expected: String, found: String },
    #[error("bad path '{0}'")]
    BadPath(String),
    #[error("template expects at least {expected} values, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("catalog: {0}")]
    Catalog(String),
}

/// A pluggable query language: parser, canonicalizer, unparser and catalog.
pub trait LanguageDriver: Send + Sync {
    fn id(&self) -> &'static str;
    fn catalog(&self) -> &NodeCatalog;
    fn parse(&self, source: &str) -> Result<AstNode, AstError>;
    fn canonicalize(&self, ast: &AstNode) -> AstNode;
    fn unparse(&self, ast: &AstNode) -> Result<String, AstError>;
}

struct SqlSubset;

impl LanguageDriver for SqlSubset {
    fn id(&self) -> &'static str {
        SQL_SUBSET
    }

    fn catalog(&self) -> &NodeCatalog {
        sql_catalog()
    }

    fn parse(&self, source: &str) -> Result<AstNode, AstError> {
        parse_raw(source)
    }

    fn canonicalize(&self, ast: &AstNode) -> AstNode {
        canonicalize(ast)
    }

    fn unparse(&self, ast: &AstNode) -> Result<String, AstError> {
        unparse(ast, sql_catalog())
    }
}

pub fn sql_catalog() -> &'static NodeCatalog {
    static CATALOG: OnceLock<NodeCatalog> = OnceLock::new();
    CATALOG.get_or_init(|| {
        NodeCatalog::from_json(include_str!("../../resources/sql-subset.catalog.json"))
            .expect("shipped catalog manifest is valid")
    })
}

pub fn driver(dialect: &str) -> Result<&'static dyn LanguageDriver, AstError> {
    static SQL: SqlSubset = SqlSubset;
    match dialect {
        SQL_SUBSET => Ok(&SQL),
        other => Err(AstError::UnknownDialect(other.to_string())),
    }
}

/// Parse and canonicalize.
pub fn parse_query(source: &str, dialect: &str) -> Result<AstNode, AstError> {
    let d = driver(dialect)?;
    Ok(d.canonicalize(&d.parse(source)?))
}

fn check_element(catalog: &NodeCatalog, parent: &AstNode, path: &DiffPath, tau: &AstNode) -> Result<(), AstError> {
    if let Some(elem) = catalog.list_element(&parent.node_type) {
        if tau.node_type != elem {
            return Err(AstError::TypeClash {
                path: path.clone(),
                expected: elem.to_string(),
                found: tau.node_type.clone(),
            });
        }
    }
    Ok(())
}

fn split(path: &DiffPath) -> Option<(DiffPath, usize)> {
    Some((path.parent()?, path.last()?))
}

/// In-place forms of the interaction primitive; the pure wrappers below
/// clone first.
pub mod edit {
    use super::*;

    pub fn replace(ast: &mut AstNode, path: &DiffPath, tau: AstNode, catalog: &NodeCatalog) -> Result<(), AstError> {
        if let Some((parent_path, _)) = split(path) {
            check_element(catalog, ast.subtree_at(&parent_path)?, path, &tau)?;
        }
        *ast.subtree_at_mut(path)? = tau;
        Ok(())
    }

    pub fn delete(ast: &mut AstNode, path: &DiffPath, catalog: &NodeCatalog) -> Result<(), AstError> {
        let (parent_path, i) = split(path).ok_or_else(|| AstError::IllegalDeletion(path.clone()))?;
        ast.subtree_at(path)?;
        let parent = ast.subtree_at_mut(&parent_path)?;
        if !catalog.is_list(&parent.node_type) {
            return Err(AstError::IllegalDeletion(path.clone()));
        }
        parent.children.remove(i);
        Ok(())
    }

    pub fn insert(ast: &mut AstNode, path: &DiffPath, tau: AstNode, catalog: &NodeCatalog) -> Result<(), AstError> {
        let (parent_path, i) = split(path).ok_or_else(|| AstError::IllegalDeletion(path.clone()))?;
        let parent = ast.subtree_at_mut(&parent_path)?;
        if !catalog.is_list(&parent.node_type) {
            return Err(AstError::IllegalDeletion(path.clone()));
        }
        check_element(catalog, parent, path, &tau)?;
        if i > parent.children.len() {
            return Err(AstError::PathNotFound { path: path.clone(), resolved: parent_path });
        }
        parent.children.insert(i, tau);
        Ok(())
    }
}

/// t_π: replaces the subtree at `path` with `tau`, or deletes it when `tau`
/// is absent. The input tree is untouched.
pub fn substitute(
    ast: &AstNode,
    path: &DiffPath,
    tau: Option<&AstNode>,
    catalog: &NodeCatalog,
) -> Result<AstNode, AstError> {
    let mut out = ast.clone();
    match tau {
        Some(t) => edit::replace(&mut out, path, t.clone(), catalog)?,
        None => edit::delete(&mut out, path, catalog)?,
    }
    Ok(out)
}

/// Inserts `tau` so that it ends up at `path` (index may equal the list length).
pub fn insert(ast: &AstNode, path: &DiffPath, tau: &AstNode, catalog: &NodeCatalog) -> Result<AstNode, AstError> {
    let mut out = ast.clone();
    edit::insert(&mut out, path, tau.clone(), catalog)?;
    Ok(out)
}
