use thiserror::Error;

use crate::pilang::{is_transitive, Statement};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliqueError {
    #[error("statement {0} is not transitive; clique detection would be unsound")]
    NonTransitiveStatement(String),
}

/// Clique detection for a transitive statement: each program is compared
/// with one representative (the first member) of every clique found so far
/// and joins the first clique that matches, or founds a new one. `matches`
/// is the symmetric pair relation; it is called at most `members.len()`
/// times the number of cliques.
pub fn clique_detect<T: Copy>(
    stmt: &Statement,
    members: &[T],
    mut matches: impl FnMut(T, T) -> bool,
) -> Result<Vec<Vec<T>>, CliqueError> {
    if !is_transitive(stmt) {
        return Err(CliqueError::NonTransitiveStatement(stmt.name.clone()));
    }
    let mut cliques: Vec<Vec<T>> = Vec::new();
    for &p in members {
        match cliques.iter_mut().find(|c| matches(c[0], p)) {
            Some(c) => c.push(p),
            None => cliques.push(vec![p]),
        }
    }
    Ok(cliques)
}
