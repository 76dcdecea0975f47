//! Query emission: render an AST in a target dialect so that re-parsing
//! yields a structurally equal AST. Operator keywords are always emitted
//! lowercase (`or`, `and`), matching the published search strings.

use super::{Dialect, Field, QueryAst, QueryError, Result, TermNode};

/// Renders `ast` in `dialect`. USPTO supports claims terms only; passing
/// `retarget_title_to_claims` rewrites TI terms to CLM first (the toolkit
/// never silently re-targets).
pub fn emit_query(ast: &QueryAst, dialect: Dialect, retarget_title_to_claims: bool) -> Result<String> {
    match dialect {
        Dialect::Wos => emit_expr(ast, &wos_term, false),
        Dialect::Canonical => emit_expr(ast, &canonical_term, false),
        Dialect::Pubmed => emit_expr(ast, &pubmed_term, false),
        Dialect::Uspto => {
            let ast = if retarget_title_to_claims {
                ast.retarget_title_to_claims()
            } else {
                ast.clone()
            };
            let inner = emit_expr(&ast, &uspto_term, true)?;
            Ok(format!("ACLM/({inner})"))
        }
    }
}

/// Canonical text (WoS surface syntax over all four fields); recorded in
/// corpus provenance.
pub fn to_canonical_string(ast: &QueryAst) -> String {
    emit_expr(ast, &canonical_term, false).expect("canonical emission is total")
}

type TermEmitter = dyn Fn(&TermNode) -> Result<String>;

fn emit_expr(ast: &QueryAst, term: &TermEmitter, _top: bool) -> Result<String> {
    match ast {
        QueryAst::Term(t) => term(t),
        QueryAst::Or(children) => {
            let parts = children
                .iter()
                .map(|c| emit_child(c, ast, term))
                .collect::<Result<Vec<_>>>()?;
            Ok(parts.join(" or "))
        }
        QueryAst::And(children) => {
            let parts = children
                .iter()
                .map(|c| emit_child(c, ast, term))
                .collect::<Result<Vec<_>>>()?;
            Ok(parts.join(" and "))
        }
    }
}

/// Parenthesizes a child exactly when reparsing would otherwise change the
/// tree: any compound child of an `and`, and an `or` child of an `or`.
fn emit_child(child: &QueryAst, parent: &QueryAst, term: &TermEmitter) -> Result<String> {
    let needs_parens = matches!(
        (parent, child),
        (QueryAst::And(_), QueryAst::And(_) | QueryAst::Or(_)) | (QueryAst::Or(_), QueryAst::Or(_))
    );
    let text = emit_expr(child, term, false)?;
    Ok(if needs_parens { format!("({text})") } else { text })
}

fn quoted(t: &TermNode) -> String {
    if t.is_phrase {
        format!("\"{}\"", t.pattern)
    } else {
        t.pattern.clone()
    }
}

fn wos_term(t: &TermNode) -> Result<String> {
    match t.field {
        Field::Title | Field::Abstract => Ok(format!("{}={}", t.field, quoted(t))),
        field => Err(QueryError::UnsupportedField {
            field,
            dialect: Dialect::Wos,
        }),
    }
}

fn canonical_term(t: &TermNode) -> Result<String> {
    Ok(format!("{}={}", t.field, quoted(t)))
}

fn pubmed_term(t: &TermNode) -> Result<String> {
    let suffix = match t.field {
        Field::Title => "[Title]",
        Field::Abstract => "[Abstract]",
        Field::Mesh => "[MeSH]",
        Field::Claims => {
            return Err(QueryError::UnsupportedField {
                field: Field::Claims,
                dialect: Dialect::Pubmed,
            })
        }
    };
    Ok(format!("{}{suffix}", quoted(t)))
}

fn uspto_term(t: &TermNode) -> Result<String> {
    if t.field != Field::Claims {
        return Err(QueryError::UnsupportedField {
            field: t.field,
            dialect: Dialect::Uspto,
        });
    }
    let rendered = TermNode {
        field: t.field,
        pattern: t.pattern.replace('*', "$"),
        is_phrase: t.is_phrase,
    };
    Ok(quoted(&rendered))
}
