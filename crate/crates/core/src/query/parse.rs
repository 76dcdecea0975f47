//! Recursive-descent parser for the four query dialects.
//!
//! `and` binds tighter than `or`; parentheses override; operator keywords
//! are case-insensitive. Field syntax is per dialect: WoS `TI=term`,
//! PubMed `term[Title]`, USPTO a single `ACLM/(...)` wrapper with `$`
//! wildcards. The canonical dialect is the WoS surface syntax extended
//! with the CLM and MH fields.

use super::{Dialect, Field, QueryAst, QueryError, Result, TermNode};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eq,
    Slash,
}

struct Lexed {
    tok: Tok,
    /// 1-based character offset of the token start.
    pos: usize,
}

fn err(pos: usize, message: impl Into<String>) -> QueryError {
    QueryError::Parse {
        position: pos,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Lexed>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let pos = i + 1;
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push(Lexed { tok: Tok::LParen, pos });
                i += 1;
            }
            ')' => {
                out.push(Lexed { tok: Tok::RParen, pos });
                i += 1;
            }
            '[' => {
                out.push(Lexed { tok: Tok::LBracket, pos });
                i += 1;
            }
            ']' => {
                out.push(Lexed { tok: Tok::RBracket, pos });
                i += 1;
            }
            '=' => {
                out.push(Lexed { tok: Tok::Eq, pos });
                i += 1;
            }
            '/' => {
                out.push(Lexed { tok: Tok::Slash, pos });
                i += 1;
            }
            '"' => {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j] != '"' {
                    j += 1;
                }
                if j == chars.len() {
                    return Err(err(pos, "unterminated quote"));
                }
                out.push(Lexed {
                    tok: Tok::Quoted(chars[start..j].iter().collect()),
                    pos,
                });
                i = j + 1;
            }
            c if is_word_char(c) => {
                let start = i;
                while i < chars.len() && is_word_char(chars[i]) {
                    i += 1;
                }
                out.push(Lexed {
                    tok: Tok::Word(chars[start..i].iter().collect()),
                    pos: start + 1,
                });
            }
            other => return Err(err(pos, format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '*' || c == '-' || c == '$' || c == '\''
}

struct Parser {
    toks: Vec<Lexed>,
    cursor: usize,
    dialect: Dialect,
    end_pos: usize,
}

pub fn parse_query(text: &str, dialect: Dialect) -> Result<QueryAst> {
    if text.trim().is_empty() {
        return Err(err(1, "empty query"));
    }
    let toks = lex(text)?;
    let end_pos = text.chars().count() + 1;
    let mut parser = Parser {
        toks,
        cursor: 0,
        dialect,
        end_pos,
    };
    let ast = if dialect == Dialect::Uspto {
        parser.parse_uspto_wrapper()?
    } else {
        parser.parse_or()?
    };
    if let Some(stray) = parser.peek() {
        return Err(err(stray.pos, "unexpected trailing input"));
    }
    Ok(ast)
}

impl Parser {
    fn peek(&self) -> Option<&Lexed> {
        self.toks.get(self.cursor)
    }

    fn next(&mut self) -> Option<&Lexed> {
        let item = self.toks.get(self.cursor);
        if item.is_some() {
            self.cursor += 1;
        }
        item
    }

    fn pos(&self) -> usize {
        self.peek().map(|l| l.pos).unwrap_or(self.end_pos)
    }

    fn keyword(&self) -> Option<&'static str> {
        match self.peek() {
            Some(Lexed { tok: Tok::Word(w), .. }) => {
                if w.eq_ignore_ascii_case("or") {
                    Some("or")
                } else if w.eq_ignore_ascii_case("and") {
                    Some("and")
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn parse_or(&mut self) -> Result<QueryAst> {
        let mut children = vec![self.parse_and()?];
        while self.keyword() == Some("or") {
            self.next();
            children.push(self.parse_and()?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            QueryAst::Or(children)
        })
    }

    fn parse_and(&mut self) -> Result<QueryAst> {
        let mut children = vec![self.parse_atom()?];
        while self.keyword() == Some("and") {
            self.next();
            children.push(self.parse_atom()?);
        }
        Ok(if children.len() == 1 {
            children.pop().unwrap()
        } else {
            QueryAst::And(children)
        })
    }

    fn parse_atom(&mut self) -> Result<QueryAst> {
        match self.peek().map(|l| (l.tok.clone(), l.pos)) {
            Some((Tok::LParen, open_pos)) => {
                self.next();
                let inner = self.parse_or()?;
                match self.next().map(|l| l.tok.clone()) {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(err(open_pos, "unbalanced parenthesis")),
                }
            }
            Some(_) => self.parse_term(),
            None => Err(err(self.end_pos, "expected a term")),
        }
    }

    fn parse_term(&mut self) -> Result<QueryAst> {
        match self.dialect {
            Dialect::Wos | Dialect::Canonical => self.parse_fielded_term(),
            Dialect::Pubmed => self.parse_pubmed_term(),
            Dialect::Uspto => self.parse_bare_term(Field::Claims),
        }
    }

    /// `FIELD=value` with optional whitespace around `=`.
    fn parse_fielded_term(&mut self) -> Result<QueryAst> {
        let (name, name_pos) = match self.next().map(|l| (l.tok.clone(), l.pos)) {
            Some((Tok::Word(w), p)) => (w, p),
            Some((_, p)) => return Err(err(p, "expected a field name")),
            None => return Err(err(self.end_pos, "expected a field name")),
        };
        let field = self.lookup_field(&name, name_pos)?;
        match self.next().map(|l| (l.tok.clone(), l.pos)) {
            Some((Tok::Eq, _)) => {}
            Some((_, p)) => return Err(err(p, format!("expected '=' after {name}"))),
            None => return Err(err(self.end_pos, format!("expected '=' after {name}"))),
        }
        self.parse_value(field)
    }

    fn lookup_field(&self, name: &str, pos: usize) -> Result<Field> {
        let field = match name.to_ascii_uppercase().as_str() {
            "TI" => Field::Title,
            "AB" => Field::Abstract,
            "CLM" => Field::Claims,
            "MH" => Field::Mesh,
            _ => return Err(err(pos, format!("unknown field {name}"))),
        };
        let allowed = match self.dialect {
            Dialect::Wos => matches!(field, Field::Title | Field::Abstract),
            Dialect::Canonical => true,
            _ => unreachable!("fielded terms only lex in wos/canonical"),
        };
        if allowed {
            Ok(field)
        } else {
            Err(err(pos, format!("field {name} not available in {} dialect", self.dialect)))
        }
    }

    /// `value[Title]` with optional whitespace before the bracket.
    fn parse_pubmed_term(&mut self) -> Result<QueryAst> {
        let (pattern, is_phrase, pos) = self.take_value()?;
        match self.next().map(|l| (l.tok.clone(), l.pos)) {
            Some((Tok::LBracket, _)) => {}
            Some((_, p)) => return Err(err(p, "expected [field] after term")),
            None => return Err(err(self.end_pos, "expected [field] after term")),
        }
        let (name, name_pos) = match self.next().map(|l| (l.tok.clone(), l.pos)) {
            Some((Tok::Word(w), p)) => (w, p),
            Some((_, p)) => return Err(err(p, "expected a field name inside brackets")),
            None => return Err(err(self.end_pos, "expected a field name inside brackets")),
        };
        let field = match name.to_ascii_lowercase().as_str() {
            "title" => Field::Title,
            "abstract" => Field::Abstract,
            "mesh" => Field::Mesh,
            _ => return Err(err(name_pos, format!("unknown field [{name}]"))),
        };
        match self.next().map(|l| (l.tok.clone(), l.pos)) {
            Some((Tok::RBracket, _)) => {}
            Some((_, p)) => return Err(err(p, "expected ']'")),
            None => return Err(err(self.end_pos, "expected ']'")),
        }
        self.build_term(field, pattern, is_phrase, pos)
    }

    fn parse_bare_term(&mut self, field: Field) -> Result<QueryAst> {
        let (pattern, is_phrase, pos) = self.take_value()?;
        self.build_term(field, pattern, is_phrase, pos)
    }

    fn parse_value(&mut self, field: Field) -> Result<QueryAst> {
        let (pattern, is_phrase, pos) = self.take_value()?;
        self.build_term(field, pattern, is_phrase, pos)
    }

    fn take_value(&mut self) -> Result<(String, bool, usize)> {
        match self.next().map(|l| (l.tok.clone(), l.pos)) {
            Some((Tok::Word(w), p)) => {
                if w.eq_ignore_ascii_case("or") || w.eq_ignore_ascii_case("and") {
                    Err(err(p, "expected a term, found an operator"))
                } else {
                    Ok((w, false, p))
                }
            }
            Some((Tok::Quoted(q), p)) => Ok((q, true, p)),
            Some((_, p)) => Err(err(p, "expected a term")),
            None => Err(err(self.end_pos, "expected a term")),
        }
    }

    fn build_term(
        &self,
        field: Field,
        raw_pattern: String,
        is_phrase: bool,
        pos: usize,
    ) -> Result<QueryAst> {
        if raw_pattern.trim().is_empty() {
            return Err(err(pos, "empty term"));
        }
        // USPTO writes the wildcard as `$`; the AST stores `*`.
        let pattern = if self.dialect == Dialect::Uspto {
            raw_pattern.replace('$', "*")
        } else {
            raw_pattern
        };
        Ok(QueryAst::Term(TermNode {
            field,
            pattern,
            is_phrase,
        }))
    }

    /// The whole USPTO query is `ACLM/( expr )`.
    fn parse_uspto_wrapper(&mut self) -> Result<QueryAst> {
        let (name, name_pos) = match self.next().map(|l| (l.tok.clone(), l.pos)) {
            Some((Tok::Word(w), p)) => (w, p),
            Some((_, p)) => return Err(err(p, "expected ACLM/(...) wrapper")),
            None => return Err(err(self.end_pos, "expected ACLM/(...) wrapper")),
        };
        if !name.eq_ignore_ascii_case("ACLM") {
            return Err(err(
                name_pos,
                format!("USPTO queries search claims only; field {name} is not supported"),
            ));
        }
        match self.next().map(|l| (l.tok.clone(), l.pos)) {
            Some((Tok::Slash, _)) => {}
            Some((_, p)) => return Err(err(p, "expected '/' after ACLM")),
            None => return Err(err(self.end_pos, "expected '/' after ACLM")),
        }
        let open_pos = self.pos();
        match self.next().map(|l| l.tok.clone()) {
            Some(Tok::LParen) => {}
            _ => return Err(err(open_pos, "expected '(' after ACLM/")),
        }
        let inner = self.parse_or()?;
        match self.next().map(|l| (l.tok.clone(), l.pos)) {
            Some((Tok::RParen, _)) => Ok(inner),
            _ => Err(err(open_pos, "unbalanced parenthesis")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wos_or_chain_flattens() {
        let ast = parse_query("TI=siRNA or TI=RNAi", Dialect::Wos).unwrap();
        assert_eq!(
            ast,
            QueryAst::Or(vec![
                QueryAst::term(Field::Title, "siRNA"),
                QueryAst::term(Field::Title, "RNAi"),
            ])
        );
    }

    #[test]
    fn pubmed_phrase_term() {
        let ast = parse_query(
            "TPMT[Title] or \"Thiopurine Methyltransferase\"[Title]",
            Dialect::Pubmed,
        )
        .unwrap();
        assert_eq!(
            ast,
            QueryAst::Or(vec![
                QueryAst::term(Field::Title, "TPMT"),
                QueryAst::phrase(Field::Title, "Thiopurine Methyltransferase"),
            ])
        );
    }

    #[test]
    fn dangling_paren_errors_at_offset_4() {
        let e = parse_query("TI=(", Dialect::Wos).unwrap_err();
        assert_eq!(e, QueryError::Parse { position: 4, message: "expected a term".into() });
    }

    #[test]
    fn unbalanced_parens_rejected() {
        let e = parse_query("(TI=a or TI=b", Dialect::Wos).unwrap_err();
        assert!(matches!(e, QueryError::Parse { position: 1, .. }));
    }

    #[test]
    fn and_binds_tighter_than_or() {
        let ast = parse_query("TI=a or TI=b and TI=c", Dialect::Canonical).unwrap();
        assert_eq!(
            ast,
            QueryAst::Or(vec![
                QueryAst::term(Field::Title, "a"),
                QueryAst::And(vec![
                    QueryAst::term(Field::Title, "b"),
                    QueryAst::term(Field::Title, "c"),
                ]),
            ])
        );
    }

    #[test]
    fn operators_are_case_insensitive() {
        let a = parse_query("TI=a OR TI=b AND TI=c", Dialect::Wos).unwrap();
        let b = parse_query("TI=a or TI=b and TI=c", Dialect::Wos).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn uspto_wrapper_maps_dollar_wildcards() {
        let ast = parse_query("ACLM/(test$ or \"Human Papillomavirus$\")", Dialect::Uspto).unwrap();
        assert_eq!(
            ast,
            QueryAst::Or(vec![
                QueryAst::term(Field::Claims, "test*"),
                QueryAst::phrase(Field::Claims, "Human Papillomavirus*"),
            ])
        );
    }

    #[test]
    fn uspto_rejects_other_fields() {
        let e = parse_query("TTL/(test)", Dialect::Uspto).unwrap_err();
        assert!(matches!(e, QueryError::Parse { position: 1, .. }));
    }

    #[test]
    fn wos_rejects_claims_field() {
        assert!(parse_query("CLM=test", Dialect::Wos).is_err());
        assert!(parse_query("CLM=test", Dialect::Canonical).is_ok());
    }

    #[test]
    fn space_after_equals_is_tolerated() {
        let ast = parse_query("TI= \"Thiopurine Methyltransferase\"", Dialect::Wos).unwrap();
        assert_eq!(ast, QueryAst::phrase(Field::Title, "Thiopurine Methyltransferase"));
    }

    #[test]
    fn empty_query_is_an_error() {
        assert!(parse_query("   ", Dialect::Wos).is_err());
    }
}
