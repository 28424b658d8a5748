use std::collections::HashSet;

use super::lexer::{tokenize, Position, Token, TokenKind};
use super::{Aggregation, ClauseSpec, DslError, Rule, RuleBase, VariableKind, VariableSpec};
use crate::dimension::Dimension;
use crate::fuzzy::{FuzzyError, LinguisticVariable, Term, Trapezoid, Universe};

type PResult<T> = Result<T, DslError>;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Variables,
    Rules,
    Both,
}

struct RawClause {
    variable: String,
    variable_pos: Position,
    term: String,
    term_pos: Position,
}

struct RawRule {
    id: String,
    antecedent: Vec<RawClause>,
    consequent: RawClause,
}

struct Parser {
    tokens: Vec<Token>,
    idx: usize,
}

fn syntax(tok: &Token, expected: impl Into<String>) -> DslError {
    DslError::Syntax {
        pos: tok.pos,
        expected: expected.into(),
        found: tok.kind.describe(),
    }
}

impl Parser {
    fn new(text: &str) -> PResult<Self> {
        let tokens = tokenize(text).map_err(|e| DslError::Syntax {
            pos: e.pos,
            expected: "a token".into(),
            found: format!("character `{}`", e.found.escape_debug()),
        })?;
        Ok(Self { tokens, idx: 0 })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.idx]
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.idx].clone();
        if !matches!(tok.kind, TokenKind::Eof) {
            self.idx += 1;
        }
        tok
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek().kind, TokenKind::Newline) {
            self.bump();
        }
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Position> {
        if self.peek_keyword(kw) {
            Ok(self.bump().pos)
        } else {
            Err(syntax(self.peek(), format!("`{kw}`")))
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Position> {
        if self.peek().kind == kind {
            Ok(self.bump().pos)
        } else {
            Err(syntax(self.peek(), kind.describe()))
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<(String, Position)> {
        match &self.peek().kind {
            TokenKind::Ident(s) => {
                let s = s.clone();
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            _ => Err(syntax(self.peek(), what)),
        }
    }

    fn expect_number(&mut self) -> PResult<f64> {
        match self.peek().kind {
            TokenKind::Number(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(syntax(self.peek(), "a number")),
        }
    }

    fn document(&mut self, section: Section) -> PResult<(Vec<VariableSpec>, Vec<RawRule>)> {
        let mut vars: Vec<VariableSpec> = Vec::new();
        let mut rules = Vec::new();
        loop {
            self.skip_newlines();
            let tok = self.peek().clone();
            if matches!(tok.kind, TokenKind::Eof) {
                break;
            }
            let wants_vars = section != Section::Rules;
            let wants_rules = section != Section::Variables;
            if wants_vars && (self.peek_keyword("input") || self.peek_keyword("output")) {
                let spec = self.variable_decl()?;
                if vars.iter().any(|v| v.name() == spec.name()) {
                    return Err(DslError::DuplicateVariable {
                        pos: tok.pos,
                        name: spec.name().to_string(),
                    });
                }
                vars.push(spec);
            } else if wants_rules && self.peek_keyword("rule") {
                rules.push(self.rule()?);
            } else {
                let expected = match section {
                    Section::Variables => "`input` or `output`",
                    Section::Rules => "`RULE`",
                    Section::Both => "`input`, `output` or `RULE`",
                };
                return Err(syntax(&tok, expected));
            }
        }
        Ok((vars, rules))
    }

    fn variable_decl(&mut self) -> PResult<VariableSpec> {
        let (kw, _) = self.expect_ident("`input` or `output`")?;
        let kind = if kw.eq_ignore_ascii_case("input") {
            VariableKind::Input
        } else {
            VariableKind::Output
        };
        let (name, name_pos) = self.expect_ident("a variable name")?;

        let mut dimension = None;
        let mut universe = None;
        let mut aggregation = Aggregation::Sum;
        let mut max_expected = None;
        loop {
            self.skip_newlines();
            if self.peek().kind == TokenKind::LBrace {
                break;
            }
            let key_tok = self.peek().clone();
            let (key, _) = self.expect_ident("an attribute or `{`")?;
            self.expect(TokenKind::Equals)?;
            match key.to_ascii_lowercase().as_str() {
                "dim" => {
                    let value_tok = self.peek().clone();
                    let (value, _) = self.expect_ident("a dimension name")?;
                    dimension = Some(value.parse::<Dimension>().map_err(|_| {
                        syntax(
                            &value_tok,
                            "one of `processing`, `perception`, `entrance`, `understanding`",
                        )
                    })?);
                }
                "universe" => {
                    let open = self.expect(TokenKind::LBracket)?;
                    let lo = self.expect_number()?;
                    self.expect(TokenKind::Comma)?;
                    let hi = self.expect_number()?;
                    self.expect(TokenKind::RBracket)?;
                    universe = Some(Universe::new(lo, hi).map_err(|_| DslError::Range {
                        pos: open,
                        message: format!("universe [{lo}, {hi}] must satisfy lo < hi"),
                    })?);
                }
                "agg" => {
                    let value_tok = self.peek().clone();
                    let (value, _) = self.expect_ident("`sum`, `mean` or `max`")?;
                    aggregation = value
                        .parse()
                        .map_err(|_| syntax(&value_tok, "`sum`, `mean` or `max`"))?;
                }
                "max_expected" => {
                    let value_pos = self.peek().pos;
                    let value = self.expect_number()?;
                    if value <= 0.0 {
                        return Err(DslError::Range {
                            pos: value_pos,
                            message: format!("max_expected must be positive, got {value}"),
                        });
                    }
                    max_expected = Some(value);
                }
                _ => return Err(syntax(&key_tok, "one of `dim`, `universe`, `agg`, `max_expected`")),
            }
        }
        let brace = self.peek().clone();
        let dimension = dimension.ok_or_else(|| syntax(&brace, "a `dim=` attribute"))?;
        let universe = universe.ok_or_else(|| syntax(&brace, "a `universe=` attribute"))?;
        self.expect(TokenKind::LBrace)?;

        let mut terms = Vec::new();
        loop {
            self.skip_newlines();
            if self.peek().kind == TokenKind::RBrace {
                self.bump();
                break;
            }
            let (label, label_pos) = self.expect_ident("a term label or `}`")?;
            self.expect(TokenKind::Equals)?;
            self.expect(TokenKind::LParen)?;
            let a = self.expect_number()?;
            self.expect(TokenKind::Comma)?;
            let b = self.expect_number()?;
            self.expect(TokenKind::Comma)?;
            let c = self.expect_number()?;
            self.expect(TokenKind::Comma)?;
            let d = self.expect_number()?;
            self.expect(TokenKind::RParen)?;
            let shape = Trapezoid::new(a, b, c, d).map_err(|_| DslError::Range {
                pos: label_pos,
                message: format!("term `{label}` = ({a}, {b}, {c}, {d}) violates a <= b <= c <= d"),
            })?;
            if a < universe.lo() || d > universe.hi() {
                return Err(DslError::Range {
                    pos: label_pos,
                    message: format!(
                        "term `{label}` = ({a}, {b}, {c}, {d}) leaves the universe [{}, {}]",
                        universe.lo(),
                        universe.hi()
                    ),
                });
            }
            if terms.iter().any(|t: &Term| t.label == label) {
                return Err(DslError::Range {
                    pos: label_pos,
                    message: format!("term `{label}` is declared twice"),
                });
            }
            terms.push(Term { label, shape });
        }
        let variable = LinguisticVariable::new(name.clone(), universe, terms).map_err(|e| {
            let message = match e {
                FuzzyError::NoTerms(_) => format!("variable `{name}` declares no terms"),
                other => other.to_string(),
            };
            DslError::Range { pos: name_pos, message }
        })?;
        Ok(VariableSpec {
            kind,
            dimension,
            aggregation,
            max_expected,
            variable,
        })
    }

    fn clause(&mut self) -> PResult<RawClause> {
        let (variable, variable_pos) = self.expect_ident("a variable name")?;
        self.expect_keyword("is")?;
        let (term, term_pos) = self.expect_ident("a term label")?;
        Ok(RawClause {
            variable,
            variable_pos,
            term,
            term_pos,
        })
    }

    fn rule(&mut self) -> PResult<RawRule> {
        self.expect_keyword("rule")?;
        let (id, _) = self.expect_ident("a rule id")?;
        self.expect(TokenKind::Colon)?;
        self.expect_keyword("if")?;
        let mut antecedent = vec![self.clause()?];
        while self.peek_keyword("and") {
            self.bump();
            antecedent.push(self.clause()?);
        }
        self.expect_keyword("then")?;
        let consequent = self.clause()?;
        match self.peek().kind {
            TokenKind::Newline | TokenKind::Eof => {}
            _ => return Err(syntax(self.peek(), "end of line")),
        }
        Ok(RawRule {
            id,
            antecedent,
            consequent,
        })
    }
}

fn lookup<'v>(vars: &'v [VariableSpec], clause: &RawClause, kind: VariableKind) -> PResult<&'v VariableSpec> {
    let spec = vars
        .iter()
        .find(|v| v.name() == clause.variable)
        .ok_or_else(|| DslError::UnknownVariable {
            pos: clause.variable_pos,
            name: clause.variable.clone(),
        })?;
    if spec.kind != kind {
        return Err(DslError::WrongKind {
            pos: clause.variable_pos,
            variable: clause.variable.clone(),
            expected: kind,
        });
    }
    if spec.variable().term(&clause.term).is_none() {
        return Err(DslError::UnknownTerm {
            pos: clause.term_pos,
            variable: clause.variable.clone(),
            term: clause.term.clone(),
        });
    }
    Ok(spec)
}

fn resolve(raw: Vec<RawRule>, vars: &[VariableSpec]) -> PResult<Vec<Rule>> {
    raw.into_iter()
        .map(|r| {
            let mut seen = HashSet::new();
            for clause in &r.antecedent {
                lookup(vars, clause, VariableKind::Input)?;
                if !seen.insert(clause.variable.as_str()) {
                    return Err(DslError::DuplicateClauseVariable {
                        pos: clause.variable_pos,
                        rule: r.id.clone(),
                        variable: clause.variable.clone(),
                    });
                }
            }
            let out = lookup(vars, &r.consequent, VariableKind::Output)?;
            Ok(Rule {
                id: r.id,
                dimension: out.dimension,
                antecedent: r
                    .antecedent
                    .into_iter()
                    .map(|c| ClauseSpec::new(c.variable, c.term))
                    .collect(),
                consequent: ClauseSpec::new(r.consequent.variable, r.consequent.term),
            })
        })
        .collect()
}

/// Parses a variables document into specs, in file order.
pub fn parse_variables(text: &str) -> Result<Vec<VariableSpec>, DslError> {
    let (vars, _) = Parser::new(text)?.document(Section::Variables)?;
    Ok(vars)
}

/// Parses a rules document against already-parsed variables.
pub fn parse_rules(text: &str, vars: &[VariableSpec]) -> Result<Vec<Rule>, DslError> {
    let (_, raw) = Parser::new(text)?.document(Section::Rules)?;
    resolve(raw, vars)
}

/// Parses a single document holding both declarations and rules, such as
/// the output of [`super::pretty_print`].
pub fn parse_rule_base(text: &str) -> Result<RuleBase, DslError> {
    let (variables, raw) = Parser::new(text)?.document(Section::Both)?;
    let rules = resolve(raw, &variables)?;
    Ok(RuleBase { variables, rules })
}
