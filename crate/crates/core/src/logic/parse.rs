//! Recursive-descent parser for the surface formula grammar.
//!
//! Precedence from loosest to tightest: `<->`, `->` (right associative),
//! `|`, `&`, then `!`, quantifiers and `==`. A quantifier body extends as far
//! right as possible.

use super::alphabet::{is_identifier, Alphabet};
use super::check::well_sorted;
use super::syntax::{Formula, Literal, SecondOrderTerm, Term, Variable};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Colon,
    Dot,
    Bang,
    Bar,
    Amp,
    Arrow,
    Iff,
    Eq,
    EqEq,
}

fn describe(t: Option<&Tok>) -> String {
    match t {
        None => "end of input".into(),
        Some(Tok::Ident(s)) => format!("`{s}`"),
        Some(t) => {
            let s = match t {
                Tok::LParen => "(",
                Tok::RParen => ")",
                Tok::Comma => ",",
                Tok::Colon => ":",
                Tok::Dot => ".",
                Tok::Bang => "!",
                Tok::Bar => "|",
                Tok::Amp => "&",
                Tok::Arrow => "->",
                Tok::Iff => "<->",
                Tok::Eq => "=",
                Tok::EqEq => "==",
                Tok::Ident(_) => unreachable!(),
            };
            format!("`{s}`")
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let word = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let single = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b':' => Some(Tok::Colon),
            b'.' => Some(Tok::Dot),
            b'!' => Some(Tok::Bang),
            b'|' => Some(Tok::Bar),
            b'&' => Some(Tok::Amp),
            _ => None,
        };
        if let Some(t) = single {
            out.push((start, t));
            i += 1;
        } else if b == b'-' && bytes.get(i + 1) == Some(&b'>') {
            out.push((start, Tok::Arrow));
            i += 2;
        } else if text[i..].starts_with("<->") {
            out.push((start, Tok::Iff));
            i += 3;
        } else if b == b'=' {
            if bytes.get(i + 1) == Some(&b'=') {
                out.push((start, Tok::EqEq));
                i += 2;
            } else {
                out.push((start, Tok::Eq));
                i += 1;
            }
        } else if word(b) {
            while i < bytes.len()
                && (word(bytes[i]) || (bytes[i] == b'-' && bytes.get(i + 1).copied().is_some_and(word)))
            {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else {
            return Err(Error::Parse {
                position: start,
                message: format!("unexpected character `{}`", text[i..].chars().next().unwrap()),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    alphabet: &'a Alphabet,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { position: self.offset(), message: message.into() })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", describe(Some(&t)), describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            other => self.error(format!("expected identifier, found {}", describe(other))),
        }
    }

    fn iff(&mut self) -> Result<Formula> {
        let mut left = self.implication()?;
        while self.eat(&Tok::Iff) {
            let right = self.implication()?;
            left = Formula::iff(left, right);
        }
        Ok(left)
    }

    fn implication(&mut self) -> Result<Formula> {
        let left = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            let right = self.implication()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut left = self.conjunction()?;
        while self.eat(&Tok::Bar) {
            let right = self.conjunction()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut left = self.unary()?;
        while self.eat(&Tok::Amp) {
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat(&Tok::Bang) {
            return Ok(Formula::not(self.unary()?));
        }
        match self.peek() {
            Some(Tok::Ident(k)) if k == "exists" || k == "forall" => {
                let universal = k == "forall";
                self.pos += 1;
                self.quantifier(universal)
            }
            _ => self.second_order_equality(),
        }
    }

    fn quantifier(&mut self, universal: bool) -> Result<Formula> {
        let name = self.ident()?;
        if !is_identifier(&name) {
            return self.error(format!("`{name}` cannot be bound"));
        }
        let first_order = if self.eat(&Tok::Colon) {
            let sort = self.sort()?;
            Some(Variable::new(name.clone(), sort))
        } else {
            None
        };
        self.expect(Tok::Dot)?;
        let body = self.iff()?;
        Ok(match (first_order, universal) {
            (Some(v), false) => Formula::exists(v, body),
            (Some(v), true) => Formula::forall(v, body),
            (None, false) => Formula::exists_so(name, body),
            (None, true) => Formula::forall_so(name, body),
        })
    }

    fn second_order_equality(&mut self) -> Result<Formula> {
        let start = self.offset();
        let left = self.primary()?;
        if self.peek() != Some(&Tok::EqEq) {
            return Ok(left);
        }
        self.pos += 1;
        let left = match left {
            Formula::Lit(l) => SecondOrderTerm::Lit(l),
            Formula::SoVar(x) => SecondOrderTerm::Var(x),
            _ => {
                return Err(Error::Parse {
                    position: start,
                    message: "left side of `==` must be a literal or a second-order variable".into(),
                })
            }
        };
        let right = self.second_order_term()?;
        Ok(Formula::SoEq(left, right))
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Ident(k)) if k == "true" => {
                self.pos += 1;
                Ok(Formula::top(self.alphabet))
            }
            Some(Tok::Ident(k)) if k == "false" => {
                self.pos += 1;
                Ok(Formula::bottom(self.alphabet))
            }
            Some(Tok::Ident(name)) => {
                if self.peek_at(1) == Some(&Tok::LParen) && self.alphabet.relation(&name).is_some() {
                    self.pos += 1;
                    let args = self.list(Self::second_order_term)?;
                    return Ok(Formula::SoAtom { rel: name, args });
                }
                if let Some(l) = self.try_literal()? {
                    return Ok(Formula::Lit(l));
                }
                self.pos += 1;
                Ok(Formula::SoVar(name))
            }
            other => self.error(format!("expected a formula, found {}", describe(other.as_ref()))),
        }
    }

    /// Parses a first-order atom if the next tokens start one: a predicate
    /// application, a bare nullary predicate, or an equality whose left side
    /// is an annotated term or a known constant.
    fn try_literal(&mut self) -> Result<Option<Literal>> {
        let Some(Tok::Ident(name)) = self.peek().cloned() else {
            return Ok(None);
        };
        let next = self.peek_at(1).cloned();
        if next == Some(Tok::LParen) {
            let Some(decl) = self.alphabet.predicate(&name) else {
                return self.error(format!("unknown symbol `{name}`"));
            };
            let expected = decl.arg_sorts.clone();
            self.pos += 1;
            self.expect(Tok::LParen)?;
            let mut args = Vec::new();
            if !self.eat(&Tok::RParen) {
                loop {
                    let hint = expected.get(args.len()).map(String::as_str);
                    args.push(self.term(hint)?);
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
            }
            return Ok(Some(Literal::pred(name, args)));
        }
        if next == Some(Tok::Colon) || !self.alphabet.sorts_of_constant(&name).is_empty() {
            let left = self.term(None)?;
            self.expect(Tok::Eq)?;
            let right = self.term(Some(left.sort()))?;
            return Ok(Some(Literal::eq(left, right)));
        }
        if let Some(decl) = self.alphabet.predicate(&name) {
            if decl.arg_sorts.is_empty() {
                self.pos += 1;
                return Ok(Some(Literal::pred(name, vec![])));
            }
        }
        Ok(None)
    }

    fn second_order_term(&mut self) -> Result<SecondOrderTerm> {
        if self.eat(&Tok::Bang) {
            let l = self.literal_operand()?;
            return Ok(SecondOrderTerm::Lit(l.negate()));
        }
        if self.peek() == Some(&Tok::LParen) {
            return Ok(SecondOrderTerm::Lit(self.literal_operand()?));
        }
        if let Some(l) = self.try_literal()? {
            return Ok(SecondOrderTerm::Lit(l));
        }
        let name = self.ident()?;
        if !is_identifier(&name) {
            return self.error(format!("`{name}` is not a variable name"));
        }
        Ok(SecondOrderTerm::Var(name))
    }

    fn literal_operand(&mut self) -> Result<Literal> {
        if self.eat(&Tok::LParen) {
            let l = if self.eat(&Tok::Bang) { self.literal_operand()?.negate() } else { self.literal_operand()? };
            self.expect(Tok::RParen)?;
            return Ok(l);
        }
        match self.try_literal()? {
            Some(l) => Ok(l),
            None => self.error(format!("expected a first-order literal, found {}", describe(self.peek()))),
        }
    }

    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(&Tok::RParen) {
                return Ok(out);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn sort(&mut self) -> Result<String> {
        let sort = self.ident()?;
        if !self.alphabet.has_sort(&sort) {
            self.pos -= 1;
            return self.error(format!("unknown sort `{sort}`"));
        }
        Ok(sort)
    }

    /// `name:sort` is a constant when the sort declares `name`, otherwise a
    /// variable. A bare name must be a constant; its sort is the expected one
    /// when that sort declares it, else the first sort declaring it.
    fn term(&mut self, expected: Option<&str>) -> Result<Term> {
        let name = self.ident()?;
        if KEYWORD_TERMS.contains(&name.as_str()) {
            self.pos -= 1;
            return self.error(format!("`{name}` is a keyword"));
        }
        if self.eat(&Tok::Colon) {
            let sort = self.sort()?;
            return Ok(if self.alphabet.is_constant(&sort, &name) {
                Term::constant(name, sort)
            } else {
                Term::var(name, sort)
            });
        }
        let sorts = self.alphabet.sorts_of_constant(&name);
        let sort = match expected {
            Some(s) if sorts.contains(&s) => Some(s),
            _ => sorts.first().copied(),
        };
        match sort {
            Some(s) => Ok(Term::constant(name.clone(), s)),
            None => {
                self.pos -= 1;
                self.error(format!("unknown symbol `{name}` (variables need a sort annotation)"))
            }
        }
    }
}

const KEYWORD_TERMS: [&str; 4] = super::alphabet::KEYWORDS;

/// Parses without sort checking.
pub fn parse_unchecked(text: &str, alphabet: &Alphabet) -> Result<Formula> {
    let mut p = Parser { toks: tokenize(text)?, pos: 0, end: text.len(), alphabet };
    let f = p.iff()?;
    if p.pos != p.toks.len() {
        return p.error(format!("unexpected {}", describe(p.peek())));
    }
    Ok(f)
}

/// Parses and sort-checks a formula.
pub fn parse_formula(text: &str, alphabet: &Alphabet) -> Result<Formula> {
    let f = parse_unchecked(text, alphabet)?;
    let verdict = well_sorted(&f, alphabet);
    if !verdict.is_ok() {
        return Err(Error::IllSorted(verdict.to_string()));
    }
    Ok(f)
}

/// Parses a single first-order literal, e.g. a graph vertex.
pub fn parse_literal(text: &str, alphabet: &Alphabet) -> Result<Literal> {
    match parse_formula(text, alphabet)? {
        Formula::Lit(l) => Ok(l),
        other => Err(Error::Parse { position: 0, message: format!("`{other}` is not a literal") }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn parses_ground_literal() {
        let a = fixtures::plant_alphabet();
        let f = parse_formula("Hold(F, No)", &a).unwrap();
        let expected = Literal::pred("Hold", vec![Term::constant("F", "comp"), Term::constant("No", "state")]);
        assert_eq!(f, Formula::Lit(expected));
    }

    #[test]
    fn parses_negated_self_equality() {
        let a = fixtures::plant_alphabet();
        let f = parse_formula("!(x:comp = x:comp)", &a).unwrap();
        let x = Term::var("x", "comp");
        assert_eq!(f, Formula::Lit(Literal::eq(x.clone(), x).negate()));
    }

    #[test]
    fn parses_second_order_existential() {
        let a = fixtures::plant_alphabet();
        let f = parse_formula("exists X. Action(X, Open(F), Hold(F,High))", &a).unwrap();
        let open = Literal::pred("Open", vec![Term::constant("F", "comp")]);
        let hold = Literal::pred("Hold", vec![Term::constant("F", "comp"), Term::constant("High", "state")]);
        let expected = Formula::exists_so(
            "X",
            Formula::so_atom(
                "Action",
                vec![SecondOrderTerm::Var("X".into()), SecondOrderTerm::Lit(open), SecondOrderTerm::Lit(hold)],
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn hyphenated_relation_names() {
        let a = fixtures::plant_alphabet();
        let f = parse_formula("Cause-Effect(Hold(F, High), Hold(P, High))", &a).unwrap();
        assert!(matches!(f, Formula::SoAtom { ref rel, .. } if rel == "Cause-Effect"));
    }

    #[test]
    fn macros_expand() {
        let a = fixtures::plant_alphabet();
        let and = parse_formula("Open(F) & Open(P)", &a).unwrap();
        let open = |c: &str| Formula::Lit(Literal::pred("Open", vec![Term::constant(c, "comp")]));
        assert_eq!(and, Formula::and(open("F"), open("P")));
        let imp = parse_formula("Open(F) -> Open(P)", &a).unwrap();
        assert_eq!(imp, Formula::implies(open("F"), open("P")));
        let t = parse_formula("true", &a).unwrap();
        assert_eq!(t, Formula::top(&a));
        assert_eq!(t.to_string(), "!!(!(F = F) | !!(F = F))");
        let all = parse_formula("forall x:comp . Open(x:comp)", &a).unwrap();
        assert_eq!(
            all,
            Formula::forall(Variable::new("x", "comp"), Formula::Lit(Literal::pred("Open", vec![Term::var("x", "comp")])))
        );
    }

    #[test]
    fn second_order_equality_and_negative_operands() {
        let a = fixtures::plant_alphabet();
        let f = parse_formula("X == Hold(F, No)", &a).unwrap();
        assert!(matches!(f, Formula::SoEq(SecondOrderTerm::Var(_), SecondOrderTerm::Lit(_))));
        let g = parse_formula("(!Open(F)) == X", &a).unwrap();
        assert_eq!(g.to_string(), "(!Open(F)) == X");
        let h = parse_formula("!Open(F) == X", &a).unwrap();
        assert!(matches!(h, Formula::Not(_)));
    }

    #[test]
    fn reports_errors_with_positions() {
        let a = fixtures::plant_alphabet();
        match parse_formula("Hold(F, No) | ", &a) {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 14),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_formula("Heat(F)", &a), Err(Error::Parse { .. })));
        assert!(matches!(parse_formula("Open(y)", &a), Err(Error::Parse { .. })));
        assert!(matches!(parse_formula("Hold(No, F)", &a), Err(Error::IllSorted(_))));
        assert!(matches!(parse_formula("Open(F) $", &a), Err(Error::Parse { position: 8, .. })));
    }

    #[test]
    fn printing_round_trips() {
        let a = fixtures::plant_alphabet();
        for text in [
            "Hold(F, No)",
            "!(x:comp = x:comp)",
            "exists X . Action(X, Open(F), Hold(F, High))",
            "p | q",
            "forall X . forall Y . forall Z . (Action(X, Y, Z) -> (X == Hold(F, No) & Y == Open(F) & Z == Hold(F, High) & X & Y & Z))",
            "(exists x:comp . Open(x:comp)) | !!Open(P)",
            "Open(F) <-> !Open(P)",
        ] {
            let Ok(f) = parse_unchecked(text, &a) else { continue };
            let printed = f.to_string();
            let again = parse_unchecked(&printed, &a).unwrap();
            assert_eq!(f, again, "{text} -> {printed}");
            assert_eq!(again.to_string(), printed);
        }
    }
}
