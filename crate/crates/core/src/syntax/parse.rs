use super::{Formula, LogicSpec, Signature, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    True,
    False,
    Known,
    Rem,
    Forg,
    Erase,
    Ident(String),
    Nom(String),
    Tilde,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Lt,
    Gt,
    LtLt,
    GtGt,
    LBr,
    RBr,
    LBrBr,
    RBrBr,
    At,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Nom(s) => format!("nominal `'{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("{other:?}"),
        }
    }
}

fn syntax(position: usize, expected: impl Into<String>) -> SyntaxError {
    SyntaxError::Syntax { position, expected: expected.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let rest = &bytes[i..];
        let (tok, len) = if rest.starts_with(b"<->") {
            (Tok::DArrow, 3)
        } else if rest.starts_with(b"->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with(b"<<") {
            (Tok::LtLt, 2)
        } else if rest.starts_with(b">>") {
            (Tok::GtGt, 2)
        } else if rest.starts_with(b"[[") {
            (Tok::LBrBr, 2)
        } else if rest.starts_with(b"]]") {
            (Tok::RBrBr, 2)
        } else {
            match c {
                b'~' => (Tok::Tilde, 1),
                b'&' => (Tok::Amp, 1),
                b'|' => (Tok::Bar, 1),
                b'<' => (Tok::Lt, 1),
                b'>' => (Tok::Gt, 1),
                b'[' => (Tok::LBr, 1),
                b']' => (Tok::RBr, 1),
                b'@' => (Tok::At, 1),
                b'(' => (Tok::LParen, 1),
                b')' => (Tok::RParen, 1),
                b'\'' => {
                    let len = ident_len(&bytes[i + 1..]);
                    if len == 0 {
                        return Err(syntax(i + 1, "nominal name after `'`"));
                    }
                    let name = &text[i + 1..i + 1 + len];
                    (Tok::Nom(name.to_string()), len + 1)
                }
                c if c.is_ascii_alphabetic() => {
                    let len = ident_len(rest);
                    let word = &text[i..i + len];
                    let tok = match word {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        "known" => Tok::Known,
                        "rem" => Tok::Rem,
                        "forg" => Tok::Forg,
                        "erase" => Tok::Erase,
                        _ => Tok::Ident(word.to_string()),
                    };
                    (tok, len)
                }
                _ => return Err(syntax(i, "a formula token")),
            }
        };
        out.push((tok, start));
        i += len;
    }
    out.push((Tok::Eof, bytes.len()));
    Ok(out)
}

fn ident_len(bytes: &[u8]) -> usize {
    match bytes.first() {
        Some(c) if c.is_ascii_alphabetic() => {
            1 + bytes[1..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == b'_').count()
        }
        _ => 0,
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("{what}, found {}", self.peek().describe())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            other => Err(syntax(self.offset(), format!("{what}, found {}", other.describe()))),
        }
    }

    fn iff(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.implies()?;
        while *self.peek() == Tok::DArrow {
            self.bump();
            let rhs = self.implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        let at = self.offset();
        match self.bump() {
            Tok::Tilde => Ok(Formula::not(self.unary()?)),
            Tok::Lt => {
                let rel = self.ident("relation name")?;
                self.expect(Tok::Gt, "`>`")?;
                Ok(Formula::diamond(rel, self.unary()?))
            }
            Tok::LBr => {
                let rel = self.ident("relation name")?;
                self.expect(Tok::RBr, "`]`")?;
                Ok(Formula::boxed(rel, self.unary()?))
            }
            Tok::LtLt => {
                let rel = self.ident("relation name")?;
                self.expect(Tok::GtGt, "`>>`")?;
                Ok(Formula::ddiamond(rel, self.unary()?))
            }
            Tok::LBrBr => {
                let rel = self.ident("relation name")?;
                self.expect(Tok::RBrBr, "`]]`")?;
                Ok(Formula::dbox(rel, self.unary()?))
            }
            Tok::At => {
                let nom = self.ident("nominal name after `@`")?;
                Ok(Formula::at(nom, self.unary()?))
            }
            Tok::Rem => Ok(Formula::remember(self.unary()?)),
            Tok::Forg => Ok(Formula::forget(self.unary()?)),
            Tok::Erase => Ok(Formula::erase(self.unary()?)),
            Tok::True => Ok(Formula::True),
            Tok::False => Ok(Formula::False),
            Tok::Known => Ok(Formula::Known),
            Tok::Ident(p) => Ok(Formula::Prop(p)),
            Tok::Nom(i) => Ok(Formula::Nom(i)),
            Tok::LParen => {
                let inner = self.iff()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            other => Err(syntax(at, format!("a formula, found {}", other.describe()))),
        }
    }
}

/// Parses `text` without checking names or operators.
pub fn parse_formula_unchecked(text: &str) -> Result<Formula, SyntaxError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0 };
    let f = parser.iff()?;
    if *parser.peek() != Tok::Eof {
        return Err(syntax(parser.offset(), format!("end of input, found {}", parser.peek().describe())));
    }
    Ok(f)
}

/// Parses `text` and validates the result against `sig` and `spec`.
pub fn parse_formula(text: &str, sig: &Signature, spec: &LogicSpec) -> Result<Formula, SyntaxError> {
    let f = parse_formula_unchecked(text)?;
    f.validate(sig, spec)?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{is_ident, print_formula, NameKind, Operator};

    fn sig() -> Signature {
        Signature::new(["p", "q", "r_prop"], ["r1", "r"], ["i1", "i"]).unwrap()
    }

    #[test]
    fn base_case() {
        let f = parse_formula("<r1>true", &sig(), &LogicSpec::bml()).unwrap();
        assert_eq!(f, Formula::diamond("r1", Formula::True));
    }

    #[test]
    fn endpoint_formula() {
        let f = parse_formula("<r1>true -> <r1>[r1]false", &sig(), &LogicSpec::bml()).unwrap();
        let psi = Formula::implies(
            Formula::diamond("r1", Formula::True),
            Formula::diamond("r1", Formula::boxed("r1", Formula::False)),
        );
        assert_eq!(f, psi);
        assert_eq!(print_formula(&psi), "<r1>true -> <r1>[r1]false");
    }

    #[test]
    fn memory_formula() {
        let spec = LogicSpec::by_name("ml-diamond").unwrap();
        let f = parse_formula("rem <r1> ~known", &sig(), &spec).unwrap();
        assert_eq!(f, Formula::remember(Formula::diamond("r1", Formula::not(Formula::Known))));
        assert_eq!(parse_formula(&print_formula(&f), &sig(), &spec).unwrap(), f);
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse_formula_unchecked("p & q | ~p -> q -> p <-> q").unwrap();
        let expected = Formula::iff(
            Formula::implies(
                Formula::or(Formula::and(Formula::prop("p"), Formula::prop("q")), Formula::not(Formula::prop("p"))),
                Formula::implies(Formula::prop("q"), Formula::prop("p")),
            ),
            Formula::prop("q"),
        );
        assert_eq!(f, expected);
        let f = parse_formula_unchecked("<r>p & q").unwrap();
        assert_eq!(f, Formula::and(Formula::diamond("r", Formula::prop("p")), Formula::prop("q")));
        let f = parse_formula_unchecked("@i p & 'i").unwrap();
        assert_eq!(f, Formula::and(Formula::at("i", Formula::prop("p")), Formula::nom("i")));
    }

    #[test]
    fn double_modalities_and_comments() {
        let f = parse_formula_unchecked("<<r>>[[r]]known # trailing\n").unwrap();
        assert_eq!(f, Formula::ddiamond("r", Formula::dbox("r", Formula::Known)));
        let f = parse_formula_unchecked("<r><<r>>p").unwrap();
        assert_eq!(f, Formula::diamond("r", Formula::ddiamond("r", Formula::prop("p"))));
    }

    #[test]
    fn positioned_errors() {
        match parse_formula_unchecked("p & ") {
            Err(SyntaxError::Syntax { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
        match parse_formula_unchecked("(p") {
            Err(SyntaxError::Syntax { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
        match parse_formula_unchecked("p $ q") {
            Err(SyntaxError::Syntax { position, .. }) => assert_eq!(position, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula_unchecked("").is_err());
        assert!(parse_formula_unchecked("p q").is_err());
        assert!(parse_formula_unchecked("<r p").is_err());
    }

    #[test]
    fn name_and_dialect_errors() {
        let err = parse_formula("<s>p", &sig(), &LogicSpec::bml()).unwrap_err();
        assert_eq!(err, SyntaxError::UnknownName { name: "s".into(), kind: NameKind::Rel });
        let err = parse_formula("rem p", &sig(), &LogicSpec::bml()).unwrap_err();
        assert_eq!(err, SyntaxError::OperatorNotInDialect(Operator::Remember));
        let err = parse_formula("'j", &sig(), &LogicSpec::by_name("hl").unwrap()).unwrap_err();
        assert_eq!(err, SyntaxError::UnknownName { name: "j".into(), kind: NameKind::Nom });
    }

    #[test]
    fn identifiers() {
        assert_eq!(parse_formula_unchecked("rem1").unwrap(), Formula::prop("rem1"));
        assert_eq!(parse_formula_unchecked("a_b9").unwrap(), Formula::prop("a_b9"));
        assert!(is_ident("a_b9"));
        assert!(!is_ident("_a"));
    }
}
