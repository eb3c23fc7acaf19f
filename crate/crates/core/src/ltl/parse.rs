//! Surface syntax for LTL₋ₓ formulas.
//!
//! Grammar (highest binding first): `!`, `G`/`[]`, `F`/`<>` > `U` > `&&` >
//! `||` > `->`, with `U` and `->` right-associative. `X` is recognized and
//! rejected with a dedicated error, since the crate's semantics are only
//! sound for stutter-invariant formulas.

use super::Formula;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected character {ch:?} at byte {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token {tok:?} at byte {pos}")]
    UnexpectedToken { tok: String, pos: usize },
    #[error("the next operator X (at byte {pos}) is not part of LTL without next")]
    NextOperator { pos: usize },
    #[error("unbalanced parenthesis at byte {pos}")]
    Unbalanced { pos: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Until,
    Next,
    Always,
    Eventually,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            '!' => {
                toks.push((Tok::Not, i));
                i += 1;
            }
            '&' => {
                toks.push((Tok::And, i));
                i += if bytes.get(i + 1) == Some(&b'&') { 2 } else { 1 };
            }
            '|' => {
                toks.push((Tok::Or, i));
                i += if bytes.get(i + 1) == Some(&b'|') { 2 } else { 1 };
            }
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Implies, i));
                    i += 2;
                } else {
                    return Err(ParseError::UnexpectedChar { ch: '-', pos: i });
                }
            }
            '[' => {
                if bytes.get(i + 1) == Some(&b']') {
                    toks.push((Tok::Always, i));
                    i += 2;
                } else {
                    return Err(ParseError::UnexpectedChar { ch: '[', pos: i });
                }
            }
            '<' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Eventually, i));
                    i += 2;
                } else {
                    return Err(ParseError::UnexpectedChar { ch: '<', pos: i });
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &src[start..i];
                let tok = match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "G" => Tok::Always,
                    "F" => Tok::Eventually,
                    "U" => Tok::Until,
                    "X" => Tok::Next,
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push((tok, start));
            }
            other => return Err(ParseError::UnexpectedChar { ch: other, pos: i }),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek().map(|(tok, _)| tok) == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // implies := or ('->' implies)?
    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implies()?;
            // a -> b desugars on the spot.
            return Ok(Formula::or(Formula::not(lhs), rhs));
        }
        Ok(lhs)
    }

    // or := and ('||' and)*
    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    // and := until ('&&' until)*
    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until()?;
        while self.eat(&Tok::And) {
            let rhs = self.until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    // until := unary ('U' until)?   (right-associative)
    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.eat(&Tok::Until) {
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.bump() {
            Some((Tok::Not, _)) => Ok(Formula::not(self.unary()?)),
            Some((Tok::Always, _)) => Ok(Formula::always(self.unary()?)),
            Some((Tok::Eventually, _)) => Ok(Formula::eventually(self.unary()?)),
            Some((Tok::Next, pos)) => Err(ParseError::NextOperator { pos }),
            Some((Tok::True, _)) => Ok(Formula::True),
            Some((Tok::False, _)) => Ok(Formula::False),
            Some((Tok::Ident(name), _)) => Ok(Formula::Prop(name)),
            Some((Tok::LParen, pos)) => {
                let inner = self.implies()?;
                if !self.eat(&Tok::RParen) {
                    return Err(ParseError::Unbalanced { pos });
                }
                Ok(inner)
            }
            Some((tok, pos)) => Err(ParseError::UnexpectedToken {
                tok: format!("{tok:?}"),
                pos,
            }),
            None => Err(ParseError::UnexpectedEnd),
        }
    }
}

/// Parses a formula from its surface syntax.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.implies()?;
    if let Some((tok, pos)) = p.peek() {
        return Err(ParseError::UnexpectedToken {
            tok: format!("{tok:?}"),
            pos: *pos,
        });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::Formula as F;

    #[test]
    fn parses_mission_formula() {
        let f = parse_formula("G !pi3 && G F ((pi1 && pi4 && pi6) && F (pi2 && pi5))").unwrap();
        let expected = F::and(
            F::always(F::not(F::prop("pi3"))),
            F::always(F::eventually(F::and(
                F::and(F::and(F::prop("pi1"), F::prop("pi4")), F::prop("pi6")),
                F::eventually(F::and(F::prop("pi2"), F::prop("pi5"))),
            ))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn ascii_spellings_match_letter_spellings() {
        assert_eq!(
            parse_formula("[] a").unwrap(),
            parse_formula("G a").unwrap()
        );
        assert_eq!(
            parse_formula("<> a").unwrap(),
            parse_formula("F a").unwrap()
        );
        assert_eq!(
            parse_formula("a & b | c").unwrap(),
            parse_formula("a && b || c").unwrap()
        );
    }

    #[test]
    fn precedence_unary_over_until_over_and_over_or_over_implies() {
        // G a U b  ==  (G a) U b
        assert_eq!(
            parse_formula("G a U b").unwrap(),
            F::until(F::always(F::prop("a")), F::prop("b"))
        );
        // a U b && c  ==  (a U b) && c
        assert_eq!(
            parse_formula("a U b && c").unwrap(),
            F::and(F::until(F::prop("a"), F::prop("b")), F::prop("c"))
        );
        // a && b || c  ==  (a && b) || c
        assert_eq!(
            parse_formula("a && b || c").unwrap(),
            F::or(F::and(F::prop("a"), F::prop("b")), F::prop("c"))
        );
        // a || b -> c  ==  (a || b) -> c, desugared
        assert_eq!(
            parse_formula("a || b -> c").unwrap(),
            F::or(F::not(F::or(F::prop("a"), F::prop("b"))), F::prop("c"))
        );
    }

    #[test]
    fn until_is_right_associative() {
        assert_eq!(
            parse_formula("a U b U c").unwrap(),
            F::until(F::prop("a"), F::until(F::prop("b"), F::prop("c")))
        );
    }

    #[test]
    fn rejects_next_operator_with_position() {
        match parse_formula("G (a && X b)") {
            Err(ParseError::NextOperator { pos }) => assert_eq!(pos, 8),
            other => panic!("expected NextOperator error, got {other:?}"),
        }
    }

    #[test]
    fn x_as_identifier_prefix_is_a_proposition() {
        assert_eq!(parse_formula("Xray").unwrap(), F::prop("Xray"));
    }

    #[test]
    fn rejects_trailing_garbage_and_bad_chars() {
        assert!(matches!(
            parse_formula("a b"),
            Err(ParseError::UnexpectedToken { .. })
        ));
        assert!(matches!(
            parse_formula("a + b"),
            Err(ParseError::UnexpectedChar { ch: '+', .. })
        ));
        assert!(matches!(
            parse_formula("(a"),
            Err(ParseError::Unbalanced { .. })
        ));
        assert!(matches!(parse_formula(""), Err(ParseError::UnexpectedEnd)));
    }
}
