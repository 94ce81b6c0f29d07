//! Recursive-descent parser for the polynomial input language.
//!
//! Grammar (whitespace-insensitive, ASCII):
//!
//! ```text
//! expr     := ['+'|'-'] term (('+'|'-') term)*
//! term     := [rational ['*']] factor ('*' factor)*
//! factor   := variable | '[' expr ',' expr ']' | '(' expr ')'
//! variable := 'x' digits            (1-based index)
//! rational := digits ['/' digits]
//! ```
//!
//! Commutator brackets expand as `[a,b] = ab - ba`; products distribute and
//! are only defined for factors over disjoint variable sets. The literal `0`
//! is the one spelling of the zero polynomial.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::freealg::{MultilinearPoly, Permutation};
use crate::scalar::Scalar;

pub fn parse<S: Scalar>(text: &str) -> Result<MultilinearPoly<S>> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(Error::Syntax {
            pos: text.len(),
            message: "empty input".into(),
        });
    }
    // The zero polynomial is only the bare literal `0`.
    if let [(Token::Number(digits), _)] = tokens.as_slice()
        && digits.bytes().all(|b| b == b'0')
    {
        return Ok(MultilinearPoly::zero(0));
    }
    let mut parser = Parser {
        tokens: &tokens,
        position: 0,
        end: text.len(),
    };
    let expansion = parser.expr()?;
    if let Some((token, pos)) = parser.peek() {
        return Err(Error::Syntax {
            pos,
            message: format!("unexpected `{token}` after a complete expression"),
        });
    }
    finalize(expansion)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Var(usize),
    Number(String),
    Plus,
    Minus,
    Star,
    Slash,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Token::Var(i) => write!(f, "x{i}"),
            Token::Number(d) => write!(f, "{d}"),
            Token::Plus => write!(f, "+"),
            Token::Minus => write!(f, "-"),
            Token::Star => write!(f, "*"),
            Token::Slash => write!(f, "/"),
            Token::LBracket => write!(f, "["),
            Token::RBracket => write!(f, "]"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
            Token::Comma => write!(f, ","),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let b = bytes[pos];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => pos += 1,
            b'+' => {
                tokens.push((Token::Plus, pos));
                pos += 1;
            }
            b'-' => {
                tokens.push((Token::Minus, pos));
                pos += 1;
            }
            b'*' => {
                tokens.push((Token::Star, pos));
                pos += 1;
            }
            b'/' => {
                tokens.push((Token::Slash, pos));
                pos += 1;
            }
            b'[' => {
                tokens.push((Token::LBracket, pos));
                pos += 1;
            }
            b']' => {
                tokens.push((Token::RBracket, pos));
                pos += 1;
            }
            b'(' => {
                tokens.push((Token::LParen, pos));
                pos += 1;
            }
            b')' => {
                tokens.push((Token::RParen, pos));
                pos += 1;
            }
            b',' => {
                tokens.push((Token::Comma, pos));
                pos += 1;
            }
            b'x' => {
                let start = pos;
                pos += 1;
                let digits_start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if digits_start == pos {
                    return Err(Error::Syntax {
                        pos: start,
                        message: "expected digits after `x`".into(),
                    });
                }
                let index: usize = text[digits_start..pos].parse().map_err(|_| Error::Syntax {
                    pos: digits_start,
                    message: "variable index too large".into(),
                })?;
                if index == 0 {
                    return Err(Error::Syntax {
                        pos: start,
                        message: "variable indices are 1-based; `x0` is not a variable".into(),
                    });
                }
                tokens.push((Token::Var(index), start));
            }
            b'0'..=b'9' => {
                let start = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                tokens.push((Token::Number(text[start..pos].to_string()), start));
            }
            _ => {
                return Err(Error::Syntax {
                    pos,
                    message: format!("unexpected character `{}`", &text[pos..pos + 1]),
                });
            }
        }
    }
    Ok(tokens)
}

/// Intermediate expansion: a sum of words in distinct variables. Sub-terms of
/// a larger expression may cover only part of the final variable set; the
/// multilinearity check happens once the whole input is expanded.
struct Expansion<S> {
    words: BTreeMap<Vec<usize>, S>,
}

impl<S: Scalar> Expansion<S> {
    fn var(index: usize) -> Self {
        let mut words = BTreeMap::new();
        words.insert(vec![index], S::one());
        Expansion { words }
    }

    fn add_word(&mut self, word: Vec<usize>, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        match self.words.entry(word) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + coeff;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn merge(&mut self, other: Expansion<S>, negate: bool) {
        for (word, coeff) in other.words {
            self.add_word(word, if negate { -coeff } else { coeff });
        }
    }

    fn scale(self, factor: &S) -> Self {
        let mut out = Expansion {
            words: BTreeMap::new(),
        };
        for (word, coeff) in self.words {
            out.add_word(word, coeff * factor.clone());
        }
        out
    }

    fn mul(self, other: Expansion<S>) -> Result<Self> {
        let mut out = Expansion {
            words: BTreeMap::new(),
        };
        for (left, cl) in &self.words {
            for (right, cr) in &other.words {
                if let Some(&dup) = right.iter().find(|v| left.contains(*v)) {
                    return Err(Error::NotMultilinear(format!(
                        "variable x{dup} appears twice in a product"
                    )));
                }
                let mut word = Vec::with_capacity(left.len() + right.len());
                word.extend_from_slice(left);
                word.extend_from_slice(right);
                out.add_word(word, cl.clone() * cr.clone());
            }
        }
        Ok(out)
    }

    fn commutator(self, other: Expansion<S>) -> Result<Self> {
        let mut forward = Expansion {
            words: self.words.clone(),
        }
        .mul(Expansion {
            words: other.words.clone(),
        })?;
        let backward = other.mul(self)?;
        forward.merge(backward, true);
        Ok(forward)
    }
}

struct Parser<'t> {
    tokens: &'t [(Token, usize)],
    position: usize,
    end: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<(&'t Token, usize)> {
        self.tokens.get(self.position).map(|(t, p)| (t, *p))
    }

    fn advance(&mut self) -> Option<(&'t Token, usize)> {
        let item = self.peek();
        if item.is_some() {
            self.position += 1;
        }
        item
    }

    fn error_here(&self, message: impl Into<String>) -> Error {
        let pos = self.peek().map(|(_, p)| p).unwrap_or(self.end);
        Error::Syntax {
            pos,
            message: message.into(),
        }
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<()> {
        match self.peek() {
            Some((t, _)) if *t == token => {
                self.position += 1;
                Ok(())
            }
            _ => Err(self.error_here(format!("expected {what}"))),
        }
    }

    fn expr<S: Scalar>(&mut self) -> Result<Expansion<S>> {
        let mut negate = false;
        if let Some((Token::Plus | Token::Minus, _)) = self.peek() {
            negate = matches!(self.advance(), Some((Token::Minus, _)));
        }
        let first = self.term()?;
        let mut acc = Expansion {
            words: BTreeMap::new(),
        };
        acc.merge(first, negate);
        while let Some((token, _)) = self.peek() {
            let negate = match token {
                Token::Plus => false,
                Token::Minus => true,
                _ => break,
            };
            self.position += 1;
            let term = self.term()?;
            acc.merge(term, negate);
        }
        Ok(acc)
    }

    fn term<S: Scalar>(&mut self) -> Result<Expansion<S>> {
        let coefficient = if matches!(self.peek(), Some((Token::Number(_), _))) {
            let value = self.rational::<S>()?;
            // A `*` between the coefficient and the first factor is optional.
            if matches!(self.peek(), Some((Token::Star, _))) {
                self.position += 1;
            }
            Some(value)
        } else {
            None
        };
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some((Token::Star, _))) {
            self.position += 1;
            let factor = self.factor()?;
            acc = acc.mul(factor)?;
        }
        match coefficient {
            Some(value) => Ok(acc.scale(&value)),
            None => Ok(acc),
        }
    }

    fn rational<S: Scalar>(&mut self) -> Result<S> {
        let numerator = self.number::<S>()?;
        if matches!(self.peek(), Some((Token::Slash, _))) {
            let (_, slash_pos) = self.advance().expect("peeked");
            let denominator = self.number::<S>()?;
            if denominator.is_zero() {
                return Err(Error::Syntax {
                    pos: slash_pos,
                    message: "zero denominator in coefficient".into(),
                });
            }
            Ok(numerator / denominator)
        } else {
            Ok(numerator)
        }
    }

    fn number<S: Scalar>(&mut self) -> Result<S> {
        match self.peek() {
            Some((Token::Number(digits), pos)) => {
                self.position += 1;
                digits.parse().map_err(|_| Error::Syntax {
                    pos,
                    message: format!("cannot represent `{digits}` in the coefficient field"),
                })
            }
            _ => Err(self.error_here("expected a number")),
        }
    }

    fn factor<S: Scalar>(&mut self) -> Result<Expansion<S>> {
        match self.peek() {
            Some((Token::Var(index), _)) => {
                let index = *index;
                self.position += 1;
                Ok(Expansion::var(index))
            }
            Some((Token::LBracket, _)) => {
                self.position += 1;
                let left = self.expr()?;
                self.expect(Token::Comma, "`,` between commutator arguments")?;
                let right = self.expr()?;
                self.expect(Token::RBracket, "closing `]`")?;
                left.commutator(right)
            }
            Some((Token::LParen, _)) => {
                self.position += 1;
                let inner = self.expr()?;
                self.expect(Token::RParen, "closing `)`")?;
                Ok(inner)
            }
            _ => Err(self.error_here("expected a variable, `[` or `(`")),
        }
    }
}

fn finalize<S: Scalar>(expansion: Expansion<S>) -> Result<MultilinearPoly<S>> {
    if expansion.words.is_empty() {
        return Err(Error::EmptyPolynomial);
    }
    let arity = expansion
        .words
        .keys()
        .flat_map(|w| w.iter().copied())
        .max()
        .expect("nonempty");
    let mut terms = Vec::with_capacity(expansion.words.len());
    for (word, coeff) in expansion.words {
        let mut sorted = word.clone();
        sorted.sort_unstable();
        if sorted.len() != arity || sorted.iter().enumerate().any(|(k, &v)| v != k + 1) {
            let missing = (1..=arity)
                .find(|v| !sorted.contains(v))
                .expect("some variable is missing from a short word");
            let rendered: Vec<String> = word.iter().map(|v| format!("x{v}")).collect();
            return Err(Error::NotMultilinear(format!(
                "monomial {} is missing x{missing} (arity {arity})",
                rendered.join("*")
            )));
        }
        let perm = Permutation::from_images(&word)?;
        terms.push((perm, coeff));
    }
    MultilinearPoly::from_terms(arity, terms)
}
