//! Expression and JSON input for rational forms.
//!
//! Grammar (whitespace ignored, implicit multiplication by juxtaposition):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary | unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' ['-'] integer)?
//! atom   := number | 'i' | 'z' | '(' expr ')'
//! ```

use serde::{Deserialize, Serialize};

use super::{Polynomial, RationalForm};
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Z,
    I,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        let start = i;
        let tok = match ch {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'z' | b'Z' => Tok::Z,
            b'i' | b'I' | b'j' => Tok::I,
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        while k < bytes.len() && bytes[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let lit = &text[i..j];
                let v: f64 = lit.parse().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("malformed number '{lit}'"),
                })?;
                out.push((start, Tok::Num(v)));
                i = j;
                continue;
            }
            _ => {
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character '{}'", text[i..].chars().next().unwrap()),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

/// A rational function as an unreduced numerator/denominator pair.
#[derive(Clone, Debug)]
struct Rat {
    num: Polynomial,
    den: Polynomial,
}

impl Rat {
    fn poly(p: Polynomial) -> Self {
        Rat {
            num: p,
            den: Polynomial::constant(C64::new(1.0, 0.0)),
        }
    }

    fn add(&self, o: &Rat) -> Rat {
        if self.den == o.den {
            return Rat {
                num: self.num.add(&o.num),
                den: self.den.clone(),
            };
        }
        Rat {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
    }

    fn neg(&self) -> Rat {
        Rat {
            num: self.num.scale(C64::new(-1.0, 0.0)),
            den: self.den.clone(),
        }
    }

    fn mul(&self, o: &Rat) -> Rat {
        Rat {
            num: self.num.mul(&o.num),
            den: self.den.mul(&o.den),
        }
    }

    fn recip(&self, pos: usize) -> Result<Rat> {
        if self.num.is_zero() {
            return Err(Error::Syntax {
                pos,
                msg: "division by zero".into(),
            });
        }
        Ok(Rat {
            num: self.den.clone(),
            den: self.num.clone(),
        })
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Rat> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.add(&self.term()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Rat> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    let pos = self.pos();
                    acc = acc.mul(&self.unary()?.recip(pos)?);
                }
                Tok::Num(_) | Tok::Z | Tok::I | Tok::LParen => {
                    acc = acc.mul(&self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Rat> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Rat> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let pos = self.pos();
        let e = match self.bump() {
            Tok::Num(v) if v.fract() == 0.0 && (0.0..=64.0).contains(&v) => v as u32,
            _ => {
                return Err(Error::Syntax {
                    pos,
                    msg: "exponent must be an integer between 0 and 64".into(),
                })
            }
        };
        let raised = Rat {
            num: base.num.pow(e),
            den: base.den.pow(e),
        };
        if negative {
            raised.recip(pos)
        } else {
            Ok(raised)
        }
    }

    fn atom(&mut self) -> Result<Rat> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Rat::poly(Polynomial::constant(C64::new(v, 0.0))))
            }
            Tok::I => {
                self.bump();
                Ok(Rat::poly(Polynomial::constant(C64::new(0.0, 1.0))))
            }
            Tok::Z => {
                self.bump();
                Ok(Rat::poly(Polynomial::z()))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.err("expected ')'");
                }
                self.bump();
                Ok(inner)
            }
            Tok::End => self.err("unexpected end of input"),
            other => self.err(format!("unexpected token {other:?}")),
        }
    }
}

/// Parses an expression into an unreduced `(num, den)` pair.
pub fn parse_polynomial_pair(text: &str) -> Result<(Polynomial, Polynomial)> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
    };
    let r = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok((r.num, r.den))
}

/// Parses and analyzes a rational form in `z`.
pub fn parse_form(text: &str) -> Result<RationalForm> {
    let (num, den) = parse_polynomial_pair(text)?;
    if num.is_zero() {
        return Err(Error::InvalidInput("form is identically zero".into()));
    }
    if den.degree() == 0 {
        return Err(Error::InvalidInput("form has no poles".into()));
    }
    // Normalize so the denominator is monic before trimming and cancelling.
    let lead = den.leading();
    RationalForm::from_parts(num.scale(lead.inv()), den.scale(lead.inv()))
}

/// JSON input: ascending-degree coefficient lists as `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormInput {
    pub num: Vec<[f64; 2]>,
    pub den: Vec<[f64; 2]>,
}

impl FormInput {
    pub fn into_form(&self) -> Result<RationalForm> {
        let conv = |v: &[[f64; 2]]| Polynomial::new(v.iter().map(|c| C64::new(c[0], c[1])).collect());
        RationalForm::from_parts(conv(&self.num), conv(&self.den))
    }
}
