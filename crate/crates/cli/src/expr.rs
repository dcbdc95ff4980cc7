//! Expression strings for time profiles, parsed straight into [`TrigPoly`].
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' INT)?
//! primary := NUMBER | 'pi' | '(' expr ')' | ('sin' | 'cos') '(' [INT ['*']] 't' ')'
//! ```
//!
//! Division is only by constants, so every expression stays a finite
//! trigonometric polynomial: `0.5 + cos(t)^2`, `1 - 0.3*sin(2t)`.

use torsolv_core::trig::TrigPoly;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("column {column}: {message}")]
pub struct ExprError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent only when followed by a digit, so `2t` stays two tokens
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| ExprError { column: col, message: format!("bad number `{text}`") })?;
            out.push((Tok::Num(v), col));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), col));
            i += 1;
        } else {
            return Err(ExprError { column: col, message: format!("unexpected character `{c}`") });
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

impl Lexer {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError { column: self.column(), message: message.into() })
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected `{op}`"))
        }
    }

    fn expr(&mut self) -> Result<TrigPoly, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Op('-') => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<TrigPoly, ExprError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Op('/') => {
                    self.bump();
                    let col = self.column();
                    let d = self.unary()?;
                    if d.degree() != 0 || d.constant == 0.0 {
                        return Err(ExprError { column: col, message: "can only divide by a nonzero constant".into() });
                    }
                    acc = acc.scale(1.0 / d.constant);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<TrigPoly, ExprError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(-&self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<TrigPoly, ExprError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Op('^') {
            return Ok(base);
        }
        self.bump();
        match self.bump() {
            Tok::Num(e) if e >= 0.0 && e.fract() == 0.0 && e <= 64.0 => Ok(base.powi(e as u32)),
            _ => {
                self.pos -= 1;
                self.fail("exponent must be an integer between 0 and 64")
            }
        }
    }

    fn primary(&mut self) -> Result<TrigPoly, ExprError> {
        let col = self.column();
        match self.bump() {
            Tok::Num(v) => Ok(TrigPoly::constant(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "pi" => Ok(TrigPoly::constant(std::f64::consts::PI)),
                "sin" | "cos" => {
                    self.expect('(')?;
                    let k = self.harmonic()?;
                    self.expect(')')?;
                    Ok(if name == "sin" { TrigPoly::sin_k(k, 1.0) } else { TrigPoly::cos_k(k, 1.0) })
                }
                "t" => Err(ExprError { column: col, message: "`t` may only appear inside sin(...) or cos(...)".into() }),
                _ => Err(ExprError { column: col, message: format!("unknown name `{name}`") }),
            },
            Tok::End => Err(ExprError { column: col, message: "unexpected end of expression".into() }),
            Tok::Op(c) => Err(ExprError { column: col, message: format!("unexpected `{c}`") }),
        }
    }

    /// `t`, `k t`, `kt` or `k*t` with a non-negative integer `k`.
    fn harmonic(&mut self) -> Result<usize, ExprError> {
        let mut k = 1usize;
        if let Tok::Num(v) = *self.peek() {
            if v < 0.0 || v.fract() != 0.0 || v > 1e6 {
                return self.fail("harmonic must be a non-negative integer");
            }
            k = v as usize;
            self.bump();
            if *self.peek() == Tok::Op('*') {
                self.bump();
            }
        }
        match self.peek() {
            Tok::Ident(s) if s == "t" => {
                self.bump();
                Ok(k)
            }
            _ => self.fail("expected `t` as the argument"),
        }
    }
}

/// Parses a real trigonometric polynomial in `t`.
pub fn parse_trig(src: &str) -> Result<TrigPoly, ExprError> {
    let mut lx = Lexer { toks: lex(src)?, pos: 0 };
    let p = lx.expr()?;
    if *lx.peek() != Tok::End {
        return lx.fail("trailing input");
    }
    Ok(p)
}
