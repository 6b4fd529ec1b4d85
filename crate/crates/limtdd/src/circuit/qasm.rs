//! OpenQASM 2.0 subset: one `qreg`, fixed gate set, angles that are rational multiples of π.

use super::{Angle, Circuit, CircuitError, GateKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct QasmError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Real(String),
    Str(String),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, QasmError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let adv = |i: &mut usize, col: &mut usize, k: usize| {
            *i += k;
            *col += k;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            adv(&mut i, &mut col, 1);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let s: String = chars[i..].iter().take_while(|c| c.is_ascii_alphanumeric() || **c == '_').collect();
            adv(&mut i, &mut col, s.len());
            out.push(Token { tok: Tok::Ident(s), line: l0, col: c0 });
        } else if c.is_ascii_digit() {
            let s: String = chars[i..].iter().take_while(|c| c.is_ascii_digit() || **c == '.').collect();
            adv(&mut i, &mut col, s.len());
            let tok = if s.contains('.') {
                Tok::Real(s)
            } else {
                Tok::Int(s.parse().map_err(|_| QasmError { line: l0, col: c0, msg: format!("integer `{s}` too large") })?)
            };
            out.push(Token { tok, line: l0, col: c0 });
        } else if c == '"' {
            let s: String = chars[i + 1..].iter().take_while(|c| **c != '"' && **c != '\n').collect();
            if chars.get(i + 1 + s.len()) != Some(&'"') {
                return Err(QasmError { line: l0, col: c0, msg: "unterminated string".into() });
            }
            adv(&mut i, &mut col, s.len() + 2);
            out.push(Token { tok: Tok::Str(s), line: l0, col: c0 });
        } else if "[](),;*/-+".contains(c) {
            adv(&mut i, &mut col, 1);
            out.push(Token { tok: Tok::Sym(c), line: l0, col: c0 });
        } else {
            return Err(QasmError { line: l0, col: c0, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |t| (t.line, t.col))
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, QasmError> {
        let (line, col) = self.here();
        Err(QasmError { line, col, msg: msg.into() })
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn sym(&mut self, c: char) -> Result<(), QasmError> {
        match self.peek() {
            Some(Token { tok: Tok::Sym(s), .. }) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let found = describe(&t.tok);
                self.err(format!("expected `{c}`, found {found}"))
            }
            None => self.err(format!("expected `{c}`, found end of input")),
        }
    }

    fn is_sym(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == c)
    }

    fn ident(&mut self) -> Result<String, QasmError> {
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s)
            }
            Some(t) => self.err(format!("expected identifier, found {}", describe(&t))),
            None => self.err("expected identifier, found end of input"),
        }
    }

    fn int(&mut self) -> Result<u64, QasmError> {
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(t) => self.err(format!("expected integer, found {}", describe(&t))),
            None => self.err("expected integer, found end of input"),
        }
    }

    /// `[-] [k *] pi [/ m]` or `0`.
    fn angle(&mut self) -> Result<Angle, QasmError> {
        let start = self.here();
        let neg = if self.is_sym('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut num: i64 = 1;
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Int(0)) => {
                self.pos += 1;
                return Ok(Angle::new(0, 1).expect("nonzero denominator"));
            }
            Some(Tok::Int(k)) => {
                self.pos += 1;
                num = k as i64;
                self.sym('*')?;
            }
            Some(Tok::Real(r)) => {
                return Err(QasmError {
                    line: start.0,
                    col: start.1,
                    msg: format!("angle `{r}` is not a rational multiple of pi"),
                })
            }
            _ => {}
        }
        match self.ident() {
            Ok(s) if s == "pi" => {}
            Ok(s) => return self.err(format!("angle must be a rational multiple of pi, found `{s}`")).map_err(|mut e| {
                e.line = start.0;
                e.col = start.1;
                e
            }),
            Err(e) => return Err(e),
        }
        let mut den: u64 = 1;
        if self.is_sym('/') {
            self.pos += 1;
            den = self.int()?;
            if den == 0 || den > u32::MAX as u64 {
                return self.err("angle denominator out of range");
            }
        }
        if neg {
            num = -num;
        }
        Ok(Angle::new(num, den as u32).expect("nonzero denominator"))
    }

    fn operand(&mut self, reg: &str, n: usize) -> Result<usize, QasmError> {
        let (line, col) = self.here();
        let name = self.ident()?;
        if name != reg {
            return Err(QasmError { line, col, msg: format!("unknown register `{name}`") });
        }
        self.sym('[')?;
        let (il, ic) = self.here();
        let q = self.int()? as usize;
        if q >= n {
            return Err(QasmError { line: il, col: ic, msg: format!("qubit {q} out of range for qreg of size {n}") });
        }
        self.sym(']')?;
        Ok(q)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Real(s) => format!("`{s}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(c) => format!("`{c}`"),
    }
}

/// Parses the supported subset; errors carry line and column.
pub fn parse_qasm(text: &str) -> Result<Circuit, CircuitError> {
    let toks = lex(text)?;
    let end = toks.last().map_or((1, 1), |t| (t.line, t.col + 1));
    let mut p = Parser { toks, pos: 0, end };

    match p.peek().map(|t| t.tok.clone()) {
        Some(Tok::Ident(s)) if s == "OPENQASM" => {
            p.pos += 1;
            match p.next().map(|t| t.tok) {
                Some(Tok::Real(v)) if v == "2.0" => {}
                _ => {
                    p.pos -= 1;
                    return Err(p.err::<()>("only OPENQASM 2.0 is supported").unwrap_err().into());
                }
            }
            p.sym(';')?;
        }
        _ => return Err(p.err::<()>("missing `OPENQASM 2.0;` header").unwrap_err().into()),
    }

    let mut reg: Option<(String, usize)> = None;
    let mut circuit = Circuit::new(0);
    while p.peek().is_some() {
        let (line, col) = p.here();
        let word = p.ident()?;
        match word.as_str() {
            "include" => {
                match p.next().map(|t| t.tok) {
                    Some(Tok::Str(_)) => {}
                    _ => {
                        p.pos -= 1;
                        return Err(p.err::<()>("expected file name string").unwrap_err().into());
                    }
                }
                p.sym(';')?;
            }
            "qreg" => {
                if reg.is_some() {
                    return Err(QasmError { line, col, msg: "only one qreg is supported".into() }.into());
                }
                let name = p.ident()?;
                p.sym('[')?;
                let n = p.int()? as usize;
                p.sym(']')?;
                p.sym(';')?;
                circuit = Circuit::new(n);
                reg = Some((name, n));
            }
            "creg" => {
                p.ident()?;
                p.sym('[')?;
                p.int()?;
                p.sym(']')?;
                p.sym(';')?;
            }
            "barrier" => {
                while !p.is_sym(';') {
                    if p.next().is_none() {
                        return Err(p.err::<()>("expected `;`, found end of input").unwrap_err().into());
                    }
                }
                p.sym(';')?;
            }
            _ => {
                let Some((rname, n)) = reg.clone() else {
                    return Err(QasmError { line, col, msg: "gate before qreg declaration".into() }.into());
                };
                let angle = if p.is_sym('(') {
                    p.pos += 1;
                    let a = p.angle()?;
                    p.sym(')')?;
                    Some(a)
                } else {
                    None
                };
                let kind = match (word.as_str(), angle) {
                    ("x", None) => GateKind::X,
                    ("y", None) => GateKind::Y,
                    ("z", None) => GateKind::Z,
                    ("h", None) => GateKind::H,
                    ("s", None) => GateKind::S,
                    ("sdg", None) => GateKind::Sdg,
                    ("t", None) => GateKind::T,
                    ("tdg", None) => GateKind::Tdg,
                    ("cx", None) | ("CX", None) => GateKind::CX,
                    ("cy", None) => GateKind::CY,
                    ("cz", None) => GateKind::CZ,
                    ("swap", None) => GateKind::Swap,
                    ("cp", Some(a)) | ("cu1", Some(a)) => GateKind::CP(a),
                    ("p", Some(a)) | ("u1", Some(a)) => GateKind::P(a),
                    ("cp" | "cu1" | "p" | "u1", None) => {
                        return Err(QasmError { line, col, msg: format!("gate `{word}` needs an angle") }.into())
                    }
                    (_, Some(_)) if ["x", "y", "z", "h", "s", "sdg", "t", "tdg", "cx", "cy", "cz", "swap"].contains(&word.as_str()) => {
                        return Err(QasmError { line, col, msg: format!("gate `{word}` takes no angle") }.into())
                    }
                    _ => return Err(QasmError { line, col, msg: format!("unsupported gate `{word}`") }.into()),
                };
                let mut qs = vec![p.operand(&rname, n)?];
                while p.is_sym(',') {
                    p.pos += 1;
                    qs.push(p.operand(&rname, n)?);
                }
                p.sym(';')?;
                if qs.len() != kind.arity() {
                    return Err(QasmError {
                        line,
                        col,
                        msg: format!("gate `{word}` expects {} operand(s), got {}", kind.arity(), qs.len()),
                    }
                    .into());
                }
                if qs.len() == 2 && qs[0] == qs[1] {
                    return Err(QasmError { line, col, msg: format!("gate `{word}` uses the same qubit twice") }.into());
                }
                circuit.add(kind, &qs);
            }
        }
    }
    if reg.is_none() {
        return Err(QasmError { line: p.end.0, col: p.end.1, msg: "missing qreg declaration".into() }.into());
    }
    Ok(circuit)
}
