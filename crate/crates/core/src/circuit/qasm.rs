//! OpenQASM 2.0 subset: one quantum register and the gates
//! `cx swap h x y z s sdg rz`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use super::{Circuit, Gate, GateKind};

#[derive(Debug, Error, PartialEq)]
pub enum QasmError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: unsupported gate `{name}`")]
    UnsupportedGate {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("line {line}, column {column}: unsupported statement `{keyword}`")]
    UnsupportedStatement {
        keyword: String,
        line: usize,
        column: usize,
    },
    #[error("line {line}, column {column}: qubit {qubit} is outside register of size {size}")]
    QubitOutOfRange {
        qubit: usize,
        size: usize,
        line: usize,
        column: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, QasmError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let end = (i..chars.len())
                .find(|&j| !(chars[j].is_ascii_alphanumeric() || chars[j] == '_'))
                .unwrap_or(chars.len());
            let word: String = chars[i..end].iter().collect();
            advance(end - i, &mut i);
            Tok::Ident(word)
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit))
        {
            let mut end = i;
            while end < chars.len() && (chars[end].is_ascii_digit() || chars[end] == '.') {
                end += 1;
            }
            if end < chars.len() && (chars[end] == 'e' || chars[end] == 'E') {
                let mut j = end + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    end = j;
                    while end < chars.len() && chars[end].is_ascii_digit() {
                        end += 1;
                    }
                }
            }
            let number: String = chars[i..end].iter().collect();
            advance(end - i, &mut i);
            Tok::Number(number)
        } else if c == '"' {
            let close = (i + 1..chars.len()).find(|&j| chars[j] == '"' || chars[j] == '\n');
            match close {
                Some(j) if chars[j] == '"' => {
                    let s: String = chars[i + 1..j].iter().collect();
                    advance(j + 1 - i, &mut i);
                    Tok::Str(s)
                }
                _ => {
                    return Err(QasmError::Syntax {
                        line: start_line,
                        column: start_col,
                        message: "unterminated string".into(),
                    })
                }
            }
        } else if ";,[]()+-*/".contains(c) {
            advance(1, &mut i);
            Tok::Sym(c)
        } else {
            return Err(QasmError::Syntax {
                line: start_line,
                column: start_col,
                message: format!("unexpected character `{c}`"),
            });
        };
        tokens.push(Token {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(token: &Token, message: impl Into<String>) -> QasmError {
        QasmError::Syntax {
            line: token.line,
            column: token.column,
            message: message.into(),
        }
    }

    fn expect_sym(&mut self, sym: char) -> Result<Token, QasmError> {
        let t = self.next();
        if t.tok == Tok::Sym(sym) {
            Ok(t)
        } else {
            Err(Self::error_at(
                &t,
                format!("expected `{sym}`, found {}", describe(&t.tok)),
            ))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token), QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t)),
            other => Err(Self::error_at(
                &t,
                format!("expected identifier, found {}", describe(other)),
            )),
        }
    }

    fn expect_uint(&mut self) -> Result<usize, QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Number(s) => s
                .parse::<usize>()
                .map_err(|_| Self::error_at(&t, format!("expected integer, found `{s}`"))),
            other => Err(Self::error_at(
                &t,
                format!("expected integer, found {}", describe(other)),
            )),
        }
    }

    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut value = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Sym('+') => {
                    self.next();
                    value += self.term()?;
                }
                Tok::Sym('-') => {
                    self.next();
                    value -= self.term()?;
                }
                _ => return Ok(value),
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut value = self.factor()?;
        loop {
            match self.peek().tok {
                Tok::Sym('*') => {
                    self.next();
                    value *= self.factor()?;
                }
                Tok::Sym('/') => {
                    self.next();
                    value /= self.factor()?;
                }
                _ => return Ok(value),
            }
        }
    }

    fn factor(&mut self) -> Result<f64, QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Sym('-') => Ok(-self.factor()?),
            Tok::Sym('+') => self.factor(),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Tok::Ident(s) if s == "pi" => Ok(PI),
            Tok::Number(s) => s
                .parse::<f64>()
                .map_err(|_| Self::error_at(&t, format!("malformed number `{s}`"))),
            other => Err(Self::error_at(
                &t,
                format!("expected expression, found {}", describe(other)),
            )),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(s) => format!("`{s}`"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Eof => "end of input".into(),
    }
}

fn gate_kind(name: &str) -> Option<(GateKind, bool)> {
    let kind = match name {
        "cx" => GateKind::Cnot,
        "swap" => GateKind::Swap,
        "h" => GateKind::H,
        "x" => GateKind::X,
        "y" => GateKind::Y,
        "z" => GateKind::Z,
        "s" => GateKind::S,
        "sdg" => GateKind::Sdg,
        "rz" => return Some((GateKind::Rz(0.0), true)),
        _ => return None,
    };
    Some((kind, false))
}

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "creg", "measure", "barrier", "reset", "gate", "opaque", "if",
];

/// Parses the supported OpenQASM 2.0 subset. The `OPENQASM` and `include`
/// prologue lines are optional.
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let mut register: Option<(String, usize)> = None;
    let mut circuit = Circuit::new(0);
    let mut first = true;

    loop {
        let head = p.peek().clone();
        let word = match &head.tok {
            Tok::Eof => break,
            Tok::Ident(w) => w.clone(),
            other => {
                return Err(Parser::error_at(
                    &head,
                    format!("expected statement, found {}", describe(other)),
                ))
            }
        };
        match word.as_str() {
            "OPENQASM" => {
                if !first {
                    return Err(Parser::error_at(
                        &head,
                        "OPENQASM must be the first statement",
                    ));
                }
                p.next();
                let v = p.next();
                if !matches!(&v.tok, Tok::Number(s) if s.starts_with('2')) {
                    return Err(Parser::error_at(&v, "only OPENQASM 2.x is supported"));
                }
                p.expect_sym(';')?;
            }
            "include" => {
                p.next();
                let t = p.next();
                if !matches!(t.tok, Tok::Str(_)) {
                    return Err(Parser::error_at(&t, "expected include file name"));
                }
                p.expect_sym(';')?;
            }
            "qreg" => {
                p.next();
                if register.is_some() {
                    return Err(QasmError::UnsupportedStatement {
                        keyword: "second qreg".into(),
                        line: head.line,
                        column: head.column,
                    });
                }
                let (name, _) = p.expect_ident()?;
                p.expect_sym('[')?;
                let size = p.expect_uint()?;
                p.expect_sym(']')?;
                p.expect_sym(';')?;
                circuit = Circuit::new(size);
                register = Some((name, size));
            }
            kw if UNSUPPORTED_KEYWORDS.contains(&kw) => {
                return Err(QasmError::UnsupportedStatement {
                    keyword: kw.to_string(),
                    line: head.line,
                    column: head.column,
                });
            }
            name => {
                let Some((mut kind, has_param)) = gate_kind(name) else {
                    return Err(QasmError::UnsupportedGate {
                        name: name.to_string(),
                        line: head.line,
                        column: head.column,
                    });
                };
                p.next();
                let Some((reg_name, size)) = register.clone() else {
                    return Err(Parser::error_at(&head, "gate before qreg declaration"));
                };
                if has_param {
                    p.expect_sym('(')?;
                    let theta = p.expr()?;
                    p.expect_sym(')')?;
                    kind = GateKind::Rz(theta);
                }
                let mut qubits = Vec::with_capacity(2);
                loop {
                    let (arg, at) = p.expect_ident()?;
                    if arg != reg_name {
                        return Err(Parser::error_at(&at, format!("unknown register `{arg}`")));
                    }
                    p.expect_sym('[')?;
                    let qubit = p.expect_uint()?;
                    p.expect_sym(']')?;
                    if qubit >= size {
                        return Err(QasmError::QubitOutOfRange {
                            qubit,
                            size,
                            line: at.line,
                            column: at.column,
                        });
                    }
                    qubits.push(qubit);
                    if p.peek().tok == Tok::Sym(',') {
                        p.next();
                    } else {
                        break;
                    }
                }
                p.expect_sym(';')?;
                let gate =
                    Gate::new(kind, &qubits).map_err(|e| Parser::error_at(&head, e.to_string()))?;
                circuit
                    .push(gate)
                    .map_err(|e| Parser::error_at(&head, e.to_string()))?;
            }
        }
        first = false;
    }
    Ok(circuit)
}

/// Writes the canonical prologue and one gate per line. Angles are printed
/// with shortest round-trip precision so `parse_qasm(emit_qasm(c)) == c`.
pub fn emit_qasm(circuit: &Circuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    writeln!(out, "qreg q[{}];", circuit.num_qubits()).unwrap();
    for gate in circuit.gates() {
        writeln!(out, "{gate};").unwrap();
    }
    out
}
