//! OpenQASM 2.0 subset: parsing into [`Circuit`] and emission from it.
//!
//! Supported statements are `OPENQASM 2.0;`, `include "qelib1.inc";`, `qreg`, `creg`,
//! gate applications, `barrier` and `measure`. Registers are flattened in declaration
//! order. A whole-register argument broadcasts the gate over the register. Gate
//! definitions, `opaque`, `reset` and `if` are rejected.
//!
//! Recognised gates: `h x y z s t sdg tdg sx sy rx ry rz u1 u2 u3 u p cx cz cp cu1 ccx
//! swap`. `sy` (√Y) is an extension used by the random-circuit benchmark.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{Circuit, Gate, GateKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QasmError {
    #[error("{line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },
    #[error("cannot emit gate {gate_index} (`{gate}`): {hint}")]
    Emit {
        gate_index: usize,
        gate: &'static str,
        hint: &'static str,
    },
}

impl QasmError {
    /// `(line, col)` of a parse error, both 1-based.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            QasmError::Parse { line, col, .. } => Some((*line, *col)),
            QasmError::Emit { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

fn err<T>(pos: Pos, message: impl Into<String>) -> Result<T, QasmError> {
    Err(QasmError::Parse {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    Arrow,
    EqEq,
    Sym(char),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Real(r) => format!("`{r}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Arrow => "`->`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, QasmError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let start = i;
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => i += 1,
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '"' => {
                i += 1;
                while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                    i += 1;
                }
                if chars.get(i) != Some(&'"') {
                    return err(pos, "unterminated string");
                }
                out.push((Tok::Str(chars[start + 1..i].iter().collect()), pos));
                i += 1;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Arrow, pos));
                i += 2;
            }
            '=' if chars.get(i + 1) == Some(&'=') => {
                out.push((Tok::EqEq, pos));
                i += 2;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            }
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let mut real = false;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if chars.get(i) == Some(&'.') {
                    real = true;
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if matches!(chars.get(i), Some('e' | 'E')) {
                    let mut j = i + 1;
                    if matches!(chars.get(j), Some('+' | '-')) {
                        j += 1;
                    }
                    if chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
                        real = true;
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let tok = if real {
                    text.parse().map(Tok::Real).or_else(|_| err(pos, format!("invalid number `{text}`")))?
                } else {
                    text.parse().map(Tok::Int).or_else(|_| err(pos, format!("integer `{text}` is too large")))?
                };
                out.push((tok, pos));
            }
            ';' | ',' | '[' | ']' | '(' | ')' | '{' | '}' | '+' | '-' | '*' | '/' | '^' => {
                out.push((Tok::Sym(c), pos));
                i += 1;
            }
            other => return err(pos, format!("unexpected character `{}`", other.escape_debug())),
        }
        col += i - start;
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Register {
    offset: usize,
    size: usize,
}

/// A gate operand: one qubit, or every qubit of a register.
#[derive(Clone)]
enum Arg {
    One(usize),
    All(Vec<usize>),
}

const MAX_EXPR_DEPTH: usize = 128;

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    qregs: HashMap<String, Register>,
    cregs: HashMap<String, Register>,
    n_qubits: usize,
    n_clbits: usize,
    gates: Vec<Gate>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        let (t, pos) = self.next();
        if t == Tok::Sym(c) {
            Ok(())
        } else {
            err(pos, format!("expected `{c}`, found {}", t.describe()))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), QasmError> {
        match self.next() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (t, pos) => err(pos, format!("expected identifier, found {}", t.describe())),
        }
    }

    fn int(&mut self) -> Result<(u64, Pos), QasmError> {
        match self.next() {
            (Tok::Int(v), pos) => Ok((v, pos)),
            (t, pos) => err(pos, format!("expected integer, found {}", t.describe())),
        }
    }

    fn header(&mut self) -> Result<(), QasmError> {
        let (name, pos) = self.ident()?;
        if name != "OPENQASM" {
            return err(pos, "expected `OPENQASM 2.0;` header");
        }
        let (t, pos) = self.next();
        if !matches!(t, Tok::Real(v) if v == 2.0) {
            return err(pos, format!("unsupported version {}, expected 2.0", t.describe()));
        }
        self.expect_sym(';')
    }

    fn program(&mut self) -> Result<(), QasmError> {
        self.header()?;
        loop {
            let pos = self.pos();
            match self.next().0 {
                Tok::Eof => return Ok(()),
                Tok::Ident(kw) => self.statement(&kw, pos)?,
                t => return err(pos, format!("expected statement, found {}", t.describe())),
            }
        }
    }

    fn statement(&mut self, kw: &str, pos: Pos) -> Result<(), QasmError> {
        match kw {
            "include" => {
                let (t, p) = self.next();
                match t {
                    Tok::Str(f) if f == "qelib1.inc" => {}
                    Tok::Str(f) => return err(p, format!("cannot include \"{f}\"; only qelib1.inc is built in")),
                    t => return err(p, format!("expected file name, found {}", t.describe())),
                }
                self.expect_sym(';')
            }
            "qreg" | "creg" => self.declaration(kw == "qreg"),
            "measure" => self.measure(pos),
            "barrier" => {
                let args = self.arg_list()?;
                self.expect_sym(';')?;
                let mut qubits = Vec::new();
                for a in args {
                    match a {
                        Arg::One(q) => qubits.push(q),
                        Arg::All(qs) => qubits.extend(qs),
                    }
                }
                let mut seen = qubits.clone();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() != qubits.len() {
                    return err(pos, "barrier lists a qubit twice");
                }
                self.gates.push(Gate::barrier(qubits));
                Ok(())
            }
            "gate" | "opaque" | "if" | "reset" => err(pos, format!("`{kw}` is not supported")),
            "OPENQASM" => err(pos, "duplicate header"),
            name => self.gate(name, pos),
        }
    }

    fn declaration(&mut self, quantum: bool) -> Result<(), QasmError> {
        let (name, pos) = self.ident()?;
        self.expect_sym('[')?;
        let (size, size_pos) = self.int()?;
        self.expect_sym(']')?;
        self.expect_sym(';')?;
        if size == 0 {
            return err(size_pos, "register size must be positive");
        }
        if self.qregs.contains_key(&name) || self.cregs.contains_key(&name) {
            return err(pos, format!("register `{name}` already declared"));
        }
        let (total, regs) = if quantum {
            (&mut self.n_qubits, &mut self.qregs)
        } else {
            (&mut self.n_clbits, &mut self.cregs)
        };
        let size = usize::try_from(size).ok().filter(|s| total.checked_add(*s).is_some());
        let Some(size) = size else {
            return err(size_pos, "register too large");
        };
        regs.insert(name, Register { offset: *total, size });
        *total += size;
        Ok(())
    }

    fn arg(&mut self, classical: bool) -> Result<(Arg, Pos), QasmError> {
        let (name, pos) = self.ident()?;
        let regs = if classical { &self.cregs } else { &self.qregs };
        let Some(reg) = regs.get(&name) else {
            let kind = if classical { "classical" } else { "quantum" };
            return err(pos, format!("undeclared {kind} register `{name}`"));
        };
        let (offset, size) = (reg.offset, reg.size);
        if *self.peek() != Tok::Sym('[') {
            return Ok((Arg::All((offset..offset + size).collect()), pos));
        }
        self.next();
        let (idx, idx_pos) = self.int()?;
        self.expect_sym(']')?;
        if idx >= size as u64 {
            return err(idx_pos, format!("index {idx} out of range for `{name}[{size}]`"));
        }
        Ok((Arg::One(offset + idx as usize), pos))
    }

    fn arg_list(&mut self) -> Result<Vec<Arg>, QasmError> {
        let mut args = vec![self.arg(false)?.0];
        while *self.peek() == Tok::Sym(',') {
            self.next();
            args.push(self.arg(false)?.0);
        }
        Ok(args)
    }

    /// Expands broadcast arguments into per-application operand lists.
    fn broadcast(args: &[Arg], pos: Pos) -> Result<Vec<Vec<usize>>, QasmError> {
        let mut width = None;
        for a in args {
            if let Arg::All(qs) = a {
                match width {
                    None => width = Some(qs.len()),
                    Some(w) if w != qs.len() => return err(pos, "broadcast registers differ in size"),
                    _ => {}
                }
            }
        }
        let reps = width.unwrap_or(1);
        Ok((0..reps)
            .map(|r| {
                args.iter()
                    .map(|a| match a {
                        Arg::One(q) => *q,
                        Arg::All(qs) => qs[r],
                    })
                    .collect()
            })
            .collect())
    }

    fn measure(&mut self, pos: Pos) -> Result<(), QasmError> {
        let (q, _) = self.arg(false)?;
        let (t, p) = self.next();
        if t != Tok::Arrow {
            return err(p, format!("expected `->`, found {}", t.describe()));
        }
        let (c, _) = self.arg(true)?;
        self.expect_sym(';')?;
        let pairs: Vec<(usize, usize)> = match (q, c) {
            (Arg::One(q), Arg::One(c)) => vec![(q, c)],
            (Arg::All(qs), Arg::All(cs)) if qs.len() == cs.len() => qs.into_iter().zip(cs).collect(),
            _ => return err(pos, "measure operands must both be single bits or equal-size registers"),
        };
        for (q, c) in pairs {
            self.gates.push(Gate::measure(q, c));
        }
        Ok(())
    }

    fn gate(&mut self, name: &str, pos: Pos) -> Result<(), QasmError> {
        let Some(&(n_params, n_qubits)) = GATE_SHAPES.get(name) else {
            return err(pos, format!("unknown gate `{name}`"));
        };
        let mut params = Vec::new();
        if *self.peek() == Tok::Sym('(') {
            self.next();
            if *self.peek() != Tok::Sym(')') {
                params.push(self.expr(0)?);
                while *self.peek() == Tok::Sym(',') {
                    self.next();
                    params.push(self.expr(0)?);
                }
            }
            self.expect_sym(')')?;
        }
        if params.len() != n_params {
            return err(pos, format!("`{name}` takes {n_params} parameter(s), got {}", params.len()));
        }
        let args_pos = self.pos();
        let args = self.arg_list()?;
        self.expect_sym(';')?;
        if args.len() != n_qubits {
            return err(args_pos, format!("`{name}` acts on {n_qubits} qubit(s), got {}", args.len()));
        }
        for ops in Self::broadcast(&args, pos)? {
            let mut sorted = ops.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != ops.len() {
                return err(args_pos, format!("`{name}` operands overlap"));
            }
            self.gates.push(build_gate(name, &params, &ops));
        }
        Ok(())
    }

    fn expr(&mut self, depth: usize) -> Result<f64, QasmError> {
        if depth > MAX_EXPR_DEPTH {
            return err(self.pos(), "expression nested too deeply");
        }
        let mut v = self.term(depth)?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.next();
                    v += self.term(depth)?;
                }
                Tok::Sym('-') => {
                    self.next();
                    v -= self.term(depth)?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self, depth: usize) -> Result<f64, QasmError> {
        let mut v = self.unary(depth)?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.next();
                    v *= self.unary(depth)?;
                }
                Tok::Sym('/') => {
                    self.next();
                    v /= self.unary(depth)?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn unary(&mut self, depth: usize) -> Result<f64, QasmError> {
        if depth > MAX_EXPR_DEPTH {
            return err(self.pos(), "expression nested too deeply");
        }
        match self.peek() {
            Tok::Sym('-') => {
                self.next();
                Ok(-self.unary(depth + 1)?)
            }
            Tok::Sym('+') => {
                self.next();
                self.unary(depth + 1)
            }
            _ => {
                let base = self.primary(depth)?;
                if *self.peek() == Tok::Sym('^') {
                    self.next();
                    Ok(base.powf(self.unary(depth + 1)?))
                } else {
                    Ok(base)
                }
            }
        }
    }

    fn primary(&mut self, depth: usize) -> Result<f64, QasmError> {
        let (t, pos) = self.next();
        match t {
            Tok::Int(v) => Ok(v as f64),
            Tok::Real(v) => Ok(v),
            Tok::Ident(s) if s == "pi" => Ok(PI),
            Tok::Ident(s) => {
                let f: fn(f64) -> f64 = match s.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => return err(pos, format!("unknown identifier `{s}` in expression")),
                };
                self.expect_sym('(')?;
                let v = self.expr(depth + 1)?;
                self.expect_sym(')')?;
                Ok(f(v))
            }
            Tok::Sym('(') => {
                let v = self.expr(depth + 1)?;
                self.expect_sym(')')?;
                Ok(v)
            }
            t => err(pos, format!("expected expression, found {}", t.describe())),
        }
    }
}

/// `name → (parameters, qubits)`.
static GATE_SHAPES: std::sync::LazyLock<HashMap<&'static str, (usize, usize)>> = std::sync::LazyLock::new(|| {
    HashMap::from([
        ("h", (0, 1)),
        ("x", (0, 1)),
        ("y", (0, 1)),
        ("z", (0, 1)),
        ("s", (0, 1)),
        ("t", (0, 1)),
        ("sdg", (0, 1)),
        ("tdg", (0, 1)),
        ("sx", (0, 1)),
        ("sy", (0, 1)),
        ("rx", (1, 1)),
        ("ry", (1, 1)),
        ("rz", (1, 1)),
        ("u1", (1, 1)),
        ("p", (1, 1)),
        ("u2", (2, 1)),
        ("u3", (3, 1)),
        ("u", (3, 1)),
        ("U", (3, 1)),
        ("cx", (0, 2)),
        ("CX", (0, 2)),
        ("cz", (0, 2)),
        ("cp", (1, 2)),
        ("cu1", (1, 2)),
        ("ccx", (0, 3)),
        ("swap", (0, 2)),
    ])
});

fn build_gate(name: &str, p: &[f64], q: &[usize]) -> Gate {
    use GateKind::*;
    let single = |k| Gate::single(k, q[0]);
    match name {
        "h" => single(H),
        "x" => single(X),
        "y" => single(Y),
        "z" => single(Z),
        "s" => single(S),
        "t" => single(T),
        "sdg" => single(P(-PI / 2.0)),
        "tdg" => single(P(-PI / 4.0)),
        "sx" => single(SqrtX),
        "sy" => single(SqrtY),
        "rx" => single(Rx(p[0])),
        "ry" => single(Ry(p[0])),
        "rz" => single(Rz(p[0])),
        "u1" | "p" => single(P(p[0])),
        "u2" => single(U(PI / 2.0, p[0], p[1])),
        "u3" | "u" | "U" => single(U(p[0], p[1], p[2])),
        "cx" | "CX" => Gate::cx(q[0], q[1]),
        "cz" => Gate::cz(q[0], q[1]),
        "cp" | "cu1" => Gate::cp(p[0], q[0], q[1]),
        "ccx" => Gate::ccx(q[0], q[1], q[2]),
        "swap" => Gate::swap(q[0], q[1]),
        _ => unreachable!("shape table and builder list the same gates"),
    }
}

/// Parses OpenQASM 2.0 source.
pub fn parse(src: &str) -> Result<Circuit, QasmError> {
    let mut p = Parser {
        toks: lex(src)?,
        at: 0,
        qregs: HashMap::new(),
        cregs: HashMap::new(),
        n_qubits: 0,
        n_clbits: 0,
        gates: Vec::new(),
    };
    p.program()?;
    let mut c = Circuit::new(p.n_qubits);
    c.gates = p.gates;
    Ok(c)
}

/// Like [`parse`], reporting invalid UTF-8 at its line and column.
pub fn parse_bytes(bytes: &[u8]) -> Result<Circuit, QasmError> {
    match std::str::from_utf8(bytes) {
        Ok(s) => parse(s),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).expect("prefix is valid");
            let line = valid.matches('\n').count() + 1;
            let col = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            err(Pos { line, col }, "invalid UTF-8")
        }
    }
}

fn angle(x: f64) -> String {
    format!("{x:.16e}")
}

/// Emits `c` as OpenQASM 2.0 over one register `q` (and `c` when measuring).
///
/// Explicit-matrix and multi-controlled gates have no qelib1 spelling; decompose them first.
pub fn emit(c: &Circuit) -> Result<String, QasmError> {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    if !c.metadata.name.is_empty() {
        let _ = writeln!(s, "// {}", c.metadata.name);
    }
    let _ = writeln!(s, "qreg q[{}];", c.n_qubits);
    let n_clbits = c
        .gates
        .iter()
        .filter_map(|g| match g.kind {
            GateKind::Measure { clbit } => Some(clbit + 1),
            _ => None,
        })
        .max();
    if let Some(n) = n_clbits {
        let _ = writeln!(s, "creg c[{n}];");
    }
    for (i, g) in c.gates.iter().enumerate() {
        let q = |k: usize| format!("q[{k}]");
        let t = g.targets.first().copied().unwrap_or(0);
        let line = match &g.kind {
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) | GateKind::P(a) => {
                format!("{}({}) {};", g.kind.name(), angle(*a), q(t))
            }
            GateKind::U(a, b, l) => format!("u3({},{},{}) {};", angle(*a), angle(*b), angle(*l), q(t)),
            GateKind::Cx | GateKind::Cz => format!("{} {},{};", g.kind.name(), q(g.controls[0]), q(t)),
            GateKind::Cp(a) => format!("cp({}) {},{};", angle(*a), q(g.controls[0]), q(t)),
            GateKind::Ccx => format!("ccx {},{},{};", q(g.controls[0]), q(g.controls[1]), q(t)),
            GateKind::Swap => format!("swap {},{};", q(g.targets[0]), q(g.targets[1])),
            GateKind::Measure { clbit } => format!("measure {} -> c[{clbit}];", q(t)),
            GateKind::Barrier if g.targets.is_empty() => "barrier q;".to_string(),
            GateKind::Barrier => {
                format!("barrier {};", g.targets.iter().map(|&k| q(k)).collect::<Vec<_>>().join(","))
            }
            GateKind::Su4(_) => {
                return Err(QasmError::Emit {
                    gate_index: i,
                    gate: "su4",
                    hint: "decompose SU(4) gates to u3/cx first",
                })
            }
            GateKind::Unitary(_) => {
                return Err(QasmError::Emit {
                    gate_index: i,
                    gate: "unitary",
                    hint: "fused unitaries have no OpenQASM 2.0 form; emit before fusion",
                })
            }
            GateKind::Mcx | GateKind::Mcz => {
                return Err(QasmError::Emit {
                    gate_index: i,
                    gate: g.kind.name(),
                    hint: "decompose multi-controlled gates first",
                })
            }
            _ => format!("{} {};", g.kind.name(), q(t)),
        };
        s.push_str(&line);
        s.push('\n');
    }
    Ok(s)
}

/// `parse(emit(c))` reproduces the register width and gate list of `c`.
pub fn roundtrip_check(c: &Circuit) -> Result<bool, QasmError> {
    let back = parse(&emit(c)?)?;
    Ok(back.n_qubits == c.n_qubits && back.gates == c.gates)
}
