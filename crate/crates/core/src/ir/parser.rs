use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use super::{
    BinOp, FrameworkSnapshot, Instr, IrClass, IrMethod, IrStmt, Operand, UnOp, ATTR_PREFIX,
};
use crate::value::NULL_VALUE;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown statement form")]
    UnknownStatement,
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("undefined label `{0}`")]
    UndefinedLabel(String),
    #[error("duplicate class `{0}`")]
    DuplicateClass(String),
    #[error("duplicate method `{0}`")]
    DuplicateMethod(String),
    #[error("attribute constant `{0}` declared with conflicting ids")]
    ConflictingConst(String),
    #[error("attribute id {0} assigned to more than one constant")]
    DuplicateConstId(i64),
    #[error("undeclared attribute constant `{0}`")]
    UndeclaredAttr(String),
    #[error("integer literal {0} is reserved")]
    ReservedLiteral(i64),
    #[error("missing `snapshot <level>` header")]
    MissingHeader,
    #[error("unexpected end of input")]
    UnexpectedEof,
}

const KEYWORDS: &[&str] = &[
    "snapshot", "class", "const", "method", "return", "goto", "if", "else", "invoke", "target",
    "call", "strEq", "neg", "not", "null",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i128),
    Str(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    col: usize,
}

fn err(line: usize, col: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, col, kind }
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    err(line, col, ParseErrorKind::Syntax(msg.into()))
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_' || c == '$'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '$'
}

fn lex_line(line_no: usize, text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            // dotted segments: `R.attr.color`, `o.f`
            while i + 1 < chars.len() && chars[i] == '.' && is_ident_start(chars[i + 1]) {
                i += 1;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
            }
            toks.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let v: i128 = digits
                .parse()
                .map_err(|_| syntax(line_no, col, "integer literal out of range"))?;
            toks.push(Token { tok: Tok::Int(v), col });
            continue;
        }
        if c == '"' {
            i += 1;
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(syntax(line_no, col, "unterminated string literal")),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => {
                        let esc = chars
                            .get(i + 1)
                            .ok_or_else(|| syntax(line_no, i + 1, "dangling escape"))?;
                        s.push(match esc {
                            'n' => '\n',
                            't' => '\t',
                            '"' => '"',
                            '\\' => '\\',
                            other => {
                                return Err(syntax(
                                    line_no,
                                    i + 1,
                                    format!("unknown escape `\\{other}`"),
                                ))
                            }
                        });
                        i += 2;
                    }
                    Some(ch) => {
                        s.push(*ch);
                        i += 1;
                    }
                }
            }
            toks.push(Token { tok: Tok::Str(s), col });
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let sym2 = ["==", "!=", "<=", "&&", "||"].into_iter().find(|s| *s == two);
        if let Some(s) = sym2 {
            toks.push(Token { tok: Tok::Sym(s), col });
            i += 2;
            continue;
        }
        let sym1 = ["{", "}", "(", ")", "[", "]", ",", "=", ":", "+", "-", "*", "/", "<"]
            .into_iter()
            .find(|s| s.starts_with(c));
        match sym1 {
            Some(s) => {
                toks.push(Token { tok: Tok::Sym(s), col });
                i += 1;
            }
            None => return Err(syntax(line_no, col, format!("unexpected character `{c}`"))),
        }
    }
    Ok(toks)
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    eol_col: usize,
}

impl<'a> Cursor<'a> {
    fn new(toks: &'a [Token], line: usize, eol_col: usize) -> Self {
        Cursor { toks, pos: 0, line, eol_col }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.pos + n).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.col).unwrap_or(self.eol_col)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        syntax(self.line, self.col(), msg)
    }

    fn expect_sym(&mut self, s: &'static str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Sym(x)) if *x == s => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(format!("expected `{s}`"))),
        }
    }

    fn eat_sym(&mut self, s: &'static str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(x)) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(x)) if x == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{kw}`")))
        }
    }

    /// A plain (undotted, non-keyword) identifier.
    fn expect_name(&mut self, what: &str) -> Result<String, ParseError> {
        let col = self.col();
        match self.next() {
            Some(Tok::Ident(s)) if !s.contains('.') && !KEYWORDS.contains(&s.as_str()) => Ok(s),
            _ => Err(syntax(self.line, col, format!("expected {what}"))),
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing tokens"))
        }
    }

    fn int_literal(&mut self) -> Result<i64, ParseError> {
        let col = self.col();
        let neg = self.eat_sym("-");
        match self.next() {
            Some(Tok::Int(v)) => {
                let v = if neg { -v } else { v };
                let v = i64::try_from(v)
                    .map_err(|_| syntax(self.line, col, "integer literal out of range"))?;
                if v == NULL_VALUE {
                    return Err(err(self.line, col, ParseErrorKind::ReservedLiteral(v)));
                }
                Ok(v)
            }
            _ => Err(syntax(self.line, col, "expected integer literal")),
        }
    }

    fn operand(&mut self) -> Result<Operand, ParseError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Int(_)) | Some(Tok::Sym("-")) => Ok(Operand::Int(self.int_literal()?)),
            Some(Tok::Str(s)) => {
                self.pos += 1;
                Ok(Operand::Str(s))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                if s == "null" {
                    return Ok(Operand::Null);
                }
                if s.starts_with(ATTR_PREFIX) {
                    return Ok(Operand::Attr(s));
                }
                if KEYWORDS.contains(&s.as_str()) {
                    return Err(syntax(self.line, col, format!("unexpected keyword `{s}`")));
                }
                if self.eat_sym("[") {
                    let idx = self.operand()?;
                    self.expect_sym("]")?;
                    return Ok(Operand::Elem(s, Box::new(idx)));
                }
                Ok(Operand::Var(s))
            }
            _ => Err(syntax(self.line, col, "expected operand")),
        }
    }

    fn arg_list(&mut self) -> Result<Vec<Operand>, ParseError> {
        self.expect_sym("(")?;
        let mut args = Vec::new();
        if self.eat_sym(")") {
            return Ok(args);
        }
        loop {
            args.push(self.operand()?);
            if self.eat_sym(")") {
                return Ok(args);
            }
            self.expect_sym(",")?;
        }
    }

    fn binop(&mut self) -> Option<BinOp> {
        let op = match self.peek()? {
            Tok::Sym("+") => BinOp::Add,
            Tok::Sym("-") => BinOp::Sub,
            Tok::Sym("*") => BinOp::Mul,
            Tok::Sym("/") => BinOp::Div,
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym("&&") => BinOp::And,
            Tok::Sym("||") => BinOp::Or,
            _ => return None,
        };
        self.pos += 1;
        Some(op)
    }
}

fn parse_stmt(c: &mut Cursor<'_>) -> Result<IrStmt, ParseError> {
    let head = match c.peek() {
        Some(Tok::Ident(s)) => s.clone(),
        _ => return Err(err(c.line, c.col(), ParseErrorKind::UnknownStatement)),
    };
    let stmt = match head.as_str() {
        "return" => {
            c.pos += 1;
            IrStmt::Return
        }
        "goto" => {
            c.pos += 1;
            IrStmt::Goto(c.expect_name("label")?)
        }
        "if" => {
            c.pos += 1;
            let cond = c.operand()?;
            c.expect_keyword("goto")?;
            let if_true = c.expect_name("label")?;
            c.expect_keyword("else")?;
            c.expect_keyword("goto")?;
            let if_false = c.expect_name("label")?;
            IrStmt::Branch { cond, if_true, if_false }
        }
        "invoke" => {
            c.pos += 1;
            let method = c.expect_name("method name")?;
            let args = c.arg_list()?;
            IrStmt::Invoke { method, args }
        }
        "target" => {
            c.pos += 1;
            let dst = c.expect_name("variable")?;
            c.expect_sym("=")?;
            let api = c.expect_name("configuration API name")?;
            let col = c.col();
            let args = c.arg_list()?;
            if args.is_empty() {
                return Err(syntax(c.line, col, "target call needs an attribute argument"));
            }
            IrStmt::Target { dst, api, args }
        }
        _ if KEYWORDS.contains(&head.as_str()) || head.starts_with(ATTR_PREFIX) => {
            return Err(err(c.line, c.col(), ParseErrorKind::UnknownStatement));
        }
        _ => parse_assignment(c, head)?,
    };
    c.expect_end()?;
    Ok(stmt)
}

fn parse_assignment(c: &mut Cursor<'_>, lhs: String) -> Result<IrStmt, ParseError> {
    c.pos += 1;
    if c.eat_sym("[") {
        if lhs.contains('.') {
            return Err(c.error("array name cannot be a field path"));
        }
        let index = c.operand()?;
        c.expect_sym("]")?;
        c.expect_sym("=")?;
        let value = c.operand()?;
        return Ok(IrStmt::ArrayStore { array: lhs, index, value });
    }
    if !matches!(c.peek(), Some(Tok::Sym("="))) {
        return Err(err(c.line, c.col(), ParseErrorKind::UnknownStatement));
    }
    c.pos += 1;
    if let Some((obj, field)) = lhs.rsplit_once('.') {
        let value = c.operand()?;
        return Ok(IrStmt::FieldStore { obj: obj.to_string(), field: field.to_string(), value });
    }
    let dst = lhs;
    if c.eat_keyword("call") {
        let api = c.expect_name("API name")?;
        let args = c.arg_list()?;
        return Ok(IrStmt::ApiAssign { dst, api, args });
    }
    if c.eat_keyword("strEq") {
        let src = c.operand()?;
        let col = c.col();
        return match c.next() {
            Some(Tok::Str(lit)) => Ok(IrStmt::StrEqAssign { dst, src, lit }),
            _ => Err(syntax(c.line, col, "expected string literal")),
        };
    }
    for op in [UnOp::Neg, UnOp::Not] {
        if c.eat_keyword(op.keyword()) {
            let src = c.operand()?;
            return Ok(IrStmt::Copy { dst, op: Some(op), src });
        }
    }
    let lhs_op = c.operand()?;
    match c.binop() {
        Some(op) => {
            let rhs = c.operand()?;
            Ok(IrStmt::Binary { dst, lhs: lhs_op, op, rhs })
        }
        None => Ok(IrStmt::Copy { dst, op: None, src: lhs_op }),
    }
}

struct MethodBuilder {
    name: String,
    params: Vec<String>,
    body: Vec<Instr>,
    /// (label, line, col) of every jump, checked when the method closes.
    jumps: Vec<(String, usize, usize)>,
    labels: HashSet<String>,
    pending_label: Option<(String, usize, usize)>,
}

struct ClassBuilder {
    name: String,
    consts: Vec<(String, i64)>,
    methods: Vec<IrMethod>,
    method_names: HashSet<String>,
}

enum Scope {
    Top,
    Class(ClassBuilder),
    Method(ClassBuilder, MethodBuilder),
}

/// Parses the line-oriented snapshot format.
pub fn parse_snapshot(text: &str) -> Result<FrameworkSnapshot, ParseError> {
    let mut level: Option<u32> = None;
    let mut classes: Vec<IrClass> = Vec::new();
    let mut class_names = HashSet::new();
    let mut scope = Scope::Top;
    let mut attr_uses: Vec<(String, usize, usize)> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks = lex_line(line, raw)?;
        if toks.is_empty() {
            continue;
        }
        let eol = raw.chars().count() + 1;
        let mut c = Cursor::new(&toks, line, eol);

        if level.is_none() {
            if !c.eat_keyword("snapshot") {
                return Err(err(line, c.col(), ParseErrorKind::MissingHeader));
            }
            let col = c.col();
            let v = c.int_literal()?;
            if v < 1 || v > i64::from(u32::MAX) {
                return Err(syntax(line, col, "API level must be a positive integer"));
            }
            c.expect_end()?;
            level = Some(v as u32);
            continue;
        }

        scope = match scope {
            Scope::Top => {
                c.expect_keyword("class")?;
                let name_col = c.col();
                let name = c.expect_name("class name")?;
                c.expect_sym("{")?;
                c.expect_end()?;
                if !class_names.insert(name.clone()) {
                    return Err(err(line, name_col, ParseErrorKind::DuplicateClass(name)));
                }
                Scope::Class(ClassBuilder {
                    name,
                    consts: Vec::new(),
                    methods: Vec::new(),
                    method_names: HashSet::new(),
                })
            }
            Scope::Class(mut cls) => {
                if c.eat_sym("}") {
                    c.expect_end()?;
                    classes.push(IrClass { name: cls.name, consts: cls.consts, methods: cls.methods });
                    Scope::Top
                } else if c.eat_keyword("const") {
                    let col = c.col();
                    let name = match c.next() {
                        Some(Tok::Ident(s)) if s.starts_with(ATTR_PREFIX) && s.len() > ATTR_PREFIX.len() => s,
                        _ => return Err(syntax(line, col, "expected `R.attr.<name>`")),
                    };
                    c.expect_sym("=")?;
                    let v = c.int_literal()?;
                    c.expect_end()?;
                    cls.consts.push((name, v));
                    Scope::Class(cls)
                } else if c.eat_keyword("method") {
                    let name_col = c.col();
                    let name = c.expect_name("method name")?;
                    c.expect_sym("(")?;
                    let mut params = Vec::new();
                    if !c.eat_sym(")") {
                        loop {
                            params.push(c.expect_name("parameter name")?);
                            if c.eat_sym(")") {
                                break;
                            }
                            c.expect_sym(",")?;
                        }
                    }
                    c.expect_sym("{")?;
                    c.expect_end()?;
                    if !cls.method_names.insert(name.clone()) {
                        return Err(err(line, name_col, ParseErrorKind::DuplicateMethod(name)));
                    }
                    Scope::Method(
                        cls,
                        MethodBuilder {
                            name,
                            params,
                            body: Vec::new(),
                            jumps: Vec::new(),
                            labels: HashSet::new(),
                            pending_label: None,
                        },
                    )
                } else {
                    return Err(c.error("expected `const`, `method` or `}`"));
                }
            }
            Scope::Method(mut cls, mut m) => {
                if c.eat_sym("}") {
                    c.expect_end()?;
                    if let Some((l, ln, col)) = m.pending_label {
                        return Err(syntax(ln, col, format!("label `{l}` has no statement")));
                    }
                    if m.body.is_empty() {
                        return Err(syntax(line, 1, format!("method `{}` has no statements", m.name)));
                    }
                    for (l, ln, col) in &m.jumps {
                        if !m.labels.contains(l) {
                            return Err(err(*ln, *col, ParseErrorKind::UndefinedLabel(l.clone())));
                        }
                    }
                    cls.methods.push(IrMethod { name: m.name, params: m.params, body: m.body });
                    Scope::Class(cls)
                } else {
                    // optional `Label:` prefix
                    if let (Some(Tok::Ident(l)), Some(Tok::Sym(":"))) = (c.peek(), c.peek_at(1)) {
                        let l = l.clone();
                        let col = c.col();
                        if KEYWORDS.contains(&l.as_str()) || l.contains('.') {
                            return Err(syntax(line, col, "invalid label name"));
                        }
                        if m.pending_label.is_some() {
                            return Err(syntax(line, col, "statement already has a label"));
                        }
                        if !m.labels.insert(l.clone()) {
                            return Err(err(line, col, ParseErrorKind::DuplicateLabel(l)));
                        }
                        m.pending_label = Some((l, line, col));
                        c.pos += 2;
                    }
                    if !c.at_end() {
                        let stmt_start = c.pos;
                        let stmt = parse_stmt(&mut c)?;
                        let jump_col = |name: &str| {
                            toks[stmt_start..]
                                .iter()
                                .find(|t| matches!(&t.tok, Tok::Ident(s) if s == name))
                                .map(|t| t.col)
                                .unwrap_or(1)
                        };
                        match &stmt {
                            IrStmt::Goto(l) => m.jumps.push((l.clone(), line, jump_col(l))),
                            IrStmt::Branch { if_true, if_false, .. } => {
                                m.jumps.push((if_true.clone(), line, jump_col(if_true)));
                                m.jumps.push((if_false.clone(), line, jump_col(if_false)));
                            }
                            _ => {}
                        }
                        collect_attr_uses(&stmt, line, &mut attr_uses);
                        let label = m.pending_label.take().map(|(l, _, _)| l);
                        m.body.push(Instr { label, stmt });
                    }
                    Scope::Method(cls, m)
                }
            }
        };
    }

    let level = level.ok_or(err(last_line.max(1), 1, ParseErrorKind::MissingHeader))?;
    if !matches!(scope, Scope::Top) {
        return Err(err(last_line + 1, 1, ParseErrorKind::UnexpectedEof));
    }

    let mut attr_consts: BTreeMap<String, i64> = BTreeMap::new();
    let mut ids: BTreeMap<i64, String> = BTreeMap::new();
    for cls in &classes {
        for (name, id) in &cls.consts {
            if let Some(prev) = attr_consts.get(name) {
                if prev != id {
                    return Err(err(0, 0, ParseErrorKind::ConflictingConst(name.clone())));
                }
                continue;
            }
            if ids.contains_key(id) {
                return Err(err(0, 0, ParseErrorKind::DuplicateConstId(*id)));
            }
            attr_consts.insert(name.clone(), *id);
            ids.insert(*id, name.clone());
        }
    }
    for (name, line, col) in attr_uses {
        if !attr_consts.contains_key(&name) {
            return Err(err(line, col, ParseErrorKind::UndeclaredAttr(name)));
        }
    }

    Ok(FrameworkSnapshot { api_level: level, classes, attr_consts })
}

fn collect_attr_uses(stmt: &IrStmt, line: usize, out: &mut Vec<(String, usize, usize)>) {
    fn walk(op: &Operand, line: usize, out: &mut Vec<(String, usize, usize)>) {
        match op {
            Operand::Attr(a) => out.push((a.clone(), line, 1)),
            Operand::Elem(_, idx) => walk(idx, line, out),
            _ => {}
        }
    }
    let ops: Vec<&Operand> = match stmt {
        IrStmt::Copy { src, .. } => vec![src],
        IrStmt::Binary { lhs, rhs, .. } => vec![lhs, rhs],
        IrStmt::ApiAssign { args, .. } | IrStmt::Invoke { args, .. } | IrStmt::Target { args, .. } => {
            args.iter().collect()
        }
        IrStmt::FieldStore { value, .. } => vec![value],
        IrStmt::ArrayStore { index, value, .. } => vec![index, value],
        IrStmt::StrEqAssign { src, .. } => vec![src],
        IrStmt::Branch { cond, .. } => vec![cond],
        IrStmt::Goto(_) | IrStmt::Return => vec![],
    };
    for op in ops {
        walk(op, line, out);
    }
}
