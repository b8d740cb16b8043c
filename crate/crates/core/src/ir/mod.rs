//! Three-address IR for framework snapshots.
//!
//! A snapshot is one API level's worth of framework classes. Statement kinds
//! map one-to-one onto the symbolic transformer rows (copy, binary, API
//! assignment, field store, array store, string equality, branch, target)
//! plus the control statements `goto`, `invoke` and `return`.

mod parser;
mod printer;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

pub use parser::{parse_snapshot, ParseError};

/// Prefix of attribute constant names, e.g. `R.attr.color`.
pub const ATTR_PREFIX: &str = "R.attr.";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameworkSnapshot {
    pub api_level: u32,
    pub classes: Vec<IrClass>,
    /// Attribute constant name (`R.attr.x`) to its id, merged over all classes.
    pub attr_consts: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrClass {
    pub name: String,
    /// Constants in declaration order, kept for printing.
    pub consts: Vec<(String, i64)>,
    pub methods: Vec<IrMethod>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrMethod {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Instr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instr {
    pub label: Option<String>,
    pub stmt: IrStmt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div)
    }
}

impl UnOp {
    pub fn keyword(self) -> &'static str {
        match self {
            UnOp::Neg => "neg",
            UnOp::Not => "not",
        }
    }
}

/// Statement operand. Variable names may be dotted field paths (`o.f`);
/// array cells are read as `a[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operand {
    Var(String),
    Int(i64),
    Str(String),
    /// Full constant name, `R.attr.<x>`.
    Attr(String),
    Null,
    Elem(String, Box<Operand>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IrStmt {
    /// `x = y`, `x = neg y`, `x = not y`
    Copy { dst: String, op: Option<UnOp>, src: Operand },
    /// `x = y op z`
    Binary { dst: String, lhs: Operand, op: BinOp, rhs: Operand },
    /// `x = call api(args)`
    ApiAssign { dst: String, api: String, args: Vec<Operand> },
    /// `o.f = z`
    FieldStore { obj: String, field: String, value: Operand },
    /// `a[i] = x`
    ArrayStore { array: String, index: Operand, value: Operand },
    /// `x = strEq y "lit"`; string equality is an operator, not an API call.
    StrEqAssign { dst: String, src: Operand, lit: String },
    /// `if c goto L1 else goto L2`
    Branch { cond: Operand, if_true: String, if_false: String },
    Goto(String),
    /// `invoke m(args)`; opaque unless `m` is a method of the same class.
    Invoke { method: String, args: Vec<Operand> },
    /// `target x = confapi(attr, extra...)`; the first argument names the attribute.
    Target { dst: String, api: String, args: Vec<Operand> },
    Return,
}

impl IrStmt {
    pub fn is_target(&self) -> bool {
        matches!(self, IrStmt::Target { .. })
    }
}

impl IrMethod {
    pub fn label_positions(&self) -> HashMap<&str, usize> {
        self.body
            .iter()
            .enumerate()
            .filter_map(|(i, ins)| ins.label.as_deref().map(|l| (l, i)))
            .collect()
    }
}

impl IrClass {
    pub fn method_index(&self, name: &str) -> Option<usize> {
        self.methods.iter().position(|m| m.name == name)
    }
}

/// Location of a statement within a snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StmtRef {
    pub class: String,
    pub method: String,
    pub index: usize,
}

impl fmt::Display for StmtRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}#{}", self.class, self.method, self.index)
    }
}

impl FrameworkSnapshot {
    pub fn class(&self, name: &str) -> Option<&IrClass> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Reverse lookup from attribute id to constant name.
    pub fn attr_name(&self, id: i64) -> Option<&str> {
        self.attr_consts
            .iter()
            .find(|(_, v)| **v == id)
            .map(|(k, _)| k.as_str())
    }
}

/// Every target statement in (class, method, index) declaration order.
pub fn list_target_statements(snap: &FrameworkSnapshot) -> Vec<StmtRef> {
    let mut out = Vec::new();
    for class in &snap.classes {
        for method in &class.methods {
            for (index, ins) in method.body.iter().enumerate() {
                if ins.stmt.is_target() {
                    out.push(StmtRef {
                        class: class.name.clone(),
                        method: method.name.clone(),
                        index,
                    });
                }
            }
        }
    }
    out
}

/// `R.attr.color` renders as `android:color`.
pub fn attribute_display_name(const_name: &str) -> String {
    match const_name.strip_prefix(ATTR_PREFIX) {
        Some(rest) => format!("android:{rest}"),
        None => const_name.to_string(),
    }
}
