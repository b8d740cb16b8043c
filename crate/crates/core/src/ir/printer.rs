use std::fmt;

use super::{FrameworkSnapshot, IrStmt, Operand};

fn write_str_lit(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for ch in s.chars() {
        match ch {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str("\"")
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Var(v) => f.write_str(v),
            Operand::Int(i) => write!(f, "{i}"),
            Operand::Str(s) => write_str_lit(f, s),
            Operand::Attr(a) => f.write_str(a),
            Operand::Null => f.write_str("null"),
            Operand::Elem(a, idx) => write!(f, "{a}[{idx}]"),
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Operand]) -> fmt::Result {
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    f.write_str(")")
}

impl fmt::Display for IrStmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrStmt::Copy { dst, op: None, src } => write!(f, "{dst} = {src}"),
            IrStmt::Copy { dst, op: Some(op), src } => write!(f, "{dst} = {} {src}", op.keyword()),
            IrStmt::Binary { dst, lhs, op, rhs } => write!(f, "{dst} = {lhs} {} {rhs}", op.symbol()),
            IrStmt::ApiAssign { dst, api, args } => {
                write!(f, "{dst} = call {api}")?;
                write_args(f, args)
            }
            IrStmt::FieldStore { obj, field, value } => write!(f, "{obj}.{field} = {value}"),
            IrStmt::ArrayStore { array, index, value } => write!(f, "{array}[{index}] = {value}"),
            IrStmt::StrEqAssign { dst, src, lit } => {
                write!(f, "{dst} = strEq {src} ")?;
                write_str_lit(f, lit)
            }
            IrStmt::Branch { cond, if_true, if_false } => {
                write!(f, "if {cond} goto {if_true} else goto {if_false}")
            }
            IrStmt::Goto(l) => write!(f, "goto {l}"),
            IrStmt::Invoke { method, args } => {
                write!(f, "invoke {method}")?;
                write_args(f, args)
            }
            IrStmt::Target { dst, api, args } => {
                write!(f, "target {dst} = {api}")?;
                write_args(f, args)
            }
            IrStmt::Return => f.write_str("return"),
        }
    }
}

/// Prints the snapshot back in the parseable text format.
impl fmt::Display for FrameworkSnapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "snapshot {}", self.api_level)?;
        for class in &self.classes {
            writeln!(f, "class {} {{", class.name)?;
            for (name, id) in &class.consts {
                writeln!(f, "  const {name} = {id}")?;
            }
            for m in &class.methods {
                writeln!(f, "  method {}({}) {{", m.name, m.params.join(", "))?;
                for ins in &m.body {
                    match &ins.label {
                        Some(l) => writeln!(f, "  {l}: {}", ins.stmt)?,
                        None => writeln!(f, "    {}", ins.stmt)?,
                    }
                }
                writeln!(f, "  }}")?;
            }
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}
