//! Random classes for comparing backward extraction with the forward oracle.
//!
//! Shape limits: at most 25 statements, 2 targets and 3 branch variables,
//! every value domain at most 4 values (ints {0, 100, 101} plus a witness,
//! strings {"item", "selector"} plus a witness, booleans).
//!
//! Tag reads only appear as the triple `n = call getName(p)`,
//! `bt = strEq n "..."`, `if bt ...`, never jumped into, so every tag read
//! on a path also constrains that path. Attribute-carrying variables are
//! only compared with `==`, and arithmetic only combines literals.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const MAX_STATEMENTS: usize = 25;
pub const MAX_TARGETS: usize = 2;
pub const CLASS_NAME: &str = "Gen";

const INT_LITS: [&str; 3] = ["0", "R.attr.a", "R.attr.b"];
const INT_VARS: [&str; 2] = ["x0", "x1"];
const ATTR_VARS: [&str; 2] = ["k0", "k1"];
const BRANCH_VARS: [&str; 2] = ["b0", "b1"];
const TAG_BRANCH_VAR: &str = "bt";
const TAGS: [&str; 2] = ["item", "selector"];
const TARGET_APIS: [&str; 4] = ["getAttributeIntValue", "getColor", "getBoolean", "getString"];

enum Line {
    Plain(String),
    If { cond: String, t: usize, f: usize },
    Goto(usize),
}

struct Body {
    lines: Vec<Line>,
    /// Positions that must not carry a label.
    sealed: Vec<bool>,
}

impl Body {
    fn push(&mut self, l: Line, sealed: bool) {
        self.lines.push(l);
        self.sealed.push(sealed);
    }
}

fn int_operand(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..5) {
        0 | 1 => INT_LITS.choose(rng).unwrap().to_string(),
        2 => INT_VARS.choose(rng).unwrap().to_string(),
        3 => "o.f".to_string(),
        _ => format!("arr[{}]", ["0", "R.attr.a"].choose(rng).unwrap()),
    }
}

fn lit_value(s: &str) -> i64 {
    match s {
        "R.attr.a" => 100,
        "R.attr.b" => 101,
        other => other.parse().unwrap(),
    }
}

fn plain(rng: &mut ChaCha8Rng, with_helper: bool) -> String {
    match rng.gen_range(0..11) {
        0 => format!("{} = {}", INT_VARS.choose(rng).unwrap(), int_operand(rng)),
        1 => format!("{} = {}", ATTR_VARS.choose(rng).unwrap(), ["R.attr.a", "R.attr.b"].choose(rng).unwrap()),
        2 => format!("o.f = {}", int_operand(rng)),
        3 => format!("arr[{}] = {}", ["0", "R.attr.a"].choose(rng).unwrap(), int_operand(rng)),
        4 => loop {
            let a = *INT_LITS.choose(rng).unwrap();
            let b = *INT_LITS.choose(rng).unwrap();
            let (op, v) = match rng.gen_range(0..3) {
                0 => ("+", lit_value(a) + lit_value(b)),
                1 => ("-", lit_value(a) - lit_value(b)),
                _ => ("*", lit_value(a) * lit_value(b)),
            };
            if [0, 100, 101].contains(&v) {
                break format!("{} = {a} {op} {b}", INT_VARS.choose(rng).unwrap());
            }
        },
        5 => format!("{} = call getInt(p)", [INT_VARS, ATTR_VARS].concat().choose(rng).unwrap()),
        6 => {
            let b = BRANCH_VARS.choose(rng).unwrap();
            if rng.gen_bool(0.5) {
                format!("{b} = {} == {}", ATTR_VARS.choose(rng).unwrap(), ["R.attr.a", "R.attr.b"].choose(rng).unwrap())
            } else {
                let op = ["==", "!="].choose(rng).unwrap();
                format!("{b} = {} {op} {}", INT_VARS.choose(rng).unwrap(), int_operand(rng))
            }
        }
        7 => format!("{} = call isOn(p)", BRANCH_VARS.choose(rng).unwrap()),
        8 => format!("{} = not {}", BRANCH_VARS.choose(rng).unwrap(), BRANCH_VARS.choose(rng).unwrap()),
        9 if with_helper => "invoke helper()".to_string(),
        _ => format!("{} = {}", INT_VARS.choose(rng).unwrap(), INT_VARS.choose(rng).unwrap()),
    }
}

fn target(rng: &mut ChaCha8Rng, n: usize) -> String {
    let attr = match rng.gen_range(0..6) {
        0 | 1 => ["R.attr.a", "R.attr.b"].choose(rng).unwrap().to_string(),
        2 | 3 => ATTR_VARS.choose(rng).unwrap().to_string(),
        4 => "arr[0]".to_string(),
        _ => INT_VARS.choose(rng).unwrap().to_string(),
    };
    format!("target t{n} = {}({attr})", TARGET_APIS.choose(rng).unwrap())
}

/// `force_target` puts a target somewhere in the body if none exists yet.
fn gen_body(rng: &mut ChaCha8Rng, len: usize, targets: &mut usize, with_helper: bool, force_target: bool) -> Body {
    let mut b = Body { lines: Vec::new(), sealed: Vec::new() };
    let forced_at = if force_target { rng.gen_range(0..len - 1) } else { usize::MAX };
    // jump targets are resolved later; usize::MAX marks "pick one"
    while b.lines.len() + 1 < len {
        let room = len - 1 - b.lines.len();
        let roll = rng.gen_range(0..20);
        if (roll < 3 || (b.lines.len() >= forced_at && *targets == 0)) && *targets < MAX_TARGETS {
            b.push(Line::Plain(target(rng, *targets)), false);
            *targets += 1;
        } else if roll < 5 && room >= 3 {
            b.push(Line::Plain("n = call getName(p)".to_string()), false);
            b.push(Line::Plain(format!("{TAG_BRANCH_VAR} = strEq n {:?}", TAGS.choose(rng).unwrap())), true);
            b.push(Line::If { cond: TAG_BRANCH_VAR.into(), t: usize::MAX, f: usize::MAX }, true);
        } else if roll < 8 {
            b.push(Line::If { cond: BRANCH_VARS.choose(rng).unwrap().to_string(), t: usize::MAX, f: usize::MAX }, false);
        } else if roll < 9 {
            b.push(Line::Goto(usize::MAX), false);
        } else {
            b.push(Line::Plain(plain(rng, with_helper)), false);
        }
    }
    b.push(Line::Plain("return".into()), false);
    let open: Vec<usize> = (0..b.lines.len()).filter(|&i| !b.sealed[i]).collect();
    for (i, line) in b.lines.iter_mut().enumerate() {
        // mostly forward jumps, so loops stay rare
        let pick = |rng: &mut ChaCha8Rng| {
            let fwd: Vec<usize> = open.iter().copied().filter(|&j| j > i).collect();
            if !fwd.is_empty() && rng.gen_bool(0.85) {
                *fwd.choose(rng).unwrap()
            } else {
                *open.choose(rng).unwrap()
            }
        };
        match line {
            Line::If { t, f, .. } => {
                *t = pick(rng);
                *f = pick(rng);
            }
            Line::Goto(t) => *t = pick(rng),
            Line::Plain(_) => {}
        }
    }
    b
}

fn render(b: &Body, out: &mut String) {
    let mut labelled = vec![false; b.lines.len()];
    for l in &b.lines {
        match l {
            Line::If { t, f, .. } => {
                labelled[*t] = true;
                labelled[*f] = true;
            }
            Line::Goto(t) => labelled[*t] = true,
            Line::Plain(_) => {}
        }
    }
    for (i, l) in b.lines.iter().enumerate() {
        out.push_str("    ");
        if labelled[i] {
            out.push_str(&format!("L{i}: "));
        }
        match l {
            Line::Plain(s) => out.push_str(s),
            Line::If { cond, t, f } => out.push_str(&format!("if {cond} goto L{t} else goto L{f}")),
            Line::Goto(t) => out.push_str(&format!("goto L{t}")),
        }
        out.push('\n');
    }
}

/// A snapshot source with one random class named [`CLASS_NAME`].
pub fn random_class(rng: &mut ChaCha8Rng) -> String {
    let with_helper = rng.gen_bool(0.3);
    let total = rng.gen_range(4..=MAX_STATEMENTS);
    let main_len = if with_helper { (total * 2 / 3).max(3) } else { total };
    let mut targets = 0;
    let main = gen_body(rng, main_len, &mut targets, with_helper, true);
    let mut s = format!(
        "snapshot 30\nclass {CLASS_NAME} {{\n  const R.attr.a = 100\n  const R.attr.b = 101\n  method main(p) {{\n"
    );
    render(&main, &mut s);
    s.push_str("  }\n");
    if with_helper {
        let helper = gen_body(rng, (total - main_len).max(2), &mut targets, false, false);
        s.push_str("  method helper() {\n");
        render(&helper, &mut s);
        s.push_str("  }\n");
    }
    s.push_str("}\n");
    s
}
