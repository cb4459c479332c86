//! Pulse-sequence language.
//!
//! A program is a `.`-separated list of terms written, like operator
//! products, so that the **rightmost term acts first**. Angles are rational
//! multiples of π:
//!
//! ```text
//! # NOT on the lowest qubit
//! def MYNOT = F(1/2) . W+(1/2, 0) . F(1/2)
//! MYNOT . G(1/4) . EX(1,0)
//! ```
//!
//! [`expand`] flattens a program into primitives in *application* order,
//! i.e. the reverse of the textual order.

mod parser;
mod table;

use std::collections::HashMap;
use std::fmt;

use num_rational::Rational64;

use crate::angle::{format_ratio, Angle};
use crate::ladder::{Direction, Primitive};

pub use parser::{parse, parse_with, ParseError, ParseOptions, DEFAULT_OMEGA_TAU};
pub use table::{
    builtin_table, gbasic, weitz_hansch, MacroEntry, MacroTable, PhaseClass, GBASIC_DEFAULT_THETA,
    TABLE_ALIASES,
};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Prim(Primitive),
    /// Reference to a macro, by name as written.
    Macro(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MacroDef {
    pub name: String,
    pub body: Vec<Term>,
}

/// Parsed program: local macro definitions plus the main term list in
/// textual order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SequenceProgram {
    pub defs: Vec<MacroDef>,
    pub items: Vec<Term>,
}

impl SequenceProgram {
    pub fn from_terms(items: Vec<Term>) -> Self {
        SequenceProgram {
            defs: Vec::new(),
            items,
        }
    }

    pub fn macro_call(name: &str) -> Self {
        Self::from_terms(vec![Term::Macro(name.to_string())])
    }

    /// Textual product `self · rhs` (so `rhs` acts first).
    pub fn times(&self, rhs: &SequenceProgram) -> SequenceProgram {
        let mut defs = self.defs.clone();
        defs.extend(rhs.defs.iter().cloned());
        let mut items = self.items.clone();
        items.extend(rhs.items.iter().cloned());
        SequenceProgram { defs, items }
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExpandError {
    #[error("unknown macro `{0}`")]
    UnknownMacro(String),
    #[error("macro cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SequenceError {
    #[error("durations must be positive (got T = {t}, T' = {t_prime})")]
    NonPositiveDuration { t: String, t_prime: String },
    #[error("segment 2T - T' is negative (T = {t}, T' = {t_prime})")]
    NegativeSegment { t: String, t_prime: String },
}

/// Flattens `prog` into primitives in application order (rightmost textual
/// term first). Local definitions shadow entries of `table`.
pub fn expand(prog: &SequenceProgram, table: &MacroTable) -> Result<Vec<Primitive>, ExpandError> {
    let local: HashMap<&str, &[Term]> = prog
        .defs
        .iter()
        .map(|d| (d.name.as_str(), d.body.as_slice()))
        .collect();
    let mut out = Vec::new();
    let mut stack = Vec::new();
    expand_terms(&prog.items, &local, table, &mut stack, &mut out)?;
    Ok(out)
}

/// Expands a table entry by name.
pub fn expand_macro(name: &str, table: &MacroTable) -> Result<Vec<Primitive>, ExpandError> {
    expand(&SequenceProgram::macro_call(name), table)
}

fn expand_terms(
    terms: &[Term],
    local: &HashMap<&str, &[Term]>,
    table: &MacroTable,
    stack: &mut Vec<String>,
    out: &mut Vec<Primitive>,
) -> Result<(), ExpandError> {
    for term in terms.iter().rev() {
        match term {
            Term::Prim(p) => out.push(*p),
            Term::Macro(name) => {
                let (key, body): (String, &[Term]) = match local.get(name.as_str()) {
                    Some(body) => (name.clone(), body),
                    None => {
                        let (key, entry) = table
                            .resolve(name)
                            .ok_or_else(|| ExpandError::UnknownMacro(name.clone()))?;
                        (key.to_string(), entry.body.as_slice())
                    }
                };
                if stack.contains(&key) {
                    let mut path = stack.clone();
                    path.push(key);
                    return Err(ExpandError::Cycle(path));
                }
                stack.push(key);
                expand_terms(body, local, table, stack, out)?;
                stack.pop();
            }
        }
    }
    Ok(())
}

/// Textual form of a primitive, angles in units of π: `W+(1/4,9/8)`, `F(1/2)`.
pub fn format_primitive(p: &Primitive) -> String {
    match *p {
        Primitive::Pulse { dir, alpha, phi } => {
            let sign = match dir {
                Direction::Up => '+',
                Direction::Down => '-',
            };
            format!("W{sign}({alpha},{phi})")
        }
        Primitive::FreeElectronic { theta } => format!("F({theta})"),
        Primitive::FreeKinetic { theta } => format!("G({theta})"),
        Primitive::FreeCombined { theta, omega_tau } => {
            format!("FG({theta},{})", format_ratio(omega_tau))
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Prim(p) => f.write_str(&format_primitive(p)),
            Term::Macro(name) => f.write_str(name),
        }
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, terms: &[Term]) -> fmt::Result {
    for (i, t) in terms.iter().enumerate() {
        if i > 0 {
            f.write_str(" . ")?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}

/// Canonical source form; `parse` is its inverse.
impl fmt::Display for SequenceProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.defs {
            write!(f, "def {} = ", d.name)?;
            write_terms(f, &d.body)?;
            f.write_str("\n")?;
        }
        write_terms(f, &self.items)
    }
}

// Shorthands for building programs in code.
pub(crate) fn pulse(dir: Direction, alpha: (i64, i64), phi: (i64, i64)) -> Term {
    Term::Prim(Primitive::Pulse {
        dir,
        alpha: Angle::pi_frac(alpha.0, alpha.1),
        phi: Angle::pi_frac(phi.0, phi.1),
    })
}

pub(crate) fn combined(theta: Angle, omega_tau: Rational64) -> Term {
    Term::Prim(Primitive::fg(theta, omega_tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Angle {
        Angle::pi_frac(n, d)
    }

    #[test]
    fn expand_reverses_textual_order() {
        let prog = parse("F(1/2) . G(1/4) . W+(1/4, 0)").unwrap();
        let flat = expand(&prog, &MacroTable::empty()).unwrap();
        assert_eq!(
            flat,
            vec![
                Primitive::up(q(1, 4), Angle::ZERO),
                Primitive::g(q(1, 4)),
                Primitive::f(q(1, 2))
            ]
        );
    }

    #[test]
    fn local_macros_and_shadowing() {
        let prog = parse("def A = F(1) . G(1/8)\nA . F(1/2)").unwrap();
        let flat = expand(&prog, &builtin_table()).unwrap();
        assert_eq!(
            flat,
            vec![
                Primitive::f(q(1, 2)),
                Primitive::g(q(1, 8)),
                Primitive::f(q(1, 1))
            ]
        );
        let prog = parse("def NOT0 = G(1/8)\nNOT0").unwrap();
        assert_eq!(
            expand(&prog, &builtin_table()).unwrap(),
            vec![Primitive::g(q(1, 8))]
        );
    }

    #[test]
    fn unknown_macro() {
        let prog = parse("F(1) . NOPE").unwrap();
        assert_eq!(
            expand(&prog, &builtin_table()),
            Err(ExpandError::UnknownMacro("NOPE".into()))
        );
    }

    #[test]
    fn cycles_detected() {
        let prog = parse("def A = B . F(1)\ndef B = G(1/8) . A\nA").unwrap();
        match expand(&prog, &MacroTable::empty()) {
            Err(ExpandError::Cycle(path)) => assert_eq!(path, vec!["A", "B", "A"]),
            other => panic!("{other:?}"),
        }
        let prog = parse("def A = A\nA").unwrap();
        assert!(matches!(
            expand(&prog, &MacroTable::empty()),
            Err(ExpandError::Cycle(_))
        ));
    }

    #[test]
    fn repeated_macro_is_not_a_cycle() {
        let prog = parse("def A = F(1)\nA . A . A").unwrap();
        assert_eq!(expand(&prog, &MacroTable::empty()).unwrap().len(), 3);
    }

    #[test]
    fn printing() {
        let prog = parse("def X = W-(1/4, 5/8) . FG(1/8, 3)\nX . G(-3/8) . NOT(0)").unwrap();
        assert_eq!(
            prog.to_string(),
            "def X = W-(1/4,5/8) . FG(1/8,3)\nX . G(-3/8) . NOT(0)"
        );
        assert_eq!(format_primitive(&Primitive::f(Angle::ZERO)), "F(0)");
    }

    #[test]
    fn times_is_textual_concatenation() {
        let a = parse("F(1/2)").unwrap();
        let b = parse("G(1/4)").unwrap();
        let ab = a.times(&b);
        assert_eq!(
            expand(&ab, &MacroTable::empty()).unwrap(),
            vec![Primitive::g(q(1, 4)), Primitive::f(q(1, 2))]
        );
    }
}
