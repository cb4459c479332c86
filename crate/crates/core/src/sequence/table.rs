use num_rational::Rational64;
use num_traits::Zero;

use super::{combined, parse, pulse, SequenceError, SequenceProgram, Term};
use crate::angle::{format_ratio, Angle};
use crate::ladder::{Direction, Primitive};

/// Whether a sequence reproduces its gate up to a global phase, or only up to
/// per-state phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseClass {
    PhaseExact,
    UncorrectedPhases,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroEntry {
    pub body: Vec<Term>,
    pub phases: PhaseClass,
}

/// Named sequences, kept in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MacroTable {
    entries: Vec<(String, MacroEntry)>,
    aliases: Vec<(String, String)>,
}

/// Built-in names and the conventional opcode spellings they accept.
pub const TABLE_ALIASES: &[(&str, &str)] = &[
    ("GBASIC", "G"),
    ("NOT0", "NOT(0)"),
    ("CP1_0", "CP1(0)"),
    ("HAD0", "HAD(0)"),
    ("EX10", "EX(1,0)"),
    ("CNOT10", "CNOT(1,0)"),
    ("CNOTBAR10", "CNOTbar(1,0)"),
    ("CP2_0", "CP2(0)"),
    ("HAD10", "HAD(1,0)"),
    ("SW3_23", "SW3(2,3)"),
    ("SW3_34", "SW3(3,4)"),
    ("SW3_45", "SW3(4,5)"),
    ("EX21", "EX(2,1)"),
    ("RR3", "RR3"),
    ("RL3", "RL3"),
    ("CP3_0", "CP3(0)"),
];

/// Kinetic angle θG of the `GBASIC` entry in the built-in table.
pub const GBASIC_DEFAULT_THETA: Angle = Angle::pi_frac_raw(1, 2);

fn alias_key(name: &str) -> String {
    name.chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(char::to_uppercase)
        .collect()
}

impl MacroTable {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Adds or replaces an entry.
    pub fn insert(&mut self, name: &str, body: Vec<Term>, phases: PhaseClass) {
        let entry = MacroEntry { body, phases };
        match self.entries.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = entry,
            None => self.entries.push((name.to_string(), entry)),
        }
    }

    pub fn add_alias(&mut self, alias: &str, target: &str) {
        self.aliases.push((alias_key(alias), target.to_string()));
    }

    /// Exact-name lookup.
    pub fn get(&self, name: &str) -> Option<&MacroEntry> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, e)| e)
    }

    /// Lookup by name or alias; returns the canonical name.
    pub fn resolve(&self, name: &str) -> Option<(&str, &MacroEntry)> {
        if let Some((n, e)) = self.entries.iter().find(|(n, _)| n == name) {
            return Some((n.as_str(), e));
        }
        let key = alias_key(name);
        let target = self
            .aliases
            .iter()
            .find(|(a, _)| *a == key)
            .map(|(_, t)| t.as_str())?;
        self.entries
            .iter()
            .find(|(n, _)| n == target)
            .map(|(n, e)| (n.as_str(), e))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks that every macro reference resolves and that there are no cycles.
    pub fn validate(&self) -> Result<(), super::ExpandError> {
        for name in self.names() {
            super::expand_macro(name, self)?;
        }
        Ok(())
    }
}

const TABLE_SOURCE: &str = "
def NOT0 = F(1/2) . W+(1/2, 0) . F(1/2)
def CP1_0 = F(1) . W+(1, 0)
def HAD0 = W+(1/4, 1/2) . F(1) . W+(1, 0)
def EX10 = F(1/2) . W-(1/4, 1) . G(1/4) . W-(1/4, 1/4) . F(5/4)
def CNOT10 = F(1/2) . W+(1/4, 1) . G(1/4) . W+(1/4, 1/4) . F(5/4)
def CNOTBAR10 = W+(1, 0) . F(3/2) . W+(1/4, 0) . G(1/4) . W+(1/4, 1/4) . F(5/4)
def CP2_0 = F(3/4) . G(1/4) . W+(1, 0)
def HAD10 = EX10 . HAD0 . EX10 . HAD0
def SW3_23 = W+(1/4, 0) . G(1/8) . W+(1/4, 9/8) . F(5/4) . G(1/8)
           . W+(1/4, 0) . G(1/8) . W+(1/4, 9/8) . F(13/8) . G(1/4)
def SW3_34 = F(1) . W-(1/4, 0) . G(1/8) . W-(1/4, 5/8) . F(5/4) . G(1/8)
           . W-(1/4, 0) . G(1/8) . W-(1/4, 5/8) . F(13/8) . G(1/4)
def SW3_45 = W+(1/4, 0) . G(1/8) . W+(1/4, 5/8) . F(5/4) . G(1/8)
           . W+(1/4, 0) . G(1/8) . W+(1/4, 5/8) . F(1/8) . G(1/4)
def EX21 = W+(1, 0) . CNOTBAR10 . EX10 . G(3/8) . F(13/8) . EX10 . CNOTBAR10
         . SW3_34 . NOT0 . F(1) . NOT0 . SW3_45
         . NOT0 . F(1) . NOT0 . SW3_23 . SW3_34 . G(3/8) . F(5/8)
def RR3 = EX21 . EX10
def RL3 = RR3 . RR3
def CP3_0 = NOT0 . RL3 . NOT0 . RL3 . F(5/8) . G(3/8) . RR3 . SW3_45 . F(3/2)
          . SW3_45 . F(1/2) . NOT0 . RR3 . NOT0 . W+(1, 0)
";

/// The basic kinetic-evolution sequence: four `FG(θG/4)` segments separated
/// by π pulses (α = π/2), two upward then two downward, so each state spends
/// equal time in the ground and excited level and the electronic phase
/// cancels. Textual order, rightmost first.
pub fn gbasic(theta: Angle, omega_tau: Rational64) -> SequenceProgram {
    let quarter = theta.scale(Rational64::new(1, 4));
    let seg = || combined(quarter, omega_tau);
    SequenceProgram::from_terms(vec![
        pulse(Direction::Down, (1, 2), (0, 1)),
        seg(),
        pulse(Direction::Down, (1, 2), (0, 1)),
        seg(),
        pulse(Direction::Up, (1, 2), (0, 1)),
        seg(),
        pulse(Direction::Up, (1, 2), (0, 1)),
        seg(),
    ])
}

/// The opcode table with every row, in table order.
pub fn builtin_table() -> MacroTable {
    let prog = parse(TABLE_SOURCE).expect("built-in table source parses");
    let mut table = MacroTable::empty();
    table.insert(
        "GBASIC",
        gbasic(GBASIC_DEFAULT_THETA, super::DEFAULT_OMEGA_TAU).items,
        PhaseClass::PhaseExact,
    );
    for def in prog.defs {
        let phases = if def.name.starts_with("SW3_") {
            PhaseClass::UncorrectedPhases
        } else {
            PhaseClass::PhaseExact
        };
        table.insert(&def.name, def.body, phases);
    }
    for (name, alias) in TABLE_ALIASES {
        table.add_alias(alias, name);
    }
    debug_assert!(table.validate().is_ok());
    table
}

/// Interferometric-cooling sequence in application order (10 primitives).
///
/// `t` and `t_prime` are the durations T and T′ in units of πτ, so that the
/// kinetic angle of a segment of duration T is `t·π` and its electronic angle
/// is `omega_tau·t·π`. Pulse phases are 0.
pub fn weitz_hansch(
    t: Rational64,
    t_prime: Rational64,
    omega_tau: Rational64,
) -> Result<Vec<Primitive>, SequenceError> {
    if t <= Rational64::zero() || t_prime <= Rational64::zero() {
        return Err(SequenceError::NonPositiveDuration {
            t: format_ratio(t),
            t_prime: format_ratio(t_prime),
        });
    }
    let two = Rational64::from_integer(2);
    let middle = two * t - t_prime;
    if middle < Rational64::zero() {
        return Err(SequenceError::NegativeSegment {
            t: format_ratio(t),
            t_prime: format_ratio(t_prime),
        });
    }
    let kinetic = |d: Rational64| Primitive::g(Angle::from_ratio(d));
    let electronic = |d: Rational64| Primitive::f(Angle::from_ratio(d * omega_tau));
    let splitter = Primitive::up(Angle::pi_frac(1, 4), Angle::ZERO);
    let mirror = Primitive::down(Angle::pi_frac(1, 2), Angle::ZERO);
    Ok(vec![
        splitter,
        electronic(t_prime),
        kinetic(t_prime),
        mirror,
        electronic(two * t),
        kinetic(two * t),
        mirror,
        electronic(middle),
        kinetic(middle),
        splitter,
    ])
}

#[cfg(test)]
mod tests {
    use super::super::{expand, expand_macro};
    use super::*;

    fn q(n: i64, d: i64) -> Angle {
        Angle::pi_frac(n, d)
    }

    #[test]
    fn table_rows() {
        let t = builtin_table();
        let names: Vec<_> = t.names().collect();
        assert_eq!(
            names,
            vec![
                "GBASIC",
                "NOT0",
                "CP1_0",
                "HAD0",
                "EX10",
                "CNOT10",
                "CNOTBAR10",
                "CP2_0",
                "HAD10",
                "SW3_23",
                "SW3_34",
                "SW3_45",
                "EX21",
                "RR3",
                "RL3",
                "CP3_0"
            ]
        );
        assert!(t.validate().is_ok());
        let starred: Vec<_> = t
            .names()
            .filter(|n| t.get(n).unwrap().phases == PhaseClass::UncorrectedPhases)
            .collect();
        assert_eq!(starred, vec!["SW3_23", "SW3_34", "SW3_45"]);
    }

    #[test]
    fn lookups() {
        let t = builtin_table();
        assert_eq!(
            t.get("RR3").unwrap().body,
            vec![Term::Macro("EX21".into()), Term::Macro("EX10".into())]
        );
        let (name, cp1) = t.resolve("CP1(0)").unwrap();
        assert_eq!(name, "CP1_0");
        assert_eq!(
            cp1.body,
            vec![
                Term::Prim(Primitive::f(q(1, 1))),
                Term::Prim(Primitive::up(q(1, 1), Angle::ZERO))
            ]
        );
        assert_eq!(
            t.resolve("SW3(2,3)").unwrap().1.phases,
            PhaseClass::UncorrectedPhases
        );
        assert_eq!(t.resolve("cnotbar(1, 0)").unwrap().0, "CNOTBAR10");
        assert_eq!(t.resolve("G").unwrap().0, "GBASIC");
        assert!(t.resolve("BOGUS").is_none());
    }

    #[test]
    fn expand_not0() {
        let t = builtin_table();
        assert_eq!(
            expand_macro("NOT0", &t).unwrap(),
            vec![
                Primitive::f(q(1, 2)),
                Primitive::up(q(1, 2), Angle::ZERO),
                Primitive::f(q(1, 2))
            ]
        );
        assert!(expand(&SequenceProgram::default(), &t).unwrap().is_empty());
    }

    #[test]
    fn rr3_count_is_sum_of_parts() {
        let t = builtin_table();
        let n = |m: &str| expand_macro(m, &t).unwrap().len();
        assert_eq!(n("RR3"), n("EX21") + n("EX10"));
        assert_eq!(n("RL3"), 2 * n("RR3"));
        // structural recursion over the EX21 row
        let ex21 = 1
            + 2 * n("CNOTBAR10")
            + 2 * n("EX10")
            + 2
            + 2 * n("SW3_34")
            + 4 * n("NOT0")
            + 2
            + n("SW3_45")
            + n("SW3_23")
            + 2;
        assert_eq!(n("RR3"), 88);
        assert_eq!(n("EX21"), ex21);
    }

    #[test]
    fn builtin_kinetic_angles_are_eighths() {
        let t = builtin_table();
        for name in t.names() {
            for p in expand_macro(name, &t).unwrap() {
                if let Some(theta) = p.kinetic_angle() {
                    assert!(theta.is_multiple_of_pi_over(8), "{name}: {theta}");
                }
            }
        }
    }

    #[test]
    fn weitz_hansch_structure() {
        let r = Rational64::new;
        let seq = weitz_hansch(r(1, 4), r(1, 8), r(3, 1)).unwrap();
        assert_eq!(seq.len(), 10);
        assert_eq!(seq[0], Primitive::up(q(1, 4), Angle::ZERO));
        assert_eq!(seq[9], Primitive::up(q(1, 4), Angle::ZERO));
        let total: Rational64 = seq
            .iter()
            .filter_map(|p| p.kinetic_angle())
            .map(|a| a.ratio())
            .sum();
        assert_eq!(total, r(4, 1) * r(1, 4));
        let seq = weitz_hansch(r(1, 4), r(1, 2), r(3, 1)).unwrap();
        assert_eq!(seq[8], Primitive::g(Angle::ZERO));
        assert_eq!(seq[7], Primitive::f(Angle::ZERO));
        assert!(weitz_hansch(r(0, 1), r(1, 2), r(1, 1)).is_err());
        assert!(weitz_hansch(r(1, 4), r(-1, 2), r(1, 1)).is_err());
        assert!(weitz_hansch(r(1, 4), r(1, 1), r(1, 1)).is_err());
    }

    #[test]
    fn gbasic_shape() {
        let g = gbasic(q(1, 2), Rational64::from_integer(3));
        assert_eq!(g.items.len(), 8);
        let flat = expand(&g, &MacroTable::empty()).unwrap();
        assert_eq!(flat[0], Primitive::fg(q(1, 8), Rational64::from_integer(3)));
        assert_eq!(flat[7], Primitive::down(q(1, 2), Angle::ZERO));
    }
}
