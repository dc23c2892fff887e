//! Exhaustive search over canonical two-atom geometries.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::{classify_sites, RateTable, Topology};

/// One of the six independent rates, measured in units of `g²/ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateName {
    Gamma11,
    Gamma22,
    Gamma12,
    U11,
    U22,
    U12,
}

impl RateName {
    pub const ALL: [RateName; 6] = [
        RateName::Gamma11,
        RateName::Gamma22,
        RateName::Gamma12,
        RateName::U11,
        RateName::U22,
        RateName::U12,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn key(self) -> &'static str {
        ["g11", "g22", "g12", "u11", "u22", "u12"][self.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparison {
    fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Comparison::Eq => lhs == rhs,
            Comparison::Ne => lhs != rhs,
            Comparison::Lt => lhs < rhs,
            Comparison::Le => lhs <= rhs,
            Comparison::Gt => lhs > rhs,
            Comparison::Ge => lhs >= rhs,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparison::Eq => "=",
            Comparison::Ne => "!=",
            Comparison::Lt => "<",
            Comparison::Le => "<=",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RatePredicate {
    pub rate: RateName,
    pub cmp: Comparison,
    pub value: i64,
}

impl RatePredicate {
    pub fn new(rate: RateName, cmp: Comparison, value: i64) -> Self {
        Self { rate, cmp, value }
    }

    pub fn holds(&self, table: &RateTable) -> bool {
        self.cmp.holds(table.six_units()[self.rate.index()], self.value)
    }
}

impl fmt::Display for RatePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.rate.key(), self.cmp.symbol(), self.value)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstraintParseError {
    #[error("unknown rate '{0}' (expected one of g11, g22, g12, u11, u22, u12)")]
    UnknownRate(String),
    #[error("missing comparison operator in '{0}'")]
    MissingOperator(String),
    #[error("invalid integer '{0}' in constraint")]
    BadValue(String),
    #[error("unknown named constraint '{0}'")]
    UnknownName(String),
}

/// A conjunction of exact integer predicates on the six rates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RateConstraint {
    predicates: Vec<RatePredicate>,
}

/// Named constraints accepted by [`RateConstraint::named`].
const NAMED: &[(&str, &str)] = &[
    (
        "dissipation-free-coupling",
        "g11=0,g22=0,g12=0,u11=0,u22=0,u12!=0",
    ),
    ("fully-decoupled", "g11=0,g22=0,g12=0,u11=0,u22=0,u12=0"),
    (
        "nonreciprocal",
        "g11=0,g22>0,g12=0,u11=0,u22=0,u12!=0",
    ),
];

impl RateConstraint {
    pub fn new(predicates: Vec<RatePredicate>) -> Self {
        Self { predicates }
    }

    pub fn predicates(&self) -> &[RatePredicate] {
        &self.predicates
    }

    pub fn and(mut self, p: RatePredicate) -> Self {
        self.predicates.push(p);
        self
    }

    pub fn satisfied_by(&self, table: &RateTable) -> bool {
        self.predicates.iter().all(|p| p.holds(table))
    }

    pub fn names() -> impl Iterator<Item = &'static str> {
        NAMED.iter().map(|(n, _)| *n)
    }

    pub fn named(name: &str) -> Result<Self, ConstraintParseError> {
        NAMED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, expr)| expr.parse().expect("builtin constraint parses"))
            .ok_or_else(|| ConstraintParseError::UnknownName(name.to_string()))
    }

    /// Accepts either a named constraint or a comma-separated predicate list.
    pub fn parse_any(text: &str) -> Result<Self, ConstraintParseError> {
        if NAMED.iter().any(|(n, _)| *n == text) {
            Self::named(text)
        } else {
            text.parse()
        }
    }
}

impl FromStr for RateConstraint {
    type Err = ConstraintParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut predicates = Vec::new();
        for term in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (pos, op, cmp) = ["!=", "<=", ">=", "=", "<", ">"]
                .iter()
                .find_map(|op| term.find(op).map(|p| (p, *op)))
                .map(|(p, op)| {
                    let cmp = match op {
                        "!=" => Comparison::Ne,
                        "<=" => Comparison::Le,
                        ">=" => Comparison::Ge,
                        "=" => Comparison::Eq,
                        "<" => Comparison::Lt,
                        _ => Comparison::Gt,
                    };
                    (p, op, cmp)
                })
                .ok_or_else(|| ConstraintParseError::MissingOperator(term.to_string()))?;
            let name = term[..pos].trim();
            let value = term[pos + op.len()..].trim();
            let rate = RateName::ALL
                .into_iter()
                .find(|r| r.key() == name)
                .ok_or_else(|| ConstraintParseError::UnknownRate(name.to_string()))?;
            let value = value
                .parse()
                .map_err(|_| ConstraintParseError::BadValue(value.to_string()))?;
            predicates.push(RatePredicate::new(rate, cmp, value));
        }
        Ok(Self { predicates })
    }
}

impl fmt::Display for RateConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.predicates.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// A geometry translated so its minimum site is 0, with ascending sites per
/// atom and atoms ordered by first site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CanonicalGeometry {
    pub first: [i64; 2],
    pub second: [i64; 2],
    pub topology: Topology,
    pub table: RateTable,
}

impl CanonicalGeometry {
    /// Canonical form of an arbitrary pair of distinct-site atoms.
    pub fn canonicalize(a: [i64; 2], b: [i64; 2]) -> Result<Self, super::ModelError> {
        let sort = |s: [i64; 2]| [s[0].min(s[1]), s[0].max(s[1])];
        let (mut a, mut b) = (sort(a), sort(b));
        if b[0] < a[0] {
            std::mem::swap(&mut a, &mut b);
        }
        let shift = a[0];
        let first = [a[0] - shift, a[1] - shift];
        let second = [b[0] - shift, b[1] - shift];
        Ok(Self {
            first,
            second,
            topology: classify_sites(first, second)?,
            table: RateTable::from_sites(first, second)?,
        })
    }

    pub fn span(&self) -> i64 {
        self.first[1].max(self.second[1])
    }
}

/// All canonical two-atom geometries with span at most `max_span` whose exact
/// rates satisfy `constraint`, in lexicographic order of `(n₁, n₂, m₁, m₂)`.
pub fn search_geometries(constraint: &RateConstraint, max_span: u32) -> Vec<CanonicalGeometry> {
    let s = max_span as i64;
    let mut out = Vec::new();
    // n₁ = 0 is forced by canonical ordering.
    for n2 in 1..=s {
        for m1 in 1..=s {
            if m1 == n2 {
                continue;
            }
            for m2 in (m1 + 1)..=s {
                if m2 == n2 {
                    continue;
                }
                let first = [0, n2];
                let second = [m1, m2];
                let table = RateTable::from_sites(first, second).expect("distinct legs");
                if constraint.satisfied_by(&table) {
                    out.push(CanonicalGeometry {
                        first,
                        second,
                        topology: classify_sites(first, second).expect("distinct sites"),
                        table,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_constraints() {
        let c: RateConstraint = "g11=0, u12 != 0,g22>=-1".parse().unwrap();
        assert_eq!(c.predicates().len(), 3);
        assert_eq!(c.to_string(), "g11=0,u12!=0,g22>=-1");
        assert!(matches!(
            "x=1".parse::<RateConstraint>(),
            Err(ConstraintParseError::UnknownRate(_))
        ));
        assert!(matches!(
            "g11".parse::<RateConstraint>(),
            Err(ConstraintParseError::MissingOperator(_))
        ));
        assert!(matches!(
            "g11=a".parse::<RateConstraint>(),
            Err(ConstraintParseError::BadValue(_))
        ));
        assert!(RateConstraint::named("nope").is_err());
        for n in RateConstraint::names() {
            RateConstraint::named(n).unwrap();
        }
    }

    #[test]
    fn canonicalization() {
        let c = CanonicalGeometry::canonicalize([13, 11], [10, 12]).unwrap();
        assert_eq!(c.first, [0, 2]);
        assert_eq!(c.second, [1, 3]);
        assert_eq!(c.topology, Topology::Braided);
    }

    #[test]
    fn empty_constraint_lists_everything() {
        // span 3: n2 ∈ {1,2,3}; remaining two sites from {1,2,3}\{n2} in order
        let all = search_geometries(&RateConstraint::default(), 3);
        assert_eq!(all.len(), 3);
        let mut sorted = all.clone();
        sorted.sort_by_key(|g| (g.first, g.second));
        assert_eq!(all, sorted);
    }

    #[test]
    fn odd_units_unsatisfiable() {
        let c: RateConstraint = "g11=1".parse().unwrap();
        assert!(search_geometries(&c, 12).is_empty());
    }
}
