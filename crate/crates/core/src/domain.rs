//! Shared domain types: equation instances, colorings, and the compact
//! `[n1->d1; ...; nk->dk]` solution notation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("invalid instance (m={m}, a={a}): need m >= 3 and a >= 1")]
    InvalidInstance { m: u64, a: u64 },
    #[error("empty coloring")]
    EmptyColoring,
    #[error("invalid color character {0:?} (expected 'R' or 'B')")]
    BadColorChar(char),
    #[error("compact assignment has no groups")]
    EmptyAssignment,
    #[error("group counts sum to {got}, expected m = {expected}")]
    CountMismatch { expected: u64, got: u64 },
    #[error("value 0 in group {index}; values must be positive")]
    ZeroValue { index: usize },
    #[error("last group has count 0; it must supply x_m")]
    EmptyLastGroup,
    #[error("cannot parse compact assignment: {0}")]
    Parse(String),
}

/// The equation `x_1 + ... + x_{m-1} = a * x_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EquationInstance {
    m: u64,
    a: u64,
}

impl EquationInstance {
    pub fn new(m: u64, a: u64) -> Result<Self, DomainError> {
        if m < 3 || a < 1 {
            return Err(DomainError::InvalidInstance { m, a });
        }
        Ok(Self { m, a })
    }

    /// Number of variables.
    pub fn m(&self) -> u64 {
        self.m
    }

    /// Right-hand coefficient.
    pub fn a(&self) -> u64 {
        self.a
    }

    /// Number of variables on the left-hand side.
    pub fn left_len(&self) -> u64 {
        self.m - 1
    }
}

impl fmt::Display for EquationInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L(m={}, a={})", self.m, self.a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub const BOTH: [Color; 2] = [Color::Red, Color::Blue];

    pub fn index(self) -> usize {
        match self {
            Color::Red => 0,
            Color::Blue => 1,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Color::Red => 'R',
            Color::Blue => 'B',
        }
    }

    pub fn other(self) -> Color {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Red => "red",
            Color::Blue => "blue",
        })
    }
}

/// A total red/blue coloring of `[n] = {1, ..., n}`.
///
/// Serialized as a string over `{R, B}` where position `i` (1-indexed) holds
/// the color of element `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coloring {
    colors: Vec<Color>,
}

impl Coloring {
    pub fn new(colors: Vec<Color>) -> Result<Self, DomainError> {
        if colors.is_empty() {
            return Err(DomainError::EmptyColoring);
        }
        Ok(Self { colors })
    }

    /// Colors every listed element red and the rest of `[n]` blue.
    /// Elements outside `[n]` are ignored.
    pub fn from_red_set(n: usize, red: &[u64]) -> Result<Self, DomainError> {
        let mut colors = vec![Color::Blue; n];
        for &r in red {
            if r >= 1 && (r as usize) <= n {
                colors[r as usize - 1] = Color::Red;
            }
        }
        Self::new(colors)
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    /// Color of element `x` (1-indexed).
    pub fn color_of(&self, x: u64) -> Option<Color> {
        if x == 0 {
            return None;
        }
        self.colors.get(x as usize - 1).copied()
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    /// Sorted elements of the given color class.
    pub fn class(&self, color: Color) -> Vec<u64> {
        self.colors
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == color)
            .map(|(i, _)| i as u64 + 1)
            .collect()
    }

    /// Restriction to `[n']`, or `None` if `n'` is 0 or exceeds `n`.
    pub fn restrict(&self, n: usize) -> Option<Coloring> {
        if n == 0 || n > self.colors.len() {
            return None;
        }
        Some(Self {
            colors: self.colors[..n].to_vec(),
        })
    }
}

impl fmt::Display for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.colors {
            write!(f, "{}", c.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Coloring {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let colors = s
            .trim()
            .chars()
            .map(|ch| match ch {
                'R' => Ok(Color::Red),
                'B' => Ok(Color::Blue),
                other => Err(DomainError::BadColorChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(colors)
    }
}

/// One `count -> value` group of a compact assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Group {
    pub count: u64,
    pub value: u64,
}

/// A solution written as `[n1->d1; n2->d2; ...; nk->dk]`: value `d1` goes to
/// the first `n1` variables, `d2` to the next `n2`, and so on. The final group
/// contains `x_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompactAssignment {
    groups: Vec<Group>,
}

impl CompactAssignment {
    pub fn new(groups: Vec<Group>) -> Self {
        Self { groups }
    }

    /// Builds from `(count, value)` pairs.
    pub fn from_pairs(pairs: &[(u64, u64)]) -> Self {
        Self {
            groups: pairs
                .iter()
                .map(|&(count, value)| Group { count, value })
                .collect(),
        }
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn total_count(&self) -> u64 {
        self.groups.iter().map(|g| g.count).sum()
    }

    /// Distinct values used by groups with a nonzero count.
    pub fn values(&self) -> Vec<u64> {
        let mut vals: Vec<u64> = self
            .groups
            .iter()
            .filter(|g| g.count > 0)
            .map(|g| g.value)
            .collect();
        vals.sort_unstable();
        vals.dedup();
        vals
    }

    /// Largest value used, if any group is nonempty.
    pub fn max_value(&self) -> Option<u64> {
        self.values().last().copied()
    }

    fn check_structure(&self, m: u64) -> Result<(), DomainError> {
        if self.groups.is_empty() {
            return Err(DomainError::EmptyAssignment);
        }
        let total = self.total_count();
        if total != m {
            return Err(DomainError::CountMismatch {
                expected: m,
                got: total,
            });
        }
        if let Some(index) = self.groups.iter().position(|g| g.count > 0 && g.value == 0) {
            return Err(DomainError::ZeroValue { index });
        }
        if self.groups.last().map(|g| g.count) == Some(0) {
            return Err(DomainError::EmptyLastGroup);
        }
        Ok(())
    }
}

impl fmt::Display for CompactAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}->{}", g.count, g.value)?;
        }
        f.write_str("]")
    }
}

impl FromStr for CompactAssignment {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix('[')
            .and_then(|rest| rest.strip_suffix(']'))
            .ok_or_else(|| DomainError::Parse(format!("missing brackets in {s:?}")))?;
        if inner.is_empty() {
            return Err(DomainError::EmptyAssignment);
        }
        let groups = inner
            .split(';')
            .map(|part| {
                let (count, value) = part
                    .split_once("->")
                    .ok_or_else(|| DomainError::Parse(format!("missing '->' in {part:?}")))?;
                let count = count
                    .parse::<u64>()
                    .map_err(|e| DomainError::Parse(format!("count {count:?}: {e}")))?;
                let value = value
                    .parse::<u64>()
                    .map_err(|e| DomainError::Parse(format!("value {value:?}: {e}")))?;
                Ok(Group { count, value })
            })
            .collect::<Result<Vec<_>, DomainError>>()?;
        Ok(Self { groups })
    }
}

/// A monochromatic solution refuting a coloring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoWitness {
    pub color: Color,
    pub assignment: CompactAssignment,
}

impl fmt::Display for MonoWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.color, self.assignment)
    }
}

/// Checks that `asg` is a true instance of `inst`.
///
/// Structural problems (wrong total count, empty last group, zero values)
/// are errors; an arithmetically false equation is `Ok(false)`.
pub fn validate_compact(
    inst: &EquationInstance,
    asg: &CompactAssignment,
) -> Result<bool, DomainError> {
    asg.check_structure(inst.m())?;
    let weighted: u128 = asg
        .groups
        .iter()
        .map(|g| g.count as u128 * g.value as u128)
        .sum();
    let last = asg.groups.last().expect("checked nonempty").value as u128;
    Ok(weighted - last == inst.a() as u128 * last)
}

/// Flattens the groups into one value per variable; `x_m` is last.
pub fn expand_compact(m: u64, asg: &CompactAssignment) -> Result<Vec<u64>, DomainError> {
    asg.check_structure(m)?;
    Ok(asg
        .groups
        .iter()
        .flat_map(|g| std::iter::repeat_n(g.value, g.count as usize))
        .collect())
}

/// Exact band-edge comparisons, done by integer cross-multiplication.
pub mod bounds {
    /// `m <= 3a/2 + 1`
    pub fn le_three_halves_plus_one(m: u64, a: u64) -> bool {
        2 * m <= 3 * a + 2
    }

    /// `m < 2a/3 + 1`
    pub fn lt_two_thirds_plus_one(m: u64, a: u64) -> bool {
        3 * m < 2 * a + 3
    }

    /// `2a/3 + 1 <= m`
    pub fn ge_two_thirds_plus_one(m: u64, a: u64) -> bool {
        !lt_two_thirds_plus_one(m, a)
    }

    /// `a/2 + 1 <= m`
    pub fn ge_half_plus_one(m: u64, a: u64) -> bool {
        a + 2 <= 2 * m
    }

    /// `a ≡ m - 1 (mod modulus)`, for `m >= 1`.
    pub fn congruent_to_m_minus_one(a: u64, m: u64, modulus: u64) -> bool {
        a % modulus == (m - 1) % modulus
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(m: u64, a: u64) -> EquationInstance {
        EquationInstance::new(m, a).unwrap()
    }

    #[test]
    fn instance_bounds() {
        assert!(EquationInstance::new(2, 1).is_err());
        assert!(EquationInstance::new(3, 0).is_err());
        assert!(EquationInstance::new(3, 1).is_ok());
    }

    #[test]
    fn validate_examples() {
        let a: CompactAssignment = "[6->3; 1->6]".parse().unwrap();
        assert_eq!(validate_compact(&inst(7, 3), &a), Ok(true));
        let a: CompactAssignment = "[12->1; 1->3]".parse().unwrap();
        assert_eq!(validate_compact(&inst(13, 4), &a), Ok(true));
        let a: CompactAssignment = "[7->4; 3->3; 3->1; 1->10]".parse().unwrap();
        assert_eq!(validate_compact(&inst(14, 4), &a), Ok(true));
        let a: CompactAssignment = "[5->3; 1->6]".parse().unwrap();
        assert_eq!(
            validate_compact(&inst(7, 3), &a),
            Err(DomainError::CountMismatch {
                expected: 7,
                got: 6
            })
        );
    }

    #[test]
    fn validate_false_is_not_error() {
        let a = CompactAssignment::from_pairs(&[(6, 3), (1, 5)]);
        assert_eq!(validate_compact(&inst(7, 3), &a), Ok(false));
    }

    #[test]
    fn validate_structural_errors() {
        let i = inst(3, 1);
        assert_eq!(
            validate_compact(&i, &CompactAssignment::new(vec![])),
            Err(DomainError::EmptyAssignment)
        );
        assert_eq!(
            validate_compact(&i, &CompactAssignment::from_pairs(&[(3, 1), (0, 2)])),
            Err(DomainError::EmptyLastGroup)
        );
        assert!(matches!(
            validate_compact(&i, &CompactAssignment::from_pairs(&[(2, 0), (1, 0)])),
            Err(DomainError::ZeroValue { .. })
        ));
    }

    #[test]
    fn expand_examples() {
        let e = |s: &str| expand_compact(3, &s.parse().unwrap()).unwrap();
        assert_eq!(e("[2->5; 1->7]"), vec![5, 5, 7]);
        assert_eq!(e("[3->1]"), vec![1, 1, 1]);
        assert_eq!(e("[0->9; 3->2]"), vec![2, 2, 2]);
        assert!(expand_compact(4, &"[3->1]".parse().unwrap()).is_err());
    }

    #[test]
    fn compact_text_form() {
        let a: CompactAssignment = " [ 6 -> 3 ;1->6 ] ".parse().unwrap();
        assert_eq!(a.to_string(), "[6->3; 1->6]");
        assert!("6->3; 1->6".parse::<CompactAssignment>().is_err());
        assert!("[6-3]".parse::<CompactAssignment>().is_err());
        assert!("[-1->3]".parse::<CompactAssignment>().is_err());
        assert!("[]".parse::<CompactAssignment>().is_err());
    }

    #[test]
    fn coloring_text_form() {
        let c: Coloring = "RBBRRRBB".parse().unwrap();
        assert_eq!(c.n(), 8);
        assert_eq!(c.class(Color::Red), vec![1, 4, 5, 6]);
        assert_eq!(c.class(Color::Blue), vec![2, 3, 7, 8]);
        assert_eq!(c, Coloring::from_red_set(8, &[1, 4, 5, 6]).unwrap());
        assert_eq!(c.to_string(), "RBBRRRBB");
        assert_eq!(
            "RxB".parse::<Coloring>(),
            Err(DomainError::BadColorChar('x'))
        );
        assert_eq!("".parse::<Coloring>(), Err(DomainError::EmptyColoring));
        assert_eq!(c.restrict(3).unwrap().to_string(), "RBB");
        assert!(c.restrict(9).is_none());
    }

    #[test]
    fn band_edges() {
        use bounds::*;
        // 3a/2+1 with a=4 is 7
        assert!(le_three_halves_plus_one(7, 4));
        assert!(!le_three_halves_plus_one(8, 4));
        // 2a/3+1 with a=10 is 23/3
        assert!(lt_two_thirds_plus_one(7, 10));
        assert!(!lt_two_thirds_plus_one(8, 10));
        // a/2+1 with a=10 is 6
        assert!(ge_half_plus_one(6, 10));
        assert!(!ge_half_plus_one(5, 10));
        assert!(congruent_to_m_minus_one(5, 6, 2));
        assert!(!congruent_to_m_minus_one(4, 9, 3));
    }
}
