//! Closed-form side: the candidate bound `C(m,a)`, its algebraic forms, and
//! the piecewise value of `R2(m,a)` by region.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::bounds::{
    congruent_to_m_minus_one, ge_half_plus_one, ge_two_thirds_plus_one, le_three_halves_plus_one,
};
use crate::domain::EquationInstance;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("decomposition needs a >= 2 (got a={0})")]
    CoefficientTooSmall(u64),
    #[error("closed form for m={m}, a={a} requires m >= a^2 - a + 2")]
    OutsideClosedFormRange { m: u64, a: u64 },
    #[error("closed form for m={m}, a={a} is not integral: {numerator}/{denominator}")]
    NonIntegral {
        m: u64,
        a: u64,
        numerator: i128,
        denominator: i128,
    },
    #[error("m={m}, a={a} lies outside a/2+1 <= m <= 2a+1")]
    OutsideValuePairRange { m: u64, a: u64 },
    #[error("unsupported value pair {{{0}, {1}}}")]
    UnsupportedPair(u64, u64),
    #[error("inconsistent rules at m={m}, a={a}: {detail}")]
    Inconsistent { m: u64, a: u64, detail: String },
}

fn ceil_div(num: u64, den: u64) -> u64 {
    num.div_ceil(den)
}

/// `C(m,a) = ceil(((m-1)/a) * ceil((m-1)/a))`.
pub fn compute_c(inst: &EquationInstance) -> u64 {
    candidate_bound(inst.m(), inst.a())
}

/// `C(m,a)` on raw integers; requires `m >= 1`, `a >= 1`.
pub fn candidate_bound(m: u64, a: u64) -> u64 {
    let inner = ceil_div(m - 1, a);
    ceil_div((m - 1) * inner, a)
}

/// `m = u*a^2 + v*a + c` with `u` maximal and `0 <= v, c <= a-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub u: u64,
    pub v: u64,
    pub c: u64,
    a: u64,
}

impl Decomposition {
    pub fn recompose(&self) -> u64 {
        self.u * self.a * self.a + self.v * self.a + self.c
    }

    /// `t = ceil((c-1)(v+1)/a)`, defined when `c >= 2`.
    pub fn t(&self) -> Option<u64> {
        (self.c >= 2).then(|| ceil_div((self.c - 1) * (self.v + 1), self.a))
    }

    /// `gamma = t*a - (c-1)(v+1)`, defined when `c >= 2`.
    pub fn gamma(&self) -> Option<u64> {
        self.t().map(|t| t * self.a - (self.c - 1) * (self.v + 1))
    }
}

pub fn decompose(inst: &EquationInstance) -> Result<Decomposition, FormulaError> {
    let (m, a) = (inst.m(), inst.a());
    if a < 2 {
        return Err(FormulaError::CoefficientTooSmall(a));
    }
    let sq = a * a;
    let rem = m % sq;
    Ok(Decomposition {
        u: m / sq,
        v: rem / a,
        c: rem % a,
        a,
    })
}

/// `C(m,a)` through the three-case algebraic form keyed on the residue `c`.
/// Only valid for `m >= a^2 - a + 2`; every division must be exact.
pub fn closed_form_c(inst: &EquationInstance) -> Result<u64, FormulaError> {
    let (m, a) = (inst.m(), inst.a());
    let d = decompose(inst)?;
    if m + a < a * a + 2 {
        return Err(FormulaError::OutsideClosedFormRange { m, a });
    }
    let (mi, ai, vi, ci) = (m as i128, a as i128, d.v as i128, d.c as i128);
    let numerator = match d.c {
        1 => (mi - 1) * (mi - 1),
        0 => mi * mi - mi + vi * ai,
        _ => {
            let t = d.t().expect("c >= 2") as i128;
            mi * mi + (ai - ci - 1) * mi + ci - ai * ci - vi * ai * ci + vi * ai + t * ai * ai
        }
    };
    let denominator = ai * ai;
    if numerator % denominator != 0 || numerator < 0 {
        return Err(FormulaError::NonIntegral {
            m,
            a,
            numerator,
            denominator,
        });
    }
    Ok((numerator / denominator) as u64)
}

/// Which range hypothesis governs `(m, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionClass {
    /// `m = a + 1`
    TrivialOne,
    /// `a + 2 <= m <= 2a + 1`
    Band2,
    /// `m >= 2a + 2`
    Tail,
    /// `2a/3 + 1 <= m <= a`
    Band4,
    /// `a/2 + 1 <= m < 2a/3 + 1`
    Band5,
    /// `m < a/2 + 1`
    BelowKnown,
    /// `a` is 1 or 2
    SmallA,
}

impl RegionClass {
    pub fn tag(self) -> &'static str {
        match self {
            RegionClass::TrivialOne => "TrivialOne",
            RegionClass::Band2 => "Band2",
            RegionClass::Tail => "Tail",
            RegionClass::Band4 => "Band4",
            RegionClass::Band5 => "Band5",
            RegionClass::BelowKnown => "BelowKnown",
            RegionClass::SmallA => "SmallA",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "TrivialOne" => RegionClass::TrivialOne,
            "Band2" => RegionClass::Band2,
            "Tail" => RegionClass::Tail,
            "Band4" => RegionClass::Band4,
            "Band5" => RegionClass::Band5,
            "BelowKnown" => RegionClass::BelowKnown,
            "SmallA" => RegionClass::SmallA,
            _ => return None,
        })
    }
}

impl fmt::Display for RegionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

pub fn classify_region(inst: &EquationInstance) -> RegionClass {
    let (m, a) = (inst.m(), inst.a());
    if a <= 2 {
        RegionClass::SmallA
    } else if m == a + 1 {
        RegionClass::TrivialOne
    } else if m > a + 1 {
        if m <= 2 * a + 1 {
            RegionClass::Band2
        } else {
            RegionClass::Tail
        }
    } else if ge_two_thirds_plus_one(m, a) {
        RegionClass::Band4
    } else if ge_half_plus_one(m, a) {
        RegionClass::Band5
    } else {
        RegionClass::BelowKnown
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RadoValue {
    Known(u64),
    Unknown,
}

impl RadoValue {
    pub fn known(self) -> Option<u64> {
        match self {
            RadoValue::Known(v) => Some(v),
            RadoValue::Unknown => None,
        }
    }
}

impl fmt::Display for RadoValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadoValue::Known(v) => write!(f, "{v}"),
            RadoValue::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaVerdict {
    pub region: RegionClass,
    pub value: RadoValue,
    /// Short tag naming the rule that produced `value`.
    pub rule: &'static str,
}

/// Value for `a + 2 <= m <= 2a + 1`, `a >= 3`.
fn band2_value(m: u64, a: u64) -> u64 {
    if le_three_halves_plus_one(m, a) {
        if congruent_to_m_minus_one(a, m, 2) {
            3
        } else {
            4
        }
    } else if congruent_to_m_minus_one(a, m, 3) {
        4
    } else {
        5
    }
}

fn band5_exception(m: u64, a: u64) -> Option<u64> {
    match (m, a) {
        (3, 4) => Some(10),
        (4, 5) => Some(9),
        _ if (10..=14).contains(&a) && m + 4 == a => Some(6),
        _ => None,
    }
}

/// The piecewise value of `R2(m,a)`.
///
/// Unknown is a value, not an error; an error means two rules that should
/// coincide at a shared boundary disagreed.
pub fn rado_formula(inst: &EquationInstance) -> Result<FormulaVerdict, FormulaError> {
    let (m, a) = (inst.m(), inst.a());
    let region = classify_region(inst);
    let verdict = |value, rule| FormulaVerdict {
        region,
        value,
        rule,
    };
    let inconsistent = |detail: String| FormulaError::Inconsistent { m, a, detail };

    let out = match region {
        RegionClass::SmallA if a == 1 => verdict(RadoValue::Known(m * m - m - 1), "a=1:m^2-m-1"),
        RegionClass::SmallA if m >= 6 => verdict(RadoValue::Known(compute_c(inst)), "a=2:C(m,a)"),
        RegionClass::SmallA => verdict(RadoValue::Unknown, "a=2:uncovered"),
        RegionClass::TrivialOne => verdict(RadoValue::Known(1), "trivial:m=a+1"),
        RegionClass::Band2 => {
            let value = band2_value(m, a);
            let c = compute_c(inst);
            if m == 2 * a + 1 && a % 3 == 0 {
                if value != c || c != 4 {
                    return Err(inconsistent(format!(
                        "band value {value} vs C={c} at m=2a+1 with 3|a"
                    )));
                }
                verdict(RadoValue::Known(value), "band2:m=2a+1,3|a=C")
            } else if m == 2 * a + 1 {
                if value != 5 {
                    return Err(inconsistent(format!(
                        "band value {value} at m=2a+1 with a not divisible by 3"
                    )));
                }
                verdict(RadoValue::Known(value), "band2:m=2a+1,3!|a")
            } else if m == 2 * a && a % 3 == 0 {
                if value != 5 || c != 4 {
                    return Err(inconsistent(format!(
                        "band value {value}, C={c} at m=2a with 3|a"
                    )));
                }
                verdict(RadoValue::Known(value), "band2:m=2a,3|a")
            } else if le_three_halves_plus_one(m, a) {
                verdict(RadoValue::Known(value), "band2:parity")
            } else {
                verdict(RadoValue::Known(value), "band2:mod3")
            }
        }
        RegionClass::Tail => verdict(RadoValue::Known(compute_c(inst)), "tail:C(m,a)"),
        RegionClass::Band4 if a == 3 => verdict(RadoValue::Known(9), "band4:a=3"),
        RegionClass::Band4 => {
            let value = if congruent_to_m_minus_one(a, m, 2) {
                3
            } else {
                4
            };
            verdict(RadoValue::Known(value), "band4:parity")
        }
        RegionClass::Band5 => match band5_exception(m, a) {
            Some(value) => verdict(RadoValue::Known(value), "band5:exception"),
            None => {
                let value = if congruent_to_m_minus_one(a, m, 3) {
                    4
                } else {
                    5
                };
                verdict(RadoValue::Known(value), "band5:mod3")
            }
        },
        RegionClass::BelowKnown => verdict(RadoValue::Unknown, "below:unknown"),
    };
    Ok(out)
}

/// The two-value sets whose solvability has an arithmetic characterization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValuePair {
    OneTwo,
    OneThree,
    TwoThree,
    OneFour,
}

impl ValuePair {
    pub const ALL: [ValuePair; 4] = [
        ValuePair::OneTwo,
        ValuePair::OneThree,
        ValuePair::TwoThree,
        ValuePair::OneFour,
    ];

    pub fn values(self) -> [u64; 2] {
        match self {
            ValuePair::OneTwo => [1, 2],
            ValuePair::OneThree => [1, 3],
            ValuePair::TwoThree => [2, 3],
            ValuePair::OneFour => [1, 4],
        }
    }

    pub fn from_values(x: u64, y: u64) -> Result<Self, FormulaError> {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        Ok(match (lo, hi) {
            (1, 2) => ValuePair::OneTwo,
            (1, 3) => ValuePair::OneThree,
            (2, 3) => ValuePair::TwoThree,
            (1, 4) => ValuePair::OneFour,
            _ => return Err(FormulaError::UnsupportedPair(x, y)),
        })
    }
}

/// Whether `L(m,a)` has a solution using only the two values of `pair`, by
/// the arithmetic characterization. Requires `a/2 + 1 <= m <= 2a + 1`.
pub fn pair_solution_condition(
    inst: &EquationInstance,
    pair: ValuePair,
) -> Result<bool, FormulaError> {
    let (m, a) = (inst.m(), inst.a());
    if !ge_half_plus_one(m, a) || m > 2 * a + 1 {
        return Err(FormulaError::OutsideValuePairRange { m, a });
    }
    Ok(match pair {
        ValuePair::OneTwo => true,
        ValuePair::OneThree => congruent_to_m_minus_one(a, m, 2),
        ValuePair::TwoThree => ge_two_thirds_plus_one(m, a) && le_three_halves_plus_one(m, a),
        ValuePair::OneFour => congruent_to_m_minus_one(a, m, 3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(m: u64, a: u64) -> EquationInstance {
        EquationInstance::new(m, a).unwrap()
    }

    fn value(m: u64, a: u64) -> RadoValue {
        rado_formula(&inst(m, a)).unwrap().value
    }

    #[test]
    fn compute_c_examples() {
        assert_eq!(compute_c(&inst(9, 4)), 4);
        assert_eq!(compute_c(&inst(6, 3)), 4);
        assert_eq!(compute_c(&inst(13, 4)), 9);
        assert_eq!(compute_c(&inst(7, 3)), 4);
    }

    #[test]
    fn decompose_examples() {
        let d = decompose(&inst(14, 4)).unwrap();
        assert_eq!((d.u, d.v, d.c, d.t()), (0, 3, 2, Some(1)));
        let d = decompose(&inst(16, 4)).unwrap();
        assert_eq!((d.u, d.v, d.c), (1, 0, 0));
        assert_eq!(d.t(), None);
        let d = decompose(&inst(21, 4)).unwrap();
        assert_eq!((d.u, d.v, d.c), (1, 1, 1));
        assert_eq!(d.recompose(), 21);
        assert_eq!(
            decompose(&inst(5, 1)),
            Err(FormulaError::CoefficientTooSmall(1))
        );
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_form_c(&inst(21, 4)), Ok(25));
        assert_eq!(closed_form_c(&inst(16, 4)), Ok(15));
        assert_eq!(closed_form_c(&inst(14, 4)), Ok(13));
        assert!(matches!(
            closed_form_c(&inst(13, 4)),
            Err(FormulaError::OutsideClosedFormRange { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_region(&inst(9, 4)), RegionClass::Band2);
        assert_eq!(classify_region(&inst(6, 10)), RegionClass::Band5);
        assert_eq!(classify_region(&inst(4, 4)), RegionClass::Band4);
        assert_eq!(classify_region(&inst(4, 10)), RegionClass::BelowKnown);
        assert_eq!(classify_region(&inst(5, 4)), RegionClass::TrivialOne);
        assert_eq!(classify_region(&inst(10, 4)), RegionClass::Tail);
        assert_eq!(classify_region(&inst(3, 2)), RegionClass::SmallA);
        assert_eq!(classify_region(&inst(30, 1)), RegionClass::SmallA);
    }

    #[test]
    fn formula_examples() {
        use RadoValue::*;
        assert_eq!(value(5, 4), Known(1));
        assert_eq!(value(6, 3), Known(5));
        assert_eq!(value(11, 5), Known(5));
        assert_eq!(value(3, 3), Known(9));
        assert_eq!(value(3, 4), Known(10));
        assert_eq!(value(6, 10), Known(6));
        // m = a + 1: five 1s sum to 5*1.
        assert_eq!(value(6, 5), Known(1));
        assert_eq!(value(7, 5), Known(4));
        assert_eq!(value(8, 5), Known(3));
        assert_eq!(value(13, 4), Known(9));
        assert_eq!(value(3, 1), Known(5));
        assert_eq!(value(4, 5), Known(9));
        assert_eq!(value(6, 2), Known(8));
        assert_eq!(value(5, 2), Unknown);
        assert_eq!(value(4, 10), Unknown);
    }

    #[test]
    fn formula_rule_tags() {
        let v = rado_formula(&inst(6, 3)).unwrap();
        assert_eq!(v.rule, "band2:m=2a,3|a");
        let v = rado_formula(&inst(3, 4)).unwrap();
        assert_eq!(v.rule, "band5:exception");
        let v = rado_formula(&inst(7, 3)).unwrap();
        assert_eq!(v.rule, "band2:m=2a+1,3|a=C");
    }

    #[test]
    fn pair_condition_examples() {
        assert_eq!(
            pair_solution_condition(&inst(6, 5), ValuePair::OneThree),
            Ok(true)
        );
        assert_eq!(
            pair_solution_condition(&inst(6, 6), ValuePair::TwoThree),
            Ok(true)
        );
        assert_eq!(
            pair_solution_condition(&inst(7, 9), ValuePair::OneFour),
            Ok(true)
        );
        assert_eq!(
            pair_solution_condition(&inst(9, 4), ValuePair::OneFour),
            Ok(false)
        );
        assert!(pair_solution_condition(&inst(10, 4), ValuePair::OneTwo).is_err());
        assert!(pair_solution_condition(&inst(3, 10), ValuePair::OneTwo).is_err());
        assert!(ValuePair::from_values(2, 4).is_err());
        assert_eq!(ValuePair::from_values(3, 2), Ok(ValuePair::TwoThree));
    }

    #[test]
    fn region_is_partition() {
        // Exactly one band predicate holds for every a >= 3.
        for a in 3..=80u64 {
            for m in 3..=4 * a {
                let hits = [
                    m == a + 1,
                    a + 2 <= m && m <= 2 * a + 1,
                    m >= 2 * a + 2,
                    ge_two_thirds_plus_one(m, a) && m <= a,
                    ge_half_plus_one(m, a) && !ge_two_thirds_plus_one(m, a),
                    !ge_half_plus_one(m, a),
                ];
                assert_eq!(hits.iter().filter(|&&h| h).count(), 1, "m={m} a={a}");
            }
        }
    }

    #[test]
    fn formula_total_and_unknown_exactly_where_expected() {
        for a in 1..=60u64 {
            for m in 3..=200u64 {
                let v = rado_formula(&inst(m, a)).unwrap();
                let expect_unknown = v.region == RegionClass::BelowKnown || (a == 2 && m < 6);
                assert_eq!(v.value == RadoValue::Unknown, expect_unknown, "m={m} a={a}");
            }
        }
    }

    #[test]
    fn boundary_at_2a_plus_1() {
        for a in (3..=60u64).filter(|a| a % 3 == 0) {
            let i = inst(2 * a + 1, a);
            assert_eq!(rado_formula(&i).unwrap().value, RadoValue::Known(4));
            assert_eq!(compute_c(&i), 4);
        }
    }

    #[test]
    fn band2_values_in_three_to_five() {
        for a in 3..=60u64 {
            for m in a + 2..=2 * a + 1 {
                let v = value(m, a).known().unwrap();
                assert!((3..=5).contains(&v), "m={m} a={a} v={v}");
            }
        }
    }

    #[test]
    fn closed_form_matches_direct() {
        for a in 2..=20u64 {
            for m in a * a - a + 2..=a * a + 4 * a {
                let i = inst(m, a);
                assert_eq!(closed_form_c(&i), Ok(compute_c(&i)), "m={m} a={a}");
            }
        }
    }

    #[test]
    fn m_minus_one_at_most_c() {
        for a in 4..=20u64 {
            for m in a * a - a + 2..=a * a + 4 * a {
                assert!(m - 1 <= compute_c(&inst(m, a)), "m={m} a={a}");
            }
        }
    }
}
