//! Operator tables and the preset registry.
//!
//! A [`Calculus`] bundles conjunction, disjunction, negation, detachment and
//! evidence combination for one representation family, together with the
//! distinguished elements and the pruning bound the engine needs.

use std::fmt;
use std::str::FromStr;

use crate::interval::{IntervalError, IntervalPreset};
use crate::linguistic::{eval_connective, CutLevels, LinguisticError};
use crate::scalar::{Combiner, Detachment, DomainError, ScalarPreset, TNorm};
use crate::truth::{Family, FuzzyValue, Interval, TruthValue};

/// The five operations every calculus provides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Conjoin,
    Disjoin,
    Negate,
    Detach,
    Combine,
}

impl Op {
    pub const ALL: [Op; 5] = [Op::Conjoin, Op::Disjoin, Op::Negate, Op::Detach, Op::Combine];

    pub fn arity(self) -> usize {
        match self {
            Op::Negate => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Conjoin => "conjoin",
            Op::Disjoin => "disjoin",
            Op::Negate => "negate",
            Op::Detach => "detach",
            Op::Combine => "combine",
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Op {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Op::ALL
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| format!("unknown operation '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown calculus '{name}': {reason}")]
pub struct UnknownCalculus {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CalcError {
    #[error(transparent)]
    Scalar(#[from] DomainError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Linguistic(#[from] LinguisticError),
    #[error("{calculus} expects {expected} values, got {got}")]
    FamilyMismatch {
        calculus: String,
        expected: Family,
        got: Family,
    },
    #[error("{op} takes {expected} operand(s), got {got}")]
    Arity { op: Op, expected: usize, got: usize },
}

impl CalcError {
    /// True when the operands were valid but admit no consistent conclusion.
    pub fn is_inconsistent_evidence(&self) -> bool {
        matches!(
            self,
            CalcError::Interval(IntervalError::InconsistentEvidence { .. })
                | CalcError::Linguistic(LinguisticError::Interval(
                    IntervalError::InconsistentEvidence { .. }
                ))
        )
    }
}

/// A preset name that resolves in the registry.
///
/// Accepted forms:
/// `scalar.<godel|product|lukasiewicz>[.detach=<variant>][.combine=<prob-sum|max>]`,
/// `interval.<frechet|support|mpmt>`, `interval.extension:<scalar preset>`,
/// `linguistic:<interval preset>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CalculusId {
    family: Family,
    name: String,
}

impl CalculusId {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn as_str(&self) -> &str {
        &self.name
    }
}

impl FromStr for CalculusId {
    type Err = UnknownCalculus;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let calculus = parse_calculus(s)?;
        Ok(CalculusId {
            family: calculus.family(),
            name: calculus.name(),
        })
    }
}

impl fmt::Display for CalculusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Interval calculus lifted to fuzzy truth values through α-cuts.
#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticCalculus {
    pub base: IntervalPreset,
    pub levels: CutLevels,
    /// Replace non-convex operands by their convex hull instead of failing.
    pub hull_fallback: bool,
}

impl LinguisticCalculus {
    pub fn new(base: IntervalPreset) -> Self {
        LinguisticCalculus {
            base,
            levels: CutLevels::default(),
            hull_fallback: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Calculus {
    Scalar(ScalarPreset),
    Interval(IntervalPreset),
    Linguistic(LinguisticCalculus),
}

fn parse_calculus(s: &str) -> Result<Calculus, UnknownCalculus> {
    let unknown = |reason: String| UnknownCalculus {
        name: s.to_string(),
        reason,
    };
    if s.starts_with("scalar.") {
        s.parse().map(Calculus::Scalar).map_err(unknown)
    } else if s.starts_with("interval.") {
        s.parse().map(Calculus::Interval).map_err(unknown)
    } else if let Some(base) = s.strip_prefix("linguistic:") {
        base.parse()
            .map(|b| Calculus::Linguistic(LinguisticCalculus::new(b)))
            .map_err(unknown)
    } else {
        Err(unknown("expected a scalar., interval. or linguistic: preset".into()))
    }
}

/// Resolves a registered preset.
pub fn lookup_calculus(id: &CalculusId) -> Result<Calculus, UnknownCalculus> {
    parse_calculus(id.as_str())
}

/// Canonical names of every shipped preset.
pub fn registry() -> Vec<String> {
    let mut names = Vec::new();
    for t in TNorm::ALL {
        for d in Detachment::ALL {
            for c in [Combiner::ProbSum, Combiner::Max] {
                names.push(
                    ScalarPreset::new(t)
                        .with_detachment(d)
                        .with_combiner(c)
                        .to_string(),
                );
            }
        }
    }
    let mut intervals = vec![IntervalPreset::Frechet, IntervalPreset::Support, IntervalPreset::Mpmt];
    intervals.extend(TNorm::ALL.map(|t| IntervalPreset::Extension(ScalarPreset::new(t))));
    names.extend(intervals.iter().map(|p| p.to_string()));
    names.extend(intervals.iter().map(|p| format!("linguistic:{p}")));
    names
}

impl FromStr for Calculus {
    type Err = UnknownCalculus;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_calculus(s)
    }
}

impl Calculus {
    pub fn family(&self) -> Family {
        match self {
            Calculus::Scalar(_) => Family::Scalar,
            Calculus::Interval(_) => Family::Interval,
            Calculus::Linguistic(_) => Family::Linguistic,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Calculus::Scalar(p) => p.to_string(),
            Calculus::Interval(p) => p.to_string(),
            Calculus::Linguistic(l) => format!("linguistic:{}", l.base),
        }
    }

    pub fn id(&self) -> CalculusId {
        CalculusId {
            family: self.family(),
            name: self.name(),
        }
    }

    /// Name of the concrete function this calculus uses for `op`.
    pub fn op_name(&self, op: Op) -> String {
        match self {
            Calculus::Scalar(p) => match op {
                Op::Conjoin => p.tnorm.tnorm_name().into(),
                Op::Disjoin => p.tnorm.conorm_name().into(),
                Op::Negate => "complement".into(),
                Op::Detach => format!("{}-mp", p.detachment.name()),
                Op::Combine => p.combiner.name().into(),
            },
            Calculus::Interval(p) => interval_op_name(p, op),
            Calculus::Linguistic(l) => format!("cut({})", interval_op_name(&l.base, op)),
        }
    }

    pub fn top(&self) -> TruthValue {
        match self {
            Calculus::Scalar(_) => TruthValue::Scalar(1.0),
            Calculus::Interval(_) => TruthValue::Interval(Interval::TRUE),
            Calculus::Linguistic(_) => TruthValue::Fuzzy(FuzzyValue::singleton(1.0)),
        }
    }

    pub fn bottom(&self) -> TruthValue {
        match self {
            Calculus::Scalar(_) => TruthValue::Scalar(0.0),
            Calculus::Interval(_) => TruthValue::Interval(Interval::FALSE),
            Calculus::Linguistic(_) => TruthValue::Fuzzy(FuzzyValue::singleton(0.0)),
        }
    }

    /// Complete ignorance; scalar calculi have no such element.
    pub fn unknown(&self) -> Option<TruthValue> {
        match self {
            Calculus::Scalar(_) => None,
            Calculus::Interval(_) => Some(TruthValue::Interval(Interval::UNKNOWN)),
            Calculus::Linguistic(_) => Some(TruthValue::Fuzzy(FuzzyValue::ones())),
        }
    }

    pub fn apply(&self, op: Op, operands: &[&TruthValue]) -> Result<TruthValue, CalcError> {
        if operands.len() != op.arity() {
            return Err(CalcError::Arity {
                op,
                expected: op.arity(),
                got: operands.len(),
            });
        }
        let family = self.family();
        if let Some(bad) = operands.iter().find(|v| v.family() != family) {
            return Err(CalcError::FamilyMismatch {
                calculus: self.name(),
                expected: family,
                got: bad.family(),
            });
        }
        match self {
            Calculus::Scalar(p) => {
                let x = |i: usize| operands[i].as_scalar().expect("family checked");
                let v = match op {
                    Op::Conjoin => p.conjoin(x(0), x(1))?,
                    Op::Disjoin => p.disjoin(x(0), x(1))?,
                    Op::Negate => p.negate(x(0))?,
                    Op::Detach => p.detach(x(0), x(1))?,
                    Op::Combine => p.combine(x(0), x(1))?,
                };
                Ok(TruthValue::Scalar(v))
            }
            Calculus::Interval(p) => {
                let x = |i: usize| operands[i].as_interval().expect("family checked");
                let v = match op {
                    Op::Conjoin => p.conjoin(&x(0), &x(1))?,
                    Op::Disjoin => p.disjoin(&x(0), &x(1))?,
                    Op::Negate => p.negate(&x(0))?,
                    Op::Detach => p.detach(&x(0), &x(1))?,
                    Op::Combine => p.combine(&x(0), &x(1))?,
                };
                Ok(TruthValue::Interval(v))
            }
            Calculus::Linguistic(l) => {
                let fuzzy: Vec<&FuzzyValue> = operands
                    .iter()
                    .map(|v| v.as_fuzzy().expect("family checked"))
                    .collect();
                let v = eval_connective(op, &l.base, &fuzzy, &l.levels, l.hull_fallback)?;
                Ok(TruthValue::Fuzzy(v))
            }
        }
    }

    pub fn conjoin(&self, a: &TruthValue, b: &TruthValue) -> Result<TruthValue, CalcError> {
        self.apply(Op::Conjoin, &[a, b])
    }

    pub fn disjoin(&self, a: &TruthValue, b: &TruthValue) -> Result<TruthValue, CalcError> {
        self.apply(Op::Disjoin, &[a, b])
    }

    pub fn negate(&self, a: &TruthValue) -> Result<TruthValue, CalcError> {
        self.apply(Op::Negate, &[a])
    }

    pub fn detach(&self, body: &TruthValue, weight: &TruthValue) -> Result<TruthValue, CalcError> {
        self.apply(Op::Detach, &[body, weight])
    }

    pub fn combine(&self, a: &TruthValue, b: &TruthValue) -> Result<TruthValue, CalcError> {
        self.apply(Op::Combine, &[a, b])
    }

    /// Upper bound on any conjunction that extends `partial` with further
    /// operands, in the sense of [`TruthValue::rank_key`].
    ///
    /// Every t-norm satisfies `T(p, x) <= p`, so the running conjunction
    /// bounds scalars; for intervals the lower endpoint plays that role and
    /// the bound is `[α, 1]`. Linguistic calculi rank by centroid, which has
    /// no such bound, so they never prune.
    pub fn conj_upper_bound(&self, partial: &TruthValue) -> Option<TruthValue> {
        match (self, partial) {
            (Calculus::Scalar(_), TruthValue::Scalar(v)) => Some(TruthValue::Scalar(*v)),
            (Calculus::Interval(_), TruthValue::Interval(iv)) => {
                Some(TruthValue::Interval(Interval { lo: iv.lo, hi: 1.0 }))
            }
            _ => None,
        }
    }

    /// Whether a disjunction (or combination) that reached rank 1 stays
    /// exactly where it is whatever is disjoined next.
    pub fn saturation_is_absorbing(&self) -> bool {
        !matches!(self, Calculus::Linguistic(_))
    }
}

fn interval_op_name(p: &IntervalPreset, op: Op) -> String {
    match op {
        Op::Conjoin => p.conjoin_name(),
        Op::Disjoin => p.disjoin_name(),
        Op::Negate => "complement".into(),
        Op::Detach => p.detach_name(),
        Op::Combine => p.combine_name(),
    }
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}
