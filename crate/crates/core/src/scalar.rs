//! Scalar calculi over `[0,1]` built from infinitely-valued logic.
//!
//! Three t-norm / t-conorm pairs (De Morgan duals under `1 - x`), four
//! detachment operators matching the Łukasiewicz, Gödel, Goguen and
//! Kleene-Dienes implications, and an evidence combiner.

use std::fmt;
use std::str::FromStr;

/// `a + b - ab`, arranged so that 0 is an exact identity, 1 is exactly
/// absorbing, and argument order does not matter.
#[inline]
pub fn prob_sum(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + lo * (1.0 - hi)
}

/// `max(0, a + b - 1)`, symmetric in its arguments and clamped so that
/// rounding never lifts the result above either operand.
#[inline]
pub fn bounded_difference(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    ((hi - 1.0) + lo).max(0.0).min(lo)
}

/// Conjunction operator; the disjunction is its De Morgan dual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TNorm {
    /// `min` / `max`
    Godel,
    /// product / probabilistic sum
    Product,
    /// bounded difference / bounded sum
    Lukasiewicz,
}

impl TNorm {
    pub const ALL: [TNorm; 3] = [TNorm::Godel, TNorm::Product, TNorm::Lukasiewicz];

    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            TNorm::Godel => a.min(b),
            TNorm::Product => a * b,
            TNorm::Lukasiewicz => bounded_difference(a, b),
        }
    }

    #[inline]
    pub fn conorm(self, a: f64, b: f64) -> f64 {
        match self {
            TNorm::Godel => a.max(b),
            TNorm::Product => prob_sum(a, b),
            TNorm::Lukasiewicz => (a + b).min(1.0),
        }
    }

    pub fn preset_name(self) -> &'static str {
        match self {
            TNorm::Godel => "godel",
            TNorm::Product => "product",
            TNorm::Lukasiewicz => "lukasiewicz",
        }
    }

    pub fn tnorm_name(self) -> &'static str {
        match self {
            TNorm::Godel => "min",
            TNorm::Product => "product",
            TNorm::Lukasiewicz => "bounded-difference",
        }
    }

    pub fn conorm_name(self) -> &'static str {
        match self {
            TNorm::Godel => "max",
            TNorm::Product => "prob-sum",
            TNorm::Lukasiewicz => "bounded-sum",
        }
    }

    /// Detachment paired with this t-norm's residuated implication.
    pub fn default_detachment(self) -> Detachment {
        match self {
            TNorm::Godel => Detachment::Godel,
            TNorm::Product => Detachment::Goguen,
            TNorm::Lukasiewicz => Detachment::Lukasiewicz,
        }
    }
}

/// Many-valued modus ponens: a lower bound on `v[B]` from `v[A]` and `v[A ⇒ B]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detachment {
    Lukasiewicz,
    Godel,
    Goguen,
    KleeneDienes,
}

impl Detachment {
    pub const ALL: [Detachment; 4] = [
        Detachment::Lukasiewicz,
        Detachment::Godel,
        Detachment::Goguen,
        Detachment::KleeneDienes,
    ];

    #[inline]
    pub fn apply(self, body: f64, weight: f64) -> f64 {
        match self {
            Detachment::Lukasiewicz => ((body - 1.0) + weight).max(0.0),
            Detachment::Godel => body.min(weight),
            Detachment::Goguen => body * weight,
            Detachment::KleeneDienes => {
                // a tolerance keeps boundary cases such as 1 - 0.07 < 0.93 at 0
                if weight > (1.0 - body) + 1e-12 {
                    weight
                } else {
                    0.0
                }
            }
        }
    }

    /// The implication `I(a, b)` this operator detaches.
    pub fn implication(self, a: f64, b: f64) -> f64 {
        match self {
            Detachment::Lukasiewicz => (1.0 - a + b).min(1.0),
            Detachment::Godel => {
                if a <= b {
                    1.0
                } else {
                    b
                }
            }
            Detachment::Goguen => {
                if a <= b {
                    1.0
                } else {
                    b / a
                }
            }
            Detachment::KleeneDienes => (1.0 - a).max(b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Detachment::Lukasiewicz => "lukasiewicz",
            Detachment::Godel => "godel",
            Detachment::Goguen => "goguen",
            Detachment::KleeneDienes => "kleene-dienes",
        }
    }
}

impl FromStr for Detachment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Detachment::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown detachment variant '{s}'"))
    }
}

/// Evidence combination across the rules concluding one concept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Combiner {
    #[default]
    ProbSum,
    Max,
}

impl Combiner {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Combiner::ProbSum => prob_sum(a, b),
            Combiner::Max => a.max(b),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Combiner::ProbSum => "prob-sum",
            Combiner::Max => "max",
        }
    }
}

impl FromStr for Combiner {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prob-sum" => Ok(Combiner::ProbSum),
            "max" => Ok(Combiner::Max),
            other => Err(format!("unknown combiner '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("scalar operand {0} outside [0,1]")]
pub struct DomainError(pub f64);

fn check(v: f64) -> Result<f64, DomainError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(DomainError(v))
    }
}

/// `v[not A] = 1 - v[A]`.
pub fn negate(a: f64) -> Result<f64, DomainError> {
    Ok(1.0 - check(a)?)
}

/// A bundle of logically related scalar operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScalarPreset {
    pub tnorm: TNorm,
    pub detachment: Detachment,
    pub combiner: Combiner,
}

impl ScalarPreset {
    pub fn new(tnorm: TNorm) -> Self {
        ScalarPreset {
            tnorm,
            detachment: tnorm.default_detachment(),
            combiner: Combiner::default(),
        }
    }

    pub fn with_detachment(mut self, detachment: Detachment) -> Self {
        self.detachment = detachment;
        self
    }

    pub fn with_combiner(mut self, combiner: Combiner) -> Self {
        self.combiner = combiner;
        self
    }

    pub fn conjoin(&self, a: f64, b: f64) -> Result<f64, DomainError> {
        Ok(self.tnorm.apply(check(a)?, check(b)?))
    }

    pub fn disjoin(&self, a: f64, b: f64) -> Result<f64, DomainError> {
        Ok(self.tnorm.conorm(check(a)?, check(b)?))
    }

    pub fn negate(&self, a: f64) -> Result<f64, DomainError> {
        negate(a)
    }

    pub fn detach(&self, body: f64, weight: f64) -> Result<f64, DomainError> {
        Ok(self.detachment.apply(check(body)?, check(weight)?))
    }

    pub fn combine(&self, a: f64, b: f64) -> Result<f64, DomainError> {
        Ok(self.combiner.apply(check(a)?, check(b)?))
    }
}

/// Canonical form: `scalar.<tnorm>[.detach=<variant>][.combine=<combiner>]`,
/// omitting suffixes that match the defaults.
impl fmt::Display for ScalarPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scalar.{}", self.tnorm.preset_name())?;
        if self.detachment != self.tnorm.default_detachment() {
            write!(f, ".detach={}", self.detachment.name())?;
        }
        if self.combiner != Combiner::default() {
            write!(f, ".combine={}", self.combiner.name())?;
        }
        Ok(())
    }
}

impl FromStr for ScalarPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rest = s
            .strip_prefix("scalar.")
            .ok_or_else(|| format!("'{s}' is not a scalar preset"))?;
        let mut parts = rest.split('.');
        let base = parts.next().unwrap_or_default();
        let tnorm = TNorm::ALL
            .into_iter()
            .find(|t| t.preset_name() == base)
            .ok_or_else(|| format!("unknown scalar preset 'scalar.{base}'"))?;
        let mut preset = ScalarPreset::new(tnorm);
        for part in parts {
            match part.split_once('=') {
                Some(("detach", v)) => preset.detachment = v.parse()?,
                Some(("combine", v)) => preset.combiner = v.parse()?,
                _ => return Err(format!("unknown scalar preset option '{part}'")),
            }
        }
        Ok(preset)
    }
}
