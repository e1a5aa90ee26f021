//! Interval-valued calculi.
//!
//! Four variants share the complement `[1-β, 1-α]` and differ in conjunction,
//! disjunction and detachment:
//!
//! * `frechet`: best-possible probability bounds with no dependence assumption;
//!   the rule weight is the probability of the material implication `¬A ∨ B`.
//! * `support`: support pairs under independence; the rule weight is a
//!   conditional support pair for `B` given `A`.
//! * `extension(c)`: endpoint-wise image of the monotone scalar calculus `c`.
//! * `mpmt`: Łukasiewicz implication read in both directions (modus ponens
//!   for the lower bound, modus tollens for the upper bound); can detect
//!   evidence that admits no consistent conclusion.

use std::fmt;
use std::str::FromStr;

use crate::scalar::{bounded_difference, prob_sum, ScalarPreset};
use crate::truth::{Interval, Violation};

/// Slack allowed before an mpmt detachment is declared infeasible.
const FEASIBILITY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalPreset {
    Frechet,
    Support,
    Extension(ScalarPreset),
    Mpmt,
}

/// Value given to terminals that do not occur in a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AbsentPolicy {
    /// Absent means false (`[0,0]`).
    #[default]
    Closed,
    /// Absent means completely unknown (`[0,1]`).
    Unknown,
}

impl FromStr for AbsentPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closed" => Ok(AbsentPolicy::Closed),
            "unknown" => Ok(AbsentPolicy::Unknown),
            other => Err(format!("unknown absent policy '{other}' (expected closed|unknown)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntervalError {
    #[error("invalid interval operand: {0}")]
    Domain(#[from] Violation),
    #[error("inconsistent evidence: no conclusion is compatible with body {body} and rule weight {weight}")]
    InconsistentEvidence { body: Interval, weight: Interval },
}

fn checked(iv: &Interval) -> Result<Interval, IntervalError> {
    iv.check()?;
    Ok(*iv)
}

#[inline]
fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// `[1-β, 1-α]`.
pub fn negate(a: &Interval) -> Result<Interval, IntervalError> {
    let a = checked(a)?;
    Ok(Interval { lo: 1.0 - a.hi, hi: 1.0 - a.lo })
}

impl IntervalPreset {
    pub fn conjoin(&self, a: &Interval, b: &Interval) -> Result<Interval, IntervalError> {
        let (a, b) = (checked(a)?, checked(b)?);
        Ok(match self {
            IntervalPreset::Frechet => Interval {
                lo: bounded_difference(a.lo, b.lo),
                hi: a.hi.min(b.hi),
            },
            IntervalPreset::Support => Interval { lo: a.lo * b.lo, hi: a.hi * b.hi },
            IntervalPreset::Extension(c) => Interval {
                lo: c.tnorm.apply(a.lo, b.lo),
                hi: c.tnorm.apply(a.hi, b.hi),
            },
            IntervalPreset::Mpmt => Interval {
                lo: bounded_difference(a.lo, b.lo),
                hi: bounded_difference(a.hi, b.hi),
            },
        })
    }

    pub fn disjoin(&self, a: &Interval, b: &Interval) -> Result<Interval, IntervalError> {
        let (a, b) = (checked(a)?, checked(b)?);
        Ok(match self {
            IntervalPreset::Frechet => Interval {
                lo: a.lo.max(b.lo),
                hi: (a.hi + b.hi).min(1.0),
            },
            IntervalPreset::Support => Interval {
                lo: prob_sum(a.lo, b.lo),
                hi: prob_sum(a.hi, b.hi),
            },
            IntervalPreset::Extension(c) => Interval {
                lo: c.tnorm.conorm(a.lo, b.lo),
                hi: c.tnorm.conorm(a.hi, b.hi),
            },
            IntervalPreset::Mpmt => Interval {
                lo: (a.lo + b.lo).min(1.0),
                hi: (a.hi + b.hi).min(1.0),
            },
        })
    }

    pub fn negate(&self, a: &Interval) -> Result<Interval, IntervalError> {
        negate(a)
    }

    pub fn detach(&self, body: &Interval, weight: &Interval) -> Result<Interval, IntervalError> {
        let (a, w) = (checked(body)?, checked(weight)?);
        Ok(match self {
            IntervalPreset::Frechet => Interval {
                lo: ((a.lo - 1.0) + w.lo).max(0.0),
                hi: w.hi,
            },
            IntervalPreset::Support => Interval {
                lo: a.lo * w.lo,
                // never below lo, even when rounding disagrees
                hi: (1.0 - a.lo * (1.0 - w.hi)).max(a.lo * w.lo),
            },
            IntervalPreset::Extension(c) => Interval {
                lo: c.detachment.apply(a.lo, w.lo),
                hi: c.detachment.apply(a.hi, w.hi),
            },
            IntervalPreset::Mpmt => {
                let lo = ((a.lo - 1.0) + w.lo).max(0.0);
                if w.hi >= 1.0 {
                    Interval { lo, hi: 1.0 }
                } else {
                    // With I(a,b) = 1-a+b <= β_w < 1, b <= a + β_w - 1 must
                    // be attainable for some a <= β_a.
                    // same association as lo, so a point weight gives lo <= hi
                    let raw_hi = (a.hi - 1.0) + w.hi;
                    if raw_hi < -FEASIBILITY_EPS {
                        return Err(IntervalError::InconsistentEvidence { body: a, weight: w });
                    }
                    Interval { lo, hi: clamp01(raw_hi).max(lo) }
                }
            }
        })
    }

    /// Evidence combination is the variant's disjunction.
    /// Extension presets use their scalar combiner on each endpoint, so point
    /// intervals reproduce the scalar calculus; the others disjoin.
    pub fn combine(&self, a: &Interval, b: &Interval) -> Result<Interval, IntervalError> {
        match self {
            IntervalPreset::Extension(c) => {
                let (a, b) = (checked(a)?, checked(b)?);
                Ok(Interval {
                    lo: c.combiner.apply(a.lo, b.lo),
                    hi: c.combiner.apply(a.hi, b.hi),
                })
            }
            _ => self.disjoin(a, b),
        }
    }

    pub fn combine_name(&self) -> String {
        match self {
            IntervalPreset::Extension(c) => format!("ext-{}", c.combiner.name()),
            _ => format!("{}(combine)", self.disjoin_name()),
        }
    }

    pub fn conjoin_name(&self) -> String {
        match self {
            IntervalPreset::Frechet => "frechet-and".into(),
            IntervalPreset::Support => "support-and".into(),
            IntervalPreset::Extension(c) => format!("ext-{}", c.tnorm.tnorm_name()),
            IntervalPreset::Mpmt => "mpmt-and".into(),
        }
    }

    pub fn disjoin_name(&self) -> String {
        match self {
            IntervalPreset::Frechet => "frechet-or".into(),
            IntervalPreset::Support => "support-or".into(),
            IntervalPreset::Extension(c) => format!("ext-{}", c.tnorm.conorm_name()),
            IntervalPreset::Mpmt => "mpmt-or".into(),
        }
    }

    pub fn detach_name(&self) -> String {
        match self {
            IntervalPreset::Frechet => "frechet-mp".into(),
            IntervalPreset::Support => "support-mp".into(),
            IntervalPreset::Extension(c) => format!("ext-{}", c.detachment.name()),
            IntervalPreset::Mpmt => "mpmt".into(),
        }
    }
}

impl fmt::Display for IntervalPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalPreset::Frechet => f.write_str("interval.frechet"),
            IntervalPreset::Support => f.write_str("interval.support"),
            IntervalPreset::Extension(c) => write!(f, "interval.extension:{c}"),
            IntervalPreset::Mpmt => f.write_str("interval.mpmt"),
        }
    }
}

impl FromStr for IntervalPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "interval.frechet" => Ok(IntervalPreset::Frechet),
            "interval.support" => Ok(IntervalPreset::Support),
            "interval.mpmt" => Ok(IntervalPreset::Mpmt),
            other => match other.strip_prefix("interval.extension:") {
                Some(scalar) => scalar.parse().map(IntervalPreset::Extension),
                None => Err(format!("unknown interval preset '{other}'")),
            },
        }
    }
}
