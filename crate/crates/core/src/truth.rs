//! Uncertainty representations shared by every calculus.
//!
//! A [`TruthValue`] is one of three families: a scalar degree in `[0,1]`, a
//! sub-interval `[lo, hi]` of the unit interval, or a fuzzy truth vector
//! sampled on an evenly spaced grid over `[0,1]`.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Number of sample points of a fuzzy truth vector (step 0.01).
pub const GRID: usize = 101;

/// Tolerance used when comparing memberships against cut levels and grid points.
pub(crate) const EPS: f64 = 1e-9;

/// Abscissa of grid point `i`.
#[inline]
pub fn grid_x(i: usize) -> f64 {
    i as f64 / (GRID - 1) as f64
}

/// Index of the grid point nearest to `x`, clamped to the grid.
pub fn nearest_grid_index(x: f64) -> usize {
    let idx = (x * (GRID - 1) as f64).round();
    idx.clamp(0.0, (GRID - 1) as f64) as usize
}

/// The three families of uncertainty representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Scalar,
    Interval,
    Linguistic,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Scalar => "scalar",
            Family::Interval => "interval",
            Family::Linguistic => "linguistic",
        })
    }
}

/// A sub-interval `[lo, hi]` of the unit interval.
///
/// `[0,0]` is absolutely false, `[1,1]` absolutely certain and `[0,1]`
/// completely unknown. Construction through [`Interval::new`] enforces
/// `0 <= lo <= hi <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const FALSE: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const TRUE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const UNKNOWN: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self, Violation> {
        let iv = Interval { lo, hi };
        iv.check()?;
        Ok(iv)
    }

    pub fn point(v: f64) -> Result<Self, Violation> {
        Interval::new(v, v)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// `self ⊆ other`.
    pub fn is_within(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo - EPS <= x && x <= self.hi + EPS
    }

    pub(crate) fn check(&self) -> Result<(), Violation> {
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Violation::NotFinite);
        }
        if self.lo < 0.0 {
            return Err(Violation::LowerBelowZero(self.lo));
        }
        if self.hi > 1.0 {
            return Err(Violation::UpperAboveOne(self.hi));
        }
        if self.lo > self.hi {
            return Err(Violation::LowerAboveUpper { lo: self.lo, hi: self.hi });
        }
        Ok(())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.6}, {:.6}]", self.lo, self.hi)
    }
}

/// Membership vector of a fuzzy truth value over the [`GRID`] points of `[0,1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyValue {
    mu: Vec<f64>,
}

impl FuzzyValue {
    /// Wraps a membership vector; the length must be exactly [`GRID`].
    pub fn from_vec(mu: Vec<f64>) -> Result<Self, Violation> {
        if mu.len() != GRID {
            return Err(Violation::GridLength(mu.len()));
        }
        Ok(FuzzyValue { mu })
    }

    pub fn zeros() -> Self {
        FuzzyValue { mu: vec![0.0; GRID] }
    }

    pub fn ones() -> Self {
        FuzzyValue { mu: vec![1.0; GRID] }
    }

    /// Crisp singleton at the grid point nearest to `x`.
    pub fn singleton(x: f64) -> Self {
        let mut mu = vec![0.0; GRID];
        mu[nearest_grid_index(x)] = 1.0;
        FuzzyValue { mu }
    }

    /// Crisp set equal to 1 on every grid point inside `[lo, hi]`.
    ///
    /// When no grid point falls inside, the point nearest the midpoint is used.
    pub fn rectangle(lo: f64, hi: f64) -> Self {
        let mut mu: Vec<f64> = (0..GRID)
            .map(|i| {
                let x = grid_x(i);
                if lo - EPS <= x && x <= hi + EPS {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        if mu.iter().all(|&m| m == 0.0) {
            mu[nearest_grid_index((lo + hi) / 2.0)] = 1.0;
        }
        FuzzyValue { mu }
    }

    pub fn from_fn(f: impl Fn(f64) -> f64) -> Self {
        FuzzyValue {
            mu: (0..GRID).map(|i| f(grid_x(i))).collect(),
        }
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        FuzzyValue {
            mu: self.mu.iter().map(|&m| f(m)).collect(),
        }
    }

    pub fn height(&self) -> f64 {
        self.mu.iter().copied().fold(0.0, f64::max)
    }

    /// Centre of gravity over the grid; 0 for the empty set.
    pub fn centroid(&self) -> f64 {
        let mass: f64 = self.mu.iter().sum();
        if mass <= 0.0 {
            return 0.0;
        }
        let moment: f64 = self.mu.iter().enumerate().map(|(i, m)| grid_x(i) * m).sum();
        moment / mass
    }

    /// Quasi-concavity: no point lies strictly below the smaller of the
    /// maxima on its left and on its right.
    pub fn is_convex(&self) -> bool {
        self.first_convexity_dip().is_none()
    }

    fn first_convexity_dip(&self) -> Option<usize> {
        let n = self.mu.len();
        let mut right_max = vec![0.0; n];
        let mut acc = f64::NEG_INFINITY;
        for i in (0..n).rev() {
            right_max[i] = acc;
            acc = acc.max(self.mu[i]);
        }
        let mut left_max = f64::NEG_INFINITY;
        for i in 0..n {
            if self.mu[i] < left_max.min(right_max[i]) - 1e-12 {
                return Some(i);
            }
            left_max = left_max.max(self.mu[i]);
        }
        None
    }

    /// Smallest convex fuzzy set containing this one.
    pub fn convex_hull(&self) -> Self {
        let n = self.mu.len();
        let mut prefix = vec![0.0; n];
        let mut suffix = vec![0.0; n];
        let mut acc: f64 = 0.0;
        for i in 0..n {
            acc = acc.max(self.mu[i]);
            prefix[i] = acc;
        }
        acc = 0.0;
        for i in (0..n).rev() {
            acc = acc.max(self.mu[i]);
            suffix[i] = acc;
        }
        FuzzyValue {
            mu: (0..n).map(|i| prefix[i].min(suffix[i])).collect(),
        }
    }

    /// Mean absolute difference over the grid.
    pub fn l1_distance(&self, other: &FuzzyValue) -> f64 {
        self.mu.iter().zip(&other.mu).map(|(a, b)| (a - b).abs()).sum::<f64>() / GRID as f64
    }
}

/// The engine's universal currency: a relevance or rule-strength value.
#[derive(Debug, Clone, PartialEq)]
pub enum TruthValue {
    Scalar(f64),
    Interval(Interval),
    Fuzzy(FuzzyValue),
}

/// A broken [`TruthValue`] invariant.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("value is not finite")]
    NotFinite,
    #[error("v >= 0 violated: {0}")]
    ScalarBelowZero(f64),
    #[error("v <= 1 violated: {0}")]
    ScalarAboveOne(f64),
    #[error("α >= 0 violated: {0}")]
    LowerBelowZero(f64),
    #[error("β <= 1 violated: {0}")]
    UpperAboveOne(f64),
    #[error("α <= β violated: [{lo}, {hi}]")]
    LowerAboveUpper { lo: f64, hi: f64 },
    #[error("fuzzy vector must have {GRID} points, got {0}")]
    GridLength(usize),
    #[error("membership outside [0,1] at grid point {index}: {value}")]
    MembershipRange { index: usize, value: f64 },
    #[error("fuzzy vector is not convex (dip at grid point {0})")]
    NonConvex(usize),
}

impl TruthValue {
    pub fn family(&self) -> Family {
        match self {
            TruthValue::Scalar(_) => Family::Scalar,
            TruthValue::Interval(_) => Family::Interval,
            TruthValue::Fuzzy(_) => Family::Linguistic,
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self, Violation> {
        Interval::new(lo, hi).map(TruthValue::Interval)
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            TruthValue::Scalar(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_interval(&self) -> Option<Interval> {
        match self {
            TruthValue::Interval(iv) => Some(*iv),
            _ => None,
        }
    }

    pub fn as_fuzzy(&self) -> Option<&FuzzyValue> {
        match self {
            TruthValue::Fuzzy(f) => Some(f),
            _ => None,
        }
    }

    /// Checks every representation invariant, naming the first one broken.
    pub fn validate(&self) -> Result<(), Violation> {
        match self {
            TruthValue::Scalar(v) => {
                if !v.is_finite() {
                    Err(Violation::NotFinite)
                } else if *v < 0.0 {
                    Err(Violation::ScalarBelowZero(*v))
                } else if *v > 1.0 {
                    Err(Violation::ScalarAboveOne(*v))
                } else {
                    Ok(())
                }
            }
            TruthValue::Interval(iv) => iv.check(),
            TruthValue::Fuzzy(f) => {
                if f.mu.len() != GRID {
                    return Err(Violation::GridLength(f.mu.len()));
                }
                if let Some((index, &value)) =
                    f.mu.iter().enumerate().find(|(_, m)| !(0.0..=1.0).contains(*m))
                {
                    return Err(Violation::MembershipRange { index, value });
                }
                match f.first_convexity_dip() {
                    Some(i) => Err(Violation::NonConvex(i)),
                    None => Ok(()),
                }
            }
        }
    }

    /// Primary ranking key in `[0,1]`.
    ///
    /// Scalars rank by value, intervals by their lower bound (the guaranteed
    /// relevance) and fuzzy values by centroid.
    pub fn rank_key(&self) -> f64 {
        match self {
            TruthValue::Scalar(v) => *v,
            TruthValue::Interval(iv) => iv.lo,
            TruthValue::Fuzzy(f) => f.centroid(),
        }
    }

    /// Tie-break key: the upper bound for intervals, otherwise the rank key.
    pub fn secondary_key(&self) -> f64 {
        match self {
            TruthValue::Interval(iv) => iv.hi,
            other => other.rank_key(),
        }
    }

    /// Fixed six-decimal JSON rendering used by ranking output.
    pub fn to_fixed_json(&self) -> String {
        match self {
            TruthValue::Scalar(v) => format!("{{\"scalar\":{v:.6}}}"),
            TruthValue::Interval(iv) => format!("{{\"interval\":[{:.6},{:.6}]}}", iv.lo, iv.hi),
            TruthValue::Fuzzy(f) => {
                let mu: Vec<String> = f.mu.iter().map(|m| format!("{m:.6}")).collect();
                format!("{{\"fuzzy\":{{\"grid\":{GRID},\"mu\":[{}]}}}}", mu.join(","))
            }
        }
    }
}

impl fmt::Display for TruthValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruthValue::Scalar(v) => write!(f, "{v:.6}"),
            TruthValue::Interval(iv) => write!(f, "{iv}"),
            TruthValue::Fuzzy(fz) => write!(f, "fuzzy(centroid {:.6})", fz.centroid()),
        }
    }
}

// JSON shape: {"scalar": v} | {"interval": [a, b]} | {"fuzzy": {"grid": G, "mu": [...]}}.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum TruthValueRepr {
    Scalar(f64),
    Interval([f64; 2]),
    Fuzzy { grid: usize, mu: Vec<f64> },
}

impl Serialize for TruthValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            TruthValue::Scalar(v) => TruthValueRepr::Scalar(*v),
            TruthValue::Interval(iv) => TruthValueRepr::Interval([iv.lo, iv.hi]),
            TruthValue::Fuzzy(f) => TruthValueRepr::Fuzzy {
                grid: GRID,
                mu: f.mu.clone(),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TruthValue {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let value = match TruthValueRepr::deserialize(deserializer)? {
            TruthValueRepr::Scalar(v) => TruthValue::Scalar(v),
            TruthValueRepr::Interval([lo, hi]) => TruthValue::Interval(Interval { lo, hi }),
            TruthValueRepr::Fuzzy { grid, mu } => {
                if grid != GRID {
                    return Err(D::Error::custom(format!("unsupported fuzzy grid {grid}")));
                }
                TruthValue::Fuzzy(FuzzyValue::from_vec(mu).map_err(D::Error::custom)?)
            }
        };
        value.validate().map_err(D::Error::custom)?;
        Ok(value)
    }
}
