//! Linguistic truth values: primary terms, hedges, and connectives evaluated
//! by α-cut decomposition over an interval calculus.

use std::collections::HashSet;
use std::fmt;

use crate::calculus::Op;
use crate::interval::{IntervalError, IntervalPreset};
use crate::truth::{grid_x, nearest_grid_index, FuzzyValue, Interval, TruthValue, Violation, EPS, GRID};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinguisticError {
    #[error("term '{0}' is not convex")]
    NonConvexTerm(String),
    #[error("malformed breakpoints for term '{name}': {reason}")]
    MalformedBreakpoints { name: String, reason: String },
    #[error("α-cut at level {0} is empty")]
    EmptyCut(f64),
    #[error("term dictionary is empty")]
    EmptyDictionary,
    #[error("duplicate term '{0}'")]
    DuplicateTerm(String),
    #[error("terms file line {line}: {message}")]
    TermsSyntax { line: usize, message: String },
    #[error("{op} takes {expected} operand(s), got {got}")]
    Arity { op: Op, expected: usize, got: usize },
    #[error("invalid cut levels: {0}")]
    InvalidLevels(String),
    #[error("invalid operand: {0}")]
    Operand(#[from] Violation),
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

/// Unary term modifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Hedge {
    /// `μ²`
    Very,
    /// `√μ`
    MoreOrLess,
    /// `1 - μ`
    Not,
}

impl Hedge {
    pub const ALL: [Hedge; 3] = [Hedge::Very, Hedge::MoreOrLess, Hedge::Not];

    pub fn word(self) -> &'static str {
        match self {
            Hedge::Very => "very",
            Hedge::MoreOrLess => "more or less",
            Hedge::Not => "not",
        }
    }

    /// Pointwise application; the result may be non-convex.
    pub fn apply(self, term: &FuzzyValue) -> FuzzyValue {
        match self {
            Hedge::Very => term.map(|m| m * m),
            Hedge::MoreOrLess => term.map(f64::sqrt),
            Hedge::Not => term.map(|m| 1.0 - m),
        }
    }
}

/// Hedge application that insists on a convex result, for use as a connective operand.
pub fn apply_hedge(hedge: Hedge, term: &FuzzyValue) -> Result<FuzzyValue, LinguisticError> {
    let out = hedge.apply(term);
    if out.is_convex() {
        Ok(out)
    } else {
        Err(LinguisticError::NonConvexTerm(hedge.word().to_string()))
    }
}

/// Builds a term from piecewise-linear breakpoints sampled on the grid.
///
/// Abscissae must be strictly increasing from 0 to 1 and memberships must
/// lie in `[0,1]`.
pub fn define_term(name: &str, breakpoints: &[(f64, f64)]) -> Result<FuzzyValue, LinguisticError> {
    let malformed = |reason: &str| LinguisticError::MalformedBreakpoints {
        name: name.to_string(),
        reason: reason.to_string(),
    };
    if breakpoints.len() < 2 {
        return Err(malformed("at least two breakpoints are required"));
    }
    if breakpoints[0].0 != 0.0 {
        return Err(malformed("first x must be 0"));
    }
    if breakpoints[breakpoints.len() - 1].0 != 1.0 {
        return Err(malformed("last x must be 1"));
    }
    if breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(malformed("x must be strictly increasing"));
    }
    if breakpoints.iter().any(|&(_, m)| !(0.0..=1.0).contains(&m)) {
        return Err(malformed("membership must lie in [0,1]"));
    }
    let term = FuzzyValue::from_fn(|x| {
        let k = breakpoints
            .windows(2)
            .position(|w| x <= w[1].0 + EPS)
            .unwrap_or(breakpoints.len() - 2);
        let ((x0, m0), (x1, m1)) = (breakpoints[k], breakpoints[k + 1]);
        let t = ((x - x0) / (x1 - x0)).clamp(0.0, 1.0);
        m0 + t * (m1 - m0)
    });
    if !term.is_convex() {
        return Err(LinguisticError::NonConvexTerm(name.to_string()));
    }
    Ok(term)
}

/// Strictly increasing cut levels in `(0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutLevels(Vec<f64>);

impl CutLevels {
    pub fn new(levels: Vec<f64>) -> Result<Self, LinguisticError> {
        if levels.is_empty() {
            return Err(LinguisticError::InvalidLevels("no levels".into()));
        }
        if levels.iter().any(|&l| !(l > 0.0 && l <= 1.0)) {
            return Err(LinguisticError::InvalidLevels("levels must lie in (0,1]".into()));
        }
        if levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LinguisticError::InvalidLevels("levels must be strictly increasing".into()));
        }
        Ok(CutLevels(levels))
    }

    pub fn levels(&self) -> &[f64] {
        &self.0
    }

    /// Membership after decomposing and reassembling `term` at these levels.
    pub fn quantize(&self, term: &FuzzyValue) -> FuzzyValue {
        term.map(|m| {
            self.0
                .iter()
                .rev()
                .find(|&&l| m >= l - EPS)
                .copied()
                .unwrap_or(0.0)
        })
    }
}

impl Default for CutLevels {
    /// `{0.05, 0.1, 0.2, …, 0.9, 1.0}`
    fn default() -> Self {
        let mut levels = vec![0.05];
        levels.extend((1..=10).map(|k| k as f64 / 10.0));
        CutLevels(levels)
    }
}

/// `[min, max]` of the grid points whose membership reaches `level`.
pub fn alpha_cut(term: &FuzzyValue, level: f64) -> Result<Interval, LinguisticError> {
    let mu = term.mu();
    let first = mu.iter().position(|&m| m >= level - EPS);
    let last = mu.iter().rposition(|&m| m >= level - EPS);
    match (first, last) {
        (Some(i), Some(j)) => Ok(Interval { lo: grid_x(i), hi: grid_x(j) }),
        _ => Err(LinguisticError::EmptyCut(level)),
    }
}

fn interval_op(
    op: Op,
    base: &IntervalPreset,
    cuts: &[Interval],
) -> Result<Interval, IntervalError> {
    match op {
        Op::Negate => base.negate(&cuts[0]),
        Op::Conjoin => base.conjoin(&cuts[0], &cuts[1]),
        Op::Disjoin => base.disjoin(&cuts[0], &cuts[1]),
        Op::Detach => base.detach(&cuts[0], &cuts[1]),
        Op::Combine => base.combine(&cuts[0], &cuts[1]),
    }
}

/// Applies a connective to fuzzy operands level by level.
///
/// At each cut level the operands' α-cuts go through the base interval
/// operation; the output membership at `x` is the highest level whose result,
/// rounded to the grid, contains `x`. Levels where some operand has an empty cut are skipped.
/// Non-convex operands are rejected unless `hull_fallback` replaces them by
/// their convex hull.
pub fn eval_connective(
    op: Op,
    base: &IntervalPreset,
    operands: &[&FuzzyValue],
    levels: &CutLevels,
    hull_fallback: bool,
) -> Result<FuzzyValue, LinguisticError> {
    let expected = op.arity();
    if operands.len() != expected {
        return Err(LinguisticError::Arity { op, expected, got: operands.len() });
    }
    let mut hulls = Vec::new();
    for (i, operand) in operands.iter().enumerate() {
        if operand.mu().iter().any(|m| !(0.0..=1.0).contains(m)) {
            TruthValue::Fuzzy((*operand).clone()).validate()?;
        }
        if !operand.is_convex() {
            if !hull_fallback {
                return Err(LinguisticError::NonConvexTerm(format!("operand {}", i + 1)));
            }
            hulls.push((i, operand.convex_hull()));
        }
    }
    let operand = |i: usize| -> &FuzzyValue {
        hulls
            .iter()
            .find(|(k, _)| *k == i)
            .map(|(_, h)| h)
            .unwrap_or(operands[i])
    };

    let mut mu = vec![0.0; GRID];
    let mut cuts = Vec::with_capacity(expected);
    for &level in levels.levels() {
        cuts.clear();
        for i in 0..expected {
            match alpha_cut(operand(i), level) {
                Ok(c) => cuts.push(c),
                Err(_) => break,
            }
        }
        if cuts.len() < expected {
            continue;
        }
        let out = interval_op(op, base, &cuts)?;
        // Endpoints snap to the nearest grid point, so a result narrower
        // than one step still keeps its mass.
        let (lo, hi) = (nearest_grid_index(out.lo), nearest_grid_index(out.hi));
        for m in &mut mu[lo..=hi] {
            *m = level;
        }
    }
    Ok(FuzzyValue::from_vec(mu).expect("grid-sized vector"))
}

/// One named entry of the generated vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct VocabularyEntry {
    pub name: String,
    /// Hedges applied outermost first, e.g. `[Not, Very]` for "not very true".
    pub hedges: Vec<Hedge>,
    pub primary: String,
    pub value: FuzzyValue,
}

/// Primary terms plus every hedge chain over them up to a fixed depth.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDictionary {
    primaries: Vec<(String, FuzzyValue)>,
    vocabulary: Vec<VocabularyEntry>,
}

/// Hedge chains in the generated vocabulary are at most this long.
pub const DEFAULT_HEDGE_DEPTH: usize = 2;

impl TermDictionary {
    pub fn new(primaries: Vec<(String, FuzzyValue)>) -> Result<Self, LinguisticError> {
        Self::with_depth(primaries, DEFAULT_HEDGE_DEPTH)
    }

    pub fn with_depth(
        primaries: Vec<(String, FuzzyValue)>,
        depth: usize,
    ) -> Result<Self, LinguisticError> {
        let mut seen = HashSet::new();
        for (name, value) in &primaries {
            if !seen.insert(name.clone()) {
                return Err(LinguisticError::DuplicateTerm(name.clone()));
            }
            if !value.is_convex() {
                return Err(LinguisticError::NonConvexTerm(name.clone()));
            }
            TruthValue::Fuzzy(value.clone()).validate()?;
        }
        let mut vocabulary = Vec::new();
        for (name, value) in &primaries {
            let mut frontier = vec![(Vec::<Hedge>::new(), value.clone())];
            vocabulary.push(VocabularyEntry {
                name: name.clone(),
                hedges: Vec::new(),
                primary: name.clone(),
                value: value.clone(),
            });
            for _ in 0..depth {
                let mut next = Vec::new();
                for (chain, v) in &frontier {
                    for h in Hedge::ALL {
                        let mut hedges = vec![h];
                        hedges.extend(chain.iter().copied());
                        let hv = h.apply(v);
                        vocabulary.push(VocabularyEntry {
                            name: chain_name(&hedges, name),
                            hedges: hedges.clone(),
                            primary: name.clone(),
                            value: hv.clone(),
                        });
                        next.push((hedges, hv));
                    }
                }
                frontier = next;
            }
        }
        Ok(TermDictionary { primaries, vocabulary })
    }

    /// Parses a terms file: `term <name> : (x,mu) (x,mu) ...` per line, `#` comments.
    pub fn parse(source: &str) -> Result<Self, LinguisticError> {
        let mut primaries: Vec<(String, FuzzyValue)> = Vec::new();
        for (idx, raw) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| LinguisticError::TermsSyntax { line: line_no, message };
            let rest = line
                .strip_prefix("term")
                .filter(|r| r.starts_with(char::is_whitespace))
                .ok_or_else(|| syntax("expected 'term <name> : (x,mu) ...'".into()))?;
            let (name, points) = rest
                .split_once(':')
                .ok_or_else(|| syntax("missing ':' after term name".into()))?;
            let name = name.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(syntax(format!("invalid term name '{name}'")));
            }
            let breakpoints = parse_points(points).map_err(syntax)?;
            if primaries.iter().any(|(n, _)| n == name) {
                return Err(LinguisticError::DuplicateTerm(name.to_string()));
            }
            primaries.push((name.to_string(), define_term(name, &breakpoints)?));
        }
        TermDictionary::new(primaries)
    }

    pub fn primaries(&self) -> &[(String, FuzzyValue)] {
        &self.primaries
    }

    pub fn vocabulary(&self) -> &[VocabularyEntry] {
        &self.vocabulary
    }

    /// Looks a term up by its (whitespace-normalised) vocabulary name.
    pub fn lookup(&self, name: &str) -> Option<&FuzzyValue> {
        let wanted = name.split_whitespace().collect::<Vec<_>>().join(" ");
        self.vocabulary.iter().find(|e| e.name == wanted).map(|e| &e.value)
    }

    /// Nearest vocabulary entry by mean absolute difference.
    ///
    /// Ties go to the shorter hedge chain, then the lexicographically
    /// smaller name.
    pub fn approximate(&self, result: &FuzzyValue) -> Result<Approximation, LinguisticError> {
        let best = self
            .vocabulary
            .iter()
            .map(|e| (e, e.value.l1_distance(result)))
            .min_by(|(a, da), (b, db)| {
                let close = (da - db).abs() <= 1e-12;
                if close {
                    a.hedges.len().cmp(&b.hedges.len()).then_with(|| a.name.cmp(&b.name))
                } else {
                    da.total_cmp(db)
                }
            })
            .ok_or(LinguisticError::EmptyDictionary)?;
        Ok(Approximation {
            term: best.0.name.clone(),
            distance: best.1,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Approximation {
    pub term: String,
    pub distance: f64,
}

impl fmt::Display for Approximation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (distance {:.6})", self.term, self.distance)
    }
}

fn chain_name(hedges: &[Hedge], primary: &str) -> String {
    let mut words: Vec<&str> = hedges.iter().map(|h| h.word()).collect();
    words.push(primary);
    words.join(" ")
}

fn parse_points(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix('(')
            .ok_or_else(|| format!("expected '(' at '{rest}'"))?;
        let close = inner.find(')').ok_or("missing ')'")?;
        let (x, mu) = inner[..close]
            .split_once(',')
            .ok_or_else(|| format!("expected 'x,mu' in '({})'", &inner[..close]))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid decimal '{}'", s.trim()))
        };
        out.push((parse(x)?, parse(mu)?));
        rest = inner[close + 1..].trim_start();
    }
    if out.is_empty() {
        return Err("no breakpoints".into());
    }
    Ok(out)
}
