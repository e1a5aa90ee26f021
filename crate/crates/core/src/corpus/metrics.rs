//! Ranking comparison and retrieval effectiveness.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;
use thiserror::Error;

use super::{Corpus, RankedResult};

/// A non-negative fraction kept exact until rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    /// `None` when the denominator is zero.
    pub fn new(num: u64, den: u64) -> Option<Self> {
        (den > 0).then_some(Ratio { num, den })
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Six decimals, rounded half up with integer arithmetic.
    pub fn fixed6(self) -> String {
        let scaled = (u128::from(self.num) * 2_000_000 + u128::from(self.den)) / (2 * u128::from(self.den));
        format!("{}.{:06}", scaled / 1_000_000, scaled % 1_000_000)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fixed6())
    }
}

fn raw(text: String) -> Box<RawValue> {
    RawValue::from_string(text).expect("fixed decimals are valid JSON")
}

/// An optional number rendered with six decimals, or `"n/a"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed6(pub Option<f64>);

impl Fixed6 {
    pub fn render(&self) -> String {
        match self.0 {
            // avoid "-0.000000"
            Some(v) if v == 0.0 => "0.000000".into(),
            Some(v) => format!("{v:.6}"),
            None => "n/a".into(),
        }
    }
}

impl Serialize for Fixed6 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(_) => raw(self.render()).serialize(s),
            None => s.serialize_str("n/a"),
        }
    }
}

/// An optional ratio rendered exactly to six decimals, or `"n/a"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedRatio(pub Option<Ratio>);

impl FixedRatio {
    pub fn render(&self) -> String {
        self.0.map_or_else(|| "n/a".into(), Ratio::fixed6)
    }
}

impl Serialize for FixedRatio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Some(r) => raw(r.fixed6()).serialize(s),
            None => s.serialize_str("n/a"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rankings cover different documents ({0} not in both)")]
pub struct MismatchedCorpora(pub String);

#[derive(Debug, Error)]
pub enum JudgmentsError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("judgments: {0}")]
    Csv(#[from] csv::Error),
    #[error("judgments: header must be 'doc_id,relevant'")]
    Header,
    #[error("judgments line {line}: relevant must be 0 or 1, got '{value}'")]
    BadFlag { line: u64, value: String },
    #[error("judgments: document '{0}' judged twice")]
    Duplicate(String),
    #[error("judgments: document '{0}' is not in the corpus")]
    UnknownDocument(String),
}

/// Binary relevance judgments for one query.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Judgments {
    flags: BTreeMap<String, bool>,
}

#[derive(Deserialize)]
struct JudgmentRow {
    doc_id: String,
    relevant: String,
}

impl Judgments {
    pub fn new(flags: impl IntoIterator<Item = (String, bool)>) -> Self {
        Judgments { flags: flags.into_iter().collect() }
    }

    /// Reads CSV with header `doc_id,relevant` and flags in `{0,1}`.
    pub fn from_reader(reader: impl Read) -> Result<Self, JudgmentsError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        if rdr.headers()?.iter().collect::<Vec<_>>() != ["doc_id", "relevant"] {
            return Err(JudgmentsError::Header);
        }
        let mut flags = BTreeMap::new();
        for row in rdr.deserialize() {
            let row: JudgmentRow = row?;
            let flag = match row.relevant.as_str() {
                "0" => false,
                "1" => true,
                other => {
                    return Err(JudgmentsError::BadFlag {
                        line: flags.len() as u64 + 2,
                        value: other.to_string(),
                    })
                }
            };
            if flags.insert(row.doc_id.clone(), flag).is_some() {
                return Err(JudgmentsError::Duplicate(row.doc_id));
            }
        }
        Ok(Judgments { flags })
    }

    pub fn load(path: &Path) -> Result<Self, JudgmentsError> {
        let file = std::fs::File::open(path).map_err(|source| JudgmentsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(file)
    }

    /// Fails on the first judged id that is not a corpus document.
    pub fn check(&self, corpus: &Corpus) -> Result<(), JudgmentsError> {
        match self.flags.keys().find(|id| corpus.get(id).is_none()) {
            Some(id) => Err(JudgmentsError::UnknownDocument(id.clone())),
            None => Ok(()),
        }
    }

    pub fn relevant(&self) -> BTreeSet<&str> {
        self.flags.iter().filter(|(_, &r)| r).map(|(id, _)| id.as_str()).collect()
    }
}

/// 1-based ranks with ties (equal rank and secondary keys) sharing their
/// average rank.
fn average_ranks(result: &RankedResult) -> HashMap<&str, f64> {
    let e = &result.entries;
    let mut ranks = HashMap::with_capacity(e.len());
    let mut i = 0;
    while i < e.len() {
        let mut j = i + 1;
        while j < e.len() && e[j].rank_key == e[i].rank_key && e[j].secondary == e[i].secondary {
            j += 1;
        }
        // positions i+1 ..= j
        let avg = (i + 1 + j) as f64 / 2.0;
        for entry in &e[i..j] {
            ranks.insert(entry.doc.as_str(), avg);
        }
        i = j;
    }
    ranks
}

fn paired<'a>(a: &'a RankedResult, b: &'a RankedResult) -> Result<Vec<(f64, f64)>, MismatchedCorpora> {
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    if let Some(id) = ra.keys().find(|id| !rb.contains_key(*id)).or_else(|| rb.keys().find(|id| !ra.contains_key(*id))) {
        return Err(MismatchedCorpora(id.to_string()));
    }
    let mut ids: Vec<&&str> = ra.keys().collect();
    ids.sort();
    Ok(ids.into_iter().map(|id| (ra[*id], rb[*id])).collect())
}

/// Spearman's rho (Pearson correlation of average ranks); `None` when
/// either ranking is constant or has fewer than two documents.
pub fn spearman(a: &RankedResult, b: &RankedResult) -> Result<Option<f64>, MismatchedCorpora> {
    let pairs = paired(a, b)?;
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return Ok(None);
    }
    let (mx, my) = (
        pairs.iter().map(|p| p.0).sum::<f64>() / n,
        pairs.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)))
}

/// Kendall's tau-b; `None` when either ranking is entirely tied.
pub fn kendall_tau_b(a: &RankedResult, b: &RankedResult) -> Result<Option<f64>, MismatchedCorpora> {
    let pairs = paired(a, b)?;
    let (mut concordant, mut discordant, mut ties_x, mut ties_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let dx = pairs[i].0.total_cmp(&pairs[j].0) as i64;
            let dy = pairs[i].1.total_cmp(&pairs[j].1) as i64;
            if dx == 0 {
                ties_x += 1;
            }
            if dy == 0 {
                ties_y += 1;
            }
            match dx * dy {
                1 => concordant += 1,
                -1 => discordant += 1,
                _ => {}
            }
        }
    }
    let n0 = (pairs.len() * pairs.len().saturating_sub(1) / 2) as i64;
    let denom = ((n0 - ties_x) as f64) * ((n0 - ties_y) as f64);
    if denom == 0.0 {
        return Ok(None);
    }
    Ok(Some(((concordant - discordant) as f64 / denom.sqrt()).clamp(-1.0, 1.0)))
}

/// Overlap of the two retrieved sets; two empty sets count as identical.
pub fn jaccard(a: &RankedResult, b: &RankedResult) -> f64 {
    let ra: BTreeSet<&str> = a.retrieved().into_iter().collect();
    let rb: BTreeSet<&str> = b.retrieved().into_iter().collect();
    let union = ra.union(&rb).count();
    if union == 0 {
        return 1.0;
    }
    ra.intersection(&rb).count() as f64 / union as f64
}

/// `(precision, recall)` of the retrieved set; precision is undefined for an
/// empty retrieved set and recall for an empty relevant set.
pub fn precision_recall(result: &RankedResult, judgments: &Judgments) -> (Option<Ratio>, Option<Ratio>) {
    let retrieved: BTreeSet<&str> = result.retrieved().into_iter().collect();
    let relevant = judgments.relevant();
    let hits = retrieved.intersection(&relevant).count() as u64;
    (
        Ratio::new(hits, retrieved.len() as u64),
        Ratio::new(hits, relevant.len() as u64),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub spearman: Option<f64>,
    pub kendall: Option<f64>,
    pub jaccard: f64,
    /// Per calculus name; empty without judgments.
    pub precision: BTreeMap<String, Option<Ratio>>,
    pub recall: BTreeMap<String, Option<Ratio>>,
}

impl Serialize for MetricsReport {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("spearman", &Fixed6(self.spearman))?;
        m.serialize_entry("kendall", &Fixed6(self.kendall))?;
        m.serialize_entry("jaccard", &Fixed6(Some(self.jaccard)))?;
        let fixed = |map: &BTreeMap<String, Option<Ratio>>| -> BTreeMap<String, FixedRatio> {
            map.iter().map(|(k, v)| (k.clone(), FixedRatio(*v))).collect()
        };
        m.serialize_entry("precision", &fixed(&self.precision))?;
        m.serialize_entry("recall", &fixed(&self.recall))?;
        m.end()
    }
}

/// All metrics for one pair of rankings.
pub fn compare(a: &RankedResult, b: &RankedResult, judgments: Option<&Judgments>) -> Result<MetricsReport, MismatchedCorpora> {
    let mut precision = BTreeMap::new();
    let mut recall = BTreeMap::new();
    if let Some(j) = judgments {
        for r in [a, b] {
            let (p, rc) = precision_recall(r, j);
            precision.insert(r.calculus.clone(), p);
            recall.insert(r.calculus.clone(), rc);
        }
    }
    Ok(MetricsReport {
        spearman: spearman(a, b)?,
        kendall: kendall_tau_b(a, b)?,
        jaccard: jaccard(a, b),
        precision,
        recall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::RankedEntry;
    use crate::TruthValue;

    fn result(name: &str, keys: &[(&str, f64)], threshold: f64) -> RankedResult {
        let mut entries: Vec<RankedEntry> = keys
            .iter()
            .map(|&(doc, k)| RankedEntry {
                doc: doc.into(),
                value: TruthValue::Scalar(k),
                rank_key: k,
                secondary: k,
                bounded: false,
                warnings: vec![],
            })
            .collect();
        entries.sort_by(crate::corpus::rank_order);
        RankedResult { calculus: name.into(), threshold, entries, failures: vec![] }
    }

    #[test]
    fn identical_and_reversed() {
        let a = result("a", &[("x", 0.9), ("y", 0.5), ("z", 0.1)], 0.3);
        let r = compare(&a, &a, None).unwrap();
        assert_eq!((r.spearman, r.kendall, r.jaccard), (Some(1.0), Some(1.0), 1.0));
        let b = result("b", &[("x", 0.1), ("y", 0.5), ("z", 0.9)], 0.3);
        assert_eq!(spearman(&a, &b).unwrap(), Some(-1.0));
        assert_eq!(kendall_tau_b(&a, &b).unwrap(), Some(-1.0));
    }

    #[test]
    fn ties_use_average_ranks() {
        let a = result("a", &[("w", 0.9), ("x", 0.5), ("y", 0.5), ("z", 0.1)], 0.0);
        let ranks = average_ranks(&a);
        assert_eq!(ranks["x"], 2.5);
        assert_eq!(ranks["y"], 2.5);
        let flat = result("f", &[("w", 0.2), ("x", 0.2), ("y", 0.2), ("z", 0.2)], 0.0);
        assert_eq!(spearman(&a, &flat).unwrap(), None);
        assert_eq!(kendall_tau_b(&a, &flat).unwrap(), None);
        // tau-b against a brute-force count: one tie in a, none in b
        let b = result("b", &[("w", 0.9), ("x", 0.7), ("y", 0.5), ("z", 0.1)], 0.0);
        let expected = 5.0 / (5.0f64 * 6.0).sqrt();
        assert!((kendall_tau_b(&a, &b).unwrap().unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn mismatched_corpora() {
        let a = result("a", &[("x", 0.9)], 0.0);
        let b = result("b", &[("y", 0.9)], 0.0);
        assert!(spearman(&a, &b).is_err());
    }

    #[test]
    fn precision_recall_example() {
        let r = result("c", &[("a", 0.9), ("b", 0.8), ("c", 0.7), ("d", 0.1), ("e", 0.0)], 0.5);
        let j = Judgments::new([("b", true), ("c", true), ("d", true), ("a", false)].map(|(d, f)| (d.to_string(), f)));
        let (p, rc) = precision_recall(&r, &j);
        assert_eq!(p, Ratio::new(2, 3));
        assert_eq!(rc, Ratio::new(2, 3));
        assert_eq!(p.unwrap().fixed6(), "0.666667");
        let empty = result("c", &[("a", 0.1)], 0.5);
        let (p, _) = precision_recall(&empty, &j);
        assert_eq!(FixedRatio(p).render(), "n/a");
    }

    #[test]
    fn ratio_rendering_is_exact() {
        assert_eq!(Ratio::new(1, 8).unwrap().fixed6(), "0.125000");
        assert_eq!(Ratio::new(1, 3).unwrap().fixed6(), "0.333333");
        assert_eq!(Ratio::new(1, 2_000_000).unwrap().fixed6(), "0.000001");
        assert_eq!(Ratio::new(7, 7).unwrap().fixed6(), "1.000000");
        assert_eq!(Ratio::new(1, 0), None);
    }

    #[test]
    fn jaccard_of_empty_sets_is_one() {
        let a = result("a", &[("x", 0.1)], 0.5);
        assert_eq!(jaccard(&a, &a), 1.0);
    }

    #[test]
    fn report_json_is_fixed_precision() {
        let a = result("a", &[("x", 0.9), ("y", 0.5), ("z", 0.1)], 0.3);
        let b = result("b", &[("x", 0.1), ("y", 0.5), ("z", 0.9)], 0.3);
        let j = Judgments::new([("x".to_string(), true)]);
        let json = serde_json::to_string(&compare(&a, &b, Some(&j)).unwrap()).unwrap();
        assert_eq!(
            json,
            r#"{"spearman":-1.000000,"kendall":-1.000000,"jaccard":0.333333,"precision":{"a":0.500000,"b":0.000000},"recall":{"a":1.000000,"b":0.000000}}"#
        );
    }

    #[test]
    fn judgments_csv() {
        let j = Judgments::from_reader("doc_id,relevant\na,1\nb, 0\n".as_bytes()).unwrap();
        assert_eq!(j.relevant(), BTreeSet::from(["a"]));
        assert!(matches!(Judgments::from_reader("id,rel\n".as_bytes()), Err(JudgmentsError::Header)));
        assert!(matches!(
            Judgments::from_reader("doc_id,relevant\na,yes\n".as_bytes()),
            Err(JudgmentsError::BadFlag { line: 2, .. })
        ));
        assert!(matches!(
            Judgments::from_reader("doc_id,relevant\na,1\na,0\n".as_bytes()),
            Err(JudgmentsError::Duplicate(_))
        ));
        let corpus = Corpus::new(vec![crate::corpus::Document::new("a", "")]);
        assert!(j.check(&corpus).is_err());
    }
}
