use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{normalize_element, tokenize, MetricsError, Prf};
use crate::corpus::{AdjudicationRecord, Category, ElementSet, Verdict};
use crate::extraction::ExtractionAnswer;

/// Adjudication target used when scoring coverage of a final summary.
pub const COVERAGE_TARGET: &str = "final_summary";

/// Identifies which judgement an element match belongs to.
#[derive(Debug, Clone, Copy)]
pub struct MatchKey<'a> {
    pub doc_id: &'a str,
    pub category: Category,
    pub target: &'a str,
}

/// Human verdicts keyed by (doc, category, normalized element, target).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Adjudications {
    verdicts: HashMap<(String, Category, String, String), bool>,
}

impl Adjudications {
    pub fn from_records(records: &[AdjudicationRecord]) -> Self {
        let mut adj = Adjudications::default();
        for r in records {
            adj.insert(&r.doc_id, r.category, &r.element, &r.target, r.verdict == Verdict::Match);
        }
        adj
    }

    pub fn insert(&mut self, doc_id: &str, category: Category, element: &str, target: &str, matches: bool) {
        self.verdicts.insert((doc_id.to_string(), category, normalize_element(element), target.to_string()), matches);
    }

    pub fn len(&self) -> usize {
        self.verdicts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verdicts.is_empty()
    }

    fn lookup(&self, key: &MatchKey<'_>, element: &str) -> Result<bool, MetricsError> {
        let k = (key.doc_id.to_string(), key.category, normalize_element(element), key.target.to_string());
        self.verdicts.get(&k).copied().ok_or_else(|| MetricsError::MissingAdjudication {
            doc_id: key.doc_id.to_string(),
            category: key.category.to_string(),
            element: element.to_string(),
            target: key.target.to_string(),
        })
    }
}

/// How an element is judged present in a text or equal to another element.
#[derive(Debug, Clone)]
pub enum Matcher {
    /// Normalized element occurs as a contiguous token span.
    Exact,
    /// At least this fraction of the element's tokens occur in the text.
    Containment(f64),
    /// Verdicts read from an adjudication file.
    Adjudicated(Arc<Adjudications>),
}

impl Default for Matcher {
    fn default() -> Self {
        Matcher::Containment(0.6)
    }
}

impl Matcher {
    /// Stable label recorded in reports, e.g. `containment(0.60)`.
    pub fn describe(&self) -> String {
        match self {
            Matcher::Exact => "exact".to_string(),
            Matcher::Containment(t) => format!("containment({t:.2})"),
            Matcher::Adjudicated(_) => "adjudicated".to_string(),
        }
    }

    pub fn element_match(&self, key: &MatchKey<'_>, element: &str, text: &str) -> Result<bool, MetricsError> {
        match self {
            Matcher::Exact => {
                let needle = tokenize(element);
                let hay = tokenize(text);
                Ok(!needle.is_empty() && hay.tokens().windows(needle.len()).any(|w| w == needle.tokens()))
            }
            Matcher::Containment(t) => Ok(containment(element, text).is_some_and(|c| c >= *t)),
            Matcher::Adjudicated(adj) => adj.lookup(key, element),
        }
    }

    /// |A ∩ A'| for two element lists under this matcher.
    fn intersection(&self, key: &MatchKey<'_>, a: &[String], a_prime: &[String]) -> Result<usize, MetricsError> {
        match self {
            Matcher::Exact => {
                let b: HashSet<String> = a_prime.iter().map(|e| normalize_element(e)).collect();
                Ok(a.iter().filter(|e| b.contains(&normalize_element(e))).count())
            }
            Matcher::Containment(t) => {
                let adjacency: Vec<Vec<usize>> = a
                    .iter()
                    .map(|x| {
                        a_prime
                            .iter()
                            .enumerate()
                            .filter(|(_, y)| {
                                containment(x, y).is_some_and(|c| c >= *t) || containment(y, x).is_some_and(|c| c >= *t)
                            })
                            .map(|(j, _)| j)
                            .collect()
                    })
                    .collect();
                Ok(max_bipartite_matching(&adjacency, a_prime.len()))
            }
            Matcher::Adjudicated(adj) => {
                let mut matched = 0;
                for e in a {
                    if adj.lookup(key, e)? {
                        matched += 1;
                    }
                }
                Ok(matched.min(a_prime.len()))
            }
        }
    }
}

/// Fraction of `element` tokens (with multiplicity) present in `text`.
/// `None` when the element has no tokens.
pub fn containment(element: &str, text: &str) -> Option<f64> {
    let needle = tokenize(element);
    if needle.is_empty() {
        return None;
    }
    let text_tokens = tokenize(text);
    let hay: HashSet<&String> = text_tokens.iter().collect();
    let hits = needle.iter().filter(|t| hay.contains(t)).count();
    Some(hits as f64 / needle.len() as f64)
}

// Kuhn's augmenting-path matching; sets are tiny.
fn max_bipartite_matching(adjacency: &[Vec<usize>], right: usize) -> usize {
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none_or(|w| augment(w, adj, seen, owner)) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    let mut owner = vec![None; right];
    (0..adjacency.len()).filter(|&u| augment(u, adjacency, &mut vec![false; right], &mut owner)).count()
}

/// One value per core-element category.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CategoryScores<T> {
    pub entity: T,
    pub date: T,
    pub event: T,
    pub result: T,
}

impl<T> CategoryScores<T> {
    pub fn get(&self, c: Category) -> &T {
        match c {
            Category::Entity => &self.entity,
            Category::Date => &self.date,
            Category::Event => &self.event,
            Category::Result => &self.result,
        }
    }

    pub fn try_from_fn<E>(mut f: impl FnMut(Category) -> Result<T, E>) -> Result<Self, E> {
        Ok(CategoryScores {
            entity: f(Category::Entity)?,
            date: f(Category::Date)?,
            event: f(Category::Event)?,
            result: f(Category::Result)?,
        })
    }

    pub fn from_fn(mut f: impl FnMut(Category) -> T) -> Self {
        CategoryScores {
            entity: f(Category::Entity),
            date: f(Category::Date),
            event: f(Category::Event),
            result: f(Category::Result),
        }
    }
}

pub type ElementScores = CategoryScores<Prf>;
/// `None` marks a category with no extracted elements (n/a).
pub type CoverageScores = CategoryScores<Option<f64>>;

impl ElementScores {
    /// Corpus aggregate: mean precision and recall over documents, F1 from
    /// those means.
    pub fn corpus_mean(docs: &[ElementScores]) -> ElementScores {
        ElementScores::from_fn(|c| {
            if docs.is_empty() {
                return Prf::default();
            }
            let n = docs.len() as f64;
            let p = docs.iter().map(|d| d.get(c).precision).sum::<f64>() / n;
            let r = docs.iter().map(|d| d.get(c).recall).sum::<f64>() / n;
            Prf::from_pr(p, r)
        })
    }
}

impl CoverageScores {
    /// Per-category mean over documents, skipping n/a entries.
    pub fn corpus_mean(docs: &[CoverageScores]) -> CoverageScores {
        CoverageScores::from_fn(|c| {
            let vals: Vec<f64> = docs.iter().filter_map(|d| *d.get(c)).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
    }
}

/// One annotator's source-side set A and summary-side set A'.
#[derive(Debug, Clone, Copy)]
pub struct AnnotatorPair<'a> {
    pub source: &'a ElementSet,
    pub summary: &'a ElementSet,
}

/// Exact rational accumulator so averaging is order independent.
#[derive(Clone, Copy)]
struct Ratio {
    num: u128,
    den: u128,
}

impl Ratio {
    const ZERO: Ratio = Ratio { num: 0, den: 1 };

    fn new(num: usize, den: usize) -> Ratio {
        Ratio { num: num as u128, den: den as u128 }.reduced()
    }

    fn reduced(self) -> Ratio {
        let g = gcd(self.num, self.den);
        Ratio { num: self.num / g, den: self.den / g }
    }

    fn add(self, o: Ratio) -> Ratio {
        Ratio { num: self.num * o.den + o.num * self.den, den: self.den * o.den }.reduced()
    }

    fn to_f64_over(self, k: usize) -> f64 {
        let r = Ratio { num: self.num, den: self.den * k as u128 }.reduced();
        r.num as f64 / r.den as f64
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

fn dedup(list: &[String]) -> Vec<String> {
    let mut seen = HashSet::new();
    list.iter().filter(|e| seen.insert(normalize_element(e))).cloned().collect()
}

/// Element precision and recall per category, averaged over annotators.
///
/// Per annotator, P = |A ∩ A'| / |A'| and R = |A ∩ A'| / |A|. An empty A
/// gives R = 1 when A' is also empty and 0 otherwise; an empty A' gives
/// P = 1 when A is also empty and 0 otherwise. F1 is the harmonic mean of
/// the averaged P and R.
pub fn element_pr(
    doc_id: &str,
    target: &str,
    pairs: &[AnnotatorPair<'_>],
    matcher: &Matcher,
) -> Result<ElementScores, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::NoAnnotators);
    }
    ElementScores::try_from_fn(|category| {
        let key = MatchKey { doc_id, category, target };
        let mut p_sum = Ratio::ZERO;
        let mut r_sum = Ratio::ZERO;
        for pair in pairs {
            let a = dedup(pair.source.get(category));
            let a_prime = dedup(pair.summary.get(category));
            let hit = matcher.intersection(&key, &a, &a_prime)?;
            let p = match (a_prime.len(), a.len()) {
                (0, 0) => Ratio::new(1, 1),
                (0, _) => Ratio::ZERO,
                (n, _) => Ratio::new(hit, n),
            };
            let r = match (a.len(), a_prime.len()) {
                (0, 0) => Ratio::new(1, 1),
                (0, _) => Ratio::ZERO,
                (n, _) => Ratio::new(hit, n),
            };
            p_sum = p_sum.add(p);
            r_sum = r_sum.add(r);
        }
        Ok(Prf::from_pr(p_sum.to_f64_over(pairs.len()), r_sum.to_f64_over(pairs.len())))
    })
}

/// Fraction of each category's extracted elements found in the summary.
pub fn coverage(
    doc_id: &str,
    ans: &ExtractionAnswer,
    summary: &str,
    matcher: &Matcher,
) -> Result<CoverageScores, MetricsError> {
    if !ans.valid {
        return Err(MetricsError::InvalidExtraction);
    }
    CoverageScores::try_from_fn(|category| {
        let elements = ans.parsed.get(category);
        if elements.is_empty() {
            return Ok(None);
        }
        let key = MatchKey { doc_id, category, target: COVERAGE_TARGET };
        let mut hits = 0usize;
        for e in elements {
            if matcher.element_match(&key, e, summary)? {
                hits += 1;
            }
        }
        Ok(Some(hits as f64 / elements.len() as f64))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(entities: &[&str]) -> ElementSet {
        ElementSet { entities: entities.iter().map(|s| s.to_string()).collect(), ..ElementSet::default() }
    }

    fn key() -> MatchKey<'static> {
        MatchKey { doc_id: "d", category: Category::Entity, target: "t" }
    }

    #[test]
    fn exact_match_is_a_contiguous_span() {
        let m = Matcher::Exact;
        assert!(m.element_match(&key(), "Rod Blagojevich", "Former governor rod blagojevich, 57, said").unwrap());
        assert!(!m.element_match(&key(), "Rod Blagojevich", "Blagojevich, Rod").unwrap());
        assert!(!m.element_match(&key(), "...", "anything").unwrap());
    }

    #[test]
    fn containment_counts_element_tokens() {
        // element tokens: a, 14year, sentence, in, prison; text lacks "in"
        let text = "He is serving a 14-year sentence at a prison camp.";
        assert_eq!(containment("a 14-year sentence in prison", text), Some(0.8));
        assert!(Matcher::Containment(0.6).element_match(&key(), "a 14-year sentence in prison", text).unwrap());
        assert!(!Matcher::Containment(0.9).element_match(&key(), "a 14-year sentence in prison", text).unwrap());
    }

    #[test]
    fn adjudicated_lookup_and_missing_verdict() {
        let mut adj = Adjudications::default();
        adj.insert("d", Category::Entity, "The Senate", "t", false);
        let m = Matcher::Adjudicated(Arc::new(adj));
        assert!(!m.element_match(&key(), "the  senate", "irrelevant").unwrap());
        assert!(matches!(
            m.element_match(&key(), "the house", "irrelevant"),
            Err(MetricsError::MissingAdjudication { .. })
        ));
    }

    #[test]
    fn element_pr_hand_example() {
        let a = set(&["e1", "e2", "e3"]);
        let b = set(&["e1", "e4"]);
        let s = element_pr("d", "t", &[AnnotatorPair { source: &a, summary: &b }], &Matcher::Exact).unwrap();
        assert_eq!(s.entity.precision, 0.5);
        assert_eq!(s.entity.recall, 1.0 / 3.0);
        assert!((s.entity.f1 - 0.4).abs() < 1e-12);
        // untouched categories are empty on both sides
        assert_eq!(s.date, Prf::from_pr(1.0, 1.0));
    }

    #[test]
    fn element_pr_empty_source_edge_cases() {
        let empty = set(&[]);
        let one = set(&["x"]);
        let both_empty =
            element_pr("d", "t", &[AnnotatorPair { source: &empty, summary: &empty }], &Matcher::Exact).unwrap();
        assert_eq!(both_empty.entity.recall, 1.0);
        assert_eq!(both_empty.entity.precision, 1.0);
        let summary_has =
            element_pr("d", "t", &[AnnotatorPair { source: &empty, summary: &one }], &Matcher::Exact).unwrap();
        assert_eq!(summary_has.entity.recall, 0.0);
        let source_has =
            element_pr("d", "t", &[AnnotatorPair { source: &one, summary: &empty }], &Matcher::Exact).unwrap();
        assert_eq!(source_has.entity.precision, 0.0);
        assert!(matches!(element_pr("d", "t", &[], &Matcher::Exact), Err(MetricsError::NoAnnotators)));
    }

    #[test]
    fn containment_intersection_is_one_to_one() {
        // both summary elements resemble the same source element
        let a = set(&["the national enquirer"]);
        let b = set(&["national enquirer", "the enquirer national"]);
        let s = element_pr("d", "t", &[AnnotatorPair { source: &a, summary: &b }], &Matcher::Containment(0.6)).unwrap();
        assert_eq!(s.entity.recall, 1.0);
        assert_eq!(s.entity.precision, 0.5);
    }

    #[test]
    fn adjudicated_intersection_is_capped() {
        let mut adj = Adjudications::default();
        adj.insert("d", Category::Entity, "a", "t", true);
        adj.insert("d", Category::Entity, "b", "t", true);
        let m = Matcher::Adjudicated(Arc::new(adj));
        let a = set(&["a", "b"]);
        let b = set(&["ab"]);
        let s = element_pr("d", "t", &[AnnotatorPair { source: &a, summary: &b }], &m);
        // dates etc. are empty on both sides, so only entity needs verdicts
        let s = s.unwrap();
        // one summary element can account for at most one intersection slot
        assert_eq!(s.entity.precision, 1.0);
        assert_eq!(s.entity.recall, 0.5);
    }

    #[test]
    fn coverage_means_skip_na() {
        let docs = [
            CoverageScores { entity: Some(1.0), date: None, event: Some(0.5), result: None },
            CoverageScores { entity: Some(0.0), date: None, event: Some(1.0), result: Some(1.0) },
        ];
        let m = CoverageScores::corpus_mean(&docs);
        assert_eq!(m.entity, Some(0.5));
        assert_eq!(m.date, None);
        assert_eq!(m.event, Some(0.75));
        assert_eq!(m.result, Some(1.0));
    }

    #[test]
    fn matching_reduces_to_kuhn() {
        // 0-0, 0-1, 1-0: perfect matching of size 2 needs augmentation
        assert_eq!(max_bipartite_matching(&[vec![0, 1], vec![0]], 2), 2);
        assert_eq!(max_bipartite_matching(&[vec![0], vec![0]], 2), 1);
        assert_eq!(max_bipartite_matching(&[], 0), 0);
    }

    fn small_sets() -> impl Strategy<Value = Vec<String>> {
        prop::collection::btree_set("[a-f]", 0..=4).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn annotator_order_does_not_matter(
            sets in prop::collection::vec((small_sets(), small_sets()), 1..=3),
            rotate in 0usize..3,
        ) {
            let owned: Vec<(ElementSet, ElementSet)> = sets
                .iter()
                .map(|(a, b)| (ElementSet { events: a.clone(), ..Default::default() },
                               ElementSet { events: b.clone(), ..Default::default() }))
                .collect();
            let pairs: Vec<AnnotatorPair> =
                owned.iter().map(|(a, b)| AnnotatorPair { source: a, summary: b }).collect();
            let mut rotated = pairs.clone();
            let n = rotated.len();
            rotated.rotate_left(rotate % n);
            rotated.reverse();
            let x = element_pr("d", "t", &pairs, &Matcher::Exact).unwrap();
            let y = element_pr("d", "t", &rotated, &Matcher::Exact).unwrap();
            prop_assert_eq!(x, y);
            prop_assert!(x.event.is_well_formed());
        }

        #[test]
        fn coverage_is_monotone_under_appending(
            words in prop::collection::vec("[a-e]{1,2}", 1..6),
            summary in "[a-e ]{0,20}",
            extra in 0usize..6,
        ) {
            let parsed = ElementSet { entities: words.clone(), ..ElementSet::default() };
            let ans = ExtractionAnswer::from_parts("d", "raw", parsed, true);
            let m = Matcher::Containment(0.6);
            let before = coverage("d", &ans, &summary, &m).unwrap();
            let grown = format!("{summary} {}", words[extra % words.len()]);
            let after = coverage("d", &ans, &grown, &m).unwrap();
            prop_assert!(after.entity.unwrap() >= before.entity.unwrap());
        }
    }
}
