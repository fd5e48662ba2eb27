use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BipartiteGraph, Concept, SourceNodeId, TargetNode};
use crate::assoc::{best_candidate, coverage, CandidateConstraints};
use crate::corpus::{IndexedCorpus, LanguageId, VerseId, VerseSet};
use crate::error::{Error, Result};

/// How many verses a candidate must occur in (strictly more than).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountThreshold {
    Absolute(usize),
    /// A fraction of the pass's base verse set.
    Fraction(f64),
}

impl CountThreshold {
    pub fn min_count(&self, base: usize) -> usize {
        match *self {
            CountThreshold::Absolute(n) => n,
            // tolerance so that e.g. 0.1 * 70 lands on 7, not 7.000000000000001
            CountThreshold::Fraction(f) => (f * base as f64 + 1e-9).floor() as usize,
        }
    }
}

/// Candidate restrictions for one side of the graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideParams {
    pub min_len: usize,
    pub max_len: usize,
    pub respect_word_boundary: bool,
    pub threshold: CountThreshold,
}

impl SideParams {
    fn constraints(&self, base: usize) -> Result<CandidateConstraints> {
        CandidateConstraints::new(
            self.min_len,
            self.max_len,
            self.respect_word_boundary,
            self.threshold.min_count(base),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassParams {
    /// Iteration budget per pass (M).
    pub max_iterations: usize,
    /// Coverage at which a pass stops (α).
    pub alpha: f64,
    /// Forward-pass candidates in the target language.
    pub target: SideParams,
    /// Backward-pass candidates in the source language.
    pub source: SideParams,
}

impl Default for PassParams {
    fn default() -> Self {
        PassParams {
            max_iterations: 5,
            alpha: 0.9,
            target: SideParams {
                min_len: 1,
                max_len: 8,
                respect_word_boundary: false,
                threshold: CountThreshold::Fraction(0.1),
            },
            source: SideParams {
                min_len: 3,
                max_len: 32,
                respect_word_boundary: true,
                threshold: CountThreshold::Absolute(2),
            },
        }
    }
}

impl PassParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max iterations must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        self.target.constraints(0)?;
        self.source.constraints(0)?;
        Ok(())
    }
}

/// Why a pass stopped. Exactly one per pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Coverage of the base verse set reached α.
    CoverageReached,
    /// M strings were selected without reaching α.
    IterationsExhausted,
    /// No admissible candidate was left before reaching α.
    CandidatesExhausted,
    /// The query side occurs in no parallel verse.
    NoQueryVerses,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassReport {
    pub cause: Termination,
    /// Loop iterations started, including a final one that only checked coverage.
    pub iterations: usize,
    /// Size of the base verse set V1.
    pub base_verses: usize,
    /// Final coverage of V1 by the selected strings.
    pub coverage: f64,
    /// Selected strings in selection order.
    pub strings: Vec<String>,
}

impl PassReport {
    fn empty() -> Self {
        PassReport {
            cause: Termination::NoQueryVerses,
            iterations: 0,
            base_verses: 0,
            coverage: 0.0,
            strings: Vec::new(),
        }
    }
}

/// Per (concept, language) summary written next to the graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub concept: String,
    pub language: LanguageId,
    pub parallel_verses: usize,
    pub forward: PassReport,
    pub backward: PassReport,
    pub t_size: usize,
    pub s_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    /// The report of a pair whose run failed with `error`.
    pub fn failed(concept: &str, language: &LanguageId, error: impl ToString) -> Self {
        RunReport {
            concept: concept.to_owned(),
            language: language.clone(),
            parallel_verses: 0,
            forward: PassReport::empty(),
            backward: PassReport::empty(),
            t_size: 0,
            s_size: 0,
            error: Some(error.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForwardResult {
    /// T, in selection order.
    pub strings: Vec<String>,
    /// Verses reached by forward edges.
    pub verses: BTreeSet<VerseId>,
    pub report: PassReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BackwardResult {
    /// S, in selection order.
    pub strings: Vec<String>,
    pub edges: Vec<(TargetNode, SourceNodeId)>,
    pub report: PassReport,
}

/// The shared iteration scheme of both passes.
///
/// `base` is the query verse set expressed in the retrieval language's
/// positions. Each round recomputes the uncovered part of `base`, stops once
/// `strings` cover α of the first round's set, and otherwise adds the
/// candidate most associated with the uncovered verses. `on_select` sees each
/// new string with the verses that were still uncovered when it was chosen.
fn iterate(
    idx: &crate::corpus::OccurrenceIndex,
    base: &VerseSet,
    universe: &VerseSet,
    side: &SideParams,
    params: &PassParams,
    mut on_select: impl FnMut(&str, &VerseSet),
) -> Result<PassReport> {
    if base.is_empty() {
        return Ok(PassReport::empty());
    }
    let cons = side.constraints(base.len())?;
    let mut strings: Vec<String> = Vec::new();
    let mut chosen: BTreeSet<String> = BTreeSet::new();
    let mut iterations = 0;
    let mut cause = None;
    for _ in 0..params.max_iterations {
        iterations += 1;
        // V1 is `base` itself: nothing is selected in the first round
        if coverage(idx, &strings, base) >= params.alpha {
            cause = Some(Termination::CoverageReached);
            break;
        }
        let uncovered = base.filter(|p| !idx.verse_contains_any(p, &strings));
        match best_candidate(idx, &uncovered, &chosen, &cons, universe) {
            Some(best) => {
                on_select(&best.text, &uncovered);
                chosen.insert(best.text.clone());
                strings.push(best.text);
            }
            None => {
                cause = Some(Termination::CandidatesExhausted);
                break;
            }
        }
    }
    let final_coverage = coverage(idx, &strings, base);
    let cause = cause.unwrap_or(if final_coverage >= params.alpha {
        Termination::CoverageReached
    } else {
        Termination::IterationsExhausted
    });
    Ok(PassReport {
        cause,
        iterations,
        base_verses: base.len(),
        coverage: final_coverage,
        strings,
    })
}

fn check_pair(corpus: &IndexedCorpus, focal: &Concept, language: &LanguageId) -> Result<()> {
    if !focal.is_focal {
        return Err(Error::InvalidInput(format!(
            "`{}` is not a focal concept",
            focal.name
        )));
    }
    if language == corpus.source() {
        return Err(Error::InvalidInput(format!(
            "target language `{language}` is the source language"
        )));
    }
    corpus.index(language).map(|_| ())
}

/// Searches target-language strings associated with the verses containing
/// `focal`, and links `focal` to every parallel verse containing one of them.
pub fn forward_pass(
    corpus: &IndexedCorpus,
    focal: &Concept,
    language: &LanguageId,
    params: &PassParams,
) -> Result<ForwardResult> {
    params.validate()?;
    check_pair(corpus, focal, language)?;
    let src = corpus.source_index();
    let tgt = corpus.index(language)?;
    let pairing = corpus.pairing(corpus.source(), language)?;

    let with_focal = src.containing_any(focal.strings.iter().map(String::as_str));
    let universe = VerseSet::from_positions(tgt.len(), pairing.second.iter().copied());
    let base = VerseSet::from_positions(
        tgt.len(),
        pairing
            .first
            .iter()
            .zip(&pairing.second)
            .filter(|(s, _)| with_focal.contains(**s))
            .map(|(_, &t)| t),
    );

    let report = iterate(tgt, &base, &universe, &params.target, params, |_, _| {})?;
    let verses = if report.strings.is_empty() {
        BTreeSet::new()
    } else {
        let hits = tgt.containing_any(report.strings.iter().map(String::as_str));
        tgt.verse_ids(&hits.intersection(&universe))
    };
    Ok(ForwardResult {
        strings: report.strings.clone(),
        verses,
        report,
    })
}

/// Searches source-language strings associated with the target nodes that
/// `focal` reached in `language`, giving each node at most one backward edge.
///
/// A discovered string that belongs to `focal` sends its edges back to the
/// focal concept; any other string becomes its own single-string node.
pub fn backward_pass(
    corpus: &IndexedCorpus,
    focal: &Concept,
    language: &LanguageId,
    params: &PassParams,
    graph: &BipartiteGraph,
) -> Result<BackwardResult> {
    params.validate()?;
    check_pair(corpus, focal, language)?;
    let src = corpus.source_index();
    let pairing = corpus.pairing(corpus.source(), language)?;
    let universe = VerseSet::from_positions(src.len(), pairing.first.iter().copied());

    // forward-edge target nodes, with their verse's source position
    let nodes: Vec<(TargetNode, u32)> = graph
        .alignments_of(&focal.name)
        .filter(|(k, _)| &k.language == language)
        .flat_map(|(k, a)| a.forward.iter().map(move |v| k.node(v)))
        .filter_map(|node| {
            let pos = src.position(&node.verse)?;
            universe.contains(pos).then_some((node, pos))
        })
        .collect();
    let base = VerseSet::from_positions(src.len(), nodes.iter().map(|(_, p)| *p));

    let mut edges = Vec::new();
    let report = iterate(src, &base, &universe, &params.source, params, |s, uncovered| {
        let endpoint = if focal.strings.contains(s) {
            focal.id()
        } else {
            SourceNodeId::Ngram(s.to_owned())
        };
        for (node, pos) in &nodes {
            if uncovered.contains(*pos) && src.verse_text(*pos).contains(s) {
                edges.push((node.clone(), endpoint.clone()));
            }
        }
    })?;
    Ok(BackwardResult {
        strings: report.strings.clone(),
        edges,
        report,
    })
}

/// Forward then backward pass for one (concept, language) pair, as a graph
/// fragment holding only that pair's nodes and edges.
pub fn run_pair(
    corpus: &IndexedCorpus,
    focal: &Concept,
    language: &LanguageId,
    params: &PassParams,
) -> Result<(BipartiteGraph, RunReport)> {
    let fwd = forward_pass(corpus, focal, language, params)?;
    let mut graph = BipartiteGraph::new();
    graph.add_source(focal.clone())?;
    graph.add_forward(&focal.name, language, &fwd.strings, fwd.verses.iter().cloned())?;
    let bwd = backward_pass(corpus, focal, language, params, &graph)?;
    for (node, endpoint) in &bwd.edges {
        if let SourceNodeId::Ngram(s) = endpoint {
            graph.add_source(Concept::ngram(s.clone()))?;
        }
        graph.add_backward(node, endpoint.clone())?;
    }
    let report = RunReport {
        concept: focal.name.clone(),
        language: language.clone(),
        parallel_verses: corpus.pairing(corpus.source(), language)?.first.len(),
        t_size: fwd.strings.len(),
        s_size: bwd.strings.len(),
        forward: fwd.report,
        backward: bwd.report,
        error: None,
    };
    Ok((graph, report))
}

/// Runs [`run_pair`] for every language (in parallel) and merges the
/// fragments. Failing languages are reported, not propagated.
pub fn run_concept(
    corpus: &IndexedCorpus,
    focal: &Concept,
    languages: &BTreeSet<LanguageId>,
    params: &PassParams,
) -> Result<(BipartiteGraph, Vec<RunReport>)> {
    params.validate()?;
    let results: Vec<_> = languages
        .par_iter()
        .map(|l| (l, run_pair(corpus, focal, l, params)))
        .collect();
    let mut graph = BipartiteGraph::new();
    let mut reports = Vec::new();
    for (language, result) in results {
        match result {
            Ok((fragment, report)) => {
                graph.merge(fragment)?;
                reports.push(report);
            }
            Err(e) => {
                log::warn!("{} / {language}: {e}", focal.name);
                reports.push(RunReport::failed(&focal.name, language, e));
            }
        }
    }
    Ok((graph, reports))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use proptest::prelude::*;

    use super::*;
    use crate::assoc::{association, ContingencyTable};
    use crate::corpus::{Normalizer, ParallelCorpus};

    fn lang(s: &str) -> LanguageId {
        LanguageId::new(s).unwrap()
    }

    fn pairs<'a>(ids: &'a [String], texts: &'a [String]) -> Vec<(&'a str, &'a str)> {
        ids.iter().map(String::as_str).zip(texts.iter().map(String::as_str)).collect()
    }

    fn corpus(eng: &[String], fra: &[String]) -> IndexedCorpus {
        let ids: Vec<String> = (1..=eng.len()).map(|i| format!("{i:02}")).collect();
        let pc = ParallelCorpus::from_raw("eng", [("eng", pairs(&ids, eng)), ("fra", pairs(&ids, fra))], &Normalizer::default())
            .unwrap();
        IndexedCorpus::build(pc, 8)
    }

    /// Brute-force best string: every substring of every verse in `v`, scored
    /// by an explicit 2×2 table over `texts`.
    fn oracle_best(texts: &[String], v: &[usize], side: &SideParams, base: usize) -> (String, f64) {
        let min_count = side.threshold.min_count(base);
        let mut cands = BTreeSet::new();
        for &i in v {
            let chars: Vec<char> = texts[i].chars().collect();
            for a in 0..chars.len() {
                for b in a + side.min_len..=chars.len().min(a + side.max_len) {
                    let s: String = chars[a..b].iter().collect();
                    if side.respect_word_boundary && s.len() > 2 && s[1..s.len() - 1].contains('$') {
                        continue;
                    }
                    cands.insert(s);
                }
            }
        }
        let mut best: Option<(f64, usize, String)> = None;
        for s in cands {
            let inside = v.iter().filter(|&&i| texts[i].contains(&s)).count();
            if inside <= min_count {
                continue;
            }
            let all = texts.iter().filter(|t| t.contains(&s)).count();
            let score = association(&ContingencyTable::from_counts(
                inside as u64,
                all as u64,
                v.len() as u64,
                texts.len() as u64,
            ));
            let better = match &best {
                None => true,
                Some((bs, bc, bt)) => score > *bs || (score == *bs && (inside > *bc || (inside == *bc && s < *bt))),
            };
            if better {
                best = Some((score, inside, s));
            }
        }
        let (score, _, s) = best.unwrap();
        (s, score)
    }

    fn marked(texts: &[String]) -> Vec<String> {
        let n = Normalizer::default();
        texts.iter().map(|t| n.normalize(t).as_str().to_owned()).collect()
    }

    fn planted() -> (Vec<String>, Vec<String>) {
        let eng = (1..=20).map(|i| if i <= 5 { "x".into() } else { "b c".into() }).collect();
        let fra = (1..=20).map(|i| if i <= 5 { "qq zz".into() } else { "zz ww".into() }).collect();
        (eng, fra)
    }

    #[test]
    fn planted_word_is_found_in_one_round() {
        let (eng, fra) = planted();
        let c = corpus(&eng, &fra);
        let x = Concept::focal("x", ["$x$"]).unwrap();
        let p = PassParams::default();
        let fwd = forward_pass(&c, &x, &lang("fra"), &p).unwrap();
        assert_eq!(fwd.strings.len(), 1);
        assert!("$qq$".contains(&fwd.strings[0]));
        let (best, _) = oracle_best(&marked(&fra), &[0, 1, 2, 3, 4], &p.target, 5);
        assert_eq!(fwd.strings[0], best);
        assert_eq!(fwd.verses.len(), 5);
        assert_eq!(fwd.report.cause, Termination::CoverageReached);
        assert_eq!(fwd.report.coverage, 1.0);
        assert_eq!(fwd.report.base_verses, 5);
    }

    #[test]
    fn edges_redirect_to_focal() {
        let (eng, fra) = planted();
        let c = corpus(&eng, &fra);
        let x = Concept::focal("x", ["$x$"]).unwrap();
        let (g, report) = run_pair(&c, &x, &lang("fra"), &PassParams::default()).unwrap();
        assert_eq!(report.backward.strings, vec!["$x$".to_owned()]);
        let edges: Vec<_> = g.backward_edges().collect();
        assert_eq!(edges.len(), 5);
        assert!(edges.iter().all(|(_, e)| *e == x.id()));
        assert_eq!(g.sources().count(), 1);
    }

    #[test]
    fn budget_exhausts_below_alpha() {
        let eng: Vec<String> = (1..=20).map(|i| if i <= 10 { "x".into() } else { "b".into() }).collect();
        let fra: Vec<String> = (1..=20)
            .map(|i| match i {
                1..=5 => "aa".into(),
                6..=10 => "bb".into(),
                _ => "cc".into(),
            })
            .collect();
        let c = corpus(&eng, &fra);
        let p = PassParams { max_iterations: 1, alpha: 1.0, ..PassParams::default() };
        let fwd = forward_pass(&c, &Concept::focal("x", ["$x$"]).unwrap(), &lang("fra"), &p).unwrap();
        assert_eq!(fwd.strings.len(), 1);
        assert_eq!(fwd.report.coverage, 0.5);
        assert_eq!(fwd.report.cause, Termination::IterationsExhausted);
    }

    #[test]
    fn absent_focal_gives_empty_result() {
        let (eng, fra) = planted();
        let c = corpus(&eng, &fra);
        let f = Concept::focal("z", ["$zzz"]).unwrap();
        let (g, report) = run_pair(&c, &f, &lang("fra"), &PassParams::default()).unwrap();
        assert!(report.forward.strings.is_empty());
        assert_eq!(report.forward.cause, Termination::NoQueryVerses);
        assert_eq!(report.backward.cause, Termination::NoQueryVerses);
        assert_eq!(g.forward_edges().count(), 0);
        assert_eq!(g.backward_edges().count(), 0);
    }

    #[test]
    fn invalid_inputs() {
        let (eng, fra) = planted();
        let c = corpus(&eng, &fra);
        let x = Concept::focal("x", ["$x$"]).unwrap();
        assert!(forward_pass(&c, &x, &lang("eng"), &PassParams::default()).is_err());
        assert!(forward_pass(&c, &x, &lang("deu"), &PassParams::default()).is_err());
        let bad = PassParams { alpha: 0.0, ..PassParams::default() };
        assert!(forward_pass(&c, &x, &lang("fra"), &bad).is_err());
        let bad = PassParams { max_iterations: 0, ..PassParams::default() };
        assert!(bad.validate().is_err());
    }

    /// French "or" is both "gold" and a conjunction; the conjunction's verses
    /// share "$hit" on the source side.
    #[test]
    fn homonym_splits_endpoints() {
        let eng: Vec<String> = (1..=30)
            .map(|i| match i {
                1..=10 => "gold".into(),
                11..=20 => "hit".into(),
                _ => "golf bold agold hint whit".into(),
            })
            .collect();
        let fra: Vec<String> = (1..=30).map(|i| if i <= 20 { "or zz".into() } else { "zz".into() }).collect();
        let c = corpus(&eng, &fra);
        let gold = Concept::focal("gold", ["$gold"]).unwrap();
        let p = PassParams::default();
        let (g, report) = run_pair(&c, &gold, &lang("fra"), &p).unwrap();
        assert_eq!(g.forward_edges().count(), 20);

        let src = marked(&eng);
        let first_round: Vec<usize> = (0..20).collect();
        let (best, _) = oracle_best(&src, &first_round, &p.source, 20);
        assert_eq!(report.backward.strings, vec![best, "$hit".to_owned()]);

        let mut ends: BTreeMap<SourceNodeId, usize> = BTreeMap::new();
        for (_, e) in g.backward_edges() {
            *ends.entry(e).or_default() += 1;
        }
        assert_eq!(
            ends,
            BTreeMap::from([(gold.id(), 10), (SourceNodeId::Ngram("$hit".into()), 10)])
        );
    }

    fn three_languages() -> IndexedCorpus {
        let words = [("bird", "oiseau", "vogel", "ptak"), ("fish", "poisson", "fisch", "ryba"), ("tree", "arbre", "baum", "drzewo")];
        let mut rows: Vec<[String; 4]> = Vec::new();
        for i in 0..60usize {
            let (a, b) = (&words[i % 3], &words[(i / 3) % 3]);
            rows.push([
                format!("{} {} the", a.0, b.0),
                format!("le {} {}", a.1, b.1),
                format!("{} der {}", a.2, b.2),
                format!("{} {}", a.3, b.3),
            ]);
        }
        let ids: Vec<String> = (0..rows.len()).map(|i| i.to_string()).collect();
        let col = |k: usize| -> Vec<(&str, &str)> {
            ids.iter().map(String::as_str).zip(rows.iter().map(|r| r[k].as_str())).collect()
        };
        let pc = ParallelCorpus::from_raw(
            "eng",
            [("eng", col(0)), ("fra", col(1)), ("deu", col(2)), ("pol", col(3))],
            &Normalizer::default(),
        )
        .unwrap();
        IndexedCorpus::build(pc, 8)
    }

    #[test]
    fn every_language_contributes() {
        let c = three_languages();
        let langs: BTreeSet<_> = c.target_languages().cloned().collect();
        let bird = Concept::focal("bird", ["$bird$"]).unwrap();
        let (g, reports) = run_concept(&c, &bird, &langs, &PassParams::default()).unwrap();
        assert_eq!(reports.len(), 3);
        for l in &langs {
            assert!(g.forward_edges().any(|(_, n)| &n.language == l), "{l}");
        }
        let (empty, reports) = run_concept(&c, &bird, &BTreeSet::new(), &PassParams::default()).unwrap();
        assert!(empty.is_empty() && reports.is_empty());
    }

    #[test]
    fn failures_are_reported_per_language() {
        let c = three_languages();
        let bird = Concept::focal("bird", ["$bird$"]).unwrap();
        let langs = BTreeSet::from([lang("fra"), lang("xyz")]);
        let (g, reports) = run_concept(&c, &bird, &langs, &PassParams::default()).unwrap();
        assert!(reports.iter().find(|r| r.language == lang("xyz")).unwrap().error.is_some());
        assert!(g.forward_edges().count() > 0);
    }

    #[test]
    fn language_merge_order_is_irrelevant() {
        let c = three_languages();
        let bird = Concept::focal("bird", ["$bird$"]).unwrap();
        let p = PassParams::default();
        let (a, _) = run_pair(&c, &bird, &lang("fra"), &p).unwrap();
        let (b, _) = run_pair(&c, &bird, &lang("deu"), &p).unwrap();
        let mut ab = a.clone();
        ab.merge(b.clone()).unwrap();
        let mut ba = b;
        ba.merge(a).unwrap();
        assert_eq!(ab.to_jsonl(), ba.to_jsonl());
        let (all, _) = run_concept(&c, &bird, &BTreeSet::from([lang("fra"), lang("deu")]), &p).unwrap();
        assert_eq!(all.to_jsonl(), ab.to_jsonl());
    }

    fn verse() -> impl Strategy<Value = String> {
        prop::collection::vec("[abc]{1,3}", 1..4).prop_map(|w| w.join(" "))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn pass_invariants(
            rows in prop::collection::vec((verse(), verse()), 6..20),
            m in 1usize..4,
            alpha in 0.3f64..=1.0,
        ) {
            let (eng, fra): (Vec<String>, Vec<String>) = rows.into_iter().unzip();
            let c = corpus(&eng, &fra);
            let f = Concept::focal("a", ["$a"]).unwrap();
            let mut p = PassParams { max_iterations: m, alpha, ..PassParams::default() };
            p.source.min_len = 2;
            p.source.threshold = CountThreshold::Absolute(0);
            let (g, report) = run_pair(&c, &f, &lang("fra"), &p).unwrap();
            prop_assert!(report.t_size <= m && report.s_size <= m);
            for pass in [&report.forward, &report.backward] {
                let ok = match pass.cause {
                    Termination::CoverageReached => pass.coverage >= alpha,
                    Termination::IterationsExhausted => pass.strings.len() == m && pass.coverage < alpha,
                    Termination::CandidatesExhausted => pass.coverage < alpha,
                    Termination::NoQueryVerses => pass.strings.is_empty(),
                };
                prop_assert!(ok, "{:?}", pass);
            }

            let eng_m = marked(&eng);
            let fra_m = marked(&fra);
            let at = |id: &VerseId| id.as_str().parse::<usize>().unwrap() - 1;
            for (_, node) in g.forward_edges() {
                prop_assert!(node.strings.iter().any(|t| fra_m[at(&node.verse)].contains(t.as_str())));
            }
            let mut seen = BTreeSet::new();
            for (node, end) in g.backward_edges() {
                prop_assert!(seen.insert(node.verse.clone()));
                let text = &eng_m[at(&node.verse)];
                match &end {
                    SourceNodeId::Ngram(s) => prop_assert!(text.contains(s.as_str())),
                    SourceNodeId::Focal(_) => prop_assert!(f.strings.iter().any(|s| text.contains(s.as_str()))),
                }
            }

            let (again, _) = run_pair(&c, &f, &lang("fra"), &p).unwrap();
            prop_assert_eq!(g.to_jsonl(), again.to_jsonl());
        }
    }
}
