//! Evaluation harnesses: recall against gold lexicons, lexicon categories,
//! coverage of external aligner proposals, annotation reports and concept
//! discovery.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::hash::{Hash, Hasher};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{IndexedCorpus, LanguageId, Normalizer, VerseId, VerseSet, BOUNDARY};
use crate::error::{Error, Result};
use crate::graph::{forward_pass, BipartiteGraph, Concept, CountThreshold, PassParams, RunReport, SourceNodeId};

/// True iff either string contains the other. Empty strings never match.
pub fn lenient_match(a: &str, b: &str) -> bool {
    !a.is_empty() && !b.is_empty() && (a.contains(b) || b.contains(a))
}

fn strip_marks(s: &str) -> String {
    s.trim_matches(BOUNDARY).to_owned()
}

/// Translations per (concept, language).
pub type Lexicon = BTreeMap<(String, LanguageId), BTreeSet<String>>;

fn skip_line(i: usize, line: &str, header: &str) -> bool {
    line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with(header))
}

/// Reads a `concept<TAB>language<TAB>translation` file, normalizing each
/// translation (without boundary marks).
pub fn parse_gold(text: &str, path: &Path, normalizer: &Normalizer) -> Result<Lexicon> {
    let mut gold = Lexicon::new();
    for (i, line) in text.lines().enumerate() {
        if skip_line(i, line, "concept\t") {
            continue;
        }
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [concept, language, translation] = f[..] else {
            return Err(Error::parse(path, i + 1, "expected `concept<TAB>language<TAB>translation`"));
        };
        let language = LanguageId::new(language).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        let form = normalizer.normalize_form(translation);
        if form.is_empty() {
            log::warn!("{}:{}: translation `{translation}` is empty after normalization", path.display(), i + 1);
            continue;
        }
        gold.entry((concept.to_owned(), language)).or_default().insert(form);
    }
    Ok(gold)
}

pub fn load_gold(path: &Path, normalizer: &Normalizer) -> Result<Lexicon> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_gold(&text, path, normalizer)
}

/// Forward-pass strings per attempted (concept, language) pair, including
/// pairs whose search found nothing.
pub fn proposals_from_reports(reports: &[RunReport]) -> Lexicon {
    let mut out = Lexicon::new();
    for r in reports.iter().filter(|r| r.error.is_none()) {
        out.entry((r.concept.clone(), r.language.clone()))
            .or_default()
            .extend(r.forward.strings.iter().cloned());
    }
    out
}

/// Forward-pass strings per (focal concept, language) found in a graph.
pub fn proposals_from_graph(g: &BipartiteGraph) -> Lexicon {
    let mut out = Lexicon::new();
    for (key, _) in g.alignments() {
        out.entry((key.concept.clone(), key.language.clone()))
            .or_default()
            .extend(key.strings.iter().cloned());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecallScore {
    pub partial: f64,
    pub strict: f64,
    pub relaxed: f64,
    /// Distinct proposals matching no gold translation.
    pub false_positives: f64,
}

/// Scores one pair. Proposals lose their boundary marks before matching.
/// `None` if `gold` is empty.
pub fn recall_scores(proposed: &BTreeSet<String>, gold: &BTreeSet<String>) -> Option<RecallScore> {
    if gold.is_empty() {
        return None;
    }
    let proposed: BTreeSet<String> = proposed.iter().map(|s| strip_marks(s)).collect();
    let matched = gold
        .iter()
        .filter(|g| proposed.iter().any(|t| lenient_match(t, g)))
        .count();
    let unmatched = proposed
        .iter()
        .filter(|t| !gold.iter().any(|g| lenient_match(t, g)))
        .count();
    Some(RecallScore {
        partial: matched as f64 / gold.len() as f64,
        strict: (matched == gold.len()) as u8 as f64,
        relaxed: (matched > 0) as u8 as f64,
        false_positives: unmatched as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecall {
    pub concept: String,
    pub language: LanguageId,
    #[serde(flatten)]
    pub score: RecallScore,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecallSummary {
    /// Means over evaluated pairs.
    pub mean: RecallScore,
    pub evaluated: usize,
    pub pairs: Vec<PairRecall>,
}

/// Scores every pair present in both lexicons. Gold pairs without an
/// attempted alignment are ignored; attempted pairs with no gold entry are
/// skipped with a warning.
pub fn evaluate_recall(proposed: &Lexicon, gold: &Lexicon) -> Result<RecallSummary> {
    let mut pairs = Vec::new();
    for ((concept, language), t) in proposed {
        let Some(score) = gold
            .get(&(concept.clone(), language.clone()))
            .and_then(|n| recall_scores(t, n))
        else {
            log::warn!("{concept} / {language}: no gold translations; skipped");
            continue;
        };
        pairs.push(PairRecall {
            concept: concept.clone(),
            language: language.clone(),
            score,
        });
    }
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no pair has both proposals and gold translations".into()));
    }
    let n = pairs.len() as f64;
    let mean = |f: fn(&RecallScore) -> f64| pairs.iter().map(|p| f(&p.score)).sum::<f64>() / n;
    Ok(RecallSummary {
        mean: RecallScore {
            partial: mean(|s| s.partial),
            strict: mean(|s| s.strict),
            relaxed: mean(|s| s.relaxed),
            false_positives: mean(|s| s.false_positives),
        },
        evaluated: pairs.len(),
        pairs,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexiconCategory {
    /// The reference lexicon has no translation.
    NoTranslation,
    /// No proposal matches a reference translation.
    NoOverlap,
    /// Some but not all proposals match.
    Overlap,
    /// Every proposal matches.
    Match,
    /// The forward pass proposed nothing.
    NoProposal,
}

/// Compares reference translations `reference` with proposals `proposed`
/// (boundary marks are ignored).
pub fn lexicon_category(reference: &BTreeSet<String>, proposed: &BTreeSet<String>) -> LexiconCategory {
    if reference.is_empty() {
        return LexiconCategory::NoTranslation;
    }
    if proposed.is_empty() {
        return LexiconCategory::NoProposal;
    }
    let matched = proposed
        .iter()
        .filter(|t| {
            let t = strip_marks(t);
            reference.iter().any(|p| lenient_match(&t, p))
        })
        .count();
    match matched {
        0 => LexiconCategory::NoOverlap,
        m if m == proposed.len() => LexiconCategory::Match,
        _ => LexiconCategory::Overlap,
    }
}

/// Category counts over all attempted pairs; pairs absent from `reference`
/// count as having no translation.
pub fn category_counts(proposed: &Lexicon, reference: &Lexicon) -> BTreeMap<LexiconCategory, usize> {
    let empty = BTreeSet::new();
    let mut counts = BTreeMap::new();
    for (key, t) in proposed {
        let c = lexicon_category(reference.get(key).unwrap_or(&empty), t);
        *counts.entry(c).or_default() += 1;
    }
    counts
}

/// Aligner proposals: `language<TAB>word<TAB>frequency` lines.
pub fn parse_proposals(text: &str, path: &Path) -> Result<BTreeMap<LanguageId, Vec<(String, u64)>>> {
    let mut out: BTreeMap<LanguageId, Vec<(String, u64)>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if skip_line(i, line, "language\t") {
            continue;
        }
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [language, word, freq] = f[..] else {
            return Err(Error::parse(path, i + 1, "expected `language<TAB>word<TAB>frequency`"));
        };
        let language = LanguageId::new(language).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        let freq = freq
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("bad frequency `{freq}`")))?;
        out.entry(language).or_default().push((word.to_owned(), freq));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanguageCoverage {
    /// Parallel verses whose source side contains the concept.
    pub verses: usize,
    pub covered: usize,
    pub coverage: f64,
    pub translations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageComparison {
    /// Covered verses over all languages' concept verses, pooled.
    pub global: f64,
    /// Mean of per-language coverage.
    pub average: f64,
    /// Mean number of kept proposals per language.
    pub avg_translations: f64,
    pub per_language: BTreeMap<LanguageId, LanguageCoverage>,
    pub skipped: Vec<LanguageId>,
}

/// How much of the concept's verses each language's proposals cover.
/// Proposals are matched as given, so aligner words can be supplied either
/// bare or with boundary marks. Proposals at or below `min_freq` are dropped;
/// a fractional filter is relative to the language's concept verses.
pub fn aligner_coverage_compare(
    corpus: &IndexedCorpus,
    focal: &Concept,
    proposals: &BTreeMap<LanguageId, Vec<(String, u64)>>,
    min_freq: CountThreshold,
    languages: &BTreeSet<LanguageId>,
) -> Result<CoverageComparison> {
    let src = corpus.source_index();
    let with_focal = src.containing_any(focal.strings.iter().map(String::as_str));
    let mut per_language = BTreeMap::new();
    let mut skipped = Vec::new();
    for l in languages {
        let Some(words) = proposals.get(l) else {
            log::warn!("no proposals for `{l}`; skipped");
            skipped.push(l.clone());
            continue;
        };
        let tgt = corpus.index(l)?;
        let pairing = corpus.pairing(corpus.source(), l)?;
        let base = VerseSet::from_positions(
            tgt.len(),
            pairing
                .first
                .iter()
                .zip(&pairing.second)
                .filter(|(s, _)| with_focal.contains(**s))
                .map(|(_, &t)| t),
        );
        if base.is_empty() {
            log::warn!("`{}` occurs in no verse parallel to `{l}`; skipped", focal.name);
            skipped.push(l.clone());
            continue;
        }
        let threshold = min_freq.min_count(base.len()) as u64;
        let kept: BTreeSet<&str> = words
            .iter()
            .filter(|(w, f)| *f > threshold && !w.is_empty())
            .map(|(w, _)| w.as_str())
            .collect();
        let covered = tgt.containing_any(kept.iter().copied()).intersection(&base).len();
        per_language.insert(
            l.clone(),
            LanguageCoverage {
                verses: base.len(),
                covered,
                coverage: covered as f64 / base.len() as f64,
                translations: kept.len(),
            },
        );
    }
    let n = per_language.len();
    let (covered, total) = per_language
        .values()
        .fold((0, 0), |(c, t), l| (c + l.covered, t + l.verses));
    let mean = |f: fn(&LanguageCoverage) -> f64| {
        if n == 0 {
            0.0
        } else {
            per_language.values().map(f).sum::<f64>() / n as f64
        }
    };
    Ok(CoverageComparison {
        global: if total == 0 { 0.0 } else { covered as f64 / total as f64 },
        average: mean(|l| l.coverage),
        avg_translations: mean(|l| l.translations as f64),
        per_language,
        skipped,
    })
}

/// Sampled verses per bucket in an annotation report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSizes {
    pub true_positive: usize,
    pub false_positive: usize,
    pub false_negative: usize,
}

impl Default for SampleSizes {
    fn default() -> Self {
        SampleSizes {
            true_positive: 2,
            false_positive: 2,
            false_negative: 3,
        }
    }
}

fn sub_seed(seed: u64, parts: &[&str]) -> u64 {
    let mut h = rustc_hash::FxHasher::default();
    seed.hash(&mut h);
    parts.hash(&mut h);
    h.finish()
}

fn readable(text: &str) -> String {
    text.trim_matches(BOUNDARY).replace(BOUNDARY, " ")
}

/// A Markdown document for manual inspection of one (concept, language)
/// alignment: for each forward-pass string, sampled true and false positive
/// verses; then sampled false negatives and the backward-pass endpoints.
pub fn annotation_report(
    corpus: &IndexedCorpus,
    g: &BipartiteGraph,
    concept: &str,
    language: &LanguageId,
    sizes: SampleSizes,
    seed: u64,
) -> Result<String> {
    let focal = g
        .focal(concept)
        .ok_or_else(|| Error::UnknownConcept(concept.to_owned()))?;
    let src = corpus.source_index();
    let tgt = corpus.index(language)?;
    let pairing = corpus.pairing(corpus.source(), language)?;
    let with_focal = src.containing_any(focal.strings.iter().map(String::as_str));
    // (target position, source position, source has concept)
    let parallel: Vec<(u32, u32, bool)> = pairing
        .second
        .iter()
        .zip(&pairing.first)
        .map(|(&t, &s)| (t, s, with_focal.contains(s)))
        .collect();
    let strings: BTreeSet<String> = g
        .alignments_of(concept)
        .filter(|(k, _)| &k.language == language)
        .flat_map(|(k, _)| k.strings.iter().cloned())
        .collect();
    let strings: Vec<String> = strings.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, &[concept, language.as_str()]));

    let mut out = String::new();
    let focal_verses = parallel.iter().filter(|p| p.2).count();
    writeln!(out, "# {concept} — {language}\n").unwrap();
    let shown: Vec<String> = focal.strings.iter().map(|s| format!("`{s}`")).collect();
    writeln!(out, "Concept strings: {}", shown.join(", ")).unwrap();
    writeln!(out, "Parallel verses: {}; with the concept: {focal_verses}\n", parallel.len()).unwrap();

    let verse_line = |out: &mut String, (t, s, _): (u32, u32, bool)| {
        writeln!(
            out,
            "- **{}**\n  - {}: {}\n  - {language}: {}",
            tgt.verse_id(t),
            corpus.source(),
            readable(src.verse_text(s).as_str()),
            readable(tgt.verse_text(t).as_str())
        )
        .unwrap();
    };
    let mut sample = |out: &mut String, title: &str, pool: Vec<(u32, u32, bool)>, n: usize| {
        writeln!(out, "### {title} ({} of {})\n", n.min(pool.len()), pool.len()).unwrap();
        let mut picked: Vec<_> = pool.choose_multiple(&mut rng, n).copied().collect();
        picked.sort_unstable();
        for p in picked {
            verse_line(out, p);
        }
        out.push('\n');
    };

    writeln!(out, "## Forward pass\n").unwrap();
    if strings.is_empty() {
        writeln!(out, "No target strings were found.\n").unwrap();
    }
    for t in &strings {
        let hits: Vec<_> = parallel
            .iter()
            .copied()
            .filter(|&(tp, _, _)| tgt.verse_text(tp).contains(t))
            .collect();
        let (tp, fp): (Vec<_>, Vec<_>) = hits.into_iter().partition(|p| p.2);
        writeln!(out, "### `{t}`\n").unwrap();
        writeln!(
            out,
            "Verses: {} (true positive {}, false positive {}); precision {:.3}; recall {:.3}\n",
            tp.len() + fp.len(),
            tp.len(),
            fp.len(),
            tp.len() as f64 / (tp.len() + fp.len()).max(1) as f64,
            tp.len() as f64 / focal_verses.max(1) as f64,
        )
        .unwrap();
        sample(&mut out, "True positives", tp, sizes.true_positive);
        sample(&mut out, "False positives", fp, sizes.false_positive);
    }
    let missed: Vec<_> = parallel
        .iter()
        .copied()
        .filter(|&(tp, _, has)| has && !tgt.verse_contains_any(tp, &strings))
        .collect();
    writeln!(out, "## Missed verses\n").unwrap();
    sample(&mut out, "False negatives", missed, sizes.false_negative);

    writeln!(out, "## Backward pass\n").unwrap();
    let mut ends: BTreeMap<&SourceNodeId, usize> = BTreeMap::new();
    for step in g.paths_from(concept).filter(|s| s.language == language) {
        if let Some(e) = step.endpoint {
            *ends.entry(e).or_default() += 1;
        }
    }
    if ends.is_empty() {
        writeln!(out, "No backward edges.").unwrap();
    }
    let mut ends: Vec<_> = ends.into_iter().collect();
    ends.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    for (e, n) in ends {
        writeln!(out, "- `{e}`: {n} target nodes").unwrap();
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwadeshParams {
    /// Minimum frequency in the later books (inclusive).
    pub min_late: usize,
    /// Maximum frequency overall (inclusive).
    pub max_total: usize,
    /// Book numbers, read from the first two digits of a verse id, that
    /// count as the later part.
    pub late_books: (u32, u32),
}

impl Default for SwadeshParams {
    fn default() -> Self {
        SwadeshParams {
            min_late: 5,
            max_total: 500,
            late_books: (40, 66),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordFrequency {
    pub word: String,
    pub late_frequency: usize,
    pub total_frequency: usize,
    pub accepted: bool,
}

fn book(id: &VerseId) -> Option<u32> {
    id.as_str().get(..2)?.parse().ok()
}

fn count_tokens(text: &str, pattern: &str) -> usize {
    let mut n = 0;
    let mut from = 0;
    while let Some(i) = text[from..].find(pattern) {
        n += 1;
        // neighbouring words share a boundary mark
        from += i + 1;
    }
    n
}

/// Filters a word list by source-text frequency: a word is kept if it occurs
/// at least `min_late` times in the later books and at most `max_total`
/// times overall.
pub fn swadesh_candidates(
    corpus: &IndexedCorpus,
    words: &[String],
    normalizer: &Normalizer,
    params: &SwadeshParams,
) -> Vec<WordFrequency> {
    let src = corpus.source_index();
    let (lo, hi) = params.late_books;
    words
        .par_iter()
        .map(|w| {
            let form = normalizer.normalize_form(w);
            let pattern = format!("{BOUNDARY}{form}{BOUNDARY}");
            let (mut late, mut total) = (0, 0);
            if !form.is_empty() {
                for &p in src.postings(&pattern).iter() {
                    let n = count_tokens(src.verse_text(p).as_str(), &pattern);
                    total += n;
                    if book(src.verse_id(p)).is_some_and(|b| (lo..=hi).contains(&b)) {
                        late += n;
                    }
                }
            }
            WordFrequency {
                word: w.clone(),
                late_frequency: late,
                total_frequency: total,
                accepted: late >= params.min_late && total <= params.max_total,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscoveryParams {
    pub min_len: usize,
    pub max_len: usize,
    /// Number of target languages to test each string in.
    pub sample_size: usize,
    /// Languages always in the sample; the rest is drawn at random.
    pub include: Vec<LanguageId>,
    /// Coverage a one-round forward pass must exceed in a language.
    pub min_coverage: f64,
    /// Number of languages that must exceed `min_coverage` (strictly more).
    pub min_languages: usize,
    /// Only strings in more than this many source verses are tested.
    pub min_verses: usize,
}

impl Default for DiscoveryParams {
    fn default() -> Self {
        DiscoveryParams {
            min_len: 4,
            max_len: 15,
            sample_size: 12,
            include: Vec::new(),
            min_coverage: 0.5,
            min_languages: 5,
            min_verses: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscoveredString {
    pub string: String,
    /// Languages where a one-round forward pass exceeded the coverage bar.
    pub languages: usize,
}

/// Draws the language sample for [`discover_strings`].
pub fn sample_languages(corpus: &IndexedCorpus, params: &DiscoveryParams, seed: u64) -> Result<Vec<LanguageId>> {
    let all: Vec<LanguageId> = corpus.target_languages().cloned().collect();
    if params.sample_size > all.len() {
        return Err(Error::InvalidParameter(format!(
            "language sample of {} exceeds the {} target languages",
            params.sample_size,
            all.len()
        )));
    }
    let mut sample: Vec<LanguageId> = Vec::new();
    for l in &params.include {
        corpus.index(l)?;
        if l == corpus.source() {
            return Err(Error::InvalidParameter(format!("`{l}` is the source language")));
        }
        if !sample.contains(l) {
            sample.push(l.clone());
        }
    }
    if sample.len() > params.sample_size {
        return Err(Error::InvalidParameter("more included languages than the sample size".into()));
    }
    let mut rest: Vec<LanguageId> = all.into_iter().filter(|l| !sample.contains(l)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rest.shuffle(&mut rng);
    sample.extend(rest.into_iter().take(params.sample_size - sample.len()));
    sample.sort();
    Ok(sample)
}

/// Tests every word-bounded source string in the length range as a concept:
/// it is kept if a one-round forward pass covers more than `min_coverage` of
/// its verses in more than `min_languages` sampled languages.
pub fn discover_strings(
    corpus: &IndexedCorpus,
    params: &DiscoveryParams,
    pass: &PassParams,
    seed: u64,
) -> Result<Vec<DiscoveredString>> {
    let languages = sample_languages(corpus, params, seed)?;
    let src = corpus.source_index();
    let all = VerseSet::from_positions(src.len(), 0..src.len() as u32);
    let cons = crate::assoc::CandidateConstraints::new(params.min_len, params.max_len, true, params.min_verses)?;
    let candidates = crate::assoc::enumerate_candidates(src, &all, &cons);
    let one_round = PassParams {
        max_iterations: 1,
        ..pass.clone()
    };
    let found = candidates
        .into_par_iter()
        .map(|(s, _)| -> Result<Option<DiscoveredString>> {
            let focal = Concept::focal(s.clone(), [s.clone()])?;
            let mut n = 0;
            for l in &languages {
                let fwd = forward_pass(corpus, &focal, l, &one_round)?;
                if fwd.report.coverage > params.min_coverage {
                    n += 1;
                }
            }
            Ok((n > params.min_languages).then_some(DiscoveredString {
                string: s,
                languages: n,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(found.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ParallelCorpus;
    use proptest::prelude::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn lang(s: &str) -> LanguageId {
        LanguageId::new(s).unwrap()
    }

    #[test]
    fn lenient_examples() {
        assert!(lenient_match("oiseau", "oiseaux"));
        assert!(lenient_match("abc", "abc"));
        assert!(!lenient_match("dog", "cat"));
        assert!(!lenient_match("", "cat"));
    }

    #[test]
    fn recall_examples() {
        let s = recall_scores(&set(&["$x$", "$y"]), &set(&["x", "y"])).unwrap();
        assert_eq!((s.partial, s.strict, s.relaxed, s.false_positives), (1.0, 1.0, 1.0, 0.0));
        let s = recall_scores(&set(&["$x", "zzz"]), &set(&["x", "y"])).unwrap();
        assert_eq!((s.partial, s.strict, s.relaxed, s.false_positives), (0.5, 0.0, 1.0, 1.0));
        assert!(recall_scores(&set(&["x"]), &set(&[])).is_none());
        let s = recall_scores(&set(&["$oiseau"]), &set(&["oiseaux"])).unwrap();
        assert_eq!(s.partial, 1.0);
    }

    #[test]
    fn categories() {
        use LexiconCategory::*;
        assert_eq!(lexicon_category(&set(&["voël", "vliegtuig"]), &set(&["voël"])), Match);
        assert_eq!(lexicon_category(&set(&["cewek", "burung"]), &set(&["$burung", "terbang$"])), Overlap);
        assert_eq!(lexicon_category(&set(&[]), &set(&["x"])), NoTranslation);
        assert_eq!(lexicon_category(&set(&["a"]), &set(&["$zzz"])), NoOverlap);
        assert_eq!(lexicon_category(&set(&["a"]), &set(&[])), NoProposal);
    }

    #[test]
    fn gold_parsing_normalizes() {
        let n = Normalizer::default();
        let g = parse_gold("concept\tlanguage\ttranslation\nbird\tfra\tOiseau\nbird\tfra\tpetit oiseau\n", Path::new("g"), &n).unwrap();
        assert_eq!(g[&("bird".into(), lang("fra"))], set(&["oiseau", "petit$oiseau"]));
        assert!(parse_gold("bird\tfra\n", Path::new("g"), &n).is_err());
    }

    fn toy() -> IndexedCorpus {
        // concept verses 1-4 in fra, 1-5 in deu (5 is missing in fra)
        let eng = ["bird a", "bird b", "bird c", "bird d", "bird e", "x", "y"];
        let fra = ["oiseau", "oiseau", "oiseau", "piaf", "", "chat", "chien"];
        let deu = ["vogel", "vogel", "vogel", "vogel", "huhn", "katze", "hund"];
        let col = |texts: &[&'static str], skip: Option<usize>| -> Vec<(&'static str, &'static str)> {
            let ids = ["01", "02", "03", "04", "05", "06", "07"];
            ids.iter()
                .zip(texts)
                .enumerate()
                .filter(|(i, _)| Some(*i) != skip)
                .map(|(_, (a, b))| (*a, *b))
                .collect()
        };
        let pc = ParallelCorpus::from_raw(
            "eng",
            [("eng", col(&eng, None)), ("fra", col(&fra, Some(4))), ("deu", col(&deu, None))],
            &Normalizer::default(),
        )
        .unwrap();
        IndexedCorpus::build(pc, 8)
    }

    #[test]
    fn coverage_comparison_hand_count() {
        let c = toy();
        let bird = Concept::focal("bird", ["$bird$"]).unwrap();
        let langs = BTreeSet::from([lang("fra"), lang("deu")]);
        let proposals = BTreeMap::from([
            (lang("fra"), vec![("oiseau".to_owned(), 3), ("chat".to_owned(), 1)]),
            (lang("deu"), vec![("vogel".to_owned(), 4), ("huh".to_owned(), 1)]),
        ]);
        let r = aligner_coverage_compare(&c, &bird, &proposals, CountThreshold::Absolute(0), &langs).unwrap();
        assert_eq!(r.per_language[&lang("fra")].coverage, 0.75);
        assert_eq!(r.per_language[&lang("deu")].coverage, 1.0);
        assert_eq!(r.average, 0.875);
        assert_eq!(r.global, 8.0 / 9.0);
        assert_eq!(r.avg_translations, 2.0);

        let r = aligner_coverage_compare(&c, &bird, &proposals, CountThreshold::Absolute(1), &langs).unwrap();
        assert_eq!(r.per_language[&lang("deu")].coverage, 0.8);
        assert_eq!(r.avg_translations, 1.0);

        let empty = BTreeMap::from([(lang("fra"), vec![]), (lang("deu"), vec![])]);
        let r = aligner_coverage_compare(&c, &bird, &empty, CountThreshold::Absolute(0), &langs).unwrap();
        assert_eq!((r.global, r.average, r.avg_translations), (0.0, 0.0, 0.0));
        let r = aligner_coverage_compare(&c, &bird, &BTreeMap::new(), CountThreshold::Absolute(0), &langs).unwrap();
        assert_eq!(r.skipped.len(), 2);
    }

    #[test]
    fn identity_proposals_reproduce_pass_coverage() {
        let c = toy();
        let bird = Concept::focal("bird", ["$bird$"]).unwrap();
        let langs = BTreeSet::from([lang("fra"), lang("deu")]);
        let (_, reports) = crate::graph::run_concept(&c, &bird, &langs, &PassParams::default()).unwrap();
        let proposals: BTreeMap<_, _> = reports
            .iter()
            .map(|r| (r.language.clone(), r.forward.strings.iter().map(|s| (s.clone(), 1)).collect()))
            .collect();
        let cmp = aligner_coverage_compare(&c, &bird, &proposals, CountThreshold::Absolute(0), &langs).unwrap();
        let mean = reports.iter().map(|r| r.forward.coverage).sum::<f64>() / reports.len() as f64;
        assert!((cmp.average - mean).abs() < 1e-12);
    }

    #[test]
    fn annotation_is_seeded_and_bounded() {
        let c = toy();
        let bird = Concept::focal("bird", ["$bird$"]).unwrap();
        let (g, _) = crate::graph::run_pair(&c, &bird, &lang("deu"), &PassParams::default()).unwrap();
        let sizes = SampleSizes::default();
        let a = annotation_report(&c, &g, "bird", &lang("deu"), sizes, 7).unwrap();
        let b = annotation_report(&c, &g, "bird", &lang("deu"), sizes, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("### True positives (2 of"));
        assert!(a.contains("### False positives (0 of 0)"));
        let one = SampleSizes { true_positive: 1, false_positive: 1, false_negative: 1 };
        let r = annotation_report(&c, &g, "bird", &lang("deu"), one, 7).unwrap();
        assert!(r.matches("- **").count() <= 3);
        assert!(annotation_report(&c, &g, "fish", &lang("deu"), sizes, 7).is_err());
    }

    #[test]
    fn swadesh_thresholds() {
        let mut eng = Vec::new();
        // 4 late occurrences of "salt", 5 of "bread"; one early each
        for i in 0..5 {
            eng.push((format!("4000100{i}"), if i < 4 { "salt and bread" } else { "bread bread" }));
        }
        eng.push(("01001001".into(), "salt bread"));
        let rows: Vec<(&str, &str)> = eng.iter().map(|(a, b)| (a.as_str(), *b)).collect();
        let pc = ParallelCorpus::from_raw("eng", [("eng", rows.clone()), ("fra", rows)], &Normalizer::default()).unwrap();
        let c = IndexedCorpus::build(pc, 8);
        let words = vec!["salt".to_owned(), "Bread".to_owned(), "fish".to_owned()];
        let r = swadesh_candidates(&c, &words, &Normalizer::default(), &SwadeshParams::default());
        assert_eq!((r[0].late_frequency, r[0].accepted), (4, false));
        assert_eq!((r[1].late_frequency, r[1].total_frequency, r[1].accepted), (6, 7, true));
        assert_eq!(r[2].total_frequency, 0);
        let tight = SwadeshParams { max_total: 6, ..SwadeshParams::default() };
        assert!(!swadesh_candidates(&c, &words, &Normalizer::default(), &tight)[1].accepted);
    }

    #[test]
    fn language_sample() {
        let c = toy();
        let p = DiscoveryParams { sample_size: 2, ..DiscoveryParams::default() };
        assert_eq!(sample_languages(&c, &p, 1).unwrap().len(), 2);
        let p = DiscoveryParams { sample_size: 3, ..DiscoveryParams::default() };
        assert!(sample_languages(&c, &p, 1).is_err());
        let p = DiscoveryParams { sample_size: 1, include: vec![lang("fra")], ..DiscoveryParams::default() };
        assert_eq!(sample_languages(&c, &p, 9).unwrap(), vec![lang("fra")]);
    }

    proptest! {
        #[test]
        fn lenient_is_symmetric(a in "[ab]{0,4}", b in "[ab]{0,4}") {
            prop_assert_eq!(lenient_match(&a, &b), lenient_match(&b, &a));
            if !a.is_empty() {
                prop_assert!(lenient_match(&a, &a));
            }
        }

        #[test]
        fn recall_is_ordered(t in prop::collection::btree_set("[abc]{1,3}", 0..4), n in prop::collection::btree_set("[abc]{1,3}", 1..4)) {
            let s = recall_scores(&t, &n).unwrap();
            prop_assert!(s.strict <= s.relaxed);
            prop_assert!(s.strict == 0.0 || s.partial == 1.0);
            prop_assert!(s.partial == 0.0 || s.relaxed == 1.0);
        }
    }
}
