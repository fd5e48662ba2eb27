//! Candidate enumeration, χ² association scoring and coverage.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::corpus::{char_bounds, OccurrenceIndex, VerseId, VerseSet, BOUNDARY};
use crate::error::{Error, Result};

/// 2×2 counts for one candidate string against a verse set `V` inside a
/// universe of parallel verses.
///
/// |            | in `V` | outside `V` |
/// |------------|--------|-------------|
/// | has `t`    | `n00`  | `n01`       |
/// | lacks `t`  | `n10`  | `n11`       |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub n00: u64,
    pub n01: u64,
    pub n10: u64,
    pub n11: u64,
}

impl ContingencyTable {
    pub fn new(n00: u64, n01: u64, n10: u64, n11: u64) -> Self {
        ContingencyTable { n00, n01, n10, n11 }
    }

    /// Builds the table from occurrence counts; `v_size <= universe_size`
    /// and the candidate's counts must be consistent with them.
    pub fn from_counts(count_in_v: u64, count_in_universe: u64, v_size: u64, universe_size: u64) -> Self {
        debug_assert!(count_in_v <= count_in_universe && count_in_v <= v_size);
        let n01 = count_in_universe - count_in_v;
        ContingencyTable {
            n00: count_in_v,
            n01,
            n10: v_size - count_in_v,
            n11: universe_size - v_size - n01,
        }
    }

    pub fn total(&self) -> u64 {
        self.n00 + self.n01 + self.n10 + self.n11
    }
}

/// Pearson χ² without continuity correction. Tables with an empty row or
/// column score 0.
pub fn chi_square(t: &ContingencyTable) -> f64 {
    let row_has = t.n00 + t.n01;
    let row_lacks = t.n10 + t.n11;
    let col_in = t.n00 + t.n10;
    let col_out = t.n01 + t.n11;
    if row_has == 0 || row_lacks == 0 || col_in == 0 || col_out == 0 {
        return 0.0;
    }
    let det = t.n00 as i128 * t.n11 as i128 - t.n01 as i128 * t.n10 as i128;
    let det = det as f64;
    t.total() as f64 * det * det
        / (row_has as f64 * row_lacks as f64 * col_in as f64 * col_out as f64)
}

/// χ² for strings over-represented in V; under-represented strings are as
/// uninformative as independent ones and score 0.
pub fn association(t: &ContingencyTable) -> f64 {
    if (t.n00 as i128) * (t.n11 as i128) > (t.n01 as i128) * (t.n10 as i128) {
        chi_square(t)
    } else {
        0.0
    }
}

/// Restrictions on which substrings are considered as candidates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateConstraints {
    /// Minimum length in characters.
    pub min_len: usize,
    /// Maximum length in characters.
    pub max_len: usize,
    /// When set, `$` may only appear as the first or last character.
    pub respect_word_boundary: bool,
    /// A candidate must occur in strictly more than this many verses of `V`.
    pub min_count: usize,
}

impl CandidateConstraints {
    pub fn new(min_len: usize, max_len: usize, respect_word_boundary: bool, min_count: usize) -> Result<Self> {
        if min_len == 0 || min_len > max_len {
            return Err(Error::InvalidParameter(format!(
                "candidate lengths must satisfy 1 <= min_len <= max_len (got {min_len}..{max_len})"
            )));
        }
        Ok(CandidateConstraints {
            min_len,
            max_len,
            respect_word_boundary,
            min_count,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredCandidate {
    pub text: String,
    pub score: f64,
    pub count_in_v: usize,
    pub count_outside_v: usize,
}

/// Fraction of `v` whose text contains at least one of `strings`. An empty
/// `v` is fully covered.
pub fn coverage<S: AsRef<str>>(idx: &OccurrenceIndex, strings: &[S], v: &VerseSet) -> f64 {
    if v.is_empty() {
        return 1.0;
    }
    let hit = v
        .positions()
        .iter()
        .filter(|&&p| idx.verse_contains_any(p, strings))
        .count();
    hit as f64 / v.len() as f64
}

/// [`coverage`] over verse ids; ids unknown to the index count as uncovered.
pub fn coverage_of_ids<S: AsRef<str>>(idx: &OccurrenceIndex, strings: &BTreeSet<S>, v: &BTreeSet<VerseId>) -> f64 {
    if v.is_empty() {
        return 1.0;
    }
    let strings: Vec<&str> = strings.iter().map(AsRef::as_ref).collect();
    let hit = v
        .iter()
        .filter_map(|id| idx.position(id))
        .filter(|&p| idx.verse_contains_any(p, &strings))
        .count();
    hit as f64 / v.len() as f64
}

/// Counts, for every substring of the verses in `v` satisfying the length and
/// boundary rules, the number of verses of `v` containing it. No count
/// threshold is applied.
pub(crate) fn substring_counts<'a>(
    idx: &'a OccurrenceIndex,
    v: &VerseSet,
    cons: &CandidateConstraints,
) -> FxHashMap<&'a str, u32> {
    // value: (verse count, last verse seen)
    let mut counts: FxHashMap<&'a str, (u32, u32)> = FxHashMap::default();
    let mut bounds = Vec::new();
    let mut chars = Vec::new();
    for &pos in v.positions() {
        let text = idx.verse_text(pos).as_str();
        char_bounds(text, &mut bounds);
        chars.clear();
        chars.extend(text.chars());
        let n = chars.len();
        for start in 0..n {
            for len in 1..=cons.max_len.min(n - start) {
                // the previous last char becomes internal once we extend past it
                if cons.respect_word_boundary && len >= 3 && chars[start + len - 2] == BOUNDARY {
                    break;
                }
                if len < cons.min_len {
                    continue;
                }
                let gram = &text[bounds[start]..bounds[start + len]];
                let entry = counts.entry(gram).or_insert((0, u32::MAX));
                if entry.1 != pos {
                    entry.0 += 1;
                    entry.1 = pos;
                }
            }
        }
    }
    counts.into_iter().map(|(k, (c, _))| (k, c)).collect()
}

/// All substrings of the verses in `v` that satisfy `cons`, with the number
/// of verses of `v` containing each.
pub fn enumerate_candidates(idx: &OccurrenceIndex, v: &VerseSet, cons: &CandidateConstraints) -> BTreeMap<String, usize> {
    substring_counts(idx, v, cons)
        .into_iter()
        .filter(|&(_, c)| c as usize > cons.min_count)
        .map(|(k, c)| (k.to_owned(), c as usize))
        .collect()
}

/// Ranking used to pick a winner: higher score, then higher count in `V`,
/// then the lexicographically smallest text.
fn rank(a: (f64, usize, &str), b: (f64, usize, &str)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then(a.1.cmp(&b.1))
        .then_with(|| b.2.cmp(a.2))
}

/// The candidate most associated with `v`, or `None` when no candidate
/// passes the constraints. `v` and `universe` are positions in `idx`'s
/// language; `v` is expected to lie inside `universe`.
pub fn best_candidate(
    idx: &OccurrenceIndex,
    v: &VerseSet,
    exclude: &BTreeSet<String>,
    cons: &CandidateConstraints,
    universe: &VerseSet,
) -> Option<ScoredCandidate> {
    let v = v.intersection(universe);
    let counts = substring_counts(idx, &v, cons);
    let candidates: Vec<(&str, u32)> = counts
        .into_iter()
        .filter(|&(s, c)| c as usize > cons.min_count && !exclude.contains(s))
        .collect();
    let v_size = v.len() as u64;
    let universe_size = universe.len() as u64;
    let best = candidates
        .par_iter()
        .map(|&(text, count_in_v)| {
            let in_universe = universe.count_in(&idx.postings(text)) as u64;
            let table = ContingencyTable::from_counts(count_in_v as u64, in_universe, v_size, universe_size);
            (association(&table), count_in_v as usize, text, table.n01 as usize)
        })
        .max_by(|a, b| rank((a.0, a.1, a.2), (b.0, b.1, b.2)))?;
    Some(ScoredCandidate {
        text: best.2.to_owned(),
        score: best.0,
        count_in_v: best.1,
        count_outside_v: best.3,
    })
}
