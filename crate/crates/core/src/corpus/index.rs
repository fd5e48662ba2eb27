use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{LanguageId, LanguageText, ParallelCorpus, VerseId, VerseText};
use crate::error::{Error, Result};

/// A set of verses of one language, addressed by their position in that
/// language's sorted verse list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerseSet {
    members: Vec<u32>,
    mask: Vec<bool>,
}

impl VerseSet {
    pub fn empty(domain: usize) -> Self {
        VerseSet {
            members: Vec::new(),
            mask: vec![false; domain],
        }
    }

    pub fn from_positions(domain: usize, positions: impl IntoIterator<Item = u32>) -> Self {
        let mut mask = vec![false; domain];
        for p in positions {
            mask[p as usize] = true;
        }
        let members = mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i as u32))
            .collect();
        VerseSet { members, mask }
    }

    /// Number of verses in the language this set ranges over.
    pub fn domain(&self) -> usize {
        self.mask.len()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, position: u32) -> bool {
        self.mask.get(position as usize).copied().unwrap_or(false)
    }

    pub fn positions(&self) -> &[u32] {
        &self.members
    }

    /// How many of the given positions fall inside this set.
    pub fn count_in(&self, positions: &[u32]) -> usize {
        positions.iter().filter(|&&p| self.contains(p)).count()
    }

    pub fn filter(&self, mut keep: impl FnMut(u32) -> bool) -> VerseSet {
        VerseSet::from_positions(
            self.domain(),
            self.members.iter().copied().filter(|&p| keep(p)),
        )
    }

    pub fn intersection(&self, other: &VerseSet) -> VerseSet {
        self.filter(|p| other.contains(p))
    }

    pub fn difference(&self, other: &VerseSet) -> VerseSet {
        self.filter(|p| !other.contains(p))
    }
}

/// Per-language index answering "which verses contain string `t`".
///
/// Every substring of up to `max_len` characters is stored with its sorted
/// posting list of verse positions. Longer queries are answered by looking
/// up their `max_len`-character prefix and verifying the candidates.
#[derive(Clone, Debug)]
pub struct OccurrenceIndex {
    text: LanguageText,
    max_len: usize,
    table: FxHashMap<Box<str>, Vec<u32>>,
}

impl OccurrenceIndex {
    pub fn build(text: LanguageText, max_len: usize) -> Self {
        assert!(max_len >= 1, "index length must be positive");
        let mut table: FxHashMap<Box<str>, Vec<u32>> = FxHashMap::default();
        let mut bounds = Vec::new();
        for (pos, verse) in text.texts().iter().enumerate() {
            let pos = pos as u32;
            let s = verse.as_str();
            char_bounds(s, &mut bounds);
            let n = bounds.len() - 1;
            for start in 0..n {
                for end in start + 1..=n.min(start + max_len) {
                    let gram = &s[bounds[start]..bounds[end]];
                    match table.get_mut(gram) {
                        Some(postings) => {
                            if *postings.last().unwrap() != pos {
                                postings.push(pos);
                            }
                        }
                        None => {
                            table.insert(gram.into(), vec![pos]);
                        }
                    }
                }
            }
        }
        OccurrenceIndex {
            text,
            max_len,
            table,
        }
    }

    pub fn language(&self) -> &LanguageId {
        self.text.language()
    }

    pub fn text(&self) -> &LanguageText {
        &self.text
    }

    /// Number of verses.
    pub fn len(&self) -> usize {
        self.text.len()
    }

    pub fn is_empty(&self) -> bool {
        self.text.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn verse_id(&self, position: u32) -> &VerseId {
        &self.text.ids()[position as usize]
    }

    pub fn verse_text(&self, position: u32) -> &VerseText {
        &self.text.texts()[position as usize]
    }

    pub fn position(&self, id: &VerseId) -> Option<u32> {
        self.text.ids().binary_search(id).ok().map(|p| p as u32)
    }

    /// Sorted positions of verses containing `needle`.
    pub fn postings(&self, needle: &str) -> Cow<'_, [u32]> {
        if needle.is_empty() {
            return Cow::Owned((0..self.len() as u32).collect());
        }
        match needle.char_indices().nth(self.max_len) {
            None => match self.table.get(needle) {
                Some(p) => Cow::Borrowed(p.as_slice()),
                None => Cow::Borrowed(&[]),
            },
            Some((cut, _)) => {
                let prefix = &needle[..cut];
                let candidates = self.table.get(prefix).map(Vec::as_slice).unwrap_or(&[]);
                Cow::Owned(
                    candidates
                        .iter()
                        .copied()
                        .filter(|&p| self.verse_text(p).contains(needle))
                        .collect(),
                )
            }
        }
    }

    /// Number of verses containing `needle`.
    pub fn verse_frequency(&self, needle: &str) -> usize {
        self.postings(needle).len()
    }

    /// Positions of verses containing any of `strings`.
    pub fn containing_any<'a>(&self, strings: impl IntoIterator<Item = &'a str>) -> VerseSet {
        let mut mask = vec![false; self.len()];
        for s in strings {
            for &p in self.postings(s).iter() {
                mask[p as usize] = true;
            }
        }
        VerseSet::from_positions(
            self.len(),
            mask.iter()
                .enumerate()
                .filter_map(|(i, &m)| m.then_some(i as u32)),
        )
    }

    /// Ids of verses containing any string of `strings` as a substring.
    pub fn verses_containing<S: AsRef<str>>(&self, strings: &BTreeSet<S>) -> BTreeSet<VerseId> {
        self.containing_any(strings.iter().map(AsRef::as_ref))
            .positions()
            .iter()
            .map(|&p| self.verse_id(p).clone())
            .collect()
    }

    /// Whether the verse at `position` contains any of `strings`.
    pub fn verse_contains_any<S: AsRef<str>>(&self, position: u32, strings: &[S]) -> bool {
        let text = self.verse_text(position);
        strings.iter().any(|s| text.contains(s.as_ref()))
    }

    pub fn verse_set(&self, ids: &BTreeSet<VerseId>) -> VerseSet {
        VerseSet::from_positions(self.len(), ids.iter().filter_map(|id| self.position(id)))
    }

    pub fn verse_ids(&self, set: &VerseSet) -> BTreeSet<VerseId> {
        set.positions()
            .iter()
            .map(|&p| self.verse_id(p).clone())
            .collect()
    }

    pub fn stats(&self) -> IndexStats {
        let mut by_length = vec![0usize; self.max_len];
        for key in self.table.keys() {
            by_length[key.chars().count() - 1] += 1;
        }
        IndexStats {
            language: self.language().clone(),
            verses: self.len(),
            distinct_ngrams: by_length,
        }
    }
}

/// Summary written by `conceptualizer index`: `distinct_ngrams[i]` counts the
/// distinct substrings of length `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexStats {
    pub language: LanguageId,
    pub verses: usize,
    pub distinct_ngrams: Vec<usize>,
}

/// Byte offsets of every char boundary in `s`, including `s.len()`.
pub(crate) fn char_bounds(s: &str, out: &mut Vec<usize>) {
    out.clear();
    out.extend(s.char_indices().map(|(b, _)| b));
    out.push(s.len());
}

/// Positions `(i, j)` with `a[i] == b[j]`, for two sorted slices.
pub(crate) fn intersect_sorted<'a, T: Ord>(
    a: &'a [T],
    b: &'a [T],
) -> impl Iterator<Item = (usize, usize)> + 'a {
    let (mut i, mut j) = (0, 0);
    std::iter::from_fn(move || {
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let hit = (i, j);
                    i += 1;
                    j += 1;
                    return Some(hit);
                }
            }
        }
        None
    })
}

/// Parallel verses between two indexed languages.
#[derive(Clone, Debug)]
pub struct Pairing {
    /// Positions in the first language, one per parallel verse.
    pub first: Vec<u32>,
    /// Positions in the second language, aligned with `first`.
    pub second: Vec<u32>,
}

/// A parallel corpus with an occurrence index per language. Immutable once
/// built; shared freely across worker threads.
#[derive(Debug)]
pub struct IndexedCorpus {
    source: LanguageId,
    indexes: BTreeMap<LanguageId, OccurrenceIndex>,
}

impl IndexedCorpus {
    /// Indexes every language (in parallel) with substrings up to `max_len`.
    pub fn build(corpus: ParallelCorpus, max_len: usize) -> Self {
        let (source, texts) = corpus.into_texts();
        let indexes = texts
            .into_par_iter()
            .map(|(l, t)| (l, OccurrenceIndex::build(t, max_len)))
            .collect();
        IndexedCorpus { source, indexes }
    }

    pub fn source(&self) -> &LanguageId {
        &self.source
    }

    pub fn languages(&self) -> impl Iterator<Item = &LanguageId> {
        self.indexes.keys()
    }

    /// All languages other than the source.
    pub fn target_languages(&self) -> impl Iterator<Item = &LanguageId> {
        self.indexes.keys().filter(move |l| **l != self.source)
    }

    pub fn index(&self, language: &LanguageId) -> Result<&OccurrenceIndex> {
        self.indexes
            .get(language)
            .ok_or_else(|| Error::UnknownLanguage(language.to_string()))
    }

    pub fn source_index(&self) -> &OccurrenceIndex {
        &self.indexes[&self.source]
    }

    pub fn pairing(&self, first: &LanguageId, second: &LanguageId) -> Result<Pairing> {
        let a = self.index(first)?.text().ids();
        let b = self.index(second)?.text().ids();
        let (first, second) = intersect_sorted(a, b)
            .map(|(i, j)| (i as u32, j as u32))
            .unzip();
        Ok(Pairing { first, second })
    }

    pub fn parallel_verses(&self, l1: &LanguageId, l2: &LanguageId) -> Result<BTreeSet<VerseId>> {
        let p = self.pairing(l1, l2)?;
        let idx = self.index(l1)?;
        Ok(p.first.iter().map(|&i| idx.verse_id(i).clone()).collect())
    }
}
