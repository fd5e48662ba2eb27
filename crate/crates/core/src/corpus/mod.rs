//! Verse-aligned parallel texts: identifiers, normalization, loading and
//! the per-language substring occurrence index.

mod index;
mod normalize;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use index::char_bounds;
pub use index::{IndexStats, IndexedCorpus, OccurrenceIndex, Pairing, VerseSet};
pub use normalize::{fold_case, Normalizer, Punctuation, BOUNDARY};

/// ISO 639-3 language code.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguageId(String);

impl LanguageId {
    pub fn new(code: &str) -> Result<Self> {
        if code.len() == 3 && code.bytes().all(|b| b.is_ascii_lowercase()) {
            Ok(LanguageId(code.to_owned()))
        } else {
            Err(Error::InvalidLanguage(code.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for LanguageId {
    type Error = Error;

    fn try_from(code: String) -> Result<Self> {
        LanguageId::new(&code)
    }
}

impl From<LanguageId> for String {
    fn from(id: LanguageId) -> String {
        id.0
    }
}

impl std::str::FromStr for LanguageId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LanguageId::new(s)
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Verse identifier as it appears in corpus files. Equal identifiers in
/// different languages denote parallel verses.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VerseId(String);

impl VerseId {
    pub fn new(id: impl Into<String>) -> Self {
        VerseId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VerseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VerseId {
    fn from(s: &str) -> Self {
        VerseId(s.to_owned())
    }
}

/// Boundary-marked verse text, e.g. `$in$the$beginning$`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VerseText(String);

impl VerseText {
    /// Validates an already marked string.
    pub fn from_marked(marked: &str) -> Result<Self> {
        let ok = marked.len() >= 2
            && marked.starts_with(BOUNDARY)
            && marked.ends_with(BOUNDARY)
            && !marked.chars().any(char::is_whitespace)
            && (marked == "$$" || !marked.contains("$$"));
        if ok {
            Ok(VerseText(marked.to_owned()))
        } else {
            Err(Error::InvalidInput(format!(
                "`{marked}` is not a boundary-marked verse text"
            )))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn contains(&self, needle: &str) -> bool {
        self.0.contains(needle)
    }

    pub fn is_empty_verse(&self) -> bool {
        self.0 == "$$"
    }
}

impl fmt::Display for VerseText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One language's verses, sorted by verse id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageText {
    language: LanguageId,
    ids: Vec<VerseId>,
    texts: Vec<VerseText>,
}

impl LanguageText {
    /// Builds from unsorted `(id, text)` pairs; duplicate ids are rejected.
    pub fn from_verses(language: LanguageId, verses: Vec<(VerseId, VerseText)>) -> Result<Self> {
        Self::from_numbered(
            language,
            Path::new("<memory>"),
            verses.into_iter().enumerate().map(|(i, (id, t))| (i + 1, id, t)).collect(),
        )
    }

    fn from_numbered(
        language: LanguageId,
        path: &Path,
        mut verses: Vec<(usize, VerseId, VerseText)>,
    ) -> Result<Self> {
        verses.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
        for pair in verses.windows(2) {
            if pair[0].1 == pair[1].1 {
                return Err(Error::DuplicateVerse {
                    path: path.to_owned(),
                    line: pair[1].0,
                    verse: pair[1].1.to_string(),
                });
            }
        }
        let (ids, texts) = verses.into_iter().map(|(_, id, t)| (id, t)).unzip();
        Ok(LanguageText {
            language,
            ids,
            texts,
        })
    }

    /// Reads a `verseID<TAB>raw text` file, normalizing every verse.
    pub fn read(language: LanguageId, path: &Path, normalizer: &Normalizer) -> Result<Self> {
        Self::read_with(language, path, |raw| Ok(normalizer.normalize(raw)))
    }

    /// Reads a file whose texts are already boundary-marked.
    pub fn read_marked(language: LanguageId, path: &Path) -> Result<Self> {
        Self::read_with(language, path, VerseText::from_marked)
    }

    fn read_with(
        language: LanguageId,
        path: &Path,
        convert: impl Fn(&str) -> Result<VerseText>,
    ) -> Result<Self> {
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let content = content.strip_prefix('\u{feff}').unwrap_or(&content);
        let mut verses = Vec::new();
        for (i, line) in content.lines().enumerate() {
            let lineno = i + 1;
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let (id, raw) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, lineno, "expected `verseID<TAB>text`"))?;
            let id = id.trim();
            if id.is_empty() {
                return Err(Error::parse(path, lineno, "empty verse id"));
            }
            let text = convert(raw).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
            verses.push((lineno, VerseId::new(id), text));
        }
        Self::from_numbered(language, path, verses)
    }

    /// Writes the marked texts in the same line format they are read from.
    pub fn write_marked(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (id, text) in self.ids.iter().zip(&self.texts) {
            out.push_str(id.as_str());
            out.push('\t');
            out.push_str(text.as_str());
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn language(&self) -> &LanguageId {
        &self.language
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[VerseId] {
        &self.ids
    }

    pub fn texts(&self) -> &[VerseText] {
        &self.texts
    }

    pub fn get(&self, id: &VerseId) -> Option<&VerseText> {
        self.ids.binary_search(id).ok().map(|i| &self.texts[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VerseId, &VerseText)> {
        self.ids.iter().zip(&self.texts)
    }
}

/// Corpus manifest: source language plus one verse file per language.
///
/// ```toml
/// source = "eng"
/// punctuation = ".,;:!?"   # optional; default removes Unicode P* and S*
///
/// [languages]
/// eng = "eng.txt"
/// fra = "fra.txt"
/// ```
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub source: LanguageId,
    #[serde(default)]
    pub punctuation: Option<String>,
    pub languages: BTreeMap<LanguageId, PathBuf>,
}

impl Manifest {
    /// Parses a manifest; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: Manifest = toml::from_str(&content)
            .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for file in manifest.languages.values_mut() {
            if file.is_relative() {
                *file = base.join(&*file);
            }
        }
        if !manifest.languages.contains_key(&manifest.source) {
            return Err(Error::InvalidInput(format!(
                "{}: source language `{}` has no file",
                path.display(),
                manifest.source
            )));
        }
        Ok(manifest)
    }

    pub fn normalizer(&self) -> Normalizer {
        match &self.punctuation {
            Some(chars) => Normalizer::new(Punctuation::custom(chars)),
            None => Normalizer::default(),
        }
    }
}

/// Verse-aligned texts for many languages with one designated source language.
#[derive(Clone, Debug)]
pub struct ParallelCorpus {
    source: LanguageId,
    texts: BTreeMap<LanguageId, LanguageText>,
}

impl ParallelCorpus {
    pub fn new(source: LanguageId, texts: impl IntoIterator<Item = LanguageText>) -> Result<Self> {
        let texts: BTreeMap<_, _> = texts.into_iter().map(|t| (t.language.clone(), t)).collect();
        if !texts.contains_key(&source) {
            return Err(Error::UnknownLanguage(source.to_string()));
        }
        Ok(ParallelCorpus { source, texts })
    }

    /// Builds a corpus from raw in-memory verses, normalizing each one.
    pub fn from_raw<'a>(
        source: &str,
        languages: impl IntoIterator<Item = (&'a str, Vec<(&'a str, &'a str)>)>,
        normalizer: &Normalizer,
    ) -> Result<Self> {
        let mut texts = Vec::new();
        for (code, verses) in languages {
            let verses = verses
                .into_iter()
                .map(|(id, raw)| (VerseId::from(id), normalizer.normalize(raw)))
                .collect();
            texts.push(LanguageText::from_verses(LanguageId::new(code)?, verses)?);
        }
        ParallelCorpus::new(LanguageId::new(source)?, texts)
    }

    pub fn source(&self) -> &LanguageId {
        &self.source
    }

    pub fn languages(&self) -> impl Iterator<Item = &LanguageId> {
        self.texts.keys()
    }

    pub fn text(&self, language: &LanguageId) -> Result<&LanguageText> {
        self.texts
            .get(language)
            .ok_or_else(|| Error::UnknownLanguage(language.to_string()))
    }

    /// Verse ids present in both languages.
    pub fn parallel_verses(&self, l1: &LanguageId, l2: &LanguageId) -> Result<BTreeSet<VerseId>> {
        let a = self.text(l1)?;
        let b = self.text(l2)?;
        Ok(index::intersect_sorted(a.ids(), b.ids())
            .map(|(i, _)| a.ids()[i].clone())
            .collect())
    }

    pub fn into_texts(self) -> (LanguageId, BTreeMap<LanguageId, LanguageText>) {
        (self.source, self.texts)
    }
}

/// Loads one verse file per language and normalizes every verse.
pub fn load_corpus(
    source: &LanguageId,
    files: &BTreeMap<LanguageId, PathBuf>,
    normalizer: &Normalizer,
) -> Result<ParallelCorpus> {
    let texts = files
        .iter()
        .map(|(language, path)| LanguageText::read(language.clone(), path, normalizer))
        .collect::<Result<Vec<_>>>()?;
    ParallelCorpus::new(source.clone(), texts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &Path, name: &str, content: &str) -> PathBuf {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn language_codes() {
        assert!(LanguageId::new("eng").is_ok());
        assert!(LanguageId::new("en").is_err());
        assert!(LanguageId::new("ENG").is_err());
        assert!(LanguageId::new("engl").is_err());
        assert!(LanguageId::new("").is_err());
    }

    #[test]
    fn marked_text_validation() {
        assert!(VerseText::from_marked("$a$b$").is_ok());
        assert!(VerseText::from_marked("$$").is_ok());
        assert!(VerseText::from_marked("$a$$b$").is_err());
        assert!(VerseText::from_marked("a$").is_err());
        assert!(VerseText::from_marked("$a b$").is_err());
    }

    #[test]
    fn loads_and_normalizes() {
        let dir = tempfile::tempdir().unwrap();
        let eng = write_file(
            dir.path(),
            "eng.txt",
            "# comment\n40001001\tIn the beginning\n40001002\tThe End.\n",
        );
        let fra = write_file(dir.path(), "fra.txt", "40001001\tAu commencement\n");
        let empty = write_file(dir.path(), "deu.txt", "");
        let files = BTreeMap::from([
            (LanguageId::new("eng").unwrap(), eng),
            (LanguageId::new("fra").unwrap(), fra),
            (LanguageId::new("deu").unwrap(), empty),
        ]);
        let corpus = load_corpus(
            &LanguageId::new("eng").unwrap(),
            &files,
            &Normalizer::default(),
        )
        .unwrap();
        let eng = corpus.text(&LanguageId::new("eng").unwrap()).unwrap();
        assert_eq!(eng.len(), 2);
        assert_eq!(
            eng.get(&VerseId::from("40001001")).unwrap().as_str(),
            "$in$the$beginning$"
        );
        assert_eq!(corpus.text(&LanguageId::new("deu").unwrap()).unwrap().len(), 0);
        let par = corpus
            .parallel_verses(&LanguageId::new("eng").unwrap(), &LanguageId::new("fra").unwrap())
            .unwrap();
        assert_eq!(par, BTreeSet::from([VerseId::from("40001001")]));
    }

    #[test]
    fn malformed_line_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "x.txt", "1\tok\nno tab here\n");
        let err = LanguageText::read(LanguageId::new("xxx").unwrap(), &path, &Normalizer::default())
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_verse_is_integrity_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "x.txt", "1\ta\n2\tb\n1\tc\n");
        let err = LanguageText::read(LanguageId::new("xxx").unwrap(), &path, &Normalizer::default())
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateVerse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn parallel_verses_edge_cases() {
        let n = Normalizer::default();
        let corpus = ParallelCorpus::from_raw(
            "eng",
            [
                ("eng", vec![("01001001", "a"), ("40001001", "b"), ("40001002", "c")]),
                ("fra", vec![("40001001", "b"), ("40001002", "c")]),
                ("deu", vec![("99000001", "z")]),
            ],
            &n,
        )
        .unwrap();
        let eng = LanguageId::new("eng").unwrap();
        let fra = LanguageId::new("fra").unwrap();
        let deu = LanguageId::new("deu").unwrap();
        assert_eq!(corpus.parallel_verses(&eng, &eng).unwrap().len(), 3);
        assert_eq!(corpus.parallel_verses(&eng, &fra).unwrap().len(), 2);
        assert!(corpus.parallel_verses(&fra, &deu).unwrap().is_empty());
        assert!(matches!(
            corpus.parallel_verses(&eng, &LanguageId::new("xyz").unwrap()),
            Err(Error::UnknownLanguage(_))
        ));
    }

    #[test]
    fn manifest_resolves_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            dir.path(),
            "corpus.toml",
            "source = \"eng\"\n[languages]\neng = \"eng.txt\"\n",
        );
        let m = Manifest::load(&path).unwrap();
        assert_eq!(m.languages[&LanguageId::new("eng").unwrap()], dir.path().join("eng.txt"));

        let bad = write_file(dir.path(), "bad.toml", "source = \"eng\"\n[languages]\n");
        assert!(Manifest::load(&bad).is_err());
    }
}
