use std::collections::BTreeSet;

use unicode_general_category::get_general_category;

use super::VerseText;

/// The word-boundary marker inserted between words and at both ends of a verse.
pub const BOUNDARY: char = '$';

/// Characters dropped before boundary marking.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Punctuation {
    /// Every character in Unicode general categories `P*` and `S*`.
    #[default]
    UnicodeCategories,
    /// An explicit character set. The boundary marker is always dropped as well.
    Custom(BTreeSet<char>),
}

impl Punctuation {
    pub fn custom(chars: &str) -> Self {
        Punctuation::Custom(chars.chars().collect())
    }

    fn removes(&self, c: char) -> bool {
        if c == BOUNDARY {
            return true;
        }
        match self {
            Punctuation::UnicodeCategories => {
                let abbr = get_general_category(c).abbreviation();
                abbr.starts_with('P') || abbr.starts_with('S')
            }
            Punctuation::Custom(set) => set.contains(&c),
        }
    }
}

/// Turns raw verse text into boundary-marked form: case folded, punctuation
/// removed, whitespace runs replaced by `$`, wrapped in `$`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Normalizer {
    punctuation: Punctuation,
}

impl Normalizer {
    pub fn new(punctuation: Punctuation) -> Self {
        Normalizer { punctuation }
    }

    pub fn punctuation(&self) -> &Punctuation {
        &self.punctuation
    }

    pub fn normalize(&self, raw: &str) -> VerseText {
        let words = self.words(raw);
        let mut marked = String::with_capacity(raw.len() + 2);
        marked.push(BOUNDARY);
        for word in &words {
            marked.push_str(word);
            marked.push(BOUNDARY);
        }
        if words.is_empty() {
            marked.push(BOUNDARY);
        }
        VerseText(marked)
    }

    /// Normalizes without boundary marks at the ends: internal whitespace
    /// still becomes `$`. Used for gold lexicon entries.
    pub fn normalize_form(&self, raw: &str) -> String {
        self.words(raw).join("$")
    }

    fn words(&self, raw: &str) -> Vec<String> {
        let mut words = Vec::new();
        let mut current = String::new();
        for c in raw.chars() {
            if c.is_whitespace() {
                if !current.is_empty() {
                    words.push(std::mem::take(&mut current));
                }
                continue;
            }
            if self.punctuation.removes(c) {
                continue;
            }
            current.push(fold_case(c));
        }
        if !current.is_empty() {
            words.push(current);
        }
        words
    }
}

/// Simple (one-to-one) case folding.
///
/// Characters whose lowercase mapping expands to several characters are left
/// unchanged, as simple folding does. A handful of characters fold to a
/// different letter than their lowercase form (Greek final sigma, long s,
/// and the Greek symbol variants); those are listed explicitly.
pub fn fold_case(c: char) -> char {
    match c {
        'ς' => 'σ',
        'ſ' => 's',
        'µ' => 'μ',
        'ϐ' => 'β',
        'ϑ' => 'θ',
        'ϕ' => 'φ',
        'ϖ' => 'π',
        'ϰ' => 'κ',
        'ϱ' => 'ρ',
        'ϵ' => 'ε',
        'ẛ' => 'ṡ',
        '\u{0345}' | '\u{1FBE}' => 'ι',
        _ => {
            let mut lower = c.to_lowercase();
            match (lower.next(), lower.next()) {
                (Some(l), None) => l,
                _ => c,
            }
        }
    }
}
