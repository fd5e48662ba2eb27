//! Generated parallel corpora with planted translations.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use conceptualizer::corpus::{LanguageId, LanguageText, Normalizer, ParallelCorpus, VerseId};
use conceptualizer::graph::Concept;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SOURCE: &str = "eng";

#[derive(Clone, Debug)]
pub struct Shape {
    pub languages: usize,
    pub verses: usize,
    /// Probability that a target token is left untranslated.
    pub drop_rate: f64,
    pub seed: u64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { languages: 10, verses: 2000, drop_rate: 0.05, seed: 7 }
    }
}

/// A generated corpus and what was planted in it.
///
/// Every source word is a two-syllable CV-CV form and each planted word shares
/// its first three letters with some filler word, so `$word` is the shortest
/// string that picks out exactly the planted word's verses. Concepts `c1`, `c2` translate one to one; `x1`-`x3` share
/// their translation with a rarer partner word in every language; in
/// `homonym_language`, `c2`'s translation also renders an unrelated word.
pub struct Synthetic {
    pub corpus: ParallelCorpus,
    pub concepts: Vec<Concept>,
    pub one_to_one: Vec<String>,
    pub colexified: Vec<String>,
    pub homonym_concept: String,
    pub homonym_language: LanguageId,
    pub targets: Vec<LanguageId>,
    /// Source word of each concept.
    pub source_word: BTreeMap<String, String>,
    /// Target word per (source word, language).
    pub translation: BTreeMap<(String, LanguageId), String>,
}

impl Synthetic {
    pub fn planted(&self, concept: &str, language: &LanguageId) -> &str {
        &self.translation[&(self.source_word[concept].clone(), language.clone())]
    }

    pub fn concept(&self, name: &str) -> &Concept {
        self.concepts.iter().find(|c| c.name == name).unwrap()
    }
}

fn words(consonants: &[char], vowels: &[char], syllables: usize) -> Vec<String> {
    let syl: Vec<String> = consonants
        .iter()
        .flat_map(|c| vowels.iter().map(move |v| format!("{c}{v}")))
        .collect();
    let mut out = vec![String::new()];
    for _ in 0..syllables {
        out = out.iter().flat_map(|w| syl.iter().map(move |s| format!("{w}{s}"))).collect();
    }
    out
}

pub fn generate(shape: &Shape) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(shape.seed);
    let mut all = words(&"ptkbdgmnlrsfvzh".chars().collect::<Vec<_>>(), &['a', 'e', 'i', 'o', 'u'], 2);
    all.shuffle(&mut rng);
    let mut vocab: Vec<String> = all[..600].to_vec();
    // every planted word gets a filler sibling with the same first three
    // letters, so no proper prefix of it singles out its verses
    for i in 0..9 {
        let stem = vocab[i][..3].to_owned();
        if !vocab[9..].iter().any(|w| w.starts_with(&stem)) {
            let sibling = all.iter().find(|w| w.starts_with(&stem) && !vocab.contains(w)).unwrap().clone();
            vocab.push(sibling);
        }
    }

    // planted words: c1 c2 x1 x2 x3, partners of x1-x3, the homonym's other sense
    let names = ["c1", "c2", "x1", "x2", "x3"];
    let source_word: BTreeMap<String, String> =
        names.iter().zip(&vocab).map(|(n, w)| (n.to_string(), w.clone())).collect();
    let partners: Vec<String> = vocab[5..8].to_vec();
    let other_sense = vocab[8].clone();
    let filler: Vec<String> = vocab[9..].to_vec();
    let mut rates: Vec<(String, f64)> = names.iter().map(|n| (source_word[*n].clone(), 0.05)).collect();
    rates.extend(partners.iter().map(|p| (p.clone(), 0.03)));
    rates.push((other_sense.clone(), 0.05));

    let targets: Vec<LanguageId> = (0..shape.languages)
        .map(|i| LanguageId::new(&format!("l{}{}", (b'a' + (i / 26) as u8) as char, (b'a' + (i % 26) as u8) as char)).unwrap())
        .collect();
    let homonym_language = targets[0].clone();

    let mut translation = BTreeMap::new();
    for l in &targets {
        let mut cons: Vec<char> = "ptkbdgmnlrsjwcqxy".chars().collect();
        cons.shuffle(&mut rng);
        cons.truncate(rng.random_range(7..=10));
        let mut vow: Vec<char> = "aeiouy".chars().collect();
        vow.shuffle(&mut rng);
        vow.truncate(rng.random_range(3..=5));
        let mut forms: Vec<String> = words(&cons, &vow, 2);
        forms.extend(words(&cons, &vow, 3).choose_multiple(&mut rng, 2000).cloned());
        let mut forms: Vec<String> = forms.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        forms.shuffle(&mut rng);
        for (w, f) in vocab.iter().zip(&forms) {
            translation.insert((w.clone(), l.clone()), f.clone());
        }
        for (x, p) in ["x1", "x2", "x3"].iter().zip(&partners) {
            let shared = translation[&(source_word[*x].clone(), l.clone())].clone();
            translation.insert((p.clone(), l.clone()), shared);
        }
        if *l == homonym_language {
            let shared = translation[&(source_word["c2"].clone(), l.clone())].clone();
            translation.insert((other_sense.clone(), l.clone()), shared);
        }
    }

    let n = Normalizer::default();
    let mut source = Vec::new();
    let mut per_lang: Vec<Vec<(VerseId, conceptualizer::corpus::VerseText)>> = vec![Vec::new(); targets.len()];
    for v in 0..shape.verses {
        let id = VerseId::new(format!("{:08}", 40_001_001 + v));
        let len = rng.random_range(6..=10);
        let mut tokens: Vec<&String> = rates.iter().filter(|(_, r)| rng.random_bool(*r)).map(|(w, _)| w).collect();
        while tokens.len() < len {
            tokens.push(filler.choose(&mut rng).unwrap());
        }
        tokens.shuffle(&mut rng);
        let joined: Vec<&str> = tokens.iter().map(|s| s.as_str()).collect();
        source.push((id.clone(), n.normalize(&joined.join(" "))));
        for (i, l) in targets.iter().enumerate() {
            let mut t: Vec<&str> = tokens
                .iter()
                .filter(|_| !rng.random_bool(shape.drop_rate))
                .map(|w| translation[&((*w).clone(), l.clone())].as_str())
                .collect();
            t.shuffle(&mut rng);
            per_lang[i].push((id.clone(), n.normalize(&t.join(" "))));
        }
    }
    let mut texts = vec![LanguageText::from_verses(LanguageId::new(SOURCE).unwrap(), source).unwrap()];
    for (l, verses) in targets.iter().zip(per_lang) {
        texts.push(LanguageText::from_verses(l.clone(), verses).unwrap());
    }
    let corpus = ParallelCorpus::new(LanguageId::new(SOURCE).unwrap(), texts).unwrap();
    let concepts = names
        .iter()
        .map(|c| Concept::focal(*c, [format!("${}", source_word[*c])]).unwrap())
        .collect();
    Synthetic {
        corpus,
        concepts,
        one_to_one: vec!["c1".into(), "c2".into()],
        colexified: vec!["x1".into(), "x2".into(), "x3".into()],
        homonym_concept: "c2".into(),
        homonym_language,
        targets,
        source_word,
        translation,
    }
}
