//! Run configuration and concept lists.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{fold_case, LanguageId};
use crate::error::{Error, Result};
use crate::graph::{Concept, CountThreshold, PassParams};
use crate::measures::ConcretenessBands;

/// Overrides for [`PassParams`]; unset fields keep their defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PassConfig {
    pub max_iterations: Option<usize>,
    pub alpha: Option<f64>,
    pub target_min_len: Option<usize>,
    pub target_max_len: Option<usize>,
    /// Fraction of the concept's verses a target string must exceed.
    pub target_min_fraction: Option<f64>,
    pub source_min_len: Option<usize>,
    pub source_max_len: Option<usize>,
    /// Verse count a source string must exceed.
    pub source_min_count: Option<usize>,
}

impl PassConfig {
    pub fn params(&self) -> Result<PassParams> {
        let mut p = PassParams::default();
        if let Some(m) = self.max_iterations {
            p.max_iterations = m;
        }
        if let Some(a) = self.alpha {
            p.alpha = a;
        }
        if let Some(v) = self.target_min_len {
            p.target.min_len = v;
        }
        if let Some(v) = self.target_max_len {
            p.target.max_len = v;
        }
        if let Some(f) = self.target_min_fraction {
            if !(0.0..1.0).contains(&f) {
                return Err(Error::InvalidParameter(format!("target_min_fraction must lie in [0, 1), got {f}")));
            }
            p.target.threshold = CountThreshold::Fraction(f);
        }
        if let Some(v) = self.source_min_len {
            p.source.min_len = v;
        }
        if let Some(v) = self.source_max_len {
            p.source.max_len = v;
        }
        if let Some(v) = self.source_min_count {
            p.source.threshold = CountThreshold::Absolute(v);
        }
        p.validate()?;
        Ok(p)
    }
}

/// The TOML run configuration. Relative paths resolve against the file's
/// directory.
///
/// ```toml
/// manifest = "corpus/manifest.toml"
/// concepts = "concepts.tsv"
/// out = "out"
/// seed = 42
/// exclude = ["grc"]
///
/// [pass]
/// max_iterations = 5
/// alpha = 0.9
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub manifest: Option<PathBuf>,
    pub concepts: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    /// Worker threads; all cores when unset.
    pub jobs: Option<usize>,
    /// Target languages; every non-source language when unset.
    pub languages: Option<Vec<LanguageId>>,
    pub exclude: Vec<LanguageId>,
    /// Longest n-gram kept in the occurrence index.
    pub index_max_len: usize,
    pub pass: PassConfig,
    pub sigma_threshold: f64,
    pub concreteness: ConcretenessBands,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            manifest: None,
            concepts: None,
            out: PathBuf::from("out"),
            seed: 0,
            jobs: None,
            languages: None,
            exclude: Vec::new(),
            index_max_len: 8,
            pass: PassConfig::default(),
            sigma_threshold: 0.6,
            concreteness: ConcretenessBands::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [cfg.manifest.as_mut(), cfg.concepts.as_mut(), Some(&mut cfg.out)]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Target languages among `available`: the configured list (which must
    /// be available) or all of them, minus exclusions.
    pub fn target_languages<'a>(
        &self,
        available: impl IntoIterator<Item = &'a LanguageId>,
    ) -> Result<BTreeSet<LanguageId>> {
        let available: BTreeSet<LanguageId> = available.into_iter().cloned().collect();
        let chosen = match &self.languages {
            Some(ls) => {
                if let Some(l) = ls.iter().find(|l| !available.contains(*l)) {
                    return Err(Error::UnknownLanguage(l.to_string()));
                }
                ls.iter().cloned().collect()
            }
            None => available,
        };
        Ok(chosen.into_iter().filter(|l| !self.exclude.contains(l)).collect())
    }
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name == "." || name == ".." || name.contains(['/', '\\', '\0']) {
        return Err(Error::InvalidInput(format!(
            "concept name `{name}` is not usable as a file name"
        )));
    }
    Ok(())
}

/// Parses `name<TAB>string<TAB>string...` lines. Strings are case-folded and
/// otherwise kept as written, including boundary marks (`$bird$`).
pub fn parse_concepts(text: &str, path: &Path) -> Result<Vec<Concept>> {
    let mut out: Vec<Concept> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t').map(str::trim).filter(|f| !f.is_empty());
        let name = fields.next().unwrap_or_default();
        check_name(name).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        let strings: Vec<String> = fields.map(|s| s.chars().map(fold_case).collect()).collect();
        let concept = Concept::focal(name, strings).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        if out.iter().any(|c| c.name == concept.name) {
            return Err(Error::parse(path, i + 1, format!("concept `{name}` defined twice")));
        }
        out.push(concept);
    }
    Ok(out)
}

pub fn load_concepts(path: &Path) -> Result<Vec<Concept>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_concepts(&text, path)
}
