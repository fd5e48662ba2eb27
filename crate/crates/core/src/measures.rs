//! Semantic fields, concept stability, and stability prediction from
//! concreteness ratings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graph::{BipartiteGraph, SourceNodeId};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldEntry {
    /// Number of length-2 paths focal -> target node -> this node.
    pub path_count: usize,
    /// Distinct languages among those paths' target nodes.
    pub language_count: usize,
}

/// The source nodes at distance two from a focal concept.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticField {
    pub focal: String,
    pub entries: BTreeMap<SourceNodeId, FieldEntry>,
}

impl SemanticField {
    /// Entries by descending path count, ties by node id.
    pub fn sorted(&self) -> Vec<(&SourceNodeId, &FieldEntry)> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by(|a, b| b.1.path_count.cmp(&a.1.path_count).then(a.0.cmp(b.0)));
        v
    }

    pub fn focal_entry(&self) -> FieldEntry {
        self.entries
            .get(&SourceNodeId::Focal(self.focal.clone()))
            .copied()
            .unwrap_or_default()
    }
}

fn require_focal(g: &BipartiteGraph, concept: &str) -> Result<()> {
    g.focal(concept)
        .map(|_| ())
        .ok_or_else(|| Error::UnknownConcept(concept.to_owned()))
}

pub fn semantic_field(g: &BipartiteGraph, concept: &str) -> Result<SemanticField> {
    require_focal(g, concept)?;
    let mut paths: BTreeMap<SourceNodeId, (usize, BTreeSet<_>)> = BTreeMap::new();
    for step in g.paths_from(concept) {
        if let Some(end) = step.endpoint {
            let e = paths.entry(end.clone()).or_default();
            e.0 += 1;
            e.1.insert(step.language);
        }
    }
    Ok(SemanticField {
        focal: concept.to_owned(),
        entries: paths
            .into_iter()
            .map(|(id, (n, langs))| {
                (
                    id,
                    FieldEntry {
                        path_count: n,
                        language_count: langs.len(),
                    },
                )
            })
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityScore {
    pub concept: String,
    pub sigma: f64,
    pub recurrent_paths: usize,
    pub total_paths: usize,
}

impl StabilityScore {
    pub fn new(concept: impl Into<String>, recurrent_paths: usize, total_paths: usize) -> Self {
        StabilityScore {
            concept: concept.into(),
            sigma: recurrent_paths as f64 / total_paths as f64,
            recurrent_paths,
            total_paths,
        }
    }
}

/// Fraction of the concept's forward-edge target nodes whose backward edge
/// returns to it. `None` when the concept has no forward edges.
pub fn stability(g: &BipartiteGraph, concept: &str) -> Result<Option<StabilityScore>> {
    require_focal(g, concept)?;
    let me = SourceNodeId::Focal(concept.to_owned());
    let (mut total, mut recurrent) = (0, 0);
    for step in g.paths_from(concept) {
        total += 1;
        if step.endpoint == Some(&me) {
            recurrent += 1;
        }
    }
    Ok((total > 0).then(|| StabilityScore::new(concept, recurrent, total)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConcretenessClass {
    Concrete,
    Abstract,
    Neither,
}

impl ConcretenessClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConcretenessClass::Concrete => "concrete",
            ConcretenessClass::Abstract => "abstract",
            ConcretenessClass::Neither => "neither",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcretenessBands {
    /// Ratings at or above this are concrete.
    pub concrete_min: f64,
    /// Ratings at or below this are abstract.
    pub abstract_max: f64,
}

impl Default for ConcretenessBands {
    fn default() -> Self {
        ConcretenessBands {
            concrete_min: 3.5,
            abstract_max: 2.5,
        }
    }
}

pub fn classify_concept(gamma: f64, bands: &ConcretenessBands) -> Result<ConcretenessClass> {
    if !(1.0..=5.0).contains(&gamma) {
        return Err(Error::InvalidInput(format!(
            "concreteness rating {gamma} outside [1, 5]"
        )));
    }
    Ok(if gamma >= bands.concrete_min {
        ConcretenessClass::Concrete
    } else if gamma <= bands.abstract_max {
        ConcretenessClass::Abstract
    } else {
        ConcretenessClass::Neither
    })
}

/// Concreteness ratings by concept name; `None` marks a concept the rating
/// resource does not cover.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConcretenessTable {
    ratings: BTreeMap<String, Option<f64>>,
}

impl ConcretenessTable {
    pub fn insert(&mut self, concept: impl Into<String>, gamma: Option<f64>) {
        self.ratings.insert(concept.into(), gamma);
    }

    pub fn get(&self, concept: &str) -> Option<f64> {
        self.ratings.get(concept).copied().flatten()
    }

    /// Parses `concept<TAB>rating` lines; `NA` marks a missing rating.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut table = ConcretenessTable::default();
        for (i, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let (name, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected `concept<TAB>rating`"))?;
            let value = value.trim();
            let gamma = if value.eq_ignore_ascii_case("na") {
                None
            } else {
                let g: f64 = value
                    .parse()
                    .map_err(|_| Error::parse(path, i + 1, format!("bad rating `{value}`")))?;
                if !(1.0..=5.0).contains(&g) {
                    return Err(Error::parse(path, i + 1, format!("rating {g} outside [1, 5]")));
                }
                Some(g)
            };
            table.insert(name.trim(), gamma);
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positive: usize,
    pub false_positive: usize,
    pub false_negative: usize,
    pub true_negative: usize,
    pub evaluated: usize,
    /// Concepts without a rating or in the neither band.
    pub skipped: Vec<String>,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Predicts "stable" (σ ≥ `sigma_threshold`) exactly for concrete concepts
/// and scores the prediction with stable as the positive class.
pub fn stability_prediction_report(
    scores: &[StabilityScore],
    table: &ConcretenessTable,
    sigma_threshold: f64,
    bands: &ConcretenessBands,
) -> Result<PredictionReport> {
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    let mut skipped = Vec::new();
    for s in scores {
        let Some(gamma) = table.get(&s.concept) else {
            log::warn!("no concreteness rating for `{}`; skipped", s.concept);
            skipped.push(s.concept.clone());
            continue;
        };
        let predicted = match classify_concept(gamma, bands)? {
            ConcretenessClass::Concrete => true,
            ConcretenessClass::Abstract => false,
            ConcretenessClass::Neither => {
                skipped.push(s.concept.clone());
                continue;
            }
        };
        let stable = s.sigma >= sigma_threshold;
        match (predicted, stable) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let evaluated = tp + fp + fn_ + tn;
    if evaluated == 0 {
        return Err(Error::InvalidInput(
            "no scored concept has a concrete or abstract rating".into(),
        ));
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(PredictionReport {
        accuracy: ratio(tp + tn, evaluated),
        precision,
        recall,
        f1,
        true_positive: tp,
        false_positive: fp,
        false_negative: fn_,
        true_negative: tn,
        evaluated,
        skipped,
    })
}

/// Stability report as TSV: concept, σ, recurrent, total, γ, class.
pub fn stability_tsv(scores: &[StabilityScore], table: Option<&ConcretenessTable>, bands: &ConcretenessBands) -> Result<String> {
    let mut out = String::from("concept\tsigma\trecurrent\ttotal\tgamma\tclass\n");
    for s in scores {
        let gamma = table.and_then(|t| t.get(&s.concept));
        let (g, class) = match gamma {
            Some(g) => (g.to_string(), classify_concept(g, bands)?.as_str()),
            None => ("NA".to_owned(), "NA"),
        };
        writeln!(
            out,
            "{}\t{:.4}\t{}\t{}\t{}\t{}",
            s.concept, s.sigma, s.recurrent_paths, s.total_paths, g, class
        )
        .unwrap();
    }
    Ok(out)
}

fn dot_quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            q.push('\\');
        }
        q.push(c);
    }
    q.push('"');
    q
}

/// Graphviz rendering of a field. Node width is proportional to path count;
/// edges run from the focal concept to each other node, weighted by the
/// number of languages.
pub fn field_to_dot(field: &SemanticField) -> String {
    let focal = SourceNodeId::Focal(field.focal.clone());
    let max_paths = field
        .entries
        .values()
        .map(|e| e.path_count)
        .max()
        .unwrap_or(1)
        .max(1);
    let mut out = format!("digraph {} {{\n  node [shape=circle];\n", dot_quote(&field.focal));
    let entries = field.sorted();
    for (id, e) in &entries {
        writeln!(
            out,
            "  {} [label={}, paths={}, languages={}, width={:.4}];",
            dot_quote(&id.to_string()),
            dot_quote(id.label()),
            e.path_count,
            e.language_count,
            2.0 * e.path_count as f64 / max_paths as f64,
        )
        .unwrap();
    }
    for (id, e) in &entries {
        if **id == focal {
            continue;
        }
        writeln!(
            out,
            "  {} -> {} [weight={}, penwidth={}];",
            dot_quote(&focal.to_string()),
            dot_quote(&id.to_string()),
            e.language_count,
            e.language_count,
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn export_field_dot(field: &SemanticField, path: &Path) -> Result<()> {
    if field.entries.is_empty() {
        return Err(Error::InvalidInput(format!(
            "semantic field of `{}` is empty",
            field.focal
        )));
    }
    fs::write(path, field_to_dot(field)).map_err(|e| Error::io(path, e))
}

fn unquote(s: &str) -> Option<(String, &str)> {
    let mut chars = s.strip_prefix('"')?.char_indices();
    let mut out = String::new();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => out.push(chars.next()?.1),
            '"' => return Some((out, &s[i + 2..])),
            _ => out.push(c),
        }
    }
    None
}

fn attr(attrs: &str, key: &str) -> Option<usize> {
    let start = attrs.find(&format!("{key}="))? + key.len() + 1;
    let rest = &attrs[start..];
    let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    rest[..end].parse().ok()
}

/// Reads back `(node id, paths, languages)` from [`field_to_dot`] output.
pub fn parse_field_dot(text: &str) -> Result<Vec<(String, usize, usize)>> {
    let mut nodes = Vec::new();
    for line in text.lines().map(str::trim) {
        if !line.starts_with('"') || line.contains("->") {
            continue;
        }
        let bad = || Error::InvalidInput(format!("unparseable DOT node line `{line}`"));
        let (id, rest) = unquote(line).ok_or_else(bad)?;
        let paths = attr(rest, "paths").ok_or_else(bad)?;
        let languages = attr(rest, "languages").ok_or_else(bad)?;
        nodes.push((id, paths, languages));
    }
    Ok(nodes)
}
