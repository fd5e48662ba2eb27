//! Conceptualization vectors, language similarity and nearest-neighbour
//! family classification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::LanguageId;
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, SourceNodeId};
use crate::measures::semantic_field;

/// The focal concept plus at most this many associated source nodes.
pub const MAX_DIMENSIONS: usize = 100;

/// Dimensions of one concept's vectors; `dims[0]` is the concept itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionBasis {
    pub concept: String,
    pub dims: Vec<SourceNodeId>,
}

impl DimensionBasis {
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Column names, `concept:node`.
    pub fn column_names(&self) -> impl Iterator<Item = String> + '_ {
        self.dims.iter().map(move |d| format!("{}:{d}", self.concept))
    }
}

/// Ranks the concept's second neighbourhood by number of languages, then
/// path count, then node id.
pub fn build_basis(g: &BipartiteGraph, concept: &str) -> Result<DimensionBasis> {
    let field = semantic_field(g, concept)?;
    let focal = SourceNodeId::Focal(concept.to_owned());
    let mut ranked: Vec<_> = field.entries.iter().filter(|(id, _)| **id != focal).collect();
    ranked.sort_by(|a, b| {
        b.1.language_count
            .cmp(&a.1.language_count)
            .then(b.1.path_count.cmp(&a.1.path_count))
            .then(a.0.cmp(b.0))
    });
    let dims = std::iter::once(focal)
        .chain(ranked.into_iter().take(MAX_DIMENSIONS - 1).map(|(id, _)| id.clone()))
        .collect();
    Ok(DimensionBasis {
        concept: concept.to_owned(),
        dims,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConceptVector {
    pub language: LanguageId,
    pub concept: String,
    pub values: Vec<f64>,
}

impl ConceptVector {
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Path counts through `language`'s target nodes per basis dimension,
/// L1-normalized. Paths leaving the basis are ignored.
pub fn concept_vector(g: &BipartiteGraph, language: &LanguageId, basis: &DimensionBasis) -> ConceptVector {
    let slot: BTreeMap<&SourceNodeId, usize> = basis.dims.iter().enumerate().map(|(i, d)| (d, i)).collect();
    let mut values = vec![0.0; basis.len()];
    for step in g.paths_from(&basis.concept) {
        if step.language != language {
            continue;
        }
        if let Some(i) = step.endpoint.and_then(|e| slot.get(e)) {
            values[*i] += 1.0;
        }
    }
    let sum: f64 = values.iter().sum();
    if sum > 0.0 {
        values.iter_mut().for_each(|v| *v /= sum);
    }
    ConceptVector {
        language: language.clone(),
        concept: basis.concept.clone(),
        values,
    }
}

/// Cosine similarity; `None` if either vector is all zero.
pub fn c_sim(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Concatenated concept vectors per language with named columns.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VectorSet {
    pub columns: Vec<String>,
    pub vectors: BTreeMap<LanguageId, Vec<f64>>,
}

/// Result of [`language_vectors`].
#[derive(Clone, Debug, PartialEq)]
pub struct LanguageVectors {
    pub bases: Vec<DimensionBasis>,
    pub set: VectorSet,
    /// Languages lacking forward edges for at least one concept.
    pub dropped: Vec<LanguageId>,
}

/// Builds one vector per language over `concepts` in the given order.
///
/// Candidate languages are `languages`, or every language with a forward
/// edge in `g`. A language is kept only if each concept has forward edges
/// in it.
pub fn language_vectors(
    g: &BipartiteGraph,
    concepts: &[String],
    languages: Option<&BTreeSet<LanguageId>>,
) -> Result<LanguageVectors> {
    if concepts.is_empty() {
        return Err(Error::InvalidInput("no concepts given".into()));
    }
    let bases = concepts
        .iter()
        .map(|c| build_basis(g, c))
        .collect::<Result<Vec<_>>>()?;
    let mut covered: BTreeMap<&str, BTreeSet<&LanguageId>> = BTreeMap::new();
    for (key, a) in g.alignments() {
        if !a.forward.is_empty() {
            covered.entry(key.concept.as_str()).or_default().insert(&key.language);
        }
    }
    let candidates: BTreeSet<LanguageId> = match languages {
        Some(ls) => ls.clone(),
        None => covered.values().flatten().map(|&l| l.clone()).collect(),
    };
    let (kept, dropped): (Vec<_>, Vec<_>) = candidates.into_iter().partition(|l| {
        concepts
            .iter()
            .all(|c| covered.get(c.as_str()).is_some_and(|ls| ls.contains(l)))
    });
    let vectors = kept
        .into_par_iter()
        .map(|l| {
            let values = bases
                .iter()
                .flat_map(|b| concept_vector(g, &l, b).values)
                .collect();
            (l, values)
        })
        .collect();
    let columns = bases.iter().flat_map(|b| b.column_names()).collect();
    Ok(LanguageVectors {
        bases,
        set: VectorSet { columns, vectors },
        dropped,
    })
}

impl VectorSet {
    pub fn similarity(&self, a: &LanguageId, b: &LanguageId) -> Option<f64> {
        c_sim(self.vectors.get(a)?, self.vectors.get(b)?)
    }

    /// TSV with a `language` column followed by one column per dimension.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("language");
        for c in &self.columns {
            out.push('\t');
            out.push_str(c);
        }
        out.push('\n');
        for (l, values) in &self.vectors {
            out.push_str(l.as_str());
            for v in values {
                write!(out, "\t{v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "missing header"))?;
        let mut cols = header.split('\t');
        if cols.next() != Some("language") {
            return Err(Error::parse(path, 1, "header must start with `language`"));
        }
        let columns: Vec<String> = cols.map(str::to_owned).collect();
        let mut vectors = BTreeMap::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let language = LanguageId::new(fields.next().unwrap_or_default())
                .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
            let values = fields
                .map(|f| f.parse::<f64>().map_err(|_| Error::parse(path, i + 1, format!("bad value `{f}`"))))
                .collect::<Result<Vec<_>>>()?;
            if values.len() != columns.len() {
                return Err(Error::parse(
                    path,
                    i + 1,
                    format!("{} values for {} columns", values.len(), columns.len()),
                ));
            }
            vectors.insert(language, values);
        }
        Ok(VectorSet { columns, vectors })
    }

    /// Symmetric pairwise similarity table; `NA` where undefined.
    pub fn similarity_tsv(&self) -> String {
        let langs: Vec<&LanguageId> = self.vectors.keys().collect();
        let rows: Vec<String> = langs
            .par_iter()
            .map(|a| {
                let mut row = a.to_string();
                for b in &langs {
                    match self.similarity(a, b) {
                        Some(s) => write!(row, "\t{s}").unwrap(),
                        None => row.push_str("\tNA"),
                    }
                }
                row.push('\n');
                row
            })
            .collect();
        let mut out = String::from("language");
        for l in &langs {
            write!(out, "\t{l}").unwrap();
        }
        out.push('\n');
        out.extend(rows);
        out
    }
}

/// Family and area per language.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LanguageLabels {
    pub family: BTreeMap<LanguageId, String>,
    pub area: BTreeMap<LanguageId, String>,
}

impl LanguageLabels {
    /// Parses `language<TAB>family[<TAB>area]` lines. A first line starting
    /// with `language` is a header.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut labels = LanguageLabels::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("language")) {
                continue;
            }
            let mut f = line.split('\t').map(str::trim);
            let language = LanguageId::new(f.next().unwrap_or_default())
                .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
            let family = f.next().filter(|s| !s.is_empty()).ok_or_else(|| {
                Error::parse(path, i + 1, "expected `language<TAB>family[<TAB>area]`")
            })?;
            labels.family.insert(language.clone(), family.to_owned());
            if let Some(area) = f.next().filter(|s| !s.is_empty()) {
                labels.area.insert(language, area.to_owned());
            }
        }
        Ok(labels)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelAccuracy {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnReport {
    pub k: usize,
    pub per_label: BTreeMap<String, LabelAccuracy>,
    pub overall: LabelAccuracy,
}

fn accuracy(correct: usize, total: usize) -> LabelAccuracy {
    LabelAccuracy {
        correct,
        total,
        accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
    }
}

/// For each labelled language whose label is in `evaluate` (all labels if
/// `None`): is its label shared by strictly more than k/2 of its k nearest
/// labelled neighbours? Neighbours are ordered by similarity, then code.
/// Languages with all-zero vectors take no part.
pub fn knn_family_accuracy(
    vectors: &VectorSet,
    labels: &BTreeMap<LanguageId, String>,
    k: usize,
    evaluate: Option<&BTreeSet<String>>,
) -> Result<KnnReport> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let pool: Vec<(&LanguageId, &Vec<f64>, &String)> = vectors
        .vectors
        .iter()
        .filter(|(_, v)| v.iter().any(|&x| x != 0.0))
        .filter_map(|(l, v)| Some((l, v, labels.get(l)?)))
        .collect();
    if pool.len() <= k {
        return Err(Error::InvalidInput(format!(
            "{} labelled languages with vectors; k={k} needs at least {}",
            pool.len(),
            k + 1
        )));
    }
    let outcomes: Vec<(&String, bool)> = pool
        .par_iter()
        .filter(|(_, _, label)| evaluate.is_none_or(|e| e.contains(*label)))
        .map(|&(l, v, label)| {
            let mut neighbours: Vec<(f64, &LanguageId, &String)> = pool
                .iter()
                .filter(|(m, _, _)| *m != l)
                .map(|&(m, w, lab)| (c_sim(v, w).unwrap_or(0.0), m, lab))
                .collect();
            neighbours.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
            let same = neighbours[..k].iter().filter(|(_, _, lab)| *lab == label).count();
            (label, 2 * same > k)
        })
        .collect();
    let mut per: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (label, ok) in &outcomes {
        let e = per.entry((*label).clone()).or_default();
        e.0 += *ok as usize;
        e.1 += 1;
    }
    if let Some(e) = evaluate {
        for label in e {
            per.entry(label.clone()).or_default();
        }
    }
    let correct = outcomes.iter().filter(|(_, ok)| *ok).count();
    Ok(KnnReport {
        k,
        per_label: per.into_iter().map(|(l, (c, t))| (l, accuracy(c, t))).collect(),
        overall: accuracy(correct, outcomes.len()),
    })
}
