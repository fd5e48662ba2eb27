//! The directed bipartite graph between source-language concepts and
//! target-language verse nodes, and the passes that induce it.

mod pass;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{LanguageId, VerseId};
use crate::error::{Error, Result};

pub use pass::{
    backward_pass, forward_pass, run_concept, run_pair, BackwardResult, CountThreshold,
    ForwardResult, PassParams, PassReport, RunReport, SideParams, Termination,
};

/// A source-side node: a set of source-language strings.
///
/// Focal concepts are user-defined and may hold several strings; nodes found
/// by the backward pass hold exactly the one string that was discovered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub name: String,
    pub strings: BTreeSet<String>,
    pub is_focal: bool,
}

impl Concept {
    pub fn focal(name: impl Into<String>, strings: impl IntoIterator<Item = impl Into<String>>) -> Result<Self> {
        let name = name.into();
        let strings: BTreeSet<String> = strings.into_iter().map(Into::into).collect();
        if name.is_empty() {
            return Err(Error::InvalidInput("concept name must not be empty".into()));
        }
        if strings.is_empty() || strings.iter().any(String::is_empty) {
            return Err(Error::InvalidInput(format!(
                "concept `{name}` needs at least one nonempty string"
            )));
        }
        Ok(Concept {
            name,
            strings,
            is_focal: true,
        })
    }

    pub fn ngram(s: impl Into<String>) -> Self {
        let s = s.into();
        Concept {
            name: s.clone(),
            strings: BTreeSet::from([s]),
            is_focal: false,
        }
    }

    pub fn id(&self) -> SourceNodeId {
        if self.is_focal {
            SourceNodeId::Focal(self.name.clone())
        } else {
            SourceNodeId::Ngram(self.name.clone())
        }
    }
}

/// Identity of a source node.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceNodeId {
    Focal(String),
    Ngram(String),
}

impl SourceNodeId {
    /// The concept name for focal nodes, the string for ngram nodes.
    pub fn label(&self) -> &str {
        match self {
            SourceNodeId::Focal(s) | SourceNodeId::Ngram(s) => s,
        }
    }

    pub fn is_focal(&self) -> bool {
        matches!(self, SourceNodeId::Focal(_))
    }
}

impl std::fmt::Display for SourceNodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SourceNodeId::Focal(s) => write!(f, "[{s}]"),
            SourceNodeId::Ngram(s) => f.write_str(s),
        }
    }
}

/// A target-side node: one verse of one language, labelled with the
/// target strings `strings` found for focal concept `concept`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TargetNode {
    pub concept: String,
    pub language: LanguageId,
    pub verse: VerseId,
    pub strings: Vec<String>,
}

/// All target nodes produced by one forward pass: they share concept,
/// language and string set, and differ only in the verse.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alignment {
    /// Verses reached by a forward edge from the focal concept.
    pub forward: BTreeSet<VerseId>,
    /// The single backward edge of each target node that has one.
    pub backward: BTreeMap<VerseId, SourceNodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AlignmentKey {
    pub concept: String,
    pub language: LanguageId,
    pub strings: Vec<String>,
}

impl AlignmentKey {
    fn node(&self, verse: &VerseId) -> TargetNode {
        TargetNode {
            concept: self.concept.clone(),
            language: self.language.clone(),
            verse: verse.clone(),
            strings: self.strings.clone(),
        }
    }

    fn of(node: &TargetNode) -> Self {
        AlignmentKey {
            concept: node.concept.clone(),
            language: node.language.clone(),
            strings: node.strings.clone(),
        }
    }
}

/// One length-2 path start: a forward-edge target node of a focal concept,
/// and where its backward edge (if any) leads.
#[derive(Clone, Copy, Debug)]
pub struct PathStep<'a> {
    pub language: &'a LanguageId,
    pub verse: &'a VerseId,
    pub endpoint: Option<&'a SourceNodeId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BipartiteGraph {
    sources: BTreeMap<SourceNodeId, Concept>,
    alignments: BTreeMap<AlignmentKey, Alignment>,
}

impl BipartiteGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty() && self.alignments.is_empty()
    }

    /// Adds a source node; re-adding an identical node is a no-op.
    pub fn add_source(&mut self, concept: Concept) -> Result<()> {
        let id = concept.id();
        match self.sources.get(&id) {
            Some(existing) if *existing != concept => Err(Error::InvalidInput(format!(
                "source node {id} defined twice with different strings"
            ))),
            Some(_) => Ok(()),
            None => {
                self.sources.insert(id, concept);
                Ok(())
            }
        }
    }

    /// Adds forward edges from focal concept `concept` to the nodes
    /// `(language, v, strings)` for every `v` in `verses`.
    pub fn add_forward(
        &mut self,
        concept: &str,
        language: &LanguageId,
        strings: &[String],
        verses: impl IntoIterator<Item = VerseId>,
    ) -> Result<()> {
        let id = SourceNodeId::Focal(concept.to_owned());
        if !self.sources.contains_key(&id) {
            return Err(Error::UnknownConcept(concept.to_owned()));
        }
        let mut strings = strings.to_vec();
        strings.sort();
        strings.dedup();
        let key = AlignmentKey {
            concept: concept.to_owned(),
            language: language.clone(),
            strings,
        };
        let verses: Vec<VerseId> = verses.into_iter().collect();
        if verses.is_empty() {
            return Ok(());
        }
        self.alignments.entry(key).or_default().forward.extend(verses);
        Ok(())
    }

    /// Adds the backward edge `node -> endpoint`. The node must exist and may
    /// not already lead somewhere else.
    pub fn add_backward(&mut self, node: &TargetNode, endpoint: SourceNodeId) -> Result<()> {
        if !self.sources.contains_key(&endpoint) {
            return Err(Error::InvalidInput(format!("unknown source node {endpoint}")));
        }
        let alignment = self
            .alignments
            .get_mut(&AlignmentKey::of(node))
            .filter(|a| a.forward.contains(&node.verse))
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "backward edge from unknown target node ({}, {}, {})",
                    node.concept, node.language, node.verse
                ))
            })?;
        match alignment.backward.get(&node.verse) {
            Some(existing) if *existing != endpoint => Err(Error::ConflictingEdge {
                concept: node.concept.clone(),
                language: node.language.to_string(),
                verse: node.verse.to_string(),
            }),
            Some(_) => Ok(()),
            None => {
                alignment.backward.insert(node.verse.clone(), endpoint);
                Ok(())
            }
        }
    }

    /// Set union with `other`.
    pub fn merge(&mut self, other: BipartiteGraph) -> Result<()> {
        for concept in other.sources.into_values() {
            self.add_source(concept)?;
        }
        for (key, alignment) in other.alignments {
            let mine = self.alignments.entry(key.clone()).or_default();
            mine.forward.extend(alignment.forward);
            for (verse, endpoint) in alignment.backward {
                match mine.backward.get(&verse) {
                    Some(existing) if *existing != endpoint => {
                        return Err(Error::ConflictingEdge {
                            concept: key.concept,
                            language: key.language.to_string(),
                            verse: verse.to_string(),
                        })
                    }
                    _ => {
                        mine.backward.insert(verse, endpoint);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn source(&self, id: &SourceNodeId) -> Option<&Concept> {
        self.sources.get(id)
    }

    pub fn sources(&self) -> impl Iterator<Item = &Concept> {
        self.sources.values()
    }

    pub fn focal_concepts(&self) -> impl Iterator<Item = &Concept> {
        self.sources.values().filter(|c| c.is_focal)
    }

    pub fn focal(&self, name: &str) -> Option<&Concept> {
        self.sources.get(&SourceNodeId::Focal(name.to_owned()))
    }

    pub fn alignments(&self) -> impl Iterator<Item = (&AlignmentKey, &Alignment)> {
        self.alignments.iter()
    }

    /// Alignments of one focal concept, across languages.
    pub fn alignments_of<'a>(&'a self, concept: &'a str) -> impl Iterator<Item = (&'a AlignmentKey, &'a Alignment)> + 'a {
        self.alignments.iter().filter(move |(k, _)| k.concept == concept)
    }

    /// Every forward-edge target node of `concept` with its backward endpoint.
    pub fn paths_from<'a>(&'a self, concept: &'a str) -> impl Iterator<Item = PathStep<'a>> + 'a {
        self.alignments_of(concept).flat_map(|(key, a)| {
            a.forward.iter().map(move |verse| PathStep {
                language: &key.language,
                verse,
                endpoint: a.backward.get(verse),
            })
        })
    }

    pub fn target_nodes(&self) -> impl Iterator<Item = TargetNode> + '_ {
        self.alignments
            .iter()
            .flat_map(|(k, a)| a.forward.iter().map(move |v| k.node(v)))
    }

    pub fn forward_edges(&self) -> impl Iterator<Item = (SourceNodeId, TargetNode)> + '_ {
        self.target_nodes()
            .map(|n| (SourceNodeId::Focal(n.concept.clone()), n))
    }

    pub fn backward_edges(&self) -> impl Iterator<Item = (TargetNode, SourceNodeId)> + '_ {
        self.alignments.iter().flat_map(|(k, a)| {
            a.backward.iter().map(move |(v, s)| (k.node(v), s.clone()))
        })
    }

    pub fn records(&self) -> Vec<GraphRecord> {
        let mut out: Vec<GraphRecord> = self
            .sources
            .values()
            .map(|c| GraphRecord::Source {
                id: c.id(),
                strings: c.strings.iter().cloned().collect(),
            })
            .collect();
        out.extend(self.target_nodes().map(|node| GraphRecord::Target { node }));
        out.extend(
            self.forward_edges()
                .map(|(from, to)| GraphRecord::Forward { from, to }),
        );
        out.extend(
            self.backward_edges()
                .map(|(from, to)| GraphRecord::Backward { from, to }),
        );
        out
    }

    pub fn from_records(records: impl IntoIterator<Item = GraphRecord>) -> Result<Self> {
        let mut sources = Vec::new();
        let mut targets = BTreeSet::new();
        let mut forward = Vec::new();
        let mut backward = Vec::new();
        for r in records {
            match r {
                GraphRecord::Source { id, strings } => sources.push((id, strings)),
                GraphRecord::Target { node } => {
                    targets.insert(node);
                }
                GraphRecord::Forward { from, to } => forward.push((from, to)),
                GraphRecord::Backward { from, to } => backward.push((from, to)),
            }
        }
        let mut g = BipartiteGraph::new();
        for (id, strings) in sources {
            let concept = match id {
                SourceNodeId::Focal(name) => Concept::focal(name, strings)?,
                SourceNodeId::Ngram(s) => {
                    if strings != [s.clone()] {
                        return Err(Error::InvalidInput(format!(
                            "ngram node `{s}` must hold exactly its own string"
                        )));
                    }
                    Concept::ngram(s)
                }
            };
            g.add_source(concept)?;
        }
        for (from, to) in forward {
            if from != SourceNodeId::Focal(to.concept.clone()) || !targets.contains(&to) {
                return Err(Error::InvalidInput(format!(
                    "forward edge {from} -> ({}, {}, {}) has no matching nodes",
                    to.concept, to.language, to.verse
                )));
            }
            g.add_forward(&to.concept, &to.language, &to.strings, [to.verse.clone()])?;
        }
        for (from, to) in backward {
            g.add_backward(&from, to)?;
        }
        if g.target_nodes().count() != targets.len() {
            return Err(Error::InvalidInput(
                "target node without a forward edge".into(),
            ));
        }
        Ok(g)
    }

    /// Line-delimited JSON, one record per node and per edge.
    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for record in self.records() {
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_jsonl()).map_err(|e| Error::io(path, e))
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        Self::read_records(text.as_bytes(), Path::new("<memory>"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_records(BufReader::new(file), path)
    }

    fn read_records(reader: impl BufRead, path: &Path) -> Result<Self> {
        let mut records = Vec::new();
        for line in reader.lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str(&line).map_err(|source| Error::Json {
                path: path.to_owned(),
                source,
            })?;
            records.push(record);
        }
        Self::from_records(records)
    }
}

/// One line of the serialized graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphRecord {
    Source {
        id: SourceNodeId,
        strings: Vec<String>,
    },
    Target {
        #[serde(flatten)]
        node: TargetNode,
    },
    Forward {
        from: SourceNodeId,
        to: TargetNode,
    },
    Backward {
        from: TargetNode,
        to: SourceNodeId,
    },
}
