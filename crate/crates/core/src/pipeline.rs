//! On-disk artifacts: the persisted index and resumable alignment runs.
//!
//! Layout under the output directory:
//!
//! ```text
//! index/manifest.json        source, languages, n-gram length
//! index/<lang>.tsv           normalized verses
//! index/stats.jsonl          one IndexStats per language
//! pairs/params.json          pass parameters the pair files were made with
//! pairs/<concept>/<lang>.json  one finished (concept, language) run
//! graph.jsonl, reports.jsonl merged results
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{IndexStats, IndexedCorpus, LanguageId, LanguageText, ParallelCorpus};
use crate::error::{Error, Result};
use crate::graph::{run_pair, BipartiteGraph, Concept, GraphRecord, PassParams, RunReport};

/// Writes `bytes` to a sibling temporary file and renames it into place,
/// so readers never see a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexManifest {
    pub source: LanguageId,
    pub languages: Vec<LanguageId>,
    pub max_len: usize,
}

/// Paths of the artifacts under one output directory.
#[derive(Clone, Debug)]
pub struct Workspace {
    pub root: PathBuf,
}

impl Workspace {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Workspace { root: root.into() }
    }

    pub fn index_dir(&self) -> PathBuf {
        self.root.join("index")
    }

    pub fn pairs_dir(&self) -> PathBuf {
        self.root.join("pairs")
    }

    pub fn pair_path(&self, concept: &str, language: &LanguageId) -> PathBuf {
        self.pairs_dir().join(concept).join(format!("{language}.json"))
    }

    pub fn graph_path(&self) -> PathBuf {
        self.root.join("graph.jsonl")
    }

    pub fn reports_path(&self) -> PathBuf {
        self.root.join("reports.jsonl")
    }

    /// Persists normalized texts and per-language statistics.
    pub fn write_index(&self, corpus: ParallelCorpus, max_len: usize) -> Result<Vec<IndexStats>> {
        let dir = self.index_dir();
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let (source, texts) = corpus.into_texts();
        for (l, text) in &texts {
            text.write_marked(&dir.join(format!("{l}.tsv")))?;
        }
        let manifest = IndexManifest {
            source: source.clone(),
            languages: texts.keys().cloned().collect(),
            max_len,
        };
        let indexed = IndexedCorpus::build(ParallelCorpus::new(source, texts.into_values())?, max_len);
        let stats: Vec<IndexStats> = indexed
            .languages()
            .map(|l| indexed.index(l).map(|i| i.stats()))
            .collect::<Result<_>>()?;
        let mut lines = String::new();
        for s in &stats {
            lines.push_str(&serde_json::to_string(s).expect("serializable"));
            lines.push('\n');
        }
        atomic_write(&dir.join("stats.jsonl"), lines.as_bytes())?;
        write_json(&dir.join("manifest.json"), &manifest)?;
        Ok(stats)
    }

    pub fn has_index(&self) -> bool {
        self.index_dir().join("manifest.json").is_file()
    }

    /// Reloads the persisted texts and rebuilds the occurrence tables.
    pub fn load_index(&self) -> Result<IndexedCorpus> {
        if !self.has_index() {
            return Err(Error::InvalidInput(format!(
                "no index under {}; run `conceptualizer index` first",
                self.root.display()
            )));
        }
        let dir = self.index_dir();
        let m: IndexManifest = read_json(&dir.join("manifest.json"))?;
        let texts = m
            .languages
            .par_iter()
            .map(|l| LanguageText::read_marked(l.clone(), &dir.join(format!("{l}.tsv"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(IndexedCorpus::build(ParallelCorpus::new(m.source, texts)?, m.max_len))
    }
}

/// One finished (concept, language) run as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairArtifact {
    pub report: RunReport,
    pub records: Vec<GraphRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RunFingerprint {
    params: PassParams,
    concepts: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Clone, Debug)]
pub struct AlignOptions {
    pub params: PassParams,
    /// Discard earlier pair results instead of resuming.
    pub fresh: bool,
}

#[derive(Debug)]
pub struct AlignSummary {
    pub computed: usize,
    pub reused: usize,
    pub graph: BipartiteGraph,
    pub reports: Vec<RunReport>,
}

impl Workspace {
    /// Runs every (concept, language) pair without a stored result, on the
    /// current rayon pool, then merges all requested pairs into
    /// `graph.jsonl` and `reports.jsonl`.
    ///
    /// Stored results are reused only if they were made with the same pass
    /// parameters and concept strings; otherwise this fails unless `fresh`.
    pub fn align(
        &self,
        corpus: &IndexedCorpus,
        concepts: &[Concept],
        languages: &BTreeSet<LanguageId>,
        opts: &AlignOptions,
    ) -> Result<AlignSummary> {
        opts.params.validate()?;
        let pairs_dir = self.pairs_dir();
        if opts.fresh && pairs_dir.exists() {
            fs::remove_dir_all(&pairs_dir).map_err(|e| Error::io(&pairs_dir, e))?;
        }
        let fp_path = pairs_dir.join("params.json");
        let mut fingerprint = RunFingerprint {
            params: opts.params.clone(),
            concepts: BTreeMap::new(),
        };
        if fp_path.exists() {
            let stored: RunFingerprint = read_json(&fp_path)?;
            if stored.params != opts.params {
                return Err(Error::InvalidInput(format!(
                    "{} holds results made with different pass parameters; rerun with --fresh",
                    pairs_dir.display()
                )));
            }
            for c in concepts {
                if stored.concepts.get(&c.name).is_some_and(|s| *s != c.strings) {
                    return Err(Error::InvalidInput(format!(
                        "concept `{}` changed since its stored results; rerun with --fresh",
                        c.name
                    )));
                }
            }
            fingerprint.concepts = stored.concepts;
        }
        for c in concepts {
            fingerprint.concepts.insert(c.name.clone(), c.strings.clone());
        }
        write_json(&fp_path, &fingerprint)?;

        let todo: Vec<(&Concept, &LanguageId)> = concepts
            .iter()
            .flat_map(|c| languages.iter().map(move |l| (c, l)))
            .filter(|(c, l)| !self.pair_path(&c.name, l).is_file())
            .collect();
        let reused = concepts.len() * languages.len() - todo.len();
        todo.par_iter().try_for_each(|&(c, l)| {
            let artifact = match run_pair(corpus, c, l, &opts.params) {
                Ok((g, report)) => PairArtifact {
                    report,
                    records: g.records(),
                },
                Err(e) => {
                    log::warn!("{} / {l}: {e}", c.name);
                    PairArtifact {
                        report: RunReport::failed(&c.name, l, &e),
                        records: Vec::new(),
                    }
                }
            };
            log::info!("{} / {l}: {} target strings", c.name, artifact.report.t_size);
            write_json(&self.pair_path(&c.name, l), &artifact)
        })?;

        let mut graph = BipartiteGraph::new();
        let mut reports = Vec::new();
        for c in concepts {
            graph.add_source(c.clone())?;
            for l in languages {
                let a: PairArtifact = read_json(&self.pair_path(&c.name, l))?;
                graph.merge(BipartiteGraph::from_records(a.records)?)?;
                reports.push(a.report);
            }
        }
        graph.save(&self.graph_path())?;
        let mut lines = String::new();
        for r in &reports {
            lines.push_str(&serde_json::to_string(r).expect("serializable"));
            lines.push('\n');
        }
        atomic_write(&self.reports_path(), lines.as_bytes())?;
        Ok(AlignSummary {
            computed: todo.len(),
            reused,
            graph,
            reports,
        })
    }

    pub fn load_graph(&self) -> Result<BipartiteGraph> {
        let path = self.graph_path();
        if !path.is_file() {
            return Err(Error::InvalidInput(format!(
                "no graph at {}; run `conceptualizer align` first",
                path.display()
            )));
        }
        BipartiteGraph::load(&path)
    }

    pub fn load_reports(&self) -> Result<Vec<RunReport>> {
        let path = self.reports_path();
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                serde_json::from_str(l).map_err(|source| Error::Json {
                    path: path.clone(),
                    source,
                })
            })
            .collect()
    }
}
