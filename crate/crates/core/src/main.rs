use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use conceptualizer::config::{load_concepts, RunConfig};
use conceptualizer::corpus::{load_corpus, LanguageId, Manifest, Normalizer};
use conceptualizer::eval::{self, DiscoveryParams, SampleSizes, SwadeshParams};
use conceptualizer::graph::{Concept, CountThreshold, PassParams};
use conceptualizer::langsim::{knn_family_accuracy, language_vectors, LanguageLabels, VectorSet};
use conceptualizer::measures::{self, ConcretenessTable};
use conceptualizer::pipeline::{atomic_write, AlignOptions, Workspace};
use conceptualizer::{Error, Result};

/// Align concepts across a verse-aligned parallel corpus and analyse the
/// resulting concept graph.
#[derive(Parser, Debug)]
#[command(name = "conceptualizer", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Corpus manifest (TOML); overrides the configuration.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Concept file: `name<TAB>string...` per line.
    #[arg(long, global = true)]
    concepts: Option<PathBuf>,
    /// Comma-separated target languages.
    #[arg(long, global = true, value_delimiter = ',')]
    languages: Option<Vec<LanguageId>>,
    /// Iteration budget per pass.
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Coverage at which a pass stops.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Shortest target-language string.
    #[arg(long, global = true)]
    min_len: Option<usize>,
    /// Longest target-language string.
    #[arg(long, global = true)]
    max_len: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for all sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize the corpus and persist it with index statistics.
    Index,
    /// Run forward and backward passes for every (concept, language) pair.
    Align {
        /// Discard stored pair results instead of resuming.
        #[arg(long)]
        fresh: bool,
    },
    /// Write semantic fields as DOT and JSON.
    Field {
        /// Concepts to export (default: all focal concepts).
        #[arg(long = "concept")]
        names: Vec<String>,
    },
    /// Stability per concept, optionally scored against concreteness ratings.
    Stability {
        /// `concept<TAB>rating` file (ratings 1-5, NA allowed).
        #[arg(long)]
        concreteness: Option<PathBuf>,
        #[arg(long)]
        sigma_threshold: Option<f64>,
    },
    /// Build per-language conceptualization vectors.
    Vectors,
    /// Pairwise cosine similarity between language vectors.
    Similarity,
    /// Nearest-neighbour family (or area) classification.
    Classify {
        /// `language<TAB>family<TAB>area` file.
        #[arg(long)]
        labels: PathBuf,
        /// Neighbour counts.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        k: Vec<usize>,
        /// Classify by area instead of family.
        #[arg(long)]
        area: bool,
        /// Only report labels with more than this many languages.
        #[arg(long, default_value_t = 0)]
        min_members: usize,
    },
    /// Evaluation against gold lexicons and external aligners.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Markdown annotation report for one (concept, language) pair.
    Report {
        #[arg(long)]
        concept: String,
        #[arg(long)]
        language: LanguageId,
        #[arg(long, default_value_t = 2)]
        true_positives: usize,
        #[arg(long, default_value_t = 2)]
        false_positives: usize,
        #[arg(long, default_value_t = 3)]
        false_negatives: usize,
    },
    /// Propose focal concepts from the source text.
    #[command(subcommand)]
    Discover(DiscoverCommand),
}

#[derive(Subcommand, Debug)]
enum EvalCommand {
    /// Partial, strict and relaxed recall of forward-pass strings.
    Recall {
        /// `concept<TAB>language<TAB>translation` file.
        #[arg(long)]
        gold: PathBuf,
    },
    /// Match / overlap / no-overlap / no-translation counts.
    Categories {
        /// `concept<TAB>language<TAB>translation` file.
        #[arg(long)]
        reference: PathBuf,
    },
    /// Verse coverage of external aligner proposals for one concept.
    Coverage {
        #[arg(long)]
        concept: String,
        /// `language<TAB>word<TAB>frequency` file; default: the graph's own strings.
        #[arg(long)]
        proposals: Option<PathBuf>,
        /// Drop proposals at or below this frequency; values below 1 are a
        /// fraction of the concept's verses.
        #[arg(long, default_value_t = 0.0)]
        min_freq: f64,
    },
}

#[derive(Subcommand, Debug)]
enum DiscoverCommand {
    /// Filter a word list by frequency in the later books and overall.
    Swadesh {
        /// One word per line.
        #[arg(long)]
        words: PathBuf,
        #[arg(long, default_value_t = 5)]
        min_late: usize,
        #[arg(long, default_value_t = 500)]
        max_total: usize,
    },
    /// Keep source strings that a one-round forward pass covers well in
    /// many sampled languages.
    Bible {
        #[arg(long, default_value_t = 12)]
        sample: usize,
        /// Languages always in the sample.
        #[arg(long, value_delimiter = ',')]
        include: Vec<LanguageId>,
        /// Only test strings in more than this many source verses.
        #[arg(long, default_value_t = 0)]
        min_verses: usize,
    },
}

struct Ctx {
    cfg: RunConfig,
    params: PassParams,
    ws: Workspace,
}

impl Ctx {
    fn new(g: &Global) -> Result<Self> {
        let mut cfg = match &g.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if g.manifest.is_some() {
            cfg.manifest = g.manifest.clone();
        }
        if g.concepts.is_some() {
            cfg.concepts = g.concepts.clone();
        }
        if g.languages.is_some() {
            cfg.languages = g.languages.clone();
        }
        if let Some(o) = &g.out {
            cfg.out = o.clone();
        }
        if let Some(s) = g.seed {
            cfg.seed = s;
        }
        if g.jobs.is_some() {
            cfg.jobs = g.jobs;
        }
        let p = &mut cfg.pass;
        p.max_iterations = g.max_iter.or(p.max_iterations);
        p.alpha = g.alpha.or(p.alpha);
        p.target_min_len = g.min_len.or(p.target_min_len);
        p.target_max_len = g.max_len.or(p.target_max_len);
        let params = cfg.pass.params()?;
        if let Some(j) = cfg.jobs {
            if j == 0 {
                return Err(Error::InvalidParameter("--jobs must be at least 1".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build_global()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        }
        let ws = Workspace::new(&cfg.out);
        Ok(Ctx { cfg, params, ws })
    }

    fn concepts(&self) -> Result<Vec<Concept>> {
        let path = self
            .cfg
            .concepts
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("no concept file; pass --concepts".into()))?;
        let concepts = load_concepts(path)?;
        if concepts.is_empty() {
            return Err(Error::InvalidInput(format!("{}: no concepts", path.display())));
        }
        Ok(concepts)
    }

    /// Concept names from the concept file if given, else the graph's.
    fn concept_names(&self, g: &conceptualizer::graph::BipartiteGraph) -> Result<Vec<String>> {
        if self.cfg.concepts.is_some() {
            return Ok(self.concepts()?.into_iter().map(|c| c.name).collect());
        }
        Ok(g.focal_concepts().map(|c| c.name.clone()).collect())
    }

    fn manifest(&self) -> Result<Manifest> {
        let path = self
            .cfg
            .manifest
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("no corpus manifest; pass --manifest".into()))?;
        Manifest::load(path)
    }

    fn write(&self, rel: impl AsRef<Path>, content: &str) -> Result<PathBuf> {
        let path = self.cfg.out.join(rel);
        atomic_write(&path, content.as_bytes())?;
        Ok(path)
    }

    fn write_json<T: serde::Serialize>(&self, rel: &str, value: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(value).expect("serializable");
        s.push('\n');
        self.write(rel, &s)
    }
}

fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx::new(&cli.global)?;
    match cli.command {
        Command::Index => {
            let m = ctx.manifest()?;
            let corpus = load_corpus(&m.source, &m.languages, &m.normalizer())?;
            let stats = ctx.ws.write_index(corpus, ctx.cfg.index_max_len)?;
            for s in stats {
                println!("{}\t{} verses", s.language, s.verses);
            }
        }
        Command::Align { fresh } => {
            let corpus = ctx.ws.load_index()?;
            let concepts = ctx.concepts()?;
            let languages = ctx.cfg.target_languages(corpus.target_languages())?;
            let opts = AlignOptions {
                params: ctx.params.clone(),
                fresh,
            };
            let s = ctx.ws.align(&corpus, &concepts, &languages, &opts)?;
            let failed = s.reports.iter().filter(|r| r.error.is_some()).count();
            println!(
                "{} pairs computed, {} reused, {failed} failed; graph at {}",
                s.computed,
                s.reused,
                ctx.ws.graph_path().display()
            );
        }
        Command::Field { names } => {
            let g = ctx.ws.load_graph()?;
            let names = if names.is_empty() { ctx.concept_names(&g)? } else { names };
            for name in names {
                let field = measures::semantic_field(&g, &name)?;
                if field.entries.is_empty() {
                    log::warn!("`{name}` has an empty semantic field; skipped");
                    continue;
                }
                ctx.write(format!("fields/{name}.dot"), &measures::field_to_dot(&field))?;
                let entries: Vec<_> = field
                    .sorted()
                    .into_iter()
                    .map(|(id, e)| serde_json::json!({"node": id, "path_count": e.path_count, "language_count": e.language_count}))
                    .collect();
                let path = ctx.write_json(&format!("fields/{name}.json"), &serde_json::json!({"focal": name, "entries": entries}))?;
                println!("{}", path.with_extension("dot").display());
            }
        }
        Command::Stability { concreteness, sigma_threshold } => {
            let g = ctx.ws.load_graph()?;
            let mut scores = Vec::new();
            for name in ctx.concept_names(&g)? {
                match measures::stability(&g, &name)? {
                    Some(s) => scores.push(s),
                    None => log::warn!("`{name}` has no forward edges; excluded"),
                }
            }
            let table = concreteness.as_deref().map(ConcretenessTable::load).transpose()?;
            let tsv = measures::stability_tsv(&scores, table.as_ref(), &ctx.cfg.concreteness)?;
            let path = ctx.write("stability.tsv", &tsv)?;
            println!("{}", path.display());
            if let Some(table) = table {
                let threshold = sigma_threshold.unwrap_or(ctx.cfg.sigma_threshold);
                let r = measures::stability_prediction_report(&scores, &table, threshold, &ctx.cfg.concreteness)?;
                println!(
                    "accuracy {:.2}  precision {:.2}  recall {:.2}  F1 {:.2}  ({} concepts, {} skipped)",
                    r.accuracy,
                    r.precision,
                    r.recall,
                    r.f1,
                    r.evaluated,
                    r.skipped.len()
                );
                ctx.write_json("stability_prediction.json", &r)?;
            }
        }
        Command::Vectors => {
            let g = ctx.ws.load_graph()?;
            let names = ctx.concept_names(&g)?;
            let langs = ctx.cfg.languages.as_ref().map(|ls| ls.iter().cloned().collect::<BTreeSet<_>>());
            let lv = language_vectors(&g, &names, langs.as_ref())?;
            if !lv.dropped.is_empty() {
                log::warn!("{} languages lack some concept and were dropped", lv.dropped.len());
            }
            let path = ctx.write("vectors.tsv", &lv.set.to_tsv())?;
            println!("{} languages × {} dimensions: {}", lv.set.vectors.len(), lv.set.columns.len(), path.display());
        }
        Command::Similarity => {
            let set = load_vectors(&ctx)?;
            let path = ctx.write("similarity.tsv", &set.similarity_tsv())?;
            println!("{}", path.display());
        }
        Command::Classify { labels, k, area, min_members } => {
            let set = load_vectors(&ctx)?;
            let labels = LanguageLabels::load(&labels)?;
            let labels = if area { labels.area } else { labels.family };
            let mut sizes: BTreeMap<&String, usize> = BTreeMap::new();
            for (l, lab) in &labels {
                if set.vectors.contains_key(l) {
                    *sizes.entry(lab).or_default() += 1;
                }
            }
            let evaluate: BTreeSet<String> = sizes
                .into_iter()
                .filter(|(_, n)| *n > min_members)
                .map(|(l, _)| l.clone())
                .collect();
            let mut out = BTreeMap::new();
            for k in k {
                let r = knn_family_accuracy(&set, &labels, k, Some(&evaluate))?;
                println!("k={k}\toverall {:.3}", r.overall.accuracy);
                out.insert(k.to_string(), r);
            }
            ctx.write_json("classification.json", &out)?;
        }
        Command::Eval(cmd) => eval_command(&ctx, cmd)?,
        Command::Report { concept, language, true_positives, false_positives, false_negatives } => {
            let corpus = ctx.ws.load_index()?;
            let g = ctx.ws.load_graph()?;
            let sizes = SampleSizes {
                true_positive: true_positives,
                false_positive: false_positives,
                false_negative: false_negatives,
            };
            let md = eval::annotation_report(&corpus, &g, &concept, &language, sizes, ctx.cfg.seed)?;
            let path = ctx.write(format!("reports/{concept}/{language}.md"), &md)?;
            println!("{}", path.display());
        }
        Command::Discover(DiscoverCommand::Swadesh { words, min_late, max_total }) => {
            let corpus = ctx.ws.load_index()?;
            let text = std::fs::read_to_string(&words).map_err(|e| Error::Io { path: words.clone(), source: e })?;
            let list: Vec<String> = text.lines().map(str::trim).filter(|w| !w.is_empty() && !w.starts_with('#')).map(str::to_owned).collect();
            let params = SwadeshParams { min_late, max_total, ..SwadeshParams::default() };
            let normalizer = ctx.manifest().map(|m| m.normalizer()).unwrap_or_default();
            let found = eval::swadesh_candidates(&corpus, &list, &normalizer, &params);
            let mut tsv = String::from("word\tlate\ttotal\taccepted\n");
            for w in &found {
                tsv.push_str(&format!("{}\t{}\t{}\t{}\n", w.word, w.late_frequency, w.total_frequency, w.accepted));
            }
            let path = ctx.write("discover/swadesh.tsv", &tsv)?;
            println!("{} of {} accepted: {}", found.iter().filter(|w| w.accepted).count(), found.len(), path.display());
        }
        Command::Discover(DiscoverCommand::Bible { sample, include, min_verses }) => {
            let corpus = ctx.ws.load_index()?;
            let params = DiscoveryParams { sample_size: sample, include, min_verses, ..DiscoveryParams::default() };
            let found = eval::discover_strings(&corpus, &params, &ctx.params, ctx.cfg.seed)?;
            let mut tsv = String::from("string\tlanguages\n");
            for d in &found {
                tsv.push_str(&format!("{}\t{}\n", d.string, d.languages));
            }
            let path = ctx.write("discover/strings.tsv", &tsv)?;
            println!("{} strings kept: {}", found.len(), path.display());
        }
    }
    Ok(())
}

fn load_vectors(ctx: &Ctx) -> Result<VectorSet> {
    let path = ctx.cfg.out.join("vectors.tsv");
    if !path.is_file() {
        return Err(Error::InvalidInput(format!(
            "no vectors at {}; run `conceptualizer vectors` first",
            path.display()
        )));
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    VectorSet::from_tsv(&text, &path)
}

fn eval_command(ctx: &Ctx, cmd: EvalCommand) -> Result<()> {
    let normalizer = || ctx.manifest().map(|m| m.normalizer()).unwrap_or_else(|_| Normalizer::default());
    match cmd {
        EvalCommand::Recall { gold } => {
            let gold = eval::load_gold(&gold, &normalizer())?;
            let proposed = eval::proposals_from_reports(&ctx.ws.load_reports()?);
            let r = eval::evaluate_recall(&proposed, &gold)?;
            println!(
                "partial {:.2}  strict {:.2}  relaxed {:.2}  FP {:.2}  ({} pairs)",
                100.0 * r.mean.partial,
                100.0 * r.mean.strict,
                100.0 * r.mean.relaxed,
                r.mean.false_positives,
                r.evaluated
            );
            ctx.write_json("eval/recall.json", &r)?;
        }
        EvalCommand::Categories { reference } => {
            let reference = eval::load_gold(&reference, &normalizer())?;
            let proposed = eval::proposals_from_reports(&ctx.ws.load_reports()?);
            let counts = eval::category_counts(&proposed, &reference);
            for (c, n) in &counts {
                println!("{}\t{n}", serde_json::to_string(c).expect("serializable").trim_matches('"'));
            }
            ctx.write_json("eval/categories.json", &counts)?;
        }
        EvalCommand::Coverage { concept, proposals, min_freq } => {
            let corpus = ctx.ws.load_index()?;
            let focal = match ctx.concepts() {
                Ok(cs) => cs.into_iter().find(|c| c.name == concept),
                Err(_) => ctx.ws.load_graph()?.focal(&concept).cloned(),
            }
            .ok_or_else(|| Error::UnknownConcept(concept.clone()))?;
            let proposals = match proposals {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
                    eval::parse_proposals(&text, &p)?
                }
                None => ctx
                    .ws
                    .load_reports()?
                    .into_iter()
                    .filter(|r| r.concept == concept && r.error.is_none())
                    .map(|r| (r.language, r.forward.strings.into_iter().map(|s| (s, u64::MAX)).collect()))
                    .collect(),
            };
            let filter = if min_freq < 1.0 && min_freq > 0.0 {
                CountThreshold::Fraction(min_freq)
            } else if min_freq >= 0.0 && min_freq.fract() == 0.0 {
                CountThreshold::Absolute(min_freq as usize)
            } else {
                return Err(Error::InvalidParameter(format!("--min-freq {min_freq}: expected a fraction below 1 or a whole count")));
            };
            let languages = ctx.cfg.target_languages(corpus.target_languages())?;
            let r = eval::aligner_coverage_compare(&corpus, &focal, &proposals, filter, &languages)?;
            println!(
                "global {:.3}  average {:.3}  translations {:.2}  ({} languages, {} skipped)",
                r.global,
                r.average,
                r.avg_translations,
                r.per_language.len(),
                r.skipped.len()
            );
            ctx.write_json(&format!("eval/coverage_{concept}.json"), &r)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 1 })
        }
    }
}
