mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

/// A small generated corpus written out as verse files plus manifest and
/// concept list.
struct Project {
    dir: TempDir,
}

impl Project {
    fn new() -> Self {
        let syn = common::generate(&common::Shape { languages: 3, verses: 400, ..common::Shape::default() });
        let dir = tempfile::tempdir().unwrap();
        let mut manifest = format!("source = \"{}\"\n\n[languages]\n", common::SOURCE);
        for code in syn.corpus.languages() {
            let text = syn.corpus.text(code).unwrap();
            let mut lines = String::new();
            for (id, verse) in text.iter() {
                let raw = verse.as_str().split('$').filter(|w| !w.is_empty()).collect::<Vec<_>>().join(" ");
                lines.push_str(&format!("{id}\t{raw}\n"));
            }
            fs::write(dir.path().join(format!("{code}.txt")), lines).unwrap();
            manifest.push_str(&format!("{code} = \"{code}.txt\"\n"));
        }
        fs::write(dir.path().join("manifest.toml"), manifest).unwrap();
        let concepts: String = syn
            .concepts
            .iter()
            .map(|c| format!("{}\t{}\n", c.name, c.strings.iter().cloned().collect::<Vec<_>>().join("\t")))
            .collect();
        fs::write(dir.path().join("concepts.tsv"), concepts).unwrap();
        Project { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, out: &str, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_conceptualizer"))
            .arg("--manifest")
            .arg(self.path("manifest.toml"))
            .arg("--concepts")
            .arg(self.path("concepts.tsv"))
            .arg("--out")
            .arg(self.path(out))
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, out: &str, args: &[&str]) -> String {
        let o = self.run(out, args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    }
}

fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn index_is_reproducible() {
    let p = Project::new();
    p.ok("out", &["index"]);
    let index = p.path("out/index");
    for f in ["eng.tsv", "laa.tsv", "stats.jsonl", "manifest.json"] {
        assert!(index.join(f).is_file(), "missing {f}");
    }
    let before = read(&index.join("laa.tsv"));
    let stats = read(&index.join("stats.jsonl"));
    p.ok("out", &["index"]);
    assert_eq!(read(&index.join("laa.tsv")), before);
    assert_eq!(read(&index.join("stats.jsonl")), stats);
}

#[test]
fn input_errors_exit_with_two() {
    let p = Project::new();
    let o = p.run("out", &["align"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("index"));

    fs::write(p.path("manifest.toml"), "source = \"eng\"\n[languages\n").unwrap();
    assert_eq!(p.run("out", &["index"]).status.code(), Some(2));

    let o = p.run("out", &["index", "--alpha", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(p.run("out", &["no-such-command"]).status.code(), Some(2));
}

#[test]
fn align_resumes_and_ignores_thread_count() {
    let p = Project::new();
    p.ok("one", &["index"]);
    p.ok("one", &["align", "--jobs", "1"]);
    let graph = read(&p.path("one/graph.jsonl"));
    assert!(!graph.is_empty());

    // drop one pair result; the rerun recomputes only that pair
    fs::remove_file(p.path("one/pairs/x2/lab.json")).unwrap();
    let stdout = p.ok("one", &["align", "--jobs", "1"]);
    assert!(stdout.starts_with("1 pairs computed, 14 reused"), "{stdout}");
    assert_eq!(read(&p.path("one/graph.jsonl")), graph);

    p.ok("four", &["index"]);
    p.ok("four", &["align", "--jobs", "4"]);
    assert_eq!(read(&p.path("four/graph.jsonl")), graph);
    assert_eq!(read(&p.path("four/reports.jsonl")), read(&p.path("one/reports.jsonl")));

    // changed parameters cannot reuse stored pairs
    assert_eq!(p.run("one", &["align", "--max-iter", "2"]).status.code(), Some(2));
    let stdout = p.ok("one", &["align", "--max-iter", "2", "--fresh"]);
    assert!(stdout.starts_with("15 pairs computed, 0 reused"), "{stdout}");
}

#[test]
fn analysis_outputs() {
    let p = Project::new();
    p.ok("out", &["index"]);
    p.ok("out", &["align"]);

    p.ok("out", &["field", "--concept", "x1"]);
    let dot = fs::read_to_string(p.path("out/fields/x1.dot")).unwrap();
    assert!(dot.starts_with("digraph") || dot.starts_with("graph"), "{dot}");
    assert!(dot.contains("paths="));

    fs::write(p.path("concreteness.tsv"), "c1\t4.8\nc2\t4.1\nx1\t1.5\nx2\t2.0\nx3\tNA\n").unwrap();
    let stdout = p.ok("out", &["stability", "--concreteness", p.path("concreteness.tsv").to_str().unwrap()]);
    assert!(stdout.contains("(4 concepts, 1 skipped)"), "{stdout}");
    assert!(p.path("out/stability_prediction.json").is_file());
    let tsv = fs::read_to_string(p.path("out/stability.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 6, "{tsv}");

    p.ok("out", &["vectors"]);
    p.ok("out", &["similarity"]);
    let sim = fs::read_to_string(p.path("out/similarity.tsv")).unwrap();
    assert_eq!(sim.lines().count(), 4, "{sim}");

    fs::write(p.path("labels.tsv"), "laa\tnorth\tx\nlab\tnorth\tx\nlac\tsouth\ty\n").unwrap();
    p.ok("out", &["classify", "--labels", p.path("labels.tsv").to_str().unwrap(), "--k", "1"]);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(p.path("out/classification.json")).unwrap()).unwrap();
    assert!(json["1"]["overall"]["accuracy"].is_number(), "{json}");

    p.ok("out", &["report", "--concept", "c1", "--language", "lab"]);
    let md = fs::read_to_string(p.path("out/reports/c1/lab.md")).unwrap();
    assert!(md.starts_with('#'));
}
