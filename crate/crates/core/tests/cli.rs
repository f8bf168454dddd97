use std::fs;
use std::path::{Path, PathBuf};

use citerec::cli::run;
use citerec::eval::read_report_file;
use citerec::graph::CitationGraph;
use citerec::synth::{self, TemporalParams};

fn s(p: &Path) -> String {
    p.display().to_string()
}

/// Twelve lettered papers in two loosely linked groups.
fn letters(dir: &Path) -> (PathBuf, PathBuf) {
    let g = CitationGraph::from_edges(
        &[
            ("C", "A"),
            ("C", "B"),
            ("D", "A"),
            ("D", "B"),
            ("E", "A"),
            ("E", "C"),
            ("F", "B"),
            ("F", "D"),
            ("J", "G"),
            ("J", "H"),
            ("K", "G"),
            ("K", "H"),
            ("L", "I"),
            ("L", "J"),
            ("I", "E"),
        ],
        &[],
    );
    let edges = dir.join("edges.tsv");
    g.save_tsv(&edges, None).unwrap();
    (edges, dir.join("nodes.tsv"))
}

fn temporal(dir: &Path) -> (PathBuf, PathBuf) {
    let g = synth::temporal_citation_graph(&TemporalParams {
        first_year: 2000,
        last_year: 2008,
        initial_papers: 40,
        growth: 1.2,
        topics: 3,
        subtopics_per_topic: 2,
        refs: (4, 20),
        ..TemporalParams::default()
    });
    let (e, n) = (dir.join("edges.tsv"), dir.join("nodes.tsv"));
    g.save_tsv(&e, Some(&n)).unwrap();
    (e, n)
}

#[test]
fn sample_cocit_writes_provenance_header() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _) = letters(dir.path());
    let out = dir.path().join("corpus.txt");
    run(["citerec", "sample", "--edges", &s(&edges), "--strategy", "cocit", "--n", "10", "--out", &s(&out)])
        .unwrap();
    let text = fs::read_to_string(&out).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# strategy=cocit n=10"), "{first}");
    // every non-header line is one shuffled reference list
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 10 * 8);
}

#[test]
fn train_then_recommend_excludes_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _) = letters(dir.path());
    let p = |n: &str| dir.path().join(n);
    run(["citerec", "sample", "--edges", &s(&edges), "--strategy", "uniform", "--n", "4", "--t", "8", "--out", &s(&p("c.txt"))])
        .unwrap();
    run([
        "citerec", "train", "--edges", &s(&edges), "--corpus", &s(&p("c.txt")), "--dim", "4",
        "--window", "2", "--epochs", "2", "--out-in", &s(&p("m.in")), "--out-out", &s(&p("m.out")),
    ])
    .unwrap();
    for method in ["simavg", "simwgd", "simref", "citmod", "paperrank", "cf"] {
        let out = p(&format!("{method}.csv"));
        run([
            "citerec", "recommend", "--edges", &s(&edges), "--model-in", &s(&p("m.in")),
            "--model-out", &s(&p("m.out")), "--method", method, "--seeds", "A,B", "--k", "10",
            "--out", &s(&out),
        ])
        .unwrap();
        let csv = fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "rank,paper_id,score");
        assert_eq!(lines.len(), 11, "{method}");
        for (i, l) in lines[1..].iter().enumerate() {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f[0], (i + 1).to_string());
            assert!(f[1] != "A" && f[1] != "B", "{method} returned a seed");
        }
    }
}

#[test]
fn recommend_rejects_unknown_seed_and_missing_model() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _) = letters(dir.path());
    let out = s(&dir.path().join("r.csv"));
    let e = run(["citerec", "recommend", "--edges", &s(&edges), "--method", "cf", "--seeds", "A,ZZ", "--out", &out])
        .unwrap_err();
    assert!(e.to_string().contains("ZZ"));
    let e = run(["citerec", "recommend", "--edges", &s(&edges), "--method", "citmod", "--seeds", "A", "--out", &out])
        .unwrap_err();
    assert!(e.to_string().contains("citmod"));
}

fn evaluate_args(dir: &Path, edges: &Path, nodes: &Path, out: &Path) -> Vec<String> {
    let _ = dir;
    [
        "citerec", "--seed", "5", "evaluate", "--edges", &s(edges), "--nodes", &s(nodes),
        "--methods", "cocit+citmod,uniform+simavg,paperrank,cf,random", "--ratios", "0.1,0.9",
        "--ks", "5,10", "--queries", "15", "--ref-min", "6", "--year-min", "2006", "--year-max",
        "2008", "--n", "2", "--t", "10", "--dim", "8", "--window", "3", "--epochs", "1",
        "--objective", "negative", "--out", &s(out),
    ]
    .map(String::from)
    .to_vec()
}

#[test]
fn evaluate_reports_every_ratio_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, nodes) = temporal(dir.path());
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    run(evaluate_args(dir.path(), &edges, &nodes, &a)).unwrap();
    run(evaluate_args(dir.path(), &edges, &nodes, &b)).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let rows = read_report_file(&a).unwrap();
    for ratio in [0.1, 0.9] {
        let n = rows.iter().filter(|r| r.hidden_ratio == ratio).count();
        assert_eq!(n, 5 * 2, "ratio {ratio}");
    }
    assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.mean_recall) && r.n_queries > 0));

    let plots = dir.path().join("plots");
    run(["citerec", "plotdata", "--report", &s(&a), "--out-dir", &s(&plots)]).unwrap();
    let by_k = fs::read_to_string(plots.join("recall_vs_k.csv")).unwrap();
    assert!(by_k.starts_with("hidden_ratio,k,"));
    assert!(plots.join("recall_vs_ratio.csv").exists());
}

#[test]
fn pipeline_outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, nodes) = temporal(dir.path());
    let p = |n: &str| s(&dir.path().join(n));
    for tag in ["1", "2"] {
        run(["citerec", "ingest", "--edges", &s(&edges), "--nodes", &s(&nodes), "--out", &p(&format!("g{tag}.bin"))])
            .unwrap();
        run([
            "citerec", "slice", "--graph", &p(&format!("g{tag}.bin")), "--year", "2005",
            "--out-edges", &p(&format!("e{tag}.tsv")), "--out-nodes", &p(&format!("n{tag}.tsv")),
        ])
        .unwrap();
        run([
            "citerec", "sample", "--edges", &p(&format!("e{tag}.tsv")), "--strategy", "biased",
            "--n", "2", "--t", "12", "--p", "0.5", "--q", "2", "--out", &p(&format!("c{tag}.txt")),
        ])
        .unwrap();
        run([
            "citerec", "train", "--edges", &p(&format!("e{tag}.tsv")), "--corpus",
            &p(&format!("c{tag}.txt")), "--dim", "6", "--epochs", "1", "--out-in",
            &p(&format!("m{tag}.in")), "--out-out", &p(&format!("m{tag}.out")),
        ])
        .unwrap();
    }
    for f in ["g", "e", "n", "c", "m"] {
        let ext = match f {
            "g" => "bin",
            "e" | "n" => "tsv",
            "c" => "txt",
            _ => "in",
        };
        let a = fs::read(p(&format!("{f}1.{ext}"))).unwrap();
        let b = fs::read(p(&format!("{f}2.{ext}"))).unwrap();
        assert_eq!(a, b, "{f}.{ext} differs");
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, _) = letters(dir.path());
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, format!("edges = {:?}\nstrategy = \"uniform\"\nn = 3\nt = 5\n", s(&edges))).unwrap();
    let out = dir.path().join("c.txt");
    run(["citerec", "--config", &s(&cfg), "sample", "--t", "4", "--out", &s(&out)]).unwrap();
    let head = fs::read_to_string(&out).unwrap();
    let first = head.lines().next().unwrap();
    assert!(first.contains("strategy=uniform") && first.contains("n=3") && first.contains("t=4"), "{first}");

    fs::write(&cfg, "nonsense = 1\n").unwrap();
    assert!(run(["citerec", "--config", &s(&cfg), "sample", "--out", &s(&out)]).is_err());
}

#[test]
fn help_mentions_defaults() {
    for sub in ["sample", "train", "evaluate"] {
        let help = run(["citerec", sub, "--help"]).unwrap_err().to_string();
        assert!(help.contains("[default:"), "{sub} help lacks defaults:\n{help}");
    }
    let help = run(["citerec", "sample", "--help"]).unwrap_err().to_string();
    assert!(help.contains("[default: 10]") && help.contains("[default: 80]"));
}

#[test]
fn malformed_input_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("bad.tsv");
    fs::write(&edges, "A\tB\nC\tD\tE\n").unwrap();
    let e = run(["citerec", "ingest", "--edges", &s(&edges), "--out", &s(&dir.path().join("g.bin"))])
        .unwrap_err()
        .to_string();
    assert!(e.contains('2'), "{e}");
}
