use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn commtopo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commtopo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path) {
    let out = commtopo(&[
        "generate", "--n", "120", "--c", "3", "--p-in", "0.3", "--mu", "0.05", "--seed", "4", "--out",
        path(dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn generate_then_cluster_lfr() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    generate(&data);
    let network = fs::read_to_string(data.join("network.dat")).unwrap();
    assert!(network.lines().next().unwrap().split('\t').count() == 2);
    assert_eq!(fs::read_to_string(data.join("community.dat")).unwrap().lines().count(), 120);

    let run = dir.path().join("run");
    let out = commtopo(&["cluster", "--lfr-dir", path(&data), "--sigma", "0.1", "--out", path(&run)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("NMI vs truth"), "{stdout}");
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run.join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["nmi_vs_truth_tomato"].as_f64().unwrap() > 0.9);
}

#[test]
fn persisted_config_reproduces_every_file() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let out = commtopo(&[
        "cluster", "--planted", "n=90,c=3,p_in=0.4,mu=0.1,seed=2", "--method", "spring", "--seed", "8",
        "--sigma", "0.1", "--tau", "0.5", "--out", path(&first),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let second = dir.path().join("second");
    let config = first.join("config.json");
    let out = commtopo(&["cluster", "--config", path(&config), "--out", path(&second)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files = 0;
    for entry in fs::read_dir(&first).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name();
        assert_eq!(
            fs::read(entry.path()).unwrap(),
            fs::read(second.join(&name)).unwrap(),
            "{name:?} differs"
        );
        files += 1;
    }
    assert_eq!(files, 13);
}

#[test]
fn disconnected_graph_exits_with_hint() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.txt");
    fs::write(&edges, "0 1\n1 2\n2 0\n3 4\n4 5\n5 3\n5 6\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = commtopo(&["cluster", "--input", path(&edges), "--k", "2", "--out", path(&out_dir)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--largest-component"));

    let out = commtopo(&[
        "cluster", "--input", path(&edges), "--k", "2", "--largest-component", "--out", path(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("o");
    // usage errors
    assert_eq!(commtopo(&["cluster", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        commtopo(&["cluster", "--planted", "n=10,c=2,p_in=1,mu=0", "--tau", "soon", "--out", path(&out_dir)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        commtopo(&["cluster", "--planted", "n=10,c=2,p_in=1,mu=0", "--method", "umap", "--out", path(&out_dir)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        commtopo(&[
            "cluster", "--planted", "n=10,c=2,p_in=1,mu=0", "--method", "spring", "--normalize", "--out",
            path(&out_dir)
        ])
        .status
        .code(),
        Some(2)
    );
    // data errors
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0 1\n1 x y\nnope\n").unwrap();
    let out = commtopo(&["embed", "--input", path(&bad), "--out", path(&out_dir)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&out.stderr));
    let missing = dir.path().join("missing.txt");
    assert_eq!(
        commtopo(&["embed", "--input", path(&missing), "--out", path(&out_dir)]).status.code(),
        Some(3)
    );
}

#[test]
fn grid_writes_table_and_best_config() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    generate(&data);
    let out_dir = dir.path().join("grid");
    let out = commtopo(&[
        "grid", "--lfr-dir", path(&data), "--sigma", "0.1,0.5", "--tau", "auto,0.1", "--k", "6", "--out",
        path(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(out_dir.join("grid.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert_eq!(table.lines().filter(|l| l.ends_with(",1")).count(), 1);
    let best = fs::read_to_string(out_dir.join("best_config.json")).unwrap();
    let rerun = dir.path().join("rerun");
    fs::write(dir.path().join("best.json"), best).unwrap();
    let out = commtopo(&["cluster", "--config", path(&dir.path().join("best.json")), "--out", path(&rerun)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn embed_compare_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    generate(&data);
    let run = dir.path().join("run");
    assert!(commtopo(&["cluster", "--lfr-dir", path(&data), "--sigma", "0.1", "--out", path(&run)])
        .status
        .success());

    let emb_dir = dir.path().join("emb");
    let out = commtopo(&["embed", "--lfr-dir", path(&data), "--out", path(&emb_dir)]);
    assert!(out.status.success());
    assert_eq!(
        fs::read(emb_dir.join("embedding.csv")).unwrap(),
        fs::read(run.join("embedding.csv")).unwrap()
    );

    let out = commtopo(&[
        "compare",
        "--input",
        path(&data.join("network.dat")),
        "--a",
        path(&run.join("clustering.csv")),
        "--b",
        path(&run.join("clustering.csv")),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["nmi"], 1.0);
    assert_eq!(report["modularity_a"], report["modularity_b"]);

    let plots = dir.path().join("plots");
    let out = commtopo(&[
        "plot",
        "--embedding",
        path(&run.join("embedding.csv")),
        "--labels",
        path(&run.join("clustering.csv")),
        path(&run.join("louvain.csv")),
        "--diagram",
        path(&run.join("diagram.csv")),
        "--out",
        path(&plots),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["scatter_clustering.svg", "scatter_louvain.svg", "diagram.svg", "barcode.svg"] {
        let svg = fs::read_to_string(plots.join(name)).unwrap();
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"), "{name}");
    }
    assert_eq!(
        fs::read(plots.join("diagram.svg")).unwrap(),
        fs::read(run.join("diagram.svg")).unwrap()
    );
}
