use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use commtopo::io::read_labels_csv;
use commtopo::svg::diagram_svg;
use commtopo::tomato::auto_tau;
use commtopo::{
    grid_search, kde_density, knn_graph, nmi, run_pipeline, tomato_cluster, Embedding, Error,
    GridSpec, InputSource, Partition, PlantedPartitionSpec, RunConfig, Tau, TomatoParams,
};

fn write_bridged_cliques(dir: &Path) -> RunConfig {
    let mut edges = String::new();
    for base in [0, 5] {
        for i in 0..5 {
            for j in i + 1..5 {
                edges.push_str(&format!("{} {}\n", base + i, base + j));
            }
        }
    }
    edges.push_str("4 5\n");
    let labels: String = (0..10).map(|i| format!("{i} {}\n", i / 5)).collect();
    fs::write(dir.join("edges.txt"), edges).unwrap();
    fs::write(dir.join("labels.txt"), labels).unwrap();
    RunConfig::new(InputSource::EdgeList {
        path: dir.join("edges.txt"),
        labels: Some(dir.join("labels.txt")),
    })
}

fn planted() -> RunConfig {
    let mut c = RunConfig::new(InputSource::Planted(PlantedPartitionSpec {
        n: 250,
        c: 5,
        p_in: 0.3,
        mu: 0.05,
        seed: 42,
    }));
    c.normalize = Some(true);
    c
}

#[test]
fn bridged_cliques_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = write_bridged_cliques(dir.path());
    config.sigma = 0.5;
    config.k = 4;
    config.tau = Tau::Auto;
    let out = run_pipeline(&config, &dir.path().join("run")).unwrap();
    let r = &out.report;
    assert_eq!(r.tomato_clusters, 2);
    assert_eq!(r.nmi_vs_truth_tomato, Some(1.0));
    assert_eq!(r.nmi_vs_truth_louvain, Some(1.0));
    assert_eq!(r.params.nmi_normalization, "arithmetic mean of entropies");
    assert!(r.params.tau_rule.is_some());

    // the metrics document agrees with the CSVs next to it
    let (_, tomato) = read_labels_csv(&fs::read_to_string(dir.path().join("run/clustering.csv")).unwrap()).unwrap();
    let (_, louv) = read_labels_csv(&fs::read_to_string(dir.path().join("run/louvain.csv")).unwrap()).unwrap();
    assert_eq!(Partition::new(&tomato).community_count(), r.tomato_clusters);
    assert_eq!(Partition::new(&louv).community_count(), r.louvain_communities);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run/metrics.json")).unwrap()).unwrap();
    assert_eq!(json["tomato_clusters"], 2);
    for key in ["nmi_vs_truth_tomato", "nmi_vs_truth_louvain", "nmi_tomato_louvain"] {
        let v = json[key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v), "{key} = {v}");
    }
    for name in ["scatter_tomato.svg", "scatter_louvain.svg", "diagram.svg", "barcode.svg", "knn.txt", "density.csv"] {
        assert!(dir.path().join("run").join(name).exists(), "{name} missing");
    }
}

#[test]
fn disconnected_needs_explicit_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = write_bridged_cliques(dir.path());
    let mut text = fs::read_to_string(dir.path().join("edges.txt")).unwrap();
    text.push_str("10 11\n");
    fs::write(dir.path().join("edges.txt"), text).unwrap();
    config.input = InputSource::EdgeList {
        path: dir.path().join("edges.txt"),
        labels: None,
    };
    config.k = 4;
    let err = run_pipeline(&config, &dir.path().join("a")).unwrap_err();
    assert!(matches!(err, Error::Disconnected { components: 2 }));
    assert!(err.to_string().contains("--largest-component"));
    assert_eq!(err.exit_code(), 3);

    config.largest_component = true;
    let out = run_pipeline(&config, &dir.path().join("b")).unwrap();
    assert_eq!(out.report.node_count, 10);
    assert_eq!(out.report.dropped_nodes, 2);
    assert_eq!(out.report.nmi_vs_truth_tomato, None);
}

#[test]
fn planted_grid_reaches_high_nmi() {
    let result = grid_search(&planted(), &GridSpec::default()).unwrap();
    assert_eq!(result.rows.len(), 4 * 4 * 3);
    let best = result.best_row();
    assert!(best.nmi_vs_truth >= 0.9, "best {best:?}");
    assert_eq!(result.rows.iter().filter(|r| r.best).count(), 1);
    assert!(result.rows.iter().all(|r| r.nmi_vs_truth <= best.nmi_vs_truth));
    // rows come out sigma-major, then tau, then k
    assert_eq!((result.rows[0].sigma, result.rows[0].tau, result.rows[0].k), (0.1, Tau::Auto, 4));
    assert_eq!((result.rows[1].sigma, result.rows[1].k), (0.1, 6));
    assert_eq!(result.rows[3].tau, Tau::Value(0.05));
    let csv = result.to_csv();
    assert_eq!(csv.lines().count(), 49);
    assert!(!csv.contains("runtime"));
}

#[test]
fn singleton_grid() {
    let grid = GridSpec {
        sigmas: vec![0.5],
        taus: vec![Tau::Value(0.1)],
        ks: vec![6],
    };
    let result = grid_search(&planted(), &grid).unwrap();
    assert_eq!(result.rows.len(), 1);
    assert!(result.rows[0].best);
    let cfg = result.best_config(&planted());
    assert_eq!((cfg.sigma, cfg.tau, cfg.k), (0.5, Tau::Value(0.1), 6));
}

#[test]
fn grid_order_does_not_change_best() {
    let a = GridSpec {
        sigmas: vec![0.1, 0.5, 1.0],
        taus: vec![Tau::Auto, Tau::Value(0.0), Tau::Value(0.5)],
        ks: vec![4, 8],
    };
    let b = GridSpec {
        sigmas: vec![1.0, 0.1, 0.5],
        taus: vec![Tau::Value(0.5), Tau::Auto, Tau::Value(0.0)],
        ks: vec![8, 4],
    };
    let ra = grid_search(&planted(), &a).unwrap();
    let rb = grid_search(&planted(), &b).unwrap();
    let key = |r: &commtopo::pipeline::GridRow| (r.sigma, r.tau.to_string(), r.k, r.nmi_vs_truth);
    assert_eq!(key(ra.best_row()), key(rb.best_row()));
}

#[test]
fn grid_requires_ground_truth_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = write_bridged_cliques(dir.path());
    config.input = InputSource::EdgeList {
        path: dir.path().join("edges.txt"),
        labels: None,
    };
    assert!(matches!(grid_search(&config, &GridSpec::default()), Err(Error::Config(_))));
    let empty = GridSpec {
        ks: vec![],
        ..GridSpec::default()
    };
    assert!(matches!(grid_search(&planted(), &empty), Err(Error::Config(_))));
}

fn blobs() -> (Embedding, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    for (label, cx) in [(0usize, 0.0), (1, 6.0)] {
        for _ in 0..200 {
            coords.push([cx + noise.sample(&mut rng), noise.sample(&mut rng)]);
            labels.push(label);
        }
    }
    let emb = Embedding {
        coords,
        method: "points".into(),
        normalized: false,
        seed: None,
        iterations: None,
        degenerate: false,
    };
    (emb, labels)
}

#[test]
fn blob_grid_picks_two_clusters() {
    let (emb, truth) = blobs();
    let truth = Partition::new(&truth);
    let ng = knn_graph(&emb, 10).unwrap();
    let mut best: Option<(f64, usize)> = None;
    for sigma in [0.1, 0.5, 1.0] {
        let d = kde_density(&emb, sigma).unwrap();
        for tau in [0.0, auto_tau(&ng, &d).unwrap()] {
            let (c, _) = tomato_cluster(&ng, &d, &TomatoParams::new(tau).unwrap()).unwrap();
            let score = nmi(&Partition::from(&c), &truth).unwrap();
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, c.cluster_count()));
            }
        }
    }
    assert_eq!(best.unwrap().1, 2);
}

#[test]
fn blob_survivors_drawn_above_finite_points() {
    let (emb, _) = blobs();
    let d = kde_density(&emb, 1.0).unwrap();
    let ng = knn_graph(&emb, 10).unwrap();
    let tau = auto_tau(&ng, &d).unwrap();
    let (_, diagram) = tomato_cluster(&ng, &d, &TomatoParams::new(tau).unwrap()).unwrap();
    assert_eq!(diagram.survivors().count(), 2);
    let svg = diagram_svg(&diagram);
    let ys = |class: &str, attr: &str| -> Vec<f64> {
        svg.lines()
            .filter(|l| l.contains(&format!("class=\"{class}\"")))
            .map(|l| {
                let start = l.find(attr).unwrap() + attr.len();
                let rest = &l[start..];
                let num: String = rest.chars().take_while(|c| c.is_ascii_digit() || *c == '.' || *c == '-').collect();
                num.parse().unwrap()
            })
            .collect()
    };
    // survivor polygons start with their apex: points="x,y ..."
    let survivor_tops: Vec<f64> = svg
        .lines()
        .filter(|l| l.contains("class=\"survivor\""))
        .map(|l| {
            let pts = l.split("points=\"").nth(1).unwrap();
            pts.split(',').nth(1).unwrap().split(' ').next().unwrap().parse().unwrap()
        })
        .collect();
    assert_eq!(survivor_tops.len(), 2);
    let finite = ys("finite", "cy=\"");
    for t in &survivor_tops {
        assert!(finite.iter().all(|y| t < y));
    }
}

#[test]
fn config_rejects_bad_values() {
    assert!(matches!("-0.5".parse::<Tau>(), Err(Error::Config(_))));
    let mut c = planted();
    c.sigma = 0.0;
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(run_pipeline(&c, dir.path()), Err(Error::Param(_))));
    let mut c = planted();
    c.k = 0;
    assert_eq!(run_pipeline(&c, dir.path()).unwrap_err().exit_code(), 2);
}
