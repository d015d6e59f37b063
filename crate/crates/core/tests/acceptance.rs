//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use trajclust::evaluation::{
    adjusted_rand_index, inertia, interclass_overlap, intraclass_overlap, Endpoint,
};
use trajclust::hac::{agglomerate, distance_matrix, CondensedMatrix, Linkage, DEFAULT_MAX_N};
use trajclust::modularity::{build_hierarchy, greedy_merge, modularity, HierarchyParams};
use trajclust::similarity::{build_similarity_graph, SimilarityModel, SimilarityScheme};
use trajclust::synth::{generate, planted_grid, Corridors, Generated, GeneratorParams};
use trajclust::weighting::{corpus_stats, compute_profile, WeightingScheme};
use trajclust::{Partition, SimilarityGraph};

const ACCEPTANCE_SEED: u64 = 20120425;
const FORMULA_TOL: f64 = 1e-9;
const GRAPH_TOL: f64 = 1e-9;
const HUYGENS_REL_TOL: f64 = 1e-6;
const ARI_THRESHOLD: f64 = 0.95;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// 1. Weights, cosine similarities and both overlap metrics against
///    brute-force reimplementations on 50 random instances.
fn formula_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(ACCEPTANCE_SEED);
    let mut checked = 0usize;
    for instance in 0..50 {
        let n = rng.gen_range(2..=100);
        let edges = rng.gen_range(3..=40);
        let ts = common::random_dataset(&mut rng, n, edges);
        let net = ts.network();

        let dense = common::dense_weights(&ts, false);
        let stats = corpus_stats(&ts);
        let profiles: Vec<_> = ts
            .trajectories()
            .iter()
            .map(|t| compute_profile(t, &stats, WeightingScheme::Spatial, net).unwrap())
            .collect();
        for (i, p) in profiles.iter().enumerate() {
            for (e, &want) in dense[i].iter().enumerate() {
                ensure(close(p.get(e), want, FORMULA_TOL), || {
                    format!("instance {instance}: weight of edge {e} in trajectory {i}: {} vs {want}", p.get(e))
                })?;
                checked += 1;
            }
        }

        let model = SimilarityModel::new(&ts, SimilarityScheme::Spatial).unwrap();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j && dense[i].iter().all(|&w| w == 0.0) {
                    0.0
                } else {
                    common::dense_cosine(&dense[i], &dense[j])
                };
                ensure(close(model.similarity(i, j), want, FORMULA_TOL), || {
                    format!("instance {instance}: similarity({i},{j}) {} vs {want}", model.similarity(i, j))
                })?;
                checked += 1;
            }
        }

        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..5)).collect();
        let p = Partition::from_labels(&labels);
        let intra = intraclass_overlap(&p, &ts).unwrap();
        let inter = interclass_overlap(&p, &ts).unwrap();
        let want_intra = common::naive_intraclass(&ts, &labels);
        let want_inter = common::naive_interclass(&ts, &labels);
        ensure(close(intra, want_intra, FORMULA_TOL * want_intra.max(1.0)), || {
            format!("instance {instance}: intraclass {intra} vs {want_intra}")
        })?;
        ensure(close(inter, want_inter, FORMULA_TOL * want_inter.max(1.0)), || {
            format!("instance {instance}: interclass {inter} vs {want_inter}")
        })?;
        checked += 2;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} values within {FORMULA_TOL:e} in {elapsed:.2?}"))
}

fn compare_graphs(g: &SimilarityGraph, oracle: &[(usize, usize, f64)]) -> Result<(), String> {
    let got: Vec<_> = g.edges().collect();
    ensure(got.len() == oracle.len(), || {
        format!("{} edges vs {} brute force", got.len(), oracle.len())
    })?;
    for (a, b) in got.iter().zip(oracle) {
        ensure(a.0 == b.0 && a.1 == b.1 && close(a.2, b.2, GRAPH_TOL), || {
            format!("edge {a:?} vs {b:?}")
        })?;
    }
    Ok(())
}

/// 2. Inverted-index graph equals the all-pairs graph for n ≤ 200, including
///    the zero-IDF shared segment case.
fn graph_equivalence() -> Outcome {
    let mut rng = common::rng(ACCEPTANCE_SEED + 1);
    let mut graphs = 0;
    for _ in 0..15 {
        let n = rng.gen_range(2..=200);
        let edges = rng.gen_range(5..=120);
        let ts = common::random_dataset(&mut rng, n, edges);
        for scheme in ["spatial", "classic", "jaccard"] {
            let g = build_similarity_graph(&ts, scheme.parse().unwrap()).unwrap();
            compare_graphs(&g, &common::brute_force_graph(&ts, scheme)).map_err(|e| format!("{scheme}: {e}"))?;
            graphs += 1;
        }
    }

    // T1 = {e1, e2}, T2 = {e2}: the only shared segment has IDF 0.
    let net = Arc::new(trajclust::network::grid_network(1, 3, 100.0).unwrap());
    let e = |id: &str| net.edge_idx(id).unwrap();
    let t1 = trajclust::Trajectory::from_edges("T1", &[e("h000_000_f"), e("h000_001_f")], &net, 10.0);
    let t2 = trajclust::Trajectory::from_edges("T2", &[e("h000_001_f")], &net, 10.0);
    let ts = trajclust::TrajectorySet::new(net, vec![t1, t2], true).unwrap();
    let g = build_similarity_graph(&ts, SimilarityScheme::Spatial).unwrap();
    ensure(g.node_count() == 2 && g.edge_count() == 0, || {
        format!("zero-IDF case produced {} edges", g.edge_count())
    })?;
    compare_graphs(&g, &common::brute_force_graph(&ts, "spatial"))?;
    Ok(format!("{graphs} random graphs identical within {GRAPH_TOL:e}; zero-IDF pair has no edge"))
}

/// 3. Modularity against exhaustive enumeration on graphs with ≤ 8 nodes.
fn modularity_exactness() -> Outcome {
    let barbell = SimilarityGraph::with_anonymous_nodes(
        6,
        [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (3, 4, 1.0), (3, 5, 1.0), (4, 5, 1.0), (2, 3, 1.0)],
    )
    .unwrap();
    let r = greedy_merge(&barbell);
    ensure(close(r.modularity, 5.0 / 14.0, 1e-12), || {
        format!("barbell greedy Q = {}", r.modularity)
    })?;
    let edges: Vec<_> = barbell.edges().collect();
    let (best, _) = common::exhaustive_max_modularity(6, &edges);
    ensure(close(best, 5.0 / 14.0, 1e-12), || format!("barbell exhaustive max {best}"))?;

    let mut rng = common::rng(ACCEPTANCE_SEED + 2);
    let mut graphs = 0;
    let mut optimal = 0;
    for _ in 0..300 {
        let n = rng.gen_range(1..=8);
        let p = rng.gen_range(0.1..0.9);
        let edges = common::random_graph(&mut rng, n, p);
        let g = SimilarityGraph::with_anonymous_nodes(n, edges.clone()).unwrap();
        let r = greedy_merge(&g);
        let labels = r.partition.assignment().to_vec();
        let dense = common::dense_modularity(n, &edges, &labels);
        ensure(close(r.modularity, dense, 1e-9), || {
            format!("Q {} vs dense {dense}", r.modularity)
        })?;
        let (max, _) = common::exhaustive_max_modularity(n, &edges);
        ensure(r.modularity <= max + 1e-12, || {
            format!("greedy {} above exhaustive {max}", r.modularity)
        })?;
        let single = modularity(&g, &Partition::single(n)).unwrap();
        let singles = modularity(&g, &Partition::singletons(n)).unwrap();
        ensure(r.modularity >= single.max(singles) - 1e-12, || {
            format!("greedy {} below trivial partitions", r.modularity)
        })?;
        if close(r.modularity, max, 1e-9) {
            optimal += 1;
        }
        graphs += 1;
    }
    Ok(format!(
        "barbell Q = 5/14; {graphs} random graphs bounded by exhaustive max ({optimal} optimal)"
    ))
}

fn planted(k: usize, seed: u64) -> Generated {
    let (net, ods) = planted_grid(k, 12, 100.0).unwrap();
    generate(
        Arc::new(net),
        &GeneratorParams {
            n: 300,
            corridors: Corridors::Explicit(ods),
            deviation_prob: 0.1,
            seed,
        },
    )
    .unwrap()
}

fn params() -> HierarchyParams {
    HierarchyParams {
        seed: ACCEPTANCE_SEED,
        ..HierarchyParams::default()
    }
}

/// 4. Top-level recovery of planted corridors.
fn planted_recovery() -> Outcome {
    let start = Instant::now();
    let mut detail = Vec::new();
    for k in [2, 3, 5] {
        let data = planted(k, ACCEPTANCE_SEED);
        let g = build_similarity_graph(&data.trajectories, SimilarityScheme::Spatial).unwrap();
        let h = build_hierarchy(&g, &params()).unwrap();
        let top = h.flatten_by_level(1);
        let ari = adjusted_rand_index(&top, &data.label_partition().unwrap()).unwrap();
        ensure(ari >= ARI_THRESHOLD, || format!("k={k}: ARI {ari} with {} top clusters", top.k()))?;
        detail.push(format!("k={k} ARI={ari:.3}"));
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{} in {elapsed:.2?}", detail.join(", ")))
}

/// 5. Modularity clustering's intraclass overlap is at least that of every
///    HAC linkage cut at the same number of clusters.
fn comparative_overlap() -> Outcome {
    let mut detail = Vec::new();
    for k in [2, 3, 5] {
        let data = planted(k, ACCEPTANCE_SEED);
        let ts = &data.trajectories;
        let g = build_similarity_graph(ts, SimilarityScheme::Spatial).unwrap();
        let h = build_hierarchy(&g, &params()).unwrap();
        let d = distance_matrix(ts, SimilarityScheme::Spatial, DEFAULT_MAX_N).unwrap();
        for level in 1..h.level_count() {
            let ours = h.flatten_by_level(level);
            let q = intraclass_overlap(&ours, ts).unwrap();
            for linkage in [Linkage::Single, Linkage::Average, Linkage::Complete] {
                let cut = agglomerate(&d, linkage).unwrap().cut(ours.k()).unwrap();
                let theirs = intraclass_overlap(&cut, ts).unwrap();
                ensure(q >= theirs - 1e-9, || {
                    format!("k={k} level {level}: modularity {q} < {} {theirs}", linkage.name())
                })?;
            }
            detail.push(format!("k={k}/L{level}({} clusters)", ours.k()));
        }
    }
    Ok(format!("holds at {}", detail.join(", ")))
}

/// 6. HAC merge sequences against a naive O(n³) reference; single-linkage
///    cuts against MST components.
fn hac_correctness() -> Outcome {
    let mut rng = common::rng(ACCEPTANCE_SEED + 6);
    let mut runs = 0;
    for _ in 0..12 {
        let n = rng.gen_range(2..=100);
        let rows = common::random_distance_matrix(&mut rng, n);
        let d = CondensedMatrix::from_square(&rows);
        for (linkage, name) in [(Linkage::Single, "single"), (Linkage::Average, "average"), (Linkage::Complete, "complete")] {
            let dend = agglomerate(&d, linkage).unwrap();
            let mut min_member: Vec<usize> = (0..n).collect();
            let oracle = common::naive_hac(&rows, name);
            for (m, want) in dend.merges().iter().zip(&oracle) {
                let (a, b) = (min_member[m.left], min_member[m.right]);
                let got = (a.min(b), a.max(b));
                ensure(got == (want.0, want.1) && close(m.distance, want.2, 1e-9), || {
                    format!("{name} n={n}: merge {got:?}@{} vs {want:?}", m.distance)
                })?;
                min_member.push(a.min(b));
            }
            if linkage == Linkage::Single {
                for k in 1..=n {
                    let cut = dend.cut(k).unwrap();
                    let mst = Partition::from_labels(&common::mst_components(&rows, k));
                    ensure(cut.same_grouping(&mst), || format!("single n={n} k={k} differs from MST"))?;
                }
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} dendrograms match the naive reference; single-linkage cuts match MST"))
}

fn write_run(data: &Generated, g: &SimilarityGraph, seed: u64, dir: &std::path::Path) -> Vec<Vec<u8>> {
    let files = data.write_dataset(dir).unwrap();
    let h = build_hierarchy(g, &HierarchyParams { seed, replicates: 5, ..HierarchyParams::default() }).unwrap();
    let json = serde_json::to_vec_pretty(&h.to_json(g.node_ids())).unwrap();
    let mut out: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
    out.push(json);
    out
}

/// 7. Huygens decomposition, hierarchy validity and byte-identical reruns on
///    100 randomised trials.
fn invariant_suites() -> Outcome {
    let mut rng = common::rng(ACCEPTANCE_SEED + 7);
    for trial in 0..100 {
        let n = rng.gen_range(2..=40);
        let edges = rng.gen_range(3..=25);
        let ts = common::random_dataset(&mut rng, n, edges);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..6)).collect();
        let p = Partition::from_labels(&labels);
        for which in [Endpoint::Start, Endpoint::End] {
            let i = inertia(&p, &ts, which).unwrap();
            ensure((i.intra + i.inter - i.total).abs() <= HUYGENS_REL_TOL * i.total.max(1e-300), || {
                format!("trial {trial}: {} + {} != {}", i.intra, i.inter, i.total)
            })?;
        }

        let k = rng.gen_range(1..=3);
        let seed = rng.gen::<u64>();
        let (net, ods) = planted_grid(k, rng.gen_range(3..=8), 50.0).unwrap();
        let gen_params = GeneratorParams {
            n: rng.gen_range(4..=40),
            corridors: Corridors::Explicit(ods),
            deviation_prob: rng.gen_range(0.0..0.5),
            seed,
        };
        let net = Arc::new(net);
        let data = generate(net.clone(), &gen_params).unwrap();
        let g = build_similarity_graph(&data.trajectories, SimilarityScheme::Spatial).unwrap();
        let h = build_hierarchy(&g, &HierarchyParams { seed, replicates: 5, ..HierarchyParams::default() }).unwrap();
        h.check().map_err(|e| format!("trial {trial}: {e}"))?;
        for level in 0..=h.level_count() {
            let fine = h.flatten_by_level(level + 1);
            ensure(fine.refines(&h.flatten_by_level(level)), || {
                format!("trial {trial}: level {} does not refine level {level}", level + 1)
            })?;
        }

        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let again = generate(net, &gen_params).unwrap();
        let g2 = build_similarity_graph(&again.trajectories, SimilarityScheme::Spatial).unwrap();
        let a = write_run(&data, &g, seed, dir_a.path());
        let b = write_run(&again, &g2, seed, dir_b.path());
        ensure(a == b, || format!("trial {trial}: reruns differ"))?;
    }
    Ok("100 trials: Huygens within 1e-6, hierarchies valid, reruns byte-identical".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("AC1 formula oracles", formula_oracles),
        ("AC2 similarity-graph equivalence", graph_equivalence),
        ("AC3 modularity exactness", modularity_exactness),
        ("AC4 planted recovery", planted_recovery),
        ("AC5 intraclass overlap vs HAC", comparative_overlap),
        ("AC6 HAC correctness", hac_correctness),
        ("AC7 invariant suites", invariant_suites),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
