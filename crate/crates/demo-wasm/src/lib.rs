//! Browser demo: generate a planted-corridor dataset, cluster it, and compare
//! flattenings and agglomerative baselines. Every method returns a JSON
//! string; the page in `www/` draws it on a canvas.

use std::sync::Arc;

use serde::Serialize;
use trajclust::evaluation::evaluate;
use trajclust::geojson::coordinate_chain;
use trajclust::hac::{agglomerate, distance_matrix_from_model, Linkage, DEFAULT_MAX_N};
use trajclust::modularity::{build_hierarchy, modularity, HierarchyParams};
use trajclust::similarity::SimilarityModel;
use trajclust::synth::{generate, planted_grid, Corridors, GeneratorParams};
use trajclust::{ClusterHierarchy, EvaluationReport, Partition, SimilarityGraph, TrajectorySet};
use wasm_bindgen::prelude::*;

const GRID_COLS: usize = 16;
const SPACING: f64 = 100.0;

pub struct Session {
    ts: TrajectorySet,
    model: SimilarityModel,
    graph: SimilarityGraph,
    hierarchy: ClusterHierarchy,
    truth: Partition,
}

#[derive(Serialize)]
struct Scene {
    segments: Vec<[f64; 4]>,
    routes: Vec<Vec<[f64; 2]>>,
    ids: Vec<String>,
    corridor: Vec<usize>,
    graph_edges: usize,
    levels: usize,
    leaves: usize,
}

#[derive(Serialize)]
struct Clustering {
    assignment: Vec<usize>,
    k: usize,
    modularity: Option<f64>,
    report: EvaluationReport,
}

impl Session {
    pub fn new(corridors: usize, n: usize, deviation: f64, seed: u64, weighting: &str) -> trajclust::Result<Self> {
        let (net, od) = planted_grid(corridors, GRID_COLS, SPACING)?;
        let params = GeneratorParams {
            n,
            corridors: Corridors::Explicit(od),
            deviation_prob: deviation,
            seed,
        };
        let generated = generate(Arc::new(net), &params)?;
        let truth = generated.label_partition().expect("planted corridors carry labels");
        let ts = generated.trajectories;
        let model = SimilarityModel::new(&ts, weighting.parse()?)?;
        let graph = model.graph(0.0);
        let hierarchy = build_hierarchy(
            &graph,
            &HierarchyParams {
                seed,
                ..HierarchyParams::default()
            },
        )?;
        Ok(Session {
            ts,
            model,
            graph,
            hierarchy,
            truth,
        })
    }

    pub fn scene(&self) -> String {
        let net = self.ts.network();
        let scene = Scene {
            segments: net
                .edges()
                .iter()
                .map(|e| {
                    let (a, b) = (net.coords(e.from), net.coords(e.to));
                    [a.0, a.1, b.0, b.1]
                })
                .collect(),
            routes: self.ts.trajectories().iter().map(|t| coordinate_chain(t, &self.ts)).collect(),
            ids: self.ts.ids(),
            corridor: self.truth.assignment().to_vec(),
            graph_edges: self.graph.edge_count(),
            levels: self.hierarchy.level_count(),
            leaves: self.hierarchy.leaf_count(),
        };
        serde_json::to_string(&scene).expect("scene serialises")
    }

    fn describe(&self, method: &str, p: &Partition) -> trajclust::Result<String> {
        let q = if self.graph.edge_count() > 0 {
            Some(modularity(&self.graph, p)?)
        } else {
            None
        };
        let c = Clustering {
            assignment: p.assignment().to_vec(),
            k: p.k(),
            modularity: q,
            report: evaluate(method, p, &self.ts, Some(&self.truth))?,
        };
        Ok(serde_json::to_string(&c).expect("clustering serialises"))
    }

    pub fn flatten_level(&self, level: usize) -> trajclust::Result<String> {
        let level = level.min(self.hierarchy.level_count() - 1);
        self.describe(&format!("level {level}"), &self.hierarchy.flatten_by_level(level))
    }

    pub fn expand_to(&self, k: usize) -> trajclust::Result<String> {
        let p = self.hierarchy.greedy_expand(&self.graph, k)?;
        self.describe(&format!("expand to {k}"), &p)
    }

    pub fn hac(&self, linkage: &str, k: usize) -> trajclust::Result<String> {
        let linkage: Linkage = linkage.parse()?;
        let d = distance_matrix_from_model(&self.model, DEFAULT_MAX_N)?;
        let p = agglomerate(&d, linkage)?.cut(k)?;
        self.describe(&format!("{} linkage", linkage.name()), &p)
    }
}

fn js(e: trajclust::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo(Session);

#[wasm_bindgen]
impl Demo {
    /// `weighting` is `spatial`, `classic` or `jaccard`.
    #[wasm_bindgen(constructor)]
    pub fn new(corridors: usize, n: usize, deviation: f64, seed: u32, weighting: &str) -> Result<Demo, JsValue> {
        Session::new(corridors, n, deviation, u64::from(seed), weighting).map(Demo).map_err(js)
    }

    /// Road segments, trajectory polylines, planted labels and hierarchy size.
    pub fn scene(&self) -> String {
        self.0.scene()
    }

    #[wasm_bindgen(js_name = flattenLevel)]
    pub fn flatten_level(&self, level: usize) -> Result<String, JsValue> {
        self.0.flatten_level(level).map_err(js)
    }

    #[wasm_bindgen(js_name = expandTo)]
    pub fn expand_to(&self, k: usize) -> Result<String, JsValue> {
        self.0.expand_to(k).map_err(js)
    }

    pub fn hac(&self, linkage: &str, k: usize) -> Result<String, JsValue> {
        self.0.hac(linkage, k).map_err(js)
    }
}
