//! Simulation scenarios and the method comparison harness.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recovery::QSystem;
use crate::selection::{default_eta_grid, fit_path, select, Criterion, TuningConfig};
use crate::solver::SolverConfig;
use crate::tree::CompositionalTree;

/// Threshold below which an estimated coefficient counts as zero.
pub const SUPPORT_TOL: f64 = 1e-8;

/// Row sums below this magnitude are redrawn before normalizing.
pub const MIN_ROW_SUM: f64 = 1e-8;

/// Complete binary tree of the given depth. Nodes are labelled `X1, X2, ...`
/// level by level starting at the leaves, so the leaves are `X1..X(2^depth)`
/// and the root is the last label.
pub fn make_binary_tree(depth: usize) -> Result<CompositionalTree> {
    if depth == 0 {
        return Err(Error::InvalidDimension("depth must be at least 1".into()));
    }
    let mut edges = Vec::new();
    let mut level: Vec<usize> = (1..=1usize << depth).collect();
    let mut next_label = level.len() + 1;
    while level.len() > 1 {
        let mut parents = Vec::with_capacity(level.len() / 2);
        for pair in level.chunks(2) {
            let parent = next_label;
            next_label += 1;
            for &c in pair {
                edges.push((format!("X{c}"), format!("X{parent}")));
            }
            parents.push(parent);
        }
        level = parents;
    }
    CompositionalTree::from_edges(&edges)
}

const LOBES: [(&str, &[(&str, usize)]); 5] = [
    (
        "Frontal",
        &[("SFG", 3), ("MFG", 5), ("IFG", 4), ("PrCG", 4), ("OrbG", 4), ("GRec", 4)],
    ),
    (
        "Parietal",
        &[("PoCG", 4), ("SPG", 5), ("SMG", 4), ("AG", 4), ("PrCun", 4)],
    ),
    (
        "Temporal",
        &[("STG", 5), ("MTG", 4), ("ITG", 4), ("FuG", 4), ("TP", 4)],
    ),
    ("Limbic", &[("CingA", 5), ("CingP", 4), ("PHG", 4), ("Ins", 4)]),
    ("Occipital", &[("Cun", 4), ("LG", 5), ("IOG", 4), ("SOG", 4)]),
];

const OTHER_REGIONS: [(&str, [&str; 3]); 6] = [
    ("Diencephalon-L", ["Thalamus-L", "Hypothalamus-L", "BasalGanglia-L"]),
    ("Diencephalon-R", ["Thalamus-R", "Hypothalamus-R", "BasalGanglia-R"]),
    ("Mesencephalon", ["Midbrain-L", "Midbrain-R", "Tectum"]),
    ("Metencephalon", ["Cerebellum-L", "Cerebellum-R", "Pons"]),
    ("Myelencephalon", ["Medulla-L", "Medulla-R", "Medulla-mid"]),
    ("CSF", ["Ventricle-L", "Ventricle-R", "Sulcal-CSF"]),
];

/// Synthetic brain-region tree with `p = 321`, `q = 236`. The root `ICV` has
/// eight children; each telencephalon splits into five lobes, 24 gyri and
/// 100 leaves, and the six remaining regions each hold three two-leaf
/// structures. The left superior frontal gyrus `SFG-L-gyrus` has the three
/// leaves `SFG-L`, `SFG-PFC-L`, `SFG-pole-L`.
pub fn mri_standin_tree() -> CompositionalTree {
    let mut edges: Vec<(String, String)> = Vec::new();
    for side in ["L", "R"] {
        let tel = format!("Telencephalon-{side}");
        for (lobe, gyri) in LOBES.iter() {
            let lobe_name = format!("{lobe}-{side}");
            edges.push((lobe_name.clone(), tel.clone()));
            for &(gyrus, leaves) in gyri.iter() {
                let gyrus_name = format!("{gyrus}-{side}-gyrus");
                edges.push((gyrus_name.clone(), lobe_name.clone()));
                let leaf_names: Vec<String> = if gyrus == "SFG" {
                    vec![
                        format!("SFG-{side}"),
                        format!("SFG-PFC-{side}"),
                        format!("SFG-pole-{side}"),
                    ]
                } else {
                    (1..=leaves).map(|k| format!("{gyrus}{k}-{side}")).collect()
                };
                for leaf in leaf_names {
                    edges.push((leaf, gyrus_name.clone()));
                }
            }
        }
        edges.push((tel, "ICV".into()));
    }
    for (region, parts) in OTHER_REGIONS.iter() {
        for part in parts {
            for k in 1..=2 {
                edges.push((format!("{part}-{k}"), part.to_string()));
            }
            edges.push((part.to_string(), region.to_string()));
        }
        edges.push((region.to_string(), "ICV".into()));
    }
    CompositionalTree::from_edges(&edges).expect("bundled tree is valid")
}

/// Tree descriptor used in scenario files: `binary:<depth>`, `mri`, or a
/// path to an edge list.
pub fn resolve_tree(desc: &str, base: Option<&Path>) -> Result<CompositionalTree> {
    if let Some(depth) = desc.strip_prefix("binary:") {
        let depth: usize = depth
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad binary depth in '{desc}'")))?;
        return make_binary_tree(depth);
    }
    if desc == "mri" {
        return Ok(mri_standin_tree());
    }
    let path = match base {
        Some(b) if Path::new(desc).is_relative() => b.join(desc),
        _ => Path::new(desc).to_path_buf(),
    };
    CompositionalTree::from_file(path)
}

#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub name: String,
    pub tree: CompositionalTree,
    /// Truth on all `p` nodes; the root entry is the intercept.
    pub beta_star: Vec<f64>,
    pub alpha_star: Vec<f64>,
    pub n: usize,
    pub cov_decay: f64,
    pub noise_ratio: f64,
    pub m: usize,
    pub seed: u64,
    pub ridge: f64,
    pub leaf_model: LeafModel,
    /// Set for scenarios on the synthetic stand-in tree.
    pub approximate: bool,
}

impl ScenarioSpec {
    /// Builds a scenario from labelled nonzero coefficients. `ridge` defaults
    /// to `1e-4` when `n < q` and 0 otherwise.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        tree: CompositionalTree,
        beta: &[(&str, f64)],
        n: usize,
        noise_ratio: f64,
        m: usize,
        seed: u64,
        ridge: Option<f64>,
    ) -> Result<Self> {
        let mut beta_star = vec![0.0; tree.p()];
        for &(label, v) in beta {
            let j = tree
                .index_of(label)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown node '{label}'")))?;
            beta_star[j] = v;
        }
        let qsys = QSystem::new(&tree)?;
        let resid = qsys.constraint_residual(&beta_star);
        if resid > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "coefficients violate the sibling zero-sum constraints (residual {resid:.3e})"
            )));
        }
        if !(noise_ratio >= 0.0) {
            return Err(Error::InvalidConfig("noise ratio must be >= 0".into()));
        }
        if n < 2 {
            return Err(Error::InvalidConfig("n must be at least 2".into()));
        }
        let alpha_star = qsys.forward_alpha(&beta_star);
        let ridge = ridge.unwrap_or(if n < tree.q() { 1e-4 } else { 0.0 });
        Ok(Self {
            name: name.to_string(),
            tree,
            beta_star,
            alpha_star,
            n,
            cov_decay: 0.2,
            noise_ratio,
            m,
            seed,
            ridge,
            leaf_model: LeafModel::GaussianRatio,
            approximate: false,
        })
    }

    pub fn intercept(&self) -> f64 {
        self.beta_star[self.tree.root()]
    }

    /// Reads a TOML scenario file.
    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let file: ScenarioFile = toml::from_str(&text)?;
        let tree = resolve_tree(&file.tree, path.parent())?;
        let beta: Vec<(&str, f64)> = file.beta.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        let mut spec = ScenarioSpec::new(
            file.name.as_deref().unwrap_or("custom"),
            tree,
            &beta,
            file.n,
            file.noise_ratio.unwrap_or(1.0),
            file.m.unwrap_or(100),
            file.seed.unwrap_or(1),
            file.ridge,
        )?;
        if let Some(c) = file.cov_decay {
            spec.cov_decay = c;
        }
        if let Some(model) = file.leaf_model {
            spec.leaf_model = model;
        }
        Ok(spec)
    }
}

/// On-disk scenario description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: Option<String>,
    pub tree: String,
    pub n: usize,
    pub noise_ratio: Option<f64>,
    pub cov_decay: Option<f64>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub ridge: Option<f64>,
    pub leaf_model: Option<LeafModel>,
    /// Nonzero coefficients by node label; the root label sets the intercept.
    pub beta: BTreeMap<String, f64>,
}

/// Scenarios 1 to 4 with `m = 100` and seed 1.
pub fn builtin_scenarios() -> Vec<ScenarioSpec> {
    (1..=4).map(|k| builtin_scenario(k).expect("builtin")).collect()
}

/// Scenario by number. 1 and 2 use the depth-7 binary tree with `n = 120`;
/// 3 and 4 use the stand-in brain tree with `n = 819`.
pub fn builtin_scenario(id: u32) -> Result<ScenarioSpec> {
    let (m, seed) = (100, 1);
    match id {
        1 => ScenarioSpec::new(
            "scenario1",
            make_binary_tree(7)?,
            &[("X1", 1.0), ("X129", 1.0), ("X2", -1.0), ("X130", -1.0), ("X255", 3.0)],
            120,
            1.0,
            m,
            seed,
            None,
        ),
        2 => ScenarioSpec::new(
            "scenario2",
            make_binary_tree(7)?,
            &[("X249", 1.0), ("X253", 1.0), ("X250", -1.0), ("X254", -1.0), ("X255", 3.0)],
            120,
            1.0,
            m,
            seed,
            None,
        ),
        3 => {
            let mut s = ScenarioSpec::new(
                "scenario3",
                mri_standin_tree(),
                &[("SFG-L", 3.0), ("SFG-PFC-L", -2.0), ("SFG-pole-L", -1.0), ("ICV", 3.0)],
                819,
                1.0,
                m,
                seed,
                None,
            )?;
            s.approximate = true;
            Ok(s)
        }
        4 => {
            let mut s = ScenarioSpec::new(
                "scenario4",
                mri_standin_tree(),
                &[("Telencephalon-L", 1.0), ("Telencephalon-R", -1.0), ("ICV", 3.0)],
                819,
                1.0,
                m,
                seed,
                None,
            )?;
            s.approximate = true;
            Ok(s)
        }
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

/// How a Gaussian draw `w` is turned into a leaf composition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafModel {
    /// `w / sum(w)`; entries can be negative and heavy-tailed.
    #[default]
    GaussianRatio,
    /// `exp(w) / sum(exp(w))`; strictly positive.
    LogisticNormal,
}

/// Gaussian sampler with `Sigma_ij = decay^|i-j|`, via a cached Cholesky
/// factor.
#[derive(Debug, Clone)]
pub struct CovSampler {
    chol_l: DMatrix<f64>,
    model: LeafModel,
}

impl CovSampler {
    pub fn new(q: usize, decay: f64) -> Result<Self> {
        Self::with_model(q, decay, LeafModel::GaussianRatio)
    }

    pub fn with_model(q: usize, decay: f64, model: LeafModel) -> Result<Self> {
        let sigma = DMatrix::from_fn(q, q, |i, j| decay.powi((i as i32 - j as i32).abs()));
        let chol = sigma
            .cholesky()
            .ok_or_else(|| Error::InvalidConfig(format!("covariance with decay {decay} is not positive definite")))?;
        Ok(Self {
            chol_l: chol.l(),
            model,
        })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        let q = self.chol_l.nrows();
        let z = DVector::from_fn(q, |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.chol_l * z
    }

    /// One normalized row, redrawn while its coordinate sum is tiny.
    pub fn sample_composition<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        if self.model == LeafModel::LogisticNormal {
            let w = self.sample(rng);
            let top = w.max();
            let e = w.map(|v| (v - top).exp());
            return &e / e.sum();
        }
        loop {
            let x = self.sample(rng);
            let s = x.sum();
            if s.abs() >= MIN_ROW_SUM {
                return x / s;
            }
        }
    }
}

/// `n x q` leaf design drawn from an RNG.
pub fn generate_x_with<R: Rng>(sampler: &CovSampler, n: usize, rng: &mut R) -> DMatrix<f64> {
    let rows: Vec<DVector<f64>> = (0..n).map(|_| sampler.sample_composition(rng)).collect();
    let q = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, q, |i, j| rows[i][j])
}

/// Leaf design and its full-tree expansion.
pub fn generate_x(
    tree: &CompositionalTree,
    n: usize,
    cov_decay: f64,
    seed: u64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if n == 0 {
        return Err(Error::InvalidDimension("n must be positive".into()));
    }
    let sampler = CovSampler::new(tree.q(), cov_decay)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = generate_x_with(&sampler, n, &mut rng);
    let full = expand_rows(tree, &x)?;
    Ok((x, full))
}

/// Adds the internal-node columns.
pub fn expand_rows(tree: &CompositionalTree, x_leaf: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut full = DMatrix::zeros(x_leaf.nrows(), tree.p());
    for i in 0..x_leaf.nrows() {
        let row: Vec<f64> = x_leaf.row(i).iter().copied().collect();
        let e = tree.expand_leaves(&row)?;
        for (j, v) in e.into_iter().enumerate() {
            full[(i, j)] = v;
        }
    }
    Ok(full)
}

/// `y = X beta + eps` with `Var(eps) = noise_ratio * Var(X beta)` (sample
/// variance). Returns `y` and the noise variance used.
pub fn generate_y<R: Rng>(
    x_full: &DMatrix<f64>,
    beta_star: &[f64],
    noise_ratio: f64,
    root: usize,
    rng: &mut R,
) -> Result<(DVector<f64>, f64)> {
    if x_full.ncols() != beta_star.len() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} columns, beta has {} entries",
            x_full.ncols(),
            beta_star.len()
        )));
    }
    let signal = x_full * DVector::from_column_slice(beta_star);
    let n = signal.len();
    let mean = signal.mean();
    let var = if n > 1 {
        signal.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    let only_intercept = beta_star
        .iter()
        .enumerate()
        .all(|(j, &b)| j == root || b == 0.0);
    let mut sigma2 = noise_ratio * var;
    if noise_ratio > 0.0 {
        if only_intercept {
            log::warn!("signal has zero variance; using noise variance 1");
            sigma2 = 1.0;
        } else if var <= 1e-24 * (1.0 + mean * mean) {
            return Err(Error::ZeroSignal);
        }
    }
    let sd = sigma2.sqrt();
    let y = signal.map(|s| s + sd * rng.sample::<f64, _>(StandardNormal));
    Ok((y, sigma2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Full `eta` grid.
    Proposed,
    /// `eta = 1` only.
    Classo,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Proposed => "Proposed",
            Method::Classo => "CLASSO",
        }
    }

    pub fn eta_grid(self) -> Vec<f64> {
        match self {
            Method::Proposed => default_eta_grid(),
            Method::Classo => vec![1.0],
        }
    }
}

/// Support recovery and estimation error of one fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sensitivity: f64,
    pub specificity: f64,
    pub sse: f64,
    pub eta: f64,
}

/// Sensitivity and specificity over all non-root nodes, SSE over all nodes.
pub fn metrics(beta_hat: &[f64], beta_star: &[f64], root: usize, eta: f64) -> Metrics {
    let (mut tp, mut pos, mut tn, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for j in 0..beta_star.len() {
        if j == root {
            continue;
        }
        let est = beta_hat[j].abs() > SUPPORT_TOL;
        if beta_star[j] != 0.0 {
            pos += 1;
            tp += est as usize;
        } else {
            neg += 1;
            tn += (!est) as usize;
        }
    }
    let sse = beta_hat
        .iter()
        .zip(beta_star)
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    Metrics {
        sensitivity: if pos == 0 { 1.0 } else { tp as f64 / pos as f64 },
        specificity: if neg == 0 { 1.0 } else { tn as f64 / neg as f64 },
        sse,
        eta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    /// Mean and sample standard deviation, summed in input order.
    pub fn of(values: &[f64]) -> Self {
        let k = values.len();
        if k == 0 {
            return Self { mean: f64::NAN, sd: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / k as f64;
        let sd = if k > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: Method,
    pub criterion: Criterion,
    pub sensitivity: MeanSd,
    pub specificity: MeanSd,
    pub sse: MeanSd,
    pub eta: MeanSd,
    pub succeeded: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub scenario: String,
    pub approximate: bool,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub noise_ratio: f64,
    pub rows: Vec<ReportRow>,
    /// Per-replicate metrics, indexed like `rows`; `None` for failed fits.
    pub replicates: Vec<Vec<Option<Metrics>>>,
}

impl SimulationReport {
    pub fn row(&self, method: Method, criterion: Criterion) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.criterion == criterion)
    }

    /// Table with columns Method, Tuning, Sensitivity, Specificity, SSE, eta,
    /// each cell as `mean(sd)`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["Method", "Tuning", "Sensitivity", "Specificity", "SSE", "eta", "Failures"])?;
        for r in &self.rows {
            let eta = match r.method {
                Method::Classo => "-".to_string(),
                Method::Proposed => cell(r.eta),
            };
            wtr.write_record([
                r.method.label().to_string(),
                r.criterion.label().to_string(),
                cell(r.sensitivity),
                cell(r.specificity),
                cell(r.sse),
                eta,
                r.failures.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn cell(v: MeanSd) -> String {
    format!("{:.4}({:.4})", v.mean, v.sd)
}

/// Per-replicate seed stream: ChaCha8 keyed by `seed`, stream = replicate.
pub fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// Runs `spec.m` replicates. Each replicate solves the grid once per method
/// and selects with every criterion from the same path.
pub fn run_simulation(
    spec: &ScenarioSpec,
    methods: &[Method],
    criteria: &[Criterion],
    solver: &SolverConfig,
) -> Result<SimulationReport> {
    let tuning = TuningConfig {
        solver: solver.clone(),
        ..Default::default()
    };
    run_simulation_with(spec, methods, criteria, &tuning)
}

/// [`run_simulation`] with an explicit lambda grid override (same grid for
/// every replicate) or the automatic grid with the given min ratio.
pub fn run_simulation_with(
    spec: &ScenarioSpec,
    methods: &[Method],
    criteria: &[Criterion],
    tuning: &TuningConfig,
) -> Result<SimulationReport> {
    let tree = &spec.tree;
    let qsys = QSystem::new(tree)?;
    let sampler = CovSampler::with_model(tree.q(), spec.cov_decay, spec.leaf_model)?;
    let mut base = tuning.clone();
    base.solver.ridge = spec.ridge;

    let per_rep: Vec<Vec<Option<Metrics>>> = (0..spec.m)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replicate_rng(spec.seed, rep);
            let x = generate_x_with(&sampler, spec.n, &mut rng);
            let data = expand_rows(tree, &x).and_then(|full| {
                generate_y(&full, &spec.beta_star, spec.noise_ratio, tree.root(), &mut rng)
            });
            let mut out = Vec::with_capacity(methods.len() * criteria.len());
            let (y, _) = match data {
                Ok(v) => v,
                Err(e) => {
                    log::warn!("replicate {rep}: {e}");
                    out.resize(methods.len() * criteria.len(), None);
                    return out;
                }
            };
            for &method in methods {
                let eta_grid = match method {
                    Method::Proposed => base.eta_grid.clone(),
                    Method::Classo => method.eta_grid(),
                };
                let config = TuningConfig {
                    eta_grid,
                    ..base.clone()
                };
                let path = fit_path(tree, &x, &y, &config, None);
                for &criterion in criteria {
                    let res = path
                        .as_ref()
                        .map_err(|e| e.to_string())
                        .and_then(|p| select(tree, &qsys, p, criterion).map_err(|e| e.to_string()));
                    out.push(match res {
                        Ok(fit) => Some(metrics(&fit.beta_hat, &spec.beta_star, tree.root(), fit.eta_hat)),
                        Err(e) => {
                            log::warn!("replicate {rep}, {} {}: {e}", method.label(), criterion.label());
                            None
                        }
                    });
                }
            }
            out
        })
        .collect();

    let mut rows = Vec::new();
    let mut replicates = Vec::new();
    for (mi, &method) in methods.iter().enumerate() {
        for (ci, &criterion) in criteria.iter().enumerate() {
            let k = mi * criteria.len() + ci;
            let col: Vec<Option<Metrics>> = per_rep.iter().map(|r| r[k]).collect();
            let ok: Vec<Metrics> = col.iter().flatten().copied().collect();
            let pick = |f: fn(&Metrics) -> f64| MeanSd::of(&ok.iter().map(f).collect::<Vec<_>>());
            rows.push(ReportRow {
                method,
                criterion,
                sensitivity: pick(|m| m.sensitivity),
                specificity: pick(|m| m.specificity),
                sse: pick(|m| m.sse),
                eta: pick(|m| m.eta),
                succeeded: ok.len(),
                failures: col.len() - ok.len(),
            });
            replicates.push(col);
        }
    }
    Ok(SimulationReport {
        scenario: spec.name.clone(),
        approximate: spec.approximate,
        n: spec.n,
        m: spec.m,
        seed: spec.seed,
        noise_ratio: spec.noise_ratio,
        rows,
        replicates,
    })
}
