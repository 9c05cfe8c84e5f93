use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use semistab::decaylab::{de_ext, ser_ext, GeometryDescriptor};
use semistab::linalg::{c, CMat};
use semistab::multiplier::FourierGridSpec;
use semistab::numcore::geometric_grid;
use semistab::operators::{DenseModel, DiagonalModel, JordanSumModel, OperatorMatrixModel, OperatorModel};
use semistab::LogGrid;

/// Invalid configuration, naming the offending field.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid config field `{}`: {}", self.field, self.message)
    }
}

fn bad<T>(field: impl Into<String>, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        field: field.into(),
        message: message.into(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    Dense {
        real: Vec<Vec<f64>>,
        #[serde(default)]
        imag: Option<Vec<Vec<f64>>>,
    },
    Diagonal {
        /// `[re, im]` pairs.
        values: Vec<[f64; 2]>,
    },
    DiagonalSymbol {
        a: f64,
        b: f64,
        #[serde(default = "default_s_max")]
        s_max: f64,
        #[serde(default = "default_s_count")]
        count: usize,
        #[serde(default = "yes")]
        sobolev: bool,
    },
    JordanSum {
        gamma: f64,
        delta: f64,
        #[serde(default = "default_n_max")]
        n_max: usize,
    },
    OperatorMatrix {
        n: usize,
        #[serde(default)]
        nodes: Option<Vec<f64>>,
        #[serde(default = "default_fiber_nodes")]
        fiber_nodes: usize,
    },
}

fn default_s_max() -> f64 {
    semistab::operators::DEFAULT_S_MAX
}
fn default_s_count() -> usize {
    semistab::operators::DEFAULT_S_COUNT
}
fn yes() -> bool {
    true
}
fn default_n_max() -> usize {
    10_000
}
fn default_fiber_nodes() -> usize {
    64
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    fn check(&self, field: &str) -> Result<LogGrid, ConfigError> {
        if self.count < 2 {
            return bad(format!("{field}.count"), format!("need at least 2 nodes, got {}", self.count));
        }
        if !(self.start > 0.0 && self.start.is_finite()) {
            return bad(format!("{field}.start"), format!("must be positive, got {}", self.start));
        }
        if !(self.stop > self.start && self.stop.is_finite()) {
            return bad(format!("{field}.stop"), format!("must exceed start, got {}", self.stop));
        }
        geometric_grid(self.start, self.stop, self.count).or_else(|e| bad(field, e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    #[serde(default = "default_t_grid")]
    pub t_grid: GridSpec,
    #[serde(default = "default_xi_grid")]
    pub xi_grid: GridSpec,
    #[serde(default = "default_fourier_grid")]
    pub fourier_grid: FourierGridSpec,
}

fn default_t_grid() -> GridSpec {
    GridSpec { start: 10.0, stop: 1e5, count: 41 }
}
fn default_xi_grid() -> GridSpec {
    GridSpec { start: 1e-3, stop: 1e3, count: 97 }
}
fn default_fourier_grid() -> FourierGridSpec {
    FourierGridSpec { period: 200.0, samples: 1 << 12 }
}

impl Default for Grids {
    fn default() -> Self {
        Grids {
            t_grid: default_t_grid(),
            xi_grid: default_xi_grid(),
            fourier_grid: default_fourier_grid(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest RMS log-residual accepted for a polynomial decay fit.
    #[serde(default = "default_fit_tol")]
    pub fit_tol: f64,
    /// Largest relative error accepted by the contour battery.
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_consistency_tol")]
    pub consistency_tol: f64,
}

fn default_fit_tol() -> f64 {
    0.1
}
fn default_quad_tol() -> f64 {
    1e-6
}
fn default_consistency_tol() -> f64 {
    0.05
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fit_tol: default_fit_tol(),
            quad_tol: default_quad_tol(),
            consistency_tol: default_consistency_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexPair {
    pub sigma: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FracTuple {
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    /// `[re, im]`.
    pub lambda: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FracSpec {
    /// Defaults to the bundled identity battery.
    #[serde(default)]
    pub tuples: Option<Vec<FracTuple>>,
    #[serde(default)]
    pub nodes_per_ray: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SymbolSpec {
    /// `k! (i xi + A)^{-k-1}` for a dense `operator`.
    Resolvent { k: u32 },
    /// `1/(i xi + a)`.
    ScalarResolvent { a: f64 },
    /// `scale/(1+|xi|)^2`.
    InverseSquare { scale: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PqPair {
    pub p: f64,
    #[serde(serialize_with = "ser_ext", deserialize_with = "de_ext")]
    pub q: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultSpec {
    pub symbol: SymbolSpec,
    #[serde(default)]
    pub pairs: Option<Vec<PqPair>>,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_trials() -> usize {
    32
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default)]
    pub operator: Option<OperatorSpec>,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default = "GeometryDescriptor::hilbert")]
    pub geometry: GeometryDescriptor,
    #[serde(default)]
    pub indices: Vec<IndexPair>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub frac: Option<FracSpec>,
    #[serde(default)]
    pub mult: Option<MultSpec>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config")
    }
}

pub fn load(path: &Path) -> Result<AnalysisConfig, ConfigError> {
    let text = std::fs::read_to_string(path).or_else(|e| bad("--config", format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<AnalysisConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: AnalysisConfig = serde_path_to_error::deserialize(de).or_else(|e| {
        let field = e.path().to_string();
        bad(if field == "." { "<root>".to_string() } else { field }, e.into_inner().to_string())
    })?;
    Ok(cfg)
}

fn positive(v: f64, field: &str) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        bad(field, format!("must be positive, got {v}"))
    }
}

impl AnalysisConfig {
    /// Checks everything the command does not build lazily.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.tolerances;
        positive(t.fit_tol, "tolerances.fit_tol")?;
        positive(t.quad_tol, "tolerances.quad_tol")?;
        positive(t.consistency_tol, "tolerances.consistency_tol")?;
        self.t_grid()?;
        self.xi_grid()?;
        self.grids
            .fourier_grid
            .validate()
            .or_else(|e| bad("grids.fourier_grid", e.to_string()))?;
        self.geometry.validate().or_else(|e| bad("geometry", e.to_string()))?;
        for (i, ix) in self.indices.iter().enumerate() {
            if !(ix.sigma >= 0.0 && ix.sigma.is_finite()) {
                return bad(format!("indices[{i}].sigma"), format!("must be nonnegative, got {}", ix.sigma));
            }
            if !(ix.tau >= 0.0 && ix.tau.is_finite()) {
                return bad(format!("indices[{i}].tau"), format!("must be nonnegative, got {}", ix.tau));
            }
        }
        if self.threads == Some(0) {
            return bad("threads", "must be at least 1");
        }
        if let Some(m) = &self.mult {
            if m.trials == 0 {
                return bad("mult.trials", "must be at least 1");
            }
            for (i, pq) in m.pairs.iter().flatten().enumerate() {
                if !(pq.p >= 1.0 && pq.q >= pq.p) {
                    return bad(format!("mult.pairs[{i}]"), format!("need 1 <= p <= q, got ({}, {})", pq.p, pq.q));
                }
            }
        }
        if let Some(f) = &self.frac {
            if f.nodes_per_ray.is_some_and(|n| n < 16) {
                return bad("frac.nodes_per_ray", "must be at least 16");
            }
        }
        Ok(())
    }

    pub fn t_grid(&self) -> Result<LogGrid, ConfigError> {
        self.grids.t_grid.check("grids.t_grid")
    }

    pub fn xi_grid(&self) -> Result<LogGrid, ConfigError> {
        self.grids.xi_grid.check("grids.xi_grid")
    }

    pub fn model(&self) -> Result<OperatorModel, ConfigError> {
        let spec = match &self.operator {
            Some(s) => s,
            None => return bad("operator", "required by this command"),
        };
        let wrap = |r: semistab::Result<OperatorModel>| r.or_else(|e| bad("operator", e.to_string()));
        match spec {
            OperatorSpec::Dense { real, imag } => {
                let n = real.len();
                if n == 0 || real.iter().any(|r| r.len() != n) {
                    return bad("operator.real", "must be a nonempty square matrix");
                }
                if let Some(im) = imag {
                    if im.len() != n || im.iter().any(|r| r.len() != n) {
                        return bad("operator.imag", format!("must be {n} x {n}"));
                    }
                }
                let a = CMat::from_fn(n, n, |i, j| {
                    c(real[i][j], imag.as_ref().map_or(0.0, |m| m[i][j]))
                });
                wrap(DenseModel::new(a).map(OperatorModel::Dense))
            }
            OperatorSpec::Diagonal { values } => {
                let v = values.iter().map(|p| c(p[0], p[1])).collect();
                wrap(DiagonalModel::from_values(v).map(OperatorModel::Diagonal))
            }
            OperatorSpec::DiagonalSymbol { a, b, s_max, count, sobolev } => wrap(
                DiagonalModel::power(*a, *b, 1.0 + 1e-9, *s_max, *count, *sobolev).map(OperatorModel::Diagonal),
            ),
            OperatorSpec::JordanSum { gamma, delta, n_max } => {
                wrap(JordanSumModel::new(*gamma, *delta, *n_max).map(OperatorModel::JordanSum))
            }
            OperatorSpec::OperatorMatrix { n, nodes, fiber_nodes } => wrap(
                match nodes {
                    Some(v) => OperatorMatrixModel::discretized(*n, v.clone()),
                    None => OperatorMatrixModel::analytic(*n, *fiber_nodes),
                }
                .map(OperatorModel::OperatorMatrix),
            ),
        }
    }

    pub fn dense_model(&self) -> Result<DenseModel, ConfigError> {
        match self.model()? {
            OperatorModel::Dense(d) => Ok(d),
            _ => bad("operator.kind", "this symbol needs a dense operator"),
        }
    }
}
