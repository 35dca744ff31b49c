//! Problem configuration: JSON with strict key checking, matrices as
//! row-major nested arrays, sampled paths interpolated piecewise-linearly.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Deserialize;

use specflow_core::grassmann::LagrangianPath;
use specflow_core::pathgen;
use specflow_core::specflow::{Method, OperatorPath};
use specflow_core::symlin::LagrangianFrame;
use specflow_core::Tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    ExplicitSamples,
    SturmLiouville,
    RandomSeeded,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Kind::ExplicitSamples => "explicit-samples",
            Kind::SturmLiouville => "sturm-liouville",
            Kind::RandomSeeded => "random-seeded",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinSpec {
    pub name: String,
    #[serde(default = "one")]
    pub coefficient: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplesSpec {
    pub grid: Vec<f64>,
    /// Row-major square matrices, one per grid node.
    pub matrices: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramesSpec {
    pub grid: Vec<f64>,
    /// Row-major `2n x n` frames, one per grid node.
    pub frames: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaslovSpec {
    /// `loop` or `relative`.
    pub mode: String,
    /// `h0`, `h1`, or an explicit row-major `2n x n` frame.
    #[serde(default)]
    pub reference: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub report: Option<String>,
    #[serde(default)]
    pub summary: Option<String>,
    #[serde(default)]
    pub trace: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: Kind,
    pub interval: [f64; 2],
    pub dimension: usize,
    #[serde(default)]
    pub domain_length: Option<f64>,
    #[serde(default)]
    pub potential: Option<f64>,
    #[serde(default)]
    pub nonlinearity: Option<NonlinSpec>,
    #[serde(default)]
    pub methods: Option<Vec<String>>,
    #[serde(default)]
    pub tolerances: Option<std::collections::BTreeMap<String, f64>>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<SamplesSpec>,
    #[serde(default)]
    pub frames: Option<FramesSpec>,
    #[serde(default)]
    pub maslov: Option<MaslovSpec>,
    #[serde(default)]
    pub crossings: Option<usize>,
    #[serde(default)]
    pub oracle_samples: Option<usize>,
}

impl ProblemConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let cfg: ProblemConfig = serde_json::from_str(&raw)
            .map_err(|e| anyhow::anyhow!("config {} is invalid: {e}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN bounds
        if !(self.interval[0] < self.interval[1]) {
            anyhow::bail!("interval must satisfy a < b");
        }
        if self.dimension == 0 {
            anyhow::bail!("dimension must be positive");
        }
        match self.kind {
            Kind::RandomSeeded => {
                if self.seed.is_none() {
                    anyhow::bail!("random-seeded problems require a seed");
                }
            }
            Kind::SturmLiouville => {
                if self.domain_length.is_none() {
                    anyhow::bail!("sturm-liouville problems require domain_length");
                }
                if self.dimension < 3 {
                    anyhow::bail!("sturm-liouville problems need dimension >= 3");
                }
            }
            Kind::ExplicitSamples => {
                if self.samples.is_none() && self.frames.is_none() {
                    anyhow::bail!("explicit-samples problems require samples or frames");
                }
            }
        }
        if let Some(s) = &self.samples {
            if s.grid.len() != s.matrices.len() || s.grid.len() < 2 {
                anyhow::bail!("samples need matching grid and matrices with at least 2 nodes");
            }
            let eps = 1e-9 * (1.0 + self.interval[1].abs() + self.interval[0].abs());
            if (s.grid[0] - self.interval[0]).abs() > eps
                || (s.grid[s.grid.len() - 1] - self.interval[1]).abs() > eps
            {
                anyhow::bail!("sample grid must span the configured interval");
            }
        }
        Ok(())
    }

    /// Tolerance set after applying config-file and command-line overrides.
    pub fn tolerances(&self, cli_overrides: &[(String, f64)]) -> anyhow::Result<Tol> {
        let mut tol = Tol::default();
        if let Some(map) = &self.tolerances {
            for (k, v) in map {
                tol.set_named(k, *v).map_err(|e| anyhow::anyhow!("{e}"))?;
            }
        }
        for (k, v) in cli_overrides {
            tol.set_named(k, *v).map_err(|e| anyhow::anyhow!("{e}"))?;
        }
        Ok(tol)
    }

    /// Methods requested for the `sf` run, defaulting to all four.
    pub fn methods(&self, cli_methods: &Option<Vec<String>>) -> anyhow::Result<Vec<Method>> {
        let names: Vec<String> = cli_methods
            .clone()
            .or_else(|| self.methods.clone())
            .unwrap_or_else(|| {
                ["morse", "crossing", "maslov", "oracle"]
                    .iter()
                    .map(|s| s.to_string())
                    .collect()
            });
        names
            .iter()
            .map(|m| match m.as_str() {
                "morse" => Ok(Method::Morse),
                "crossing" => Ok(Method::Crossing),
                "maslov" => Ok(Method::Maslov),
                "oracle" => Ok(Method::Oracle),
                other => anyhow::bail!("unknown method `{other}`"),
            })
            .collect()
    }

    /// Build the operator path this configuration describes.
    pub fn operator_path(&self, seed_override: Option<u64>) -> anyhow::Result<OperatorPath> {
        let [a, b] = self.interval;
        match self.kind {
            Kind::SturmLiouville => {
                let length = self.domain_length.expect("validated");
                let v = self.potential.unwrap_or(0.0);
                specflow_core::bifurcate::discretize_sturm_liouville(
                    self.dimension,
                    length,
                    move |_| v,
                    (a, b),
                )
                .map_err(|e| anyhow::anyhow!("{e}"))
            }
            Kind::ExplicitSamples => {
                let spec = self
                    .samples
                    .as_ref()
                    .ok_or_else(|| anyhow::anyhow!("explicit-samples configs need `samples`"))?;
                let mats = spec
                    .matrices
                    .iter()
                    .map(|rows| parse_matrix(rows, self.dimension, self.dimension))
                    .collect::<anyhow::Result<Vec<_>>>()?;
                OperatorPath::from_samples(spec.grid.clone(), mats)
                    .map_err(|e| anyhow::anyhow!("{e}"))
            }
            Kind::RandomSeeded => {
                let seed = seed_override
                    .or(self.seed)
                    .ok_or_else(|| anyhow::anyhow!("random-seeded problems require a seed"))?;
                let mut rng = pathgen::rng(seed);
                let base = match self.crossings {
                    Some(c) => pathgen::seeded_crossing_path(self.dimension, c, &mut rng),
                    None => {
                        let tol = Tol::default();
                        pathgen::random_regular_path(self.dimension, &mut rng, &tol)
                    }
                };
                remap_interval(base, a, b).map_err(|e| anyhow::anyhow!("{e}"))
            }
        }
    }

    /// Build the Lagrangian path for the `maslov` subcommand: explicit frames
    /// when given, otherwise the graph path of the operator family.
    pub fn lagrangian_path(
        &self,
        seed_override: Option<u64>,
        tol: &Tol,
    ) -> anyhow::Result<LagrangianPath> {
        if let Some(spec) = &self.frames {
            let n = self.dimension;
            let mut samples = Vec::with_capacity(spec.grid.len());
            for (t, rows) in spec.grid.iter().zip(spec.frames.iter()) {
                let m = parse_matrix(rows, 2 * n, n)?;
                let frame =
                    LagrangianFrame::from_frame(m, tol).map_err(|e| anyhow::anyhow!("{e}"))?;
                samples.push((*t, frame));
            }
            return LagrangianPath::from_samples(samples, tol).map_err(|e| anyhow::anyhow!("{e}"));
        }
        let op = self.operator_path(seed_override)?;
        op.graph_path(tol).map_err(|e| anyhow::anyhow!("{e}"))
    }

    /// Reference Lagrangian for the relative Maslov index.
    pub fn maslov_reference(&self, tol: &Tol) -> anyhow::Result<LagrangianFrame> {
        let n = self.dimension;
        let spec = self.maslov.as_ref().and_then(|m| m.reference.as_ref());
        match spec {
            None => Ok(LagrangianFrame::h0(n)),
            Some(serde_json::Value::String(s)) => match s.as_str() {
                "h0" => Ok(LagrangianFrame::h0(n)),
                "h1" => Ok(LagrangianFrame::h1(n)),
                other => anyhow::bail!("unknown reference `{other}`"),
            },
            Some(v) => {
                let rows: Vec<Vec<f64>> =
                    serde_json::from_value(v.clone()).map_err(|e| anyhow::anyhow!("{e}"))?;
                let m = parse_matrix(&rows, 2 * n, n)?;
                LagrangianFrame::from_frame(m, tol).map_err(|e| anyhow::anyhow!("{e}"))
            }
        }
    }

    pub fn maslov_mode(&self) -> &str {
        self.maslov.as_ref().map(|m| m.mode.as_str()).unwrap_or("relative")
    }

    /// Variational family for the `bifurcate` subcommand.
    pub fn family(
        &self,
        seed_override: Option<u64>,
    ) -> anyhow::Result<specflow_core::bifurcate::VariationalFamily> {
        use specflow_core::bifurcate::VariationalFamily;
        let path = self.operator_path(seed_override)?;
        let spec = self.nonlinearity.clone().unwrap_or(NonlinSpec {
            name: "none".into(),
            coefficient: 0.0,
        });
        let fam = match spec.name.as_str() {
            "cubic" => VariationalFamily::cubic(path, spec.coefficient),
            "quintic" => VariationalFamily::quintic(path, spec.coefficient),
            "none" => VariationalFamily::linear_only(path),
            other => anyhow::bail!("unknown nonlinearity `{other}`"),
        };
        fam.map_err(|e| anyhow::anyhow!("{e}"))
    }
}

fn parse_matrix(rows: &[Vec<f64>], nrows: usize, ncols: usize) -> anyhow::Result<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        anyhow::bail!("matrix must be {nrows} x {ncols} row-major");
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(nrows, ncols, &flat))
}

/// Affinely reparametrize a family from its native interval onto `[a, b]`.
fn remap_interval(
    base: OperatorPath,
    a: f64,
    b: f64,
) -> specflow_core::Result<OperatorPath> {
    let (a0, b0) = base.interval();
    if (a0 - a).abs() < 1e-12 && (b0 - b).abs() < 1e-12 {
        return Ok(base);
    }
    let dim = base.dim();
    let scale = (b0 - a0) / (b - a);
    let inner = Arc::new(base);
    let eval = inner.clone();
    let deriv = inner.clone();
    OperatorPath::from_fn(a, b, dim, move |l| eval.eval(a0 + (l - a) * scale))
        .map(|p| p.with_derivative(move |l| deriv.derivative(a0 + (l - a) * scale) * scale))
}
