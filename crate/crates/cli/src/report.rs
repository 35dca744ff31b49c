//! Report assembly and atomic output. Reports are JSON for machines plus an
//! aligned text summary; field order is fixed by the struct layout so
//! identical runs produce byte-identical files.

use std::path::{Path, PathBuf};

use serde::Serialize;

use specflow_core::bifurcate::BifurcationReport;
use specflow_core::specflow::SpectralFlowResult;
use specflow_core::Tol;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
pub struct ToleranceEcho {
    pub orth: f64,
    pub lagr: f64,
    pub gap: f64,
    pub rank: f64,
    pub sym: f64,
    pub inv: f64,
    pub nd: f64,
    pub loc: f64,
    pub path_gap: f64,
    pub rank_gap_factor: f64,
}

impl From<&Tol> for ToleranceEcho {
    fn from(t: &Tol) -> Self {
        ToleranceEcho {
            orth: t.orth,
            lagr: t.lagr,
            gap: t.gap,
            rank: t.rank,
            sym: t.sym,
            inv: t.inv,
            nd: t.nd,
            loc: t.loc,
            path_gap: t.path_gap,
            rank_gap_factor: t.rank_gap_factor,
        }
    }
}

#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub version: &'static str,
    pub command: String,
    pub kind: String,
    pub interval: [f64; 2],
    pub dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<&'static str>,
    pub tolerances: ToleranceEcho,
    pub results: T,
}

#[derive(Serialize)]
pub struct CrossingOut {
    pub lambda: f64,
    pub kernel_dim: usize,
    pub signature: i64,
    pub nondegenerate: bool,
}

#[derive(Serialize)]
pub struct MethodOut {
    pub method: String,
    pub value: i64,
    pub endpoint_margin: f64,
    pub samples_used: usize,
    pub crossings: Vec<CrossingOut>,
}

impl From<&SpectralFlowResult> for MethodOut {
    fn from(r: &SpectralFlowResult) -> Self {
        MethodOut {
            method: r.method.to_string(),
            value: r.value,
            endpoint_margin: r.diagnostics.endpoint_margin,
            samples_used: r.diagnostics.samples_used,
            crossings: r
                .crossings
                .iter()
                .map(|c| CrossingOut {
                    lambda: c.lambda,
                    kernel_dim: c.kernel_basis.ncols(),
                    signature: c.signature,
                    nondegenerate: c.nondegenerate,
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct SfResults {
    pub methods: Vec<MethodOut>,
    pub agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<i64>,
}

#[derive(Serialize)]
pub struct MaslovResults {
    pub mode: String,
    pub index: i64,
}

#[derive(Serialize)]
pub struct ParametrixResults {
    pub dim_f: usize,
    pub suspension: usize,
    pub samples: usize,
    pub certificate_margin: f64,
    pub certificate_threshold: f64,
    pub certificate_checked: usize,
    pub replay_margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureOut>,
}

#[derive(Serialize)]
pub struct FailureOut {
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
}

#[derive(Serialize)]
pub struct CandidateOut {
    pub lambda: f64,
    pub kernel_dim: usize,
    pub signature: i64,
    pub certified: bool,
}

#[derive(Serialize)]
pub struct BranchPointOut {
    pub lambda: f64,
    pub norm: f64,
    pub residual: f64,
}

#[derive(Serialize)]
pub struct BranchOut {
    pub lambda_star: f64,
    pub verified: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    pub points: Vec<BranchPointOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Serialize)]
pub struct BifurcateResults {
    pub candidates: Vec<CandidateOut>,
    pub total_sf: i64,
    pub guaranteed_count: i64,
    pub max_kernel_dim: usize,
    pub excluded_near_endpoints: Vec<f64>,
    pub branches: Vec<BranchOut>,
}

impl From<&BifurcationReport> for BifurcateResults {
    fn from(r: &BifurcationReport) -> Self {
        BifurcateResults {
            candidates: r
                .candidates
                .iter()
                .map(|c| CandidateOut {
                    lambda: c.lambda,
                    kernel_dim: c.kernel_dim,
                    signature: c.signature,
                    certified: c.certified,
                })
                .collect(),
            total_sf: r.total_sf,
            guaranteed_count: r.guaranteed_count,
            max_kernel_dim: r.max_kernel_dim,
            excluded_near_endpoints: r.excluded_near_endpoints.clone(),
            branches: r
                .branches
                .iter()
                .map(|b| BranchOut {
                    lambda_star: b.lambda_star,
                    verified: b.verified,
                    exponent: b.exponent,
                    points: b
                        .points
                        .iter()
                        .map(|p| BranchPointOut {
                            lambda: p.lambda,
                            norm: p.norm,
                            residual: p.residual,
                        })
                        .collect(),
                    failure: b.failure.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct TraceResults {
    pub rows: usize,
    pub branches: usize,
    pub csv: String,
}

/// Write bytes atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let tmp = PathBuf::from(format!("{}.tmp", path.display()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, report: &Report<T>) -> anyhow::Result<()> {
    let mut out = serde_json::to_vec_pretty(report)?;
    out.push(b'\n');
    write_atomic(path, &out)
}

/// Aligned two-column text block.
pub fn summary_block(title: &str, rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut s = String::new();
    s.push_str(title);
    s.push('\n');
    s.push_str(&"-".repeat(title.len()));
    s.push('\n');
    for (k, v) in rows {
        s.push_str(&format!("{k:<width$}  {v}\n"));
    }
    s
}
