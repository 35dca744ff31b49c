//! Spectral flow of paths of real symmetric matrices.
//!
//! The spectral flow of an admissible family `λ ↦ A_λ` (continuous, symmetric,
//! invertible at both endpoints) is the net number of eigenvalues crossing
//! zero, counted with sign: an eigenvalue moving from negative to positive
//! contributes `+1`. Four independent engines compute it:
//!
//! - [`spectral_flow_via_morse`]: difference of endpoint Morse indices,
//!   `μ(A_a) − μ(A_b)` (valid in finite dimension).
//! - [`spectral_flow_via_crossings`]: sum of crossing-form signatures
//!   `sign Q(λ*)`, `Q(h) = ⟨Ȧ_{λ*} h, h⟩` on `ker A_{λ*}`, over the isolated
//!   nondegenerate crossings.
//! - [`spectral_flow_via_maslov`]: the relative Maslov index of the path of
//!   graph Lagrangians against the horizontal `H₀`, computed after symplectic
//!   reduction modulo a common isotropic subspace.
//! - [`eigenvalue_tracking_oracle`]: a brute-force referee that follows every
//!   eigenvalue branch by eigenvector continuity and counts signed zero
//!   crossings.
//!
//! All four agree exactly on admissible paths; the test suites enforce this.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grassmann::{relative_maslov_index, FrameGen, LagrangianPath};
use crate::linalg::{self, Mat};
use crate::reduction::{self, ReductionContext};
use crate::symlin::{graph_lagrangian, LagrangianFrame};
use crate::tol::Tol;

type EvalFn = Arc<dyn Fn(f64) -> Mat + Send + Sync>;

/// A continuous family `λ ↦ A_λ` of real symmetric matrices on `[a, b]`.
///
/// Evaluation must be a pure function of `λ`; engines may sample concurrently.
#[derive(Clone)]
pub struct OperatorPath {
    a: f64,
    b: f64,
    dim: usize,
    eval: EvalFn,
    deriv: Option<EvalFn>,
}

impl std::fmt::Debug for OperatorPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorPath")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("dim", &self.dim)
            .field("analytic_derivative", &self.deriv.is_some())
            .finish()
    }
}

impl OperatorPath {
    /// Wrap a closed-form generator. Symmetry is spot-checked at a handful of
    /// probe parameters; evaluation symmetrizes roundoff afterwards.
    pub fn from_fn<F>(a: f64, b: f64, dim: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Mat + Send + Sync + 'static,
    {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInput(format!(
                "invalid parameter interval [{a}, {b}]"
            )));
        }
        let tol = Tol::default();
        for k in 0..5 {
            let l = a + (b - a) * (k as f64) / 4.0;
            let m = f(l);
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "operator path evaluation",
                    expected: dim,
                    got: m.nrows(),
                });
            }
            linalg::check_symmetric(&m, &tol)?;
        }
        Ok(OperatorPath {
            a,
            b,
            dim,
            eval: Arc::new(f),
            deriv: None,
        })
    }

    /// Attach an analytic derivative `λ ↦ Ȧ_λ`.
    pub fn with_derivative<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> Mat + Send + Sync + 'static,
    {
        self.deriv = Some(Arc::new(d));
        self
    }

    /// Piecewise-linear interpolation of samples on a strictly increasing
    /// grid. Evaluation outside the grid extrapolates the end segments.
    pub fn from_samples(grid: Vec<f64>, mats: Vec<Mat>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != mats.len() {
            return Err(Error::InvalidInput(
                "sampled path needs at least two nodes and one matrix per node".into(),
            ));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(
                "sample grid must be strictly increasing".into(),
            ));
        }
        let dim = mats[0].nrows();
        let tol = Tol::default();
        for m in &mats {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "sampled operator path",
                    expected: dim,
                    got: m.nrows(),
                });
            }
            linalg::check_symmetric(m, &tol)?;
        }
        let a = grid[0];
        let b = *grid.last().unwrap();
        let grid = Arc::new(grid);
        let mats = Arc::new(mats);
        let (g, ms) = (grid.clone(), mats.clone());
        let f = move |l: f64| {
            let (i, s) = locate(&g, l);
            &ms[i] * (1.0 - s) + &ms[i + 1] * s
        };
        let d = move |l: f64| {
            let (i, _) = locate(&grid, l);
            let h = grid[i + 1] - grid[i];
            (&mats[i + 1] - &mats[i]) / h
        };
        Ok(OperatorPath {
            a,
            b,
            dim,
            eval: Arc::new(f),
            deriv: Some(Arc::new(d)),
        })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, l: f64) -> Mat {
        linalg::symmetrize(&(self.eval)(l))
    }

    /// `Ȧ_λ`: the analytic derivative when supplied, otherwise central
    /// differences with one step of Richardson extrapolation.
    pub fn derivative(&self, l: f64) -> Mat {
        if let Some(d) = &self.deriv {
            return linalg::symmetrize(&d(l));
        }
        let h = 1e-6f64.max(1e-6 * l.abs());
        let diff = |h: f64| (self.eval(l + h) - self.eval(l - h)) / (2.0 * h);
        let d1 = diff(h);
        let d2 = diff(h / 2.0);
        (d2 * 4.0 - d1) / 3.0
    }

    /// Endpoint invertibility check required by every spectral-flow entry
    /// point. Returns the endpoint spectral radius used as the scale for the
    /// absolute singularity threshold `tol.inv * scale`.
    pub fn admissible_scale(&self, tol: &Tol) -> Result<f64> {
        let ma = self.eval(self.a);
        let mb = self.eval(self.b);
        let scale = linalg::spectral_radius_sym(&ma).max(linalg::spectral_radius_sym(&mb));
        if scale <= 0.0 {
            return Err(Error::SingularEndpoint {
                at: self.a,
                eigenvalue: 0.0,
            });
        }
        let thresh = tol.inv * scale;
        for (at, m) in [(self.a, &ma), (self.b, &mb)] {
            let e = linalg::min_abs_eig_sym(m);
            if e <= thresh {
                return Err(Error::SingularEndpoint { at, eigenvalue: e });
            }
        }
        Ok(scale)
    }

    /// The same family restricted to a subinterval.
    pub fn restricted(&self, a: f64, b: f64) -> Result<Self> {
        if !(self.a <= a && a < b && b <= self.b) {
            return Err(Error::InvalidInput(format!(
                "[{a}, {b}] is not a subinterval of [{}, {}]",
                self.a, self.b
            )));
        }
        Ok(OperatorPath {
            a,
            b,
            dim: self.dim,
            eval: self.eval.clone(),
            deriv: self.deriv.clone(),
        })
    }

    /// The family traversed backwards.
    pub fn reversed(&self) -> Self {
        let (a, b) = (self.a, self.b);
        let eval = self.eval.clone();
        let deriv = self.deriv.clone();
        OperatorPath {
            a,
            b,
            dim: self.dim,
            eval: Arc::new(move |l| eval(a + b - l)),
            deriv: deriv.map(|d| {
                let d: EvalFn = Arc::new(move |l: f64| d(a + b - l) * -1.0);
                d
            }),
        }
    }

    /// The path of graph Lagrangians `λ ↦ Gr A_λ` as a generated frame path.
    pub fn graph_path(&self, tol: &Tol) -> Result<LagrangianPath> {
        let eval = self.clone();
        let t = *tol;
        let gen: FrameGen = Arc::new(move |l| graph_lagrangian(&eval.eval(l), &t));
        LagrangianPath::from_generator(self.a, self.b, gen, 33, tol)
    }
}

fn locate(grid: &[f64], l: f64) -> (usize, f64) {
    let n = grid.len();
    let i = match grid.binary_search_by(|g| g.partial_cmp(&l).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    };
    let s = (l - grid[i]) / (grid[i + 1] - grid[i]);
    (i, s)
}

/// Evidence for one singular parameter of a path.
#[derive(Debug, Clone)]
pub struct CrossingReport {
    pub lambda: f64,
    /// Orthonormal basis of `ker A_{λ*}`.
    pub kernel_basis: Mat,
    /// Crossing form `kernelᵀ · Ȧ_{λ*} · kernel`, symmetrized.
    pub form: Mat,
    /// Signature of the crossing form.
    pub signature: i64,
    /// Whether every crossing-form eigenvalue clears the `nd` tolerance.
    pub nondegenerate: bool,
}

/// Which engine produced a spectral-flow value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Morse,
    Crossing,
    Maslov,
    Oracle,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Morse => "morse",
            Method::Crossing => "crossing",
            Method::Maslov => "maslov",
            Method::Oracle => "oracle",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// Smallest endpoint eigenvalue magnitude relative to the scale.
    pub endpoint_margin: f64,
    /// Number of path evaluations the engine consumed.
    pub samples_used: usize,
}

#[derive(Debug, Clone)]
pub struct SpectralFlowResult {
    pub value: i64,
    pub method: Method,
    /// Per-crossing evidence (crossing engine only).
    pub crossings: Vec<CrossingReport>,
    pub diagnostics: Diagnostics,
}

/// Morse index: the number of eigenvalues below `−tol.inv · scale`.
/// Eigenvalues inside the tolerance band make the index ill-defined.
pub fn morse_index(m: &Mat, tol: &Tol) -> Result<usize> {
    let (vals, _) = linalg::sym_eigen(m);
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let thresh = tol.inv * scale;
    if let Some(&e) = vals.iter().find(|v| v.abs() <= thresh.max(f64::MIN_POSITIVE)) {
        return Err(Error::SingularOperator { eigenvalue: e });
    }
    Ok(vals.iter().filter(|&&v| v < 0.0).count())
}

/// Spectral flow as the difference of endpoint Morse indices,
/// `μ(A_a) − μ(A_b)`.
pub fn spectral_flow_via_morse(path: &OperatorPath, tol: &Tol) -> Result<SpectralFlowResult> {
    let scale = path.admissible_scale(tol)?;
    let (a, b) = path.interval();
    let ma = path.eval(a);
    let mb = path.eval(b);
    let mu_a = morse_index(&ma, tol)? as i64;
    let mu_b = morse_index(&mb, tol)? as i64;
    let margin = linalg::min_abs_eig_sym(&ma).min(linalg::min_abs_eig_sym(&mb)) / scale;
    Ok(SpectralFlowResult {
        value: mu_a - mu_b,
        method: Method::Morse,
        crossings: Vec::new(),
        diagnostics: Diagnostics {
            endpoint_margin: margin,
            samples_used: 2,
        },
    })
}

/// Relative Morse index
/// `dim(E₋(A_a) ∩ E₊(A_b)) − dim(E₋(A_b) ∩ E₊(A_a))`
/// for two invertible symmetric matrices, intersections computed by
/// principal-angle rank counts.
pub fn relative_morse_index(aa: &Mat, ab: &Mat, tol: &Tol) -> Result<i64> {
    if aa.nrows() != ab.nrows() {
        return Err(Error::DimensionMismatch {
            context: "relative Morse index",
            expected: aa.nrows(),
            got: ab.nrows(),
        });
    }
    let neg_a = eigenspace(aa, tol, false)?;
    let pos_a = eigenspace(aa, tol, true)?;
    let neg_b = eigenspace(ab, tol, false)?;
    let pos_b = eigenspace(ab, tol, true)?;
    let d1 = intersection_dim(&neg_a, &pos_b, tol)?;
    let d2 = intersection_dim(&neg_b, &pos_a, tol)?;
    Ok(d1 as i64 - d2 as i64)
}

fn eigenspace(m: &Mat, tol: &Tol, positive: bool) -> Result<Mat> {
    let (vals, vecs) = linalg::sym_eigen(m);
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let thresh = tol.inv * scale;
    if let Some(&e) = vals.iter().find(|v| v.abs() <= thresh.max(f64::MIN_POSITIVE)) {
        return Err(Error::SingularOperator { eigenvalue: e });
    }
    let cols: Vec<usize> = (0..vals.len())
        .filter(|&i| (vals[i] > 0.0) == positive)
        .collect();
    let mut out = Mat::zeros(m.nrows(), cols.len());
    for (k, &i) in cols.iter().enumerate() {
        out.set_column(k, &vecs.column(i));
    }
    Ok(out)
}

fn intersection_dim(a: &Mat, b: &Mat, tol: &Tol) -> Result<usize> {
    let total = a.ncols() + b.ncols();
    if total == 0 {
        return Ok(0);
    }
    let stacked = linalg::hcat(&[a, b]);
    let svals = linalg::singular_values(&stacked);
    let rank = linalg::rank_with_gap(&svals, tol, "eigenspace intersection")?;
    Ok(total - rank)
}

/// Parameters where the family becomes singular, located by sign-tracking of
/// the eigenvalue branches with bisection to `tol.loc`; an even-order touch
/// of zero is caught by a parabolic dip check. Roots closer than `10·tol.loc`
/// are merged. A branch staying inside the singularity band over consecutive
/// samples is reported as a non-isolated singularity.
pub fn singular_set(path: &OperatorPath, tol: &Tol) -> Result<Vec<f64>> {
    let scale = path.admissible_scale(tol)?;
    let thresh = tol.inv * scale;
    let track = track_branches(path, 129, tol)?;
    let n_branches = path.dim();
    let mut roots: Vec<f64> = Vec::new();

    for k in 0..n_branches {
        let vals: Vec<f64> = track.values.iter().map(|v| v[k]).collect();
        let banded: Vec<bool> = vals.iter().map(|v| v.abs() < thresh).collect();
        // Interval of singularity?
        let mut run = 0usize;
        for (i, &b) in banded.iter().enumerate() {
            if b {
                run += 1;
                if run >= 3 {
                    return Err(Error::NonIsolatedSingularity {
                        lo: track.ts[i + 1 - run],
                        hi: track.ts[i],
                    });
                }
            } else {
                run = 0;
            }
        }
        // Samples sitting inside the band: locate against the flanking
        // non-banded values, bisecting when they change sign.
        for i in 0..vals.len() {
            if !banded[i] {
                continue;
            }
            let prev = (0..i).rev().find(|&j| !banded[j]);
            let next = (i + 1..vals.len()).find(|&j| !banded[j]);
            match (prev, next) {
                (Some(p), Some(q)) if vals[p] * vals[q] < 0.0 => {
                    roots.push(bisect_branch(path, track.ts[p], track.ts[q], vals[p], vals[q], tol));
                }
                _ => roots.push(track.ts[i]),
            }
        }
        // Sign changes between consecutive non-banded samples.
        for i in 0..vals.len() - 1 {
            if !banded[i] && !banded[i + 1] && vals[i] * vals[i + 1] < 0.0 {
                roots.push(bisect_branch(
                    path,
                    track.ts[i],
                    track.ts[i + 1],
                    vals[i],
                    vals[i + 1],
                    tol,
                ));
            }
        }
        // Even-order touches: parabolic dip below the band between samples.
        for i in 1..vals.len() - 1 {
            let (vm, v0, vp) = (vals[i - 1], vals[i], vals[i + 1]);
            if banded[i - 1] || banded[i] || banded[i + 1] {
                continue;
            }
            if v0.abs() < vm.abs() && v0.abs() < vp.abs() && vm * v0 > 0.0 && v0 * vp > 0.0 {
                let curv = vm - 2.0 * v0 + vp;
                if curv.abs() > 0.0 {
                    let offset = 0.5 * (vm - vp) / curv;
                    let vertex = v0 - 0.25 * (vm - vp) * offset;
                    if vertex.abs() < thresh && offset.abs() <= 1.0 {
                        let h = track.ts[i + 1] - track.ts[i];
                        roots.push(track.ts[i] + offset * h);
                    }
                }
            }
        }
    }

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged: Vec<f64> = Vec::new();
    for r in roots {
        match merged.last() {
            Some(&last) if (r - last).abs() < 10.0 * tol.loc => {}
            _ => merged.push(r),
        }
    }
    Ok(merged)
}

fn bisect_branch(path: &OperatorPath, mut lo: f64, mut hi: f64, v_lo: f64, v_hi: f64, tol: &Tol) -> f64 {
    let mut f_lo = v_lo;
    let mut f_hi = v_hi;
    while hi - lo > tol.loc {
        let mid = 0.5 * (lo + hi);
        let pred = f_lo + (f_hi - f_lo) * 0.5;
        let (vals, _) = linalg::sym_eigen(&path.eval(mid));
        // Follow the branch by nearest value to the secant prediction.
        let v = vals
            .iter()
            .copied()
            .min_by(|a, b| (a - pred).abs().partial_cmp(&(b - pred).abs()).unwrap())
            .unwrap();
        if v * f_lo <= 0.0 {
            hi = mid;
            f_hi = v;
        } else {
            lo = mid;
            f_lo = v;
        }
    }
    0.5 * (lo + hi)
}

/// Kernel basis and crossing form at a singular parameter.
///
/// The kernel cut is absolute against the endpoint spectral scale of the
/// path: at a located crossing the kernel eigenvalues sit at the bisection
/// tolerance while every other eigenvalue is of order the path scale, and a
/// pointwise-relative threshold would misread the case where the whole
/// spectrum is small.
pub fn crossing_form(path: &OperatorPath, lambda: f64, tol: &Tol) -> Result<CrossingReport> {
    let scale = path.admissible_scale(tol)?;
    let m = path.eval(lambda);
    let (vals, vecs) = linalg::sym_eigen(&m);
    let cut = tol.rank.sqrt() * scale;
    let cols: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() < cut).collect();
    if cols.is_empty() {
        return Err(Error::InvalidInput(format!(
            "λ = {lambda} is not in the singular set"
        )));
    }
    let max_dropped = cols.iter().map(|&i| vals[i].abs()).fold(0.0, f64::max);
    let min_kept = (0..vals.len())
        .filter(|i| !cols.iter().any(|c| c == i))
        .map(|i| vals[i].abs())
        .fold(f64::INFINITY, f64::min);
    if min_kept.is_finite() && max_dropped > 0.0 && min_kept / max_dropped < tol.rank_gap_factor {
        return Err(Error::NumericallyAmbiguous {
            context: "kernel extraction at a crossing",
            ratio: min_kept / max_dropped,
        });
    }
    let mut kernel = Mat::zeros(path.dim(), cols.len());
    for (k, &i) in cols.iter().enumerate() {
        kernel.set_column(k, &vecs.column(i));
    }
    let da = path.derivative(lambda);
    let form = linalg::symmetrize(&(kernel.transpose() * da * &kernel));
    let (fvals, _) = linalg::sym_eigen(&form);
    let (signature, nondegenerate) = linalg::signature(&fvals, tol.nd);
    Ok(CrossingReport {
        lambda,
        kernel_basis: kernel,
        form,
        signature,
        nondegenerate,
    })
}

/// Spectral flow as the sum of crossing-form signatures. Requires every
/// crossing to be nondegenerate; callers should fall back to the Maslov or
/// oracle engines otherwise.
pub fn spectral_flow_via_crossings(path: &OperatorPath, tol: &Tol) -> Result<SpectralFlowResult> {
    let scale = path.admissible_scale(tol)?;
    let singular = singular_set(path, tol)?;
    let crossings: Vec<CrossingReport> = singular
        .iter()
        .map(|&l| crossing_form(path, l, tol))
        .collect::<Result<_>>()?;
    if let Some(bad) = crossings.iter().find(|c| !c.nondegenerate) {
        return Err(Error::DegenerateCrossing { at: bad.lambda });
    }
    let value = crossings.iter().map(|c| c.signature).sum();
    let (a, b) = path.interval();
    let margin = linalg::min_abs_eig_sym(&path.eval(a))
        .min(linalg::min_abs_eig_sym(&path.eval(b)))
        / scale;
    Ok(SpectralFlowResult {
        value,
        method: Method::Crossing,
        crossings,
        diagnostics: Diagnostics {
            endpoint_margin: margin,
            samples_used: 129,
        },
    })
}

/// Spectral flow as the relative Maslov index of the graph path against the
/// horizontal Lagrangian, computed in the symplectic reduction modulo a
/// common isotropic subspace of the family.
pub fn spectral_flow_via_maslov(path: &OperatorPath, tol: &Tol) -> Result<SpectralFlowResult> {
    spectral_flow_via_maslov_with(path, tol, None)
}

/// Same as [`spectral_flow_via_maslov`] but with a caller-chosen isotropic
/// subspace of `H` (used to exercise independence of the choice).
pub fn spectral_flow_via_maslov_with(
    path: &OperatorPath,
    tol: &Tol,
    iso_override: Option<&crate::symlin::Subspace>,
) -> Result<SpectralFlowResult> {
    let scale = path.admissible_scale(tol)?;
    let (a, b) = path.interval();
    // Pin samples at the singular parameters so the kernel directions are
    // visible to the isotropic-subspace selection; the index itself still
    // comes from the winding alone.
    let knots = singular_set(path, tol).unwrap_or_default();
    let graph_inner = path.clone();
    let t = *tol;
    let graph_gen: FrameGen = Arc::new(move |l| graph_lagrangian(&graph_inner.eval(l), &t));
    let gpath = LagrangianPath::from_generator_with_knots(a, b, graph_gen, 33, &knots, tol)?;
    let iso_h = match iso_override {
        Some(s) => s.clone(),
        None => reduction::common_isotropic(&gpath, tol)?,
    };
    let ctx = ReductionContext::from_h_subspace(&iso_h, tol)?;
    let f_dim = ctx.reduced_half_dim();
    let inner = path.clone();
    let ctx_gen = ctx.clone();
    let gen: FrameGen = Arc::new(move |l| {
        let frame = graph_lagrangian(&inner.eval(l), &t)?;
        ctx_gen.reduce_clean(&frame, &t)
    });
    let rpath = LagrangianPath::from_generator_with_knots(a, b, gen, 33, &knots, tol)?;
    let samples = rpath.samples().len();
    let value = relative_maslov_index(&rpath, &LagrangianFrame::h0(f_dim), tol)?;
    let margin = linalg::min_abs_eig_sym(&path.eval(a))
        .min(linalg::min_abs_eig_sym(&path.eval(b)))
        / scale;
    Ok(SpectralFlowResult {
        value,
        method: Method::Maslov,
        crossings: Vec::new(),
        diagnostics: Diagnostics {
            endpoint_margin: margin,
            samples_used: samples,
        },
    })
}

pub const DEFAULT_ORACLE_SAMPLES: usize = 400;

/// Brute-force referee: track all eigenvalue branches by eigenvector
/// continuity and count signed zero crossings (up `+1`, down `−1`).
pub fn eigenvalue_tracking_oracle(
    path: &OperatorPath,
    samples: usize,
    tol: &Tol,
) -> Result<SpectralFlowResult> {
    let scale = path.admissible_scale(tol)?;
    let track = track_branches(path, samples.max(16), tol)?;
    let z = 1e3 * f64::EPSILON * scale;
    let mut value = 0i64;
    for k in 0..path.dim() {
        let mut last_sign = 0i64;
        for row in &track.values {
            let v = row[k];
            let s = if v > z {
                1
            } else if v < -z {
                -1
            } else {
                0
            };
            if s != 0 {
                if last_sign != 0 && s != last_sign {
                    value += if s > 0 { 1 } else { -1 };
                }
                last_sign = s;
            }
        }
    }
    let (a, b) = path.interval();
    let margin = linalg::min_abs_eig_sym(&path.eval(a))
        .min(linalg::min_abs_eig_sym(&path.eval(b)))
        / scale;
    Ok(SpectralFlowResult {
        value,
        method: Method::Oracle,
        crossings: Vec::new(),
        diagnostics: Diagnostics {
            endpoint_margin: margin,
            samples_used: track.ts.len(),
        },
    })
}

/// Run one engine.
pub fn compute_method(path: &OperatorPath, method: Method, tol: &Tol) -> Result<SpectralFlowResult> {
    match method {
        Method::Morse => spectral_flow_via_morse(path, tol),
        Method::Crossing => spectral_flow_via_crossings(path, tol),
        Method::Maslov => spectral_flow_via_maslov(path, tol),
        Method::Oracle => eigenvalue_tracking_oracle(path, DEFAULT_ORACLE_SAMPLES, tol),
    }
}

/// Run all four engines.
pub fn spectral_flow_all(path: &OperatorPath, tol: &Tol) -> Result<Vec<SpectralFlowResult>> {
    [Method::Morse, Method::Crossing, Method::Maslov, Method::Oracle]
        .iter()
        .map(|&m| compute_method(path, m, tol))
        .collect()
}

/// Eigenvalue branches along the path, matched between consecutive samples by
/// eigenvector overlap and refined adaptively where the matching is
/// ambiguous.
pub struct BranchTrack {
    pub ts: Vec<f64>,
    /// `values[i][k]` is branch `k` at `ts[i]`.
    pub values: Vec<Vec<f64>>,
}

pub fn track_branches(path: &OperatorPath, n_init: usize, _tol: &Tol) -> Result<BranchTrack> {
    let (a, b) = path.interval();
    let n = path.dim();
    let n_init = n_init.max(8);
    let base: Vec<f64> = (0..n_init)
        .map(|i| a + (b - a) * (i as f64) / ((n_init - 1) as f64))
        .collect();
    let decomps = crate::exec::map(&base, |&t| {
        let (vals, vecs) = linalg::sym_eigen(&path.eval(t));
        (t, vals, vecs)
    });

    let mut ts = vec![decomps[0].0];
    let mut values = vec![decomps[0].1.clone()];
    let mut vecs_prev = decomps[0].2.clone();
    let mut vals_prev = decomps[0].1.clone();

    for window in decomps.windows(2) {
        let (t1, vals1, vecs1) = (&window[1].0, &window[1].1, &window[1].2);
        extend_branch(
            path,
            &mut ts,
            &mut values,
            &mut vals_prev,
            &mut vecs_prev,
            *t1,
            vals1,
            vecs1,
            n,
            0,
        )?;
    }
    Ok(BranchTrack { ts, values })
}

#[allow(clippy::too_many_arguments)]
fn extend_branch(
    path: &OperatorPath,
    ts: &mut Vec<f64>,
    values: &mut Vec<Vec<f64>>,
    vals_prev: &mut Vec<f64>,
    vecs_prev: &mut Mat,
    t1: f64,
    vals1: &[f64],
    vecs1: &Mat,
    n: usize,
    depth: usize,
) -> Result<()> {
    match match_branches(vecs_prev, vals_prev, vals1, vecs1, n) {
        Some((perm_vals, perm_vecs)) => {
            ts.push(t1);
            values.push(perm_vals.clone());
            *vals_prev = perm_vals;
            *vecs_prev = perm_vecs;
            Ok(())
        }
        None => {
            if depth >= 14 {
                return Err(Error::BranchAmbiguity { at: t1 });
            }
            let t0 = *ts.last().unwrap();
            let tm = 0.5 * (t0 + t1);
            let (vals_m, vecs_m) = linalg::sym_eigen(&path.eval(tm));
            extend_branch(path, ts, values, vals_prev, vecs_prev, tm, &vals_m, &vecs_m, n, depth + 1)?;
            extend_branch(path, ts, values, vals_prev, vecs_prev, t1, vals1, vecs1, n, depth + 1)
        }
    }
}

/// Assign next-sample eigenpairs to branches by maximal eigenvector overlap.
/// Returns `None` when the greedy assignment is not a confident bijection.
fn match_branches(
    vecs_prev: &Mat,
    vals_prev: &[f64],
    vals1: &[f64],
    vecs1: &Mat,
    n: usize,
) -> Option<(Vec<f64>, Mat)> {
    let overlap = vecs_prev.transpose() * vecs1;
    let mut assigned = vec![usize::MAX; n]; // branch index per raw column
    let mut taken = vec![false; n];
    // Greedy over all (branch, column) pairs, best overlap first.
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            pairs.push((overlap[(i, j)].abs(), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut branch_done = vec![false; n];
    for (w, i, j) in pairs {
        if branch_done[i] || taken[j] {
            continue;
        }
        if w < 0.6 {
            // Even the best remaining association is weak: values may still
            // disambiguate inside a degenerate cluster.
            if (vals_prev[i] - vals1[j]).abs() > 1e-9 * (1.0 + vals_prev[i].abs()) {
                return None;
            }
        }
        assigned[j] = i;
        taken[j] = true;
        branch_done[i] = true;
    }
    if assigned.contains(&usize::MAX) {
        return None;
    }
    let mut new_vals = vec![0.0; n];
    let mut new_vecs = Mat::zeros(vecs1.nrows(), n);
    for j in 0..n {
        let i = assigned[j];
        new_vals[i] = vals1[j];
        let mut col = vecs1.column(j).into_owned();
        if overlap[(i, j)] < 0.0 {
            col = -col;
        }
        new_vecs.set_column(i, &col);
    }
    Some((new_vals, new_vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vect;
    use crate::pathgen;

    fn tol() -> Tol {
        Tol::default()
    }

    fn scalar_path() -> OperatorPath {
        OperatorPath::from_fn(-1.0, 1.0, 1, |l| Mat::from_element(1, 1, l))
            .unwrap()
            .with_derivative(|_| Mat::from_element(1, 1, 1.0))
    }

    #[test]
    fn morse_index_examples() {
        let t = tol();
        assert_eq!(morse_index(&Mat::identity(3, 3), &t).unwrap(), 0);
        assert_eq!(morse_index(&(-Mat::identity(3, 3)), &t).unwrap(), 3);
        let d = Mat::from_diagonal(&Vect::from_row_slice(&[-2.0, -1.0, 3.0]));
        assert_eq!(morse_index(&d, &t).unwrap(), 2);
        let s = Mat::from_diagonal(&Vect::from_row_slice(&[0.0, 1.0]));
        assert!(matches!(
            morse_index(&s, &t),
            Err(Error::SingularOperator { .. })
        ));
    }

    #[test]
    fn morse_flow_examples() {
        let t = tol();
        assert_eq!(spectral_flow_via_morse(&scalar_path(), &t).unwrap().value, 1);

        let constant = OperatorPath::from_fn(0.0, 1.0, 2, |_| Mat::identity(2, 2)).unwrap();
        assert_eq!(spectral_flow_via_morse(&constant, &t).unwrap().value, 0);

        let balanced = OperatorPath::from_fn(-1.0, 1.0, 2, |l| {
            Mat::from_diagonal(&Vect::from_row_slice(&[l, -l]))
        })
        .unwrap();
        assert_eq!(spectral_flow_via_morse(&balanced, &t).unwrap().value, 0);
    }

    #[test]
    fn relative_morse_examples() {
        let t = tol();
        let id = Mat::identity(2, 2);
        assert_eq!(relative_morse_index(&(-id.clone()), &id, &t).unwrap(), 2);
        assert_eq!(relative_morse_index(&id, &id, &t).unwrap(), 0);
    }

    #[test]
    fn relative_morse_equals_index_difference() {
        let t = tol();
        let mut rng = pathgen::rng(51);
        for _ in 0..200 {
            let aa = invertible_sym(4, &mut rng, &t);
            let ab = invertible_sym(4, &mut rng, &t);
            let lhs = relative_morse_index(&aa, &ab, &t).unwrap();
            let rhs = morse_index(&aa, &t).unwrap() as i64 - morse_index(&ab, &t).unwrap() as i64;
            assert_eq!(lhs, rhs);
        }
    }

    fn invertible_sym(n: usize, rng: &mut rand_chacha::ChaCha8Rng, t: &Tol) -> Mat {
        loop {
            let m = pathgen::random_symmetric(n, rng, 1.5);
            if linalg::min_abs_eig_sym(&m) > 1e-3 && morse_index(&m, t).is_ok() {
                return m;
            }
        }
    }

    #[test]
    fn singular_set_examples() {
        let t = tol();
        let roots = singular_set(&scalar_path(), &t).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].abs() < 1e-9);

        let two = OperatorPath::from_fn(0.0, 1.0, 2, |l| {
            Mat::from_diagonal(&Vect::from_row_slice(&[l - 0.25, l - 0.75]))
        })
        .unwrap();
        let roots = singular_set(&two, &t).unwrap();
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - 0.25).abs() < 1e-9);
        assert!((roots[1] - 0.75).abs() < 1e-9);

        let constant = OperatorPath::from_fn(0.0, 1.0, 2, |_| Mat::identity(2, 2)).unwrap();
        assert!(singular_set(&constant, &t).unwrap().is_empty());
    }

    #[test]
    fn singular_set_catches_even_touch() {
        let t = tol();
        // Eigenvalue λ² + tiny never changes sign but dips to ~0 at λ = 0.
        let touch = OperatorPath::from_fn(-1.0, 1.0, 2, |l| {
            Mat::from_diagonal(&Vect::from_row_slice(&[l * l, 1.0]))
        })
        .unwrap();
        let roots = singular_set(&touch, &t).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].abs() < 1e-4);
    }

    #[test]
    fn crossing_form_examples() {
        let t = tol();
        let up = crossing_form(&scalar_path(), 0.0, &t).unwrap();
        assert_eq!(up.signature, 1);
        assert!(up.nondegenerate);

        let down = OperatorPath::from_fn(-1.0, 1.0, 1, |l| Mat::from_element(1, 1, -l)).unwrap();
        let report = crossing_form(&down, 0.0, &t).unwrap();
        assert_eq!(report.signature, -1);

        // diag(λ, λ³): the second kernel direction has vanishing derivative.
        let cubic = OperatorPath::from_fn(-1.0, 1.0, 2, |l| {
            Mat::from_diagonal(&Vect::from_row_slice(&[l, l * l * l]))
        })
        .unwrap();
        let report = crossing_form(&cubic, 0.0, &t).unwrap();
        assert_eq!(report.kernel_basis.ncols(), 2);
        assert!(!report.nondegenerate);
        assert_eq!(report.signature, 1);
    }

    #[test]
    fn crossing_flow_examples() {
        let t = tol();
        assert_eq!(
            spectral_flow_via_crossings(&scalar_path(), &t).unwrap().value,
            1
        );

        let updown = OperatorPath::from_fn(0.0, 1.0, 2, |l| {
            Mat::from_diagonal(&Vect::from_row_slice(&[l - 0.25, 0.75 - l]))
        })
        .unwrap();
        let r = spectral_flow_via_crossings(&updown, &t).unwrap();
        assert_eq!(r.value, 0);
        assert_eq!(r.crossings.len(), 2);

        let constant = OperatorPath::from_fn(0.0, 1.0, 3, |_| {
            Mat::from_diagonal(&Vect::from_row_slice(&[1.0, -2.0, 3.0]))
        })
        .unwrap();
        assert_eq!(spectral_flow_via_crossings(&constant, &t).unwrap().value, 0);
    }

    #[test]
    fn oracle_examples() {
        let t = tol();
        assert_eq!(
            eigenvalue_tracking_oracle(&scalar_path(), 100, &t).unwrap().value,
            1
        );
        // Rotation-conjugated diag(λ, −λ): conjugation preserves spectra.
        let c = (0.7f64).cos();
        let s = (0.7f64).sin();
        let q = Mat::from_row_slice(2, 2, &[c, -s, s, c]);
        let qc = q.clone();
        let rot = OperatorPath::from_fn(-1.0, 1.0, 2, move |l| {
            &qc * Mat::from_diagonal(&Vect::from_row_slice(&[l, -l])) * qc.transpose()
        })
        .unwrap();
        assert_eq!(eigenvalue_tracking_oracle(&rot, 100, &t).unwrap().value, 0);
        assert_eq!(spectral_flow_via_morse(&rot, &t).unwrap().value, 0);
    }

    #[test]
    fn inadmissible_endpoint_rejected() {
        let t = tol();
        let bad = OperatorPath::from_fn(0.0, 1.0, 1, |l| Mat::from_element(1, 1, l)).unwrap();
        assert!(matches!(
            spectral_flow_via_morse(&bad, &t),
            Err(Error::SingularEndpoint { .. })
        ));
    }

    #[test]
    fn sampled_path_interpolates() {
        let t = tol();
        let grid = vec![-1.0, 0.5, 1.0];
        let mats = vec![
            Mat::from_element(1, 1, -1.0),
            Mat::from_element(1, 1, 0.5),
            Mat::from_element(1, 1, 1.0),
        ];
        let path = OperatorPath::from_samples(grid, mats).unwrap();
        assert!((path.eval(0.0)[(0, 0)] - 0.0).abs() < 1e-14);
        assert_eq!(spectral_flow_via_crossings(&path, &t).unwrap().value, 1);
    }

    #[test]
    fn reversal_negates_flow() {
        let t = tol();
        let mut rng = pathgen::rng(77);
        for _ in 0..10 {
            let path = pathgen::random_regular_path(3, &mut rng, &t);
            let fwd = spectral_flow_via_crossings(&path, &t).unwrap().value;
            let bwd = spectral_flow_via_crossings(&path.reversed(), &t).unwrap().value;
            assert_eq!(fwd, -bwd);
        }
    }
}
