//! Bifurcation detection for discretized variational families
//! `f(λ, u) = A_λ u + F(λ, u)` along the trivial branch `(λ, 0)`.
//!
//! Nontrivial solutions can only branch off where `A_λ` is singular; each
//! singular parameter with a nondegenerate crossing form of nonzero signature
//! is a certified bifurcation candidate, and the total spectral flow bounds
//! the number of bifurcation points from below by `|sf| / m` with `m` the
//! largest kernel dimension. [`branch_verify`] then produces a numerical
//! witness for simple candidates: a ladder of nontrivial solutions
//! `(λ_j, u_j) → (λ*, 0)` computed by a damped Newton iteration on the
//! amplitude-pinned augmented system, together with a fitted amplitude
//! scaling exponent.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vect};
use crate::specflow::{
    crossing_form, singular_set, spectral_flow_via_crossings, spectral_flow_via_maslov,
    OperatorPath,
};
use crate::tol::Tol;

type NonlinFn = Arc<dyn Fn(f64, &Vect) -> Vect + Send + Sync>;
type JacFn = Arc<dyn Fn(f64, &Vect) -> Mat + Send + Sync>;
type PotentialFn = Arc<dyn Fn(f64, &Vect) -> f64 + Send + Sync>;

/// A linear family plus a higher-order nonlinearity with `F(λ, 0) = 0` and
/// `D_u F(λ, 0) = 0`, optionally carrying a potential with
/// `dψ_λ(u)[v] = ⟨F_λ(u), v⟩` and an analytic `u`-Jacobian.
///
/// The constructor spot-checks the contracts by finite differences at seeded
/// random probes and rejects violations loudly.
#[derive(Clone)]
pub struct VariationalFamily {
    linear: OperatorPath,
    nonlin: NonlinFn,
    jacobian: Option<JacFn>,
    potential: Option<PotentialFn>,
    tag: String,
}

impl std::fmt::Debug for VariationalFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VariationalFamily")
            .field("linear", &self.linear)
            .field("tag", &self.tag)
            .field("has_jacobian", &self.jacobian.is_some())
            .field("has_potential", &self.potential.is_some())
            .finish()
    }
}

impl VariationalFamily {
    pub fn new<F>(linear: OperatorPath, tag: &str, nonlin: F) -> Result<Self>
    where
        F: Fn(f64, &Vect) -> Vect + Send + Sync + 'static,
    {
        let fam = VariationalFamily {
            linear,
            nonlin: Arc::new(nonlin),
            jacobian: None,
            potential: None,
            tag: tag.to_string(),
        };
        fam.check_contracts()?;
        Ok(fam)
    }

    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(f64, &Vect) -> Mat + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn with_potential<P>(mut self, p: P) -> Result<Self>
    where
        P: Fn(f64, &Vect) -> f64 + Send + Sync + 'static,
    {
        self.potential = Some(Arc::new(p));
        self.check_gradient_contract()?;
        Ok(self)
    }

    /// Family with cubic nonlinearity `F(u)_i = c·u_i³` and potential
    /// `ψ(u) = c/4 Σ u_i⁴`.
    pub fn cubic(linear: OperatorPath, coefficient: f64) -> Result<Self> {
        let c = coefficient;
        let fam = VariationalFamily::new(linear, "cubic", move |_, u: &Vect| {
            u.map(|x| c * x * x * x)
        })?
        .with_jacobian(move |_, u: &Vect| {
            Mat::from_diagonal(&u.map(|x| 3.0 * c * x * x))
        })
        .with_potential(move |_, u: &Vect| 0.25 * c * u.iter().map(|x| x.powi(4)).sum::<f64>())?;
        Ok(fam)
    }

    /// Family with quintic nonlinearity `F(u)_i = c·u_i⁵`.
    pub fn quintic(linear: OperatorPath, coefficient: f64) -> Result<Self> {
        let c = coefficient;
        let fam = VariationalFamily::new(linear, "quintic", move |_, u: &Vect| {
            u.map(|x| c * x.powi(5))
        })?
        .with_jacobian(move |_, u: &Vect| Mat::from_diagonal(&u.map(|x| 5.0 * c * x.powi(4))))
        .with_potential(move |_, u: &Vect| {
            c / 6.0 * u.iter().map(|x| x.powi(6)).sum::<f64>()
        })?;
        Ok(fam)
    }

    /// Family with no nonlinear term.
    pub fn linear_only(linear: OperatorPath) -> Result<Self> {
        let dim = linear.dim();
        VariationalFamily::new(linear, "none", move |_, _u: &Vect| Vect::zeros(dim))
    }

    pub fn linear_path(&self) -> &OperatorPath {
        &self.linear
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn nonlinearity(&self, lambda: f64, u: &Vect) -> Vect {
        (self.nonlin)(lambda, u)
    }

    /// Residual of the full equation, `A_λ u + F(λ, u)`.
    pub fn residual(&self, lambda: f64, u: &Vect) -> Vect {
        self.linear.eval(lambda) * u + (self.nonlin)(lambda, u)
    }

    /// `u`-Jacobian of the nonlinearity, analytic or by central differences.
    pub fn nonlin_jacobian(&self, lambda: f64, u: &Vect) -> Mat {
        if let Some(j) = &self.jacobian {
            return j(lambda, u);
        }
        let n = u.len();
        let h = 1e-6 * (1.0 + u.amax());
        let mut out = Mat::zeros(n, n);
        for j in 0..n {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[j] += h;
            dn[j] -= h;
            let col = ((self.nonlin)(lambda, &up) - (self.nonlin)(lambda, &dn)) / (2.0 * h);
            out.set_column(j, &col);
        }
        out
    }

    fn d_lambda_f(&self, lambda: f64, u: &Vect) -> Vect {
        let h = 1e-6 * (1.0 + lambda.abs());
        ((self.nonlin)(lambda + h, u) - (self.nonlin)(lambda - h, u)) / (2.0 * h)
    }

    fn check_contracts(&self) -> Result<()> {
        let (a, b) = self.linear.interval();
        let n = self.linear.dim();
        let mut rng = crate::pathgen::rng(0x5eed_c0de);
        let zero = Vect::zeros(n);
        for _ in 0..20 {
            let l = a + (b - a) * rng.random::<f64>();
            let f0 = (self.nonlin)(l, &zero);
            if f0.norm() >= 1e-12 {
                return Err(Error::ContractViolated(format!(
                    "F(λ, 0) = {:.3e} at λ = {l}",
                    f0.norm()
                )));
            }
            // Directional derivative at 0 must vanish.
            let v = crate::pathgen::random_vector(n, &mut rng).normalize();
            let h = 1e-5;
            let d = ((self.nonlin)(l, &(&v * h)) - (self.nonlin)(l, &(&v * (-h)))) / (2.0 * h);
            if d.norm() >= 1e-6 {
                return Err(Error::ContractViolated(format!(
                    "D_u F(λ, 0) = {:.3e} at λ = {l}",
                    d.norm()
                )));
            }
        }
        Ok(())
    }

    fn check_gradient_contract(&self) -> Result<()> {
        let Some(pot) = &self.potential else {
            return Ok(());
        };
        let (a, b) = self.linear.interval();
        let n = self.linear.dim();
        let mut rng = crate::pathgen::rng(0xfeed_5eed);
        for _ in 0..20 {
            let l = a + (b - a) * rng.random::<f64>();
            let u = crate::pathgen::random_vector(n, &mut rng) * 0.5;
            let v = crate::pathgen::random_vector(n, &mut rng).normalize();
            let h = 1e-5;
            let dpsi = (pot(l, &(&u + &v * h)) - pot(l, &(&u - &v * h))) / (2.0 * h);
            let pairing = (self.nonlin)(l, &u).dot(&v);
            if (dpsi - pairing).abs() >= 1e-6 * (1.0 + pairing.abs()) {
                return Err(Error::ContractViolated(format!(
                    "dψ(u)[v] = {dpsi:.6e} but ⟨F(u), v⟩ = {pairing:.6e} at λ = {l}"
                )));
            }
        }
        Ok(())
    }
}

/// A singular parameter with its crossing evidence.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub lambda: f64,
    pub kernel_dim: usize,
    pub signature: i64,
    /// Nondegenerate crossing with nonzero signature.
    pub certified: bool,
}

/// One solved point on a bifurcating branch.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub lambda: f64,
    pub u: Vect,
    pub norm: f64,
    pub residual: f64,
}

/// Numerical witness for one candidate.
#[derive(Debug, Clone)]
pub struct BranchRecord {
    pub lambda_star: f64,
    pub points: Vec<BranchPoint>,
    /// Fitted slope of `log‖u‖` against `log|λ − λ*|`.
    pub exponent: Option<f64>,
    pub verified: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct BifurcationReport {
    pub candidates: Vec<Candidate>,
    pub total_sf: i64,
    /// Guaranteed number of bifurcation points, `⌊|sf| / m⌋` with `m` the
    /// largest kernel dimension over the candidates.
    pub guaranteed_count: i64,
    pub max_kernel_dim: usize,
    pub branches: Vec<BranchRecord>,
    /// Singular parameters discarded for sitting within the localization
    /// tolerance of an endpoint.
    pub excluded_near_endpoints: Vec<f64>,
}

/// Scan the linearization for singular parameters, certify crossings, and
/// bound the number of bifurcation points by the total spectral flow.
/// Branch verification is not attempted here.
pub fn detect_candidates(fam: &VariationalFamily, tol: &Tol) -> Result<BifurcationReport> {
    let path = fam.linear_path();
    let (a, b) = path.interval();
    let singular = singular_set(path, tol)?;
    let mut excluded = Vec::new();
    let mut candidates = Vec::new();
    for &l in &singular {
        if (l - a).abs() <= tol.loc || (b - l).abs() <= tol.loc {
            excluded.push(l);
            continue;
        }
        let report = crossing_form(path, l, tol)?;
        candidates.push(Candidate {
            lambda: l,
            kernel_dim: report.kernel_basis.ncols(),
            signature: report.signature,
            certified: report.nondegenerate && report.signature != 0,
        });
    }
    let total_sf = match spectral_flow_via_crossings(path, tol) {
        Ok(r) => r.value,
        Err(Error::DegenerateCrossing { .. }) => spectral_flow_via_maslov(path, tol)?.value,
        Err(e) => return Err(e),
    };
    let max_kernel_dim = candidates.iter().map(|c| c.kernel_dim).max().unwrap_or(0);
    let guaranteed_count = if max_kernel_dim == 0 {
        0
    } else {
        total_sf.abs() / max_kernel_dim as i64
    };
    Ok(BifurcationReport {
        candidates,
        total_sf,
        guaranteed_count,
        max_kernel_dim,
        branches: Vec::new(),
        excluded_near_endpoints: excluded,
    })
}

/// `⌊|sf| / m⌋`, with the consistency check that certified candidates are at
/// least as many whenever every crossing is nondegenerate.
pub fn counting_bound(report: &BifurcationReport) -> Result<i64> {
    let bound = if report.max_kernel_dim == 0 {
        0
    } else {
        report.total_sf.abs() / report.max_kernel_dim as i64
    };
    let all_nondegenerate = report
        .candidates
        .iter()
        .all(|c| c.certified || c.signature == 0);
    let certified = report.candidates.iter().filter(|c| c.certified).count() as i64;
    if all_nondegenerate && certified < bound {
        return Err(Error::InvariantViolation(format!(
            "{certified} certified candidates but the flow guarantees {bound}"
        )));
    }
    Ok(bound)
}

/// Three-point Dirichlet discretization of `−u″ + V(x) u` on `(0, L)` with
/// `N` interior nodes, shifted by `−λ` over the given parameter interval:
/// `A_λ = A − λ·Id` with the analytic derivative `−Id`.
pub fn discretize_sturm_liouville<V>(
    n: usize,
    domain_length: f64,
    potential: V,
    lambda_interval: (f64, f64),
) -> Result<OperatorPath>
where
    V: Fn(f64) -> f64,
{
    if n < 3 {
        return Err(Error::InvalidInput(
            "the discretization needs at least 3 interior nodes".into(),
        ));
    }
    if !(domain_length > 0.0) {
        return Err(Error::InvalidInput("domain length must be positive".into()));
    }
    let h = domain_length / (n as f64 + 1.0);
    let inv_h2 = 1.0 / (h * h);
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        let x = (i as f64 + 1.0) * h;
        a[(i, i)] = 2.0 * inv_h2 + potential(x);
        if i + 1 < n {
            a[(i, i + 1)] = -inv_h2;
            a[(i + 1, i)] = -inv_h2;
        }
    }
    let (lo, hi) = lambda_interval;
    let a = Arc::new(a);
    let a_eval = a.clone();
    OperatorPath::from_fn(lo, hi, n, move |l| {
        let mut m = (*a_eval).clone();
        for i in 0..n {
            m[(i, i)] -= l;
        }
        m
    })
    .map(|p| p.with_derivative(move |_| -Mat::identity(n, n)))
}

/// Eigenvalues of the Dirichlet second-difference matrix with zero
/// potential, in closed form: `(2/h²)(1 − cos(kπ/(N+1)))`, `k = 1..N`.
pub fn dirichlet_laplacian_eigenvalues(n: usize, domain_length: f64) -> Vec<f64> {
    let h = domain_length / (n as f64 + 1.0);
    (1..=n)
        .map(|k| 2.0 / (h * h) * (1.0 - (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos()))
        .collect()
}

/// Knobs for the branch witness.
#[derive(Debug, Clone, Copy)]
pub struct BranchOptions {
    /// Top amplitude of the geometric ladder.
    pub eps0: f64,
    /// Number of rungs (`ε_j = ε₀ 2^{−j}`).
    pub rungs: usize,
    /// Newton iteration cap per rung.
    pub max_newton: usize,
    /// Residual each accepted rung must reach.
    pub residual_tol: f64,
}

impl Default for BranchOptions {
    fn default() -> Self {
        BranchOptions {
            eps0: 0.1,
            rungs: 8,
            max_newton: 50,
            residual_tol: 1e-10,
        }
    }
}

/// Verify a branch at a simple candidate: for each amplitude rung solve the
/// augmented system `{f(λ, u) = 0, ⟨u, d⟩ = ε_j}` for `(u, λ)` by damped
/// Newton seeded at `(λ*, ε_j d)`; the branch is verified when every rung
/// converges below the residual tolerance with `u ≠ 0` and `λ_j → λ*`
/// monotonically in the amplitude.
pub fn branch_verify(
    fam: &VariationalFamily,
    lambda_star: f64,
    kernel_dir: &Vect,
    opts: &BranchOptions,
    _tol: &Tol,
) -> BranchRecord {
    let d = kernel_dir.normalize();
    let mut points: Vec<BranchPoint> = Vec::new();
    let mut failure: Option<String> = None;

    for j in 0..opts.rungs {
        let eps = opts.eps0 * 0.5f64.powi(j as i32);
        match newton_rung(fam, lambda_star, &d, eps, opts) {
            Ok((lambda, u, residual)) => {
                points.push(BranchPoint {
                    lambda,
                    norm: u.norm(),
                    u,
                    residual,
                });
            }
            Err(e) => {
                failure = Some(format!("rung {j}: {e}"));
                break;
            }
        }
    }

    let mut verified = failure.is_none() && points.len() == opts.rungs;
    if verified {
        let slack = 1e-10 * (1.0 + lambda_star.abs());
        for w in points.windows(2) {
            let d0 = (w[0].lambda - lambda_star).abs();
            let d1 = (w[1].lambda - lambda_star).abs();
            if d1 > d0 + slack {
                verified = false;
                failure = Some("λ ladder is not monotone toward λ*".into());
                break;
            }
        }
        // Monotone is not enough: the ladder must actually close in on λ*,
        // not stall at a remote branch.
        if verified {
            let d_first = (points[0].lambda - lambda_star).abs();
            let d_last = (points[points.len() - 1].lambda - lambda_star).abs();
            if d_first > slack && d_last > 0.25 * d_first {
                verified = false;
                failure = Some(format!(
                    "λ ladder stalls at distance {d_last:.3e} from λ*"
                ));
            }
        }
        if points.iter().any(|p| p.norm == 0.0) {
            verified = false;
            failure = Some("a rung collapsed to the trivial solution".into());
        }
    }

    // Fit log‖u‖ against log|λ − λ*| over the usable rungs.
    let fit: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| (p.lambda - lambda_star).abs() > 1e-13 && p.norm > 0.0)
        .map(|p| ((p.lambda - lambda_star).abs().ln(), p.norm.ln()))
        .collect();
    let exponent = if fit.len() >= 3 {
        let n = fit.len() as f64;
        let sx: f64 = fit.iter().map(|p| p.0).sum();
        let sy: f64 = fit.iter().map(|p| p.1).sum();
        let sxx: f64 = fit.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = fit.iter().map(|p| p.0 * p.1).sum();
        let denom = n * sxx - sx * sx;
        (denom.abs() > 1e-300).then(|| (n * sxy - sx * sy) / denom)
    } else {
        None
    };

    BranchRecord {
        lambda_star,
        points,
        exponent,
        verified,
        failure,
    }
}

fn newton_rung(
    fam: &VariationalFamily,
    lambda_star: f64,
    d: &Vect,
    eps: f64,
    opts: &BranchOptions,
) -> Result<(f64, Vect, f64)> {
    let n = d.len();
    let mut u = d * eps;
    let mut lambda = lambda_star;

    let residual = |lambda: f64, u: &Vect| -> Vect {
        let f = fam.residual(lambda, u);
        let mut g = Vect::zeros(n + 1);
        g.rows_mut(0, n).copy_from(&f);
        g[n] = u.dot(d) - eps;
        g
    };

    let mut g = residual(lambda, &u);
    for _ in 0..opts.max_newton {
        let gnorm = g.amax();
        if gnorm < 0.1 * opts.residual_tol {
            return Ok((lambda, u, gnorm));
        }
        // Augmented Jacobian.
        let a = fam.linear_path().eval(lambda);
        let df = fam.nonlin_jacobian(lambda, &u);
        let da = fam.linear_path().derivative(lambda);
        let dlf = fam.d_lambda_f(lambda, &u);
        let mut jac = Mat::zeros(n + 1, n + 1);
        jac.view_mut((0, 0), (n, n)).copy_from(&(&a + &df));
        let last_col = &da * &u + dlf;
        for i in 0..n {
            jac[(i, n)] = last_col[i];
        }
        for j in 0..n {
            jac[(n, j)] = d[j];
        }
        let delta = linalg::solve_lu(&jac, &Mat::from_column_slice(n + 1, 1, (-&g).as_slice()))
            .map_err(|_| Error::NewtonDiverged { rung: 0 })?;
        // Armijo backtracking on ‖G‖.
        let base = g.norm();
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let u_try = &u + delta.rows(0, n) * alpha;
            let l_try = lambda + alpha * delta[(n, 0)];
            let g_try = residual(l_try, &u_try);
            if g_try.norm() <= (1.0 - 1e-4 * alpha) * base {
                u = u_try;
                lambda = l_try;
                g = g_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // Stagnation: accept only if already below the tolerance.
            let gnorm = g.amax();
            if gnorm < opts.residual_tol {
                return Ok((lambda, u, gnorm));
            }
            return Err(Error::NewtonDiverged { rung: 0 });
        }
    }
    let gnorm = g.amax();
    if gnorm < opts.residual_tol {
        Ok((lambda, u, gnorm))
    } else {
        Err(Error::NewtonDiverged { rung: 0 })
    }
}

/// Run [`branch_verify`] on every certified simple candidate of the report.
/// Candidates with higher-dimensional kernels keep their crossing
/// certificates but receive no Newton witness.
pub fn verify_branches(
    fam: &VariationalFamily,
    report: &BifurcationReport,
    opts: &BranchOptions,
    tol: &Tol,
) -> Result<BifurcationReport> {
    let mut out = report.clone();
    let simple: Vec<&Candidate> = report
        .candidates
        .iter()
        .filter(|c| c.certified && c.kernel_dim == 1)
        .collect();
    let branches = crate::exec::map(&simple, |c| -> Result<BranchRecord> {
        let cf = crossing_form(fam.linear_path(), c.lambda, tol)?;
        let dir = Vect::from_column_slice(cf.kernel_basis.column(0).as_slice());
        Ok(branch_verify(fam, c.lambda, &dir, opts, tol))
    });
    out.branches = branches.into_iter().collect::<Result<_>>()?;
    Ok(out)
}
