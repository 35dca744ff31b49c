//! Finite-rank corrector paths: given a continuous family `λ ↦ A_λ` of
//! symmetric matrices, construct a continuous family `λ ↦ K_λ = I_F R_λ P_F`
//! of symmetric operators with image in a fixed subspace `F ⊆ H` such that
//! `A_λ + K_λ` is invertible along the whole interval, certified numerically
//! by minimum-singular-value margins.
//!
//! The construction mirrors the geometry: the graphs `Gr A_λ` reduce modulo a
//! common isotropic `Ĩ₀` to a path `l̃` of Lagrangians in `S(F̃)`; a path `m`
//! transverse to both `l̃(λ) ⊕ R₀`-blocks and the constant vertical
//! `F̃₁ ⊕ R₁`-blocks is built junction by junction ([`transversal_path`]),
//! correcting component mismatches with suspension blocks whose signature
//! makes the endpoints connectable; the suspension is then absorbed by
//! enlarging `F` inside `H`, and `R_λ` is read off `m(λ) = graph(−R_λ)`.
//!
//! Whenever a certificate fails the construction retries with the enlarged
//! space; exhaustion of the suspension budget or of the ambient dimensions is
//! reported, never silently absorbed.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grassmann::{
    chart_in_complement, codiagonal_frame, direct_sum_frames, frame_from_chart,
    transversal_to_pair, FrameGen, LagrangianPath,
};
use crate::linalg::{self, Mat};
use crate::reduction::{self, ReductionContext};
use crate::specflow::OperatorPath;
use crate::symlin::{graph_lagrangian, lagrangian_to_graph, LagrangianFrame, Subspace};
use crate::tol::Tol;

/// Result of a minimum-singular-value replay.
#[derive(Debug, Clone, Copy)]
pub struct Certificate {
    /// Smallest `σ_min(A_λ + K_λ)` seen over all check points.
    pub margin: f64,
    /// Threshold the margin is measured against.
    pub threshold: f64,
    /// Number of check points.
    pub checked: usize,
}

/// A certified family `λ ↦ K_λ` of symmetric correctors with image in `F`.
#[derive(Clone)]
pub struct ParametrixPath {
    f_space: Subspace,
    lambdas: Vec<f64>,
    r_samples: Vec<Mat>,
    k_gen: Arc<dyn Fn(f64) -> Result<Mat> + Send + Sync>,
    certificate: Certificate,
    suspension: usize,
}

impl std::fmt::Debug for ParametrixPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParametrixPath")
            .field("dim_f", &self.f_space.dim())
            .field("samples", &self.lambdas.len())
            .field("certificate", &self.certificate)
            .finish()
    }
}

impl ParametrixPath {
    /// Fixed image space `F ⊆ H`.
    pub fn f_space(&self) -> &Subspace {
        &self.f_space
    }

    /// Corrector `K_λ` as an `n x n` symmetric matrix.
    pub fn k_at(&self, lambda: f64) -> Result<Mat> {
        (self.k_gen)(lambda)
    }

    /// Operator samples `R_λ` on `F` over the stored grid.
    pub fn r_samples(&self) -> (&[f64], &[Mat]) {
        (&self.lambdas, &self.r_samples)
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    /// Total suspension half-dimension the construction consumed.
    pub fn suspension(&self) -> usize {
        self.suspension
    }
}

/// Transversality margin of two frames: the smallest singular value of the
/// stacked basis (positive exactly when the spans are transverse).
fn pair_margin(a: &LagrangianFrame, b: &LagrangianFrame) -> f64 {
    linalg::smallest_sv(&linalg::hcat(&[a.basis(), b.basis()]))
}

/// A symmetric finite-rank corrector for a single operator: returns `(F, K)`
/// with `A + K` invertible and `K = I_F R P_F`. `F` starts as the span of
/// the near-kernel eigenvectors and is enlarged until the certificate
/// passes.
pub fn invert_single(a: &Mat, tol: &Tol) -> Result<(Subspace, Mat)> {
    linalg::check_symmetric(a, tol)?;
    let n = a.nrows();
    let (vals, vecs) = linalg::sym_eigen(a);
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let threshold = tol.inv * scale.max(1.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].abs().partial_cmp(&vals[j].abs()).unwrap());

    let mut f_size = order
        .iter()
        .take_while(|&&i| vals[i].abs() <= 10.0 * threshold)
        .count();
    if f_size == 0 {
        let margin = linalg::min_abs_eig_sym(a);
        if margin > threshold {
            return Ok((Subspace::zero(n), Mat::zeros(n, n)));
        }
        f_size = 1;
    }
    let mut last_margin = 0.0;
    while f_size <= n {
        let mut phi = Mat::zeros(n, f_size);
        for (k, &i) in order.iter().take(f_size).enumerate() {
            phi.set_column(k, &vecs.column(i));
        }
        let f_sub = Subspace::from_frame(phi, tol)?;
        if let Ok(k) = corrector_for(a, &f_sub, tol) {
            let margin = linalg::min_abs_eig_sym(&(a + &k));
            if margin > threshold {
                return Ok((f_sub, k));
            }
            last_margin = margin;
        }
        f_size += 1;
    }
    Err(Error::CertificateFailure {
        at: f64::NAN,
        margin: last_margin,
    })
}

/// Build `K = I_F R P_F` for one operator: reduce `Gr A` modulo `I₀`
/// (`I = F^⊥`), take a Lagrangian transverse to the reduced graph and to
/// `F₁`, and read `R` off its graph matrix.
pub(crate) fn corrector_for(a: &Mat, f_sub: &Subspace, tol: &Tol) -> Result<Mat> {
    let l = reduced_graph(a, f_sub, tol)?;
    let f = f_sub.dim();
    let m = transversal_to_pair(&l, &LagrangianFrame::h1(f), tol)?;
    corrector_from_transversal(f_sub, &m, tol)
}

/// Reduced graph `{(P_F u, A u) : u ∈ A⁻¹(F)}` in `S(R^f)` coordinates.
pub(crate) fn reduced_graph(a: &Mat, f_sub: &Subspace, tol: &Tol) -> Result<LagrangianFrame> {
    let f = f_sub.dim();
    let phi = f_sub.basis();
    let off_f = a - &(phi * (phi.transpose() * a));
    let preimage = linalg::nullspace(&off_f, tol, "graph preimage of F")?;
    if preimage.ncols() != f {
        return Err(Error::InvariantViolation(format!(
            "A⁻¹(F) has dimension {} instead of {}",
            preimage.ncols(),
            f
        )));
    }
    let mut stacked = Mat::zeros(2 * f, f);
    stacked
        .view_mut((0, 0), (f, f))
        .copy_from(&(phi.transpose() * &preimage));
    stacked
        .view_mut((f, 0), (f, f))
        .copy_from(&(phi.transpose() * (a * &preimage)));
    LagrangianFrame::from_frame(linalg::orthonormalize_full_rank(&stacked, tol)?, tol)
}

/// `K` from a transversal `M = graph(−R)` in `S(R^f)`.
fn corrector_from_transversal(f_sub: &Subspace, m: &LagrangianFrame, tol: &Tol) -> Result<Mat> {
    let b = lagrangian_to_graph(m, tol)?;
    let r = -b;
    let phi = f_sub.basis();
    Ok(linalg::symmetrize(&(phi * r * phi.transpose())))
}

/// One glued piece of the transversal path, kept in the ambient it was
/// created in plus the suspension blocks appended afterwards.
#[derive(Clone)]
struct Segment {
    t1: f64,
    eval: FrameGen,
    tails: Vec<usize>,
}

impl Segment {
    fn frame_at(&self, t: f64) -> Result<LagrangianFrame> {
        let mut frame = (self.eval)(t)?;
        for &k in &self.tails {
            frame = direct_sum_frames(&frame, &codiagonal_frame(k));
        }
        Ok(frame)
    }
}

/// Outcome of [`transversal_path`]: total suspension size and the path.
pub struct TransversalPath {
    pub k: usize,
    pub path: LagrangianPath,
}

/// Construct a path `p` in `S(R^{n+k})` pointwise transverse to
/// `l0(t) ⊕ R₀^k` and `l1(t) ⊕ R₁^k`, suspending by the minimal
/// signature-matching blocks at the gluing junctions. Fails with
/// `SuspensionBudgetExceeded` when more than `k_max` suspension dimensions
/// would be needed, and with `TransversalityLost` when no margin-respecting
/// partition or junction placement exists.
pub fn transversal_path(
    l0: &LagrangianPath,
    l1: &LagrangianPath,
    k_max: usize,
    tol: &Tol,
) -> Result<TransversalPath> {
    if l0.half_dim() != l1.half_dim() {
        return Err(Error::DimensionMismatch {
            context: "transversal path inputs",
            expected: l0.half_dim(),
            got: l1.half_dim(),
        });
    }
    let n = l0.half_dim();
    let (a, b) = (l0.a(), l0.b());
    if (l1.a() - a).abs() > 1e-12 || (l1.b() - b).abs() > 1e-12 {
        return Err(Error::InvalidInput(
            "transversal path inputs must share the parameter interval".into(),
        ));
    }
    let theta = 10.0 * tol.rank;

    let segments = partition(l0, l1, tol)?;
    let junctions = place_junctions(l0, l1, &segments, theta, tol)?;

    let mut pieces: Vec<Segment> = Vec::new();
    let mut s = 0usize;
    pieces.push(Segment {
        t1: junctions.first().copied().unwrap_or(b),
        eval: constant_gen(segments[0].transversal.clone()),
        tails: Vec::new(),
    });

    for (j, &t_m) in junctions.iter().enumerate() {
        let seg_next = &segments[j + 1];
        let t_next_end = junctions.get(j + 1).copied().unwrap_or(b);
        let l0_m = l0.eval(t_m, tol)?;
        let l1_m = l1.eval(t_m, tol)?;
        let mut x_ref = pad_frame(&l0_m, s, true);
        let mut z_ref = pad_frame(&l1_m, s, false);
        let mut p_frame = pieces.last().unwrap().frame_at(t_m)?;
        let mut m_next = if s == 0 {
            seg_next.transversal.clone()
        } else {
            direct_sum_frames(
                &seg_next.transversal,
                &graph_lagrangian(&Mat::identity(s, s), tol)?,
            )
        };
        for (x, y) in [
            (&p_frame, &x_ref),
            (&p_frame, &z_ref),
            (&m_next, &x_ref),
            (&m_next, &z_ref),
        ] {
            if pair_margin(x, y) <= theta {
                return Err(Error::TransversalityLost { t: t_m });
            }
        }

        // Signature defect in the chart at the (X, Z) splitting.
        let d = chart_signature(&p_frame, &x_ref, &z_ref, tol)?
            - chart_signature(&m_next, &x_ref, &z_ref, tol)?;
        let nbar = (n + s) as i64;
        if d.abs() > 2 * nbar {
            return Err(Error::InvariantViolation(format!(
                "signature defect {d} outside [-{}, {}]",
                2 * nbar,
                2 * nbar
            )));
        }
        if d != 0 {
            let k = d.unsigned_abs() as usize;
            if s + k > k_max {
                return Err(Error::SuspensionBudgetExceeded {
                    needed: s + k,
                    budget: k_max,
                });
            }
            for piece in pieces.iter_mut() {
                piece.tails.push(k);
            }
            p_frame = direct_sum_frames(&p_frame, &codiagonal_frame(k));
            let sign = if d > 0 { 1.0 } else { -1.0 };
            let n_d = graph_lagrangian(&(Mat::identity(k, k) * sign), tol)?;
            m_next = direct_sum_frames(&m_next, &n_d);
            x_ref = direct_sum_frames(&x_ref, &LagrangianFrame::h0(k));
            z_ref = direct_sum_frames(&z_ref, &LagrangianFrame::h1(k));
            s += k;
            let check = chart_signature(&p_frame, &x_ref, &z_ref, tol)?
                - chart_signature(&m_next, &x_ref, &z_ref, tol)?;
            if check != 0 {
                return Err(Error::InvariantViolation(format!(
                    "suspension block failed to absorb the signature defect ({check} left)"
                )));
            }
        }

        // Connect to the next transversal inside the component, ramping over
        // a step short enough to keep the moving references transverse.
        let connect = in_component_path(&x_ref, &z_ref, &p_frame, &m_next, tol)?;
        let delta = fit_ramp(&connect, l0, l1, t_m, t_next_end, s, theta, tol)?;
        pieces.push(Segment {
            t1: t_m + delta,
            eval: ramp_gen(connect, t_m, delta),
            tails: Vec::new(),
        });
        pieces.push(Segment {
            t1: t_next_end,
            eval: constant_gen(m_next.clone()),
            tails: Vec::new(),
        });
    }

    let pieces = Arc::new(pieces);
    let pieces_gen = pieces.clone();
    let gen: FrameGen = Arc::new(move |t| {
        let idx = pieces_gen
            .iter()
            .position(|p| t <= p.t1 + 1e-15)
            .unwrap_or(pieces_gen.len() - 1);
        pieces_gen[idx].frame_at(t)
    });
    let path = LagrangianPath::from_generator(a, b, gen, (8 * (pieces.len() + 2)).max(33), tol)?;

    // Replay the transversality certificates at samples and midpoints.
    let mut check_ts: Vec<f64> = Vec::new();
    for w in path.samples().windows(2) {
        check_ts.push(w[0].0);
        check_ts.push(0.5 * (w[0].0 + w[1].0));
    }
    check_ts.push(b);
    for &t in &check_ts {
        let p = path.eval(t, tol)?;
        let x = pad_frame(&l0.eval(t, tol)?, s, true);
        let z = pad_frame(&l1.eval(t, tol)?, s, false);
        if pair_margin(&p, &x) <= theta || pair_margin(&p, &z) <= theta {
            return Err(Error::TransversalityLost { t });
        }
    }
    Ok(TransversalPath { k: s, path })
}

/// `frame ⊕ R₀^s` (horizontal padding) or `frame ⊕ R₁^s` (vertical).
fn pad_frame(frame: &LagrangianFrame, s: usize, horizontal: bool) -> LagrangianFrame {
    if s == 0 {
        return frame.clone();
    }
    let block = if horizontal {
        LagrangianFrame::h0(s)
    } else {
        LagrangianFrame::h1(s)
    };
    direct_sum_frames(frame, &block)
}

fn constant_gen(frame: LagrangianFrame) -> FrameGen {
    Arc::new(move |_| Ok(frame.clone()))
}

fn ramp_gen(connect: ConnectPath, t0: f64, delta: f64) -> FrameGen {
    Arc::new(move |t| {
        let s = ((t - t0) / delta).clamp(0.0, 1.0);
        let phi = s * s * (3.0 - 2.0 * s);
        connect.frame_at(phi)
    })
}

/// Signature of `D_M − C_Z` in the chart of `Λ_X`: classifies the connected
/// component of `M` inside `Λ_X ∩ Λ_Z`.
fn chart_signature(
    m: &LagrangianFrame,
    x: &LagrangianFrame,
    z: &LagrangianFrame,
    tol: &Tol,
) -> Result<i64> {
    let c_z = chart_in_complement(z, x, tol)?;
    let d_m = chart_in_complement(m, x, tol)?;
    let e = d_m - c_z;
    let (vals, _) = linalg::sym_eigen(&e);
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if scale <= 0.0 {
        return Err(Error::TransversalityViolated {
            context: "chart form vanished",
        });
    }
    let (sig, nondeg) = linalg::signature(&vals, tol.nd * scale);
    if !nondeg {
        return Err(Error::TransversalityViolated {
            context: "chart form numerically degenerate",
        });
    }
    Ok(sig)
}

/// Deterministic in-component path between two Lagrangians of `Λ_X ∩ Λ_Z`
/// with equal chart signature: scale each chart form to its sign matrix with
/// frozen eigenvectors, then rotate between the two eigenframes through a
/// Givens factor sweep. Nondegeneracy holds at every intermediate point.
#[derive(Clone)]
struct ConnectPath {
    x_ref: LagrangianFrame,
    c_z: Mat,
    v0: Mat,
    v1: Mat,
    mu0: Vec<f64>,
    mu1: Vec<f64>,
    givens: Vec<(usize, usize, f64)>,
    sigma: Vec<f64>,
    tol: Tol,
}

impl ConnectPath {
    fn frame_at(&self, s: f64) -> Result<LagrangianFrame> {
        let q = self.mu0.len();
        let e = if s <= 1.0 / 3.0 {
            let u = 3.0 * s;
            let d = Mat::from_fn(q, q, |i, j| {
                if i == j {
                    lerp_to_sign(self.mu0[i], u)
                } else {
                    0.0
                }
            });
            &self.v0 * d * self.v0.transpose()
        } else if s <= 2.0 / 3.0 {
            let u = 3.0 * s - 1.0;
            let w = apply_partial_givens(&self.v0, &self.givens, u);
            let d = Mat::from_fn(q, q, |i, j| if i == j { self.sigma[i] } else { 0.0 });
            &w * d * w.transpose()
        } else {
            let u = 3.0 - 3.0 * s;
            let d = Mat::from_fn(q, q, |i, j| {
                if i == j {
                    lerp_to_sign(self.mu1[i], u)
                } else {
                    0.0
                }
            });
            &self.v1 * d * self.v1.transpose()
        };
        frame_from_chart(&(&self.c_z + e), &self.x_ref, &self.tol)
    }
}

fn lerp_to_sign(mu: f64, u: f64) -> f64 {
    let target = if mu >= 0.0 { 1.0 } else { -1.0 };
    (1.0 - u) * mu + u * target
}

/// Apply the first `u`-th fraction of the Givens factor sweep to `v0`.
fn apply_partial_givens(v0: &Mat, givens: &[(usize, usize, f64)], u: f64) -> Mat {
    let mut w = v0.clone();
    if givens.is_empty() {
        return w;
    }
    let progress = u * givens.len() as f64;
    for (idx, &(i, j, theta)) in givens.iter().enumerate() {
        let local = (progress - idx as f64).clamp(0.0, 1.0);
        if local <= 0.0 {
            break;
        }
        apply_givens_left(&mut w, i, j, theta * local);
    }
    w
}

fn apply_givens_left(m: &mut Mat, i: usize, j: usize, theta: f64) {
    let (c, s) = (theta.cos(), theta.sin());
    for col in 0..m.ncols() {
        let a = m[(i, col)];
        let b = m[(j, col)];
        m[(i, col)] = c * a - s * b;
        m[(j, col)] = s * a + c * b;
    }
}

fn in_component_path(
    x_ref: &LagrangianFrame,
    z_ref: &LagrangianFrame,
    from: &LagrangianFrame,
    to: &LagrangianFrame,
    tol: &Tol,
) -> Result<ConnectPath> {
    let c_z = chart_in_complement(z_ref, x_ref, tol)?;
    let e0 = chart_in_complement(from, x_ref, tol)? - &c_z;
    let e1 = chart_in_complement(to, x_ref, tol)? - &c_z;
    let (mu0_raw, v0_raw) = linalg::sym_eigen(&e0);
    let (mu1_raw, v1_raw) = linalg::sym_eigen(&e1);
    // Order eigenpairs descending so both sign matrices coincide with the
    // canonical diag(I_p, −I_q).
    let (mu0, v0) = descending(&mu0_raw, &v0_raw);
    let (mu1, mut v1) = descending(&mu1_raw, &v1_raw);
    let sig0: i64 = mu0.iter().map(|&m| if m >= 0.0 { 1 } else { -1 }).sum();
    let sig1: i64 = mu1.iter().map(|&m| if m >= 0.0 { 1 } else { -1 }).sum();
    if sig0 != sig1 {
        return Err(Error::InvariantViolation(format!(
            "in-component endpoints have signatures {sig0} and {sig1}"
        )));
    }
    let q = mu0.len();
    // Align determinants within the stabilizer of the sign matrix: flipping
    // one column of the frame leaves W Σ Wᵀ unchanged.
    if v0.determinant() * v1.determinant() < 0.0 {
        for i in 0..q {
            v1[(i, 0)] = -v1[(i, 0)];
        }
    }
    let rel = &v1 * v0.transpose();
    let givens = givens_factor_rotation(&rel)?;
    let sigma: Vec<f64> = mu0
        .iter()
        .map(|&m| if m >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    Ok(ConnectPath {
        x_ref: x_ref.clone(),
        c_z,
        v0,
        v1,
        mu0,
        mu1,
        givens,
        sigma,
        tol: *tol,
    })
}

fn descending(vals: &[f64], vecs: &Mat) -> (Vec<f64>, Mat) {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
    let sorted: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
    let mut m = Mat::zeros(vecs.nrows(), vecs.ncols());
    for (k, &i) in idx.iter().enumerate() {
        m.set_column(k, &vecs.column(i));
    }
    (sorted, m)
}

/// Factor a rotation `R ∈ SO(q)` into Givens rotations
/// `R = G_1 · G_2 · … · G_r` so the partial products sweep a path from the
/// identity to `R` inside `SO(q)`.
fn givens_factor_rotation(r: &Mat) -> Result<Vec<(usize, usize, f64)>> {
    let q = r.nrows();
    let mut work = r.clone();
    let mut factors: Vec<(usize, usize, f64)> = Vec::new();
    for col in 0..q {
        for row in (col + 1..q).rev() {
            let a = work[(col, col)];
            let b = work[(row, col)];
            if b.abs() < 1e-300 {
                continue;
            }
            let theta = b.atan2(a);
            apply_givens_left(&mut work, col, row, -theta);
            factors.push((col, row, theta));
        }
        if work[(col, col)] < 0.0 {
            // Orthogonality forces ±1 on the diagonal; det +1 pairs the −1s.
            let Some(p) = (col + 1..q).find(|&j| work[(j, j)] < 0.0) else {
                return Err(Error::InvariantViolation(
                    "Givens factorization saw determinant −1".into(),
                ));
            };
            apply_givens_left(&mut work, col, p, -std::f64::consts::PI);
            factors.push((col, p, std::f64::consts::PI));
        }
    }
    let defect = (&work - Mat::identity(q, q)).amax();
    if defect > 1e-8 {
        return Err(Error::InvariantViolation(format!(
            "Givens factorization residual {defect:.3e}"
        )));
    }
    factors.reverse();
    Ok(factors)
}

/// A subinterval with a transversal valid across it.
struct PartSegment {
    t0: f64,
    t1: f64,
    transversal: LagrangianFrame,
}

fn partition(l0: &LagrangianPath, l1: &LagrangianPath, tol: &Tol) -> Result<Vec<PartSegment>> {
    let (a, b) = (l0.a(), l0.b());
    let mut out: Vec<PartSegment> = Vec::new();
    let mut stack = vec![(a, b, 0usize)];
    let min_width = (b - a) / 4096.0;
    while let Some((s, e, depth)) = stack.pop() {
        let mid = 0.5 * (s + e);
        let m = transversal_to_pair(&l0.eval(mid, tol)?, &l1.eval(mid, tol)?, tol)?;
        let accept_margin = if e - s <= min_width { 10.0 * tol.rank } else { 1e-4 };
        let mut ok = true;
        for i in 0..=16 {
            let t = s + (e - s) * (i as f64) / 16.0;
            let m0 = pair_margin(&m, &l0.eval(t, tol)?);
            let m1 = pair_margin(&m, &l1.eval(t, tol)?);
            if m0 <= accept_margin || m1 <= accept_margin {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(PartSegment {
                t0: s,
                t1: e,
                transversal: m,
            });
        } else {
            if depth >= 14 {
                return Err(Error::TransversalityLost { t: mid });
            }
            stack.push((mid, e, depth + 1));
            stack.push((s, mid, depth + 1));
        }
    }
    out.sort_by(|x, y| x.t0.partial_cmp(&y.t0).unwrap());
    Ok(out)
}

/// Pick junction parameters between consecutive segments at which the pair
/// `(l0(t), l1(t))` is itself transverse with margin, shifting inside the
/// overlap allowance when needed.
fn place_junctions(
    l0: &LagrangianPath,
    l1: &LagrangianPath,
    segments: &[PartSegment],
    theta: f64,
    tol: &Tol,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(segments.len().saturating_sub(1));
    for j in 0..segments.len().saturating_sub(1) {
        let t_m = segments[j].t1;
        let left_w = t_m - segments[j].t0;
        let right_w = segments[j + 1].t1 - t_m;
        let w = 0.25 * left_w.min(right_w);
        let mut best: Option<(f64, f64)> = None;
        for i in 0..=16 {
            let t = t_m - w + 2.0 * w * (i as f64) / 16.0;
            let margin = pair_margin(&l0.eval(t, tol)?, &l1.eval(t, tol)?);
            // The shifted junction must stay inside both validity ranges.
            let ml = pair_margin(&segments[j].transversal, &l0.eval(t, tol)?)
                .min(pair_margin(&segments[j].transversal, &l1.eval(t, tol)?));
            let mr = pair_margin(&segments[j + 1].transversal, &l0.eval(t, tol)?)
                .min(pair_margin(&segments[j + 1].transversal, &l1.eval(t, tol)?));
            if ml <= theta || mr <= theta {
                continue;
            }
            if best.is_none_or(|(bm, _)| margin > bm) {
                best = Some((margin, t));
            }
        }
        match best {
            Some((margin, t)) if margin > theta => out.push(t),
            _ => return Err(Error::TransversalityLost { t: t_m }),
        }
    }
    Ok(out)
}

/// Shrink the ramp length until the connecting path stays transverse to the
/// moving references across the whole ramp.
#[allow(clippy::too_many_arguments)]
fn fit_ramp(
    connect: &ConnectPath,
    l0: &LagrangianPath,
    l1: &LagrangianPath,
    t_m: f64,
    t_end: f64,
    s: usize,
    theta: f64,
    tol: &Tol,
) -> Result<f64> {
    let mut delta = 0.5 * (t_end - t_m);
    for _ in 0..22 {
        let mut ok = true;
        for i in 0..=12 {
            let t = t_m + delta * (i as f64) / 12.0;
            let u = ((t - t_m) / delta).clamp(0.0, 1.0);
            let phi = u * u * (3.0 - 2.0 * u);
            let p = connect.frame_at(phi)?;
            let x = pad_frame(&l0.eval(t, tol)?, s, true);
            let z = pad_frame(&l1.eval(t, tol)?, s, false);
            if pair_margin(&p, &x) <= theta || pair_margin(&p, &z) <= theta {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(delta);
        }
        delta *= 0.5;
    }
    Err(Error::TransversalityLost { t: t_m })
}

/// Construct a certified parametrix path for the family.
///
/// No endpoint invertibility is assumed. The common isotropic subspace, the
/// reduction, the transversal path, and the suspension absorption follow the
/// constructive scheme in the module docs; the invertibility certificate is
/// replayed on a sample-and-midpoint grid before the result is returned, and
/// the construction retries with an enlarged `F` when a certificate fails.
pub fn parametrix_path(op: &OperatorPath, tol: &Tol) -> Result<ParametrixPath> {
    let n = op.dim();
    let (a, b) = op.interval();
    let mut scale: f64 = 0.0;
    for i in 0..33 {
        let l = a + (b - a) * (i as f64) / 32.0;
        scale = scale.max(linalg::spectral_radius_sym(&op.eval(l)));
    }
    let threshold = tol.inv * scale.max(1e-300);

    // Fast path: the family is already uniformly invertible. A sampled
    // margin alone can miss a crossing between grid points, so additionally
    // require every sorted eigenvalue branch (continuous in λ) to keep its
    // sign across the grid, and ask for a margin well above the threshold.
    let grid: Vec<f64> = (0..401).map(|i| a + (b - a) * (i as f64) / 400.0).collect();
    let spectra: Vec<Vec<f64>> = grid
        .iter()
        .map(|&l| linalg::sym_eigen(&op.eval(l)).0)
        .collect();
    let bare_margin = spectra
        .iter()
        .flat_map(|vals| vals.iter().map(|v| v.abs()))
        .fold(f64::INFINITY, f64::min);
    let sign_stable = (0..n).all(|k| {
        spectra
            .windows(2)
            .all(|w| w[0][k].signum() == w[1][k].signum())
    });
    if sign_stable && bare_margin > (1e-3 * scale).max(10.0 * threshold) {
        let zero = Mat::zeros(n, n);
        let k_gen: Arc<dyn Fn(f64) -> Result<Mat> + Send + Sync> = {
            let zero = zero.clone();
            Arc::new(move |_| Ok(zero.clone()))
        };
        return Ok(ParametrixPath {
            f_space: Subspace::zero(n),
            lambdas: grid.clone(),
            r_samples: grid.iter().map(|_| Mat::zeros(0, 0)).collect(),
            k_gen,
            certificate: Certificate {
                margin: bare_margin,
                threshold,
                checked: grid.len(),
            },
            suspension: 0,
        });
    }

    // Pin graph samples at the singular parameters when the endpoints allow
    // locating them, so the kernel directions enter the isotropic selection.
    let knots = crate::specflow::singular_set(op, tol).unwrap_or_default();
    let graph_inner = op.clone();
    let t_graph = *tol;
    let graph_gen: FrameGen =
        Arc::new(move |l| graph_lagrangian(&graph_inner.eval(l), &t_graph));
    let gpath = LagrangianPath::from_generator_with_knots(a, b, graph_gen, 33, &knots, tol)?;
    let i_tilde = reduction::common_isotropic(&gpath, tol)?;
    let mut f_basis = linalg::nullspace(&i_tilde.basis().transpose(), tol, "parametrix F")?;
    let f_tilde = f_basis.ncols();
    let budget = 4 * f_tilde.max(1);
    let mut used = 0usize;

    for _round in 0..3 {
        let f_sub = Subspace::from_frame(f_basis.clone(), tol)?;
        let ctx = context_for_f(&f_sub, tol)?;
        let f_dim = ctx.reduced_half_dim();
        let op_inner = op.clone();
        let ctx_inner = ctx.clone();
        let t_inner = *tol;
        let lred_gen: FrameGen = Arc::new(move |l| {
            let g = graph_lagrangian(&op_inner.eval(l), &t_inner)?;
            ctx_inner.reduce_clean(&g, &t_inner)
        });
        let lred = LagrangianPath::from_generator_with_knots(a, b, lred_gen, 33, &knots, tol)?;
        let vertical = LagrangianPath::constant(LagrangianFrame::h1(f_dim), a, b, tol)?;
        let tp = transversal_path(&lred, &vertical, budget - used, tol)?;
        used += tp.k;

        // Absorb the suspension by enlarging F inside H.
        let i_basis = linalg::nullspace(&f_basis.transpose(), tol, "parametrix I")?;
        if tp.k > i_basis.ncols() {
            return Err(Error::AmbientTooSmall {
                needed: tp.k,
                available: i_basis.ncols(),
            });
        }
        let grown = if tp.k == 0 {
            f_basis.clone()
        } else {
            let extra = i_basis.columns(i_basis.ncols() - tp.k, tp.k).into_owned();
            linalg::hcat(&[&f_basis, &extra])
        };
        let f_big = Subspace::from_frame(grown.clone(), tol)?;

        match extract_and_certify(op, &f_big, &tp.path, threshold, tol) {
            Ok(mut pp) => {
                pp.suspension = used;
                return Ok(pp);
            }
            Err(Error::CertificateFailure { .. }) if used < budget => {
                f_basis = grown;
                continue;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::CertificateFailure {
        at: f64::NAN,
        margin: 0.0,
    })
}

fn context_for_f(f_sub: &Subspace, tol: &Tol) -> Result<ReductionContext> {
    let i_basis = linalg::nullspace(&f_sub.basis().transpose(), tol, "isotropic complement")?;
    let i_sub = Subspace::from_frame(i_basis, tol)?;
    ReductionContext::from_h_subspace(&i_sub, tol)
}

/// Read `R_λ` off the transversal path, assemble `K_λ`, and replay the
/// invertibility certificate on the sample-and-midpoint grid.
fn extract_and_certify(
    op: &OperatorPath,
    f_sub: &Subspace,
    mpath: &LagrangianPath,
    threshold: f64,
    tol: &Tol,
) -> Result<ParametrixPath> {
    let (a, b) = op.interval();
    let phi = Arc::new(f_sub.basis().clone());
    let mpath = Arc::new(mpath.clone());
    let t_inner = *tol;
    let phi_gen = phi.clone();
    let mpath_gen = mpath.clone();
    let k_gen: Arc<dyn Fn(f64) -> Result<Mat> + Send + Sync> = Arc::new(move |l| {
        let frame = mpath_gen.eval(l, &t_inner)?;
        let r = -lagrangian_to_graph(&frame, &t_inner)?;
        Ok(linalg::symmetrize(&(&*phi_gen * r * phi_gen.transpose())))
    });

    // Sample grid, refined until consecutive correctors move by less than
    // one tenth of their overall size.
    let mut lambdas: Vec<f64> = (0..129).map(|i| a + (b - a) * (i as f64) / 128.0).collect();
    let mut ks: Vec<Mat> = lambdas
        .iter()
        .map(|&l| k_gen(l))
        .collect::<Result<Vec<_>>>()?;
    let k_norm = ks.iter().map(|k| k.amax()).fold(0.0, f64::max);
    let delta_k = 0.1 * k_norm.max(1.0);
    let mut i = 0;
    while i + 1 < lambdas.len() {
        if (&ks[i + 1] - &ks[i]).amax() < delta_k || lambdas[i + 1] - lambdas[i] < (b - a) / 1e6 {
            i += 1;
            continue;
        }
        let mid = 0.5 * (lambdas[i] + lambdas[i + 1]);
        lambdas.insert(i + 1, mid);
        ks.insert(i + 1, k_gen(mid)?);
    }

    let mut check: Vec<f64> = Vec::with_capacity(2 * lambdas.len());
    for w in lambdas.windows(2) {
        check.push(w[0]);
        check.push(0.5 * (w[0] + w[1]));
    }
    check.push(b);
    let margins = crate::exec::map(&check, |&l| -> Result<f64> {
        let k = k_gen(l)?;
        Ok(linalg::min_abs_eig_sym(&(op.eval(l) + k)))
    });
    let mut min_margin = f64::INFINITY;
    for (l, m) in check.iter().zip(margins) {
        let m = m?;
        if m <= threshold {
            return Err(Error::CertificateFailure { at: *l, margin: m });
        }
        min_margin = min_margin.min(m);
    }

    let r_samples: Vec<Mat> = lambdas
        .iter()
        .map(|&l| {
            let frame = mpath.eval(l, tol)?;
            Ok(-lagrangian_to_graph(&frame, tol)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let checked = check.len();
    Ok(ParametrixPath {
        f_space: f_sub.clone(),
        lambdas,
        r_samples,
        k_gen,
        certificate: Certificate {
            margin: min_margin,
            threshold,
            checked,
        },
        suspension: 0,
    })
}

/// Replay the invertibility certificate at `mult` times the stored sample
/// density; returns the worst margin.
pub fn certify_replay(op: &OperatorPath, pp: &ParametrixPath, mult: usize, _tol: &Tol) -> Result<f64> {
    let (a, b) = op.interval();
    let n_checks = (pp.lambdas.len() * mult.max(1)).max(2);
    let ts: Vec<f64> = (0..n_checks)
        .map(|i| a + (b - a) * (i as f64) / ((n_checks - 1) as f64))
        .collect();
    let margins = crate::exec::map(&ts, |&l| -> Result<f64> {
        let k = pp.k_at(l)?;
        Ok(linalg::min_abs_eig_sym(&(op.eval(l) + k)))
    });
    let mut worst = f64::INFINITY;
    for (l, m) in ts.iter().zip(margins) {
        let m = m?;
        if m <= pp.certificate.threshold {
            return Err(Error::CertificateFailure { at: *l, margin: m });
        }
        worst = worst.min(m);
    }
    Ok(worst)
}
