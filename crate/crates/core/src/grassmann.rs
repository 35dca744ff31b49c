//! The Lagrangian Grassmannian of `S(R^n)` and its integer invariants.
//!
//! A Lagrangian subspace corresponds to a unitary matrix through the
//! identification `R^{2n} ≃ C^n`, `(u, v) ↔ u + iv`: stacking a frame as
//! blocks `[X; Y]` gives `Z = X + iY` with `Z` unitary exactly when the frame
//! is an orthonormal Lagrangian frame. The square of the determinant
//! `det²: Λ(n) → S¹` is frame-independent, and winding numbers of `det²`
//! along paths produce every invariant in this module:
//!
//! - [`maslov_loop_index`]: winding of `det²` along a closed path.
//! - [`relative_maslov_index`]: a non-closed path with endpoints transverse to
//!   a reference Lagrangian `L` is closed canonically inside the contractible
//!   chart `Λ_L` (symmetric forms over `JL`, interpolated linearly).
//! - [`triple_signature`]: the signature of `Q(v) = ω(Av, v)` on `L₀`, where
//!   `M` is the graph of `A: L₀ → L₁`.
//! - [`hormander_index`]: `½[sign(L₀,M₁,L₁) − sign(L₀,M₀,L₁)]`, with an
//!   independent winding route in [`hormander_index_via_path`].
//!
//! Orientation is pinned once: the graph path of the scalar family `[λ]` on
//! `[−1, 1]` has relative Maslov index `+1` against `H₀`, so an eigenvalue
//! crossing zero upwards counts positively everywhere downstream.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat};
use crate::reduction::ReductionContext;
use crate::symlin::{clean_intersection, j_mat, LagrangianFrame, Subspace};
use crate::tol::Tol;

/// Unitary representative of a Lagrangian: columns, read as real `2n`-vectors
/// `(Re, Im)`, span the source Lagrangian.
#[derive(Debug, Clone)]
pub struct UnitaryRep {
    u: CMat,
}

impl UnitaryRep {
    pub fn matrix(&self) -> &CMat {
        &self.u
    }
}

/// `Z = X + iY` from the stacked frame blocks `[X; Y]`. Fails with
/// `UnitarityFailure` when the frame is not Lagrangian-orthonormal.
pub fn unitary_from_lagrangian(l: &LagrangianFrame, tol: &Tol) -> Result<UnitaryRep> {
    let z = linalg::complex_from_blocks(&l.x_block(), &l.y_block());
    let n = z.nrows();
    let defect = (&z * z.adjoint() - CMat::identity(n, n))
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    if defect > tol.orth.max(1e-12) * 10.0 {
        return Err(Error::UnitarityFailure { defect });
    }
    Ok(UnitaryRep { u: z })
}

/// `arg(det(Z)²) ∈ [0, 2π)`; well defined on the Grassmannian since the
/// `O(n)` frame ambiguity cancels in the square.
pub fn det_squared_phase(l: &LagrangianFrame, tol: &Tol) -> Result<f64> {
    let z = unitary_from_lagrangian(l, tol)?;
    Ok(phase_of_unitary(&z.u))
}

fn phase_of_unitary(z: &CMat) -> f64 {
    if z.nrows() == 0 {
        return 0.0;
    }
    let d = z.determinant();
    let d2 = d * d;
    let mut phase = d2.im.atan2(d2.re);
    if phase < 0.0 {
        phase += 2.0 * std::f64::consts::PI;
    }
    phase
}

/// Generator of frames along a parameter.
pub type FrameGen = Arc<dyn Fn(f64) -> Result<LagrangianFrame> + Send + Sync>;

/// A continuous path of Lagrangian subspaces, stored as parameter-ordered
/// samples with consecutive gap distance below `tol.path_gap`, optionally
/// backed by a generator for exact refinement. Without a generator,
/// evaluation between samples uses the canonical chart interpolation, which
/// the sample-density contract keeps well defined.
#[derive(Clone)]
pub struct LagrangianPath {
    samples: Vec<(f64, LagrangianFrame)>,
    generator: Option<FrameGen>,
    tol_path_gap: f64,
}

impl std::fmt::Debug for LagrangianPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LagrangianPath")
            .field("samples", &self.samples.len())
            .field("interval", &(self.a(), self.b()))
            .field("generated", &self.generator.is_some())
            .finish()
    }
}

impl LagrangianPath {
    /// Build from samples. Parameters must be strictly increasing and
    /// consecutive frames closer than `tol.path_gap`; the density contract is
    /// on the producer.
    pub fn from_samples(samples: Vec<(f64, LagrangianFrame)>, tol: &Tol) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidInput(
                "a Lagrangian path needs at least two samples".into(),
            ));
        }
        for w in samples.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::InvalidInput(
                    "path parameters must be strictly increasing".into(),
                ));
            }
        }
        let path = LagrangianPath {
            samples,
            generator: None,
            tol_path_gap: tol.path_gap,
        };
        for (i, w) in path.samples.windows(2).enumerate() {
            let gap = w[0].1.gap(&w[1].1);
            if gap >= tol.path_gap {
                return Err(Error::PathTooCoarse { index: i, gap });
            }
        }
        Ok(path)
    }

    /// Build from a generator, bisecting until consecutive samples meet the
    /// gap contract (at most 20 levels per initial interval).
    pub fn from_generator(a: f64, b: f64, gen: FrameGen, init: usize, tol: &Tol) -> Result<Self> {
        LagrangianPath::from_generator_with_knots(a, b, gen, init, &[], tol)
    }

    /// Like [`LagrangianPath::from_generator`], with extra parameters forced
    /// into the initial sample grid (producers use this to pin samples at
    /// known geometric events).
    pub fn from_generator_with_knots(
        a: f64,
        b: f64,
        gen: FrameGen,
        init: usize,
        knots: &[f64],
        tol: &Tol,
    ) -> Result<Self> {
        if !(a < b) {
            return Err(Error::InvalidInput(format!("empty interval [{a}, {b}]")));
        }
        let init = init.max(2);
        let mut samples: Vec<(f64, LagrangianFrame)> = Vec::with_capacity(init);
        let mut ts: Vec<f64> = (0..init)
            .map(|i| a + (b - a) * (i as f64) / ((init - 1) as f64))
            .collect();
        for &k in knots {
            if a < k && k < b {
                ts.push(k);
            }
        }
        ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ts.dedup_by(|x, y| (*x - *y).abs() < (b - a) * 1e-12);
        let frames = crate::exec::map(&ts, |&t| gen(t));
        for (t, f) in ts.iter().zip(frames) {
            samples.push((*t, f?));
        }
        // Contract refinement.
        let mut i = 0;
        while i + 1 < samples.len() {
            let gap = samples[i].1.gap(&samples[i + 1].1);
            if gap < tol.path_gap {
                i += 1;
                continue;
            }
            let span = samples[i + 1].0 - samples[i].0;
            if span < (b - a) / 2f64.powi(20) {
                return Err(Error::RefinementExhausted {
                    lo: samples[i].0,
                    hi: samples[i + 1].0,
                });
            }
            let tm = 0.5 * (samples[i].0 + samples[i + 1].0);
            samples.insert(i + 1, (tm, gen(tm)?));
        }
        Ok(LagrangianPath {
            samples,
            generator: Some(gen),
            tol_path_gap: tol.path_gap,
        })
    }

    /// Constant path.
    pub fn constant(frame: LagrangianFrame, a: f64, b: f64, tol: &Tol) -> Result<Self> {
        let f = frame.clone();
        let gen: FrameGen = Arc::new(move |_| Ok(f.clone()));
        LagrangianPath::from_generator(a, b, gen, 2, tol)
    }

    pub fn samples(&self) -> &[(f64, LagrangianFrame)] {
        &self.samples
    }

    pub fn a(&self) -> f64 {
        self.samples.first().unwrap().0
    }

    pub fn b(&self) -> f64 {
        self.samples.last().unwrap().0
    }

    pub fn start(&self) -> &LagrangianFrame {
        &self.samples.first().unwrap().1
    }

    pub fn end(&self) -> &LagrangianFrame {
        &self.samples.last().unwrap().1
    }

    pub fn half_dim(&self) -> usize {
        self.start().half_dim()
    }

    pub fn is_closed(&self, tol: &Tol) -> bool {
        self.start().gap(self.end()) < tol.gap
    }

    /// Evaluate anywhere on the interval: through the generator when backed
    /// by one, otherwise by chart interpolation between the flanking samples.
    pub fn eval(&self, t: f64, tol: &Tol) -> Result<LagrangianFrame> {
        if let Some(gen) = &self.generator {
            return gen(t);
        }
        let (a, b) = (self.a(), self.b());
        if !(a - 1e-12 <= t && t <= b + 1e-12) {
            return Err(Error::InvalidInput(format!(
                "parameter {t} outside path interval [{a}, {b}]"
            )));
        }
        let t = t.clamp(a, b);
        let idx = self
            .samples
            .partition_point(|(s, _)| *s <= t)
            .saturating_sub(1)
            .min(self.samples.len() - 2);
        let (t0, f0) = &self.samples[idx];
        let (t1, f1) = &self.samples[idx + 1];
        if (t - t0).abs() < 1e-15 {
            return Ok(f0.clone());
        }
        if (t - t1).abs() < 1e-15 {
            return Ok(f1.clone());
        }
        let s = (t - t0) / (t1 - t0);
        interpolate_frames(f0, f1, s, tol)
    }

    /// The path with the parameter direction reversed (on the same interval).
    pub fn reversed(&self, tol: &Tol) -> Result<Self> {
        let (a, b) = (self.a(), self.b());
        let mut samples: Vec<(f64, LagrangianFrame)> = self
            .samples
            .iter()
            .rev()
            .map(|(t, f)| (a + b - t, f.clone()))
            .collect();
        samples.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let generator = self.generator.clone().map(|g| {
            let gen: FrameGen = Arc::new(move |t| g(a + b - t));
            gen
        });
        let mut out = LagrangianPath {
            samples,
            generator,
            tol_path_gap: self.tol_path_gap,
        };
        let _ = tol;
        out.samples.dedup_by(|x, y| x.0 == y.0);
        Ok(out)
    }
}

/// Canonical interpolation between two nearby Lagrangians: both are graphs of
/// symmetric forms in the chart of `Λ_{JL₀}`, and the forms are interpolated
/// linearly. Requires the frames to be closer than a right angle in every
/// principal direction, which the path gap contract guarantees.
pub fn interpolate_frames(
    f0: &LagrangianFrame,
    f1: &LagrangianFrame,
    s: f64,
    tol: &Tol,
) -> Result<LagrangianFrame> {
    let reference = LagrangianFrame::from_frame(j_mat(f0.basis()), tol)?;
    let c0 = chart_in_complement(f0, &reference, tol)?;
    let c1 = chart_in_complement(f1, &reference, tol)?;
    let c = &c0 * (1.0 - s) + &c1 * s;
    frame_from_chart(&c, &reference, tol)
}

/// Orthogonal (and symplectic) matrix `U = [L | JL]`: maps the standard
/// splitting to `(L, JL)`, sending `H₀ ↦ L` and `H₁ ↦ JL`.
pub(crate) fn splitting_basis(l: &LagrangianFrame) -> Mat {
    linalg::hcat(&[l.basis(), &j_mat(l.basis())])
}

/// Chart of `Λ_L`: for `M` transverse to `L`, the unique symmetric `C` with
/// `M = U · {(Cy, y)}` in the `(L, JL)` splitting.
pub(crate) fn chart_in_complement(
    m: &LagrangianFrame,
    l: &LagrangianFrame,
    tol: &Tol,
) -> Result<Mat> {
    let n = l.half_dim();
    let u = splitting_basis(l);
    let g = u.transpose() * m.basis();
    let p = g.rows(0, n).into_owned();
    let q = g.rows(n, n).into_owned();
    let svals = linalg::singular_values(&q);
    let smin = svals.last().copied().unwrap_or(0.0);
    if smin < tol.rank {
        return Err(Error::TransversalityViolated {
            context: "chart of the complement of a reference Lagrangian",
        });
    }
    // C = P Q⁻¹ via Qᵀ Cᵀ = Pᵀ.
    let ct = linalg::solve_lu(&q.transpose(), &p.transpose())?;
    Ok(linalg::symmetrize(&ct.transpose()))
}

/// Inverse of [`chart_in_complement`].
pub(crate) fn frame_from_chart(c: &Mat, l: &LagrangianFrame, tol: &Tol) -> Result<LagrangianFrame> {
    let n = l.half_dim();
    let mut stacked = Mat::zeros(2 * n, n);
    stacked.view_mut((0, 0), (n, n)).copy_from(c);
    stacked.view_mut((n, 0), (n, n)).copy_from(&Mat::identity(n, n));
    let frame = linalg::orthonormalize_full_rank(&stacked, tol)?;
    LagrangianFrame::from_frame(splitting_basis(l) * frame, tol)
}

/// Unwound `det²` phase change along the path, refining until every step
/// jumps by less than `π/2`.
fn unwound_phase_delta(path: &LagrangianPath, tol: &Tol) -> Result<f64> {
    let mut total = 0.0;
    for w in path.samples().windows(2) {
        total += segment_delta(path, w[0].0, w[1].0, &w[0].1, &w[1].1, 0, tol)?;
    }
    Ok(total)
}

fn segment_delta(
    path: &LagrangianPath,
    t0: f64,
    t1: f64,
    f0: &LagrangianFrame,
    f1: &LagrangianFrame,
    depth: usize,
    tol: &Tol,
) -> Result<f64> {
    let p0 = det_squared_phase(f0, tol)?;
    let p1 = det_squared_phase(f1, tol)?;
    let mut d = p1 - p0;
    while d > std::f64::consts::PI {
        d -= 2.0 * std::f64::consts::PI;
    }
    while d <= -std::f64::consts::PI {
        d += 2.0 * std::f64::consts::PI;
    }
    if d.abs() < std::f64::consts::FRAC_PI_2 {
        return Ok(d);
    }
    if depth >= 20 {
        return Err(Error::RefinementExhausted { lo: t0, hi: t1 });
    }
    let tm = 0.5 * (t0 + t1);
    let fm = path.eval(tm, tol)?;
    Ok(segment_delta(path, t0, tm, f0, &fm, depth + 1, tol)?
        + segment_delta(path, tm, t1, &fm, f1, depth + 1, tol)?)
}

fn winding_from_delta(delta: f64) -> Result<i64> {
    let w = delta / (2.0 * std::f64::consts::PI);
    let rounded = w.round();
    if (w - rounded).abs() > 0.05 {
        return Err(Error::NumericallyAmbiguous {
            context: "winding number far from an integer",
            ratio: (w - rounded).abs(),
        });
    }
    Ok(rounded as i64)
}

/// Winding number of `det²` along a closed path.
pub fn maslov_loop_index(path: &LagrangianPath, tol: &Tol) -> Result<i64> {
    let gap = path.start().gap(path.end());
    if gap >= tol.gap {
        return Err(Error::NotClosed { gap });
    }
    winding_from_delta(unwound_phase_delta(path, tol)?)
}

/// Maslov index of a path relative to a reference Lagrangian `L`.
///
/// Both endpoints must be transverse to `L`. The path is closed by the
/// canonical chart path inside `Λ_L` (linear interpolation of the symmetric
/// forms representing the endpoints over `JL`), and the winding of the
/// concatenation is returned.
pub fn relative_maslov_index(
    path: &LagrangianPath,
    reference: &LagrangianFrame,
    tol: &Tol,
) -> Result<i64> {
    for (t, frame) in [(path.a(), path.start()), (path.b(), path.end())] {
        let ci = clean_intersection(frame.subspace(), reference.subspace(), tol)?;
        if !ci.clean {
            return Err(Error::EndpointNotTransverse { t });
        }
    }
    let c_end = chart_in_complement(path.end(), reference, tol)?;
    let c_start = chart_in_complement(path.start(), reference, tol)?;
    let main = unwound_phase_delta(path, tol)?;
    let closure = chart_segment_path(reference, &c_end, &c_start, tol)?;
    let back = unwound_phase_delta(&closure, tol)?;
    winding_from_delta(main + back)
}

/// A path inside `Λ_L` from chart matrix `c0` to `c1`.
fn chart_segment_path(
    l: &LagrangianFrame,
    c0: &Mat,
    c1: &Mat,
    tol: &Tol,
) -> Result<LagrangianPath> {
    let l = l.clone();
    let (c0, c1) = (c0.clone(), c1.clone());
    let t = *tol;
    let gen: FrameGen = Arc::new(move |s| {
        let c = &c0 * (1.0 - s) + &c1 * s;
        frame_from_chart(&c, &l, &t)
    });
    LagrangianPath::from_generator(0.0, 1.0, gen, 9, tol)
}

/// Signature of the triple `(L₀, M, L₁)`: `M` is the graph of an isomorphism
/// `A: L₀ → L₁` and the result is the signature of `Q(v) = ω(Av, v)` on `L₀`.
/// Requires `M` transverse to both and `L₀` transverse to `L₁`.
pub fn triple_signature(
    l0: &LagrangianFrame,
    m: &LagrangianFrame,
    l1: &LagrangianFrame,
    tol: &Tol,
) -> Result<i64> {
    for (x, y) in [(l0, l1), (m, l0), (m, l1)] {
        let ci = clean_intersection(x.subspace(), y.subspace(), tol)?;
        if !ci.clean {
            return Err(Error::TransversalityViolated {
                context: "triple signature needs a transverse triple",
            });
        }
    }
    let n = l0.half_dim();
    // Decompose each column of M as v + w with v ∈ L₀, w ∈ L₁.
    let basis = linalg::hcat(&[l0.basis(), l1.basis()]);
    let coeff = linalg::solve_lu(&basis, m.basis())?;
    let alpha = coeff.rows(0, n).into_owned();
    let beta = coeff.rows(n, n).into_owned();
    let v = l0.basis() * alpha;
    let w = l1.basis() * beta;
    // Q_{jk} = ω(w_j, v_k) = (J w_j)ᵀ v_k, symmetrized.
    let q = linalg::symmetrize(&(j_mat(&w).transpose() * v));
    let (vals, _) = linalg::sym_eigen(&q);
    let scale = vals.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if scale <= 0.0 {
        return Err(Error::TransversalityViolated {
            context: "triple-signature form vanished",
        });
    }
    let (sig, nondeg) = linalg::signature(&vals, tol.nd * scale);
    if !nondeg {
        return Err(Error::TransversalityViolated {
            context: "triple-signature form is numerically degenerate",
        });
    }
    if (n as i64 - sig) % 2 != 0 {
        return Err(Error::ParityViolation {
            context: "triple signature parity does not match the dimension",
        });
    }
    Ok(sig)
}

/// Hörmander index of the quadruple, `½[sign(L₀,M₁,L₁) − sign(L₀,M₀,L₁)]`.
/// Implemented for `L₀` transverse to `L₁`; all four pairs `L_i, M_j` must be
/// transverse.
pub fn hormander_index(
    l0: &LagrangianFrame,
    l1: &LagrangianFrame,
    m0: &LagrangianFrame,
    m1: &LagrangianFrame,
    tol: &Tol,
) -> Result<i64> {
    let s1 = triple_signature(l0, m1, l1, tol)?;
    let s0 = triple_signature(l0, m0, l1, tol)?;
    let diff = s1 - s0;
    if diff % 2 != 0 {
        return Err(Error::ParityViolation {
            context: "Hörmander index is not an integer",
        });
    }
    Ok(diff / 2)
}

/// Independent route to the Hörmander index: the winding number of the closed
/// path that runs from `M₀` to `M₁` inside `Λ_{L₀}` and back from `M₁` to
/// `M₀` inside `Λ_{L₁}` (chart paths in both legs).
pub fn hormander_index_via_path(
    l0: &LagrangianFrame,
    l1: &LagrangianFrame,
    m0: &LagrangianFrame,
    m1: &LagrangianFrame,
    tol: &Tol,
) -> Result<i64> {
    let c0_m0 = chart_in_complement(m0, l0, tol)?;
    let c0_m1 = chart_in_complement(m1, l0, tol)?;
    let c1_m1 = chart_in_complement(m1, l1, tol)?;
    let c1_m0 = chart_in_complement(m0, l1, tol)?;
    let leg1 = chart_segment_path(l0, &c0_m0, &c0_m1, tol)?;
    let leg2 = chart_segment_path(l1, &c1_m1, &c1_m0, tol)?;
    let delta = unwound_phase_delta(&leg1, tol)? + unwound_phase_delta(&leg2, tol)?;
    winding_from_delta(delta)
}

/// A Lagrangian transverse to both inputs, in any mutual position.
///
/// For a transverse pair the graph of the pairing-induced isomorphism
/// `Φ: L₀ → L₁` with `ω(Φv, v') = ⟨v, v'⟩` works and makes the associated
/// form positive definite. In general the construction reduces modulo
/// `J(L₀ ∩ L₁)`, picks the transversal there, and extends by `J(L₀ ∩ L₁)`.
pub fn transversal_to_pair(
    l0: &LagrangianFrame,
    l1: &LagrangianFrame,
    tol: &Tol,
) -> Result<LagrangianFrame> {
    let inter = l0.subspace().intersection(l1.subspace(), tol)?;
    let m = if inter.dim() == 0 {
        transversal_direct(l0, l1, tol)?
    } else {
        let ji = Subspace::from_frame(j_mat(inter.basis()), tol)?;
        let ctx = ReductionContext::new(ji, tol)?;
        let r0 = ctx.reduce(l0, tol)?;
        let r1 = ctx.reduce(l1, tol)?;
        let m_red = transversal_direct(&r0, &r1, tol)?;
        let ambient = ctx.embed_frame(m_red.basis());
        let stacked = linalg::hcat(&[&ambient, ctx.iso().basis()]);
        LagrangianFrame::from_frame(linalg::orthonormalize_full_rank(&stacked, tol)?, tol)?
    };
    for l in [l0, l1] {
        let ci = clean_intersection(m.subspace(), l.subspace(), tol)?;
        if !ci.clean {
            return Err(Error::InvariantViolation(
                "constructed transversal fails the clean-intersection replay".into(),
            ));
        }
    }
    Ok(m)
}

fn transversal_direct(
    l0: &LagrangianFrame,
    l1: &LagrangianFrame,
    tol: &Tol,
) -> Result<LagrangianFrame> {
    let n = l0.half_dim();
    if n == 0 {
        return Ok(l0.clone());
    }
    let ci = clean_intersection(l0.subspace(), l1.subspace(), tol)?;
    if !ci.clean {
        return Err(Error::TransversalityViolated {
            context: "direct transversal needs a transverse pair",
        });
    }
    // P_{ij} = ω(f1_i, f0_j); Φ maps the frame of L₀ through P^{-T}.
    let p = j_mat(l1.basis()).transpose() * l0.basis();
    let pt_inv = linalg::solve_lu(&p.transpose(), &Mat::identity(n, n))?;
    let raw = l0.basis() + l1.basis() * pt_inv;
    LagrangianFrame::from_frame(linalg::orthonormalize_full_rank(&raw, tol)?, tol)
}

/// Direct sum of frames under the coordinate interleaving
/// `S(R^{n_a}) ⊕ S(R^{n_b}) = S(R^{n_a + n_b})`.
pub fn direct_sum_frames(a: &LagrangianFrame, b: &LagrangianFrame) -> LagrangianFrame {
    let (na, nb) = (a.half_dim(), b.half_dim());
    let n = na + nb;
    let mut out = Mat::zeros(2 * n, n);
    for j in 0..na {
        for i in 0..na {
            out[(i, j)] = a.basis()[(i, j)];
            out[(n + i, j)] = a.basis()[(na + i, j)];
        }
    }
    for j in 0..nb {
        for i in 0..nb {
            out[(na + i, na + j)] = b.basis()[(i, j)];
            out[(n + na + i, na + j)] = b.basis()[(nb + i, j)];
        }
    }
    LagrangianFrame::from_frame(out, &Tol::default())
        .expect("direct sum of Lagrangian frames is a Lagrangian frame")
}

/// Frame of the co-diagonal `{(x, y, −x, y) : x, y ∈ R^k}` in `S(R^{2k})`,
/// the canonical middle block of a suspension: its triple signature against
/// `(R₀^{2k}, R₁^{2k})` vanishes.
pub fn codiagonal_frame(two_k: usize) -> LagrangianFrame {
    assert!(two_k.is_multiple_of(2), "co-diagonal block needs an even dimension");
    let k = two_k / 2;
    let s = 1.0 / 2f64.sqrt();
    let mut basis = Mat::zeros(4 * k, 2 * k);
    for i in 0..k {
        // x-column: p = (e_i, 0), q = (−e_i, 0).
        basis[(i, i)] = s;
        basis[(2 * k + i, i)] = -s;
        // y-column: p = (0, e_i), q = (0, e_i).
        basis[(k + i, k + i)] = s;
        basis[(2 * k + k + i, k + i)] = s;
    }
    LagrangianFrame::from_frame(basis, &Tol::default())
        .expect("co-diagonal frame is a Lagrangian frame")
}

/// The `k`-th suspension of a triple: blocks `R₀^{2k}`, the co-diagonal, and
/// `R₁^{2k}` appended to `L₀`, `M`, `L₁` respectively. Preserves the triple
/// signature.
pub fn suspend_triple(
    l0: &LagrangianFrame,
    m: &LagrangianFrame,
    l1: &LagrangianFrame,
    k: usize,
) -> (LagrangianFrame, LagrangianFrame, LagrangianFrame) {
    let r0 = LagrangianFrame::h0(2 * k);
    let r1 = LagrangianFrame::h1(2 * k);
    let delta = codiagonal_frame(2 * k);
    (
        direct_sum_frames(l0, &r0),
        direct_sum_frames(m, &delta),
        direct_sum_frames(l1, &r1),
    )
}
