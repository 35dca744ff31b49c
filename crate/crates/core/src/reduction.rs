//! Symplectic reduction modulo isotropic subspaces.
//!
//! For an isotropic subspace `I` of `S`, the reduction `S_I = I^♯ ∩ I^⊥`
//! carries the restricted symplectic form and complex structure, and `S`
//! splits orthogonally as `S_I ⊕ (I ⊕ JI)`. A Lagrangian `L` with a clean
//! intersection with `I` reduces to the Lagrangian
//! `ρ^I(L) = proj_{S_I}(L ∩ I^♯) = (L + I) ∩ S_I` of `S_I`; both routes are
//! computed and checked against each other. The right inverse is
//! `ε^I(L) = L + JI`, and for nested cofinite isotropics the reductions
//! compose: `ρ^{I₁} = ρ^{I} ∘ ρ^{I₂}` with `I = I₁ ∩ I₂^⊥`.
//!
//! A [`ReductionContext`] fixes once an orthonormal basis of `S_I` compatible
//! with `J` (complex orthonormalization of the frame viewed in `C^n`), so
//! reduced Lagrangians are handed out in standard `S(R^m)` coordinates and
//! all Grassmannian machinery applies to them directly.

use crate::error::{Error, Result};
use crate::grassmann::LagrangianPath;
use crate::linalg::{self, Mat};
use crate::symlin::{
    classify, clean_intersection, j_mat, symplectic_complement, LagrangianFrame, Subspace,
    SubspaceClass,
};
use crate::tol::Tol;

/// Precomputed data for reducing modulo a fixed isotropic subspace.
#[derive(Debug, Clone)]
pub struct ReductionContext {
    iso: Subspace,
    s_i: Subspace,
    /// Columns `c_1..c_m, Jc_1..Jc_m`: an orthonormal symplectic basis of
    /// `S_I`, mapping standard `S(R^m)` coordinates into the ambient space.
    cbasis: Mat,
}

impl ReductionContext {
    /// Context for a general isotropic subspace of `S(R^n)`.
    pub fn new(iso: Subspace, tol: &Tol) -> Result<Self> {
        match classify(&iso, tol) {
            SubspaceClass::Isotropic | SubspaceClass::Lagrangian => {}
            _ => return Err(Error::NotIsotropic),
        }
        let ambient = iso.ambient_dim();
        let n = ambient / 2;
        let perp = iso.orthogonal_complement(tol)?;
        let j_perp = Subspace::from_frame(j_mat(perp.basis()), tol)?;
        let s_i = j_perp.intersection(&perp, tol)?;
        if s_i.dim() != ambient - 2 * iso.dim() {
            return Err(Error::InvariantViolation(format!(
                "reduction of a {}-dim isotropic in dim {} gave S_I of dim {}",
                iso.dim(),
                ambient,
                s_i.dim()
            )));
        }
        // Complex-orthonormalize the frame in C^n to get a J-compatible basis.
        let m = s_i.dim() / 2;
        let top = s_i.basis().rows(0, n).into_owned();
        let bottom = s_i.basis().rows(n, n).into_owned();
        let z = linalg::complex_from_blocks(&top, &bottom);
        let q = linalg::complex_orthonormalize_span(&z, 1e-10);
        if q.ncols() != m {
            return Err(Error::InvariantViolation(format!(
                "complex basis of S_I has rank {} instead of {}",
                q.ncols(),
                m
            )));
        }
        let mut cbasis = Mat::zeros(ambient, 2 * m);
        for j in 0..m {
            for i in 0..n {
                let c = q[(i, j)];
                cbasis[(i, j)] = c.re;
                cbasis[(n + i, j)] = c.im;
                cbasis[(i, m + j)] = -c.im;
                cbasis[(n + i, m + j)] = c.re;
            }
        }
        Ok(ReductionContext { iso, s_i, cbasis })
    }

    /// Context for `I₀ = I x {0}` with `I` a subspace of `H = R^n`, using the
    /// canonical basis of `F = I^⊥ ⊆ H`: the reduction is `S(F)` and the
    /// horizontal `H₀` reduces to the standard horizontal.
    pub fn from_h_subspace(i_h: &Subspace, tol: &Tol) -> Result<Self> {
        let n = i_h.ambient_dim();
        let f_basis = linalg::nullspace(&i_h.basis().transpose(), tol, "reduction complement")?;
        let f = f_basis.ncols();
        let k = i_h.dim();
        let mut iso = Mat::zeros(2 * n, k);
        iso.view_mut((0, 0), (n, k)).copy_from(i_h.basis());
        let mut s_i = Mat::zeros(2 * n, 2 * f);
        s_i.view_mut((0, 0), (n, f)).copy_from(&f_basis);
        s_i.view_mut((n, f), (n, f)).copy_from(&f_basis);
        Ok(ReductionContext {
            iso: Subspace::from_frame(iso, tol)?,
            s_i: Subspace::from_frame(s_i.clone(), tol)?,
            cbasis: s_i,
        })
    }

    pub fn iso(&self) -> &Subspace {
        &self.iso
    }

    pub fn s_i(&self) -> &Subspace {
        &self.s_i
    }

    /// Half-dimension `m` of the reduced space `S(R^m)`.
    pub fn reduced_half_dim(&self) -> usize {
        self.cbasis.ncols() / 2
    }

    /// Map standard reduced coordinates into the ambient space.
    pub fn embed_frame(&self, std_frame: &Mat) -> Mat {
        &self.cbasis * std_frame
    }

    /// Express ambient vectors lying in `S_I` in standard reduced
    /// coordinates (an isometry on `S_I`).
    pub fn restrict_frame(&self, ambient_frame: &Mat) -> Mat {
        self.cbasis.transpose() * ambient_frame
    }

    /// Symplectic reduction `ρ^I(L)`, returned in standard `S(R^m)`
    /// coordinates. Both characterizations — the projection of `L ∩ I^♯`
    /// onto `S_I` and `(L + I) ∩ S_I` — are computed and must agree.
    ///
    /// In finite dimension the two routes coincide for every Lagrangian, so
    /// no clean-intersection hypothesis is imposed here; cleanness mod `I` is
    /// the regularity condition continuity arguments need, and callers that
    /// rely on it (path reductions) enforce it on their inputs.
    pub fn reduce(&self, l: &LagrangianFrame, tol: &Tol) -> Result<LagrangianFrame> {
        let m = self.reduced_half_dim();
        let isharp = symplectic_complement(&self.iso, tol)?;
        let inter = l.subspace().intersection(&isharp, tol)?;
        let projected = self.s_i.projector() * inter.basis();
        let onb = linalg::column_space(&projected, tol, "reduction projection")?;
        if onb.ncols() != m {
            return Err(Error::InvariantViolation(format!(
                "projection of L ∩ I^♯ has dimension {} instead of {}",
                onb.ncols(),
                m
            )));
        }
        let reduced = LagrangianFrame::from_frame(self.restrict_frame(&onb), tol)?;

        let sum = l.subspace().sum(&self.iso, tol)?;
        let inter2 = sum.intersection(&self.s_i, tol)?;
        let check = Subspace::from_frame(self.restrict_frame(inter2.basis()), tol)?;
        if !check.same_span(reduced.subspace(), tol) {
            return Err(Error::InvariantViolation(
                "the two symplectic-reduction routes disagree".into(),
            ));
        }
        Ok(reduced)
    }

    /// Strict variant of [`ReductionContext::reduce`]: rejects Lagrangians
    /// that meet `I` nontrivially. Path reductions use this form, since clean
    /// intersection along the whole path is what makes the reduced path
    /// continuous.
    pub fn reduce_clean(&self, l: &LagrangianFrame, tol: &Tol) -> Result<LagrangianFrame> {
        let ci = clean_intersection(l.subspace(), &self.iso, tol)?;
        if !ci.clean {
            return Err(Error::NotClean {
                dim: ci.dim_intersection,
            });
        }
        self.reduce(l, tol)
    }

    /// Right inverse `ε^I(L) = L + JI`, mapping a Lagrangian of the reduced
    /// space back to a Lagrangian of `S` that is clean mod `I`.
    pub fn extend(&self, l_red: &LagrangianFrame, tol: &Tol) -> Result<LagrangianFrame> {
        if l_red.ambient_dim() != 2 * self.reduced_half_dim() {
            return Err(Error::DimensionMismatch {
                context: "reduction extension",
                expected: 2 * self.reduced_half_dim(),
                got: l_red.ambient_dim(),
            });
        }
        let ambient = self.embed_frame(l_red.basis());
        let ji = j_mat(self.iso.basis());
        let stacked = linalg::hcat(&[&ambient, &ji]);
        LagrangianFrame::from_frame(linalg::orthonormalize_full_rank(&stacked, tol)?, tol)
    }
}

/// Verify `ρ^{I₁} = ρ^{I} ∘ ρ^{I₂}` with `I = I₁ ∩ I₂^⊥` on a batch of
/// Lagrangians clean mod `I₁`. Returns the conjunction of the per-Lagrangian
/// gap comparisons.
pub fn compose_check(
    i1: &Subspace,
    i2: &Subspace,
    batch: &[LagrangianFrame],
    tol: &Tol,
) -> Result<bool> {
    for iso in [i1, i2] {
        match classify(iso, tol) {
            SubspaceClass::Isotropic | SubspaceClass::Lagrangian => {}
            _ => return Err(Error::NotIsotropic),
        }
    }
    if !i1.contains(i2, tol) {
        return Err(Error::NotNested);
    }
    let ctx1 = ReductionContext::new(i1.clone(), tol)?;
    let ctx2 = ReductionContext::new(i2.clone(), tol)?;
    let i2_perp = i2.orthogonal_complement(tol)?;
    let i_mid = i1.intersection(&i2_perp, tol)?;
    let i_mid_std = Subspace::from_frame(ctx2.restrict_frame(i_mid.basis()), tol)?;
    let ctx_inner = ReductionContext::new(i_mid_std, tol)?;

    let mut all = true;
    for l in batch {
        let direct = ctx1.reduce_clean(l, tol)?;
        let direct_ambient = ctx1.embed_frame(direct.basis());
        let step1 = ctx2.reduce(l, tol)?;
        let step2 = ctx_inner.reduce(&step1, tol)?;
        let two_step_ambient = ctx2.embed_frame(&ctx_inner.embed_frame(step2.basis()));
        if linalg::gap_distance(&direct_ambient, &two_step_ambient) >= tol.gap {
            all = false;
        }
    }
    Ok(all)
}

/// A subspace `I ⊆ H` of maximal found dimension such that `I₀ = I x {0}`
/// intersects every frame of the path cleanly, with a quantitative margin at
/// all samples and midpoints.
///
/// At each sample the directions of `P_H(L(t) ∩ H₀)` are collected and `I`
/// is taken orthogonal to all of them; margin violations at check points
/// contribute their near-intersection directions and the selection repeats.
/// When the path never meets the train of `H₀` this would give `I = H` and a
/// zero-dimensional reduction, so one direction is dropped to keep
/// `dim F ≥ 1`.
pub fn common_isotropic(path: &LagrangianPath, tol: &Tol) -> Result<Subspace> {
    let n = path.half_dim();
    let h0 = LagrangianFrame::h0(n);
    let mut kernel_dirs: Vec<Mat> = Vec::new();
    for (_, frame) in path.samples() {
        let inter = frame.subspace().intersection(h0.subspace(), tol)?;
        if inter.dim() > 0 {
            kernel_dirs.push(inter.basis().rows(0, n).into_owned());
        }
    }

    // Check points: samples and midpoints.
    let mut check_ts: Vec<f64> = Vec::with_capacity(2 * path.samples().len());
    for w in path.samples().windows(2) {
        check_ts.push(w[0].0);
        check_ts.push(0.5 * (w[0].0 + w[1].0));
    }
    check_ts.push(path.b());

    let margin = 10.0 * tol.rank;
    for _round in 0..(n + 2) {
        let i_basis = if kernel_dirs.is_empty() {
            Mat::identity(n, n)
        } else {
            let stacked = linalg::hcat(&kernel_dirs.iter().collect::<Vec<_>>());
            linalg::nullspace(&stacked.transpose(), tol, "common isotropic")?
        };
        if i_basis.ncols() == 0 {
            return Ok(Subspace::zero(n));
        }
        let mut i0 = Mat::zeros(2 * n, i_basis.ncols());
        i0.view_mut((0, 0), (n, i_basis.ncols())).copy_from(&i_basis);
        let proj = linalg::projector(&i0);

        let mut new_dirs: Vec<Mat> = Vec::new();
        let mut extra_ts: Vec<f64> = Vec::new();
        for (idx, &t) in check_ts.iter().enumerate() {
            let frame = path.eval(t, tol)?;
            let residual = frame.basis() - &proj * frame.basis();
            let svd = residual.clone().svd(false, true);
            let v_t = svd.v_t.as_ref().expect("svd with v_t");
            let mut violated = false;
            for (i, &s) in svd.singular_values.iter().enumerate() {
                if s <= margin {
                    violated = true;
                    let combo = frame.basis() * v_t.row(i).transpose();
                    let u = combo.rows(0, n).into_owned();
                    let norm = u.norm();
                    if norm > 1e-8 {
                        new_dirs.push(Mat::from_column_slice(n, 1, (u / norm).as_slice()));
                    }
                }
            }
            if violated {
                // Subdivide around the violation so the next round checks a
                // finer neighborhood.
                if idx > 0 {
                    extra_ts.push(0.5 * (check_ts[idx - 1] + t));
                }
                if idx + 1 < check_ts.len() {
                    extra_ts.push(0.5 * (t + check_ts[idx + 1]));
                }
            }
        }
        if !extra_ts.is_empty() {
            check_ts.extend(extra_ts);
            check_ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            check_ts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        }
        if new_dirs.is_empty() {
            let final_basis = if i_basis.ncols() == n {
                // Nothing forced any exclusion: keep the reduction
                // one-dimensional instead of zero-dimensional.
                i_basis.columns(0, n - 1).into_owned()
            } else {
                i_basis
            };
            return Subspace::from_frame(final_basis, tol);
        }
        kernel_dirs.extend(new_dirs);
    }
    Err(Error::NumericallyAmbiguous {
        context: "common isotropic selection did not stabilize",
        ratio: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::FrameGen;
    use crate::pathgen;
    use crate::symlin::graph_lagrangian;
    use nalgebra::DVector;
    use std::sync::Arc;

    fn tol() -> Tol {
        Tol::default()
    }

    fn span_e2_in_h(tol: &Tol) -> Subspace {
        Subspace::from_frame(Mat::from_column_slice(2, 1, &[0.0, 1.0]), tol).unwrap()
    }

    #[test]
    fn trivial_isotropic_gives_identity_reduction() {
        let t = tol();
        let ctx = ReductionContext::new(Subspace::zero(6), &t).unwrap();
        assert_eq!(ctx.reduced_half_dim(), 3);
        let mut rng = pathgen::rng(71);
        for _ in 0..20 {
            let l = pathgen::random_lagrangian(3, &mut rng, &t);
            let red = ctx.reduce(&l, &t).unwrap();
            let back = ctx.embed_frame(red.basis());
            assert!(linalg::gap_distance(&back, l.basis()) < 1e-9);
        }
    }

    #[test]
    fn h_subspace_context_builds_f_cross_f() {
        let t = tol();
        // I = span(e2) ⊂ H in n = 2: S_I = F x F with F = span(e1).
        let ctx = ReductionContext::from_h_subspace(&span_e2_in_h(&t), &t).unwrap();
        assert_eq!(ctx.reduced_half_dim(), 1);
        let expected = Subspace::from_frame(
            Mat::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
            &t,
        )
        .unwrap();
        assert!(ctx.s_i().same_span(&expected, &t));
    }

    #[test]
    fn reduction_dimension_count_random() {
        let t = tol();
        let mut rng = pathgen::rng(73);
        for _ in 0..50 {
            let n = 2 + pathgen::random_index(&mut rng, 3);
            let k = 1 + pathgen::random_index(&mut rng, n);
            let iso = pathgen::random_isotropic(n, k, &mut rng, &t);
            let ctx = ReductionContext::new(iso, &t).unwrap();
            assert_eq!(ctx.reduced_half_dim(), n - k);
        }
    }

    #[test]
    fn diagonal_graph_reduces_to_scalar_graph() {
        let t = tol();
        let ctx = ReductionContext::from_h_subspace(&span_e2_in_h(&t), &t).unwrap();
        for (b1, b2) in [(0.7, 2.0), (-1.3, 0.4), (0.0, 1.0)] {
            let l = graph_lagrangian(
                &Mat::from_diagonal(&DVector::from_row_slice(&[b1, b2])),
                &t,
            )
            .unwrap();
            let red = ctx.reduce(&l, &t).unwrap();
            let expected = graph_lagrangian(&Mat::from_element(1, 1, b1), &t).unwrap();
            assert!(red.gap(&expected) < 1e-9, "b1 = {b1}");
        }
    }

    #[test]
    fn h0_reduces_to_horizontal() {
        let t = tol();
        let ctx = ReductionContext::from_h_subspace(&span_e2_in_h(&t), &t).unwrap();
        let red = ctx.reduce(&LagrangianFrame::h0(2), &t).unwrap();
        assert!(red.gap(&LagrangianFrame::h0(1)) < 1e-10);
    }

    #[test]
    fn reduce_handles_non_clean_input() {
        let t = tol();
        let ctx = ReductionContext::from_h_subspace(&span_e2_in_h(&t), &t).unwrap();
        // graph(diag(1, 0)) contains (e2, 0) ∈ I₀, so the intersection with
        // I₀ is nontrivial; the reduction still lands on (L + I₀) ∩ S_I.
        let l = graph_lagrangian(&Mat::from_diagonal(&DVector::from_row_slice(&[1.0, 0.0])), &t)
            .unwrap();
        let ci = clean_intersection(l.subspace(), ctx.iso(), &t).unwrap();
        assert!(!ci.clean);
        let red = ctx.reduce(&l, &t).unwrap();
        let expected = graph_lagrangian(&Mat::from_element(1, 1, 1.0), &t).unwrap();
        assert!(red.gap(&expected) < 1e-9);
    }

    #[test]
    fn extend_after_reduce_is_identity() {
        let t = tol();
        let mut rng = pathgen::rng(79);
        for _ in 0..100 {
            let n = 2 + pathgen::random_index(&mut rng, 3);
            let k = 1 + pathgen::random_index(&mut rng, n - 1);
            let iso = pathgen::random_isotropic(n, k, &mut rng, &t);
            let ctx = ReductionContext::new(iso, &t).unwrap();
            let red = pathgen::random_lagrangian(n - k, &mut rng, &t);
            let extended = ctx.extend(&red, &t).unwrap();
            // Extension is clean mod I and reduces back to the input.
            let ci = clean_intersection(extended.subspace(), ctx.iso(), &t).unwrap();
            assert!(ci.clean);
            let back = ctx.reduce(&extended, &t).unwrap();
            assert!(back.gap(&red) < 1e-9);
        }
    }

    #[test]
    fn extension_of_horizontal_explicit() {
        let t = tol();
        let ctx = ReductionContext::from_h_subspace(&span_e2_in_h(&t), &t).unwrap();
        let extended = ctx.extend(&LagrangianFrame::h0(1), &t).unwrap();
        // F₀ + J I₀ = span{(e1,0),(0,e2)}.
        let expected = Subspace::from_frame(
            Mat::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            &t,
        )
        .unwrap();
        assert!(extended.subspace().same_span(&expected, &t));
        assert_eq!(classify(extended.subspace(), &t), SubspaceClass::Lagrangian);
    }

    #[test]
    fn s_i_equals_s_ji() {
        let t = tol();
        let mut rng = pathgen::rng(83);
        for _ in 0..20 {
            let n = 2 + pathgen::random_index(&mut rng, 3);
            let k = 1 + pathgen::random_index(&mut rng, n);
            let iso = pathgen::random_isotropic(n, k, &mut rng, &t);
            let ji = Subspace::from_frame(j_mat(iso.basis()), &t).unwrap();
            let ctx_a = ReductionContext::new(iso, &t).unwrap();
            let ctx_b = ReductionContext::new(ji, &t).unwrap();
            assert!(ctx_a.s_i().same_span(ctx_b.s_i(), &t));
        }
    }

    #[test]
    fn reduction_preserves_lagrangian_class() {
        let t = tol();
        let mut rng = pathgen::rng(89);
        for _ in 0..50 {
            let n = 2 + pathgen::random_index(&mut rng, 4);
            let k = 1 + pathgen::random_index(&mut rng, n - 1);
            let iso = pathgen::random_isotropic(n, k, &mut rng, &t);
            let ctx = ReductionContext::new(iso, &t).unwrap();
            let l = loop {
                let cand = pathgen::random_lagrangian(n, &mut rng, &t);
                if clean_intersection(cand.subspace(), ctx.iso(), &t)
                    .map(|c| c.clean)
                    .unwrap_or(false)
                {
                    break cand;
                }
            };
            let red = ctx.reduce(&l, &t).unwrap();
            assert_eq!(classify(red.subspace(), &t), SubspaceClass::Lagrangian);
        }
    }

    #[test]
    fn reduction_is_continuous() {
        let t = tol();
        let ctx = ReductionContext::from_h_subspace(&span_e2_in_h(&t), &t).unwrap();
        let base = Mat::from_row_slice(2, 2, &[0.8, 0.1, 0.1, -0.5]);
        let l0 = graph_lagrangian(&base, &t).unwrap();
        let r0 = ctx.reduce(&l0, &t).unwrap();
        for eps in [1e-4, 1e-5, 1e-6] {
            let l1 = graph_lagrangian(&(&base + Mat::identity(2, 2) * eps), &t).unwrap();
            let r1 = ctx.reduce(&l1, &t).unwrap();
            let input_gap = l0.gap(&l1);
            let output_gap = r0.gap(&r1);
            assert!(output_gap < 50.0 * input_gap + 1e-12);
        }
    }

    #[test]
    fn compose_check_trivial_cases() {
        let t = tol();
        let mut rng = pathgen::rng(97);
        let (i1, _i2) = pathgen::nested_isotropic_pair(4, 2, 1, &mut rng, &t);
        let batch: Vec<LagrangianFrame> = (0..10)
            .map(|_| loop {
                let l = pathgen::random_lagrangian(4, &mut rng, &t);
                if clean_intersection(l.subspace(), &i1, &t)
                    .map(|c| c.clean)
                    .unwrap_or(false)
                {
                    break l;
                }
            })
            .collect();
        // I₂ = {0}: ρ^{I₁} = ρ^{I₁} ∘ id.
        assert!(compose_check(&i1, &Subspace::zero(8), &batch, &t).unwrap());
        // I₂ = I₁: ρ^{I₁} = id ∘ ρ^{I₁}.
        assert!(compose_check(&i1, &i1.clone(), &batch, &t).unwrap());
    }

    #[test]
    fn compose_check_random_nested() {
        let t = tol();
        let mut rng = pathgen::rng(101);
        for _ in 0..6 {
            let (i1, i2) = pathgen::nested_isotropic_pair(6, 3, 1, &mut rng, &t);
            let batch: Vec<LagrangianFrame> = (0..8)
                .map(|_| loop {
                    let l = pathgen::random_lagrangian(6, &mut rng, &t);
                    if clean_intersection(l.subspace(), &i1, &t)
                        .map(|c| c.clean)
                        .unwrap_or(false)
                    {
                        break l;
                    }
                })
                .collect();
            assert!(compose_check(&i1, &i2, &batch, &t).unwrap());
        }
    }

    #[test]
    fn compose_check_rejects_non_nested() {
        let t = tol();
        let mut rng = pathgen::rng(103);
        let a = pathgen::random_isotropic(4, 2, &mut rng, &t);
        let b = pathgen::random_isotropic(4, 2, &mut rng, &t);
        assert!(matches!(
            compose_check(&a, &b, &[], &t),
            Err(Error::NotNested) | Err(Error::NotIsotropic)
        ));
    }

    #[test]
    fn common_isotropic_constant_invertible() {
        let t = tol();
        let b = Mat::from_row_slice(2, 2, &[2.0, 0.3, 0.3, -1.0]);
        let frame = graph_lagrangian(&b, &t).unwrap();
        let gen: FrameGen = {
            let f = frame.clone();
            Arc::new(move |_| Ok(f.clone()))
        };
        let path = LagrangianPath::from_generator(0.0, 1.0, gen, 5, &t).unwrap();
        let iso = common_isotropic(&path, &t).unwrap();
        // No kernel anywhere: the guard keeps dim F = 1, so dim I = n − 1.
        assert_eq!(iso.dim(), 1);
        verify_clean_postcondition(&path, &iso, &t);
    }

    #[test]
    fn common_isotropic_diag_family() {
        let t = tol();
        let gen: FrameGen = Arc::new(move |s| {
            graph_lagrangian(
                &Mat::from_diagonal(&DVector::from_row_slice(&[s, 1.0])),
                &Tol::default(),
            )
        });
        let path = LagrangianPath::from_generator(-1.0, 1.0, gen, 17, &t).unwrap();
        let iso = common_isotropic(&path, &t).unwrap();
        // The kernel direction at s = 0 is e1, so I must contain e2.
        let e2 = Subspace::from_frame(Mat::from_column_slice(2, 1, &[0.0, 1.0]), &t).unwrap();
        assert!(iso.contains(&e2, &t));
        verify_clean_postcondition(&path, &iso, &t);
    }

    #[test]
    fn common_isotropic_random_paths() {
        let t = tol();
        let mut rng = pathgen::rng(107);
        for _ in 0..10 {
            let op = pathgen::random_regular_path(3, &mut rng, &t);
            let path = op.graph_path(&t).unwrap();
            let iso = common_isotropic(&path, &t).unwrap();
            verify_clean_postcondition(&path, &iso, &t);
        }
    }

    fn verify_clean_postcondition(path: &LagrangianPath, iso: &Subspace, t: &Tol) {
        let n = path.half_dim();
        let mut i0 = Mat::zeros(2 * n, iso.dim());
        i0.view_mut((0, 0), (n, iso.dim())).copy_from(iso.basis());
        let i0 = Subspace::from_frame(i0, t).unwrap();
        for (_, frame) in path.samples() {
            let ci = clean_intersection(frame.subspace(), &i0, t).unwrap();
            assert!(ci.clean);
        }
    }
}
