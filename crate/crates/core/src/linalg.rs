//! Dense linear-algebra helpers shared by the geometry modules.
//!
//! Everything here wraps nalgebra. Rank decisions are singular-value based and
//! go through [`rank_with_gap`], which refuses to classify spectra that have
//! no clear gap around the threshold.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol::Tol;

pub type Mat = DMatrix<f64>;
pub type Vect = DVector<f64>;
pub type CMat = DMatrix<Complex64>;

/// Horizontal concatenation. All blocks must have the same row count.
pub fn hcat(blocks: &[&Mat]) -> Mat {
    let nonempty: Vec<&&Mat> = blocks.iter().filter(|b| b.ncols() > 0).collect();
    let nrows = blocks.first().map_or(0, |b| b.nrows());
    let ncols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(nrows, ncols);
    let mut at = 0;
    for b in nonempty {
        out.view_mut((0, at), (nrows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// Singular values of `m`, sorted descending.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Numerical rank from a descending singular spectrum.
///
/// A value counts as nonzero when it is at least `tol.rank` times the largest
/// value. The decision is accepted only if the smallest kept and largest
/// dropped values are separated by a factor of `tol.rank_gap_factor`.
pub fn rank_with_gap(svals: &[f64], tol: &Tol, context: &'static str) -> Result<usize> {
    if svals.is_empty() {
        return Ok(0);
    }
    let smax = svals[0];
    if smax <= f64::MIN_POSITIVE {
        return Ok(0);
    }
    let threshold = tol.rank * smax;
    let r = svals.iter().take_while(|&&s| s >= threshold).count();
    if r < svals.len() && r > 0 {
        let kept = svals[r - 1];
        let dropped = svals[r];
        let ratio = if dropped <= f64::MIN_POSITIVE {
            f64::INFINITY
        } else {
            kept / dropped
        };
        if ratio < tol.rank_gap_factor {
            return Err(Error::NumericallyAmbiguous { context, ratio });
        }
    }
    Ok(r)
}

/// Orthonormal basis of the column space, rank decided with a gap check.
pub fn column_space(m: &Mat, tol: &Tol, context: &'static str) -> Result<Mat> {
    if m.ncols() == 0 {
        return Ok(Mat::zeros(m.nrows(), 0));
    }
    let svd = m.clone().svd(true, false);
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let svals: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let r = rank_with_gap(&svals, tol, context)?;
    let u = svd.u.as_ref().expect("svd with u");
    let mut out = Mat::zeros(m.nrows(), r);
    for (k, &i) in idx.iter().take(r).enumerate() {
        out.set_column(k, &u.column(i));
    }
    Ok(out)
}

/// Orthonormal basis of the right null space, rank decided with a gap check.
pub fn nullspace(m: &Mat, tol: &Tol, context: &'static str) -> Result<Mat> {
    let ncols = m.ncols();
    if ncols == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    if m.nrows() == 0 {
        return Ok(Mat::identity(ncols, ncols));
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    // Thin SVD carries min(nrows, ncols) values; missing ones are exact zeros.
    let mut pairs: Vec<(f64, usize)> = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .map(|(i, s)| (s, i))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let svals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let r = rank_with_gap(&svals, tol, context)?;
    let null_dim = ncols - r;
    let mut out = Mat::zeros(ncols, null_dim);
    let mut k = 0;
    for &(_, i) in pairs.iter().skip(r) {
        out.set_column(k, &v_t.row(i).transpose());
        k += 1;
    }
    if v_t.nrows() < ncols {
        // Complete the basis for the coordinates the thin SVD never reached.
        complete_to_nullspace(v_t, &mut out, k)?;
    }
    Ok(out)
}

fn complete_to_nullspace(v_t: &Mat, out: &mut Mat, mut k: usize) -> Result<()> {
    // Thin-SVD path (nrows < ncols): the rows of v_t span the row space
    // orthonormally; deflate the identity against them and against the null
    // vectors already collected, then orthonormalize what is left.
    let ncols = v_t.ncols();
    let mut candidates = Mat::identity(ncols, ncols);
    for _ in 0..2 {
        let proj_rows = v_t.transpose() * (v_t * &candidates);
        candidates -= proj_rows;
        if k > 0 {
            let have = out.columns(0, k).into_owned();
            let proj_have = &have * (have.transpose() * &candidates);
            candidates -= proj_have;
        }
    }
    let mut cands: Vec<Vect> = (0..ncols).map(|j| candidates.column(j).into_owned()).collect();
    while k < out.ncols() {
        cands.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
        let best = cands.remove(0);
        let norm = best.norm();
        if norm < 1e-12 {
            return Err(Error::InvariantViolation(
                "null-space completion ran out of directions".into(),
            ));
        }
        let q = best / norm;
        for c in cands.iter_mut() {
            let coeff = q.dot(c);
            *c -= &q * coeff;
        }
        out.set_column(k, &q);
        k += 1;
    }
    Ok(())
}

/// Thin-QR orthonormalization of a matrix expected to have full column rank.
pub fn orthonormalize_full_rank(m: &Mat, tol: &Tol) -> Result<Mat> {
    if m.ncols() == 0 {
        return Ok(m.clone());
    }
    let qr = m.clone().qr();
    let r = qr.r();
    let mut dmax: f64 = 0.0;
    let mut dmin = f64::INFINITY;
    for i in 0..r.nrows().min(r.ncols()) {
        let d = r[(i, i)].abs();
        dmax = dmax.max(d);
        dmin = dmin.min(d);
    }
    if !(dmin > tol.rank * dmax) {
        return Err(Error::NumericallyAmbiguous {
            context: "orthonormalization of a rank-deficient frame",
            ratio: if dmax > 0.0 { dmin / dmax } else { 0.0 },
        });
    }
    Ok(qr.q())
}

/// Orthogonal projector `F Fᵀ` of an orthonormal frame.
pub fn projector(frame: &Mat) -> Mat {
    frame * frame.transpose()
}

/// Gap distance `‖P_V − P_W‖₂` between the spans of two orthonormal frames.
///
/// For equal dimensions this is the sine of the largest principal angle,
/// computed as `‖(I − P_W) V‖₂` — the residual form is exact near zero where
/// the cosine route loses half the precision. Frames of different dimension
/// are at distance exactly 1.
pub fn gap_distance(a: &Mat, b: &Mat) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let residual = a - b * (b.transpose() * a);
    spectral_norm(&residual).min(1.0)
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub fn sym_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let se = nalgebra::SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = Mat::zeros(n, n);
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Smallest absolute eigenvalue of a symmetric matrix.
pub fn min_abs_eig_sym(m: &Mat) -> f64 {
    let (vals, _) = sym_eigen(m);
    vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min)
}

/// Largest absolute eigenvalue (spectral radius) of a symmetric matrix.
pub fn spectral_radius_sym(m: &Mat) -> f64 {
    let (vals, _) = sym_eigen(m);
    vals.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Spectral norm of a general matrix.
pub fn spectral_norm(m: &Mat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value of a general matrix.
pub fn smallest_sv(m: &Mat) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Symmetry check relative to `max(1, ‖A‖_max)`.
pub fn check_symmetric(m: &Mat, tol: &Tol) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: "symmetry check",
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let scale = 1f64.max(m.amax());
    let defect = (m - m.transpose()).amax();
    if defect > tol.sym * scale {
        return Err(Error::NotSymmetric { defect });
    }
    Ok(())
}

/// Signature (#positive − #negative) of a symmetric matrix given its
/// eigenvalues; `threshold` separates zero from nonzero. Returns the signature
/// and whether the form is nondegenerate at that threshold.
pub fn signature(eigs: &[f64], threshold: f64) -> (i64, bool) {
    let mut pos = 0i64;
    let mut neg = 0i64;
    let mut nondeg = true;
    for &e in eigs {
        if e > threshold {
            pos += 1;
        } else if e < -threshold {
            neg += 1;
        } else {
            nondeg = false;
        }
    }
    (pos - neg, nondeg)
}

/// `Z = X + iY` for real blocks of equal shape.
pub fn complex_from_blocks(x: &Mat, y: &Mat) -> CMat {
    CMat::from_fn(x.nrows(), x.ncols(), |i, j| Complex64::new(x[(i, j)], y[(i, j)]))
}

/// Modified Gram-Schmidt with column pivoting over the complex field.
/// Returns an orthonormal basis of the column span.
pub fn complex_orthonormalize_span(cols: &CMat, rel_tol: f64) -> CMat {
    let n = cols.nrows();
    let mut remaining: Vec<nalgebra::DVector<Complex64>> =
        (0..cols.ncols()).map(|j| cols.column(j).into_owned()).collect();
    let initial_max = remaining.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut basis: Vec<nalgebra::DVector<Complex64>> = Vec::new();
    if initial_max <= f64::MIN_POSITIVE {
        return CMat::zeros(n, 0);
    }
    loop {
        remaining.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
        let Some(top) = remaining.first() else { break };
        let norm = top.norm();
        if norm < rel_tol * initial_max {
            break;
        }
        let q = remaining.remove(0) / Complex64::new(norm, 0.0);
        for c in remaining.iter_mut() {
            // Twice for numerical stability.
            for _ in 0..2 {
                let coeff = q.dotc(c);
                *c -= &q * coeff;
            }
        }
        basis.push(q);
    }
    let mut out = CMat::zeros(n, basis.len());
    for (j, q) in basis.iter().enumerate() {
        out.set_column(j, q);
    }
    out
}

/// Solve `A X = B` by LU with partial pivoting.
pub fn solve_lu(a: &Mat, b: &Mat) -> Result<Mat> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or(Error::InvariantViolation("singular system in LU solve".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rank_gap_rejects_borderline_spectra() {
        let tol = Tol::default();
        // 1e-9 and 1e-7 straddle the 1e-8 threshold with only a 100x gap.
        let err = rank_with_gap(&[1.0, 1e-7, 1e-9], &tol, "test").unwrap_err();
        assert!(matches!(err, Error::NumericallyAmbiguous { .. }));
        // A clean spectrum passes.
        let r = rank_with_gap(&[1.0, 0.5, 1e-13], &tol, "test").unwrap();
        assert_eq!(r, 2);
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let tol = Tol::default();
        // 1x3 matrix: null space is 2-dimensional.
        let m = Mat::from_row_slice(1, 3, &[1.0, 2.0, 2.0]);
        let ns = nullspace(&m, &tol, "test").unwrap();
        assert_eq!(ns.ncols(), 2);
        assert!((m * &ns).amax() < 1e-12);
        assert_abs_diff_eq!(
            (ns.transpose() * &ns - Mat::identity(2, 2)).amax(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gap_distance_detects_span_equality() {
        let a = Mat::from_column_slice(2, 1, &[1.0, 0.0]);
        let b = Mat::from_column_slice(2, 1, &[-1.0, 0.0]);
        let c = Mat::from_column_slice(2, 1, &[0.0, 1.0]);
        assert!(gap_distance(&a, &b) < 1e-14);
        assert_abs_diff_eq!(gap_distance(&a, &c), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn sym_eigen_sorted_ascending() {
        let m = Mat::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 3.0]);
        let (vals, vecs) = sym_eigen(&m);
        assert!(vals[0] < vals[1]);
        let recon = &vecs * Mat::from_diagonal(&Vect::from_vec(vals.clone())) * vecs.transpose();
        assert!((recon - m).amax() < 1e-12);
    }

    #[test]
    fn complex_orthonormalize_rank_reveals() {
        let x = Mat::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let y = Mat::zeros(2, 3);
        let z = complex_from_blocks(&x, &y);
        let q = complex_orthonormalize_span(&z, 1e-12);
        assert_eq!(q.ncols(), 2);
    }
}
