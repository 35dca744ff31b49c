//! Seeded random generators for frames, subspaces, and operator paths.
//!
//! Everything here is deterministic for a fixed seed, which the test suites
//! and the command-line `random-seeded` problem kind rely on.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::linalg::{self, CMat, Mat, Vect};
use crate::specflow::OperatorPath;
use crate::symlin::{LagrangianFrame, Subspace};
use crate::tol::Tol;

/// Deterministic RNG for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_index(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    rng.random_range(0..bound)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_vector(len: usize, rng: &mut ChaCha8Rng) -> Vect {
    Vect::from_fn(len, |_, _| normal(rng))
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
    Mat::from_fn(rows, cols, |_, _| normal(rng))
}

/// Random symmetric matrix with entries of the given scale.
pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng, scale: f64) -> Mat {
    let g = random_matrix(n, n, rng);
    linalg::symmetrize(&g) * scale
}

/// Haar-ish random orthogonal matrix via QR of a Gaussian sample, with the
/// sign convention fixed for determinism.
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Mat {
    let g = random_matrix(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Random unitary matrix via complex Gaussian + Gram-Schmidt.
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let re = random_matrix(n, n, rng);
    let im = random_matrix(n, n, rng);
    let z = linalg::complex_from_blocks(&re, &im);
    linalg::complex_orthonormalize_span(&z, 1e-12)
}

/// Random Lagrangian frame of `S(R^n)`, drawn from the unitary orbit so that
/// every Lagrangian (graph or not) can occur.
pub fn random_lagrangian(n: usize, rng: &mut ChaCha8Rng, tol: &Tol) -> LagrangianFrame {
    loop {
        let z = random_unitary(n, rng);
        if z.ncols() != n {
            continue;
        }
        let x = z.map(|c| c.re);
        let y = z.map(|c| c.im);
        let mut frame = Mat::zeros(2 * n, n);
        frame.view_mut((0, 0), (n, n)).copy_from(&x);
        frame.view_mut((n, 0), (n, n)).copy_from(&y);
        if let Ok(f) = LagrangianFrame::from_frame(frame, tol) {
            return f;
        }
    }
}

/// Random `k`-dimensional subspace of `R^ambient`.
pub fn random_subspace(ambient: usize, k: usize, rng: &mut ChaCha8Rng, tol: &Tol) -> Subspace {
    loop {
        let g = random_matrix(ambient, k, rng);
        if let Ok(s) = Subspace::from_spanning(&g, tol) {
            return s;
        }
    }
}

/// Random `k`-dimensional isotropic subspace of `S(R^n)`, taken as the span
/// of `k` columns of a random Lagrangian frame.
pub fn random_isotropic(n: usize, k: usize, rng: &mut ChaCha8Rng, tol: &Tol) -> Subspace {
    assert!(k <= n);
    let l = random_lagrangian(n, rng, tol);
    let cols = l.basis().columns(0, k).into_owned();
    Subspace::from_frame(cols, tol).expect("columns of a Lagrangian frame are orthonormal")
}

/// A smooth random symmetric family on `[-1, 1]`:
/// `A(λ) = M₀ + λ M₁ + 0.4·sin(2λ) M₂`, entries Gaussian.
pub fn random_operator_path(n: usize, rng: &mut ChaCha8Rng) -> OperatorPath {
    let m0 = random_symmetric(n, rng, 1.0);
    let m1 = random_symmetric(n, rng, 1.0) + Mat::identity(n, n) * (0.5 + rng.random::<f64>());
    let m2 = random_symmetric(n, rng, 0.4);
    let f = {
        let (m0, m1, m2) = (m0.clone(), m1.clone(), m2.clone());
        move |l: f64| &m0 + &m1 * l + &m2 * (2.0 * l).sin()
    };
    let d = move |l: f64| &m1 + &m2 * (2.0 * (2.0 * l).cos());
    OperatorPath::from_fn(-1.0, 1.0, n, f)
        .expect("trig family is symmetric by construction")
        .with_derivative(d)
}

/// Draw random operator paths until one passes the screen: invertible
/// endpoints with margin, isolated nondegenerate crossings with margin, and
/// crossings away from the endpoints. Used by the cross-method suites.
pub fn random_regular_path(n: usize, rng: &mut ChaCha8Rng, tol: &Tol) -> OperatorPath {
    for _ in 0..200 {
        let path = random_operator_path(n, rng);
        if screen_regular(&path, tol).is_ok() {
            return path;
        }
    }
    panic!("failed to draw a regular admissible path in 200 attempts");
}

fn screen_regular(path: &OperatorPath, tol: &Tol) -> Result<()> {
    use crate::specflow;
    let scale = path.admissible_scale(tol)?;
    let (a, b) = path.interval();
    let margin = 1e-3 * scale.max(1.0);
    if linalg::min_abs_eig_sym(&path.eval(a)) < margin
        || linalg::min_abs_eig_sym(&path.eval(b)) < margin
    {
        return Err(crate::error::Error::SingularEndpoint {
            at: a,
            eigenvalue: 0.0,
        });
    }
    let crossings = specflow::singular_set(path, tol)?;
    let mut prev = a;
    for (i, &c) in crossings.iter().enumerate() {
        if c - a < 1e-2 || b - c < 1e-2 {
            return Err(crate::error::Error::TransversalityLost { t: c });
        }
        if i > 0 && c - prev < 1e-2 {
            return Err(crate::error::Error::TransversalityLost { t: c });
        }
        prev = c;
        let report = specflow::crossing_form(path, c, tol)?;
        if !report.nondegenerate {
            return Err(crate::error::Error::DegenerateCrossing { at: c });
        }
        let (vals, _) = linalg::sym_eigen(&report.form);
        if vals.iter().any(|v| v.abs() < 1e-2) {
            return Err(crate::error::Error::DegenerateCrossing { at: c });
        }
    }
    Ok(())
}

/// Random path of Lagrangians on `[0, 1]` through a one-parameter unitary
/// family `Z(t) = Z₀ · W e^{itD} Wᵀ`, with `H = W D Wᵀ` a random symmetric
/// generator.
pub fn random_lagrangian_path(n: usize, rng: &mut ChaCha8Rng, tol: &Tol) -> crate::grassmann::LagrangianPath {
    use num_complex::Complex64;
    let z0 = loop {
        let z = random_unitary(n, rng);
        if z.ncols() == n {
            break z;
        }
    };
    let h = random_symmetric(n, rng, 1.2);
    let (d, w) = linalg::sym_eigen(&h);
    let wc = CMat::from_fn(n, n, |i, j| Complex64::new(w[(i, j)], 0.0));
    let t = *tol;
    let gen: crate::grassmann::FrameGen = std::sync::Arc::new(move |s| {
        let phase = CMat::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, s * d[i])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let zt = &z0 * (&wc * phase * wc.transpose());
        let x = zt.map(|c| c.re);
        let y = zt.map(|c| c.im);
        let mut frame = Mat::zeros(2 * n, n);
        frame.view_mut((0, 0), (n, n)).copy_from(&x);
        frame.view_mut((n, 0), (n, n)).copy_from(&y);
        crate::symlin::LagrangianFrame::from_frame(frame, &t)
    });
    crate::grassmann::LagrangianPath::from_generator(0.0, 1.0, gen, 17, tol)
        .expect("unitary family paths satisfy the gap contract after refinement")
}

/// A random Lagrangian whose intersection with `l0` contains a prescribed
/// `k`-dimensional isotropic piece (the first `k` frame columns of `l0`).
pub fn lagrangian_with_common_columns(
    l0: &LagrangianFrame,
    k: usize,
    rng: &mut ChaCha8Rng,
    tol: &Tol,
) -> LagrangianFrame {
    use crate::reduction::ReductionContext;
    let n = l0.half_dim();
    assert!(k <= n);
    if k == n {
        return l0.clone();
    }
    let iso = Subspace::from_frame(l0.basis().columns(0, k).into_owned(), tol)
        .expect("Lagrangian frame columns are orthonormal");
    let ctx = ReductionContext::new(iso.clone(), tol).expect("columns of a Lagrangian are isotropic");
    let red = random_lagrangian(n - k, rng, tol);
    // L = L_red ⊕ I is Lagrangian and contains I.
    let ambient = ctx.embed_frame(red.basis());
    let stacked = linalg::hcat(&[&ambient, iso.basis()]);
    LagrangianFrame::from_frame(
        linalg::orthonormalize_full_rank(&stacked, tol).expect("orthogonal blocks"),
        tol,
    )
    .expect("reduced Lagrangian plus its isotropic core is Lagrangian")
}

/// Nested isotropic pair `I₂ ⊆ I₁` of dimensions `k1 ≥ k2`, spanned by
/// leading columns of one random Lagrangian frame.
pub fn nested_isotropic_pair(
    n: usize,
    k1: usize,
    k2: usize,
    rng: &mut ChaCha8Rng,
    tol: &Tol,
) -> (Subspace, Subspace) {
    assert!(k2 <= k1 && k1 <= n);
    let l = random_lagrangian(n, rng, tol);
    let i1 = Subspace::from_frame(l.basis().columns(0, k1).into_owned(), tol).unwrap();
    let i2 = Subspace::from_frame(l.basis().columns(0, k2).into_owned(), tol).unwrap();
    (i1, i2)
}

/// A seeded family on `[-1, 1]` with a prescribed number of interior
/// crossings: diagonal ramps through randomly placed centers, conjugated by a
/// random orthogonal matrix, plus a small smooth wiggle. Endpoints may be
/// close to singular only by accident of the draw; callers needing
/// admissibility should screen.
pub fn seeded_crossing_path(n: usize, crossings: usize, rng: &mut ChaCha8Rng) -> OperatorPath {
    assert!(crossings < n || crossings == 0);
    let q = random_orthogonal(n, rng);
    let centers: Vec<f64> = (0..crossings)
        .map(|_| -0.7 + 1.4 * rng.random::<f64>())
        .collect();
    let slopes: Vec<f64> = (0..crossings)
        .map(|_| (0.5 + rng.random::<f64>()) * if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let rest: Vec<f64> = (crossings..n)
        .map(|_| (0.4 + 1.6 * rng.random::<f64>()) * if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let wiggle = random_symmetric(n, rng, 0.05);
    OperatorPath::from_fn(-1.0, 1.0, n, move |l| {
        let mut d = Mat::zeros(n, n);
        for (i, (&c, &s)) in centers.iter().zip(slopes.iter()).enumerate() {
            d[(i, i)] = s * (l - c);
        }
        for (i, &r) in rest.iter().enumerate() {
            d[(crossings + i, crossings + i)] = r;
        }
        &q * d * q.transpose() + &wiggle * (1.5 * l).sin()
    })
    .expect("conjugated ramp family is symmetric")
}

/// A path with a single prescribed nondegenerate crossing at `λ* = 0` on
/// `[-1, 1]`: kernel dimension `m` and crossing-form signature `sig`,
/// conjugated by a random orthogonal change of basis.
pub fn prescribed_crossing_path(
    n: usize,
    m: usize,
    sig: i64,
    rng: &mut ChaCha8Rng,
) -> OperatorPath {
    assert!(m <= n && sig.unsigned_abs() as usize <= m && (sig + m as i64) % 2 == 0);
    let q = random_orthogonal(n, rng);
    let mut slope = Vect::zeros(n);
    let pos = ((m as i64 + sig) / 2) as usize;
    for i in 0..m {
        slope[i] = if i < pos { 1.0 } else { -1.0 };
        slope[i] *= 0.5 + rng.random::<f64>();
    }
    let mut rest = Vect::zeros(n);
    for i in m..n {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        rest[i] = sign * (0.5 + 1.5 * rng.random::<f64>());
    }
    let f = {
        let q = q.clone();
        let slope = slope.clone();
        let rest = rest.clone();
        move |l: f64| {
            let diag = Vect::from_fn(n, |i, _| if i < m { l * slope[i] } else { rest[i] });
            &q * Mat::from_diagonal(&diag) * q.transpose()
        }
    };
    let d = move |_l: f64| {
        let diag = Vect::from_fn(n, |i, _| if i < m { slope[i] } else { 0.0 });
        &q * Mat::from_diagonal(&diag) * q.transpose()
    };
    OperatorPath::from_fn(-1.0, 1.0, n, f)
        .expect("conjugated diagonal family is symmetric")
        .with_derivative(d)
}
