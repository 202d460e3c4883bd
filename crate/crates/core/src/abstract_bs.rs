//! Finite-dimensional factored perturbations `H = H0 + B*A`.
//!
//! Every statement about the Birman–Schwinger operator
//! `K(z) = -A (H0 - z)^{-1} B*` can be checked exactly at matrix scale:
//! resolvent formulas, the eigenvector correspondence between `H` and
//! `K(λ0)`, Weinstein–Aronszajn multiplicity formulas and the Krein trace
//! formula.

use nalgebra::DMatrix;
use rand::Rng;

use crate::detcore::{
    det_regularized, frobenius, inverse_with_condition, log_det_regularized, riesz_projection,
    trace, winding_multiplicity, ContourSpec, SINGULAR_CONDITION,
};
use crate::{c64, CMatrix, Complex64, Error, Result};

/// Relative singular-value cutoff for numerical kernels and for detecting
/// that `1` is an eigenvalue of `K(z)`.
pub const KERNEL_TOLERANCE: f64 = 1e-10;

/// `H = H0 + B*A` with `H0` of size `n×n` and `A`, `B` of size `k×n`.
#[derive(Debug, Clone)]
pub struct FactoredPerturbation {
    pub h0: CMatrix,
    pub a: CMatrix,
    pub b: CMatrix,
}

impl FactoredPerturbation {
    pub fn new(h0: CMatrix, a: CMatrix, b: CMatrix) -> Result<Self> {
        if !h0.is_square() {
            return Err(Error::Dimension(format!(
                "H0 must be square, got {}x{}",
                h0.nrows(),
                h0.ncols()
            )));
        }
        let n = h0.nrows();
        if a.ncols() != n || b.ncols() != n || a.nrows() != b.nrows() {
            return Err(Error::Dimension(format!(
                "A is {}x{}, B is {}x{}; both must be k x {n}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(Self { h0, a, b })
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn rank_dim(&self) -> usize {
        self.a.nrows()
    }

    /// `V = B*A`.
    pub fn perturbation(&self) -> CMatrix {
        self.b.adjoint() * &self.a
    }

    pub fn h(&self) -> CMatrix {
        &self.h0 + self.perturbation()
    }
}

fn shifted_inverse(m: &CMatrix, z: Complex64) -> Option<CMatrix> {
    let n = m.nrows();
    let shifted = m - CMatrix::identity(n, n) * z;
    match inverse_with_condition(&shifted) {
        Some((inv, cond)) if cond < SINGULAR_CONDITION => Some(inv),
        _ => None,
    }
}

/// `R0(z) = (H0 - z)^{-1}`.
pub fn free_resolvent(fp: &FactoredPerturbation, z: Complex64) -> Result<CMatrix> {
    shifted_inverse(&fp.h0, z).ok_or(Error::ResolventSet(z))
}

/// `K(z) = -A R0(z) B*`.
pub fn bs_kernel(fp: &FactoredPerturbation, z: Complex64) -> Result<CMatrix> {
    let r0 = free_resolvent(fp, z)?;
    Ok(-(&fp.a * r0 * fp.b.adjoint()))
}

fn smallest_singular_value(m: &CMatrix) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `true` when `I - K(z)` is numerically singular, i.e. `z ∈ σ(H)`.
pub fn is_perturbed_eigenvalue(fp: &FactoredPerturbation, z: Complex64) -> Result<bool> {
    let k = bs_kernel(fp, z)?;
    let n = k.nrows();
    let scale = frobenius(&k).max(1.0);
    Ok(smallest_singular_value(&(CMatrix::identity(n, n) - k)) < KERNEL_TOLERANCE * scale)
}

/// `R(z) = R0 - R0 B* (I - K)^{-1} A R0`.
pub fn perturbed_resolvent(fp: &FactoredPerturbation, z: Complex64) -> Result<CMatrix> {
    let r0 = free_resolvent(fp, z)?;
    let k = -(&fp.a * &r0 * fp.b.adjoint());
    let m = k.nrows();
    let inner = CMatrix::identity(m, m) - k;
    let inv = match inverse_with_condition(&inner) {
        Some((inv, cond)) if cond < SINGULAR_CONDITION => inv,
        _ => return Err(Error::PerturbedSpectrum(z)),
    };
    Ok(&r0 - &r0 * fp.b.adjoint() * inv * &fp.a * &r0)
}

/// Orthonormal basis of the numerical kernel of `m`, as columns.
fn null_space(m: &CMatrix, scale: f64) -> CMatrix {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let cut = KERNEL_TOLERANCE * scale.max(1.0);
    // Thin SVD of a wide or square matrix: rows beyond the rank are missing,
    // so pad the singular values with zeros up to n.
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.resize(n, 0.0);
    let full_v = if v_t.nrows() < n {
        complete_basis(&v_t)
    } else {
        v_t.adjoint()
    };
    let cols: Vec<usize> = (0..n).filter(|&i| sv[i] < cut).collect();
    DMatrix::from_fn(n, cols.len(), |r, c| full_v[(r, cols[c])])
}

fn complete_basis(v_t: &CMatrix) -> CMatrix {
    // Columns of the returned matrix: the rows of v_t (conjugated) followed by
    // an orthonormal complement obtained from the full SVD of v_t.
    let n = v_t.ncols();
    let q = v_t.adjoint();
    let mut out = CMatrix::zeros(n, n);
    out.view_mut((0, 0), (n, q.ncols())).copy_from(&q);
    let projector = CMatrix::identity(n, n) - &q * q.adjoint();
    let svd = projector.svd(true, false);
    let u = svd.u.expect("requested U");
    for (c, i) in (q.ncols()..n).zip(0..) {
        out.set_column(c, &u.column(i));
    }
    out
}

/// Dimensions and residuals of the eigenvector correspondence between
/// `ker(H - λ0)` and `ker(I - K(λ0))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceReport {
    pub dim_ker_h: usize,
    pub dim_ker_k: usize,
    /// Worst of `‖K(λ0)g - g‖/‖g‖` and the mismatch between the two
    /// expressions for `g`, over a basis of eigenvectors `f` of `H`.
    pub forward_residual: f64,
    /// Worst `‖H f - λ0 f‖/‖f‖` over fixed points `g` mapped to `f = -R0(λ0)B*g`.
    pub backward_residual: f64,
}

pub fn bs_eigen_correspondence(
    fp: &FactoredPerturbation,
    lambda0: Complex64,
    z0: Complex64,
) -> Result<CorrespondenceReport> {
    let r0_l = free_resolvent(fp, lambda0)
        .map_err(|_| Error::Hypothesis(format!("λ0 = {lambda0} lies in the spectrum of H0")))?;
    if z0 == lambda0 {
        return Err(Error::Hypothesis("z0 must differ from λ0".into()));
    }
    let r0_z = free_resolvent(fp, z0)?;
    let k_z = -(&fp.a * &r0_z * fp.b.adjoint());
    let m = k_z.nrows();
    let inner_inv = match inverse_with_condition(&(CMatrix::identity(m, m) - &k_z)) {
        Some((inv, cond)) if cond < SINGULAR_CONDITION => inv,
        _ => {
            return Err(Error::Hypothesis(format!(
                "1 is an eigenvalue of K(z0) at z0 = {z0}"
            )))
        }
    };
    let k_l = -(&fp.a * &r0_l * fp.b.adjoint());
    let h = fp.h();
    let n = h.nrows();

    let ker_h = null_space(&(&h - CMatrix::identity(n, n) * lambda0), frobenius(&h));
    let ker_k = null_space(&(CMatrix::identity(m, m) - &k_l), frobenius(&k_l));

    let mut forward: f64 = 0.0;
    for f in ker_h.column_iter() {
        let f = f.into_owned();
        let g = &inner_inv * &fp.a * &r0_z * &f;
        let g_alt = &fp.a * &f / (lambda0 - z0);
        let gn = g.norm();
        let fixed = (&k_l * &g - &g).norm() / gn;
        let agree = (&g - &g_alt).norm() / gn;
        forward = forward.max(fixed).max(agree);
    }
    let mut backward: f64 = 0.0;
    for g in ker_k.column_iter() {
        let f = -(&r0_l * fp.b.adjoint() * g);
        let res = (&h * &f - &f * lambda0).norm() / f.norm();
        backward = backward.max(res);
    }
    Ok(CorrespondenceReport {
        dim_ker_h: ker_h.ncols(),
        dim_ker_k: ker_k.ncols(),
        forward_residual: forward,
        backward_residual: backward,
    })
}

/// Both sides of a Weinstein–Aronszajn identity `m(H) - m(H0) = m(det)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaCheck {
    pub lhs: i64,
    pub rhs: i64,
}

impl WaCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

fn multiplicity_inside(t: &CMatrix, contour: &ContourSpec) -> Result<i64> {
    Ok(riesz_projection(t, contour)?.multiplicity as i64)
}

/// Local formula at `λ0` with `Δ(z) = det(I - K(z))`.
pub fn local_wa_check(
    fp: &FactoredPerturbation,
    lambda0: Complex64,
    contour: &ContourSpec,
) -> Result<WaCheck> {
    if !contour.encloses(lambda0) {
        return Err(Error::ContourPlacement(format!(
            "contour does not enclose λ0 = {lambda0}"
        )));
    }
    wa_check(fp, contour, 1)
}

/// Global formula with the regularized determinant `det_p(I - K(z))`.
pub fn global_wa_check(
    fp: &FactoredPerturbation,
    contour: &ContourSpec,
    p: u32,
) -> Result<WaCheck> {
    wa_check(fp, contour, p)
}

fn wa_check(fp: &FactoredPerturbation, contour: &ContourSpec, p: u32) -> Result<WaCheck> {
    if p != 1 && p != 2 {
        return Err(Error::UnsupportedOrder(p));
    }
    let lhs = multiplicity_inside(&fp.h(), contour)? - multiplicity_inside(&fp.h0, contour)?;
    let delta = |z: Complex64| match bs_kernel(fp, z) {
        Ok(k) => det_regularized(&(-k), p).unwrap_or(c64(f64::NAN, f64::NAN)),
        Err(_) => c64(f64::NAN, f64::NAN),
    };
    let rhs = winding_multiplicity(delta, contour)?;
    Ok(WaCheck { lhs, rhs })
}

/// Both sides of the Krein trace formula and of the `det₂` derivative identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KreinTraceCheck {
    /// `tr(R(z) - R0(z))`.
    pub lhs: Complex64,
    /// `-∫ ξ(λ) (λ - z)^{-2} dλ` for the eigenvalue-counting shift.
    pub rhs: Complex64,
    /// Centered difference of `log det₂(I - K(z))`.
    pub log_det_derivative_fd: Complex64,
    /// `-tr(R - R0 + R0 V R0)`.
    pub log_det_derivative: Complex64,
}

fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn is_hermitian(m: &CMatrix) -> bool {
    frobenius(&(m - m.adjoint())) <= 1e-12 * frobenius(m).max(1.0)
}

/// Spectral shift `ξ(λ) = #{eig(H0) ≤ λ} - #{eig(H) ≤ λ}` of a Hermitian pair,
/// returned as its jump points and the constant value on each gap to the
/// right of a jump point.
pub fn spectral_shift_steps(h0_eigs: &[f64], h_eigs: &[f64]) -> Vec<(f64, i64)> {
    let mut points: Vec<f64> = h0_eigs.iter().chain(h_eigs).copied().collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
        .into_iter()
        .map(|p| {
            let n0 = h0_eigs.iter().filter(|&&e| e <= p).count() as i64;
            let n = h_eigs.iter().filter(|&&e| e <= p).count() as i64;
            (p, n0 - n)
        })
        .collect()
}

pub fn krein_trace_check(fp: &FactoredPerturbation, z: Complex64) -> Result<KreinTraceCheck> {
    let v = fp.perturbation();
    if !is_hermitian(&fp.h0) || !is_hermitian(&v) {
        return Err(Error::Hypothesis("H0 and B*A must be Hermitian".into()));
    }
    if z.im == 0.0 {
        return Err(Error::Hypothesis(format!(
            "z = {z} must lie off the real axis"
        )));
    }
    let r0 = free_resolvent(fp, z)?;
    let r = perturbed_resolvent(fp, z)?;
    let lhs = trace(&(&r - &r0));

    let steps = spectral_shift_steps(
        &hermitian_eigenvalues(&fp.h0),
        &hermitian_eigenvalues(&fp.h()),
    );
    // ξ is constant between consecutive jump points and vanishes past the last one.
    let mut rhs = c64(0.0, 0.0);
    for (i, &(p, xi)) in steps.iter().enumerate() {
        if xi == 0 {
            continue;
        }
        let segment = match steps.get(i + 1) {
            Some(&(q, _)) => (p - z).inv() - (q - z).inv(),
            None => (p - z).inv(),
        };
        rhs -= segment * xi as f64;
    }

    let log_det2 =
        |zeta: Complex64| -> Result<Complex64> { log_det_regularized(&(-bs_kernel(fp, zeta)?), 2) };
    // five-point stencil; the step stays well inside the distance to the real axis
    let h = 1e-3 * z.norm().max(1.0).min(z.im.abs());
    let center = log_det2(z)?;
    let tau = 2.0 * std::f64::consts::PI;
    // The logs come from independent factorizations; align the branches.
    let at = |t: f64| -> Result<Complex64> {
        let mut d = log_det2(z + h * t)? - center;
        d.im -= (d.im / tau).round() * tau;
        Ok(d)
    };
    let fd = (at(-2.0)? - at(-1.0)? * 8.0 + at(1.0)? * 8.0 - at(2.0)?) / (12.0 * h);
    let exact = -trace(&(&r - &r0 + &r0 * &v * &r0));
    Ok(KreinTraceCheck {
        lhs,
        rhs,
        log_det_derivative_fd: fd,
        log_det_derivative: exact,
    })
}

fn random_complex_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        c64(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
    })
}

fn random_hermitian<R: Rng>(rng: &mut R, n: usize, scale: f64) -> CMatrix {
    let m = random_complex_matrix(rng, n, n, scale);
    (&m + m.adjoint()) * c64(0.5, 0.0)
}

/// Seeded random instance. With `hermitian` set, `H0` is Hermitian and
/// `B = S A` with `S` Hermitian, so that `(Af, Bg) = (Bf, Ag)` and `H` is
/// Hermitian too.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
    hermitian: bool,
) -> FactoredPerturbation {
    let a = random_complex_matrix(rng, k, n, 1.0);
    if hermitian {
        let h0 = random_hermitian(rng, n, 2.0);
        let s = random_hermitian(rng, k, 1.0);
        let b = &s * &a;
        FactoredPerturbation { h0, a, b }
    } else {
        let h0 = random_complex_matrix(rng, n, n, 2.0);
        let b = random_complex_matrix(rng, k, n, 1.0);
        FactoredPerturbation { h0, a, b }
    }
}

/// Normal `H0 = U diag(d) U*` with random unitary `U` and well separated
/// eigenvalues `d`, plus a random rank-`k` perturbation.
pub fn random_normal_instance<R: Rng>(rng: &mut R, n: usize, k: usize) -> FactoredPerturbation {
    let q = random_complex_matrix(rng, n, n, 1.0).qr().q();
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| {
        c64(
            2.0 * i as f64 + rng.gen_range(-0.3..0.3),
            rng.gen_range(-0.3..0.3),
        )
    }));
    let h0 = &q * d * q.adjoint();
    let a = random_complex_matrix(rng, k, n, 0.6);
    let b = random_complex_matrix(rng, k, n, 0.6);
    FactoredPerturbation { h0, a, b }
}

/// `H0` containing a 2×2 Jordan block at `jordan_at` (algebraic multiplicity
/// two, geometric one), other eigenvalues at `2, 4, ...`, and a small random
/// rank-`k` perturbation.
pub fn jordan_instance<R: Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
    jordan_at: f64,
    coupling: f64,
) -> FactoredPerturbation {
    assert!(n >= 3);
    let mut h0 = CMatrix::zeros(n, n);
    h0[(0, 0)] = c64(jordan_at, 0.0);
    h0[(1, 1)] = c64(jordan_at, 0.0);
    h0[(0, 1)] = c64(1.0, 0.0);
    for i in 2..n {
        h0[(i, i)] = c64(jordan_at + 2.0 * (i - 1) as f64, 0.0);
    }
    let a = random_complex_matrix(rng, k, n, coupling);
    let b = random_complex_matrix(rng, k, n, coupling);
    FactoredPerturbation { h0, a, b }
}

/// Radius for a circle around `center` that stays at least a fraction
/// `margin` of the gap away from every point of `spectrum` outside the
/// cluster of points within `cluster` of the center.
pub fn isolating_radius(
    center: Complex64,
    spectrum: &[Complex64],
    cluster: f64,
    margin: f64,
) -> Option<f64> {
    let inner = spectrum
        .iter()
        .map(|e| (e - center).norm())
        .filter(|&d| d <= cluster)
        .fold(0.0, f64::max);
    let outer = spectrum
        .iter()
        .map(|e| (e - center).norm())
        .filter(|&d| d > cluster)
        .fold(f64::INFINITY, f64::min);
    if !outer.is_finite() {
        return Some(inner + cluster.max(1.0));
    }
    if outer <= inner {
        return None;
    }
    let r = inner + margin * (outer - inner);
    (r > 0.0).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detcore::eigenvalues;
    use crate::DEFAULT_SEED;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rank_one(c: f64) -> FactoredPerturbation {
        let h0 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c64(1.0, 0.0),
            c64(2.0, 0.0),
        ]));
        let a = CMatrix::from_row_slice(1, 2, &[c64(c, 0.0), c64(0.0, 0.0)]);
        let b = CMatrix::from_row_slice(1, 2, &[c64(1.0, 0.0), c64(0.0, 0.0)]);
        FactoredPerturbation::new(h0, a, b).unwrap()
    }

    #[test]
    fn kernel_of_zero_perturbation_vanishes() {
        let mut fp = rank_one(1.0);
        fp.a = CMatrix::zeros(1, 2);
        assert_eq!(frobenius(&bs_kernel(&fp, c64(0.5, 0.2)).unwrap()), 0.0);
    }

    #[test]
    fn kernel_small_example() {
        let k = bs_kernel(&rank_one(1.0), c64(0.0, 0.0)).unwrap();
        assert!((k[(0, 0)] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn kernel_in_free_spectrum_is_rejected() {
        assert!(matches!(
            bs_kernel(&rank_one(1.0), c64(2.0, 0.0)),
            Err(Error::ResolventSet(_))
        ));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let h0 = CMatrix::identity(3, 3);
        assert!(FactoredPerturbation::new(h0, CMatrix::zeros(2, 3), CMatrix::zeros(1, 3)).is_err());
    }

    #[test]
    fn kernel_difference_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
        let fp = random_instance(&mut rng, 4, 4, false);
        let (z1, z2) = (c64(0.3, 1.1), c64(-0.7, -0.4));
        let lhs = bs_kernel(&fp, z1).unwrap() - bs_kernel(&fp, z2).unwrap();
        let rhs = (&fp.a
            * free_resolvent(&fp, z1).unwrap()
            * free_resolvent(&fp, z2).unwrap()
            * fp.b.adjoint())
            * (z2 - z1);
        assert!(frobenius(&(lhs - &rhs)) < 1e-12 * frobenius(&rhs).max(1.0));
    }

    #[test]
    fn perturbed_resolvent_matches_direct_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 1);
        for _ in 0..5 {
            let fp = random_instance(&mut rng, 5, 3, false);
            let z = c64(0.4, 2.5);
            let r = perturbed_resolvent(&fp, z).unwrap();
            let direct = (fp.h() - CMatrix::identity(5, 5) * z)
                .try_inverse()
                .unwrap();
            assert!(frobenius(&(&r - &direct)) < 1e-11 * frobenius(&direct));
            // (I - K)^{-1} = I - A R B*
            let k = bs_kernel(&fp, z).unwrap();
            let lhs = (CMatrix::identity(3, 3) - k).try_inverse().unwrap();
            let rhs = CMatrix::identity(3, 3) - &fp.a * &r * fp.b.adjoint();
            assert!(frobenius(&(lhs - &rhs)) < 1e-11 * frobenius(&rhs));
        }
    }

    #[test]
    fn rank_one_resolvent_entry() {
        let c = 0.7;
        let z = c64(0.2, 0.5);
        let r = perturbed_resolvent(&rank_one(c), z).unwrap();
        assert!((r[(0, 0)] - (c64(1.0 + c, 0.0) - z).inv()).norm() < 1e-14);
        let fp0 =
            FactoredPerturbation::new(rank_one(c).h0, CMatrix::zeros(1, 2), CMatrix::zeros(1, 2))
                .unwrap();
        let r0 = perturbed_resolvent(&fp0, z).unwrap();
        assert!(frobenius(&(r0 - free_resolvent(&fp0, z).unwrap())) == 0.0);
    }

    #[test]
    fn resolvent_identities_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 2);
        let fp = random_instance(&mut rng, 6, 3, false);
        let v = fp.perturbation();
        let (z1, z2) = (c64(0.5, 3.0), c64(-1.0, -2.5));
        let (r1, r2) = (
            perturbed_resolvent(&fp, z1).unwrap(),
            perturbed_resolvent(&fp, z2).unwrap(),
        );
        let (f1, f2) = (
            free_resolvent(&fp, z1).unwrap(),
            free_resolvent(&fp, z2).unwrap(),
        );
        let tol = 1e-11 * frobenius(&r1).max(1.0);
        // First resolvent identity for H and for H0.
        assert!(frobenius(&(&r1 - &r2 - (&r1 * &r2) * (z1 - z2))) < tol);
        assert!(frobenius(&(&f1 - &f2 - (&f1 * &f2) * (z1 - z2))) < tol);
        // Second resolvent identity, both orders.
        assert!(frobenius(&(&r1 - &f1 + &f1 * &v * &r1)) < tol);
        assert!(frobenius(&(&r1 - &f1 + &r1 * &v * &f1)) < tol);
    }

    #[test]
    fn correspondence_rank_one() {
        let c = 0.8;
        let fp = rank_one(c);
        let rep = bs_eigen_correspondence(&fp, c64(1.0 + c, 0.0), c64(0.0, 1.0)).unwrap();
        assert_eq!((rep.dim_ker_h, rep.dim_ker_k), (1, 1));
        assert!(rep.forward_residual < 1e-10 && rep.backward_residual < 1e-10);

        let mut zero = fp.clone();
        zero.a = CMatrix::zeros(1, 2);
        let rep = bs_eigen_correspondence(&zero, c64(0.5, 0.0), c64(0.0, 1.0)).unwrap();
        assert_eq!((rep.dim_ker_h, rep.dim_ker_k), (0, 0));
    }

    #[test]
    fn correspondence_rejects_free_eigenvalue() {
        let err =
            bs_eigen_correspondence(&rank_one(0.5), c64(2.0, 0.0), c64(0.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(_)));
    }

    #[test]
    fn correspondence_random_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 3);
        let fp = random_normal_instance(&mut rng, 6, 2);
        for lambda in eigenvalues(&fp.h()).unwrap() {
            let rep = bs_eigen_correspondence(&fp, lambda, c64(0.5, 5.0)).unwrap();
            assert_eq!(rep.dim_ker_h, rep.dim_ker_k);
            assert_eq!(rep.dim_ker_h, 1);
            assert!(
                rep.forward_residual < 1e-9 && rep.backward_residual < 1e-9,
                "{rep:?}"
            );
        }
    }

    #[test]
    fn singularity_of_kernel_detects_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 4);
        let fp = random_normal_instance(&mut rng, 5, 2);
        for lambda in eigenvalues(&fp.h()).unwrap() {
            assert!(is_perturbed_eigenvalue(&fp, lambda).unwrap());
            assert!(!is_perturbed_eigenvalue(&fp, lambda + c64(1e-3, 0.0)).unwrap());
        }
    }

    #[test]
    fn wa_rank_one_examples() {
        let c = 0.8;
        let fp = rank_one(c);
        let moved = local_wa_check(
            &fp,
            c64(1.0, 0.0),
            &ContourSpec::circle(c64(1.0, 0.0), 0.3).unwrap(),
        )
        .unwrap();
        assert_eq!((moved.lhs, moved.rhs), (-1, -1));
        let arrived = local_wa_check(
            &fp,
            c64(1.0 + c, 0.0),
            &ContourSpec::circle(c64(1.0 + c, 0.0), 0.1).unwrap(),
        )
        .unwrap();
        assert_eq!((arrived.lhs, arrived.rhs), (1, 1));
        for p in [1, 2] {
            let g =
                global_wa_check(&fp, &ContourSpec::circle(c64(1.0, 0.0), 0.3).unwrap(), p).unwrap();
            assert_eq!(g, moved);
        }
        let mut zero = fp.clone();
        zero.a = CMatrix::zeros(1, 2);
        let z = local_wa_check(
            &zero,
            c64(1.0, 0.0),
            &ContourSpec::circle(c64(1.0, 0.0), 0.3).unwrap(),
        )
        .unwrap();
        assert_eq!((z.lhs, z.rhs), (0, 0));
    }

    #[test]
    fn wa_jordan_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 5);
        let fp = jordan_instance(&mut rng, 4, 2, 1.0, 0.3);
        // A circle around the Jordan eigenvalue large enough to also hold
        // the perturbed pair.
        let contour = ContourSpec::circle(c64(1.0, 0.0), 0.9).unwrap();
        for p in [1, 2] {
            let w = global_wa_check(&fp, &contour, p).unwrap();
            assert!(w.holds(), "{w:?}");
        }
    }

    #[test]
    fn wa_invariant_under_radius_change() {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 6);
        let fp = random_normal_instance(&mut rng, 6, 3);
        let center = eigenvalues(&fp.h()).unwrap()[0];
        let mut all = eigenvalues(&fp.h()).unwrap();
        all.extend(eigenvalues(&fp.h0).unwrap());
        let r = isolating_radius(center, &all, 1e-9, 0.5).unwrap();
        let a = global_wa_check(&fp, &ContourSpec::circle(center, r).unwrap(), 2).unwrap();
        let b = global_wa_check(&fp, &ContourSpec::circle(center, 0.8 * r).unwrap(), 2).unwrap();
        assert_eq!(a, b);
        assert!(a.holds());
    }

    #[test]
    fn hermitian_instances_are_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 7);
        let fp = random_instance(&mut rng, 6, 3, true);
        let h = fp.h();
        assert!(frobenius(&(&h - h.adjoint())) < 1e-12 * frobenius(&h));
    }

    #[test]
    fn krein_trace_two_by_two() {
        let delta: f64 = 0.4;
        let h0 = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c64(0.0, 0.0),
            c64(1.0, 0.0),
        ]));
        let a = CMatrix::from_row_slice(1, 2, &[c64(delta.sqrt(), 0.0), c64(0.0, 0.0)]);
        let fp = FactoredPerturbation::new(h0, a.clone(), a).unwrap();
        let z = c64(0.3, 0.7);
        let chk = krein_trace_check(&fp, z).unwrap();
        let expected = (c64(delta, 0.0) - z).inv() - (-z).inv();
        assert!((chk.lhs - expected).norm() < 1e-13);
        assert!((chk.rhs - expected).norm() < 1e-13);
        assert!((chk.log_det_derivative - chk.log_det_derivative_fd).norm() < 1e-7);
    }

    #[test]
    fn krein_trace_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 8);
        let fp = random_instance(&mut rng, 8, 3, true);
        let chk = krein_trace_check(&fp, c64(0.2, 0.9)).unwrap();
        assert!((chk.lhs - chk.rhs).norm() < 1e-10 * chk.lhs.norm().max(1.0));
        assert!(
            (chk.log_det_derivative - chk.log_det_derivative_fd).norm()
                < 1e-7 * chk.log_det_derivative.norm().max(1.0)
        );
    }

    #[test]
    fn krein_trace_rejects_non_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED + 9);
        let fp = random_instance(&mut rng, 4, 2, false);
        assert!(matches!(
            krein_trace_check(&fp, c64(0.0, 1.0)),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn spectral_shift_steps_count() {
        let steps = spectral_shift_steps(&[0.0, 1.0], &[0.5, 1.0]);
        assert_eq!(steps, vec![(0.0, 1), (0.5, 0), (1.0, 0)]);
    }
}
