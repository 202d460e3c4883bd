//! Dirichlet and Neumann Birman–Schwinger determinants on the unit disk for
//! radial potentials, and the boundary-operator form of their ratio.
//!
//! In angular mode `m` the free Dirichlet/Neumann resolvents have the radial
//! kernels (on `L²((0, 1), r dr)`)
//!
//! `g^D_m = (π/2) J_m(kr_<) [J_m(kr_>) Y_m(k) - Y_m(kr_>) J_m(k)] / J_m(k)`,
//! `g^N_m = (π/2) J_m(kr_<) [J_m(kr_>) Y_m'(k) - Y_m(kr_>) J_m'(k)] / J_m'(k)`.
//!
//! The boundary maps reduce to the scalar functions
//! `∂_r g^D_m(1, r) = -J_m(kr)/J_m(k)` and `g^N_m(r, 1) = J_m(kr)/(k J_m'(k))`,
//! and `g^D_m - g^N_m` is their product. Modes `±m` contribute identically.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::detcore::{det_regularized, inverse_with_condition, SINGULAR_CONDITION};
use crate::potential::RadialPotential;
use crate::quadrature::{Discretization, Extrapolate, QuadratureRule};
use crate::specfun::{cylinder_bessel, CylinderBessel, SpectralParam};
use crate::{c64, CMatrix, Complex64, Error, Result};

/// Bound on the last mode's `|log|` contribution.
pub const MODE_TRUNCATION_TOL: f64 = 1e-10;

/// Distance (in `k`) to a Bessel zero below which `z` counts as a free eigenvalue.
pub const ZERO_GUARD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

pub fn degeneracy(m: usize) -> usize {
    if m == 0 {
        1
    } else {
        2
    }
}

/// Bessel data at the boundary `r = 1`.
#[derive(Debug, Clone, Copy)]
struct EdgeValues {
    k: Complex64,
    j: Complex64,
    y: Complex64,
    jp: Complex64,
    yp: Complex64,
}

impl EdgeValues {
    fn new(m: usize, z: SpectralParam) -> Result<Self> {
        let k = z.sqrt();
        if k.norm() == 0.0 {
            return Err(Error::SpectralPoint(z.z()));
        }
        let b = cylinder_bessel(k, m)?;
        let e = Self {
            k,
            j: b.j(m),
            y: b.y(m),
            jp: b.jp(m),
            yp: b.yp(m),
        };
        // J'' from Bessel's equation
        let mf = m as f64;
        let jpp = -e.jp / k - (1.0 - mf * mf / (k * k)) * e.j;
        if (e.j / e.jp).norm() < ZERO_GUARD {
            return Err(Error::DirichletEigenvalue(z.z()));
        }
        if mf > 0.0 || k.norm() > ZERO_GUARD {
            if (e.jp / jpp).norm() < ZERO_GUARD {
                return Err(Error::NeumannEigenvalue(z.z()));
            }
        }
        Ok(e)
    }

    fn bracket(&self, b: Boundary, jr: Complex64, yr: Complex64) -> Complex64 {
        match b {
            Boundary::Dirichlet => (jr * self.y - yr * self.j) / self.j,
            Boundary::Neumann => (jr * self.yp - yr * self.jp) / self.jp,
        }
    }
}

fn check_lower(z: &SpectralParam) -> Result<()> {
    if z.is_lower_side() {
        return Err(Error::InvalidParameter(
            "disk kernels are evaluated with Im √z ≥ 0".into(),
        ));
    }
    Ok(())
}

/// Radial Green kernel of the free mode-`m` operator with the given boundary
/// condition at `r = 1`, with respect to `r dr`.
pub fn mode_green(
    m: usize,
    z: SpectralParam,
    boundary: Boundary,
    r: f64,
    rp: f64,
) -> Result<Complex64> {
    check_lower(&z)?;
    if !(r > 0.0 && r <= 1.0 && rp > 0.0 && rp <= 1.0) {
        return Err(Error::Domain(format!(
            "need 0 < r, r' <= 1, got ({r}, {rp})"
        )));
    }
    let e = EdgeValues::new(m, z)?;
    let (lo, hi) = if r <= rp { (r, rp) } else { (rp, r) };
    let inner = cylinder_bessel(e.k * lo, m)?;
    let outer = cylinder_bessel(e.k * hi, m)?;
    Ok(c64(0.0, 0.0) + inner.j(m) * e.bracket(boundary, outer.j(m), outer.y(m)) * (PI / 2.0))
}

/// `∂_r g^D_m(z; 1, r')` evaluated from the Bessel values at the boundary
/// (without using the Wronskian).
pub fn dirichlet_normal_derivative(m: usize, z: SpectralParam, rp: f64) -> Result<Complex64> {
    check_lower(&z)?;
    let e = EdgeValues::new(m, z)?;
    let inner = cylinder_bessel(e.k * rp, m)?;
    Ok(inner.j(m) * e.k * (e.jp * e.y - e.yp * e.j) / e.j * (PI / 2.0))
}

/// Both sides of `g^D_m - g^N_m = [γ_D R_N(z̄)]*(r) · [γ_N R_D(z)](r')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KreinDiskCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `max(|g^D|, |g^N|)`; the difference can be much smaller than either term.
    pub scale: f64,
}

impl KreinDiskCheck {
    pub fn deviation(&self) -> f64 {
        (self.lhs - self.rhs).norm() / self.scale.max(1e-300)
    }
}

pub fn krein_disk_check(m: usize, z: SpectralParam, r: f64, rp: f64) -> Result<KreinDiskCheck> {
    let gd = mode_green(m, z, Boundary::Dirichlet, r, rp)?;
    let gn = mode_green(m, z, Boundary::Neumann, r, rp)?;
    let rhs = mode_green(m, z, Boundary::Neumann, r, 1.0)? * dirichlet_normal_derivative(m, z, rp)?;
    Ok(KreinDiskCheck {
        lhs: gd - gn,
        rhs,
        scale: gd.norm().max(gn.norm()),
    })
}

/// Discretized mode-`m` Dirichlet/Neumann kernels and boundary functionals,
/// symmetrized with `√(w_i r_i)`.
#[derive(Debug, Clone)]
pub struct DiskModeOperator {
    pub m: usize,
    pub z: SpectralParam,
    pub rule: QuadratureRule,
    pub gd_matrix: CMatrix,
    pub gn_matrix: CMatrix,
    /// `√(w_i r_i) ∂_r g^D_m(1, r_i)`.
    pub boundary_row_d: Vec<Complex64>,
    /// `√(w_i r_i) g^N_m(r_i, 1)`.
    pub boundary_row_n: Vec<Complex64>,
}

impl DiskModeOperator {
    /// `rule` must lie in `[0, 1]`; a node at `r = 0` has zero weight and is dropped.
    pub fn new(m: usize, z: SpectralParam, rule: &QuadratureRule) -> Result<Self> {
        check_lower(&z)?;
        let (a, b) = rule.interval();
        if a < 0.0 || b > 1.0 {
            return Err(Error::Interval { a, b });
        }
        let rule = rule.without_left_endpoint();
        let e = EdgeValues::new(m, z)?;
        let nodes = rule.nodes();
        let s: Vec<f64> = nodes
            .iter()
            .zip(rule.weights())
            .map(|(r, w)| (w * r).sqrt())
            .collect();
        let bessel: Vec<CylinderBessel> = nodes
            .iter()
            .map(|&r| cylinder_bessel(e.k * r, m))
            .collect::<Result<_>>()?;
        let jr: Vec<Complex64> = bessel.iter().map(|b| b.j(m)).collect();
        let yr: Vec<Complex64> = bessel.iter().map(|b| b.y(m)).collect();
        let n = nodes.len();
        let mut gd = CMatrix::zeros(n, n);
        let mut gn = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let sij = s[i] * s[j] * PI / 2.0;
                let d = jr[i] * e.bracket(Boundary::Dirichlet, jr[j], yr[j]) * sij;
                let nn = jr[i] * e.bracket(Boundary::Neumann, jr[j], yr[j]) * sij;
                for (mat, val) in [(&mut gd, d), (&mut gn, nn)] {
                    if !(val.re.is_finite() && val.im.is_finite()) {
                        return Err(Error::KernelSingularity {
                            i,
                            j,
                            x: nodes[i],
                            xp: nodes[j],
                        });
                    }
                    mat[(i, j)] = val;
                    mat[(j, i)] = val;
                }
            }
        }
        let boundary_row_d = jr.iter().zip(&s).map(|(j, s)| -j / e.j * *s).collect();
        let boundary_row_n = jr
            .iter()
            .zip(&s)
            .map(|(j, s)| j / (e.k * e.jp) * *s)
            .collect();
        Ok(Self {
            m,
            z,
            rule,
            gd_matrix: gd,
            gn_matrix: gn,
            boundary_row_d,
            boundary_row_n,
        })
    }

    fn potential_factors(&self, v: &RadialPotential) -> (Vec<f64>, Vec<f64>) {
        let p = &v.profile;
        (
            self.rule.nodes().iter().map(|&r| p.u(r)).collect(),
            self.rule.nodes().iter().map(|&r| p.v(r)).collect(),
        )
    }

    /// `u g v` for the chosen boundary condition.
    pub fn bs_matrix(&self, v: &RadialPotential, boundary: Boundary) -> CMatrix {
        let (u, w) = self.potential_factors(v);
        let g = if boundary == Boundary::Dirichlet {
            &self.gd_matrix
        } else {
            &self.gn_matrix
        };
        CMatrix::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)] * (u[i] * w[j]))
    }

    /// `(det₂(I + u g^N v), det₂(I + u g^D v))`.
    pub fn determinants(&self, v: &RadialPotential) -> Result<(Complex64, Complex64)> {
        Ok((
            det_regularized(&self.bs_matrix(v, Boundary::Neumann), 2)?,
            det_regularized(&self.bs_matrix(v, Boundary::Dirichlet), 2)?,
        ))
    }

    /// Mode values `(β, τ)` of the boundary operator
    /// `γ_N (H^D - z)^{-1} V [γ_D (H0^N - z̄)^{-1}]*` and of the trace term
    /// `γ_N (H0^D - z)^{-1} V (H^D - z)^{-1} V [γ_D (H0^N - z̄)^{-1}]*`,
    /// with the perturbed resolvent `R0 - R0 v (I + K)^{-1} u R0`.
    pub fn boundary_terms(&self, v: &RadialPotential) -> Result<(Complex64, Complex64)> {
        let (u, w) = self.potential_factors(v);
        let k = self.bs_matrix(v, Boundary::Dirichlet);
        let n = k.nrows();
        let a: Vec<Complex64> = self
            .boundary_row_d
            .iter()
            .zip(&w)
            .map(|(d, w)| d * *w)
            .collect();
        let b = crate::CVector::from_iterator(
            n,
            self.boundary_row_n.iter().zip(&u).map(|(g, u)| g * *u),
        );
        let mut ik = k.clone();
        for i in 0..n {
            ik[(i, i)] += 1.0;
        }
        let inv = match inverse_with_condition(&ik) {
            Some((inv, cond)) if cond < SINGULAR_CONDITION => inv,
            _ => return Err(Error::PerturbedSpectrum(self.z.z())),
        };
        let x = &inv * &b;
        let kx = &k * &x;
        let beta = a.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
        let tau = a.iter().zip(kx.iter()).map(|(p, q)| p * q).sum();
        Ok((beta, tau))
    }

    /// `(1 - β) e^{β} e^{τ}`.
    pub fn rhs(&self, v: &RadialPotential) -> Result<Complex64> {
        let (beta, tau) = self.boundary_terms(v)?;
        Ok((1.0 - beta) * (beta + tau).exp())
    }
}

fn check_support(v: &RadialPotential) -> Result<()> {
    if v.dim != 2 {
        return Err(Error::InvalidParameter(
            "disk potentials are two-dimensional".into(),
        ));
    }
    if v.cutoff() > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "potential support {} exceeds the unit disk",
            v.cutoff()
        )));
    }
    Ok(())
}

fn mode_values<T, F>(
    v: &RadialPotential,
    z: SpectralParam,
    m_max: usize,
    disc: &Discretization,
    f: F,
) -> Result<Vec<T>>
where
    F: Fn(&DiskModeOperator) -> Result<T> + Sync,
    T: Extrapolate + Send,
{
    check_support(v)?;
    disc.evaluate(0.0, v.cutoff(), |rule| {
        (0..=m_max)
            .into_par_iter()
            .map(|m| f(&DiskModeOperator::new(m, z, rule)?))
            .collect()
    })
}

fn product(values: &[Complex64]) -> Result<Complex64> {
    let m_max = values.len() - 1;
    let last = values[m_max].ln().norm() * degeneracy(m_max) as f64;
    if last > MODE_TRUNCATION_TOL {
        return Err(Error::ChannelTruncation { l_max: m_max, last });
    }
    Ok(values
        .iter()
        .enumerate()
        .map(|(m, x)| x.powu(degeneracy(m) as u32))
        .product())
}

/// Per-mode ratios `det₂(I + u g^N_m v)/det₂(I + u g^D_m v)`. Numerator and
/// denominator are extrapolated separately, so the ratio keeps a single pole
/// at each perturbed Dirichlet eigenvalue.
pub fn lhs_modes(
    v: &RadialPotential,
    z: SpectralParam,
    m_max: usize,
    disc: &Discretization,
) -> Result<Vec<Complex64>> {
    let dets = mode_values(v, z, m_max, disc, |op| op.determinants(v))?;
    dets.into_iter()
        .map(|(dn, dd)| {
            if dd.norm() == 0.0 {
                Err(Error::PerturbedSpectrum(z.z()))
            } else {
                Ok(dn / dd)
            }
        })
        .collect()
}

/// Per-mode boundary factors `(1 - β_m) e^{β_m + τ_m}`.
pub fn rhs_modes(
    v: &RadialPotential,
    z: SpectralParam,
    m_max: usize,
    disc: &Discretization,
) -> Result<Vec<Complex64>> {
    mode_values(v, z, m_max, disc, |op| op.rhs(v))
}

/// `det₂(I + u R0^N v)/det₂(I + u R0^D v)` on the disk as a product over modes.
pub fn disk_determinant_ratio(
    v: &RadialPotential,
    z: SpectralParam,
    m_max: usize,
    disc: &Discretization,
) -> Result<Complex64> {
    product(&lhs_modes(v, z, m_max, disc)?)
}

/// Boundary side: `det₂(I - β) exp(tr τ)` as a product over modes.
pub fn disk_boundary_ratio(
    v: &RadialPotential,
    z: SpectralParam,
    m_max: usize,
    disc: &Discretization,
) -> Result<Complex64> {
    product(&rhs_modes(v, z, m_max, disc)?)
}

/// Oracle data from the radial ODE of mode `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeOde {
    /// Regular solution `φ ~ r^m` and its derivative at `r = 1`.
    pub phi: Complex64,
    pub phi_prime: Complex64,
    /// `β_m = -∫ φ V J_m(kr) r dr / (φ(1) k J_m'(k))`.
    pub beta: Complex64,
    /// `τ_m = -∫ J_m(kr)² V r dr / (k J_m(k) J_m'(k)) - β_m`.
    pub tau: Complex64,
}

fn ode_pass(
    v: &RadialPotential,
    m: usize,
    z: Complex64,
    k: Complex64,
    steps: usize,
) -> Result<[Complex64; 4]> {
    let a = v.cutoff();
    let mf = m as f64;
    let jm = |r: f64| -> Result<Complex64> { Ok(cylinder_bessel(k * r, m)?.j(m)) };
    // state: φ, φ', ∫ φ V J r, ∫ J² V r
    let rhs = |r: f64, y: &[Complex64; 4]| -> Result<[Complex64; 4]> {
        let pot = v.value(r.min(a));
        let j = jm(r)?;
        Ok([
            y[1],
            -y[1] / r + (mf * mf / (r * r) + pot - z) * y[0],
            y[0] * j * (pot * r),
            j * j * (pot * r),
        ])
    };
    let h = a / steps as f64;
    let r0 = h;
    let v0 = v.value(0.0);
    let c = (v0 - z) / (4.0 * (mf + 1.0));
    let j0 = (k / 2.0).powu(m as u32) / (1..=m).map(|i| i as f64).product::<f64>();
    let tail = r0.powi(2 * m as i32 + 2) / (2.0 * mf + 2.0) * v0;
    let mut y = [
        (1.0 + c * r0 * r0) * r0.powi(m as i32),
        if m == 0 {
            c * 2.0 * r0
        } else {
            mf * r0.powi(m as i32 - 1) + (mf + 2.0) * c * r0.powi(m as i32 + 1)
        },
        j0 * tail,
        j0 * j0 * tail,
    ];
    let step = |r: f64, h: f64, y: &[Complex64; 4]| -> Result<[Complex64; 4]> {
        let add = |y: &[Complex64; 4], d: &[Complex64; 4], s: f64| {
            std::array::from_fn(|i| y[i] + d[i] * s)
        };
        let k1 = rhs(r, y)?;
        let k2 = rhs(r + 0.5 * h, &add(y, &k1, 0.5 * h))?;
        let k3 = rhs(r + 0.5 * h, &add(y, &k2, 0.5 * h))?;
        let k4 = rhs(r + h, &add(y, &k3, h))?;
        Ok(std::array::from_fn(|i| {
            y[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0)
        }))
    };
    for s in 1..steps {
        y = step(h * s as f64, h, &y)?;
    }
    // free continuation on [a, 1]
    if a < 1.0 {
        let rest = ((1.0 - a) / h).ceil().max(1.0) as usize;
        let h2 = (1.0 - a) / rest as f64;
        let mut yy = y;
        for s in 0..rest {
            let r = a + h2 * s as f64;
            let p = [yy[0], yy[1]];
            let f = |r: f64, p: &[Complex64; 2]| [p[1], -p[1] / r + (mf * mf / (r * r) - z) * p[0]];
            let add =
                |p: &[Complex64; 2], d: &[Complex64; 2], s: f64| [p[0] + d[0] * s, p[1] + d[1] * s];
            let k1 = f(r, &p);
            let k2 = f(r + 0.5 * h2, &add(&p, &k1, 0.5 * h2));
            let k3 = f(r + 0.5 * h2, &add(&p, &k2, 0.5 * h2));
            let k4 = f(r + h2, &add(&p, &k3, h2));
            yy[0] = p[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (h2 / 6.0);
            yy[1] = p[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (h2 / 6.0);
        }
        y[0] = yy[0];
        y[1] = yy[1];
    }
    Ok(y)
}

/// Radial ODE oracle for mode `m`: RK4 from `r = h` with the series start,
/// `steps` and `2·steps` combined by one Richardson step.
pub fn mode_ode(v: &RadialPotential, m: usize, z: SpectralParam, steps: usize) -> Result<ModeOde> {
    check_support(v)?;
    check_lower(&z)?;
    let e = EdgeValues::new(m, z)?;
    let coarse = ode_pass(v, m, z.z(), e.k, steps)?;
    let fine = ode_pass(v, m, z.z(), e.k, 2 * steps)?;
    let y: [Complex64; 4] = std::array::from_fn(|i| (fine[i] * 16.0 - coarse[i]) / 15.0);
    let beta = -y[2] / (y[0] * e.k * e.jp);
    let tau = -y[3] / (e.k * e.j * e.jp) - beta;
    Ok(ModeOde {
        phi: y[0],
        phi_prime: y[1],
        beta,
        tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use crate::quadrature::gauss_legendre;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bump(amp: f64) -> RadialPotential {
        RadialPotential::new(Potential::gaussian_bump(amp, 0.3, 0.5).unwrap(), 2).unwrap()
    }

    fn disc() -> Discretization {
        Discretization::extrapolated(128)
    }

    #[test]
    fn dirichlet_kernel_vanishes_at_boundary_and_is_symmetric() {
        let z = SpectralParam::real(-2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(crate::DEFAULT_SEED);
        for m in [0, 1, 5] {
            assert!(
                mode_green(m, z, Boundary::Dirichlet, 1.0 - 1e-6, 0.4)
                    .unwrap()
                    .norm()
                    < 1e-4
            );
            for _ in 0..20 {
                let (r, rp) = (rng.gen_range(0.01..1.0), rng.gen_range(0.01..1.0));
                for b in [Boundary::Dirichlet, Boundary::Neumann] {
                    let g1 = mode_green(m, z, b, r, rp).unwrap();
                    let g2 = mode_green(m, z, b, rp, r).unwrap();
                    assert!((g1 - g2).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn neumann_kernel_has_zero_normal_derivative() {
        let z = SpectralParam::new(c64(-1.5, 0.4));
        for m in [0, 2] {
            let h = 1e-5;
            let d = (mode_green(m, z, Boundary::Neumann, 1.0, 0.3).unwrap()
                - mode_green(m, z, Boundary::Neumann, 1.0 - h, 0.3).unwrap())
                / h;
            assert!(d.norm() < 1e-4, "m={m}: {d}");
        }
    }

    // ψ = Σ c_p r^p gives (L - z)ψ = Σ c_p (m² - p²) r^{p-2} - z ψ.
    fn apply_check(m: usize, boundary: Boundary, coeffs: &[(i32, f64)]) {
        let z = SpectralParam::new(c64(-2.0, 0.5));
        let mf = m as f64;
        let psi = |r: f64| coeffs.iter().map(|(p, c)| c * r.powi(*p)).sum::<f64>();
        let lpsi = |r: f64| {
            let s: f64 = coeffs
                .iter()
                .map(|(p, c)| c * (mf * mf - (*p as f64).powi(2)) * r.powi(p - 2))
                .sum();
            c64(s, 0.0) - z.z() * psi(r)
        };
        for r in [0.2, 0.55, 0.9] {
            let mut sum = c64(0.0, 0.0);
            for (lo, hi) in [(0.0, r), (r, 1.0)] {
                let q = gauss_legendre(40, lo, hi).unwrap();
                for (&x, &w) in q.nodes().iter().zip(q.weights()) {
                    sum += mode_green(m, z, boundary, r, x).unwrap() * lpsi(x) * (w * x);
                }
            }
            assert!(
                (sum - psi(r)).norm() < 1e-10,
                "m={m} {boundary:?} r={r}: {sum} vs {}",
                psi(r)
            );
        }
    }

    #[test]
    fn green_inverts_mode_operator() {
        for m in [0usize, 1, 3] {
            let mi = m as i32;
            apply_check(
                m,
                Boundary::Dirichlet,
                &[(mi, 1.0), (mi + 2, -2.0), (mi + 4, 1.0)],
            );
            let mf = m as f64;
            apply_check(
                m,
                Boundary::Neumann,
                &[(mi, 1.0), (mi + 2, -mf / (mf + 2.0))],
            );
        }
    }

    #[test]
    fn krein_factorization_per_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::DEFAULT_SEED);
        for _ in 0..100 {
            let m = rng.gen_range(0..8);
            let z = SpectralParam::new(c64(rng.gen_range(-6.0..4.0), rng.gen_range(0.1..3.0)));
            let (r, rp) = (rng.gen_range(0.01..1.0), rng.gen_range(0.01..1.0));
            let chk = krein_disk_check(m, z, r, rp).unwrap();
            assert!(chk.deviation() < 1e-8, "{chk:?}");
            let swapped = krein_disk_check(m, z, rp, r).unwrap();
            assert!((swapped.lhs - chk.lhs).norm() < 1e-10 * chk.lhs.norm());
        }
    }

    #[test]
    fn free_eigenvalues_are_rejected() {
        // first zero of J_0
        let j01: f64 = 2.404_825_557_695_773;
        let z = SpectralParam::real(j01 * j01);
        assert!(matches!(
            mode_green(0, z, Boundary::Dirichlet, 0.5, 0.5),
            Err(Error::DirichletEigenvalue(_))
        ));
        // first zero of J_1' (j'_{1,1})
        let jp11: f64 = 1.841_183_781_340_659_3;
        let z = SpectralParam::real(jp11 * jp11);
        assert!(matches!(
            mode_green(1, z, Boundary::Neumann, 0.5, 0.5),
            Err(Error::NeumannEigenvalue(_))
        ));
    }

    #[test]
    fn zero_potential_ratio_is_one() {
        let v = RadialPotential::new(Potential::zero().scaled(0.0), 2).unwrap();
        let z = SpectralParam::real(-2.0);
        assert!((disk_determinant_ratio(&v, z, 5, &disc()).unwrap() - 1.0).norm() < 1e-15);
        assert!((disk_boundary_ratio(&v, z, 5, &disc()).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn boundary_identity_holds() {
        let v = bump(3.0);
        for z in [-6.0, -2.0, -1.0] {
            let z = SpectralParam::real(z);
            let l = disk_determinant_ratio(&v, z, 20, &disc()).unwrap();
            let r = disk_boundary_ratio(&v, z, 20, &disc()).unwrap();
            assert!((l - r).norm() < 1e-10 * l.norm(), "{l} vs {r}");
        }
    }

    #[test]
    fn mode_zero_matches_ode_oracle() {
        let v = bump(-4.0);
        for z in [SpectralParam::real(-2.0), SpectralParam::new(c64(1.0, 0.7))] {
            for m in [0, 1] {
                let ode = mode_ode(&v, m, z, 2000).unwrap();
                let op = disc()
                    .evaluate(0.0, v.cutoff(), |rule| {
                        DiskModeOperator::new(m, z, rule)?.boundary_terms(&v)
                    })
                    .unwrap();
                assert!(
                    (op.0 - ode.beta).norm() < 1e-8,
                    "m={m} β: {} vs {}",
                    op.0,
                    ode.beta
                );
                assert!(
                    (op.1 - ode.tau).norm() < 1e-8,
                    "m={m} τ: {} vs {}",
                    op.1,
                    ode.tau
                );
            }
        }
    }

    #[test]
    fn refinement_invariance() {
        let v = bump(3.0);
        let z = SpectralParam::real(-3.0);
        let a = disk_determinant_ratio(&v, z, 20, &Discretization::extrapolated(128)).unwrap();
        let b = disk_determinant_ratio(&v, z, 20, &Discretization::extrapolated(256)).unwrap();
        assert!((a - b).norm() < 1e-6 * a.norm());
    }

    #[test]
    fn ratio_is_second_order_in_coupling() {
        // det₂ has no linear term, so log ratio ≈ -(c²/2)(tr K_N² - tr K_D²)
        let base = bump(1.0);
        let z = SpectralParam::real(-2.0);
        let log_ratio = |c: f64| {
            let v = RadialPotential::new(base.profile.scaled(c), 2).unwrap();
            disk_determinant_ratio(&v, z, 12, &disc()).unwrap().ln()
        };
        let c = 1e-2;
        let first = (log_ratio(c) - log_ratio(-c)) / (2.0 * c);
        let second = (log_ratio(c) + log_ratio(-c)) / (c * c);
        assert!(first.norm() < 1e-6, "{first}");
        let expected: Complex64 = disc()
            .evaluate(0.0, base.cutoff(), |rule| {
                let mut s = c64(0.0, 0.0);
                for m in 0..=12 {
                    let op = DiskModeOperator::new(m, z, rule)?;
                    let kn = op.bs_matrix(&base, Boundary::Neumann);
                    let kd = op.bs_matrix(&base, Boundary::Dirichlet);
                    s += (crate::detcore::trace(&(&kd * &kd))
                        - crate::detcore::trace(&(&kn * &kn)))
                        * degeneracy(m) as f64;
                }
                Ok(s)
            })
            .unwrap();
        assert!(
            (second - expected).norm() < 1e-6 * expected.norm().max(1e-3),
            "{second} vs {expected}"
        );
    }

    #[test]
    fn ratio_has_zero_at_neumann_and_pole_at_dirichlet_eigenvalue() {
        // V = -30 on the whole disk: Neumann ground state -30, Dirichlet j₀₁² - 30
        let v = RadialPotential::new(Potential::square_well(30.0, 1.0).unwrap(), 2).unwrap();
        let ode = |z: f64| mode_ode(&v, 0, SpectralParam::real(z), 1000).unwrap();
        let bisect = |f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| {
            let flo = f(lo);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if f(mid).signum() == flo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let en = bisect(&|z| ode(z).phi_prime.re, -35.0, -27.0);
        let ed = bisect(&|z| ode(z).phi.re, -27.0, -20.0);
        assert!((en + 30.0).abs() < 1e-8);
        assert!((ed - (2.404_825_557_695_773f64.powi(2) - 30.0)).abs() < 1e-8);
        let ratio = |z: f64| lhs_modes(&v, SpectralParam::real(z), 0, &disc()).unwrap()[0];
        let d = 1e-3;
        assert!(ratio(en - d).re.signum() != ratio(en + d).re.signum());
        assert!(ratio(en).norm() < 1e-3 * ratio(en - 0.5).norm());
        assert!(ratio(ed - d).re.signum() != ratio(ed + d).re.signum());
        assert!(ratio(ed - 1e-5).norm() > 1e3 * ratio(ed - 0.5).norm());
    }
}
