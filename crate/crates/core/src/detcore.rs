//! Determinants, regularized determinants, Riesz projections and
//! argument-principle multiplicity counting on dense complex matrices.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::{c64, CMatrix, Error, Result};

/// Default number of trapezoid nodes on a contour circle.
pub const DEFAULT_CONTOUR_NODES: usize = 128;
/// Distance from the nearest integer beyond which a contour integral is rejected.
pub const INTEGER_TOLERANCE: f64 = 0.2;
/// Relative Frobenius threshold used to decide the nilpotency order of `D`.
pub const LAURENT_THRESHOLD: f64 = 1e-10;
/// Condition number above which `I - L(z)` is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Counterclockwise circle `|ζ - center| = radius` sampled at `nodes` equispaced points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    center: Complex64,
    radius: f64,
    nodes: usize,
}

impl ContourSpec {
    pub fn new(center: Complex64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "contour radius must be positive, got {radius}"
            )));
        }
        if nodes < 16 {
            return Err(Error::InvalidParameter(format!(
                "contour needs at least 16 nodes, got {nodes}"
            )));
        }
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "contour center must be finite".into(),
            ));
        }
        Ok(Self {
            center,
            radius,
            nodes,
        })
    }

    /// Circle with the default node count.
    pub fn circle(center: Complex64, radius: f64) -> Result<Self> {
        Self::new(center, radius, DEFAULT_CONTOUR_NODES)
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Angle step of the trapezoid rule.
    pub fn step(&self) -> f64 {
        2.0 * PI / self.nodes as f64
    }

    /// Unit direction `e^{iθ_j}` of node `j`.
    pub fn direction(&self, j: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.step() * j as f64)
    }

    pub fn point(&self, j: usize) -> Complex64 {
        self.center + self.direction(j) * self.radius
    }

    /// Whether `z` lies strictly inside the circle.
    pub fn encloses(&self, z: Complex64) -> bool {
        (z - self.center).norm() < self.radius
    }
}

/// Spectral data of an isolated eigenvalue extracted from the resolvent.
#[derive(Debug, Clone)]
pub struct LaurentData {
    /// Riesz projection onto the algebraic eigenspace.
    pub projection: CMatrix,
    /// Eigennilpotent `(T - λ0) P`.
    pub nilpotent: CMatrix,
    /// Smallest `μ` with `D^{μ+1} ≈ 0`; `None` when the contour encloses more
    /// than one distinct eigenvalue and `D` is not nilpotent.
    pub order: Option<usize>,
    /// Algebraic multiplicity, the rounded trace of `P`.
    pub multiplicity: usize,
    /// Unrounded trace of `P`.
    pub trace: Complex64,
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn check_square(m: &CMatrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "{what} has non-finite entries"
        )));
    }
    Ok(())
}

fn identity_plus(m: &CMatrix) -> CMatrix {
    let mut a = m.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += 1.0;
    }
    a
}

/// `det(I + M)` by LU factorization with partial pivoting.
pub fn det_fredholm(m: &CMatrix) -> Result<Complex64> {
    check_square(m, "M")?;
    if m.nrows() == 0 {
        return Ok(c64(1.0, 0.0));
    }
    Ok(identity_plus(m).lu().determinant())
}

/// `det_p(I + M)` for `p ∈ {1, 2}`; `det_2(I + M) = det(I + M) exp(-tr M)`.
pub fn det_regularized(m: &CMatrix, p: u32) -> Result<Complex64> {
    match p {
        1 => det_fredholm(m),
        2 => Ok(det_fredholm(m)? * (-trace(m)).exp()),
        other => Err(Error::UnsupportedOrder(other)),
    }
}

/// `log det_p(I + M)` accumulated from the LU pivots, so that large matrices
/// with tiny or huge determinants stay representable. The imaginary part is
/// the sum of pivot arguments and is not reduced modulo 2π.
pub fn log_det_regularized(m: &CMatrix, p: u32) -> Result<Complex64> {
    if p != 1 && p != 2 {
        return Err(Error::UnsupportedOrder(p));
    }
    check_square(m, "M")?;
    let n = m.nrows();
    let lu = identity_plus(m).lu();
    let u = lu.u();
    let mut acc = c64(0.0, 0.0);
    for i in 0..n {
        let d = u[(i, i)];
        if d == c64(0.0, 0.0) {
            return Err(Error::SingularPoint {
                z: c64(f64::NAN, f64::NAN),
                detail: "I + M is singular".into(),
            });
        }
        acc += d.ln();
    }
    // Row swaps contribute a sign.
    let det_sign = lu.p().determinant::<f64>();
    if det_sign < 0.0 {
        acc += c64(0.0, PI);
    }
    if p == 2 {
        acc -= trace(m);
    }
    Ok(acc)
}

/// Inverse of a square matrix together with a 1-norm condition estimate.
pub(crate) fn inverse_with_condition(a: &CMatrix) -> Option<(CMatrix, f64)> {
    let inv = a.clone().lu().try_inverse()?;
    let cond = one_norm(a) * one_norm(&inv);
    if !cond.is_finite() {
        return None;
    }
    Some((inv, cond))
}

/// `Δ'(z)/Δ(z) = -tr((I - L(z))^{-1} L'(z))` for `Δ(z) = det(I - L(z))`.
pub fn log_derivative_det<L, LP>(l: L, l_prime: LP, z: Complex64) -> Result<Complex64>
where
    L: Fn(Complex64) -> CMatrix,
    LP: Fn(Complex64) -> CMatrix,
{
    let lz = l(z);
    let lp = l_prime(z);
    check_square(&lz, "L(z)")?;
    if lp.shape() != lz.shape() {
        return Err(Error::Dimension("L and L' have different shapes".into()));
    }
    let n = lz.nrows();
    let a = CMatrix::identity(n, n) - lz;
    match inverse_with_condition(&a) {
        Some((inv, cond)) if cond < SINGULAR_CONDITION => Ok(-trace(&(inv * lp))),
        Some((_, cond)) => Err(Error::SingularPoint {
            z,
            detail: format!("I - L(z) has condition {cond:.3e}"),
        }),
        None => Err(Error::SingularPoint {
            z,
            detail: "I - L(z) is not invertible".into(),
        }),
    }
}

fn round_checked(value: Complex64, what: &str) -> Result<i64> {
    let nearest = value.re.round();
    if (value.re - nearest).abs() > INTEGER_TOLERANCE || value.im.abs() > INTEGER_TOLERANCE {
        return Err(Error::ContourPlacement(format!(
            "{what} evaluated to {value}, which is not within {INTEGER_TOLERANCE} of an integer"
        )));
    }
    Ok(nearest as i64)
}

/// Net number of zeros minus poles of `f` inside the contour,
/// `(1/2πi)∮ f'/f dζ`, with `f'` along the circle by fourth-order centered
/// differences in the angle.
pub fn winding_multiplicity<F>(f: F, contour: &ContourSpec) -> Result<i64>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let n = contour.nodes();
    let values: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|j| f(contour.point(j)))
        .collect();
    for (j, v) in values.iter().enumerate() {
        if !(v.re.is_finite() && v.im.is_finite()) || v.norm() == 0.0 {
            return Err(Error::ContourPlacement(format!(
                "f is zero or singular at contour node {j} (ζ = {})",
                contour.point(j)
            )));
        }
    }
    let h = contour.step();
    let at = |j: isize| values[j.rem_euclid(n as isize) as usize];
    let mut sum = c64(0.0, 0.0);
    for j in 0..n as isize {
        let df = (at(j - 2) - at(j - 1) * 8.0 + at(j + 1) * 8.0 - at(j + 2)) / (12.0 * h);
        sum += df / at(j);
    }
    let winding = sum * h / c64(0.0, 2.0 * PI);
    round_checked(winding, "winding number")
}

/// Riesz projection `P = -(1/2πi)∮(T - ζ)^{-1} dζ`, eigennilpotent `D = (T - λ0)P`
/// and nilpotency order, with `λ0` the contour center.
pub fn riesz_projection(t: &CMatrix, contour: &ContourSpec) -> Result<LaurentData> {
    check_square(t, "T")?;
    let n = t.nrows();
    let nodes = contour.nodes();
    let resolvents: Vec<Result<CMatrix>> = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let zeta = contour.point(j);
            let shifted = t - CMatrix::identity(n, n) * zeta;
            match inverse_with_condition(&shifted) {
                Some((inv, cond)) if cond < 1e13 => {
                    Ok(inv * (contour.direction(j) * contour.radius()))
                }
                _ => Err(Error::ContourPlacement(format!(
                    "T - ζ is ill-conditioned at node {j} (ζ = {zeta})"
                ))),
            }
        })
        .collect();
    let mut sum = CMatrix::zeros(n, n);
    for r in resolvents {
        sum += r?;
    }
    // dζ = i ρ e^{iθ} dθ, so -(1/2πi) Σ (T-ζ)^{-1} i ρ e^{iθ} h = -(h/2π) Σ ρ e^{iθ}(T-ζ)^{-1}.
    let projection = sum * c64(-contour.step() / (2.0 * PI), 0.0);
    let tr = trace(&projection);
    let mult = tr.re.round();
    if (tr.re - mult).abs() > 0.1 || tr.im.abs() > 0.1 || mult < 0.0 {
        return Err(Error::Resolution(format!(
            "trace of the Riesz projection is {tr}, not an integer"
        )));
    }
    let lambda0 = contour.center();
    let nilpotent = (t - CMatrix::identity(n, n) * lambda0) * &projection;
    let threshold = LAURENT_THRESHOLD * frobenius(t).max(f64::MIN_POSITIVE);
    let mut power = nilpotent.clone();
    let mut order = Some(0);
    while frobenius(&power) >= threshold {
        order = order.map(|k| k + 1).filter(|&k| k <= n);
        if order.is_none() {
            break;
        }
        power = &power * &nilpotent;
    }
    Ok(LaurentData {
        projection,
        nilpotent,
        order,
        multiplicity: mult as usize,
        trace: tr,
    })
}

/// Eigenvalues of a general complex matrix from the Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    check_square(m, "M")?;
    let schur = m.clone().schur();
    let (_, tri) = schur.unpack();
    Ok(tri.diagonal().iter().copied().collect())
}

/// Block-diagonal matrix `diag(a, b)`.
pub fn block_diag(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows() + b.nrows();
    let m = a.ncols() + b.ncols();
    let mut out = DMatrix::zeros(n, m);
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}
