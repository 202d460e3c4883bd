//! Partial-wave Birman–Schwinger determinants for radial potentials on `ℝ²`
//! and `ℝ³`: the modified determinant `det₂(I + u R0(z) v)`, the spectral
//! shift function and the scattering determinant.
//!
//! For a radial potential the operator commutes with rotations, so `det₂`
//! factors into channel determinants. Channel kernels act on `L²((0, a), dr)`
//! with the radial measure absorbed:
//!
//! - `n = 3`, angular momentum `ℓ`: `g_ℓ = ik r_< r_> j_ℓ(kr_<) h_ℓ(kr_>)`,
//!   degeneracy `2ℓ + 1`;
//! - `n = 2`, `|m|`: `g_m = (iπ/2) √(r r') J_m(kr_<) H_m(kr_>)`, degeneracy
//!   1 for `m = 0` and 2 otherwise.
//!
//! Channel determinants use the same trapezoid/Richardson Nyström scheme as
//! the half-line module; the `r = 0` node carries no weight and is dropped.
//!
//! The real part of `log det₂` per channel decays only algebraically in `ℓ`
//! (the static part of the kernel is of size `1/ℓ`), while its imaginary part,
//! which carries the phase shift, decays faster than any power once
//! `ℓ ≫ |k| a`. The spectral shift and the scattering determinant depend on
//! the imaginary part only; the truncation tests below follow that split.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::detcore::{det_regularized, trace};
use crate::potential::RadialPotential;
use crate::quadrature::{Discretization, QuadratureRule};
use crate::specfun::{bessel_jy, cylinder_bessel, spherical_bessel, SpectralParam};
use crate::{c64, CMatrix, Complex64, Error, Result};

/// Default number of trapezoid intervals on `[0, a]` for channel determinants.
pub const DEFAULT_CHANNEL_GRID: usize = 128;

/// Bound on the last channel's contribution for a truncation to be accepted.
pub const TRUNCATION_TOL: f64 = 1e-10;

/// Largest accepted phase increment between neighbouring λ-grid points.
pub const MAX_PHASE_STEP: f64 = PI / 2.0;

const PATH_PHASE_STEP: f64 = PI / 4.0;

fn check_dim(n: u32) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "dimension must be 2 or 3, got {n}"
        )))
    }
}

/// Multiplicity of channel `l` in dimension `n`.
pub fn degeneracy(n: u32, l: usize) -> usize {
    match (n, l) {
        (3, l) => 2 * l + 1,
        (_, 0) => 1,
        _ => 2,
    }
}

/// `⌈|√z| a⌉ + 10`.
pub fn default_l_max(z: &SpectralParam, a: f64) -> usize {
    (z.sqrt().norm() * a).ceil() as usize + 10
}

/// Free resolvent kernel `R0(z; x, x')` on `ℝⁿ`: `(i/4) H_0^{(1)}(k|x - x'|)`
/// for `n = 2`, `e^{ik|x - x'|}/(4π|x - x'|)` for `n = 3`.
pub fn free_kernel(n: u32, z: SpectralParam, x: &[f64], xp: &[f64]) -> Result<Complex64> {
    check_dim(n)?;
    if x.len() != n as usize || xp.len() != n as usize {
        return Err(Error::Dimension(format!(
            "points must have {n} coordinates"
        )));
    }
    let r = x
        .iter()
        .zip(xp)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    if r == 0.0 {
        return Err(Error::KernelSingularity {
            i: 0,
            j: 0,
            x: x[0],
            xp: xp[0],
        });
    }
    let k = z.sqrt();
    if k.norm() == 0.0 {
        return Err(Error::SpectralPoint(z.z()));
    }
    if n == 3 {
        return Ok((c64(0.0, 1.0) * k * r).exp() / (4.0 * PI * r));
    }
    if z.is_lower_side() {
        return Ok(free_kernel(2, z.conj(), x, xp)?.conj());
    }
    Ok(c64(0.0, 0.25) * cylinder_bessel(k * r, 0)?.h1(0))
}

/// Inner/outer radial factors of every channel at increasing nodes, so that
/// `g_ℓ(r_i, r_j) = pref · inner[ℓ][min] · outer[ℓ][max]`. The `_dk` tables
/// hold `∂_k` of the factors.
struct ChannelTable {
    pref: Complex64,
    pref_dk: Complex64,
    k: Complex64,
    inner: Vec<Vec<Complex64>>,
    outer: Vec<Vec<Complex64>>,
    inner_dk: Vec<Vec<Complex64>>,
    outer_dk: Vec<Vec<Complex64>>,
}

impl ChannelTable {
    fn build(n: u32, z: SpectralParam, nodes: &[f64], l_max: usize) -> Result<Self> {
        check_dim(n)?;
        let k = z.sqrt();
        if k.norm() == 0.0 {
            return Err(Error::SpectralPoint(z.z()));
        }
        if n == 2 && z.is_lower_side() {
            let mut t = Self::build(2, z.conj(), nodes, l_max)?;
            t.pref = t.pref.conj();
            t.k = k;
            for tab in [&mut t.inner, &mut t.outer] {
                tab.iter_mut().flatten().for_each(|v| *v = v.conj());
            }
            // derivative tables are not used on the lower side
            t.inner_dk.clear();
            t.outer_dk.clear();
            return Ok(t);
        }
        let zero = vec![c64(0.0, 0.0); nodes.len()];
        let mut t = Self {
            pref: if n == 3 {
                c64(0.0, 1.0) * k
            } else {
                c64(0.0, PI / 2.0)
            },
            pref_dk: if n == 3 { c64(0.0, 1.0) } else { c64(0.0, 0.0) },
            k,
            inner: vec![zero.clone(); l_max + 1],
            outer: vec![zero.clone(); l_max + 1],
            inner_dk: vec![zero.clone(); l_max + 1],
            outer_dk: vec![zero; l_max + 1],
        };
        for (i, &r) in nodes.iter().enumerate() {
            let w = k * r;
            if n == 3 {
                let sb = spherical_bessel(w, l_max)?;
                for l in 0..=l_max {
                    t.inner[l][i] = sb.j(l) * r;
                    t.outer[l][i] = sb.h(l) * r;
                    t.inner_dk[l][i] = sb.jp(l) * (r * r);
                    t.outer_dk[l][i] = sb.hp(l) * (r * r);
                }
            } else {
                let cb = cylinder_bessel(w, l_max)?;
                let sr = r.sqrt();
                for l in 0..=l_max {
                    t.inner[l][i] = cb.j(l) * sr;
                    t.outer[l][i] = cb.h1(l) * sr;
                    t.inner_dk[l][i] = cb.jp(l) * (sr * r);
                    t.outer_dk[l][i] = cb.h1p(l) * (sr * r);
                }
            }
        }
        Ok(t)
    }

    fn kernel(&self, l: usize, i: usize, j: usize) -> Complex64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.pref * self.inner[l][lo] * self.outer[l][hi]
    }

    /// `∂_z g_ℓ(r_i, r_j) = ∂_k g / (2k)`.
    fn kernel_dz(&self, l: usize, i: usize, j: usize) -> Complex64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let dk = self.pref_dk * self.inner[l][lo] * self.outer[l][hi]
            + self.pref
                * (self.inner_dk[l][lo] * self.outer[l][hi]
                    + self.inner[l][lo] * self.outer_dk[l][hi]);
        dk / (self.k * 2.0)
    }
}

/// Channel kernel `g_ℓ(z; r, r')` on `L²((0, ∞), dr)`.
pub fn channel_kernel(n: u32, l: usize, z: SpectralParam, r: f64, rp: f64) -> Result<Complex64> {
    if !(r > 0.0 && rp > 0.0) {
        return Err(Error::Domain(format!(
            "channel kernels need r, r' > 0, got ({r}, {rp})"
        )));
    }
    let t = ChannelTable::build(n, z, &[r.min(rp), r.max(rp)], l)?;
    Ok(t.kernel(l, 0, 1))
}

struct ChannelGrid {
    nodes: Vec<f64>,
    /// `√w_i u(r_i)` and `√w_i v(r_i)`.
    left: Vec<f64>,
    right: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl ChannelGrid {
    fn new(v: &RadialPotential, rule: &QuadratureRule) -> Self {
        let rule = rule.without_left_endpoint();
        let nodes = rule.nodes().to_vec();
        let weights = rule.weights().to_vec();
        let p = &v.profile;
        let left = nodes
            .iter()
            .zip(&weights)
            .map(|(&r, w)| w.sqrt() * p.u(r))
            .collect();
        let right = nodes
            .iter()
            .zip(&weights)
            .map(|(&r, w)| w.sqrt() * p.v(r))
            .collect();
        let values = nodes.iter().map(|&r| p.value(r)).collect();
        Self {
            nodes,
            left,
            right,
            weights,
            values,
        }
    }

    fn matrix<F: Fn(usize, usize) -> Complex64>(&self, f: F) -> Result<CMatrix> {
        let n = self.nodes.len();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let g = f(i, j);
                if !(g.re.is_finite() && g.im.is_finite()) {
                    return Err(Error::KernelSingularity {
                        i,
                        j,
                        x: self.nodes[i],
                        xp: self.nodes[j],
                    });
                }
                m[(i, j)] = g * (self.left[i] * self.right[j]);
            }
        }
        Ok(m)
    }
}

fn channel_dets_on(
    v: &RadialPotential,
    z: SpectralParam,
    rule: &QuadratureRule,
    l_max: usize,
) -> Result<Vec<Complex64>> {
    let grid = ChannelGrid::new(v, rule);
    let table = ChannelTable::build(v.dim, z, &grid.nodes, l_max)?;
    (0..=l_max)
        .into_par_iter()
        .map(|l| det_regularized(&grid.matrix(|i, j| table.kernel(l, i, j))?, 2))
        .collect()
}

/// `det₂(I + u g_ℓ(z) v)` for `ℓ = 0..=l_max`.
pub fn channel_det2(
    v: &RadialPotential,
    z: SpectralParam,
    l_max: usize,
    disc: &Discretization,
) -> Result<Vec<Complex64>> {
    disc.evaluate(0.0, v.cutoff(), |rule| channel_dets_on(v, z, rule, l_max))
}

/// Channel-truncated `det₂(I + u R0(z) v)` on `L²(ℝⁿ)`.
#[derive(Debug, Clone)]
pub struct Det2Result {
    pub value: Complex64,
    /// `Σ deg_ℓ log det₂_ℓ` with principal channel logarithms.
    pub log_value: Complex64,
    pub channels: Vec<Complex64>,
    pub l_max: usize,
    /// `deg · |log det₂|` of the last channel.
    pub last_increment: f64,
}

/// Product of channel determinants up to `l_max` (default [`default_l_max`]).
/// Fails with [`Error::ChannelTruncation`] when the last channel contributes
/// more than `tol` to `|log det₂|`.
pub fn det2_bs(
    v: &RadialPotential,
    z: SpectralParam,
    l_max: Option<usize>,
    disc: &Discretization,
    tol: f64,
) -> Result<Det2Result> {
    let l_max = l_max.unwrap_or_else(|| default_l_max(&z, v.cutoff()));
    let channels = channel_det2(v, z, l_max, disc)?;
    let log_value: Complex64 = channels
        .iter()
        .enumerate()
        .map(|(l, d)| d.ln() * degeneracy(v.dim, l) as f64)
        .sum();
    let last_increment = channels[l_max].ln().norm() * degeneracy(v.dim, l_max) as f64;
    if last_increment > tol {
        return Err(Error::ChannelTruncation {
            l_max,
            last: last_increment,
        });
    }
    Ok(Det2Result {
        value: log_value.exp(),
        log_value,
        channels,
        l_max,
        last_increment,
    })
}

/// `(1/4π) ∫ V dⁿx · (-1/z)` for `n = 2` and `(1/4π) ∫ V dⁿx · i/(2√z)` for
/// `n = 3`, which is `tr(R0 V R0)`.
pub fn trace_correction(v: &RadialPotential, z: SpectralParam) -> Result<Complex64> {
    let k = z.sqrt();
    if k.norm() == 0.0 {
        return Err(Error::SpectralPoint(z.z()));
    }
    let total = v.volume_integral() / (4.0 * PI);
    Ok(if v.dim == 2 {
        -total / z.z()
    } else {
        c64(0.0, 0.5) * total / k
    })
}

/// `Σ_ℓ deg ∫ V(r) ∂_z g_ℓ(z; r, r) dr`, the channel form of `tr(R0 V R0)`.
pub fn channel_trace_r0vr0(
    v: &RadialPotential,
    z: SpectralParam,
    l_max: usize,
    disc: &Discretization,
) -> Result<Complex64> {
    if z.is_lower_side() {
        return Err(Error::InvalidParameter(
            "channel traces are evaluated from above the cut".into(),
        ));
    }
    disc.evaluate(0.0, v.cutoff(), |rule| {
        let grid = ChannelGrid::new(v, rule);
        let table = ChannelTable::build(v.dim, z, &grid.nodes, l_max)?;
        let mut sum = c64(0.0, 0.0);
        for l in 0..=l_max {
            let deg = degeneracy(v.dim, l) as f64;
            for i in 0..grid.nodes.len() {
                sum += table.kernel_dz(l, i, i) * (grid.weights[i] * grid.values[i] * deg);
            }
        }
        Ok(sum)
    })
}

/// Both sides of `d/dz log det₂(I + u R0 v) = -tr(R - R0 + R0 V R0)`, each
/// summed over channels `0..=l_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivativeCheck {
    pub finite_difference: Complex64,
    pub trace_formula: Complex64,
}

impl LogDerivativeCheck {
    pub fn deviation(&self) -> f64 {
        (self.finite_difference - self.trace_formula).norm() / self.trace_formula.norm().max(1e-300)
    }
}

/// Evaluates [`LogDerivativeCheck`] at `z` off the real axis. The trace side
/// uses `R - R0 + R0VR0 = R0 v (I + K)^{-1} K u R0`, so that
/// `tr(...) = tr((I + K)^{-1} K u ∂_z R0 v)`.
pub fn log_derivative_check(
    v: &RadialPotential,
    z: Complex64,
    l_max: usize,
    disc: &Discretization,
) -> Result<LogDerivativeCheck> {
    if z.im <= 0.0 {
        return Err(Error::InvalidParameter(format!("need Im z > 0, got {z}")));
    }
    let h = 1e-3 * z.norm().max(1.0).min(z.im * 10.0);
    let dim = v.dim;
    let log_ratio = |a: Complex64, b: Complex64| -> Result<Complex64> {
        let da = channel_det2(v, SpectralParam::new(a), l_max, disc)?;
        let db = channel_det2(v, SpectralParam::new(b), l_max, disc)?;
        Ok(da
            .iter()
            .zip(&db)
            .enumerate()
            .map(|(l, (x, y))| (x / y).ln() * degeneracy(dim, l) as f64)
            .sum())
    };
    let d1 = log_ratio(z + h, z - h)?;
    let d2 = log_ratio(z + 2.0 * h, z - 2.0 * h)?;
    let finite_difference = (d1 * 8.0 - d2) / (12.0 * h);

    let sp = SpectralParam::new(z);
    let trace_formula = disc.evaluate(0.0, v.cutoff(), |rule| {
        let grid = ChannelGrid::new(v, rule);
        let table = ChannelTable::build(dim, sp, &grid.nodes, l_max)?;
        let parts: Result<Vec<Complex64>> = (0..=l_max)
            .into_par_iter()
            .map(|l| {
                let k = grid.matrix(|i, j| table.kernel(l, i, j))?;
                let dk = grid.matrix(|i, j| table.kernel_dz(l, i, j))?;
                let mut a = k.clone();
                for i in 0..a.nrows() {
                    a[(i, i)] += 1.0;
                }
                let sol = a
                    .lu()
                    .solve(&(&k * &dk))
                    .ok_or(Error::PerturbedSpectrum(z))?;
                Ok(-trace(&sol) * degeneracy(dim, l) as f64)
            })
            .collect();
        Ok(parts?.into_iter().sum::<Complex64>())
    })?;
    Ok(LogDerivativeCheck {
        finite_difference,
        trace_formula,
    })
}

/// Spectral shift function at one energy, with the boundary values it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SSFResult {
    pub lambda: f64,
    pub xi: f64,
    /// Channel-truncated `det₂(λ + i0)`.
    pub det2_plus: Complex64,
    /// Channel-truncated `det₂(λ - i0)`.
    pub det2_minus: Complex64,
    /// `c(λ) ∫ V dⁿx / (4π²)` with `c = π` (`n = 2`) or `√λ` (`n = 3`); zero for `λ ≤ 0`.
    pub correction: f64,
}

fn unwrap_to(prev: f64, d: Complex64) -> f64 {
    let arg = d.arg();
    arg + 2.0 * PI * ((prev - arg) / (2.0 * PI)).round()
}

fn sup_abs(v: &RadialPotential) -> f64 {
    let a = v.cutoff();
    (0..=2000)
        .map(|i| v.value(a * i as f64 / 2000.0).abs())
        .fold(0.0, f64::max)
}

/// Continuous `Im log det₂_ℓ` at the first grid point, continued from
/// `z = -R` (where every channel is within 1/2 of 1) along the upper
/// semicircle whose diameter is `[-R, λ]`. Real eigenvalues in `(-R, λ)` are
/// passed above.
fn anchor_phases(
    v: &RadialPotential,
    end: SpectralParam,
    l_max: usize,
    disc: &Discretization,
) -> Result<Vec<f64>> {
    let lambda = end.z().re;
    let mut r = 4.0 * sup_abs(v).max(1.0).max(-lambda);
    let mut phases;
    loop {
        let d = channel_det2(v, SpectralParam::real(-r), l_max, disc)?;
        if d.iter().all(|x| (x - 1.0).norm() < 0.5) {
            phases = d.iter().map(|x| x.arg()).collect::<Vec<_>>();
            break;
        }
        r *= 4.0;
        if r > 1e8 {
            return Err(Error::Iteration(
                "no anchor point with |det₂ - 1| < 1/2 on the negative axis".into(),
            ));
        }
    }
    let center = 0.5 * (lambda - r);
    let rho = 0.5 * (lambda + r);
    let point = |theta: f64| {
        if theta <= 0.0 {
            end
        } else {
            SpectralParam::new(c64(center, 0.0) + c64(0.0, theta).exp() * rho)
        }
    };
    let max_step = PI / 16.0;
    let mut theta = PI;
    let mut step = max_step;
    while theta > 0.0 {
        let next = (theta - step).max(0.0);
        let d = channel_det2(v, point(next), l_max, disc)?;
        let cand: Vec<f64> = d
            .iter()
            .zip(&phases)
            .map(|(x, p)| unwrap_to(*p, *x))
            .collect();
        let worst = cand
            .iter()
            .zip(&phases)
            .map(|(c, p)| (c - p).abs())
            .fold(0.0, f64::max);
        if worst > PATH_PHASE_STEP {
            step *= 0.5;
            if step < 1e-9 {
                return Err(Error::GridTooCoarse(format!(
                    "phase continuation to λ = {lambda} stalled (zero on the path?)"
                )));
            }
            continue;
        }
        phases = cand;
        theta = next;
        step = (step * 1.5).min(max_step);
    }
    Ok(phases)
}

fn log_sum(n: u32, d: &[Complex64]) -> Complex64 {
    d.iter()
        .enumerate()
        .map(|(l, x)| x.ln() * degeneracy(n, l) as f64)
        .sum()
}

fn ssf_correction(v: &RadialPotential, lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let c = if v.dim == 2 { PI } else { lambda.sqrt() };
    c * v.volume_integral() / (4.0 * PI * PI)
}

fn check_phase_truncation(n: u32, d: &[Complex64]) -> Result<()> {
    let l_max = d.len() - 1;
    let last = d[l_max].arg().abs() * degeneracy(n, l_max) as f64;
    if last > TRUNCATION_TOL {
        return Err(Error::ChannelTruncation { l_max, last });
    }
    Ok(())
}

/// Spectral shift function `ξ(λ) = (1/π) Σ_ℓ deg Im log det₂_ℓ(λ + i0) + correction`
/// on an increasing grid, normalized by `ξ = 0` below the spectrum. The
/// logarithm is continued from the negative axis to the first grid point
/// (and to every point `λ ≤ 0`) and unwrapped along the positive grid; a phase step above [`MAX_PHASE_STEP`] is an error.
pub fn spectral_shift(
    v: &RadialPotential,
    lambdas: &[f64],
    l_max: Option<usize>,
    disc: &Discretization,
) -> Result<Vec<SSFResult>> {
    if lambdas.is_empty() {
        return Ok(Vec::new());
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "λ grid must be strictly increasing".into(),
        ));
    }
    let top = lambdas[lambdas.len() - 1];
    let l_max = l_max.unwrap_or_else(|| default_l_max(&SpectralParam::real(top.abs()), v.cutoff()));
    let n = v.dim;
    let side = |lam: f64| {
        if lam > 0.0 {
            SpectralParam::upper(lam)
        } else {
            SpectralParam::real(lam)
        }
    };
    let mut phases = Vec::new();
    let mut out = Vec::with_capacity(lambdas.len());
    for (idx, &lam) in lambdas.iter().enumerate() {
        let plus = channel_det2(v, side(lam), l_max, disc)?;
        // below the threshold det₂ is real and changes sign at eigenvalues, so
        // each such point (and the first one above 0) is anchored on its own
        if idx == 0 || lam <= 0.0 || lambdas[idx - 1] <= 0.0 {
            phases = anchor_phases(v, side(lam), l_max, disc)?;
        } else {
            let next: Vec<f64> = plus
                .iter()
                .zip(&phases)
                .map(|(x, p)| unwrap_to(*p, *x))
                .collect();
            for (l, (a, b)) in next.iter().zip(&phases).enumerate() {
                if (a - b).abs() > MAX_PHASE_STEP {
                    return Err(Error::GridTooCoarse(format!(
                        "channel {l} phase moves by {:.3} between λ = {} and λ = {lam}",
                        a - b,
                        lambdas[idx - 1]
                    )));
                }
            }
            phases = next;
        }
        check_phase_truncation(n, &plus)?;
        let minus = if lam > 0.0 {
            channel_det2(v, SpectralParam::lower(lam), l_max, disc)?
        } else {
            plus.clone()
        };
        let correction = ssf_correction(v, lam);
        let sum: f64 = phases
            .iter()
            .enumerate()
            .map(|(l, p)| p * degeneracy(n, l) as f64)
            .sum();
        let mut plus_log = log_sum(n, &plus);
        plus_log.im = sum;
        let mut minus_log = log_sum(n, &minus);
        if lam > 0.0 {
            minus_log.im = -sum;
        }
        out.push(SSFResult {
            lambda: lam,
            xi: sum / PI + correction,
            det2_plus: plus_log.exp(),
            det2_minus: minus_log.exp(),
            correction,
        });
    }
    Ok(out)
}

/// `det S(λ) = [det₂(λ - i0)/det₂(λ + i0)] · exp(-i c(λ) ∫V dⁿx / (2π))`,
/// `c = π` for `n = 2` and `√λ` for `n = 3`.
pub fn scattering_det(
    v: &RadialPotential,
    lambda: f64,
    l_max: Option<usize>,
    disc: &Discretization,
) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "scattering determinant needs λ > 0, got {lambda}"
        )));
    }
    let l_max = l_max.unwrap_or_else(|| default_l_max(&SpectralParam::real(lambda), v.cutoff()));
    let plus = channel_det2(v, SpectralParam::upper(lambda), l_max, disc)?;
    check_phase_truncation(v.dim, &plus)?;
    let minus = channel_det2(v, SpectralParam::lower(lambda), l_max, disc)?;
    let log_ratio: Complex64 = plus
        .iter()
        .zip(&minus)
        .enumerate()
        .map(|(l, (p, m))| (m / p).ln() * degeneracy(v.dim, l) as f64)
        .sum();
    let c = if v.dim == 2 { PI } else { lambda.sqrt() };
    Ok((log_ratio - c64(0.0, c * v.volume_integral() / (2.0 * PI))).exp())
}

/// Channel-truncated `det₂(I + u R0(λ + iε) v)` for each `ε`; `ε = 0` gives
/// the outgoing boundary value. Used to check that the explicit `λ + i0`
/// kernels are the limit of the resolvent off the axis.
pub fn epsilon_sweep(
    v: &RadialPotential,
    lambda: f64,
    eps: &[f64],
    l_max: usize,
    disc: &Discretization,
) -> Result<Vec<Complex64>> {
    eps.iter()
        .map(|&e| {
            let z = if e == 0.0 {
                SpectralParam::upper(lambda)
            } else {
                SpectralParam::new(c64(lambda, e))
            };
            Ok(log_sum(v.dim, &channel_det2(v, z, l_max, disc)?).exp())
        })
        .collect()
}

/// Free regular and irregular radial solutions at `r` and their `r`-derivatives.
fn free_pair(n: u32, l: usize, k: f64, r: f64) -> Result<[f64; 4]> {
    let x = k * r;
    if n == 3 {
        let sb = spherical_bessel(c64(x, 0.0), l)?;
        let (j, y, jp, yp) = (sb.j(l).re, sb.y(l).re, sb.jp(l).re, sb.yp(l).re);
        Ok([x * j, x * y, k * (j + x * jp), k * (y + x * yp)])
    } else {
        let b = bessel_jy(l as u32, x)?;
        let s = x.sqrt();
        Ok([
            s * b.j,
            s * b.y,
            k * (b.j / (2.0 * s) + s * b.jp),
            k * (b.y / (2.0 * s) + s * b.yp),
        ])
    }
}

/// Prüfer angle of `(u, u'/σ)` at `r = a` for the regular solution of
/// `-u'' + (c/r² + V) u = λ u`, integrated in `t = ln r` by RK4 from
/// `r0 = 1e-8 a` with `u ~ r^s`.
fn prufer(
    v: Option<&RadialPotential>,
    c: f64,
    s: f64,
    lambda: f64,
    sigma: f64,
    a: f64,
    steps: usize,
) -> f64 {
    let t0 = (1e-8 * a).ln();
    let t1 = a.ln();
    let h = (t1 - t0) / steps as f64;
    let rhs = |t: f64, th: f64| {
        let r = t.exp();
        let pot = v.map_or(0.0, |v| v.value(r.min(a)));
        r * (sigma * th.cos().powi(2) + (lambda - c / (r * r) - pot) * th.sin().powi(2) / sigma)
    };
    let mut th = (sigma * t0.exp() / s).atan();
    for i in 0..steps {
        let t = t0 + h * i as f64;
        let k1 = rhs(t, th);
        let k2 = rhs(t + 0.5 * h, th + 0.5 * h * k1);
        let k3 = rhs(t + 0.5 * h, th + 0.5 * h * k2);
        let k4 = rhs(t + h, th + h * k3);
        th += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    th
}

/// Re-expresses a scale-`σ` Prüfer angle at scale `k`; multiples of π are fixed.
fn rescale_angle(th: f64, sigma: f64, k: f64) -> f64 {
    let m = (th / PI).round();
    let rest = th - m * PI;
    m * PI + ((k / sigma) * rest.tan()).atan()
}

/// Oracle: phase shift `δ_ℓ(λ)` from the radial ODE by Prüfer integration
/// and matching to free solutions at the cutoff. The branch is the one
/// closest to the difference of perturbed and free Prüfer angles.
pub fn phase_shift(v: &RadialPotential, l: usize, lambda: f64, steps: usize) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "phase shifts need λ > 0, got {lambda}"
        )));
    }
    let k = lambda.sqrt();
    let a = v.cutoff();
    let (c, s) = if v.dim == 3 {
        ((l * (l + 1)) as f64, l as f64 + 1.0)
    } else {
        ((l * l) as f64 - 0.25, l as f64 + 0.5)
    };
    // a scale of order the local wavenumber keeps the angle equation non-stiff
    let sigma = lambda.max(sup_abs(v)).max(1.0).sqrt();
    let rich = |f: f64, g: f64| (16.0 * f - g) / 15.0;
    let angle = |pot: Option<&RadialPotential>| {
        let th = rich(
            prufer(pot, c, s, lambda, sigma, a, 2 * steps),
            prufer(pot, c, s, lambda, sigma, a, steps),
        );
        rescale_angle(th, sigma, k)
    };
    let th = angle(Some(v));
    let th0 = angle(None);
    let [f1, f2, f1p, f2p] = free_pair(v.dim, l, k, a)?;
    let (u, up) = (th.sin(), k * th.cos());
    let num = f1p * u - f1 * up;
    let den = f2p * u - f2 * up;
    if num.abs() + den.abs() < 1e-300 {
        return Err(Error::Matching(format!(
            "degenerate matching for channel {l} at λ = {lambda}"
        )));
    }
    let base = (num / den).atan();
    let diff = th - th0;
    Ok(base + PI * ((diff - base) / PI).round())
}

/// Oracle: `ξ(λ) = -(1/π) Σ_ℓ deg δ_ℓ(λ)`.
pub fn xi_from_phase_shifts(
    v: &RadialPotential,
    lambda: f64,
    l_max: usize,
    steps: usize,
) -> Result<f64> {
    let mut sum = 0.0;
    for l in 0..=l_max {
        sum += degeneracy(v.dim, l) as f64 * phase_shift(v, l, lambda, steps)?;
    }
    Ok(-sum / PI)
}
