//! Schrödinger operators on the half-line `(0, ∞)` with Dirichlet or Neumann
//! condition at `0`: Jost solutions, m-functions and Birman–Schwinger
//! determinants.
//!
//! Volterra equations are solved by trapezoidal marching on a uniform grid
//! over the potential support `[0, a]`. Writing `f = e^{ikx} f̃` turns the
//! Jost equation into
//! `f̃(x) = 1 - (2ik)^{-1} ∫_x^a (1 - e^{2ik(x'-x)}) V f̃ dx'`,
//! whose trapezoid discretization is explicit because the diagonal term
//! cancels. All grid quantities are computed at `N` and `2N` intervals and
//! combined by one Richardson step.

use crate::detcore::det_fredholm;
use crate::potential::Potential;
use crate::quadrature::{
    assemble_bs, Discretization, DiscretizedBSOperator, Extrapolate, QuadratureRule,
};
use crate::specfun::SpectralParam;
use crate::{c64, Complex64, Error, Result};

/// Default number of grid intervals for Volterra marching and Nyström rules.
pub const DEFAULT_GRID: usize = 512;

/// Maximum number of Picard sweeps before giving up.
pub const PICARD_MAX_ITER: usize = 200;

/// Picard stopping tolerance on the sup-norm update.
pub const PICARD_TOL: f64 = 1e-10;

/// The ψ normalization refuses `|f0| < GUARD·(1 + |f0'|)`.
pub const NORMALIZATION_GUARD: f64 = 1e-8;

/// Jost solution sampled on a uniform grid over `[0, a]`; beyond `a` it is
/// `e^{ikx}` exactly.
#[derive(Debug, Clone)]
pub struct JostSolution {
    pub z: SpectralParam,
    pub grid: Vec<f64>,
    pub f_values: Vec<Complex64>,
    pub fprime_values: Vec<Complex64>,
    /// `f₊(z, 0)`.
    pub f0: Complex64,
    /// `f₊'(z, 0)`.
    pub fprime0: Complex64,
}

/// Regular solutions `φ` (`φ(0) = 0, φ'(0) = 1`) and `θ` (`θ(0) = 1, θ'(0) = 0`).
#[derive(Debug, Clone)]
pub struct RegularSolutions {
    pub grid: Vec<f64>,
    pub phi: Vec<Complex64>,
    pub phi_prime: Vec<Complex64>,
    pub theta: Vec<Complex64>,
    pub theta_prime: Vec<Complex64>,
}

/// Weyl–Titchmarsh m-functions of the free and perturbed half-line operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MFunctions {
    pub m0d: Complex64,
    pub m0n: Complex64,
    pub md: Complex64,
    pub mn: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolterraMethod {
    Marching,
    Picard,
}

fn uniform_grid(a: f64, n: usize) -> Vec<f64> {
    let h = a / n as f64;
    (0..=n)
        .map(|j| if j == n { a } else { h * j as f64 })
        .collect()
}

fn check_grid(n: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "grid size must be even and at least 2, got {n}"
        )));
    }
    Ok(())
}

fn check_k(z: &SpectralParam) -> Result<Complex64> {
    let k = z.sqrt();
    if k.norm() == 0.0 {
        return Err(Error::SpectralPoint(z.z()));
    }
    Ok(k)
}

/// Scaled Jost solution `f̃` and `f̃' = e^{-ikx} f'` on one grid.
struct JostRun {
    f: Vec<Complex64>,
    fp: Vec<Complex64>,
}

fn march_jost(v: &[f64], k: Complex64, h: f64) -> JostRun {
    let n = v.len() - 1;
    let i = c64(0.0, 1.0);
    let e2 = (i * k * (2.0 * h)).exp();
    let mut f = vec![c64(0.0, 0.0); n + 1];
    let mut fp = vec![c64(0.0, 0.0); n + 1];
    f[n] = c64(1.0, 0.0);
    fp[n] = i * k;
    // a = ∫_x^a e^{2ik(x'-x)} V f̃, b = ∫_x^a V f̃, trapezoid without the x-term.
    let (mut a, mut b) = (c64(0.0, 0.0), c64(0.0, 0.0));
    for j in (0..n).rev() {
        let upper = v[j + 1] * f[j + 1] * (h / 2.0);
        a = e2 * (a + upper);
        b += upper;
        // The x_j contributions (h/2)V_j f̃_j enter a and b equally and cancel in b - a.
        f[j] = 1.0 - (b - a) / (2.0 * i * k);
        let own = v[j] * f[j] * (h / 2.0);
        a += own;
        b += own;
        fp[j] = i * k - (a + b) / 2.0;
    }
    JostRun { f, fp }
}

/// `f̃'` from given values of `f̃`, accumulated as in [`march_jost`].
fn derivative_pass(v: &[f64], k: Complex64, h: f64, f: &[Complex64]) -> Vec<Complex64> {
    let n = v.len() - 1;
    let i = c64(0.0, 1.0);
    let e2 = (i * k * (2.0 * h)).exp();
    let mut fp = vec![c64(0.0, 0.0); n + 1];
    fp[n] = i * k;
    let (mut a, mut b) = (c64(0.0, 0.0), c64(0.0, 0.0));
    for j in (0..n).rev() {
        let upper = v[j + 1] * f[j + 1] * (h / 2.0);
        a = e2 * (a + upper) + v[j] * f[j] * (h / 2.0);
        b += upper + v[j] * f[j] * (h / 2.0);
        fp[j] = i * k - (a + b) / 2.0;
    }
    fp
}

fn picard_jost(v: &[f64], k: Complex64, h: f64) -> Result<JostRun> {
    let n = v.len() - 1;
    let i = c64(0.0, 1.0);
    let e2 = (i * k * (2.0 * h)).exp();
    let mut f = vec![c64(1.0, 0.0); n + 1];
    let mut last = f64::INFINITY;
    for iter in 0..PICARD_MAX_ITER {
        let mut next = vec![c64(0.0, 0.0); n + 1];
        next[n] = c64(1.0, 0.0);
        let (mut a, mut b) = (c64(0.0, 0.0), c64(0.0, 0.0));
        for j in (0..n).rev() {
            let upper = v[j + 1] * f[j + 1] * (h / 2.0);
            a = e2 * (a + upper);
            b += upper;
            next[j] = 1.0 - (b - a) / (2.0 * i * k);
            let own = v[j] * f[j] * (h / 2.0);
            a += own;
            b += own;
        }
        let scale = next.iter().map(|x| x.norm()).fold(1.0, f64::max);
        let update = next
            .iter()
            .zip(&f)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
            / scale;
        f = next;
        if update < PICARD_TOL {
            let fp = derivative_pass(v, k, h, &f);
            return Ok(JostRun { f, fp });
        }
        if !update.is_finite() || (iter > 20 && update > 1e3 * last.max(1.0)) {
            return Err(Error::Iteration(format!(
                "Picard iteration diverged at sweep {iter}, update {update:e}"
            )));
        }
        last = update;
    }
    Err(Error::Iteration(format!(
        "Picard iteration stalled after {PICARD_MAX_ITER} sweeps, last update {last:e}"
    )))
}

fn sample(v: &Potential, grid: &[f64]) -> Vec<f64> {
    grid.iter().map(|&x| v.value(x)).collect()
}

fn richardson_on_grid(fine: &[Complex64], coarse: &[Complex64]) -> Vec<Complex64> {
    coarse
        .iter()
        .enumerate()
        .map(|(j, c)| Complex64::richardson(&fine[2 * j], c))
        .collect()
}

fn unscale(grid: &[f64], k: Complex64, f: &[Complex64]) -> Vec<Complex64> {
    grid.iter()
        .zip(f)
        .map(|(&x, v)| v * (c64(0.0, 1.0) * k * x).exp())
        .collect()
}

/// Jost solution on `n` intervals (`n` even), by backward marching.
pub fn jost_solution(v: &Potential, z: SpectralParam, n: usize) -> Result<JostSolution> {
    jost_solution_with(v, z, n, VolterraMethod::Marching)
}

pub fn jost_solution_with(
    v: &Potential,
    z: SpectralParam,
    n: usize,
    method: VolterraMethod,
) -> Result<JostSolution> {
    check_grid(n)?;
    let k = check_k(&z)?;
    let a = v.support();
    let run = |m: usize| -> Result<JostRun> {
        let grid = uniform_grid(a, m);
        let samples = sample(v, &grid);
        let h = a / m as f64;
        match method {
            VolterraMethod::Marching => Ok(march_jost(&samples, k, h)),
            VolterraMethod::Picard => picard_jost(&samples, k, h),
        }
    };
    let coarse = run(n)?;
    let fine = run(2 * n)?;
    let grid = uniform_grid(a, n);
    let f_scaled = richardson_on_grid(&fine.f, &coarse.f);
    let fp_scaled = richardson_on_grid(&fine.fp, &coarse.fp);
    let f_values = unscale(&grid, k, &f_scaled);
    let fprime_values = unscale(&grid, k, &fp_scaled);
    Ok(JostSolution {
        z,
        f0: f_values[0],
        fprime0: fprime_values[0],
        grid,
        f_values,
        fprime_values,
    })
}

/// Regular solutions by forward marching. With
/// `C(x) = ∫_0^x e^{ik(x-x')} V y`, `D(x) = ∫_0^x e^{-ik(x-x')} V y`,
/// `y = y_free + (C - D)/(2ik)` and `y' = y_free' + (C + D)/2`.
fn march_regular(
    v: &[f64],
    k: Complex64,
    h: f64,
    y0: Complex64,
    yp0: Complex64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = v.len() - 1;
    let i = c64(0.0, 1.0);
    let (ep, em) = ((i * k * h).exp(), (-i * k * h).exp());
    let free = |x: f64| {
        let (s, c) = ((k * x).sin(), (k * x).cos());
        (y0 * c + yp0 * s / k, -y0 * k * s + yp0 * c)
    };
    let mut y = vec![c64(0.0, 0.0); n + 1];
    let mut yp = vec![c64(0.0, 0.0); n + 1];
    y[0] = y0;
    yp[0] = yp0;
    let (mut cc, mut dd) = (c64(0.0, 0.0), c64(0.0, 0.0));
    for j in 0..n {
        let lower = v[j] * y[j] * (h / 2.0);
        cc = ep * (cc + lower);
        dd = em * (dd + lower);
        let (yf, ypf) = free(h * (j + 1) as f64);
        y[j + 1] = yf + (cc - dd) / (2.0 * i * k);
        let own = v[j + 1] * y[j + 1] * (h / 2.0);
        cc += own;
        dd += own;
        yp[j + 1] = ypf + (cc + dd) / 2.0;
    }
    (y, yp)
}

pub fn regular_solutions(v: &Potential, z: SpectralParam, n: usize) -> Result<RegularSolutions> {
    check_grid(n)?;
    let k = check_k(&z)?;
    let a = v.support();
    let run = |m: usize| {
        let samples = sample(v, &uniform_grid(a, m));
        let h = a / m as f64;
        let phi = march_regular(&samples, k, h, c64(0.0, 0.0), c64(1.0, 0.0));
        let theta = march_regular(&samples, k, h, c64(1.0, 0.0), c64(0.0, 0.0));
        (phi, theta)
    };
    let ((pc, ppc), (tc, tpc)) = run(n);
    let ((pf, ppf), (tf, tpf)) = run(2 * n);
    Ok(RegularSolutions {
        grid: uniform_grid(a, n),
        phi: richardson_on_grid(&pf, &pc),
        phi_prime: richardson_on_grid(&ppf, &ppc),
        theta: richardson_on_grid(&tf, &tc),
        theta_prime: richardson_on_grid(&tpf, &tpc),
    })
}

/// `W(f, g) = f g' - f' g`.
pub fn wronskian(f: Complex64, fp: Complex64, g: Complex64, gp: Complex64) -> Complex64 {
    f * gp - fp * g
}

pub fn mfunctions(v: &Potential, z: SpectralParam) -> Result<MFunctions> {
    let k = check_k(&z)?;
    let jost = jost_solution(v, z, DEFAULT_GRID)?;
    let i = c64(0.0, 1.0);
    let scale = 1.0 + jost.fprime0.norm();
    if jost.f0.norm() < 1e-14 * scale {
        return Err(Error::DirichletEigenvalue(z.z()));
    }
    if jost.fprime0.norm() < 1e-14 * (1.0 + jost.f0.norm()) {
        return Err(Error::NeumannEigenvalue(z.z()));
    }
    Ok(MFunctions {
        m0d: i * k,
        m0n: i / k,
        md: jost.fprime0 / jost.f0,
        mn: -jost.f0 / jost.fprime0,
    })
}

/// Free Dirichlet resolvent kernel `sin(k x_<) e^{ik x_>} / k`.
pub fn green_dirichlet(z: SpectralParam, x: f64, xp: f64) -> Complex64 {
    let k = z.sqrt();
    let (lo, hi) = if x <= xp { (x, xp) } else { (xp, x) };
    (k * lo).sin() * (c64(0.0, 1.0) * k * hi).exp() / k
}

/// Free Neumann resolvent kernel `cos(k x_<) e^{ik x_>} / (-ik)`.
pub fn green_neumann(z: SpectralParam, x: f64, xp: f64) -> Complex64 {
    let k = z.sqrt();
    let (lo, hi) = if x <= xp { (x, xp) } else { (xp, x) };
    (k * lo).cos() * (c64(0.0, 1.0) * k * hi).exp() / (c64(0.0, -1.0) * k)
}

/// Nyström matrix of `u G_D v` on `rule`.
pub fn dirichlet_operator(
    v: &Potential,
    z: SpectralParam,
    rule: &QuadratureRule,
) -> Result<DiscretizedBSOperator> {
    check_k(&z)?;
    assemble_bs(|x, y| v.u(x) * green_dirichlet(z, x, y) * v.v(y), rule, 1)
}

/// Nyström matrix of `u G_N v` on `rule`.
pub fn neumann_operator(
    v: &Potential,
    z: SpectralParam,
    rule: &QuadratureRule,
) -> Result<DiscretizedBSOperator> {
    check_k(&z)?;
    assemble_bs(|x, y| v.u(x) * green_neumann(z, x, y) * v.v(y), rule, 1)
}

/// `det(I + u G_D v)`, which equals the Jost function `f₊(z, 0)`.
pub fn det_dirichlet(v: &Potential, z: SpectralParam, disc: &Discretization) -> Result<Complex64> {
    disc.evaluate(0.0, v.support(), |rule| {
        det_fredholm(&dirichlet_operator(v, z, rule)?.matrix)
    })
}

/// `det(I + u G_N v)`, which equals `f₊'(z, 0)/(ik)`.
pub fn det_neumann(v: &Potential, z: SpectralParam, disc: &Discretization) -> Result<Complex64> {
    disc.evaluate(0.0, v.support(), |rule| {
        det_fredholm(&neumann_operator(v, z, rule)?.matrix)
    })
}

/// `1 + (i/k) ∫ e^{ikx} V(x) ψ(x) dx` with `ψ = f₊(z,·)/f₊(z,0)`.
pub fn boundary_formula(v: &Potential, z: SpectralParam) -> Result<Complex64> {
    boundary_formula_with(v, z, DEFAULT_GRID)
}

pub fn boundary_formula_with(v: &Potential, z: SpectralParam, n: usize) -> Result<Complex64> {
    check_grid(n)?;
    let k = check_k(&z)?;
    let a = v.support();
    let i = c64(0.0, 1.0);
    // e^{ikx} f = e^{2ikx} f̃; integrate on each grid, then extrapolate.
    let run = |m: usize| -> (Complex64, Complex64, Complex64) {
        let grid = uniform_grid(a, m);
        let samples = sample(v, &grid);
        let h = a / m as f64;
        let jr = march_jost(&samples, k, h);
        let mut integral = c64(0.0, 0.0);
        for (j, &x) in grid.iter().enumerate() {
            let w = if j == 0 || j == m { h / 2.0 } else { h };
            integral += (i * k * (2.0 * x)).exp() * samples[j] * jr.f[j] * w;
        }
        (integral, jr.f[0], jr.fp[0])
    };
    let (ic, f0c, fpc) = run(n);
    let (ifn, f0f, fpf) = run(2 * n);
    let integral = Complex64::richardson(&ifn, &ic);
    let f0 = Complex64::richardson(&f0f, &f0c);
    let fp0 = Complex64::richardson(&fpf, &fpc);
    if f0.norm() < NORMALIZATION_GUARD * (1.0 + fp0.norm()) {
        return Err(Error::DirichletEigenvalue(z.z()));
    }
    Ok(1.0 + i / k * integral / f0)
}

/// Both sides of `G_D - G_N = -(i/k) e^{ik(x+x')}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelIdentity {
    pub lhs: Complex64,
    pub rhs: Complex64,
}

impl KernelIdentity {
    pub fn deviation(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

pub fn krein_1d_check(z: SpectralParam, x: f64, xp: f64) -> Result<KernelIdentity> {
    if !(x > 0.0 && xp > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "points must be positive, got {x}, {xp}"
        )));
    }
    let k = check_k(&z)?;
    let lhs = green_dirichlet(z, x, xp) - green_neumann(z, x, xp);
    let rhs = -c64(0.0, 1.0) / k * (c64(0.0, 1.0) * k * (x + xp)).exp();
    Ok(KernelIdentity { lhs, rhs })
}

/// Classical RK4 for `-y'' + V y = z y` on `[0, a]` from `start` to `end`.
fn rk4(
    v: &Potential,
    z: Complex64,
    start: f64,
    end: f64,
    y: Complex64,
    yp: Complex64,
    steps: usize,
) -> (Complex64, Complex64) {
    let h = (end - start) / steps as f64;
    let rhs = |x: f64, y: Complex64| (v.value(x) - z) * y;
    let (mut y, mut yp) = (y, yp);
    // Sample V strictly inside each step so jumps at the end points are seen from inside.
    let at = |x: f64| x.clamp(start.min(end), start.max(end));
    for s in 0..steps {
        let x = start + h * s as f64;
        let k1 = (yp, rhs(at(x), y));
        let k2 = (
            yp + k1.1 * (h / 2.0),
            rhs(at(x + h / 2.0), y + k1.0 * (h / 2.0)),
        );
        let k3 = (
            yp + k2.1 * (h / 2.0),
            rhs(at(x + h / 2.0), y + k2.0 * (h / 2.0)),
        );
        let k4 = (yp + k3.1 * h, rhs(at(x + h), y + k3.0 * h));
        y += (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0);
        yp += (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0);
    }
    (y, yp)
}

/// Oracle: `(f₊(z,0), f₊'(z,0))` by RK4 from `x = a` with outgoing data,
/// one Richardson step on `steps` and `2·steps`.
pub fn ode_shooting(v: &Potential, z: SpectralParam, steps: usize) -> (Complex64, Complex64) {
    let k = z.sqrt();
    let a = v.support();
    let e = (c64(0.0, 1.0) * k * a).exp();
    let init = (e, c64(0.0, 1.0) * k * e);
    let coarse = rk4(v, z.z(), a, 0.0, init.0, init.1, steps);
    let fine = rk4(v, z.z(), a, 0.0, init.0, init.1, 2 * steps);
    let rich = |f: Complex64, c: Complex64| (f * 16.0 - c) / 15.0;
    (rich(fine.0, coarse.0), rich(fine.1, coarse.1))
}

/// Oracle: number of Dirichlet bound states from the zeros on `(0, ∞)` of
/// the zero-energy regular solution. Beyond the support the solution is
/// linear and has one more zero when `φ(a)φ'(a) < 0`.
pub fn dirichlet_bound_state_count(v: &Potential, steps: usize) -> usize {
    let a = v.support();
    let h = a / steps as f64;
    let (mut y, mut yp) = (c64(0.0, 0.0), c64(1.0, 0.0));
    let mut zeros = 0;
    let mut prev = 0.0f64;
    for s in 0..steps {
        let x = h * s as f64;
        let next = rk4(v, c64(0.0, 0.0), x, x + h, y, yp, 1);
        y = next.0;
        yp = next.1;
        if s > 0 && prev != 0.0 && y.re.signum() != prev.signum() {
            zeros += 1;
        }
        prev = y.re;
    }
    if y.re * yp.re < 0.0 {
        zeros += 1;
    }
    zeros
}

/// Oracle: Dirichlet eigenvalues in `[z_min, 0)` as zeros of the real Jost
/// function `f₊(-κ², 0)`, located by scanning `κ` and bisecting.
pub fn dirichlet_eigenvalues_ode(v: &Potential, z_min: f64, steps: usize) -> Vec<f64> {
    let kappa_max = (-z_min).sqrt();
    let f0 = |kappa: f64| {
        ode_shooting(v, SpectralParam::new(c64(-kappa * kappa, 0.0)), steps)
            .0
            .re
    };
    let scan = 400;
    let mut out = Vec::new();
    let mut prev_k = 1e-6 * kappa_max;
    let mut prev = f0(prev_k);
    for s in 1..=scan {
        let kk = kappa_max * s as f64 / scan as f64;
        let cur = f0(kk);
        if prev.signum() != cur.signum() {
            let (mut lo, mut hi, mut flo) = (prev_k, kk, prev);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = f0(mid);
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let kappa = 0.5 * (lo + hi);
            out.push(-kappa * kappa);
        }
        prev = cur;
        prev_k = kk;
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Zeros of the real function `z ↦ det_dirichlet(z)` on a grid over
/// `[z_min, z_max]` (both negative), counted by sign changes.
pub fn count_dirichlet_zeros(
    v: &Potential,
    z_min: f64,
    z_max: f64,
    points: usize,
    disc: &Discretization,
) -> Result<usize> {
    if !(z_min < z_max && z_max < 0.0) || points < 2 {
        return Err(Error::InvalidParameter(
            "need z_min < z_max < 0 and at least two points".into(),
        ));
    }
    let mut count = 0;
    let mut prev: Option<f64> = None;
    for s in 0..points {
        let z = z_min + (z_max - z_min) * s as f64 / (points - 1) as f64;
        let d = det_dirichlet(v, SpectralParam::real(z), disc)?.re;
        if let Some(p) = prev {
            if p.signum() != d.signum() {
                count += 1;
            }
        }
        prev = Some(d);
    }
    Ok(count)
}
