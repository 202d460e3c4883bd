//! Quadrature rules and Nyström discretization of integral kernels.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::detcore::{det_regularized, log_det_regularized};
use crate::{CMatrix, Error, Result};

/// Nodes and positive weights on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    interval: (f64, f64),
}

impl QuadratureRule {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, interval: (f64, f64)) -> Result<Self> {
        let (a, b) = interval;
        if !(a < b) {
            return Err(Error::Interval { a, b });
        }
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::InvalidParameter(
                "nodes and weights must be non-empty and of equal length".into(),
            ));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidParameter(
                "quadrature weights must be positive".into(),
            ));
        }
        if nodes.windows(2).any(|p| !(p[0] < p[1])) || nodes[0] < a || nodes[nodes.len() - 1] > b {
            return Err(Error::InvalidParameter(
                "nodes must be strictly increasing inside the interval".into(),
            ));
        }
        Ok(Self {
            nodes,
            weights,
            interval,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }

    pub fn integrate_complex<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| f(*x) * *w)
            .sum()
    }

    /// Removes a node sitting on the left endpoint. Used for radial measures
    /// `r dr` whose integrand vanishes there.
    pub fn without_left_endpoint(&self) -> Self {
        if self.nodes[0] == self.interval.0 && self.nodes.len() > 1 {
            Self {
                nodes: self.nodes[1..].to_vec(),
                weights: self.weights[1..].to_vec(),
                interval: self.interval,
            }
        } else {
            self.clone()
        }
    }
}

/// `n`-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if !(a < b) {
        return Err(Error::Interval { a, b });
    }
    if n == 0 {
        return Err(Error::InvalidParameter(
            "Gauss-Legendre rule needs n >= 1".into(),
        ));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th root of P_n, refined by Newton.
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        if d != 0.0 {
            dp = d;
        }
        let weight = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = mid - half * t;
        x[n - 1 - i] = mid + half * t;
        w[i] = half * weight;
        w[n - 1 - i] = half * weight;
    }
    if n % 2 == 1 {
        x[n / 2] = mid;
    }
    QuadratureRule::new(x, w, (a, b))
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Composite trapezoid rule with `intervals` equal steps on `[a, b]` (endpoints included).
pub fn trapezoid(intervals: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if !(a < b) {
        return Err(Error::Interval { a, b });
    }
    if intervals == 0 {
        return Err(Error::InvalidParameter(
            "trapezoid rule needs at least one interval".into(),
        ));
    }
    let h = (b - a) / intervals as f64;
    let nodes: Vec<f64> = (0..=intervals)
        .map(|i| if i == intervals { b } else { a + h * i as f64 })
        .collect();
    let weights: Vec<f64> = (0..=intervals)
        .map(|i| if i == 0 || i == intervals { h / 2.0 } else { h })
        .collect();
    QuadratureRule::new(nodes, weights, (a, b))
}

/// Composite Gauss–Legendre rule on `[0, R]` with panels halving in length toward 0.
pub fn halfline_rule(n_per_panel: usize, panels: usize, cutoff: f64) -> Result<QuadratureRule> {
    if !(cutoff > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cutoff must be positive, got {cutoff}"
        )));
    }
    if panels == 0 || n_per_panel == 0 {
        return Err(Error::InvalidParameter(
            "halfline rule needs at least one panel and one node".into(),
        ));
    }
    let mut breaks = vec![0.0];
    for k in (0..panels).rev() {
        breaks.push(cutoff / 2f64.powi(k as i32));
    }
    let mut nodes = Vec::with_capacity(n_per_panel * panels);
    let mut weights = Vec::with_capacity(n_per_panel * panels);
    for p in breaks.windows(2) {
        let panel = gauss_legendre(n_per_panel, p[0], p[1])?;
        nodes.extend_from_slice(panel.nodes());
        weights.extend_from_slice(panel.weights());
    }
    QuadratureRule::new(nodes, weights, (0.0, cutoff))
}

/// Cutoff for a truncated half-line: the smallest `R` covering the potential
/// support with kernel envelope `e^{-Im(√z) R} < 1e-12`.
pub fn default_cutoff(sqrt_z: Complex64, support: f64) -> f64 {
    let decay = sqrt_z.im;
    if decay > 0.0 {
        support.max(12.0 * std::f64::consts::LN_10 / decay)
    } else {
        support
    }
}

/// Family of rules used for kernel discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    GaussLegendre,
    Trapezoid,
}

/// Rule family, resolution and whether to Richardson-extrapolate in the step size.
///
/// Green-function kernels have a derivative jump on the diagonal. For those
/// the uniform trapezoid Nyström determinant has an error expansion in even
/// powers of the step, so one extrapolation step `(4 d_h - d_{2h})/3`
/// removes the leading `h²` term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Discretization {
    pub kind: RuleKind,
    /// Number of nodes (Gauss–Legendre) or intervals (trapezoid).
    pub size: usize,
    pub extrapolate: bool,
}

impl Discretization {
    pub fn gauss(size: usize) -> Self {
        Self {
            kind: RuleKind::GaussLegendre,
            size,
            extrapolate: false,
        }
    }

    pub fn trapezoid(size: usize) -> Self {
        Self {
            kind: RuleKind::Trapezoid,
            size,
            extrapolate: false,
        }
    }

    /// Trapezoid with one Richardson step; the default for kinked kernels.
    pub fn extrapolated(size: usize) -> Self {
        Self {
            kind: RuleKind::Trapezoid,
            size,
            extrapolate: true,
        }
    }

    pub fn rule(&self, a: f64, b: f64) -> Result<QuadratureRule> {
        match self.kind {
            RuleKind::GaussLegendre => gauss_legendre(self.size, a, b),
            RuleKind::Trapezoid => trapezoid(self.size, a, b),
        }
    }

    /// Same family at half the resolution.
    pub fn coarser(&self) -> Self {
        Self {
            size: (self.size / 2).max(1),
            ..*self
        }
    }

    pub fn with_size(&self, size: usize) -> Self {
        Self { size, ..*self }
    }

    fn uses_richardson(&self) -> bool {
        self.extrapolate && self.kind == RuleKind::Trapezoid && self.size >= 4 && self.size % 2 == 0
    }

    /// Evaluates `f` on the rule for `[a, b]`, Richardson-extrapolated when enabled.
    pub fn evaluate<T, F>(&self, a: f64, b: f64, f: F) -> Result<T>
    where
        F: Fn(&QuadratureRule) -> Result<T>,
        T: Extrapolate,
    {
        let fine = f(&self.rule(a, b)?)?;
        if !self.uses_richardson() {
            return Ok(fine);
        }
        let coarse = f(&self.coarser().rule(a, b)?)?;
        Ok(T::richardson(&fine, &coarse))
    }
}

/// Quantities that admit the `h²` Richardson combination.
pub trait Extrapolate: Sized {
    fn richardson(fine: &Self, coarse: &Self) -> Self;
}

impl Extrapolate for f64 {
    fn richardson(fine: &Self, coarse: &Self) -> Self {
        (4.0 * fine - coarse) / 3.0
    }
}

impl Extrapolate for Complex64 {
    fn richardson(fine: &Self, coarse: &Self) -> Self {
        (fine * 4.0 - coarse) / 3.0
    }
}

impl<A: Extrapolate, B: Extrapolate> Extrapolate for (A, B) {
    fn richardson(fine: &Self, coarse: &Self) -> Self {
        (
            A::richardson(&fine.0, &coarse.0),
            B::richardson(&fine.1, &coarse.1),
        )
    }
}

impl<T: Extrapolate> Extrapolate for Vec<T> {
    fn richardson(fine: &Self, coarse: &Self) -> Self {
        fine.iter()
            .zip(coarse)
            .map(|(f, c)| T::richardson(f, c))
            .collect()
    }
}

/// Symmetrized Nyström matrix `√w_i k(x_i, x_j) √w_j` with its rule.
#[derive(Debug, Clone)]
pub struct DiscretizedBSOperator {
    pub matrix: CMatrix,
    pub rule: QuadratureRule,
    pub reg_order: u32,
}

impl DiscretizedBSOperator {
    /// `det_p(I + M)`.
    pub fn det(&self) -> Result<Complex64> {
        det_regularized(&self.matrix, self.reg_order)
    }

    pub fn log_det(&self) -> Result<Complex64> {
        log_det_regularized(&self.matrix, self.reg_order)
    }
}

fn kernel_matrix<K>(
    kernel: &K,
    rule: &QuadratureRule,
    left: &[f64],
    right: &[f64],
) -> Result<CMatrix>
where
    K: Fn(f64, f64) -> Complex64 + Sync,
{
    let n = rule.len();
    let x = rule.nodes();
    let rows: Vec<Result<Vec<Complex64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let k = kernel(x[i], x[j]);
                    if k.re.is_finite() && k.im.is_finite() {
                        Ok(k * (left[i] * right[j]))
                    } else {
                        Err(Error::KernelSingularity {
                            i,
                            j,
                            x: x[i],
                            xp: x[j],
                        })
                    }
                })
                .collect()
        })
        .collect();
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row?.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// Symmetrized Nyström assembly of `kernel` on `rule`.
pub fn assemble_bs<K>(kernel: K, rule: &QuadratureRule, p: u32) -> Result<DiscretizedBSOperator>
where
    K: Fn(f64, f64) -> Complex64 + Sync,
{
    if p != 1 && p != 2 {
        return Err(Error::UnsupportedOrder(p));
    }
    let sw: Vec<f64> = rule.weights().iter().map(|w| w.sqrt()).collect();
    let matrix = kernel_matrix(&kernel, rule, &sw, &sw)?;
    Ok(DiscretizedBSOperator {
        matrix,
        rule: rule.clone(),
        reg_order: p,
    })
}

/// Unsymmetrized Nyström matrix `k(x_i, x_j) w_j`, similar to the symmetrized one.
pub fn assemble_unsymmetrized<K>(kernel: K, rule: &QuadratureRule) -> Result<CMatrix>
where
    K: Fn(f64, f64) -> Complex64 + Sync,
{
    let ones = vec![1.0; rule.len()];
    kernel_matrix(&kernel, rule, &ones, rule.weights())
}
