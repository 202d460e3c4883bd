//! Compactly supported real potentials on the half-line and radial profiles.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real potential `V` on `(0, ∞)` vanishing beyond `support`.
///
/// The same type serves as the radial profile `V(r)` of a rotationally
/// symmetric potential; see [`RadialPotential`].
#[derive(Clone)]
pub struct Potential {
    name: String,
    params: Vec<(String, f64)>,
    support: f64,
    profile: Profile,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("support", &self.support)
            .finish()
    }
}

impl Potential {
    /// Wraps an arbitrary profile; values beyond `support` are ignored.
    pub fn new<F>(name: &str, support: f64, profile: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(support > 0.0 && support.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "support must be positive and finite, got {support}"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            params: Vec::new(),
            support,
            profile: Arc::new(profile),
        })
    }

    fn with_params(mut self, params: &[(&str, f64)]) -> Self {
        self.params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        self
    }

    pub fn zero() -> Self {
        Self::new("zero", 1.0, |_| 0.0).unwrap()
    }

    /// `V = -v0` on `[0, a]`.
    pub fn square_well(v0: f64, a: f64) -> Result<Self> {
        Ok(Self::new("square_well", a, move |_| -v0)?.with_params(&[("v0", v0), ("a", a)]))
    }

    /// `V = h` on `[0, a]`.
    pub fn square_barrier(h: f64, a: f64) -> Result<Self> {
        Ok(Self::new("square_barrier", a, move |_| h)?.with_params(&[("h", h), ("a", a)]))
    }

    /// `V = amp·exp(-(x/width)²)` truncated at `cutoff`.
    pub fn gaussian_bump(amp: f64, width: f64, cutoff: f64) -> Result<Self> {
        if width <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "width must be positive, got {width}"
            )));
        }
        Ok(Self::new("gaussian", cutoff, move |x| {
            amp * (-(x / width).powi(2)).exp()
        })?
        .with_params(&[("amp", amp), ("width", width), ("cutoff", cutoff)]))
    }

    /// `V = amp·exp(-x/decay)` truncated at `cutoff`.
    pub fn truncated_exponential(amp: f64, decay: f64, cutoff: f64) -> Result<Self> {
        if decay <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "decay must be positive, got {decay}"
            )));
        }
        Ok(
            Self::new("exponential", cutoff, move |x| amp * (-x / decay).exp())?.with_params(&[
                ("amp", amp),
                ("decay", decay),
                ("cutoff", cutoff),
            ]),
        )
    }

    /// Piecewise-linear interpolation of `(x, V)` samples; the support ends at
    /// the last abscissa. Intended for experiments, not for reference runs.
    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter(
                "a tabulated potential needs at least two samples".into(),
            ));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) || points[0].0 < 0.0 {
            return Err(Error::InvalidParameter(
                "abscissae must be nonnegative and strictly increasing".into(),
            ));
        }
        if points.iter().any(|p| !p.1.is_finite()) {
            return Err(Error::InvalidParameter(
                "tabulated values must be finite".into(),
            ));
        }
        let support = points.last().unwrap().0;
        let count = points.len() as f64;
        let table = points;
        let p = Self::new("tabulated", support, move |x| interpolate(&table, x))?;
        Ok(p.with_params(&[("samples", count)]))
    }

    /// Reads two whitespace-separated columns; `#` starts a comment.
    pub fn from_table_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidParameter(format!("line {}: cannot parse {s:?}", lineno + 1))
                })
            };
            if cols.len() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "line {}: expected two columns",
                    lineno + 1
                )));
            }
            points.push((parse(cols[0])?, parse(cols[1])?));
        }
        Self::tabulated(points)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn value(&self, x: f64) -> f64 {
        if x < 0.0 || x > self.support {
            0.0
        } else {
            (self.profile)(x)
        }
    }

    /// Left factor `u = sign(V)|V|^{1/2}`.
    pub fn u(&self, x: f64) -> f64 {
        let v = self.value(x);
        v.signum() * v.abs().sqrt()
    }

    /// Right factor `v = |V|^{1/2}`.
    pub fn v(&self, x: f64) -> f64 {
        self.value(x).abs().sqrt()
    }

    /// Same profile with the coupling multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.profile.clone();
        let mut params = self.params.clone();
        params.push(("coupling".into(), c));
        Self {
            name: self.name.clone(),
            params,
            support: self.support,
            profile: Arc::new(move |x| c * inner(x)),
        }
    }

    /// `∫_0^a w(x) V(x) dx` by composite Gauss–Legendre.
    pub fn integral_with<W: Fn(f64) -> f64>(&self, weight: W) -> f64 {
        let panels = 16;
        let h = self.support / panels as f64;
        (0..panels)
            .map(|p| {
                let rule = gauss_legendre(24, p as f64 * h, (p + 1) as f64 * h).unwrap();
                rule.integrate(|x| weight(x) * self.value(x))
            })
            .sum()
    }

    pub fn l1_norm(&self) -> f64 {
        let abs = self.clone_mapped(f64::abs);
        abs.integral_with(|_| 1.0)
    }

    fn clone_mapped<G: Fn(f64) -> f64 + Send + Sync + 'static>(&self, g: G) -> Self {
        let inner = self.profile.clone();
        Self {
            name: self.name.clone(),
            params: self.params.clone(),
            support: self.support,
            profile: Arc::new(move |x| g(inner(x))),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.l1_norm() == 0.0
    }
}

fn interpolate(table: &[(f64, f64)], x: f64) -> f64 {
    if x <= table[0].0 {
        return table[0].1;
    }
    let idx = table.partition_point(|p| p.0 < x);
    if idx >= table.len() {
        return table[table.len() - 1].1;
    }
    let (x0, y0) = table[idx - 1];
    let (x1, y1) = table[idx];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Integrability data for a radial potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrability {
    /// `∫|V| dⁿx`.
    pub l1: f64,
    /// `∫|V|^{1+δ} dⁿx` (two dimensions only, else 0).
    pub l1_delta: f64,
    /// `∫(1 + |x|^δ)|V| dⁿx` (two dimensions only, else 0).
    pub weighted: f64,
    /// `∫∫ |V(x)||V(y)|/|x-y|² dx dy` (three dimensions only, else 0).
    pub rollnik: f64,
}

/// A rotationally symmetric potential `V(|x|)` on `ℝⁿ`, `n ∈ {2, 3}`.
#[derive(Debug, Clone)]
pub struct RadialPotential {
    pub profile: Potential,
    pub dim: u32,
}

impl RadialPotential {
    pub fn new(profile: Potential, dim: u32) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidParameter(format!(
                "radial potentials need n = 2 or 3, got {dim}"
            )));
        }
        Ok(Self { profile, dim })
    }

    pub fn cutoff(&self) -> f64 {
        self.profile.support()
    }

    pub fn value(&self, r: f64) -> f64 {
        self.profile.value(r)
    }

    /// Area of the unit sphere `S^{n-1}`.
    pub fn sphere_area(&self) -> f64 {
        if self.dim == 2 {
            2.0 * std::f64::consts::PI
        } else {
            4.0 * std::f64::consts::PI
        }
    }

    /// `∫_{ℝⁿ} V dⁿx`.
    pub fn volume_integral(&self) -> f64 {
        let n = self.dim as i32;
        self.sphere_area() * self.profile.integral_with(|r| r.powi(n - 1))
    }

    /// After the angular integrals the double integral reduces to
    /// `8π² ∫∫ |V(r)||V(s)| r s ln((r+s)/|r-s|) dr ds`. The two radial rules
    /// have different sizes so no node pair sits on the logarithmic diagonal.
    fn rollnik_integral(&self) -> f64 {
        let a = self.cutoff();
        let outer = gauss_legendre(200, 0.0, a).unwrap();
        let inner = gauss_legendre(201, 0.0, a).unwrap();
        let mut sum = 0.0;
        for (&r, &wr) in outer.nodes().iter().zip(outer.weights()) {
            let vr = self.value(r).abs();
            for (&s, &ws) in inner.nodes().iter().zip(inner.weights()) {
                sum += wr * ws * vr * self.value(s).abs() * r * s * ((r + s) / (r - s).abs()).ln();
            }
        }
        8.0 * std::f64::consts::PI.powi(2) * sum
    }

    pub fn integrability(&self, delta: f64) -> Integrability {
        let n = self.dim as i32;
        let area = self.sphere_area();
        let abs = self.profile.clone_mapped(f64::abs);
        let l1 = area * abs.integral_with(|r| r.powi(n - 1));
        if self.dim == 2 {
            let pow = self
                .profile
                .clone_mapped(move |v| v.abs().powf(1.0 + delta));
            Integrability {
                l1,
                l1_delta: area * pow.integral_with(|r| r),
                weighted: area * abs.integral_with(|r| (1.0 + r.powf(delta)) * r),
                rollnik: 0.0,
            }
        } else {
            Integrability {
                l1,
                l1_delta: 0.0,
                weighted: 0.0,
                rollnik: self.rollnik_integral(),
            }
        }
    }
}
