//! Branch conventions and Bessel functions for the resolvent kernels.
//!
//! Cylindrical `J_n` come from Miller's downward recurrence normalized by the
//! generating-function identity `e^{∓iw} = J_0 + 2Σ(∓i)^n J_n`, `Y_0` and
//! `Y_1` from their Neumann series in the `J_{2k}`, and higher `Y_n` from the
//! (stable) upward recurrence. Spherical functions follow the same pattern with
//! `h_ℓ^{(1)}` started from its closed forms. Arguments are complex so the same
//! code serves real boundary values and points off the real axis; accuracy is
//! best for `|Im w|` of order ten or less.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64;

use crate::{c64, Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE: f64 = 1e100;

/// Square root with `Im ≥ 0`; on `(0, ∞)` the positive root (the `λ + i0` boundary value).
pub fn sqrt_up(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im < 0.0 {
        -s
    } else {
        s
    }
}

/// Complex energy together with its branch-correct square root.
///
/// Points on `(0, ∞)` are boundary values: [`SpectralParam::upper`] carries
/// `√λ`, [`SpectralParam::lower`] carries `-√λ`, matching the limits of
/// [`sqrt_up`] from above and below the cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParam {
    z: Complex64,
    sqrt_z: Complex64,
}

impl SpectralParam {
    pub fn new(z: Complex64) -> Self {
        Self {
            z,
            sqrt_z: sqrt_up(z),
        }
    }

    pub fn real(z: f64) -> Self {
        Self::new(c64(z, 0.0))
    }

    /// Boundary value `λ + i0`.
    pub fn upper(lambda: f64) -> Self {
        Self {
            z: c64(lambda, 0.0),
            sqrt_z: sqrt_up(c64(lambda, 0.0)),
        }
    }

    /// Boundary value `λ - i0`.
    pub fn lower(lambda: f64) -> Self {
        let s = sqrt_up(c64(lambda, 0.0));
        let sqrt_z = if lambda > 0.0 { -s } else { s };
        Self {
            z: c64(lambda, 0.0),
            sqrt_z,
        }
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn sqrt(&self) -> Complex64 {
        self.sqrt_z
    }

    /// True when the square root lies in the lower half plane or on the
    /// negative real axis, i.e. the point is reached from below the cut.
    pub fn is_lower_side(&self) -> bool {
        self.sqrt_z.im < 0.0 || (self.sqrt_z.im == 0.0 && self.sqrt_z.re < 0.0)
    }

    /// Mirror image across the real axis (`λ + i0 ↔ λ - i0`).
    pub fn conj(&self) -> Self {
        Self {
            z: self.z.conj(),
            sqrt_z: -self.sqrt_z.conj(),
        }
    }
}

/// `J_n`, `Y_n` for `n = 0..=n_max` at one complex argument.
#[derive(Debug, Clone)]
pub struct CylinderBessel {
    w: Complex64,
    j: Vec<Complex64>,
    y: Vec<Complex64>,
}

impl CylinderBessel {
    pub fn j(&self, n: usize) -> Complex64 {
        self.j[n]
    }

    pub fn y(&self, n: usize) -> Complex64 {
        self.y[n]
    }

    /// `H_n^{(1)} = J_n + i Y_n`.
    pub fn h1(&self, n: usize) -> Complex64 {
        self.j[n] + c64(0.0, 1.0) * self.y[n]
    }

    pub fn jp(&self, n: usize) -> Complex64 {
        derivative(&self.j, n, self.w)
    }

    pub fn yp(&self, n: usize) -> Complex64 {
        derivative(&self.y, n, self.w)
    }

    pub fn h1p(&self, n: usize) -> Complex64 {
        self.jp(n) + c64(0.0, 1.0) * self.yp(n)
    }
}

fn derivative(f: &[Complex64], n: usize, w: Complex64) -> Complex64 {
    if n == 0 {
        -f[1]
    } else {
        f[n - 1] - f[n] * (n as f64) / w
    }
}

/// `J_0..J_{n_max}` by ascending series; used for small `|w|`.
fn j_series(w: Complex64, n_max: usize) -> Vec<Complex64> {
    let half = w / 2.0;
    let q = -(half * half);
    let mut out = Vec::with_capacity(n_max + 1);
    let mut lead = c64(1.0, 0.0); // (w/2)^n / n!
    for n in 0..=n_max {
        if n > 0 {
            lead = lead * half / n as f64;
        }
        let mut term = lead;
        let mut sum = term;
        for k in 1..60 {
            term = term * q / (k as f64 * (n + k) as f64);
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        out.push(sum);
    }
    out
}

/// `J_0..J_{n_max}` by Miller's algorithm.
fn j_miller(w: Complex64, n_max: usize) -> Vec<Complex64> {
    let scale = (n_max as f64).max(w.norm());
    let mut start = (scale + 30.0 + 3.0 * (40.0 * scale).sqrt()) as usize;
    start += start % 2;
    let mut t = vec![c64(0.0, 0.0); start + 2];
    t[start] = c64(1e-30, 0.0);
    for n in (1..=start).rev() {
        t[n - 1] = t[n] * (2.0 * n as f64) / w - t[n + 1];
        if t[n - 1].norm() > RESCALE {
            for v in t.iter_mut().skip(n - 1) {
                *v /= RESCALE;
            }
        }
    }
    let (rot, target) = if w.im >= 0.0 {
        (c64(0.0, -1.0), (c64(0.0, -1.0) * w).exp())
    } else {
        (c64(0.0, 1.0), (c64(0.0, 1.0) * w).exp())
    };
    let mut sum = t[0];
    let mut phase = c64(1.0, 0.0);
    for v in t.iter().take(start + 1).skip(1) {
        phase *= rot;
        sum += *v * phase * 2.0;
    }
    let norm = target / sum;
    t.truncate(start + 1);
    t.iter().map(|v| v * norm).collect()
}

/// Cylindrical Bessel functions of the first and second kind, orders `0..=n_max`.
pub fn cylinder_bessel(w: Complex64, n_max: usize) -> Result<CylinderBessel> {
    if w.norm() == 0.0 || !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Domain(format!(
            "Bessel argument must be finite and nonzero, got {w}"
        )));
    }
    let need = n_max.max(1) + 1;
    let j_all = if w.norm() <= 1.0 {
        j_series(w, need + 30)
    } else {
        j_miller(w, need)
    };
    let jd = |n: usize| {
        if n < j_all.len() {
            j_all[n]
        } else {
            c64(0.0, 0.0)
        }
    };

    let log_term = (w / 2.0).ln() + EULER_GAMMA;
    let mut sum_y = c64(0.0, 0.0);
    let mut sum_dy = c64(0.0, 0.0);
    let mut k = 1;
    while 2 * k + 1 < j_all.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum_y += jd(2 * k) * (sign / k as f64);
        sum_dy += (jd(2 * k - 1) - jd(2 * k + 1)) * (0.5 * sign / k as f64);
        k += 1;
    }
    let y0 = FRAC_2_PI * (log_term * jd(0)) - sum_y * (2.0 * FRAC_2_PI);
    let y0p = FRAC_2_PI * (jd(0) / w - log_term * jd(1)) - sum_dy * (2.0 * FRAC_2_PI);
    let mut y = Vec::with_capacity(need + 1);
    y.push(y0);
    y.push(-y0p);
    for n in 1..need {
        let next = y[n] * (2.0 * n as f64) / w - y[n - 1];
        if !(next.re.is_finite() && next.im.is_finite()) {
            return Err(Error::ScaledEvaluation(format!(
                "Y_{} overflows at w = {w}",
                n + 1
            )));
        }
        y.push(next);
    }
    let j: Vec<Complex64> = (0..=need).map(jd).collect();
    Ok(CylinderBessel { w, j, y })
}

/// `J_m(x)`, `Y_m(x)` and their derivatives at a real argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselJY {
    pub j: f64,
    pub y: f64,
    pub jp: f64,
    pub yp: f64,
}

pub fn bessel_jy(m: u32, x: f64) -> Result<BesselJY> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("bessel_jy needs x > 0, got {x}")));
    }
    if m > 60 {
        return Err(Error::Domain(format!(
            "bessel_jy supports m <= 60, got {m}"
        )));
    }
    let b = cylinder_bessel(c64(x, 0.0), m as usize)?;
    let m = m as usize;
    let out = BesselJY {
        j: b.j(m).re,
        y: b.y(m).re,
        jp: b.jp(m).re,
        yp: b.yp(m).re,
    };
    if !(out.y.is_finite() && out.yp.is_finite()) {
        return Err(Error::ScaledEvaluation(format!("Y_{m}({x}) overflows")));
    }
    Ok(out)
}

/// `H_0^{(1)}(x) = J_0(x) + i Y_0(x)` for real `x > 0`.
pub fn hankel0_first(x: f64) -> Result<Complex64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("hankel0_first needs x > 0, got {x}")));
    }
    let b = cylinder_bessel(c64(x, 0.0), 1)?;
    Ok(c64(b.j(0).re, b.y(0).re))
}

/// Spherical Bessel `j_ℓ` and outgoing Hankel `h_ℓ^{(1)}`, orders `0..=l_max`.
#[derive(Debug, Clone)]
pub struct SphericalBessel {
    w: Complex64,
    j: Vec<Complex64>,
    h: Vec<Complex64>,
}

impl SphericalBessel {
    pub fn j(&self, l: usize) -> Complex64 {
        self.j[l]
    }

    pub fn h(&self, l: usize) -> Complex64 {
        self.h[l]
    }

    /// `y_ℓ = (h_ℓ - j_ℓ)/i`.
    pub fn y(&self, l: usize) -> Complex64 {
        (self.h[l] - self.j[l]) * c64(0.0, -1.0)
    }

    pub fn jp(&self, l: usize) -> Complex64 {
        spherical_derivative(&self.j, l, self.w)
    }

    pub fn hp(&self, l: usize) -> Complex64 {
        spherical_derivative(&self.h, l, self.w)
    }

    pub fn yp(&self, l: usize) -> Complex64 {
        (self.hp(l) - self.jp(l)) * c64(0.0, -1.0)
    }
}

fn spherical_derivative(f: &[Complex64], l: usize, w: Complex64) -> Complex64 {
    if l == 0 {
        -f[1]
    } else {
        f[l - 1] - f[l] * ((l + 1) as f64) / w
    }
}

fn spherical_j_series(w: Complex64, l_max: usize) -> Vec<Complex64> {
    let q = -(w * w) / 2.0;
    let mut out = Vec::with_capacity(l_max + 1);
    let mut lead = c64(1.0, 0.0); // w^ℓ / (2ℓ+1)!!
    for l in 0..=l_max {
        if l > 0 {
            lead = lead * w / (2 * l + 1) as f64;
        }
        let mut term = lead;
        let mut sum = term;
        for k in 1..40 {
            term = term * q / (k as f64 * (2 * l + 2 * k + 1) as f64);
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        out.push(sum);
    }
    out
}

fn spherical_j_miller(w: Complex64, l_max: usize) -> Vec<Complex64> {
    let scale = (l_max as f64).max(w.norm());
    let start = (scale + 30.0 + 3.0 * (40.0 * scale).sqrt()) as usize;
    let mut t = vec![c64(0.0, 0.0); start + 2];
    t[start] = c64(1e-30, 0.0);
    for l in (1..=start).rev() {
        t[l - 1] = t[l] * ((2 * l + 1) as f64) / w - t[l + 1];
        if t[l - 1].norm() > RESCALE {
            for v in t.iter_mut().skip(l - 1) {
                *v /= RESCALE;
            }
        }
    }
    let j0 = w.sin() / w;
    let j1 = (w.sin() / w - w.cos()) / w;
    let norm = if j0.norm() >= j1.norm() {
        j0 / t[0]
    } else {
        j1 / t[1]
    };
    t.truncate(l_max + 1);
    t.iter().map(|v| v * norm).collect()
}

pub fn spherical_bessel(w: Complex64, l_max: usize) -> Result<SphericalBessel> {
    if w.norm() == 0.0 || !(w.re.is_finite() && w.im.is_finite()) {
        return Err(Error::Domain(format!(
            "spherical Bessel argument must be finite and nonzero, got {w}"
        )));
    }
    let need = l_max + 1;
    let j = if w.norm() < 0.5 {
        spherical_j_series(w, need)
    } else {
        spherical_j_miller(w, need)
    };
    let i = c64(0.0, 1.0);
    let e = (i * w).exp();
    let mut h = Vec::with_capacity(need + 1);
    h.push(-i * e / w);
    h.push(-e * (w + i) / (w * w));
    for l in 1..need {
        let next = h[l] * ((2 * l + 1) as f64) / w - h[l - 1];
        if !(next.re.is_finite() && next.im.is_finite()) {
            return Err(Error::ScaledEvaluation(format!(
                "h_{} overflows at w = {w}",
                l + 1
            )));
        }
        h.push(next);
    }
    Ok(SphericalBessel { w, j, h })
}
