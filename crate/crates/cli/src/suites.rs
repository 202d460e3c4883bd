use std::f64::consts::PI;

use bsdet::abstract_bs::{
    global_wa_check, isolating_radius, jordan_instance, random_normal_instance,
};
use bsdet::detcore::{det_regularized, eigenvalues, ContourSpec};
use bsdet::disk_domain::{disk_boundary_ratio, disk_determinant_ratio};
use bsdet::halfline::{
    boundary_formula_with, det_dirichlet, det_neumann, dirichlet_eigenvalues_ode,
    dirichlet_operator, jost_solution, mfunctions, neumann_operator,
};
use bsdet::potential::Potential;
use bsdet::quadrature::Discretization;
use bsdet::scattering::{default_l_max, scattering_det, spectral_shift, xi_from_phase_shifts};
use bsdet::specfun::SpectralParam;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Command, RunConfig};
use crate::table::{Cell, Table};

pub fn run(cfg: &RunConfig) -> Result<Table, String> {
    match cfg.command {
        Command::Jost => jost(cfg),
        Command::Det1d => det1d(cfg),
        Command::Ratio1d => ratio1d(cfg),
        Command::Wa => Ok(wa(cfg)),
        Command::Ssf => ssf(cfg),
        Command::Sdet => sdet(cfg),
        Command::Disk => disk(cfg),
        Command::Sweep => sweep(cfg),
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn num(x: f64) -> Cell {
    Cell::Num(x)
}

fn re_im(z: Complex64) -> [Cell; 2] {
    [num(z.re), num(z.im)]
}

fn row(parts: &[&[Cell]]) -> Vec<Cell> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

fn z_params(cfg: &RunConfig) -> Vec<SpectralParam> {
    cfg.z_points()
        .into_iter()
        .map(|x| SpectralParam::new(Complex64::new(x, cfg.z_imag)))
        .collect()
}

/// Evaluates `f` at every point on the worker pool, keeping input order.
fn par_map<T: Sync, R: Send>(points: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    points.par_iter().map(f).collect()
}

fn jost(cfg: &RunConfig) -> Result<Table, String> {
    let v = cfg.potential.build()?;
    let disc = cfg.disc();
    let mut t = Table::new(&[
        "z_re",
        "z_im",
        "det_d_re",
        "det_d_im",
        "f0_re",
        "f0_im",
        "rel_dev_d",
        "det_n_re",
        "det_n_im",
        "fp0_over_ik_re",
        "fp0_over_ik_im",
        "rel_dev_n",
    ]);
    let zs = z_params(cfg);
    let results = par_map(&zs, |&z| -> bsdet::Result<_> {
        let dd = det_dirichlet(&v, z, &disc)?;
        let dn = det_neumann(&v, z, &disc)?;
        let j = jost_solution(&v, z, cfg.intervals())?;
        Ok((dd, dn, j.f0, j.fprime0 / (Complex64::i() * z.sqrt())))
    });
    for (z, r) in zs.iter().zip(results) {
        match r {
            Ok((dd, dn, f0, g)) => {
                let (ed, en) = (rel(dd, f0), rel(dn, g));
                t.push(
                    row(&[
                        &re_im(z.z()),
                        &re_im(dd),
                        &re_im(f0),
                        &[num(ed)],
                        &re_im(dn),
                        &re_im(g),
                        &[num(en)],
                    ]),
                    ed < cfg.tol && en < cfg.tol,
                );
            }
            Err(e) => t.push_error(re_im(z.z()).to_vec(), &e.to_string()),
        }
    }
    Ok(t)
}

fn det_p(
    v: &Potential,
    z: SpectralParam,
    disc: &Discretization,
    p: u32,
    neumann: bool,
) -> bsdet::Result<Complex64> {
    disc.evaluate(0.0, v.support(), |rule| {
        let op = if neumann {
            neumann_operator(v, z, rule)?
        } else {
            dirichlet_operator(v, z, rule)?
        };
        det_regularized(&op.matrix, p)
    })
}

fn det1d(cfg: &RunConfig) -> Result<Table, String> {
    let v = cfg.potential.build()?;
    let coarse = cfg.disc();
    let fine = coarse.with_size(2 * coarse.size);
    let mut t = Table::new(&[
        "z_re",
        "z_im",
        "p",
        "det_d_re",
        "det_d_im",
        "refine_dev_d",
        "det_n_re",
        "det_n_im",
        "refine_dev_n",
    ]);
    let orders: Vec<u32> = cfg.p.map_or(vec![1, 2], |p| vec![p]);
    let jobs: Vec<(SpectralParam, u32)> = z_params(cfg)
        .into_iter()
        .flat_map(|z| orders.iter().map(move |&p| (z, p)))
        .collect();
    let results = par_map(&jobs, |&(z, p)| -> bsdet::Result<_> {
        let d = det_p(&v, z, &coarse, p, false)?;
        let d2 = det_p(&v, z, &fine, p, false)?;
        let n = det_p(&v, z, &coarse, p, true)?;
        let n2 = det_p(&v, z, &fine, p, true)?;
        // scaled so that large det₂ values near threshold are judged relatively
        let dev = |a: Complex64, b: Complex64| (a - b).norm() / b.norm().max(1.0);
        Ok((d2, dev(d, d2), n2, dev(n, n2)))
    });
    for (&(z, p), r) in jobs.iter().zip(results) {
        let lead = row(&[&re_im(z.z()), &[Cell::Int(p as i64)]]);
        match r {
            Ok((d, ed, n, en)) => t.push(
                row(&[&lead, &re_im(d), &[num(ed)], &re_im(n), &[num(en)]]),
                ed < cfg.tol && en < cfg.tol,
            ),
            Err(e) => t.push_error(lead, &e.to_string()),
        }
    }
    Ok(t)
}

fn ratio1d(cfg: &RunConfig) -> Result<Table, String> {
    let v = cfg.potential.build()?;
    let disc = cfg.disc();
    let mut t = Table::new(&[
        "z_re",
        "z_im",
        "det_ratio_re",
        "det_ratio_im",
        "m_ratio_re",
        "m_ratio_im",
        "boundary_re",
        "boundary_im",
        "dev_det_m",
        "dev_det_boundary",
        "dev_m_boundary",
    ]);
    let zs = z_params(cfg);
    let results = par_map(&zs, |&z| -> bsdet::Result<_> {
        let ratio = det_neumann(&v, z, &disc)? / det_dirichlet(&v, z, &disc)?;
        let m = mfunctions(&v, z)?;
        let b = boundary_formula_with(&v, z, cfg.intervals())?;
        Ok((ratio, m.md / m.m0d, b))
    });
    for (z, r) in zs.iter().zip(results) {
        match r {
            Ok((d, m, b)) => {
                let devs = [rel(d, m), rel(d, b), rel(m, b)];
                t.push(
                    row(&[
                        &re_im(z.z()),
                        &re_im(d),
                        &re_im(m),
                        &re_im(b),
                        &devs.map(num),
                    ]),
                    devs.iter().all(|&e| e < cfg.tol),
                );
            }
            Err(e) => t.push_error(re_im(z.z()).to_vec(), &e.to_string()),
        }
    }
    Ok(t)
}

/// Number of contours in the Weinstein–Aronszajn table.
pub const WA_CONTOURS: usize = 20;

struct WaCase {
    kind: &'static str,
    fp: bsdet::abstract_bs::FactoredPerturbation,
    contour: Result<ContourSpec, String>,
}

fn wa_cases(seed: u64) -> Vec<WaCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..WA_CONTOURS)
        .map(|c| {
            if c % 4 == 3 {
                // Jordan block of H0 at 1 with the perturbed pair nearby
                let fp = jordan_instance(&mut rng, 4, 2, 1.0, 0.3);
                let contour =
                    ContourSpec::circle(Complex64::new(1.0, 0.0), 0.9).map_err(|e| e.to_string());
                return WaCase {
                    kind: "jordan",
                    fp,
                    contour,
                };
            }
            let fp = random_normal_instance(&mut rng, 6, 1 + c % 3);
            let contour = (|| {
                let h = eigenvalues(&fp.h()).map_err(|e| e.to_string())?;
                let h0 = eigenvalues(&fp.h0).map_err(|e| e.to_string())?;
                // alternate between perturbed and free eigenvalues as centers
                let center = if c % 2 == 0 {
                    h[c % h.len()]
                } else {
                    h0[c % h0.len()]
                };
                let all: Vec<Complex64> = h.iter().chain(&h0).copied().collect();
                let r = isolating_radius(center, &all, 1e-9, 0.5).ok_or("no isolating radius")?;
                ContourSpec::circle(center, r).map_err(|e| e.to_string())
            })();
            WaCase {
                kind: "normal",
                fp,
                contour,
            }
        })
        .collect()
}

fn wa(cfg: &RunConfig) -> Table {
    let mut t = Table::new(&[
        "contour",
        "instance",
        "center_re",
        "center_im",
        "radius",
        "p",
        "lhs",
        "rhs",
    ]);
    let orders: Vec<u32> = cfg.p.map_or(vec![1, 2], |p| vec![p]);
    let cases = wa_cases(cfg.seed);
    let jobs: Vec<(usize, u32)> = (0..cases.len())
        .flat_map(|c| orders.iter().map(move |&p| (c, p)))
        .collect();
    let results = par_map(&jobs, |&(c, p)| match &cases[c].contour {
        Ok(contour) => global_wa_check(&cases[c].fp, contour, p).map_err(|e| e.to_string()),
        Err(e) => Err(e.clone()),
    });
    for (&(c, p), r) in jobs.iter().zip(results) {
        let case = &cases[c];
        let (center, radius) = case
            .contour
            .as_ref()
            .map_or((Complex64::new(f64::NAN, f64::NAN), f64::NAN), |k| {
                (k.center(), k.radius())
            });
        let lead = row(&[
            &[Cell::Int(c as i64), Cell::Text(case.kind.into())],
            &re_im(center),
            &[num(radius), Cell::Int(p as i64)],
        ]);
        match r {
            Ok(w) => t.push(
                row(&[&lead, &[Cell::Int(w.lhs), Cell::Int(w.rhs)]]),
                w.holds(),
            ),
            Err(e) => t.push_error(lead, &e),
        }
    }
    t
}

fn ssf(cfg: &RunConfig) -> Result<Table, String> {
    let v = cfg.potential.radial(cfg.dim)?;
    let lams = cfg.lambda_points();
    let top = lams.last().copied().unwrap_or(1.0);
    let l_max = cfg
        .lmax
        .unwrap_or_else(|| default_l_max(&SpectralParam::real(top.abs()), v.cutoff()));
    let mut t = Table::new(&["lambda", "xi", "xi_phase_shifts", "abs_dev", "correction"]);
    let ssf = match spectral_shift(&v, &lams, Some(l_max), &cfg.disc()) {
        Ok(s) => s,
        Err(e) => {
            t.push_error(vec![num(lams[0])], &e.to_string());
            return Ok(t);
        }
    };
    let oracle = par_map(&lams, |&lam| {
        if lam > 0.0 {
            xi_from_phase_shifts(&v, lam, l_max, cfg.ode_steps).map(Some)
        } else {
            Ok(None)
        }
    });
    for (s, o) in ssf.iter().zip(oracle) {
        match o {
            Ok(Some(x)) => {
                let dev = (s.xi - x).abs();
                t.push(
                    vec![
                        num(s.lambda),
                        num(s.xi),
                        num(x),
                        num(dev),
                        num(s.correction),
                    ],
                    dev < cfg.tol,
                );
            }
            // no phase shifts below the continuum
            Ok(None) => t.push(
                vec![
                    num(s.lambda),
                    num(s.xi),
                    num(f64::NAN),
                    num(f64::NAN),
                    num(s.correction),
                ],
                true,
            ),
            Err(e) => t.push_error(vec![num(s.lambda), num(s.xi)], &e.to_string()),
        }
    }
    Ok(t)
}

fn sdet(cfg: &RunConfig) -> Result<Table, String> {
    let v = cfg.potential.radial(cfg.dim)?;
    let lams = cfg.lambda_points();
    let disc = cfg.disc();
    let top = lams.last().copied().unwrap_or(1.0);
    let l_max = cfg
        .lmax
        .unwrap_or_else(|| default_l_max(&SpectralParam::real(top.abs()), v.cutoff()));
    let mut t = Table::new(&[
        "lambda",
        "det_s_re",
        "det_s_im",
        "unitarity_dev",
        "exp_xi_re",
        "exp_xi_im",
        "abs_dev",
    ]);
    let ssf = match spectral_shift(&v, &lams, Some(l_max), &disc) {
        Ok(s) => s,
        Err(e) => {
            t.push_error(vec![num(lams[0])], &e.to_string());
            return Ok(t);
        }
    };
    let dets = par_map(&lams, |&lam| scattering_det(&v, lam, Some(l_max), &disc));
    for (s, d) in ssf.iter().zip(dets) {
        match d {
            Ok(d) => {
                let e = Complex64::new(0.0, -2.0 * PI * s.xi).exp();
                let (u, dev) = ((d.norm() - 1.0).abs(), (d - e).norm());
                t.push(
                    row(&[
                        &[num(s.lambda)],
                        &re_im(d),
                        &[num(u)],
                        &re_im(e),
                        &[num(dev)],
                    ]),
                    u < cfg.tol && dev < cfg.tol,
                );
            }
            Err(err) => t.push_error(vec![num(s.lambda)], &err.to_string()),
        }
    }
    Ok(t)
}

fn disk(cfg: &RunConfig) -> Result<Table, String> {
    let v = cfg.potential.radial(2)?;
    let disc = cfg.disc();
    let mut t = Table::new(&[
        "z_re", "z_im", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "rel_dev",
    ]);
    let zs = z_params(cfg);
    let results = par_map(&zs, |&z| -> bsdet::Result<_> {
        Ok((
            disk_determinant_ratio(&v, z, cfg.mmax, &disc)?,
            disk_boundary_ratio(&v, z, cfg.mmax, &disc)?,
        ))
    });
    for (z, r) in zs.iter().zip(results) {
        match r {
            Ok((l, rr)) => {
                let dev = rel(l, rr);
                t.push(
                    row(&[&re_im(z.z()), &re_im(l), &re_im(rr), &[num(dev)]]),
                    dev < cfg.tol,
                );
            }
            Err(e) => t.push_error(re_im(z.z()).to_vec(), &e.to_string()),
        }
    }
    Ok(t)
}

fn sweep(cfg: &RunConfig) -> Result<Table, String> {
    let v = cfg.potential.build()?;
    let disc = cfg.disc();
    let zs = cfg.z_points();
    let eigs = dirichlet_eigenvalues_ode(&v, zs[0], cfg.ode_steps);
    let mut t = Table::new(&[
        "z",
        "det_d",
        "det_n",
        "zeros_below",
        "ode_eigenvalues_below",
    ]);
    let dets = par_map(&zs, |&z| -> bsdet::Result<_> {
        let s = SpectralParam::real(z);
        Ok((
            det_dirichlet(&v, s, &disc)?.re,
            det_neumann(&v, s, &disc)?.re,
        ))
    });
    let mut zeros = 0;
    let mut prev: Option<f64> = None;
    for (&z, d) in zs.iter().zip(dets) {
        match d {
            Ok((dd, dn)) => {
                if prev.is_some_and(|p| p.signum() != dd.signum()) {
                    zeros += 1;
                }
                prev = Some(dd);
                let ode = eigs.iter().filter(|&&e| e <= z).count();
                t.push(
                    vec![
                        num(z),
                        num(dd),
                        num(dn),
                        Cell::Int(zeros),
                        Cell::Int(ode as i64),
                    ],
                    zeros == ode as i64,
                );
            }
            Err(e) => {
                prev = None;
                t.push_error(vec![num(z)], &e.to_string());
            }
        }
    }
    Ok(t)
}
