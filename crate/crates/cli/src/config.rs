use std::fmt;
use std::path::PathBuf;

use bsdet::potential::{Potential, RadialPotential};
use bsdet::quadrature::Discretization;
use clap::{Parser, ValueEnum};

use crate::table::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Dirichlet/Neumann determinants against the Jost function
    Jost,
    /// Regularized 1D determinants and their grid refinement
    Det1d,
    /// Neumann/Dirichlet ratio, m-function ratio and boundary formula
    Ratio1d,
    /// Weinstein–Aronszajn multiplicity counts on seeded instances
    Wa,
    /// Spectral shift function against the phase-shift sum
    Ssf,
    /// Scattering determinant against exp(-2πiξ)
    Sdet,
    /// Disk Dirichlet/Neumann ratio against its boundary form
    Disk,
    /// Zeros of the Dirichlet determinant against ODE bound states
    Sweep,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().unwrap().get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "bsdet",
    version,
    about = "Birman–Schwinger determinant verification suites"
)]
pub struct Args {
    /// Suite to run (alternatively `--command`)
    #[arg(value_enum)]
    pub suite: Option<Command>,
    #[arg(long, value_enum)]
    pub command: Option<Command>,
    /// zero, square_well, square_barrier, gaussian, exponential or table:PATH
    #[arg(long)]
    pub potential: Option<String>,
    /// Potential parameter, repeatable (`--param v0=4 --param a=1`)
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[arg(long, allow_negative_numbers = true)]
    pub z_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub z_stop: Option<f64>,
    #[arg(long)]
    pub z_count: Option<usize>,
    /// Constant imaginary offset added to every point of the z grid
    #[arg(long, allow_negative_numbers = true)]
    pub z_imag: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_stop: Option<f64>,
    #[arg(long)]
    pub lambda_count: Option<usize>,
    /// Grid intervals per panel
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Number of panels; the Nyström grid has nodes × panels intervals
    #[arg(long, default_value_t = 1)]
    pub panels: usize,
    /// Truncation radius for potentials with a `cutoff` parameter
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub lmax: Option<usize>,
    #[arg(long)]
    pub mmax: Option<usize>,
    /// Regularization order
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub p: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = bsdet::DEFAULT_SEED)]
    pub seed: u64,
    /// Tolerance for the suite's assertions
    #[arg(long)]
    pub tol: Option<f64>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse {v:?} as a number"))?;
    Ok((k.trim().to_string(), v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + h * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct PotentialSpec {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub table: Option<PathBuf>,
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential, String> {
        let get = |k: &str| {
            self.params
                .iter()
                .find(|(n, _)| n == k)
                .map(|p| p.1)
                .unwrap()
        };
        let p = match self.name.as_str() {
            "zero" => Ok(Potential::zero()),
            "square_well" => Potential::square_well(get("v0"), get("a")),
            "square_barrier" => Potential::square_barrier(get("h"), get("a")),
            "gaussian" => Potential::gaussian_bump(get("amp"), get("width"), get("cutoff")),
            "exponential" => {
                Potential::truncated_exponential(get("amp"), get("decay"), get("cutoff"))
            }
            "table" => Potential::from_table_file(self.table.as_ref().unwrap()),
            other => return Err(format!("unknown potential {other:?}")),
        };
        p.map_err(|e| e.to_string())
    }

    pub fn radial(&self, dim: u32) -> Result<RadialPotential, String> {
        RadialPotential::new(self.build()?, dim).map_err(|e| e.to_string())
    }
}

/// Fully resolved run: every default filled in.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub potential: PotentialSpec,
    /// Spatial dimension for the radial suites.
    pub dim: u32,
    pub z_grid: Option<Grid>,
    pub z_imag: f64,
    pub lambda_grid: Option<Grid>,
    pub nodes: usize,
    pub panels: usize,
    pub lmax: Option<usize>,
    pub mmax: usize,
    pub p: Option<u32>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub tol: f64,
    /// Integration steps of the ODE oracles.
    pub ode_steps: usize,
}

impl RunConfig {
    pub fn intervals(&self) -> usize {
        self.nodes * self.panels
    }

    pub fn disc(&self) -> Discretization {
        Discretization::extrapolated(self.intervals())
    }

    pub fn z_points(&self) -> Vec<f64> {
        self.z_grid.map(|g| g.points()).unwrap_or_default()
    }

    pub fn lambda_points(&self) -> Vec<f64> {
        self.lambda_grid.map(|g| g.points()).unwrap_or_default()
    }

    /// Ordered key/value echo written alongside every table.
    pub fn echo(&self) -> Vec<(String, Cell)> {
        let mut out = vec![
            ("command".to_string(), Cell::Text(self.command.to_string())),
            (
                "potential".to_string(),
                Cell::Text(self.potential.name.clone()),
            ),
        ];
        if let Some(t) = &self.potential.table {
            out.push((
                "potential.table".into(),
                Cell::Text(t.display().to_string()),
            ));
        }
        for (k, v) in &self.potential.params {
            out.push((format!("potential.{k}"), Cell::Num(*v)));
        }
        if matches!(self.command, Command::Ssf | Command::Sdet) {
            out.push(("dim".into(), Cell::Int(self.dim as i64)));
        }
        if let Some(g) = self.z_grid {
            out.push(("z_start".into(), Cell::Num(g.start)));
            out.push(("z_stop".into(), Cell::Num(g.stop)));
            out.push(("z_count".into(), Cell::Int(g.count as i64)));
            out.push(("z_imag".into(), Cell::Num(self.z_imag)));
        }
        if let Some(g) = self.lambda_grid {
            out.push(("lambda_start".into(), Cell::Num(g.start)));
            out.push(("lambda_stop".into(), Cell::Num(g.stop)));
            out.push(("lambda_count".into(), Cell::Int(g.count as i64)));
        }
        if self.command != Command::Wa {
            out.push(("nodes".into(), Cell::Int(self.nodes as i64)));
            out.push(("panels".into(), Cell::Int(self.panels as i64)));
            out.push(("richardson".into(), Cell::Text("on".into())));
        }
        match self.command {
            Command::Ssf | Command::Sdet => {
                let l = self
                    .lmax
                    .map_or(Cell::Text("auto".into()), |l| Cell::Int(l as i64));
                out.push(("lmax".into(), l));
            }
            Command::Disk => out.push(("mmax".into(), Cell::Int(self.mmax as i64))),
            Command::Det1d | Command::Wa => {
                let p = self
                    .p
                    .map_or(Cell::Text("1,2".into()), |p| Cell::Int(p as i64));
                out.push(("p".into(), p));
            }
            _ => {}
        }
        if matches!(self.command, Command::Ssf | Command::Sweep | Command::Disk) {
            out.push(("ode_steps".into(), Cell::Int(self.ode_steps as i64)));
        }
        out.push(("seed".into(), Cell::Int(self.seed as i64)));
        out.push(("tol".into(), Cell::Num(self.tol)));
        out.push((
            "format".into(),
            Cell::Text(format!("{:?}", self.format).to_lowercase()),
        ));
        out
    }
}

struct Defaults {
    potential: &'static str,
    params: &'static [(&'static str, f64)],
    z: Option<Grid>,
    lambda: Option<Grid>,
    nodes: usize,
    tol: f64,
}

fn defaults(cmd: Command) -> Defaults {
    let well2 = &[("v0", 2.0), ("a", 1.0)];
    let z1d = Some(Grid {
        start: -5.0,
        stop: -0.1,
        count: 20,
    });
    let lam = Some(Grid {
        start: 0.1,
        stop: 10.0,
        count: 50,
    });
    match cmd {
        Command::Jost => Defaults {
            potential: "square_well",
            params: well2,
            z: z1d,
            lambda: None,
            nodes: 512,
            tol: 1e-7,
        },
        Command::Det1d => Defaults {
            potential: "square_well",
            params: well2,
            z: z1d,
            lambda: None,
            nodes: 256,
            tol: 1e-8,
        },
        Command::Ratio1d => Defaults {
            potential: "square_well",
            params: well2,
            z: z1d,
            lambda: None,
            nodes: 512,
            tol: 1e-8,
        },
        Command::Wa => Defaults {
            potential: "zero",
            params: &[],
            z: None,
            lambda: None,
            nodes: 128,
            tol: 0.0,
        },
        Command::Ssf => Defaults {
            potential: "square_well",
            params: &[("v0", 1.0), ("a", 1.0)],
            z: None,
            lambda: lam,
            nodes: 128,
            tol: 1e-3,
        },
        Command::Sdet => Defaults {
            potential: "square_well",
            params: &[("v0", 1.0), ("a", 1.0)],
            z: None,
            lambda: lam,
            nodes: 128,
            tol: 1e-6,
        },
        Command::Disk => Defaults {
            potential: "gaussian",
            params: &[("amp", 3.0), ("width", 0.3), ("cutoff", 0.5)],
            z: Some(Grid {
                start: -6.0,
                stop: -1.0,
                count: 5,
            }),
            lambda: None,
            nodes: 128,
            tol: 1e-4,
        },
        Command::Sweep => Defaults {
            potential: "square_well",
            params: &[("v0", 25.0), ("a", 1.0)],
            z: Some(Grid {
                start: -26.0,
                stop: -1e-3,
                count: 200,
            }),
            lambda: None,
            nodes: 128,
            tol: 0.0,
        },
    }
}

fn param_names(name: &str) -> Option<&'static [(&'static str, f64)]> {
    Some(match name {
        "zero" | "table" => &[],
        "square_well" => &[("v0", 2.0), ("a", 1.0)],
        "square_barrier" => &[("h", 1.0), ("a", 1.0)],
        "gaussian" => &[("amp", 1.0), ("width", 0.5), ("cutoff", 3.0)],
        "exponential" => &[("amp", 1.0), ("decay", 0.5), ("cutoff", 5.0)],
        _ => return None,
    })
}

fn grid(
    name: &str,
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
    default: Option<Grid>,
) -> Result<Option<Grid>, String> {
    let given = start.is_some() || stop.is_some() || count.is_some();
    let Some(d) = default else {
        if given {
            return Err(format!("this command takes no {name} grid"));
        }
        return Ok(None);
    };
    let g = Grid {
        start: start.unwrap_or(d.start),
        stop: stop.unwrap_or(d.stop),
        count: count.unwrap_or(d.count),
    };
    if g.count == 0 {
        return Err(format!("--{name}-count must be positive"));
    }
    if !(g.start.is_finite() && g.stop.is_finite()) {
        return Err(format!("{name} grid bounds must be finite"));
    }
    if g.count > 1 && !(g.stop > g.start) {
        return Err(format!(
            "{name} grid must be increasing: start {} stop {}",
            g.start, g.stop
        ));
    }
    Ok(Some(g))
}

/// Resolves CLI arguments into a complete configuration, or a usage message.
pub fn resolve(args: Args) -> Result<RunConfig, String> {
    let command = match (args.suite, args.command) {
        (Some(a), Some(b)) if a != b => return Err(format!("conflicting commands {a} and {b}")),
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err("no command given".into()),
    };
    let d = defaults(command);

    if command == Command::Wa
        && (args.potential.is_some() || !args.params.is_empty() || args.cutoff.is_some())
    {
        return Err("wa runs on seeded matrix instances and takes no potential".into());
    }
    let radial = matches!(command, Command::Ssf | Command::Sdet);
    let mut dim = 3;
    let mut user_params = Vec::new();
    for (k, v) in args.params {
        if k == "n" && radial {
            if v != 2.0 && v != 3.0 {
                return Err(format!("dimension n must be 2 or 3, got {v}"));
            }
            dim = v as u32;
        } else {
            user_params.push((k, v));
        }
    }

    let pot_arg = args.potential.unwrap_or_else(|| d.potential.to_string());
    let (name, table) = match pot_arg.split_once(':') {
        Some(("table", path)) => ("table".to_string(), Some(PathBuf::from(path))),
        _ => (pot_arg.clone(), None),
    };
    let known = param_names(&name).ok_or_else(|| format!("unknown potential {name:?}"))?;
    let base: &[(&str, f64)] = if name == d.potential { d.params } else { known };
    let mut params: Vec<(String, f64)> = base.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in user_params {
        match params.iter_mut().find(|(n, _)| *n == k) {
            Some(slot) => slot.1 = v,
            None => return Err(format!("potential {name} has no parameter {k:?}")),
        }
    }
    if let Some(c) = args.cutoff {
        match params.iter_mut().find(|(n, _)| n == "cutoff") {
            Some(slot) => slot.1 = c,
            None => return Err(format!("potential {name} has no cutoff parameter")),
        }
    }
    let potential = PotentialSpec {
        name,
        params,
        table,
    };
    if command != Command::Wa {
        potential.build()?;
    }

    let z_grid = grid("z", args.z_start, args.z_stop, args.z_count, d.z)?;
    let lambda_grid = grid(
        "lambda",
        args.lambda_start,
        args.lambda_stop,
        args.lambda_count,
        d.lambda,
    )?;
    if args.z_imag.is_some() && z_grid.is_none() {
        return Err("--z-imag needs a z grid".into());
    }
    let z_imag = args.z_imag.unwrap_or(0.0);
    if command == Command::Sweep && (z_imag != 0.0 || z_grid.is_some_and(|g| g.stop >= 0.0)) {
        return Err(
            "sweep counts zeros on the negative real axis: z grid must be real and below 0".into(),
        );
    }
    if command == Command::Disk && z_imag == 0.0 && z_grid.is_some_and(|g| g.stop >= 0.0) {
        return Err("disk: real z must stay below the free Dirichlet spectrum (z < 0)".into());
    }
    if command == Command::Sdet && lambda_grid.is_some_and(|g| g.start <= 0.0) {
        return Err("sdet needs λ > 0".into());
    }
    if args.lmax.is_some() && !radial {
        return Err("--lmax only applies to ssf and sdet".into());
    }
    if args.mmax.is_some() && command != Command::Disk {
        return Err("--mmax only applies to disk".into());
    }
    if args.p.is_some() && !matches!(command, Command::Det1d | Command::Wa) {
        return Err("--p only applies to det1d and wa".into());
    }
    let nodes = args.nodes.unwrap_or(d.nodes);
    if args.panels == 0 || nodes < 4 || (nodes * args.panels) % 2 != 0 {
        return Err("nodes × panels must be even and at least 4".into());
    }
    if let Some(t) = args.tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(format!("tolerance must be nonnegative, got {t}"));
        }
    }
    Ok(RunConfig {
        command,
        potential,
        dim,
        z_grid,
        z_imag,
        lambda_grid,
        nodes,
        panels: args.panels,
        lmax: args.lmax,
        mmax: args.mmax.unwrap_or(20),
        p: args.p,
        format: args.format,
        out: args.out,
        seed: args.seed,
        tol: args.tol.unwrap_or(d.tol),
        ode_steps: 4000,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(argv: &[&str]) -> Result<RunConfig, String> {
        let mut full = vec!["bsdet"];
        full.extend_from_slice(argv);
        resolve(Args::try_parse_from(full).map_err(|e| e.to_string())?)
    }

    #[test]
    fn defaults_resolved() {
        let c = parse(&["jost"]).unwrap();
        assert_eq!(c.nodes, 512);
        assert_eq!(c.z_points().len(), 20);
        assert_eq!(c.z_points()[0], -5.0);
        assert_eq!(c.z_points()[19], -0.1);
        assert_eq!(
            c.potential.params,
            vec![("v0".to_string(), 2.0), ("a".to_string(), 1.0)]
        );
    }

    #[test]
    fn flag_form_and_overrides() {
        let c = parse(&[
            "--command",
            "ssf",
            "--param",
            "n=2",
            "--param",
            "v0=4",
            "--lambda-count",
            "3",
        ])
        .unwrap();
        assert_eq!(c.dim, 2);
        assert_eq!(c.potential.params[0].1, 4.0);
        assert_eq!(c.lambda_points(), vec![0.1, 5.05, 10.0]);
    }

    #[test]
    fn invalid_combinations() {
        assert!(parse(&["jost", "--lambda-count", "4"]).is_err());
        assert!(parse(&["ssf", "--mmax", "3"]).is_err());
        assert!(parse(&["jost", "--z-start", "1", "--z-stop", "-1"]).is_err());
        assert!(parse(&["jost", "--param", "width=1"]).is_err());
        assert!(parse(&["jost", "--z-count", "0"]).is_err());
        assert!(parse(&["wa", "--potential", "zero"]).is_err());
        assert!(parse(&["jost", "--command", "ssf"]).is_err());
        assert!(parse(&["sweep", "--z-stop", "1"]).is_err());
        assert!(parse(&[]).is_err());
    }

    #[test]
    fn cutoff_applies_to_cutoff_parameter() {
        let c = parse(&["jost", "--potential", "gaussian", "--cutoff", "2.5"]).unwrap();
        assert!(c.potential.params.contains(&("cutoff".to_string(), 2.5)));
        assert!(parse(&["jost", "--cutoff", "2.5"]).is_err());
    }
}
