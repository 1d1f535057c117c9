use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use hkq_core::checks::{rel_delta, run_suite, CheckConfig, Suite};
use hkq_core::grassmann::{
    characteristic_angles, cotangent_defects, graph_spectrum, psi1, psi3, psi3_section,
};
use hkq_core::matcore::{herm_eig, identity};
use hkq_core::moment::level_residual;
use hkq_core::potentials::{
    evaluate, inputs_digest, k3_hat_angles, k3_hat_cotangent, k3_hat_curvature, k3_spectral,
};
use hkq_core::quotient::{in_stable1, in_stable3, project1, project3};
use hkq_core::sample::{Sampler, Space};
use hkq_core::{flat_potential, GroupPart, PotentialKind, Truncation, DEFAULT_TOL};

use crate::error::CliError;
use crate::files::{self, AnyFile, CotangentFile, MatrixFile, Metadata, PairFile, PointFile};
use crate::output::{Format, Report};

/// Relative cross-route delta above which `potential` exits with status 1.
pub const ROUTE_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "hkq",
    version,
    about = "Hyperkähler quotient toolkit: sampling, projections, maps and potentials"
)]
pub struct Cli {
    /// Membership tolerance for input points.
    #[arg(long, global = true, env = "HKQ_TOL")]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(short = 'i', long = "input", global = true)]
    pub input: Option<PathBuf>,
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a random point of the level set or a stable set.
    Sample {
        #[arg(value_enum)]
        space: SpaceArg,
        #[arg(short, long)]
        p: usize,
        #[arg(short, long)]
        q: usize,
        #[arg(short, long, allow_negative_numbers = true)]
        k: f64,
    },
    /// Move a stable point onto the level set.
    Project {
        #[arg(value_enum)]
        structure: Structure,
    },
    /// Evaluate a potential along one or all of its routes.
    Potential {
        #[arg(value_enum)]
        which: Which,
        #[arg(long, default_value = "all")]
        route: String,
    },
    /// Characteristic angles of a transversal pair.
    Angles,
    /// Map a point to the cotangent bundle (psi1) or the complexified orbit (psi3).
    Map {
        #[arg(value_enum)]
        which: MapKind,
    },
    /// Run randomized property suites.
    Check {
        #[arg(default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Print configuration, or describe an input file.
    Info,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpaceArg {
    Level,
    Stable1,
    Stable3,
}

impl From<SpaceArg> for Space {
    fn from(s: SpaceArg) -> Space {
        match s {
            SpaceArg::Level => Space::Level,
            SpaceArg::Stable1 => Space::Stable1,
            SpaceArg::Stable3 => Space::Stable3,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Structure {
    I1,
    I3,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Which {
    Flat,
    K1,
    K3,
    K3hat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MapKind {
    Psi1,
    Psi3,
}

/// Result of a command: a report for stdout, or raw file text when a command
/// writes its product to stdout instead of a path.
pub enum Output {
    Report(Report),
    File(String),
}

impl Cli {
    fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    fn input(&self) -> Result<&Path, CliError> {
        self.input
            .as_deref()
            .ok_or_else(|| CliError::Input("this command needs an input file (-i)".into()))
    }
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Input(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
    }
    match &cli.command {
        Command::Sample { space, p, q, k } => sample(cli, (*space).into(), *p, *q, *k),
        Command::Project { structure } => project(cli, *structure).map(Output::Report),
        Command::Potential { which, route } => potential(cli, *which, route).map(Output::Report),
        Command::Angles => angles(cli).map(Output::Report),
        Command::Map { which } => map(cli, *which).map(Output::Report),
        Command::Check { suite, trials } => check(cli, suite, *trials).map(Output::Report),
        Command::Info => info(cli).map(Output::Report),
    }
}

fn load_point(cli: &Cli) -> Result<hkq_core::ConfigPoint, CliError> {
    files::read_json::<PointFile>(cli.input()?)?.to_point(cli.tol())
}

fn sample(cli: &Cli, space: Space, p: usize, q: usize, k: f64) -> Result<Output, CliError> {
    let trunc = Truncation::new(p, q, k)?.with_tol(cli.tol())?;
    let pt = Sampler::new(cli.seed).point(space, trunc)?;
    let file = PointFile::from_point(
        &pt,
        Some(Metadata {
            seed: cli.seed,
            generator: format!("hkq-{} {}", env!("CARGO_PKG_VERSION"), space.name()),
        }),
    );
    let Some(out) = &cli.output else {
        return Ok(Output::File(files::to_json(&file)));
    };
    files::write_json(out, &file)?;
    let mut r = Report::default();
    r.text("space", space.name());
    r.int("p", p);
    r.int("q", q);
    r.num("k", k);
    r.num("level_residual", level_residual(&pt).max());
    r.text("output", out.display().to_string());
    Ok(Output::Report(r))
}

fn project(cli: &Cli, structure: Structure) -> Result<Report, CliError> {
    let pt = load_point(cli)?;
    let res = match structure {
        Structure::I1 => project1(&pt)?,
        Structure::I3 => project3(&pt)?,
    };
    let mut r = Report::default();
    match &res.group_part {
        GroupPart::Positive(g) => {
            r.list("g_eigenvalues", &herm_eig(&g.mat)?.eigenvalues);
            r.num(
                "g_distance_from_identity",
                (&g.mat - identity(g.dim())).norm(),
            );
        }
        GroupPart::Complex { h, u } => {
            r.list("h_eigenvalues", &herm_eig(h)?.eigenvalues);
            r.num(
                "u_distance_from_identity",
                (&u.mat - identity(u.dim())).norm(),
            );
        }
    }
    let residual = level_residual(&res.point);
    r.num("residual_complex", residual.complex);
    r.num("residual_real", residual.real);
    r.num("flat_k", flat_potential(&res.point));
    if let Some(out) = &cli.output {
        files::write_json(out, &PointFile::from_point(&res.point, None))?;
        r.text("output", out.display().to_string());
    }
    Ok(r)
}

/// Records every route value, its delta to the first, and flags the report
/// when any relative delta exceeds [`ROUTE_TOL`].
fn route_table(r: &mut Report, values: &[(&str, f64)]) {
    let reference = values[0].1;
    let mut worst: f64 = 0.0;
    for (name, v) in values {
        r.num(format!("route_{name}"), *v);
        worst = worst.max(rel_delta(*v, reference));
    }
    r.num("value", reference);
    r.num("max_relative_delta", worst);
    r.failed |= worst > ROUTE_TOL;
    r.text("consistent", if r.failed { "no" } else { "yes" });
}

fn select<'a>(available: &[&'a str], route: &str) -> Result<Vec<&'a str>, CliError> {
    if route == "all" {
        return Ok(available.to_vec());
    }
    available
        .iter()
        .find(|r| **r == route)
        .map(|r| vec![*r])
        .ok_or_else(|| {
            CliError::Input(format!(
                "unknown route `{route}`, expected one of {} or all",
                available.join(", ")
            ))
        })
}

fn potential(cli: &Cli, which: Which, route: &str) -> Result<Report, CliError> {
    let mut r = Report::default();
    let kind = match which {
        Which::Flat => PotentialKind::Flat,
        Which::K1 => PotentialKind::K1,
        Which::K3 => PotentialKind::K3,
        Which::K3hat => return potential_hat(cli, route),
    };
    let pt = load_point(cli)?;
    if kind == PotentialKind::K1 && !pt.trunc.integrality_ok() {
        log::warn!(
            "k^2/2 = {} is not a positive integer; the character term is formal",
            pt.trunc.k2() / 2.0
        );
    }
    let names: Vec<&str> = kind.routes().iter().map(|r| r.name()).collect();
    let mut values = Vec::new();
    for name in select(&names, route)? {
        let rt = *kind
            .routes()
            .iter()
            .find(|r| r.name() == name)
            .expect("selected from the list");
        values.push((name, evaluate(kind, rt, &pt)?));
    }
    r.text("potential", kind.name());
    route_table(&mut r, &values);
    r.text("inputs_digest", inputs_digest(&pt));
    Ok(r)
}

fn potential_hat(cli: &Cli, route: &str) -> Result<Report, CliError> {
    let mut r = Report::default();
    r.text("potential", "k3hat");
    let mut values = Vec::new();
    match files::read_any(cli.input()?)? {
        AnyFile::Pair(file) => {
            let pair = file.to_pair()?;
            for name in select(&["angles", "section"], route)? {
                let v = match name {
                    "angles" => k3_hat_angles(&pair, file.k)?,
                    _ => k3_spectral(&psi3_section(&pair, file.k)?)?,
                };
                values.push((name, v));
            }
        }
        AnyFile::Cotangent(file) => {
            let v = file.to_cotangent()?.tangent()?;
            for name in select(&["cotangent", "curvature"], route)? {
                let val = match name {
                    "cotangent" => k3_hat_cotangent(&v, file.k)?,
                    _ => k3_hat_curvature(&v, file.k)?,
                };
                values.push((name, val));
            }
        }
        other => {
            return Err(CliError::Input(format!(
                "k3hat needs a pair or cotangent file, got a {} file",
                other.kind()
            )))
        }
    }
    route_table(&mut r, &values);
    Ok(r)
}

fn angles(cli: &Cli) -> Result<Report, CliError> {
    let file: PairFile = files::read_json(cli.input()?)?;
    let pair = file.to_pair()?;
    let mut r = Report::default();
    r.list("theta", &characteristic_angles(&pair)?);
    let a: Vec<f64> = graph_spectrum(&pair)?.into_iter().map(f64::sqrt).collect();
    r.list("a", &a);
    r.num("k", file.k);
    r.num("k3hat", k3_hat_angles(&pair, file.k)?);
    Ok(r)
}

fn map(cli: &Cli, which: MapKind) -> Result<Report, CliError> {
    let pt = load_point(cli)?;
    let k = pt.trunc.k;
    let mut r = Report::default();
    match which {
        MapKind::Psi1 => {
            let cp = psi1(&pt)?;
            let (on_plane, off_range) = cotangent_defects(&cp.plane, &cp.eta);
            r.num("eta_on_plane", on_plane);
            r.num("eta_off_range", off_range);
            r.num("eta_norm", cp.eta.norm());
            if let Some(out) = &cli.output {
                files::write_json(out, &CotangentFile::from_cotangent(&cp, k))?;
                r.text("output", out.display().to_string());
            }
        }
        MapKind::Psi3 => {
            let img = psi3(&pt)?;
            let (on_p, on_q) = img.eigen_residuals(pt.trunc.k2());
            r.num("z_residual_p", on_p);
            r.num("z_residual_q", on_q);
            r.list("theta", &characteristic_angles(&img.pair)?);
            if let Some(out) = &cli.output {
                files::write_json(out, &PairFile::from_pair(&img.pair, k))?;
                let z_path = files::companion_path(out, "z");
                files::write_json(&z_path, &MatrixFile::from_matrix(&img.z))?;
                r.text("output", out.display().to_string());
                r.text("output_z", z_path.display().to_string());
            }
        }
    }
    Ok(r)
}

fn check(cli: &Cli, suite: &str, trials: usize) -> Result<Report, CliError> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse().map_err(CliError::Input)?]
    };
    let cfg = CheckConfig {
        trials,
        seed: cli.seed,
        tol: cli.tol(),
        ..CheckConfig::default()
    };
    // suites are independent, so they run side by side
    let reports = std::thread::scope(|scope| {
        let handles: Vec<_> = suites
            .iter()
            .map(|&s| scope.spawn(move || run_suite(s, &cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let mut r = Report::default();
    for rep in &reports {
        for prop in &rep.properties {
            let verdict = if prop.passed() { "pass" } else { "FAIL" };
            let mut line = format!(
                "{verdict} max={:e} tol={:e} n={}",
                prop.max_residual, prop.tolerance, prop.samples
            );
            if let Some(e) = &prop.error {
                line.push_str(&format!(" error={e}"));
            }
            r.text(format!("{}.{}", rep.suite, prop.name), line);
        }
        r.num(format!("{}.seconds", rep.suite), rep.elapsed.as_secs_f64());
        r.failed |= !rep.passed();
    }
    r.text("result", if r.failed { "fail" } else { "pass" });
    Ok(r)
}

fn info(cli: &Cli) -> Result<Report, CliError> {
    let mut r = Report::default();
    let Some(path) = &cli.input else {
        r.text("version", env!("CARGO_PKG_VERSION"));
        r.text("rng", "chacha8");
        r.num("default_tol", DEFAULT_TOL);
        r.num("tol", cli.tol());
        r.num("route_tol", ROUTE_TOL);
        let suites: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        r.text("suites", suites.join(","));
        r.text("potentials", "flat,k1,k3,k3hat");
        return Ok(r);
    };
    let file = files::read_any(path)?;
    r.text("file", file.kind());
    match file {
        AnyFile::Point(f) => {
            let pt = f.to_point(cli.tol())?;
            r.int("p", f.p);
            r.int("q", f.q);
            r.num("k", f.k);
            let res = level_residual(&pt);
            r.num("residual_complex", res.complex);
            r.num("residual_real", res.real);
            r.text("stable1", yes_no(in_stable1(&pt, pt.trunc.tol)));
            r.text("stable3", yes_no(in_stable3(&pt, pt.trunc.tol)));
            r.text("character_exists", yes_no(pt.trunc.integrality_ok()));
            r.text("inputs_digest", inputs_digest(&pt));
        }
        AnyFile::Pair(f) => {
            let pair = f.to_pair()?;
            r.int("p", f.p);
            r.int("q", f.q);
            r.num("k", f.k);
            r.num(
                "transversality",
                hkq_core::grassmann::transversality(&pair.p, &pair.q)?,
            );
        }
        AnyFile::Cotangent(f) => {
            let cp = f.to_cotangent()?;
            r.int("p", f.p);
            r.int("q", f.q);
            r.num("k", f.k);
            r.num("eta_norm", cp.eta.norm());
        }
        AnyFile::Matrix(f) => {
            r.int("rows", f.rows);
            r.int("cols", f.cols);
            r.num("frobenius_norm", f.to_matrix("matrix")?.norm());
        }
    }
    Ok(r)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}
