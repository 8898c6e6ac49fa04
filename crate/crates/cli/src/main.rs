//! `cmcnet`: generate, verify, transform, classify and export discrete
//! isothermic and cmc nets.
//!
//! Exit status: 0 when everything verifies, 2 when a verification fails,
//! 1 on usage or input errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use cmcnet::cmc::{christoffel, classify_cmc, cylinder, EuclideanNet};
use cmcnet::conserved::{classify_type, lcq_solve_grid, mean_curvature_data, normalize_top, pcq_verify};
use cmcnet::io::{export_obj, Metadata, Model, NetFile};
use cmcnet::isothermic::{calapso, verify_isothermic};
use cmcnet::minkowski::curvature;
use cmcnet::revolution::{build_revolution_cmc, meridian_point, space_form_q, RevolutionSpec, RotationProfile};
use cmcnet::transforms::{
    backlund_init, bianchi, darboux_propagate, pcq_backlund, pcq_darboux, calapso_pcq,
};
use cmcnet::{ConservedQuantity, GridDomain, IsothermicNet, MVector, Tol, Vertex};

type T = f64;

#[derive(Parser, Debug)]
#[command(name = "cmcnet", version, about = "Discrete isothermic and constant mean curvature nets")]
struct Cli {
    /// Relative tolerance for every check; absolute floors scale along.
    #[arg(long, global = true, env = "CMCNET_TOL")]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a net and its conserved quantity.
    #[command(subcommand)]
    Generate(Generate),
    /// Check that a net is isothermic and that its stored quantities are conserved.
    Verify {
        net: PathBuf,
        /// Also solve for a linear conserved quantity with this constant term, `Q=q0,q1,q2,q3,q4`.
        #[arg(long)]
        lcq: Option<String>,
    },
    /// Apply a transformation to a net.
    Transform(TransformArgs),
    /// Report the type of a net and the space form data of its quantities.
    Classify { net: PathBuf },
    /// Write a Wavefront OBJ mesh through a chart of the space form.
    Export {
        net: PathBuf,
        #[arg(long)]
        model: String,
        #[arg(short, long)]
        output: PathBuf,
        /// Space form vector; defaults to the constant term of the first stored quantity.
        #[arg(long)]
        q: Option<String>,
        /// Coordinate norm for vertices on the infinity boundary or the projection pole.
        #[arg(long, default_value_t = 1e6)]
        clamp: f64,
    },
}

#[derive(Subcommand, Debug)]
enum Generate {
    /// cmc surface of revolution with mean curvature H in the space form of curvature kappa.
    Revolution {
        #[arg(long = "H", allow_hyphen_values = true)]
        h: f64,
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        /// Meridian steps beyond each end of the seed edge.
        #[arg(long, default_value_t = 6)]
        steps: usize,
        /// Number of rotation steps around the full circle.
        #[arg(long, default_value_t = 12)]
        angles: usize,
        #[arg(long, default_value_t = 0)]
        branch: usize,
        /// JSON file `{"m0": [eta, rho], "m1": [eta, rho]}`.
        #[arg(long)]
        seed_edge: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Discrete circular cylinder with its parallel-net factorizer.
    Cylinder {
        #[arg(long, default_value_t = 20)]
        rows: usize,
        #[arg(long, default_value_t = 20)]
        cols: usize,
        #[arg(long, default_value_t = 0.3)]
        eta: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        phi: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[command(subcommand)]
    kind: Transform,
    /// Input net.
    #[arg(global = true, long, short)]
    input: Option<PathBuf>,
    #[arg(global = true, short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Transform {
    /// Calapso transform at spectral parameter `mu`.
    Calapso {
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
    },
    /// Darboux transform from a start point, by parallel transport.
    Darboux {
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        /// Lightlike start vector at the first vertex, five comma-separated reals.
        #[arg(long, allow_hyphen_values = true)]
        start: String,
    },
    /// Cmc-preserving Darboux transform; needs a stored quantity.
    Backlund {
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        /// Rational parameter on a circle of admissible start points.
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        s: f64,
    },
    /// Christoffel dual of the Euclidean net, integrated from the origin.
    Christoffel,
    /// Fourth net of a Bianchi quadrilateral of two Backlund transforms.
    Bianchi {
        #[arg(long, allow_hyphen_values = true)]
        mu1: f64,
        #[arg(long, allow_hyphen_values = true)]
        mu2: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        s1: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        s2: f64,
    },
}

/// A check that ran and failed; maps to exit status 2.
#[derive(Debug)]
struct VerificationFailure(String);

impl std::fmt::Display for VerificationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for VerificationFailure {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let failed = e.downcast_ref::<VerificationFailure>().is_some()
                || e.downcast_ref::<cmcnet::Error>().is_some_and(|e| {
                    !matches!(
                        e,
                        cmcnet::Error::Io(_)
                            | cmcnet::Error::Parse(_)
                            | cmcnet::Error::DimensionMismatch(_)
                            | cmcnet::Error::ModelMismatch(_)
                    )
                });
            ExitCode::from(if failed { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let tol = match cli.tol {
        Some(t) if t > 0.0 && t.is_finite() => Tol::with_rel(t),
        Some(t) => bail!(cmcnet::Error::Parse(format!("tolerance must be positive, got {t}"))),
        None => Tol::default(),
    };
    match cli.command {
        Command::Generate(g) => generate(g, tol),
        Command::Verify { net, lcq } => verify(&net, lcq.as_deref(), tol),
        Command::Transform(t) => transform(t, tol),
        Command::Classify { net } => classify(&net, tol),
        Command::Export { net, model, output, q, clamp } => export(&net, &model, &output, q.as_deref(), clamp, tol),
    }
}

fn parse_vector(s: &str) -> Result<MVector<T>> {
    let body = s.strip_prefix("Q=").unwrap_or(s);
    let vals: Vec<f64> = body
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| cmcnet::Error::Parse(format!("`{s}`: {e}")))?;
    let arr: [f64; 5] =
        vals.try_into().map_err(|_| cmcnet::Error::Parse(format!("`{s}`: expected five numbers")))?;
    Ok(MVector::new(arr))
}

/// Rounds values at roundoff level to zero so reports do not print `-0.000`.
fn tidy(x: f64) -> f64 {
    if x.abs() < 1e-12 { 0.0 } else { x }
}

fn load(path: &Path) -> Result<NetFile> {
    Ok(NetFile::load(path)?)
}

fn base_of(net: &IsothermicNet<T>) -> Vertex {
    let d = net.domain();
    Vertex::new(d.m1, d.n1)
}

fn meta_for(q: &ConservedQuantity<T>, tol: Tol<T>, construction: serde_json::Value) -> Metadata {
    let (h, kappa) = match mean_curvature_data(q, tol) {
        Ok((h, k)) => (Some(h), Some(k)),
        Err(_) => (None, None),
    };
    let construction = construction.as_object().map(|m| m.clone().into_iter().collect()).unwrap_or_default();
    Metadata { h, kappa, construction }
}

#[derive(Deserialize)]
struct SeedEdgeFile {
    m0: [f64; 2],
    m1: [f64; 2],
}

fn generate(g: Generate, tol: Tol<T>) -> Result<()> {
    match g {
        Generate::Revolution { h, kappa, steps, angles, branch, seed_edge, output } => {
            if angles < 3 {
                bail!(cmcnet::Error::Parse("--angles must be at least 3".into()));
            }
            let (e0, e1) = match &seed_edge {
                Some(p) => {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    let s: SeedEdgeFile =
                        serde_json::from_str(&text).map_err(|e| cmcnet::Error::Parse(format!("{}: {e}", p.display())))?;
                    (s.m0, s.m1)
                }
                None => ([1.0, 0.5], [1.1, 0.55]),
            };
            let step = 2.0 * std::f64::consts::PI / angles as f64;
            let spec = RevolutionSpec {
                q: space_form_q(kappa),
                h,
                m0: meridian_point(e0[0], e0[1]),
                m1: meridian_point(e1[0], e1[1]),
                steps,
                profile: RotationProfile::uniform(angles + 1, step),
                branch,
            };
            let built = build_revolution_cmc(&spec, tol)?;
            let construction = json!({
                "kind": "revolution",
                "H": h,
                "kappa": kappa,
                "steps": steps,
                "angles": angles,
                "branch": branch,
                "alpha": built.meridian.params.alpha,
                "seed_edge": [e0, e1],
            });
            let meta = meta_for(&built.quantity, tol, construction);
            NetFile::from_net(&built.net, std::slice::from_ref(&built.quantity), Some(meta)).save(&output)?;
            println!("H={:.12} kappa={:.12}", tidy(built.mean_curvature), tidy(built.kappa));
            println!("conservation residual {:.3e}", built.conservation_residual);
            if built.crosses_infinity {
                eprintln!("warning: the meridian crosses the infinity boundary");
            }
            Ok(())
        }
        Generate::Cylinder { rows, cols, eta, phi, output } => {
            if rows < 2 || cols < 2 {
                bail!(cmcnet::Error::Parse("--rows and --cols must be at least 2".into()));
            }
            let cyl = cylinder(GridDomain::sized(rows, cols), eta, phi);
            let net = cyl.isothermic(tol)?;
            let mut quantities = Vec::new();
            let mut meta = None;
            if rows >= 3 && cols >= 3 {
                let rep = lcq_solve_grid(&net, MVector::q_euclid(), None, tol)?;
                if rep.pass {
                    meta = Some(meta_for(&rep.quantity, tol, json!({"kind": "cylinder", "eta": eta, "phi": phi})));
                    quantities.push(rep.quantity);
                }
            }
            NetFile::from_net(&net, &quantities, meta).save(&output)?;
            Ok(())
        }
    }
}

fn verify(path: &Path, lcq: Option<&str>, tol: Tol<T>) -> Result<()> {
    let file = load(path)?;
    let mut failures = Vec::new();
    let lifts = file.lifts::<T>()?;
    match verify_isothermic(&lifts, tol.scaled(100.0)) {
        Ok(_) => println!("isothermic: pass"),
        Err(e) => failures.push(format!("isothermic: {e}")),
    }
    let net = file.to_net_unchecked::<T>()?;
    if failures.is_empty() {
        if let Err(e) = IsothermicNet::new(net.lifts.clone(), net.a.clone(), tol.scaled(100.0)) {
            failures.push(format!("stored factorizer: {e}"));
        }
    }
    for (k, q) in file.quantities::<T>()?.iter().enumerate() {
        let rep = pcq_verify(&net, q, tol.scaled(10.0));
        let degree = q.degree(tol).map_or("zero".to_string(), |d| d.to_string());
        println!("quantity {k}: degree {degree}, conservation residual {:.3e}", rep.max);
        if !rep.pass {
            failures.push(format!("quantity {k} is not conserved (residual {:.3e})", rep.max));
            continue;
        }
        if let Ok((h, kappa)) = mean_curvature_data(q, tol) {
            println!("quantity {k}: H={:.12} kappa={:.12}", tidy(h), tidy(kappa));
        }
    }
    if let Some(spec) = lcq {
        let q = parse_vector(spec)?;
        let rep = lcq_solve_grid(&net, q, None, tol)?;
        println!("linear solve: max incidence {:.3e}", rep.max_incidence);
        if rep.pass {
            match normalize_top(&rep.quantity, tol).and_then(|p| mean_curvature_data(&p, tol).map(|d| (p, d))) {
                Ok((_, (h, kappa))) => println!("linear solve: H={:.12} kappa={:.12}", tidy(h), tidy(kappa)),
                Err(e) => println!("linear solve: not normalizable ({e})"),
            }
        } else {
            failures.push("no linear conserved quantity with this Q".into());
        }
    }
    if failures.is_empty() {
        println!("verify: pass");
        Ok(())
    } else {
        for f in &failures {
            println!("FAIL {f}");
        }
        Err(VerificationFailure(failures.join("; ")).into())
    }
}

fn transform(args: TransformArgs, tol: Tol<T>) -> Result<()> {
    let input = args.input.ok_or_else(|| anyhow!(cmcnet::Error::Parse("--input is required".into())))?;
    let output = args.output.ok_or_else(|| anyhow!(cmcnet::Error::Parse("--output is required".into())))?;
    let file = load(&input)?;
    let net = file.to_net::<T>(tol.scaled(100.0))?;
    let quantities = file.quantities::<T>()?;
    let base = base_of(&net);
    let first = || quantities.first().ok_or_else(|| anyhow!(cmcnet::Error::Parse("net stores no conserved quantity".into())));
    let (out_net, out_q, construction) = match args.kind {
        Transform::Calapso { mu } => {
            let (frame, new_net) = calapso(&net, mu, base, tol)?;
            let qs: Vec<_> = quantities.iter().map(|q| calapso_pcq(q, &frame)).collect();
            (new_net, qs, json!({"kind": "calapso", "mu": mu}))
        }
        Transform::Darboux { mu, start } => {
            let dt = darboux_propagate(&net, mu, parse_vector(&start)?, base, tol)?;
            let qs = quantities.iter().map(|q| pcq_darboux(q, &net, &dt, tol)).collect::<cmcnet::Result<Vec<_>>>()?;
            (dt.net(&net, tol.scaled(100.0))?, qs, json!({"kind": "darboux", "mu": mu}))
        }
        Transform::Backlund { mu, s } => {
            let p = first()?;
            let x = backlund_init(&net, p, mu, s, base, tol)?;
            let bt = darboux_propagate(&net, mu, x, base, tol)?;
            let q = pcq_backlund(p, &net, &bt, tol)?;
            (bt.net(&net, tol.scaled(100.0))?, vec![q], json!({"kind": "backlund", "mu": mu, "s": s}))
        }
        Transform::Christoffel => {
            let e = EuclideanNet::from_lifts(&net, tol)?;
            let c = christoffel(&e, tol)?;
            (c.isothermic(tol.scaled(100.0))?, vec![], json!({"kind": "christoffel"}))
        }
        Transform::Bianchi { mu1, mu2, s1, s2 } => {
            let p = first()?;
            let d1 = darboux_propagate(&net, mu1, backlund_init(&net, p, mu1, s1, base, tol)?, base, tol)?;
            let d2 = darboux_propagate(&net, mu2, backlund_init(&net, p, mu2, s2, base, tol)?, base, tol)?;
            let out = bianchi(&net, &d1, &d2, Some(p), tol)?;
            let gap = out.route_gap.unwrap_or(0.0);
            println!("bianchi: cross-ratio defects {:.3e} {:.3e}, route gap {:.3e}", out.cross_ratio.0, out.cross_ratio.1, gap);
            if out.cross_ratio.0.max(out.cross_ratio.1) > tol.rel * 100.0 || gap > tol.rel * 100.0 {
                return Err(VerificationFailure("Bianchi quadrilateral does not close".into()).into());
            }
            let new_net = IsothermicNet::new(out.f12, net.a.clone(), tol.scaled(100.0))?;
            (new_net, out.quantity.into_iter().collect(), json!({"kind": "bianchi", "mu1": mu1, "mu2": mu2}))
        }
    };
    let meta = out_q.first().map(|q| meta_for(q, tol, construction.clone())).or_else(|| {
        Some(Metadata { construction: construction.as_object().unwrap().clone().into_iter().collect(), ..Default::default() })
    });
    NetFile::from_net(&out_net, &out_q, meta).save(&output)?;
    Ok(())
}

fn classify(path: &Path, tol: Tol<T>) -> Result<()> {
    let file = load(path)?;
    let net = file.to_net::<T>(tol.scaled(100.0))?;
    let quantities = file.quantities::<T>()?;
    let report = classify_type(&net, &quantities, tol);
    match (&report.sphere, report.min_degree) {
        (Some(_), _) => println!("type 0 (spherical)"),
        (None, Some(n)) => println!("type <= {n}"),
        (None, None) => println!("type unknown (no verified normalizable quantity)"),
    }
    for (k, q) in quantities.iter().enumerate() {
        match normalize_top(q, tol).and_then(|p| classify_cmc(&p, tol)) {
            Ok((label, h, kappa)) => {
                println!(
                "quantity {k}: {label} H={:.12} kappa={:.12} H^2+kappa={:.12}",
                tidy(h),
                tidy(kappa),
                tidy(h * h + kappa)
            )
            }
            Err(e) => println!("quantity {k}: {e}"),
        }
    }
    Ok(())
}

fn export(path: &Path, model: &str, output: &Path, q: Option<&str>, clamp: f64, tol: Tol<T>) -> Result<()> {
    let model: Model = model.parse()?;
    let file = load(path)?;
    let net = file.to_net_unchecked::<T>()?;
    let q = match q {
        Some(s) => parse_vector(s)?,
        None => file
            .quantities::<T>()?
            .first()
            .map(|p| p.constant(base_of(&net)))
            .unwrap_or_else(MVector::q_euclid),
    };
    let report = export_obj(&net, q, model, clamp, output, tol)?;
    println!(
        "exported {} vertices, {} faces, {} flagged (kappa = {:.6})",
        report.vertices,
        report.faces,
        report.flagged.len(),
        tidy(curvature(&q))
    );
    Ok(())
}
