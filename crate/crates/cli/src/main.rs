//! `semiharm`: scenario-driven front end for the covering-space harmonic
//! analysis laboratory.
//!
//! Exit codes: 0 all contracts pass, 1 a numerical contract failed,
//! 2 input/configuration error.

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;
use std::path::{Path, PathBuf};

use semiharm_core::catalog;
use semiharm_core::classify::{self, Verdict};
use semiharm_core::covering::{BasePt, CoverPoint, CoveringMap, CoveringSpec, DEFAULT_SEED};
use semiharm_core::expr::{parse, Expr};
use semiharm_core::fields::ScalarField;
use semiharm_core::harmpoly;
use semiharm_core::means::{self, Resolution};
use semiharm_core::residue;
use semiharm_core::verify;

const EXIT_CONTRACT: i32 = 1;
const EXIT_INPUT: i32 = 2;

#[derive(Parser)]
#[command(name = "semiharm", version, about = "Harmonic analysis on branched polynomial coverings of balls in C^m")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario JSON file (unknown keys rejected).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Spherical quadrature nodes (radial count is derived); defaults per m.
    #[arg(long)]
    nodes: Option<usize>,
    /// Seed for all randomized sampling.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Contract tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory for report files (stdout only when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker pool size (default: logical cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solid and spherical means plus the mean-gap identity, as CSV.
    Means(Common),
    /// Harmonic-residue radius scan against the closed form, as CSV.
    Residue {
        #[command(flatten)]
        common: Common,
        /// Logarithm exponent of the singular family.
        #[arg(long)]
        alpha: Option<u32>,
        /// Even singular power of the singular family.
        #[arg(long)]
        s: Option<u32>,
    },
    /// Semi-harmonicity classification report, as JSON (exit 1 unless semi-harmonic).
    Classify(Common),
    /// Exact harmonic decomposition of a homogeneous polynomial, as JSON.
    Decompose(Common),
    /// Neumann-data check for a polynomial example, as JSON.
    Neumann(Common),
    /// Full invariant verification suite with traceability table, as JSON.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Reduced quadrature resolution (fast smoke run).
        #[arg(long)]
        fast: bool,
    },
}

/// One scenario file drives one operation; unknown keys are rejected.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct Scenario {
    /// Must match the subcommand when present.
    operation: Option<String>,
    /// Inline covering specification.
    covering: Option<CoveringSpec>,
    /// Or a catalog covering by label (e.g. "w^2-z").
    covering_name: Option<String>,
    /// Field expression over z1, z2, w.
    field: Option<String>,
    /// Base coordinates of the centers, 2m reals each.
    centers: Option<Vec<Vec<f64>>>,
    radii: Option<Vec<f64>>,
    /// Residue-family exponents and numerator.
    alpha: Option<u32>,
    s: Option<u32>,
    h: Option<String>,
    tol: Option<f64>,
    nodes: Option<usize>,
    seed: Option<u64>,
    /// Homogeneous polynomial over x1..xn (decompose / neumann).
    polynomial: Option<String>,
    n_vars: Option<usize>,
    /// Boundary sample count (neumann).
    samples: Option<usize>,
    /// Output file name inside --out (defaults per subcommand).
    output: Option<String>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(msg: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INPUT,
            message: msg.into(),
        }
    }
    fn contract(msg: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_CONTRACT,
            message: msg.into(),
        }
    }
}

impl From<semiharm_core::Error> for Failure {
    fn from(e: semiharm_core::Error) -> Failure {
        Failure::input(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (common, op, fast): (&Common, &str, bool) = match &cli.command {
        Command::Means(c) => (c, "means", false),
        Command::Residue { common, .. } => (common, "residue", false),
        Command::Classify(c) => (c, "classify", false),
        Command::Decompose(c) => (c, "decompose", false),
        Command::Neumann(c) => (c, "neumann", false),
        Command::Verify { common, fast } => (common, "verify", *fast),
    };
    if let Some(workers) = common.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Failure::input(format!("worker pool: {e}")))?;
    }
    let scenario = load_scenario(common)?;
    if let Some(declared) = &scenario.operation {
        if declared != op {
            return Err(Failure::input(format!(
                "scenario declares operation `{declared}` but the `{op}` subcommand was invoked"
            )));
        }
    }
    let seed = scenario.seed.unwrap_or(common.seed);
    let nodes = common.nodes.or(scenario.nodes);
    let tol = common.tol.or(scenario.tol);
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(Failure::input("tolerance must be positive"));
        }
    }

    match op {
        "means" => cmd_means(&scenario, common, nodes, tol),
        "residue" => {
            let (alpha, s) = match &cli.command {
                Command::Residue { alpha, s, .. } => (*alpha, *s),
                _ => unreachable!(),
            };
            cmd_residue(&scenario, common, nodes, tol, alpha, s)
        }
        "classify" => cmd_classify(&scenario, common, nodes, tol),
        "decompose" => cmd_decompose(&scenario, common),
        "neumann" => cmd_neumann(&scenario, common, seed),
        "verify" => cmd_verify(common, seed, fast),
        _ => unreachable!(),
    }
}

fn load_scenario(common: &Common) -> Result<Scenario, Failure> {
    match &common.scenario {
        None => Ok(Scenario::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
        }
    }
}

fn covering_of(scenario: &Scenario) -> Result<CoveringMap, Failure> {
    match (&scenario.covering, &scenario.covering_name) {
        (Some(spec), None) => Ok(CoveringMap::from_spec(spec)?),
        (None, Some(name)) => catalog::by_name(name)
            .ok_or_else(|| Failure::input(format!("unknown catalog covering `{name}`"))),
        (None, None) => Ok(catalog::identity1()),
        (Some(_), Some(_)) => Err(Failure::input(
            "give either `covering` or `covering_name`, not both",
        )),
    }
}

fn resolution_for(m: usize, nodes: Option<usize>) -> Resolution {
    match nodes {
        None => Resolution::default_for(m),
        Some(n) => Resolution {
            sphere_n: n.max(4),
            radial_n: (n / 4).max(8),
        },
    }
}

fn centers_of(scenario: &Scenario, cov: &CoveringMap) -> Result<Vec<CoverPoint>, Failure> {
    let raw = scenario
        .centers
        .clone()
        .unwrap_or_else(|| vec![vec![0.0; 2 * cov.m()]]);
    let mut out = Vec::new();
    for c in &raw {
        if c.len() != 2 * cov.m() {
            return Err(Failure::input(format!(
                "each center needs {} real coordinates, got {}",
                2 * cov.m(),
                c.len()
            )));
        }
        let z = BasePt::from_reals(cov.m(), c);
        // Deterministic fiber choice: the lexicographically largest root.
        let fiber = cov.fiber(&z)?;
        let (w, _) = *fiber.last().ok_or_else(|| Failure::input("empty fiber"))?;
        out.push(CoverPoint::unchecked(z, w));
    }
    Ok(out)
}

fn radii_of(scenario: &Scenario, cov: &CoveringMap, centers: &[CoverPoint]) -> Result<Vec<f64>, Failure> {
    let radii = scenario.radii.clone().unwrap_or_else(|| vec![0.2, 0.4]);
    for r in &radii {
        if !(*r > 0.0) {
            return Err(Failure::input("radii must be positive"));
        }
        for a in centers {
            let dist = a.base.dist(&cov.base_center());
            if dist + r >= cov.base_radius() {
                return Err(Failure::input(format!(
                    "radius {r} around a center at distance {dist:.3} escapes the base ball of radius {}",
                    cov.base_radius()
                )));
            }
        }
    }
    Ok(radii)
}

/// 17 significant digits, locale-free.
fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_report(common: &Common, default_name: &str, custom: &Option<String>, body: &str) -> Result<(), Failure> {
    println!("{body}");
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
        let name = custom.as_deref().unwrap_or(default_name);
        let path: PathBuf = Path::new(dir).join(name);
        std::fs::write(&path, body)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_means(
    scenario: &Scenario,
    common: &Common,
    nodes: Option<usize>,
    tol: Option<f64>,
) -> Result<(), Failure> {
    let cov = covering_of(scenario)?;
    let res = resolution_for(cov.m(), nodes);
    let tol = tol.unwrap_or(1e-7);
    let src = scenario.field.as_deref().unwrap_or("1");
    let fld = ScalarField::from_expr(src, &parse(src)?, &cov)?;
    let centers = centers_of(scenario, &cov)?;
    let radii = radii_of(scenario, &cov, &centers)?;

    let mut csv = String::from(
        "field,cov,a,r,nu,solid_re,solid_im,spherical_re,spherical_im,gap_abs,identity_residual\n",
    );
    let mut worst = 0.0f64;
    for a in &centers {
        for &r in &radii {
            let rep = means::mean_gap_identity(&cov, &fld, a, r, &res)?;
            worst = worst.max(rep.identity_residual);
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                src,
                cov.label(),
                fmt_base(&a.base),
                f17(r),
                rep.nu,
                f17(rep.solid.re),
                f17(rep.solid.im),
                f17(rep.spherical.re),
                f17(rep.spherical.im),
                f17(rep.gap.norm()),
                f17(rep.identity_residual),
            ));
        }
    }
    write_report(common, "means.csv", &scenario.output, csv.trim_end())?;
    if worst > tol {
        return Err(Failure::contract(format!(
            "mean-gap identity residual {worst:.3e} exceeds tolerance {tol:.1e}"
        )));
    }
    Ok(())
}

fn fmt_base(z: &BasePt) -> String {
    z.z.iter()
        .map(|c| format!("{}{}{}i", f17(c.re), if c.im < 0.0 { "" } else { "+" }, f17(c.im)))
        .collect::<Vec<_>>()
        .join(";")
}

fn cmd_residue(
    scenario: &Scenario,
    common: &Common,
    nodes: Option<usize>,
    tol: Option<f64>,
    alpha_flag: Option<u32>,
    s_flag: Option<u32>,
) -> Result<(), Failure> {
    let cov = covering_of(scenario)?;
    let res = resolution_for(cov.m(), nodes);
    let tol = tol.unwrap_or(1e-8);
    let alpha = alpha_flag.or(scenario.alpha).unwrap_or(1);
    let s = s_flag.or(scenario.s).unwrap_or(0);
    let h: Expr = match &scenario.h {
        Some(src) => parse(src)?,
        None => Expr::num(1.0),
    };
    let centers = centers_of(scenario, &cov)?;
    let a = centers
        .first()
        .ok_or_else(|| Failure::input("residue needs one center"))?;
    let radii = radii_of(scenario, &cov, std::slice::from_ref(a))?;

    let rows = residue::residue_family_scan(&cov, a, alpha, s, &h, &radii, &res)?;
    let mut csv =
        String::from("r,res_re,res_im,closed_form_re,closed_form_im,abs_err\n");
    let mut worst = 0.0f64;
    for row in &rows {
        worst = worst.max(row.abs_err);
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            f17(row.r),
            f17(row.numeric.re),
            f17(row.numeric.im),
            f17(row.closed_form.re),
            f17(row.closed_form.im),
            f17(row.abs_err),
        ));
    }
    write_report(common, "residue.csv", &scenario.output, csv.trim_end())?;
    if worst > tol {
        return Err(Failure::contract(format!(
            "residue closed-form error {worst:.3e} exceeds tolerance {tol:.1e}"
        )));
    }
    Ok(())
}

fn cmd_classify(
    scenario: &Scenario,
    common: &Common,
    nodes: Option<usize>,
    tol: Option<f64>,
) -> Result<(), Failure> {
    let cov = covering_of(scenario)?;
    let res = resolution_for(cov.m(), nodes);
    let tol = tol.unwrap_or(1e-6);
    let src = scenario
        .field
        .as_deref()
        .ok_or_else(|| Failure::input("classify needs a `field` expression"))?;
    let fld = ScalarField::from_expr(src, &parse(src)?, &cov)?;
    let centers = centers_of(scenario, &cov)?;
    let radii = radii_of(scenario, &cov, &centers)?;

    let rep = classify::classify(&cov, &fld, &centers, &radii, tol, &res)?;
    let body = json!({
        "field": rep.label,
        "covering": cov.label(),
        "tolerance": f17(rep.tol),
        "verdict": rep.verdict.to_string(),
        "centers": rep.centers.iter().map(|c| json!({
            "base": fmt_base(&c.center.base),
            "nu": c.nu,
            "solidDeviation": f17(c.solid_dev),
            "sphericalDeviation": f17(c.spherical_dev),
            "nearHarmonicDeviation": f17(c.near_harmonic_dev),
            "residueMax": f17(c.residue_max),
            "fdLaplacianMax": f17(c.fd_laplacian_max),
        })).collect::<Vec<_>>(),
    });
    write_report(
        common,
        "classify.json",
        &scenario.output,
        &serde_json::to_string_pretty(&body).unwrap(),
    )?;
    if rep.verdict != Verdict::SemiHarmonic {
        return Err(Failure::contract(format!(
            "verdict: {} for `{}`",
            rep.verdict, rep.label
        )));
    }
    Ok(())
}

fn cmd_decompose(scenario: &Scenario, common: &Common) -> Result<(), Failure> {
    let src = scenario
        .polynomial
        .as_deref()
        .ok_or_else(|| Failure::input("decompose needs a `polynomial`"))?;
    let n = scenario.n_vars.unwrap_or(2);
    if n != 2 && n != 4 {
        return Err(Failure::input("n_vars must be 2 or 4"));
    }
    let p = harmpoly::parse_poly(src, n)?;
    let dec = harmpoly::harmonic_decompose(&p);
    let body = json!({
        "polynomial": p.to_string(),
        "nVars": n,
        "degree": p.degree(),
        "parts": dec.parts.iter().map(|(j, h)| json!({
            "harmonicDegree": j,
            "radialPower": (p.degree() - j) / 2,
            "harmonicPart": h.to_string(),
        })).collect::<Vec<_>>(),
        "reconstructionExact": dec.reconstruct() == p,
    });
    write_report(
        common,
        "decompose.json",
        &scenario.output,
        &serde_json::to_string_pretty(&body).unwrap(),
    )?;
    Ok(())
}

fn cmd_neumann(scenario: &Scenario, common: &Common, seed: u64) -> Result<(), Failure> {
    let cov = covering_of(scenario)?;
    if cov.m() != 1 {
        return Err(Failure::input("neumann currently covers m = 1 coverings"));
    }
    let src = scenario.polynomial.as_deref().unwrap_or("x1^2");
    let p = harmpoly::parse_poly(src, 2)?;
    let samples = scenario.samples.unwrap_or(200);
    let rep = harmpoly::neumann_example_check(&p, &cov, samples, seed)?;
    let pass = rep.boundary_residual_max < 1e-6;
    let body = json!({
        "polynomial": p.to_string(),
        "covering": cov.label(),
        "samples": samples,
        "boundaryResidualMax": f17(rep.boundary_residual_max),
        "laplacianResidualMax": f17(rep.laplacian_residual_max),
        "constancyResidual": f17(rep.constancy_residual),
        "passed": pass,
    });
    write_report(
        common,
        "neumann.json",
        &scenario.output,
        &serde_json::to_string_pretty(&body).unwrap(),
    )?;
    if !pass {
        return Err(Failure::contract(format!(
            "Neumann boundary residual {:.3e} exceeds 1e-6",
            rep.boundary_residual_max
        )));
    }
    Ok(())
}

fn cmd_verify(common: &Common, seed: u64, fast: bool) -> Result<(), Failure> {
    let summary = verify::run_suite(seed, fast)?;
    let body = serde_json::to_string_pretty(&summary.to_json()).unwrap();
    write_report(common, "verify.json", &None, &body)?;
    for c in &summary.checks {
        eprintln!(
            "[{}] {}/{} residual {:.3e} (tol {:.1e})",
            if c.passed { "pass" } else { "FAIL" },
            c.module,
            c.name,
            c.residual,
            c.tol
        );
    }
    if !summary.all_passed {
        return Err(Failure::contract("verification suite failed"));
    }
    Ok(())
}
