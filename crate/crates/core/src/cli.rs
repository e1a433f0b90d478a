//! Command-line front end.
//!
//! Exit status: 0 when every verdict passes, 1 when a verdict fails, 2 for
//! malformed input or configuration.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::halfline::{self, ExpPolySolution};
use crate::pencil::{Pencil, SphereGrid, Tri};
use crate::poly::format_complex;
use crate::polygon::{Degree, Slope};
use crate::verify::{self, GridSpec, Suite, SweepReport, Verdict};
use crate::weights::ProductWeight;

#[derive(Parser, Debug)]
#[command(name = "pencilab", version, about = "Newton-polygon calculus and estimate sweeps for parameter-elliptic pencils")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Newton polygon: vertices, sides, slopes r_s, degrees d_s and the product weight.
    Polygon {
        pencil: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Sampled ellipticity conditions (i)-(iii) and the constant C_est.
    Ellipticity {
        pencil: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Roots of Q(τ), regular degeneration verdict and k1.
    Degeneration {
        pencil: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// τ-roots of A(ξ', τ, λ) and their grouping at one point.
    Roots {
        pencil: PathBuf,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Half-line solutions w_j in closed form with their L² norms.
    Solve {
        pencil: PathBuf,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Grid sweeps with bands, witnesses and verdicts.
    Verify {
        pencil: PathBuf,
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Directory for per-suite record files and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record file format.
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Args, Debug)]
struct PointArgs {
    /// Tangential frequency ξ' (n−1 comma-separated components).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    xi_prime: Vec<f64>,
    #[arg(long)]
    lambda: f64,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Angular samples (quarter-circle θ grid and circle directions).
    #[arg(long, default_value_t = 720)]
    grid_angular: usize,
    /// Spherical Fibonacci / random nodes for n ≥ 3.
    #[arg(long, default_value_t = 2000)]
    grid_nodes: usize,
    /// Geometric grid points per decade in |ξ'| and λ; refinement doubles it.
    #[arg(long, default_value_t = 8)]
    grid_decades: usize,
    /// Smallest λ of the sweeps and validity threshold of the weights.
    #[arg(long, default_value_t = 1.0)]
    lambda0: f64,
    #[arg(long, default_value_t = 1e3)]
    lambda_max: f64,
    /// Condition tolerance; real-axis roots use 1e-6 times the root scale.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Worker threads for the sweeps (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Seed for sampled directions in n ≥ 4 and fresh-sample checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GridArgs {
    fn spec(&self) -> Result<GridSpec> {
        let g = GridSpec {
            per_decade: self.grid_decades,
            angular: self.grid_angular,
            sphere_nodes: self.grid_nodes,
            lambda0: self.lambda0,
            lambda_max: self.lambda_max,
            seed: self.seed,
            tol: self.tol,
            ..GridSpec::default()
        };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    Polygon,
    Trace,
    Thm41,
    Asymptotics,
    Prop52,
    Halfspace,
    All,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::Polygon => vec![Suite::Polygon],
            SuiteArg::Trace => vec![Suite::Trace],
            SuiteArg::Thm41 => vec![Suite::Thm41],
            SuiteArg::Asymptotics => vec![Suite::Asymptotics],
            SuiteArg::Prop52 => vec![Suite::Prop52],
            SuiteArg::Halfspace => vec![Suite::Halfspace],
            SuiteArg::All => Suite::ALL.to_vec(),
        }
    }
}

/// Parses `argv` (program name first), dispatches and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn load(path: &Path) -> Result<Pencil> {
    let p = Pencil::from_path(path)?;
    for w in &p.warnings {
        eprintln!("warning: {w}");
    }
    Ok(p)
}

fn json_out<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Polygon { pencil, format } => polygon(&load(&pencil)?, format),
        Command::Ellipticity { pencil, grid, format } => ellipticity(&load(&pencil)?, &grid.spec()?, format),
        Command::Degeneration { pencil, format } => {
            let rep = load(&pencil)?.check_regular_degeneration()?;
            match format {
                Format::Json => json_out(&rep)?,
                Format::Csv => println!("{}", rep.summary()),
            }
            Ok(rep.verdict == Tri::Yes)
        }
        Command::Roots { pencil, point, format } => roots(&load(&pencil)?, &point, format),
        Command::Solve { pencil, point, format } => solve(&load(&pencil)?, &point, format),
        Command::Verify { pencil, suite, out, format, grid } => {
            let p = load(&pencil)?;
            let spec = grid.spec()?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(grid.threads)
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            pool.install(|| verify_cmd(&p, suite.suites(), &spec, out.as_deref(), format))
        }
    }
}

fn polygon(p: &Pencil, format: Format) -> Result<bool> {
    let np = p.newton_polygon()?;
    let w = ProductWeight::from_polygon(&np);
    if format == Format::Json {
        json_out(&serde_json::json!({ "polygon": np, "weight": w }))?;
        return Ok(true);
    }
    let verts: Vec<String> = np.hull_vertices().iter().map(|v| v.to_string()).collect();
    println!("vertices: {}", verts.join(" "));
    if np.is_degenerate() {
        println!("degenerate polygon (lies on an axis)");
    }
    for (s, side) in np.sides().iter().enumerate() {
        let degree = match side.degree {
            Degree::Finite(d) => format!("d = {d}"),
            Degree::Horizontal { height, reach } => {
                format!("degree (b1, a2) = ({height}, {reach}) [convention for r = ∞]")
            }
        };
        println!("side {}: {} -> {}, r = {}, {}, m = {}/2", s + 1, side.from, side.to, side.r, degree, side.width());
        if matches!(side.r, Slope::Finite(_)) {
            let from_factors = w.side_degree(s + 1, false)?;
            let alt = w.side_degree(s + 1, true)?;
            if alt != from_factors {
                println!("  factor formula gives d = {from_factors}; the m_s reading would give {alt}");
            }
        }
    }
    println!("weight: {}", serde_json::to_string(&w)?);
    Ok(true)
}

fn ellipticity(p: &Pencil, grid: &GridSpec, format: Format) -> Result<bool> {
    let sphere: SphereGrid = grid.sphere();
    let rep = p.check_lemma21(&sphere);
    let fresh = if rep.all_hold() { Some(p.sampled_lower_ratio(4096, grid.seed)) } else { None };
    let remark = p.remark22_checks(&sphere).ok();
    if format == Format::Json {
        json_out(&serde_json::json!({ "report": rep, "fresh_sample_min": fresh, "sufficient_conditions": remark }))?;
        return Ok(rep.all_hold());
    }
    let show = |name: &str, c: &crate::pencil::ConditionCheck| {
        let w: Vec<String> = c.witness.iter().map(|x| format!("{x:.6}")).collect();
        let lam = c.witness_lambda.map(|l| format!(", λ = {l:.6}")).unwrap_or_default();
        println!(
            "{name}: {} (min {:.6e} at ξ = ({}){lam})",
            if c.holds { "holds" } else { "fails" },
            c.min_value,
            w.join(", ")
        );
    };
    show("(i)   A_2m elliptic", &rep.cond_i);
    show("(ii)  A_2mu elliptic", &rep.cond_ii);
    show("(iii) no zeros for λ > 0", &rep.cond_iii);
    println!("C_est = {:.6e} ({} directions, {} angles)", rep.c_est, rep.directions, rep.angular);
    if let Some(f) = fresh {
        println!("fresh-sample minimum ratio = {f:.6e}");
    }
    if let Some(r) = remark {
        println!(
            "even order: {}, strongly elliptic: {}, regular degeneration: {}",
            r.even_order, r.strongly_elliptic, r.regular
        );
    }
    Ok(rep.all_hold())
}

fn roots(p: &Pencil, pt: &PointArgs, format: Format) -> Result<bool> {
    let set = p.tau_roots(&pt.xi_prime, pt.lambda)?;
    let grouping = p.group_roots(&pt.xi_prime, pt.lambda);
    if format == Format::Json {
        let g = grouping.as_ref().ok();
        json_out(&serde_json::json!({ "roots": set, "grouping": g }))?;
        return Ok(true);
    }
    for c in &set.clusters {
        let mult = if c.multiplicity > 1 { format!(" (x{})", c.multiplicity) } else { String::new() };
        println!("τ = {}{mult}{}", format_complex(c.root), if c.root.im > 0.0 { "  [upper]" } else { "" });
    }
    match grouping {
        Ok(g) => {
            let fmt = |idx: &[usize]| -> String {
                idx.iter()
                    .map(|&r| format!("{} (residual {:.3e})", format_complex(g.upper_roots[r]), g.residuals[r]))
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            println!("bounded group: {}", if g.group_bounded.is_empty() { "none".into() } else { fmt(&g.group_bounded) });
            println!("large group: {}", fmt(&g.group_large));
            println!("k1 = {}", g.k1);
            if !g.ambiguous.is_empty() {
                println!("ambiguous matches: {}", fmt(&g.ambiguous));
            }
        }
        Err(e) => println!("grouping unavailable: {e}"),
    }
    Ok(true)
}

fn closed_form(sol: &ExpPolySolution) -> String {
    sol.terms
        .iter()
        .map(|t| {
            let poly: Vec<String> = t
                .poly
                .iter()
                .enumerate()
                .filter(|(_, c)| c.norm() > 0.0)
                .map(|(k, c)| match k {
                    0 => format!("({})", format_complex(*c)),
                    1 => format!("({})t", format_complex(*c)),
                    _ => format!("({})t^{k}", format_complex(*c)),
                })
                .collect();
            format!("[{}]·exp(i({})t)", poly.join(" + "), format_complex(t.tau))
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn solve(p: &Pencil, pt: &PointArgs, format: Format) -> Result<bool> {
    let sols = halfline::solve(p, &pt.xi_prime, pt.lambda)?;
    let norms: Vec<Vec<f64>> =
        sols.iter().map(|s| (0..=p.m as usize).map(|l| s.l2_norm_deriv(l)).collect()).collect();
    if format == Format::Json {
        let items: Vec<serde_json::Value> = sols
            .iter()
            .zip(&norms)
            .map(|(s, n)| Ok(serde_json::json!({ "solution": serde_json::from_str::<serde_json::Value>(&s.to_json()?)?, "norms": n })))
            .collect::<Result<_>>()?;
        json_out(&items)?;
        return Ok(true);
    }
    for (s, n) in sols.iter().zip(&norms) {
        println!("w_{}(t) = {}", s.j, closed_form(s));
        if s.fallback {
            println!("  (residues by contour quadrature)");
        }
        let parts: Vec<String> = n.iter().enumerate().map(|(l, v)| format!("‖D^{l} w_{}‖ = {v:.10e}", s.j)).collect();
        println!("  {}", parts.join(", "));
    }
    println!("boundary defect = {:.3e}", halfline::boundary_defect(&sols));
    Ok(true)
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidInput(_)
            | Error::MalformedPencil(_)
            | Error::UnsupportedShape(_)
            | Error::DimensionMismatch { .. }
            | Error::OutOfRange(_)
            | Error::Io(_)
            | Error::Json(_)
    )
}

const MAX_SHOWN_INCIDENTS: usize = 5;

fn print_report(r: &SweepReport) {
    println!("{}: {} [{} ms, config {}]", r.suite, r.verdict, r.runtime_ms, &r.config_hash[..12]);
    for s in &r.subs {
        let drift = s.drift.map(|d| format!(", drift {:.2}%", 100.0 * d)).unwrap_or_default();
        println!(
            "  {}: {} ratio in [{:.4e}, {:.4e}] over {} records{drift}",
            s.name, s.verdict, s.min_ratio, s.max_ratio, s.count
        );
        for f in &s.fits {
            println!("    fit {}: slope {:.4} vs {:.4} ({})", f.label, f.slope, f.target, if f.ok { "ok" } else { "FAIL" });
        }
        if let Some(n) = &s.note {
            println!("    note: {n}");
        }
    }
    for i in r.incidents.iter().take(MAX_SHOWN_INCIDENTS) {
        println!("  incident: {i}");
    }
    if r.incidents.len() > MAX_SHOWN_INCIDENTS {
        println!("  ... {} more incidents in summary.json", r.incidents.len() - MAX_SHOWN_INCIDENTS);
    }
}

fn verify_cmd(p: &Pencil, suites: Vec<Suite>, grid: &GridSpec, out: Option<&Path>, format: Format) -> Result<bool> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for s in suites {
        match verify::run_suite(s, p, grid) {
            Ok(r) => {
                print_report(&r);
                if let Some(dir) = out {
                    match format {
                        Format::Csv => r.write_csv(&dir.join(format!("{}.csv", s.name())))?,
                        Format::Json => std::fs::write(
                            dir.join(format!("{}.json", s.name())),
                            serde_json::to_string_pretty(&r.records)?,
                        )?,
                    }
                }
                reports.push(r);
            }
            Err(e) if is_input_error(&e) => return Err(e),
            Err(e) => {
                println!("{}: FAIL ({e})", s.name());
                failures.push(serde_json::json!({ "suite": s.name(), "error": e.to_string() }));
            }
        }
    }
    if let Some(dir) = out {
        let summary = serde_json::json!({ "reports": reports, "errors": failures });
        std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(failures.is_empty() && reports.iter().all(|r| r.verdict == Verdict::Pass))
}
