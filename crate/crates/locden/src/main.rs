//! Command-line front end: density, cone, and measure computations on
//! set-description files, plus the p-adic verification oracle.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use locden::density::{cone_density_cm, local_density, main_theorem_check, DensityReport};
use locden::dsl::{self, parse_ord_formula, parse_sum_term};
use locden::geometry::cone::{cone_with_multiplicities, stabilize, tangent_cone};
use locden::geometry::measure::{measure_at, measure_qep, MeasureMode, RegionKind};
use locden::geometry::{DefinableSet, LambdaGroup};
use locden::lring::LElement;
use locden::padic::{empirical_density, oracle_measure, specialize, PadicContext};
use locden::presburger::{normalize, sum_over, QepFunction};

#[derive(Parser)]
#[command(
    name = "locden",
    about = "Exact local densities and tangent cones over Henselian valued fields",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Mode {
    /// algebraically closed residue field (e.g. C((t)))
    Acl,
    /// finite residue field F_{p^f}
    Fq,
}

#[derive(Args)]
struct ModeArgs {
    #[arg(long, value_enum, default_value = "acl")]
    mode: Mode,
    /// residue characteristic (fq mode)
    #[arg(long, default_value_t = 3)]
    p: u64,
    /// residue degree (fq mode)
    #[arg(long, default_value_t = 1)]
    f: u32,
}

impl ModeArgs {
    fn measure_mode(&self) -> MeasureMode {
        match self.mode {
            Mode::Acl => MeasureMode::motivic(),
            Mode::Fq => MeasureMode::padic(self.p, self.f),
        }
    }
}

#[derive(Args)]
struct FileArgs {
    /// set-description file (.mld)
    file: PathBuf,
    /// which named set to use (default: the first one)
    #[arg(long)]
    set: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Local density at the origin (mean value of normalized sphere volumes)
    Density {
        #[command(flatten)]
        file: FileArgs,
        #[command(flatten)]
        mode: ModeArgs,
        /// also run the stabilization + cone-with-multiplicities equality check
        #[arg(long)]
        check: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Tangent lambda-cone at the origin
    Cone {
        #[command(flatten)]
        file: FileArgs,
        /// scaling group as "n,m" (default: stabilize)
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Tangent cone with multiplicities
    Cm {
        #[command(flatten)]
        file: FileArgs,
        #[arg(long)]
        lambda: Option<String>,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Distinguished scaling group for the tangent cone
    Stabilize {
        #[command(flatten)]
        file: FileArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Sphere or ball measures (symbolic in the radius, or at a given radius)
    Measure {
        #[command(flatten)]
        file: FileArgs,
        #[arg(long, conflicts_with = "ball")]
        sphere: bool,
        #[arg(long)]
        ball: bool,
        /// concrete radius (omit for the symbolic radius function)
        #[arg(long)]
        at: Option<i64>,
        #[command(flatten)]
        mode: ModeArgs,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Compare symbolic measures against the p-adic counting oracle
    Verify {
        #[command(flatten)]
        file: FileArgs,
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        f: u32,
        #[arg(long, default_value_t = 6)]
        depth: i64,
        #[arg(long, default_value_t = 8)]
        n_max: i64,
    },
    /// Mean value at infinity of a JSON-encoded radius function
    Mv {
        /// input file (default: stdin)
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Exact summation of an exponential-polynomial term over a Presburger set
    Sum {
        /// comma-separated variable names, outermost first
        #[arg(long)]
        vars: String,
        /// quantifier-free formula, e.g. "z1 >= 0 and z1 % 2 == 0"
        #[arg(long = "set")]
        formula: String,
        /// term, e.g. "z1^2 * L^(-3*z1)"
        #[arg(long)]
        term: String,
        /// number of leading free variables (0 or 1)
        #[arg(long, default_value_t = 0)]
        free: usize,
    },
}

fn main() -> ExitCode {
    if let Ok(workers) = std::env::var("LOCDEN_WORKERS") {
        if let Ok(n) = workers.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn load(file: &FileArgs) -> Result<DefinableSet, String> {
    let text = std::fs::read_to_string(&file.file)
        .map_err(|e| format!("cannot read {}: {}", file.file.display(), e))?;
    let parsed = dsl::parse(&text).map_err(|e| e.to_string())?;
    let def = parsed
        .find(file.set.as_deref())
        .map_err(|e| e.to_string())?;
    dsl::elaborate(def).map_err(|e| e.to_string())
}

fn parse_lambda(s: &str) -> Result<LambdaGroup, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [n] => Ok(LambdaGroup::new(
            n.trim().parse().map_err(|_| "bad lambda")?,
            1,
        )),
        [n, m] => Ok(LambdaGroup::new(
            n.trim().parse().map_err(|_| "bad lambda")?,
            m.trim().parse().map_err(|_| "bad lambda")?,
        )),
        _ => Err("lambda must be \"n\" or \"n,m\"".into()),
    }
}

fn density_text(r: &DensityReport) -> String {
    let limits: Vec<String> = r.class_limits.iter().map(|l| format!("{}", l)).collect();
    format!(
        "density = {}\nperiod  = {}\nlimits  = [{}]",
        r.value,
        r.period,
        limits.join(", ")
    )
}

fn qep_text(f: &QepFunction) -> String {
    let mut out = format!("period {} (exact for n >= {}):\n", f.period, f.threshold);
    for (j, class) in f.classes.iter().enumerate() {
        let terms: Vec<String> = class
            .iter()
            .map(|t| {
                let mut s = format!("({})", t.h);
                if t.a > 0 {
                    s.push_str(&format!(" w^{}", t.a));
                }
                if t.b != 0 {
                    s.push_str(&format!(" L^({}w)", t.b));
                }
                s
            })
            .collect();
        let body = if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        };
        out.push_str(&format!("  n = {} mod {}: {}\n", j, f.period, body));
    }
    out.push_str("  (w = (n - j)/period)");
    out
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Density {
            file,
            mode,
            check,
            format,
        } => {
            let set = load(&file)?;
            let m = mode.measure_mode();
            if check {
                let report = main_theorem_check(&set, m).map_err(|e| e.to_string())?;
                match format {
                    Format::Json => println!(
                        "{}",
                        serde_json::to_string(&report).map_err(|e| e.to_string())?
                    ),
                    Format::Text => {
                        println!("lambda  = {}", report.lambda);
                        println!("local density:\n{}", density_text(&report.lhs));
                        println!(
                            "cone-with-multiplicities density:\n{}",
                            density_text(&report.rhs)
                        );
                        println!("equal   = {}", report.equal);
                    }
                }
                return Ok(if report.equal {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                });
            }
            let r = local_density(&set, m).map_err(|e| e.to_string())?;
            match format {
                Format::Json => {
                    println!("{}", serde_json::to_string(&r).map_err(|e| e.to_string())?)
                }
                Format::Text => println!("{}", density_text(&r)),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Cone {
            file,
            lambda,
            format,
        } => {
            let set = load(&file)?;
            let lam = match lambda {
                Some(s) => parse_lambda(&s)?,
                None => stabilize(&set).map_err(|e| e.to_string())?,
            };
            let cone = tangent_cone(&set, &lam).map_err(|e| e.to_string())?;
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string(&serde_json::json!({
                        "lambda": lam,
                        "cone": cone,
                    }))
                    .map_err(|e| e.to_string())?
                ),
                Format::Text => {
                    println!("lambda = {}", lam);
                    println!("{}", describe_set(&cone));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Cm {
            file,
            lambda,
            mode,
            format,
        } => {
            let set = load(&file)?;
            let lam = match lambda {
                Some(s) => parse_lambda(&s)?,
                None => stabilize(&set).map_err(|e| e.to_string())?,
            };
            let cm = cone_with_multiplicities(&set, &lam).map_err(|e| e.to_string())?;
            let density = cone_density_cm(&cm, mode.measure_mode()).map_err(|e| e.to_string())?;
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string(&serde_json::json!({
                        "lambda": lam,
                        "support": cm.support,
                        "density": density,
                    }))
                    .map_err(|e| e.to_string())?
                ),
                Format::Text => {
                    println!("lambda = {}", lam);
                    println!("{}", describe_set(&cm.support));
                    println!("{}", density_text(&density));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Stabilize { file, format } => {
            let set = load(&file)?;
            let lam = stabilize(&set).map_err(|e| e.to_string())?;
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string(&lam).map_err(|e| e.to_string())?
                ),
                Format::Text => println!("{}", lam),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Measure {
            file,
            sphere,
            ball,
            at,
            mode,
            format,
        } => {
            let set = load(&file)?;
            let kind = if ball && !sphere {
                RegionKind::Ball
            } else {
                RegionKind::Sphere
            };
            let m = mode.measure_mode();
            match at {
                Some(n) => {
                    let v = measure_at(&set, n, kind, m).map_err(|e| e.to_string())?;
                    match format {
                        Format::Json => {
                            println!("{}", serde_json::to_string(&v).map_err(|e| e.to_string())?)
                        }
                        Format::Text => println!("{}", v),
                    }
                }
                None => {
                    let f = measure_qep(&set, kind, m).map_err(|e| e.to_string())?;
                    match format {
                        Format::Json => {
                            println!("{}", serde_json::to_string(&f).map_err(|e| e.to_string())?)
                        }
                        Format::Text => println!("{}", qep_text(&f)),
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            file,
            p,
            f,
            depth,
            n_max,
        } => {
            let set = load(&file)?;
            let ctx = PadicContext::new(p, f, depth);
            let mode = MeasureMode::padic(p, f);
            let mut all_match = true;
            for n in 0..=n_max {
                let sym =
                    measure_at(&set, n, RegionKind::Sphere, mode).map_err(|e| e.to_string())?;
                let sym_q = specialize(&sym, &ctx).map_err(|e| e.to_string())?;
                let ora = oracle_measure(&set, n, RegionKind::Sphere, &ctx)
                    .map_err(|e| e.to_string())?;
                let ok = sym_q == ora;
                all_match &= ok;
                println!(
                    "n={:2}: symbolic={} oracle={} {}",
                    n,
                    sym_q,
                    ora,
                    if ok { "match" } else { "MISMATCH" }
                );
            }
            match empirical_density(&set, &ctx, n_max) {
                Ok(emp) => {
                    let sym_density = local_density(&set, mode).map_err(|e| e.to_string())?;
                    let sym_mean =
                        specialize(&sym_density.value, &ctx).map_err(|e| e.to_string())?;
                    let ok = sym_mean == emp.mean;
                    all_match &= ok;
                    println!(
                        "density: symbolic={} empirical={} (period {}) {}",
                        sym_mean,
                        emp.mean,
                        emp.period,
                        if ok { "match" } else { "MISMATCH" }
                    );
                }
                Err(e) => {
                    eprintln!("period detection failed: {}", e);
                    return Ok(ExitCode::from(2));
                }
            }
            Ok(if all_match {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Mv { input } => {
            let mut text = String::new();
            match input {
                Some(path) => {
                    text = std::fs::read_to_string(&path)
                        .map_err(|e| format!("cannot read {}: {}", path.display(), e))?;
                }
                None => {
                    std::io::stdin()
                        .read_to_string(&mut text)
                        .map_err(|e| e.to_string())?;
                }
            }
            let f: QepFunction = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            let mv = f.mean_value().map_err(|e| e.to_string())?;
            println!(
                "{}",
                serde_json::to_string(&serde_json::json!({
                    "mean_value": mv,
                    "pretty": format!("{}", mv),
                }))
                .map_err(|e| e.to_string())?
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sum {
            vars,
            formula,
            term,
            free,
        } => {
            let names: Vec<String> = vars.split(',').map(|s| s.trim().to_string()).collect();
            let set = parse_ord_formula(&formula, &names).map_err(|e| e.to_string())?;
            let integrand = parse_sum_term(&term, &names).map_err(|e| e.to_string())?;
            let cells = normalize(&set);
            let result = sum_over(&cells, &integrand, free).map_err(|e| e.to_string())?;
            if free == 0 {
                let v: LElement = result.value_at(result.threshold.max(0));
                println!(
                    "{}",
                    serde_json::to_string(&serde_json::json!({
                        "sum": v,
                        "pretty": format!("{}", v),
                    }))
                    .map_err(|e| e.to_string())?
                );
            } else {
                println!(
                    "{}",
                    serde_json::to_string(&result).map_err(|e| e.to_string())?
                );
                eprintln!("{}", qep_text(&result));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Readable description of a definable set's cells.
fn describe_set(set: &DefinableSet) -> String {
    use locden::geometry::Coord;
    let mut out = String::new();
    out.push_str(&format!(
        "ambient K^{}, dim {}, {} cell(s)\n",
        set.ambient,
        set.dim(),
        set.cells.len()
    ));
    for (i, cell) in set.cells.iter().enumerate() {
        if cell.dim == 0 {
            out.push_str(&format!("  cell {}: the origin\n", i));
            continue;
        }
        let coords: Vec<String> = cell
            .coords
            .iter()
            .enumerate()
            .map(|(j, c)| match c {
                Coord::Zero => format!("x{} = 0", j + 1),
                Coord::Monomial { gamma, exps } => {
                    let mut parts = Vec::new();
                    if gamma.ord != 0 {
                        parts.push(format!("t^{}", gamma.ord));
                    }
                    for (k, e) in exps.iter().enumerate() {
                        if *e != 0 {
                            parts.push(if *e == 1 {
                                format!("v{}", k + 1)
                            } else {
                                format!("v{}^{}", k + 1, e)
                            });
                        }
                    }
                    if parts.is_empty() {
                        parts.push("1".into());
                    }
                    format!("x{} = {}", j + 1, parts.join(" "))
                }
            })
            .collect();
        out.push_str(&format!(
            "  cell {}: dim {} [{}], {} angular eq(s), {} aux var(s)\n",
            i,
            cell.dim,
            coords.join(", "),
            cell.angular.equations.len(),
            cell.aux
        ));
    }
    out
}
