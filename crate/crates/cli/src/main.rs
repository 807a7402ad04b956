use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gkquad::bounds::{gh1d_bounds, gh_tensor_bounds, kq_bound, kq_bound_generic, minimal_error_bounds_1d, minimal_error_bounds_d};
use gkquad::error::Error;
use gkquad::experiments::{
    figure1_records, figure1_rows, figure2_records, figure2_rows, fit_rate, read_series, write_csv, RandomKernelFunction,
    FIGURE1_COLUMNS, FIGURE2_COLUMNS, VERSION,
};
use gkquad::hpcore::{display_digits, format_real, HpReal, NumericContext};
use gkquad::optimal::{optimal_tensor_rule, wce_optimal};
use gkquad::point_sets::{tensor_grid, x_k, BoundConstants, NBarRule};
use gkquad::rkhs::{wce_basis_oracle, wce_closed_form, Truncation};
use gkquad::scaled_rules::{scaled_gh_tensor_rule, standard_gh_rule, tensor_rule, KernelSpec, MeasureSpec, QuadratureRule};

#[derive(Parser)]
#[command(name = "gkquad", version, about = "High-precision quadrature for Gaussian-kernel spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the points and weights of one rule.
    Rule(RuleArgs),
    /// Worst-case error of a rule family over a range of sizes.
    Wce(WceArgs),
    /// Theoretical error bounds over a range of sizes.
    Bounds(BoundsArgs),
    /// Print the nested point set X_k (tensor grid for --dim > 1).
    Points(PointsArgs),
    /// Scaled versus standard Gauss–Hermite worst-case errors with bounds.
    Figure1(Figure1Args),
    /// Optimal weights on X_k^d against the isotropic bound.
    Figure2(Figure2Args),
    /// Fit a geometric decay rate to a CSV column.
    Ratefit(RatefitArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Working precision in significant decimal digits.
    #[arg(long, default_value_t = 100)]
    digits: u32,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Params {
    /// Measure standard deviation, one value or one per dimension.
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<String>,
    /// Kernel length-scale, one value or one per dimension.
    #[arg(long, value_delimiter = ',', required = true)]
    ell: Vec<String>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
}

#[derive(Args, Clone)]
struct ConstantArgs {
    /// Constant of the local sampling inequality.
    #[arg(long, default_value = "1")]
    big_c: String,
    /// Fill-distance threshold of the sampling inequality.
    #[arg(long, default_value = "1")]
    h0: String,
    /// Quasi-uniformity constant of the sets Y_m.
    #[arg(long, default_value = "2")]
    c_qu: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    ScaledGh,
    StandardGh,
    Optimal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    ClosedForm,
    Basis,
    Optimal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundKind {
    /// Two-sided bound for the scaled Gauss–Hermite rule (uses --n).
    Gh,
    /// Bounds on the n-th minimal error (uses --n).
    Minimal,
    /// Isotropic bound for optimal weights on X_k^d (uses --k).
    Kq,
    /// Bound for optimal weights on X_k with explicit constants (uses --k, d = 1).
    KqGeneric,
}

#[derive(Args)]
struct RuleArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    params: Params,
    #[arg(long, value_enum, default_value = "scaled-gh")]
    family: Family,
    /// Points per dimension, one value or one per dimension (Gauss–Hermite families).
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Index of the point set X_k (optimal family).
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct WceArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    params: Params,
    #[arg(long, value_enum, default_value = "scaled-gh")]
    family: Family,
    /// Range of points per dimension, `a..b` or a single value (Gauss–Hermite families).
    #[arg(long)]
    n: Option<String>,
    /// Range of set indices, `a..b` or a single value (optimal family).
    #[arg(long)]
    k: Option<String>,
    /// Route used for the worst-case error; defaults to the one matching the family.
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Also report the error on a random unit-norm kernel expansion drawn with this seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    params: Params,
    #[command(flatten)]
    constants: ConstantArgs,
    #[arg(long, value_enum, default_value = "gh")]
    kind: BoundKind,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
}

#[derive(Args)]
struct PointsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    dim: usize,
}

#[derive(Args)]
struct Figure1Args {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    ell: String,
    /// Range of n, `a..b`.
    #[arg(long, default_value = "1..30")]
    n: String,
}

#[derive(Args)]
struct Figure2Args {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    ell: String,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Range of k, `a..b`.
    #[arg(long, default_value = "1..8")]
    k: String,
    /// Constant in front of the bound.
    #[arg(long, default_value = "1")]
    big_c: String,
}

#[derive(Args)]
struct RatefitArgs {
    #[command(flatten)]
    common: Common,
    /// CSV file written by figure1, figure2 or wce.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    column: String,
    /// Column holding the index n.
    #[arg(long, default_value = "n")]
    index: String,
    /// Inclusive index window `a..b`.
    #[arg(long)]
    window: Option<String>,
}

enum CliError {
    Config(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Run(Error::Io(e))
    }
}

type CliResult<T> = Result<T, CliError>;

fn config<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

/// Validated settings shared by every subcommand.
struct RunConfig {
    ctx: NumericContext,
    alpha: MeasureSpec,
    ell: KernelSpec,
    dim: usize,
    out: Option<PathBuf>,
    header: Vec<(String, String)>,
}

impl RunConfig {
    fn new(command: &str, common: &Common, alpha: &[String], ell: &[String], dim: usize) -> CliResult<Self> {
        let ctx = NumericContext::new(common.digits).or_else(|e| config(e.to_string()))?;
        if dim == 0 {
            return config("--dim must be at least 1");
        }
        let alpha_v = per_dim("--alpha", alpha, dim, &ctx)?;
        let ell_v = per_dim("--ell", ell, dim, &ctx)?;
        let header = vec![
            ("gkquad".to_string(), VERSION.to_string()),
            ("command".to_string(), command.to_string()),
            ("digits".to_string(), common.digits.to_string()),
            ("alpha".to_string(), join(&alpha_v, &ctx)),
            ("ell".to_string(), join(&ell_v, &ctx)),
            ("dim".to_string(), dim.to_string()),
        ];
        Ok(Self {
            alpha: MeasureSpec::new(alpha_v).or_else(|e| config(e.to_string()))?,
            ell: KernelSpec::new(ell_v).or_else(|e| config(e.to_string()))?,
            ctx,
            dim,
            out: common.out.clone(),
            header,
        })
    }

    fn push(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    fn writer(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn fmt(&self, x: &HpReal) -> String {
        format_real(x, display_digits(&self.ctx))
    }

    fn emit(&self, columns: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
        let mut w = self.writer()?;
        write_csv(&mut w, &self.header, columns, rows)?;
        w.flush()?;
        Ok(())
    }
}

fn join(v: &[HpReal], ctx: &NumericContext) -> String {
    v.iter().map(|x| format_real(x, display_digits(ctx))).collect::<Vec<_>>().join(",")
}

fn positive(name: &str, text: &str, ctx: &NumericContext) -> CliResult<HpReal> {
    match ctx.parse(text) {
        Ok(v) if v.is_finite() && v > 0 => Ok(v),
        _ => config(format!("{name} must be a positive number, got {text:?}")),
    }
}

fn per_dim(name: &str, values: &[String], dim: usize, ctx: &NumericContext) -> CliResult<Vec<HpReal>> {
    let parsed = values.iter().map(|s| positive(name, s, ctx)).collect::<CliResult<Vec<_>>>()?;
    match parsed.len() {
        1 => Ok(vec![parsed[0].clone(); dim]),
        l if l == dim => Ok(parsed),
        l => config(format!("{name} has {l} values; give one or --dim = {dim}")),
    }
}

/// Parses `a..b`, `a-b` or `a` into an inclusive range of positive integers.
fn parse_range(name: &str, text: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Config(format!("{name} must be a positive integer or a range a..b, got {text:?}"));
    let (a, b) = match text.split_once("..").or_else(|| text.split_once('-')) {
        Some((a, b)) => (a.trim(), b.trim_start_matches('=').trim()),
        None => (text.trim(), text.trim()),
    };
    let a: usize = a.parse().map_err(|_| bad())?;
    let b: usize = b.parse().map_err(|_| bad())?;
    if a == 0 || b < a {
        return Err(bad());
    }
    Ok((a, b))
}

fn constants(args: &ConstantArgs, ctx: &NumericContext) -> CliResult<BoundConstants> {
    let c = positive("--big-c", &args.big_c, ctx)?;
    let h0 = positive("--h0", &args.h0, ctx)?;
    let cq = positive("--c-qu", &args.c_qu, ctx)?;
    BoundConstants::new(c, h0, cq).or_else(|e| config(e.to_string()))
}

fn gh_rule(cfg: &RunConfig, family: Family, ns: &[usize]) -> CliResult<QuadratureRule> {
    let ctx = &cfg.ctx;
    Ok(match family {
        Family::ScaledGh => scaled_gh_tensor_rule(&cfg.alpha, &cfg.ell, ns, ctx)?,
        Family::StandardGh => {
            let factors = cfg
                .alpha
                .stddevs()
                .iter()
                .zip(ns)
                .map(|(a, &n)| standard_gh_rule(a, n, ctx))
                .collect::<Result<Vec<_>, _>>()?;
            tensor_rule(&factors)?
        }
        Family::Optimal => unreachable!("optimal rules are built from X_k"),
    })
}

fn optimal_on_xk(cfg: &RunConfig, k: usize) -> CliResult<QuadratureRule> {
    let set = x_k(k, &NBarRule::Identity, &cfg.ctx)?;
    let sets = vec![set.points().to_vec(); cfg.dim];
    Ok(optimal_tensor_rule(&cfg.alpha, &cfg.ell, &sets, &cfg.ctx)?.rule()?)
}

fn cmd_rule(args: RuleArgs) -> CliResult<()> {
    let mut cfg = RunConfig::new("rule", &args.common, &args.params.alpha, &args.params.ell, args.params.dim)?;
    let rule = match args.family {
        Family::Optimal => {
            let Some(k) = args.k.filter(|&k| k > 0) else {
                return config("the optimal family needs --k >= 1");
            };
            cfg.push("family", "optimal");
            cfg.push("points", format!("X_{k} per dimension"));
            optimal_on_xk(&cfg, k)?
        }
        family => {
            let ns = match args.n.len() {
                0 => return config("Gauss–Hermite families need --n"),
                1 => vec![args.n[0]; cfg.dim],
                l if l == cfg.dim => args.n.clone(),
                l => return config(format!("--n has {l} values; give one or --dim = {}", cfg.dim)),
            };
            if ns.contains(&0) {
                return config("--n must be at least 1");
            }
            cfg.push("family", if family == Family::ScaledGh { "scaled-gh" } else { "standard-gh" });
            cfg.push("n", ns.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
            gh_rule(&cfg, family, &ns)?
        }
    };
    let mut columns: Vec<String> = (1..=cfg.dim).map(|i| format!("x{i}")).collect();
    columns.push("weight".into());
    let rows: Vec<Vec<String>> = rule
        .points()
        .iter()
        .zip(rule.weights())
        .map(|(p, w)| p.iter().chain(std::iter::once(w)).map(|x| cfg.fmt(x)).collect())
        .collect();
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    cfg.emit(&cols, &rows)
}

fn cmd_wce(args: WceArgs) -> CliResult<()> {
    let mut cfg = RunConfig::new("wce", &args.common, &args.params.alpha, &args.params.ell, args.params.dim)?;
    let optimal = args.family == Family::Optimal;
    let (index_name, range) = if optimal {
        ("k", parse_range("--k", args.k.as_deref().unwrap_or(""))?)
    } else {
        ("n", parse_range("--n", args.n.as_deref().unwrap_or(""))?)
    };
    let method = args.method.unwrap_or(if optimal { Method::Optimal } else { Method::ClosedForm });
    if method == Method::Optimal && !optimal {
        return config("--method optimal is only valid for the optimal family");
    }
    cfg.push(
        "family",
        match args.family {
            Family::ScaledGh => "scaled-gh",
            Family::StandardGh => "standard-gh",
            Family::Optimal => "optimal",
        },
    );
    if let Some(seed) = args.seed {
        cfg.push("seed", seed);
    }
    let mut rows = Vec::new();
    for i in range.0..=range.1 {
        let ctx = &cfg.ctx;
        let row = || -> CliResult<Vec<String>> {
            let rule = if optimal { optimal_on_xk(&cfg, i)? } else { gh_rule(&cfg, args.family, &vec![i; cfg.dim])? };
            let report = match method {
                Method::ClosedForm => wce_closed_form(&rule, &cfg.alpha, &cfg.ell, ctx)?,
                Method::Basis => wce_basis_oracle(&rule, &cfg.alpha, &cfg.ell, Truncation::Adaptive, ctx)?,
                Method::Optimal => wce_optimal(&rule, &cfg.alpha, &cfg.ell, ctx)?,
            };
            let mut r = vec![i.to_string(), rule.len().to_string(), cfg.fmt(&report.wce)];
            if let Some(seed) = args.seed {
                let f = RandomKernelFunction::draw(seed, 8, &cfg.alpha, &cfg.ell, ctx)?;
                r.push(cfg.fmt(&f.error(&rule, &cfg.alpha, ctx)?));
            }
            Ok(r)
        };
        rows.push(row().map_err(|e| match e {
            CliError::Run(e) => CliError::Run(e.context(format!("{index_name} = {i}"))),
            other => other,
        })?);
    }
    let mut columns = vec![index_name, "points", "wce"];
    if args.seed.is_some() {
        columns.push("random_function_error");
    }
    cfg.emit(&columns, &rows)
}

fn cmd_bounds(args: BoundsArgs) -> CliResult<()> {
    let mut cfg = RunConfig::new("bounds", &args.common, &args.params.alpha, &args.params.ell, args.params.dim)?;
    let consts = constants(&args.constants, &cfg.ctx)?;
    let ctx = &cfg.ctx.clone();
    let mut rows = Vec::new();
    let columns: Vec<&str>;
    match args.kind {
        BoundKind::Gh | BoundKind::Minimal => {
            let (a, b) = parse_range("--n", args.n.as_deref().unwrap_or(""))?;
            cfg.push("bound", if args.kind == BoundKind::Gh { "scaled-gh" } else { "minimal-error" });
            columns = vec!["n", "lower", "upper_paper", "upper_corrected"];
            for n in a..=b {
                let rep = match (args.kind, cfg.dim) {
                    (BoundKind::Gh, 1) => gh1d_bounds(&cfg.alpha.stddevs()[0], &cfg.ell.lengthscales()[0], n, ctx)?,
                    (BoundKind::Gh, d) => gh_tensor_bounds(&cfg.alpha, &cfg.ell, &vec![n; d], ctx)?,
                    (_, 1) => minimal_error_bounds_1d(&cfg.alpha.stddevs()[0], &cfg.ell.lengthscales()[0], n, ctx)?,
                    (_, d) => minimal_error_bounds_d(&cfg.alpha, &cfg.ell, &vec![n; d], ctx)?,
                };
                rows.push(vec![
                    n.to_string(),
                    cfg.fmt(&rep.lower),
                    cfg.fmt(&rep.upper_paper),
                    rep.upper_corrected.as_ref().map(|u| cfg.fmt(u)).unwrap_or_default(),
                ]);
            }
        }
        BoundKind::Kq => {
            let (a, b) = parse_range("--k", args.k.as_deref().unwrap_or(""))?;
            let alpha = isotropic(&cfg)?;
            cfg.push("bound", "kq-isotropic");
            cfg.push("constants", format!("C = {} (constant-dependent column: kq_bound)", cfg.fmt(&consts.big_c)));
            columns = vec!["k", "n_total", "kq_bound"];
            for k in a..=b {
                let n1 = (k * (k + 1)) as u64;
                let n = n1.checked_pow(cfg.dim as u32).ok_or_else(|| CliError::Config(format!("point count overflows at k = {k}")))?;
                let rep = kq_bound(n, &alpha, &consts.big_c, cfg.dim, ctx)?;
                rows.push(vec![k.to_string(), n.to_string(), cfg.fmt(&rep.value)]);
            }
        }
        BoundKind::KqGeneric => {
            if cfg.dim != 1 {
                return config("--kind kq-generic is one-dimensional");
            }
            let (a, b) = parse_range("--k", args.k.as_deref().unwrap_or(""))?;
            let threshold = ctx.real(&consts.c_qu) / &consts.hbar0;
            if ctx.real(a as u64) < threshold {
                return config(format!("k = {a} is below the validity threshold c_qu / hbar0 = {}", cfg.fmt(&threshold)));
            }
            cfg.push("bound", "kq-generic");
            cfg.push(
                "constants",
                format!(
                    "C = {}, h0 = {}, c_qu = {}, hbar0 = {} (constant-dependent column: bound)",
                    cfg.fmt(&consts.big_c),
                    cfg.fmt(&consts.h0),
                    cfg.fmt(&consts.c_qu),
                    cfg.fmt(&consts.hbar0)
                ),
            );
            columns = vec!["k", "g", "tail", "sum", "bound"];
            for k in a..=b {
                let rep = kq_bound_generic(k, &cfg.alpha.stddevs()[0], &consts, &NBarRule::Identity, ctx)?;
                rows.push(vec![k.to_string(), rep.g.to_string(), cfg.fmt(&rep.tail), cfg.fmt(&rep.sum), cfg.fmt(&rep.value)]);
            }
        }
    }
    cfg.emit(&columns, &rows)
}

fn isotropic(cfg: &RunConfig) -> CliResult<HpReal> {
    let a = &cfg.alpha.stddevs()[0];
    if cfg.alpha.stddevs().iter().any(|x| x != a) {
        return config("this bound needs an isotropic --alpha");
    }
    Ok(a.clone())
}

fn cmd_points(args: PointsArgs) -> CliResult<()> {
    let one = vec!["1".to_string()];
    let mut cfg = RunConfig::new("points", &args.common, &one, &one, args.dim)?;
    cfg.header.retain(|(k, _)| k != "alpha" && k != "ell");
    if args.k == 0 {
        return config("--k must be at least 1");
    }
    cfg.push("set", format!("X_{}", args.k));
    let set = x_k(args.k, &NBarRule::Identity, &cfg.ctx)?;
    let grid = tensor_grid(&vec![set; args.dim])?;
    let columns: Vec<String> = (1..=args.dim).map(|i| format!("x{i}")).collect();
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = grid.iter().map(|p| p.iter().map(|x| cfg.fmt(x)).collect()).collect();
    cfg.emit(&cols, &rows)
}

fn cmd_figure1(args: Figure1Args) -> CliResult<()> {
    let mut cfg = RunConfig::new("figure1", &args.common, std::slice::from_ref(&args.alpha), std::slice::from_ref(&args.ell), 1)?;
    let (a, b) = parse_range("--n", &args.n)?;
    cfg.push("constants", "none; all columns are explicit");
    let rows = figure1_rows(&cfg.alpha.stddevs()[0], &cfg.ell.lengthscales()[0], a..=b, &cfg.ctx)?;
    cfg.emit(&FIGURE1_COLUMNS, &figure1_records(&rows, &cfg.ctx))
}

fn cmd_figure2(args: Figure2Args) -> CliResult<()> {
    let mut cfg = RunConfig::new("figure2", &args.common, std::slice::from_ref(&args.alpha), std::slice::from_ref(&args.ell), args.dim)?;
    let (a, b) = parse_range("--k", &args.k)?;
    let big_c = positive("--big-c", &args.big_c, &cfg.ctx)?;
    cfg.push("constants", format!("C = {} (constant-dependent column: kq_bound)", cfg.fmt(&big_c)));
    let rows = figure2_rows(&cfg.alpha.stddevs()[0], &cfg.ell.lengthscales()[0], cfg.dim, a..=b, &big_c, &cfg.ctx)?;
    cfg.emit(&FIGURE2_COLUMNS, &figure2_records(&rows, &cfg.ctx))
}

fn cmd_ratefit(args: RatefitArgs) -> CliResult<()> {
    let one = vec!["1".to_string()];
    let mut cfg = RunConfig::new("ratefit", &args.common, &one, &one, 1)?;
    cfg.header.retain(|(k, _)| k != "alpha" && k != "ell" && k != "dim");
    let window = args.window.as_deref().map(|w| parse_range("--window", w)).transpose()?;
    let file = File::open(&args.input).or_else(|e| config(format!("cannot open {}: {e}", args.input.display())))?;
    let series = read_series(file, &args.index, &args.column, window, &cfg.ctx).map_err(|e| match e {
        Error::RateFit(m) => CliError::Config(m),
        e => CliError::Run(e),
    })?;
    let fit = fit_rate(&series, &cfg.ctx).map_err(|e| match e {
        Error::RateFit(m) => CliError::Config(m),
        e => CliError::Run(e),
    })?;
    cfg.push("input", args.input.display());
    cfg.push("column", &args.column);
    let row = vec![
        cfg.fmt(&fit.r),
        fit.window.0.to_string(),
        fit.window.1.to_string(),
        cfg.fmt(&fit.residual),
        fit.points.to_string(),
    ];
    cfg.emit(&["r", "window_start", "window_end", "residual", "points"], &[row])
}

fn innermost(e: &Error) -> &Error {
    match e {
        Error::Context { source, .. } => innermost(source),
        e => e,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Rule(a) => cmd_rule(a),
        Command::Wce(a) => cmd_wce(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Points(a) => cmd_points(a),
        Command::Figure1(a) => cmd_figure1(a),
        Command::Figure2(a) => cmd_figure2(a),
        Command::Ratefit(a) => cmd_ratefit(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(e)) => {
            eprintln!("error: {e}");
            if e.is_precision_exhaustion() {
                ExitCode::from(3)
            } else {
                match innermost(&e) {
                    Error::InvalidParameter(_)
                    | Error::DimensionMismatch { .. }
                    | Error::PrecisionTooLow { .. }
                    | Error::BelowValidityThreshold { .. }
                    | Error::MalformedPointCount { .. } => ExitCode::from(2),
                    _ => ExitCode::from(1),
                }
            }
        }
    }
}
