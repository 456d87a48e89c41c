use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gennet::asymptotics::{self, AsymError, VertexConstants};
use gennet::catalog::{vertex_counts, CatalogSet, Reading, Stratum};
use gennet::closed_forms::{self, consistency_report, report_csv, report_json, FormulaError, ReportConfig, ReportError};
use gennet::oracle::{enumerate_k, leaf_classes, OracleConfig, OracleError, DEFAULT_MAX_N};
use gennet::series::{factorial, series_expand};
use gennet::table::{CountKey, CountTable, Labeling, Provenance, Selection};
use gennet::verify::{verify, VerifyError};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;
use std::io::Write;
use std::process::ExitCode;
use std::time::Duration;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

/// Largest `n` the `count` command hands to the oracle.
const ORACLE_CEILING: usize = 11;

#[derive(Parser)]
#[command(name = "gennet", version, about = "Exact counts and asymptotics of phylogenetic networks with k reticulations")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Worker threads for the oracle (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Wall-clock budget for oracle runs, e.g. 90s, 10m, 2h.
    #[arg(long, global = true, value_parser = humantime::parse_duration)]
    budget: Option<Duration>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the payload here instead of stdout.
    #[arg(long, global = true)]
    output: Option<std::path::PathBuf>,
    /// Use the catalog exactly as printed instead of the adjudicated weights.
    #[arg(long, global = true)]
    as_printed: bool,
    /// Exclude a double edge hanging directly from the root.
    #[arg(long, global = true)]
    no_root_double: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LabelingArg {
    Vertex,
    Leaf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StratumArg {
    All,
    NoMult,
    Mult,
    TreeChild,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Series,
    Closed,
    Oracle,
}

#[derive(Subcommand)]
enum Command {
    /// One exact count.
    Count {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        leaves: Option<u64>,
        #[arg(long, value_enum, default_value_t = LabelingArg::Vertex)]
        labeling: LabelingArg,
        #[arg(long, value_enum, default_value_t = StratumArg::All)]
        stratum: StratumArg,
        #[arg(long, value_enum, default_value_t = Method::Series)]
        method: Method,
    },
    /// Series against oracle for k = 1, 2, 3 (mandatory), plus leaf counts and printed
    /// formulas (reported).
    Verify {
        #[arg(long, default_value_t = 7)]
        max_n: usize,
    },
    /// EGF coefficients of an assembled stratum.
    Series {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 21)]
        max_n: usize,
        #[arg(long, value_enum, default_value_t = StratumArg::All)]
        stratum: StratumArg,
    },
    /// Asymptotic estimates; several `--n` values give a convergence table.
    Asym {
        #[arg(long)]
        k: u32,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u64>,
        #[arg(long, default_value_t = 2)]
        order: u32,
        /// Leaf-labelled first-order estimate at these `l` instead.
        #[arg(long, value_delimiter = ',')]
        leaves: Vec<u64>,
    },
    /// Diagnostic reports.
    Report {
        #[command(subcommand)]
        which: ReportKind,
    },
}

#[derive(Subcommand)]
enum ReportKind {
    /// Every printed formula against series and oracle.
    Consistency {
        /// All of k = 1, 2, 3 when omitted.
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = 15)]
        max_n: usize,
        /// Largest n handed to the oracle.
        #[arg(long, default_value_t = DEFAULT_MAX_N)]
        oracle_max_n: usize,
        #[arg(long)]
        no_oracle: bool,
    },
}

/// An error with its exit status.
struct Failure(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e: anyhow::Error = e.into();
        Failure(status_of(&e), e)
    }
}

fn status_of(e: &anyhow::Error) -> u8 {
    let oracle = e
        .downcast_ref::<OracleError>()
        .or_else(|| match e.downcast_ref::<VerifyError>() {
            Some(VerifyError::Oracle(o)) => Some(o),
            _ => None,
        })
        .or_else(|| match e.downcast_ref::<ReportError>() {
            Some(ReportError::Oracle(o)) => Some(o),
            _ => None,
        });
    match oracle {
        Some(OracleError::BudgetExceeded) => EXIT_BUDGET,
        Some(OracleError::OutOfRange(..)) => EXIT_USAGE,
        _ if e.downcast_ref::<FormulaError>().is_some() => EXIT_USAGE,
        _ if matches!(e.downcast_ref::<AsymError>(), Some(AsymError::Order(_) | AsymError::ZeroK)) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, anyhow!(msg.into()))
}

struct Ctx {
    global: Global,
    catalogs: CatalogSet,
}

impl Ctx {
    fn reading(&self) -> Reading {
        if self.global.as_printed {
            Reading::AsPrinted
        } else {
            Reading::Adjudicated
        }
    }

    fn oracle(&self, max_n: usize) -> OracleConfig {
        OracleConfig { allow_root_double: !self.global.no_root_double, budget: self.global.budget, max_n }
    }

    fn emit(&self, payload: &str) -> Result<(), Failure> {
        match &self.global.output {
            Some(p) => std::fs::write(p, payload)?,
            None => std::io::stdout().write_all(payload.as_bytes())?,
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().expect("thread pool set once");
    }
    let catalogs = match CatalogSet::load() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let ctx = Ctx { global: cli.global, catalogs };
    let res = match cli.command {
        Command::Count { k, n, leaves, labeling, stratum, method } => cmd_count(&ctx, k, n, leaves, labeling, stratum, method),
        Command::Verify { max_n } => cmd_verify(&ctx, max_n),
        Command::Series { k, max_n, stratum } => cmd_series(&ctx, k, max_n, stratum),
        Command::Asym { k, n, order, leaves } => cmd_asym(&ctx, k, &n, order, &leaves),
        Command::Report { which: ReportKind::Consistency { k, max_n, oracle_max_n, no_oracle } } => {
            cmd_report(&ctx, k, max_n, oracle_max_n, no_oracle)
        }
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn check_k(k: u32) -> Result<(), Failure> {
    if (1..=3).contains(&k) {
        Ok(())
    } else {
        Err(usage(format!("k must be 1, 2 or 3, got {k}")))
    }
}

fn selection(s: StratumArg) -> Selection {
    match s {
        StratumArg::All => Selection::All,
        StratumArg::NoMult => Selection::NoMult,
        StratumArg::Mult => Selection::Mult,
        StratumArg::TreeChild => Selection::TreeChild,
    }
}

#[derive(Serialize)]
struct CountOut {
    k: u32,
    labeling: Labeling,
    stratum: Selection,
    size: u64,
    count: String,
    provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

fn cmd_count(
    ctx: &Ctx,
    k: u32,
    n: Option<u64>,
    leaves: Option<u64>,
    labeling: LabelingArg,
    stratum: StratumArg,
    method: Method,
) -> Result<u8, Failure> {
    check_k(k)?;
    let sel = selection(stratum);
    let labeling = match labeling {
        LabelingArg::Vertex => Labeling::Vertex,
        LabelingArg::Leaf => Labeling::Leaf,
    };
    let size = match (labeling, n, leaves) {
        (Labeling::Vertex, Some(n), None) => n,
        (Labeling::Leaf, None, Some(l)) => l,
        (Labeling::Vertex, _, _) => return Err(usage("vertex labelling takes --n (and not --leaves)")),
        (Labeling::Leaf, _, _) => return Err(usage("leaf labelling takes --leaves (and not --n)")),
    };
    if labeling == Labeling::Leaf && size == 0 {
        return Err(usage("--leaves must be at least 1"));
    }
    if sel == Selection::TreeChild && k != 1 && method == Method::Series {
        return Err(usage("tree-child series exist only for k = 1"));
    }
    let mut note = None;
    let count: BigInt = if labeling == Labeling::Vertex && size % 2 == 0 {
        note = Some("n even".to_string());
        BigInt::zero()
    } else {
        match method {
            Method::Closed => {
                let v = match labeling {
                    Labeling::Vertex => closed_forms::exact_vertex(k, size, sel)?,
                    Labeling::Leaf => closed_forms::exact_leaf(k, size, sel)?,
                };
                if !v.is_integer() {
                    return Err(Failure(EXIT_FAIL, anyhow!("the printed formula gives {v}, which is not a count")));
                }
                v.to_integer()
            }
            Method::Series => series_count(ctx, k, labeling, sel, size as usize)?,
            Method::Oracle => oracle_count(ctx, k, labeling, sel, size as usize)?,
        }
    };
    let provenance = match method {
        Method::Series => Provenance::Series,
        Method::Closed => Provenance::ClosedForm,
        Method::Oracle => Provenance::Oracle,
    };
    let out = CountOut { k, labeling, stratum: sel, size, count: count.to_string(), provenance, note };
    let payload = match ctx.global.format {
        Format::Json => serde_json::to_string_pretty(&out)? + "\n",
        Format::Csv => {
            let mut t = CountTable::new();
            t.insert(CountKey { k, labeling, selection: sel, size: size as usize }, count, provenance);
            t.to_csv()
        }
        Format::Text => match &out.note {
            Some(n) => format!("{} ({n})\n", out.count),
            None => format!("{}\n", out.count),
        },
    };
    ctx.emit(&payload)?;
    Ok(0)
}

fn series_count(ctx: &Ctx, k: u32, labeling: Labeling, sel: Selection, size: usize) -> Result<BigInt, Failure> {
    let r = ctx.reading();
    let value = match labeling {
        Labeling::Vertex => {
            let g = match sel {
                Selection::All => ctx.catalogs.assemble_total(k, r)?,
                Selection::NoMult | Selection::TreeChild => ctx.catalogs.assemble(k, Stratum::NoMult, r)?,
                Selection::Mult => ctx.catalogs.assemble(k, Stratum::Mult, r)?,
            };
            vertex_counts(&g, size)?.swap_remove(size)
        }
        Labeling::Leaf => {
            let lc = ctx.catalogs.leaf_counts(k, size, r)?;
            match sel {
                Selection::All => lc.total(size),
                Selection::NoMult | Selection::TreeChild => lc.get(Stratum::NoMult, size).clone(),
                Selection::Mult => lc.get(Stratum::Mult, size).clone(),
            }
        }
    };
    if !value.is_integer() {
        return Err(Failure(EXIT_FAIL, anyhow!("series value {value} is not an integer")));
    }
    Ok(value.to_integer())
}

fn oracle_count(ctx: &Ctx, k: u32, labeling: Labeling, sel: Selection, size: usize) -> Result<BigInt, Failure> {
    let ku = k as usize;
    let n = match labeling {
        Labeling::Vertex => size,
        Labeling::Leaf => 2 * size + 2 * ku - 1,
    };
    let cfg = ctx.oracle(ORACLE_CEILING);
    match labeling {
        Labeling::Vertex => {
            let by = enumerate_k(n, ku, &cfg)?;
            Ok(by
                .iter()
                .filter(|((r, tc), _)| match sel {
                    Selection::All => true,
                    Selection::NoMult => *r == 0,
                    Selection::Mult => *r > 0,
                    Selection::TreeChild => *tc,
                })
                .map(|(_, c)| BigInt::from(c.clone()))
                .sum())
        }
        Labeling::Leaf => {
            let cl = leaf_classes(size, ku, &cfg)?;
            Ok(BigInt::from(match sel {
                Selection::All => cl.classes.len(),
                Selection::NoMult => cl.no_mult(),
                Selection::Mult => cl.mult(),
                Selection::TreeChild => cl.tree_child(),
            }))
        }
    }
}

fn cmd_verify(ctx: &Ctx, max_n: usize) -> Result<u8, Failure> {
    let rep = verify(max_n, &ctx.catalogs, ctx.reading(), &ctx.oracle(max_n))?;
    let payload = match ctx.global.format {
        Format::Json => serde_json::to_string_pretty(&rep)? + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for c in &rep.checks {
                w.serialize(c)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?
        }
        Format::Text => {
            let mut s = String::new();
            for c in &rep.checks {
                s += &format!("{c}\n");
            }
            let mism = rep.formulas.iter().filter(|f| f.status() != "match" && f.status() != "not-applicable").count();
            s += &format!("printed formulas: {} rows, {} disagree (see `report consistency`)\n", rep.formulas.len(), mism);
            let mand = rep.checks.iter().filter(|c| c.mandatory).count();
            let bad = rep.checks.iter().filter(|c| c.mandatory && !c.passed).count();
            s += &format!("mandatory checks: {mand}, failed: {bad}\n");
            s
        }
    };
    ctx.emit(&payload)?;
    Ok(if rep.mandatory_passed() { 0 } else { EXIT_FAIL })
}

#[derive(Serialize)]
struct SeriesRow {
    n: usize,
    numerator: String,
    denominator: String,
    count: String,
}

fn cmd_series(ctx: &Ctx, k: u32, max_n: usize, stratum: StratumArg) -> Result<u8, Failure> {
    check_k(k)?;
    let r = ctx.reading();
    let g = match stratum {
        StratumArg::All => ctx.catalogs.assemble_total(k, r)?,
        StratumArg::NoMult => ctx.catalogs.assemble(k, Stratum::NoMult, r)?,
        StratumArg::Mult => ctx.catalogs.assemble(k, Stratum::Mult, r)?,
        StratumArg::TreeChild if k == 1 => ctx.catalogs.assemble(k, Stratum::NoMult, r)?,
        StratumArg::TreeChild => return Err(usage("tree-child series exist only for k = 1")),
    };
    let ser = series_expand(&g, max_n)?;
    let rows: Vec<SeriesRow> = (0..=max_n)
        .map(|n| {
            let c = ser.coeff(n);
            let count = c * num_rational::BigRational::from_integer(factorial(n));
            SeriesRow {
                n,
                numerator: c.numer().to_string(),
                denominator: c.denom().to_string(),
                count: count.to_string(),
            }
        })
        .collect();
    let payload = match ctx.global.format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv => to_csv(&rows)?,
        Format::Text => rows.iter().map(|r| format!("{:>3}  {}\n", r.n, r.count)).collect(),
    };
    ctx.emit(&payload)?;
    Ok(0)
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?)
}

#[derive(Serialize)]
struct LeafEstimate {
    k: u32,
    l: u64,
    estimate: String,
    exact: Option<String>,
    relative_error: Option<f64>,
}

fn cmd_asym(ctx: &Ctx, k: u32, ns: &[u64], order: u32, leaves: &[u64]) -> Result<u8, Failure> {
    check_k(k)?;
    if !(1..=2).contains(&order) {
        return Err(usage(format!("--order must be 1 or 2, got {order}")));
    }
    if ns.is_empty() == leaves.is_empty() {
        return Err(usage("give either --n or --leaves"));
    }
    let c = VertexConstants::from_catalogs(&ctx.catalogs, k, ctx.reading())?;
    let head = format!("d_{k} = {}\nc'_{k} = ({}) sqrt(pi)\n", c.d, c.second_over_sqrt_pi);
    let payload = if !leaves.is_empty() {
        let l_max = *leaves.iter().max().expect("nonempty") as usize;
        let lc = ctx.catalogs.leaf_counts(k, l_max, ctx.reading())?;
        let rows: Vec<LeafEstimate> = leaves
            .iter()
            .map(|&l| {
                let est = asymptotics::asym_leaf(&c, l);
                let exact = (l >= 1).then(|| lc.total(l as usize)).filter(|v| v.is_integer()).map(|v| v.to_integer());
                LeafEstimate {
                    k,
                    l,
                    estimate: asymptotics::format_float(&est),
                    relative_error: exact.as_ref().map(|e| asymptotics::relative_error(&est, e)),
                    exact: exact.map(|e| e.to_string()),
                }
            })
            .collect();
        match ctx.global.format {
            Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
            Format::Csv => to_csv(&rows)?,
            Format::Text => {
                head + &rows
                    .iter()
                    .map(|r| {
                        format!(
                            "l={} estimate={} exact={} rel_err={}\n",
                            r.l,
                            r.estimate,
                            r.exact.as_deref().unwrap_or("-"),
                            r.relative_error.map(|e| format!("{e:.3e}")).unwrap_or_else(|| "-".into())
                        )
                    })
                    .collect::<String>()
            }
        }
    } else {
        let n_max = *ns.iter().max().expect("nonempty") as usize;
        let g = ctx.catalogs.assemble_total(k, ctx.reading())?;
        let exact = vertex_counts(&g, n_max)?;
        let pairs: Vec<(u64, BigInt)> = ns.iter().map(|&n| (n, exact[n as usize].to_integer())).collect();
        if ns.len() == 1 {
            let n = ns[0];
            let est = asymptotics::AsymptoticEstimate::vertex(&c, n, order, Some(&pairs[0].1))?;
            match ctx.global.format {
                Format::Json => serde_json::to_string_pretty(&est)? + "\n",
                Format::Csv => to_csv(&[est])?,
                Format::Text => format!(
                    "{head}n={n} order={order} estimate={} exact={} rel_err={:.3e}\n",
                    est.value,
                    pairs[0].1,
                    est.relative_error.unwrap_or(f64::NAN)
                ),
            }
        } else {
            let rows = asymptotics::convergence_table(&c, &pairs)?;
            match ctx.global.format {
                Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
                Format::Csv => to_csv(&rows)?,
                Format::Text => {
                    head + &rows
                        .iter()
                        .map(|r| {
                            format!(
                                "n={:<4} rel_err1={:.3e} rel_err2={:.3e} fitted_residual={:.6}\n",
                                r.n, r.rel_err1, r.rel_err2, r.fitted_residual
                            )
                        })
                        .collect::<String>()
                }
            }
        }
    };
    ctx.emit(&payload)?;
    Ok(0)
}

fn cmd_report(ctx: &Ctx, k: Option<u32>, max_n: usize, oracle_max_n: usize, no_oracle: bool) -> Result<u8, Failure> {
    let ks: Vec<u32> = match k {
        Some(k) => {
            check_k(k)?;
            vec![k]
        }
        None => vec![1, 2, 3],
    };
    let cfg = ReportConfig {
        catalogs: &ctx.catalogs,
        reading: ctx.reading(),
        oracle: (!no_oracle).then(|| ctx.oracle(oracle_max_n)),
    };
    let mut rows = Vec::new();
    for k in ks {
        rows.extend(consistency_report(k, max_n, &cfg)?);
    }
    let payload = match ctx.global.format {
        Format::Json => report_json(&rows) + "\n",
        Format::Csv => report_csv(&rows),
        Format::Text => {
            let show = |v: &Option<num_rational::BigRational>| v.as_ref().map(|q| q.to_string()).unwrap_or_else(|| "-".into());
            rows.iter()
                .map(|r| {
                    format!(
                        "{:<20} k={} {}={:<3} value={} series={} oracle={} {}\n",
                        r.formula_id,
                        r.k,
                        if r.labeling == Labeling::Vertex { "n" } else { "l" },
                        r.arg,
                        show(&r.value),
                        show(&r.series_value),
                        show(&r.oracle_value),
                        r.status()
                    )
                })
                .collect()
        }
    };
    ctx.emit(&payload)?;
    Ok(0)
}
