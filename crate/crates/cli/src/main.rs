use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use psl3_core::characters::{char_of, prefactor, CharSpec, Family};
use psl3_core::recursions::dsl::{eval_identity, parse_identity};
use psl3_core::recursions::{
    identities_at, verify_selected, Fault, IdentityId, IdentityTag, RecursionError,
};
use psl3_core::root_data::{charge_offsets, conformal_weight};
use psl3_core::voa_oracle::{
    principal_dims, principal_dims_cached, CacheStatus, Cocycle, GradedDims, OracleConfig,
    OracleError, DEFAULT_BUDGET,
};
use psl3_core::{AffineHW, CharError, Envelope, Series};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "psl3",
    version,
    about = "Characters of principal subspaces of affine sl(3)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand the character χ′ of a principal subspace.
    Character(CharacterArgs),
    /// Check the q-difference identities at a level.
    Verify(VerifyArgs),
    /// Graded dimensions from the lattice Fock-space realization.
    Oracle(OracleArgs),
    /// Compare oracle dimensions with the character formula.
    Compare(CompareArgs),
    /// Evaluate an identity written in the text language.
    Dsl(DslArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    A,
    B,
    C,
}

#[derive(Args)]
struct CharacterArgs {
    #[arg(long)]
    k: u32,
    #[arg(long, value_enum, ignore_case = true)]
    family: FamilyArg,
    #[arg(long)]
    i: u32,
    #[arg(long, default_value_t = 3)]
    max_charge: u32,
    #[arg(long, default_value_t = 8)]
    max_q: u32,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 4)]
    max_charge: u32,
    #[arg(long, default_value_t = 8)]
    max_q: u32,
    /// Check a single identity (SHIFT1, SEQ1, INV1, FOUR1, BOUNDARY, ...).
    #[arg(long)]
    identity: Option<IdentityTag>,
    #[arg(long, requires = "identity")]
    i: Option<u32>,
    #[arg(long, value_enum, default_value = "table")]
    format: ReportFormat,
    /// Add 1 at the given coefficient of the first term before comparing.
    #[arg(long, hide = true, value_parser = parse_fault)]
    inject_fault: Option<Fault>,
}

#[derive(Args)]
struct OracleArgs {
    /// Highest weight as k0,k1,k2.
    #[arg(long, value_parser = parse_weight)]
    weight: AffineHW,
    #[arg(long)]
    max_charge: u32,
    #[arg(long)]
    max_weight: u32,
    /// Reuse results stored here (PSL3_CACHE_DIR takes precedence).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Largest allowed k·C·S.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, value_enum, default_value = "standard")]
    cocycle: CocycleArg,
    #[arg(long, value_enum, default_value = "table")]
    format: ReportFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum CocycleArg {
    Standard,
    Alternate,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, value_parser = parse_weight)]
    weight: AffineHW,
    #[arg(long)]
    max_charge: u32,
    #[arg(long)]
    max_q: u32,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct DslArgs {
    #[arg(long)]
    expr: String,
    #[arg(long, default_value_t = 4)]
    max_charge: u32,
    #[arg(long, default_value_t = 8)]
    max_q: u32,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

fn parse_weight(text: &str) -> Result<AffineHW, String> {
    let parts: Vec<u32> = text
        .split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [k0, k1, k2] => AffineHW::new(k0, k1, k2).map_err(|e| e.to_string()),
        _ => Err(format!("expected k0,k1,k2, got {text:?}")),
    }
}

fn parse_fault(text: &str) -> Result<Fault, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [r1, r2, s] = parts[..] else {
        return Err(format!("expected r1,r2,s, got {text:?}"));
    };
    Ok(Fault {
        r1: r1.parse().map_err(|e| format!("{r1:?}: {e}"))?,
        r2: r2.parse().map_err(|e| format!("{r2:?}: {e}"))?,
        s: s.parse().map_err(|e| format!("{s:?}: {e}"))?,
    })
}

/// A failure that ends the command with a specific exit code.
struct Exit {
    code: u8,
    message: String,
}

impl Exit {
    fn usage(message: impl ToString) -> Exit {
        Exit {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<OracleError> for Exit {
    fn from(e: OracleError) -> Exit {
        let code = match e {
            OracleError::BudgetExceeded { .. } => EXIT_BUDGET,
            OracleError::IndexRange { .. } => EXIT_USAGE,
            OracleError::Cache { .. } => EXIT_FAIL,
        };
        Exit {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Exit {
    fn from(e: io::Error) -> Exit {
        Exit {
            code: EXIT_FAIL,
            message: e.to_string(),
        }
    }
}

fn envelope(max_charge: u32, s_max: u32) -> Envelope {
    Envelope::new(max_charge, 0, s_max as i64).expect("s_max is nonnegative")
}

fn sorted_rows(series: &Series) -> Vec<(u32, u32, i64, String)> {
    let mut rows: Vec<_> = series
        .terms()
        .map(|(&(r1, r2, s), c)| (r1, r2, s, c.to_string()))
        .collect();
    rows.sort_by_key(|&(r1, r2, s, _)| (r1 + r2, r1, s));
    rows
}

fn render_series(out: &mut impl Write, series: &Series, format: Format) -> io::Result<()> {
    match format {
        Format::Json => writeln!(out, "{}", series.to_json()),
        Format::Csv => {
            writeln!(out, "r1,r2,s,coeff")?;
            for (r1, r2, s, c) in sorted_rows(series) {
                writeln!(out, "{r1},{r2},{s},{c}")?;
            }
            Ok(())
        }
        Format::Table => {
            let env = series.envelope();
            writeln!(
                out,
                "window  r1+r2 <= {}, s in [{}, {}]",
                env.max_charge, env.s_min, env.s_max
            )?;
            writeln!(out, "{:>3} {:>3} {:>4}  coeff", "r1", "r2", "s")?;
            for (r1, r2, s, c) in sorted_rows(series) {
                writeln!(out, "{r1:>3} {r2:>3} {s:>4}  {c}")?;
            }
            Ok(())
        }
    }
}

fn character(args: CharacterArgs, out: &mut impl Write) -> Result<ExitCode, Exit> {
    let family = match args.family {
        FamilyArg::A => Family::A,
        FamilyArg::B => Family::B,
        FamilyArg::C => Family::C,
    };
    let spec = CharSpec::new(family, args.k, args.i).map_err(Exit::usage)?;
    let series = char_of(&spec, envelope(args.max_charge, args.max_q)).map_err(|e| Exit {
        code: EXIT_FAIL,
        message: e.to_string(),
    })?;
    if let Format::Table = args.format {
        let w = spec.weight();
        let (o1, o2) = charge_offsets(&w);
        let pre = prefactor(&w);
        writeln!(
            out,
            "weight  {w} (family {:?}, k={}, i={})",
            spec.family(),
            spec.level(),
            spec.index()
        )?;
        writeln!(out, "charge offsets  <λ1,Λ>={o1}  <λ2,Λ>={o2}")?;
        writeln!(out, "conformal weight  h={}", conformal_weight(&w))?;
        writeln!(
            out,
            "χ = x1^({}) x2^({}) q^({}) · χ′",
            pre.x1, pre.x2, pre.q
        )?;
    }
    render_series(out, &series, args.format)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs, out: &mut impl Write) -> Result<ExitCode, Exit> {
    if args.k == 0 {
        return Err(Exit::usage("--k must be at least 1"));
    }
    let ids = match args.identity {
        Some(tag) => vec![IdentityId::new(tag, args.k, args.i).map_err(Exit::usage)?],
        None => identities_at(args.k),
    };
    let report = verify_selected(
        args.k,
        &ids,
        args.max_charge,
        args.max_q as i64,
        args.inject_fault,
    );
    match args.format {
        ReportFormat::Json => writeln!(out, "{}", report.to_json())?,
        ReportFormat::Table => write!(out, "{}", report.render_table())?,
    }
    Ok(if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    })
}

fn render_dims(out: &mut impl Write, dims: &GradedDims, format: ReportFormat) -> io::Result<()> {
    match format {
        ReportFormat::Json => writeln!(out, "{}", dims.to_json()),
        ReportFormat::Table => {
            writeln!(
                out,
                "weight  {}  window r1+r2 <= {}, s in [0, {}]",
                dims.weight, dims.max_charge, dims.max_weight
            )?;
            writeln!(out, "{:>3} {:>3} {:>3}  dim", "r1", "r2", "s")?;
            write!(out, "{dims}")
        }
    }
}

fn oracle(args: OracleArgs, out: &mut impl Write) -> Result<ExitCode, Exit> {
    let cocycle = match args.cocycle {
        CocycleArg::Standard => Cocycle::Standard,
        CocycleArg::Alternate => Cocycle::Alternate,
    };
    let config = OracleConfig {
        budget: args.budget,
        cocycle,
        reverse_order: false,
    };
    let cache_dir = std::env::var_os("PSL3_CACHE_DIR")
        .map(PathBuf::from)
        .or(args.cache_dir);
    let dims = match cache_dir {
        Some(dir) => {
            let (dims, status) = principal_dims_cached(
                args.weight,
                args.max_charge,
                args.max_weight,
                &config,
                &dir,
            )?;
            let note = match status {
                CacheStatus::Hit => "served from cache",
                CacheStatus::Miss => "computed and cached",
            };
            eprintln!("{note} in {}", dir.display());
            dims
        }
        None => principal_dims(args.weight, args.max_charge, args.max_weight, &config)?,
    };
    render_dims(out, &dims, args.format)?;
    Ok(ExitCode::SUCCESS)
}

fn compare(args: CompareArgs, out: &mut impl Write) -> Result<ExitCode, Exit> {
    let spec = CharSpec::classify(args.weight);
    if spec.family() == Family::G {
        return Err(Exit::usage(format!(
            "{} has all three coefficients positive: no closed character formula, use `psl3 oracle` instead",
            args.weight
        )));
    }
    let config = OracleConfig {
        budget: args.budget,
        ..OracleConfig::default()
    };
    let dims = principal_dims(args.weight, args.max_charge, args.max_q, &config)?;
    let series = char_of(&spec, envelope(args.max_charge, args.max_q)).map_err(|e| Exit {
        code: EXIT_FAIL,
        message: e.to_string(),
    })?;
    let agreement = dims.compare_with(&series);
    let env = agreement.envelope;
    match agreement.first_difference {
        None => {
            writeln!(
                out,
                "{}: oracle and formula agree on r1+r2 <= {}, s in [{}, {}] ({} nonzero blocks)",
                args.weight,
                env.max_charge,
                env.s_min,
                env.s_max,
                dims.entries().count()
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Some(((r1, r2, s), oracle, formula)) => {
            writeln!(
                out,
                "{}: mismatch at ({r1},{r2},{s}): oracle {oracle}, formula {formula}",
                args.weight
            )?;
            Ok(ExitCode::from(EXIT_FAIL))
        }
    }
}

fn dsl(args: DslArgs, out: &mut impl Write) -> Result<ExitCode, Exit> {
    let expr = parse_identity(&args.expr).map_err(|e| {
        Exit::usage(format!(
            "{e}\n  {}\n  {}^",
            args.expr,
            " ".repeat(args.expr[..e.offset].chars().count())
        ))
    })?;
    let residual =
        eval_identity(&expr, args.max_charge, args.max_q as i64).map_err(|e| match e {
            RecursionError::Character(CharError::UnsupportedFamily(w)) => {
                Exit::usage(format!("{w} has no closed character formula"))
            }
            other => Exit {
                code: EXIT_FAIL,
                message: other.to_string(),
            },
        })?;
    let env = residual.envelope();
    if residual.is_zero() {
        writeln!(
            out,
            "zero on window r1+r2 <= {}, s in [{}, {}]",
            env.max_charge, env.s_min, env.s_max
        )?;
        return Ok(ExitCode::SUCCESS);
    }
    render_series(out, &residual, args.format)?;
    Ok(ExitCode::from(EXIT_FAIL))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Character(a) => character(a, &mut out),
        Command::Verify(a) => verify(a, &mut out),
        Command::Oracle(a) => oracle(a, &mut out),
        Command::Compare(a) => compare(a, &mut out),
        Command::Dsl(a) => dsl(a, &mut out),
    };
    match result {
        Ok(code) => code,
        Err(Exit { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
