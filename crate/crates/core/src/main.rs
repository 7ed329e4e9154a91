use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ckforms::identities::SuiteOptions;
use ckforms::report::{
    cmd_analyze, cmd_selftest, cmd_sweep, parse_axis, AlgebraSource, AnalyzeOptions, BackendChoice, CliError, Family,
    FamilySpec, EXIT_CONFIDENCE,
};
use ckforms::Tolerance;

#[derive(Parser)]
#[command(name = "ckforms", version, about = "Conformal Killing 2-forms on 4-dimensional metric Lie algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify one algebra, given by a family or a JSON file.
    Analyze {
        /// JSON file with structure constants.
        path: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Include the Killing connection matrices in JSON output.
        #[arg(long)]
        matrices: bool,
    },
    /// Analyze a family over a grid. Each parameter takes `v1,v2,..` or `lo:step:hi`.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Check the algebraic and curvature identities on random inputs.
    Selftest {
        #[arg(long, default_value_t = 25)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Flip the sign of the trace-free Ricci term (the run must then fail).
        #[arg(long)]
        flip_ricci_sign: bool,
        #[arg(long, value_enum, default_value_t = BackendArg::Rational)]
        backend: BackendArg,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
}

impl ParamArgs {
    fn given(&self) -> Vec<(&'static str, &str)> {
        [("a", &self.a), ("b", &self.b), ("alpha", &self.alpha), ("c", &self.c)]
            .into_iter()
            .filter_map(|(n, v)| v.as_deref().map(|v| (n, v)))
            .collect()
    }
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, value_enum, default_value_t = Format::Md)]
    format: Format,
    #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
    backend: BackendArg,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

impl CommonArgs {
    fn options(&self, matrices: bool) -> Result<AnalyzeOptions, CliError> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(CliError::Parse(format!("--tol must be positive, got {}", self.tol)));
        }
        Ok(AnalyzeOptions { backend: self.backend.into(), tol: Tolerance::new(self.tol), matrices })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Json,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum BackendArg {
    Auto,
    Rational,
    Float,
}

impl From<BackendArg> for BackendChoice {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Auto => BackendChoice::Auto,
            BackendArg::Rational => BackendChoice::Rational,
            BackendArg::Float => BackendChoice::Float,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Abelian,
    Type2,
    Type3,
    Type4,
    Type6,
    Gab,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Abelian => Family::Abelian,
            FamilyArg::Type2 => Family::Type2,
            FamilyArg::Type3 => Family::Type3,
            FamilyArg::Type4 => Family::Type4,
            FamilyArg::Type6 => Family::Type6,
            FamilyArg::Gab => Family::Gab,
        }
    }
}

fn check_params(family: Family, given: &[(&str, &str)]) -> Result<(), CliError> {
    for (name, _) in given {
        if !family.parameters().contains(name) {
            return Err(CliError::Parse(format!("family {} takes no --{name}", family.name())));
        }
    }
    Ok(())
}

fn analyze(path: Option<PathBuf>, params: ParamArgs, common: CommonArgs, matrices: bool) -> Result<i32, CliError> {
    let source = match (path, params.family) {
        (Some(_), Some(_)) => return Err(CliError::Parse("give either a JSON path or --family, not both".into())),
        (None, None) => return Err(CliError::Parse("give a JSON path or --family".into())),
        (Some(p), None) => {
            let text = std::fs::read_to_string(&p).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
            AlgebraSource::from_json_text(&text)?
        }
        (None, Some(f)) => {
            let family = f.into();
            let given = params.given();
            check_params(family, &given)?;
            AlgebraSource::Family(FamilySpec::new(family, &given))
        }
    };
    let report = cmd_analyze(&source, &common.options(matrices)?)?;
    match common.format {
        Format::Md => print!("{}", report.to_markdown()),
        Format::Json => println!("{}", report.to_json()),
    }
    if report.has_confidence_warning() {
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        return Ok(EXIT_CONFIDENCE);
    }
    Ok(0)
}

fn sweep(params: ParamArgs, common: CommonArgs) -> Result<i32, CliError> {
    let family: Family = params.family.ok_or_else(|| CliError::Parse("sweep needs --family".into()))?.into();
    let given = params.given();
    check_params(family, &given)?;
    let mut axes = Vec::new();
    for name in family.parameters() {
        let spec = given
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| CliError::Parse(format!("sweep over {} needs --{name}", family.name())))?;
        axes.push((name.to_string(), parse_axis(spec)?));
    }
    let table = cmd_sweep(family, &axes, &common.options(false)?);
    match common.format {
        Format::Md => print!("{}", table.to_markdown()),
        Format::Json => println!("{}", table.to_json()),
    }
    Ok(if table.warnings.is_empty() { 0 } else { EXIT_CONFIDENCE })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { path, params, common, matrices } => analyze(path, params, common, matrices),
        Command::Sweep { params, common } => sweep(params, common),
        Command::Selftest { trials, seed, flip_ricci_sign, backend, tol } => {
            let suite = SuiteOptions { trials, seed, flip_ricci_term: flip_ricci_sign };
            let summary = cmd_selftest(backend.into(), &suite, &Tolerance::new(tol));
            print!("{}", summary.to_text());
            Ok(if summary.passed() { 0 } else { 1 })
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
