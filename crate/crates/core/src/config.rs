//! Command-line and config-file handling.
//!
//! Values are layered: flags override the config file, which overrides the
//! `CSTAR_FLOW_SEED` environment variable (seed only), which overrides the
//! built-in defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::tolerances::Tolerances;

/// Environment variable that replaces the default master seed.
pub const SEED_ENV: &str = "CSTAR_FLOW_SEED";

pub const DEFAULT_DIM: usize = 3;
pub const DEFAULT_COLS: usize = 2;
pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_SEED: u64 = 42;
pub const MAX_DIM: usize = 64;
pub const MAX_COLS: usize = 8;
pub const DEMO_MIN_DIM: usize = 2;
pub const DEMO_MAX_DIM: usize = 8;
pub const DEMO_DEFAULT_DIM: usize = 2;
pub const DEMO_DEFAULT_SEED: u64 = 1;

/// Failure to turn arguments into a runnable configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad flag, value or config file; exit code 2.
    Usage(String),
    /// `--help` or `--version`: print and exit 0.
    Info(String),
    /// Reading or writing a file failed; exit code 2.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Info(m) => f.write_str(m),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
pub enum Suite {
    ModuleAxioms,
    Morphism,
    Unitary,
    Derivation,
    Dynamics,
    All,
}

impl Suite {
    /// The concrete suites, in run order.
    pub const CONCRETE: [Suite; 5] = [
        Suite::ModuleAxioms,
        Suite::Morphism,
        Suite::Unitary,
        Suite::Derivation,
        Suite::Dynamics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ModuleAxioms => "module-axioms",
            Suite::Morphism => "morphism",
            Suite::Unitary => "unitary",
            Suite::Derivation => "derivation",
            Suite::Dynamics => "dynamics",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    /// Concrete suites to run, deduplicated, in run order (`all` expanded).
    pub suites: Vec<Suite>,
    pub algebra_dim: usize,
    pub module_cols: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub tolerances: Tolerances,
    /// Names and values given with `--tol` or `tol.NAME` in the config file.
    pub overrides: BTreeMap<String, f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl SuiteConfig {
    /// Defaults for the given suites.
    pub fn new(suites: &[Suite]) -> Self {
        SuiteConfig {
            suites: expand(suites),
            algebra_dim: DEFAULT_DIM,
            module_cols: DEFAULT_COLS,
            trials: DEFAULT_TRIALS,
            master_seed: DEFAULT_SEED,
            tolerances: Tolerances::default(),
            overrides: BTreeMap::new(),
            format: Format::Text,
            out: None,
        }
    }

    /// Label for the combined report: `all` when every suite runs.
    pub fn label(&self) -> String {
        if self.suites.len() == Suite::CONCRETE.len() {
            "all".into()
        } else {
            self.suites
                .iter()
                .map(|s| s.name())
                .collect::<Vec<_>>()
                .join("+")
        }
    }

    pub fn set_tolerance(&mut self, name: &str, value: f64, flag: &str) -> Result<(), CliError> {
        self.tolerances
            .set(name, value)
            .map_err(|e| CliError::Usage(format!("{flag}: {e}")))?;
        self.overrides.insert(name.to_string(), value);
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(1..=MAX_DIM).contains(&self.algebra_dim) {
            return Err(CliError::Usage(format!(
                "--dim: must be between 1 and {MAX_DIM}, got {}",
                self.algebra_dim
            )));
        }
        if !(1..=MAX_COLS).contains(&self.module_cols) {
            return Err(CliError::Usage(format!(
                "--cols: must be between 1 and {MAX_COLS}, got {}",
                self.module_cols
            )));
        }
        if self.trials == 0 {
            return Err(CliError::Usage("--trials: must be at least 1".into()));
        }
        Ok(())
    }
}

fn expand(suites: &[Suite]) -> Vec<Suite> {
    if suites.contains(&Suite::All) {
        return Suite::CONCRETE.to_vec();
    }
    Suite::CONCRETE
        .iter()
        .copied()
        .filter(|s| suites.contains(s))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DemoConfig {
    pub algebra_dim: usize,
    pub seed: u64,
    pub zero_generator: bool,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            algebra_dim: DEMO_DEFAULT_DIM,
            seed: DEMO_DEFAULT_SEED,
            zero_generator: false,
        }
    }
}

/// A parsed command line.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Verify(SuiteConfig),
    Demo(DemoConfig),
}

#[derive(Debug, Parser)]
#[command(
    name = "cstar-flow",
    version,
    about = "Verification suites for Hilbert modules over matrix algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one or more verification suites.
    Verify(VerifyArgs),
    /// Walk through a worked example.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Suites to run.
    #[arg(value_enum, required = true)]
    suites: Vec<Suite>,
    /// Algebra dimension n (1..=64).
    #[arg(long, value_name = "N", value_parser = ranged::<1, MAX_DIM>)]
    dim: Option<usize>,
    /// Module columns k (1..=8).
    #[arg(long, value_name = "K", value_parser = ranged::<1, MAX_COLS>)]
    cols: Option<usize>,
    /// Random trials per check.
    #[arg(long, value_name = "T", value_parser = ranged::<1, { usize::MAX }>)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Flat key=value file with defaults for the options above.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

fn ranged<const LO: usize, const HI: usize>(raw: &str) -> Result<usize, String> {
    let v: usize = raw
        .parse()
        .map_err(|_| format!("not a non-negative integer: {raw:?}"))?;
    if (LO..=HI).contains(&v) {
        Ok(v)
    } else if HI == usize::MAX {
        Err(format!("must be at least {LO}"))
    } else {
        Err(format!("must be between {LO} and {HI}"))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DemoName {
    /// Generator of the flow `Ad(e^{itT})` against `i[T, V]`.
    CommutatorFlow,
}

#[derive(Debug, Args)]
struct DemoArgs {
    #[arg(value_enum)]
    name: DemoName,
    /// Matrix size (2..=8).
    #[arg(long, value_name = "N")]
    dim: Option<usize>,
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Use T = 0.
    #[arg(long)]
    zero_generator: bool,
}

/// Parses `argv` (including the program name). `env_seed` is the value of
/// [`SEED_ENV`], passed in so callers control the environment.
pub fn parse_args<I, T>(argv: I, env_seed: Option<&str>) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
            _ => {
                let text = e.to_string();
                let text = text.trim_end();
                CliError::Usage(text.strip_prefix("error: ").unwrap_or(text).to_string())
            }
        }
    })?;
    match cli.command {
        Command::Verify(args) => build_verify(args, env_seed).map(Invocation::Verify),
        Command::Demo(args) => build_demo(args).map(Invocation::Demo),
    }
}

/// Parses a `verify` command line, reading [`SEED_ENV`] from the environment.
pub fn parse_config<I, T>(argv: I) -> Result<SuiteConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let env = std::env::var(SEED_ENV).ok();
    match parse_args(argv, env.as_deref())? {
        Invocation::Verify(cfg) => Ok(cfg),
        Invocation::Demo(_) => Err(CliError::Usage("expected the verify subcommand".into())),
    }
}

fn build_verify(args: VerifyArgs, env_seed: Option<&str>) -> Result<SuiteConfig, CliError> {
    let mut cfg = SuiteConfig::new(&args.suites);

    if let Some(raw) = env_seed {
        cfg.master_seed = raw.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "{SEED_ENV}: not a 64-bit unsigned integer: {raw:?}"
            ))
        })?;
    }
    if let Some(path) = &args.config {
        apply_file(&mut cfg, path)?;
    }

    if let Some(v) = args.dim {
        cfg.algebra_dim = v;
    }
    if let Some(v) = args.cols {
        cfg.module_cols = v;
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.seed {
        cfg.master_seed = v;
    }
    for item in &args.tol {
        let (name, value) =
            split_tolerance(item).map_err(|m| CliError::Usage(format!("--tol: {m}")))?;
        cfg.set_tolerance(name, value, "--tol")?;
    }
    if let Some(v) = args.format {
        cfg.format = v;
    }
    if let Some(v) = args.out {
        cfg.out = Some(v);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn build_demo(args: DemoArgs) -> Result<DemoConfig, CliError> {
    let DemoName::CommutatorFlow = args.name;
    let mut cfg = DemoConfig::default();
    if let Some(n) = args.dim {
        if !(DEMO_MIN_DIM..=DEMO_MAX_DIM).contains(&n) {
            return Err(CliError::Usage(format!(
                "--dim: must be between {DEMO_MIN_DIM} and {DEMO_MAX_DIM}, got {n}"
            )));
        }
        cfg.algebra_dim = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.zero_generator = args.zero_generator;
    Ok(cfg)
}

fn split_tolerance(item: &str) -> Result<(&str, f64), String> {
    let (name, value) = item
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {item:?}"))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| format!("not a number: {value:?}"))?;
    Ok((name.trim(), value))
}

/// Applies a flat `key = value` file. Keys: `dim`, `cols`, `trials`, `seed`,
/// `format`, `out`, and `tol.NAME`. Blank lines and `#` comments are skipped.
fn apply_file(cfg: &mut SuiteConfig, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("--config: cannot read {}: {e}", path.display())))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = format!("--config {}:{}", path.display(), lineno + 1);
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{at}: expected key=value")))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| CliError::Usage(format!("{at}: {key}: {what} {value:?}"));
        match key {
            "dim" => cfg.algebra_dim = value.parse().map_err(|_| bad("not an integer:"))?,
            "cols" => cfg.module_cols = value.parse().map_err(|_| bad("not an integer:"))?,
            "trials" => cfg.trials = value.parse().map_err(|_| bad("not an integer:"))?,
            "seed" => {
                cfg.master_seed = value
                    .parse()
                    .map_err(|_| bad("not a 64-bit unsigned integer:"))?
            }
            "format" => {
                cfg.format = Format::from_str(value, true).map_err(|_| bad("unknown format"))?
            }
            "out" => cfg.out = Some(PathBuf::from(value)),
            _ => match key.strip_prefix("tol.") {
                Some(name) => {
                    let v: f64 = value.parse().map_err(|_| bad("not a number:"))?;
                    cfg.set_tolerance(name, v, &at)?;
                }
                None => return Err(CliError::Usage(format!("{at}: unknown key {key:?}"))),
            },
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn verify(args: &[&str], env: Option<&str>) -> Result<SuiteConfig, CliError> {
        let argv = std::iter::once("cstar-flow").chain(args.iter().copied());
        match parse_args(argv, env)? {
            Invocation::Verify(c) => Ok(c),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn usage_message(r: Result<SuiteConfig, CliError>) -> String {
        match r {
            Err(CliError::Usage(m)) => m,
            other => panic!("expected usage error, got {other:?}"),
        }
    }

    #[test]
    fn flags_set_fields() {
        let c = verify(
            &["verify", "all", "--dim", "3", "--cols", "2", "--seed", "7"],
            None,
        )
        .unwrap();
        assert_eq!(c.suites, Suite::CONCRETE.to_vec());
        assert_eq!((c.algebra_dim, c.module_cols, c.master_seed), (3, 2, 7));
        assert_eq!(c.trials, DEFAULT_TRIALS);
        assert_eq!(c.label(), "all");
    }

    #[test]
    fn tolerance_override() {
        let c = verify(&["verify", "dynamics", "--tol", "flow_leibniz=1e-9"], None).unwrap();
        assert_eq!(c.suites, vec![Suite::Dynamics]);
        assert_eq!(c.tolerances.flow_leibniz, 1e-9);
        assert_eq!(c.overrides.get("flow_leibniz"), Some(&1e-9));
        assert_eq!(c.label(), "dynamics");
    }

    #[test]
    fn usage_errors_name_the_flag() {
        assert!(usage_message(verify(&["verify", "--dim", "0"], None)).contains("--dim"));
        assert!(usage_message(verify(&["verify", "all", "--dim", "0"], None)).contains("--dim"));
        assert!(usage_message(verify(&["verify", "all", "--dim", "65"], None)).contains("--dim"));
        assert!(usage_message(verify(&["verify", "all", "--cols", "9"], None)).contains("--cols"));
        assert!(
            usage_message(verify(&["verify", "all", "--trials", "0"], None)).contains("--trials")
        );
        assert!(
            usage_message(verify(&["verify", "all", "--tol", "bogus=1"], None)).contains("--tol")
        );
        assert!(
            usage_message(verify(&["verify", "all", "--tol", "group=-1"], None)).contains("--tol")
        );
        assert!(usage_message(verify(&["verify", "all", "--seed", "x"], None)).contains("--seed"));
        assert!(usage_message(verify(&["verify", "all", "--bogus"], None)).contains("--bogus"));
    }

    #[test]
    fn precedence_flag_file_env_default() {
        assert_eq!(
            verify(&["verify", "all"], None).unwrap().master_seed,
            DEFAULT_SEED
        );
        assert_eq!(
            verify(&["verify", "all"], Some("9")).unwrap().master_seed,
            9
        );
        assert!(usage_message(verify(&["verify", "all"], Some("nine"))).contains(SEED_ENV));

        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            file,
            "# comment\nseed = 11\ndim=4\ntol.group = 1e-9\nformat=json\n"
        )
        .unwrap();
        let path = file.path().to_str().unwrap();
        let c = verify(&["verify", "morphism", "--config", path], Some("9")).unwrap();
        assert_eq!(
            (c.master_seed, c.algebra_dim, c.format),
            (11, 4, Format::Json)
        );
        assert_eq!(c.tolerances.group, 1e-9);
        let c = verify(
            &[
                "verify", "morphism", "--config", path, "--seed", "12", "--format", "text",
            ],
            Some("9"),
        )
        .unwrap();
        assert_eq!((c.master_seed, c.format), (12, Format::Text));
    }

    #[test]
    fn bad_config_files() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "dim = 0").unwrap();
        let path = file.path().to_str().unwrap();
        assert!(
            usage_message(verify(&["verify", "all", "--config", path], None)).contains("--dim")
        );

        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "colour = blue").unwrap();
        let path = file.path().to_str().unwrap();
        assert!(
            usage_message(verify(&["verify", "all", "--config", path], None)).contains("colour")
        );

        assert!(usage_message(verify(
            &["verify", "all", "--config", "/nonexistent/cfg"],
            None
        ))
        .contains("--config"));
    }

    #[test]
    fn suites_are_deduplicated_in_run_order() {
        let c = verify(&["verify", "dynamics", "morphism", "dynamics"], None).unwrap();
        assert_eq!(c.suites, vec![Suite::Morphism, Suite::Dynamics]);
        assert_eq!(c.label(), "morphism+dynamics");
    }

    #[test]
    fn demo_arguments() {
        let parse = |args: &[&str]| {
            parse_args(
                std::iter::once("cstar-flow").chain(args.iter().copied()),
                None,
            )
        };
        assert_eq!(
            parse(&["demo", "commutator-flow"]).unwrap(),
            Invocation::Demo(DemoConfig::default())
        );
        let Invocation::Demo(d) =
            parse(&["demo", "commutator-flow", "--dim", "5", "--zero-generator"]).unwrap()
        else {
            panic!()
        };
        assert_eq!((d.algebra_dim, d.zero_generator), (5, true));
        assert!(
            matches!(parse(&["demo", "commutator-flow", "--dim", "9"]), Err(CliError::Usage(m)) if m.contains("--dim"))
        );
        assert!(matches!(
            parse(&["demo", "commutator-flow", "--dim", "1"]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(parse(&["--help"]), Err(CliError::Info(_))));
    }
}
