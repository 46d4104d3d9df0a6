//! The `unical` command line.
//!
//! Exit status: 0 success, 1 units not convertible, 2 usage, parse or
//! registry error, 3 rules not well-defining.
//!
//! Structured output is one flat JSON object per invocation with string,
//! number and boolean values only. Every object carries
//! `"schema": "unical-cli/1"` and `"status"`; see the README for the fields
//! of each command.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};
use unical::convert::{classify, ClosureBounds, Consistency};
use unical::registry::{self, format_evaluated, format_symbols};
use unical::{model, ConvertError, EvaluatedUnit, Registry, RegistryError, Unit};

pub const REGISTRY_ENV: &str = "UNICAL_REGISTRY";
pub const SCHEMA: &str = "unical-cli/1";
/// Registries used when neither `--registry` nor the environment names any.
pub const DEFAULT_REGISTRIES: &[&str] = &["si", "accepted"];

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_CONVERTIBLE: u8 = 1;
pub const EXIT_ERROR: u8 = 2;
pub const EXIT_NOT_WELL_DEFINING: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "unical", version, about = "Exact unit conversion and unit algebra")]
struct Cli {
    /// Registry file, or the name of a bundled registry (si, accepted, uk).
    /// Repeatable; later registries extend earlier ones.
    #[arg(long = "registry", value_name = "PATH", global = true)]
    registries: Vec<OsString>,

    #[arg(long, value_enum, default_value_t = Format::Plain, global = true)]
    format: Format,

    /// Significant fractional digits in decimal renderings.
    #[arg(long, value_name = "N", default_value_t = 15, global = true)]
    digits: usize,

    /// Drop rules marked pathological (rad, sr in the SI bundle).
    #[arg(long, global = true)]
    no_pathological_rules: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Structured,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact conversion factor from U to V.
    Convert { from: String, to: String },
    /// Normalized form (prefix, root unit).
    Norm { unit: String },
    /// Evaluated form (factor, root unit), before and after rewriting.
    Eval { unit: String },
    /// Dimension.
    Dim { unit: String },
    /// Position of the loaded rules in the conversion hierarchy.
    Classify,
    /// Every rewriting step of U up to the fixpoint.
    Explain { unit: String },
    /// Registered symbols.
    List { kind: ListKind },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ListKind {
    Units,
    Prefixes,
    Dimensions,
}

/// Command outcome: exit status plus ordered fields.
struct Report {
    status: u8,
    state: &'static str,
    fields: Vec<(String, Value)>,
    warnings: Vec<String>,
}

impl Report {
    fn new(status: u8, state: &'static str) -> Self {
        Self {
            status,
            state,
            fields: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn field(&mut self, key: impl Into<String>, value: impl Into<Value>) -> &mut Self {
        self.fields.push((key.into(), value.into()));
        self
    }
}

enum Failure {
    Usage(String),
    Registry(RegistryError),
    Parse { text: String, error: unical::ParseError },
    NotWellDefining(Vec<unical::Symbol>),
    Other(String),
}

impl Failure {
    fn status(&self) -> u8 {
        match self {
            Failure::NotWellDefining(_) => EXIT_NOT_WELL_DEFINING,
            _ => EXIT_ERROR,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Registry(_) => "registry",
            Failure::Parse { .. } => "parse",
            Failure::NotWellDefining(_) => "not_well_defining",
            Failure::Other(_) => "internal",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Other(m) => m.clone(),
            Failure::Registry(e) => e.to_string(),
            Failure::Parse { text, error } => format!("in `{text}`: {error}"),
            Failure::NotWellDefining(cycle) => ConvertError::NotWellDefining { cycle: cycle.clone() }.to_string(),
        }
    }
}

impl From<ConvertError> for Failure {
    fn from(e: ConvertError) -> Self {
        match e {
            ConvertError::NotWellDefining { cycle } => Failure::NotWellDefining(cycle),
            other => Failure::Other(other.to_string()),
        }
    }
}

impl From<unical::ModelError> for Failure {
    fn from(e: unical::ModelError) -> Self {
        Failure::Other(e.to_string())
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// status. `env_registries` is the value of [`REGISTRY_ENV`], a path list.
pub fn run<I, A>(args: I, env_registries: Option<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_ERROR
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let command = command_name(&cli.command);
    let result = load(&cli, env_registries).and_then(|reg| execute(&cli, &reg));
    match result {
        Ok(report) => emit(&cli, command, &report, out, err),
        Err(failure) => {
            match cli.format {
                Format::Plain => {
                    let _ = writeln!(err, "error: {}", failure.message());
                }
                Format::Structured => {
                    let mut m = Map::new();
                    m.insert("schema".into(), SCHEMA.into());
                    m.insert("command".into(), command.into());
                    m.insert("status".into(), "error".into());
                    m.insert("error_kind".into(), failure.kind().into());
                    m.insert("message".into(), failure.message().into());
                    m.insert("exit_code".into(), failure.status().into());
                    let _ = writeln!(out, "{}", Value::Object(m));
                }
            }
            failure.status()
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Convert { .. } => "convert",
        Command::Norm { .. } => "norm",
        Command::Eval { .. } => "eval",
        Command::Dim { .. } => "dim",
        Command::Classify => "classify",
        Command::Explain { .. } => "explain",
        Command::List { .. } => "list",
    }
}

fn emit(cli: &Cli, command: &str, report: &Report, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match cli.format {
        Format::Plain => {
            let width = report.fields.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
            if report.state == "not_convertible" {
                let _ = writeln!(out, "not convertible");
            }
            for (k, v) in &report.fields {
                let text = match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let _ = writeln!(out, "{k:<width$}  {text}");
            }
            for w in &report.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
        }
        Format::Structured => {
            let mut m = Map::new();
            m.insert("schema".into(), SCHEMA.into());
            m.insert("command".into(), command.into());
            m.insert("status".into(), report.state.into());
            for (k, v) in &report.fields {
                m.insert(k.replace(' ', "_"), v.clone());
            }
            if !report.warnings.is_empty() {
                m.insert("warnings".into(), report.warnings.join("; ").into());
            }
            let _ = writeln!(out, "{}", Value::Object(m));
        }
    }
    report.status
}

fn load(cli: &Cli, env_registries: Option<OsString>) -> Result<Registry, Failure> {
    let names: Vec<OsString> = if !cli.registries.is_empty() {
        cli.registries.clone()
    } else if let Some(list) = env_registries.filter(|v| !v.is_empty()) {
        std::env::split_paths(&list).map(PathBuf::into_os_string).collect()
    } else {
        DEFAULT_REGISTRIES.iter().map(OsString::from).collect()
    };
    let mut texts: Vec<(String, String)> = Vec::new();
    for name in &names {
        let path = Path::new(name);
        let label = path.display().to_string();
        if !path.is_file() {
            if let Some(text) = registry::bundle(&label) {
                texts.push((label, text.to_string()));
                continue;
            }
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read registry `{label}`: {e}")))?;
        texts.push((label, text));
    }
    let docs: Vec<(&str, &str)> = texts.iter().map(|(n, t)| (n.as_str(), t.as_str())).collect();
    let reg = Registry::load_all(&docs).map_err(Failure::Registry)?;
    Ok(if cli.no_pathological_rules {
        reg.with_conversion(reg.conversion().without_pathological())
    } else {
        reg
    })
}

fn parse(reg: &Registry, text: &str) -> Result<Unit, Failure> {
    reg.parse(text).map_err(|error| Failure::Parse {
        text: text.to_string(),
        error,
    })
}

fn execute(cli: &Cli, reg: &Registry) -> Result<Report, Failure> {
    match &cli.command {
        Command::Convert { from, to } => convert(cli, reg, from, to),
        Command::Norm { unit } => {
            let n = model::norm(&parse(reg, unit)?);
            let mut r = Report::new(EXIT_OK, "ok");
            r.field("unit", reg.format_unit(&parse(reg, unit)?))
                .field("normalized", reg.format_normalized(&n))
                .field("prefix", format_symbols(&n.prefix))
                .field("root", format_symbols(&n.root));
            Ok(r)
        }
        Command::Eval { unit } => {
            let u = parse(reg, unit)?;
            let e = reg.system().eval(&u)?;
            let mut r = Report::new(EXIT_OK, "ok");
            r.field("unit", reg.format_unit(&u))
                .field("evaluated", format_evaluated(&e))
                .field("factor", e.factor.to_string())
                .field("root", format_symbols(&e.root));
            match reg.converter() {
                Ok(conv) => {
                    let w = conv.rwr_star(&u)?;
                    r.field("rewritten", format_evaluated(&w))
                        .field("rewritten factor", w.factor.to_string())
                        .field("rewritten root", format_symbols(&w.root));
                }
                Err(e) => r.warnings.push(format!("no rewriting: {e}")),
            }
            Ok(r)
        }
        Command::Dim { unit } => {
            let u = parse(reg, unit)?;
            let mut r = Report::new(EXIT_OK, "ok");
            r.field("dimension", reg.format_dimension(&reg.system().dim(&u)?));
            Ok(r)
        }
        Command::Classify => classify_rules(reg),
        Command::Explain { unit } => {
            let u = parse(reg, unit)?;
            let conv = reg.converter()?;
            let steps = conv.trace(&u)?;
            let mut r = Report::new(EXIT_OK, "ok");
            r.field("steps", steps.len() - 1);
            for (i, e) in steps.iter().enumerate() {
                r.field(format!("step {i}"), format_evaluated(e));
            }
            r.warnings.extend(pathological_warning(reg, &steps));
            Ok(r)
        }
        Command::List { kind } => {
            let sys = reg.system();
            let mut r = Report::new(EXIT_OK, "ok");
            match kind {
                ListKind::Units => {
                    for (s, d) in sys.units() {
                        r.field(s.to_string(), reg.format_dimension(d));
                    }
                }
                ListKind::Prefixes => {
                    for (s, v) in sys.prefixes() {
                        r.field(s.to_string(), v.to_string());
                    }
                }
                ListKind::Dimensions => {
                    for (i, s) in sys.dimensions().iter().enumerate() {
                        r.field(s.to_string(), i);
                    }
                }
            }
            Ok(r)
        }
    }
}

fn convert(cli: &Cli, reg: &Registry, from: &str, to: &str) -> Result<Report, Failure> {
    let u = parse(reg, from)?;
    let v = parse(reg, to)?;
    let conv = reg.converter()?;
    let outcome = conv.outcome(&u, &v)?;
    let mut r = match &outcome.ratio {
        Some(ratio) => {
            let decimal = ratio.to_decimal(cli.digits);
            let mut r = Report::new(EXIT_OK, "converted");
            r.field("ratio", ratio.to_string())
                .field("ratio num", ratio.numer().to_string())
                .field("ratio den", ratio.denom().to_string())
                .field("decimal", decimal.to_string())
                .field("decimal exact", decimal.exact)
                .field("root", format_symbols(&outcome.source.root));
            r
        }
        None => {
            let mut r = Report::new(EXIT_NOT_CONVERTIBLE, "not_convertible");
            let diff = outcome.source.root.mul(&outcome.target.root.inv());
            r.field("source root", format_symbols(&outcome.source.root))
                .field("target root", format_symbols(&outcome.target.root))
                .field("root difference", format_symbols(&diff));
            r
        }
    };
    r.field("source", format_evaluated(&outcome.source))
        .field("target", format_evaluated(&outcome.target));
    let mut steps = conv.trace(&u)?;
    steps.extend(conv.trace(&v)?);
    r.warnings.extend(pathological_warning(reg, &steps));
    Ok(r)
}

/// Names the pathological rules whose base units were rewritten on the way.
fn pathological_warning(reg: &Registry, steps: &[EvaluatedUnit]) -> Option<String> {
    let used: Vec<String> = reg
        .conversion()
        .rules()
        .filter(|(b, rule)| rule.pathological && steps.iter().any(|e| e.root.get(b) != 0))
        .map(|(b, _)| b.to_string())
        .collect();
    (!used.is_empty()).then(|| {
        format!(
            "result relies on rules that cancel to a pure number: {} (use --no-pathological-rules to disable them)",
            used.join(", ")
        )
    })
}

fn classify_rules(reg: &Registry) -> Result<Report, Failure> {
    let triples = reg.conversion().to_triples();
    let report = classify(reg.system(), &triples, ClosureBounds::default())?;
    let mut r = Report::new(EXIT_OK, "ok");
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    r.field("rules", triples.len())
        .field("conversion", yes_no(report.violation.is_none()))
        .field("defining", yes_no(report.is_defining))
        .field("well defining", yes_no(report.is_well_defining))
        .field("regular", yes_no(report.is_regular));
    if let Some(dep) = &report.dependencies {
        if let Some(bound) = dep.iteration_bound {
            r.field("iteration bound", bound);
            let depths: Vec<String> = reg
                .system()
                .units()
                .filter_map(|(s, _)| dep.depth.get(s).filter(|d| **d > 0).map(|d| format!("{s}:{d}")))
                .collect();
            r.field("depths", depths.join(" "));
        }
        if let Some(cycle) = &dep.cycle_witness {
            let mut names: Vec<String> = cycle.iter().map(|s| s.to_string()).collect();
            names.push(names[0].clone());
            r.field("cycle", names.join(" > "));
            r.status = EXIT_NOT_WELL_DEFINING;
            r.state = "not_well_defining";
        }
    }
    match &report.consistency {
        Consistency::Guaranteed => {
            r.field("consistency", "guaranteed");
        }
        Consistency::WitnessFound(w) => {
            r.field("consistency", "inconsistent");
            r.field("witness ratio", w.ratio.to_string());
        }
        Consistency::Unknown => {
            r.field("consistency", "unknown");
        }
    }
    let flagged: Vec<String> = reg
        .conversion()
        .rules()
        .filter(|(_, rule)| rule.pathological)
        .map(|(b, _)| b.to_string())
        .collect();
    r.field("pathological", flagged.join(" "));
    Ok(r)
}
