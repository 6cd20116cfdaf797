//! Command-line front end. All rationals cross the boundary as `"p/q"`
//! strings; decimal columns are advisory.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use udtcert::construction::{figure_rows, truncate, TruncatedSet};
use udtcert::density::{
    inf_density_over_range, measure_in, one_sided_density, DensityBound, Mode, Side,
};
use udtcert::scalar::Scalar;
use udtcert::suites::{run_suite, CheckResult, Suite, SuiteConfig, MAX_DEPTH, MAX_INDEX};
use udtcert::witness::{
    attack_udt, find_non_sudt_witness, find_non_udt_witness, sudt_deltas_finite_union,
    Certificate, Sequence, SequenceSpec,
};
use udtcert::{Interval, IntervalSet, Rational};

const DECIMAL_DIGITS: usize = 12;
const DEFAULT_EPSILON: &str = "1/1099511627776";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Resource(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Resource(_) => 3,
        }
    }
}

impl From<udtcert::Error> for CliError {
    fn from(e: udtcert::Error) -> Self {
        use udtcert::Error as E;
        match e {
            E::CapExceeded { .. } | E::RangeExhausted(_) | E::NeedsFinerEpsilon { .. } => {
                CliError::Resource(e.to_string())
            }
            E::Certificate(_) => CliError::Verification(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

type CliResult<T> = Result<T, CliError>;

fn rational(s: &str) -> Result<Rational, String> {
    Rational::parse_scalar(s).map_err(|e| e.to_string())
}

fn positive_rational(s: &str) -> Result<Rational, String> {
    let v = rational(s)?;
    if v <= Rational::from_int(0) {
        return Err(format!("{s} must be positive"));
    }
    Ok(v)
}

fn sequence(s: &str) -> Result<Sequence, String> {
    s.parse().map_err(|e: udtcert::Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "udtcert", version, about = "Exact certificates for density-type counterexamples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Truncate the construction at a removal-length threshold and write it as JSON.
    Build {
        #[arg(long, value_parser = positive_rational)]
        epsilon: Rational,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bound the measure of the set inside [lo, hi].
    Measure {
        #[command(flatten)]
        set: SetSource,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        lo: Rational,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        hi: Rational,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Bound the one-sided or maximal density at x, at radius r or over [r, r-hi].
    Density {
        #[command(flatten)]
        set: SetSource,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        x: Rational,
        #[arg(long, value_parser = positive_rational)]
        r: Rational,
        /// Take the infimum over radii in [r, r-hi].
        #[arg(long, value_parser = positive_rational)]
        r_hi: Option<Rational>,
        #[arg(long, value_enum, default_value_t = ModeArg::Max)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Density bounds at evenly spaced radii, as CSV.
    Profile {
        #[command(flatten)]
        set: SetSource,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        x: Rational,
        #[arg(long, value_parser = positive_rational)]
        r_min: Rational,
        #[arg(long, value_parser = positive_rational)]
        r_max: Rational,
        #[arg(long, default_value_t = 16)]
        steps: u32,
        #[arg(long, value_enum, default_value_t = SideArg::Both)]
        side: SideArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a check suite, or re-verify a certificate file.
    Verify {
        #[arg(long, value_enum, conflicts_with = "certificate")]
        suite: Option<SuiteArg>,
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 6)]
        index: u32,
        #[arg(long, value_parser = positive_rational, default_value = DEFAULT_EPSILON)]
        epsilon: Rational,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Search for a witness, write its certificate and re-verify it.
    Witness(WitnessArgs),
    /// Labeled I/J/K intervals of the construction, as CSV.
    Figure {
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 4)]
        index_cap: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SetSource {
    /// TruncatedSet JSON written by `build`.
    #[arg(long, conflicts_with = "epsilon")]
    set: Option<PathBuf>,
    /// Build the truncation in memory instead of reading a file.
    #[arg(long, value_parser = positive_rational)]
    epsilon: Option<Rational>,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[arg(long, value_enum)]
    kind: WitnessKind,
    /// `geom:C:Q` (γ_n = 1 − C·Q^n) or `table:g1,g2,...`.
    #[arg(long, value_parser = sequence)]
    gamma: Option<Sequence>,
    /// `geom:C:Q` (δ_n = C·Q^n) or `table:d1,d2,...`.
    #[arg(long, value_parser = sequence)]
    delta: Option<Sequence>,
    #[arg(long, default_value_t = 3)]
    levels: usize,
    #[arg(long, default_value_t = 1)]
    j_max: usize,
    /// Largest index any search may try.
    #[arg(long)]
    cap: Option<u32>,
    /// non-udt: treat the pair as the claimed fine sequences and coarsen first.
    #[arg(long)]
    coarsen: bool,
    /// sudt-finite: components as `lo:hi,lo:hi`.
    #[arg(long)]
    intervals: Option<String>,
    #[arg(long, default_value_t = 3)]
    n_max: usize,
    #[arg(long, value_parser = positive_rational, default_value = DEFAULT_EPSILON)]
    epsilon: Rational,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Left,
    Right,
    Max,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Left => Mode::Left,
            ModeArg::Right => Mode::Right,
            ModeArg::Max => Mode::Max,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteArg {
    Calc,
    Lemma,
    Kicsi,
    Base2,
    Disjoint,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WitnessKind {
    NonUdt,
    NonSudt,
    SudtFinite,
}

/// Writes via a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Sends `body` to `out` when a path is given (and `summary` to stdout),
/// otherwise `body` to stdout and `summary` to stderr.
fn emit(out: Option<&Path>, body: &[u8], summary: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(path) => {
            write_atomic(path, body)?;
            stdout.write_all(summary.as_bytes()).map_err(stdout_err)
        }
        None => {
            stdout.write_all(body).map_err(stdout_err)?;
            eprint!("{summary}");
            Ok(())
        }
    }
}

fn decimal(q: &Rational) -> String {
    q.to_decimal(DECIMAL_DIGITS)
}

fn load_set(src: &SetSource) -> CliResult<TruncatedSet<Rational>> {
    match (&src.set, &src.epsilon) {
        (Some(path), _) => {
            let text = read_file(path)?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: not a truncated set: {e}", path.display())))
        }
        (None, Some(eps)) => Ok(truncate(eps)?),
        (None, None) => Err(CliError::Usage("give --set FILE or --epsilon E".into())),
    }
}

fn bound_json(b: &DensityBound<Rational>) -> serde_json::Value {
    json!({
        "lo": b.lo.render(),
        "hi": b.hi.render(),
        "lo_decimal": decimal(&b.lo),
        "hi_decimal": decimal(&b.hi),
    })
}

fn bound_text(label: &str, b: &DensityBound<Rational>) -> String {
    format!(
        "{label} lo = {} (~{})\n{label} hi = {} (~{})\n",
        b.lo.render(),
        decimal(&b.lo),
        b.hi.render(),
        decimal(&b.hi)
    )
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Build { epsilon, out } => cmd_build(&epsilon, out.as_deref(), stdout),
        Command::Measure {
            set,
            lo,
            hi,
            format,
        } => {
            let t = load_set(&set)?;
            let j = Interval::closed(lo, hi)?;
            let b = measure_in(&t, &j);
            let text = match format {
                Format::Json => format!("{}\n", bound_json(&b)),
                Format::Text => bound_text("measure", &b),
            };
            stdout.write_all(text.as_bytes()).map_err(stdout_err)
        }
        Command::Density {
            set,
            x,
            r,
            r_hi,
            mode,
            format,
        } => {
            let t = load_set(&set)?;
            let b = match &r_hi {
                Some(r_hi) => inf_density_over_range(&t, &x, &r, r_hi, mode.into())?,
                None => inf_density_over_range(&t, &x, &r, &r, mode.into())?,
            };
            let text = match format {
                Format::Json => {
                    let mut v = bound_json(&b);
                    v["x"] = json!(x.render());
                    v["r"] = json!(r.render());
                    if let Some(r_hi) = &r_hi {
                        v["r_hi"] = json!(r_hi.render());
                    }
                    format!("{v}\n")
                }
                Format::Text => bound_text("density", &b),
            };
            stdout.write_all(text.as_bytes()).map_err(stdout_err)
        }
        Command::Profile {
            set,
            x,
            r_min,
            r_max,
            steps,
            side,
            out,
        } => {
            let t = load_set(&set)?;
            cmd_profile(&t, &x, &r_min, &r_max, steps, side, out.as_deref(), stdout)
        }
        Command::Verify {
            suite,
            certificate,
            depth,
            index,
            epsilon,
            format,
        } => match (suite, certificate) {
            (_, Some(path)) => cmd_verify_certificate(&path, stdout),
            (Some(suite), None) => {
                let cfg = SuiteConfig {
                    depth,
                    index,
                    epsilon,
                };
                cmd_verify_suites(suite, &cfg, format, stdout)
            }
            (None, None) => Err(CliError::Usage("give --suite or --certificate".into())),
        },
        Command::Witness(args) => cmd_witness(&args, stdout),
        Command::Figure {
            depth,
            index_cap,
            out,
        } => cmd_figure(depth, index_cap, out.as_deref(), stdout),
    }
}

fn cmd_build(epsilon: &Rational, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    let t = truncate(epsilon)?;
    let mut body = serde_json::to_vec_pretty(&t).map_err(|e| CliError::Usage(e.to_string()))?;
    body.push(b'\n');
    let summary = format!(
        "components {}\nmeasure(upper) {} (~{})\nomitted_mass {} (~{})\n",
        t.upper.len(),
        t.upper.measure().render(),
        decimal(&t.upper.measure()),
        t.omitted_mass.render(),
        decimal(&t.omitted_mass)
    );
    emit(out, &body, &summary, stdout)
}

#[allow(clippy::too_many_arguments)]
fn cmd_profile(
    t: &TruncatedSet<Rational>,
    x: &Rational,
    r_min: &Rational,
    r_max: &Rational,
    steps: u32,
    side: SideArg,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    if r_min > r_max || steps == 0 {
        return Err(CliError::Usage("need r-min <= r-max and steps >= 1".into()));
    }
    let sides: &[Side] = match side {
        SideArg::Left => &[Side::Left],
        SideArg::Right => &[Side::Right],
        SideArg::Both => &[Side::Left, Side::Right],
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Usage(e.to_string());
    w.write_record(["x", "r", "side", "lo", "hi", "lo_decimal", "hi_decimal"])
        .map_err(csv_err)?;
    let span = r_max.clone() - r_min.clone();
    for i in 0..=steps {
        let r = r_min.clone() + span.clone() * Rational::ratio(i64::from(i), i64::from(steps));
        for &s in sides {
            let b = one_sided_density(t, x, &r, s)?;
            w.write_record([
                x.render(),
                r.render(),
                s.to_string(),
                b.lo.render(),
                b.hi.render(),
                decimal(&b.lo),
                decimal(&b.hi),
            ])
            .map_err(csv_err)?;
        }
        if r_min == r_max {
            break;
        }
    }
    let body = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    emit(out, &body, "", stdout)
}

fn suites_for(arg: SuiteArg) -> Vec<Suite> {
    match arg {
        SuiteArg::Calc => vec![Suite::Calc],
        SuiteArg::Lemma => vec![Suite::Lemma],
        SuiteArg::Kicsi => vec![Suite::Kicsi],
        SuiteArg::Base2 => vec![Suite::Base2],
        SuiteArg::Disjoint => vec![Suite::Disjoint],
        SuiteArg::All => Suite::ALL.to_vec(),
    }
}

fn cmd_verify_suites(
    arg: SuiteArg,
    cfg: &SuiteConfig,
    format: Format,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    // reject caps before doing any work
    cfg.validate()?;
    let mut results: Vec<CheckResult> = Vec::new();
    for suite in suites_for(arg) {
        results.extend(run_suite(suite, cfg)?);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&results).map_err(|e| CliError::Usage(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::new();
            for r in &results {
                let tag = if r.passed { "PASS" } else { "FAIL" };
                s.push_str(&format!("{tag} {} {}: {}\n", r.suite, r.name, r.detail));
            }
            s.push_str(&format!("{} checks, {failed} failed\n", results.len()));
            s
        }
    };
    stdout.write_all(text.as_bytes()).map_err(stdout_err)?;
    if failed > 0 {
        return Err(CliError::Verification(format!("{failed} checks failed")));
    }
    Ok(())
}

fn cmd_verify_certificate(path: &Path, stdout: &mut dyn Write) -> CliResult<()> {
    let text = read_file(path)?;
    let cert: Certificate = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: not a certificate: {e}", path.display())))?;
    cert.verify()
        .map_err(|e| CliError::Verification(e.to_string()))?;
    writeln!(stdout, "certificate verified").map_err(stdout_err)
}

fn parse_components(s: &str) -> CliResult<IntervalSet<Rational>> {
    let mut parts = Vec::new();
    for piece in s.split(',') {
        let (lo, hi) = piece
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("expected lo:hi, got {piece:?}")))?;
        let lo = rational(lo).map_err(CliError::Usage)?;
        let hi = rational(hi).map_err(CliError::Usage)?;
        parts.push(Interval::closed(lo, hi)?);
    }
    Ok(IntervalSet::normalize(parts))
}

fn require_pair(args: &WitnessArgs) -> CliResult<SequenceSpec> {
    match (&args.gamma, &args.delta) {
        (Some(g), Some(d)) => Ok(SequenceSpec::new(g.clone(), d.clone())?),
        _ => Err(CliError::Usage("this kind needs --gamma and --delta".into())),
    }
}

fn cmd_witness(args: &WitnessArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let (cert, mut summary) = match args.kind {
        WitnessKind::NonUdt => {
            let spec = require_pair(args)?;
            let cap = args.cap.unwrap_or(64);
            let cert = if args.coarsen {
                attack_udt(&spec, args.levels, &args.epsilon, cap)?
            } else {
                find_non_udt_witness(&spec, args.levels, &args.epsilon, cap)?
            };
            let mut s = String::new();
            for l in &cert.levels {
                s.push_str(&format!(
                    "level {}: n = {}, address {}, {:?}, density_hi ~{} vs gamma ~{}\n",
                    l.k,
                    l.chosen_index,
                    l.address,
                    l.status,
                    decimal(&l.density_hi),
                    decimal(&l.gamma)
                ));
            }
            (Certificate::NonUdt(cert), s)
        }
        WitnessKind::NonSudt => {
            let spec = require_pair(args)?;
            let cert = find_non_sudt_witness(&spec, args.j_max, args.cap.unwrap_or(10_000))?;
            let mut s = String::new();
            for st in &cert.steps {
                s.push_str(&format!(
                    "j = {}: k' = {}, m' = {}, m = {}, n' = {}, i = {}\n",
                    st.j, st.check_a.k_prime, st.check_a.m_prime, st.check_b.m, st.n_next, st.i
                ));
            }
            (Certificate::NonSudt(cert), s)
        }
        WitnessKind::SudtFinite => {
            let spec = args
                .intervals
                .as_deref()
                .ok_or_else(|| CliError::Usage("sudt-finite needs --intervals".into()))?;
            let set = parse_components(spec)?;
            let gammas = args.gamma.clone().unwrap_or(Sequence::Geometric {
                c: Rational::from_int(1),
                q: Rational::ratio(1, 10),
            });
            let (deltas, cert) = sudt_deltas_finite_union(&set, &gammas, args.n_max)?;
            let s = format!(
                "delta_n = {} for n = 1..{}, {} membership checks\n",
                deltas[0].render(),
                deltas.len(),
                cert.checks.len()
            );
            (Certificate::SudtFinite(cert), s)
        }
    };
    let mut body = serde_json::to_vec_pretty(&cert).map_err(|e| CliError::Usage(e.to_string()))?;
    body.push(b'\n');
    // re-verify what is actually written, not the in-memory value
    let reread: Certificate =
        serde_json::from_slice(&body).map_err(|e| CliError::Verification(e.to_string()))?;
    reread
        .verify()
        .map_err(|e| CliError::Verification(e.to_string()))?;
    summary.push_str("certificate verified\n");
    emit(args.out.as_deref(), &body, &summary, stdout)
}

fn cmd_figure(depth: usize, index_cap: u32, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    if depth > MAX_DEPTH || index_cap > MAX_INDEX {
        return Err(CliError::Resource(format!(
            "figure caps are depth <= {MAX_DEPTH}, index <= {MAX_INDEX}"
        )));
    }
    if index_cap == 0 {
        return Err(CliError::Usage("index cap must be positive".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Usage(e.to_string());
    w.write_record(["addr", "kind", "lo", "hi", "lo_decimal", "hi_decimal"])
        .map_err(csv_err)?;
    for row in figure_rows::<Rational>(depth, index_cap) {
        let (lo, hi) = (row.interval.lo(), row.interval.hi());
        w.write_record([
            row.addr.to_string(),
            row.kind.to_string(),
            lo.render(),
            hi.render(),
            decimal(lo),
            decimal(hi),
        ])
        .map_err(csv_err)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    emit(out, &body, "", stdout)
}
