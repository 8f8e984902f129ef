//! Keystream file formats and the `tf1` command line.
//!
//! Binary keystream layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "TF1K" (54 46 31 4B)
//! 4       1     version, 0x01
//! 5       1     word width w (even, 4..=64)
//! 6       1     flags, 0x00
//! 7       8     word count
//! 15      ...   words, ceil(w/8) bytes each
//! ```
//!
//! The hex format holds one lowercase word of `ceil(w/4)` digits per line.
//! Lines starting with `#` are comments. The width is not stored and must
//! be given when reading.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::attack::{self, AttackConfig, AttackError, AttackReport, EnumerationMode};
use crate::error::Error;
use crate::generator::{
    demo_generalized_instance, generate, GeneratorInstance, Keystream, State, Tf1, Tf1Params,
};
use crate::mix::state_from_seed;
use crate::oracle::{self, OracleError};
use crate::tfcheck::{self, Target};
use crate::word::{Word, WordSpec};

pub const MAGIC: [u8; 4] = *b"TF1K";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 15;

/// Widest generator `bench` will actually attack.
pub const MAX_BENCH_RUN_WIDTH: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Bin,
    Hex,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("FormatError: {0}")]
    Format(String),
    #[error("FormatError: line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("TruncationError: header declares {expected} words but only {found} are present")]
    Truncation { expected: u64, found: u64 },
    #[error("ParseError: field {field}: {msg}")]
    Parse { field: &'static str, msg: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> FormatError + '_ {
    move |source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Serializes `ks` in the given format.
pub fn encode_keystream(ks: &Keystream, format: Format) -> Vec<u8> {
    let spec = ks.spec();
    match format {
        Format::Bin => {
            let n = spec.byte_len();
            let mut out = Vec::with_capacity(HEADER_LEN + n * ks.len());
            out.extend_from_slice(&MAGIC);
            out.extend_from_slice(&[VERSION, spec.width() as u8, 0]);
            out.extend_from_slice(&(ks.len() as u64).to_le_bytes());
            for w in ks.words() {
                out.extend_from_slice(&w.to_le_bytes()[..n]);
            }
            out
        }
        Format::Hex => {
            let digits = spec.hex_digits();
            let mut s = String::with_capacity((digits + 1) * ks.len());
            for w in ks.words() {
                let _ = writeln!(s, "{w:0digits$x}");
            }
            s.into_bytes()
        }
    }
}

/// Writes `ks` to `out` and returns the number of bytes written.
pub fn write_keystream<W: Write + ?Sized>(
    ks: &Keystream,
    out: &mut W,
    format: Format,
) -> io::Result<usize> {
    let bytes = encode_keystream(ks, format);
    out.write_all(&bytes)?;
    Ok(bytes.len())
}

pub fn write_keystream_file(
    ks: &Keystream,
    path: &Path,
    format: Format,
) -> Result<usize, FormatError> {
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    let n = write_keystream(ks, &mut f, format).map_err(io_err(path))?;
    f.flush().map_err(io_err(path))?;
    Ok(n)
}

/// `Bin` if the data starts with the magic, otherwise `Hex`.
pub fn detect_format(bytes: &[u8]) -> Format {
    if bytes.starts_with(&MAGIC) {
        Format::Bin
    } else {
        Format::Hex
    }
}

/// Parses a keystream. `width` is required for hex and, when given, must
/// match a binary header.
pub fn decode_keystream(
    bytes: &[u8],
    format: Format,
    width: Option<u32>,
) -> Result<Keystream, FormatError> {
    match format {
        Format::Bin => decode_bin(bytes, width),
        Format::Hex => {
            let width = width.ok_or_else(|| {
                FormatError::Format("hex keystreams need an explicit word width".into())
            })?;
            decode_hex(bytes, spec_for(width)?)
        }
    }
}

fn spec_for(width: u32) -> Result<WordSpec, FormatError> {
    WordSpec::new(width).map_err(|e| FormatError::Format(e.to_string()))
}

fn decode_bin(bytes: &[u8], width: Option<u32>) -> Result<Keystream, FormatError> {
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::Format(format!(
            "header needs {HEADER_LEN} bytes, found {}",
            bytes.len()
        )));
    }
    if bytes[..4] != MAGIC {
        return Err(FormatError::Format(format!(
            "bad magic {:02x?}",
            &bytes[..4]
        )));
    }
    if bytes[4] != VERSION {
        return Err(FormatError::Format(format!(
            "unsupported version {}",
            bytes[4]
        )));
    }
    let spec = spec_for(bytes[5] as u32)?;
    if let Some(w) = width {
        if w != spec.width() {
            return Err(FormatError::Format(format!(
                "file holds {}-bit words but width {w} was requested",
                spec.width()
            )));
        }
    }
    if bytes[6] != 0 {
        return Err(FormatError::Format(format!(
            "unsupported flags {:#04x}",
            bytes[6]
        )));
    }
    let count = u64::from_le_bytes(bytes[7..15].try_into().expect("eight bytes"));
    let n = spec.byte_len();
    let payload = &bytes[HEADER_LEN..];
    let found = (payload.len() / n) as u64;
    if found < count {
        return Err(FormatError::Truncation {
            expected: count,
            found,
        });
    }
    if payload.len() as u64 != count * n as u64 {
        return Err(FormatError::Format(format!(
            "{} trailing bytes after {count} words",
            payload.len() as u64 - count * n as u64
        )));
    }
    let mut words = Vec::with_capacity(count as usize);
    for (i, chunk) in payload.chunks_exact(n).enumerate() {
        let mut buf = [0u8; 8];
        buf[..n].copy_from_slice(chunk);
        let w = u64::from_le_bytes(buf);
        if w > spec.mask() {
            return Err(FormatError::Format(format!(
                "word {i} ({w:#x}) exceeds {} bits",
                spec.width()
            )));
        }
        words.push(w);
    }
    Ok(Keystream::new(spec, words).expect("words checked"))
}

fn decode_hex(bytes: &[u8], spec: WordSpec) -> Result<Keystream, FormatError> {
    let text =
        std::str::from_utf8(bytes).map_err(|e| FormatError::Format(format!("not UTF-8: {e}")))?;
    let digits = spec.hex_digits();
    let mut words = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| FormatError::Line { line: i + 1, msg };
        if line.len() != digits || !line.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(bad(format!("expected {digits} hex digits, got {line:?}")));
        }
        let w = Word::from_str_radix(line, 16).map_err(|e| bad(e.to_string()))?;
        if w > spec.mask() {
            return Err(bad(format!("{w:#x} exceeds {} bits", spec.width())));
        }
        words.push(w);
    }
    Ok(Keystream::new(spec, words).expect("words checked"))
}

pub fn read_keystream_file(
    path: &Path,
    format: Option<Format>,
    width: Option<u32>,
) -> Result<Keystream, FormatError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let format = format.unwrap_or_else(|| detect_format(&bytes));
    decode_keystream(&bytes, format, width)
}

fn parse_hex_fields<const N: usize>(
    text: &str,
    names: [&'static str; N],
    spec: WordSpec,
) -> Result<[Word; N], FormatError> {
    let parts: Vec<&str> = text.trim().split(':').collect();
    if parts.len() != N {
        return Err(FormatError::Parse {
            field: names[parts.len().min(N - 1)],
            msg: format!(
                "expected {N} colon-separated hex fields, got {}",
                parts.len()
            ),
        });
    }
    let mut out = [0; N];
    for ((slot, part), field) in out.iter_mut().zip(parts).zip(names) {
        let v = Word::from_str_radix(part, 16).map_err(|e| FormatError::Parse {
            field,
            msg: format!("{part:?}: {e}"),
        })?;
        if v > spec.mask() {
            return Err(FormatError::Parse {
                field,
                msg: format!("{v:#x} exceeds the {}-bit mask", spec.width()),
            });
        }
        *slot = v;
    }
    Ok(out)
}

/// Parses `a:b:c:d` in hex.
pub fn parse_state(text: &str, spec: WordSpec) -> Result<State, FormatError> {
    let [a, b, c, d] = parse_hex_fields(text, ["a", "b", "c", "d"], spec)?;
    Ok(State::new(a, b, c, d))
}

/// Parses `C1:C3:C` in hex.
pub fn parse_constants(text: &str, spec: WordSpec) -> Result<Tf1Params, FormatError> {
    let [c1, c3, c] = parse_hex_fields(text, ["C1", "C3", "C"], spec)?;
    Ok(Tf1Params::new(spec, c1, c3, c).expect("constants checked"))
}

#[derive(Debug, Parser)]
#[command(
    name = "tf1",
    version,
    about = "TF-1 generator and state-recovery toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a keystream.
    Gen(GenArgs),
    /// Recover the internal state from a keystream.
    Attack(AttackArgs),
    /// Run structural and statistical checks.
    Check(CheckArgs),
    /// Exhaustively list consistent states (tiny widths only).
    Oracle(OracleArgs),
    /// Measure attack work against the predicted 16 * 2^(1.5w).
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InstanceKind {
    Tf1,
    Demo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Trivial,
    Dfs,
}

impl From<Mode> for EnumerationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Trivial => EnumerationMode::Trivial,
            Mode::Dfs => EnumerationMode::Dfs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportStyle {
    Machine,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckKind {
    Tfunc,
    Trunc,
    Stats,
}

#[derive(Debug, Args)]
struct GeneratorArgs {
    /// Word width in bits (even, 4..=64).
    #[arg(long = "w")]
    width: u32,
    /// Constants as hex C1:C3:C; defaults to the documented values.
    #[arg(long)]
    constants: Option<String>,
    #[arg(long, value_enum, default_value = "tf1")]
    instance: InstanceKind,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("seed").required(true).args(["seed_state", "random_seed"])))]
struct GenArgs {
    #[command(flatten)]
    gen: GeneratorArgs,
    /// Seed state as hex a:b:c:d.
    #[arg(long)]
    seed_state: Option<String>,
    /// Expand a 64-bit integer into the seed state.
    #[arg(long)]
    random_seed: Option<u64>,
    #[arg(long)]
    count: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "hex")]
    format: Format,
}

#[derive(Debug, Args)]
struct AttackOptions {
    #[arg(long, value_enum, default_value = "trivial")]
    mode: Mode,
    /// Stage-1 filter length in output bits (default 3(w/2+1)).
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value_t = 4)]
    verify_words: usize,
    #[arg(long, default_value_t = 4096)]
    max_survivors: usize,
    #[arg(long, default_value_t = 8)]
    max_zeros: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl AttackOptions {
    fn config(&self) -> AttackConfig {
        AttackConfig {
            filter_horizon: self.horizon,
            verify_words: self.verify_words,
            max_survivors: self.max_survivors,
            max_zero_positions: self.max_zeros,
            mode: self.mode.into(),
            workers: self.workers,
        }
    }
}

#[derive(Debug, Args)]
struct AttackArgs {
    #[command(flatten)]
    gen: GeneratorArgs,
    #[arg(long = "in")]
    input: PathBuf,
    /// Input format; detected from the file when absent.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    opts: AttackOptions,
    #[arg(long, value_enum, default_value = "machine")]
    report: ReportStyle,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(value_enum)]
    kind: CheckKind,
    /// Width to check; tfunc and trunc default to 8, 16, 32 and 64, stats to 8.
    #[arg(long = "w")]
    width: Option<u32>,
    #[arg(long)]
    constants: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    rng_seed: u64,
    /// Keystream length for stats.
    #[arg(long, default_value_t = 1_000_000)]
    count: usize,
    /// Cycle-probe budget for stats.
    #[arg(long, default_value_t = 1 << 20)]
    max_steps: u64,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long = "w", default_value_t = 4)]
    width: u32,
    #[arg(long)]
    constants: Option<String>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Words checked after the zero; defaults to the whole tail.
    #[arg(long)]
    window: Option<usize>,
    /// Zero position to use; defaults to the first zero word.
    #[arg(long)]
    zero_index: Option<usize>,
    /// State budget; must cover 2^(4w).
    #[arg(long, default_value_t = oracle::DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long = "w")]
    width: u32,
    #[arg(long)]
    constants: Option<String>,
    #[arg(long, default_value_t = 1)]
    random_seed: u64,
    /// Keystream length; defaults to 4 * 2^w.
    #[arg(long)]
    count: Option<usize>,
    #[command(flatten)]
    opts: AttackOptions,
}

/// A failed command: message for stderr plus exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self {
            code: 2,
            message: e.to_string(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        Failure::usage(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::usage(e)
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure::usage(e)
    }
}

impl From<AttackError> for Failure {
    fn from(e: AttackError) -> Self {
        let code = match e {
            AttackError::Config(_) => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(e)
    }
}

fn params_for(width: u32, constants: Option<&str>) -> Result<Tf1Params, Failure> {
    let spec = WordSpec::new(width)?;
    Ok(match constants {
        Some(text) => parse_constants(text, spec)?,
        None => Tf1Params::defaults(spec),
    })
}

/// Calls `f` with the selected instance.
fn with_instance<T>(
    kind: InstanceKind,
    params: Tf1Params,
    f: impl FnOnce(&dyn GeneratorInstance) -> T,
) -> T {
    match kind {
        InstanceKind::Tf1 => f(&Tf1::new(params)),
        InstanceKind::Demo => f(&demo_generalized_instance(params)),
    }
}

/// Runs the command line with process stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the command line; returns 0 on success, 1 on attack-level failures
/// and 2 on usage or format errors.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Attack(a) => cmd_attack(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let params = params_for(a.gen.width, a.gen.constants.as_deref())?;
    let spec = params.spec();
    let seed = match (&a.seed_state, a.random_seed) {
        (Some(text), _) => parse_state(text, spec)?,
        (None, Some(n)) => state_from_seed(n, spec),
        (None, None) => unreachable!("clap requires one seed source"),
    };
    let ks = with_instance(a.gen.instance, params, |inst| generate(seed, inst, a.count));
    match &a.out {
        Some(path) => {
            write_keystream_file(&ks, path, a.format)?;
        }
        None => {
            write_keystream(&ks, out, a.format)?;
        }
    }
    Ok(0)
}

/// `key=value` lines with a fixed key set.
pub fn machine_report(report: &AttackReport, params: &Tf1Params, mode: EnumerationMode) -> String {
    let spec = params.spec();
    let c = &report.counters;
    let mut s = String::new();
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(s, "{k}={v}");
    };
    kv("width", &spec.width());
    kv("constants", &params.to_hex());
    kv(
        "mode",
        &match mode {
            EnumerationMode::Trivial => "trivial",
            EnumerationMode::Dfs => "dfs",
        },
    );
    kv("zero_index", &report.zero_index);
    kv("positions_tried", &report.positions_tried);
    kv("horizon", &report.horizon);
    kv("horizon_clamped", &report.horizon_clamped);
    kv("verified_window", &report.verified_window);
    kv("stage1_candidates", &c.stage1_candidates);
    kv("stage1_filter_steps", &c.stage1_filter_steps);
    kv("stage1_survivors", &c.stage1_survivors);
    kv("stage2_candidates", &c.stage2_candidates);
    kv("stage2_verifications", &c.stage2_verifications);
    kv("total_ops", &c.total_ops());
    kv("recovered_count", &report.recovered.len());
    for (i, st) in report.recovered.iter().enumerate() {
        kv(&format!("recovered_{i}"), &st.to_hex(spec));
    }
    kv("predicted_ops", &report.predicted_ops);
    kv("elapsed_ms", &report.elapsed.as_millis());
    s
}

fn human_report(report: &AttackReport, params: &Tf1Params) -> String {
    let spec = params.spec();
    let c = &report.counters;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "w={} constants(C1:C3:C)={}",
        spec.width(),
        params.to_hex()
    );
    let _ = writeln!(
        s,
        "zero output at index {} ({} position(s) tried)",
        report.zero_index, report.positions_tried
    );
    let _ =
        writeln!(
        s,
        "stage 1: {} candidates, {} filter steps ({:.2} per candidate), {} survivors, horizon {}{}",
        c.stage1_candidates,
        c.stage1_filter_steps,
        c.mean_filter_steps(),
        c.stage1_survivors,
        report.horizon,
        if report.horizon_clamped { " (clamped to tail)" } else { "" }
    );
    let _ = writeln!(
        s,
        "stage 2: {} candidates, {} verification steps",
        c.stage2_candidates, c.stage2_verifications
    );
    let _ = writeln!(
        s,
        "operations: {} counted vs {} predicted (ratio {:.3})",
        c.total_ops(),
        report.predicted_ops,
        c.total_ops() as f64 / report.predicted_ops as f64
    );
    let _ = writeln!(
        s,
        "recovered {} state(s) matching {} words after the zero:",
        report.recovered.len(),
        report.verified_window
    );
    for st in &report.recovered {
        let _ = writeln!(s, "  {}", st.to_hex(spec));
    }
    let _ = writeln!(s, "elapsed {:.3} s", report.elapsed.as_secs_f64());
    s
}

fn cmd_attack(a: AttackArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let params = params_for(a.gen.width, a.gen.constants.as_deref())?;
    let ks = read_keystream_file(&a.input, a.format, Some(a.gen.width))?;
    let cfg = a.opts.config();
    let report = with_instance(a.gen.instance, params, |inst| {
        attack::recover(&ks, inst, &cfg)
    })?;
    let text = match a.report {
        ReportStyle::Machine => machine_report(&report, &params, cfg.mode),
        ReportStyle::Human => human_report(&report, &params),
    };
    out.write_all(text.as_bytes())?;
    Ok(0)
}

fn cmd_check(a: CheckArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let widths: Vec<u32> = match (a.width, a.kind) {
        (Some(w), _) => vec![w],
        (None, CheckKind::Stats) => vec![8],
        (None, _) => vec![8, 16, 32, 64],
    };
    let mut failures = 0;
    for w in widths {
        let params = params_for(w, a.constants.as_deref())?;
        match a.kind {
            CheckKind::Tfunc => {
                for (name, t) in [
                    ("t1", Target::T1),
                    ("t2", Target::T2),
                    ("t2_demo", Target::T2Demo),
                ] {
                    let r = tfcheck::check_tfunction_property(t, &params, a.trials, a.rng_seed)?;
                    failures += r.failures;
                    writeln!(
                        out,
                        "tfunc target={name} w={w} trials={} failures={}",
                        r.trials, r.failures
                    )?;
                }
            }
            CheckKind::Trunc => {
                for kind in [InstanceKind::Tf1, InstanceKind::Demo] {
                    let r = with_instance(kind, params, |inst| {
                        tfcheck::check_truncation_consistency(inst, a.trials, a.rng_seed)
                    })?;
                    failures += r.failures;
                    let name = if kind == InstanceKind::Tf1 {
                        "tf1"
                    } else {
                        "demo"
                    };
                    writeln!(
                        out,
                        "trunc instance={name} w={w} trials={} failures={}",
                        r.trials, r.failures
                    )?;
                }
            }
            CheckKind::Stats => {
                let spec = params.spec();
                let seed = state_from_seed(a.rng_seed, spec);
                let ks = generate(seed, &Tf1::new(params), a.count);
                let z = tfcheck::zero_frequency(&ks)?;
                let expected = a.count as f64 / (1u128 << w) as f64;
                writeln!(
                    out,
                    "stats w={w} words={} zeros={} rate={:.3e} expected_zeros={expected:.1}",
                    a.count, z.zeros, z.rate
                )?;
                let probe = tfcheck::cycle_probe(seed, &params, a.max_steps)?;
                match probe.cycle_length {
                    Some(len) => writeln!(out, "cycle w={w} found=true length={len}")?,
                    None => writeln!(out, "cycle w={w} found=false max_steps={}", a.max_steps)?,
                }
            }
        }
    }
    Ok(if failures == 0 { 0 } else { 1 })
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let params = params_for(a.width, a.constants.as_deref())?;
    let ks = read_keystream_file(&a.input, a.format, Some(a.width))?;
    let inst = Tf1::new(params);
    let z = match a.zero_index {
        Some(z) => z,
        None => match attack::find_zero_outputs(&ks, 1).first() {
            Some(&z) => z,
            None => {
                return Err(AttackError::NeedMoreKeystream {
                    len: ks.len(),
                    width: a.width,
                    expected: 1u128 << a.width,
                }
                .into())
            }
        },
    };
    let tail = ks.len().saturating_sub(z + 1);
    let window = a.window.unwrap_or(tail);
    let r = oracle::brute_force_consistent_states(&ks, z, &inst, window, a.budget)?;
    writeln!(out, "zero_index={z}")?;
    writeln!(out, "window={}", r.window)?;
    writeln!(out, "states_scanned={}", r.states_scanned)?;
    writeln!(out, "consistent_count={}", r.consistent_states.len())?;
    for (i, s) in r.consistent_states.iter().enumerate() {
        writeln!(out, "consistent_{i}={}", s.to_hex(params.spec()))?;
    }
    if window == tail && a.zero_index.is_none() {
        let agrees = match attack::recover(&ks, &inst, &AttackConfig::default()) {
            Ok(rep) if rep.zero_index == z => oracle::compare_with_report(&rep, &r)?,
            Ok(_) => false,
            Err(_) => r.consistent_states.is_empty(),
        };
        writeln!(out, "attack_agrees={agrees}")?;
    }
    Ok(0)
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let params = params_for(a.width, a.constants.as_deref())?;
    let spec = params.spec();
    let predicted = attack::predicted_work(spec);
    writeln!(out, "width={}", spec.width())?;
    writeln!(out, "constants={}", params.to_hex())?;
    writeln!(out, "predicted_ops={predicted}")?;
    writeln!(out, "predicted_ops_log2={}", predicted.trailing_zeros())?;
    writeln!(out, "keystream_words_needed=2^{}", spec.width())?;
    if spec.width() > MAX_BENCH_RUN_WIDTH {
        writeln!(out, "attack=skipped")?;
        return Ok(0);
    }
    let count = a.count.unwrap_or(4usize << spec.width());
    let inst = Tf1::new(params);
    let ks = generate(state_from_seed(a.random_seed, spec), &inst, count);
    writeln!(out, "keystream_words={count}")?;
    let cfg = a.opts.config();
    let report = attack::recover(&ks, &inst, &cfg)?;
    let c = &report.counters;
    writeln!(out, "attack=run")?;
    for line in machine_report(&report, &params, cfg.mode).lines() {
        if !line.starts_with("width=")
            && !line.starts_with("constants=")
            && !line.starts_with("predicted_ops=")
        {
            writeln!(out, "{line}")?;
        }
    }
    writeln!(out, "mean_filter_steps={:.4}", c.mean_filter_steps())?;
    writeln!(
        out,
        "measured_ops_log2={:.3}",
        (c.total_ops() as f64).log2()
    )?;
    writeln!(
        out,
        "measured_over_predicted={:.4}",
        c.total_ops() as f64 / predicted as f64
    )?;
    Ok(0)
}
