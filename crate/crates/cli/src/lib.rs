//! Command-line driver: `decompose`, `mse`, `ber` and `replay`.
//!
//! Every command writes a JSON run manifest next to its output. `replay`
//! reads a manifest and runs the same command with the same parameters.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use igmd::matcore::{parse_matrix, write_matrix};
use igmd::mimosim::{run_ber_experiment, run_mse_experiment, ChannelConfig};
use igmd::{geometric_mean_target, igmd, mse_diag, Error, InitKind, OmegaKind};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "igmd",
    version,
    about = "Iterative geometric mean decomposition toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose one matrix and write q/r/s plus the per-sweep trace.
    Decompose(DecomposeArgs),
    /// Monte Carlo MSE of the diagonal versus iteration count.
    Mse(MseArgs),
    /// Monte Carlo BER of the ZF-THP link versus SNR.
    Ber(BerArgs),
    /// Re-run a command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct DecomposeArgs {
    /// Matrix in the `rows cols` + `RE±IMi` text format.
    #[arg(long)]
    pub matrix_file: PathBuf,
    #[arg(long, default_value = "svd", value_parser = parse_init)]
    #[serde(with = "by_name")]
    pub init: InitKind,
    #[arg(long, default_value = "gm", value_parser = parse_kind)]
    #[serde(with = "by_name")]
    pub kind: OmegaKind,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    /// Directory receiving q.txt, r.txt, s.txt, trace.csv and manifest.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct MseArgs {
    #[arg(long, default_value_t = 7)]
    pub k: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 10)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "svd,intrlv-svd,qr,vbqr", value_parser = parse_init)]
    #[serde(with = "by_name_list")]
    pub inits: Vec<InitKind>,
    #[arg(long, value_delimiter = ',', default_value = "am,gm,hm", value_parser = parse_kind)]
    #[serde(with = "by_name_list")]
    pub kinds: Vec<OmegaKind>,
    #[arg(long)]
    pub out_csv: PathBuf,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, PartialEq)]
pub struct BerArgs {
    #[arg(long, default_value_t = 7)]
    pub k: usize,
    #[arg(long, default_value = "vbqr", value_parser = parse_init)]
    #[serde(with = "by_name")]
    pub init: InitKind,
    #[arg(long, default_value = "gm", value_parser = parse_kind)]
    #[serde(with = "by_name")]
    pub kind: OmegaKind,
    /// Sweep counts to evaluate; the exact GMD baseline is always added.
    /// Pass the flag with no value for the baseline alone.
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "1,2,3,4")]
    pub iterations_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub snr_list: Vec<f64>,
    /// Minimum number of bits per SNR point.
    #[arg(long, default_value_t = 1_000_000)]
    pub bits: u64,
    /// Channel realizations per SNR point.
    #[arg(long, default_value_t = 1_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out_csv: PathBuf,
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded location.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

fn parse_init(s: &str) -> Result<InitKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<OmegaKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Manifest encoding of enums through their CLI spelling.
mod by_name {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

mod by_name_list {
    use std::fmt::Display;
    use std::str::FromStr;

    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: Display, S: Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Vec<T>, D::Error>
    where
        T: FromStr,
        T::Err: Display,
        D: Deserializer<'de>,
    {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|x| x.parse().map_err(D::Error::custom))
            .collect()
    }
}

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unparsable input (exit code 2).
    Usage(String),
    /// Numerical or I/O failure (exit code 1).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::InvalidArgument(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: invalid manifest: {e}", path.display())))
    }

    fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| io_err(path, e))
    }
}

/// `<out_csv>.manifest.json`.
pub fn manifest_path_for(out_csv: &Path) -> PathBuf {
    let mut name = out_csv.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Decompose(args) => cmd_decompose(&args),
        Command::Mse(args) => cmd_mse(&args),
        Command::Ber(args) => cmd_ber(&args),
        Command::Replay(args) => cmd_replay(&args),
    }
}

pub fn cmd_decompose(args: &DecomposeArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let text = fs::read_to_string(&args.matrix_file).map_err(|e| io_err(&args.matrix_file, e))?;
    let h = parse_matrix(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.matrix_file.display())))?;
    if !h.is_square() {
        return Err(CliError::Usage(format!(
            "{}: expected a square matrix, got {}x{}",
            args.matrix_file.display(),
            h.rows(),
            h.cols()
        )));
    }
    let (triple, trace) = igmd(&h, args.init, args.kind, args.iterations)?;
    let sigma_bar = geometric_mean_target(&h)?;
    let mse = mse_diag(&trace, sigma_bar);

    fs::create_dir_all(&args.out_dir).map_err(|e| io_err(&args.out_dir, e))?;
    for (name, m) in [
        ("q.txt", &triple.q),
        ("r.txt", &triple.r),
        ("s.txt", &triple.s),
    ] {
        let path = args.out_dir.join(name);
        fs::write(&path, write_matrix(m)).map_err(|e| io_err(&path, e))?;
    }

    let trace_path = args.out_dir.join("trace.csv");
    let mut w = csv::Writer::from_path(&trace_path).map_err(|e| io_err(&trace_path, e))?;
    let k = h.rows();
    let mut header = vec!["iteration".to_string()];
    header.extend((1..=k).map(|i| format!("r_{i}{i}")));
    header.extend(["F".to_string(), "mse".to_string()]);
    w.write_record(&header)
        .map_err(|e| io_err(&trace_path, e))?;
    for (l, diag) in trace.diag_history.iter().enumerate() {
        let mut row = vec![l.to_string()];
        row.extend(diag.iter().map(|d| d.to_string()));
        row.push(trace.f_history[l].to_string());
        row.push(mse[l].to_string());
        w.write_record(&row).map_err(|e| io_err(&trace_path, e))?;
    }
    w.flush().map_err(|e| io_err(&trace_path, e))?;

    RunManifest {
        command: "decompose".into(),
        params: serde_json::to_value(args).expect("args serialize"),
        seed: None,
        version: VERSION.into(),
        duration_secs: start.elapsed().as_secs_f64(),
    }
    .write(&args.out_dir.join("manifest.json"))
}

pub fn cmd_mse(args: &MseArgs) -> Result<(), CliError> {
    let start = Instant::now();
    if args.inits.is_empty() || args.kinds.is_empty() {
        return Err(CliError::Usage(
            "need at least one init and one kind".into(),
        ));
    }
    let cfg = ChannelConfig {
        k: args.k,
        trials: args.trials,
        seed: args.seed,
    };
    let curves = in_pool(args.threads, || {
        run_mse_experiment(&cfg, &args.inits, &args.kinds, args.iterations)
    })??;

    let path = &args.out_csv;
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(["init", "kind", "iteration", "mean_mse"])
        .map_err(|e| io_err(path, e))?;
    for c in &curves {
        for (l, m) in c.mse_per_iteration.iter().enumerate() {
            w.write_record([c.init.name(), c.kind.name(), &l.to_string(), &m.to_string()])
                .map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))?;

    RunManifest {
        command: "mse".into(),
        params: serde_json::to_value(args).expect("args serialize"),
        seed: Some(args.seed),
        version: VERSION.into(),
        duration_secs: start.elapsed().as_secs_f64(),
    }
    .write(&manifest_path_for(path))
}

pub fn cmd_ber(args: &BerArgs) -> Result<(), CliError> {
    let start = Instant::now();
    if args.snr_list.is_empty() {
        return Err(CliError::Usage("--snr-list must not be empty".into()));
    }
    let cfg = ChannelConfig {
        k: args.k,
        trials: args.trials,
        seed: args.seed,
    };
    let curves = in_pool(args.threads, || {
        run_ber_experiment(
            &cfg,
            args.init,
            args.kind,
            &args.iterations_list,
            &args.snr_list,
            args.bits,
        )
    })??;

    let path = &args.out_csv;
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record([
        "init",
        "kind",
        "iterations",
        "snr_db",
        "bits",
        "bit_errors",
        "ber",
    ])
    .map_err(|e| io_err(path, e))?;
    for c in &curves {
        for p in &c.points {
            w.write_record([
                c.init.name(),
                c.kind.name(),
                &c.label.to_string(),
                &p.snr_db.to_string(),
                &p.bits_sent.to_string(),
                &p.bit_errors.to_string(),
                &p.ber.to_string(),
            ])
            .map_err(|e| io_err(path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(path, e))?;

    RunManifest {
        command: "ber".into(),
        params: serde_json::to_value(args).expect("args serialize"),
        seed: Some(args.seed),
        version: VERSION.into(),
        duration_secs: start.elapsed().as_secs_f64(),
    }
    .write(&manifest_path_for(path))
}

pub fn cmd_replay(args: &ReplayArgs) -> Result<(), CliError> {
    let manifest = RunManifest::read(&args.manifest)?;
    let bad = |e: serde_json::Error| CliError::Usage(format!("manifest parameters: {e}"));
    match manifest.command.as_str() {
        "decompose" => {
            let mut a: DecomposeArgs = serde_json::from_value(manifest.params).map_err(bad)?;
            if let Some(out) = &args.out {
                a.out_dir = out.clone();
            }
            cmd_decompose(&a)
        }
        "mse" => {
            let mut a: MseArgs = serde_json::from_value(manifest.params).map_err(bad)?;
            a.threads = args.threads;
            if let Some(out) = &args.out {
                a.out_csv = out.clone();
            }
            cmd_mse(&a)
        }
        "ber" => {
            let mut a: BerArgs = serde_json::from_value(manifest.params).map_err(bad)?;
            a.threads = args.threads;
            if let Some(out) = &args.out {
                a.out_csv = out.clone();
            }
            cmd_ber(&a)
        }
        other => Err(CliError::Usage(format!(
            "unknown command `{other}` in manifest"
        ))),
    }
}
