use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

mod job;

use job::{Failure, JobSpec, RunContext};

/// Batch driver: runs one job file and writes a canonical JSON report.
///
/// Exit codes: 0 success, 1 input or usage error, 2 mathematical failure.
#[derive(Debug, Parser)]
#[command(name = "phicert", version)]
struct Args {
    /// Job description (JSON); `-` reads stdin.
    #[arg(long)]
    job: PathBuf,
    /// Report path; overrides the job's `out`. Without either, stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for scans and batched replays (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Seed for randomized batches.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the alternative refinement exponent convention.
    #[arg(long)]
    paper_sign: bool,
}

fn read_job(path: &Path) -> Result<JobSpec, String> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s).map_err(|e| format!("stdin: {e}"))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?
    };
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| format!("job: at `{}`: {}", e.path(), e.inner()))
}

/// Write next to the target, then rename over it.
fn write_atomic(path: &Path, body: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(body.as_bytes())?;
    f.sync_all()?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(k) = args.workers {
        if k == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let spec = match read_job(&args.job) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let ctx = RunContext { seed: args.seed, paper_sign: args.paper_sign };
    let out = args.out.clone().or_else(|| spec.out.clone());
    let (report, code) = match job::run(&spec, &ctx) {
        Ok(report) => (report, 0),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
        Err(Failure::Math { report, reason }) => {
            eprintln!("failed: {reason}");
            (report, 2)
        }
    };
    let body = match phicert_core::report::canonical_json(&report) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot serialize report: {e}");
            return ExitCode::from(1);
        }
    };
    match out {
        Some(path) => {
            if let Err(e) = write_atomic(&path, &body) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{body}"),
    }
    ExitCode::from(code)
}
