use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use nap_cli::{render_error, run, CliError, ErrorKind, Format, Options};
use nap_core::oracle::Caps;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

/// Exact probabilities on infinite sample spaces.
///
/// Statements are separated by `;`, e.g.
/// `space nat factorial; let E = prog(2,0); prob E`.
#[derive(Debug, Parser)]
#[command(name = "nap", version)]
struct Args {
    /// Program text; read from `--file` or standard input when omitted.
    program: Option<String>,
    #[arg(short, long)]
    file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Digits of the decimal shadow of standard parts.
    #[arg(long, default_value_t = 6)]
    digits: usize,
    /// Largest m with the grid {1..m!} enumerated by `verify`.
    #[arg(long = "max-m")]
    max_m: Option<u64>,
    /// Largest n for rational and real grids.
    #[arg(long = "max-n")]
    max_n: Option<u64>,
    /// Largest toss count for coin grids.
    #[arg(long = "max-N")]
    max_tosses: Option<u32>,
}

fn source(args: &Args) -> std::io::Result<String> {
    match (&args.program, &args.file) {
        (Some(p), _) => Ok(p.clone()),
        (None, Some(f)) => std::fs::read_to_string(f),
        (None, None) => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let format = match args.format {
        FormatArg::Text => Format::Text,
        FormatArg::Json => Format::Json,
    };
    let usage = |message: String| {
        let e = CliError {
            kind: ErrorKind::Usage,
            message,
            line: None,
            column: None,
        };
        eprint!("{}", render_error(&e, format));
        ExitCode::from(2)
    };
    // Flags take precedence over NAP_ORACLE_CAPS, which overrides the defaults.
    let mut caps = match Caps::from_env() {
        Ok(c) => c,
        Err(e) => return usage(e.to_string()),
    };
    caps.max_m = args.max_m.unwrap_or(caps.max_m);
    caps.max_n = args.max_n.unwrap_or(caps.max_n);
    caps.max_tosses = args.max_tosses.unwrap_or(caps.max_tosses);
    if caps.max_m > 20 || caps.max_tosses > 30 {
        return usage("caps out of range: m <= 20 and N <= 30".into());
    }
    let src = match source(&args) {
        Ok(s) => s,
        Err(e) => return usage(e.to_string()),
    };
    let opts = Options {
        format,
        digits: args.digits,
        caps,
    };
    let out = run(&src, &opts);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.status as u8)
}
