//! `csvsig`: sign CSV files by hiding the signature in their optional quotes.
//!
//! Exit codes:
//!
//! | code | meaning                                  |
//! |------|------------------------------------------|
//! | 0    | success, or signature valid              |
//! | 1    | signature invalid                        |
//! | 2    | usage error (bad arguments, unreadable input, unwritable output) |
//! | 3    | payload too small for the signature      |
//! | 4    | input is not a well-formed CSV file      |
//! | 5    | key error (unknown scheme, bad key file) |

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use csvsig_core::{
    canonical_bytes, extract, keygen, parse, serialize, sign_table, simulate_requote, verify_table, CapacityError,
    FailureReason, KeyError, KeyPair, ParseError, PrivateKey, PublicKey, RawSigner, RawVerifier, RequoteMode,
    SignError, SignatureScheme, Table, ValidationReport,
};
use thiserror::Error;

pub mod report;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExitStatus(pub u8);

impl ExitStatus {
    pub const SUCCESS: ExitStatus = ExitStatus(0);
    pub const INVALID: ExitStatus = ExitStatus(1);
    pub const USAGE: ExitStatus = ExitStatus(2);
    pub const CAPACITY: ExitStatus = ExitStatus(3);
    pub const PARSE: ExitStatus = ExitStatus(4);
    pub const KEY: ExitStatus = ExitStatus(5);
}

#[derive(Debug, Parser)]
#[command(
    name = "csvsig",
    version,
    about = "Embed and verify signatures in the quoting of CSV files"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a key pair
    Keygen {
        /// Signature scheme: ed25519, rsa-1024 or rsa-2048
        #[arg(long, default_value = "ed25519")]
        scheme: String,
        /// Where to write the private key
        #[arg(long = "priv")]
        private: PathBuf,
        /// Where to write the public key
        #[arg(long = "pub")]
        public: PathBuf,
    },
    /// Embed a signature into a CSV file
    Sign {
        #[arg(long = "in")]
        input: PathBuf,
        /// Private key file
        #[arg(long)]
        key: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
    },
    /// Check the signature embedded in a CSV file
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        /// Public key file
        #[arg(long = "pub")]
        public: PathBuf,
        /// Print a key=value report instead of the human-readable summary
        #[arg(long)]
        report: bool,
    },
    /// Show how many bits a CSV file can carry
    Capacity {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Rewrite a CSV file with minimal quoting. Removes any embedded signature.
    Canonicalize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
    },
    /// Re-quote a file the way a spreadsheet round trip would
    Tamper {
        #[arg(long = "in")]
        input: PathBuf,
        /// strip_all or quote_all
        #[arg(long, value_parser = parse_mode)]
        mode: RequoteMode,
        #[arg(long = "out")]
        output: PathBuf,
    },
}

fn parse_mode(s: &str) -> std::result::Result<RequoteMode, String> {
    s.parse()
        .map_err(|e: csvsig_core::signing::UnknownRequoteMode| e.to_string())
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error("{path}: {source}")]
    Key { path: PathBuf, source: KeyError },
    #[error(transparent)]
    Scheme(KeyError),
}

impl CliError {
    fn status(&self) -> ExitStatus {
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::Write { .. } => ExitStatus::USAGE,
            CliError::Parse { .. } => ExitStatus::PARSE,
            CliError::Capacity(_) => ExitStatus::CAPACITY,
            CliError::Key { .. } | CliError::Scheme(_) => ExitStatus::KEY,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() {
                ExitStatus::USAGE
            } else {
                ExitStatus::SUCCESS
            };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return status;
        }
    };

    let result = match cli.command {
        Command::Keygen {
            scheme,
            private,
            public,
        } => cmd_keygen(&scheme, &private, &public, out),
        Command::Sign { input, key, output } => cmd_sign(&input, &key, &output, out),
        Command::Verify { input, public, report } => cmd_verify(&input, &public, report, out),
        Command::Capacity { input } => cmd_capacity(&input, out),
        Command::Canonicalize { input, output } => cmd_canonicalize(&input, &output, out),
        Command::Tamper { input, mode, output } => cmd_tamper(&input, mode, &output, out),
    };
    match result {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(err, "csvsig: {e}");
            e.status()
        }
    }
}

const PROBE: &[u8] = b"csvsig key self-test";

fn cmd_keygen(scheme: &str, private: &Path, public: &Path, out: &mut dyn Write) -> Result<ExitStatus> {
    let pair = keygen(scheme).map_err(CliError::Scheme)?;
    if !pair.verify_raw(PROBE, &pair.sign_raw(PROBE)) {
        return Err(CliError::Scheme(KeyError::Generation("self-test failed".into())));
    }
    write_private(private, pair.private_key.to_key_file().as_bytes())?;
    write_file(public, pair.public_key.to_key_file().as_bytes())?;
    let _ = writeln!(out, "scheme: {}", pair.scheme());
    let _ = writeln!(out, "signature bits: {}", pair.signature_bits());
    Ok(ExitStatus::SUCCESS)
}

fn cmd_sign(input: &Path, key: &Path, output: &Path, out: &mut dyn Write) -> Result<ExitStatus> {
    refuse_in_place(input, output)?;
    let table = load_table(input)?;
    let private = PrivateKey::from_key_file(&read_text(key)?).map_err(|source| CliError::Key {
        path: key.into(),
        source,
    })?;
    let keys = KeyPair::from_private(private);
    let signed = sign_table(&table, &keys).map_err(|e| match e {
        SignError::Capacity(c) => CliError::Capacity(c),
        SignError::Key(source) => CliError::Key {
            path: key.into(),
            source,
        },
    })?;
    write_file(output, &serialize(&signed).expect("signed tables are well formed"))?;

    let capacity = extract(&signed).bits.len();
    let _ = writeln!(out, "capacity: {capacity} bits");
    let _ = writeln!(out, "signature bits: {}", keys.signature_bits());
    let _ = writeln!(out, "padding bits: {}", capacity - keys.signature_bits());
    Ok(ExitStatus::SUCCESS)
}

fn cmd_verify(input: &Path, public: &Path, machine: bool, out: &mut dyn Write) -> Result<ExitStatus> {
    let key = PublicKey::from_key_file(&read_text(public)?).map_err(|source| CliError::Key {
        path: public.into(),
        source,
    })?;
    let bits = key.signature_bits();
    let (report, error) = match load_table(input) {
        Err(e) => (ValidationReport::failed(FailureReason::ParseError, 0, bits), Some(e)),
        Ok(table) => match verify_table(&table, &key) {
            Ok(report) => (report, None),
            Err(e) => (
                ValidationReport::failed(FailureReason::CapacityTooSmall, e.payload, bits),
                Some(e.into()),
            ),
        },
    };

    if machine {
        let _ = out.write_all(report::render(&report).as_bytes());
    } else if error.is_none() {
        let _ = out.write_all(report::summary(&report).as_bytes());
    }
    match error {
        Some(e) => Err(e),
        None if report.valid => Ok(ExitStatus::SUCCESS),
        None => Ok(ExitStatus::INVALID),
    }
}

fn cmd_capacity(input: &Path, out: &mut dyn Write) -> Result<ExitStatus> {
    let table = load_table(input)?;
    let r = extract(&table);
    let _ = writeln!(
        out,
        "fields: {}, payload: {} bits, skipped: {}",
        table.field_count(),
        r.carriers,
        r.skipped
    );
    Ok(ExitStatus::SUCCESS)
}

fn cmd_canonicalize(input: &Path, output: &Path, out: &mut dyn Write) -> Result<ExitStatus> {
    refuse_in_place(input, output)?;
    let table = load_table(input)?;
    write_file(output, &canonical_bytes(&table))?;
    let _ = writeln!(out, "wrote canonical form; any embedded signature has been removed");
    Ok(ExitStatus::SUCCESS)
}

fn cmd_tamper(input: &Path, mode: RequoteMode, output: &Path, out: &mut dyn Write) -> Result<ExitStatus> {
    refuse_in_place(input, output)?;
    let table = load_table(input)?;
    let requoted = simulate_requote(&table, mode);
    write_file(output, &serialize(&requoted).expect("requoted tables are well formed"))?;
    let _ = writeln!(out, "mode: {}", mode.as_str());
    Ok(ExitStatus::SUCCESS)
}

fn load_table(path: &Path) -> Result<Table> {
    let bytes = fs::read(path).map_err(|source| CliError::Read {
        path: path.into(),
        source,
    })?;
    parse(&bytes).map_err(|source| CliError::Parse {
        path: path.into(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Key {
        path: path.into(),
        source: KeyError::Malformed {
            scheme: csvsig_core::Scheme::DEFAULT,
            reason: format!("cannot read key file: {source}"),
        },
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.into(),
        source,
    })
}

fn write_private(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut options = fs::OpenOptions::new();
    options.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        options.mode(0o600);
    }
    options
        .open(path)
        .and_then(|mut f| f.write_all(bytes))
        .map_err(|source| CliError::Write {
            path: path.into(),
            source,
        })
}

fn refuse_in_place(input: &Path, output: &Path) -> Result<()> {
    let same = match (fs::canonicalize(input), fs::canonicalize(output)) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    if same {
        return Err(CliError::Usage(format!(
            "refusing to overwrite the input file {}",
            input.display()
        )));
    }
    Ok(())
}
