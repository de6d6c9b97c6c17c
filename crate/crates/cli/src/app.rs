use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mcc_core::algebra::BackendId;
use mcc_core::envelope::Object;
use mcc_core::protocol::transcript_jsonl;
use rand::Rng;

use crate::demo::{run_demo, DemoOptions};
use crate::step::{self, Part, StepInputs};
use crate::vectors::{self, VectorFile};
use crate::CliError;

/// Default transparent group order: the Mersenne prime 2^31 - 1.
pub const DEFAULT_PRIME: u64 = 2_147_483_647;

#[derive(Debug, Parser)]
#[command(name = "mcc", version, about = "Multiparty cloud computation over threshold proxy re-encryption")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full protocol on small integers and print the recovered sum.
    Demo(DemoArgs),
    /// Write a deterministic test-vector file.
    GenVectors(GenArgs),
    /// Re-execute every record of a test-vector file.
    VerifyVectors {
        path: PathBuf,
    },
    /// Run a single algorithm on envelope files.
    #[command(subcommand)]
    Step(StepCommand),
}

#[derive(Debug, Clone, Args)]
pub struct GroupArgs {
    #[arg(long, default_value = "transparent")]
    pub backend: BackendId,
    /// Group order of the transparent backend [default: 2147483647].
    #[arg(long)]
    pub prime: Option<u64>,
}

impl GroupArgs {
    fn prime(&self) -> Result<Option<u64>, CliError> {
        match (self.backend, self.prime) {
            (BackendId::Transparent, p) => Ok(Some(p.unwrap_or(DEFAULT_PRIME))),
            (BackendId::Curve, None) => Ok(None),
            (BackendId::Curve, Some(_)) => {
                Err(CliError::Usage("--prime only applies to the transparent backend".into()))
            }
        }
    }

    fn level(&self) -> u32 {
        match self.backend {
            BackendId::Transparent => 0,
            BackendId::Curve => mcc_core::algebra::CURVE_SECURITY_LEVEL,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    /// Seed for every role's randomness; random if omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of clients; must match the number of messages.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub messages: Vec<u64>,
    /// Largest sum the final discrete log search will try.
    #[arg(long, default_value_t = 1_000_000)]
    pub bound: u64,
    /// Write the message transcript as JSON lines.
    #[arg(long)]
    pub transcript_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Io {
    /// Input envelope files, matched by object type.
    #[arg(long = "in", required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum StepCommand {
    /// Write group parameters.
    Setup {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Key pair for one client, from params.
    Keygen {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        owner: u32,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Dealer key material for k clients, from params.
    Thkeygen {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Pull a public part out of a key pair or the dealer's material.
    Extract {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum)]
        part: Part,
        #[arg(long)]
        index: Option<u64>,
    },
    /// Re-encryption key, from a key pair and the target public key.
    Proxykeygen {
        #[command(flatten)]
        io: Io,
    },
    /// Message z^value, from params.
    Encode {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        value: u64,
    },
    /// Print the integer m of a message z^m with m <= bound.
    Decode {
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        bound: u64,
    },
    /// Ciphertext, from a public key and a message.
    Enc {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Message, from a key pair and a ciphertext.
    Dec {
        #[command(flatten)]
        io: Io,
    },
    /// Re-encrypted ciphertext, from a ciphertext and a re-encryption key.
    Proxyenc {
        #[command(flatten)]
        io: Io,
    },
    /// Product of re-encrypted ciphertexts.
    Homeval {
        #[command(flatten)]
        io: Io,
    },
    /// Partial decryption, from a re-encrypted ciphertext and one share.
    ThdecShare {
        #[command(flatten)]
        io: Io,
    },
    /// Message, from a re-encrypted ciphertext and k partial decryptions.
    ThdecCombine {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Message, from a re-encrypted ciphertext and all k shares.
    Thdec {
        #[command(flatten)]
        io: Io,
    },
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Executes a parsed command and returns what should go to stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Demo(args) => demo(args),
        Command::GenVectors(args) => {
            let file = vectors::generate(args.group.backend, args.group.prime()?, args.seed)?;
            let text = file.to_json();
            match &args.out {
                Some(path) => {
                    write_file(path, &text)?;
                    Ok(format!("wrote {} records to {}", file.records.len(), path.display()))
                }
                None => Ok(text.trim_end().to_string()),
            }
        }
        Command::VerifyVectors { path } => {
            let text = read_file(path)?;
            let report = vectors::verify(&VectorFile::from_json(&text)?)?;
            let per: Vec<String> = report
                .per_algorithm
                .iter()
                .map(|(a, n)| format!("{a} {n}"))
                .collect();
            Ok(format!(
                "pass: {} records, 0 failures ({})",
                report.records,
                per.join(", ")
            ))
        }
        Command::Step(cmd) => run_step(cmd),
    }
}

fn demo(args: &DemoArgs) -> Result<String, CliError> {
    if let Some(k) = args.k {
        if k != args.messages.len() {
            return Err(CliError::Usage(format!(
                "--k {k} but {} messages given",
                args.messages.len()
            )));
        }
    }
    let params = mcc_core::htpre::setup(args.group.level(), args.group.backend, args.group.prime()?)?;
    let report = run_demo(&DemoOptions {
        params,
        seed: args.seed.unwrap_or_else(|| rand::thread_rng().gen()),
        messages: args.messages.clone(),
        bound: args.bound,
    })?;
    if let Some(path) = &args.transcript_out {
        write_file(path, &transcript_jsonl(&report.transcript))?;
    }
    if !report.audit_passed() {
        return Err(CliError::Verification(format!("transcript audit failed\n{report}")));
    }
    Ok(report.to_string())
}

fn run_step(cmd: &StepCommand) -> Result<String, CliError> {
    let (inputs, out, obj): (StepInputs, &PathBuf, Object) = match cmd {
        StepCommand::Setup { group, out } => {
            let (params, obj) = step::setup(group.backend, group.prime()?, group.level())?;
            step::write_envelope(out, &params, &obj)?;
            return Ok(String::new());
        }
        StepCommand::Decode { inputs, bound } => {
            let inputs = StepInputs::load(inputs)?;
            return Ok(step::decode(&inputs, *bound)?.to_string());
        }
        StepCommand::Keygen { io, owner, seed } => {
            let i = StepInputs::load(&io.inputs)?;
            let o = step::keygen(&i, *owner, *seed)?;
            (i, &io.out, o)
        }
        StepCommand::Thkeygen { io, k, seed } => {
            let i = StepInputs::load(&io.inputs)?;
            let o = step::thkeygen(&i, *k, *seed)?;
            (i, &io.out, o)
        }
        StepCommand::Extract { io, part, index } => {
            let i = StepInputs::load(&io.inputs)?;
            let o = step::extract(&i, *part, *index)?;
            (i, &io.out, o)
        }
        StepCommand::Proxykeygen { io } => with(io, step::proxykeygen)?,
        StepCommand::Encode { io, value } => {
            let i = StepInputs::load(&io.inputs)?;
            let o = step::encode(&i, *value)?;
            (i, &io.out, o)
        }
        StepCommand::Enc { io, seed } => {
            let i = StepInputs::load(&io.inputs)?;
            let o = step::enc(&i, *seed)?;
            (i, &io.out, o)
        }
        StepCommand::Dec { io } => with(io, step::dec)?,
        StepCommand::Proxyenc { io } => with(io, step::proxyenc)?,
        StepCommand::Homeval { io } => with(io, step::homeval)?,
        StepCommand::ThdecShare { io } => with(io, step::thdec_share)?,
        StepCommand::ThdecCombine { io, k } => {
            let i = StepInputs::load(&io.inputs)?;
            let o = step::thdec_combine(&i, *k)?;
            (i, &io.out, o)
        }
        StepCommand::Thdec { io } => with(io, step::thdec)?,
    };
    step::write_envelope(out, &inputs.params, &obj)?;
    Ok(String::new())
}

fn with(
    io: &Io,
    f: impl FnOnce(&StepInputs) -> Result<Object, CliError>,
) -> Result<(StepInputs, &PathBuf, Object), CliError> {
    let i = StepInputs::load(&io.inputs)?;
    let o = f(&i)?;
    Ok((i, &io.out, o))
}
