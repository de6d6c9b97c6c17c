//! End-to-end protocol run over integers encoded in the exponent.

use std::collections::BTreeMap;
use std::fmt;

use mcc_core::algebra::{bounded_dlog, GroupParams, MAX_DLOG_BOUND};
use mcc_core::htpre::ClientId;
use mcc_core::protocol::{audit, FunctionDescriptor, Message, Phase, World, WorldOptions};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct DemoOptions {
    pub params: GroupParams,
    pub seed: u64,
    pub messages: Vec<u64>,
    pub bound: u64,
}

/// Per-phase message counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhaseSummary {
    pub phase: String,
    pub messages: usize,
    pub bytes: usize,
    pub kinds: BTreeMap<String, usize>,
}

#[derive(Debug, Clone)]
pub struct DemoReport {
    pub backend: String,
    pub k: usize,
    pub seed: u64,
    pub messages: Vec<u64>,
    pub phases: Vec<PhaseSummary>,
    pub audit: Vec<(&'static str, Result<(), String>)>,
    pub per_client: BTreeMap<ClientId, u64>,
    pub sum: u64,
    pub transcript: Vec<Message>,
}

impl DemoReport {
    pub fn audit_passed(&self) -> bool {
        self.audit.iter().all(|(_, r)| r.is_ok())
    }
}

fn summarize(transcript: &[Message]) -> Vec<PhaseSummary> {
    let mut out: Vec<PhaseSummary> = Vec::new();
    for phase in [Phase::Setup, Phase::Preparation, Phase::Evaluation, Phase::Decryption] {
        let mut s = PhaseSummary {
            phase: phase.to_string(),
            ..Default::default()
        };
        for m in transcript.iter().filter(|m| m.kind.phase() == phase) {
            s.messages += 1;
            s.bytes += m.payload.len();
            *s.kinds.entry(m.kind.to_string()).or_default() += 1;
        }
        out.push(s);
    }
    out
}

/// Runs all four phases with `f = product` over every client, then decodes
/// each client's result with a bounded discrete log.
pub fn run_demo(opts: &DemoOptions) -> Result<DemoReport, CliError> {
    let k = opts.messages.len();
    if k < 2 {
        return Err(CliError::Usage(format!("need at least two messages, got {k}")));
    }
    if opts.bound == 0 || opts.bound > MAX_DLOG_BOUND {
        return Err(CliError::Usage(format!(
            "--bound must be between 1 and {MAX_DLOG_BOUND}"
        )));
    }
    if let Some(m) = opts.messages.iter().find(|&&m| m > opts.bound) {
        return Err(CliError::Usage(format!(
            "message {m} exceeds the bound {}",
            opts.bound
        )));
    }
    let params = &opts.params;
    let inputs = opts.messages.iter().map(|&m| params.encode_integer(m)).collect();
    let mut world = World::new(params.clone(), inputs, WorldOptions::seeded(opts.seed))?;
    let f = FunctionDescriptor::integer_sum((1..=k as u32).map(ClientId));
    let results = world.run(&f)?;

    let mut per_client = BTreeMap::new();
    for (c, m) in &results {
        per_client.insert(*c, bounded_dlog(params, m, opts.bound)?);
    }
    let sum = per_client[&ClientId(1)];
    let audit = vec![
        ("cloud ignorance", audit::check_cloud_ignorance(&world)),
        ("client isolation", audit::check_client_isolation(&world)),
        ("phase order", audit::check_phase_order(world.transcript())),
        ("store integrity", audit::check_store_integrity(&world)),
    ]
    .into_iter()
    .map(|(name, r)| (name, r.map_err(|v| v.to_string())))
    .collect();

    Ok(DemoReport {
        backend: match params.transparent_prime() {
            Some(p) => format!("transparent (p = {p})"),
            None => "curve (BLS12-381)".to_string(),
        },
        k,
        seed: opts.seed,
        messages: opts.messages.clone(),
        phases: summarize(world.transcript()),
        audit,
        per_client,
        sum,
        transcript: world.transcript().to_vec(),
    })
}

impl fmt::Display for DemoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "backend: {}", self.backend)?;
        writeln!(f, "clients: {}  seed: {}  messages: {:?}", self.k, self.seed, self.messages)?;
        for p in &self.phases {
            let kinds: Vec<String> = p.kinds.iter().map(|(k, n)| format!("{k} x{n}")).collect();
            writeln!(
                f,
                "{:<12} {:>3} messages {:>7} bytes  {}",
                p.phase,
                p.messages,
                p.bytes,
                kinds.join(", ")
            )?;
        }
        for (name, r) in &self.audit {
            match r {
                Ok(()) => writeln!(f, "audit {name}: ok")?,
                Err(v) => writeln!(f, "audit {name}: FAILED ({v})")?,
            }
        }
        for (c, v) in &self.per_client {
            writeln!(f, "{c} decrypted {v}")?;
        }
        write!(f, "recovered sum: {}", self.sum)
    }
}
