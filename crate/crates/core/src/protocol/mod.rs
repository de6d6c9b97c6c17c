//! The four-phase multiparty cloud computation protocol.
//!
//! Three kinds of role exchange [`Message`]s over a [`Transport`]:
//!
//! * **Setup**: the trusted third party publishes the group parameters;
//!   each client generates a key pair, encrypts its input and uploads it.
//! * **Preparation**: the third party creates the target key, publishes
//!   `spk` and hands share `i` to client `i`; each client sends the cloud a
//!   re-encryption key and the cloud re-encrypts that client's ciphertext.
//! * **Evaluation**: a client asks the cloud to evaluate a
//!   [`FunctionDescriptor`]; the cloud multiplies the re-encrypted inputs and
//!   sends the result to every client.
//! * **Decryption**: every client broadcasts its partial decryption to the
//!   other clients and combines all `k` of them locally.
//!
//! Phases are barriers: [`World`] drains every pending message before the
//! next phase may start, so the outcome does not depend on the delivery
//! order inside a phase.

pub mod audit;
mod function;
mod roles;
mod transport;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::algebra::{GroupParams, GtElem};
use crate::envelope::EnvelopeError;
use crate::htpre::{ClientId, HtpreError};
use roles::Outgoing;

pub use function::{FunctionDescriptor, FunctionKind, MAX_EXPONENT};
pub use roles::{ClientState, CloudState, CloudStore, ThirdPartyState};
pub use transport::{transcript_jsonl, InProcessTransport, Message, Schedule, Transport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("{registered} of {expected} clients registered")]
    MissingClient { expected: usize, registered: usize },
    #[error("{0} has no data in the cloud")]
    UnknownParticipant(ClientId),
    #[error("the protocol needs at least two clients, got {0}")]
    TooFewClients(usize),
    #[error("cannot run the {requested} phase now; next phase is {expected}")]
    PhaseOrder { expected: Phase, requested: Phase },
    #[error("{role} tried to send {kind} during the {phase} phase")]
    PhaseViolation {
        role: Role,
        kind: MessageKind,
        phase: Phase,
    },
    #[error("{kind} may not travel from {from} to {to}")]
    RouteViolation {
        from: Role,
        to: Role,
        kind: MessageKind,
    },
    #[error("{role} received unexpected {kind} from {from}")]
    Unexpected {
        role: Role,
        kind: MessageKind,
        from: Role,
    },
    #[error("{role} is missing its {missing}")]
    NotReady { role: Role, missing: &'static str },
    #[error("cloud already stores data for {0}")]
    StoreConflict(ClientId),
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("{client}: {source}")]
    ClientFailed {
        client: ClientId,
        source: Box<ProtocolError>,
    },
    #[error(transparent)]
    Htpre(#[from] HtpreError),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    ThirdParty,
    Client(ClientId),
    Cloud,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::ThirdParty => f.write_str("third_party"),
            Role::Client(c) => write!(f, "client:{}", c.0),
            Role::Cloud => f.write_str("cloud"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Phase {
    #[default]
    Setup,
    Preparation,
    Evaluation,
    Decryption,
    Done,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Setup => "setup",
            Phase::Preparation => "preparation",
            Phase::Evaluation => "evaluation",
            Phase::Decryption => "decryption",
            Phase::Done => "done",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MessageKind {
    PublishParams,
    UploadCiphertext,
    PublishSpk,
    DeliverShare,
    RegisterRekey,
    EvalRequest,
    EvalResult,
    PartialDecryption,
}

impl MessageKind {
    /// The phase a message of this kind belongs to.
    pub fn phase(self) -> Phase {
        match self {
            MessageKind::PublishParams | MessageKind::UploadCiphertext => Phase::Setup,
            MessageKind::PublishSpk | MessageKind::DeliverShare | MessageKind::RegisterRekey => {
                Phase::Preparation
            }
            MessageKind::EvalRequest | MessageKind::EvalResult => Phase::Evaluation,
            MessageKind::PartialDecryption => Phase::Decryption,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::PublishParams => "publish_params",
            MessageKind::UploadCiphertext => "upload_ciphertext",
            MessageKind::PublishSpk => "publish_spk",
            MessageKind::DeliverShare => "deliver_share",
            MessageKind::RegisterRekey => "register_rekey",
            MessageKind::EvalRequest => "eval_request",
            MessageKind::EvalResult => "eval_result",
            MessageKind::PartialDecryption => "partial_decryption",
        }
    }

    /// Whether a message of this kind may travel from `from` to `to`.
    pub fn route_allowed(self, from: Role, to: Role) -> bool {
        use Role::*;
        match self {
            MessageKind::PublishParams => from == ThirdParty && to != ThirdParty,
            MessageKind::PublishSpk | MessageKind::DeliverShare => {
                from == ThirdParty && matches!(to, Client(_))
            }
            MessageKind::UploadCiphertext
            | MessageKind::RegisterRekey
            | MessageKind::EvalRequest => matches!(from, Client(_)) && to == Cloud,
            MessageKind::EvalResult => from == Cloud && matches!(to, Client(_)),
            MessageKind::PartialDecryption => {
                matches!((from, to), (Client(a), Client(b)) if a != b)
            }
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Knobs for a protocol run. Misbehavior is limited to the two toggles.
#[derive(Debug, Clone)]
pub struct WorldOptions {
    pub seed: u64,
    /// Delivery order inside a phase.
    pub schedule: Schedule,
    /// Client that asks the cloud to evaluate.
    pub requester: ClientId,
    /// Client that never shows up.
    pub absent: Option<ClientId>,
    /// Client that keeps its partial decryption to itself.
    pub withhold_partial: Option<ClientId>,
}

impl Default for WorldOptions {
    fn default() -> Self {
        WorldOptions {
            seed: 0,
            schedule: Schedule::Fifo,
            requester: ClientId(1),
            absent: None,
            withhold_partial: None,
        }
    }
}

impl WorldOptions {
    pub fn seeded(seed: u64) -> Self {
        WorldOptions {
            seed,
            ..Default::default()
        }
    }
}

/// All roles of one protocol run plus the channel between them.
#[derive(Debug)]
pub struct World<T: Transport = InProcessTransport> {
    params: GroupParams,
    phase: Phase,
    third_party: ThirdPartyState,
    clients: Vec<ClientState>,
    cloud: CloudState,
    transport: T,
    options: WorldOptions,
}

impl World<InProcessTransport> {
    /// A world with one client per input; client `i` owns `inputs[i - 1]`.
    pub fn new(
        params: GroupParams,
        inputs: Vec<GtElem>,
        options: WorldOptions,
    ) -> Result<Self, ProtocolError> {
        let transport = InProcessTransport::new(options.schedule.clone());
        World::with_transport(params, inputs, options, transport)
    }
}

impl<T: Transport> World<T> {
    pub fn with_transport(
        params: GroupParams,
        inputs: Vec<GtElem>,
        options: WorldOptions,
        transport: T,
    ) -> Result<Self, ProtocolError> {
        let k = inputs.len();
        if k < 2 {
            return Err(ProtocolError::TooFewClients(k));
        }
        // stream 0 is the dealer, stream i is client i
        let third_party = ThirdPartyState::new(params.clone(), crate::rng::stream(options.seed, 0));
        let clients = inputs
            .into_iter()
            .enumerate()
            .map(|(n, m)| {
                let id = ClientId(n as u32 + 1);
                let mut c = ClientState::new(id, m, k, crate::rng::stream(options.seed, n as u64 + 1));
                c.absent = options.absent == Some(id);
                c.withhold_partial = options.withhold_partial == Some(id);
                c
            })
            .collect();
        Ok(World {
            params,
            phase: Phase::Setup,
            third_party,
            clients,
            cloud: CloudState::default(),
            transport,
            options,
        })
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    pub fn k(&self) -> usize {
        self.clients.len()
    }

    /// The next phase to run.
    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn third_party(&self) -> &ThirdPartyState {
        &self.third_party
    }

    pub fn clients(&self) -> &[ClientState] {
        &self.clients
    }

    pub fn client(&self, id: ClientId) -> Option<&ClientState> {
        self.clients.get((id.0 as usize).checked_sub(1)?)
    }

    pub fn cloud(&self) -> &CloudState {
        &self.cloud
    }

    pub fn transport_mut(&mut self) -> &mut T {
        &mut self.transport
    }

    /// Every message sent so far, in order.
    pub fn transcript(&self) -> &[Message] {
        self.transport.log()
    }

    fn begin(&mut self, requested: Phase) -> Result<(), ProtocolError> {
        if self.phase != requested {
            return Err(ProtocolError::PhaseOrder {
                expected: self.phase,
                requested,
            });
        }
        self.third_party.phase = requested;
        self.cloud.phase = requested;
        for c in &mut self.clients {
            c.phase = requested;
        }
        Ok(())
    }

    fn role_phase(&self, role: Role) -> Phase {
        match role {
            Role::ThirdParty => self.third_party.phase,
            Role::Cloud => self.cloud.phase,
            Role::Client(id) => self.client(id).map_or(Phase::Setup, |c| c.phase),
        }
    }

    fn dispatch(&mut self, from: Role, out: Vec<Outgoing>) -> Result<(), ProtocolError> {
        for o in out {
            let phase = self.role_phase(from);
            if o.kind.phase() > phase {
                return Err(ProtocolError::PhaseViolation {
                    role: from,
                    kind: o.kind,
                    phase,
                });
            }
            if !o.kind.route_allowed(from, o.to) {
                return Err(ProtocolError::RouteViolation {
                    from,
                    to: o.to,
                    kind: o.kind,
                });
            }
            self.transport.send(from, o.to, o.kind, o.payload);
        }
        Ok(())
    }

    fn pump(&mut self) -> Result<(), ProtocolError> {
        while let Some(msg) = self.transport.next_delivery() {
            let out = match msg.to {
                Role::ThirdParty => self.third_party.handle(&msg)?,
                Role::Cloud => self.cloud.handle(&msg)?,
                Role::Client(id) => {
                    let idx = (id.0 as usize)
                        .checked_sub(1)
                        .filter(|&i| i < self.clients.len())
                        .ok_or(ProtocolError::UnknownParticipant(id))?;
                    self.clients[idx].handle(&msg)?
                }
            };
            self.dispatch(msg.to, out)?;
        }
        Ok(())
    }

    pub fn run_setup_phase(&mut self) -> Result<(), ProtocolError> {
        self.begin(Phase::Setup)?;
        let out = self.third_party.start_setup(self.k());
        self.dispatch(Role::ThirdParty, out)?;
        self.pump()?;
        self.phase = Phase::Preparation;
        Ok(())
    }

    pub fn run_preparation_phase(&mut self) -> Result<(), ProtocolError> {
        self.begin(Phase::Preparation)?;
        let registered = self.cloud.store.ciphertexts.len();
        if registered < self.k() {
            return Err(ProtocolError::MissingClient {
                expected: self.k(),
                registered,
            });
        }
        let out = self.third_party.start_preparation(self.k())?;
        self.dispatch(Role::ThirdParty, out)?;
        self.pump()?;
        self.phase = Phase::Evaluation;
        Ok(())
    }

    pub fn run_evaluation_phase(&mut self, f: &FunctionDescriptor) -> Result<(), ProtocolError> {
        self.begin(Phase::Evaluation)?;
        f.validate().map_err(ProtocolError::InvalidFunction)?;
        let requester = self.options.requester;
        let out = self
            .client(requester)
            .ok_or(ProtocolError::UnknownParticipant(requester))?
            .request_evaluation(f)?;
        self.dispatch(Role::Client(requester), vec![out])?;
        self.pump()?;
        self.phase = Phase::Decryption;
        Ok(())
    }

    /// Returns every client's decrypted result. Fails with the first client
    /// that could not collect all `k` partial decryptions.
    pub fn run_decryption_phase(&mut self) -> Result<BTreeMap<ClientId, GtElem>, ProtocolError> {
        self.begin(Phase::Decryption)?;
        for i in 0..self.clients.len() {
            let out = self.clients[i].start_decryption()?;
            let from = Role::Client(self.clients[i].id);
            self.dispatch(from, out)?;
        }
        self.pump()?;
        self.phase = Phase::Done;
        self.clients
            .iter()
            .map(|c| {
                c.decryption_outcome()
                    .map(|m| (c.id, m))
                    .map_err(|e| ProtocolError::ClientFailed {
                        client: c.id,
                        source: Box::new(e),
                    })
            })
            .collect()
    }

    /// Runs all four phases with `f`.
    pub fn run(&mut self, f: &FunctionDescriptor) -> Result<BTreeMap<ClientId, GtElem>, ProtocolError> {
        self.run_setup_phase()?;
        self.run_preparation_phase()?;
        self.run_evaluation_phase(f)?;
        self.run_decryption_phase()
    }
}
