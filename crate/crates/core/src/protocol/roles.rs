use std::collections::BTreeMap;

use super::{FunctionDescriptor, MessageKind, Phase, ProtocolError, Role};
use crate::algebra::{G2Elem, GroupParams, GtElem};
use crate::envelope::{self, Object};
use crate::htpre::{
    self, Ciphertext, ClientId, HtpreError, KeyPair, PartialDecryption, ReEncCiphertext,
    ReEncryptionKey, TargetKeyMaterial,
};
use crate::protocol::transport::Message;
use crate::rng::DeterministicRng;
use crate::shamir::{SecretShare, ShamirError};

/// A message a role wants sent.
#[derive(Debug)]
pub(crate) struct Outgoing {
    pub to: Role,
    pub kind: MessageKind,
    pub payload: Vec<u8>,
}

fn decode_object(params: Option<&GroupParams>, msg: &Message) -> Result<Object, ProtocolError> {
    let obj = match params {
        Some(p) => envelope::decode_with(p, &msg.payload)?,
        None => envelope::decode(&msg.payload)?.1,
    };
    Ok(obj)
}

fn unexpected(role: Role, msg: &Message) -> ProtocolError {
    ProtocolError::Unexpected {
        role,
        kind: msg.kind,
        from: msg.from,
    }
}

fn clients(k: usize) -> impl Iterator<Item = ClientId> {
    (1..=k as u32).map(ClientId)
}

/// The trusted dealer. Holds `α_0` and never sends it.
#[derive(Debug)]
pub struct ThirdPartyState {
    pub phase: Phase,
    pub params: GroupParams,
    pub target: Option<TargetKeyMaterial>,
    rng: DeterministicRng,
}

impl ThirdPartyState {
    pub(crate) fn new(params: GroupParams, rng: DeterministicRng) -> Self {
        ThirdPartyState {
            phase: Phase::Setup,
            params,
            target: None,
            rng,
        }
    }

    pub(crate) fn start_setup(&mut self, k: usize) -> Vec<Outgoing> {
        let payload = envelope::encode(&self.params, &Object::Params(self.params.clone()));
        clients(k)
            .map(Role::Client)
            .chain([Role::Cloud])
            .map(|to| Outgoing {
                to,
                kind: MessageKind::PublishParams,
                payload: payload.clone(),
            })
            .collect()
    }

    pub(crate) fn start_preparation(&mut self, k: usize) -> Result<Vec<Outgoing>, ProtocolError> {
        let target = htpre::thkeygen(&self.params, k, &mut self.rng)?;
        let spk = envelope::encode(&self.params, &Object::TargetPublicKey(target.spk));
        let mut out = Vec::with_capacity(2 * k);
        for c in clients(k) {
            out.push(Outgoing {
                to: Role::Client(c),
                kind: MessageKind::PublishSpk,
                payload: spk.clone(),
            });
        }
        for share in &target.shares {
            out.push(Outgoing {
                to: Role::Client(ClientId(share.index as u32)),
                kind: MessageKind::DeliverShare,
                payload: envelope::encode(&self.params, &Object::Share(*share)),
            });
        }
        self.target = Some(target);
        Ok(out)
    }

    pub(crate) fn handle(&mut self, msg: &Message) -> Result<Vec<Outgoing>, ProtocolError> {
        Err(unexpected(Role::ThirdParty, msg))
    }
}

/// One data owner.
#[derive(Debug)]
pub struct ClientState {
    pub id: ClientId,
    pub phase: Phase,
    /// The client's private input.
    pub plaintext: GtElem,
    pub params: Option<GroupParams>,
    pub keypair: Option<KeyPair>,
    pub spk: Option<G2Elem>,
    pub share: Option<SecretShare>,
    pub result: Option<ReEncCiphertext>,
    pub partials: Vec<PartialDecryption>,
    pub output: Option<GtElem>,
    pub(crate) k: usize,
    pub(crate) absent: bool,
    pub(crate) withhold_partial: bool,
    rng: DeterministicRng,
}

impl ClientState {
    pub(crate) fn new(id: ClientId, plaintext: GtElem, k: usize, rng: DeterministicRng) -> Self {
        ClientState {
            id,
            phase: Phase::Setup,
            plaintext,
            params: None,
            keypair: None,
            spk: None,
            share: None,
            result: None,
            partials: Vec::new(),
            output: None,
            k,
            absent: false,
            withhold_partial: false,
            rng,
        }
    }

    fn role(&self) -> Role {
        Role::Client(self.id)
    }

    fn params(&self) -> Result<&GroupParams, ProtocolError> {
        self.params.as_ref().ok_or(ProtocolError::NotReady {
            role: self.role(),
            missing: "group parameters",
        })
    }

    pub(crate) fn request_evaluation(&self, f: &FunctionDescriptor) -> Result<Outgoing, ProtocolError> {
        Ok(Outgoing {
            to: Role::Cloud,
            kind: MessageKind::EvalRequest,
            payload: envelope::encode(self.params()?, &Object::Function(f.clone())),
        })
    }

    pub(crate) fn start_decryption(&mut self) -> Result<Vec<Outgoing>, ProtocolError> {
        if self.absent {
            return Ok(Vec::new());
        }
        let params = self.params()?.clone();
        let ct = self.result.ok_or(ProtocolError::NotReady {
            role: self.role(),
            missing: "evaluation result",
        })?;
        let share = self.share.ok_or(ProtocolError::NotReady {
            role: self.role(),
            missing: "target key share",
        })?;
        let partial = htpre::thdec_share(&params, &ct, &share)?;
        let mut out = Vec::new();
        if !self.withhold_partial {
            let payload = envelope::encode(&params, &Object::PartialDecryption(partial));
            for other in clients(self.k).filter(|&c| c != self.id) {
                out.push(Outgoing {
                    to: Role::Client(other),
                    kind: MessageKind::PartialDecryption,
                    payload: payload.clone(),
                });
            }
        }
        self.accept_partial(partial)?;
        Ok(out)
    }

    fn accept_partial(&mut self, partial: PartialDecryption) -> Result<(), ProtocolError> {
        self.partials.push(partial);
        if self.partials.len() == self.k {
            let params = self.params()?;
            let ct = self.result.ok_or(ProtocolError::NotReady {
                role: Role::Client(self.id),
                missing: "evaluation result",
            })?;
            self.output = Some(htpre::thdec_combine(params, &ct, &self.partials, self.k)?);
        }
        Ok(())
    }

    pub(crate) fn handle(&mut self, msg: &Message) -> Result<Vec<Outgoing>, ProtocolError> {
        if self.absent {
            return Ok(Vec::new());
        }
        match (msg.kind, msg.from) {
            (MessageKind::PublishParams, Role::ThirdParty) => {
                let Object::Params(params) = decode_object(None, msg)? else {
                    return Err(unexpected(self.role(), msg));
                };
                let kp = htpre::keygen(&params, self.id, &mut self.rng);
                let ct = htpre::enc(&params, &self.plaintext, &kp.public(), &mut self.rng)?;
                let payload = envelope::encode(&params, &Object::Ciphertext(ct));
                self.keypair = Some(kp);
                self.params = Some(params);
                Ok(vec![Outgoing {
                    to: Role::Cloud,
                    kind: MessageKind::UploadCiphertext,
                    payload,
                }])
            }
            (MessageKind::PublishSpk, Role::ThirdParty) => {
                let Object::TargetPublicKey(spk) = decode_object(Some(self.params()?), msg)? else {
                    return Err(unexpected(self.role(), msg));
                };
                let params = self.params()?;
                let kp = self.keypair.ok_or(ProtocolError::NotReady {
                    role: self.role(),
                    missing: "key pair",
                })?;
                let rk = htpre::proxykeygen(params, &kp, &spk)?;
                let payload = envelope::encode(params, &Object::ReEncryptionKey(rk));
                self.spk = Some(spk);
                Ok(vec![Outgoing {
                    to: Role::Cloud,
                    kind: MessageKind::RegisterRekey,
                    payload,
                }])
            }
            (MessageKind::DeliverShare, Role::ThirdParty) => {
                let Object::Share(share) = decode_object(Some(self.params()?), msg)? else {
                    return Err(unexpected(self.role(), msg));
                };
                if share.index != u64::from(self.id.0) {
                    return Err(unexpected(self.role(), msg));
                }
                self.share = Some(share);
                Ok(Vec::new())
            }
            (MessageKind::EvalResult, Role::Cloud) => {
                let Object::ReEncCiphertext(ct) = decode_object(Some(self.params()?), msg)? else {
                    return Err(unexpected(self.role(), msg));
                };
                self.result = Some(ct);
                Ok(Vec::new())
            }
            (MessageKind::PartialDecryption, Role::Client(from)) if from != self.id => {
                let Object::PartialDecryption(p) = decode_object(Some(self.params()?), msg)? else {
                    return Err(unexpected(self.role(), msg));
                };
                if p.index != u64::from(from.0) {
                    return Err(unexpected(self.role(), msg));
                }
                self.accept_partial(p)?;
                Ok(Vec::new())
            }
            _ => Err(unexpected(self.role(), msg)),
        }
    }

    /// Outcome of threshold decryption at this client.
    pub fn decryption_outcome(&self) -> Result<GtElem, ProtocolError> {
        self.output.ok_or(ProtocolError::Htpre(HtpreError::Shamir(
            ShamirError::InsufficientShares {
                have: self.partials.len(),
                need: self.k,
            },
        )))
    }
}

/// Ciphertexts held on behalf of clients, one slot per owner. Uploaded
/// ciphertexts are never overwritten.
#[derive(Debug, Default, Clone)]
pub struct CloudStore {
    pub ciphertexts: BTreeMap<ClientId, Ciphertext>,
    pub rekeys: BTreeMap<ClientId, ReEncryptionKey>,
    pub reencrypted: BTreeMap<ClientId, ReEncCiphertext>,
}

impl CloudStore {
    fn insert_ciphertext(&mut self, ct: Ciphertext) -> Result<(), ProtocolError> {
        if self.ciphertexts.contains_key(&ct.owner) {
            return Err(ProtocolError::StoreConflict(ct.owner));
        }
        self.ciphertexts.insert(ct.owner, ct);
        Ok(())
    }

    pub fn owners(&self) -> impl Iterator<Item = ClientId> + '_ {
        self.ciphertexts.keys().copied()
    }
}

/// The cloud: storage, re-encryption and evaluation.
#[derive(Debug, Default)]
pub struct CloudState {
    pub phase: Phase,
    pub params: Option<GroupParams>,
    pub store: CloudStore,
    pub outp: Option<ReEncCiphertext>,
}

impl CloudState {
    fn params(&self) -> Result<&GroupParams, ProtocolError> {
        self.params.as_ref().ok_or(ProtocolError::NotReady {
            role: Role::Cloud,
            missing: "group parameters",
        })
    }

    pub(crate) fn handle(&mut self, msg: &Message) -> Result<Vec<Outgoing>, ProtocolError> {
        match (msg.kind, msg.from) {
            (MessageKind::PublishParams, Role::ThirdParty) => {
                let Object::Params(params) = decode_object(None, msg)? else {
                    return Err(unexpected(Role::Cloud, msg));
                };
                self.params = Some(params);
                Ok(Vec::new())
            }
            (MessageKind::UploadCiphertext, Role::Client(from)) => {
                let Object::Ciphertext(ct) = decode_object(self.params.as_ref(), msg)? else {
                    return Err(unexpected(Role::Cloud, msg));
                };
                if ct.owner != from {
                    return Err(unexpected(Role::Cloud, msg));
                }
                self.store.insert_ciphertext(ct)?;
                Ok(Vec::new())
            }
            (MessageKind::RegisterRekey, Role::Client(from)) => {
                let params = self.params()?.clone();
                let Object::ReEncryptionKey(rk) = decode_object(Some(&params), msg)? else {
                    return Err(unexpected(Role::Cloud, msg));
                };
                if rk.owner != from {
                    return Err(unexpected(Role::Cloud, msg));
                }
                let ct = self
                    .store
                    .ciphertexts
                    .get(&from)
                    .ok_or(ProtocolError::UnknownParticipant(from))?;
                let re = htpre::proxyenc(&params, ct, &rk)?;
                self.store.rekeys.insert(from, rk);
                self.store.reencrypted.insert(from, re);
                Ok(Vec::new())
            }
            (MessageKind::EvalRequest, Role::Client(_)) => {
                let params = self.params()?.clone();
                let Object::Function(f) = decode_object(Some(&params), msg)? else {
                    return Err(unexpected(Role::Cloud, msg));
                };
                if let Some(c) = f
                    .participants()
                    .find(|c| !self.store.reencrypted.contains_key(c))
                {
                    return Err(ProtocolError::UnknownParticipant(c));
                }
                let outp = f.evaluate(&params, &self.store.reencrypted, |_| {
                    HtpreError::EmptyInput
                })?;
                self.outp = Some(outp);
                let payload = envelope::encode(&params, &Object::ReEncCiphertext(outp));
                Ok(self
                    .store
                    .owners()
                    .map(|c| Outgoing {
                        to: Role::Client(c),
                        kind: MessageKind::EvalResult,
                        payload: payload.clone(),
                    })
                    .collect())
            }
            _ => Err(unexpected(Role::Cloud, msg)),
        }
    }
}
