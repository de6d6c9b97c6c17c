//! Syntactic privacy checks over a protocol transcript.
//!
//! Each check decodes every relevant message and compares the typed values
//! it carries against the secrets held by the roles. Equality of values is
//! what is tested, so the checks are only meaningful when the group order is
//! large enough that unrelated values do not collide by chance; with a
//! toy prime such as 11 they can report false alarms.

use std::collections::HashSet;
use std::fmt;

use super::{Message, MessageKind, Phase, Role, Transport, World};
use crate::envelope::{self, Object};
use crate::htpre::ClientId;

/// What a transcript revealed that it should not have.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub seq: u64,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "message #{}: {}", self.seq, self.detail)
    }
}

/// A typed value as it appears on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Value {
    Scalar(Vec<u8>),
    Gt(Vec<u8>),
}

fn values_of(obj: &Object) -> Vec<Value> {
    use Value::*;
    match obj {
        Object::KeyPair(kp) => vec![Scalar(kp.alpha.to_bytes())],
        Object::TargetKey(t) => {
            let mut v = vec![Scalar(t.alpha0.to_bytes())];
            v.extend(t.shares.iter().map(|s| Scalar(s.value.to_bytes())));
            v
        }
        Object::Ciphertext(ct) => vec![Gt(ct.c2.to_bytes())],
        Object::ReEncCiphertext(ct) => vec![Gt(ct.c1.to_bytes()), Gt(ct.c2.to_bytes())],
        Object::Message(m) => vec![Gt(m.to_bytes())],
        Object::Share(s) => vec![Scalar(s.value.to_bytes())],
        Object::PartialDecryption(p) => vec![Gt(p.w.to_bytes())],
        Object::Params(_)
        | Object::PublicKey(_)
        | Object::TargetPublicKey(_)
        | Object::ReEncryptionKey(_)
        | Object::Function(_) => Vec::new(),
    }
}

fn decode(msg: &Message) -> Result<Object, Violation> {
    envelope::decode(&msg.payload)
        .map(|(_, obj)| obj)
        .map_err(|e| Violation {
            seq: msg.seq,
            detail: format!("undecodable payload: {e}"),
        })
}

struct Secrets {
    plaintexts: Vec<(ClientId, Value)>,
    keys: Vec<(ClientId, Value)>,
    shares: Vec<(ClientId, Value)>,
    partials: Vec<(ClientId, Value)>,
    dealer: Option<Value>,
}

fn secrets<T: Transport>(world: &World<T>) -> Secrets {
    let mut s = Secrets {
        plaintexts: Vec::new(),
        keys: Vec::new(),
        shares: Vec::new(),
        partials: Vec::new(),
        dealer: world
            .third_party()
            .target
            .as_ref()
            .map(|t| Value::Scalar(t.alpha0.to_bytes())),
    };
    for c in world.clients() {
        s.plaintexts.push((c.id, Value::Gt(c.plaintext.to_bytes())));
        if let Some(out) = c.output {
            s.plaintexts.push((c.id, Value::Gt(out.to_bytes())));
        }
        if let Some(kp) = c.keypair {
            s.keys.push((c.id, Value::Scalar(kp.alpha.to_bytes())));
        }
        if let Some(sh) = c.share {
            s.shares.push((c.id, Value::Scalar(sh.value.to_bytes())));
        }
        if let Some(p) = c.partials.iter().find(|p| p.index == u64::from(c.id.0)) {
            s.partials.push((c.id, Value::Gt(p.w.to_bytes())));
        }
    }
    s
}

/// The cloud only ever sees parameters, ciphertexts, re-encryption keys and
/// function descriptions, and none of the values it sees is a plaintext, a
/// result, a secret key, a share or a partial decryption.
pub fn check_cloud_ignorance<T: Transport>(world: &World<T>) -> Result<(), Violation> {
    let s = secrets(world);
    let forbidden: HashSet<&Value> = s
        .plaintexts
        .iter()
        .chain(&s.keys)
        .chain(&s.shares)
        .chain(&s.partials)
        .map(|(_, v)| v)
        .chain(s.dealer.as_ref())
        .collect();
    for msg in world.transcript().iter().filter(|m| m.to == Role::Cloud) {
        if !matches!(
            msg.kind,
            MessageKind::PublishParams
                | MessageKind::UploadCiphertext
                | MessageKind::RegisterRekey
                | MessageKind::EvalRequest
        ) {
            return Err(Violation {
                seq: msg.seq,
                detail: format!("cloud received {}", msg.kind),
            });
        }
        let obj = decode(msg)?;
        if !matches!(
            obj,
            Object::Params(_)
                | Object::Ciphertext(_)
                | Object::ReEncryptionKey(_)
                | Object::Function(_)
        ) {
            return Err(Violation {
                seq: msg.seq,
                detail: format!("cloud received a {}", obj.object_type().name()),
            });
        }
        if values_of(&obj).iter().any(|v| forbidden.contains(v)) {
            return Err(Violation {
                seq: msg.seq,
                detail: "cloud-bound payload carries a secret value".into(),
            });
        }
    }
    Ok(())
}

/// No client receives another client's plaintext, secret key or share.
pub fn check_client_isolation<T: Transport>(world: &World<T>) -> Result<(), Violation> {
    let s = secrets(world);
    for msg in world.transcript() {
        let Role::Client(me) = msg.to else { continue };
        let obj = decode(msg)?;
        let foreign: HashSet<&Value> = s
            .plaintexts
            .iter()
            .filter(|(c, _)| *c != me)
            .chain(s.keys.iter().filter(|(c, _)| *c != me))
            .chain(s.shares.iter().filter(|(c, _)| *c != me))
            .map(|(_, v)| v)
            .collect();
        // the result itself is learned legitimately by everyone
        let own_result: HashSet<Value> = world
            .client(me)
            .and_then(|c| c.output)
            .map(|m| Value::Gt(m.to_bytes()))
            .into_iter()
            .collect();
        if values_of(&obj)
            .iter()
            .any(|v| foreign.contains(v) && !own_result.contains(v))
        {
            return Err(Violation {
                seq: msg.seq,
                detail: format!("{me} received another client's secret"),
            });
        }
        if let Object::Share(sh) = obj {
            if sh.index != u64::from(me.0) {
                return Err(Violation {
                    seq: msg.seq,
                    detail: format!("{me} received share {}", sh.index),
                });
            }
        }
    }
    Ok(())
}

/// Message kinds appear in non-decreasing phase order.
pub fn check_phase_order(transcript: &[Message]) -> Result<(), Violation> {
    let mut current = Phase::Setup;
    for msg in transcript {
        let p = msg.kind.phase();
        if p < current {
            return Err(Violation {
                seq: msg.seq,
                detail: format!("{} after the {current} phase began", msg.kind),
            });
        }
        current = p;
    }
    Ok(())
}

/// The stored ciphertexts are exactly the uploaded ones.
pub fn check_store_integrity<T: Transport>(world: &World<T>) -> Result<(), Violation> {
    let uploads = world
        .transcript()
        .iter()
        .filter(|m| m.kind == MessageKind::UploadCiphertext);
    let mut seen = 0;
    for msg in uploads {
        seen += 1;
        let Object::Ciphertext(ct) = decode(msg)? else {
            return Err(Violation {
                seq: msg.seq,
                detail: "upload is not a ciphertext".into(),
            });
        };
        if world.cloud().store.ciphertexts.get(&ct.owner) != Some(&ct) {
            return Err(Violation {
                seq: msg.seq,
                detail: format!("stored ciphertext of {} differs from upload", ct.owner),
            });
        }
    }
    if seen != world.cloud().store.ciphertexts.len() {
        return Err(Violation {
            seq: u64::MAX,
            detail: "store holds ciphertexts that were never uploaded".into(),
        });
    }
    Ok(())
}

/// Runs every check.
pub fn check_all<T: Transport>(world: &World<T>) -> Result<(), Violation> {
    check_cloud_ignorance(world)?;
    check_client_isolation(world)?;
    check_phase_order(world.transcript())?;
    check_store_integrity(world)
}
