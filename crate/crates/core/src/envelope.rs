//! Self-describing encodings for keys, ciphertexts and protocol objects.
//!
//! Binary layout (all integers big-endian):
//!
//! ```text
//! version    u8      = 1
//! backend    u8      0 = transparent, 1 = curve
//! prime      u64     transparent only
//! type       u8      see ObjectType
//! length     u32     payload length
//! payload    [u8]    sequence of fields, each a u32 length followed by bytes
//! ```
//!
//! Group elements and scalars inside fields use the fixed-width canonical
//! encodings of [`crate::algebra`]. Decoding is strict: every length must
//! match and no trailing bytes are accepted, so each object has exactly one
//! encoding.
//!
//! The CLI stores envelopes as JSON with the payload hex-encoded, see
//! [`EnvelopeJson`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    setup_group, AlgebraError, BackendId, Element, G1Elem, G2Elem, GroupKind, GroupParams, GtElem,
    Scalar,
};
use crate::htpre::{
    Ciphertext, ClientId, KeyPair, PartialDecryption, PublicKey, ReEncCiphertext, ReEncryptionKey,
    TargetKeyMaterial,
};
use crate::protocol::FunctionDescriptor;
use crate::shamir::SecretShare;

pub const ENVELOPE_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvelopeError {
    #[error("envelope truncated")]
    Truncated,
    #[error("{0} trailing bytes after envelope")]
    TrailingBytes(usize),
    #[error("unsupported envelope version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown backend code {0}")]
    UnknownBackend(u8),
    #[error("unknown object type `{0}`")]
    UnknownObjectType(String),
    #[error("expected {expected}, found {found}")]
    UnexpectedObject {
        expected: &'static str,
        found: &'static str,
    },
    #[error("envelope was made for different group parameters")]
    ParamsMismatch,
    #[error("malformed field: {0}")]
    MalformedField(String),
    #[error("invalid JSON envelope: {0}")]
    Json(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Kinds of object an envelope can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectType {
    Params,
    KeyPair,
    PublicKey,
    TargetKey,
    TargetPublicKey,
    ReEncryptionKey,
    Ciphertext,
    ReEncCiphertext,
    Message,
    Share,
    PartialDecryption,
    Function,
}

impl ObjectType {
    const ALL: [ObjectType; 12] = [
        ObjectType::Params,
        ObjectType::KeyPair,
        ObjectType::PublicKey,
        ObjectType::TargetKey,
        ObjectType::TargetPublicKey,
        ObjectType::ReEncryptionKey,
        ObjectType::Ciphertext,
        ObjectType::ReEncCiphertext,
        ObjectType::Message,
        ObjectType::Share,
        ObjectType::PartialDecryption,
        ObjectType::Function,
    ];

    pub fn code(self) -> u8 {
        Self::ALL.iter().position(|&t| t == self).unwrap() as u8 + 1
    }

    pub fn from_code(code: u8) -> Option<ObjectType> {
        (code as usize).checked_sub(1).and_then(|i| Self::ALL.get(i).copied())
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectType::Params => "params",
            ObjectType::KeyPair => "key_pair",
            ObjectType::PublicKey => "public_key",
            ObjectType::TargetKey => "target_key",
            ObjectType::TargetPublicKey => "target_public_key",
            ObjectType::ReEncryptionKey => "reencryption_key",
            ObjectType::Ciphertext => "ciphertext",
            ObjectType::ReEncCiphertext => "reenc_ciphertext",
            ObjectType::Message => "message",
            ObjectType::Share => "share",
            ObjectType::PartialDecryption => "partial_decryption",
            ObjectType::Function => "function",
        }
    }

    pub fn from_name(name: &str) -> Option<ObjectType> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }
}

/// Any object that can travel in an envelope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Object {
    Params(GroupParams),
    KeyPair(KeyPair),
    PublicKey(PublicKey),
    TargetKey(TargetKeyMaterial),
    TargetPublicKey(G2Elem),
    ReEncryptionKey(ReEncryptionKey),
    Ciphertext(Ciphertext),
    ReEncCiphertext(ReEncCiphertext),
    Message(GtElem),
    Share(SecretShare),
    PartialDecryption(PartialDecryption),
    Function(FunctionDescriptor),
}

impl Object {
    pub fn object_type(&self) -> ObjectType {
        match self {
            Object::Params(_) => ObjectType::Params,
            Object::KeyPair(_) => ObjectType::KeyPair,
            Object::PublicKey(_) => ObjectType::PublicKey,
            Object::TargetKey(_) => ObjectType::TargetKey,
            Object::TargetPublicKey(_) => ObjectType::TargetPublicKey,
            Object::ReEncryptionKey(_) => ObjectType::ReEncryptionKey,
            Object::Ciphertext(_) => ObjectType::Ciphertext,
            Object::ReEncCiphertext(_) => ObjectType::ReEncCiphertext,
            Object::Message(_) => ObjectType::Message,
            Object::Share(_) => ObjectType::Share,
            Object::PartialDecryption(_) => ObjectType::PartialDecryption,
            Object::Function(_) => ObjectType::Function,
        }
    }

    /// The raw field-sequence encoding carried inside an envelope.
    pub fn payload(&self) -> Vec<u8> {
        let mut w = FieldWriter::default();
        match self {
            Object::Params(p) => {
                w.field(&p.security_level.to_be_bytes());
            }
            Object::KeyPair(kp) => {
                w.field(&kp.owner.0.to_be_bytes());
                w.field(&kp.alpha.to_bytes());
                w.field(&kp.pk.to_bytes());
            }
            Object::PublicKey(pk) => {
                w.field(&pk.owner.0.to_be_bytes());
                w.field(&pk.pk.to_bytes());
            }
            Object::TargetKey(t) => {
                w.field(&t.alpha0.to_bytes());
                w.field(&t.spk.to_bytes());
                w.field(&(t.shares.len() as u32).to_be_bytes());
                for share in &t.shares {
                    w.field(&share.index.to_be_bytes());
                    w.field(&share.value.to_bytes());
                }
            }
            Object::TargetPublicKey(spk) => {
                w.field(&spk.to_bytes());
            }
            Object::ReEncryptionKey(rk) => {
                w.field(&rk.owner.0.to_be_bytes());
                w.field(&rk.rk.to_bytes());
            }
            Object::Ciphertext(ct) => {
                w.field(&ct.owner.0.to_be_bytes());
                w.field(&ct.c1.to_bytes());
                w.field(&ct.c2.to_bytes());
            }
            Object::ReEncCiphertext(ct) => {
                w.field(&ct.c1.to_bytes());
                w.field(&ct.c2.to_bytes());
            }
            Object::Message(m) => {
                w.field(&m.to_bytes());
            }
            Object::Share(s) => {
                w.field(&s.index.to_be_bytes());
                w.field(&s.value.to_bytes());
            }
            Object::PartialDecryption(p) => {
                w.field(&p.index.to_be_bytes());
                w.field(&p.w.to_bytes());
            }
            Object::Function(f) => f.write_fields(&mut w),
        }
        w.0
    }

    fn from_payload(
        params: &GroupParams,
        ty: ObjectType,
        payload: &[u8],
    ) -> Result<Object, EnvelopeError> {
        let mut r = FieldReader::new(payload);
        let obj = match ty {
            ObjectType::Params => {
                let level = r.u32()?;
                Object::Params(GroupParams {
                    security_level: level,
                    ..params.clone()
                })
            }
            ObjectType::KeyPair => {
                let owner = ClientId(r.u32()?);
                let alpha = r.scalar(params)?;
                let pk: G1Elem = r.element(params)?;
                let kp = KeyPair::from_secret(params, owner, alpha)
                    .map_err(|e| EnvelopeError::MalformedField(e.to_string()))?;
                if kp.pk != pk {
                    return Err(EnvelopeError::MalformedField(
                        "public key does not match secret".into(),
                    ));
                }
                Object::KeyPair(kp)
            }
            ObjectType::PublicKey => Object::PublicKey(PublicKey {
                owner: ClientId(r.u32()?),
                pk: r.element(params)?,
            }),
            ObjectType::TargetKey => {
                let alpha0 = r.scalar(params)?;
                let spk = r.element(params)?;
                let k = r.u32()? as usize;
                let mut shares = Vec::with_capacity(k.min(1024));
                for _ in 0..k {
                    shares.push(SecretShare {
                        index: r.u64()?,
                        value: r.scalar(params)?,
                    });
                }
                Object::TargetKey(TargetKeyMaterial {
                    alpha0,
                    spk,
                    shares,
                })
            }
            ObjectType::TargetPublicKey => Object::TargetPublicKey(r.element(params)?),
            ObjectType::ReEncryptionKey => Object::ReEncryptionKey(ReEncryptionKey {
                owner: ClientId(r.u32()?),
                rk: r.element(params)?,
            }),
            ObjectType::Ciphertext => Object::Ciphertext(Ciphertext {
                owner: ClientId(r.u32()?),
                c1: r.element(params)?,
                c2: r.element(params)?,
            }),
            ObjectType::ReEncCiphertext => Object::ReEncCiphertext(ReEncCiphertext {
                c1: r.element(params)?,
                c2: r.element(params)?,
            }),
            ObjectType::Message => Object::Message(r.element(params)?),
            ObjectType::Share => Object::Share(SecretShare {
                index: r.u64()?,
                value: r.scalar(params)?,
            }),
            ObjectType::PartialDecryption => Object::PartialDecryption(PartialDecryption {
                index: r.u64()?,
                w: r.element(params)?,
            }),
            ObjectType::Function => Object::Function(FunctionDescriptor::read_fields(&mut r)?),
        };
        r.finish()?;
        Ok(obj)
    }
}

/// Serializes `obj` under `params`.
pub fn encode(params: &GroupParams, obj: &Object) -> Vec<u8> {
    let payload = obj.payload();
    let mut out = Vec::with_capacity(payload.len() + 16);
    out.push(ENVELOPE_VERSION);
    out.push(params.backend_id().code());
    if let Some(p) = params.transparent_prime() {
        out.extend_from_slice(&p.to_be_bytes());
    }
    out.push(obj.object_type().code());
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(&payload);
    out
}

/// Parses an envelope, rebuilding the group parameters from its header.
pub fn decode(bytes: &[u8]) -> Result<(GroupParams, Object), EnvelopeError> {
    let mut pos = 0;
    let mut take = |n: usize| -> Result<&[u8], EnvelopeError> {
        let end = pos + n;
        let s = bytes.get(pos..end).ok_or(EnvelopeError::Truncated)?;
        pos = end;
        Ok(s)
    };
    let version = take(1)?[0];
    if version != ENVELOPE_VERSION {
        return Err(EnvelopeError::UnsupportedVersion(version));
    }
    let code = take(1)?[0];
    let backend = BackendId::from_code(code).ok_or(EnvelopeError::UnknownBackend(code))?;
    let prime = match backend {
        BackendId::Transparent => Some(u64::from_be_bytes(take(8)?.try_into().unwrap())),
        BackendId::Curve => None,
    };
    let ty_code = take(1)?[0];
    let ty = ObjectType::from_code(ty_code)
        .ok_or_else(|| EnvelopeError::UnknownObjectType(ty_code.to_string()))?;
    let len = u32::from_be_bytes(take(4)?.try_into().unwrap()) as usize;
    let payload = take(len)?;
    if pos != bytes.len() {
        return Err(EnvelopeError::TrailingBytes(bytes.len() - pos));
    }
    let level = match backend {
        BackendId::Transparent => 0,
        BackendId::Curve => crate::algebra::CURVE_SECURITY_LEVEL,
    };
    let params = setup_group(level, backend, prime)?;
    let obj = Object::from_payload(&params, ty, payload)?;
    let params = match &obj {
        Object::Params(p) => p.clone(),
        _ => params,
    };
    Ok((params, obj))
}

/// Parses an envelope that must belong to `params`.
pub fn decode_with(params: &GroupParams, bytes: &[u8]) -> Result<Object, EnvelopeError> {
    let (found, obj) = decode(bytes)?;
    if found.backend_id() != params.backend_id()
        || found.transparent_prime() != params.transparent_prime()
    {
        return Err(EnvelopeError::ParamsMismatch);
    }
    Ok(obj)
}

/// JSON form of an envelope, as written by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeJson {
    pub version: u8,
    pub backend: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<u64>,
    pub object_type: String,
    pub payload: String,
}

impl EnvelopeJson {
    pub fn new(params: &GroupParams, obj: &Object) -> EnvelopeJson {
        EnvelopeJson {
            version: ENVELOPE_VERSION,
            backend: params.backend_id().to_string(),
            prime: params.transparent_prime(),
            object_type: obj.object_type().name().to_string(),
            payload: hex::encode(obj.payload()),
        }
    }

    pub fn to_envelope_bytes(&self) -> Result<Vec<u8>, EnvelopeError> {
        if self.version != ENVELOPE_VERSION {
            return Err(EnvelopeError::UnsupportedVersion(self.version));
        }
        let backend: BackendId = self
            .backend
            .parse()
            .map_err(EnvelopeError::Json)?;
        let ty = ObjectType::from_name(&self.object_type)
            .ok_or_else(|| EnvelopeError::UnknownObjectType(self.object_type.clone()))?;
        let payload = decode_hex(&self.payload)?;
        let mut out = vec![ENVELOPE_VERSION, backend.code()];
        match (backend, self.prime) {
            (BackendId::Transparent, Some(p)) => out.extend_from_slice(&p.to_be_bytes()),
            (BackendId::Transparent, None) => {
                return Err(EnvelopeError::Json("transparent envelope needs a prime".into()))
            }
            (BackendId::Curve, Some(_)) => {
                return Err(EnvelopeError::Json("curve envelope carries no prime".into()))
            }
            (BackendId::Curve, None) => {}
        }
        out.push(ty.code());
        out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
        out.extend_from_slice(&payload);
        Ok(out)
    }

    pub fn decode(&self) -> Result<(GroupParams, Object), EnvelopeError> {
        decode(&self.to_envelope_bytes()?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }

    pub fn from_json(text: &str) -> Result<EnvelopeJson, EnvelopeError> {
        serde_json::from_str(text).map_err(|e| EnvelopeError::Json(e.to_string()))
    }
}

/// Strict lowercase hex, the only form this crate ever writes.
pub fn decode_hex(s: &str) -> Result<Vec<u8>, EnvelopeError> {
    if s.bytes().any(|b| b.is_ascii_uppercase()) {
        return Err(EnvelopeError::MalformedField(
            "hex must be lowercase".into(),
        ));
    }
    hex::decode(s).map_err(|e| EnvelopeError::MalformedField(e.to_string()))
}

#[derive(Default)]
pub(crate) struct FieldWriter(pub(crate) Vec<u8>);

impl FieldWriter {
    pub(crate) fn field(&mut self, bytes: &[u8]) {
        self.0.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
        self.0.extend_from_slice(bytes);
    }
}

pub(crate) struct FieldReader<'a> {
    buf: &'a [u8],
}

impl<'a> FieldReader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        FieldReader { buf }
    }

    pub(crate) fn field(&mut self) -> Result<&'a [u8], EnvelopeError> {
        if self.buf.len() < 4 {
            return Err(EnvelopeError::Truncated);
        }
        let (len, rest) = self.buf.split_at(4);
        let len = u32::from_be_bytes(len.try_into().unwrap()) as usize;
        if rest.len() < len {
            return Err(EnvelopeError::Truncated);
        }
        let (field, rest) = rest.split_at(len);
        self.buf = rest;
        Ok(field)
    }

    fn fixed<const N: usize>(&mut self) -> Result<[u8; N], EnvelopeError> {
        let f = self.field()?;
        f.try_into().map_err(|_| {
            EnvelopeError::MalformedField(format!("expected {N} bytes, got {}", f.len()))
        })
    }

    pub(crate) fn u8(&mut self) -> Result<u8, EnvelopeError> {
        Ok(self.fixed::<1>()?[0])
    }

    pub(crate) fn u32(&mut self) -> Result<u32, EnvelopeError> {
        Ok(u32::from_be_bytes(self.fixed()?))
    }

    pub(crate) fn u64(&mut self) -> Result<u64, EnvelopeError> {
        Ok(u64::from_be_bytes(self.fixed()?))
    }

    fn scalar(&mut self, params: &GroupParams) -> Result<Scalar, EnvelopeError> {
        Ok(Scalar::from_bytes(params, self.field()?)?)
    }

    fn element<C: GroupKind>(&mut self, params: &GroupParams) -> Result<Element<C>, EnvelopeError> {
        Ok(Element::from_bytes(params, self.field()?)?)
    }

    pub(crate) fn finish(self) -> Result<(), EnvelopeError> {
        if self.buf.is_empty() {
            Ok(())
        } else {
            Err(EnvelopeError::TrailingBytes(self.buf.len()))
        }
    }
}
