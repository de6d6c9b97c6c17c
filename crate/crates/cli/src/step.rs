//! One scheme algorithm per invocation, reading and writing envelope files.
//!
//! Inputs are matched to parameters by object type, not by position, and
//! must all carry the same group parameters.

use std::fs;
use std::path::{Path, PathBuf};

use mcc_core::algebra::{bounded_dlog, BackendId, GroupParams, Scalar};
use mcc_core::envelope::{EnvelopeJson, Object, ObjectType};
use mcc_core::htpre::{self, ClientId, PartialDecryption};
use mcc_core::rng::{self, DeterministicRng};
use mcc_core::shamir::SecretShare;
use rand::Rng;

use crate::CliError;

pub fn read_envelope(path: &Path) -> Result<(GroupParams, Object), CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let env = EnvelopeJson::from_json(&text)?;
    Ok(env.decode()?)
}

pub fn write_envelope(path: &Path, params: &GroupParams, obj: &Object) -> Result<(), CliError> {
    let mut text = EnvelopeJson::new(params, obj).to_json();
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Decoded `--in` files sharing one set of group parameters.
pub struct StepInputs {
    pub params: GroupParams,
    objects: Vec<(PathBuf, Object)>,
}

impl StepInputs {
    pub fn load(paths: &[PathBuf]) -> Result<StepInputs, CliError> {
        let mut params: Option<GroupParams> = None;
        let mut objects = Vec::with_capacity(paths.len());
        for path in paths {
            let (p, obj) = read_envelope(path)?;
            match &params {
                None => params = Some(p),
                Some(q) if q.backend_id() == p.backend_id()
                    && q.transparent_prime() == p.transparent_prime() => {}
                Some(_) => {
                    return Err(CliError::Usage(format!(
                        "{} uses different group parameters than the other inputs",
                        path.display()
                    )))
                }
            }
            objects.push((path.clone(), obj));
        }
        let params = params.ok_or_else(|| CliError::Usage("no --in files given".into()))?;
        Ok(StepInputs { params, objects })
    }

    fn all(&self, ty: ObjectType) -> impl Iterator<Item = &Object> {
        self.objects
            .iter()
            .map(|(_, o)| o)
            .filter(move |o| o.object_type() == ty)
    }

    fn one(&self, ty: ObjectType) -> Result<&Object, CliError> {
        let mut it = self.all(ty);
        match (it.next(), it.next()) {
            (Some(o), None) => Ok(o),
            (None, _) => Err(CliError::Usage(format!("expected a {} input", ty.name()))),
            (Some(_), Some(_)) => Err(CliError::Usage(format!(
                "expected exactly one {} input",
                ty.name()
            ))),
        }
    }

    /// Fails on inputs of any type outside `allowed`.
    fn only(&self, allowed: &[ObjectType]) -> Result<(), CliError> {
        match self
            .objects
            .iter()
            .find(|(_, o)| !allowed.contains(&o.object_type()))
        {
            Some((path, o)) => Err(CliError::Usage(format!(
                "{}: unexpected {} input",
                path.display(),
                o.object_type().name()
            ))),
            None => Ok(()),
        }
    }
}

macro_rules! take {
    ($inputs:expr, $variant:ident) => {
        match $inputs.one(ObjectType::$variant)? {
            Object::$variant(v) => v.clone(),
            _ => unreachable!("object type matches variant"),
        }
    };
}

macro_rules! take_all {
    ($inputs:expr, $variant:ident) => {
        $inputs
            .all(ObjectType::$variant)
            .map(|o| match o {
                Object::$variant(v) => v.clone(),
                _ => unreachable!("object type matches variant"),
            })
            .collect::<Vec<_>>()
    };
}

fn seed_or_random(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| rand::thread_rng().gen())
}

/// The RNG client `owner` uses in a protocol run with `seed`.
fn client_rng(seed: u64, owner: ClientId) -> DeterministicRng {
    rng::stream(seed, u64::from(owner.0))
}

pub fn setup(backend: BackendId, prime: Option<u64>, level: u32) -> Result<(GroupParams, Object), CliError> {
    let params = htpre::setup(level, backend, prime)?;
    Ok((params.clone(), Object::Params(params)))
}

/// Same key client `owner` derives in a protocol run with `seed`.
pub fn keygen(inputs: &StepInputs, owner: u32, seed: Option<u64>) -> Result<Object, CliError> {
    inputs.only(&[ObjectType::Params])?;
    let owner = owner_id(owner)?;
    let mut rng = client_rng(seed_or_random(seed), owner);
    Ok(Object::KeyPair(htpre::keygen(&inputs.params, owner, &mut rng)))
}

/// Same target key the dealer derives in a protocol run with `seed`.
pub fn thkeygen(inputs: &StepInputs, k: usize, seed: Option<u64>) -> Result<Object, CliError> {
    inputs.only(&[ObjectType::Params])?;
    let mut rng = rng::stream(seed_or_random(seed), 0);
    Ok(Object::TargetKey(htpre::thkeygen(&inputs.params, k, &mut rng)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Part {
    /// Public key of a key pair.
    PublicKey,
    /// Target public key of the dealer's key material.
    Spk,
    /// One share of the dealer's key material; needs `--index`.
    Share,
}

pub fn extract(inputs: &StepInputs, part: Part, index: Option<u64>) -> Result<Object, CliError> {
    match part {
        Part::PublicKey => {
            inputs.only(&[ObjectType::KeyPair])?;
            Ok(Object::PublicKey(take!(inputs, KeyPair).public()))
        }
        Part::Spk => {
            inputs.only(&[ObjectType::TargetKey])?;
            Ok(Object::TargetPublicKey(take!(inputs, TargetKey).spk))
        }
        Part::Share => {
            inputs.only(&[ObjectType::TargetKey])?;
            let index = index.ok_or_else(|| CliError::Usage("--index is required".into()))?;
            let t = take!(inputs, TargetKey);
            let share = t
                .share(index)
                .ok_or_else(|| CliError::Usage(format!("no share with index {index}")))?;
            Ok(Object::Share(share))
        }
    }
}

pub fn proxykeygen(inputs: &StepInputs) -> Result<Object, CliError> {
    inputs.only(&[ObjectType::KeyPair, ObjectType::TargetPublicKey])?;
    let kp = take!(inputs, KeyPair);
    let spk = take!(inputs, TargetPublicKey);
    Ok(Object::ReEncryptionKey(htpre::proxykeygen(&inputs.params, &kp, &spk)?))
}

pub fn encode(inputs: &StepInputs, value: u64) -> Result<Object, CliError> {
    inputs.only(&[ObjectType::Params])?;
    Ok(Object::Message(inputs.params.encode_integer(value)))
}

pub fn decode(inputs: &StepInputs, bound: u64) -> Result<u64, CliError> {
    inputs.only(&[ObjectType::Message])?;
    let m = take!(inputs, Message);
    Ok(bounded_dlog(&inputs.params, &m, bound)?)
}

/// With a seed, reproduces the ciphertext client `owner` uploads in a
/// protocol run with that seed.
pub fn enc(inputs: &StepInputs, seed: Option<u64>) -> Result<Object, CliError> {
    inputs.only(&[ObjectType::PublicKey, ObjectType::Message])?;
    let pk = take!(inputs, PublicKey);
    let m = take!(inputs, Message);
    let mut rng = client_rng(seed_or_random(seed), pk.owner);
    // the client draws its secret key from the same stream first
    let _ = Scalar::random_nonzero(&inputs.params, &mut rng);
    Ok(Object::Ciphertext(htpre::enc(&inputs.params, &m, &pk, &mut rng)?))
}

pub fn dec(inputs: &StepInputs) -> Result<Object, CliError> {
    inputs.only(&[ObjectType::KeyPair, ObjectType::Ciphertext])?;
    let kp = take!(inputs, KeyPair);
    let ct = take!(inputs, Ciphertext);
    if kp.owner != ct.owner {
        return Err(CliError::Usage(format!(
            "ciphertext belongs to {} but the key to {}",
            ct.owner, kp.owner
        )));
    }
    Ok(Object::Message(htpre::dec(&inputs.params, &ct, &kp)?))
}

pub fn proxyenc(inputs: &StepInputs) -> Result<Object, CliError> {
    inputs.only(&[ObjectType::Ciphertext, ObjectType::ReEncryptionKey])?;
    let ct = take!(inputs, Ciphertext);
    let rk = take!(inputs, ReEncryptionKey);
    Ok(Object::ReEncCiphertext(htpre::proxyenc(&inputs.params, &ct, &rk)?))
}

pub fn homeval(inputs: &StepInputs) -> Result<Object, CliError> {
    inputs.only(&[ObjectType::ReEncCiphertext])?;
    let cts = take_all!(inputs, ReEncCiphertext);
    Ok(Object::ReEncCiphertext(htpre::homeval_mul(&inputs.params, &cts)?))
}

pub fn thdec_share(inputs: &StepInputs) -> Result<Object, CliError> {
    inputs.only(&[ObjectType::ReEncCiphertext, ObjectType::Share])?;
    let ct = take!(inputs, ReEncCiphertext);
    let share = take!(inputs, Share);
    Ok(Object::PartialDecryption(htpre::thdec_share(&inputs.params, &ct, &share)?))
}

/// `k` defaults to the number of partials given.
pub fn thdec_combine(inputs: &StepInputs, k: Option<usize>) -> Result<Object, CliError> {
    inputs.only(&[ObjectType::ReEncCiphertext, ObjectType::PartialDecryption])?;
    let ct = take!(inputs, ReEncCiphertext);
    let partials: Vec<PartialDecryption> = take_all!(inputs, PartialDecryption);
    let k = k.unwrap_or(partials.len());
    Ok(Object::Message(htpre::thdec_combine(&inputs.params, &ct, &partials, k)?))
}

/// Share and combine in one go, from all `k` shares.
pub fn thdec(inputs: &StepInputs) -> Result<Object, CliError> {
    inputs.only(&[ObjectType::ReEncCiphertext, ObjectType::Share])?;
    let ct = take!(inputs, ReEncCiphertext);
    let shares: Vec<SecretShare> = take_all!(inputs, Share);
    let partials = shares
        .iter()
        .map(|s| htpre::thdec_share(&inputs.params, &ct, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Object::Message(htpre::thdec_combine(
        &inputs.params,
        &ct,
        &partials,
        partials.len(),
    )?))
}

fn owner_id(owner: u32) -> Result<ClientId, CliError> {
    if owner == 0 {
        return Err(CliError::Usage("client ids start at 1".into()));
    }
    Ok(ClientId(owner))
}
