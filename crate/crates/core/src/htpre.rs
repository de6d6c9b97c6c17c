//! Homomorphic threshold proxy re-encryption.
//!
//! Group placement under the asymmetric pairing:
//!
//! | value                         | group |
//! |-------------------------------|-------|
//! | client key `pk_i = g1^α_i`    | G1    |
//! | first ciphertext half `C1`    | G1    |
//! | target key `spk = g2^α_0`     | G2    |
//! | re-encryption key `rk_i`      | G2    |
//! | messages, `C2`, `C'`, `w_i`   | Gt    |
//!
//! With `z = e(g1, g2)`:
//!
//! * `enc`: `C1 = pk_i^r`, `C2 = z^r · M`
//! * `proxyenc`: `C1' = e(C1, rk_i) = z^{r·α_0}`, `C2' = C2`
//! * `thdec`: each holder of `s(i)` publishes `w_i = C1'^{s(i)}`; since
//!   `s(0) = 1/α_0`, interpolating the `w_i` at zero yields `z^r`.

use std::fmt;

use rand::RngCore;
use thiserror::Error;

use crate::algebra::{
    self, pairing, AlgebraError, BackendId, G1Elem, G2Elem, GroupParams, GtElem, Scalar,
};
use crate::shamir::{self, SecretShare, ShamirError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HtpreError {
    #[error("ciphertext belongs to {ciphertext} but the re-encryption key to {key}")]
    OwnerMismatch { ciphertext: ClientId, key: ClientId },
    #[error("homomorphic evaluation needs at least one ciphertext")]
    EmptyInput,
    #[error("secret key must be nonzero")]
    ZeroSecret,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Shamir(#[from] ShamirError),
}

/// A client, numbered from 1. Client `i` receives the target-key share at
/// index `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClientId(pub u32);

impl fmt::Display for ClientId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "client {}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PublicKey {
    pub owner: ClientId,
    pub pk: G1Elem,
}

/// `(pk_i, sk_i) = (g1^α_i, α_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyPair {
    pub owner: ClientId,
    pub alpha: Scalar,
    pub pk: G1Elem,
}

impl KeyPair {
    pub fn from_secret(params: &GroupParams, owner: ClientId, alpha: Scalar) -> Result<KeyPair, HtpreError> {
        if alpha.is_zero() {
            return Err(HtpreError::ZeroSecret);
        }
        Ok(KeyPair {
            owner,
            alpha,
            pk: params.g1_pow(&alpha)?,
        })
    }

    pub fn public(&self) -> PublicKey {
        PublicKey {
            owner: self.owner,
            pk: self.pk,
        }
    }
}

/// The dealer's target key: `spk = g2^α_0` and a `k`-of-`k` sharing of
/// `1/α_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetKeyMaterial {
    pub alpha0: Scalar,
    pub spk: G2Elem,
    pub shares: Vec<SecretShare>,
}

impl TargetKeyMaterial {
    pub fn k(&self) -> usize {
        self.shares.len()
    }

    pub fn share(&self, index: u64) -> Option<SecretShare> {
        self.shares.iter().find(|s| s.index == index).copied()
    }
}

/// `rk_i = spk^{1/α_i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReEncryptionKey {
    pub owner: ClientId,
    pub rk: G2Elem,
}

/// Ciphertext under a client key: `(pk^r, z^r · M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ciphertext {
    pub owner: ClientId,
    pub c1: G1Elem,
    pub c2: GtElem,
}

/// Ciphertext under the target key: `(z^{r·α_0}, z^r · M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReEncCiphertext {
    pub c1: GtElem,
    pub c2: GtElem,
}

/// `w_i = C1'^{s(i)}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartialDecryption {
    pub index: u64,
    pub w: GtElem,
}

pub fn setup(
    security_level: u32,
    backend: BackendId,
    transparent_prime: Option<u64>,
) -> Result<GroupParams, HtpreError> {
    Ok(algebra::setup_group(security_level, backend, transparent_prime)?)
}

pub fn keygen<R: RngCore + ?Sized>(params: &GroupParams, owner: ClientId, rng: &mut R) -> KeyPair {
    let alpha = Scalar::random_nonzero(params, rng);
    KeyPair::from_secret(params, owner, alpha).expect("sampled secret is nonzero")
}

pub fn thkeygen<R: RngCore + ?Sized>(
    params: &GroupParams,
    k: usize,
    rng: &mut R,
) -> Result<TargetKeyMaterial, HtpreError> {
    let alpha0 = Scalar::random_nonzero(params, rng);
    let secret = alpha0.inverse()?;
    let (_, shares) = shamir::split(params, secret, k, rng)?;
    Ok(TargetKeyMaterial {
        alpha0,
        spk: params.g2_pow(&alpha0)?,
        shares,
    })
}

/// [`thkeygen`] with a chosen `α_0` and sharing coefficients `b_1..b_{k-1}`.
pub fn thkeygen_with(
    params: &GroupParams,
    alpha0: Scalar,
    higher: &[Scalar],
) -> Result<TargetKeyMaterial, HtpreError> {
    let secret = alpha0.inverse()?;
    let (_, shares) = shamir::split_with_coefficients(params, secret, higher)?;
    Ok(TargetKeyMaterial {
        alpha0,
        spk: params.g2_pow(&alpha0)?,
        shares,
    })
}

pub fn proxykeygen(
    _params: &GroupParams,
    kp: &KeyPair,
    spk: &G2Elem,
) -> Result<ReEncryptionKey, HtpreError> {
    Ok(ReEncryptionKey {
        owner: kp.owner,
        rk: spk.exp(&kp.alpha.inverse()?)?,
    })
}

/// Checks `e(pk_i, rk_i) = e(g1, spk)`, which holds for every honestly
/// generated re-encryption key. Needs public values only.
pub fn rekey_is_consistent(
    params: &GroupParams,
    pk: &PublicKey,
    rk: &ReEncryptionKey,
    spk: &G2Elem,
) -> Result<bool, HtpreError> {
    Ok(pk.owner == rk.owner && pairing(&pk.pk, &rk.rk)? == pairing(&params.g1, spk)?)
}

pub fn enc<R: RngCore + ?Sized>(
    params: &GroupParams,
    m: &GtElem,
    pk: &PublicKey,
    rng: &mut R,
) -> Result<Ciphertext, HtpreError> {
    let r = Scalar::random_nonzero(params, rng);
    enc_with_randomness(params, m, pk, &r)
}

pub fn enc_with_randomness(
    params: &GroupParams,
    m: &GtElem,
    pk: &PublicKey,
    r: &Scalar,
) -> Result<Ciphertext, HtpreError> {
    Ok(Ciphertext {
        owner: pk.owner,
        c1: pk.pk.exp(r)?,
        c2: params.z_pow(r)?.mul(m)?,
    })
}

/// `M = C2 / e(C1, g2^{1/α_i})`. The decryptor derives `g2^{1/α_i}` from its
/// own secret.
///
/// Decrypting with the wrong key returns an unrelated group element; the
/// scheme carries no integrity check.
pub fn dec(params: &GroupParams, ct: &Ciphertext, kp: &KeyPair) -> Result<GtElem, HtpreError> {
    let unblind = params.g2_pow(&kp.alpha.inverse()?)?;
    Ok(ct.c2.div(&pairing(&ct.c1, &unblind)?)?)
}

pub fn proxyenc(
    _params: &GroupParams,
    ct: &Ciphertext,
    rk: &ReEncryptionKey,
) -> Result<ReEncCiphertext, HtpreError> {
    if ct.owner != rk.owner {
        return Err(HtpreError::OwnerMismatch {
            ciphertext: ct.owner,
            key: rk.owner,
        });
    }
    Ok(ReEncCiphertext {
        c1: pairing(&ct.c1, &rk.rk)?,
        c2: ct.c2,
    })
}

/// Componentwise product; decrypts to the product of the plaintexts.
pub fn homeval_mul(
    _params: &GroupParams,
    cts: &[ReEncCiphertext],
) -> Result<ReEncCiphertext, HtpreError> {
    let (first, rest) = cts.split_first().ok_or(HtpreError::EmptyInput)?;
    rest.iter().try_fold(*first, |acc, ct| {
        Ok(ReEncCiphertext {
            c1: acc.c1.mul(&ct.c1)?,
            c2: acc.c2.mul(&ct.c2)?,
        })
    })
}

/// `ct` multiplied with itself `e` times; decrypts to `M^e`.
pub fn homeval_pow(
    params: &GroupParams,
    ct: &ReEncCiphertext,
    e: u64,
) -> Result<ReEncCiphertext, HtpreError> {
    let e = Scalar::from_u64(params, e);
    Ok(ReEncCiphertext {
        c1: ct.c1.exp(&e)?,
        c2: ct.c2.exp(&e)?,
    })
}

pub fn thdec_share(
    _params: &GroupParams,
    ct: &ReEncCiphertext,
    share: &SecretShare,
) -> Result<PartialDecryption, HtpreError> {
    Ok(PartialDecryption {
        index: share.index,
        w: ct.c1.exp(&share.value)?,
    })
}

/// `M = C2' / Π w_i^{λ_i}`. Any holder of all `k` partials can run it.
pub fn thdec_combine(
    params: &GroupParams,
    ct: &ReEncCiphertext,
    partials: &[PartialDecryption],
    k: usize,
) -> Result<GtElem, HtpreError> {
    if partials.len() < k {
        return Err(ShamirError::InsufficientShares {
            have: partials.len(),
            need: k,
        }
        .into());
    }
    let powers: Vec<(u64, GtElem)> = partials.iter().map(|p| (p.index, p.w)).collect();
    let blind = shamir::reconstruct_in_exponent(params, &powers)?;
    Ok(ct.c2.div(&blind)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn p11() -> GroupParams {
        setup(0, BackendId::Transparent, Some(11)).unwrap()
    }

    fn s(params: &GroupParams, v: u64) -> Scalar {
        Scalar::from_u64(params, v)
    }

    #[test]
    fn keygen_forced_and_seeded() {
        let params = p11();
        let kp = KeyPair::from_secret(&params, ClientId(1), s(&params, 3)).unwrap();
        assert_eq!(kp.pk.dlog(), Some(3));
        assert_eq!(
            KeyPair::from_secret(&params, ClientId(1), s(&params, 0)),
            Err(HtpreError::ZeroSecret)
        );

        let a = keygen(&params, ClientId(1), &mut seeded(5));
        let b = keygen(&params, ClientId(1), &mut seeded(5));
        assert_eq!(a, b);
        let curve = setup(128, BackendId::Curve, None).unwrap();
        let a = keygen(&curve, ClientId(1), &mut seeded(5));
        let b = keygen(&curve, ClientId(1), &mut seeded(6));
        assert_ne!(a.alpha, b.alpha);
    }

    #[test]
    fn thkeygen_forced() {
        let params = p11();
        let t = thkeygen_with(&params, s(&params, 4), &[s(&params, 5)]).unwrap();
        assert_eq!(t.spk.dlog(), Some(4));
        let shares: Vec<_> = t.shares.iter().map(|sh| (sh.index, sh.value.to_u64().unwrap())).collect();
        assert_eq!(shares, vec![(1, 8), (2, 2)]);
        assert_eq!(
            shamir::reconstruct(&params, &t.shares, 2).unwrap(),
            s(&params, 3)
        );
        assert!(matches!(
            thkeygen(&params, 1, &mut seeded(0)),
            Err(HtpreError::Shamir(ShamirError::InvalidShareCount { k: 1 }))
        ));
    }

    #[test]
    fn proxykeygen_examples() {
        let params = p11();
        let kp = KeyPair::from_secret(&params, ClientId(1), s(&params, 3)).unwrap();
        let spk = params.g2_pow(&s(&params, 4)).unwrap();
        let rk = proxykeygen(&params, &kp, &spk).unwrap();
        assert_eq!(rk.rk.dlog(), Some(5));
        assert_eq!(pairing(&kp.pk, &rk.rk).unwrap().dlog(), Some(4));
        assert!(rekey_is_consistent(&params, &kp.public(), &rk, &spk).unwrap());

        let unit = KeyPair::from_secret(&params, ClientId(2), Scalar::one(&params)).unwrap();
        assert_eq!(proxykeygen(&params, &unit, &spk).unwrap().rk, spk);
    }

    #[test]
    fn enc_dec_trace() {
        let params = p11();
        let kp = KeyPair::from_secret(&params, ClientId(1), s(&params, 3)).unwrap();
        let m = params.encode_integer(7);
        let ct = enc_with_randomness(&params, &m, &kp.public(), &s(&params, 2)).unwrap();
        assert_eq!((ct.c1.dlog(), ct.c2.dlog()), (Some(6), Some(9)));
        assert_eq!(dec(&params, &ct, &kp).unwrap(), m);

        let id = GtElem::identity(&params);
        let ct = enc_with_randomness(&params, &id, &kp.public(), &s(&params, 2)).unwrap();
        assert_eq!(ct.c2, params.encode_integer(2));
    }

    #[test]
    fn encryption_is_randomized() {
        let params = setup(0, BackendId::Transparent, Some(1_000_003)).unwrap();
        let mut rng = seeded(1);
        let kp = keygen(&params, ClientId(1), &mut rng);
        let m = params.encode_integer(7);
        let a = enc(&params, &m, &kp.public(), &mut rng).unwrap();
        let b = enc(&params, &m, &kp.public(), &mut rng).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn wrong_key_gives_garbage_not_error() {
        let params = setup(0, BackendId::Transparent, Some(1_000_003)).unwrap();
        let mut rng = seeded(2);
        let alice = keygen(&params, ClientId(1), &mut rng);
        let bob = keygen(&params, ClientId(2), &mut rng);
        let m = params.encode_integer(7);
        let ct = enc(&params, &m, &alice.public(), &mut rng).unwrap();
        assert_ne!(dec(&params, &ct, &bob).unwrap(), m);
    }

    #[test]
    fn proxyenc_trace_and_guard() {
        let params = p11();
        let kp = KeyPair::from_secret(&params, ClientId(1), s(&params, 3)).unwrap();
        let spk = params.g2_pow(&s(&params, 4)).unwrap();
        let rk = proxykeygen(&params, &kp, &spk).unwrap();
        let ct = enc_with_randomness(&params, &params.encode_integer(7), &kp.public(), &s(&params, 2)).unwrap();
        let re = proxyenc(&params, &ct, &rk).unwrap();
        assert_eq!(re.c1.dlog(), Some(8));
        assert_eq!(re.c2.to_bytes(), ct.c2.to_bytes());

        let other = KeyPair::from_secret(&params, ClientId(2), s(&params, 5)).unwrap();
        let rk2 = proxykeygen(&params, &other, &spk).unwrap();
        assert_eq!(
            proxyenc(&params, &ct, &rk2),
            Err(HtpreError::OwnerMismatch {
                ciphertext: ClientId(1),
                key: ClientId(2)
            })
        );
    }

    #[test]
    fn thdec_trace() {
        let params = p11();
        let t = thkeygen_with(&params, s(&params, 4), &[s(&params, 5)]).unwrap();
        let re = ReEncCiphertext {
            c1: params.encode_integer(8),
            c2: params.encode_integer(9),
        };
        let w: Vec<_> = t.shares.iter().map(|sh| thdec_share(&params, &re, sh).unwrap()).collect();
        assert_eq!(w[0].index, 1);
        assert_eq!((w[0].w.dlog(), w[1].w.dlog()), (Some(9), Some(5)));
        assert_eq!(thdec_combine(&params, &re, &w, 2).unwrap(), params.encode_integer(7));
        assert!(matches!(
            thdec_combine(&params, &re, &w[..1], 2),
            Err(HtpreError::Shamir(ShamirError::InsufficientShares { have: 1, need: 2 }))
        ));
        let zero_share = SecretShare {
            index: 3,
            value: Scalar::zero(&params),
        };
        assert!(thdec_share(&params, &re, &zero_share).unwrap().w.is_identity());
    }

    #[test]
    fn homeval_trace() {
        let params = p11();
        let a = ReEncCiphertext {
            c1: params.encode_integer(8),
            c2: params.encode_integer(9),
        };
        let b = ReEncCiphertext {
            c1: params.encode_integer(1),
            c2: params.encode_integer(5),
        };
        let prod = homeval_mul(&params, &[a, b]).unwrap();
        assert_eq!((prod.c1.dlog(), prod.c2.dlog()), (Some(9), Some(3)));
        assert_eq!(homeval_mul(&params, &[a]).unwrap(), a);
        assert_eq!(homeval_mul(&params, &[]), Err(HtpreError::EmptyInput));

        let t = thkeygen_with(&params, s(&params, 4), &[s(&params, 5)]).unwrap();
        let w: Vec<_> = t.shares.iter().map(|sh| thdec_share(&params, &prod, sh).unwrap()).collect();
        assert_eq!(thdec_combine(&params, &prod, &w, 2).unwrap(), params.encode_integer(9));

        assert_eq!(homeval_pow(&params, &a, 3).unwrap(), homeval_mul(&params, &[a, a, a]).unwrap());
    }
}
