//! Shamir sharing over `Z_p` and interpolation at zero, in the clear and in
//! the exponent.
//!
//! A sharing for `k` parties uses a polynomial of degree `k - 1`, so all `k`
//! shares are needed to recover the constant term and any `k - 1` of them
//! are independent of it.

use thiserror::Error;

use crate::algebra::{AlgebraError, GroupParams, GtElem, Scalar};
use rand::RngCore;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShamirError {
    #[error("invalid share count {k}: need 2 <= k < p")]
    InvalidShareCount { k: usize },
    #[error("share index {0} appears more than once")]
    DuplicateIndex(u64),
    #[error("share index 0 would reveal the secret")]
    ZeroIndex,
    #[error("share index {0} is not below the group order")]
    IndexOutOfRange(u64),
    #[error("{have} shares supplied, {need} required")]
    InsufficientShares { have: usize, need: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `s(x) = b_0 + b_1 x + … + b_{k-1} x^{k-1}` with `b_0` the secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharingPolynomial {
    coefficients: Vec<Scalar>,
}

impl SharingPolynomial {
    pub fn coefficients(&self) -> &[Scalar] {
        &self.coefficients
    }

    pub fn secret(&self) -> Scalar {
        self.coefficients[0]
    }

    /// Number of shares this polynomial is meant for.
    pub fn share_count(&self) -> usize {
        self.coefficients.len()
    }

    /// Horner evaluation at `x`.
    pub fn evaluate(&self, x: Scalar) -> Scalar {
        let mut acc = self.coefficients[self.coefficients.len() - 1];
        for &b in self.coefficients.iter().rev().skip(1) {
            acc = acc * x + b;
        }
        acc
    }
}

/// The point `(index, s(index))` held by one party.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecretShare {
    pub index: u64,
    pub value: Scalar,
}

/// Lagrange weights `λ_i` for interpolating at `x = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LagrangeCoefficients {
    entries: Vec<(u64, Scalar)>,
}

impl LagrangeCoefficients {
    pub fn get(&self, index: u64) -> Option<Scalar> {
        self.entries
            .iter()
            .find(|(i, _)| *i == index)
            .map(|(_, l)| *l)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, Scalar)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn check_share_count(params: &GroupParams, k: usize) -> Result<(), ShamirError> {
    let too_big = params.transparent_prime().is_some_and(|p| k as u64 >= p);
    if k < 2 || too_big {
        return Err(ShamirError::InvalidShareCount { k });
    }
    Ok(())
}

/// Shares `secret` among `k` parties at indices `1..=k`. The `k - 1` higher
/// coefficients are uniform over `Z_p`.
pub fn split<R: RngCore + ?Sized>(
    params: &GroupParams,
    secret: Scalar,
    k: usize,
    rng: &mut R,
) -> Result<(SharingPolynomial, Vec<SecretShare>), ShamirError> {
    check_share_count(params, k)?;
    let higher: Vec<Scalar> = (1..k).map(|_| Scalar::random(params, rng)).collect();
    split_with_coefficients(params, secret, &higher)
}

/// Deterministic variant of [`split`] with caller-chosen `b_1..b_{k-1}`.
pub fn split_with_coefficients(
    params: &GroupParams,
    secret: Scalar,
    higher: &[Scalar],
) -> Result<(SharingPolynomial, Vec<SecretShare>), ShamirError> {
    let k = higher.len() + 1;
    check_share_count(params, k)?;
    let mut coefficients = Vec::with_capacity(k);
    coefficients.push(secret);
    coefficients.extend_from_slice(higher);
    let poly = SharingPolynomial { coefficients };
    let shares = (1..=k as u64)
        .map(|index| SecretShare {
            index,
            value: poly.evaluate(Scalar::from_u64(params, index)),
        })
        .collect();
    Ok((poly, shares))
}

/// `λ_i = Π_{j ≠ i} j / (j - i)` over the given index set.
pub fn lagrange_at_zero(
    params: &GroupParams,
    indices: &[u64],
) -> Result<LagrangeCoefficients, ShamirError> {
    for (n, &i) in indices.iter().enumerate() {
        if i == 0 {
            return Err(ShamirError::ZeroIndex);
        }
        if params.transparent_prime().is_some_and(|p| i >= p) {
            return Err(ShamirError::IndexOutOfRange(i));
        }
        if indices[..n].contains(&i) {
            return Err(ShamirError::DuplicateIndex(i));
        }
    }
    let entries = indices
        .iter()
        .map(|&i| {
            let xi = Scalar::from_u64(params, i);
            let mut num = Scalar::one(params);
            let mut den = Scalar::one(params);
            for &j in indices.iter().filter(|&&j| j != i) {
                let xj = Scalar::from_u64(params, j);
                num = num * xj;
                den = den * (xj - xi);
            }
            Ok((i, num * den.inverse()?))
        })
        .collect::<Result<_, ShamirError>>()?;
    Ok(LagrangeCoefficients { entries })
}

/// Recovers `s(0)` from at least `threshold` shares.
pub fn reconstruct(
    params: &GroupParams,
    shares: &[SecretShare],
    threshold: usize,
) -> Result<Scalar, ShamirError> {
    if shares.len() < threshold {
        return Err(ShamirError::InsufficientShares {
            have: shares.len(),
            need: threshold,
        });
    }
    let indices: Vec<u64> = shares.iter().map(|s| s.index).collect();
    let lambdas = lagrange_at_zero(params, &indices)?;
    Ok(shares
        .iter()
        .zip(lambdas.iter())
        .fold(Scalar::zero(params), |acc, (share, (_, l))| {
            acc + share.value * l
        }))
}

/// Given `B^{s(i)}` for each index, returns `B^{s(0)} = Π (B^{s(i)})^{λ_i}`
/// without learning `B` or any `s(i)`.
pub fn reconstruct_in_exponent(
    params: &GroupParams,
    base_powers: &[(u64, GtElem)],
) -> Result<GtElem, ShamirError> {
    let indices: Vec<u64> = base_powers.iter().map(|(i, _)| *i).collect();
    let lambdas = lagrange_at_zero(params, &indices)?;
    let mut acc = GtElem::identity(params);
    for ((_, power), (_, l)) in base_powers.iter().zip(lambdas.iter()) {
        acc = acc.mul(&power.exp(&l)?)?;
    }
    Ok(acc)
}
