use std::collections::BTreeMap;

use crate::algebra::{GroupParams, GtElem, Scalar};
use crate::envelope::{EnvelopeError, FieldReader, FieldWriter};
use crate::htpre::{self, ClientId, HtpreError, ReEncCiphertext};

/// Largest per-input exponent a descriptor may carry.
pub const MAX_EXPONENT: u32 = 1 << 16;

/// What the result means. The cloud computes the same thing in both cases;
/// only the reading differs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    /// `Π M_i^{e_i}` over target-group messages.
    Product,
    /// Inputs are integers `m_i` encoded as `z^{m_i}`; the product decrypts
    /// to `z^{Σ e_i·m_i}`.
    IntegerSumViaEncoding,
}

impl FunctionKind {
    fn code(self) -> u8 {
        match self {
            FunctionKind::Product => 0,
            FunctionKind::IntegerSumViaEncoding => 1,
        }
    }
}

/// The function the cloud evaluates: a product of selected inputs, each
/// raised to a small public exponent. This is everything a multiplicatively
/// homomorphic scheme can express.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDescriptor {
    pub kind: FunctionKind,
    pub inputs: Vec<(ClientId, u32)>,
}

impl FunctionDescriptor {
    pub fn product(participants: impl IntoIterator<Item = ClientId>) -> Self {
        FunctionDescriptor {
            kind: FunctionKind::Product,
            inputs: participants.into_iter().map(|c| (c, 1)).collect(),
        }
    }

    pub fn integer_sum(participants: impl IntoIterator<Item = ClientId>) -> Self {
        FunctionDescriptor {
            kind: FunctionKind::IntegerSumViaEncoding,
            inputs: participants.into_iter().map(|c| (c, 1)).collect(),
        }
    }

    pub fn with_exponent(mut self, client: ClientId, exponent: u32) -> Self {
        match self.inputs.iter_mut().find(|(c, _)| *c == client) {
            Some(entry) => entry.1 = exponent,
            None => self.inputs.push((client, exponent)),
        }
        self
    }

    pub fn participants(&self) -> impl Iterator<Item = ClientId> + '_ {
        self.inputs.iter().map(|(c, _)| *c)
    }

    /// Checks shape constraints: at least one input, no repeats, exponents
    /// within [`MAX_EXPONENT`].
    pub fn validate(&self) -> Result<(), String> {
        if self.inputs.is_empty() {
            return Err("function has no inputs".into());
        }
        for (n, (c, e)) in self.inputs.iter().enumerate() {
            if self.inputs[..n].iter().any(|(d, _)| d == c) {
                return Err(format!("{c} listed twice"));
            }
            if *e > MAX_EXPONENT {
                return Err(format!("exponent {e} for {c} exceeds {MAX_EXPONENT}"));
            }
        }
        Ok(())
    }

    /// Homomorphic evaluation over re-encrypted inputs.
    pub fn evaluate(
        &self,
        params: &GroupParams,
        inputs: &BTreeMap<ClientId, ReEncCiphertext>,
        missing: impl Fn(ClientId) -> HtpreError,
    ) -> Result<ReEncCiphertext, HtpreError> {
        let terms = self
            .inputs
            .iter()
            .map(|&(c, e)| {
                let ct = inputs.get(&c).ok_or_else(|| missing(c))?;
                if e == 1 {
                    Ok(*ct)
                } else {
                    htpre::homeval_pow(params, ct, u64::from(e))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        htpre::homeval_mul(params, &terms)
    }

    /// The same function applied to plaintexts; the reference the decrypted
    /// result must match.
    pub fn evaluate_plain(
        &self,
        params: &GroupParams,
        plaintexts: &BTreeMap<ClientId, GtElem>,
    ) -> Option<GtElem> {
        let mut acc = GtElem::identity(params);
        for &(c, e) in &self.inputs {
            let m = plaintexts.get(&c)?;
            acc = acc.mul(&m.exp(&Scalar::from_u64(params, u64::from(e))).ok()?).ok()?;
        }
        Some(acc)
    }

    pub(crate) fn write_fields(&self, w: &mut FieldWriter) {
        w.field(&[self.kind.code()]);
        w.field(&(self.inputs.len() as u32).to_be_bytes());
        for (c, e) in &self.inputs {
            w.field(&c.0.to_be_bytes());
            w.field(&e.to_be_bytes());
        }
    }

    pub(crate) fn read_fields(r: &mut FieldReader<'_>) -> Result<Self, EnvelopeError> {
        let kind = match r.u8()? {
            0 => FunctionKind::Product,
            1 => FunctionKind::IntegerSumViaEncoding,
            other => {
                return Err(EnvelopeError::MalformedField(format!(
                    "unsupported function kind {other}"
                )))
            }
        };
        let n = r.u32()? as usize;
        let mut inputs = Vec::with_capacity(n.min(1024));
        for _ in 0..n {
            inputs.push((ClientId(r.u32()?), r.u32()?));
        }
        let f = FunctionDescriptor { kind, inputs };
        f.validate().map_err(EnvelopeError::MalformedField)?;
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{setup_group, BackendId};

    #[test]
    fn validation() {
        assert!(FunctionDescriptor::product([ClientId(1)]).validate().is_ok());
        assert!(FunctionDescriptor::product([]).validate().is_err());
        assert!(FunctionDescriptor::product([ClientId(1), ClientId(1)])
            .validate()
            .is_err());
        assert!(FunctionDescriptor::product([ClientId(1)])
            .with_exponent(ClientId(1), MAX_EXPONENT + 1)
            .validate()
            .is_err());
    }

    #[test]
    fn plain_evaluation_with_exponents() {
        let params = setup_group(0, BackendId::Transparent, Some(101)).unwrap();
        let plain: BTreeMap<_, _> = [(ClientId(1), 2), (ClientId(2), 3)]
            .into_iter()
            .map(|(c, m)| (c, params.encode_integer(m)))
            .collect();
        let f = FunctionDescriptor::integer_sum([ClientId(1), ClientId(2)])
            .with_exponent(ClientId(2), 4);
        assert_eq!(f.evaluate_plain(&params, &plain), Some(params.encode_integer(14)));
        let g = FunctionDescriptor::product([ClientId(3)]);
        assert_eq!(g.evaluate_plain(&params, &plain), None);
    }
}
