use std::collections::HashMap;

use super::{AlgebraError, GroupParams, GtElem, Scalar};

/// Largest bound accepted by [`bounded_dlog`]; keeps the baby-step table
/// around a million entries.
pub const MAX_DLOG_BOUND: u64 = 1 << 40;

/// Finds the smallest `m ∈ [0, bound]` with `z^m = target` by baby-step
/// giant-step, in about `2·√bound` group operations.
pub fn bounded_dlog(params: &GroupParams, target: &GtElem, bound: u64) -> Result<u64, AlgebraError> {
    if bound == 0 || bound > MAX_DLOG_BOUND {
        return Err(AlgebraError::InvalidBound(bound));
    }
    if target.domain() != params.domain {
        return Err(AlgebraError::ParamsMismatch);
    }
    let span = bound + 1;
    let m = span.isqrt() + u64::from(span.isqrt().pow(2) < span);

    let mut baby = HashMap::with_capacity(m as usize);
    let mut cur = GtElem::identity(params);
    for j in 0..m {
        // first (smallest) exponent wins when the group order is below m
        baby.entry(cur.to_bytes()).or_insert(j);
        cur = cur.mul(&params.z)?;
    }

    let giant = params.z.exp(&Scalar::from_u64(params, m))?.inverse();
    let mut gamma = *target;
    for i in 0..m {
        if let Some(&j) = baby.get(&gamma.to_bytes()) {
            let x = i * m + j;
            return if x <= bound {
                Ok(x)
            } else {
                Err(AlgebraError::NotFound { bound })
            };
        }
        gamma = gamma.mul(&giant)?;
    }
    Err(AlgebraError::NotFound { bound })
}
