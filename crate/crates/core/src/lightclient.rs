//! Proof-of-work header tracking and bridge-state attestations.
//!
//! A header's `state_commitment` binds the source contract's full root list
//! and its locally exposed nullifier list at mining time:
//! `H(enc(list_digest(roots)) || enc(list_digest(nullifiers)))`.

use serde::{Deserialize, Serialize};

use crate::field::{encode_all, hash_bytes, FieldElement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockHeader {
    pub height: u64,
    pub prev_hash: FieldElement,
    pub state_commitment: FieldElement,
    pub nonce: u64,
    pub work_target: FieldElement,
}

impl BlockHeader {
    pub const ENCODED_LEN: usize = 40;

    /// Canonical serialization: height, prev_hash, state_commitment, nonce, work_target.
    pub fn to_bytes(&self) -> [u8; 40] {
        let mut out = [0u8; 40];
        out[..32].copy_from_slice(&self.pow_preimage());
        out[32..].copy_from_slice(&self.work_target.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != Self::ENCODED_LEN {
            return None;
        }
        let u = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let f = |o: usize| FieldElement::from_bytes(&bytes[o..o + 8]).ok();
        Some(Self {
            height: u(0),
            prev_hash: f(8)?,
            state_commitment: f(16)?,
            nonce: u(24),
            work_target: f(32)?,
        })
    }

    fn pow_preimage(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        out[..8].copy_from_slice(&self.height.to_le_bytes());
        out[8..16].copy_from_slice(&self.prev_hash.to_bytes());
        out[16..24].copy_from_slice(&self.state_commitment.to_bytes());
        out[24..].copy_from_slice(&self.nonce.to_le_bytes());
        out
    }

    pub fn digest(&self) -> FieldElement {
        header_digest(self)
    }

    pub fn meets_target(&self) -> bool {
        self.digest() < self.work_target
    }
}

/// `hash_bytes(height || prev_hash || state_commitment || nonce)`
pub fn header_digest(header: &BlockHeader) -> FieldElement {
    hash_bytes(&header.pow_preimage())
}

/// Searches nonces from zero until the digest falls below `work_target`.
pub fn mine_header(
    height: u64,
    prev_hash: FieldElement,
    state_commitment: FieldElement,
    work_target: FieldElement,
) -> BlockHeader {
    let mut header = BlockHeader { height, prev_hash, state_commitment, nonce: 0, work_target };
    while !header.meets_target() {
        header.nonce += 1;
    }
    header
}

/// `hash_bytes(u64_le(len) || items)`
pub fn list_digest(items: &[FieldElement]) -> FieldElement {
    let mut bytes = (items.len() as u64).to_le_bytes().to_vec();
    bytes.extend(encode_all(items));
    hash_bytes(&bytes)
}

pub fn commit_state(roots: &[FieldElement], nullifiers: &[FieldElement]) -> FieldElement {
    commit_digests(list_digest(roots), list_digest(nullifiers))
}

fn commit_digests(roots_digest: FieldElement, nullifiers_digest: FieldElement) -> FieldElement {
    hash_bytes(&encode_all(&[roots_digest, nullifiers_digest]))
}

/// Count-prefixed canonical encoding.
pub fn encode_list(items: &[FieldElement]) -> Vec<u8> {
    let mut out = (items.len() as u32).to_le_bytes().to_vec();
    out.extend(encode_all(items));
    out
}

/// Inverse of [`encode_list`]; returns the list and the bytes consumed.
pub fn decode_list(bytes: &[u8]) -> Option<(Vec<FieldElement>, usize)> {
    let count = u32::from_le_bytes(bytes.get(..4)?.try_into().ok()?) as usize;
    let body = bytes.get(4..4 + count.checked_mul(8)?)?;
    let items = body.chunks(8).map(FieldElement::from_bytes).collect::<Result<Vec<_>, _>>().ok()?;
    Some((items, 4 + 8 * count))
}

/// Full lists committed by a header, with their digests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateOpening {
    pub roots: Vec<FieldElement>,
    pub nullifiers: Vec<FieldElement>,
    pub roots_digest: FieldElement,
    pub nullifiers_digest: FieldElement,
}

impl StateOpening {
    pub fn new(roots: Vec<FieldElement>, nullifiers: Vec<FieldElement>) -> Self {
        let roots_digest = list_digest(&roots);
        let nullifiers_digest = list_digest(&nullifiers);
        Self { roots, nullifiers, roots_digest, nullifiers_digest }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateAttestation {
    /// Height of the header whose commitment the opening targets.
    pub header_index: usize,
    pub new_roots: Vec<FieldElement>,
    pub new_nullifiers: Vec<FieldElement>,
    pub opening: StateOpening,
}

impl StateAttestation {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = (self.header_index as u64).to_le_bytes().to_vec();
        out.extend(encode_list(&self.new_roots));
        out.extend(encode_list(&self.new_nullifiers));
        out.extend(encode_list(&self.opening.roots));
        out.extend(encode_list(&self.opening.nullifiers));
        out.extend(encode_all(&[self.opening.roots_digest, self.opening.nullifiers_digest]));
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let header_index = u64::from_le_bytes(bytes.get(..8)?.try_into().ok()?) as usize;
        let mut at = 8;
        let mut next = || {
            let (list, used) = decode_list(bytes.get(at..)?)?;
            at += used;
            Some(list)
        };
        let new_roots = next()?;
        let new_nullifiers = next()?;
        let roots = next()?;
        let nullifiers = next()?;
        let tail = bytes.get(at..)?;
        if tail.len() != 16 {
            return None;
        }
        Some(Self {
            header_index,
            new_roots,
            new_nullifiers,
            opening: StateOpening {
                roots,
                nullifiers,
                roots_digest: FieldElement::from_bytes(&tail[..8]).ok()?,
                nullifiers_digest: FieldElement::from_bytes(&tail[8..]).ok()?,
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum HeaderRejection {
    #[error("digest does not meet the work target")]
    BadProofOfWork,
    #[error("work target differs from the tracked chain's fixed target")]
    WrongTarget,
    #[error("prev_hash does not link to the tracked tip")]
    BrokenLink,
    #[error("height is not tip + 1")]
    NonMonotonicHeight,
    #[error("conflicts with an accepted header at the same height")]
    Fork,
}

impl HeaderRejection {
    pub fn code(&self) -> &'static str {
        match self {
            Self::BadProofOfWork => "bad_pow",
            Self::WrongTarget => "wrong_target",
            Self::BrokenLink => "broken_link",
            Self::NonMonotonicHeight => "non_monotonic_height",
            Self::Fork => "fork",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeaderAdmission {
    Accepted,
    /// Identical to an accepted header; relayers overlap.
    AlreadyKnown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AttestationRejection {
    #[error("header index {0} is not an accepted header")]
    UnknownHeader(usize),
    #[error("opening digests do not match the opened lists")]
    BadDigest,
    #[error("opening does not match the header's state commitment")]
    CommitmentMismatch,
    #[error("new entries are not a suffix of the opened lists")]
    NotASuffix,
}

impl AttestationRejection {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownHeader(_) => "unknown_header",
            Self::BadDigest => "bad_digest",
            Self::CommitmentMismatch => "commitment_mismatch",
            Self::NotASuffix => "not_a_suffix",
        }
    }
}

/// The remote chain as seen by one contract. Forks are rejected outright.
#[derive(Debug, Clone)]
pub struct LightClient {
    work_target: FieldElement,
    headers: Vec<BlockHeader>,
    digests: Vec<FieldElement>,
}

impl LightClient {
    /// Trusts `genesis` and fixes the work target for every later header.
    pub fn new(genesis: BlockHeader) -> Self {
        Self { work_target: genesis.work_target, digests: vec![genesis.digest()], headers: vec![genesis] }
    }

    pub fn headers(&self) -> &[BlockHeader] {
        &self.headers
    }

    pub fn tip(&self) -> &BlockHeader {
        self.headers.last().expect("genesis present")
    }

    pub fn work_target(&self) -> FieldElement {
        self.work_target
    }

    pub fn add_header(&mut self, header: BlockHeader) -> Result<HeaderAdmission, HeaderRejection> {
        let digest = header.digest();
        let tip_height = self.tip().height;
        if header.height <= tip_height {
            let known = self.headers.iter().position(|h| h.height == header.height);
            return match known {
                Some(i) if self.digests[i] == digest && self.headers[i] == header => Ok(HeaderAdmission::AlreadyKnown),
                Some(_) => Err(HeaderRejection::Fork),
                None => Err(HeaderRejection::NonMonotonicHeight),
            };
        }
        if header.work_target != self.work_target {
            return Err(HeaderRejection::WrongTarget);
        }
        if digest >= self.work_target {
            return Err(HeaderRejection::BadProofOfWork);
        }
        if header.height != tip_height + 1 {
            return Err(HeaderRejection::NonMonotonicHeight);
        }
        if header.prev_hash != *self.digests.last().expect("genesis present") {
            return Err(HeaderRejection::BrokenLink);
        }
        self.headers.push(header);
        self.digests.push(digest);
        Ok(HeaderAdmission::Accepted)
    }

    /// Checks `att` against the accepted header it names.
    pub fn verify_attestation(&self, att: &StateAttestation) -> Result<(), AttestationRejection> {
        let header = self
            .headers
            .iter()
            .find(|h| h.height == att.header_index as u64)
            .ok_or(AttestationRejection::UnknownHeader(att.header_index))?;
        let opening = &att.opening;
        if list_digest(&opening.roots) != opening.roots_digest
            || list_digest(&opening.nullifiers) != opening.nullifiers_digest
        {
            return Err(AttestationRejection::BadDigest);
        }
        if commit_digests(opening.roots_digest, opening.nullifiers_digest) != header.state_commitment {
            return Err(AttestationRejection::CommitmentMismatch);
        }
        if !opening.roots.ends_with(&att.new_roots) || !opening.nullifiers.ends_with(&att.new_nullifiers) {
            return Err(AttestationRejection::NotASuffix);
        }
        Ok(())
    }

    /// Re-validates the whole tracked chain.
    pub fn is_valid_chain(&self) -> bool {
        self.headers.windows(2).all(|w| {
            w[1].height == w[0].height + 1
                && w[1].prev_hash == w[0].digest()
                && w[1].meets_target()
                && w[1].work_target == self.work_target
        })
    }
}

/// `MODULUS / divisor`, an easy target for tests and scenarios. Divisors
/// below 2 are raised to 2 since `MODULUS` itself reduces to zero.
pub fn easy_target(divisor: u64) -> FieldElement {
    FieldElement::new(crate::field::MODULUS / divisor.max(2))
}
