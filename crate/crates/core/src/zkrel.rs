//! The withdrawal relation over two merkle roots, behind a
//! (setup, prove, verify) proof-system interface.
//!
//! A statement `(root_a, root_b, nullifier)` is satisfied by a witness
//! `(r, s, path, selector)` when `nullifier = H(r)` and the commitment
//! `H(r || s)` folds along `path` to the root picked by `selector`. Roots are
//! labelled by chain: `root_a` is always a root of chain A's tree.
//!
//! [`TransparentBackend`] is the reference implementation. Its proofs carry
//! the witness in the clear: it is complete, sound and statement-binding but
//! not zero-knowledge. A hiding backend implements [`ProofSystem`] unchanged.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::field::{encode_all, hash_bytes, FieldElement, HashParams};
use crate::merkle::{MerklePath, MAX_HEIGHT};

pub const CIRCUIT_PREFIX: &str = "or-membership-h";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZkError {
    #[error("unknown circuit id `{0}`")]
    UnknownCircuit(String),
    #[error("witness nullifier H(r) does not match the statement")]
    NullifierMismatch,
    #[error("witness path does not reach the selected root")]
    NotAMember,
    #[error("witness path has height {got}, parameters expect {expected}")]
    PathHeight { got: usize, expected: usize },
}

/// Secret deposit note.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepositNote {
    pub r: FieldElement,
    pub s: FieldElement,
}

impl fmt::Debug for DepositNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DepositNote").field("commitment", &self.commitment()).finish_non_exhaustive()
    }
}

impl DepositNote {
    pub fn new(r: FieldElement, s: FieldElement) -> Self {
        Self { r, s }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut sample = || FieldElement::new(rng.gen_range(0..crate::field::MODULUS));
        Self { r: sample(), s: sample() }
    }

    /// `H(enc(r) || enc(s))`
    pub fn commitment(&self) -> FieldElement {
        hash_bytes(&encode_all(&[self.r, self.s]))
    }

    /// `H(enc(r))`
    pub fn nullifier(&self) -> FieldElement {
        hash_bytes(&self.r.to_bytes())
    }
}

/// Which chain's root the witness path targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootSelector {
    A,
    B,
}

/// Public inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Statement {
    pub root_a: FieldElement,
    pub root_b: FieldElement,
    pub nullifier: FieldElement,
}

impl Statement {
    pub const ENCODED_LEN: usize = 24;

    pub fn selected_root(&self, selector: RootSelector) -> FieldElement {
        match selector {
            RootSelector::A => self.root_a,
            RootSelector::B => self.root_b,
        }
    }

    /// `root_a || root_b || nullifier`, canonical encodings.
    pub fn to_bytes(&self) -> [u8; 24] {
        let mut out = [0u8; 24];
        out[..8].copy_from_slice(&self.root_a.to_bytes());
        out[8..16].copy_from_slice(&self.root_b.to_bytes());
        out[16..].copy_from_slice(&self.nullifier.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != Self::ENCODED_LEN {
            return None;
        }
        Some(Self {
            root_a: FieldElement::from_bytes(&bytes[..8]).ok()?,
            root_b: FieldElement::from_bytes(&bytes[8..16]).ok()?,
            nullifier: FieldElement::from_bytes(&bytes[16..]).ok()?,
        })
    }

    pub fn digest(&self) -> FieldElement {
        hash_bytes(&self.to_bytes())
    }
}

/// Private inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub r: FieldElement,
    pub s: FieldElement,
    pub path: MerklePath,
    pub selector: RootSelector,
}

impl Witness {
    pub fn new(note: &DepositNote, path: MerklePath, selector: RootSelector) -> Self {
        Self { r: note.r, s: note.s, path, selector }
    }
}

/// Parameters shared by prover and verifier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofParams {
    pub circuit_id: String,
    pub security: u32,
    pub tree_height: usize,
    pub hash_digest: FieldElement,
}

impl ProofParams {
    /// Binds every parameter field.
    pub fn digest(&self) -> FieldElement {
        let mut bytes = self.circuit_id.as_bytes().to_vec();
        bytes.extend_from_slice(&(self.security as u64).to_le_bytes());
        bytes.extend_from_slice(&(self.tree_height as u64).to_le_bytes());
        bytes.extend_from_slice(&self.hash_digest.to_bytes());
        hash_bytes(&bytes)
    }
}

/// A proof: backend tag byte, then an opaque length-prefixed payload.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Proof {
    pub backend_tag: u8,
    pub payload: Vec<u8>,
}

impl Proof {
    /// `tag || u32_le(len) || payload`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.payload.len());
        out.push(self.backend_tag);
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let (&backend_tag, rest) = bytes.split_first()?;
        let len = u32::from_le_bytes(rest.get(..4)?.try_into().ok()?) as usize;
        let payload = rest.get(4..)?;
        (payload.len() == len).then(|| Self { backend_tag, payload: payload.to_vec() })
    }
}

/// The (setup, prove, verify) trio.
pub trait ProofSystem: Send + Sync + fmt::Debug {
    fn tag(&self) -> u8;

    fn setup(&self, security: u32, circuit_id: &str) -> Result<ProofParams, ZkError>;

    fn prove(&self, params: &ProofParams, stmt: &Statement, wit: &Witness) -> Result<Proof, ZkError>;

    /// Reads only the statement and the proof. Never panics on malformed input.
    fn verify(&self, params: &ProofParams, stmt: &Statement, proof: &Proof) -> bool;
}

/// Parses `or-membership-h<N>`.
pub fn parse_circuit_height(circuit_id: &str) -> Result<usize, ZkError> {
    circuit_id
        .strip_prefix(CIRCUIT_PREFIX)
        .and_then(|h| h.parse::<usize>().ok())
        .filter(|h| (1..=MAX_HEIGHT).contains(h))
        .ok_or_else(|| ZkError::UnknownCircuit(circuit_id.to_string()))
}

pub fn circuit_id_for_height(height: usize) -> String {
    format!("{CIRCUIT_PREFIX}{height}")
}

/// Checks the relation directly.
pub fn relation_holds(stmt: &Statement, wit: &Witness, params: &HashParams) -> Result<(), ZkError> {
    if hash_bytes(&wit.r.to_bytes()) != stmt.nullifier {
        return Err(ZkError::NullifierMismatch);
    }
    let commitment = hash_bytes(&encode_all(&[wit.r, wit.s]));
    if wit.path.siblings.len() != wit.path.directions.len()
        || wit.path.fold(commitment, params) != stmt.selected_root(wit.selector)
    {
        return Err(ZkError::NotAMember);
    }
    Ok(())
}

/// Reference backend: the proof payload is the serialized witness, bound to
/// the parameters and the statement by digest.
#[derive(Debug, Clone, Copy, Default)]
pub struct TransparentBackend;

impl TransparentBackend {
    pub const TAG: u8 = 0x01;

    fn encode_payload(params: &ProofParams, stmt: &Statement, wit: &Witness) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&params.digest().to_bytes());
        out.extend_from_slice(&stmt.digest().to_bytes());
        out.extend_from_slice(&wit.r.to_bytes());
        out.extend_from_slice(&wit.s.to_bytes());
        out.push(match wit.selector {
            RootSelector::A => 0,
            RootSelector::B => 1,
        });
        out.push(wit.path.siblings.len() as u8);
        for (sibling, &dir) in wit.path.siblings.iter().zip(&wit.path.directions) {
            out.extend_from_slice(&sibling.to_bytes());
            out.push(dir as u8);
        }
        out
    }

    fn decode_payload(payload: &[u8]) -> Option<(FieldElement, FieldElement, Witness)> {
        let field = |offset: usize| FieldElement::from_bytes(payload.get(offset..offset + 8)?).ok();
        let params_digest = field(0)?;
        let stmt_digest = field(8)?;
        let r = field(16)?;
        let s = field(24)?;
        let selector = match *payload.get(32)? {
            0 => RootSelector::A,
            1 => RootSelector::B,
            _ => return None,
        };
        let height = *payload.get(33)? as usize;
        if payload.len() != 34 + 9 * height {
            return None;
        }
        let mut siblings = Vec::with_capacity(height);
        let mut directions = Vec::with_capacity(height);
        for i in 0..height {
            let off = 34 + 9 * i;
            siblings.push(field(off)?);
            directions.push(match payload[off + 8] {
                0 => false,
                1 => true,
                _ => return None,
            });
        }
        // The verifier never learns the leaf index; the fold uses directions only.
        let path = MerklePath { leaf_index: 0, siblings, directions };
        Some((params_digest, stmt_digest, Witness { r, s, path, selector }))
    }
}

impl ProofSystem for TransparentBackend {
    fn tag(&self) -> u8 {
        Self::TAG
    }

    fn setup(&self, security: u32, circuit_id: &str) -> Result<ProofParams, ZkError> {
        let tree_height = parse_circuit_height(circuit_id)?;
        Ok(ProofParams {
            circuit_id: circuit_id.to_string(),
            security,
            tree_height,
            hash_digest: HashParams::standard_digest(),
        })
    }

    fn prove(&self, params: &ProofParams, stmt: &Statement, wit: &Witness) -> Result<Proof, ZkError> {
        if wit.path.height() != params.tree_height {
            return Err(ZkError::PathHeight { got: wit.path.height(), expected: params.tree_height });
        }
        relation_holds(stmt, wit, &HashParams::standard())?;
        Ok(Proof { backend_tag: Self::TAG, payload: Self::encode_payload(params, stmt, wit) })
    }

    fn verify(&self, params: &ProofParams, stmt: &Statement, proof: &Proof) -> bool {
        if proof.backend_tag != Self::TAG || params.hash_digest != HashParams::standard_digest() {
            return false;
        }
        let Some((params_digest, stmt_digest, wit)) = Self::decode_payload(&proof.payload) else {
            return false;
        };
        params_digest == params.digest()
            && stmt_digest == stmt.digest()
            && wit.path.height() == params.tree_height
            && relation_holds(stmt, &wit, &HashParams::standard()).is_ok()
    }
}

pub fn zk_setup(security: u32, circuit_id: &str) -> Result<ProofParams, ZkError> {
    TransparentBackend.setup(security, circuit_id)
}

pub fn zk_prove(params: &ProofParams, stmt: &Statement, wit: &Witness) -> Result<Proof, ZkError> {
    TransparentBackend.prove(params, stmt, wit)
}

pub fn zk_verify(params: &ProofParams, stmt: &Statement, proof: &Proof) -> bool {
    TransparentBackend.verify(params, stmt, proof)
}
