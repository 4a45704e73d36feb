//! Prime-field arithmetic over p = 2^64 - 2^32 + 1 and the MiMC-style
//! permutation hash used for commitments, nullifiers, tree nodes and headers.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Field modulus.
pub const MODULUS: u64 = 0xffff_ffff_0000_0001;

/// S-box exponent. gcd(7, p - 1) = 1, so x -> x^7 permutes the field.
pub const SBOX_EXPONENT: u64 = 7;

/// Default number of permutation rounds.
pub const DEFAULT_ROUNDS: usize = 64;

/// Seed string for the round constants.
pub const ROUND_CONSTANT_SEED: &str = "bridge-mimc";

/// Bytes absorbed per chunk by [`hash_bytes`]. 7 bytes always fit below p.
pub const CHUNK_BYTES: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("value {0:#x} is not a canonical field element")]
    NonCanonical(u64),
    #[error("expected 8 bytes, got {0}")]
    BadLength(usize),
    #[error("invalid hex: {0}")]
    BadHex(String),
}

/// An element of F_p, always stored reduced.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: Self = Self(0);
    pub const ONE: Self = Self(1);

    /// Reduces an arbitrary u64 into the field.
    pub const fn new(value: u64) -> Self {
        Self(if value >= MODULUS { value - MODULUS } else { value })
    }

    /// Accepts only values already below p.
    pub fn from_canonical(value: u64) -> Result<Self, FieldError> {
        if value < MODULUS {
            Ok(Self(value))
        } else {
            Err(FieldError::NonCanonical(value))
        }
    }

    pub const fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn pow(self, mut exp: u64) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.pow(MODULUS - 2))
        }
    }

    /// Canonical 8-byte little-endian encoding.
    pub fn to_bytes(self) -> [u8; 8] {
        self.0.to_le_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FieldError> {
        let arr: [u8; 8] = bytes.try_into().map_err(|_| FieldError::BadLength(bytes.len()))?;
        Self::from_canonical(u64::from_le_bytes(arr))
    }

    /// Hex of the canonical encoding, as used in transcripts and config files.
    pub fn to_hex(self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str) -> Result<Self, FieldError> {
        let bytes = hex::decode(s).map_err(|e| FieldError::BadHex(e.to_string()))?;
        Self::from_bytes(&bytes)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F({})", self.0)
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl From<u32> for FieldElement {
    fn from(v: u32) -> Self {
        Self(v as u64)
    }
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (sum, carry) = self.0.overflowing_add(rhs.0);
        // 2^64 mod p = 2^32 - 1
        let (sum, carry2) = if carry {
            sum.overflowing_add(0xffff_ffff)
        } else {
            (sum, false)
        };
        debug_assert!(!carry2);
        Self::new(sum)
    }
}

impl AddAssign for FieldElement {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        if self.0 == 0 {
            self
        } else {
            Self(MODULUS - self.0)
        }
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(reduce128(self.0 as u128 * rhs.0 as u128))
    }
}

/// Reduction using `2^64 = 2^32 - 1` and `2^96 = -1 (mod p)`.
fn reduce128(x: u128) -> u64 {
    const EPSILON: u64 = 0xffff_ffff;
    let lo = x as u64;
    let hi = (x >> 64) as u64;
    let hi_hi = hi >> 32;
    let hi_lo = hi & EPSILON;
    let (mut t0, borrow) = lo.overflowing_sub(hi_hi);
    if borrow {
        t0 = t0.wrapping_sub(EPSILON);
    }
    let t1 = hi_lo * EPSILON;
    let (mut res, carry) = t0.overflowing_add(t1);
    if carry {
        res = res.wrapping_add(EPSILON);
    }
    if res >= MODULUS {
        res -= MODULUS;
    }
    res
}

impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for FieldElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Round count and constants for the permutation.
#[derive(Clone, PartialEq, Eq)]
pub struct HashParams {
    round_constants: Vec<FieldElement>,
}

impl fmt::Debug for HashParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HashParams")
            .field("rounds", &self.rounds())
            .field("exponent", &SBOX_EXPONENT)
            .finish()
    }
}

impl HashParams {
    /// Parameters with every round constant set to zero.
    pub fn zero(rounds: usize) -> Self {
        assert!(rounds > 0, "rounds must be positive");
        Self { round_constants: vec![FieldElement::ZERO; rounds] }
    }

    /// Explicit constants, for tests and alternative parameterisations.
    pub fn from_constants(round_constants: Vec<FieldElement>) -> Self {
        assert!(!round_constants.is_empty(), "rounds must be positive");
        Self { round_constants }
    }

    /// Constants `c_0 = 0`, `c_i = H0(seed || i_le64)` where `H0` is
    /// [`hash_bytes`] under all-zero constants.
    pub fn from_seed(seed: &str, rounds: usize) -> Self {
        let bootstrap = Self::zero(rounds);
        let mut round_constants = Vec::with_capacity(rounds);
        round_constants.push(FieldElement::ZERO);
        for i in 1..rounds as u64 {
            let mut input = seed.as_bytes().to_vec();
            input.extend_from_slice(&i.to_le_bytes());
            round_constants.push(bootstrap.hash_bytes(&input));
        }
        Self { round_constants }
    }

    /// The process-wide protocol parameters (64 rounds, seeded constants).
    pub fn standard() -> Arc<HashParams> {
        static STANDARD: OnceLock<Arc<HashParams>> = OnceLock::new();
        STANDARD
            .get_or_init(|| Arc::new(Self::from_seed(ROUND_CONSTANT_SEED, DEFAULT_ROUNDS)))
            .clone()
    }

    /// Cached [`Self::digest`] of [`Self::standard`].
    pub fn standard_digest() -> FieldElement {
        static DIGEST: OnceLock<FieldElement> = OnceLock::new();
        *DIGEST.get_or_init(|| Self::standard().digest())
    }

    pub fn rounds(&self) -> usize {
        self.round_constants.len()
    }

    pub fn round_constants(&self) -> &[FieldElement] {
        &self.round_constants
    }

    /// `rounds` iterations of `x <- (x + k + c_i)^7`, then a final `+ k`.
    pub fn permute(&self, x: FieldElement, k: FieldElement) -> FieldElement {
        let mut state = x;
        for &c in &self.round_constants {
            let t = state + k + c;
            let t2 = t * t;
            let t4 = t2 * t2;
            state = t4 * t2 * t;
        }
        state + k
    }

    /// Two-to-one compression with feed-forward: `permute(a, b) + a + b`.
    pub fn hash2(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.permute(a, b) + a + b
    }

    /// Absorbs 7-byte little-endian chunks into a zero state via [`Self::hash2`].
    pub fn hash_bytes(&self, data: &[u8]) -> FieldElement {
        data.chunks(CHUNK_BYTES).fold(FieldElement::ZERO, |state, chunk| {
            let mut word = [0u8; 8];
            word[..chunk.len()].copy_from_slice(chunk);
            self.hash2(state, FieldElement::new(u64::from_le_bytes(word)))
        })
    }

    /// Digest binding every constant, used to tie proof parameters to the hash.
    pub fn digest(&self) -> FieldElement {
        let mut bytes = (self.rounds() as u64).to_le_bytes().to_vec();
        for c in &self.round_constants {
            bytes.extend_from_slice(&c.to_bytes());
        }
        self.hash_bytes(&bytes)
    }
}

pub fn permute(x: FieldElement, k: FieldElement, params: &HashParams) -> FieldElement {
    params.permute(x, k)
}

/// [`HashParams::hash2`] under the standard parameters.
pub fn hash2(a: FieldElement, b: FieldElement) -> FieldElement {
    HashParams::standard().hash2(a, b)
}

/// [`HashParams::hash_bytes`] under the standard parameters.
pub fn hash_bytes(data: &[u8]) -> FieldElement {
    HashParams::standard().hash_bytes(data)
}

/// Concatenated canonical encodings.
pub fn encode_all(elements: &[FieldElement]) -> Vec<u8> {
    elements.iter().flat_map(|e| e.to_bytes()).collect()
}
