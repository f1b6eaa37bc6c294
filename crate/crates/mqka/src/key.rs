//! Bitstring key algebra: XOR folding and forged-key computation.
//!
//! Keys are plain value types. Secrecy is a property of who gets to see a key
//! during a run, which the protocol engines enforce, not of the type itself.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A fixed-length bitstring. All keys participating in one run share a length.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    bits: Vec<u8>,
}

impl Key {
    /// All-zero key of length `len` (must be >= 1).
    pub fn zero(len: usize) -> Self {
        assert!(len >= 1, "key length must be >= 1");
        Key { bits: vec![0; len] }
    }

    /// Builds a key from individual bits (each 0 or 1).
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::structural("key must have at least one bit"));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::structural("key bits must be 0 or 1"));
        }
        Ok(Key {
            bits: bits.to_vec(),
        })
    }

    /// Uniformly random key of length `len`.
    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        assert!(len >= 1, "key length must be >= 1");
        Key {
            bits: (0..len).map(|_| rng.gen_range(0..=1u8)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    /// Bitwise XOR with another key of the same length.
    pub fn xor(&self, other: &Key) -> Result<Key> {
        if self.len() != other.len() {
            return Err(Error::structural(format!(
                "key length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Key {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }

    pub(crate) fn xor_in_place(&mut self, other: &Key) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::structural(format!(
                "key length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a ^= b;
        }
        Ok(())
    }

    /// Lowercase hex form; only defined when the length is a multiple of 4.
    pub fn to_hex(&self) -> Option<String> {
        if self.len() % 4 != 0 {
            return None;
        }
        let mut out = String::with_capacity(self.len() / 4);
        for nibble in self.bits.chunks(4) {
            let v = nibble.iter().fold(0u8, |acc, &b| (acc << 1) | b);
            out.push(char::from_digit(u32::from(v), 16).unwrap());
        }
        Some(out)
    }
}

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Key({self})")
    }
}

/// Keys print as lowercase hex when the length is a multiple of 4, and as a
/// "0b"-prefixed bit string otherwise. `FromStr` accepts both forms.
impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_hex() {
            Some(hex) => f.write_str(&hex),
            None => {
                f.write_str("0b")?;
                for b in &self.bits {
                    write!(f, "{b}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Key {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(raw) = s.strip_prefix("0b") {
            let bits: Vec<u8> = raw
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Error::structural(format!("invalid key bit '{c}'"))),
                })
                .collect::<Result<_>>()?;
            return Key::from_bits(&bits);
        }
        if s.is_empty() {
            return Err(Error::structural("empty key string"));
        }
        let mut bits = Vec::with_capacity(s.len() * 4);
        for c in s.chars() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Error::structural(format!("invalid hex digit '{c}'")))?
                as u8;
            for shift in (0..4).rev() {
                bits.push((v >> shift) & 1);
            }
        }
        Key::from_bits(&bits)
    }
}

impl Serialize for Key {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Key {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Bitwise XOR of all keys in the list.
pub fn xor_fold(keys: &[Key]) -> Result<Key> {
    let first = keys
        .first()
        .ok_or_else(|| Error::structural("xor_fold of an empty key list"))?;
    let mut acc = Key::zero(first.len());
    for k in keys {
        acc.xor_in_place(k)?;
    }
    Ok(acc)
}

/// The key a colluder encodes in place of their personal key once the legal
/// final key is known: `K_own XOR K_expected XOR K_final`. Substituting it for
/// the colluder's honest encoding steers the folded result to `K_expected`.
pub fn forged_key(own: &Key, expected: &Key, final_key: &Key) -> Result<Key> {
    own.xor(expected)?.xor(final_key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn key(s: &str) -> Key {
        Key::from_bits(
            &s.chars()
                .map(|c| c.to_digit(2).unwrap() as u8)
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn fold_of_two_keys() {
        assert_eq!(xor_fold(&[key("101"), key("011")]).unwrap(), key("110"));
    }

    #[test]
    fn fold_self_inverse() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let k = Key::random(64, &mut rng);
        assert!(xor_fold(&[k.clone(), k]).unwrap().is_zero());
    }

    #[test]
    fn fold_rejects_empty_and_mismatched() {
        assert!(matches!(xor_fold(&[]), Err(Error::Structural(_))));
        assert!(matches!(
            xor_fold(&[key("10"), key("101")]),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn forged_key_direct() {
        assert_eq!(
            forged_key(&key("00"), &key("10"), &key("01")).unwrap(),
            key("11")
        );
    }

    #[test]
    fn forged_key_identity_when_expected_equals_final() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let own = Key::random(32, &mut rng);
        let e = Key::random(32, &mut rng);
        assert_eq!(forged_key(&own, &e, &e).unwrap(), own);
    }

    #[test]
    fn hex_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let k = Key::random(128, &mut rng);
        let s = k.to_string();
        assert_eq!(s.len(), 32);
        assert_eq!(s.parse::<Key>().unwrap(), k);
    }

    #[test]
    fn binary_form_when_not_nibble_aligned() {
        let k = key("10110");
        let s = k.to_string();
        assert!(s.starts_with("0b"));
        assert_eq!(s.parse::<Key>().unwrap(), k);
    }

    proptest! {
        // Folding is order independent: a shuffled right-fold gives the same
        // result as folding in index order.
        #[test]
        fn fold_order_independent(seed in any::<u64>(), n in 1usize..8, len in 1usize..32) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let keys: Vec<Key> = (0..n).map(|_| Key::random(len, &mut rng)).collect();
            let folded = xor_fold(&keys).unwrap();

            // Independent oracle: right fold over a shuffled copy.
            let mut shuffled = keys.clone();
            for i in (1..shuffled.len()).rev() {
                shuffled.swap(i, rng.gen_range(0..=i));
            }
            let oracle = shuffled
                .iter()
                .rev()
                .fold(Key::zero(len), |acc, k| acc.xor(k).unwrap());
            prop_assert_eq!(folded, oracle);
        }

        // Replacing one key by its forged variant steers the fold to the
        // expected key, re-checked by brute-force re-fold.
        #[test]
        fn forged_substitution_steers_fold(seed in any::<u64>(), n in 2usize..9, len in 1usize..64) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let keys: Vec<Key> = (0..n).map(|_| Key::random(len, &mut rng)).collect();
            let expected = Key::random(len, &mut rng);
            let final_key = xor_fold(&keys).unwrap();
            let idx = rng.gen_range(0..n);

            let mut forged = keys.clone();
            forged[idx] = forged_key(&keys[idx], &expected, &final_key).unwrap();
            prop_assert_eq!(xor_fold(&forged).unwrap(), expected);
        }
    }
}
