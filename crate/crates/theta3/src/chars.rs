//! Level-2 theta characteristics and their exact mod-2 arithmetic.
//!
//! A characteristic is a pair of vectors (eps', eps'') in {0,1}^3, read as
//! half-integer vectors eps'/2, eps''/2.  It labels a translate of the Riemann
//! theta function and corresponds to the 2-torsion point eps''/2 + Z (eps'/2)
//! on the Jacobian.  Everything in this module is exact bit arithmetic; the
//! half-integer reading only matters at the theta-evaluation boundary.

use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// A theta characteristic: `e` is the coefficient of Z (eps'), `d` the
/// translation part (eps'').  Components are 0/1 meaning 0 or 1/2.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Char {
    pub e: [u8; 3],
    pub d: [u8; 3],
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CharError {
    #[error("characteristic string must be six bits as \"e1e2e3.d1d2d3\", got {0:?}")]
    BadFormat(String),
    #[error("characteristics must be pairwise distinct, got a repeat of {0}")]
    Duplicate(Char),
    #[error("expected an odd characteristic, got even {0}")]
    NotOdd(Char),
    #[error("expected exactly 8 characteristics, got {0}")]
    BadLength(usize),
}

impl Char {
    pub const ZERO: Char = Char { e: [0, 0, 0], d: [0, 0, 0] };

    pub const fn new(e: [u8; 3], d: [u8; 3]) -> Char {
        Char { e, d }
    }

    /// Parity of the characteristic: dot(eps', eps'') mod 2.  Odd
    /// characteristics are the 28 that index bitangent lines.
    pub fn parity(&self) -> Parity {
        let dot: u8 = (0..3).map(|i| self.e[i] & self.d[i]).sum();
        if dot % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == Parity::Odd
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Parity::Even
    }

    /// Group law on 2-torsion: componentwise XOR of both vectors.
    pub fn add(&self, other: &Char) -> Char {
        let mut e = [0u8; 3];
        let mut d = [0u8; 3];
        for i in 0..3 {
            e[i] = self.e[i] ^ other.e[i];
            d[i] = self.d[i] ^ other.d[i];
        }
        Char { e, d }
    }

    /// The characteristic with eps' and eps'' blocks exchanged.  Some sources
    /// write 2-torsion points as eps' + Z eps''; exchanging blocks converts
    /// between that reading and the one used here.
    pub fn swap_blocks(&self) -> Char {
        Char { e: self.d, d: self.e }
    }

    /// 6-bit index, lexicographic on eps' then eps''.
    pub fn index(&self) -> usize {
        let mut v = 0usize;
        for i in 0..3 {
            v = v << 1 | self.e[i] as usize;
        }
        for i in 0..3 {
            v = v << 1 | self.d[i] as usize;
        }
        v
    }

    pub fn from_index(idx: usize) -> Char {
        assert!(idx < 64, "characteristic index out of range: {idx}");
        let bit = |k: usize| ((idx >> (5 - k)) & 1) as u8;
        Char {
            e: [bit(0), bit(1), bit(2)],
            d: [bit(3), bit(4), bit(5)],
        }
    }
}

impl fmt::Display for Char {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}{}.{}{}{}",
            self.e[0], self.e[1], self.e[2], self.d[0], self.d[1], self.d[2]
        )
    }
}

impl fmt::Debug for Char {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Char({self})")
    }
}

impl FromStr for Char {
    type Err = CharError;

    fn from_str(s: &str) -> Result<Char, CharError> {
        let bytes: Vec<char> = s.chars().collect();
        if bytes.len() != 7 || bytes[3] != '.' {
            return Err(CharError::BadFormat(s.to_string()));
        }
        let mut e = [0u8; 3];
        let mut d = [0u8; 3];
        for i in 0..3 {
            e[i] = match bytes[i] {
                '0' => 0,
                '1' => 1,
                _ => return Err(CharError::BadFormat(s.to_string())),
            };
            d[i] = match bytes[4 + i] {
                '0' => 0,
                '1' => 1,
                _ => return Err(CharError::BadFormat(s.to_string())),
            };
        }
        Ok(Char { e, d })
    }
}

/// Enumerate characteristics in the deterministic order of `Char::index`,
/// optionally filtered by parity.
pub fn enumerate(filter: Option<Parity>) -> Vec<Char> {
    (0..64)
        .map(Char::from_index)
        .filter(|c| filter.is_none_or(|p| c.parity() == p))
        .collect()
}

/// The mod-2 Weil pairing: dot(e1, d2) + dot(d1, e2) mod 2.
pub fn weil_pairing(c1: &Char, c2: &Char) -> u8 {
    let mut acc = 0u8;
    for i in 0..3 {
        acc ^= c1.e[i] & c2.d[i];
        acc ^= c1.d[i] & c2.e[i];
    }
    acc
}

/// Azygetic test for a triple: weil_pairing(c1+c2, c1+c3) = 1.  The value is
/// invariant under permuting the arguments.
pub fn is_azygetic_triple(c1: &Char, c2: &Char, c3: &Char) -> Result<bool, CharError> {
    if c1 == c2 || c1 == c3 {
        return Err(CharError::Duplicate(*c1));
    }
    if c2 == c3 {
        return Err(CharError::Duplicate(*c2));
    }
    Ok(weil_pairing(&c1.add(c2), &c1.add(c3)) == 1)
}

/// A fundamental system: eight distinct characteristics, every embedded
/// triple azygetic, the first three odd and the last five even.
pub fn is_fundamental_system(seq: &[Char]) -> Result<bool, CharError> {
    if seq.len() != 8 {
        return Err(CharError::BadLength(seq.len()));
    }
    for i in 0..8 {
        for j in i + 1..8 {
            if seq[i] == seq[j] {
                return Err(CharError::Duplicate(seq[i]));
            }
        }
    }
    let parity_ok = seq[..3].iter().all(Char::is_odd) && seq[3..].iter().all(Char::is_even);
    if !parity_ok {
        return Ok(false);
    }
    for i in 0..8 {
        for j in i + 1..8 {
            for k in j + 1..8 {
                if !is_azygetic_triple(&seq[i], &seq[j], &seq[k])? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Named characteristics used throughout: the fundamental sextuple of odd
/// characteristics w1..w3, w1'..w3', the auxiliary pair w7, w7', the verbatim
/// external pair w4, w4', and the eight 5-column tables of even
/// characteristics that complete the odd triples below to fundamental systems.
pub mod named {
    use super::Char;

    pub const W1: Char = Char::new([0, 0, 1], [1, 0, 1]);
    pub const W1P: Char = Char::new([0, 0, 1], [0, 0, 1]);
    pub const W2: Char = Char::new([0, 1, 1], [1, 1, 0]);
    pub const W2P: Char = Char::new([0, 1, 1], [0, 1, 0]);
    pub const W3: Char = Char::new([0, 1, 0], [1, 1, 1]);
    pub const W3P: Char = Char::new([0, 1, 0], [0, 1, 1]);
    pub const W7: Char = Char::new([1, 1, 1], [0, 0, 1]);
    pub const W7P: Char = Char::new([1, 0, 1], [1, 1, 0]);

    /// External pair as printed in the source tables: W4 is odd, but W4P
    /// is even, which degenerates three of the determinant identities; see
    /// `verify::igualtats` for the corrected replacement pair.
    pub const W4: Char = Char::new([1, 1, 1], [1, 0, 0]);
    pub const W4P: Char = Char::new([1, 1, 1], [0, 0, 0]);

    /// Corrected pair: the lexicographically smallest pair of the Steiner
    /// complex of eta = W1 + W1' not already used by {W1,W1'},{W2,W2'},{W3,W3'}.
    pub const W4C: Char = Char::new([0, 0, 1], [0, 1, 1]);
    pub const W4PC: Char = Char::new([0, 0, 1], [1, 1, 1]);

    pub const TABLE_A: [Char; 5] = [
        Char::new([0, 0, 0], [0, 0, 0]),
        Char::new([1, 0, 0], [0, 0, 0]),
        Char::new([1, 1, 1], [1, 0, 1]),
        Char::new([1, 1, 0], [1, 1, 0]),
        Char::new([1, 0, 1], [1, 1, 1]),
    ];
    pub const TABLE_B: [Char; 5] = [
        Char::new([1, 0, 0], [0, 0, 0]),
        Char::new([0, 0, 0], [1, 0, 0]),
        Char::new([1, 1, 1], [1, 0, 1]),
        Char::new([1, 1, 0], [1, 1, 0]),
        Char::new([1, 0, 1], [1, 1, 1]),
    ];
    pub const TABLE_C: [Char; 5] = [
        Char::new([0, 0, 0], [0, 0, 0]),
        Char::new([0, 0, 0], [0, 1, 0]),
        Char::new([0, 1, 1], [0, 1, 1]),
        Char::new([0, 1, 0], [1, 0, 0]),
        Char::new([1, 1, 1], [1, 0, 1]),
    ];
    pub const TABLE_D: [Char; 5] = [
        Char::new([0, 1, 0], [0, 0, 0]),
        Char::new([0, 0, 0], [1, 0, 0]),
        Char::new([1, 1, 1], [1, 0, 1]),
        Char::new([0, 0, 0], [1, 1, 0]),
        Char::new([0, 1, 1], [1, 1, 1]),
    ];
    pub const TABLE_E: [Char; 5] = [
        Char::new([0, 0, 0], [0, 0, 0]),
        Char::new([0, 0, 1], [0, 0, 0]),
        Char::new([0, 1, 0], [0, 0, 1]),
        Char::new([1, 1, 1], [1, 0, 1]),
        Char::new([0, 0, 0], [1, 1, 1]),
    ];
    pub const TABLE_F: [Char; 5] = [
        Char::new([0, 0, 0], [0, 1, 1]),
        Char::new([0, 0, 0], [1, 0, 0]),
        Char::new([0, 0, 1], [1, 0, 0]),
        Char::new([0, 1, 0], [1, 0, 1]),
        Char::new([1, 1, 1], [1, 0, 1]),
    ];
    pub const TABLE_G: [Char; 5] = [
        Char::new([0, 0, 0], [0, 0, 0]),
        Char::new([0, 1, 1], [0, 0, 0]),
        Char::new([0, 0, 0], [0, 0, 1]),
        Char::new([1, 1, 1], [1, 0, 1]),
        Char::new([0, 0, 1], [1, 1, 0]),
    ];
    pub const TABLE_H: [Char; 5] = [
        Char::new([0, 0, 1], [0, 1, 0]),
        Char::new([0, 0, 0], [1, 0, 0]),
        Char::new([0, 1, 1], [1, 0, 0]),
        Char::new([0, 0, 0], [1, 0, 1]),
        Char::new([1, 1, 1], [1, 0, 1]),
    ];

    /// Label/characteristic pairs in a fixed presentation order for listings.
    pub fn labeled() -> Vec<(String, Char)> {
        let mut out = vec![
            ("w1".to_string(), W1),
            ("w1'".to_string(), W1P),
            ("w2".to_string(), W2),
            ("w2'".to_string(), W2P),
            ("w3".to_string(), W3),
            ("w3'".to_string(), W3P),
            ("w7".to_string(), W7),
            ("w7'".to_string(), W7P),
            ("w4".to_string(), W4),
            ("w4'".to_string(), W4P),
            ("w4c".to_string(), W4C),
            ("w4c'".to_string(), W4PC),
        ];
        for (name, table) in [
            ("a", TABLE_A),
            ("b", TABLE_B),
            ("c", TABLE_C),
            ("d", TABLE_D),
            ("e", TABLE_E),
            ("f", TABLE_F),
            ("g", TABLE_G),
            ("h", TABLE_H),
        ] {
            for (i, c) in table.iter().enumerate() {
                out.push((format!("{}{}", name, i + 1), *c));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::named::*;
    use super::*;

    #[test]
    fn parity_census() {
        assert_eq!(enumerate(Some(Parity::Odd)).len(), 28);
        assert_eq!(enumerate(Some(Parity::Even)).len(), 36);
        assert_eq!(enumerate(None).len(), 64);
        assert_eq!(enumerate(None)[0], Char::ZERO);
        assert_eq!(Char::ZERO.parity(), Parity::Even);
    }

    #[test]
    fn named_parities() {
        for w in [W1, W1P, W2, W2P, W3, W3P, W7, W7P, W4, W4C, W4PC] {
            assert!(w.is_odd(), "{w} should be odd");
        }
        // the verbatim external partner is even; that fact drives the
        // degenerate mode of the determinant identities
        assert!(W4P.is_even());
        for table in [TABLE_A, TABLE_B, TABLE_C, TABLE_D, TABLE_E, TABLE_F, TABLE_G, TABLE_H] {
            for c in table {
                assert!(c.is_even(), "{c} should be even");
            }
        }
    }

    #[test]
    fn addition_examples() {
        let c = Char::new([1, 0, 1], [0, 1, 1]);
        assert_eq!(c.add(&c), Char::ZERO);
        let eta = Char::new([0, 0, 0], [1, 0, 0]);
        assert_eq!(W1.add(&W1P), eta);
        assert_eq!(W2.add(&W2P), eta);
        assert_eq!(W3.add(&W3P), eta);
    }

    #[test]
    fn weil_pairing_examples() {
        for c in enumerate(None) {
            assert_eq!(weil_pairing(&c, &Char::ZERO), 0);
        }
        assert_eq!(weil_pairing(&W1, &W1P), 0);
        assert_eq!(weil_pairing(&W1, &W2), 1);
    }

    #[test]
    fn weil_pairing_symmetric_and_bilinear_exhaustive() {
        let all = enumerate(None);
        for a in &all {
            for b in &all {
                assert_eq!(weil_pairing(a, b), weil_pairing(b, a));
                for c in &all {
                    let lhs = weil_pairing(&a.add(b), c);
                    let rhs = weil_pairing(a, c) ^ weil_pairing(b, c);
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn azygetic_examples() {
        assert!(is_azygetic_triple(&W1, &W2, &W3).unwrap());
        // one line from each of two pairs of a common Steiner complex plus a
        // third pair's line gives a syzygetic triple
        assert!(!is_azygetic_triple(&W1, &W1P, &W2).unwrap());
        assert!(is_azygetic_triple(&W1, &W1, &W2).is_err());
    }

    #[test]
    fn fundamental_system_examples() {
        let mut seq = vec![W1, W2, W3];
        seq.extend(TABLE_A);
        assert!(is_fundamental_system(&seq).unwrap());
        // swapping in a foreign even characteristic must break the property
        let mut broken = seq.clone();
        broken[7] = TABLE_B[1];
        assert!(!is_fundamental_system(&broken).unwrap());
        let with_dup = vec![W1, W2, W3, TABLE_A[0], TABLE_A[1], TABLE_A[2], TABLE_A[3], TABLE_A[0]];
        assert!(is_fundamental_system(&with_dup).is_err());
    }

    #[test]
    fn string_round_trip() {
        for c in enumerate(None) {
            let s = c.to_string();
            assert_eq!(s.parse::<Char>().unwrap(), c);
        }
        assert_eq!("001.101".parse::<Char>().unwrap(), W1);
        assert!("001101".parse::<Char>().is_err());
        assert!("0x1.101".parse::<Char>().is_err());
    }

    #[test]
    fn index_round_trip_is_lexicographic() {
        let all = enumerate(None);
        for (i, c) in all.iter().enumerate() {
            assert_eq!(c.index(), i);
            assert_eq!(Char::from_index(i), *c);
        }
        // enumeration order is lexicographic on the concatenated bit string
        for w in all.windows(2) {
            assert!(w[0].to_string().replace('.', "") < w[1].to_string().replace('.', ""));
        }
    }
}
