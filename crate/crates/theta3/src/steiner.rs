//! Steiner-complex combinatorics on characteristics.
//!
//! A Steiner complex is the set of six unordered pairs of odd characteristics
//! summing to a fixed nonzero 2-torsion point eta.  This module builds the
//! complexes, decides syzygy between two complexes, produces the 18-line
//! labeling attached to an azygetic triple, and computes Frobenius
//! completions of odd azygetic triples to fundamental systems.

use crate::chars::{enumerate, is_azygetic_triple, is_fundamental_system, weil_pairing, Char, Parity};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SteinerError {
    #[error("the zero characteristic has no Steiner complex")]
    ZeroEta,
    #[error("complex syzygy needs two distinct nonzero characteristics, got {0} twice")]
    EqualEtas(Char),
    #[error("characteristic {0} must be odd here")]
    NotOdd(Char),
    #[error("triple ({0}, {1}, {2}) is syzygetic; an azygetic triple is required")]
    SyzygeticTriple(Char, Char, Char),
    #[error("characteristics must be distinct, got a repeat of {0}")]
    Duplicate(Char),
    #[error("completion of ({0}, {1}, {2}) is not a unique 5-set (found {3} candidates)")]
    CompletionNotUnique(Char, Char, Char, usize),
}

/// The six pairs of odd characteristics summing to `eta`.  Pairs are stored
/// with the lexicographically smaller member first and sorted by that member,
/// so the representation is canonical.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SteinerComplex {
    pub eta: Char,
    pub pairs: [(Char, Char); 6],
}

impl SteinerComplex {
    /// All twelve member lines in ascending order.
    pub fn lines(&self) -> Vec<Char> {
        let mut v: Vec<Char> = self.pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        v.sort();
        v
    }

    pub fn contains(&self, c: &Char) -> bool {
        self.pairs.iter().any(|&(a, b)| a == *c || b == *c)
    }

    /// The partner of a member line within its pair.
    pub fn partner(&self, c: &Char) -> Option<Char> {
        self.contains(c).then(|| c.add(&self.eta))
    }
}

/// Build the Steiner complex of a nonzero 2-torsion point by exhausting the
/// 28 odd characteristics.
pub fn steiner_complex(eta: &Char) -> Result<SteinerComplex, SteinerError> {
    if *eta == Char::ZERO {
        return Err(SteinerError::ZeroEta);
    }
    let mut pairs = Vec::with_capacity(6);
    for a in enumerate(Some(Parity::Odd)) {
        let b = a.add(eta);
        if b.is_odd() && a < b {
            pairs.push((a, b));
        }
    }
    debug_assert_eq!(pairs.len(), 6, "every nonzero eta pairs the odds into 6 pairs");
    let pairs: [(Char, Char); 6] = pairs.try_into().expect("exactly six pairs");
    Ok(SteinerComplex { eta: *eta, pairs })
}

/// Two distinct complexes are syzygetic (share 4 lines) exactly when the
/// Weil pairing of their 2-torsion points vanishes; otherwise they share 6.
pub fn complexes_syzygetic(eta1: &Char, eta2: &Char) -> Result<bool, SteinerError> {
    if *eta1 == Char::ZERO || *eta2 == Char::ZERO {
        return Err(SteinerError::ZeroEta);
    }
    if eta1 == eta2 {
        return Err(SteinerError::EqualEtas(*eta1));
    }
    Ok(weil_pairing(eta1, eta2) == 0)
}

/// The 18-line labeling attached to an azygetic triple (x1, x2, x3): the
/// complexes S12 = S_{x1+x2}, S23, S31 arranged as three 6x2 tables
///
/// ```text
///   S12 = (x1 x2; t4 t9; ... t8 t13)
///   S23 = (x2 x3; t9 t14; ... t13 t18)
///   S31 = (x3 x1; t14 t4; ... t18 t8)
/// ```
///
/// `left` holds t4..t8 (the shared lines of S12 and S31 besides x1), `mid`
/// t9..t13, `right` t14..t18.  Rows close up because the three etas sum to
/// zero, so partner-of-partner-of-partner is the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Labeled18 {
    pub x: [Char; 3],
    pub left: [Char; 5],
    pub mid: [Char; 5],
    pub right: [Char; 5],
    pub complexes: [SteinerComplex; 3],
}

impl Labeled18 {
    /// All 18 labeled characteristics in label order t1..t18 (t1..t3 are the
    /// input triple).
    pub fn labels(&self) -> Vec<(String, Char)> {
        let mut out = Vec::with_capacity(18);
        for (i, c) in self.x.iter().enumerate() {
            out.push((format!("t{}", i + 1), *c));
        }
        for (base, block) in [(4, &self.left), (9, &self.mid), (14, &self.right)] {
            for (i, c) in block.iter().enumerate() {
                out.push((format!("t{}", base + i), *c));
            }
        }
        out
    }
}

pub fn label_asyzygetic_triple(x1: &Char, x2: &Char, x3: &Char) -> Result<Labeled18, SteinerError> {
    for c in [x1, x2, x3] {
        if !c.is_odd() {
            return Err(SteinerError::NotOdd(*c));
        }
    }
    match is_azygetic_triple(x1, x2, x3) {
        Ok(true) => {}
        Ok(false) => return Err(SteinerError::SyzygeticTriple(*x1, *x2, *x3)),
        Err(_) => return Err(SteinerError::Duplicate(*x1)),
    }
    let eta12 = x1.add(x2);
    let eta23 = x2.add(x3);
    let eta31 = x3.add(x1);
    let s12 = steiner_complex(&eta12)?;
    let s23 = steiner_complex(&eta23)?;
    let s31 = steiner_complex(&eta31)?;
    // azygetic triple <=> pairwise azygetic complexes here
    debug_assert_eq!(weil_pairing(&eta12, &eta23), 1);
    debug_assert_eq!(weil_pairing(&eta23, &eta31), 1);
    debug_assert_eq!(weil_pairing(&eta31, &eta12), 1);
    // left column: the lines shared by S12 and S31 besides x1, ascending
    let mut left: Vec<Char> = s12
        .lines()
        .into_iter()
        .filter(|c| c != x1 && s31.contains(c))
        .collect();
    left.sort();
    debug_assert_eq!(left.len(), 5, "azygetic complexes share six lines");
    let mut mid = [Char::ZERO; 5];
    let mut right = [Char::ZERO; 5];
    for (i, t) in left.iter().enumerate() {
        mid[i] = t.add(&eta12);
        right[i] = mid[i].add(&eta23);
        debug_assert_eq!(right[i].add(&eta31), *t, "rows close up");
        debug_assert!(s23.contains(&mid[i]) && s23.contains(&right[i]));
    }
    let left: [Char; 5] = left.try_into().expect("five shared lines");
    Ok(Labeled18 {
        x: [*x1, *x2, *x3],
        left,
        mid,
        right,
        complexes: [s12, s23, s31],
    })
}

/// The unique five even characteristics completing an odd azygetic triple to
/// a fundamental system, by exhaustive search over the 36 even
/// characteristics (uniqueness is asserted).
pub fn frobenius_completion(c1: &Char, c2: &Char, c3: &Char) -> Result<[Char; 5], SteinerError> {
    for c in [c1, c2, c3] {
        if !c.is_odd() {
            return Err(SteinerError::NotOdd(*c));
        }
    }
    match is_azygetic_triple(c1, c2, c3) {
        Ok(true) => {}
        Ok(false) => return Err(SteinerError::SyzygeticTriple(*c1, *c2, *c3)),
        Err(_) => return Err(SteinerError::Duplicate(*c1)),
    }
    // pairwise filtering leaves six even candidates; mutual azygeticity cuts
    // the completion down to a unique 5-subset
    let candidates: Vec<Char> = enumerate(Some(Parity::Even))
        .into_iter()
        .filter(|e| {
            [(c1, c2), (c1, c3), (c2, c3)]
                .iter()
                .all(|(a, b)| is_azygetic_triple(a, b, e) == Ok(true))
        })
        .collect();
    if candidates.len() != 6 {
        return Err(SteinerError::CompletionNotUnique(*c1, *c2, *c3, candidates.len()));
    }
    let mut found: Option<[Char; 5]> = None;
    for skip in 0..6 {
        let five: Vec<Char> = candidates
            .iter()
            .enumerate()
            .filter_map(|(i, c)| (i != skip).then_some(*c))
            .collect();
        let mut seq = vec![*c1, *c2, *c3];
        seq.extend(&five);
        if is_fundamental_system(&seq) == Ok(true) {
            if found.is_some() {
                return Err(SteinerError::CompletionNotUnique(*c1, *c2, *c3, 2));
            }
            found = Some(five.try_into().expect("five candidates"));
        }
    }
    found.ok_or(SteinerError::CompletionNotUnique(*c1, *c2, *c3, 0))
}

/// Fundamental system from an azygetic triple of odd characteristics via the
/// shared lines of S_{x1+x2} and S_{x1+x3}: that intersection is
/// {x1, t4, ..., t8}, and each t_j maps to w_j = x2 + x3 + t_j (mod-2 addition
/// realizes the divisor shift, since subtraction equals addition on
/// 2-torsion).  Returns the octet (x1, x2, x3, w4..w8) and its parity split.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FundamentalReport {
    pub octet: [Char; 8],
    pub odd_count: usize,
    pub even_count: usize,
    pub is_azygetic_sequence: bool,
}

pub fn fundamental_from_asyzygetic(
    x1: &Char,
    x2: &Char,
    x3: &Char,
) -> Result<FundamentalReport, SteinerError> {
    let labeled = label_asyzygetic_triple(x1, x2, x3)?;
    let shift = x2.add(x3);
    let mut octet = [Char::ZERO; 8];
    octet[..3].copy_from_slice(&labeled.x);
    for (i, t) in labeled.left.iter().enumerate() {
        octet[3 + i] = shift.add(t);
    }
    let odd_count = octet.iter().filter(|c| c.is_odd()).count();
    let mut is_azygetic_sequence = true;
    'outer: for i in 0..8 {
        for j in i + 1..8 {
            for k in j + 1..8 {
                if is_azygetic_triple(&octet[i], &octet[j], &octet[k]) != Ok(true) {
                    is_azygetic_sequence = false;
                    break 'outer;
                }
            }
        }
    }
    Ok(FundamentalReport {
        octet,
        odd_count,
        even_count: 8 - odd_count,
        is_azygetic_sequence,
    })
}
