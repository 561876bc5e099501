//! The m-arrangement chain: only the set of pads held by the m nastiest frogs.
//!
//! Within that set the frogs are interchangeable. A poke gives every occupied
//! pad with the poked label one pending departure; tokens then move one pad at
//! a time, and any pad holding two tokens must send one onward. The number of
//! single-pad moves H equals D_1 + ... + D_m of the full dynamics, so the
//! stationary mean of H is s_1 + ... + s_m.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{Scalar, SolveOptions};
use crate::error::{Error, Result};
use crate::linalg::{self, UniformChain};
use crate::words::{Alphabet, Symbol, Word};

pub const MAX_K: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MArrangement {
    k: usize,
    occupied: u64,
}

impl MArrangement {
    pub fn new(k: usize, pads: &[usize]) -> Result<Self> {
        if k == 0 || k > MAX_K {
            return Err(Error::Invalid(format!("ring size {k} not in 1..={MAX_K}")));
        }
        let mut occupied = 0u64;
        for &p in pads {
            if p >= k || occupied >> p & 1 == 1 {
                return Err(Error::Invalid(format!("bad pad set {pads:?}")));
            }
            occupied |= 1 << p;
        }
        Ok(MArrangement { k, occupied })
    }

    /// Pads 0..m, the image of F_empty.
    pub fn initial(k: usize, m: usize) -> Result<Self> {
        if m > k {
            return Err(Error::Invalid(format!("m={m} exceeds k={k}")));
        }
        MArrangement::new(k, &(0..m).collect::<Vec<_>>())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.occupied.count_ones() as usize
    }

    pub fn contains(&self, pad: usize) -> bool {
        self.occupied >> pad & 1 == 1
    }

    pub fn pads(&self) -> Vec<usize> {
        (0..self.k).filter(|&p| self.contains(p)).collect()
    }

    pub fn bits(&self) -> u64 {
        self.occupied
    }
}

/// Pokes every occupied pad labeled a and cascades. Returns the new set and
/// the total number of single-pad moves.
pub fn marrangement_step(s: &MArrangement, a: Symbol, w: &Word) -> (MArrangement, usize) {
    let k = s.k;
    assert_eq!(k, w.len(), "ring size and word length differ");
    let mut count = [0u8; MAX_K];
    let mut pending = [0u8; MAX_K];
    for p in 0..k {
        if s.contains(p) {
            count[p] = 1;
            pending[p] = (w.symbols()[p] == a) as u8;
        }
    }
    let mut hops = 0;
    // lowest pending pad first; any fixed order gives the same set
    while let Some(p) = (0..k).find(|&p| pending[p] > 0) {
        pending[p] -= 1;
        count[p] -= 1;
        let q = if p + 1 == k { 0 } else { p + 1 };
        count[q] += 1;
        pending[q] = pending[q].max(count[q] - 1);
        hops += 1;
    }
    let occupied = (0..k).filter(|&p| count[p] > 0).fold(0u64, |acc, p| acc | 1 << p);
    debug_assert_eq!(occupied.count_ones() as usize, s.m());
    (MArrangement { k, occupied }, hops)
}

#[derive(Clone, Debug)]
pub struct ReducedChain {
    pub m: usize,
    pub states: Vec<MArrangement>,
    pub chain: UniformChain,
    /// H for state i and symbol a at `i * |alphabet| + a`.
    pub hops: Vec<u32>,
}

impl ReducedChain {
    /// Number of (state, symbol) edges entering each state.
    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.states.len()];
        for &j in &self.chain.succ {
            deg[j as usize] += 1;
        }
        deg
    }

    /// E[H] under the stationary distribution.
    pub fn mean_hops(&self, exact: bool) -> Result<Scalar> {
        let sigma = self.chain.moves;
        let total = |i: usize| -> u64 { (0..sigma).map(|a| self.hops[i * sigma + a] as u64).sum() };
        if exact {
            let pi = linalg::stationary_exact(&self.chain)?;
            let s: BigRational = pi.iter().enumerate().map(|(i, p)| p * BigRational::from_integer(total(i).into())).sum();
            Ok(Scalar::Exact(s / BigRational::from_integer(sigma.into())))
        } else {
            let pi = linalg::stationary_f64(&self.chain)?;
            Ok(Scalar::Approx(pi.iter().enumerate().map(|(i, p)| p * total(i) as f64).sum::<f64>() / sigma as f64))
        }
    }
}

pub fn enumerate_marrangements(w: &Word, alphabet: Alphabet, m: usize, cap: usize) -> Result<ReducedChain> {
    let k = w.len();
    let w = w.clone().with_alphabet(alphabet)?;
    let start = MArrangement::initial(k, m)?;
    let mut index: HashMap<u64, u32> = HashMap::from([(start.occupied, 0)]);
    let mut states = vec![start];
    let mut succ = Vec::new();
    let mut hops = Vec::new();
    let mut i = 0;
    while i < states.len() {
        for a in alphabet.symbols() {
            let (next, h) = marrangement_step(&states[i], a, &w);
            let j = match index.get(&next.occupied) {
                Some(&j) => j,
                None => {
                    if states.len() >= cap {
                        return Err(Error::TooLarge { states: states.len() + 1, cap });
                    }
                    index.insert(next.occupied, states.len() as u32);
                    states.push(next);
                    states.len() as u32 - 1
                }
            };
            succ.push(j);
            hops.push(h as u32);
        }
        i += 1;
    }
    let chain = UniformChain { n: states.len(), moves: alphabet.size(), succ };
    Ok(ReducedChain { m, states, chain, hops })
}

/// Partial sums s_1 + ... + s_m for m = 1..=upto_m, one reduced chain each.
pub fn speeds_reduced(w: &Word, alphabet: Alphabet, upto_m: usize, opts: &SolveOptions) -> Result<Vec<Scalar>> {
    if !w.is_irreducible()? {
        return Err(Error::Reducible);
    }
    if upto_m > w.len() {
        return Err(Error::Invalid(format!("m={upto_m} exceeds k={}", w.len())));
    }
    (1..=upto_m)
        .map(|m| {
            let rc = enumerate_marrangements(w, alphabet, m, opts.state_cap)?;
            rc.mean_hops(rc.states.len() * alphabet.size() <= opts.exact_limit)
        })
        .collect()
}

/// Individual speeds from partial sums.
pub fn difference(partial: &[Scalar]) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(partial.len());
    let mut prev = Scalar::Exact(BigRational::zero());
    for p in partial {
        out.push(match (p, &prev) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a - b),
            _ => Scalar::Approx(p.to_f64() - prev.to_f64()),
        });
        prev = p.clone();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &str) -> Word {
        Word::parse(s, None).unwrap()
    }

    #[test]
    fn untouched_when_label_unoccupied() {
        let w = word("abcd");
        let s = MArrangement::new(4, &[1, 2]).unwrap();
        assert_eq!(marrangement_step(&s, 0, &w), (s, 0));
    }

    #[test]
    fn cascade_through_neighbor() {
        let w = word("abc");
        let s = MArrangement::new(3, &[0, 1]).unwrap();
        let (t, h) = marrangement_step(&s, 0, &w);
        assert_eq!(t.pads(), vec![1, 2]);
        assert_eq!(h, 2);
    }

    #[test]
    fn full_ring_rotates() {
        let w = word("abcde");
        let s = MArrangement::initial(5, 5).unwrap();
        assert_eq!(marrangement_step(&s, 3, &w), (s, 5));
    }

    #[test]
    fn single_frog_speed() {
        let w = word("aab");
        let p = speeds_reduced(&w, w.alphabet(), 1, &SolveOptions::default()).unwrap();
        assert_eq!(p[0], Scalar::Exact(BigRational::new(1.into(), 2.into())));
    }
}
