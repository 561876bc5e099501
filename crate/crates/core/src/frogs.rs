//! Frog dynamics on a ring of k lily pads labeled by the symbols of W.
//!
//! Poking symbol a agitates every frog on a pad labeled a. Agitated frogs hop
//! one at a time, nastiest first. A hopping frog moves forward (increasing pad
//! index mod k) to the first pad that is empty or holds a less nasty frog; that
//! frog, if any, becomes agitated in turn.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heights::KHeight;
use crate::words::{Symbol, Word};

const EMPTY: u8 = u8::MAX;

pub const MAX_PADS: usize = 255;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FrogArrangement {
    pad_of: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub new_arrangement: FrogArrangement,
    /// Pads traversed by each frog; a full lap counts k.
    pub displacement: Vec<u64>,
    /// Hops of each frog over its predecessor. Frog 0 is measured against a
    /// fixed marker between pads k-1 and 0.
    pub jumps_over_pred: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hop {
    pub frog: usize,
    pub from: usize,
    pub to: usize,
    pub distance: usize,
    pub over_pred: bool,
}

impl fmt::Display for Hop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "frog={} from={} to={}", self.frog, self.from, self.to)
    }
}

impl FrogArrangement {
    /// F_empty: frog m on pad m.
    pub fn identity(k: usize) -> Self {
        assert!(k <= MAX_PADS, "at most {MAX_PADS} pads");
        FrogArrangement { pad_of: (0..k as u8).collect() }
    }

    pub fn from_pads(pads: &[usize]) -> Result<Self> {
        let k = pads.len();
        if k > MAX_PADS {
            return Err(Error::Arrangement(format!("at most {MAX_PADS} pads")));
        }
        let mut seen = vec![false; k];
        for &p in pads {
            if p >= k || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Arrangement(format!("{pads:?} is not a bijection")));
            }
        }
        Ok(FrogArrangement { pad_of: pads.iter().map(|&p| p as u8).collect() })
    }

    pub fn k(&self) -> usize {
        self.pad_of.len()
    }

    pub fn pad(&self, frog: usize) -> usize {
        self.pad_of[frog] as usize
    }

    pub fn pads(&self) -> Vec<usize> {
        self.pad_of.iter().map(|&p| p as usize).collect()
    }

    pub(crate) fn raw(&self) -> &[u8] {
        &self.pad_of
    }

    /// Frog sitting on each pad.
    pub fn occupants(&self) -> Vec<usize> {
        let mut occ = vec![0; self.k()];
        for (m, &p) in self.pad_of.iter().enumerate() {
            occ[p as usize] = m;
        }
        occ
    }

    pub fn poke(&self, a: Symbol, w: &Word) -> TransitionRecord {
        poke(self, a, w)
    }

    pub fn apply_word(&self, r: &Word, w: &Word) -> TransitionRecord {
        apply_word(self, r, w)
    }
}

/// Pad labels of W, indexed by symbol.
#[derive(Clone, Debug)]
pub struct Ring {
    k: usize,
    pads: Vec<Vec<u8>>,
}

/// Mutable arrangement plus scratch space, for tight loops.
#[derive(Clone, Debug)]
pub struct FrogState {
    pad_of: Vec<u8>,
    occ: Vec<u8>,
    agitated: Vec<bool>,
}

impl FrogState {
    pub fn new(f: &FrogArrangement) -> Self {
        let k = f.k();
        let mut occ = vec![EMPTY; k];
        for (m, &p) in f.pad_of.iter().enumerate() {
            occ[p as usize] = m as u8;
        }
        FrogState { pad_of: f.pad_of.clone(), occ, agitated: vec![false; k] }
    }

    pub fn arrangement(&self) -> FrogArrangement {
        FrogArrangement { pad_of: self.pad_of.clone() }
    }

    pub fn pad(&self, frog: usize) -> usize {
        self.pad_of[frog] as usize
    }

    pub fn frog_on(&self, pad: usize) -> usize {
        self.occ[pad] as usize
    }

    pub(crate) fn raw(&self) -> &[u8] {
        &self.pad_of
    }
}

impl Ring {
    pub fn new(w: &Word) -> Result<Self> {
        let k = w.len();
        if k == 0 {
            return Err(Error::EmptyPeriod);
        }
        if k > MAX_PADS {
            return Err(Error::Invalid(format!("word longer than {MAX_PADS}")));
        }
        let pads = w
            .positions()
            .into_iter()
            .map(|v| v.into_iter().map(|p| p as u8).collect())
            .collect();
        Ok(Ring { k, pads })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels_symbol(&self, a: Symbol) -> bool {
        self.pads.get(a as usize).is_some_and(|p| !p.is_empty())
    }

    /// Pokes `a`, reporting every hop. Frogs hop in rank order, and each frog
    /// hops at most once per poke, since a frog is only ever displaced by a
    /// nastier one.
    #[inline]
    pub fn poke(&self, st: &mut FrogState, a: Symbol, mut hop: impl FnMut(Hop)) {
        let k = self.k;
        let pads = match self.pads.get(a as usize) {
            Some(p) if !p.is_empty() => p,
            _ => return,
        };
        let mut first = k;
        for &p in pads {
            let f = st.occ[p as usize] as usize;
            st.agitated[f] = true;
            first = first.min(f);
        }
        for m in first..k {
            if !st.agitated[m] {
                continue;
            }
            st.agitated[m] = false;
            let p = st.pad_of[m] as usize;
            if st.occ[p] as usize == m {
                st.occ[p] = EMPTY;
            }
            let mut q = p;
            let mut d = 0;
            loop {
                q += 1;
                if q == k {
                    q = 0;
                }
                d += 1;
                let o = st.occ[q];
                // EMPTY compares above every rank
                if o as usize > m {
                    if o != EMPTY {
                        st.agitated[o as usize] = true;
                    }
                    st.occ[q] = m as u8;
                    st.pad_of[m] = q as u8;
                    break;
                }
            }
            let over_pred = if m == 0 {
                p + d >= k
            } else {
                let r = (st.pad_of[m - 1] as usize + k - p) % k;
                r >= 1 && r < d
            };
            hop(Hop { frog: m, from: p, to: q, distance: d, over_pred });
        }
    }
}

fn record(st: &FrogState, disp: Vec<u64>, jumps: Vec<u64>) -> TransitionRecord {
    TransitionRecord { new_arrangement: st.arrangement(), displacement: disp, jumps_over_pred: jumps }
}

fn check_size(f: &FrogArrangement, w: &Word) {
    assert_eq!(f.k(), w.len(), "arrangement has {} frogs but W has {} pads", f.k(), w.len());
}

pub fn poke(f: &FrogArrangement, a: Symbol, w: &Word) -> TransitionRecord {
    poke_traced(f, a, w).0
}

pub fn poke_traced(f: &FrogArrangement, a: Symbol, w: &Word) -> (TransitionRecord, Vec<Hop>) {
    check_size(f, w);
    let ring = Ring::new(w).expect("nonempty word");
    let k = ring.k();
    let mut st = FrogState::new(f);
    let mut hops = Vec::new();
    ring.poke(&mut st, a, |h| hops.push(h));
    let mut disp = vec![0; k];
    let mut jumps = vec![0; k];
    for h in &hops {
        disp[h.frog] += h.distance as u64;
        jumps[h.frog] += h.over_pred as u64;
    }
    (record(&st, disp, jumps), hops)
}

/// Cumulative record of poking every symbol of r in order.
pub fn apply_word(f: &FrogArrangement, r: &Word, w: &Word) -> TransitionRecord {
    check_size(f, w);
    let ring = Ring::new(w).expect("nonempty word");
    let k = ring.k();
    let mut st = FrogState::new(f);
    let mut disp = vec![0u64; k];
    let mut jumps = vec![0u64; k];
    for &a in r.symbols() {
        ring.poke(&mut st, a, |h| {
            disp[h.frog] += h.distance as u64;
            jumps[h.frog] += h.over_pred as u64;
        });
    }
    record(&st, disp, jumps)
}

/// Ledges of h_R against W repeated: x_m = D_m(F_empty, R) + m.
pub fn ledges_after(r: &Word, w: &Word) -> KHeight {
    let k = w.len();
    let rec = apply_word(&FrogArrangement::identity(k), r, w);
    let ledges = rec.displacement.iter().enumerate().map(|(m, &d)| d as i64 + m as i64).collect();
    KHeight::new_unchecked(k, ledges)
}
