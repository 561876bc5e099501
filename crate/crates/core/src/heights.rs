//! k-heights. A height h satisfies h(x) = x for x <= 0 and has increments in
//! {0, 1}; it is a k-height when `h(x) - h(x - k)` is non-increasing. Such an h
//! is pinned down by its k ledges, the points where that difference drops.
//!
//! Height arrays store h(0), h(1), ..., h(len - 1); past the end the last
//! value repeats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Symbol, Word};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KHeight {
    k: usize,
    ledges: Vec<i64>,
}

impl KHeight {
    pub fn new(k: usize, ledges: Vec<i64>) -> Result<Self> {
        if k == 0 || ledges.len() != k {
            return Err(Error::NotKHeight(format!("need {k} ledges, got {}", ledges.len())));
        }
        if ledges[0] < 0 || ledges.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::NotKHeight("ledges must be non-negative and increasing".into()));
        }
        let mut residues: Vec<i64> = ledges.iter().map(|x| x % k as i64).collect();
        residues.sort_unstable();
        residues.dedup();
        if residues.len() != k {
            return Err(Error::NotKHeight("ledges collide modulo k".into()));
        }
        Ok(KHeight { k, ledges })
    }

    pub(crate) fn new_unchecked(k: usize, ledges: Vec<i64>) -> Self {
        debug_assert!(KHeight::new(k, ledges.clone()).is_ok(), "bad ledges {ledges:?}");
        KHeight { k, ledges }
    }

    /// Height of the empty word: ledges 0, 1, ..., k-1.
    pub fn empty(k: usize) -> Self {
        KHeight { k, ledges: (0..k as i64).collect() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ledges(&self) -> &[i64] {
        &self.ledges
    }

    pub fn eval(&self, x: i64) -> i64 {
        let k = self.k as i64;
        let drop: i64 = self
            .ledges
            .iter()
            .take_while(|&&l| l <= x)
            .map(|&l| (x - l + k - 1) / k)
            .sum();
        x - drop
    }

    /// h(0..=x_k + k); everything after is constant.
    pub fn to_array(&self) -> Vec<i64> {
        let end = self.ledges[self.k - 1] + self.k as i64;
        (0..=end).map(|x| self.eval(x)).collect()
    }
}

fn at(h: &[i64], x: i64) -> i64 {
    if x <= 0 {
        x
    } else {
        h[(x as usize).min(h.len() - 1)]
    }
}

/// Validates a height array and returns its ledges.
pub fn ledges_of(h: &[i64], k: usize) -> Result<KHeight> {
    if k == 0 {
        return Err(Error::NotKHeight("k must be positive".into()));
    }
    if h.first() != Some(&0) {
        return Err(Error::NotKHeight("h(0) must be 0".into()));
    }
    if let Some(x) = h.windows(2).position(|p| !(0..=1).contains(&(p[1] - p[0]))) {
        return Err(Error::NotKHeight(format!("increment at x={} not in {{0,1}}", x + 1)));
    }
    let ki = k as i64;
    let delta = |x: i64| at(h, x) - at(h, x - ki);
    let end = h.len() as i64 + ki;
    let mut ledges = Vec::with_capacity(k);
    for x in 0..end {
        match delta(x) - delta(x + 1) {
            0 => {}
            1 => ledges.push(x),
            _ => return Err(Error::NotKHeight(format!("k-difference increases at x={x}"))),
        }
    }
    KHeight::new(k, ledges)
}

/// One step of the LCS recurrence against U = W repeated: from h_R to h_{Ra}.
/// The result is k entries longer than the input.
pub fn evolve(h: &[i64], a: Symbol, w: &Word) -> Vec<i64> {
    let k = w.len();
    let u = w.symbols();
    let len = h.len() + k;
    let mut out = Vec::with_capacity(len);
    out.push(0);
    for x in 1..len as i64 {
        let v = if u[(x as usize - 1) % k] == a {
            at(h, x - 1) + 1
        } else {
            at(h, x).max(out[x as usize - 1])
        };
        out.push(v);
    }
    out
}

/// h_R as an array, built by iterating `evolve` from the empty word.
pub fn evolve_word(r: &Word, w: &Word) -> Vec<i64> {
    r.symbols().iter().fold(vec![0], |h, &a| evolve(&h, a, w))
}
