//! Longest common subsequence lengths.
//!
//! `lcs_dp` is the plain quadratic recurrence and serves as the reference.
//! `lcs_bitparallel` computes the same number 64 columns at a time and is what
//! the experiments use. `lcs_banded` restricts matches to |i - j| <= t.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frogs::ledges_after;
use crate::words::Word;

pub fn lcs_dp(v: &Word, w: &Word) -> usize {
    let (long, short) = if v.len() >= w.len() { (v, w) } else { (w, v) };
    let s = short.symbols();
    let mut row = vec![0u32; s.len() + 1];
    for &c in long.symbols() {
        let mut diag = 0;
        for j in 1..=s.len() {
            let up = row[j];
            row[j] = if s[j - 1] == c { diag + 1 } else { up.max(row[j - 1]) };
            diag = up;
        }
    }
    row[s.len()] as usize
}

/// Bit-vector LCS (Allison-Dix / Hyyro): one pass over v, with the row for w
/// packed into 64-bit words. The LCS is the number of zero bits at the end.
pub fn lcs_bitparallel(v: &Word, w: &Word) -> usize {
    let m = w.len();
    if m == 0 || v.is_empty() {
        return 0;
    }
    let words = m.div_ceil(64);
    let sigma = v.alphabet().size().max(w.alphabet().size());
    let mut masks = vec![0u64; sigma * words];
    for (j, &c) in w.symbols().iter().enumerate() {
        masks[c as usize * words + j / 64] |= 1 << (j % 64);
    }
    let mut row = vec![!0u64; words];
    for &c in v.symbols() {
        let mask = &masks[c as usize * words..(c as usize + 1) * words];
        let mut carry = 0u64;
        for (x, &mk) in row.iter_mut().zip(mask) {
            let u = *x & mk;
            let (s1, c1) = x.overflowing_add(u);
            let (s2, c2) = s1.overflowing_add(carry);
            carry = (c1 | c2) as u64;
            *x = s2 | (*x & !u);
        }
    }
    // padding bits past m never match, so they stay set
    row.iter().map(|x| x.count_zeros() as usize).sum()
}

/// LCS restricted to matched pairs (i, j) with |i - j| <= t.
pub fn lcs_banded(v: &Word, w: &Word, t: i64) -> Result<usize> {
    if t < 0 {
        return Err(Error::NegativeBand);
    }
    let (n, m) = (v.len(), w.len());
    let t = (t as usize).min(n.max(m));
    let (a, b) = (v.symbols(), w.symbols());
    // Row i stores columns i-t ..= i+t at offsets 0 ..= 2t; columns outside
    // 0..=m are never read. Past the right edge of the band a row is flat,
    // and past the left edge a column is flat.
    let width = 2 * t + 1;
    let mut prev = vec![0u32; width + 1];
    let mut cur = vec![0u32; width + 1];
    let last = n.min(m + t);
    for i in 1..=last {
        let lo = i.saturating_sub(t);
        let hi = (i + t).min(m);
        for j in lo..=hi {
            let o = j + t - i;
            if j == 0 {
                cur[o] = 0;
                continue;
            }
            // L[i-1][j] sits at offset o+1 of the previous row, except at the
            // right edge where it equals L[i-1][i-1+t] at offset o.
            let up = if j == i + t { prev[o] } else { prev[o + 1] };
            // L[i][lo-1] equals L[i-1][lo-1], offset 0 of the previous row.
            let left = if j == lo { prev[o] } else { cur[o - 1] };
            cur[o] = if a[i - 1] == b[j - 1] { prev[o] + 1 } else { up.max(left) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    if last == 0 {
        return Ok(0);
    }
    let j = m.min(last + t);
    Ok(prev[j + t - last] as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandSchedule {
    pub t0: usize,
    pub ratio_num: usize,
    pub ratio_den: usize,
    /// Give up (unconfirmed) once the band would exceed this.
    pub max_band: Option<usize>,
}

impl BandSchedule {
    /// T_0 = floor(sqrt(2n)) and T_{i+1} = floor(5 T_i / 2).
    pub fn for_length(n: usize) -> Self {
        BandSchedule { t0: ((2 * n) as f64).sqrt().floor().max(1.0) as usize, ratio_num: 5, ratio_den: 2, max_band: None }
    }

    pub fn next(&self, t: usize) -> usize {
        (t * self.ratio_num / self.ratio_den).max(t + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicResult {
    pub length: usize,
    pub band_used: usize,
    pub confirmed: bool,
}

/// Widens the band until two consecutive runs agree. Once the band covers
/// the longer word the answer is exact, which bounds the loop.
pub fn lcs_heuristic(v: &Word, w: &Word, sched: &BandSchedule) -> HeuristicResult {
    let full = v.len().max(w.len());
    let mut t = sched.t0.min(full);
    let mut prev = lcs_banded(v, w, t as i64).expect("band is non-negative");
    loop {
        if t >= full {
            return HeuristicResult { length: prev, band_used: t, confirmed: true };
        }
        let next = sched.next(t).min(full);
        if sched.max_band.is_some_and(|cap| next > cap) {
            return HeuristicResult { length: prev, band_used: t, confirmed: false };
        }
        let cur = lcs_banded(v, w, next as i64).expect("band is non-negative");
        t = next;
        if cur == prev {
            return HeuristicResult { length: cur, band_used: t, confirmed: true };
        }
        prev = cur;
    }
}

/// LCS(r, W^(x)) in O(|r| k) through the frog dynamics.
pub fn lcs_periodic(r: &Word, w: &Word, x: usize) -> Result<usize> {
    if w.is_empty() {
        return Err(Error::EmptyPeriod);
    }
    Ok(ledges_after(r, w).eval(x as i64) as usize)
}

/// LCS(V, W) - LCS(V1, W1) - LCS(V2, W2) for the half-splits of V and W.
pub fn delta_statistic(v: &Word, w: &Word) -> Result<usize> {
    delta_with(v, w, lcs_bitparallel)
}

pub fn delta_with(v: &Word, w: &Word, lcs: impl Fn(&Word, &Word) -> usize) -> Result<usize> {
    if v.len() != w.len() {
        return Err(Error::Invalid(format!("lengths differ: {} vs {}", v.len(), w.len())));
    }
    let (v1, v2) = v.split_half()?;
    let (w1, w2) = w.split_half()?;
    let whole = lcs(v, w);
    let parts = lcs(&v1, &w1) + lcs(&v2, &w2);
    debug_assert!(whole >= parts);
    Ok(whole - parts)
}
