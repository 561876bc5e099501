//! The signed-frog chain P(a, b): a positive and b negative frogs on Z/kZ.
//!
//! A pad holds at most one frog of each sign. Poking a frog makes it hop one
//! pad forward; landing on a frog of the same sign passes the agitation on,
//! and a negative frog landing on a positive one does too. A positive frog
//! poked while sharing its pad with a negative one stays put.
//!
//! The coupled run ties P(m+1, m) to the frog dynamics of W = 0 1 ... k-1:
//! the negative frogs track the m nastiest frogs and the optimistic positive
//! frog tracks frog m.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frogs::{FrogArrangement, FrogState, Ring};
use crate::words::Word;

pub const MAX_K: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedFrog {
    pub sign: Sign,
    pub pad: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedState {
    k: usize,
    pos: u64,
    neg: u64,
}

fn mask(k: usize, pads: &[usize]) -> Result<u64> {
    let mut m = 0u64;
    for &p in pads {
        if p >= k || m >> p & 1 == 1 {
            return Err(Error::Invalid(format!("bad pad set {pads:?} for k={k}")));
        }
        m |= 1 << p;
    }
    Ok(m)
}

fn bits(k: usize, m: u64) -> Vec<usize> {
    (0..k).filter(|&p| m >> p & 1 == 1).collect()
}

impl SignedState {
    pub fn new(k: usize, positives: &[usize], negatives: &[usize]) -> Result<Self> {
        if k == 0 || k > MAX_K {
            return Err(Error::Invalid(format!("ring size {k} not in 1..={MAX_K}")));
        }
        Ok(SignedState { k, pos: mask(k, positives)?, neg: mask(k, negatives)? })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn positives(&self) -> Vec<usize> {
        bits(self.k, self.pos)
    }

    pub fn negatives(&self) -> Vec<usize> {
        bits(self.k, self.neg)
    }

    pub fn a(&self) -> usize {
        self.pos.count_ones() as usize
    }

    pub fn b(&self) -> usize {
        self.neg.count_ones() as usize
    }

    pub fn frogs(&self) -> Vec<SignedFrog> {
        let p = self.positives().into_iter().map(|pad| SignedFrog { sign: Sign::Pos, pad });
        let n = self.negatives().into_iter().map(|pad| SignedFrog { sign: Sign::Neg, pad });
        p.chain(n).collect()
    }

    /// Canonical labeling: i+ on the i-th smallest positive pad, likewise for
    /// negatives.
    pub fn lift(&self, frog: SignedFrog) -> Result<LabeledConfig> {
        let (pos, neg) = (self.positives(), self.negatives());
        let list = if frog.sign == Sign::Pos { &pos } else { &neg };
        let i = list
            .iter()
            .position(|&p| p == frog.pad)
            .ok_or_else(|| Error::Invalid(format!("no {:?} frog on pad {}", frog.sign, frog.pad)))?;
        let focus = if frog.sign == Sign::Pos { i } else { pos.len() + i };
        let gamma = pos.iter().chain(&neg).map(|&p| p as u8).collect();
        Ok(LabeledConfig { k: self.k, a: pos.len(), gamma, focus, phase: Phase::Begin })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    Begin,
    Trans,
    End,
}

/// Labeled signed frogs: entries `0..a` of `gamma` are 1+..a+, the rest are
/// 1-..b-. `focus` indexes the distinguished frog.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabeledConfig {
    pub k: usize,
    pub a: usize,
    pub gamma: Vec<u8>,
    pub focus: usize,
    pub phase: Phase,
}

impl LabeledConfig {
    pub fn b(&self) -> usize {
        self.gamma.len() - self.a
    }

    fn is_pos(&self, y: usize) -> bool {
        y < self.a
    }

    fn valid_without(&self, skip: Option<usize>) -> bool {
        let mut seen = [0u64; 2];
        for (i, &p) in self.gamma.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            let s = &mut seen[!self.is_pos(i) as usize];
            if *s >> p & 1 == 1 {
                return false;
            }
            *s |= 1 << p;
        }
        true
    }

    pub fn is_valid_arrangement(&self) -> bool {
        self.valid_without(None)
    }

    /// Membership in the configuration space for the current phase.
    pub fn is_member(&self) -> bool {
        if self.focus >= self.gamma.len() || self.gamma.iter().any(|&p| p as usize >= self.k) {
            return false;
        }
        match self.phase {
            Phase::Begin | Phase::End => self.is_valid_arrangement(),
            Phase::Trans => {
                let valid = self.is_valid_arrangement();
                (!valid && self.valid_without(Some(self.focus)))
                    || (valid && self.is_pos(self.focus) && self.partner(|z| !self.is_pos(z)).is_some())
            }
        }
    }

    /// Another frog on the focus pad satisfying `pred`.
    fn partner(&self, pred: impl Fn(usize) -> bool) -> Option<usize> {
        let y = self.focus;
        (0..self.gamma.len()).find(|&z| z != y && self.gamma[z] == self.gamma[y] && pred(z))
    }

    pub fn project(&self) -> SignedState {
        let a = self.a;
        let pos = self.gamma[..a].iter().fold(0u64, |m, &p| m | 1 << p);
        let neg = self.gamma[a..].iter().fold(0u64, |m, &p| m | 1 << p);
        SignedState { k: self.k, pos, neg }
    }
}

/// One intermediate step of a poke.
pub fn t_step(c: &LabeledConfig) -> Result<LabeledConfig> {
    if c.phase == Phase::End {
        return Err(Error::Invalid("t_step called at phase end".into()));
    }
    let y = c.focus;
    if c.phase == Phase::Begin && c.is_pos(y) {
        if let Some(z) = c.partner(|z| !c.is_pos(z)) {
            return Ok(LabeledConfig { focus: z, phase: Phase::End, ..c.clone() });
        }
    }
    let mut next = c.clone();
    next.gamma[y] = ((c.gamma[y] as usize + 1) % c.k) as u8;
    let same = next.partner(|z| c.is_pos(z) == c.is_pos(y));
    let pushed = if c.is_pos(y) { None } else { next.partner(|z| c.is_pos(z)) };
    match same.or(pushed) {
        Some(z) => {
            next.focus = z;
            next.phase = Phase::Trans;
        }
        None => next.phase = Phase::End,
    }
    Ok(next)
}

/// Reverses the ring and swaps signs, taking P(a, b) configurations to
/// P(b, a) ones: i+ at pad x becomes i- at pad -x and vice versa.
pub fn r_map(c: &LabeledConfig) -> LabeledConfig {
    let (a, b, k) = (c.a, c.b(), c.k);
    let flip = |p: u8| ((k - p as usize) % k) as u8;
    let mut gamma = Vec::with_capacity(a + b);
    gamma.extend(c.gamma[a..].iter().map(|&p| flip(p)));
    gamma.extend(c.gamma[..a].iter().map(|&p| flip(p)));
    let relabel = |y: usize| if y < a { b + y } else { y - a };
    let (focus, phase) = match c.phase {
        Phase::Begin => (relabel(c.focus), Phase::End),
        Phase::End => (relabel(c.focus), Phase::Begin),
        Phase::Trans => {
            let same = c.partner(|z| c.is_pos(z) == c.is_pos(c.focus));
            let other = if c.is_pos(c.focus) { c.partner(|z| !c.is_pos(z)) } else { None };
            let z = same.or(other).expect("transient configuration has a partner");
            (relabel(z), Phase::Trans)
        }
    };
    LabeledConfig { k, a: b, gamma, focus, phase }
}

/// Iterates `t_step` from a begin configuration to the end.
pub fn run_to_end(c: &LabeledConfig) -> Result<LabeledConfig> {
    let mut cur = c.clone();
    // every hop moves some frog forward, and a poke moves each frog less
    // than a full lap
    let limit = 4 * c.k * c.gamma.len() + 4;
    for _ in 0..limit {
        if cur.phase == Phase::End {
            return Ok(cur);
        }
        cur = t_step(&cur)?;
    }
    Err(Error::Invalid("poke did not settle".into()))
}

pub fn poke_signed(s: &SignedState, frog: SignedFrog) -> Result<SignedState> {
    Ok(run_to_end(&s.lift(frog)?)?.project())
}

/// The unique pad from which every cyclic partial sum of
/// 1[in S+] - 1[in S-] is positive. Needs |S+| = |S-| + 1.
pub fn optimistic_frog(s: &SignedState) -> Result<usize> {
    if s.a() != s.b() + 1 {
        return Err(Error::Invalid(format!("need |S+| = |S-| + 1, got {} and {}", s.a(), s.b())));
    }
    let k = s.k;
    let step = |i: usize| (s.pos >> i & 1) as i64 - (s.neg >> i & 1) as i64;
    (0..k)
        .find(|&x| {
            let mut sum = 0;
            (0..k).all(|j| {
                sum += step((x + j) % k);
                sum > 0
            })
        })
        .ok_or_else(|| Error::Invalid("no optimistic frog".into()))
}

/// Every configuration outside the end phase, for exhaustive checks.
pub fn enumerate_non_end(k: usize, a: usize, b: usize) -> Vec<LabeledConfig> {
    let n = a + b;
    let total = k.pow(n as u32);
    let mut out = Vec::new();
    let mut gamma = vec![0u8; n];
    for code in 0..total {
        let mut c = code;
        for g in gamma.iter_mut() {
            *g = (c % k) as u8;
            c /= k;
        }
        for focus in 0..n {
            for phase in [Phase::Begin, Phase::Trans] {
                let cfg = LabeledConfig { k, a, gamma: gamma.clone(), focus, phase };
                if cfg.is_member() {
                    out.push(cfg);
                }
            }
        }
    }
    out
}

/// All states of P(a, b) on Z/kZ.
pub fn all_states(k: usize, a: usize, b: usize) -> Vec<SignedState> {
    let subsets = |size: usize| (0u64..1 << k).filter(move |m| m.count_ones() as usize == size);
    let mut out = Vec::new();
    for pos in subsets(a) {
        for neg in subsets(b) {
            out.push(SignedState { k, pos, neg });
        }
    }
    out
}

/// In- and out-degree (with multiplicity) of every state of P(a, b).
pub fn degrees(k: usize, a: usize, b: usize) -> Result<Vec<(SignedState, usize, usize)>> {
    let states = all_states(k, a, b);
    let mut indeg: HashMap<SignedState, usize> = states.iter().map(|&s| (s, 0)).collect();
    let mut outdeg = Vec::with_capacity(states.len());
    for s in &states {
        let frogs = s.frogs();
        for &f in &frogs {
            *indeg.get_mut(&poke_signed(s, f)?).expect("closed state space") += 1;
        }
        outdeg.push(frogs.len());
    }
    Ok(states.iter().zip(outdeg).map(|(s, o)| (*s, indeg[s], o)).collect())
}

/// max(0, 1 - (2m+1)/k).
pub fn lazy_probability(k: usize, m: usize) -> BigRational {
    let q = BigRational::one() - BigRational::new(BigInt::from(2 * m + 1), BigInt::from(k));
    if q < BigRational::zero() {
        BigRational::zero()
    } else {
        q
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoupledRun {
    pub k: usize,
    pub m: usize,
    pub steps: u64,
    pub lazy_steps: u64,
    /// (pad of frog m, pad set of frogs 0..m as a bit mask) -> visits.
    pub counts: BTreeMap<(usize, u64), u64>,
}

/// Runs the lazy P(m+1, m) chain in lockstep with the frog dynamics of
/// W = 0 1 ... k-1 over max(k, 2m+1) letters, checking after every step that
/// the two stay compatible.
pub fn coupled_run(k: usize, m: usize, steps: u64, seed: u64) -> Result<CoupledRun> {
    if m < 1 || m + 2 > k || k > MAX_K {
        return Err(Error::Invalid(format!("need 1 <= m <= k-2, got k={k}, m={m}")));
    }
    let letters = k.max(2 * m + 1);
    let w = Word::from_codes((0..k as u8).collect());
    let ring = Ring::new(&w)?;
    let mut frogs = FrogState::new(&FrogArrangement::identity(k));
    let minus: Vec<usize> = (0..m).collect();
    let plus: Vec<usize> = (0..=m).collect();
    let mut s = SignedState::new(k, &plus, &minus)?;
    let lazy = (letters - (2 * m + 1)) as f64 / letters as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    let mut lazy_steps = 0;
    let free_letter = |frogs: &FrogState, rng: &mut ChaCha8Rng| loop {
        let a = rng.gen_range(0..letters);
        if !(0..=m).any(|f| frogs.pad(f) == a) {
            break a;
        }
    };
    for step in 0..steps {
        let opt = optimistic_frog(&s)?;
        let letter = if rng.gen::<f64>() < lazy {
            lazy_steps += 1;
            free_letter(&frogs, &mut rng)
        } else {
            let list = s.frogs();
            let f = list[rng.gen_range(0..list.len())];
            let tracked = f.sign == Sign::Neg || f.pad == opt;
            s = poke_signed(&s, f)?;
            if tracked {
                f.pad
            } else {
                free_letter(&frogs, &mut rng)
            }
        };
        ring.poke(&mut frogs, letter as u8, |_| {});
        let set = (0..m).fold(0u64, |acc, f| acc | 1 << frogs.pad(f));
        if optimistic_frog(&s)? != frogs.pad(m) || set != s.neg {
            return Err(Error::Invalid(format!("coupling broke at step {step}")));
        }
        *counts.entry((frogs.pad(m), set)).or_insert(0) += 1;
    }
    Ok(CoupledRun { k, m, steps, lazy_steps, counts })
}

impl CoupledRun {
    /// Rows `position(s),count,frequency`; positions read `pad;set`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("position(s),count,frequency\n");
        for (&(pad, set), &c) in &self.counts {
            let set: Vec<String> = bits(self.k, set).iter().map(|p| p.to_string()).collect();
            out.push_str(&format!("{pad};{},{c},{}\n", set.join(" "), c as f64 / self.steps as f64));
        }
        out
    }

    /// Largest total-variation distance between the empirical law of frog
    /// m's pad given the set of frogs 0..m and the exact conditional law.
    pub fn max_conditional_tv(&self) -> Result<f64> {
        let mut by_set: BTreeMap<u64, Vec<(usize, u64)>> = BTreeMap::new();
        for (&(pad, set), &c) in &self.counts {
            by_set.entry(set).or_default().push((pad, c));
        }
        let mut worst: f64 = 0.0;
        for (&set, rows) in &by_set {
            let total: u64 = rows.iter().map(|r| r.1).sum();
            let minus = bits(self.k, set);
            let mut tv = 0.0;
            for pad in (0..self.k).filter(|p| !minus.contains(p)) {
                let seen = rows.iter().find(|r| r.0 == pad).map_or(0, |r| r.1);
                let exact = crate::chain::ratio_to_f64(&margins_conditional(self.k, self.m, &minus, pad)?);
                tv += (seen as f64 / total as f64 - exact).abs();
            }
            worst = worst.max(tv / 2.0);
        }
        Ok(worst)
    }

    /// Empirical law of the set of frogs 0..m.
    pub fn set_frequencies(&self) -> BTreeMap<u64, u64> {
        let mut out = BTreeMap::new();
        for (&(_, set), &c) in &self.counts {
            *out.entry(set).or_insert(0) += c;
        }
        out
    }
}

fn binomials(n: usize) -> Vec<Vec<BigInt>> {
    let mut t = vec![vec![BigInt::zero(); n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = BigInt::one();
        for j in 1..=i {
            t[i][j] = &t[i - 1][j - 1] + &t[i - 1][j];
        }
    }
    t
}

fn check_positions(k: usize, m: usize, l: &[i64]) -> Result<()> {
    if l.len() != m + 1 || m + 1 > k {
        return Err(Error::Invalid(format!("need {} positions with m+1 <= k", m + 1)));
    }
    if l.windows(2).any(|p| p[0] <= p[1]) || l[0] >= l[m] + k as i64 {
        return Err(Error::Invalid(format!("positions {l:?} must decrease within one lap")));
    }
    Ok(())
}

/// P[frog m on l_{m+1} | frogs 0..m on {l_1, ..., l_m}] for W = 0 1 ... k-1:
/// (1 / C(k, m+1)) times the sum over a_1..a_m >= 0 with
/// a_1 + ... + a_j <= j and total m of prod C(l_i - l_{i+1}, a_i).
/// `positions` lists l_1 > ... > l_{m+1} with l_1 < l_{m+1} + k.
pub fn margins_formula(k: usize, m: usize, positions: &[i64]) -> Result<BigRational> {
    check_positions(k, m, positions)?;
    let c = binomials(k);
    let gaps: Vec<usize> = positions.windows(2).map(|p| (p[0] - p[1]) as usize).collect();
    fn walk(j: usize, used: usize, m: usize, gaps: &[usize], c: &[Vec<BigInt>], acc: &BigInt, out: &mut BigInt) {
        if j == m {
            if used == m {
                *out += acc;
            }
            return;
        }
        // a_{j+1} may bring the prefix sum up to j+1
        for a in 0..=(j + 1 - used).min(gaps[j]) {
            walk(j + 1, used + a, m, gaps, c, &(acc * &c[gaps[j]][a]), out);
        }
    }
    let mut total = BigInt::zero();
    walk(0, 0, m, &gaps, &c, &BigInt::one(), &mut total);
    Ok(BigRational::new(total, c[k][m + 1].clone()))
}

/// Same probability by counting S+ whose optimistic frog sits on l_{m+1}.
pub fn margins_bruteforce(k: usize, m: usize, positions: &[i64]) -> Result<BigRational> {
    check_positions(k, m, positions)?;
    if k > MAX_K {
        return Err(Error::Invalid("ring too large".into()));
    }
    let ki = k as i64;
    let minus: Vec<usize> = positions[..m].iter().map(|l| l.rem_euclid(ki) as usize).collect();
    let target = positions[m].rem_euclid(ki) as usize;
    let mut hits = 0u64;
    for pos in (0u64..1 << k).filter(|x| x.count_ones() as usize == m + 1) {
        let s = SignedState { k, pos, neg: mask(k, &minus)? };
        if optimistic_frog(&s)? == target {
            hits += 1;
        }
    }
    Ok(BigRational::new(BigInt::from(hits), binomials(k)[k][m + 1].clone()))
}

/// Orders a pad set and a free pad into window positions and evaluates
/// the formula.
pub fn margins_conditional(k: usize, m: usize, minus: &[usize], pad: usize) -> Result<BigRational> {
    if minus.len() != m || minus.contains(&pad) || pad >= k {
        return Err(Error::Invalid("pad must lie outside a set of size m".into()));
    }
    let mut offsets: Vec<i64> = minus.iter().map(|&p| ((p + k - pad) % k) as i64).collect();
    offsets.sort_unstable_by(|a, b| b.cmp(a));
    let mut positions: Vec<i64> = offsets.iter().map(|d| pad as i64 + d).collect();
    positions.push(pad as i64);
    margins_formula(k, m, &positions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn positive_on_shared_pad_calms_down() {
        let c = LabeledConfig { k: 2, a: 1, gamma: vec![0, 0], focus: 0, phase: Phase::Begin };
        let t = t_step(&c).unwrap();
        assert_eq!(t, LabeledConfig { focus: 1, phase: Phase::End, ..c.clone() });
        let s = SignedState::new(2, &[0], &[0]).unwrap();
        assert_eq!(poke_signed(&s, SignedFrog { sign: Sign::Pos, pad: 0 }).unwrap(), s);
    }

    #[test]
    fn lone_negative_advances() {
        let s = SignedState::new(4, &[], &[2]).unwrap();
        let t = poke_signed(&s, SignedFrog { sign: Sign::Neg, pad: 2 }).unwrap();
        assert_eq!(t.negatives(), vec![3]);
        let s = SignedState::new(3, &[1], &[]).unwrap();
        assert_eq!(poke_signed(&s, SignedFrog { sign: Sign::Pos, pad: 1 }).unwrap().positives(), vec![2]);
    }

    #[test]
    fn four_four_example() {
        let s = SignedState::new(5, &[0, 1, 2, 3], &[0, 1, 3, 4]).unwrap();
        let t = poke_signed(&s, SignedFrog { sign: Sign::Neg, pad: 0 }).unwrap();
        assert_eq!(t.positives(), vec![0, 1, 3, 4]);
        assert_eq!(t.negatives(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn t_step_at_end_errors() {
        let c = LabeledConfig { k: 3, a: 1, gamma: vec![0], focus: 0, phase: Phase::End };
        assert!(t_step(&c).is_err());
    }

    #[test]
    fn r_map_examples() {
        let c = LabeledConfig { k: 5, a: 2, gamma: vec![0, 3, 1], focus: 1, phase: Phase::Begin };
        let r = r_map(&c);
        assert_eq!(r.phase, Phase::End);
        assert_eq!(r.a, 1);
        assert_eq!(r.gamma, vec![4, 0, 2]);
        assert_eq!(r_map(&r), c);
        // i+ sharing with j- in transit: focus moves to j+
        let c = LabeledConfig { k: 5, a: 2, gamma: vec![0, 3, 3], focus: 1, phase: Phase::Trans };
        assert!(c.is_member());
        let r = r_map(&c);
        assert_eq!(r.focus, 0);
        assert!(r.focus < r.a);
    }

    #[test]
    fn optimistic_examples() {
        let s = SignedState::new(4, &[0], &[]).unwrap();
        assert_eq!(optimistic_frog(&s).unwrap(), 0);
        let s = SignedState::new(3, &[0, 2], &[1]).unwrap();
        assert_eq!(optimistic_frog(&s).unwrap(), 2);
        let s = SignedState::new(4, &[0, 1, 3], &[2, 3]).unwrap();
        let x = optimistic_frog(&s).unwrap();
        assert_eq!(x, 0);
        assert!(optimistic_frog(&SignedState::new(3, &[0], &[1]).unwrap()).is_err());
    }

    #[test]
    fn margins_examples() {
        for l in 0..5 {
            assert_eq!(margins_formula(5, 0, &[l]).unwrap(), q(1, 5));
            assert_eq!(margins_bruteforce(5, 0, &[l]).unwrap(), q(1, 5));
        }
        assert_eq!(margins_formula(2, 1, &[1, 0]).unwrap(), q(1, 1));
        assert_eq!(margins_formula(4, 1, &[2, 0]).unwrap(), q(1, 3));
        let total: BigRational = (1..=3).map(|d| margins_formula(4, 1, &[d, 0]).unwrap()).sum();
        assert_eq!(total, q(1, 1));
        assert!(margins_formula(4, 1, &[0, 2]).is_err());
        assert!(margins_formula(4, 1, &[4, 0]).is_err());
    }

    #[test]
    fn laziness() {
        assert_eq!(lazy_probability(5, 2), q(0, 1));
        assert_eq!(lazy_probability(7, 2), q(2, 7));
        assert_eq!(lazy_probability(3, 2), q(0, 1));
    }
}
