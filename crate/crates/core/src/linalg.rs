//! Stationary distributions of chains where every state has the same number of
//! equally likely moves.
//!
//! The exact solver works modulo a stream of 31-bit primes, lifts with the
//! Chinese remainder theorem, recovers fractions by rational reconstruction and
//! only returns once the candidate satisfies the balance equations exactly.

use nalgebra::{DMatrix, DVector};
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct UniformChain {
    pub n: usize,
    pub moves: usize,
    /// `succ[i * moves + a]` is where move a leads from state i.
    pub succ: Vec<u32>,
}

impl UniformChain {
    pub fn next(&self, i: usize, a: usize) -> usize {
        self.succ[i * self.moves + a] as usize
    }

    /// Incoming edges of each state as (source, multiplicity).
    fn predecessors(&self) -> Vec<Vec<(usize, u64)>> {
        let mut pred: Vec<Vec<(usize, u64)>> = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for a in 0..self.moves {
                let j = self.next(i, a);
                match pred[j].iter_mut().find(|e| e.0 == i) {
                    Some(e) => e.1 += 1,
                    None => pred[j].push((i, 1)),
                }
            }
        }
        pred
    }
}

struct Modulus {
    p: u64,
    m: u64,
}

impl Modulus {
    fn new(p: u64) -> Self {
        Modulus { p, m: u64::MAX / p }
    }

    #[inline(always)]
    fn reduce(&self, x: u64) -> u64 {
        let q = ((x as u128 * self.m as u128) >> 64) as u64;
        let mut r = x - q * self.p;
        while r >= self.p {
            r -= self.p;
        }
        r
    }

    fn pow(&self, mut b: u64, mut e: u64) -> u64 {
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.reduce(acc * b);
            }
            b = self.reduce(b * b);
            e >>= 1;
        }
        acc
    }

    fn inv(&self, x: u64) -> u64 {
        self.pow(x, self.p - 2)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1 + (d > 2) as u64;
    }
    true
}

/// Primes below 2^31, descending.
fn primes() -> impl Iterator<Item = u64> {
    (1u64 << 20..1u64 << 31).rev().filter(|&p| p % 2 == 1 && is_prime(p))
}

/// Solves the balance equations modulo p; None when p divides the determinant.
fn solve_mod(chain: &UniformChain, pred: &[Vec<(usize, u64)>], p: u64) -> Option<Vec<u64>> {
    let n = chain.n;
    let md = Modulus::new(p);
    let neg = |x: u64| if x == 0 { 0 } else { p - x };
    // row j: sum_i (c_ij - d [i=j]) x_i = 0, last row replaced by sum x_i = 1
    let mut a = vec![0u64; n * (n + 1)];
    let w = n + 1;
    for j in 0..n - 1 {
        let row = &mut a[j * w..(j + 1) * w];
        for &(i, c) in &pred[j] {
            row[i] = c % p;
        }
        row[j] = (row[j] + neg(chain.moves as u64 % p)) % p;
    }
    for x in &mut a[(n - 1) * w..n * w - 1] {
        *x = 1;
    }
    a[n * w - 1] = 1;

    for col in 0..n {
        let piv = (col..n).find(|&r| a[r * w + col] != 0)?;
        if piv != col {
            for c in 0..w {
                a.swap(piv * w + c, col * w + c);
            }
        }
        let inv = md.inv(a[col * w + col]);
        for c in col..w {
            a[col * w + c] = md.reduce(a[col * w + c] * inv);
        }
        let (top, rest) = a.split_at_mut((col + 1) * w);
        let pivot_row = &top[col * w..];
        let last = (col..w).rev().find(|&c| pivot_row[c] != 0).unwrap_or(col);
        for row in rest.chunks_exact_mut(w) {
            let f = row[col];
            if f == 0 {
                continue;
            }
            let f = p - f;
            for c in col..=last {
                row[c] = md.reduce(row[c] + f * pivot_row[c]);
            }
        }
    }
    // back substitution on the upper-triangular system
    let mut x = vec![0u64; n];
    for r in (0..n).rev() {
        let mut acc = a[r * w + n];
        for c in r + 1..n {
            let v = a[r * w + c];
            if v != 0 {
                acc = md.reduce(acc + (p - v) * x[c]);
            }
        }
        x[r] = acc;
    }
    Some(x)
}

/// Finds r/s = a mod m with |r|, s <= sqrt(m/2).
fn reconstruct(a: &BigInt, m: &BigInt, bound: &BigInt) -> Option<BigRational> {
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while &r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > *bound {
        return None;
    }
    if !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

fn verify(chain: &UniformChain, pred: &[Vec<(usize, u64)>], pi: &[BigRational]) -> bool {
    let den = pi.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let num: Vec<BigInt> = pi.iter().map(|q| q.numer() * (&den / q.denom())).collect();
    if num.iter().any(|x| x.sign() == Sign::Minus) {
        return false;
    }
    if num.iter().sum::<BigInt>() != den {
        return false;
    }
    let d = BigInt::from(chain.moves);
    (0..chain.n).all(|j| {
        let inflow: BigInt = pred[j].iter().map(|&(i, c)| &num[i] * BigInt::from(c)).sum();
        inflow == &num[j] * &d
    })
}

/// Exact stationary distribution; errors if the chain has no unique one.
pub fn stationary_exact(chain: &UniformChain) -> Result<Vec<BigRational>> {
    let n = chain.n;
    if n == 0 {
        return Err(Error::NotErgodic);
    }
    if n == 1 {
        return Ok(vec![BigRational::one()]);
    }
    let pred = chain.predecessors();
    let mut modulus = BigInt::one();
    let mut residues: Vec<BigInt> = vec![BigInt::zero(); n];
    let mut used = 0;
    let mut unlucky = 0;
    for p in primes() {
        let Some(x) = solve_mod(chain, &pred, p) else {
            unlucky += 1;
            if unlucky > 8 {
                return Err(Error::NotErgodic);
            }
            continue;
        };
        let pb = BigInt::from(p);
        let md = Modulus::new(p);
        let minv = md.inv((&modulus % &pb).to_u64_digits().1.first().copied().unwrap_or(0));
        for (r, &xi) in residues.iter_mut().zip(&x) {
            let cur = (&*r % &pb).to_u64_digits().1.first().copied().unwrap_or(0);
            let diff = (xi + p - cur) % p;
            let t = md.reduce(diff * minv);
            *r += &modulus * BigInt::from(t);
        }
        modulus *= &pb;
        used += 1;
        if used < 2 {
            continue;
        }
        let bound = (&modulus / 2u32).sqrt();
        let cand: Option<Vec<BigRational>> =
            residues.iter().map(|r| reconstruct(r, &modulus, &bound)).collect();
        if let Some(pi) = cand {
            if verify(chain, &pred, &pi) {
                return Ok(pi);
            }
        }
        if used > 400 {
            return Err(Error::NotErgodic);
        }
    }
    Err(Error::NotErgodic)
}

/// Dense LU up to this many states, power iteration beyond.
pub const DENSE_LIMIT: usize = 3000;

pub fn stationary_f64(chain: &UniformChain) -> Result<Vec<f64>> {
    let n = chain.n;
    if n == 0 {
        return Err(Error::NotErgodic);
    }
    let pi = if n <= DENSE_LIMIT {
        let d = chain.moves as f64;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for m in 0..chain.moves {
                a[(chain.next(i, m), i)] += 1.0 / d;
            }
            a[(i, i)] -= 1.0;
        }
        for i in 0..n {
            a[(n - 1, i)] = 1.0;
        }
        let mut b = DVector::<f64>::zeros(n);
        b[n - 1] = 1.0;
        a.lu().solve(&b).ok_or(Error::NotErgodic)?.iter().copied().collect::<Vec<_>>()
    } else {
        power_iteration(chain)?
    };
    if pi.iter().any(|&x| !x.is_finite() || x < -1e-9) {
        return Err(Error::NotErgodic);
    }
    let s: f64 = pi.iter().map(|x| x.max(0.0)).sum();
    Ok(pi.iter().map(|x| x.max(0.0) / s).collect())
}

fn power_iteration(chain: &UniformChain) -> Result<Vec<f64>> {
    let n = chain.n;
    let d = chain.moves as f64;
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..200_000 {
        next.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            let share = pi[i] / d;
            for m in 0..chain.moves {
                next[chain.next(i, m)] += share;
            }
        }
        // half-lazy step: same fixed point, no periodicity trouble
        let mut change = 0.0;
        for (p, q) in pi.iter_mut().zip(&next) {
            let v = 0.5 * (*p + q);
            change += (v - *p).abs();
            *p = v;
        }
        if change < 1e-15 {
            return Ok(pi);
        }
    }
    Err(Error::NotErgodic)
}

/// Solves (I - Q + 1 pi^T) u = r for the move-averaged kernel Q.
pub fn poisson_f64(chain: &UniformChain, pi: &[f64], r: &[f64]) -> Result<Vec<f64>> {
    let n = chain.n;
    let d = chain.moves as f64;
    if n <= DENSE_LIMIT {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            a[(i, i)] += 1.0;
            for m in 0..chain.moves {
                a[(i, chain.next(i, m))] -= 1.0 / d;
            }
            for j in 0..n {
                a[(i, j)] += pi[j];
            }
        }
        let b = DVector::from_column_slice(r);
        return Ok(a.lu().solve(&b).ok_or(Error::Singular)?.iter().copied().collect());
    }
    // u = sum_t Q^t r, with r centered under pi
    let mean: f64 = pi.iter().zip(r).map(|(p, x)| p * x).sum();
    let rc: Vec<f64> = r.iter().map(|x| x - mean).collect();
    let mut u = rc.clone();
    for _ in 0..1_000_000 {
        let mut next: Vec<f64> = (0..n)
            .map(|i| rc[i] + (0..chain.moves).map(|m| u[chain.next(i, m)]).sum::<f64>() / d)
            .collect();
        let shift: f64 = pi.iter().zip(&next).map(|(p, x)| p * x).sum();
        next.iter_mut().for_each(|x| *x -= shift);
        let change: f64 = next.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        u = next;
        if change < 1e-13 {
            return Ok(u);
        }
    }
    Err(Error::Singular)
}
