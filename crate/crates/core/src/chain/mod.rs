//! Exact analysis of the frog dynamics driven by uniform random symbols.
//!
//! The recurrent arrangements form one closed class containing F_empty. Its
//! stationary distribution gives the frog speeds s_1 < ... < s_k, and
//! gamma_W(rho) = rho - (1/k) sum_{s_m <= rho} (rho - s_m). At rho = s_m the
//! square-root correction is tau = sigma_m / (k sqrt(2 pi)), where sigma_m^2
//! is the asymptotic variance per step of frog m's displacement.

mod reduced;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use reduced::{
    difference, enumerate_marrangements, marrangement_step, speeds_reduced, MArrangement, ReducedChain,
};

use crate::error::{Error, Result};
use crate::frogs::{FrogArrangement, FrogState, Ring};
use crate::linalg::{self, UniformChain};
use crate::words::{Alphabet, Word};

/// Tolerance for comparing rho with a float speed.
pub const SPEED_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Approx(f64),
}

impl Scalar {
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => ratio_to_f64(q),
            Scalar::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Approx(_) => None,
        }
    }

    /// Exact equality, or within `SPEED_TOLERANCE` for float values.
    pub fn matches(&self, rho: &BigRational) -> bool {
        match self {
            Scalar::Exact(q) => q == rho,
            Scalar::Approx(x) => (x - ratio_to_f64(rho)).abs() <= SPEED_TOLERANCE,
        }
    }

    fn le(&self, rho: &BigRational) -> bool {
        match self {
            Scalar::Exact(q) => q <= rho,
            Scalar::Approx(x) => *x <= ratio_to_f64(rho) + SPEED_TOLERANCE,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{q}"),
            Scalar::Approx(x) => write!(f, "{x:?}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
            s.parse::<f64>().map(Scalar::Approx).map_err(|e| Error::Parse(e.to_string()))
        } else {
            parse_ratio(s).map(Scalar::Exact)
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn ratio_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // to_f64 gives up on huge parts; scale them down first
        let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000) as usize;
        let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parses "p/q" or an integer.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("expected p/q, got {s:?}"));
    let (p, q) = match s.trim().split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Use exact rationals while |F*| * |alphabet| stays at or below this.
    pub exact_limit: usize,
    /// Refuse to enumerate more arrangements than this.
    pub state_cap: usize,
    /// Largest |F*| * |alphabet| for which sigma uses the dense fundamental
    /// matrix; above it sigma comes from a Poisson equation on F*.
    pub fundamental_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { exact_limit: 5000, state_cap: 1_000_000, fundamental_limit: 2000 }
    }
}

#[derive(Clone, Debug)]
pub struct ChainSolution {
    word: Word,
    alphabet: Alphabet,
    states: Vec<FrogArrangement>,
    chain: UniformChain,
    /// D_m for state i, symbol a at `(i * sigma + a) * k + m`.
    disp: Vec<u8>,
    pi: Option<Vec<f64>>,
    pi_exact: Option<Vec<BigRational>>,
    speeds: Option<Vec<Scalar>>,
}

/// Breadth-first closure of F_empty under every symbol of the alphabet.
pub fn enumerate_recurrent(w: &Word, alphabet: Alphabet) -> Result<ChainSolution> {
    enumerate_capped(w, alphabet, SolveOptions::default().state_cap)
}

pub fn enumerate_capped(w: &Word, alphabet: Alphabet, cap: usize) -> Result<ChainSolution> {
    if !w.is_irreducible()? {
        return Err(Error::Reducible);
    }
    let w = w.clone().with_alphabet(alphabet)?;
    let ring = Ring::new(&w)?;
    let k = w.len();
    let sigma = alphabet.size();
    let start = FrogArrangement::identity(k);
    let mut index: HashMap<Vec<u8>, u32> = HashMap::new();
    index.insert(start.raw().to_vec(), 0);
    let mut states = vec![start];
    let mut succ = Vec::new();
    let mut disp = Vec::new();
    let mut d = vec![0u8; k];
    let mut i = 0;
    while i < states.len() {
        for a in alphabet.symbols() {
            let mut st = FrogState::new(&states[i]);
            d.iter_mut().for_each(|x| *x = 0);
            ring.poke(&mut st, a, |h| d[h.frog] += h.distance as u8);
            let key = st.raw();
            let j = match index.get(key) {
                Some(&j) => j,
                None => {
                    if states.len() >= cap {
                        return Err(Error::TooLarge { states: states.len() + 1, cap });
                    }
                    let j = states.len() as u32;
                    index.insert(key.to_vec(), j);
                    states.push(st.arrangement());
                    j
                }
            };
            succ.push(j);
            disp.extend_from_slice(&d);
        }
        i += 1;
    }
    let chain = UniformChain { n: states.len(), moves: sigma, succ };
    Ok(ChainSolution { word: w, alphabet, states, chain, disp, pi: None, pi_exact: None, speeds: None })
}

impl ChainSolution {
    /// Enumerates F*, solves for the stationary distribution and the speeds.
    pub fn solve(w: &Word, alphabet: Alphabet, opts: &SolveOptions) -> Result<Self> {
        let mut sol = enumerate_capped(w, alphabet, opts.state_cap)?;
        sol.solve_stationary(opts)?;
        sol.speeds = Some(speeds_exact(&sol)?);
        Ok(sol)
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn k(&self) -> usize {
        self.word.len()
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn states(&self) -> &[FrogArrangement] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn successor(&self, state: usize, a: usize) -> usize {
        self.chain.next(state, a)
    }

    pub fn displacement(&self, state: usize, a: usize) -> &[u8] {
        let k = self.k();
        let at = (state * self.alphabet.size() + a) * k;
        &self.disp[at..at + k]
    }

    pub fn is_exact(&self) -> bool {
        self.pi_exact.is_some()
    }

    pub fn stationary_f64(&self) -> Option<&[f64]> {
        self.pi.as_deref()
    }

    pub fn stationary_exact(&self) -> Option<&[BigRational]> {
        self.pi_exact.as_deref()
    }

    pub fn speeds(&self) -> Option<&[Scalar]> {
        self.speeds.as_deref()
    }

    pub fn solve_stationary(&mut self, opts: &SolveOptions) -> Result<()> {
        if self.num_states() * self.alphabet.size() <= opts.exact_limit {
            let exact = linalg::stationary_exact(&self.chain)?;
            self.pi = Some(exact.iter().map(ratio_to_f64).collect());
            self.pi_exact = Some(exact);
        } else {
            self.pi = Some(linalg::stationary_f64(&self.chain)?);
        }
        Ok(())
    }

    fn require_pi(&self) -> Result<&[f64]> {
        self.pi.as_deref().ok_or_else(|| Error::Invalid("stationary distribution not solved".into()))
    }

    fn require_speeds(&self) -> Result<&[Scalar]> {
        self.speeds.as_deref().ok_or_else(|| Error::Invalid("speeds not computed".into()))
    }

    /// Displacement of frog m along every (state, symbol) pair, centered.
    fn centered(&self, m: usize) -> Result<Vec<f64>> {
        let s = self.require_speeds()?[m].to_f64();
        let k = self.k();
        Ok((0..self.chain.n * self.alphabet.size()).map(|e| self.disp[e * k + m] as f64 - s).collect())
    }

    /// sigma_m^2 = f^T Gamma f with Gamma = TZ + (TZ)^T + pihat pihat^T - T,
    /// Z = (I - P + 1 pihat^T)^{-1} on the (state, symbol) chain.
    pub fn sigmas_fundamental(&self) -> Result<Vec<f64>> {
        let pi = self.require_pi()?;
        let sigma = self.alphabet.size();
        let n = self.chain.n * sigma;
        let inv_sigma = 1.0 / sigma as f64;
        let pihat: Vec<f64> = (0..n).map(|e| pi[e / sigma] * inv_sigma).collect();
        let mut a = DMatrix::<f64>::zeros(n, n);
        for e in 0..n {
            let j = self.chain.next(e / sigma, e % sigma);
            for b in 0..sigma {
                a[(e, j * sigma + b)] -= inv_sigma;
            }
            a[(e, e)] += 1.0;
            for f in 0..n {
                a[(e, f)] += pihat[f];
            }
        }
        let k = self.k();
        let mut rhs = DMatrix::<f64>::zeros(n, k);
        for m in 0..k {
            rhs.set_column(m, &DVector::from_vec(self.centered(m)?));
        }
        let zf = a.lu().solve(&rhs).ok_or(Error::Singular)?;
        Ok((0..k)
            .map(|m| {
                let f = rhs.column(m);
                let tz: f64 = (0..n).map(|e| pihat[e] * f[e] * zf[(e, m)]).sum();
                let t: f64 = (0..n).map(|e| pihat[e] * f[e] * f[e]).sum();
                let mean: f64 = (0..n).map(|e| pihat[e] * f[e]).sum();
                (2.0 * tz + mean * mean - t).max(0.0).sqrt()
            })
            .collect())
    }

    /// Same quantity through the Poisson equation (I - Q + 1 pi^T) u = r on
    /// F*, where r(F) averages the centered displacement over symbols:
    /// sigma^2 = E[f^2 + 2 f(F, a) u(Fa)].
    pub fn sigmas_poisson(&self) -> Result<Vec<f64>> {
        let pi = self.require_pi()?;
        let sigma = self.alphabet.size();
        let n = self.chain.n;
        let k = self.k();
        let inv = 1.0 / sigma as f64;
        (0..k)
            .map(|m| {
                let f = self.centered(m)?;
                let r: Vec<f64> = (0..n).map(|i| (0..sigma).map(|a| f[i * sigma + a]).sum::<f64>() * inv).collect();
                let u = linalg::poisson_f64(&self.chain, pi, &r)?;
                let v: f64 = (0..n)
                    .map(|i| {
                        (0..sigma)
                            .map(|a| {
                                let x = f[i * sigma + a];
                                x * x + 2.0 * x * u[self.chain.next(i, a)]
                            })
                            .sum::<f64>()
                            * pi[i]
                            * inv
                    })
                    .sum();
                Ok(v.max(0.0).sqrt())
            })
            .collect()
    }

    pub fn sigmas(&self, opts: &SolveOptions) -> Result<Vec<f64>> {
        if self.chain.n * self.alphabet.size() <= opts.fundamental_limit {
            self.sigmas_fundamental()
        } else {
            self.sigmas_poisson()
        }
    }
}

/// s_m = sum_F pi(F) (1/|alphabet|) sum_a D_m(F, a).
pub fn speeds_exact(sol: &ChainSolution) -> Result<Vec<Scalar>> {
    let k = sol.k();
    let sigma = sol.alphabet.size();
    let totals = |i: usize, m: usize| -> u64 { (0..sigma).map(|a| sol.displacement(i, a)[m] as u64).sum() };
    if let Some(pi) = &sol.pi_exact {
        let scale = ratio(1, sigma as i64);
        Ok((0..k)
            .map(|m| {
                let s: BigRational = pi
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p * BigRational::from_integer(totals(i, m).into()))
                    .sum();
                Scalar::Exact(s * &scale)
            })
            .collect())
    } else {
        let pi = sol.require_pi()?;
        Ok((0..k)
            .map(|m| Scalar::Approx(pi.iter().enumerate().map(|(i, p)| p * totals(i, m) as f64).sum::<f64>() / sigma as f64))
            .collect())
    }
}

/// gamma = rho - (1/k) sum_{s_m <= rho} (rho - s_m).
pub fn gamma(speeds: &[Scalar], k: usize, rho: &BigRational) -> Result<Scalar> {
    if rho.is_negative() {
        return Err(Error::NegativeRho);
    }
    if k == 0 {
        return Err(Error::Invalid("k must be positive".into()));
    }
    let below = speeds.iter().filter(|s| s.le(rho));
    if let Some(exact) = speeds.iter().map(Scalar::exact).collect::<Option<Vec<_>>>() {
        let excess: BigRational = exact.into_iter().filter(|s| *s <= rho).map(|s| rho - s).sum();
        Ok(Scalar::Exact(rho - excess / BigRational::from_integer(k.into())))
    } else {
        let r = ratio_to_f64(rho);
        let excess: f64 = below.map(|s| r - s.to_f64()).sum();
        Ok(Scalar::Approx(r - excess / k as f64))
    }
}

/// tau(rho) = sigma_m / (k sqrt(2 pi)) when rho = s_m, else 0.
pub fn tau(sol: &ChainSolution, rho: &BigRational, opts: &SolveOptions) -> Result<f64> {
    let speeds = sol.require_speeds()?;
    match speeds.iter().position(|s| s.matches(rho)) {
        Some(m) => Ok(sol.sigmas(opts)?[m] / tau_scale(sol.k())),
        None => Ok(0.0),
    }
}

fn tau_scale(k: usize) -> f64 {
    k as f64 * (2.0 * std::f64::consts::PI).sqrt()
}

/// s_i = k(k+1) / (|alphabet| (k+2-i)(k+1-i)) for a word of k distinct symbols.
pub fn speed_closed_form(k: usize, alphabet_size: usize, i: usize) -> Result<BigRational> {
    if i == 0 || i > k {
        return Err(Error::Invalid(format!("frog {i} not in 1..={k}")));
    }
    if alphabet_size < k {
        return Err(Error::Invalid("alphabet smaller than the word".into()));
    }
    let (k, s, i) = (k as i64, alphabet_size as i64, i as i64);
    Ok(ratio(k * (k + 1), s * (k + 2 - i) * (k + 1 - i)))
}

pub fn speeds_closed_form(k: usize, alphabet_size: usize) -> Result<Vec<BigRational>> {
    (1..=k).map(|i| speed_closed_form(k, alphabet_size, i)).collect()
}

/// min over t >= 1 of (k + t^2) / (k (t + 1)), and whether k = r^2 + r - 1.
pub fn gamma_min_form(k: usize) -> Result<(BigRational, bool)> {
    if k == 0 {
        return Err(Error::Invalid("k must be at least 1".into()));
    }
    let ki = k as i64;
    // the expression is convex in t with its minimum below t = k + 1
    let best = (1..=ki + 1).map(|t| ratio(ki + t * t, ki * (t + 1))).min().expect("nonempty range");
    let special = (1..=ki).take_while(|r| r * r + r - 1 <= ki).any(|r| r * r + r - 1 == ki);
    Ok((best, special))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub rho: Scalar,
    pub gamma: Scalar,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub from: Scalar,
    /// None for the final, flat segment.
    pub to: Option<Scalar>,
    pub slope: Scalar,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaCurve {
    pub breakpoints: Vec<Breakpoint>,
    pub segments: Vec<Segment>,
}

impl GammaCurve {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Breakpoints at each speed, with tau from `sigmas` (pass None to leave tau
/// at 0, e.g. when the speeds are estimates).
pub fn gamma_curve(speeds: &[Scalar], k: usize, sigmas: Option<&[f64]>) -> Result<GammaCurve> {
    let mut breakpoints = Vec::with_capacity(speeds.len());
    let mut segments = Vec::with_capacity(speeds.len() + 1);
    let mut from = Scalar::Exact(BigRational::zero());
    for (m, s) in speeds.iter().enumerate() {
        let rho = match s {
            Scalar::Exact(q) => q.clone(),
            Scalar::Approx(x) => BigRational::from_float(*x).ok_or_else(|| Error::Invalid("speed is not finite".into()))?,
        };
        let g = match gamma(speeds, k, &rho)? {
            Scalar::Exact(q) if s.exact().is_none() => Scalar::Approx(ratio_to_f64(&q)),
            g => g,
        };
        let tau = sigmas.map_or(0.0, |sg| sg[m] / tau_scale(k));
        segments.push(Segment { from: from.clone(), to: Some(s.clone()), slope: Scalar::Exact(ratio((k - m) as i64, k as i64)) });
        breakpoints.push(Breakpoint { rho: s.clone(), gamma: g, tau });
        from = s.clone();
    }
    let flat = Scalar::Exact(ratio((k - speeds.len()) as i64, k as i64));
    segments.push(Segment { from, to: None, slope: flat });
    Ok(GammaCurve { breakpoints, segments })
}

impl ChainSolution {
    pub fn gamma(&self, rho: &BigRational) -> Result<Scalar> {
        gamma(self.require_speeds()?, self.k(), rho)
    }

    pub fn tau(&self, rho: &BigRational, opts: &SolveOptions) -> Result<f64> {
        tau(self, rho, opts)
    }

    pub fn curve(&self, opts: &SolveOptions) -> Result<GammaCurve> {
        let sigmas = self.sigmas(opts)?;
        gamma_curve(self.require_speeds()?, self.k(), Some(&sigmas))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(s: &str) -> Word {
        Word::parse(s, None).unwrap()
    }

    fn exact(v: &[Scalar]) -> Vec<BigRational> {
        v.iter().map(|s| s.exact().unwrap().clone()).collect()
    }

    #[test]
    fn two_letter_chain() {
        let w = word("ab");
        let sol = ChainSolution::solve(&w, w.alphabet(), &SolveOptions::default()).unwrap();
        assert_eq!(sol.num_states(), 2);
        assert_eq!(sol.stationary_exact().unwrap(), &[ratio(1, 2), ratio(1, 2)]);
        assert_eq!(exact(sol.speeds().unwrap()), vec![ratio(1, 2), ratio(3, 2)]);
    }

    #[test]
    fn reducible_rejected() {
        let w = word("aa");
        assert_eq!(enumerate_recurrent(&w, w.alphabet()).unwrap_err(), Error::Reducible);
    }

    #[test]
    fn four_letter_speeds() {
        let w = word("1234");
        let sol = ChainSolution::solve(&w, w.alphabet(), &SolveOptions::default()).unwrap();
        assert!(sol.num_states() <= 24);
        assert_eq!(sol.states()[0], FrogArrangement::identity(4));
        assert_eq!(exact(sol.speeds().unwrap()), vec![ratio(1, 4), ratio(5, 12), ratio(5, 6), ratio(5, 2)]);
        assert_eq!(sol.gamma(&ratio(5, 12)).unwrap(), Scalar::Exact(ratio(3, 8)));
        assert_eq!(sol.gamma(&ratio(1, 1)).unwrap(), Scalar::Exact(ratio(5, 8)));
        assert_eq!(sol.gamma(&ratio(0, 1)).unwrap(), Scalar::Exact(ratio(0, 1)));
        assert_eq!(sol.gamma(&ratio(-1, 2)), Err(Error::NegativeRho));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(speeds_closed_form(4, 4).unwrap(), vec![ratio(1, 4), ratio(5, 12), ratio(5, 6), ratio(5, 2)]);
        assert_eq!(speeds_closed_form(2, 2).unwrap(), vec![ratio(1, 2), ratio(3, 2)]);
        assert_eq!(speed_closed_form(7, 9, 1).unwrap(), ratio(1, 9));
        assert!(speed_closed_form(3, 3, 4).is_err());
    }

    #[test]
    fn min_form_examples() {
        assert_eq!(gamma_min_form(4).unwrap(), (ratio(5, 8), false));
        assert_eq!(gamma_min_form(5).unwrap(), (ratio(3, 5), true));
        assert_eq!(gamma_min_form(1).unwrap(), (ratio(1, 1), true));
        assert!(gamma_min_form(0).is_err());
    }

    #[test]
    fn scalar_text_roundtrip() {
        for s in ["5/12", "3", "0.25", "1.0"] {
            let x: Scalar = s.parse().unwrap();
            assert_eq!(x.to_string().parse::<Scalar>().unwrap(), x);
        }
        assert!("1/0".parse::<Scalar>().is_err());
    }
}
