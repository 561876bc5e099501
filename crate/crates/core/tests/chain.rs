use lilypad::chain::{
    enumerate_marrangements, enumerate_recurrent, gamma_curve, gamma_min_form, parse_ratio, speeds_closed_form,
    speeds_reduced, SolveOptions,
};
use lilypad::frogs::Ring;
use lilypad::montecarlo::{displacements, estimate_speeds, run_trials, sample_word, ExperimentConfig};
use lilypad::{Alphabet, BigRational, ChainSolution, Error, GammaCurve, Scalar, Word};

fn q(s: &str) -> BigRational {
    parse_ratio(s).unwrap()
}

fn distinct(k: usize) -> Word {
    Word::from_codes((0..k as u8).collect())
}

fn solve(w: &Word, a: Alphabet) -> ChainSolution {
    ChainSolution::solve(w, a, &SolveOptions::default()).unwrap()
}

fn exact(v: &[Scalar]) -> Vec<BigRational> {
    v.iter().map(|s| s.exact().expect("exact speeds").clone()).collect()
}

fn irreducible_words(max: usize, q: usize) -> Vec<Word> {
    let a = Alphabet::new(q).unwrap();
    let mut out = Vec::new();
    for len in 1..=max {
        for code in 0..q.pow(len as u32) {
            let v = (0..len).map(|i| (code / q.pow(i as u32) % q) as u8).collect();
            let w = Word::new(v, a).unwrap();
            if w.is_irreducible().unwrap() {
                out.push(w);
            }
        }
    }
    out
}

#[test]
fn closed_form_for_distinct_symbols() {
    for k in 1..=5 {
        for extra in 0..=1 {
            let a = Alphabet::new(k + extra).unwrap();
            let sol = solve(&distinct(k), a);
            assert_eq!(exact(sol.speeds().unwrap()), speeds_closed_form(k, k + extra).unwrap(), "k={k}");
        }
    }
}

#[test]
fn stationary_basics() {
    for w in irreducible_words(4, 3) {
        let a = Alphabet::new(3).unwrap();
        let sol = solve(&w, a);
        assert_eq!(sol.states()[0], lilypad::FrogArrangement::identity(w.len()));
        let pi = sol.stationary_exact().unwrap();
        assert_eq!(pi.iter().sum::<BigRational>(), q("1"));
        let mut next = vec![q("0"); pi.len()];
        for (i, p) in pi.iter().enumerate() {
            for s in 0..3 {
                next[sol.successor(i, s)] += p / BigRational::from_integer(3.into());
            }
        }
        assert_eq!(&next[..], pi);
        assert!(pi.iter().all(|p| *p > q("0")));
        let s = exact(sol.speeds().unwrap());
        assert_eq!(s[0], q("1/3"), "W={w}");
        assert!(s.windows(2).all(|p| p[0] < p[1]), "W={w}: {s:?}");
    }
}

#[test]
fn reduced_sums_match_full_chain() {
    let opts = SolveOptions::default();
    for w in irreducible_words(5, 3) {
        let a = Alphabet::new(3).unwrap();
        let s = exact(solve(&w, a).speeds().unwrap());
        let partial = speeds_reduced(&w, a, w.len(), &opts).unwrap();
        let mut acc = q("0");
        for (m, p) in partial.iter().enumerate() {
            acc += &s[m];
            assert_eq!(p.exact().unwrap(), &acc, "W={w} m={m}");
        }
    }
}

#[test]
fn reduced_float_path() {
    let opts = SolveOptions { exact_limit: 0, ..SolveOptions::default() };
    let w = Word::parse("aabab", None).unwrap();
    let partial = speeds_reduced(&w, w.alphabet(), 5, &opts).unwrap();
    let s = exact(solve(&w, w.alphabet()).speeds().unwrap());
    let mut acc = 0.0;
    for (m, p) in partial.iter().enumerate() {
        acc += lilypad::chain::ratio_to_f64(&s[m]);
        assert!((p.to_f64() - acc).abs() < 1e-10);
    }
}

#[test]
fn marrangements_uniform_and_regular() {
    for k in 1..=5 {
        let w = distinct(k);
        for m in 1..=k {
            let rc = enumerate_marrangements(&w, w.alphabet(), m, 1 << 20).unwrap();
            assert!(rc.in_degrees().iter().all(|&d| d == k));
            let pi = lilypad::linalg::stationary_exact(&rc.chain).unwrap();
            assert!(pi.iter().all(|p| *p == pi[0]));
            assert_eq!(pi.len(), binomial(k, m));
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn reducible_words_rejected() {
    let w = Word::parse("aa", None).unwrap();
    assert!(matches!(enumerate_recurrent(&w, w.alphabet()), Err(Error::Reducible)));
    assert!(matches!(speeds_reduced(&w, w.alphabet(), 1, &SolveOptions::default()), Err(Error::Reducible)));
}

#[test]
fn state_cap_enforced() {
    let w = distinct(6);
    let opts = SolveOptions { state_cap: 10, ..SolveOptions::default() };
    assert!(matches!(ChainSolution::solve(&w, w.alphabet(), &opts), Err(Error::TooLarge { .. })));
}

#[test]
fn gamma_examples() {
    let sol = solve(&distinct(4), Alphabet::new(4).unwrap());
    assert_eq!(sol.gamma(&q("5/12")).unwrap(), Scalar::Exact(q("3/8")));
    assert_eq!(sol.gamma(&q("1")).unwrap(), Scalar::Exact(q("5/8")));
    assert_eq!(sol.gamma(&q("0")).unwrap(), Scalar::Exact(q("0")));
    assert!(sol.gamma(&q("-1")).is_err());
    let opts = SolveOptions::default();
    assert_eq!(sol.tau(&q("1"), &opts).unwrap(), 0.0);
    let t = sol.tau(&q("1/4"), &opts).unwrap();
    assert!((t - (3.0 / (512.0 * std::f64::consts::PI)).sqrt()).abs() < 1e-10);
}

#[test]
fn curve_is_concave_and_serializes() {
    for w in irreducible_words(4, 2) {
        let sol = solve(&w, w.alphabet());
        let curve = sol.curve(&SolveOptions::default()).unwrap();
        let slopes: Vec<BigRational> = curve.segments.iter().map(|s| s.slope.exact().unwrap().clone()).collect();
        assert!(slopes.windows(2).all(|p| p[0] > p[1]));
        // continuity: walking the segments reproduces each breakpoint value
        let mut x = q("0");
        let mut y = q("0");
        for (seg, bp) in curve.segments.iter().zip(&curve.breakpoints) {
            let to = seg.to.as_ref().unwrap().exact().unwrap().clone();
            y += seg.slope.exact().unwrap() * (&to - &x);
            x = to;
            assert_eq!(bp.gamma.exact().unwrap(), &y);
            assert!(bp.tau > 0.0);
        }
        assert_eq!(GammaCurve::from_json(&curve.to_json()).unwrap(), curve);
    }
}

#[test]
fn min_form_agrees_with_chain() {
    assert_eq!(gamma_min_form(4).unwrap(), (q("5/8"), false));
    assert_eq!(gamma_min_form(5).unwrap(), (q("3/5"), true));
    assert_eq!(gamma_min_form(1).unwrap(), (q("1"), true));
    let opts = SolveOptions::default();
    for k in 1..=6 {
        let sol = solve(&distinct(k), Alphabet::new(k).unwrap());
        let (g, special) = gamma_min_form(k).unwrap();
        assert_eq!(sol.gamma(&q("1")).unwrap(), Scalar::Exact(g));
        // with one letter the LCS is deterministic, so tau vanishes even though 1 = 1 + 1 - 1
        if k > 1 {
            assert_eq!(sol.tau(&q("1"), &opts).unwrap() > 0.0, special, "k={k}");
        }
    }
}

#[test]
fn sigma_routes_agree() {
    for text in ["ab", "aab", "abc", "1234", "abcab"] {
        let w = Word::parse(text, None).unwrap();
        let sol = solve(&w, w.alphabet());
        let f = sol.sigmas_fundamental().unwrap();
        let p = sol.sigmas_poisson().unwrap();
        for (x, y) in f.iter().zip(&p) {
            assert!((x - y).abs() < 1e-9, "{text}: {f:?} vs {p:?}");
        }
    }
    let sol = solve(&distinct(4), Alphabet::new(4).unwrap());
    assert!((sol.sigmas_fundamental().unwrap()[0] - 3f64.sqrt() / 4.0).abs() < 1e-10);
}

#[test]
fn sigma_matches_sampled_variance() {
    let w = Word::parse("ab", None).unwrap();
    let sol = solve(&w, w.alphabet());
    let sigma = sol.sigmas_fundamental().unwrap()[1];
    assert!(sigma > 0.0);
    let n = 4000;
    let cfg = ExperimentConfig::new(11, 4000, n, 2);
    let s = &estimate_speeds(&w, &cfg).unwrap()[1];
    // sd of D_2/n is sigma / sqrt(n)
    let sampled = s.stddev * (n as f64).sqrt();
    assert!((sampled / sigma - 1.0).abs() < 0.05, "{sampled} vs {sigma}");
}

#[test]
fn sampled_speeds_concentrate() {
    let w = distinct(4);
    let s = exact(solve(&w, Alphabet::new(4).unwrap()).speeds().unwrap());
    let a = Alphabet::new(4).unwrap();
    let ring = Ring::new(&w).unwrap();
    let n = 100_000;
    let runs = run_trials(3, 100, 0, |_, rng| displacements(&ring, sample_word(n, a, rng).symbols())).unwrap();
    for m in 0..4 {
        let target = lilypad::chain::ratio_to_f64(&s[m]);
        let close = runs.iter().filter(|d| (d[m] as f64 / n as f64 - target).abs() <= 0.01).count();
        assert!(close >= 99, "frog {m}: {close}/100");
    }
}

#[test]
fn estimated_curve_has_no_tau() {
    let speeds = vec![Scalar::Approx(0.25), Scalar::Approx(0.6)];
    let c = gamma_curve(&speeds, 2, None).unwrap();
    assert!(c.breakpoints.iter().all(|b| b.tau == 0.0));
}
