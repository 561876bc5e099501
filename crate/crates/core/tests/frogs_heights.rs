use lilypad::frogs::{apply_word, ledges_after, poke, poke_traced};
use lilypad::heights::{evolve, evolve_word, ledges_of};
use lilypad::lcs::lcs_dp;
use lilypad::{Alphabet, FrogArrangement, KHeight, Word};
use proptest::prelude::*;

fn words(len: usize, q: usize) -> Vec<Word> {
    let a = Alphabet::new(q).unwrap();
    let mut out = Vec::new();
    let mut cur = vec![0u8; len];
    loop {
        out.push(Word::new(cur.clone(), a).unwrap());
        let mut i = 0;
        while i < len && cur[i] as usize == q - 1 {
            cur[i] = 0;
            i += 1;
        }
        if i == len {
            return out;
        }
        cur[i] += 1;
    }
}

fn words_upto(max: usize, q: usize) -> impl Iterator<Item = Word> {
    (0..=max).flat_map(move |l| words(l, q))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..k {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

fn lcs_prefix(r: &Word, w: &Word, x: usize) -> i64 {
    lcs_dp(r, &w.periodic_expand(x).unwrap()) as i64
}

#[test]
fn periodic_expand_repeats() {
    for w in words_upto(6, 2).filter(|w| !w.is_empty()) {
        for m in 0..=5 {
            let mut rep = Vec::new();
            for _ in 0..m {
                rep.extend_from_slice(w.symbols());
            }
            assert_eq!(w.periodic_expand(m * w.len()).unwrap().symbols(), &rep[..]);
        }
    }
}

#[test]
fn repetitions_are_reducible() {
    for u in words_upto(4, 3).filter(|w| !w.is_empty()) {
        for c in [2, 3] {
            assert!(!u.periodic_expand(c * u.len()).unwrap().is_irreducible().unwrap());
        }
    }
    for w in words_upto(8, 2).filter(|w| !w.is_empty()) {
        let p = w.primitive_period().unwrap();
        assert!(w.slice(0..p).is_irreducible().unwrap(), "{w}");
    }
}

#[test]
fn ledges_round_trip() {
    for k in 1..=4usize {
        for top in (k as i64 - 1)..=12 {
            // every increasing ledge vector ending at `top`
            let mut stack = vec![(vec![], 0i64)];
            while let Some((ls, next)) = stack.pop() {
                if ls.len() == k - 1 {
                    let mut l: Vec<i64> = ls.clone();
                    l.push(top);
                    if let Ok(h) = KHeight::new(k, l.clone()) {
                        assert_eq!(ledges_of(&h.to_array(), k).unwrap(), h);
                    }
                    continue;
                }
                for x in next..top {
                    let mut l = ls.clone();
                    l.push(x);
                    stack.push((l, x + 1));
                }
            }
        }
    }
}

#[test]
fn evolve_matches_dp_and_stays_k_height() {
    for w in words_upto(4, 3).filter(|w| !w.is_empty()) {
        let k = w.len();
        for r in words_upto(8, 3) {
            let h = evolve_word(&r, &w);
            for x in 0..=4 * k {
                let hx = h[x.min(h.len() - 1)];
                assert_eq!(hx, lcs_prefix(&r, &w, x), "R={r} W={w} x={x}");
            }
            ledges_of(&h, k).unwrap_or_else(|e| panic!("R={r} W={w}: {e}"));
        }
    }
}

#[test]
fn absent_symbol_is_identity() {
    let w = Word::parse_labeled("ab", "abc").unwrap();
    let h = evolve_word(&Word::parse_labeled("ba", "abc").unwrap(), &w);
    let g = evolve(&h, 2, &w);
    assert_eq!(ledges_of(&g, 2).unwrap(), ledges_of(&h, 2).unwrap());
}

#[test]
fn frogs_agree_with_heights() {
    for w in words_upto(4, 3).filter(|w| !w.is_empty()) {
        let k = w.len();
        for r in words_upto(7, 3) {
            let h = ledges_after(&r, &w);
            assert_eq!(h, ledges_of(&evolve_word(&r, &w), k).unwrap(), "R={r} W={w}");
            for x in 0..=3 * k {
                assert_eq!(h.eval(x as i64), lcs_prefix(&r, &w, x), "R={r} W={w} x={x}");
            }
        }
    }
}

#[derive(Debug)]
struct TraceHop {
    frog: usize,
    from: usize,
    to: usize,
}

fn parse_trace(line: &str) -> TraceHop {
    let mut it = line.split(' ').map(|kv| kv.split_once('=').unwrap());
    let mut field = |name: &str| {
        let (key, v) = it.next().unwrap();
        assert_eq!(key, name);
        v.parse().unwrap()
    };
    TraceHop { frog: field("frog"), from: field("from"), to: field("to") }
}

/// Replays the trace on the board and returns the frogs each hop passed.
fn passed_over(f: &FrogArrangement, trace: &[TraceHop]) -> Vec<Vec<usize>> {
    let k = f.k();
    let mut occ: Vec<Option<usize>> = f.occupants().into_iter().map(Some).collect();
    let mut out = Vec::new();
    for h in trace {
        if occ[h.from] == Some(h.frog) {
            occ[h.from] = None;
        }
        let mut over = Vec::new();
        let mut q = (h.from + 1) % k;
        while q != h.to {
            over.extend(occ[q]);
            q = (q + 1) % k;
        }
        occ[h.to] = Some(h.frog);
        out.push(over);
    }
    out
}

#[test]
fn conservation_and_no_overtake() {
    for len in 1..=5 {
        for w in words(len, 3) {
            for pads in permutations(len) {
                let f = FrogArrangement::from_pads(&pads).unwrap();
                for a in 0..3u8 {
                    let (rec, hops) = poke_traced(&f, a, &w);
                    let total: u64 = rec.displacement.iter().sum();
                    if w.symbols().contains(&a) {
                        assert_eq!(total, len as u64);
                    } else {
                        assert_eq!(total, 0);
                        assert_eq!(rec.new_arrangement, f);
                    }
                    let trace: Vec<TraceHop> = hops.iter().map(|h| parse_trace(&h.to_string())).collect();
                    let hopped: Vec<usize> = trace.iter().map(|h| h.frog).collect();
                    for over in passed_over(&f, &trace) {
                        assert!(over.iter().all(|m| !hopped.contains(m)), "W={w} F={pads:?} a={a}");
                    }
                }
            }
        }
    }
}

#[test]
fn lone_weakest_frog_laps() {
    // frog k-1 alone on the only pad labeled 'a'
    let w = Word::parse_labeled("abc", "abc").unwrap();
    let f = FrogArrangement::from_pads(&[1, 2, 0]).unwrap();
    let rec = poke(&f, 0, &w);
    assert_eq!(rec.new_arrangement, f);
    assert_eq!(rec.displacement, vec![0, 0, 3]);
}

#[test]
fn apply_word_examples() {
    let w = Word::parse_labeled("ab", "ab").unwrap();
    let rec = apply_word(&FrogArrangement::identity(2), &Word::parse_labeled("ba", "ab").unwrap(), &w);
    assert_eq!(rec.displacement, vec![1, 3]);
    assert_eq!(rec.new_arrangement.pads(), vec![1, 0]);
    let rec = apply_word(&FrogArrangement::identity(2), &w, &w);
    assert_eq!(rec.new_arrangement, FrogArrangement::identity(2));
    assert_eq!(rec.displacement, vec![2, 2]);
    let rec = apply_word(&FrogArrangement::identity(2), &Word::parse_labeled("", "ab").unwrap(), &w);
    assert_eq!(rec.displacement, vec![0, 0]);
    let w4 = Word::parse("wxyz", None).unwrap();
    assert_eq!(ledges_after(&w4, &w4).ledges(), &[4, 5, 6, 7]);
}

fn arb_case() -> impl Strategy<Value = (Vec<u8>, Vec<usize>, Vec<u8>)> {
    (1usize..=7, 2usize..=4).prop_flat_map(|(k, q)| {
        (
            prop::collection::vec(0..q as u8, k),
            Just((0..k).collect::<Vec<_>>()).prop_shuffle(),
            prop::collection::vec(0..q as u8, 0..40),
        )
    })
}

proptest! {
    #[test]
    fn jump_count_identity((w, pads, r) in arb_case()) {
        let q = 1 + *w.iter().chain(&r).max().unwrap() as usize;
        let a = Alphabet::new(q).unwrap();
        let w = Word::new(w, a).unwrap();
        let r = Word::new(r, a).unwrap();
        let k = w.len() as i64;
        let f = FrogArrangement::from_pads(&pads).unwrap();
        let rec = apply_word(&f, &r, &w);
        for m in 0..w.len() {
            let d = rec.displacement[m] as i64;
            let (d_prev, gap) = if m == 0 {
                (0, f.pad(0) as i64 + 1)
            } else {
                (rec.displacement[m - 1] as i64, (f.pad(m) as i64 - f.pad(m - 1) as i64).rem_euclid(k))
            };
            let want = (d - d_prev + gap - 1).div_euclid(k);
            prop_assert_eq!(rec.jumps_over_pred[m] as i64, want, "m={}", m);
        }
    }

    #[test]
    fn concatenation_law((w, pads, r) in arb_case(), split in 0usize..40) {
        let q = 1 + *w.iter().chain(&r).max().unwrap() as usize;
        let a = Alphabet::new(q).unwrap();
        let w = Word::new(w, a).unwrap();
        let r = Word::new(r, a).unwrap();
        let s = split.min(r.len());
        let f = FrogArrangement::from_pads(&pads).unwrap();
        let whole = apply_word(&f, &r, &w);
        let first = apply_word(&f, &r.slice(0..s), &w);
        let second = apply_word(&first.new_arrangement, &r.slice(s..r.len()), &w);
        prop_assert_eq!(&whole.new_arrangement, &second.new_arrangement);
        for m in 0..w.len() {
            prop_assert_eq!(whole.displacement[m], first.displacement[m] + second.displacement[m]);
        }
    }

    #[test]
    fn evolved_heights_have_monotone_k_difference(
        w in prop::collection::vec(0u8..3, 1..6),
        r in prop::collection::vec(0u8..3, 0..30),
    ) {
        let a = Alphabet::new(3).unwrap();
        let w = Word::new(w, a).unwrap();
        let h = evolve_word(&Word::new(r, a).unwrap(), &w);
        prop_assert!(ledges_of(&h, w.len()).is_ok());
    }
}
