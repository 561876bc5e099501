"""Smoke test for the lilypad_py extension module.

Build first, e.g. `maturin develop -m crates/python/Cargo.toml`, or
`cargo build -p lilypad-python --features extension-module` and put
target/debug/liblilypad_py.so on PYTHONPATH as lilypad_py.so.
"""

import json
import math
from fractions import Fraction

import lilypad_py as lp


def main():
    w = lp.Word("1234")
    assert len(w) == 4 and w.alphabet == 4 and w.is_irreducible()

    chain = lp.FrogChain(w)
    speeds = [Fraction(s) for s in chain.speeds()]
    assert speeds == [Fraction(1, 4), Fraction(5, 12), Fraction(5, 6), Fraction(5, 2)]
    assert chain.speeds() == lp.speeds_closed_form(4, 4)
    assert Fraction(chain.gamma("1")) == Fraction(5, 8)
    assert abs(chain.tau("1/4") - math.sqrt(3 / (512 * math.pi))) < 1e-10
    curve = json.loads(chain.curve_json())
    assert len(curve["breakpoints"]) == 4

    v, u = lp.Word.from_symbols([0, 1, 1, 0], 2), lp.Word.from_symbols([1, 0, 1, 0], 2)
    assert lp.lcs_length(v, u) == 3
    assert lp.lcs_periodic(lp.Word("abab"), lp.Word("ab"), 4) == 4
    assert lp.delta_statistic(v, u) >= 0
    assert lp.ledges_after(lp.Word("wxyz"), lp.Word("wxyz")) == [4, 5, 6, 7]

    assert lp.margins_formula(4, 1, [2, 0]) == "1/3" == lp.margins_bruteforce(4, 1, [2, 0])
    csv, tv = lp.coupled_run(4, 1, 20000, seed=1)
    assert csv.startswith("position(s),count,frequency") and tv < 0.05

    est = lp.estimate_speeds(lp.Word("ab"), 20000, 4, seed=3)
    assert abs(est[0].mean - 0.5) < 0.02 and abs(est[1].mean - 1.5) < 0.02
    lam = lp.lambda_samples(w, "1", 5000, 10, seed=2)
    assert abs(sum(lam) / len(lam) - 1.5) < 0.1
    d = lp.delta_experiment(200, 20, seed=4)
    assert d.count == 20 and d.min >= 0
    cs = lp.estimate_gamma_cs(2000, 2, seed=5)
    assert 0.75 < cs.mean < 0.85

    try:
        lp.Word("abc", 2)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")

    print("smoke test ok")


if __name__ == "__main__":
    main()
