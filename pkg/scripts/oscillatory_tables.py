"""Tables for J(t, xi) against the stationary-phase term and for L(h) against h log(1/h)."""

import argparse

from wavelab import checks, oscillatory


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--xi", type=float, nargs="+", default=[8, 16, 32, 64, 128, 256])
    ap.add_argument("--delta", type=float, default=0.3)
    a = ap.parse_args()

    for label, (c0, c1) in (("attracting", checks.ATTRACTING), ("repelling", checks.REPELLING)):
        m = oscillatory.linear_model(c0, c1, delta=a.delta)
        rep = oscillatory.stationary_phase_compare(m, a.xi)
        print(f"\n{label}: c(w) = {c0:.4f} + {c1:g} w")
        print(f"{'xi':>6} {'t':>8} {'|J|':>12} {'|lead|':>12} {'|J-lead|':>12} {'|J| xi^2':>12}")
        for r in rep["rows"]:
            print(f"{r['xi']:6g} {r['t']:8g} {abs(r['J']):12.5e} {abs(r['leading']):12.5e} {r['abs_err']:12.5e} {r['abs_J_xi2']:12.5e}")
        if "slope" in rep:
            print(f"fitted slope of |J - lead|: {rep['slope']:.3f}")

    print("\nL(h), A = exp(-s^2/2) alpha(w), G = 0")
    odd = oscillatory.log_scaling_L(checks.zero_G, checks.odd_alpha)
    even = oscillatory.log_scaling_L(checks.zero_G, checks.even_alpha)
    print(f"{'h':>10} {'odd |L|/h':>12} {'odd ratio':>12} {'even |L|/h':>12} {'even ratio':>12}")
    for o, e in zip(odd, even):
        print(f"{o['h']:10.3e} {o['abs_L_over_h']:12.6f} {o['ratio']:12.6f} {e['abs_L_over_h']:12.6f} {e['ratio']:12.6f}")
    print(oscillatory.log_verdicts(odd, even))


if __name__ == "__main__":
    main()
