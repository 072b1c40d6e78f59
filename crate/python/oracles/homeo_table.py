"""Regenerate the arbitrary-precision reference values for f_i and psi_2.

f_i(x) = (1 - (1 - x)^(1/2000^i))^(2000^i), evaluated in log form at
400 significant digits. Prints Rust tuples (i, kind, value, ln f) where kind
'p' means x = value and 'q' means x = 1 - value.
"""

from mpmath import expm1, log, log1p, exp, mp, mpf, nstr

mp.dps = 400


def ln_f(ln_q, big_a):
    return big_a * log(-expm1(ln_q / big_a))


POINTS = [("p", 1e-300), ("p", 1e-30), ("p", 1e-5), ("p", 0.3), ("p", 0.5),
          ("p", 0.9), ("q", 1e-10), ("q", 1e-30), ("q", 1e-300)]

for i in (1, 20):
    big_a = mpf(2000) ** i
    for kind, v in POINTS:
        ln_q = log1p(-mpf(v)) if kind == "p" else log(mpf(v))
        print(f"({i}, {kind!r}, {v!r}, {nstr(ln_f(ln_q, big_a), 20)}),")

# psi_2(x) = f_1(f_20(1 - f_1^{-1}(1 - x))) = f_1(f_20(f_1(x)))
x = mpf("0.5")
l1 = ln_f(log1p(-x), mpf(2000))
l2 = ln_f(log1p(-exp(l1)), mpf(2000) ** 20)
l3 = ln_f(log1p(-exp(l2)), mpf(2000))
print("psi2(0.5)", nstr(l3, 20))
