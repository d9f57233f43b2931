#!/usr/bin/env python3
"""Deranged matchings at desk scale.

The classic hat-check ratio d_n/n! is the no-overlap probability of a random
perfect matching of K_{n,n} against a deleted one; the kindergarten variant
does the same on K_{2n}.  Both are closed-form fast paths here, and both
ratios drift toward their limits (e^-1 and e^-1/2).
"""

import math
from fractions import Fraction

from matchlab import MultipartiteShape, exact

print("bipartite: pm(K_{n,n}) = n!, deranged count = d_n")
for n in range(2, 11):
    table = exact.strata_bipartite(n)
    ratio = Fraction(table.strata[0], table.total)
    print(
        f"  n={n:2d}  pm={table.total:>9}  d_n={table.strata[0]:>9}  "
        f"ratio={float(ratio):.8f}  (e^-1 = {math.exp(-1):.8f})"
    )

print("\ncomplete graph: pm(K_{2n}) = (2n-1)!!")
for n in range(2, 9):
    table = exact.strata_complete_graph(n)
    ratio = Fraction(table.strata[0], table.total)
    print(
        f"  2n={2*n:2d}  pm={table.total:>9}  avoid={table.strata[0]:>9}  "
        f"ratio={float(ratio):.6f}  (e^-1/2 = {math.exp(-0.5):.6f})"
    )

print("\nconsecutive stratum ratios vs r/((2r-2)k), shape 100x100x100 (r=3):")
table = exact.strata_auto(MultipartiteShape((100, 100, 100)))
for row in exact.ratio_table(table)[:6]:
    print(
        f"  k={row.k}  actual={float(row.actual):.6f}  "
        f"predicted={float(row.predicted):.6f}  deviation={float(row.deviation):.2e}"
    )
