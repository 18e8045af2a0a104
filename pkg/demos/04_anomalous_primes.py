"""Anomalous primes: isomorphic over F_p but not over F_{p^2}.

For a 2-isogenous pair with maximal 2-adic images the anomalous primes
have density 1/30; for CM pairs the density is 1/12 or 0. The sweep
computes both group structures over F_{p^2} (orders come free from the
functional equation: N2 = (p + 1)^2 - t^2) at every F_p-isomorphic prime.
"""

import math
import sys

from isodense import empirical_P, load_builtin

X = int(sys.argv[1]) if len(sys.argv) > 1 else 100_000
records = {r.label: r for r in load_builtin()}

for label, reference in (("69.a", 1 / 30), ("49.a", 1 / 12)):
    pair = records[label].to_pair()
    rep = empirical_P(pair, X, seed=0, workers=2, anomalous=True)
    sigma = math.sqrt(reference * (1 - reference) / rep.pi_X)
    print(f"{label}: anomalous {rep.anomalous_count}/{rep.pi_X}"
          f" = {rep.anomalous_ratio:.5f}   reference {reference:.5f}"
          f"   deviation {abs(rep.anomalous_ratio - reference) / sigma:.2f} sigma"
          f"   ({rep.elapsed:.1f}s)")
