"""The empirical sweep converging to the exact density.

Sweeps every prime p <= X for one bundled pair, compares the group
structures of the two reductions, and watches the isomorphism ratio
approach the profile's exact value. Also tabulates the measured
conditional defect densities d-hat against their reference values.

Takes about a minute at the default X on two cores; pass a smaller X as
argv[1] for a quick look.
"""

import sys

from isodense import empirical_P, empirical_d, eval_density, format_rational, load_builtin

X = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
label = sys.argv[2] if len(sys.argv) > 2 else "144.b"

rec = next(r for r in load_builtin() if r.label == label)
pair = rec.to_pair()
exact = eval_density(rec.profile)
print(f"pair {label} (l = {rec.ell}): exact density {format_rational(exact)} = {float(exact):.6f}\n")

for x in (X // 100, X // 10, X):
    rep = empirical_P(pair, x, seed=0, workers=2)
    print(f"  X = {x:>9}: ratio = {rep.iso_ratio:.6f}"
          f"   (iso {rep.iso_count_with_bad} of {rep.pi_X} primes,"
          f" {rep.elapsed:.1f}s)")

print(f"\nconditional defects at X = {X} (reference: 0 or 1 - 1/{rec.ell}):")
rep = empirical_P(pair, X, seed=0, workers=2)
for m in range(1, 5):
    est = empirical_d(pair, rec.ell, m, X, report=rep)
    fmt = lambda v: "empty" if v is None else f"{v:.4f}"
    print(f"  m = {m}: d-hat = {fmt(est.d_hat)} ({est.defect_e}/{est.support_e})"
          f"   d'-hat = {fmt(est.dp_hat)} ({est.defect_ep}/{est.support_ep})")
