"""Command-line front end.

Subcommands:

    theoretical   exact isomorphism density from the stored profile
    empirical     sweep all primes p <= X and compare the reductions
    dvalues       empirical conditional defect densities per level
    anomalous     density of F_p-isomorphic / F_{p^2}-nonisomorphic primes

Exit codes: 0 ok, 1 usage, 2 data problem, 3 theorem-level invariant
violation. Every output carries exact rationals verbatim; decimals are
truncated (never rounded) at 20 digits with a trailing "..." when the
expansion continues.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .dataset import DatasetError, find_record, load_builtin, load_pairs
from .density import decimal_expansion, eval_density, format_rational, parse_rational
from .sweep import (
    DEFAULT_M_MAX,
    TheoremViolation,
    anomalous_density,
    empirical_P,
    empirical_d,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INVARIANT = 3

ENV_DATASET = "ISODENSE_DATASET"


def _load_records(path):
    if path:
        return load_pairs(path)
    env = os.environ.get(ENV_DATASET)
    if env:
        return load_pairs(env)
    return load_builtin()


def _select_records(records, labels):
    if not labels:
        return list(records)
    return [find_record(records, label) for label in labels]


def _emit(payload, text, args):
    """Write either the JSON payload or the prepared text rendering."""
    if args.format == "json":
        out = json.dumps(payload, indent=2, sort_keys=True)
    else:
        out = text
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(out + "\n")
    else:
        print(out)


def _fmt_ratio(x: float) -> str:
    return f"{x:.6f}"


def _reject_csv(args) -> None:
    if args.format == "csv":
        raise ValueError("csv output is only available for the empirical command")


def cmd_theoretical(args) -> int:
    _reject_csv(args)
    records = _select_records(_load_records(args.dataset), args.pair)
    rows = []
    lines = []
    for rec in records:
        if rec.profile is None:
            print(f"error: pair {rec.label} has no density profile", file=sys.stderr)
            return EXIT_DATA
        density = eval_density(rec.profile)
        row = {
            "label": rec.label,
            "ell": rec.ell,
            "density": format_rational(density),
            "decimal": decimal_expansion(density),
        }
        line = f"{rec.label}: P = {row['density']} = {row['decimal']}"
        exp = rec.expected or {}
        if "density_stated" in exp:
            stated = parse_rational(exp["density_stated"])
            row["density_stated"] = exp["density_stated"]
            row["discrepancy"] = exp.get("note", "stated value differs from the series evaluation")
            line += (
                f"\n  DISCREPANCY: published statement gives {exp['density_stated']}"
                f" = {decimal_expansion(stated)}"
                f"\n  while the series evaluates to {row['density']} = {row['decimal']}"
            )
            if exp.get("note"):
                line += f"\n  note: {exp['note']}"
        rows.append(row)
        lines.append(line)
    _emit({"command": "theoretical", "pairs": rows}, "\n".join(lines), args)
    return EXIT_OK


def _sweep_payload(rec, report):
    payload = report.to_dict()
    expected = []
    for sw in rec.expected_sweeps():
        if sw.get("X") == report.X:
            expected.append(
                {
                    "iso_count": sw["iso_count"],
                    "delta": report.iso_count_with_bad - sw["iso_count"],
                    "source": sw.get("source", ""),
                }
            )
    if expected:
        payload["expected"] = expected
    exact = rec.expected_density()
    if exact is not None:
        payload["theoretical_density"] = format_rational(exact)
        payload["theoretical_decimal"] = decimal_expansion(exact)
    return payload


def _sweep_text(rec, report, payload):
    c = report.counts
    lines = [
        f"pair {rec.label} (ell = {report.ell}), X = {report.X}, seed = {report.seed}",
        f"  pi(X) = {report.pi_X}",
        f"  counts: iso = {c['iso']}, supersingular_iso = {c['supersingular_iso']}, "
        f"noniso = {c['noniso']}, bad/skipped = {c['bad']}",
        f"  iso ratio (bad counted as iso): {report.iso_count_with_bad}/{report.pi_X}"
        f" = {_fmt_ratio(report.iso_ratio)}",
        f"  iso ratio (good primes only):   {report.iso_count_good}/{report.good_count}"
        f" = {_fmt_ratio(report.iso_ratio_good)}",
    ]
    if "theoretical_density" in payload:
        lines.append(
            f"  theoretical: {payload['theoretical_density']} = {payload['theoretical_decimal']}"
        )
    for exp in payload.get("expected", ()):
        lines.append(
            f"  published count at this X: {exp['iso_count']} (delta {exp['delta']:+d})"
        )
    if report.anomalous_enabled:
        lines.append(
            f"  anomalous: {report.anomalous_count}/{report.pi_X}"
            f" = {_fmt_ratio(report.anomalous_ratio)}"
        )
    lines.append(f"  elapsed: {report.elapsed:.1f}s")
    return "\n".join(lines)


def _write_csv(report, path):
    import csv

    arr = report.arrays
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["p", "status", "n1", "n2", "n1p", "n2p", "anomalous"])
        names = {1: "supersingular_iso", 2: "iso", 3: "noniso"}
        for i in range(len(arr["p"])):
            w.writerow(
                [
                    int(arr["p"][i]),
                    names[int(arr["status"][i])],
                    int(arr["n1"][i]),
                    int(arr["n2"][i]),
                    int(arr["n1p"][i]),
                    int(arr["n2p"][i]),
                    int(arr["anomalous"][i]),
                ]
            )


def cmd_empirical(args) -> int:
    records = _select_records(_load_records(args.dataset), args.pair)
    payloads = []
    texts = []
    for rec in records:
        report = empirical_P(
            rec.to_pair(),
            args.X,
            seed=args.seed,
            workers=args.workers,
            m_max=args.m_max,
            anomalous=args.anomalous,
        )
        payload = _sweep_payload(rec, report)
        if args.format == "csv":
            path = args.out or f"{rec.label.replace('.', '_')}_sweep.csv"
            _write_csv(report, path)
            print(f"wrote per-prime outcomes to {path}")
            continue
        payloads.append(payload)
        texts.append(_sweep_text(rec, report, payload))
    if args.format != "csv":
        _emit({"command": "empirical", "sweeps": payloads}, "\n\n".join(texts), args)
    return EXIT_OK


def cmd_dvalues(args) -> int:
    _reject_csv(args)
    records = _select_records(_load_records(args.dataset), args.pair)
    payloads = []
    texts = []
    for rec in records:
        pair = rec.to_pair()
        report = empirical_P(
            pair, args.X, seed=args.seed, workers=args.workers, m_max=args.m_max
        )
        ref = 1 - parse_rational(f"1/{rec.ell}")
        rows = []
        lines = [
            f"pair {rec.label}: empirical defect densities at ell = {rec.ell}, X = {args.X}",
            f"  reference values are 0 or 1 - 1/{rec.ell} = {format_rational(ref)}",
            f"  {'m':>2} {'d_hat':>10} {'defect/support':>16} {'dp_hat':>10} {'defect/support':>16}",
        ]
        for m in range(1, args.m_max + 1):
            est = empirical_d(pair, rec.ell, m, args.X, seed=args.seed, report=report)
            rows.append(
                {
                    "m": m,
                    "d_hat": est.d_hat,
                    "support_e": est.support_e,
                    "defect_e": est.defect_e,
                    "dp_hat": est.dp_hat,
                    "support_ep": est.support_ep,
                    "defect_ep": est.defect_ep,
                }
            )
            de = "empty" if est.d_hat is None else f"{est.d_hat:.4f}"
            dpe = "empty" if est.dp_hat is None else f"{est.dp_hat:.4f}"
            lines.append(
                f"  {m:>2} {de:>10} {est.defect_e:>7}/{est.support_e:<8}"
                f" {dpe:>10} {est.defect_ep:>7}/{est.support_ep:<8}"
            )
        payloads.append({"label": rec.label, "ell": rec.ell, "X": args.X, "levels": rows})
        texts.append("\n".join(lines))
    _emit({"command": "dvalues", "pairs": payloads}, "\n\n".join(texts), args)
    return EXIT_OK


def cmd_anomalous(args) -> int:
    _reject_csv(args)
    records = _select_records(_load_records(args.dataset), args.pair)
    payloads = []
    texts = []
    for rec in records:
        pair = rec.to_pair()
        report = empirical_P(
            pair, args.X, seed=args.seed, workers=args.workers,
            m_max=args.m_max, anomalous=True,
        )
        ratio = report.anomalous_ratio
        sigma = math.sqrt(max(ratio * (1 - ratio), 1e-12) / report.pi_X)
        payloads.append(
            {
                "label": rec.label,
                "X": args.X,
                "anomalous_count": report.anomalous_count,
                "pi_X": report.pi_X,
                "ratio": ratio,
                "binomial_sigma": sigma,
            }
        )
        texts.append(
            f"pair {rec.label}: anomalous primes up to {args.X}: "
            f"{report.anomalous_count}/{report.pi_X} = {_fmt_ratio(ratio)} "
            f"(binomial sigma {sigma:.6f})"
        )
    _emit({"command": "anomalous", "pairs": payloads}, "\n".join(texts), args)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="isodense",
        description="Exact and empirical densities of primes where an "
        "l-isogenous pair of elliptic curves has isomorphic reductions.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, sweep=False):
        p.add_argument("--dataset", help=f"JSONL dataset path (default: ${ENV_DATASET} or bundled)")
        p.add_argument("--pair", action="append", default=[],
                       help="pair label, repeatable (default: all)")
        p.add_argument("--format", choices=("json", "text", "csv"), default="text")
        p.add_argument("--out", help="write output to this path instead of stdout")
        if sweep:
            p.add_argument("--X", type=int, default=10 ** 5)
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
            p.add_argument("--m-max", dest="m_max", type=int, default=DEFAULT_M_MAX)

    p = sub.add_parser("theoretical", help="exact density from the stored profile")
    common(p)
    p.set_defaults(func=cmd_theoretical)

    p = sub.add_parser("empirical", help="sweep primes <= X and compare reductions")
    common(p, sweep=True)
    p.add_argument("--anomalous", action="store_true",
                   help="also compare the F_{p^2} structures (roughly doubles the cost)")
    p.set_defaults(func=cmd_empirical)

    p = sub.add_parser("dvalues", help="empirical defect densities per level")
    common(p, sweep=True)
    p.set_defaults(func=cmd_dvalues)

    p = sub.add_parser("anomalous", help="density of anomalous primes")
    common(p, sweep=True)
    p.set_defaults(func=cmd_anomalous)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (DatasetError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TheoremViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
