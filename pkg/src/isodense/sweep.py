"""The empirical engine: compare reductions of a pair at every prime p <= X.

Work is chunked into fixed-size blocks of primes handed to worker processes;
every per-prime computation is seeded from (global seed, p, stream index), so
the result is a pure function of (pair, X, seed) no matter how many workers
run or how blocks are scheduled. Counts aggregate associatively.

Theorem-level invariants (equal traces, one-step volcano shifts, prime-to-ell
agreement, supersingular => isomorphic) are asserted at every prime; a
violation aborts the sweep with the offending prime, since it would mean
either corrupted curve data or an algorithm bug.
"""

from __future__ import annotations

import json
import math
import os
import random
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .curve import BadReduction, RationalCurvePair, lift_to_fp2, reduce_mod_p
from .count import trace_frobenius, verify_order
from .ffield import PrimeField
from .structure import (
    GroupShape,
    factor,
    group_structure,
    has_full_torsion,
    prime_to_ell_part,
    sylow_shape,
)

BLOCK_SIZE = 1 << 14  # primes per work unit
DEFAULT_M_MAX = 7

STATUS_NAMES = {0: "bad", 1: "supersingular_iso", 2: "iso", 3: "noniso"}
_ERROR_NAMES = {
    -1: "trace mismatch between isogenous reductions",
    -2: "group shapes differ by more than one volcano step",
    -3: "prime-to-ell parts of the groups disagree",
    -4: "supersingular prime with nonisomorphic groups",
    -5: "group-structure sampler exhausted its draw cap",
    -6: "group structure violates n1 | gcd(N, q-1)",
    -7: "BSGS failed to certify a unique group order",
    -8: "F_{p^2} structure comparison failed an invariant",
}


class TheoremViolation(AssertionError):
    """An invariant that is a theorem for valid data failed at some prime."""

    def __init__(self, p: int, code: int, pair_label: str = ""):
        self.p = p
        self.code = code
        msg = _ERROR_NAMES.get(code, f"kernel error {code}")
        super().__init__(f"invariant violated at p={p}{' for ' + pair_label if pair_label else ''}: {msg}")


# -- prime sieve --------------------------------------------------------------


def _sieve_segment(lo: int, hi: int, base_primes: np.ndarray) -> np.ndarray:
    """Primes in [lo, hi), given base primes covering sqrt(hi)."""
    seg = np.ones(hi - lo, dtype=bool)
    if lo == 0:
        seg[: min(2, hi - lo)] = False
    elif lo == 1:
        seg[0] = False
    for q in base_primes:
        q = int(q)
        if q * q >= hi:
            break
        start = max(q * q, (lo + q - 1) // q * q)
        seg[start - lo :: q] = False
    return np.nonzero(seg)[0] + lo


def _base_primes(limit: int) -> np.ndarray:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.nonzero(sieve)[0].astype(np.int64)


def sieve_primes(X: int, segment: int = 1 << 20):
    """Yield every prime <= X in increasing order (segmented sieve)."""
    if X < 2:
        return
    base = _base_primes(math.isqrt(X) + 1)
    lo = 0
    while lo <= X:
        hi = min(lo + segment, X + 1)
        for p in _sieve_segment(lo, hi, base):
            yield int(p)
        lo = hi


def prime_array(X: int) -> np.ndarray:
    """All primes <= X as an int64 array."""
    if X < 2:
        return np.empty(0, dtype=np.int64)
    base = _base_primes(math.isqrt(X) + 1)
    chunks = []
    lo = 0
    while lo <= X:
        hi = min(lo + (1 << 22), X + 1)
        chunks.append(_sieve_segment(lo, hi, base))
        lo = hi
    return np.concatenate(chunks).astype(np.int64)


def prime_pi(X: int) -> int:
    """pi(X), from the same sieve that drives the sweep."""
    return int(prime_array(X).shape[0])


# -- per-prime comparison (reference engine, contract modules) ----------------


@dataclass(frozen=True)
class PrimeOutcome:
    p: int
    status: str  # bad | supersingular_iso | iso | noniso
    shape_e: GroupShape | None = None
    shape_ep: GroupShape | None = None
    full_torsion_e: tuple = ()
    full_torsion_ep: tuple = ()
    anomalous: bool = False
    trace: int | None = None


def _mix_seed(seed: int, p: int, stream: int) -> int:
    return (seed * 0x9E3779B97F4A7C15 + p * 0xBF58476D1CE4E5B9 + stream) % (1 << 63)


def compare_at_prime(
    pair: RationalCurvePair,
    p: int,
    m_max: int = DEFAULT_M_MAX,
    anomalous: bool = False,
    seed: int = 0,
) -> PrimeOutcome:
    """Reference comparison at one prime, built on the contract modules."""
    if p <= 3 or pair.conductor % p == 0:
        return PrimeOutcome(p=p, status="bad")
    fld = PrimeField(p)
    ce = reduce_mod_p(pair.e, p, fld)
    cep = reduce_mod_p(pair.e_prime, p, fld)
    assert not isinstance(ce, BadReduction) and not isinstance(cep, BadReduction)

    tr = trace_frobenius(ce, random.Random(_mix_seed(seed, p, 4)))
    if not verify_order(cep, tr.N, random.Random(_mix_seed(seed, p, 5))):
        raise TheoremViolation(p, -1, pair.label)
    fN = factor(tr.N)
    se = group_structure(ce, fN, p, random.Random(_mix_seed(seed, p, 0)))
    sep = group_structure(cep, fN, p, random.Random(_mix_seed(seed, p, 1)))

    ell = pair.ell
    if prime_to_ell_part(se, ell) != prime_to_ell_part(sep, ell):
        raise TheoremViolation(p, -3, pair.label)
    iso = se == sep
    # theorem for odd ell only; a vertical supersingular 2-isogeny may shift shapes
    if tr.supersingular and not iso and ell != 2:
        raise TheoremViolation(p, -4, pair.label)
    if not iso:
        a, b = sylow_shape(se, ell)
        ap, bp = sylow_shape(sep, ell)
        if abs(a - ap) != 1 or a + b != ap + bp:
            raise TheoremViolation(p, -2, pair.label)

    status = "supersingular_iso" if (tr.supersingular and iso) else ("iso" if iso else "noniso")
    fte = tuple(has_full_torsion(se, ell, m) for m in range(1, m_max + 1))
    ftep = tuple(has_full_torsion(sep, ell, m) for m in range(1, m_max + 1))

    anom = False
    if anomalous and iso:
        c2e = lift_to_fp2(ce)
        c2ep = lift_to_fp2(cep)
        fN2 = factor(tr.N2)
        q2 = p * p
        s2e = group_structure(c2e, fN2, q2, random.Random(_mix_seed(seed, p, 2)))
        s2ep = group_structure(c2ep, fN2, q2, random.Random(_mix_seed(seed, p, 3)))
        if prime_to_ell_part(s2e, ell) != prime_to_ell_part(s2ep, ell):
            raise TheoremViolation(p, -8, pair.label)
        if tr.supersingular and (s2e != GroupShape(p + 1, p + 1) or s2ep != s2e):
            raise TheoremViolation(p, -8, pair.label)
        anom = s2e != s2ep
    return PrimeOutcome(
        p=p,
        status=status,
        shape_e=se,
        shape_ep=sep,
        full_torsion_e=fte,
        full_torsion_ep=ftep,
        anomalous=anom,
        trace=tr.t,
    )


# -- sweep report -------------------------------------------------------------


@dataclass
class SweepReport:
    label: str
    X: int
    pi_X: int
    seed: int
    m_max: int
    ell: int
    anomalous_enabled: bool
    counts: dict  # status name -> count
    torsion_e: list  # index m-1: #{good p: full ell^m torsion on E}
    torsion_ep: list
    torsion_e_only: list  # E has it, E' does not
    torsion_ep_only: list
    anomalous_count: int
    elapsed: float = 0.0
    arrays: dict = field(default_factory=dict, repr=False)  # per-prime columns

    @property
    def good_count(self) -> int:
        return self.pi_X - self.counts["bad"]

    @property
    def iso_count_with_bad(self) -> int:
        return self.counts["iso"] + self.counts["supersingular_iso"] + self.counts["bad"]

    @property
    def iso_count_good(self) -> int:
        return self.counts["iso"] + self.counts["supersingular_iso"]

    @property
    def iso_ratio(self) -> float:
        return self.iso_count_with_bad / self.pi_X if self.pi_X else 0.0

    @property
    def iso_ratio_good(self) -> float:
        return self.iso_count_good / self.good_count if self.good_count else 0.0

    @property
    def anomalous_ratio(self) -> float:
        return self.anomalous_count / self.pi_X if self.pi_X else 0.0

    def to_dict(self, include_elapsed: bool = True) -> dict:
        d = {
            "label": self.label,
            "X": self.X,
            "pi_X": self.pi_X,
            "seed": self.seed,
            "m_max": self.m_max,
            "ell": self.ell,
            "anomalous_enabled": self.anomalous_enabled,
            "counts": dict(sorted(self.counts.items())),
            "iso_count_with_bad": self.iso_count_with_bad,
            "iso_count_good": self.iso_count_good,
            "iso_ratio": self.iso_ratio,
            "iso_ratio_good": self.iso_ratio_good,
            "torsion_e": list(self.torsion_e),
            "torsion_ep": list(self.torsion_ep),
            "torsion_e_only": list(self.torsion_e_only),
            "torsion_ep_only": list(self.torsion_ep_only),
            "anomalous_count": self.anomalous_count,
            "anomalous_ratio": self.anomalous_ratio,
        }
        if include_elapsed:
            d["elapsed"] = self.elapsed
        return d

    def canonical_json(self) -> str:
        """Deterministic serialization: identical for identical (pair, X, seed)."""
        return json.dumps(self.to_dict(include_elapsed=False), sort_keys=True)


def merge_reports(a: SweepReport, b: SweepReport) -> SweepReport:
    """Combine reports over disjoint prime intervals (associative, commutative)."""
    if (a.label, a.seed, a.m_max, a.ell, a.anomalous_enabled) != (
        b.label,
        b.seed,
        b.m_max,
        b.ell,
        b.anomalous_enabled,
    ):
        raise ValueError("reports are not mergeable")
    counts = {k: a.counts[k] + b.counts[k] for k in a.counts}
    arrays = {}
    if a.arrays and b.arrays:
        lowfirst = a if (a.arrays["p"][0] if len(a.arrays["p"]) else 0) <= (
            b.arrays["p"][0] if len(b.arrays["p"]) else 0
        ) else b
        other = b if lowfirst is a else a
        arrays = {
            k: np.concatenate([lowfirst.arrays[k], other.arrays[k]]) for k in a.arrays
        }
    return SweepReport(
        label=a.label,
        X=max(a.X, b.X),
        pi_X=a.pi_X + b.pi_X,
        seed=a.seed,
        m_max=a.m_max,
        ell=a.ell,
        anomalous_enabled=a.anomalous_enabled,
        counts=counts,
        torsion_e=[x + y for x, y in zip(a.torsion_e, b.torsion_e)],
        torsion_ep=[x + y for x, y in zip(a.torsion_ep, b.torsion_ep)],
        torsion_e_only=[x + y for x, y in zip(a.torsion_e_only, b.torsion_e_only)],
        torsion_ep_only=[x + y for x, y in zip(a.torsion_ep_only, b.torsion_ep_only)],
        anomalous_count=a.anomalous_count + b.anomalous_count,
        elapsed=a.elapsed + b.elapsed,
        arrays=arrays,
    )


# -- block execution ----------------------------------------------------------

_SMALL_PRIMES_KERNEL: np.ndarray | None = None


def _kernel_small_primes() -> np.ndarray:
    global _SMALL_PRIMES_KERNEL
    if _SMALL_PRIMES_KERNEL is None:
        _SMALL_PRIMES_KERNEL = prime_array(1 << 16)
    return _SMALL_PRIMES_KERNEL


def _ainv_columns(curve, ps: np.ndarray) -> list[np.ndarray]:
    cols = []
    a1, a2, a3, a4, a6 = curve.ainvs
    for a in (a1, a2, a3, a4, a6):
        if -(1 << 62) < a < (1 << 62):
            cols.append(np.asarray(a % ps, dtype=np.int64))
        else:
            cols.append(np.array([a % int(p) for p in ps], dtype=np.int64))
    return cols


def _run_block_kernel(pair, ps, seed, m_max, anomalous):
    """Run the fast kernel over one block of good primes; returns column dict."""
    n = ps.shape[0]
    out = {
        "status": np.zeros(n, dtype=np.int64),
        "trace": np.zeros(n, dtype=np.int64),
        "n1": np.zeros(n, dtype=np.int64),
        "n2": np.zeros(n, dtype=np.int64),
        "n1p": np.zeros(n, dtype=np.int64),
        "n2p": np.zeros(n, dtype=np.int64),
        "ftE": np.zeros(n, dtype=np.int64),
        "ftEp": np.zeros(n, dtype=np.int64),
        "anomalous": np.zeros(n, dtype=np.bool_),
    }
    if n == 0:
        return out
    e_cols = _ainv_columns(pair.e, ps)
    f_cols = _ainv_columns(pair.e_prime, ps)
    _kernel.sweep_block(
        ps,
        e_cols[0], e_cols[1], e_cols[2], e_cols[3], e_cols[4],
        f_cols[0], f_cols[1], f_cols[2], f_cols[3], f_cols[4],
        pair.ell, m_max, seed % (1 << 31), anomalous, _kernel_small_primes(),
        out["status"], out["trace"], out["n1"], out["n2"], out["n1p"], out["n2p"],
        out["ftE"], out["ftEp"], out["anomalous"],
    )
    return out


def _run_block_reference(pair, ps, seed, m_max, anomalous):
    """Reference engine over one block: contract modules, one prime at a time."""
    n = ps.shape[0]
    out = {
        "status": np.zeros(n, dtype=np.int64),
        "trace": np.zeros(n, dtype=np.int64),
        "n1": np.zeros(n, dtype=np.int64),
        "n2": np.zeros(n, dtype=np.int64),
        "n1p": np.zeros(n, dtype=np.int64),
        "n2p": np.zeros(n, dtype=np.int64),
        "ftE": np.zeros(n, dtype=np.int64),
        "ftEp": np.zeros(n, dtype=np.int64),
        "anomalous": np.zeros(n, dtype=np.bool_),
    }
    code = {"bad": 0, "supersingular_iso": 1, "iso": 2, "noniso": 3}
    for i, p in enumerate(ps):
        o = compare_at_prime(pair, int(p), m_max=m_max, anomalous=anomalous, seed=seed)
        out["status"][i] = code[o.status]
        out["trace"][i] = o.trace or 0
        if o.shape_e is not None:
            out["n1"][i] = o.shape_e.n1
            out["n2"][i] = o.shape_e.n2
            out["n1p"][i] = o.shape_ep.n1
            out["n2p"][i] = o.shape_ep.n2
        out["ftE"][i] = sum(1 << m for m, f in enumerate(o.full_torsion_e) if f)
        out["ftEp"][i] = sum(1 << m for m, f in enumerate(o.full_torsion_ep) if f)
        out["anomalous"][i] = o.anomalous
    return out


_WORKER = {}


def _worker_init(pair, seed, m_max, anomalous, engine):
    _WORKER["pair"] = pair
    _WORKER["args"] = (seed, m_max, anomalous)
    _WORKER["engine"] = engine


def _worker_run(ps: np.ndarray):
    seed, m_max, anomalous = _WORKER["args"]
    run = _run_block_kernel if _WORKER["engine"] == "kernel" else _run_block_reference
    return run(_WORKER["pair"], ps, seed, m_max, anomalous)


def _choose_engine(engine: str, X: int) -> str:
    if engine == "auto":
        return "kernel" if X < _kernel.KERNEL_PRIME_LIMIT else "reference"
    if engine not in ("kernel", "reference"):
        raise ValueError(f"unknown engine {engine!r}")
    return engine


def empirical_P(
    pair: RationalCurvePair,
    X: int,
    seed: int = 0,
    workers: int | None = None,
    m_max: int = DEFAULT_M_MAX,
    anomalous: bool = False,
    engine: str = "auto",
    keep_arrays: bool = True,
) -> SweepReport:
    """Sweep all primes p <= X and aggregate the comparison outcomes."""
    if X < 5:
        raise ValueError("X must be at least 5")
    t0 = time.monotonic()
    engine = _choose_engine(engine, X)
    if workers is None:
        workers = os.cpu_count() or 1
    ps = prime_array(X)
    pi_X = int(ps.shape[0])
    cond = pair.conductor
    if cond < (1 << 62):
        good_mask = (ps > 3) & (cond % ps != 0)
    else:
        good_mask = (ps > 3) & np.array([cond % int(p) != 0 for p in ps], dtype=bool)
    good = ps[good_mask]

    blocks = [good[i : i + BLOCK_SIZE] for i in range(0, good.shape[0], BLOCK_SIZE)]
    results = []
    if workers > 1 and len(blocks) > 1:
        import multiprocessing as mp

        ctx = mp.get_context("spawn" if os.name == "nt" else "fork")
        with ctx.Pool(
            processes=min(workers, len(blocks)),
            initializer=_worker_init,
            initargs=(pair, seed, m_max, anomalous, engine),
        ) as pool:
            results = list(pool.map(_worker_run, blocks))
    else:
        run = _run_block_kernel if engine == "kernel" else _run_block_reference
        results = [run(pair, b, seed, m_max, anomalous) for b in blocks]

    if results:
        cols = {k: np.concatenate([r[k] for r in results]) for k in results[0]}
    else:
        cols = _run_block_kernel(pair, np.empty(0, dtype=np.int64), seed, m_max, anomalous)

    bad_idx = cols["status"] < 0
    if np.any(bad_idx):
        i = int(np.nonzero(bad_idx)[0][0])
        raise TheoremViolation(int(good[i]), int(cols["status"][i]), pair.label)

    counts = {
        "bad": int(pi_X - good.shape[0]),
        "supersingular_iso": int(np.count_nonzero(cols["status"] == 1)),
        "iso": int(np.count_nonzero(cols["status"] == 2)),
        "noniso": int(np.count_nonzero(cols["status"] == 3)),
    }
    torsion_e, torsion_ep, e_only, ep_only = [], [], [], []
    for m in range(1, m_max + 1):
        bit = 1 << (m - 1)
        fe = (cols["ftE"] & bit) != 0
        fep = (cols["ftEp"] & bit) != 0
        torsion_e.append(int(np.count_nonzero(fe)))
        torsion_ep.append(int(np.count_nonzero(fep)))
        e_only.append(int(np.count_nonzero(fe & ~fep)))
        ep_only.append(int(np.count_nonzero(fep & ~fe)))

    arrays = {}
    if keep_arrays:
        arrays = {"p": good, **cols}

    return SweepReport(
        label=pair.label,
        X=X,
        pi_X=pi_X,
        seed=seed,
        m_max=m_max,
        ell=pair.ell,
        anomalous_enabled=anomalous,
        counts=counts,
        torsion_e=torsion_e,
        torsion_ep=torsion_ep,
        torsion_e_only=e_only,
        torsion_ep_only=ep_only,
        anomalous_count=int(np.count_nonzero(cols["anomalous"])),
        elapsed=time.monotonic() - t0,
        arrays=arrays,
    )


@dataclass(frozen=True)
class DEstimate:
    """Empirical conditional densities d-hat and d'-hat with their supports."""

    ell: int
    m: int
    d_hat: float | None
    dp_hat: float | None
    support_e: int  # {good p: E has full ell^m torsion}
    support_ep: int
    defect_e: int  # {good p: E has it, E' does not}
    defect_ep: int


def _destimate_from_arrays(report: SweepReport, ell: int, m: int) -> DEstimate:
    arr = report.arrays
    if not arr:
        raise ValueError("report was built without per-prime arrays")
    lm = ell ** m
    fe = (arr["n1"] % lm == 0) & (arr["status"] > 0)
    fep = (arr["n1p"] % lm == 0) & (arr["status"] > 0)
    se = int(np.count_nonzero(fe))
    sep = int(np.count_nonzero(fep))
    de = int(np.count_nonzero(fe & ~fep))
    dep = int(np.count_nonzero(fep & ~fe))
    return DEstimate(
        ell=ell,
        m=m,
        d_hat=de / se if se else None,
        dp_hat=dep / sep if sep else None,
        support_e=se,
        support_ep=sep,
        defect_e=de,
        defect_ep=dep,
    )


def empirical_d(
    pair: RationalCurvePair,
    ell: int,
    m: int,
    X: int,
    seed: int = 0,
    workers: int | None = None,
    report: SweepReport | None = None,
) -> DEstimate:
    """d-hat estimates at level ell^m from a sweep (reusing `report` if given)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if report is None:
        report = empirical_P(pair, X, seed=seed, workers=workers, m_max=DEFAULT_M_MAX)
    if ell == report.ell and m <= report.m_max and not report.arrays:
        return DEstimate(
            ell=ell,
            m=m,
            d_hat=(report.torsion_e_only[m - 1] / report.torsion_e[m - 1])
            if report.torsion_e[m - 1]
            else None,
            dp_hat=(report.torsion_ep_only[m - 1] / report.torsion_ep[m - 1])
            if report.torsion_ep[m - 1]
            else None,
            support_e=report.torsion_e[m - 1],
            support_ep=report.torsion_ep[m - 1],
            defect_e=report.torsion_e_only[m - 1],
            defect_ep=report.torsion_ep_only[m - 1],
        )
    return _destimate_from_arrays(report, ell, m)


def anomalous_density(
    pair: RationalCurvePair,
    X: int,
    seed: int = 0,
    workers: int | None = None,
    report: SweepReport | None = None,
) -> float:
    """Proportion of p <= X that are isomorphic over F_p but not over F_{p^2}."""
    if report is None or not report.anomalous_enabled:
        report = empirical_P(pair, X, seed=seed, workers=workers, anomalous=True)
    return report.anomalous_ratio
