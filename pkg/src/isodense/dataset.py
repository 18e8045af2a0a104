"""Curve-pair records: JSON Lines ingestion, validation, and the bundled set.

One record per line. Normative fields:

    label                 isogeny-class label, e.g. "69.a"
    curves                [{label, ainvs: [a1,a2,a3,a4,a6]}, {...}]  (E first)
    ell                   isogeny prime
    conductor             shared conductor
    cm_disc?              fundamental CM discriminant of the pair, if CM
    profile?              {ell, head: [{m,sizeG,sizeGp,d,dp}], tail: {M,sizeG,sizeGp,d,dp,g}}
    expected?             {density: "num/den", sweeps: [{X, iso_count, source}], ...}

Rationals are "num/den" strings. `expected` may carry the extension fields
density_stated (a published figure that disagrees with the literal series
evaluation) and note; they are reported, never silently resolved.

The bundled dataset was reconstructed and verified offline against published
invariants and sweep statistics; see scripts/curate_dataset.py for the
full pipeline and the verification gates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .curve import RationalCurve, RationalCurvePair
from .density import (
    DensityProfile,
    eval_density,
    parse_rational,
    profile_from_dict,
    profile_to_dict,
    validate_profile,
)

BUNDLED_RESOURCE = "pairs.jsonl"


class DatasetError(ValueError):
    """Malformed or invalid dataset content; message carries line/field context."""


@dataclass(frozen=True)
class PairRecord:
    label: str
    curve_labels: tuple
    ainvs: tuple  # ((a1..a6), (a1..a6))
    ell: int
    conductor: int
    cm_disc: int | None = None
    profile: DensityProfile | None = None
    expected: dict | None = None

    def to_pair(self) -> RationalCurvePair:
        e = RationalCurve(
            ainvs=self.ainvs[0],
            conductor=self.conductor,
            label=self.curve_labels[0],
            cm_discriminant=self.cm_disc,
        )
        ep = RationalCurve(
            ainvs=self.ainvs[1],
            conductor=self.conductor,
            label=self.curve_labels[1],
            cm_discriminant=self.cm_disc,
        )
        return RationalCurvePair(e=e, e_prime=ep, ell=self.ell, profile=self.profile, label=self.label)

    def expected_density(self):
        if self.expected and "density" in self.expected:
            return parse_rational(self.expected["density"])
        return None

    def expected_sweeps(self) -> list:
        if self.expected:
            return list(self.expected.get("sweeps", []))
        return []


def record_from_dict(data: dict, where: str = "") -> PairRecord:
    def fail(msg):
        raise DatasetError(f"{where}: {msg}" if where else msg)

    for key in ("label", "curves", "ell", "conductor"):
        if key not in data:
            fail(f"missing required field {key!r}")
    curves = data["curves"]
    if not isinstance(curves, list) or len(curves) != 2:
        fail("curves must be a two-element list")
    for c in curves:
        if "label" not in c or "ainvs" not in c or len(c["ainvs"]) != 5:
            fail("each curve needs a label and five a-invariants")
    profile = None
    if data.get("profile") is not None:
        try:
            profile = profile_from_dict(data["profile"])
        except (KeyError, ValueError) as exc:
            fail(f"bad profile: {exc}")
        violations = validate_profile(profile)
        if violations:
            fail(f"record {data['label']!r} profile invalid: " + "; ".join(violations))
    rec = PairRecord(
        label=str(data["label"]),
        curve_labels=(str(curves[0]["label"]), str(curves[1]["label"])),
        ainvs=(tuple(int(a) for a in curves[0]["ainvs"]), tuple(int(a) for a in curves[1]["ainvs"])),
        ell=int(data["ell"]),
        conductor=int(data["conductor"]),
        cm_disc=int(data["cm_disc"]) if data.get("cm_disc") is not None else None,
        profile=profile,
        expected=data.get("expected"),
    )
    try:
        rec.to_pair()
    except ValueError as exc:
        fail(f"record {data['label']!r} does not define a valid curve pair: {exc}")
    if rec.profile is not None and rec.ell != rec.profile.ell:
        fail(f"record {data['label']!r}: profile ell {rec.profile.ell} != record ell {rec.ell}")
    exp = rec.expected_density()
    if exp is not None and rec.profile is not None and eval_density(rec.profile) != exp:
        fail(
            f"record {data['label']!r}: expected density {data['expected']['density']} "
            f"does not equal the profile evaluation"
        )
    return rec


def record_to_dict(rec: PairRecord) -> dict:
    out = {
        "label": rec.label,
        "curves": [
            {"label": rec.curve_labels[0], "ainvs": list(rec.ainvs[0])},
            {"label": rec.curve_labels[1], "ainvs": list(rec.ainvs[1])},
        ],
        "ell": rec.ell,
        "conductor": rec.conductor,
    }
    if rec.cm_disc is not None:
        out["cm_disc"] = rec.cm_disc
    if rec.profile is not None:
        out["profile"] = profile_to_dict(rec.profile)
    if rec.expected is not None:
        out["expected"] = rec.expected
    return out


def load_pairs(path) -> list[PairRecord]:
    """Parse and validate a JSON Lines dataset; duplicate labels are rejected."""
    records = []
    seen = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            rec = record_from_dict(data, where=f"{path}:{lineno}")
            if rec.label in seen:
                raise DatasetError(f"{path}:{lineno}: duplicate label {rec.label!r}")
            seen.add(rec.label)
            records.append(rec)
    return records


def dump_pairs(records, path):
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(record_to_dict(rec)) + "\n")


def load_builtin() -> list[PairRecord]:
    """The dataset bundled with the package."""
    ref = resources.files("isodense.data").joinpath(BUNDLED_RESOURCE)
    with resources.as_file(ref) as path:
        return load_pairs(path)


def builtin_profiles() -> dict:
    """label -> DensityProfile for every bundled record that has one."""
    return {rec.label: rec.profile for rec in load_builtin() if rec.profile is not None}


def find_record(records, label: str) -> PairRecord:
    for rec in records:
        if rec.label == label:
            return rec
    for rec in records:
        if label in (rec.curve_labels[0], rec.curve_labels[1]):
            return rec
    raise KeyError(f"no pair with label {label!r} in dataset")
