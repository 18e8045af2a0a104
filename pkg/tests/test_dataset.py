import json

import pytest

from isodense.dataset import (
    DatasetError,
    builtin_profiles,
    dump_pairs,
    find_record,
    load_builtin,
    load_pairs,
    record_from_dict,
    record_to_dict,
)
from isodense.density import eval_density, format_rational, parse_rational

REQUIRED_LABELS = {"69.a", "44.a", "38.b", "26.b", "121.a", "144.b", "49.a", "432.e"}


def test_bundled_dataset_contents(records):
    labels = {rec.label for rec in records}
    assert len(records) >= 8
    assert REQUIRED_LABELS <= labels
    for rec in records:
        pair = rec.to_pair()
        assert pair.conductor == rec.conductor
        assert pair.ell == rec.ell


def test_bundled_profiles_evaluate_to_expected(records):
    for rec in records:
        exp = rec.expected_density()
        assert exp is not None
        assert eval_density(rec.profile) == exp


def test_builtin_profiles_map(records):
    profs = builtin_profiles()
    assert set(profs) == {rec.label for rec in records}
    assert format_rational(eval_density(profs["69.a"])) == "7/15"
    assert format_rational(eval_density(profs["144.b"])) == "97/120"
    assert format_rational(eval_density(profs["49.a"])) == "5/12"


def test_discrepancy_annotation(records):
    rec = find_record(records, "432.e")
    assert rec.expected["density"] == "13/16"
    assert rec.expected["density_stated"] == "22/27"
    assert parse_rational(rec.expected["density_stated"]) != eval_density(rec.profile)


def test_find_record_by_curve_label(records):
    assert find_record(records, "144.b4").label == "144.b"
    with pytest.raises(KeyError):
        find_record(records, "999.z")


def test_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert load_pairs(path) == []


def test_roundtrip_idempotent(records, tmp_path):
    p1 = tmp_path / "a.jsonl"
    p2 = tmp_path / "b.jsonl"
    dump_pairs(records, p1)
    again = load_pairs(p1)
    dump_pairs(again, p2)
    assert p1.read_text() == p2.read_text()
    assert [record_to_dict(a) for a in again] == [record_to_dict(b) for b in records]


def test_parse_error_diagnostics(tmp_path):
    path = tmp_path / "broken.jsonl"
    path.write_text('{"label": "x.a", "curves": [\n')
    with pytest.raises(DatasetError) as err:
        load_pairs(path)
    assert "broken.jsonl:1" in str(err.value)


def test_duplicate_labels_rejected(records, tmp_path):
    path = tmp_path / "dup.jsonl"
    line = json.dumps(record_to_dict(records[0]))
    path.write_text(line + "\n" + line + "\n")
    with pytest.raises(DatasetError) as err:
        load_pairs(path)
    assert "duplicate" in str(err.value)


def test_profile_violation_named(records):
    data = record_to_dict(records[0])
    data["profile"]["tail"]["sizeGp"] = data["profile"]["tail"]["sizeG"] * 4
    with pytest.raises(DatasetError) as err:
        record_from_dict(data, where="inline")
    assert "ratio" in str(err.value)


def test_missing_field_named(records):
    data = record_to_dict(records[0])
    del data["conductor"]
    with pytest.raises(DatasetError) as err:
        record_from_dict(data)
    assert "conductor" in str(err.value)


def test_mismatched_expected_density(records):
    data = record_to_dict(records[0])
    data["expected"] = dict(data["expected"])
    data["expected"]["density"] = "1/3"
    with pytest.raises(DatasetError) as err:
        record_from_dict(data)
    assert "density" in str(err.value)


def test_invalid_pair_rejected(records):
    data = record_to_dict(records[0])
    data["curves"][0]["ainvs"] = [0, 0, 0, 0, 0]  # singular
    with pytest.raises(DatasetError):
        record_from_dict(data)
