import json
import math

import pytest

from pspec.bounds import (
    BoundId,
    evaluate_bound,
    reports_to_csv,
    reports_to_json,
    run_suite,
)
from pspec.errors import InvalidConfig, MissingParam, PreconditionViolated
from pspec.geometry import ShapeSpec, rasterize_shape

H = 1 / 32


@pytest.fixture(scope="module")
def disk():
    return rasterize_shape(ShapeSpec.disk(1.0), H)


@pytest.fixture(scope="module")
def square():
    return rasterize_shape(ShapeSpec.square(1.0), H)


@pytest.fixture(scope="module")
def annulus():
    return rasterize_shape(ShapeSpec.annulus(0.5, 1.0), H)


@pytest.mark.parametrize(
    "bid",
    [
        BoundId.DOMAIN_MONOTONICITY_UPPER,
        BoundId.FABER_KRAHN,
        BoundId.CHEEGER_LOWER,
        BoundId.OSSERMAN_CROKE_SIMPLE,
        BoundId.MAKAI_P1,
        BoundId.CONVEX_LOWER,
        BoundId.INFTY_IDENTITY,
    ],
)
def test_square_bounds_hold(square, bid):
    rep = evaluate_bound(bid, square, 2.0)
    assert rep.satisfied is True
    assert not rep.skipped


def test_accepts_string_id(square):
    rep = evaluate_bound("FABER_KRAHN", square, 2.0)
    assert rep.id is BoundId.FABER_KRAHN
    assert rep.satisfied is True


def test_faber_krahn_equality_on_disk(disk):
    # the extremal domain: analytic area makes both sides algebraically equal
    rep = evaluate_bound(BoundId.FABER_KRAHN, disk, 2.0, {"area_true": math.pi})
    assert rep.satisfied is True
    assert rep.slack == pytest.approx(0.0, abs=1e-12)


def test_cheeger_slack_positive_on_disk(disk):
    rep = evaluate_bound(BoundId.CHEEGER_LOWER, disk, 2.0)
    assert rep.satisfied is True
    assert rep.slack > 0.05


def test_infty_identity_slack_zero(disk):
    rep = evaluate_bound(BoundId.INFTY_IDENTITY, disk, 2.0)
    assert rep.satisfied is True
    assert abs(rep.slack) <= 1e-9


def test_lieb_lower_requires_alpha(square):
    with pytest.raises(MissingParam):
        evaluate_bound(BoundId.LIEB_LOWER, square, 2.0)
    rep = evaluate_bound(BoundId.LIEB_LOWER, square, 2.0, {"alpha": 0.5})
    assert rep.satisfied is True


def test_mazya_requires_gamma(square):
    with pytest.raises(MissingParam):
        evaluate_bound(BoundId.MAZYA_SHUBIN_RATIO, square, 1.5)


def test_preconditions_are_reported():
    sq = rasterize_shape(ShapeSpec.square(1.0), H)
    ann = rasterize_shape(ShapeSpec.annulus(0.5, 1.0), H)
    ell = rasterize_shape(ShapeSpec.ell_shape(1.0, 0.5), H)
    with pytest.raises(PreconditionViolated):
        evaluate_bound(BoundId.OSSERMAN_CROKE_K, sq, 2.0)  # needs k >= 2
    with pytest.raises(PreconditionViolated):
        evaluate_bound(BoundId.OSSERMAN_CROKE_SIMPLE, ann, 2.0)  # needs k = 1
    with pytest.raises(PreconditionViolated):
        evaluate_bound(BoundId.CONVEX_LOWER, ell, 2.0)
    with pytest.raises(PreconditionViolated):
        evaluate_bound(BoundId.MAZYA_SHUBIN_RATIO, sq, 2.0, {"gamma": 0.5})  # p = n
    with pytest.raises(PreconditionViolated):
        evaluate_bound(BoundId.HIGH_P_INRADIUS, sq, 2.0)  # needs p > n


def test_osserman_croke_k_on_annulus(annulus):
    rep = evaluate_bound(BoundId.OSSERMAN_CROKE_K, annulus, 2.0)
    assert rep.satisfied is True
    assert rep.inputs["k"]["value"] == 2


def test_high_p_family_stat(square):
    rep = evaluate_bound(BoundId.HIGH_P_INRADIUS, square, 3.0)
    assert rep.property_level == "family"
    assert rep.satisfied is None
    assert rep.lhs > 0


def test_report_json_shape(square):
    rep = evaluate_bound(BoundId.FABER_KRAHN, square, 2.0, {"domain_label": "square(a=1)"})
    obj = rep.to_json()
    assert obj["id"] == "FABER_KRAHN"
    assert obj["domain"] == "square(a=1)"
    assert obj["satisfied"] is True
    assert "lambda" in obj["inputs"]


@pytest.fixture(scope="module")
def small_suite():
    catalog = [ShapeSpec.disk(1.0), ShapeSpec.annulus(0.5, 1.0)]
    return run_suite(catalog, [3.0], {"h": H})


def test_suite_ordering_and_rows(small_suite):
    rows = small_suite
    # catalog order x bound-id order, aggregates last
    assert rows[0].domain_label == "disk(r=1)"
    per_instance = [r for r in rows if r.domain_label != "catalog"]
    assert len(per_instance) == 2 * len(BoundId)
    ids = [r.id for r in per_instance[: len(BoundId)]]
    assert ids == list(BoundId)


def test_suite_no_violations(small_suite):
    bad = [r for r in small_suite if not r.skipped and r.satisfied is False]
    assert bad == []


def test_suite_skips_are_first_class(small_suite):
    skipped = [r for r in small_suite if r.skipped]
    assert skipped, "annulus at p = 3 must skip simply-connected-only bounds"
    assert all(r.satisfied is None and r.skip_reason for r in skipped)


def test_suite_family_aggregate(small_suite):
    agg = [r for r in small_suite if r.domain_label == "catalog"]
    assert len(agg) == 1  # HIGH_P at p = 3; no 1 < p < n rows requested
    assert agg[0].id is BoundId.HIGH_P_INRADIUS
    assert agg[0].satisfied is True


def test_suite_rasterization_error_rows():
    rows = run_suite([ShapeSpec.disk(0.02), ShapeSpec.square(1.0)], [2.0], {"h": H})
    bad = [r for r in rows if r.domain_label == "disk(r=0.02)"]
    assert len(bad) == len(BoundId)
    assert all(r.satisfied is False for r in bad)
    assert all("FeatureTooThin" in r.inputs["error"]["value"] for r in bad)
    good = [r for r in rows if r.domain_label == "square(a=1)" and r.satisfied is True]
    assert good


def test_suite_validates_inputs():
    with pytest.raises(InvalidConfig):
        run_suite([], [2.0])
    with pytest.raises(InvalidConfig):
        run_suite([ShapeSpec.disk(1.0)], [])


def test_suite_threaded_matches_serial(monkeypatch):
    catalog = [ShapeSpec.disk(1.0), ShapeSpec.square(1.0)]
    serial = run_suite(catalog, [2.0], {"h": H, "threads": 1})
    threaded = run_suite(catalog, [2.0], {"h": H, "threads": 4})
    assert reports_to_json(serial) == reports_to_json(threaded)
    assert reports_to_csv(serial) == reports_to_csv(threaded)


def test_csv_schema(small_suite):
    csv = reports_to_csv(small_suite)
    lines = csv.strip().split("\n")
    assert lines[0] == "id,domain,p,lhs,rhs,satisfied,slack,skipped,skip_reason"
    assert len(lines) == len(small_suite) + 1
    # skip reasons contain commas and must be quoted
    assert any('"' in ln for ln in lines[1:])


def test_json_roundtrip(small_suite):
    payload = reports_to_json(small_suite)
    assert json.loads(json.dumps(payload)) == payload
