import json
from fractions import Fraction

import pytest

from tropical.errors import ManifestError
from tropical.manifest import load_manifest, parse
from tropical.period_engine import check_normalized


def _line_of(text: str, token: str) -> int:
    return next(i for i, line in enumerate(text.splitlines(), 1) if token in line)


def test_tate_fixture(manifest):
    m = manifest("tate_k2")
    assert m.name == "tate_k2"
    assert m.n == 1
    assert m.affine.kinks.kink("v0") == 2
    assert sorted(m.cycles) == ["beta"]
    assert sorted(m.skeletons) == ["skeleton"]
    assert m.gluing.is_trivial()


def test_discriminant_only_where_declared(manifest):
    assert not manifest("torus").affine.discriminant
    assert manifest("focus_focus").affine.discriminant


def test_cell_kinks_expand_to_pieces(manifest):
    kinks = manifest("focus_focus").affine.kinks
    assert kinks.kink("A<rho") == 1
    assert kinks.kink("C<rho") == 1


def test_gluing_is_attached_to_a_side(manifest):
    m = manifest("torus")
    ((piece, side),) = m.gluing.values
    assert piece == "v10<u10"
    assert side.cell == "f10"


def test_missing_file():
    with pytest.raises(ManifestError) as exc:
        load_manifest("/nonexistent/manifest.json")
    assert exc.value.kind == "Syntax"


def test_invalid_json_reports_its_line():
    with pytest.raises(ManifestError) as exc:
        parse('{\n  "name": "broken",\n  "cells": [\n}')
    assert exc.value.kind == "Syntax"
    assert exc.value.line == 4


def test_unknown_section(fixture_data):
    data = fixture_data("circle")
    data["colour"] = "blue"
    text = json.dumps(data, indent=2)
    with pytest.raises(ManifestError) as exc:
        parse(text)
    assert exc.value.kind == "Syntax"
    assert exc.value.line == _line_of(text, '"colour"')


def test_dangling_route_piece_reports_its_line(fixtures_dir):
    text = (fixtures_dir / "torus.json").read_text(encoding="utf-8")
    text = text.replace('"route": ["v10<u10", "v00<u00"]}', '"route": ["v10<u10", "v00<u99"]}', 1)
    with pytest.raises(ManifestError) as exc:
        parse(text)
    assert exc.value.kind == "DanglingId"
    assert exc.value.line == _line_of(text, "v00<u99")
    assert exc.value.prefixed().startswith(f"cli: manifest:{exc.value.line}: DanglingId")


def test_declared_dimension_must_match(fixture_data):
    data = fixture_data("torus")
    data["dimension"] = 3
    with pytest.raises(ManifestError) as exc:
        parse(json.dumps(data, indent=2))
    assert exc.value.kind == "DimensionMismatch"


def test_cycle_vector_length(fixture_data):
    data = fixture_data("torus")
    data["cycles"][2]["edges"][0]["xi"] = [1, 0, 0]
    with pytest.raises(ManifestError) as exc:
        parse(json.dumps(data, indent=2))
    assert exc.value.kind == "DimensionMismatch"


def test_per_piece_kinks_need_refined_mode(fixture_data):
    data = fixture_data("focus_focus")
    data["affine"]["kinks"] = {"A<rho": 1, "C<rho": 1}
    with pytest.raises(ManifestError) as exc:
        parse(json.dumps(data, indent=2))
    assert exc.value.kind == "Syntax"


def test_duplicate_cycle_names(fixture_data):
    data = fixture_data("tate_k1")
    data["cycles"].append(dict(data["cycles"][0]))
    with pytest.raises(ManifestError):
        parse(json.dumps(data, indent=2))


def test_slab_section(fixture_data):
    data = fixture_data("tate_k2")
    data["slabs"] = [{"carrier": "v0", "order": 2, "terms": [[[0], 0, 1], [[0], 1, "1/2"]]}]
    m = parse(json.dumps(data, indent=2))
    slab = m.slabs["v0"]
    assert slab.terms[((0,), 1)] == Fraction(1, 2)
    assert not check_normalized(slab)


def test_slab_exponents_must_be_tangent(fixture_data):
    data = fixture_data("tate_k2")
    data["slabs"] = [{"carrier": "v0", "order": 1, "terms": [[[0], 0, 1], [[1], 1, 1]]}]
    with pytest.raises(ManifestError) as exc:
        parse(json.dumps(data, indent=2))
    assert exc.value.kind == "DimensionMismatch"


def test_complex_coefficients(fixture_data):
    data = fixture_data("circle")
    data["gluing"]["values"][0]["s"] = [[0.0, 2.0]]
    m = parse(json.dumps(data, indent=2))
    (s,) = list(m.gluing.values.values())[0]
    assert s == 2j


def test_options_are_kept(fixture_data):
    data = fixture_data("circle")
    data["options"] = {"order": 3}
    assert parse(json.dumps(data, indent=2)).options == {"order": 3}
