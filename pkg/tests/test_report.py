import csv
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from patchlab import svg
from patchlab.statlab import diagnostics, fit_formula, get_equation, model_grid
from patchlab.statlab.report import (
    CURVE_COLUMNS,
    format_summary,
    prediction_curves,
    write_coefficients_csv,
    write_curves_csv,
    write_diagnostics_csv,
)

NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture(scope="module")
def interaction_poly():
    return fit_formula(get_equation(5).formula, model_grid())


def test_summary_text_layout(interaction_poly):
    text = format_summary(interaction_poly)
    lines = text.splitlines()
    assert lines[1] == "lm(formula = map50 ~ model + poly(Threshold, 3) * Overlap)"
    assert any(line.startswith("(Intercept)") and "0.874401" in line for line in lines)
    assert "modelYOLOv11n                0.017667   0.005502   3.211  0.003504 **" in lines
    assert "Residual standard error: 0.01348 on 26 degrees of freedom" in lines
    assert "F-statistic: 106.1 on 9 and 26 DF,  p-value: < 2.2e-16" in lines


def test_coefficient_csv(tmp_path, interaction_poly):
    write_coefficients_csv(interaction_poly, tmp_path / "c.csv")
    rows = list(csv.DictReader(open(tmp_path / "c.csv")))
    assert [r["term"] for r in rows] == interaction_poly.names
    assert float(rows[0]["estimate"]) == pytest.approx(0.874401, abs=5e-7)


def test_diagnostics_csv(tmp_path, interaction_poly):
    write_diagnostics_csv(diagnostics(interaction_poly), tmp_path / "d.csv")
    rows = list(csv.reader(open(tmp_path / "d.csv")))
    assert len(rows) == 37


def test_prediction_curves(tmp_path, interaction_poly):
    rows = prediction_curves(interaction_poly, [0.0, 0.3], np.linspace(0.1, 1.0, 5), {"YOLOv11n": {"model": "YOLOv11n"}})
    assert len(rows) == 10
    assert all(lo <= m <= hi for *_, m, lo, hi, _ in rows)
    write_curves_csv(rows, tmp_path / "k.csv")
    assert next(csv.reader(open(tmp_path / "k.csv"))) == list(CURVE_COLUMNS)


def grid_panels():
    panels = {}
    for r in model_grid():
        panels.setdefault(r.model, {})[(r.threshold, r.overlap)] = r.map50
    return panels


def test_bar_chart_has_one_bar_per_run():
    root = ET.fromstring(svg.to_bytes(svg.bar_chart(grid_panels(), "mAP@0.5")))
    bars = [e for e in root.iter(f"{NS}rect") if e.get("class") == "bar"]
    assert len(bars) == 36
    assert len([g for g in root.iter(f"{NS}g") if g.get("class") == "panel"]) == 3
    values = sorted(float(b.get("data-value")) for b in bars)
    assert values == sorted(r.map50 for r in model_grid())


def test_svg_bytes_are_deterministic(tmp_path):
    a = svg.to_bytes(svg.bar_chart(grid_panels(), "t"))
    b = svg.to_bytes(svg.bar_chart(grid_panels(), "t"))
    assert a == b
    path = svg.write_svg(svg.bar_chart(grid_panels(), "t"), tmp_path / "x.svg")
    assert path.read_bytes() == a


def test_scatter_and_curves_parse(interaction_poly):
    d = diagnostics(interaction_poly)
    root = ET.fromstring(svg.to_bytes(svg.scatter(d.fitted, d.residuals, "r", "fitted", "residual")))
    assert len([c for c in root.iter(f"{NS}circle") if c.get("class") == "point"]) == 36
    x = np.linspace(0, 1, 5)
    root = ET.fromstring(svg.to_bytes(svg.curves({"a": (x, x, x - 0.1, x + 0.1)}, {"a": (x, x)}, "c", "T", "mAP")))
    assert len([p for p in root.iter(f"{NS}polygon") if p.get("class") == "band"]) == 1
