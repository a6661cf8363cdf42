import io

import numpy as np
import pytest

from patchlab.errors import InvalidArgument, SchemaError
from patchlab.statlab import ExperimentRecord, get_equation, model_grid, size_grid, summarize_results
from patchlab.statlab.experiments import parse_experiments, percent, read_experiments, write_records
from patchlab.statlab.reconcile import fit_subsets, leave_one_level_out, residual_df_consistent, score_subsets


def test_bundled_grids_are_complete():
    grid = model_grid()
    assert len(grid) == 36
    for m in ("Co-DETR", "faster-rcnn", "YOLOv11n"):
        cells = {(r.threshold, r.overlap) for r in grid if r.model == m}
        assert cells == {(t, o) for t in (0.1, 0.3, 0.5, 1.0) for o in (0.0, 0.1, 0.3)}
    sizes = size_grid()
    assert len(sizes) == 45 and {r.size for r in sizes} == {"large", "medium", "small"}
    assert all(r.images_train > 0 and r.instances_train > 0 for r in sizes)


def test_summary_by_direct_average():
    rows = [r for r in model_grid() if r.model == "YOLOv11n"]
    s = next(x for x in summarize_results(model_grid()) if x.model == "YOLOv11n" and x.metric == "map50")
    assert s.average == pytest.approx(np.mean([r.map50 for r in rows]), abs=1e-15)
    assert percent(s.average) == 88.2 and percent(s.maximum) == 93.2
    assert (s.argmax_threshold, s.argmax_overlap) == (1.0, 0.0)


def test_summary_codetr_max():
    s = next(x for x in summarize_results(model_grid()) if x.model == "Co-DETR" and x.metric == "map50")
    assert percent(s.maximum) == 93.1 and (s.argmax_threshold, s.argmax_overlap) == (1.0, 0.1)


def test_summary_single_row():
    r = ExperimentRecord("m", 0.5, 0.1, 0.8, 0.6)
    (a, b) = summarize_results([r])
    assert a.average == a.maximum == 0.8 and b.average == b.maximum == 0.6


def test_summary_tie_goes_to_first():
    rows = [ExperimentRecord("m", 0.1, 0.0, 0.8, 0.5), ExperimentRecord("m", 0.3, 0.1, 0.8, 0.5)]
    s = summarize_results(rows)[0]
    assert (s.argmax_threshold, s.argmax_overlap) == (0.1, 0.0)


def test_summary_empty():
    with pytest.raises(InvalidArgument):
        summarize_results([])


def test_percent_rounds_half_up():
    assert percent(0.8645) == 86.5
    assert percent(0.86449) == 86.4
    assert percent(0.7125, 2) == 71.25


def test_missing_column_named():
    with pytest.raises(SchemaError, match="overlap"):
        parse_experiments(io.StringIO("model,threshold,map50,map5095\nx,0.1,0.5,0.4\n"))


def test_required_extra_columns():
    text = "model,threshold,overlap,map50,map5095\nx,0.1,0.0,0.5,0.4\n"
    with pytest.raises(SchemaError, match="size"):
        parse_experiments(io.StringIO(text), require=("size",))


def test_bad_value_has_line():
    with pytest.raises(SchemaError) as e:
        parse_experiments(io.StringIO("model,threshold,overlap,map50,map5095\nx,abc,0.0,0.5,0.4\n"), "f.csv")
    assert e.value.location == "f.csv:2"


def test_out_of_range_record():
    with pytest.raises(SchemaError):
        parse_experiments(io.StringIO("model,threshold,overlap,map50,map5095\nx,0.1,0.0,1.5,0.4\n"))


def test_write_read_round_trip(tmp_path):
    path = tmp_path / "s.csv"
    write_records(size_grid(), path)
    assert read_experiments(path) == size_grid()


def test_leave_one_threshold_out_subsets():
    subs = leave_one_level_out(size_grid(), "threshold")
    assert sorted(subs) == [f"threshold!={t:g}" for t in (0.1, 0.2, 0.3, 0.4, 0.5)]
    assert all(len(v) == 36 for v in subs.values())


def test_fit_subsets_reports_failures_and_comparisons():
    subs = leave_one_level_out(size_grid(), "threshold")
    forms = [("additive", get_equation(10).formula), ("interaction", get_equation(11).formula),
             ("spline", get_equation(13).formula)]
    fits = fit_subsets(subs, forms)
    assert len(fits) == 15
    # dropping the lowest threshold leaves the spline knot at the data boundary
    bad = [f for f in fits if f.error]
    assert [(f.subset, f.label) for f in bad] == [("threshold!=0.1", "spline")]
    inter = [f for f in fits if f.label == "interaction"]
    assert all(f.f_vs_prev is not None and f.res_df == 36 - 13 for f in inter)
    targets = {"interaction": {"res_df": 23, "rss": inter[0].rss}}
    assert residual_df_consistent(fits, targets) == {s: True for s in subs}
    assert score_subsets(fits, targets)[0] == (inter[0].subset, 0.0)
