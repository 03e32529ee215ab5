import os

import numpy as np
import pytest

from figgen.figures import PANELS, FigureSpec, build_panels, draw_panel, render
from figgen.style import STYLE


def loglog_slope(x, y):
    return np.polyfit(np.log(x), np.log(y), 1)[0]


def test_panel_columns_and_axis_kinds(write_csv, refinement_rows):
    path = write_csv(refinement_rows())
    panels = build_panels(FigureSpec(path, "refine"))
    assert [p.column for p in panels] == ["cond1", "err_l2", "err_h1"]
    assert all(p.x_label == "mesh size h" for p in panels)

    gamma_panels = build_panels(FigureSpec(path, "gamma"))
    assert all(p.guide is None for p in gamma_panels)
    assert all(p.x_label == "penalty weight" for p in gamma_panels)


def test_refinement_guides_use_expected_exponents(write_csv, refinement_rows):
    path = write_csv(refinement_rows())
    panels = build_panels(FigureSpec(path, "refine", {"order": 1}))
    slopes = []
    for panel in panels:
        gx, gy, _ = panel.guide
        slopes.append(round(loglog_slope(gx, gy)))
    assert slopes == [-2, 2, 1]


def test_exact_quadratic_series_parallel_to_guide(write_csv, refinement_rows):
    # err_l2 = h^2 exactly: the plotted series must be parallel to the
    # h^2 guide within slope tolerance 0.05.
    path = write_csv(refinement_rows())
    panels = build_panels(FigureSpec(path, "refine"))
    l2_panel = panels[1]
    x, y = l2_panel.series["S-Ag"]
    gx, gy, _ = l2_panel.guide
    assert abs(loglog_slope(x, y) - loglog_slope(gx, gy)) <= 0.05


def test_guides_anchor_at_finest_reduced_space_datum(write_csv, refinement_rows):
    rows = refinement_rows("S-Ag") + refinement_rows("F-GP", ns=(8, 16))
    path = write_csv(rows)
    panels = build_panels(FigureSpec(path, "refine"))
    x, y = panels[1].series["S-Ag"]
    gx, gy, _ = panels[1].guide
    assert gx[0] == x[0] and gy[0] == y[0]  # finest h sorts first


def test_build_panels_is_pure(write_csv, refinement_rows):
    path = write_csv(refinement_rows())
    a = build_panels(FigureSpec(path, "refine"))
    b = build_panels(FigureSpec(path, "refine"))
    for pa, pb in zip(a, b):
        for method in pa.series:
            assert np.array_equal(pa.series[method][0], pb.series[method][0])
            assert np.array_equal(pa.series[method][1], pb.series[method][1])
        assert np.array_equal(pa.guide[1], pb.guide[1])


def test_mixed_orders_require_filter(write_csv, refinement_rows):
    rows = refinement_rows() + [
        {**r, "order": 2} for r in refinement_rows(ns=(8, 16))
    ]
    path = write_csv(rows)
    from figgen.data import NoDataError

    with pytest.raises(NoDataError, match="order"):
        build_panels(FigureSpec(path, "refine"))
    panels = build_panels(FigureSpec(path, "refine", {"order": 2}))
    gx, gy, label = panels[1].guide
    assert label == "h^3"


def test_drawn_panels_are_loglog_with_one_legend_entry_per_method(
    write_csv, refinement_rows
):
    rows = refinement_rows("S-Ag") + refinement_rows("F-GP")
    path = write_csv(rows)
    panels = build_panels(FigureSpec(path, "refine"))
    fig = draw_panel(panels[0])
    ax = fig.axes[0]
    assert ax.get_xscale() == "log" and ax.get_yscale() == "log"
    labels = [t.get_text() for t in ax.get_legend().get_texts()]
    assert labels.count("S-Ag") == 1 and labels.count("F-GP") == 1
    assert "h^-2" in labels


def test_render_writes_one_file_per_panel(write_csv, tmp_path):
    # a single-method single-gamma CSV still renders: one point per panel
    path = write_csv([{"method": "F-GP", "gamma": 10.0}])
    out = tmp_path / "figs"
    paths = render(FigureSpec(path, "gamma"), str(out))
    assert len(paths) == len(PANELS)
    for p in paths:
        assert os.path.getsize(p) > 0
    assert sorted(os.path.basename(p) for p in paths) == [
        "gamma_cond1.png",
        "gamma_err_h1.png",
        "gamma_err_l2.png",
    ]


def test_every_benchmark_method_has_a_style():
    assert set(STYLE) == {
        "NONE",
        "F-GP",
        "A-GP",
        "B-GP-i",
        "W-Ag-L2",
        "W-Ag-GRAD",
        "S-Ag",
    }
    markers = [m for m, _ in STYLE.values()]
    assert len(set(markers)) == len(markers)


def test_spec_validation():
    with pytest.raises(ValueError):
        FigureSpec("x.csv", "scatter").validate()
    with pytest.raises(ValueError):
        FigureSpec("x.csv", "refine", guides=((2, "h^2"),)).validate()
