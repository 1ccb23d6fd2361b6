import csv
import json

import numpy as np
import pytest

from permris_figures import FigureSpec, SchemaError, render
from permris_figures.cli import main as cli_main
from permris_figures.render import _pattern_grid, load_rows


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


@pytest.fixture
def beta_csv(tmp_path):
    path = tmp_path / "beta.csv"
    cols = ["delta", "beta", "perm_id", "M", "seed"]
    rows = []
    deltas = [0.05, 0.1, 0.2]
    curves = {"identity": [1.0, 0.9, 0.5], "random-1": [0.98, 0.7, 0.2], "random-2": [0.99, 0.8, 0.3]}
    for pid, betas in curves.items():
        for d, b in zip(deltas, betas):
            rows.append([repr(d), repr(b), pid, 5, 0])
    write_csv(path, cols, rows)
    return path


@pytest.fixture
def tau_csv(tmp_path):
    path = tmp_path / "tau_cdf.csv"
    cols = ["tau", "cdf", "perm_id", "M", "delta", "seed"]
    taus = [0.31, 0.35, 0.4, 0.42, 1.0]
    rows = [[repr(t), repr((i + 1) / 5), i, 5, 0.3, 0] for i, t in enumerate(taus)]
    write_csv(path, cols, rows)
    return path


@pytest.fixture
def pattern_csv(tmp_path):
    path = tmp_path / "pattern.csv"
    cols = ["rho_x", "rho_y", "value", "M", "perm_id"]
    grid = np.linspace(-1, 1, 21)
    rows = []
    for x in grid:
        for y in grid:
            value = 1.0 if abs(x + y) < 1e-9 else 0.05
            rows.append([repr(float(x)), repr(float(y)), repr(value), 10, "identity"])
    write_csv(path, cols, rows)
    return path


def test_beta_ensemble_renders(beta_csv, tmp_path):
    out = tmp_path / "beta.png"
    summary = render(FigureSpec((str(beta_csv),), "beta_ensemble", str(out)))
    assert out.exists() and out.stat().st_size > 0
    assert summary["extents"]["x"] == (0.05, 0.2)
    assert summary["extents"]["y"] == (0.2, 1.0)
    assert summary["extents"]["n_curves"] == 3


def test_two_point_curve_renders(tmp_path):
    path = tmp_path / "beta.csv"
    write_csv(path, ["delta", "beta", "perm_id", "M", "seed"],
              [["0.1", "0.9", "p", 4, 0], ["0.2", "0.5", "p", 4, 0]])
    out = tmp_path / "fig.png"
    summary = render(FigureSpec((str(path),), "beta_ensemble", str(out)))
    assert out.exists()
    assert summary["n_rows"] == 2


def test_tau_cdf_renders_step(tau_csv, tmp_path):
    out = tmp_path / "tau.png"
    summary = render(FigureSpec((str(tau_csv),), "tau_cdf", str(out)))
    assert out.exists() and out.stat().st_size > 0
    assert summary["extents"]["x"] == (0.31, 1.0)
    assert summary["extents"]["y"] == (0.2, 1.0)


def test_identity_cdf_vertical_step(tmp_path):
    # identity permutation: every tau is 1, the CDF is a single vertical step
    path = tmp_path / "tau_cdf.csv"
    rows = [[repr(1.0), repr((i + 1) / 4), i, 5, 0.3, 0] for i in range(4)]
    write_csv(path, ["tau", "cdf", "perm_id", "M", "delta", "seed"], rows)
    out = tmp_path / "tau.png"
    summary = render(FigureSpec((str(path),), "tau_cdf", str(out)))
    assert summary["extents"]["x"] == (1.0, 1.0)


def test_pattern_heatmap_renders(pattern_csv, tmp_path):
    out = tmp_path / "pattern.png"
    summary = render(FigureSpec((str(pattern_csv),), "pattern_heatmap", str(out)))
    assert out.exists() and out.stat().st_size > 0
    assert summary["extents"]["value"] == (0.05, 1.0)
    assert summary["extents"]["n_panels"] == 1


def test_pattern_grid_ridge(pattern_csv):
    rows = load_rows((str(pattern_csv),), "pattern_heatmap")
    grids = _pattern_grid(rows)
    xs, ys, matrix = grids["identity"]
    n = xs.size
    ridge = [matrix[i, n - 1 - i] for i in range(n)]
    off = [matrix[i, i] for i in range(n) if abs(xs[i] + ys[i]) > 1e-9]
    assert min(ridge) == pytest.approx(1.0)
    assert max(off) < 0.5


def test_schema_error_names_column(tmp_path):
    path = tmp_path / "bad.csv"
    write_csv(path, ["delta", "beta", "perm_id", "M"], [["0.1", "0.5", "p", 4]])
    with pytest.raises(SchemaError) as err:
        render(FigureSpec((str(path),), "beta_ensemble", str(tmp_path / "x.png")))
    assert err.value.column == "seed"


def test_cli_schema_error_exit(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    write_csv(path, ["tau", "cdf"], [["0.5", "1.0"]])
    code = cli_main(["tau_cdf", "--in", str(path), "--out", str(tmp_path / "x.png")])
    assert code == 2
    assert "perm_id" in capsys.readouterr().err


def test_cli_renders(beta_csv, tmp_path, capsys):
    out = tmp_path / "fig.png"
    code = cli_main(["beta_ensemble", "--in", str(beta_csv), "--out", str(out)])
    assert code == 0
    assert out.exists()


def test_extents_identical_across_runs(beta_csv, tau_csv, pattern_csv, tmp_path):
    for kind, src in (("beta_ensemble", beta_csv), ("tau_cdf", tau_csv),
                      ("pattern_heatmap", pattern_csv)):
        a = render(FigureSpec((str(src),), kind, str(tmp_path / "a.png")))
        b = render(FigureSpec((str(src),), kind, str(tmp_path / "b.png")))
        assert json.dumps(a["extents"], sort_keys=True) == json.dumps(b["extents"], sort_keys=True)


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ValueError):
        FigureSpec((), "scatter", str(tmp_path / "x.png"))
