"""End-to-end figure regeneration from CSVs produced by the permris CLI.

Exercises the full pipeline over the producer's external interface only
(subprocess + CSV files); skipped when the permris CLI is not installed.
"""

import csv
import shutil
import subprocess

import numpy as np
import pytest

from permris_figures import FigureSpec, render
from permris_figures.render import _pattern_grid, load_rows

PERMRIS = shutil.which("permris")

pytestmark = pytest.mark.skipif(PERMRIS is None, reason="permris CLI not installed")


def run_cli(*argv):
    proc = subprocess.run([PERMRIS, *argv], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


@pytest.fixture(scope="module")
def csv_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("csv")

    beta = root / "beta.csv"
    header_written = False
    delta_grid = "0.02,0.05,0.1,0.15,0.2,0.3,0.4"
    for spec, seed in (("identity", 0), ("random", 1), ("random", 2), ("random", 3), ("random", 4)):
        part = root / f"beta_{spec}_{seed}.csv"
        run_cli("beta", "--m", "5", "--perm", spec, "--seed", str(seed),
                "--delta", delta_grid, "--n-starts", "200", "--threads", "1",
                "--out", str(part))
        with open(part) as fh:
            lines = fh.read().splitlines()
        with open(beta, "a") as fh:
            if not header_written:
                fh.write(lines[0] + "\n")
                header_written = True
            fh.write("\n".join(lines[1:]) + "\n")

    run_cli("tau-cdf", "--m", "5", "--delta", "0.3", "--n-perms", "100",
            "--n-starts", "400", "--seed", "7", "--out", str(root / "tau_cdf.csv"))

    run_cli("pattern", "--m", "10", "--perm", "identity", "--grid-n", "41",
            "--out", str(root / "pattern_identity.csv"))
    run_cli("pattern", "--m", "10", "--perm", "random", "--seed", "3", "--grid-n", "41",
            "--out", str(root / "pattern_random.csv"))
    return root


def test_beta_ensemble_figure(csv_dir, tmp_path):
    out = tmp_path / "beta.png"
    summary = render(FigureSpec((str(csv_dir / "beta.csv"),), "beta_ensemble", str(out)))
    assert out.exists() and out.stat().st_size > 0
    rows = load_rows((str(csv_dir / "beta.csv"),), "beta_ensemble")
    deltas = [r["delta"] for r in rows]
    betas = [r["beta"] for r in rows]
    assert summary["extents"]["x"] == (min(deltas), max(deltas))
    assert summary["extents"]["y"] == (min(betas), max(betas))
    assert summary["extents"]["n_curves"] == 5


def test_tau_cdf_figure(csv_dir, tmp_path):
    out = tmp_path / "tau.png"
    path = csv_dir / "tau_cdf.csv"
    summary = render(FigureSpec((str(path),), "tau_cdf", str(out)))
    assert out.exists() and out.stat().st_size > 0
    rows = load_rows((str(path),), "tau_cdf")
    assert len(rows) == 100
    taus = [r["tau"] for r in rows]
    assert summary["extents"]["x"] == (min(taus), max(taus))
    assert max(taus) < 1.0 - 1e-3  # every random permutation is selective
    assert summary["extents"]["y"] == (0.01, 1.0)


def test_pattern_heatmap_figure(csv_dir, tmp_path):
    out = tmp_path / "pattern.png"
    inputs = (str(csv_dir / "pattern_identity.csv"), str(csv_dir / "pattern_random.csv"))
    summary = render(FigureSpec(inputs, "pattern_heatmap", str(out)))
    assert out.exists() and out.stat().st_size > 0
    assert summary["extents"]["n_panels"] == 2
    rows = load_rows(inputs, "pattern_heatmap")
    values = [r["value"] for r in rows]
    assert summary["extents"]["value"] == (min(values), max(values))
    # the identity panel carries the full-gain anti-diagonal ridge; gains are
    # periodic, so "on ridge" means rho_x + rho_y lands on an even integer
    grids = _pattern_grid(rows)
    xs, ys, matrix = grids["identity"]
    n = xs.size
    ridge = np.array([matrix[i, n - 1 - i] for i in range(n)])
    assert ridge.min() >= 1.0 - 1e-9

    def wrap_dist(s):
        t = abs(s) % 2.0
        return min(t, 2.0 - t)

    off = np.array(
        [matrix[i, j] for i in range(n) for j in range(n) if wrap_dist(xs[i] + ys[j]) > 0.15]
    )
    assert off.max() < 0.6
