"""Generate real harness outputs once per session via the qdcascade CLI.

figkit consumes the simulator only through its external interfaces, so the
fixtures shell out to the installed `qdcascade` entry point with
test-scale grids and park the CSV/JSON outputs in one temp directory.
"""

import json
import shutil
import subprocess

import pytest

TEST_GRID = {"t_end": 800.0, "fine_window": 100.0, "dt_fine": 0.5, "dt_coarse": 2.0}


def _run(args, cwd):
    proc = subprocess.run(args, cwd=cwd, capture_output=True, text=True)
    assert proc.returncode == 0, f"{args} failed:\n{proc.stdout}\n{proc.stderr}"


@pytest.fixture(scope="session")
def harness_outputs(tmp_path_factory):
    if shutil.which("qdcascade") is None:
        pytest.skip("qdcascade CLI not installed")
    root = tmp_path_factory.mktemp("harness")

    fig2 = {
        "base": {"electronic": {"hbar_gamma_rad": 10.0}, "cavity": {"enabled": False},
                 "grid": TEST_GRID, "initial_state": "biexciton"},
        "axes": [{"path": "cascade.rate_ratio", "values": [0.5, 2.0, 5.0, 10.0]}],
        "derived": [{"set": "electronic.hbar_gamma_rad_xx", "rule": "gamma_xx_from_ratio"}],
        "metrics": {"compute_channels": ["X", "XX"], "two_photon": False},
    }
    fig4 = {
        "base": {"cavity": {"hbar_g": 200.0, "hbar_kappa": 3000.0},
                 "grid": TEST_GRID, "initial_state": "biexciton"},
        "axes": [{"path": "purcell.f_p", "values": [2.0, 6.0, 11.0, 18.0, 25.0]}],
        "derived": [{"set": "cavity.hbar_kappa", "rule": "kappa_from_purcell"}],
        "metrics": {"compute_channels": ["X", "XX"], "two_photon": True},
    }
    fig6 = {
        "base": fig4["base"],
        "axes": [{"path": "cavity.hbar_g", "values": [100.0, 200.0, 300.0, 400.0]},
                 {"path": "purcell.f_p", "values": [2.0, 8.0, 16.0, 28.0, 42.0]}],
        "derived": [{"set": "cavity.hbar_kappa", "rule": "kappa_from_purcell"}],
        "metrics": {"compute_channels": ["X", "XX"], "two_photon": True},
    }
    for name, doc in (("fig2", fig2), ("fig4", fig4), ("fig6", fig6)):
        spec = root / f"{name}_spec.json"
        spec.write_text(json.dumps(doc))
        _run(["qdcascade", "sweep", "--spec", str(spec), "--out", str(root / name),
              "--workers", "2", "--quiet"], cwd=root)
    _run(["qdcascade", "fit-ridge", "--results", str(root / "fig6" / "results.csv"),
          "--out", str(root / "fig6"), "--value-column", "fom", "--boundary", "skip"],
         cwd=root)
    return root
