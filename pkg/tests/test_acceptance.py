"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` (criterion 8 carries the
`extended` marker; deselect with `-m "not extended"` for a quick pass).
Tolerances are pinned here exactly as stated; nothing is calibrated at
run time.
"""

import json
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from qdcascade.config import (
    CavityParams,
    ElectronicParams,
    GridParams,
    SystemConfig,
    validate,
)
from qdcascade.metrics import MetricsOptions, analytic_visibility, metrics_bundle
from qdcascade.purcell import coupling_from_purcell, purcell_factor, ridge_fit
from qdcascade.sweep import run_sweep, spec_from_dict
from qdcascade.twotime import CorrelationEngine

from test_twotime import make_toy

DESK_GRID = GridParams(t_end=1500.0, fine_window=200.0, dt_fine=0.1, dt_coarse=0.5)
CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"[acceptance] criterion {criterion}: {'PASS' if ok else 'FAIL'} -- {detail}",
          flush=True)
    assert ok, f"criterion {criterion}: {detail}"


def free_config(grid=DESK_GRID, **electronic):
    return SystemConfig(electronic=ElectronicParams(**electronic),
                        cavity=CavityParams(enabled=False), grid=grid)


def cavity_config(grid=DESK_GRID, n_max=1):
    return SystemConfig(cavity=CavityParams(hbar_g=200.0, hbar_kappa=3000.0, n_max=n_max),
                        grid=grid)


@pytest.fixture(scope="module")
def reference_bundle():
    return metrics_bundle(free_config())


@pytest.fixture(scope="module")
def cavity_bundle():
    return metrics_bundle(cavity_config())


# -- criterion 1: analytic visibility (Fig. 2) --------------------------------

def test_criterion_1_analytic_visibility():
    # The base rate is raised to 10 ueV so the slowest cascade (r = 0.5)
    # finishes inside the 1.5 ns horizon; V depends only on the ratio.
    ratios = (0.5, 1.0, 2.0, 5.0, 10.0)
    opts = MetricsOptions(compute_channels=("X", "XX"), two_photon=False)
    rows = []
    ok = True
    for r in ratios:
        cfg = free_config(hbar_gamma_rad=10.0, hbar_gamma_rad_xx=r * 10.0 / 2.0)
        m = metrics_bundle(cfg, opts)
        expect = analytic_visibility(r)
        ok &= abs(m.v_x - expect) <= 0.02 and abs(m.v_xx - expect) <= 0.02
        rows.append(f"V({r:g})={m.v_x:.4f}/{expect:.4f}")
        if r == 2.0:
            ok &= abs(m.v_x - 0.667) <= 0.02
    report("1", ok, "; ".join(rows))


# -- criteria 2/3: free-cascade reference values -------------------------------

def test_criterion_2_reference_indistinguishability(reference_bundle):
    m = reference_bundle
    ok = abs(m.i_x - 0.82) <= 0.02 and abs(m.i_xx - 0.82) <= 0.02
    report("2", ok, f"I_X={m.i_x:.4f}, I_XX={m.i_xx:.4f} (target 0.82 +- 0.02)")


def test_criterion_3_reference_concurrence(reference_bundle):
    c = reference_bundle.concurrence
    ok = abs(c - 0.72) <= 0.03
    zero_fsp = metrics_bundle(free_config(e_fsp=0.0))
    ok &= zero_fsp.concurrence >= 0.99
    report("3", ok, f"C={c:.4f} (target 0.72 +- 0.03); C(FSP=0)={zero_fsp.concurrence:.4f} (>= 0.99)")


# -- criterion 4: cavity-enhanced regime ----------------------------------------

def test_criterion_4_cavity_enhanced(reference_bundle, cavity_bundle):
    m = cavity_bundle
    clauses = {
        "I_XX >= 0.95": m.i_xx >= 0.95,
        "C >= 0.90": m.concurrence >= 0.90,
        "I_XX exceeds reference": m.i_xx > reference_bundle.i_xx,
        "C exceeds reference": m.concurrence > reference_bundle.concurrence,
    }
    detail = (f"I_XX={m.i_xx:.4f}, C={m.concurrence:.4f}, I_X={m.i_x:.4f}; "
              + "; ".join(f"{k}: {'ok' if v else 'VIOLATED'}" for k, v in clauses.items()))
    report("4", all(clauses.values()), detail)


# -- criterion 5: Purcell bridge --------------------------------------------------

def test_criterion_5_purcell_bridge():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        hbar_g = rng.uniform(10.0, 800.0)
        e_c = rng.uniform(1e5, 2e6)
        q = rng.uniform(50.0, 5e4)
        gamma = rng.uniform(0.1, 20.0)
        f_p = purcell_factor(hbar_g, e_c / q, gamma)
        worst = max(worst, abs(coupling_from_purcell(f_p, e_c, q, gamma) - hbar_g) / hbar_g)
    f_ref = purcell_factor(200.0, 3000.0, 2.5)
    # the caption's 11.5 for these parameters is a documented discrepancy
    # of the source; the corrected formula value is asserted
    ok = worst <= 1e-12 and abs(f_ref - 10.67) <= 0.01
    report("5", ok, f"round-trip worst rel err {worst:.2e}; F_P(200,3000,2.5)={f_ref:.4f}")


# -- criterion 6: numerical hygiene ------------------------------------------------

def test_criterion_6_numerical_hygiene(reference_bundle, cavity_bundle):
    ok = True
    details = []
    for name, m in (("reference", reference_bundle), ("cavity", cavity_bundle)):
        ok &= m.trace_error_max <= 1e-8 and m.min_eigenvalue >= -1e-6
        details.append(f"{name}: trace_err={m.trace_error_max:.1e}, min_eig={m.min_eigenvalue:.1e}")

    halved = metrics_bundle(cavity_config(GridParams(t_end=1500.0, fine_window=200.0,
                                                     dt_fine=0.05, dt_coarse=0.25)))
    d_i = abs(halved.i_xx - cavity_bundle.i_xx)
    d_c = abs(halved.concurrence - cavity_bundle.concurrence)
    ok &= d_i < 5e-3 and d_c < 5e-3
    details.append(f"grid halving: dI_XX={d_i:.1e}, dC={d_c:.1e} (< 5e-3)")

    nmax2 = metrics_bundle(cavity_config(n_max=2))
    d_i2 = abs(nmax2.i_xx - cavity_bundle.i_xx)
    d_c2 = abs(nmax2.concurrence - cavity_bundle.concurrence)
    ok &= d_i2 < 1e-2 and d_c2 < 1e-2
    details.append(f"n_max 1->2: dI_XX={d_i2:.1e}, dC={d_c2:.1e} (< 1e-2)")
    report("6", ok, "; ".join(details))


# -- criterion 7: QRT against matrix exponentials ----------------------------------

def test_criterion_7_qrt_oracle():
    lv, grid, traj, l0, lower_b, lower_x = make_toy()
    eng = CorrelationEngine(lv, traj, grid)
    m1 = eng.g1(lower_b)
    m2 = eng.g2(lower_b, lower_x)
    rho0 = np.zeros((3, 3), dtype=complex)
    rho0[2, 2] = 1.0
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        i = int(rng.integers(0, grid.n_t))
        k = int(rng.integers(0, grid.row_len[i]))
        t, tau = grid.t[i], grid.ladder[k]
        rho_t = (expm(l0 * t) @ rho0.reshape(-1)).reshape(3, 3)
        sig = (lower_b @ rho_t).reshape(-1)
        g1_ref = np.trace(lower_b.conj().T @ (expm(l0 * tau) @ sig).reshape(3, 3))
        sig2 = (lower_b @ rho_t @ lower_b.conj().T).reshape(-1)
        g2_ref = np.trace(lower_x.conj().T @ lower_x @ (expm(l0 * tau) @ sig2).reshape(3, 3))
        worst = max(worst, abs(m1.values[i, k] - g1_ref), abs(m2.values[i, k] - g2_ref))
    report("7", worst < 1e-8, f"max |QRT - expm| = {worst:.2e} over 20 random (t, tau)")


# -- criterion 8: ridge fit (extended) ----------------------------------------------

@pytest.fixture(scope="module")
def ridge_sweep(tmp_path_factory):
    spec = spec_from_dict(json.loads(
        (CONFIG_DIR / "sweeps" / "fig6_ridge_phonon_free.json").read_text()))
    out = tmp_path_factory.mktemp("ridge")
    result = run_sweep(spec, out_dir=out, workers=2)
    header = result.csv_header()
    idx = {c: i for i, c in enumerate(header)}
    rows = []
    for r in sorted(result.records, key=lambda r: r.index):
        assert r.error is None, f"sweep point {r.index} failed: {r.error}"
        full = [str(r.index)] + [repr(float(v)) for v in r.axes.values()] + r.metrics_row + [""]
        rows.append(full)
    cols = {}
    for name in ("purcell.f_p", "cavity.hbar_g", "i_xx", "i_x", "concurrence", "fom"):
        cols[name] = np.array([float(row[idx[name]]) for row in rows])
    return cols


@pytest.mark.extended
def test_criterion_8_ridge_fit_i_xx(ridge_sweep):
    fit = ridge_fit(ridge_sweep["purcell.f_p"], ridge_sweep["cavity.hbar_g"],
                    ridge_sweep["i_xx"], boundary="skip")
    ok = abs(fit.alpha - 11.6) <= 0.25 * 11.6 and abs(fit.beta - 72.0) <= 40.0
    report("8", ok, f"I_XX-maxima fit: alpha={fit.alpha:.2f} (target 11.6 +- 25%), "
                    f"beta={fit.beta:.1f} (target 72 +- 40), rms={fit.residual_rms:.1f}, "
                    f"skipped={fit.skipped_rows}")


@pytest.mark.extended
def test_paper_product_ridge_reproduction(ridge_sweep):
    """Auxiliary reproduction check (not a numbered criterion): the source
    figure's alpha/beta belong to the ridge of the product I_X*I_XX*C, and
    that fit lands inside the same tolerance bands."""
    fit = ridge_fit(ridge_sweep["purcell.f_p"], ridge_sweep["cavity.hbar_g"],
                    ridge_sweep["fom"], boundary="skip")
    ok = abs(fit.alpha - 11.6) <= 0.25 * 11.6 and abs(fit.beta - 72.0) <= 40.0
    print(f"[acceptance] product-ridge reproduction: {'PASS' if ok else 'FAIL'} -- "
          f"alpha={fit.alpha:.2f}, beta={fit.beta:.1f}, rms={fit.residual_rms:.1f}", flush=True)
    assert ok


def test_shipped_configs_validate():
    for path in CONFIG_DIR.glob("*.json"):
        from qdcascade.config import config_from_json
        validate(config_from_json(path.read_text()))
    for path in (CONFIG_DIR / "sweeps").glob("*.json"):
        spec = spec_from_dict(json.loads(path.read_text()))
        assert spec.n_points >= 1
