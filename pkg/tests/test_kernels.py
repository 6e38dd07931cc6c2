import json
import os
import random
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from fansub import kernels, system
from fansub._jit import USING_NUMBA

from conftest import random_config


def _system_vectors(cfg, incl_plus):
    eq = [float(v) for v in system.equality_residuals(cfg)]
    mg = system.inequality_margins(cfg, include_plus=incl_plus)
    return np.array(eq), np.array([float(mg[k]) for k in kernels.margin_labels(cfg.n, incl_plus)])


@pytest.mark.parametrize("incl_plus", [False, True])
def test_kernel_matches_system(incl_plus):
    rng = random.Random(21 + incl_plus)
    for k in range(120):
        cfg = random_config(rng, 1 + k % 4, tied=False if incl_plus else None)
        x = kernels.pack(cfg)
        par = kernels.pack_datum(cfg.datum.map(float))
        eq, mg = kernels.eval_point(x, par, cfg.n, incl_plus)
        eq_s, mg_s = _system_vectors(cfg, incl_plus)
        assert eq.shape == (kernels.n_equalities(cfg.n),)
        assert mg.shape == (kernels.n_margins(cfg.n, incl_plus),)
        np.testing.assert_allclose(eq, eq_s, rtol=1e-9, atol=1e-9 * (1 + np.abs(eq_s).max()))
        np.testing.assert_allclose(mg, mg_s, rtol=1e-9, atol=1e-9 * (1 + np.abs(mg_s).max()))


def test_margin_labels_match_system(witness):
    assert kernels.margin_labels(3, False) == list(system.inequality_margins(witness))


def test_pack_unpack_round_trip(witness):
    f = witness.to_float()
    x = kernels.pack(f)
    assert x.shape == (kernels.n_vars(3),)
    assert kernels.unpack(x, f.datum, 3) == f


def test_batch_equals_pointwise():
    rng = random.Random(4)
    cfgs = [random_config(rng, 2, tied=True) for _ in range(5)]
    par = kernels.pack_datum(cfgs[0].datum.map(float))
    X = np.stack([kernels.pack(c) for c in cfgs])
    EQ, MG = kernels.eval_batch(X, par, 2, False)
    for b in range(5):
        eq, mg = kernels.eval_point(X[b], par, 2, False)
        np.testing.assert_array_equal(EQ[b], eq)
        np.testing.assert_array_equal(MG[b], mg)


def test_complex_step_jacobian_against_differences(witness):
    f = witness.to_float()
    x = kernels.pack(f)
    par = kernels.pack_datum(f.datum)
    eq, mg, JE, JM = kernels.jacobian(x, par, 3, False)
    eq0, mg0 = kernels.eval_point(x, par, 3, False)
    np.testing.assert_allclose(eq, eq0, atol=1e-9)
    for j in range(x.size):
        h = 1e-6 * max(1.0, abs(x[j]))
        up, dn = x.copy(), x.copy()
        up[j] += h
        dn[j] -= h
        e_up, m_up = kernels.eval_point(up, par, 3, False)
        e_dn, m_dn = kernels.eval_point(dn, par, 3, False)
        fd_e = (e_up - e_dn) / (2 * h)
        fd_m = (m_up - m_dn) / (2 * h)
        np.testing.assert_allclose(JE[:, j], fd_e, rtol=1e-5, atol=1e-4 * (1 + np.abs(JE[:, j]).max()))
        np.testing.assert_allclose(JM[:, j], fd_m, rtol=1e-5, atol=1e-4 * (1 + np.abs(JM[:, j]).max()))


_PROBE = """
import json, random, sys
sys.path.insert(0, {tests!r})
import numpy as np
from fansub import kernels
from fansub._jit import USING_NUMBA
from conftest import random_config
rng = random.Random(8)
out = []
for k in range(20):
    cfg = random_config(rng, 1 + k % 4)
    eq, mg = kernels.eval_point(kernels.pack(cfg), kernels.pack_datum(cfg.datum.map(float)), cfg.n, False)
    out.append([eq.tolist(), mg.tolist()])
print(json.dumps({{"numba": USING_NUMBA, "out": out}}))
"""


def _run_probe(disable):
    env = dict(os.environ)
    if disable:
        env["FANSUB_DISABLE_NUMBA"] = "1"
    else:
        env.pop("FANSUB_DISABLE_NUMBA", None)
    code = _PROBE.format(tests=os.path.dirname(__file__))
    res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def test_numba_and_numpy_paths_agree():
    a = _run_probe(disable=False)
    b = _run_probe(disable=True)
    assert b["numba"] is False
    assert a["numba"] is USING_NUMBA
    for (ea, ma), (eb, mb) in zip(a["out"], b["out"]):
        np.testing.assert_allclose(ea, eb, rtol=1e-12, atol=1e-9)
        np.testing.assert_allclose(ma, mb, rtol=1e-12, atol=1e-9)


def test_benchmark_script_agrees():
    bench = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    proc = subprocess.run([sys.executable, str(bench), "--batch", "50", "--points", "20"],
                          capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "speedup" in proc.stdout
