import os
import subprocess
import sys

import numpy as np
import pytest

from roundelim import _kernels as K
from roundelim.graphs import cube_graph, generate_regular_graph, heawood_graph, path_graph, petersen_graph


def both(name, *args):
    return K.numba_impl[name](*args), K.numpy_impl[name](*args)


@pytest.mark.parametrize("m", [0, 1, 5, 12])
def test_pb_pmf_paths_agree(m):
    y = np.random.default_rng(m).random(m)
    a, b = both("pb_pmf", y)
    np.testing.assert_allclose(a, b, atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 7, 13])
def test_signed_sum_paths_agree(n):
    x = np.random.default_rng(n).normal(size=n)
    a, b = both("mean_abs_signed_sum", x)
    assert a == pytest.approx(b, abs=1e-12)


def test_min_sum_paths_agree():
    X = np.random.default_rng(1).random((50, 9))
    a, b = both("min_sum_margins", X, 3)
    np.testing.assert_allclose(a, b, atol=1e-14)


def test_zero_round_paths_agree():
    g = generate_regular_graph(12, 4, 3)
    rng = np.random.default_rng(0)
    perms = rng.random((30, 12, 4)).argsort(axis=2).astype(np.int64)
    sel = rng.integers(0, 4, size=(30, 12, 1))
    a, b = both("zero_round_matches", sel, perms, g.nbr_array, g.rev_array)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("g", [cube_graph(), petersen_graph(), heawood_graph(), path_graph(5)], ids=["cube", "petersen", "heawood", "path"])
def test_girth_length_agrees(g):
    a, b = both("girth", g.nbr_array)
    assert a[0] == b[0]


def test_edge_classes_paths_agree():
    g = petersen_graph()
    labels = np.random.default_rng(2).integers(0, 2, size=(10, 3))
    a, b = both("edge_classes", labels, g.nbr_array, g.rev_array)
    assert tuple(a) == tuple(b)
    assert sum(a) == g.num_edges


def test_env_flag_selects_numpy():
    code = "from roundelim import _kernels as K; print(K.USE_NUMBA, K._active is K.numpy_impl)"
    env = dict(os.environ, ROUNDELIM_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["False", "True"]
