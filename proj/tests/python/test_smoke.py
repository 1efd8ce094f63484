import json
import math

import numpy as np
import pytest

import thermoform as tf


def diagonal_matrices():
    return [np.diag(d).astype(float) for d in ([1, 2, 0, 0], [1, 2, 0, 0], [1, 0, 3, 0], [1, 0, 0, 4])]


def diagonal_sum(n, q):
    return (4**n - 2**n - 2) + 2**n * 2 ** (n * q) + 3 ** (n * q) + 4 ** (n * q)


def test_word_counts():
    assert tf.ShiftSpace.full(4).word_count(12) == 4**12
    golden = tf.ShiftSpace.subshift([[True, True], [True, False]])
    assert golden.word_count(10) == 144
    assert golden.enumerate_words(2) == [[0, 0], [0, 1], [1, 0]]


def test_diagonal_pressure_closed_form():
    space = tf.ShiftSpace.full(4)
    phi = tf.norm_potential(diagonal_matrices())
    assert phi([2]) == pytest.approx(math.log(3))
    for n, q in [(3, 0.5), (5, 1.0), (6, 2.0)]:
        assert tf.finite_pressure(space, phi, q, n) == pytest.approx(math.log(diagonal_sum(n, q)) / n, rel=1e-12)
    curve = tf.pressure_curve(space, phi, [0.5, 1.0, 2.0], 6)
    assert curve["domain"] == "positive_q"
    assert curve["upper"][1] is not None


def test_binary_spectrum_is_binary_entropy():
    space = tf.ShiftSpace.full(2)
    phi = tf.symbol_potential(space, [0.0, math.log(2)])
    for p in (0.1, 0.3, 0.5, 0.8):
        h = -p * math.log(p) - (1 - p) * math.log(1 - p)
        assert tf.spectrum_value(space, phi, p * math.log(2), 8) == pytest.approx(h, abs=1e-3)
    assert tf.spectrum_value(space, phi, math.log(2) + 0.1, 8) == -math.inf
    dom = tf.lyapunov_domain(space, phi, 6)
    assert dom["lower"] == pytest.approx(0.0, abs=1e-9)
    assert dom["upper"] == pytest.approx(math.log(2))


def test_irreducibility_and_errors():
    ok, witness = tf.check_irreducibility(diagonal_matrices())
    assert not ok
    assert witness.shape == (4, 1)
    with pytest.raises(ValueError):
        tf.symbol_potential(tf.ShiftSpace.full(2), [1.0, 2.0, 3.0])


def test_legendre_and_entropy():
    grid = np.linspace(-4, 4, 81)
    r = tf.legendre_inf(list(grid), list(1 + np.abs(grid)), 0.0)
    assert r["value"] == pytest.approx(1.0)
    assert tf.legendre_inf(list(grid), list(1 + np.abs(grid)), 2.0)["minus_infinity"]
    assert tf.bernoulli_entropy([0.3, 0.7]) == pytest.approx(0.610864, abs=1e-6)


def test_cli_and_verify(tmp_path):
    out = tmp_path / "run"
    assert tf.run_cli(["pressure", "--example", "ex1_1", "--out", str(out)]) == 0
    rows = (out / "pressure.csv").read_text().splitlines()
    assert rows[0] == "q,value,upper,lower"
    summary = json.loads((out / "pressure.json").read_text())
    assert summary["meta"]["tool"] == "thermoform"
    report = tf.run_verify([1, 6, 7])
    assert [c["id"] for c in report["checks"]] == [1, 6, 7]
    assert report["passed"]
