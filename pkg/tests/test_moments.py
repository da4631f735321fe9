import math

import numpy as np
import pytest

from potens.errors import ConvergenceError
from potens.faber import FaberBasis
from potens.moments import (
    cache_key,
    disk_moment,
    ellipse_epsilon,
    ellipse_exterior_moment,
    ellipse_interior_moment,
    ellipse_moment,
    epsilon_table,
    export_csv,
    exterior_gram,
    exterior_gram_series,
    interior_gram,
    load_cache,
    moments,
    save_cache,
)

from _bruteforce import remainder_product_integral


def test_disk_interior_diagonal(disk):
    gram = interior_gram(FaberBasis(disk, 4))
    assert gram[0, 0] == pytest.approx(math.pi, abs=1e-13)
    assert gram[2, 2] == pytest.approx(math.pi / 3, abs=1e-13)
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) < 1e-13


def test_disk_exterior(disk):
    gram = exterior_gram(FaberBasis(disk, 0), 2.0)
    assert gram[0, 0] == pytest.approx(math.pi, abs=1e-12)
    gram = exterior_gram(FaberBasis(disk, 1), 25.0)
    assert gram[0, 1] == pytest.approx(0.0, abs=1e-13)
    assert gram[1, 1] == pytest.approx(math.pi / (25 - 2), abs=1e-13)


def test_ellipse_closed_forms(ellipse_half):
    m = moments(ellipse_half, 1, 3.0)
    assert m.interior_part[1, 1] == pytest.approx(math.pi / 2 * (1 - 0.5 ** 4), abs=1e-12)
    assert m.exterior_part[0, 0] == pytest.approx(math.pi * 0.5625, abs=1e-12)
    assert m.entries[0, 0] == pytest.approx(1.3125 * math.pi, abs=1e-12)
    m8 = moments(ellipse_half, 8, 30.0)
    for n in range(9):
        assert m8.entries[n, n] == pytest.approx(ellipse_moment(n, 0.5, 30.0), abs=1e-12)
        assert m8.interior_part[n, n] == pytest.approx(ellipse_interior_moment(n, 0.5), abs=1e-12)
        assert m8.exterior_part[n, n] == pytest.approx(ellipse_exterior_moment(n, 0.5, 30.0), abs=1e-12)
    off = m8.entries - np.diag(np.diag(m8.entries))
    assert np.max(np.abs(off)) < 1e-12


def test_moment_examples(disk):
    assert moments(disk, 1, 4.0).entries[1, 1] == pytest.approx(math.pi, abs=1e-12)
    assert moments(disk, 3, np.inf).entries[3, 3] == pytest.approx(math.pi / 4, abs=1e-13)


def test_hermitian_positive_definite(custom_map):
    m = moments(custom_map, 10, 20.0)
    assert np.max(np.abs(m.entries - m.entries.conj().T)) < 1e-12
    assert np.min(np.linalg.eigvalsh(m.entries)) > 0


def test_s_too_small_rejected(disk):
    with pytest.raises(ValueError):
        moments(disk, 10, 11.0)


def test_node_doubling_stability(disk, ellipse_half, custom_map):
    for emap in (disk, ellipse_half, custom_map):
        basis = FaberBasis(emap, 8)
        a = interior_gram(basis, 256) + exterior_gram(basis, 20.0, 256, None)
        b = interior_gram(basis, 512) + exterior_gram(basis, 20.0, 512, None)
        assert np.max(np.abs(a - b)) <= 1e-11


def test_undersampled_nodes_raise(ellipse_half):
    with pytest.raises(ConvergenceError) as info:
        moments(ellipse_half, 20, 30.0, angular_nodes=16, verify=True)
    assert info.value.estimates is not None


def test_large_s_flag_and_infinity(disk):
    m = moments(disk, 2, 2e6)
    assert m.exterior_skipped
    assert m.entries[1, 1] == pytest.approx(math.pi / 2, abs=1e-9)
    m = moments(disk, 2, np.inf)
    assert not m.exterior_skipped
    assert np.allclose(np.diag(m.entries), [math.pi / (k + 1) for k in range(3)])


def test_laguerre_fallback_matches_closed_form(disk, ellipse_half):
    m = moments(disk, 3, 2000.0)
    for k in range(4):
        assert m.entries[k, k] == pytest.approx(disk_moment(k, 2000.0), rel=1e-11)
    m = moments(ellipse_half, 3, 1500.0)
    for k in range(4):
        assert m.entries[k, k] == pytest.approx(ellipse_moment(k, 0.5, 1500.0), rel=1e-9)


def test_quadrature_vs_series_cross_check(custom_map, ellipse_quarter):
    for emap in (custom_map, ellipse_quarter):
        basis = FaberBasis(emap, 9)
        a = exterior_gram(basis, 16.0)
        b = exterior_gram_series(basis, 16.0)
        assert np.max(np.abs(a - b)) < 1e-12


def test_epsilon_disk_zero(disk):
    eps = epsilon_table(moments(disk, 5, 12.0))
    assert np.max(np.abs(eps.entries)) < 1e-13
    eps = epsilon_table(moments(disk, 5, np.inf))
    assert np.max(np.abs(eps.entries)) < 1e-13


def test_epsilon_ellipse_closed_form(ellipse_half):
    eps = epsilon_table(moments(ellipse_half, 1, 3.0))
    assert eps.entries[0, 0] == pytest.approx(-0.125, abs=1e-13)
    eps = epsilon_table(moments(ellipse_half, 6, 14.0))
    for n in range(7):
        assert eps.entries[n, n] == pytest.approx(ellipse_epsilon(n, 0.5, 14.0), abs=1e-13)
    off = eps.entries - np.diag(np.diag(eps.entries))
    assert np.max(np.abs(off)) < 1e-12


def test_epsilon_sign_identity(ellipse_half):
    # eps[k,j] = -((k+1)/pi)(1-(k+1)/s) int_O E_j conj(E_k) (1-|Phi|^{-2s}) dA
    s = 10.0
    basis = FaberBasis(ellipse_half, 6)
    eps = epsilon_table(moments(ellipse_half, 6, s))
    for k in range(7):
        for j in range(7):
            integral = remainder_product_integral(basis, j, k, s)
            rhs = -((k + 1) / math.pi) * (1 - (k + 1) / s) * integral
            assert abs(eps.entries[k, j] - rhs) < 1e-8


def test_epsilon_decay_fit(ellipse_half):
    eps = epsilon_table(moments(ellipse_half, 12, np.inf))
    vals = np.abs(np.diag(eps.entries))
    slope = np.polyfit(np.arange(2, 13), np.log(vals[2:]), 1)[0]
    assert slope <= 2 * math.log(0.5) + 0.1


def test_csv_export(tmp_path, ellipse_half):
    m = moments(ellipse_half, 2, 8.0)
    path = tmp_path / "moments.csv"
    export_csv(m, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "row,col,re,im"
    assert len(lines) == 1 + 9
    row, col, re, im = lines[1].split(",")
    assert (row, col) == ("0", "0")
    assert float(re) == pytest.approx(m.entries[0, 0].real)


def test_cache_round_trip(tmp_path, custom_map, ellipse_half):
    m = moments(custom_map, 4, 12.0)
    path = tmp_path / "moments.npz"
    save_cache(m, path)
    again = load_cache(path)
    assert np.array_equal(again.entries, m.entries)
    assert again.map == m.map
    with pytest.raises(ValueError):
        load_cache(path, emap=ellipse_half)
    assert cache_key(custom_map, 4, 12.0, m.angular_nodes, m.radial_nodes) \
        != cache_key(custom_map, 5, 12.0, m.angular_nodes, m.radial_nodes)
