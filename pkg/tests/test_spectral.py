"""Spectral gaps of quotient levels."""

import math

import numpy as np
import pytest

import boxlab as bl
from boxlab.spectral import DENSE_LIMIT, averaging_matrix, expander_scan, laplacian_gap


def test_averaging_matrix_is_doubly_stochastic():
    q = bl.CyclicQuotient([7])
    A = averaging_matrix(q)
    assert np.allclose(A.sum(axis=0), 1.0)
    assert np.allclose(A.sum(axis=1), 1.0)
    assert np.allclose(A, A.T)


def test_cycle_gap_closed_form():
    for n in range(3, 65):
        q = bl.CyclicQuotient([n])
        expected = 1.0 - math.cos(2.0 * math.pi / n)
        assert laplacian_gap(q) == pytest.approx(expected, abs=1e-9), n


def test_four_cycle_spectrum():
    q = bl.CyclicQuotient([4])
    w = np.sort(np.linalg.eigvalsh(averaging_matrix(q)))
    assert np.allclose(w, [-1.0, 0.0, 0.0, 1.0], atol=1e-12)
    assert laplacian_gap(q) == pytest.approx(1.0, abs=1e-12)


def test_three_cycle_gap():
    assert laplacian_gap(bl.CyclicQuotient([3])) == pytest.approx(1.5, abs=1e-12)


def test_two_cycle_gap():
    # the doubled edge gives the full bipartite spread
    assert laplacian_gap(bl.CyclicQuotient([2])) == pytest.approx(2.0, abs=1e-12)


def test_trivial_group_convention():
    assert laplacian_gap(bl.CyclicQuotient([1])) == 2.0


def test_relabeling_invariance():
    q = bl.CyclicQuotient([9])
    # conjugate the multiplication table by an arbitrary permutation
    rng = np.random.default_rng(5)
    sigma = rng.permutation(9)
    inv = np.argsort(sigma)
    table = [[int(sigma[q.mult(int(inv[a]), int(inv[b]))]) for b in range(9)] for a in range(9)]
    relabeled = bl.build_quotient(
        {
            "kind": "table",
            "mult": table,
            "identity": int(sigma[0]),
            "gen_images": [int(sigma[q.letter_image(1)])],
        }
    )
    assert laplacian_gap(relabeled) == pytest.approx(laplacian_gap(q), abs=1e-12)


def test_dense_limit_enforced():
    class Big:
        order = DENSE_LIMIT + 1

    with pytest.raises(ValueError):
        laplacian_gap(Big())


def test_scan_of_cyclic_chain_collapses(deep_chain):
    scan = expander_scan(deep_chain, 0.05)
    assert not scan.verdict
    gaps = [gap for *_rest, gap in scan.rows]
    assert all(g is not None for g in gaps)
    # strictly shrinking once the cycles are long enough
    assert gaps == sorted(gaps, reverse=True)
    assert "FAIL" in scan.to_text()


def test_scan_passes_at_low_threshold(dyadic_chain):
    scan = expander_scan(dyadic_chain, 1e-4)
    assert scan.verdict
    assert [row[0] for row in scan.rows] == [0, 1, 2]
    assert [row[2] for row in scan.rows] == [2, 2, 2]


def test_torus_gaps_shrink(torus_chain):
    scan = expander_scan(torus_chain, 1e-9)
    gaps = [row[3] for row in scan.rows]
    assert gaps[0] > gaps[1] > gaps[2]
    # product structure: gap of the torus equals the gap of one factor halved
    one_factor = laplacian_gap(bl.CyclicQuotient([8]))
    assert gaps[1] == pytest.approx(one_factor / 2.0, abs=1e-9)


def test_scan_rejects_bad_threshold(dyadic_chain):
    with pytest.raises(ValueError):
        expander_scan(dyadic_chain, 0.0)


def test_gap_csv_layout(tmp_path, dyadic_chain):
    scan = expander_scan(dyadic_chain, 0.001)
    path = tmp_path / "gaps.csv"
    bl.write_gap_csv(scan, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "level,order,degree,gap"
    assert len(lines) == 5
    assert lines[-1].startswith("# verdict: PASS")
    assert lines[1].split(",")[:3] == ["0", "4", "2"]
