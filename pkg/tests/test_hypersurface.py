import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nullstat.hypersurface import (GramSchmidtBreakdown, Hypersurface, NotLightlikeError,
                                   RadicalMismatchError, induced_metric_at, null_frame_at,
                                   radical_at, transversal_at)
from nullstat.manifest import manifest_from_dict

import oracles

S2 = math.sqrt(2)


def fixture(name):
    m = manifest_from_dict({"fixture": name})
    return m.space, m.hypersurface


def cone_without(xi=True, screen=True):
    sp, h = fixture("paper-cone-LC")
    return sp, Hypersurface(h.params, h.embedding, None if xi else h.xi,
                            None if screen else h.screen, h.domain)


def test_gram_P0():
    sp, h = fixture("flat-plane-P0")
    g, rank = induced_metric_at(h, sp, [0.2, 0.4, -0.1])
    assert np.array_equal(g, np.diag([0.0, -1.0, 1.0]))
    assert rank == 2


def test_gram_cone():
    sp, h = fixture("paper-cone")
    g, rank = induced_metric_at(h, sp, [0.0, 1.0, 1.0])
    assert np.allclose(g, [[-2, -1, -1], [-1, 0, -1], [-1, -1, 0]], atol=1e-14)
    assert rank == 2
    assert abs(np.linalg.det(g)) < 1e-12
    assert np.allclose(g, oracles.gram(sp, h, [0.0, 1.0, 1.0]), atol=1e-9)


def test_non_degenerate_rejected():
    sp, _ = fixture("flat-plane-P0")
    h = Hypersurface.from_strings(["u1", "u2", "u3"], ["0.5*u1^2", "u1", "u2", "u3"],
                                  domain=[[-1, 1]] * 3)
    with pytest.raises(NotLightlikeError):
        induced_metric_at(h, sp, [0.1, 0.2, 0.3])


def test_rank_deficient_embedding_rejected():
    sp, _ = fixture("flat-plane-P0")
    h = Hypersurface.from_strings(["u1", "u2", "u3"], ["u1", "u1", "u2", "u2"],
                                  domain=[[-1, 1]] * 3)
    with pytest.raises(NotLightlikeError):
        induced_metric_at(h, sp, [0.1, 0.2, 0.3])


def test_cone_radical_direction():
    sp, h = fixture("paper-cone")
    xi = radical_at(h, sp, [0.0, 1.0, 1.0])
    assert np.allclose(xi, [-S2, S2, S2], atol=1e-14)
    sp, bare = cone_without(xi=True, screen=True)
    k = radical_at(bare, sp, [0.0, 1.0, 1.0])
    assert np.allclose(np.cross(k, [1.0, -1.0, -1.0]), 0, atol=1e-12)
    assert np.linalg.norm(k) == pytest.approx(1.0)


def test_P0_radical():
    sp, h = fixture("flat-plane-P0")
    fr = null_frame_at(h, sp, [0.0, 0.0, 0.0])
    assert np.array_equal(fr.xi_p, [1.0, 0.0, 0.0])
    assert np.allclose(fr.xi, [1, 0, 1, 0])


def test_wrong_xi_rejected():
    sp, h = fixture("paper-cone")
    bad = Hypersurface.from_strings(h.params, [str(e) for e in h.embedding], ["0", "-u3", "u2"],
                                    [["1", "0", "0"], ["0", "-u3", "u2"]], h.domain)
    with pytest.raises(RadicalMismatchError):
        radical_at(bad, sp, [0.0, 2.0, 1.0])


@pytest.mark.parametrize("u", [(0.0, 1.0, 1.0), (0.3, 2.0, 1.0), (-0.7, 1.0, 3.0)])
def test_cone_transversal(u):
    sp, h = fixture("paper-cone")
    f = math.hypot(u[1], u[2])
    N = transversal_at(h, sp, list(u))
    expected = (np.array([-f, f, 0, 0]) + S2 * np.array([0, 0, u[1], u[2]])) / (4 * f * f)
    assert np.allclose(N, expected, atol=1e-14)
    assert np.allclose(N, oracles.transversal(sp, h, list(u)), atol=1e-9)


def test_cone_transversal_at_1_1():
    sp, h = fixture("paper-cone")
    N = transversal_at(h, sp, [0.0, 1.0, 1.0])
    assert np.allclose(N, [-S2 / 8, S2 / 8, S2 / 8, S2 / 8], atol=1e-15)


def test_P0_transversal():
    sp, h = fixture("flat-plane-P0")
    assert np.allclose(transversal_at(h, sp, [0.5, -0.5, 0.1]), [-0.5, 0, 0.5, 0], atol=1e-15)


@pytest.mark.parametrize("lam", [2.0, -0.5, 3.7])
def test_xi_rescaling_halves_N(lam):
    sp, h = fixture("paper-cone")
    p = [0.1, 1.4, 2.1]
    a, b = null_frame_at(h, sp, p), null_frame_at(h.scaled_xi(lam), sp, p)
    assert np.allclose(b.xi, lam * a.xi, atol=1e-13)
    assert np.allclose(b.N, a.N / lam, atol=1e-13)
    assert b.g(b.xi, b.N) == pytest.approx(1.0, abs=1e-13)


def test_cone_screen_normalization():
    sp, h = fixture("paper-cone")
    fr = null_frame_at(h, sp, [0.0, 1.0, 1.0])
    f = S2
    assert fr.eps == (-1, 1)
    assert np.allclose(fr.E[0], fr.W[0] / S2)
    assert np.allclose(fr.E[1], fr.W[1] / f)


def test_P0_screen_frame():
    sp, h = fixture("flat-plane-P0")
    fr = null_frame_at(h, sp, [0.0, 0.0, 0.0])
    assert fr.eps == (-1, 1)
    assert np.allclose(fr.E, [[0, 1, 0, 0], [0, 0, 0, 1]])


@pytest.mark.parametrize("name", ["paper-cone", "paper-cone-LC", "lightcone-R31", "flat-plane-P0"])
def test_frame_invariants(name):
    sp, h = fixture(name)
    rng = np.random.default_rng(3)
    dom = np.array(h.domain)
    for _ in range(5):
        p = rng.uniform(dom[:, 0], dom[:, 1])
        fr = null_frame_at(h, sp, p)
        for key, val in fr.residuals.items():
            assert val < 1e-9, key
        F = fr.frame_matrix
        assert np.linalg.cond(F) < 1e8
        assert fr.g(fr.N, fr.N) == pytest.approx(0, abs=1e-12)
        assert fr.g(fr.xi, fr.N) == pytest.approx(1, abs=1e-12)
        assert np.allclose(fr.W @ fr.G @ fr.N, 0, atol=1e-12)
        assert np.allclose(fr.E @ fr.G @ fr.E.T, np.diag(fr.eps), atol=1e-12)


def test_frame_matrix_reproduces_eta():
    sp, h = fixture("paper-cone")
    fr = null_frame_at(h, sp, [0.0, 1.0, 1.0])
    c = oracles.solve_cramer(fr.frame_matrix, fr.xi)
    assert np.allclose(c, [0, 0, 1, 0], atol=1e-12)
    assert fr.eta(fr.xi) == pytest.approx(1.0)
    for W in fr.W:
        assert fr.eta(W) == pytest.approx(0.0, abs=1e-15)


def test_unpinned_frame_still_valid():
    sp, h = cone_without()
    fr = null_frame_at(h, sp, [0.0, 1.5, 0.8])
    assert np.allclose(fr.gram @ fr.xi_p, 0, atol=1e-12)
    assert all(v < 1e-9 for v in fr.residuals.values())


def test_gram_schmidt_breakdown_reported():
    # both screen vectors null (the screen itself is non-degenerate)
    sp, h = fixture("flat-plane-P0")
    with pytest.raises(GramSchmidtBreakdown):
        null_frame_at(h, sp, [0.0, 0.0, 0.0], W_p=np.array([[0.0, 1.0, 1.0], [0.0, 1.0, -1.0]]))


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
@settings(max_examples=30, deadline=None)
def test_N_invariant_under_screen_basis_change(a, b, c, d):
    if abs(a * d - b * c) < 0.1:
        return
    sp, h = fixture("paper-cone")
    p = [0.2, 1.1, 1.9]
    fr = null_frame_at(h, sp, p)
    W2 = np.array([[a, b], [c, d]]) @ fr.W_p
    alt = null_frame_at(h, sp, p, W_p=W2)
    assert np.allclose(alt.N, fr.N, atol=1e-10)
