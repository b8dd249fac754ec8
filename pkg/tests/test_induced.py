import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nullstat.induced import (Germ, LocalGeometry, TangentField, ambient_derivative_along,
                              eta_project, fundamental_forms_at, gauss_split,
                              induced_connection_coeffs_at, screen_connection_at)
from nullstat.manifest import manifest_from_dict

import oracles

S2 = math.sqrt(2)
PAPER_POINTS = [(0.0, 1.0, 1.0), (0.0, 2.0, 1.0), (0.0, 1.0, 3.0)]


def fixture(name):
    m = manifest_from_dict({"fixture": name})
    return m.space, m.hypersurface


def lg_at(name, p):
    sp, h = fixture(name)
    return LocalGeometry(sp, h, list(p))


def test_ambient_derivative_xi_xi():
    sp, h = fixture("paper-cone")
    for p in PAPER_POINTS:
        lg = LocalGeometry(sp, h, p)
        v = ambient_derivative_along(sp, h, "D~", "xi", "xi", p, lg=lg)
        assert np.allclose(v, S2 * lg.xi - S2 * lg.N, atol=1e-12)
        vs = ambient_derivative_along(sp, h, "D~*", "xi", "xi", p, lg=lg)
        assert np.allclose(vs, S2 * lg.xi + S2 * lg.N, atol=1e-12)


def test_ambient_derivative_levi_civita_W2():
    sp, h = fixture("paper-cone")
    for p in PAPER_POINTS:
        v = ambient_derivative_along(sp, h, "D~0", "W2", "W2", p)
        assert np.allclose(v, [0, 0, -p[1], -p[2]], atol=1e-12)
        # the prescribed connection itself: D~_{W2} W2 = -2 x2 d2, D~*_{W2} W2 = -2 x3 d3
        assert np.allclose(ambient_derivative_along(sp, h, "D~", "W2", "W2", p),
                           [0, 0, -2 * p[1], 0], atol=1e-12)
        assert np.allclose(ambient_derivative_along(sp, h, "D~*", "W2", "W2", p),
                           [0, 0, 0, -2 * p[2]], atol=1e-12)


def test_ambient_derivative_expression_field():
    sp, h = fixture("paper-cone-LC")
    p = [0.1, 1.2, 0.7]
    lg = LocalGeometry(sp, h, p)
    # xi written out as ambient components in the parameters
    comps = ("sqrt(u2^2+u3^2)", "-sqrt(u2^2+u3^2)", "sqrt(2)*u2", "sqrt(2)*u3")
    a = ambient_derivative_along(sp, h, "D~", "W2", comps, p, lg=lg)
    b = ambient_derivative_along(sp, h, "D~", "W2", "xi", p, lg=lg)
    assert np.allclose(a, b, atol=1e-13)


def test_P0_derivatives_vanish():
    sp, h = fixture("flat-plane-P0")
    for X in ("d1", "d2", "d3"):
        for Y in ("d1", "d2", "d3"):
            assert not np.any(ambient_derivative_along(sp, h, "D~", X, Y, [0.3, 0.2, 0.1]))


def test_gauss_split_examples():
    lg = lg_at("paper-cone", (0.0, 1.0, 1.0))
    fr = lg.frame
    sc, x, n = gauss_split(fr, S2 * fr.xi - S2 * fr.N)
    assert np.allclose(sc, 0, atol=1e-14) and x == pytest.approx(S2) and n == pytest.approx(-S2)
    sc, x, n = gauss_split(fr, fr.N)
    assert np.allclose(sc, 0, atol=1e-14) and x == pytest.approx(0, abs=1e-14) and n == pytest.approx(1)
    sc, x, n = gauss_split(fr, fr.W[0] + 3 * fr.xi)
    assert np.allclose(sc, [1, 0], atol=1e-14) and x == pytest.approx(3) and n == pytest.approx(0, abs=1e-14)


def test_eta_project_examples():
    fr = lg_at("paper-cone", (0.0, 1.0, 1.0)).frame
    PX, e = eta_project(fr, fr.xi)
    assert np.allclose(PX, 0, atol=1e-14) and e == pytest.approx(1.0)
    PX, e = eta_project(fr, fr.W[0])
    assert np.allclose(PX, fr.W[0]) and e == pytest.approx(0.0, abs=1e-15)
    PX, e = eta_project(fr, fr.W[0] + 2 * fr.xi)
    assert np.allclose(PX, fr.W[0]) and e == pytest.approx(2.0)


@pytest.mark.parametrize("p", PAPER_POINTS)
def test_paper_cone_forms(p):
    sp, h = fixture("paper-cone")
    lg = LocalGeometry(sp, h, p)
    u2, u3 = p[1], p[2]
    f2 = u2 * u2 + u3 * u3
    ww = fundamental_forms_at(sp, h, p, "W2", "W2", lg=lg)
    assert ww.B == pytest.approx(-2 * S2 * u2 ** 2, abs=1e-8)
    assert ww.B_star == pytest.approx(-2 * S2 * u3 ** 2, abs=1e-8)
    assert ww.C_XPY == pytest.approx(-(S2 / 2) * u2 ** 2 / f2, abs=1e-8)
    assert ww.C_star_XPY == pytest.approx(-(S2 / 2) * u3 ** 2 / f2, abs=1e-8)
    xx = fundamental_forms_at(sp, h, p, "xi", "xi", lg=lg)
    assert xx.B == pytest.approx(-S2, abs=1e-8) and xx.B_star == pytest.approx(S2, abs=1e-8)
    for X in ("xi", "W1", "W2"):
        fp = fundamental_forms_at(sp, h, p, X, "W1", lg=lg)
        assert abs(fp.B) < 1e-8 and abs(fp.B_star) < 1e-8
    xw = fundamental_forms_at(sp, h, p, "xi", "W2", lg=lg)
    assert abs(xw.C_XPY) < 1e-8 and abs(xw.C_star_XPY) < 1e-8


def test_paper_cone_forms_at_2_1():
    fp = fundamental_forms_at(*fixture("paper-cone"), [0.0, 2.0, 1.0], "W2", "W2")
    assert fp.B == pytest.approx(-8 * S2, abs=1e-8)
    assert fp.B_star == pytest.approx(-2 * S2, abs=1e-8)
    assert fp.C_XPY == pytest.approx(-(S2 / 2) * 0.8, abs=1e-8)
    assert fp.C_star_XPY == pytest.approx(-(S2 / 2) * 0.2, abs=1e-8)


def test_P0_all_forms_vanish():
    sp, h = fixture("flat-plane-P0")
    lg = LocalGeometry(sp, h, [0.2, -0.3, 0.4])
    for X in lg.named_fields():
        for Y in lg.named_fields():
            fp = fundamental_forms_at(sp, h, None, X, Y, lg=lg)
            for k in ("B", "B_star", "C_XPY", "C_star_XPY", "tau", "tau_star"):
                assert abs(getattr(fp, k)) <= 1e-10
            assert np.abs(fp.A_N_X).max() <= 1e-10 and np.abs(fp.A_N_star_X).max() <= 1e-10


@pytest.mark.parametrize("p", PAPER_POINTS + [(0.4, 0.6, 2.9)])
def test_levi_civita_cone_B(p):
    sp, h = fixture("paper-cone-LC")
    fp = fundamental_forms_at(sp, h, list(p), "W2", "W2")
    f2 = p[1] ** 2 + p[2] ** 2
    assert fp.B == pytest.approx(-S2 * f2, abs=1e-9)
    assert fp.B_star == pytest.approx(-S2 * f2, abs=1e-9)


@pytest.mark.parametrize("name", ["paper-cone", "paper-cone-LC", "paper-cone-symK", "lightcone-R31"])
def test_B_against_finite_difference_oracle(name):
    sp, h = fixture(name)
    dom = np.array(h.domain)
    rng = np.random.default_rng(8)
    for _ in range(3):
        p = rng.uniform(dom[:, 0], dom[:, 1])
        lg = LocalGeometry(sp, h, p)
        B, Bs = oracles.second_forms(sp, h, p)
        scale = 1 + np.abs(B).max()
        assert np.allclose(lg.B, B, atol=1e-6 * scale)
        assert np.allclose(lg.Bs, Bs, atol=1e-6 * scale)


@pytest.mark.parametrize("p", PAPER_POINTS)
def test_induced_connection_W2_W2(p):
    """The printed D_{W2} W2 agrees with the engine except for the d2 term
    (d3 term for D*), where the printed value is not tangent to the cone.
    The engine value is D~_{W2} W2 - B(W2,W2) N from the stated D~ and B."""
    sp, h = fixture("paper-cone")
    lg = LocalGeometry(sp, h, p)
    x2, x3 = p[1], p[2]
    f = math.hypot(x2, x3)
    W2 = lg.field("W2")
    for star, a in ((False, x2), (True, x3)):
        D = lg.push(lg.D(star, W2, W2))
        B = -2 * S2 * a * a
        Dt = np.array([0, 0, -2 * x2, 0]) if not star else np.array([0, 0, 0, -2 * x3])
        assert np.allclose(D, Dt - B * lg.N, atol=1e-12)
        if not star:
            printed = np.array([-S2 * x2 ** 2 / (2 * f), S2 * x2 ** 2 / (2 * f),
                                (4 * x2 ** 3 - 2 * x2) / (4 * f * f), 4 * x3 * x2 ** 2 / (4 * f * f)])
            same = [0, 1, 3]
        else:
            printed = np.array([-S2 * x3 ** 2 / (2 * f), S2 * x3 ** 2 / (2 * f),
                                4 * x3 ** 2 * x2 / (4 * f * f), (4 * x3 ** 3 - 2 * x3) / (4 * f * f)])
            same = [0, 1, 2]
        assert np.allclose(D[same], printed[same], atol=1e-12)
        # the printed vector has a transversal (N) component, the engine's does not
        assert abs(lg.frame.g(printed, lg.xi)) > 0.1
        assert abs(lg.frame.g(D, lg.xi)) < 1e-12


@pytest.mark.parametrize("p", PAPER_POINTS)
def test_screen_connection_W2_W2(p):
    sp, h = fixture("paper-cone")
    lg = LocalGeometry(sp, h, p)
    x2, x3 = p[1], p[2]
    f2 = x2 * x2 + x3 * x3
    W2 = lg.field("W2")
    nab, C = lg.nabla(False, W2, W2)
    nab_s, Cs = lg.nabla(True, W2, W2)
    # d3 (resp. d2 for nabla*) terms as printed; the other term follows from D~ - B N - C xi
    assert lg.push(nab)[3] == pytest.approx(2 * x3 * x2 ** 2 / f2, abs=1e-12)
    assert lg.push(nab_s)[2] == pytest.approx(2 * x3 ** 2 * x2 / f2, abs=1e-12)
    assert lg.push(nab)[2] == pytest.approx(-2 * x2 + 2 * x2 ** 3 / f2, abs=1e-12)
    assert lg.push(nab_s)[3] == pytest.approx(-2 * x3 + 2 * x3 ** 3 / f2, abs=1e-12)
    assert C == pytest.approx(-(S2 / 2) * x2 ** 2 / f2, abs=1e-12)
    assert Cs == pytest.approx(-(S2 / 2) * x3 ** 2 / f2, abs=1e-12)
    # nabla_{W2} W2 stays in the screen
    assert abs(lg.eta(nab)) < 1e-12


def test_nabla_xi_W2():
    sp, h = fixture("paper-cone")
    for p in PAPER_POINTS:
        lg = LocalGeometry(sp, h, p)
        xi, W2 = lg.field("xi"), lg.field("W2")
        W1 = lg.W_p[0]
        nab, _ = lg.nabla(False, xi, W2)
        nab_s, _ = lg.nabla(True, xi, W2)
        assert np.allclose(nab, S2 * W2.v - S2 * W1, atol=1e-12)
        assert np.allclose(nab_s, S2 * W2.v + S2 * W1, atol=1e-12)


def test_P0_connections_flat():
    sp, h = fixture("flat-plane-P0")
    p = [0.1, 0.2, 0.3]
    assert not np.any(induced_connection_coeffs_at(sp, h, p, "D"))
    assert not np.any(induced_connection_coeffs_at(sp, h, p, "D*"))
    nab, C = screen_connection_at(sp, h, p)
    assert not np.any(nab) and not np.any(C)


def _random_germ(rng, k=3):
    return Germ(rng.standard_normal(k), rng.standard_normal((k, k)))


@pytest.mark.parametrize("name", ["paper-cone", "paper-cone-symK", "lightcone-R31"])
def test_reconstruction(name):
    sp, h = fixture(name)
    rng = np.random.default_rng(21)
    dom = np.array(h.domain)
    for _ in range(4):
        p = rng.uniform(dom[:, 0], dom[:, 1])
        lg = LocalGeometry(sp, h, p)
        for _ in range(5):
            X, Y = _random_germ(rng), _random_germ(rng)
            for star in (False, True):
                form = "B*" if star else "B"
                lhs = lg.ambient_D(star, X, Y)
                rhs = lg.push(lg.D(star, X, Y)) + lg.form(form, X.v, Y.v) * lg.N
                assert np.allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(lhs).max()))
                # the starred shape operator pairs with the unstarred ambient connection
                conn = "D~*" if star else "D~"
                DN = ambient_derivative_along(sp, h, conn, X, "N", p, lg=lg)
                rhs = -lg.push(lg.A(not star, X.v)) + lg.tau_of(not star, X.v) * lg.N
                assert np.allclose(DN, rhs, atol=1e-9 * (1 + np.abs(DN).max()))
                DPY = lg.D(star, X, lg.P_germ(Y))
                nab, _ = lg.nabla(star, X, Y)
                rhs = nab + lg.Cform(star, X.v, Y.v) * lg.xi_p
                assert np.allclose(DPY, rhs, atol=1e-9 * (1 + np.abs(DPY).max()))


def test_radical_decomposition_statistical():
    sp, h = fixture("paper-cone-symK")
    lg = LocalGeometry(sp, h, [0.3, 1.2, 2.2])
    xi = lg.field("xi")
    rng = np.random.default_rng(4)
    for _ in range(5):
        X = _random_germ(rng)
        for star in (False, True):
            Dxi = lg.D(star, X, xi)
            rhs = -lg.Abar_xi(star, X.v) - lg.tau_of(star, X.v) * lg.xi_p
            assert np.allclose(Dxi, rhs, atol=1e-9)


def test_named_and_expression_fields_agree():
    sp, h = fixture("paper-cone")
    p = [0.0, 1.3, 0.9]
    lg = LocalGeometry(sp, h, p)
    W2e = TangentField.from_strings(["0", "-u3", "u2"], h.params)
    a = fundamental_forms_at(sp, h, p, W2e, W2e, lg=lg)
    b = fundamental_forms_at(sp, h, p, "W2", "W2", lg=lg)
    assert a.B == pytest.approx(b.B, abs=1e-14)
    assert a.C_XPY == pytest.approx(b.C_XPY, abs=1e-14)


@given(st.floats(-1, 1), st.floats(0.6, 2.4), st.floats(0.6, 3.4))
@settings(max_examples=20, deadline=None)
def test_B_symmetric_on_torsion_free_fixtures(u1, u2, u3):
    lg = lg_at("paper-cone-symK", (u1, u2, u3))
    assert np.allclose(lg.B, lg.B.T, atol=1e-9)
    assert np.allclose(lg.Bs, lg.Bs.T, atol=1e-9)
    # B(X, xi) + B*(X, xi) = 0 on a statistical ambient
    assert np.allclose((lg.B + lg.Bs) @ lg.xi_p, 0, atol=1e-9)
