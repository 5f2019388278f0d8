"""Quadrature, kernel functions, lemma bound formulas, fact battery, and the
five-variable minimization certificates.

Frozen constants below were computed once with an independent high-precision
quadrature and are asserted at tolerances far above that reference's error.
"""

import math

import numpy as np
import pytest

from ocrslab import bounds
from ocrslab.attenuation import AttenuationSpec
from ocrslab.graphcore import EdgeStats, edge_stats
from ocrslab.suite import build_suite

H2 = 0.43233235838169365  # h(2) = (1 - e^{-2})/2
Z0 = 0.05504290352060187  # 1/8 - 1/(8 e^4) - 1/(2 e^2)
Z1 = 0.07088837759678558


def _stats(s: float, d: float = 0.0, m: float = 0.0, neighbor_xs=()) -> EdgeStats:
    return EdgeStats(
        d=d,
        s=s,
        m=m,
        neighbors=tuple(f"f{i}" for i in range(len(neighbor_xs))),
        neighbor_xs=tuple(neighbor_xs),
    )


# ---------------------------------------------------------------------------
# kernels


def test_h_values():
    assert math.isclose(bounds.h(2.0), H2, rel_tol=0, abs_tol=1e-15)
    assert bounds.h(0.0) == 1.0
    assert math.isclose(bounds.h(1.0), 1.0 - 1.0 / math.e, abs_tol=1e-15)
    with pytest.raises(ValueError):
        bounds.h(-0.1)


def test_quadrature_closed_forms():
    assert math.isclose(
        bounds.quadrature(lambda y: math.exp(-2 * y), 0, 1, 1e-10), H2, abs_tol=1e-9
    )
    assert math.isclose(
        bounds.quadrature(lambda z: (1 - z) ** 2, 0, 1, 1e-10), 1 / 3, abs_tol=1e-10
    )
    val = bounds.quadrature(lambda y: math.exp(-4 * y) * (1 + y) ** 2, 0, 1, 1e-10)
    assert val >= 0.382


def test_quadrature_tolerance_self_consistency():
    f = lambda a: math.exp(-3 * a + 0.4 * a) * (1 + a)
    coarse = bounds.quadrature(f, 0, 1, 1e-6)
    fine = bounds.quadrature(f, 0, 1, 1e-12)
    assert abs(coarse - fine) < 1e-6


def test_quadrature_rejects_non_finite():
    with pytest.raises(ArithmeticError):
        bounds.quadrature(lambda a: float("inf"), 0, 1, 1e-8)


def test_h1_adaptive_matches_closed_form():
    for a in (0.1, 0.5, 1.0):
        for x in (0.0, 0.4, 1.0):
            closed = float(bounds._h1_closed(a, x))
            assert math.isclose(bounds.h1(a, x), closed, abs_tol=1e-9)


def test_z_values_and_shape():
    assert bounds.z(0.0) == Z0
    assert Z0 == 1 / 8 - 1 / (8 * math.e**4) - 1 / (2 * math.e**2)
    assert math.isclose(bounds.z(1.0), Z1, abs_tol=1e-9)
    grid = np.linspace(0, 1, 201)
    vals = [bounds.z(float(x)) for x in grid]
    # the kernel never dips below its x = 0 value, which carries the 0.055 floor
    assert min(vals) >= 0.055
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))  # nondecreasing
    with pytest.raises(ValueError):
        bounds.z(1.5)


def test_decomposition_term_is_decreasing():
    # the monotone piece of the closed-form decomposition behind the 0.055
    # floor: (2e^2(x^2-4) + 8e^{x+2}) / (4e^4 x (x^2-4)) decreases on (0, 1]
    def term(x):
        return (2 * math.e**2 * (x * x - 4) + 8 * math.exp(x + 2)) / (
            4 * math.e**4 * x * (x * x - 4)
        )

    xs = np.linspace(1e-6, 1, 2001)
    vals = [term(float(x)) for x in xs]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    assert math.isclose(vals[0], -1 / (2 * math.e**2), abs_tol=1e-5)


def test_h1_values_and_floors():
    assert bounds.h1(0.0, 0.3) == 0.0
    with pytest.raises(ValueError):
        bounds.h1(1.2, 0.3)
    for x in np.linspace(0, 1, 21):
        v45 = bounds.quadrature(
            lambda a: math.exp(-4 * a + a * x) * bounds.h1(a, float(x)) * (1 + a) ** 2,
            0,
            1,
            1e-9,
        )
        assert v45 >= 0.181
        vc4 = bounds.quadrature(
            lambda a: math.exp(-3 * a + a * x) * bounds.h1(a, float(x)) * (1 + a),
            0,
            1,
            1e-9,
        )
        assert vc4 >= 0.209


def test_phi_values():
    for y in np.linspace(0, 1, 11):
        assert math.isclose(bounds.phi(2, float(y)), math.exp(-y) * (1 + y), abs_tol=1e-12)
        assert bounds.phi(1, float(y)) == 1.0
        assert bounds.phi(None, float(y)) == 1.0
    assert bounds.phi(7, 0.0) == 1.0
    with pytest.raises(ValueError):
        bounds.phi(0, 0.5)
    with pytest.raises(ValueError):
        bounds.phi(2, 1.5)


# ---------------------------------------------------------------------------
# lemma bound formulas


def test_r0_bound_isolated_edge():
    st = _stats(s=1.0)
    assert math.isclose(bounds.lemma_r0_bound(st, 1.0, 0.0), H2 + 0.14, abs_tol=1e-12)
    assert math.isclose(bounds.patience_r0_bound(st, 1.0, 0.0), 0.382 + 0.117, abs_tol=1e-12)


def test_one_sided_r0_at_zero_slack():
    st = _stats(s=0.0)
    for alpha in (0.0, 0.162, 0.3):
        assert math.isclose(bounds.one_sided_r0_bound(st, 0.7, alpha), 0.405 * 0.7, abs_tol=1e-12)


def test_r1_bound_alpha_zero_reduction():
    st = _stats(s=0.5, d=0.8, m=0.1, neighbor_xs=((0.5, 0.2), (0.3, 0.6)))
    tail = sum(xf * max(0.0, 1.0 - 0.1 - xf - sf) for xf, sf in st.neighbor_xs)
    assert math.isclose(bounds.lemma_r1_bound(st, 0.4, 0.0), 0.0275 * tail * 0.4, abs_tol=1e-12)
    assert math.isclose(bounds.patience_r1_bound(st, 0.4, 0.0), 0.02 * tail * 0.4, abs_tol=1e-12)
    # one-sided tail ignores the triangle mass m
    tail_os = sum(xf * max(0.0, 1.0 - xf - sf) for xf, sf in st.neighbor_xs)
    assert math.isclose(bounds.one_sided_r1_bound(st, 0.4, 0.0), 0.023 * tail_os * 0.4, abs_tol=1e-12)


def test_bounds_scale_linearly_in_x():
    st = _stats(s=0.6, d=1.0, m=0.0, neighbor_xs=((0.5, 0.5), (0.5, 0.9)))
    for fn in (
        bounds.lemma_r0_bound,
        bounds.lemma_r1_bound,
        bounds.patience_r0_bound,
        bounds.patience_r1_bound,
        bounds.one_sided_r0_bound,
        bounds.one_sided_r1_bound,
    ):
        assert math.isclose(fn(st, 0.4, 0.171), 2.0 * fn(st, 0.2, 0.171), abs_tol=1e-12)


# ---------------------------------------------------------------------------
# fact battery


def test_verify_facts_all_hold():
    rows = bounds.verify_facts()
    assert len(rows) == 12
    for r in rows:
        assert r.holds, f"{r.fact_id}: margin {r.margin}"
        assert r.margin >= 0.0


def test_verify_facts_covers_expected_rows():
    ids = {r.fact_id for r in bounds.verify_facts()}
    assert {
        "coupling_concavity",
        "union_bound_product",
        "h_linear_underestimate",
        "z_kernel_floor",
        "patience_r0_floor_at_2",
        "one_sided_r0_floor_at_2",
        "ell2_argmin_r0_pair",
        "ell2_argmin_r0_single",
    } <= ids


# ---------------------------------------------------------------------------
# five-variable certificates


@pytest.fixture(scope="module")
def certs():
    settings = {
        "general": 0.171,
        "bipartite": 0.171,
        "patience_general": 0.16,
        "patience_one_sided": 0.162,
    }
    return {
        s: bounds.five_var_minimize(s, a, grid_resolution=41, refinements=2)
        for s, a in settings.items()
    }


def test_certified_minima(certs):
    assert abs(certs["general"].minimum - 0.450) <= 2e-3
    assert abs(certs["bipartite"].minimum - 0.456) <= 2e-3
    assert abs(certs["patience_general"].minimum - 0.395) <= 2e-3
    assert abs(certs["patience_one_sided"].minimum - 0.426) <= 2e-3


def test_minimizers_satisfy_constraints(certs):
    for cert in certs.values():
        s, d, dbig, x, m = cert.minimizer
        assert s >= -1e-9 and x >= -1e-9
        assert abs(s + d - (2 - x)) < 1e-6
        assert d <= 2 * (1 - x) + 1e-9
        assert -1e-9 <= dbig <= d + 1e-9
        assert -1e-9 <= m <= 1 + 1e-9
    for setting in ("bipartite", "patience_one_sided"):
        assert certs[setting].minimizer[4] == 0.0  # m pinned


def test_grid_doubling_convergence():
    a = bounds.five_var_minimize("bipartite", 0.171, grid_resolution=41, refinements=2)
    b = bounds.five_var_minimize("bipartite", 0.171, grid_resolution=81, refinements=2)
    assert abs(a.minimum - b.minimum) < 1e-3


def test_certificate_equality_invariant(certs):
    pairs = {
        "general": (bounds.lemma_r0_bound, bounds.lemma_r1_bound),
        "bipartite": (bounds.lemma_r0_bound, bounds.lemma_r1_bound),
        "patience_general": (bounds.patience_r0_bound, bounds.patience_r1_bound),
        "patience_one_sided": (bounds.one_sided_r0_bound, bounds.one_sided_r1_bound),
    }
    for setting, cert in certs.items():
        st, x_e = bounds.synthetic_stats_at(cert.minimizer)
        r0, r1 = pairs[setting]
        realized = (r0(st, x_e, cert.alpha) + r1(st, x_e, cert.alpha)) / x_e
        assert abs(realized - cert.minimum) < 1e-6, setting


def test_cross_validation_on_suite_instances(certs):
    floor = certs["general"].minimum - 1e-6
    for entry in build_suite():
        stats = edge_stats(entry.x, entry.instance)
        for eid, xe in entry.x.items():
            if xe <= 0:
                continue
            total = bounds.lemma_r0_bound(stats[eid], xe, 0.171) + bounds.lemma_r1_bound(
                stats[eid], xe, 0.171
            )
            assert total / xe >= floor, (entry.name, eid)


def test_sign_conditions_reported(certs):
    for cert in certs.values():
        assert cert.sign_conditions
        assert all(v >= 0 for v in cert.sign_conditions.values())
