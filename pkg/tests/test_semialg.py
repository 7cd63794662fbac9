import math

import numpy as np
import pytest

from polysamp.polycore import Box, Polynomial
from polysamp.semialg import (
    LmiPencil,
    SemialgebraicSet,
    bounding_box,
    contains,
    contains_many,
    format_set_text,
    lmi_to_polynomials,
    load_bundled_set,
    parse_set_text,
)


def unit_disk(search=2.0):
    g = Polynomial(2, {(0, 0): 1.0, (2, 0): -1.0, (0, 2): -1.0})
    return SemialgebraicSet(2, (g,), Box((-search, -search), (search, search)), name="disk")


def test_contains_oned_examples():
    K = load_bundled_set("oned")
    assert contains(K, (2.0,))  # g1 = 0.5, g2 = 1
    assert not contains(K, (1.0,))  # g1 = -0.5
    assert not contains(K, (3.5,))  # violates x <= 3
    assert not contains(K, (1.4,))  # outside the box


def test_contains_cerone_point():
    K = load_bundled_set("cerone")
    # (0)^2 + (0.5)^2 = 0.25 <= 1 and 0.5 <= 0.5 * 1^2
    assert contains(K, (1.0, 0.5))
    assert not contains(K, (1.0, 0.6))  # above the parabola


def test_contains_dimension_mismatch():
    K = unit_disk()
    with pytest.raises(ValueError):
        contains(K, (0.0,))


def test_contains_many_matches_scalar():
    K = load_bundled_set("cerone")
    rng = np.random.default_rng(2)
    pts = np.column_stack(
        [rng.uniform(0.3, 2.2, 500), rng.uniform(-0.1, 1.8, 500)]
    )
    mask = contains_many(K, pts)
    for i in range(pts.shape[0]):
        assert mask[i] == contains(K, pts[i])


def test_contains_monotone_under_constraint_removal():
    K = load_bundled_set("stabilizability")
    rng = np.random.default_rng(9)
    pts = rng.uniform(-1, 1, size=(2000, 2))
    full = contains_many(K, pts)
    for drop in range(len(K.constraints)):
        sub = SemialgebraicSet(
            K.dimension,
            tuple(g for i, g in enumerate(K.constraints) if i != drop),
            K.box,
        )
        mask = contains_many(sub, pts)
        assert np.all(mask >= full)  # removal never shrinks the accepted set


def test_bounding_box_unit_disk():
    K = unit_disk(2.0)
    box = bounding_box(K, 401)
    step = 4.0 / 400
    for i in range(2):
        assert box.lower[i] == pytest.approx(-1.0, abs=step + 1e-12)
        assert box.upper[i] == pytest.approx(1.0, abs=step + 1e-12)
        # conservative: never tighter than the analytic box
        assert box.lower[i] <= -1.0
        assert box.upper[i] >= 1.0


def test_bounding_box_no_constraints_is_search_box():
    K = SemialgebraicSet(2, (), Box((0, 0), (1, 2)))
    box = bounding_box(K, 11)
    assert box == Box((0, 0), (1, 2))


def test_bounding_box_cerone_matches_analytic_oracle():
    # Analytic extremes of the cerone set (circle/parabola intersections
    # solved by bracketed root finding, cross-checked on a 6001^2 grid):
    # x1 in [0.5083474..., 2.0], x2 in [0.0, 1.6084653...].
    K = load_bundled_set("cerone")
    wide = SemialgebraicSet(2, K.constraints, Box((-1.0, -1.0), (3.0, 3.0)))
    box = bounding_box(wide, 1001)
    step = 4.0 / 1000
    oracle = ((0.5083474249866612, 2.0), (0.0, 1.6084653714201338))
    for i in range(2):
        assert box.lower[i] == pytest.approx(oracle[i][0], abs=2 * step)
        assert box.upper[i] == pytest.approx(oracle[i][1], abs=2 * step)
        assert box.lower[i] <= oracle[i][0]  # conservative outer box
        assert box.upper[i] >= oracle[i][1]
    # The definition file's working box is a loose outer approximation of
    # the x1/x2 maxima and clips the set slightly at the x2 minimum.
    for i in range(2):
        assert abs(box.lower[i] - K.box.lower[i]) < 0.06
        assert abs(box.upper[i] - K.box.upper[i]) < 0.06


def test_bounding_box_empty_set():
    g = Polynomial.constant(2, -1.0)
    K = SemialgebraicSet(2, (g,), Box((0, 0), (1, 1)))
    with pytest.raises(ValueError, match="empty"):
        bounding_box(K, 11)


def test_bounding_box_contains_all_member_grid_points():
    K = load_bundled_set("stabilizability")
    res = 101
    box = bounding_box(K, res)
    axes = [np.linspace(K.box.lower[i], K.box.upper[i], res) for i in range(2)]
    xx, yy = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    member = pts[contains_many(K, pts)]
    assert np.all(member[:, 0] >= box.lower[0]) and np.all(member[:, 0] <= box.upper[0])
    assert np.all(member[:, 1] >= box.lower[1]) and np.all(member[:, 1] <= box.upper[1])


def test_lmi_minors_2x2_identity_pencil():
    F0 = np.eye(2)
    F1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    minors = lmi_to_polynomials(LmiPencil((F0, F1)))
    assert minors[0] == Polynomial.constant(1, 1.0)
    assert minors[1] == Polynomial.constant(1, 1.0)
    assert minors[2] == Polynomial(1, {(0,): 1.0, (2,): -1.0})


def test_lmi_minors_diagonal():
    F0 = np.zeros((2, 2))
    F1 = np.diag([1.0, 0.0])
    F2 = np.diag([0.0, 1.0])
    minors = lmi_to_polynomials(LmiPencil((F0, F1, F2)))
    assert minors[0] == Polynomial(2, {(1, 0): 1.0})
    assert minors[1] == Polynomial(2, {(0, 1): 1.0})
    assert minors[2] == Polynomial(2, {(1, 1): 1.0})


def test_lmi_minors_disk_pencil():
    # [[1 + x1, x2], [x2, 1 - x1]] -> {1 + x1, 1 - x1, 1 - x1^2 - x2^2}
    F0 = np.eye(2)
    F1 = np.diag([1.0, -1.0])
    F2 = np.array([[0.0, 1.0], [1.0, 0.0]])
    minors = lmi_to_polynomials(LmiPencil((F0, F1, F2)))
    assert minors[0] == Polynomial(2, {(0, 0): 1.0, (1, 0): 1.0})
    assert minors[1] == Polynomial(2, {(0, 0): 1.0, (1, 0): -1.0})
    assert minors[2] == Polynomial(2, {(0, 0): 1.0, (2, 0): -1.0, (0, 2): -1.0})


def test_lmi_minors_match_eigenvalue_test():
    rng = np.random.default_rng(17)
    for trial in range(3):
        m, n = 3, 2
        mats = []
        for _ in range(n + 1):
            A = rng.uniform(-1, 1, size=(m, m))
            mats.append((A + A.T) / 2)
        mats[0] += np.eye(m) * 0.5
        pencil = LmiPencil(tuple(mats))
        minors = lmi_to_polynomials(pencil)
        assert len(minors) == 2**m - 1
        pts = rng.uniform(-1, 1, size=(1000, n))
        for x in pts:
            all_minors_ok = all(p.evaluate(x) >= 0.0 for p in minors)
            lam_min = float(np.linalg.eigvalsh(pencil.evaluate(x))[0])
            assert all_minors_ok == (lam_min >= -1e-10) or abs(lam_min) < 1e-8


def test_lmi_size_guard():
    m = 7
    mats = (np.eye(m), np.eye(m))
    with pytest.raises(ValueError):
        lmi_to_polynomials(LmiPencil(mats))


def test_set_text_roundtrip():
    for name in ("oned", "schur3", "stabilizability", "cerone"):
        K = load_bundled_set(name)
        text = format_set_text(K)
        K2 = parse_set_text(text)
        assert K2.dimension == K.dimension
        assert K2.box == K.box
        assert K2.constraints == K.constraints


def test_le0_sense_is_negated():
    text = "dim 1\nbox_lower 0.0\nbox_upper 1.0\nconstraint le0\n1.0 1\nend\n"
    K = parse_set_text(text)
    assert K.constraints[0] == Polynomial(1, {(1,): -1.0})


def test_parse_errors():
    with pytest.raises(ValueError):
        parse_set_text("dim 1\nbox_lower 0.0\n")
    with pytest.raises(ValueError):
        parse_set_text("dim 1\nbox_lower 0\nbox_upper 1\nconstraint ge0\n1.0 0\n")
    with pytest.raises(ValueError):
        parse_set_text("dim 1\nbox_lower 0\nbox_upper 1\nconstraint gt0\n1.0 0\nend\n")


def test_bundled_oned_component_inside_box():
    # box [1.5, 4] clips K to [1 + sqrt(0.5), 3]
    K = load_bundled_set("oned")
    left = 1 + math.sqrt(0.5)
    xs = np.linspace(1.5, 4.0, 5001).reshape(-1, 1)
    mask = contains_many(K, xs)
    members = xs[mask, 0]
    assert members.min() >= left - 1e-3
    assert members.max() <= 3.0 + 1e-12
