import itertools
import math

import pytest

from treeshift.errors import EvaluationError, StructureError
from treeshift.series import Converges, Diverges, TermsDoNotVanish, inverse_square_sum
from treeshift.trees import (
    LazyTree,
    OmegaVertex,
    descendant_subtree,
    finite_tree,
    nat_path,
    omega_tree,
)
from treeshift.weights import (
    AluthgeWeights,
    CallableWeights,
    OmegaShiftWeights,
    TableWeights,
    aluthge_weights,
    node_norm,
    polar_weights,
)

GAMMA = math.sqrt(inverse_square_sum().value)


def doubling_path():
    # weight of edge into n is 2^(n-1), so the norm at n is 2^n
    return CallableWeights(nat_path(), lambda v: 2.0 ** (v - 1))


def star_with_unit_weights():
    tree = LazyTree(
        root=0,
        parent_fn=lambda v: None if v == 0 else 0,
        children_fn=lambda u: itertools.count(1) if u == 0 else (),
        child_count_fn=lambda u: None if u == 0 else 0,
        contains_fn=lambda v: isinstance(v, int) and v >= 0,
    )
    claims = lambda u: TermsDoNotVanish(start=0, lower_bound=1.0) if u == 0 else None
    return CallableWeights(tree, lambda v: 1.0, divergence_claims=claims)


class TestNodeNorm:
    def test_omega_all_zero_norm_is_gamma(self):
        w = OmegaShiftWeights()
        nn = node_norm(w, OmegaVertex(0))
        assert nn.status == "finite"
        assert nn.value == pytest.approx(GAMMA, rel=1e-15)

    def test_omega_norm_scales_with_digit_sum(self):
        w = OmegaShiftWeights()
        nn = node_norm(w, OmegaVertex(2, (1, 2)))
        assert nn.value == pytest.approx(8.0 * GAMMA, rel=1e-14)

    def test_leaf_norm_is_zero(self):
        tree = finite_tree([None, 0])
        w = TableWeights(tree, {1: 2.5})
        assert node_norm(w, 1).is_zero

    def test_doubling_path_norm(self):
        w = doubling_path()
        assert node_norm(w, 5).value == pytest.approx(2.0**5, rel=1e-15)

    def test_infinite_norm_with_claim(self):
        w = star_with_unit_weights()
        nn = node_norm(w, 0)
        assert nn.status == "infinite"
        assert nn.certificate == TermsDoNotVanish(start=0, lower_bound=1.0)

    def test_aggregate_cached(self):
        w = OmegaShiftWeights()
        assert w.aggregate(OmegaVertex(3)) is w.aggregate(OmegaVertex(3))


class TestOmegaWeights:
    def test_weight_formula(self):
        w = OmegaShiftWeights()
        # digits (3, 2): 2^3 / (2 + 1)
        assert w.weight(OmegaVertex(1, (3, 2))) == pytest.approx(8.0 / 3.0)
        assert w.weight(OmegaVertex(1, (2,))) == pytest.approx(1.0 / 3.0)
        assert w.weight(OmegaVertex(9)) == 1.0

    def test_works_on_descendant_subtree(self):
        apex = OmegaVertex(0, (1,))
        sub = descendant_subtree(omega_tree(), apex)
        w = OmegaShiftWeights(sub)
        child = apex.child(2)
        assert w.weight(child) == pytest.approx(2.0 / 3.0)
        assert node_norm(w, apex).value == pytest.approx(2.0 * GAMMA, rel=1e-14)
        with pytest.raises(EvaluationError):
            w.weight(apex)  # the apex is the root of the subtree

    def test_rejects_foreign_trees(self):
        with pytest.raises(StructureError):
            OmegaShiftWeights(nat_path())


class TestPolarWeights:
    def test_omega_modulus(self):
        w = OmegaShiftWeights()
        pi = polar_weights(w)
        for digits in [(), (3,), (2, 5)]:
            level = len(digits)
            v = OmegaVertex.make(level, digits) if digits else OmegaVertex(level)
            expected = 1.0 / ((v.last_digit + 1) * GAMMA)
            assert abs(pi.weight(v)) == pytest.approx(expected, rel=1e-14)

    def test_zero_parent_norm_gives_zero(self):
        # vertex 1 is a zero node (both child weights vanish), so both
        # children take the zero branch of the polar formula
        tree = finite_tree([None, 0, 1, 1])
        w = TableWeights(tree, {1: 1.0, 2: 0.0, 3: 0.0})
        pi = polar_weights(w)
        assert pi.weight(2) == 0
        assert pi.weight(3) == 0

    def test_doubling_path_polar_weights_are_one(self):
        pi = polar_weights(doubling_path())
        for n in (1, 2, 7):
            assert pi.weight(n) == pytest.approx(1.0, rel=1e-15)

    def test_polar_aggregate_is_unit_on_active_vertices(self):
        w = OmegaShiftWeights()
        pi = polar_weights(w)
        agg = pi.aggregate(OmegaVertex(0, (4,)))
        assert agg == Converges(1.0, 0.0)

    def test_infinite_parent_norm_errors_with_vertex(self):
        pi = polar_weights(star_with_unit_weights())
        with pytest.raises(EvaluationError) as err:
            pi.weight(3)
        assert err.value.vertex == 3


class TestAluthgeWeights:
    def test_t_range_validated(self):
        w = OmegaShiftWeights()
        for bad in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                aluthge_weights(w, bad)

    def test_geometric_mean_on_path(self):
        # positive path weights, t = 1/2: transformed weight is the geometric
        # mean of adjacent weights
        vals = {1: 1.3, 2: 0.7, 3: 2.9, 4: 1.1, 5: 0.4}
        w = CallableWeights(nat_path(), lambda v: vals.get(v, 1.0))
        mu = aluthge_weights(w, 0.5)
        for n in (1, 2, 3, 4):
            assert mu.weight(n).real == pytest.approx(
                math.sqrt(vals[n] * vals[n + 1]), rel=1e-12
            )

    @pytest.mark.parametrize("t", [0.25, 0.5, 1.0])
    def test_constant_weights_fixed_point(self, t):
        w = CallableWeights(nat_path(), lambda v: 1.7)
        mu = aluthge_weights(w, t)
        assert mu.weight(4).real == pytest.approx(1.7, rel=1e-15)

    @pytest.mark.parametrize("t", [0.25, 0.5, 0.9])
    def test_omega_closed_form(self, t):
        w = OmegaShiftWeights()
        mu = aluthge_weights(w, t)
        for digits in [(2,), (3, 1), (1, 0, 4)]:
            v = OmegaVertex.make(len(digits), digits)
            expected = 2.0 ** (v.digit_sum - (1 - t) * v.last_digit) / (v.last_digit + 1)
            assert mu.weight(v).real == pytest.approx(expected, rel=1e-12)

    def test_omega_aggregate_diverges_for_all_t(self):
        w = OmegaShiftWeights()
        for t in (0.01, 0.25, 0.5, 0.75, 1.0):
            agg = aluthge_weights(w, t).aggregate(OmegaVertex(0, (2,)))
            assert isinstance(agg, Diverges)
            assert agg.certificate.ratio > 1.0

    def test_t_equals_one_matches_norm_ratio_times_weight(self):
        w = doubling_path()
        mu = aluthge_weights(w, 1.0)
        for n in (1, 2, 5):
            s_child = node_norm(w, n).value
            s_parent = node_norm(w, n - 1).value
            assert mu.weight(n).real == pytest.approx(
                s_child / s_parent * w.weight(n).real, rel=1e-15
            )

    def test_zero_branches(self):
        tree = finite_tree([None, 0, 1, 2])
        w = TableWeights(tree, {1: 1.0, 2: 0.0, 3: 4.0})
        mu = aluthge_weights(w, 0.5)
        # vertex 3 is a leaf: zero child norm kills its transformed weight
        assert mu.weight(3) == 0
        # vertex 2's parent has zero norm: the inactive-parent branch applies
        assert mu.weight(2) == 0


class TestScaleCovariance:
    def test_scaling_weights_scales_mu_and_fixes_pi(self):
        tree = finite_tree([None, 0, 0, 1, 1, 2])
        base = {1: 1.5, 2: 0.3, 3: 2.2, 4: 0.9, 5: 1.1}
        c = 3.7
        w1 = TableWeights(tree, base)
        w2 = TableWeights(tree, {v: c * x for v, x in base.items()})
        mu1, mu2 = aluthge_weights(w1, 0.4), aluthge_weights(w2, 0.4)
        pi1, pi2 = polar_weights(w1), polar_weights(w2)
        for v in range(1, 6):
            assert mu2.weight(v) == pytest.approx(c * mu1.weight(v), rel=1e-12)
            assert pi2.weight(v) == pytest.approx(pi1.weight(v), rel=1e-12)


class TestTableWeights:
    def test_table_must_cover_non_root_vertices(self):
        tree = finite_tree([None, 0, 0])
        with pytest.raises(StructureError):
            TableWeights(tree, {1: 1.0})
        with pytest.raises(StructureError):
            TableWeights(tree, {1: 1.0, 2: 1.0, 3: 1.0})

    def test_root_has_no_weight(self):
        tree = finite_tree([None, 0])
        w = TableWeights(tree, {1: 2.0})
        with pytest.raises(EvaluationError):
            w.weight(0)

    def test_complex_weights(self):
        tree = finite_tree([None, 0])
        w = TableWeights(tree, {1: 1 + 2j})
        assert node_norm(w, 0).value == pytest.approx(math.sqrt(5.0), rel=1e-15)
