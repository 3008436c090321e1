"""Averaged cocycles, scale-local cocycles, lifts, families."""

import numpy as np
import pytest

import boxlab as bl
from boxlab.boxspace import BoxPoint
from boxlab.cocycles import BlockMap, LocalRepresentation, QuotientCarrier
from boxlab.errors import ActionCheckError
from boxlab.lpspace import AffineIsometry, SignedPermutation


@pytest.fixture(scope="module")
def line_fibrations(deep_space):
    return {
        p: bl.from_proper_action(deep_space, bl.translation_action(1, p), r_max=5)
        for p in (1.0, 2.0)
    }


class TestBlockMap:
    def test_permutation_action(self):
        tau = np.array([1, 2, 0])
        bm = BlockMap(tau)
        blocks = np.array([[1.0], [2.0], [3.0]])
        assert np.array_equal(bm.apply(blocks), np.array([[2.0], [3.0], [1.0]]))

    def test_twisted_action(self):
        flip = AffineIsometry(
            1.0, SignedPermutation(np.array([0]), np.array([-1])), np.zeros(1)
        ).linear
        bm = BlockMap(np.array([1, 0]), [flip, None])
        out = bm.apply(np.array([[2.0], [5.0]]))
        assert np.array_equal(out, np.array([[-5.0], [2.0]]))

    def test_compose_matches_sequential(self):
        rng = np.random.default_rng(0)
        size, dim = 6, 2
        for _ in range(20):
            a = BlockMap(rng.permutation(size))
            b = BlockMap(rng.permutation(size))
            blocks = rng.normal(size=(size, dim))
            assert np.array_equal(a.compose(b).apply(blocks), a.apply(b.apply(blocks)))


class TestAveraged:
    def test_two_element_group_by_hand(self):
        q = bl.CyclicQuotient([2])
        rep, coc = bl.averaged_cocycle(np.array([[0.0], [1.0]]), q, 1.0)
        assert np.array_equal(coc.value(0), np.zeros((2, 1)))
        assert np.array_equal(coc.value(1), np.array([[1.0], [-1.0]]))
        assert coc.norm(1) == 1.0
        assert coc.norm(0) == 0.0

    def test_law_holds_exactly_for_integer_data(self):
        q = bl.CyclicQuotient([4])
        table = np.array([[0.0], [1.0], [2.0], [1.0]])
        rep, coc = bl.averaged_cocycle(table, q, 1.0)
        report = bl.verify_local_action(rep, coc, mode="exact")
        assert report.passed
        assert report.identity_checked == 16

    def test_law_on_planar_embedding(self, make_chain):
        space = bl.assemble_box_space(make_chain(8))
        f = bl.cycle_plane_embedding(space, 2.0)
        q = space.chain.levels[0]
        table = np.stack([f(BoxPoint(0, x)) for x in q.elements()])
        rep, coc = bl.averaged_cocycle(table, q, 2.0)
        report = bl.verify_local_action(rep, coc, tolerance=1e-12)
        assert report.passed

    def test_norm_invariant_under_argument_length(self, make_chain):
        # norms depend only on word length: averaging washes out the base point
        space = bl.assemble_box_space(make_chain(12))
        f = bl.cycle_plane_embedding(space, 2.0)
        q = space.chain.levels[0]
        table = np.stack([f(BoxPoint(0, x)) for x in q.elements()])
        _, coc = bl.averaged_cocycle(table, q, 2.0)
        dist = q.distance_from_identity()
        by_length = {}
        for x in q.elements():
            by_length.setdefault(int(dist[x]), set()).add(round(coc.norm(x), 12))
        for vals in by_length.values():
            assert len(vals) == 1

    def test_dict_input(self):
        q = bl.CyclicQuotient([3])
        rep, coc = bl.averaged_cocycle({0: [0.0], 1: [1.0], 2: [1.0]}, q, 2.0)
        assert coc.dim == 1
        assert bl.verify_local_action(rep, coc).passed

    def test_sigma_is_right_translation(self):
        q = bl.CyclicQuotient([5])
        rep, _ = bl.averaged_cocycle(np.zeros((5, 1)), q, 1.0)
        for x in q.elements():
            tau = rep.image(x).tau
            for z in q.elements():
                assert tau[z] == q.mult(z, x)


class TestLocalFromFibration:
    def test_translation_norms_equal_length(self, line_fibrations, deep_chain):
        for p, fib in line_fibrations.items():
            coc = bl.local_cocycle_from_fce(fib, 4)
            q = coc.carrier.quotient
            assert q.order == 16
            dist = q.distance_from_identity()
            for x in q.elements():
                expected = float(dist[x]) if dist[x] < 4 else 0.0
                assert coc.norm(x) == expected, (p, x)

    def test_law_all_admissible_pairs(self, line_fibrations):
        for fib in line_fibrations.values():
            coc = bl.local_cocycle_from_fce(fib, 4)
            report = bl.verify_local_action(coc.companion, coc)
            assert report.passed, report.to_text()

    def test_zero_and_identity_outside_scale(self, line_fibrations):
        coc = bl.local_cocycle_from_fce(line_fibrations[1.0], 3)
        q = coc.carrier.quotient
        dist = q.distance_from_identity()
        for x in q.elements():
            if dist[x] >= 3:
                assert not coc.live(x)
                assert np.array_equal(coc.value(x), np.zeros((q.order, 1)))
                assert coc.companion.image(x).maps is None
                assert np.array_equal(coc.companion.image(x).tau, np.arange(q.order))

    def test_matches_negated_averaged_exactly(self, dyadic_space):
        # two independent constructions of the same object, up to sign
        f = bl.linf_embedding(dyadic_space)
        fib = bl.trivial_fibration(f)
        r = 2
        coc = bl.local_cocycle_from_fce(fib, r)
        level = bl.select_level_for_r(dyadic_space.chain, 2 * r)
        q = dyadic_space.chain.levels[level]
        table = np.stack([f(BoxPoint(level, x)) for x in q.elements()])
        _, avg = bl.averaged_cocycle(table, q, f.p)
        dist = q.distance_from_identity()
        for x in q.elements():
            if dist[x] < r:
                assert np.array_equal(coc.value(x), -avg.value(x))

    def test_explicit_level_must_be_deep_enough(self, line_fibrations):
        with pytest.raises(ValueError):
            bl.local_cocycle_from_fce(line_fibrations[1.0], 4, level=2)

    def test_inconsistent_oracle_detected(self, deep_space):
        base = bl.from_proper_action(deep_space, bl.translation_action(1, 2.0))
        flip = AffineIsometry(
            2.0, SignedPermutation(np.array([0]), np.array([-1])), np.zeros(1)
        )
        level, center, rad = 3, 9, 2
        q = deep_space.chain.levels[level]
        target = tuple(
            sorted(
                BoxPoint(level, x)
                for x in q.elements()
                if q.cayley_distance(center, x) <= rad
            )
        )

        def corrupted(C, r):
            out = base.trivialization(C, r)
            if tuple(C) == target:
                out[C[0]] = flip.compose(out[C[0]])
            return out

        fib = bl.FibredEmbedding(
            space=deep_space,
            p=2.0,
            dim=1,
            section=base.section,
            exclusion=base.exclusion,
            trivialization=corrupted,
        )
        with pytest.raises(ActionCheckError):
            bl.local_cocycle_from_fce(fib, 3)

    def test_corrupted_value_caught(self, line_fibrations):
        coc = bl.local_cocycle_from_fce(line_fibrations[2.0], 4)
        x0 = next(x for x in coc.values if x != 0)
        coc.values[x0] = coc.values[x0].copy()
        coc.values[x0][5, 0] += 1.0
        report = bl.verify_local_action(coc.companion, coc)
        assert not report.passed
        assert report.identity_witnesses

    def test_rep_coc_compatibility_enforced(self, line_fibrations):
        coc3 = bl.local_cocycle_from_fce(line_fibrations[1.0], 3)
        coc4 = bl.local_cocycle_from_fce(line_fibrations[1.0], 4)
        with pytest.raises(ValueError):
            bl.verify_local_action(coc3.companion, coc4)


class TestLift:
    def test_lift_values_and_support(self, line_fibrations, deep_chain):
        coc = bl.local_cocycle_from_fce(line_fibrations[1.0], 5)
        lifted = bl.lift_to_group(coc, deep_chain)
        for g in range(-6, 7):
            expected = float(abs(g)) if abs(g) < 5 else 0.0
            assert lifted.norm((g,)) == expected

    def test_lift_agrees_with_projection(self, line_fibrations, deep_chain):
        coc = bl.local_cocycle_from_fce(line_fibrations[2.0], 4)
        lifted = bl.lift_to_group(coc, deep_chain)
        q = coc.carrier.quotient
        for g in range(-3, 4):
            x = g % q.order
            assert np.array_equal(lifted.value((g,)), coc.value(x))

    def test_lift_scale_bounded_by_radius(self, deep_chain):
        q = deep_chain.levels[1]  # Z/4, radius 3
        carrier = QuotientCarrier(q)
        rep = LocalRepresentation(carrier=carrier, p=1.0, dim=1, r=5, images={})
        coc = bl.LocalCocycle(
            carrier=carrier, p=1.0, dim=1, r=5, values={}, companion=rep
        )
        with pytest.raises(ValueError):
            bl.lift_to_group(coc, deep_chain)

    def test_lift_needs_matching_carrier(self, line_fibrations, dyadic_chain):
        coc = bl.local_cocycle_from_fce(line_fibrations[1.0], 3)
        with pytest.raises(ValueError):
            bl.lift_to_group(coc, dyadic_chain)

    def test_cocycle_identity_upstairs(self, line_fibrations, deep_chain):
        coc = bl.local_cocycle_from_fce(line_fibrations[1.0], 4)
        lifted = bl.lift_to_group(coc, deep_chain)
        for g in range(-3, 4):
            for h in range(-3, 4):
                if abs(g) < 4 and abs(h) < 4 and abs(g + h) < 4:
                    lhs = lifted.value((g + h,))
                    rhs = lifted.sigma((g,)).apply(lifted.value((h,))) + lifted.value((g,))
                    assert np.array_equal(lhs, rhs)


class TestFamily:
    def test_norm_table(self, line_fibrations, deep_chain):
        fam = bl.family_from_fce(line_fibrations[1.0], range(2, 7))
        assert fam.scales() == [2, 3, 4, 5, 6]
        norms = fam.norms((2,))
        assert norms[2] == 0.0
        assert all(norms[r] == 2.0 for r in (3, 4, 5, 6))

    def test_hypothesis_check_passes(self, line_fibrations):
        fam = bl.family_from_fce(line_fibrations[1.0], range(2, 7))
        elements = [(g,) for g in range(-3, 4)]
        ident = {n: float(n) for n in range(4)}
        report = bl.ultraproduct_hypothesis_check(fam, elements, ident, ident)
        assert report.passed
        for _, n, seq, upper_ok, lower_ok, const in report.rows:
            assert upper_ok and lower_ok and const
            live = [v for r, v in seq.items() if r > n]
            assert all(v == n for v in live)

    def test_zero_family_fails_lower_bound(self, deep_chain):
        members = {}
        for r in (2, 3):
            level = bl.select_level_for_r(deep_chain, 2 * r)
            carrier = QuotientCarrier(deep_chain.levels[level])
            rep = LocalRepresentation(carrier=carrier, p=1.0, dim=1, r=r, images={})
            coc = bl.LocalCocycle(
                carrier=carrier, p=1.0, dim=1, r=r, values={}, companion=rep
            )
            members[r] = bl.lift_to_group(coc, deep_chain)
        fam = bl.CocycleFamily(chain=deep_chain, members=members)
        ident = {n: float(n) for n in range(3)}
        report = bl.ultraproduct_hypothesis_check(fam, [(1,), (0,)], ident, ident)
        assert not report.passed
        by_g = {g: row for g, *row in report.rows}
        _, _, upper_ok, lower_ok, _ = by_g[(1,)]
        assert upper_ok and not lower_ok

    def test_corrupted_member_fails(self, line_fibrations):
        fam = bl.family_from_fce(line_fibrations[1.0], range(2, 6))
        victim = fam.members[4].base
        x0 = next(x for x in victim.values if x != 0)
        victim.values[x0] = victim.values[x0] + 7.0
        ident = {n: float(n) for n in range(4)}
        report = bl.ultraproduct_hypothesis_check(fam, [(x0 if x0 < 8 else x0 - 16,)], ident, ident)
        assert not report.passed
