import math
from itertools import permutations as iter_permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import polarperm as pp
from polarperm.bp_decoder import CLIP, _sweep_left_to_right, _sweep_right_to_left, _upper_rows, boxplus
from polarperm.permutations import (
    IndexMap,
    LayerPermutation,
    compose,
    cyclic_shift_set,
    form_permutation_set,
    index_map,
    permute_code,
    permute_llrs,
    random_perm_set,
    read_perm_file,
    unpermute_bits,
    write_perm_file,
)
from polarperm.polar_code import construct_frozen_set

from conftest import make_frames
from oracles import RewiredBp

perm_strategy = st.permutations(range(4)).map(lambda s: LayerPermutation(tuple(s)))


class TestLayerPermutation:
    def test_identity(self):
        assert LayerPermutation.identity(5).slots == (0, 1, 2, 3, 4)
        assert LayerPermutation.identity(5).is_identity()

    def test_rejects_non_permutation(self):
        with pytest.raises(ValueError):
            LayerPermutation((0, 0, 1))

    def test_compose_mismatched_sizes(self):
        with pytest.raises(ValueError):
            compose(LayerPermutation.identity(3), LayerPermutation.identity(4))


class TestIndexMap:
    def test_identity_map(self):
        mapping = index_map(LayerPermutation.identity(3))
        assert np.array_equal(mapping.forward, np.arange(8))

    def test_bit_reversal_n3(self):
        mapping = index_map(LayerPermutation((2, 1, 0)))
        assert mapping.forward[1] == 4
        assert mapping.forward[3] == 6
        assert mapping.forward[7] == 7

    def test_swap_low_bits_n3(self):
        mapping = index_map(LayerPermutation((1, 0, 2)))
        assert mapping.forward[1] == 2
        assert mapping.forward[4] == 4

    @given(st.permutations(range(5)))
    def test_forward_inverse_identity(self, slots):
        mapping = index_map(LayerPermutation(tuple(slots)))
        assert np.array_equal(mapping.forward[mapping.inverse], np.arange(32))
        assert np.array_equal(mapping.inverse[mapping.forward], np.arange(32))

    def test_composition_exhaustive_n3(self):
        perms = [LayerPermutation(p) for p in iter_permutations(range(3))]
        for p1 in perms:
            for p2 in perms:
                lhs = index_map(compose(p1, p2)).forward
                rhs = index_map(p1).forward[index_map(p2).forward]
                assert np.array_equal(lhs, rhs)

    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            IndexMap(forward=np.zeros(4, dtype=np.int64), inverse=np.zeros(4, dtype=np.int64))


class TestVectorMaps:
    def test_identity_leaves_unchanged(self):
        mapping = index_map(LayerPermutation.identity(3))
        y = np.arange(8.0)
        assert np.array_equal(permute_llrs(y, mapping), y)

    @given(perm_strategy)
    def test_round_trip(self, perm):
        mapping = index_map(perm)
        y = np.random.default_rng(0).normal(size=16)
        assert np.array_equal(unpermute_bits(permute_llrs(y, mapping), mapping), y)

    @given(perm_strategy)
    def test_constant_vector_fixed(self, perm):
        mapping = index_map(perm)
        y = np.full(16, 2.5)
        assert np.array_equal(permute_llrs(y, mapping), y)

    def test_forward_placement(self):
        mapping = index_map(LayerPermutation((2, 1, 0)))
        y = np.arange(8.0)
        out = permute_llrs(y, mapping)
        for i in range(8):
            assert out[mapping.forward[i]] == y[i]


class TestPermuteCode:
    def test_identity(self):
        code = construct_frozen_set(8, 5, 0.0)
        mapped = permute_code(code, index_map(LayerPermutation.identity(3)))
        assert np.array_equal(mapped.frozen_mask, code.frozen_mask)

    def test_bit_reversal_p85(self):
        # sigma maps {0,1,2} -> {0,4,2}
        code = construct_frozen_set(8, 5, 0.0)
        mapped = permute_code(code, index_map(LayerPermutation((2, 1, 0))))
        assert sorted(mapped.frozen_positions) == [0, 2, 4]
        assert mapped.K == code.K

    @given(perm_strategy)
    def test_round_trip(self, perm):
        code = construct_frozen_set(16, 9, 1.0)
        mapping = index_map(perm)
        back = IndexMap(forward=mapping.inverse, inverse=mapping.forward)
        assert np.array_equal(
            permute_code(permute_code(code, mapping), back).frozen_mask,
            code.frozen_mask,
        )


class TestPermutationSets:
    def test_n3_k2(self):
        perms = form_permutation_set(3, 2)
        assert [p.slots for p in perms] == [(0, 1, 2), (0, 2, 1)]

    def test_n3_k3_has_six(self):
        assert len(form_permutation_set(3, 3)) == 6

    def test_n10_k6_has_720(self):
        assert len(form_permutation_set(10, 6)) == 720

    @pytest.mark.parametrize("k", [2, 3, 4, 5])
    def test_sizes_are_k_factorial(self, k):
        perms = form_permutation_set(7, k)
        assert len(perms) == math.factorial(k)
        assert len({p.slots for p in perms}) == len(perms)

    def test_prefix_fixed_and_identity_first(self):
        perms = form_permutation_set(6, 3)
        assert perms[0].is_identity()
        for p in perms:
            assert p.slots[:3] == (0, 1, 2)
            assert sorted(p.slots[3:]) == [3, 4, 5]

    @pytest.mark.parametrize("k", [0, 1, 8])
    def test_k_out_of_range(self, k):
        with pytest.raises(ValueError):
            form_permutation_set(7, k)

    def test_cyclic_shift_counts(self):
        assert len(cyclic_shift_set(3)) == 3
        assert len(cyclic_shift_set(10)) == 10

    def test_cyclic_shift_identity_first_all_valid(self):
        perms = cyclic_shift_set(5)
        assert perms[0].is_identity()
        for p in perms:
            assert sorted(p.slots) == list(range(5))
        assert len({p.slots for p in perms}) == 5

    def test_random_set_identity_first_distinct(self):
        perms = random_perm_set(6, 12, np.random.default_rng(0))
        assert perms[0].is_identity()
        assert len({p.slots for p in perms}) == 12

    def test_random_set_exhaustion_guard(self):
        with pytest.raises(ValueError):
            random_perm_set(3, 7, np.random.default_rng(0))


class TestPermFile:
    def test_round_trip_with_scores(self, tmp_path):
        path = tmp_path / "set.perms"
        perms = form_permutation_set(4, 3)
        scores = np.linspace(1.0, 0.0, len(perms))
        write_perm_file(path, perms, k=3, scores=scores)
        rperms, rscores, n, k = read_perm_file(path)
        assert rperms == perms
        assert rscores == list(scores)
        assert (n, k) == (4, 3)

    def test_round_trip_without_scores(self, tmp_path):
        path = tmp_path / "set.perms"
        perms = cyclic_shift_set(4)
        write_perm_file(path, perms, k=4)
        rperms, rscores, _, _ = read_perm_file(path)
        assert rperms == perms and rscores is None

    def test_malformed_header(self, tmp_path):
        path = tmp_path / "bad.perms"
        path.write_text("k=3\n0 1 2\n")
        with pytest.raises(ValueError, match="header"):
            read_perm_file(path)

    def test_wrong_slot_count(self, tmp_path):
        path = tmp_path / "bad.perms"
        path.write_text("n=3 k=3\n0 1\n")
        with pytest.raises(ValueError):
            read_perm_file(path)

    def test_partial_scores_rejected(self, tmp_path):
        path = tmp_path / "bad.perms"
        path.write_text("n=3 k=3\n0 1 2 score=0.5\n0 2 1\n")
        with pytest.raises(ValueError, match="scores"):
            read_perm_file(path)


def run_equivalence(code, perms, llrs, iterations=6):
    """Assert rewired-graph BP and bit-index BP agree at every iteration."""
    uppers = _upper_rows(code.n)
    for perm in perms:
        mapping = index_map(perm)
        oracle = RewiredBp(perm.slots, code.frozen_mask)
        oracle.init(llrs)
        pcode = permute_code(code, mapping)
        L = np.zeros((llrs.shape[0], code.n + 1, code.N))
        R = np.zeros_like(L)
        L[:, code.n, :] = permute_llrs(llrs, mapping)
        R[:, 0, pcode.frozen_mask == 1] = CLIP
        for _ in range(iterations):
            oracle.iterate()
            _sweep_right_to_left(L, R, uppers, boxplus)
            _sweep_left_to_right(L, R, uppers, boxplus)
            u_prod = unpermute_bits(((R[:, 0] + L[:, 0]) < 0).astype(np.uint8), mapping)
            x_prod = unpermute_bits(
                ((L[:, code.n] + R[:, code.n]) < 0).astype(np.uint8), mapping
            )
            assert np.array_equal(oracle.hard_u(), u_prod), perm.slots
            assert np.array_equal(oracle.hard_x(), x_prod), perm.slots


def test_theorem_equivalence_desk_scale():
    # full-budget version lives in the acceptance suite
    code = construct_frozen_set(8, 5, 0.0)
    _, _, llrs = make_frames(code, 2.0, 100, seed=13)
    run_equivalence(code, form_permutation_set(3, 3), llrs)
