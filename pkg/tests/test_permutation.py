import numpy as np
import pytest

from permris import (
    InvalidArgumentError,
    Permutation,
    diagnostics,
    identity_perm,
    perm_from_targets,
    random_perm,
    random_symmetric_perm,
    separable_perm,
)


def test_identity_perm():
    p = identity_perm(3)
    assert p.one_based() == list(range(1, 10))
    assert p.kind == "identity"
    assert p.fixed_point_count() == 9
    assert all(d == 0 for d in diagnostics(p).diffs)


def test_random_perm_deterministic_and_bijective():
    a = random_perm(2, seed=7)
    b = random_perm(2, seed=7)
    assert a == b
    big = random_perm(10, seed=7)
    assert sorted(big.one_based()) == list(range(1, 101))


def test_random_perm_fixed_point_statistics():
    # mean fixed-point count of a uniform permutation is 1
    rng_seeds = range(10_000)
    counts = [random_perm(10, seed=s).fixed_point_count() for s in rng_seeds]
    assert abs(np.mean(counts) - 1.0) < 0.1


def test_symmetric_perm_is_involution():
    for seed in range(100):
        for m_side in range(2, 9):
            p = random_symmetric_perm(m_side, seed=seed)
            assert p.is_involution()
            comp = p.targets[p.targets]
            assert np.array_equal(comp, np.arange(p.size))


def test_symmetric_perm_m1_is_identity():
    p = random_symmetric_perm(1, seed=0)
    assert p.is_identity()


def test_symmetric_perm_partition_identity():
    p = random_symmetric_perm(6, seed=3)
    fixed = p.fixed_point_count()
    transpositions = (p.size - fixed) // 2
    assert 2 * transpositions + fixed == p.size


def test_separable_identity_factors():
    assert separable_perm([1, 2, 3], [1, 2, 3]) == identity_perm(3)


def test_separable_matches_grid_action():
    for m_side in range(2, 7):
        rng = np.random.default_rng(m_side)
        s1 = (rng.permutation(m_side) + 1).tolist()
        s2 = (rng.permutation(m_side) + 1).tolist()
        p = separable_perm(s1, s2)
        for m in range(1, m_side + 1):
            for n in range(1, m_side + 1):
                flat = (m - 1) * m_side + (n - 1)
                expect = (s1[m - 1] - 1) * m_side + (s2[n - 1] - 1)
                assert p.targets[flat] == expect


def test_separable_reversal_is_grid_reversal():
    p = separable_perm([3, 2, 1], [3, 2, 1])
    m_side = 3
    for m in range(1, 4):
        for n in range(1, 4):
            flat = (m - 1) * m_side + (n - 1)
            expect = (m_side + 1 - m - 1) * m_side + (m_side + 1 - n - 1)
            assert p.targets[flat] == expect


def test_separable_appendix_style_factor():
    s = [4, 3, 1, 2]
    d = diagnostics(s)
    assert d.diffs == (3, 1, -2, -2)
    assert 2 * d.diffs[1] - d.diffs[0] - d.diffs[2] == 1


def test_diagnostics_reversal():
    d = diagnostics((3, 2, 1))
    assert 2 * d.diffs[1] - d.diffs[0] - d.diffs[2] == 0
    assert sum(d.diffs) == 0


def test_diffs_always_sum_to_zero():
    for seed in range(50):
        p = random_perm(4, seed=seed)
        assert sum(diagnostics(p).diffs) == 0


def test_separable_size_mismatch():
    with pytest.raises(InvalidArgumentError):
        separable_perm([1, 2, 3], [2, 1])
    with pytest.raises(InvalidArgumentError):
        separable_perm([1, 1, 3], [1, 2, 3])


def test_json_round_trip():
    for p in (identity_perm(3), random_perm(4, seed=1), random_symmetric_perm(5, seed=2),
              separable_perm([4, 3, 1, 2], [2, 1, 3, 4])):
        q = Permutation.from_json(p.to_json())
        assert q == p
        assert q.kind == p.kind


def test_kind_tags():
    assert random_symmetric_perm(4, seed=0).kind == "symmetric"
    assert separable_perm([2, 1, 3], [1, 2, 3]).kind == "separable"
    assert perm_from_targets([2, 3, 4, 1]).kind == "general"


def test_explicit_perm_validation():
    with pytest.raises(InvalidArgumentError):
        perm_from_targets([1, 1, 3, 4])
