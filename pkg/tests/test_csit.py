import numpy as np
import pytest

from csit_sharing.channel import AntennaConfig, Topology, gen_channel
from csit_sharing.csit import (
    CsitAllocation,
    DistributedCsit,
    Precision,
    ScalingAllocation,
    allocation_size,
    build_distributed_csit,
    quantize_vector,
    scaling_to_variance,
)
from csit_sharing.errors import ConfigError
from csit_sharing.utils import make_rng


def test_precision_text_forms():
    assert str(Precision.of_bits(5)) == "bits:5"
    assert Precision.parse("bits:5") == Precision.of_bits(5)
    assert Precision.parse("EXACT") == Precision.exact()
    assert Precision.parse("none") == Precision.none()
    with pytest.raises(ConfigError):
        Precision.parse("approximate")


def test_zero_bits_carry_no_information():
    assert not Precision.of_bits(0).is_known
    assert not Precision.none().is_known
    assert Precision.of_bits(1).is_known
    assert Precision.exact().is_known


def test_allocation_must_cover_every_pair():
    with pytest.raises(ConfigError):
        CsitAllocation(K=2, entries={(0, 0): Precision.exact()})


def test_complete_allocation_size(symmetric3):
    size = allocation_size(CsitAllocation.complete(symmetric3))
    assert size.scalars == 108
    assert size.bits == 0


def test_empty_allocation_size(symmetric3):
    assert allocation_size(CsitAllocation.empty(3, symmetric3)).scalars == 0


def test_column_restriction_counts_only_listed_blocks():
    alloc = CsitAllocation.build(2, {(0, 0): Precision.of_bits(6)}, columns={(0, 0): [0]})
    size = allocation_size(alloc)
    assert size.scalars == 1
    assert size.bits == 6
    assert alloc.known_columns(0, 0) == (0,)
    assert alloc.known_columns(1, 0) == ()


def test_allocation_text_table():
    alloc = CsitAllocation.build(
        2, {(0, 0): Precision.exact(), (1, 0): Precision.of_bits(3)}, columns={(1, 0): [0, 1]}
    )
    text = alloc.to_text()
    assert text.splitlines()[0] == "# tx row precision columns"
    assert "1 2 bits:3 1,2" in text
    parsed = CsitAllocation.from_text(text)
    assert parsed.entries == alloc.entries
    assert parsed.known_columns(1, 0) == (0, 1)


def test_union_rejects_overlap():
    left = CsitAllocation.build(2, {(0, 0): Precision.exact()})
    right = CsitAllocation.build(2, {(1, 1): Precision.exact()})
    merged = left.union(right)
    assert merged.precision(0, 0).is_known and merged.precision(1, 1).is_known
    with pytest.raises(ConfigError):
        left.union(left)



def test_union_size_is_additive(heterogeneous3):
    left = CsitAllocation.build(
        3,
        {(0, 0): Precision.exact(), (1, 0): Precision.of_bits(4)},
        columns={(1, 0): [0, 1]},
        config=heterogeneous3,
    )
    right = CsitAllocation.build(
        3, {(2, 1): Precision.of_bits(6), (0, 2): Precision.exact()}, config=heterogeneous3
    )
    merged = allocation_size(left.union(right))
    assert merged.scalars == allocation_size(left).scalars + allocation_size(right).scalars == 45
    assert merged.bits == allocation_size(left).bits + allocation_size(right).bits == 10


def test_scaling_allocation_range():
    with pytest.raises(ConfigError):
        ScalingAllocation.uniform(2, 1.5)
    scaling = ScalingAllocation.two_user(a11=1.0, a21=0.0, a12=0.5, a22=0.7)
    assert scaling.alpha[(1, 0)] == 0.0
    assert scaling.alpha[(0, 1)] == 0.5


@pytest.mark.parametrize("kind", ["rvq", "surrogate"])
def test_zero_bits_give_unknown_marker(kind):
    assert quantize_vector(np.ones(3, dtype=complex), 0, kind, seed=1) is None


def test_rvq_returns_matching_codeword_exactly():
    h = np.array([1.0 + 1.0j, 0.0, -2.0 + 0.5j])
    support = h[h != 0]
    codebook = np.vstack([np.array([1.0, 1.0j]) / np.sqrt(2.0), support / np.linalg.norm(support)])
    estimate = quantize_vector(h, 1, "rvq", codebook=codebook)
    np.testing.assert_allclose(estimate, h, atol=1e-12)


def test_rvq_bit_limit():
    with pytest.raises(ConfigError):
        quantize_vector(np.ones(2, dtype=complex), 17, "rvq", seed=0)


def test_surrogate_error_variance_follows_bit_law():
    h = np.array([1.0, 0.0, 0.5j, -0.3], dtype=complex)
    errors = []
    for seed in range(4000):
        estimate = quantize_vector(h, 30, "surrogate", seed=seed)
        errors.append(estimate[h != 0] - h[h != 0])
        assert estimate[1] == 0
    mse = np.mean(np.abs(np.concatenate(errors)) ** 2)
    assert 2.0**-10 * 0.8 <= mse <= 2.0**-10 * 1.25



def test_surrogate_error_never_grows_with_more_bits():
    h = np.array([0.8 - 0.1j, 0.0, 1.2j], dtype=complex)
    mse = []
    for bits in (1, 2, 3, 4, 6, 8, 12, 16):
        errors = np.array([quantize_vector(h, bits, "surrogate", seed=seed) - h for seed in range(10_000)])
        mse.append(float(np.mean(np.abs(errors[:, h != 0]) ** 2)))
    assert all(finer <= coarser for coarser, finer in zip(mse, mse[1:]))


@pytest.mark.parametrize("alpha, P, expected", [(0.0, 50.0, 1.0), (1.0, 1e4, 1e-4), (0.5, 100.0, 0.1)])
def test_scaling_to_variance(alpha, P, expected):
    assert scaling_to_variance(alpha, P) == pytest.approx(expected)


def test_exact_allocation_copies_channel(symmetric3):
    H = gen_channel(symmetric3, Topology(), 100.0, 3)
    csit = build_distributed_csit(H, CsitAllocation.complete(symmetric3), seed=1)
    for j in range(3):
        np.testing.assert_array_equal(csit.estimate(j), H.matrix)
        assert csit.block_known(j, 2, 1)


def test_missing_row_is_flagged_unknown():
    config = AntennaConfig.homogeneous(3)
    H = gen_channel(config, Topology(), 100.0, 3)
    entries = {(i, j): Precision.exact() for i in range(3) for j in range(3)}
    entries[(2, 0)] = Precision.none()
    csit = build_distributed_csit(H, CsitAllocation.build(3, entries), seed=1)
    assert not csit.row_known(0, 2)
    assert np.all(csit.estimate(0)[2] == 0)
    assert csit.row_known(1, 2)


def test_quantized_rows_differ_between_transmitters():
    config = AntennaConfig.homogeneous(2)
    H = gen_channel(config, Topology(), 100.0, 5)
    csit = build_distributed_csit(H, CsitAllocation.build(2, Precision.of_bits(8)), seed=11)
    assert not np.array_equal(csit.estimate(0)[1], csit.estimate(1)[1])


def test_scaling_estimates_keep_structural_zeros():
    config = AntennaConfig.homogeneous(3)
    H = gen_channel(config, Topology.wyner(0.5), 100.0, 2)
    csit = build_distributed_csit(H, ScalingAllocation.uniform(3, 0.5), seed=4)
    assert csit.estimate(1)[0, 2] == 0
    assert csit.estimate(1)[0, 0] != H.matrix[0, 0]


def test_allocation_size_mismatch_rejected():
    H = gen_channel(AntennaConfig.homogeneous(2), Topology(), 10.0, 0)
    with pytest.raises(ConfigError):
        build_distributed_csit(H, CsitAllocation.complete(AntennaConfig.homogeneous(3)))


def test_exact_distributed_csit():
    H = gen_channel(AntennaConfig.homogeneous(2, 2), Topology(), 10.0, 0)
    csit = DistributedCsit.exact(H)
    np.testing.assert_array_equal(csit.block(1, 0, 1), H.block(0, 1))


def test_generator_seed_gives_reproducible_estimates():
    H = gen_channel(AntennaConfig.homogeneous(3), Topology(), 100.0, 6)
    alloc = CsitAllocation.build(3, Precision.of_bits(6))
    first = build_distributed_csit(H, alloc, seed=np.random.default_rng(21))
    second = build_distributed_csit(H, alloc, seed=np.random.default_rng(21))
    for j in range(3):
        np.testing.assert_array_equal(first.estimate(j), second.estimate(j))
    assert not np.array_equal(first.estimate(0), first.estimate(1))


def test_keyed_stream_from_generator_rejected():
    with pytest.raises(ConfigError):
        make_rng(np.random.default_rng(0), 1, 2)
