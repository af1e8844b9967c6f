import statistics
from fractions import Fraction as F

import pytest

from bellcheck import _pykernels, fixtures
from bellcheck.sampler import (
    UndefinedConditional,
    analytic_event,
    available_backends,
    conditional_frequencies,
    sample,
)

LL = ("look", "look")
MASK = (1 << 64) - 1

# Reference outputs of SplitMix64 seeded with 1234567 (the published test vector).
SPLITMIX_1234567 = [
    6457827717110365317,
    3203168211198807973,
    9817491932198370423,
    4593380528125082431,
    16408922859458223821,
]


def mix_oracle(seed, k):
    z = (seed + (k + 1) * 0x9E3779B97F4A7C15) & MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def inverse_cdf_oracle(weights, u):
    acc = F(0)
    for k, w in enumerate(weights):
        acc += w
        if u < acc:
            return k
    return len(weights) - 1


def sample_oracle(model, profile, n, seed):
    """Sample-by-sample reimplementation with exact thresholds."""
    lams = model.hidden
    prior = [model.prior_of(profile)[lam] for lam in lams]
    tuples = model.tuples(profile)
    counts = [0] * len(tuples)
    for i in range(n):
        u1 = F(mix_oracle(seed, 2 * i) >> 11, 2**53)
        u2 = F(mix_oracle(seed, 2 * i + 1) >> 11, 2**53)
        lam = lams[inverse_cdf_oracle(prior, u1)]
        row = model.row(lam, profile)
        counts[inverse_cdf_oracle([row.get(t, 0) for t in tuples], u2)] += 1
    return counts


def test_splitmix_reference_vectors():
    assert _pykernels.splitmix64(1234567, 5) == SPLITMIX_1234567
    assert [mix_oracle(1234567, k) for k in range(5)] == SPLITMIX_1234567


@pytest.mark.skipif("cython" not in available_backends(), reason="compiled kernel not built")
def test_compiled_splitmix_reference_vectors():
    from bellcheck import _ckernels
    assert list(_ckernels.splitmix64(1234567, 5)) == SPLITMIX_1234567


@pytest.mark.parametrize("name, profile", [("carddeck", LL), ("product", ("x1", "y0"))])
def test_counts_match_sample_by_sample_oracle(name, profile):
    m = fixtures.get(name)
    for backend in available_backends():
        s = sample(m, profile, 3000, 99, backend=backend)
        assert list(s.counts) == sample_oracle(m, profile, 3000, 99)


def test_reproducible():
    m = fixtures.carddeck()
    assert sample(m, LL, 5000, 7).counts == sample(m, LL, 5000, 7).counts
    assert sample(m, LL, 5000, 7).counts != sample(m, LL, 5000, 8).counts


def test_backends_agree():
    m = fixtures.product()
    runs = [sample(m, ("x0", "y1"), 200_000, 2**63 + 5, backend=b).counts for b in available_backends()]
    assert all(r == runs[0] for r in runs)


@pytest.mark.parametrize("chunks", [2, 3, 7])
def test_chunking_does_not_change_counts(chunks):
    m = fixtures.carddeck()
    assert sample(m, LL, 10_001, 3, chunks=chunks).counts == sample(m, LL, 10_001, 3).counts


def test_single_sample():
    s = sample(fixtures.carddeck(), LL, 1, 0)
    assert sum(s.counts) == 1


@pytest.mark.parametrize("kwargs", [{"n": 0}, {"n": 10, "seed": -1}, {"n": 10, "seed": 2**64},
                                    {"n": 10, "chunks": 0}, {"n": 10, "backend": "fortran"}])
def test_bad_arguments(kwargs):
    args = {"seed": 1, **kwargs}
    with pytest.raises(ValueError):
        sample(fixtures.carddeck(), LL, **args)


def test_deterministic_fixture_has_zero_tv():
    s = sample(fixtures.deterministic(), ("a0", "b1"), 1000, 5)
    assert s.tv_distance == 0
    assert s.counts[s.tuples.index(("+", "-"))] == 1000


def test_conditioning_on_one_card():
    s = sample(fixtures.carddeck(), LL, 20_000, 11)
    freq = conditional_frequencies(s, {"L": "KR"})
    assert freq[("QB",)] == 1.0
    assert set(freq) == {("KR",), ("KB",), ("QR",), ("QB",)}


def test_conditioning_on_unseen_event():
    s = sample(fixtures.carddeck(), LL, 1000, 11)
    with pytest.raises(UndefinedConditional):
        conditional_frequencies(s, {"L": "KR", "R": "KB"})


def test_hidden_counts_sum_to_counts():
    s = sample(fixtures.carddeck(), LL, 10_000, 4)
    assert [sum(c) for c in zip(*s.hidden_counts.values())] == list(s.counts)


def test_fixed_hidden_value_event_frequency():
    m = fixtures.carddeck()
    n = 100_000
    s = sample(m, LL, n, 21, hidden="D_1")
    q = {"L": ("KR", "KB"), "R": ("KB", "QB")}
    p = analytic_event(m, LL, q, hidden="D_1")
    assert p == F(3, 20)
    se = (float(p) * (1 - float(p)) / n) ** 0.5
    assert abs(s.event_frequency(q) - float(p)) < 5 * se


def test_tv_shrinks_with_n():
    m = fixtures.carddeck()
    small = statistics.median(sample(m, LL, 1000, seed).tv_distance for seed in range(10))
    large = statistics.median(sample(m, LL, 100_000, seed).tv_distance for seed in range(10))
    assert large < small / 4
