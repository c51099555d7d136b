import numpy as np

from slemma.rng import SplitMix64, derive_seed


def test_batch_matches_scalar_bitwise():
    a = SplitMix64(42)
    b = SplitMix64(42)
    batch = a.uniforms(1000)
    scalars = [b.uniform() for _ in range(1000)]
    assert batch.tolist() == scalars


def test_stream_continues_after_batch():
    a = SplitMix64(7)
    a.uniforms(10)
    b = SplitMix64(7)
    for _ in range(10):
        b.uniform()
    assert a.uniform() == b.uniform()


def test_uniform_range_and_mean():
    rng = SplitMix64(1)
    u = rng.uniforms(20000, -3.0, 3.0)
    assert np.all(u >= -3.0) and np.all(u < 3.0)
    assert abs(np.mean(u)) < 0.05


def test_uniform_box_shape():
    X = SplitMix64(5).uniform_box(2.0, 3, 11)
    assert X.shape == (11, 3)
    assert np.max(np.abs(X)) <= 2.0


def test_determinism_across_instances():
    assert SplitMix64(123).next_u64() == SplitMix64(123).next_u64()
    assert SplitMix64(123).next_u64() != SplitMix64(124).next_u64()


def test_derive_seed_streams_differ():
    seeds = {derive_seed(99, k) for k in range(50)}
    assert len(seeds) == 50
    assert derive_seed(99, 3) == derive_seed(99, 3)


def test_randint_bounds():
    rng = SplitMix64(11)
    draws = [rng.randint(7) for _ in range(500)]
    assert set(draws) <= set(range(7))
    assert len(set(draws)) == 7
