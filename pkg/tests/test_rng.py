import numpy as np

from improper_pp.rng import make_rng, stream, streams


class TestStreams:
    def test_stream_matches_spawn(self):
        child = np.random.SeedSequence(7).spawn(4)[3]
        expected = np.random.Generator(np.random.PCG64(child)).random(5)
        np.testing.assert_array_equal(stream(7, 3).random(5), expected)

    def test_streams_independent_of_creation_order(self):
        a = [g.random() for g in streams(3, 4)]
        b = [stream(3, i).random() for i in reversed(range(4))][::-1]
        assert a == b

    def test_distinct_indices_differ(self):
        assert stream(1, 0).random() != stream(1, 1).random()

    def test_make_rng_passthrough_and_determinism(self):
        g = np.random.default_rng(0)
        assert make_rng(g) is g
        assert make_rng(5).random() == make_rng(5).random()
