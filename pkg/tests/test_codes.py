"""Code tables: sampling, decoding, pruning, and the diagnostics."""

import math
import random
from collections import Counter

import numpy as np
import pytest

from cel import codes, forbidden
from cel.codes import CodeTable, PruningError
from cel.core import Codeword, ErasurePattern, ReceivedWord, erase


def small_table(n=10, k=3, d=2, seed=7) -> CodeTable:
    return codes.sample_systematic_code(n, k, d, seed)


def explicit_table(suffixes: dict[tuple[int, int], str], n: int, k: int, d: int) -> CodeTable:
    """Systematic table with hand-picked suffixes, keyed by (u, s)."""
    words = []
    for u in range(1 << k):
        for s in range(1 << d):
            words.append(format(u, f"0{k}b") + suffixes[(u, s)])
    return CodeTable.from_codewords(words, k=k, d=d)


class TestSampler:
    def test_shape_and_systematic(self):
        table = codes.sample_systematic_code(8, 3, 2, seed=1)
        assert table.entry_count == 32
        assert table.systematic
        for u, s, word in table.entries():
            assert word.prefix_bits(3) == u

    def test_deterministic_in_seed(self):
        a = codes.sample_systematic_code(12, 4, 2, seed=9)
        b = codes.sample_systematic_code(12, 4, 2, seed=9)
        assert np.array_equal(a.words, b.words)

    def test_seeds_differ(self):
        a = codes.sample_systematic_code(12, 4, 2, seed=1)
        b = codes.sample_systematic_code(12, 4, 2, seed=2)
        assert not np.array_equal(a.words, b.words)

    def test_suffix_bit_frequency(self):
        table = codes.sample_systematic_code(16, 4, 3, seed=3)
        suffix_bits = 12 * table.entry_count
        ones = sum(int(w).bit_count() - (int(w) >> 12).bit_count() for w in table.words)
        sigma = 0.5 / math.sqrt(suffix_bits)
        assert abs(ones / suffix_bits - 0.5) <= 3 * sigma

    def test_guards(self):
        with pytest.raises(ValueError):
            codes.sample_systematic_code(30, 12, 12, seed=0)  # k + d over guard
        with pytest.raises(ValueError):
            codes.sample_systematic_code(4, 4, 0, seed=0)  # no suffix room


class TestEncode:
    def test_prefix_is_message(self):
        table = small_table()
        for u in range(8):
            assert table.encode(u, 1).prefix_bits(3) == u

    def test_repeat_identical(self):
        table = small_table()
        assert table.encode(5, 2) == table.encode(5, 2)

    def test_distinct_messages_distinct_words(self):
        table = small_table()
        words = {table.encode(u, 3).bits for u in range(8)}
        assert len(words) == 8

    def test_missing_entry(self):
        table = small_table()
        with pytest.raises(ValueError):
            table.encode(8, 0)
        with pytest.raises(ValueError):
            table.encode(0, 4)

    def test_accepts_message_objects(self):
        from cel.core import Message

        table = small_table()
        assert table.encode(Message.from_string("101"), 2) == table.encode(5, 2)
        with pytest.raises(ValueError):
            table.encode(Message.from_string("1010"), 0)  # wrong message length

    def test_injectivity_enforced(self):
        with pytest.raises(ValueError):
            CodeTable.from_codewords(["0101", "0101"], k=1, d=0)


class TestConsistentSet:
    def test_exact_word_singleton(self):
        table = small_table()
        x = table.encode(3, 1)
        got = codes.consistent_set(table, ReceivedWord(table.n, x.bits, 0))
        assert got == [(3, 1, x)]

    def test_all_erased_gives_everything(self):
        table = small_table()
        y = ReceivedWord(table.n, 0, (1 << table.n) - 1)
        assert len(codes.consistent_set(table, y)) == table.entry_count

    def test_transmitted_entry_always_present(self):
        table = small_table()
        rng = random.Random(0)
        for _ in range(50):
            u, s = rng.randrange(8), rng.randrange(4)
            x = table.encode(u, s)
            pat = ErasurePattern(table.n, rng.sample(range(table.n), 3))
            got = codes.consistent_set(table, erase(x, pat))
            assert any(e[:2] == (u, s) for e in got)


class TestDecode:
    def test_unique(self):
        table = small_table()
        x = table.encode(6, 0)
        res = codes.decode(table, ReceivedWord(table.n, x.bits, 0))
        assert res == codes.DecodeResult(6, 0, 1, 1, "unique")

    def test_round_trip_every_entry(self):
        table = small_table()
        for u, s, word in table.entries():
            res = codes.decode(table, erase(word, ErasurePattern(table.n, ())))
            assert (res.message, res.coin, res.outcome) == (u, s, "unique")

    def test_uniform_tie_break_is_fair(self):
        table = CodeTable.from_codewords(["000000", "000111"], k=1, d=0)
        y = ReceivedWord.from_string("000^^^")
        hits = Counter(codes.decode(table, y, seed=i).message for i in range(10_000))
        assert codes.decode(table, y, seed=0).outcome == "ambiguous_tiebroken"
        freq = hits[0] / 10_000
        assert abs(freq - 0.5) <= 3 * math.sqrt(0.25 / 10_000)

    def test_lexicographic_tie_break(self):
        table = CodeTable.from_codewords(["000000", "000111"], k=1, d=0)
        y = ReceivedWord.from_string("000^^^")
        for seed in range(5):
            assert codes.decode(table, y, tie_break="lexicographic", seed=seed).message == 0

    def test_no_candidate(self):
        table = CodeTable.from_codewords(["000000", "000111"], k=1, d=0)
        res = codes.decode(table, ReceivedWord.from_string("111111"))
        assert res.outcome == "no_candidate"
        assert res.message is None

    def test_same_message_coin_ambiguity(self):
        # both consistent entries share message 0: message decided, coin tie-broken
        suffixes = {(0, 0): "0000", (0, 1): "0011", (1, 0): "1111", (1, 1): "1100"}
        table = explicit_table(suffixes, n=5, k=1, d=1)
        res = codes.decode(table, ReceivedWord.from_string("000^^"), seed=3)
        assert res.outcome == "ambiguous_tiebroken"
        assert res.message == 0
        assert res.distinct_message_count == 1
        assert res.consistent_count == 2
        assert res.coin in (0, 1)

    def test_unique_iff_single_consistent(self):
        table = small_table()
        rng = random.Random(5)
        for _ in range(100):
            x = table.encode(rng.randrange(8), rng.randrange(4))
            pat = ErasurePattern(table.n, rng.sample(range(table.n), rng.randrange(6)))
            res = codes.decode(table, erase(x, pat), seed=1)
            assert (res.outcome == "unique") == (
                res.consistent_count == 1 and res.distinct_message_count == 1
            )

    def test_bad_policy(self):
        table = small_table()
        with pytest.raises(ValueError):
            codes.decode(table, ReceivedWord(table.n, 0, 0), tie_break="nope")


class TestPrune:
    def test_clean_table_keeps_everything(self):
        suffixes = {
            (0, 0): "000000",
            (0, 1): "111111",
            (1, 0): "000111",
            (1, 1): "111000",
        }
        table = explicit_table(suffixes, n=7, k=1, d=1)
        pruned = codes.prune(table, budget=2)
        assert pruned.kept_messages == (0, 1)
        # d = 1 keeps exactly 2^0 = 1 coin per message, the lexicographic first
        assert pruned.kept_coins == {0: (0,), 1: (0,)}

    def test_duplicate_pair_removes_one_coin(self):
        suffixes = {
            (0, 0): "000000",
            (0, 1): "000000",  # duplicate pair under u=0, distance 0
            (1, 0): "001111",
            (1, 1): "110000",
            (2, 0): "101010",
            (2, 1): "010101",
            (3, 0): "100110",
            (3, 1): "011001",
        }
        table = explicit_table(suffixes, n=8, k=2, d=1)
        pruned = codes.prune(table, budget=2)
        assert 0 in pruned.kept_messages
        assert len(pruned.kept_coins[0]) == 1

    def test_postcondition_distances(self):
        table = codes.sample_systematic_code(14, 3, 3, seed=21)
        pruned = codes.prune(table, budget=2)
        assert codes.min_same_prefix_distance(pruned) > 2
        for u in pruned.kept_messages:
            assert len(pruned.kept_coins[u]) == 4

    def test_failure_advises_resample(self):
        # budget as large as the suffix length makes every coin pair violate
        table = codes.sample_systematic_code(8, 2, 2, seed=1)
        with pytest.raises(PruningError, match="resample"):
            codes.prune(table, budget=6)

    def test_requires_coin_bits(self):
        table = codes.sample_systematic_code(8, 2, 0, seed=1)
        with pytest.raises(ValueError):
            codes.prune(table, budget=1)


class TestMinSamePrefixDistance:
    def test_duplicate_suffix_gives_zero(self):
        suffixes = {(0, 0): "0000", (0, 1): "0000", (1, 0): "1111", (1, 1): "0011"}
        table = explicit_table(suffixes, n=5, k=1, d=1)
        assert codes.min_same_prefix_distance(table) == 0

    def test_no_pairs_is_infinite(self):
        table = codes.sample_systematic_code(8, 3, 0, seed=2)
        assert codes.min_same_prefix_distance(table) == math.inf

    def test_matches_brute_force(self):
        table = codes.sample_systematic_code(16, 4, 3, seed=13)
        best = math.inf
        for u in range(16):
            for s1 in range(8):
                for s2 in range(s1 + 1, 8):
                    a = table.encode(u, s1).suffix_bits(4)
                    b = table.encode(u, s2).suffix_bits(4)
                    best = min(best, (a ^ b).bit_count())
        assert codes.min_same_prefix_distance(table) == best


class TestPrunedTypeII:
    def test_immunity_exhaustive(self):
        import itertools

        table = codes.sample_systematic_code(12, 3, 2, seed=4)
        budget = 2
        pruned = codes.prune(table, budget)
        n, k = pruned.n, pruned.k
        for u in pruned.kept_messages:
            for t in range(pruned.coin_count):
                x = pruned.encode(u, t)
                own_coin = pruned.coin_of(u, t)
                for size in range(0, budget + 1):
                    for positions in itertools.combinations(range(k, n), size):
                        y = erase(x, ErasurePattern(n, positions))
                        for idx in pruned.consistent_indices(y):
                            cu, cs = pruned.pair_of(int(idx))
                            assert not (cu == u and cs != own_coin)


class TestPrefixEntropy:
    def test_zero_prefix_gives_k(self):
        table = small_table(n=10, k=3, d=2)
        assert codes.prefix_entropy(table, 0, None) == pytest.approx(3.0)

    def test_full_word_deterministic_code(self):
        table = codes.sample_systematic_code(8, 2, 0, seed=6)
        word = table.encode(1, 0)
        assert codes.prefix_entropy(table, 8, word) == pytest.approx(0.0)

    def test_two_messages_sharing_prefix(self):
        table = CodeTable.from_codewords(["000000", "000111"], k=1, d=0)
        assert codes.prefix_entropy(table, 3, "000") == pytest.approx(1.0)

    def test_unmatched_prefix_raises(self):
        table = CodeTable.from_codewords(["000000", "000111"], k=1, d=0)
        with pytest.raises(ValueError):
            codes.prefix_entropy(table, 3, "111")

    def test_information_processing_bounds(self):
        table = codes.sample_systematic_code(12, 4, 2, seed=8)
        for ell in (1, 2, 3, 6):
            prefixes = np.unique(table.words >> np.uint64(12 - ell))
            total = table.entry_count
            expectation = 0.0
            for bits in prefixes:
                matches = table.prefix_match_indices(ell, int(bits))
                expectation += (matches.size / total) * codes.prefix_entropy(
                    table, ell, Codeword(ell, int(bits))
                )
            assert expectation <= 4.0 + 1e-9
            assert 4.0 - expectation <= ell + 1e-9

    def test_a_eps_prefixes(self):
        table = codes.sample_systematic_code(12, 4, 2, seed=8)
        # systematic code, ell = 2: entropy given any 2-bit prefix is exactly 2
        found = codes.a_eps_prefixes(table, 2, epsilon=0.5)
        assert set(found) == {0, 1, 2, 3}
        for h in found.values():
            assert h == pytest.approx(2.0)
        assert codes.a_eps_prefixes(table, 2, epsilon=0.8) == {}


class TestGoodness:
    def test_far_cross_distance_is_good(self):
        suffixes = {(0, 0): "000000", (1, 0): "111111"}
        table = explicit_table(suffixes, n=7, k=1, d=0)
        y1 = ReceivedWord.from_string("0")
        assert codes.type1_error_probability(table, 0, y1, budget=2) == 0.0
        assert codes.goodness_check(table, 0, y1, budget=2, eta_tilde=0.5)

    def test_unreachable_other_prefix(self):
        table = small_table(n=10, k=3, d=2)
        y1 = ReceivedWord(3, 5, 0)  # prefix of u=5 with no erasures
        assert codes.type1_error_probability(table, 5, y1, budget=3) == 0.0

    def test_matches_exhaustive_oracle(self):
        table = codes.sample_systematic_code(10, 3, 2, seed=17)
        budget = 2
        rng = random.Random(0)
        for _ in range(6):
            u = rng.randrange(8)
            q = rng.randrange(0, 3)
            mask = 0
            for pos in rng.sample(range(3), q):
                mask |= 1 << (2 - pos)
            y1 = ReceivedWord(3, u & ~mask, mask)
            # oracle: literal double loop over (s; u', s') with ball_contains
            hits = 0
            for s in range(4):
                spec = forbidden.BallSpec(
                    10, 3, budget, q, y1, Codeword(7, table.encode(u, s).suffix_bits(3))
                )
                found = False
                for u2 in range(8):
                    if u2 == u:
                        continue
                    for s2 in range(4):
                        if forbidden.ball_contains(spec, table.encode(u2, s2)):
                            found = True
                hits += found
            oracle = hits / 4
            assert codes.type1_error_probability(table, u, y1, budget) == oracle

    def test_invalid_y1(self):
        table = small_table(n=10, k=3, d=2)
        with pytest.raises(ValueError):
            codes.type1_error_probability(table, 5, ReceivedWord(3, 2, 0), budget=2)


class TestDiagnostics:
    def test_plotkin_bound_on_same_prefix_samples(self):
        table = codes.sample_systematic_code(16, 4, 3, seed=19)
        rng = random.Random(1)
        for u in range(0, 16, 3):
            sample = [table.encode(u, rng.randrange(8)) for _ in range(6)]
            davg = codes.average_pairwise_distance(sample)
            assert davg <= codes.plotkin_average_bound(6, 16)

    def test_plotkin_bound_on_random_words(self):
        rng = random.Random(2)
        words = [Codeword(12, rng.getrandbits(12)) for _ in range(10)]
        assert codes.average_pairwise_distance(words) <= codes.plotkin_average_bound(10, 12)

    def test_multi_sample_device(self):
        # m = ceil(9 / epsilon) same-prefix draws: suffix-restricted average
        # distance obeys Plotkin and distinctness beats the entropy bound
        epsilon = 0.5
        m = math.ceil(9 / epsilon)
        table = codes.sample_systematic_code(12, 8, 0, seed=23)
        ell = 2
        prefix_bits = 1
        matches = table.prefix_match_indices(ell, prefix_bits)
        lam = codes.prefix_entropy(table, ell, Codeword(ell, prefix_bits))
        assert lam == pytest.approx(6.0)
        rng = random.Random(5)
        distinct_runs = 0
        trials = 400
        for _ in range(trials):
            picks = [int(matches[rng.randrange(matches.size)]) for _ in range(m)]
            words = [Codeword(12, table.word_bits_by_index(i)) for i in picks]
            davg = codes.average_pairwise_distance(words)
            assert davg <= codes.plotkin_average_bound(m, 12 - ell)
            messages = {i >> table.d for i in picks} if table.d else set(picks)
            distinct_runs += len(messages) == m
        bound = codes.distinctness_probability_bound(lam, m, 8.0)
        sigma = math.sqrt(0.25 / trials)
        assert distinct_runs / trials >= bound - 3 * sigma

    def test_distinctness_bound_formula(self):
        assert codes.distinctness_probability_bound(6.0, 4, 8.0) == pytest.approx((3 / 8) ** 3)
        assert codes.distinctness_probability_bound(1.0, 4, 8.0) == 0.0
        assert codes.distinctness_probability_bound(5.0, 1, 8.0) == 1.0


class TestSerialization:
    def test_sampled_table_round_trip(self):
        table = codes.sample_systematic_code(12, 4, 2, seed=31)
        obj = table.to_json_obj()
        assert obj == {"n": 12, "k": 4, "d": 2, "seed": 31}
        again = CodeTable.from_json_obj(obj)
        assert np.array_equal(table.words, again.words)

    def test_explicit_table_round_trip(self):
        table = CodeTable.from_codewords(["000000", "000111"], k=1, d=0)
        again = CodeTable.from_json_obj(table.to_json_obj())
        assert np.array_equal(table.words, again.words)

    def test_pruned_round_trip(self):
        table = codes.sample_systematic_code(14, 3, 3, seed=21)
        pruned = codes.prune(table, budget=2)
        obj = pruned.to_json_obj()
        assert isinstance(obj["kept_messages"], str)
        again = codes.PrunedCode.from_json_obj(obj)
        assert again.kept_messages == pruned.kept_messages
        assert again.kept_coins == pruned.kept_coins
        assert np.array_equal(again.base.words, pruned.base.words)
