"""Monte Carlo harness: seeding, estimators, and report determinism."""

import math

import pytest

from cel import sim
from cel.sim import CodeSpec, ExperimentConfig, mix64, wilson_interval

TWO_WORD_SPEC = CodeSpec(n=6, k=1, d=0, codewords=("000000", "000111"))


def two_word_wait_push(trials=1000, master_seed=101) -> ExperimentConfig:
    return ExperimentConfig(
        code=TWO_WORD_SPEC,
        strategy={"strategy": "wait_push", "wait_length": 3},
        budget=3,
        trials=trials,
        criterion="avg",
        master_seed=master_seed,
    )


class TestSeeding:
    def test_mix64_deterministic(self):
        assert mix64(1, 2, 3) == mix64(1, 2, 3)
        assert mix64(1, 2, 3) != mix64(1, 2, 4)

    def test_trial_seeds_distinct(self):
        master, config = 12345, 0xDEADBEEF
        seeds = {mix64(master, config, i) for i in range(100_000)}
        assert len(seeds) == 100_000


class TestWilson:
    def test_contains_point_estimate(self):
        for errors, trials in [(0, 50), (1, 50), (25, 50), (50, 50), (3, 2000)]:
            lo, hi = wilson_interval(errors, trials)
            assert lo <= errors / trials <= hi
            assert 0.0 <= lo <= hi <= 1.0

    def test_zero_errors_has_positive_upper(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == 0.0
        assert hi > 0.0

    def test_validation(self):
        with pytest.raises(ValueError):
            wilson_interval(5, 0)
        with pytest.raises(ValueError):
            wilson_interval(5, 4)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            CodeSpec(n=6, k=1)  # neither seed nor codewords
        with pytest.raises(ValueError):
            CodeSpec(n=7, k=1, codewords=("000000",))  # wrong length
        with pytest.raises(ValueError):
            ExperimentConfig(TWO_WORD_SPEC, {"strategy": "uniform_random"}, 3, 0)
        with pytest.raises(ValueError):
            ExperimentConfig(TWO_WORD_SPEC, {"strategy": "uniform_random"}, 9, 10)
        with pytest.raises(ValueError):
            ExperimentConfig(
                TWO_WORD_SPEC, {"strategy": "uniform_random"}, 3, 10, criterion="median"
            )
        with pytest.raises(ValueError):
            ExperimentConfig(
                TWO_WORD_SPEC, {"strategy": "uniform_random"}, 3, 10, messages=2
            )  # subset needs criterion max

    def test_round_trip(self):
        config = two_word_wait_push()
        again = ExperimentConfig.from_dict(config.to_dict())
        assert again.to_dict() == config.to_dict()
        assert again.hash == config.hash

    def test_strict_defaults(self):
        avg = two_word_wait_push()
        assert not avg.effective_strict
        mx = ExperimentConfig(
            TWO_WORD_SPEC, {"strategy": "uniform_random"}, 2, 10, criterion="max"
        )
        assert mx.effective_strict

    def test_missing_master_seed(self):
        config = two_word_wait_push(master_seed=None)
        with pytest.raises(ValueError):
            sim.estimate_p_avg(config)


class TestEstimatePAvg:
    def test_zero_budget_is_exactly_zero(self):
        config = ExperimentConfig(
            code=CodeSpec(n=10, k=3, d=2, seed=7),
            strategy={"strategy": "uniform_random"},
            budget=0,
            trials=300,
            master_seed=1,
        )
        est = sim.estimate_p_avg(config)
        assert est.point_estimate == 0.0
        assert est.errors == 0

    def test_all_erase_channel(self):
        config = ExperimentConfig(
            code=CodeSpec(n=8, k=2, d=1, seed=3),
            strategy={"strategy": "uniform_random"},
            budget=8,
            trials=2000,
            master_seed=5,
        )
        est = sim.estimate_p_avg(config)
        floor = 1 - 2**-2
        sigma = math.sqrt(floor * (1 - floor) / 2000)
        assert est.point_estimate >= floor - 3 * sigma

    def test_two_codeword_wait_push(self):
        est = sim.estimate_p_avg(two_word_wait_push(trials=1000))
        assert est.point_estimate >= 0.2

    def test_wrong_criterion(self):
        config = ExperimentConfig(
            TWO_WORD_SPEC, {"strategy": "uniform_random"}, 2, 10, criterion="max"
        )
        with pytest.raises(ValueError):
            sim.estimate_p_avg(config)

    def test_wilson_coverage_over_master_seeds(self):
        # analytic error rate of the two-codeword wait-push trace is 1/4
        covered = 0
        for master in range(100):
            est = sim.estimate_p_avg(two_word_wait_push(trials=2000, master_seed=master))
            lo, hi = est.wilson
            covered += lo <= 0.25 <= hi
        assert covered >= 93

    def test_omniscient_monotone_in_budget(self):
        estimates = []
        for budget in range(0, 4):
            config = ExperimentConfig(
                code=CodeSpec(n=8, k=2, d=1, seed=9),
                strategy={"strategy": "omniscient"},
                budget=budget,
                trials=600,
                master_seed=77,
            )
            estimates.append(sim.estimate_p_avg(config).point_estimate)
        for earlier, later in zip(estimates, estimates[1:]):
            assert later >= earlier - 0.03


class TestEstimatePMax:
    def test_zero_budget(self):
        config = ExperimentConfig(
            code=CodeSpec(n=10, k=3, d=2, seed=7),
            strategy={"strategy": "uniform_random"},
            budget=0,
            trials=64,
            criterion="max",
            master_seed=2,
        )
        est = sim.estimate_p_max(config)
        assert est.point_estimate == 0.0
        assert est.per_message is not None
        assert len(est.per_message) == 8
        assert all(stats["errors"] == 0 for stats in est.per_message.values())

    def test_needs_one_trial_per_message(self):
        config = ExperimentConfig(
            code=CodeSpec(n=10, k=3, d=2, seed=7),
            strategy={"strategy": "uniform_random"},
            budget=1,
            trials=4,
            criterion="max",
            master_seed=2,
        )
        with pytest.raises(ValueError):
            sim.estimate_p_max(config)

    def test_message_subset(self):
        config = ExperimentConfig(
            code=CodeSpec(n=10, k=3, d=2, seed=7),
            strategy={"strategy": "uniform_random"},
            budget=1,
            trials=40,
            criterion="max",
            messages=(1, 5),
            master_seed=2,
        )
        est = sim.estimate_p_max(config)
        assert set(est.per_message) == {1, 5}
        assert all(stats["trials"] == 20 for stats in est.per_message.values())

    def test_bad_subsets(self):
        base = dict(
            code=CodeSpec(n=10, k=3, d=2, seed=7),
            strategy={"strategy": "uniform_random"},
            budget=1,
            trials=40,
            criterion="max",
            master_seed=2,
        )
        with pytest.raises(ValueError):
            sim.estimate_p_max(ExperimentConfig(**base, messages=(1, 1)))
        with pytest.raises(ValueError):
            sim.estimate_p_max(ExperimentConfig(**base, messages=(9,)))
        with pytest.raises(ValueError):
            sim.estimate_p_max(ExperimentConfig(**base, messages=100))

    def test_pruned_code_strict_type2_is_zero(self):
        config = ExperimentConfig(
            code=CodeSpec(n=14, k=3, d=3, seed=21, pruned=True),
            strategy={"strategy": "uniform_random"},
            budget=2,
            trials=400,
            criterion="max",
            master_seed=11,
        )
        est = sim.estimate_p_max(config)
        assert est.type2_count == 0

    def test_unpruned_same_prefix_pair_is_exploitable(self):
        # two coins of one message at suffix distance <= budget; a two-step
        # push between them forces strict coin errors about half the time
        config = ExperimentConfig(
            code=CodeSpec(
                n=8,
                k=1,
                d=1,
                codewords=("00000000", "00000011", "11111111", "10101010"),
            ),
            strategy={
                "strategy": "two_step",
                "second": {"kind": "push_nearest_same_prefix"},
            },
            budget=2,
            trials=1000,
            criterion="max",
            messages=(0,),
            master_seed=3,
        )
        est = sim.estimate_p_max(config)
        assert est.point_estimate >= 0.4
        assert est.type2_count > 0


class TestRunMatrix:
    def make_configs(self):
        configs = []
        for code_seed in (1, 2):
            for strategy in (
                {"strategy": "uniform_random"},
                {"strategy": "burst", "start": 0, "length": 2},
                {"strategy": "wait_push", "epsilon": 0.1},
            ):
                configs.append(
                    ExperimentConfig(
                        code=CodeSpec(n=10, k=3, d=1, seed=code_seed),
                        strategy=strategy,
                        budget=2,
                        trials=50,
                    )
                )
        return configs

    def test_counting(self):
        report = sim.run_matrix(self.make_configs(), master_seed=5)
        assert len(report.rows) == 6
        assert all(row["error"] is None for row in report.rows)

    def test_single_config(self):
        report = sim.run_matrix([two_word_wait_push(trials=50)], master_seed=5)
        assert len(report.rows) == 1

    def test_deterministic_bytes(self):
        a = sim.run_matrix(self.make_configs(), master_seed=5)
        b = sim.run_matrix(self.make_configs(), master_seed=5)
        assert a.to_csv() == b.to_csv()
        assert a.to_json() == b.to_json()

    def test_jobs_do_not_change_bytes(self):
        serial = sim.run_matrix(self.make_configs(), master_seed=5, jobs=1)
        parallel = sim.run_matrix(self.make_configs(), master_seed=5, jobs=4)
        assert serial.to_csv() == parallel.to_csv()
        assert serial.to_json() == parallel.to_json()

    def test_invalid_entry_reported_others_run(self):
        good = two_word_wait_push(trials=50).to_dict()
        bad = {"code": {"n": 6, "k": 1}, "strategy": {}, "budget": 1, "trials": 5}
        report = sim.run_matrix([good, bad], master_seed=5)
        assert report.rows[0]["error"] is None
        assert report.rows[1]["error"]
        csv = report.to_csv()
        assert csv.splitlines()[2].endswith(",,,,0")

    def test_empty_list(self):
        with pytest.raises(ValueError):
            sim.run_matrix([], master_seed=1)

    def test_non_causal_marked(self):
        config = ExperimentConfig(
            code=CodeSpec(n=8, k=2, d=1, seed=9),
            strategy={"strategy": "omniscient"},
            budget=1,
            trials=20,
            master_seed=4,
        )
        row = sim.experiment_row(config)
        assert row["causal"] is False
        causal_row = sim.experiment_row(two_word_wait_push(trials=20))
        assert causal_row["causal"] is True
