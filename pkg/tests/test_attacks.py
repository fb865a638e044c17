"""Attack harness logic at small trial counts.

Statistical acceptance at 100k trials lives in test_acceptance; these
tests pin the structural behaviour: who evicts whom, what the adversary
can and cannot infer, and that everything replays bit-identically.
"""

import dataclasses
import json

import pytest

from skewcache import (
    AttackScenario,
    FieldSpec,
    SkewParams,
    build_cache,
    compose_address,
    conventional_config,
    default_scenario,
    fill_domain_set,
    galois_config,
    permute,
    run_baseline_prime_probe,
    run_collusion_attack,
    run_galois_prime_probe,
    run_scenario,
    solve_intersection_way,
    sweep_detection_vs_field,
    wilson_interval,
)

GF4 = FieldSpec.binary(2)
SP4 = SkewParams(GF4)


def baseline_scenario(**kw):
    defaults = dict(
        kind="baseline_pp",
        cache=conventional_config(4, 4, "lru"),
        victim_domain=2,
        adversary_domains=(1,),
        victim_target_set=0,
        trials=300,
        seed=5,
    )
    defaults.update(kw)
    return AttackScenario(**defaults)


class TestScenarioValidation:
    def test_collusion_needs_two_adversaries(self):
        with pytest.raises(ValueError):
            AttackScenario(
                kind="collusion", cache=galois_config(SP4), victim_domain=2,
                adversary_domains=(1,), victim_target_set=0, trials=10,
            )
        with pytest.raises(ValueError):
            AttackScenario(
                kind="galois_pp", cache=galois_config(SP4), victim_domain=2,
                adversary_domains=(1, 0), victim_target_set=0, trials=10,
            )

    def test_domains_must_be_distinct(self):
        with pytest.raises(ValueError):
            AttackScenario(
                kind="collusion", cache=galois_config(SP4), victim_domain=1,
                adversary_domains=(1, 0), victim_target_set=0, trials=10,
            )

    def test_domains_must_fit_field(self):
        with pytest.raises(ValueError):
            AttackScenario(
                kind="galois_pp", cache=galois_config(SP4), victim_domain=4,
                adversary_domains=(1,), victim_target_set=0, trials=10,
            )

    def test_kind_and_cache_must_agree(self):
        with pytest.raises(ValueError):
            AttackScenario(
                kind="galois_pp", cache=conventional_config(4, 4),
                victim_domain=2, adversary_domains=(1,), victim_target_set=0,
                trials=10,
            )
        with pytest.raises(ValueError):
            baseline_scenario(cache=galois_config(SP4))

    def test_runner_kind_mismatch(self):
        with pytest.raises(ValueError):
            run_collusion_attack(baseline_scenario())


class TestBaselinePrimeProbe:
    def test_always_active_detects_every_trial(self):
        report = run_baseline_prime_probe(baseline_scenario(trials=1000))
        assert report.detection_rate == 1.0
        assert report.true_positives == 1000

    def test_inactive_victim_no_false_positives(self):
        report = run_baseline_prime_probe(
            baseline_scenario(victim_access_probability=0.0)
        )
        assert report.false_positives == 0
        assert report.true_negatives == report.trials

    def test_disjoint_sets_never_detect(self):
        report = run_baseline_prime_probe(
            baseline_scenario(victim_target_set=2, adversary_prime_set=1)
        )
        assert report.detection_rate == 0.0
        assert report.false_negatives == report.trials

    def test_random_replacement_also_deterministic_detection(self):
        report = run_baseline_prime_probe(
            baseline_scenario(cache=conventional_config(4, 4, "random"))
        )
        assert report.detection_rate == 1.0


class TestGaloisPrimeProbe:
    def test_rate_near_quarter(self):
        sc = default_scenario("galois_pp", galois_config(SP4), trials=20_000, seed=2)
        report = run_galois_prime_probe(sc)
        assert abs(report.detection_rate - 0.25) < 0.015

    def test_miss_way_is_always_the_intersection(self):
        for victim_set in range(4):
            sc = dataclasses.replace(
                default_scenario("galois_pp", galois_config(SP4), trials=400, seed=9),
                victim_target_set=victim_set,
            )
            report = run_galois_prime_probe(sc)
            expected = solve_intersection_way(SP4, 2, 1, victim_set, 0)
            detections = report.true_positives
            assert detections > 0
            assert report.way_miss_counts[expected] == detections
            assert sum(report.way_miss_counts) == detections

    def test_inactive_victim_no_false_positives(self):
        sc = dataclasses.replace(
            default_scenario("galois_pp", galois_config(SP4), trials=2000, seed=3),
            victim_access_probability=0.0,
        )
        report = run_galois_prime_probe(sc)
        assert report.false_positives == 0
        assert report.detection_rate == 0.0

    def test_half_active_rate_halves(self):
        sc = dataclasses.replace(
            default_scenario("galois_pp", galois_config(SP4), trials=20_000, seed=4),
            victim_access_probability=0.5,
        )
        report = run_galois_prime_probe(sc)
        assert abs(report.detection_rate - 0.125) < 0.012

    def test_observation_independent_of_victim_tag_values(self):
        # the adversary's view is a function of its own hit/miss stream:
        # renaming the victim's addresses cannot change what it observes
        views = []
        for tag_base in (0x100, 0x900):
            cache = build_cache(galois_config(SP4), 8)
            cfg = cache.cfg
            prime = [compose_address(cfg, 0, t) for t in range(4)]
            for a in prime:
                cache.access(1, a)
            for i in range(3):
                cache.access(2, compose_address(cfg, 1, tag_base + i))
            cache.access(2, compose_address(cfg, 1, tag_base + 0x50))
            views.append(tuple(ob.hit for ob in cache.observe_probe(1, prime)))
        assert views[0] == views[1]

    def test_report_deterministic_for_seed(self):
        sc = default_scenario("galois_pp", galois_config(SP4), trials=3000, seed=6)
        a = run_galois_prime_probe(sc).to_dict()
        b = run_galois_prime_probe(sc).to_dict()
        assert a == b
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


class TestFillDomainSet:
    def test_fills_whole_set_against_full_cache(self):
        cache = build_cache(galois_config(SP4), 17)
        cfg = cache.cfg
        for s in range(4):
            for t in range(4):
                cache.access(1, compose_address(cfg, s, t))
        addrs = [compose_address(cfg, 2, 0x500 + t) for t in range(4)]
        fill_domain_set(cache, 0, addrs)
        assert cache.domain_lines_in_set(0, 2) == 4
        assert all(ob.hit for ob in cache.observe_probe(0, addrs))


class TestCollusion:
    def test_rate_near_quarter_and_inference_exact(self):
        sc = default_scenario("collusion", galois_config(SP4), trials=6000, seed=1)
        report = run_collusion_attack(sc)
        assert abs(report.detection_rate - 0.25) < 0.02
        fired = sum(map(sum, report.per_set_confusion))
        assert fired == report.true_positives
        assert report.per_set_confusion[0][0] == fired  # victim set 0 only

    def test_every_victim_set_inferred_correctly(self):
        for victim_set in range(4):
            sc = dataclasses.replace(
                default_scenario("collusion", galois_config(SP4), trials=800, seed=3),
                victim_target_set=victim_set,
            )
            report = run_collusion_attack(sc)
            assert report.true_positives > 0
            for true_s in range(4):
                for inferred in range(4):
                    count = report.per_set_confusion[true_s][inferred]
                    if true_s == victim_set and inferred == victim_set:
                        assert count == report.true_positives
                    else:
                        assert count == 0

    def test_inactive_victim_silent(self):
        sc = dataclasses.replace(
            default_scenario("collusion", galois_config(SP4), trials=1500, seed=2),
            victim_access_probability=0.0,
        )
        report = run_collusion_attack(sc)
        assert report.false_positives == 0
        assert report.true_negatives == report.trials

    def test_squeeze_leaves_one_prober_line_per_set(self):
        # reproduce the first two phases and inspect simulator state
        sp = SP4
        cfg = galois_config(sp)
        cache = build_cache(cfg, 13)
        for s in range(4):
            for t in range(4):
                cache.access(1, compose_address(cfg, s, t))
        skip = 3
        for s in range(4):
            if s == skip:
                continue
            fill_domain_set(
                cache, 0, [compose_address(cfg, s, 0x600 + t) for t in range(4)]
            )
        for s in range(4):
            assert cache.domain_lines_in_set(1, s) == 1
            # the survivor sits exactly on the crossing with the skipped set
            live_way = solve_intersection_way(sp, 1, 0, s, skip)
            surviving_ways = []
            for w in range(4):
                line = cache.line_at(permute(sp, 1, s, w), w)
                if line is not None and line[0] == 1:
                    surviving_ways.append(w)
            assert surviving_ways == [live_way]

    def test_works_on_gf8(self):
        sp = SkewParams(FieldSpec.binary(3))
        sc = default_scenario("collusion", galois_config(sp), trials=2500, seed=4)
        report = run_collusion_attack(sc)
        assert abs(report.detection_rate - 0.125) < 0.025
        assert report.false_positives == 0

    def test_custom_skip_set_and_domains(self):
        sc = AttackScenario(
            kind="collusion", cache=galois_config(SP4), victim_domain=0,
            adversary_domains=(3, 2), victim_target_set=1, trials=3000, seed=5,
            squeezer_skip_set=0,
        )
        report = run_collusion_attack(sc)
        assert abs(report.detection_rate - 0.25) < 0.03
        assert report.false_positives == 0
        fired = sum(map(sum, report.per_set_confusion))
        assert report.per_set_confusion[1][1] == fired


class TestSweepAndReportPlumbing:
    def test_sweep_zero_trials_empty(self):
        assert sweep_detection_vs_field("galois_pp", range(2, 5), 0) == []

    def test_sweep_rates_decrease(self):
        rows = sweep_detection_vs_field("galois_pp", range(2, 4), 4000, seed=11)
        assert [r["n"] for r in rows] == [2, 3]
        assert rows[0]["detection_rate"] > rows[1]["detection_rate"]
        for r in rows:
            assert abs(r["detection_rate"] - r["theoretical_rate"]) < 0.03

    def test_sweep_rejects_baseline(self):
        with pytest.raises(ValueError):
            sweep_detection_vs_field("baseline_pp", range(2, 3), 10)

    def test_wilson_interval(self):
        lo, hi = wilson_interval(250, 1000)
        assert lo < 0.25 < hi
        assert wilson_interval(0, 0) == (0.0, 1.0)
        lo0, hi0 = wilson_interval(0, 100)
        assert lo0 == 0.0 and hi0 < 0.05

    def test_counts_partition_trials(self):
        sc = dataclasses.replace(
            default_scenario("galois_pp", galois_config(SP4), trials=1000, seed=7),
            victim_access_probability=0.6,
        )
        r = run_galois_prime_probe(sc)
        total = (r.true_positives + r.false_positives + r.false_negatives
                 + r.true_negatives)
        assert total == r.trials == 1000

    def test_run_scenario_dispatch(self):
        report = run_scenario(baseline_scenario(trials=50))
        assert report.kind == "baseline_pp"

    def test_trial_log_rows(self):
        sc = dataclasses.replace(
            default_scenario("galois_pp", galois_config(SP4), trials=40, seed=1),
            record_trials=True,
        )
        report = run_galois_prime_probe(sc)
        assert len(report.trial_rows) == 40
        assert {"trial", "active", "detected", "missed_way"} <= set(report.trial_rows[0])

    def test_report_json_round_trip(self):
        report = run_scenario(baseline_scenario(trials=20))
        parsed = json.loads(json.dumps(report.to_dict(), sort_keys=True))
        assert parsed["trials"] == 20
        assert parsed["kind"] == "baseline_pp"
        assert "detection_definition" in parsed
