"""Seeded Monte Carlo contention experiments against the cache models.

Three scripted experiments, each repeated over independent trials with
per-trial derived seeds (base seed + trial index):

* baseline prime-probe: on a conventional cache the adversary fills one
  set, lets the victim run, and re-touches its lines; any miss reveals
  the victim touched that set.
* skewed-cache prime-probe: the same attack against the skewed cache.
  The adversary's primed set crosses each victim set in exactly one
  cell, so a victim fill only lands on a primed line when its random
  replacement picks that one way.  The probe stops at the first miss:
  a missing line's refill evicts a random candidate, and probing past
  it would let that refill knock out lines not yet probed, smearing
  both the miss count and the way attribution with replacement noise
  that carries no victim information.
* two-domain collusion: the prober fills the whole cache, the squeezer
  then reclaims all but one of its own sets, leaving the prober exactly
  one resident line per set (the cells of the squeezer's untouched
  set).  A victim access evicts one of those survivors with probability
  1/ways, and the survivor's cell pins down the victim's set index
  exactly.  The prober probes each of its sets survivor-way first, for
  the same refill-disturbance reason as above; scheduling is fully
  synchronous and adversary-favorable, and the colluders know the
  public layout and each other's address choices.

Victim activity is gated by ``victim_access_probability`` so false
positives are measurable; trials are independent and may be distributed
across processes by splitting the trial range.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field as dc_field
from typing import Optional

from .cache import CacheConfig, build_cache, compose_address
from .skew import permute, set_through_cell, solve_intersection_way

KINDS = ("baseline_pp", "galois_pp", "collusion")

_WARM_TAG_BASE = 0x10000
_TARGET_TAG = 0x2FFFF
_NOISE_TAG_BASE = 0x40000


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (default 95%)."""
    if trials == 0:
        return (0.0, 1.0)
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials))
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass(frozen=True)
class AttackScenario:
    kind: str
    cache: CacheConfig
    victim_domain: int
    adversary_domains: tuple[int, ...]
    victim_target_set: int
    trials: int
    seed: int = 0
    victim_access_probability: float = 1.0
    #: set primed (baseline/galois_pp); baseline defaults to the victim's set
    adversary_prime_set: Optional[int] = None
    #: collusion: squeezer set left unfilled; defaults to the highest index
    squeezer_skip_set: Optional[int] = None
    #: optional background domain that streams fresh lines into uniformly
    #: random sets between protocol steps; off unless a domain is named
    noise_domain: Optional[int] = None
    noise_accesses: int = 0
    record_trials: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.trials < 0:
            raise ValueError("trials must be nonnegative")
        if not 0.0 <= self.victim_access_probability <= 1.0:
            raise ValueError("victim_access_probability must be in [0, 1]")
        if self.noise_accesses < 0:
            raise ValueError("noise_accesses must be nonnegative")
        domains = (self.victim_domain, *self.adversary_domains)
        if self.noise_domain is not None:
            domains = (*domains, self.noise_domain)
        if len(set(domains)) != len(domains):
            raise ValueError("participant domains must be distinct")
        if self.kind == "baseline_pp":
            if self.cache.kind != "conventional":
                raise ValueError("baseline prime-probe needs a conventional cache")
            if len(self.adversary_domains) != 1:
                raise ValueError("baseline prime-probe uses one adversary domain")
            limit = self.cache.num_sets
        else:
            if self.cache.kind != "galois":
                raise ValueError(f"{self.kind} needs a galois cache")
            order = self.cache.skew.field.order
            for d in domains:
                if not 0 <= d < order:
                    raise ValueError(f"domain id {d} out of range for {order} domains")
            if self.kind == "galois_pp" and len(self.adversary_domains) != 1:
                raise ValueError("skewed prime-probe uses one adversary domain")
            if self.kind == "collusion" and len(self.adversary_domains) != 2:
                raise ValueError("collusion needs exactly two adversary domains")
            limit = order
        if not 0 <= self.victim_target_set < limit:
            raise ValueError(f"victim_target_set {self.victim_target_set} out of range")
        if self.adversary_prime_set is not None and not (
            0 <= self.adversary_prime_set < limit
        ):
            raise ValueError("adversary_prime_set out of range")
        if self.squeezer_skip_set is not None and not (
            0 <= self.squeezer_skip_set < limit
        ):
            raise ValueError("squeezer_skip_set out of range")


@dataclass
class DetectionReport:
    kind: str
    trials: int
    true_positives: int
    false_positives: int
    false_negatives: int
    true_negatives: int
    detection_rate: float
    ci_low: float
    ci_high: float
    detection_definition: str
    way_miss_counts: Optional[list[int]] = None
    per_set_confusion: Optional[list[list[int]]] = None
    domain_stats: dict = dc_field(default_factory=dict)
    trial_rows: Optional[list[dict]] = None

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "trials": self.trials,
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "true_negatives": self.true_negatives,
            "detection_rate": self.detection_rate,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "detection_definition": self.detection_definition,
            "domain_stats": {str(d): row for d, row in self.domain_stats.items()},
        }
        if self.way_miss_counts is not None:
            out["way_miss_counts"] = self.way_miss_counts
        if self.per_set_confusion is not None:
            out["per_set_confusion"] = self.per_set_confusion
        return out


def _finish_report(kind, sc, tp, fp, fn, tn, definition, cache, **extras):
    detected = tp + fp
    lo, hi = wilson_interval(detected, sc.trials)
    return DetectionReport(
        kind=kind,
        trials=sc.trials,
        true_positives=tp,
        false_positives=fp,
        false_negatives=fn,
        true_negatives=tn,
        detection_rate=detected / sc.trials if sc.trials else 0.0,
        ci_low=lo,
        ci_high=hi,
        detection_definition=definition,
        domain_stats=cache.stats(),
        **extras,
    )


def _trial_active(rng: random.Random, probability: float) -> bool:
    # the coin is only drawn for fractional probabilities, so p=1.0 and
    # p=0.0 runs consume the identical random stream as each other
    if probability >= 1.0:
        return True
    if probability <= 0.0:
        return False
    return rng.random() < probability


def _noise_burst(cache, cfg, domain: Optional[int], count: int, next_tag: int) -> int:
    """Stream `count` fresh lines into uniformly random sets.

    Tags increase monotonically so the burst never hits, modelling an
    unrelated busy process.  Draws come from the cache's own generator,
    keeping trials replayable.
    """
    if domain is None or count == 0:
        return next_tag
    rng = cache.rng
    sets = cfg.num_sets
    for _ in range(count):
        cache.access(domain, compose_address(cfg, rng.randrange(sets), next_tag))
        next_tag += 1
    return next_tag


def fill_domain_set(cache, domain: int, addrs, max_rounds: int = 4096) -> int:
    """Access the given same-set addresses until all are resident.

    Under random replacement a fill can evict a line of its own group,
    so after the initial pass the lines are re-probed (misses refill)
    until one complete pass hits everywhere.  Uses only the access
    interface.  Returns the number of probe passes used; the cap only
    guards against a broken cache model, since the loop terminates with
    probability one.
    """
    probe = cache.probe_one
    for a in addrs:
        cache.access(domain, a)
    for round_no in range(1, max_rounds + 1):
        # all() short-circuits: a miss refills and may disturb the rest
        # of the group, so the pass restarts rather than probing on
        if all(probe(domain, a) for a in addrs):
            return round_no
    raise RuntimeError(f"set not resident after {max_rounds} probe passes")


def run_baseline_prime_probe(sc: AttackScenario) -> DetectionReport:
    """Classic prime-probe against one set of a conventional cache."""
    if sc.kind != "baseline_pp":
        raise ValueError(f"scenario kind {sc.kind!r} is not baseline_pp")
    cfg = sc.cache
    cache = build_cache(cfg, sc.seed)
    adv = sc.adversary_domains[0]
    primed_set = (
        sc.adversary_prime_set if sc.adversary_prime_set is not None else sc.victim_target_set
    )
    prime_addrs = [compose_address(cfg, primed_set, tag) for tag in range(cfg.num_ways)]
    victim_addr = compose_address(cfg, sc.victim_target_set, _TARGET_TAG)
    tp = fp = fn = tn = 0
    rows = [] if sc.record_trials else None
    for trial in range(sc.trials):
        cache.reseed(sc.seed + trial)
        active = _trial_active(cache.rng, sc.victim_access_probability)
        cache.flush()
        for a in prime_addrs:
            cache.access(adv, a)
        noise_tag = _noise_burst(cache, cfg, sc.noise_domain, sc.noise_accesses,
                                 _NOISE_TAG_BASE)
        if active:
            cache.access(sc.victim_domain, victim_addr)
        _noise_burst(cache, cfg, sc.noise_domain, sc.noise_accesses, noise_tag)
        detected = any(not ob.hit for ob in cache.observe_probe(adv, prime_addrs))
        if active:
            tp += detected
            fn += not detected
        else:
            fp += detected
            tn += not detected
        if rows is not None:
            rows.append({"trial": trial, "active": active, "detected": detected})
    return _finish_report(
        "baseline_pp", sc, tp, fp, fn, tn,
        "at least one miss while re-accessing the primed set",
        cache, trial_rows=rows,
    )


def run_galois_prime_probe(sc: AttackScenario) -> DetectionReport:
    """Prime-probe against the skewed cache.

    Per trial: flush; the adversary primes one of its own sets; the
    victim touches the other ways of its target set (the ordinary
    warm-cache state, and without it the victim's fill would land in an
    empty way and never contend); when active, the victim then fills a
    fresh line in its target set; the adversary re-accesses its primed
    lines in way order, stopping at the first miss.
    """
    if sc.kind != "galois_pp":
        raise ValueError(f"scenario kind {sc.kind!r} is not galois_pp")
    cfg = sc.cache
    sp = cfg.skew
    m = sp.field.order
    cache = build_cache(cfg, sc.seed)
    adv = sc.adversary_domains[0]
    vic = sc.victim_domain
    primed_set = sc.adversary_prime_set if sc.adversary_prime_set is not None else 0
    prime_addrs = [compose_address(cfg, primed_set, tag) for tag in range(m)]
    warm_addrs = [
        compose_address(cfg, sc.victim_target_set, _WARM_TAG_BASE + i)
        for i in range(m - 1)
    ]
    target_addr = compose_address(cfg, sc.victim_target_set, _TARGET_TAG)
    way_miss_counts = [0] * m
    tp = fp = fn = tn = 0
    rows = [] if sc.record_trials else None
    for trial in range(sc.trials):
        cache.reseed(sc.seed + trial)
        active = _trial_active(cache.rng, sc.victim_access_probability)
        cache.flush()
        for a in prime_addrs:
            cache.access(adv, a)
        noise_tag = _noise_burst(cache, cfg, sc.noise_domain, sc.noise_accesses,
                                 _NOISE_TAG_BASE)
        for a in warm_addrs:
            cache.access(vic, a)
        if active:
            cache.access(vic, target_addr)
        _noise_burst(cache, cfg, sc.noise_domain, sc.noise_accesses, noise_tag)
        missed_way = -1
        for w, a in enumerate(prime_addrs):
            if not cache.probe_one(adv, a):
                missed_way = w
                break
        detected = missed_way >= 0
        if detected:
            way_miss_counts[missed_way] += 1
        if active:
            tp += detected
            fn += not detected
        else:
            fp += detected
            tn += not detected
        if rows is not None:
            rows.append(
                {"trial": trial, "active": active, "detected": detected,
                 "missed_way": missed_way}
            )
    return _finish_report(
        "galois_pp", sc, tp, fp, fn, tn,
        "at least one miss while re-accessing the primed set "
        "(probe stops at the first miss)",
        cache, way_miss_counts=way_miss_counts, trial_rows=rows,
    )


def run_collusion_attack(sc: AttackScenario) -> DetectionReport:
    """Two colluding domains localize a single victim access.

    adversary_domains = (prober, squeezer).  Per trial: flush; the
    prober fills every one of its sets; the squeezer fills all of its
    own sets except one, which deterministically leaves the prober one
    surviving line per set; the victim (when active) fills a fresh line
    in its target set; the prober probes the whole cache set by set,
    survivor way first.  A set showing misses in all ways means its
    survivor was evicted, and that survivor's cell lies on exactly one
    victim set, which is reported as the inference.
    """
    if sc.kind != "collusion":
        raise ValueError(f"scenario kind {sc.kind!r} is not collusion")
    cfg = sc.cache
    sp = cfg.skew
    m = sp.field.order
    cache = build_cache(cfg, sc.seed)
    prober, squeezer = sc.adversary_domains
    vic = sc.victim_domain
    skip_set = sc.squeezer_skip_set if sc.squeezer_skip_set is not None else m - 1
    prime_addrs = [
        [compose_address(cfg, s, tag) for tag in range(m)] for s in range(m)
    ]
    squeeze_addrs = [
        [compose_address(cfg, s, _WARM_TAG_BASE + tag) for tag in range(m)]
        for s in range(m)
    ]
    squeeze_sets = [s for s in range(m) if s != skip_set]
    target_addr = compose_address(cfg, sc.victim_target_set, _TARGET_TAG)
    # Where each prober set's survivor sits (its crossing with the
    # squeezer's untouched set), and which victim set runs through that
    # cell; both follow from the public layout.
    survivor_way = [
        solve_intersection_way(sp, prober, squeezer, s, skip_set) for s in range(m)
    ]
    inferred_for = [
        set_through_cell(sp, vic, permute(sp, prober, s, survivor_way[s]), survivor_way[s])
        for s in range(m)
    ]
    confusion = [[0] * m for _ in range(m)]
    tp = fp = fn = tn = 0
    rows = [] if sc.record_trials else None
    access = cache.access
    probe = cache.probe_one
    for trial in range(sc.trials):
        cache.reseed(sc.seed + trial)
        active = _trial_active(cache.rng, sc.victim_access_probability)
        cache.flush()
        for s in range(m):
            for a in prime_addrs[s]:
                access(prober, a)
        noise_tag = _noise_burst(cache, cfg, sc.noise_domain, sc.noise_accesses,
                                 _NOISE_TAG_BASE)
        for s in squeeze_sets:
            fill_domain_set(cache, squeezer, squeeze_addrs[s])
        noise_tag = _noise_burst(cache, cfg, sc.noise_domain, sc.noise_accesses,
                                 noise_tag)
        if active:
            access(vic, target_addr)
        _noise_burst(cache, cfg, sc.noise_domain, sc.noise_accesses, noise_tag)
        fired_set = -1
        for s in range(m):
            group = prime_addrs[s]
            w_live = survivor_way[s]
            misses = 0 if probe(prober, group[w_live]) else 1
            for w in range(m):
                if w != w_live and not probe(prober, group[w]):
                    misses += 1
            if misses == m and fired_set < 0:
                fired_set = s
        detected = fired_set >= 0
        inferred = inferred_for[fired_set] if detected else -1
        if detected:
            confusion[sc.victim_target_set][inferred] += 1
        correct = detected and inferred == sc.victim_target_set
        if active:
            tp += correct
            fn += not correct
            fp += detected and not correct
        else:
            fp += detected
            tn += not detected
        if rows is not None:
            rows.append(
                {"trial": trial, "active": active, "detected": detected,
                 "inferred_set": inferred}
            )
    return _finish_report(
        "collusion", sc, tp, fp, fn, tn,
        "some prober set misses in every way and its surviving cell maps to "
        "the true victim set",
        cache, per_set_confusion=confusion, trial_rows=rows,
    )


_RUNNERS = {
    "baseline_pp": run_baseline_prime_probe,
    "galois_pp": run_galois_prime_probe,
    "collusion": run_collusion_attack,
}


def run_scenario(sc: AttackScenario) -> DetectionReport:
    return _RUNNERS[sc.kind](sc)


def default_scenario(
    kind: str,
    cache: CacheConfig,
    trials: int,
    seed: int = 0,
    victim_access_probability: float = 1.0,
    victim_target_set: int = 0,
) -> AttackScenario:
    """Scenario with the conventional domain casting: victim 2, prober 1,
    squeezer 0."""
    adversaries = (1, 0) if kind == "collusion" else (1,)
    return AttackScenario(
        kind=kind,
        cache=cache,
        victim_domain=2,
        adversary_domains=adversaries,
        victim_target_set=victim_target_set,
        trials=trials,
        seed=seed,
        victim_access_probability=victim_access_probability,
    )


def sweep_detection_vs_field(
    kind: str,
    n_range,
    trials: int,
    seed: int = 0,
    victim_access_probability: float = 1.0,
) -> list[dict]:
    """One detection-rate row per GF(2^n) field; empty when trials == 0."""
    from .cache import galois_config
    from .field import FieldSpec
    from .skew import SkewParams

    if kind not in ("galois_pp", "collusion"):
        raise ValueError(f"sweep supports galois_pp or collusion, got {kind!r}")
    rows: list[dict] = []
    if trials == 0:
        return rows
    for n in n_range:
        sp = SkewParams(FieldSpec.binary(n))
        sc = default_scenario(
            kind, galois_config(sp), trials, seed, victim_access_probability
        )
        report = run_scenario(sc)
        rows.append(
            {
                "n": n,
                "order": sp.field.order,
                "theoretical_rate": victim_access_probability / sp.field.order,
                "detection_rate": report.detection_rate,
                "ci_low": report.ci_low,
                "ci_high": report.ci_high,
                "trials": trials,
            }
        )
    return rows
