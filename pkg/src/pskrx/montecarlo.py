"""Shot-by-shot simulation of a receiver, with run-to-run error bars.

Randomness comes from numpy's counter-based Philox generator. The plan seed
feeds a :class:`numpy.random.SeedSequence` which is spawned into one child
per run, so run ``r`` draws from its own stream regardless of how many runs
there are or in what order they execute.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List

import numpy as np

from .core import IDEAL, NoiseModel, PskAlphabet, ReceiverParams, build_decode_table, click_matrix


@dataclass(frozen=True)
class TrialPlan:
    shots_per_run: int = 40000
    runs: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.shots_per_run < 1 or self.runs < 1:
            raise ValueError("shots_per_run and runs must be >= 1")


@dataclass(frozen=True)
class TrialReport:
    """Outcome of a simulation.

    ``confusion[x, k]`` counts shots that sent state ``x`` and decoded ``k``;
    ``std_dev`` is the sample standard deviation of the per-run success
    rates (``nan`` for a single run).
    """

    success_estimate: float
    std_dev: float
    per_run: np.ndarray
    confusion: np.ndarray
    shots_per_run: int

    @property
    def total_shots(self) -> int:
        return self.shots_per_run * self.per_run.size


def run_streams(plan: TrialPlan) -> List[np.random.Generator]:
    children = np.random.SeedSequence(plan.seed).spawn(plan.runs)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def _one_run(rng, priors, p1, decoded, shots):
    m, n = p1.shape
    sent = rng.choice(m, size=shots, p=priors)
    clicks = rng.random((shots, n)) < p1[sent]
    codes = clicks @ (1 << np.arange(n))
    guess = decoded[codes]
    return np.bincount(sent * m + guess, minlength=m * m).reshape(m, m)


def simulate(alphabet: PskAlphabet, params: ReceiverParams, noise: NoiseModel = IDEAL,
             plan: TrialPlan = TrialPlan(), workers: int = 1) -> TrialReport:
    table = build_decode_table(params, alphabet, noise)
    _, p1 = click_matrix(params, alphabet, noise)
    priors = np.asarray(alphabet.priors, dtype=float)
    streams = run_streams(plan)

    def job(rng):
        return _one_run(rng, priors, p1, table.decoded, plan.shots_per_run)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            counts = list(pool.map(job, streams))
    else:
        counts = [job(rng) for rng in streams]

    per_run = np.array([np.trace(c) / plan.shots_per_run for c in counts])
    std = float(np.std(per_run, ddof=1)) if plan.runs > 1 else float("nan")
    confusion = np.sum(counts, axis=0)
    return TrialReport(float(per_run.mean()), std, per_run, confusion, plan.shots_per_run)


@dataclass(frozen=True)
class ConfusionCheck:
    passed: bool
    rows: List[dict]

    def __bool__(self):
        return self.passed


def confusion_matrix_check(report: TrialReport, z: float = 5.0) -> ConfusionCheck:
    """Bookkeeping and row-stochasticity check of a report's confusion matrix.

    Passes when the counts add up to the total shot number, every state was
    sent at least once and each normalised row sums to one. Per-row
    diagnostics give the shot count, the diagonal fraction and its binomial
    standard error; ``z`` bounds how far the run-averaged estimate may sit
    from the pooled diagonal.
    """
    conf = np.asarray(report.confusion)
    totals = conf.sum(axis=1)
    rows = []
    ok = int(conf.sum()) == report.total_shots
    for x, total in enumerate(totals):
        if total == 0:
            rows.append(dict(state=x, shots=0, row_sum=float("nan"), diagonal=float("nan"), stderr=float("nan")))
            ok = False
            continue
        frac = conf[x] / total
        diag = float(frac[x])
        rows.append(dict(state=x, shots=int(total), row_sum=float(frac.sum()), diagonal=diag,
                         stderr=float(np.sqrt(max(diag * (1 - diag), 1e-300) / total))))
        ok &= abs(frac.sum() - 1.0) < 1e-12
    pooled = np.trace(conf) / max(conf.sum(), 1)
    sigma = np.sqrt(max(pooled * (1 - pooled), 1e-300) / max(conf.sum(), 1))
    ok &= abs(pooled - report.success_estimate) <= z * sigma + 1e-12
    return ConfusionCheck(bool(ok), rows)
