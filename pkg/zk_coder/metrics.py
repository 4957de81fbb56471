"""
Evaluation metrics for pipeline runs.

Stage rates are conditional: repair pass rate is measured on the runs whose
sketch was correct, program correctness on the runs that also compiled, so
the overall accuracy is the product of the three rates.

"""
from collections import OrderedDict

import numpy as np
from sklearn.metrics import confusion_matrix

from zk_coder.agent import failure_class
from zk_coder.constants import FAILURE_CLASSES, INFRA_FAILURE, SUCCESS


SKETCH_CORRECTNESS = "sketch_correctness"
REPAIR_PASS_RATE = "repair_pass_rate"
PROGRAM_CORRECTNESS = "program_correctness"
STAGE_RATES = (SKETCH_CORRECTNESS, REPAIR_PASS_RATE, PROGRAM_CORRECTNESS)


def stage_flags(run):
    """
    Whether a run got through each stage: (sketch correct, compiled, passed).

    Runs of variants without a sketch stage count as passing the first stage.

    """
    sketch_ok = run.sketch_correct is True or (run.sketch_correct is None and not run.uses_sketch)
    return sketch_ok, bool(run.compiled), bool(run.passed)


def stage_matrix(runs):
    """
    Stage flags of many runs.

    Returns
    -------
    flags : array-like, shape = [n_runs, 3], dtype bool
        Column j is True for the runs that survived stages 0..j. A run that
        fails a stage fails all later ones.

    """
    flags = np.array([stage_flags(run) for run in runs], dtype=bool).reshape(-1, 3)
    return np.logical_and.accumulate(flags, axis=1)


def _ratio(numerator, denominator):
    return float(numerator) / denominator if denominator else 0.


def stage_rates(flags):
    """
    Conditional stage rates of a stage matrix.

    Parameters
    ----------
    flags : array-like, shape = [n_runs, 3]
        As returned by :func:`stage_matrix`.

    Returns
    -------
    rates : OrderedDict
        sketch_correctness over all runs, repair_pass_rate over the runs with
        a correct sketch, program_correctness over the runs that also
        compiled. A rate with an empty condition is 0.

    """
    flags = np.logical_and.accumulate(np.asarray(flags, dtype=bool).reshape(-1, 3), axis=1)
    survivors = flags.sum(axis=0)
    return OrderedDict((
        (SKETCH_CORRECTNESS, _ratio(survivors[0], flags.shape[0])),
        (REPAIR_PASS_RATE, _ratio(survivors[1], survivors[0])),
        (PROGRAM_CORRECTNESS, _ratio(survivors[2], survivors[1])),
    ))


def overall_accuracy(flags):
    """Fraction of runs surviving all three stages."""
    flags = np.asarray(flags, dtype=bool).reshape(-1, 3)
    return _ratio(np.count_nonzero(flags.all(axis=1)), flags.shape[0])


def overall_from_rates(rates):
    """Overall accuracy implied by conditional stage rates: their product."""
    if isinstance(rates, dict):
        rates = [rates[name] for name in STAGE_RATES]
    return float(np.prod(np.asarray(rates, dtype=float)))


def pass_at_k(n, c, k):
    """
    Unbiased estimate of pass@k from `n` samples of which `c` are correct.

    Computed in product form, :math:`1 - \\prod_{i=n-c+1}^{n} (1 - k / i)`,
    which avoids the large binomial coefficients. For k = 1 this is c / n.

    Raises
    ------
    ValueError
        Unless 0 <= c <= n and 1 <= k <= n.

    """
    if not 0 <= c <= n or not 1 <= k <= n:
        raise ValueError("pass_at_k() requires 0 <= c <= n and 1 <= k <= n, got n={}, c={}, k={}".format(n, c, k))
    if n - c < k:
        return 1.
    return float(1. - np.prod(1. - k / np.arange(n - c + 1, n + 1)))


def mean_pass_at_k(samples, k=1):
    """
    Average of per-task pass@k.

    Parameters
    ----------
    samples : iterable of (n, c)
        Sample count and success count of every task.

    """
    estimates = [pass_at_k(n, c, k) for n, c in samples if n]
    return float(np.mean(estimates)) if estimates else 0.


def classify_failure(run, task=None):
    """
    Failure class of a finished run that neither succeeded nor hit an infrastructure failure.

    Classes apply in precedence order: RepairBudgetExceeded when no program
    compiled, SketchIncorrect when the sketch failed the hidden suites, then
    FalseAccept, FalseReject or MixedFalseAcceptReject by the polarities of the
    failing cases.

    Raises
    ------
    ValueError
        For Success and InfraFailure runs, unfinished runs and runs of another task.

    """
    if run.outcome is None:
        raise ValueError("classify_failure() requires a finished run")
    if run.outcome.kind in (SUCCESS, INFRA_FAILURE):
        raise ValueError("classify_failure() is undefined for {} runs".format(run.outcome.kind))
    if task is not None and task.task_id != run.task_id:
        raise ValueError("run {} does not belong to task {}".format(run.run_id, task.task_id))
    kind = failure_class(run.compiled, run.sketch_correct, run.case_results)
    if kind is None:
        raise ValueError("run {} passed every case".format(run.run_id))
    return kind


def failure_distribution(outcomes):
    """
    Counts and fractions of the failure classes among outcome kinds.

    Fractions are taken over the failed runs only, excluding successes and
    infrastructure failures; they are all 0 when nothing failed.

    Returns
    -------
    counts, fractions : OrderedDict, OrderedDict
        Keyed by failure class, in the fixed class order.

    """
    outcomes = list(outcomes)
    counts = OrderedDict((kind, outcomes.count(kind)) for kind in FAILURE_CLASSES)
    total = sum(counts.values())
    fractions = OrderedDict((kind, _ratio(count, total)) for kind, count in counts.items())
    return counts, fractions


def verdict_confusion(case_results):
    """
    Confusion matrix of expected against observed case verdicts.

    Returns
    -------
    matrix : array-like, shape = [2, 2]
        Rows are the expected verdict (accept, reject), columns the observed
        one, so the off-diagonal cells count false rejects and false accepts.

    """
    expected = [result.case.expects_accept for result in case_results]
    observed = [result.outcome.is_accepted for result in case_results]
    if not expected:
        return np.zeros((2, 2), dtype=int)
    return confusion_matrix(expected, observed, labels=[True, False])


def average_tokens(runs):
    """Mean prompt plus completion tokens per run."""
    totals = [run.total_tokens for run in runs]
    return float(np.mean(totals)) if totals else 0.
