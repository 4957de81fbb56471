"""
Unit-tests for evaluation metrics.

"""
import numpy as np
from hamcrest import (
    assert_that,
    calling,
    close_to,
    contains_exactly,
    equal_to,
    is_,
    raises,
)
from parameterized import parameterized

from zk_coder.agent import CaseResult, PipelineRun, TerminalOutcome
from zk_coder.constants import (
    ACCEPT,
    ACCEPTED,
    FALSE_ACCEPT,
    FALSE_REJECT,
    INFRA_FAILURE,
    MIXED_FALSE_ACCEPT_REJECT,
    REJECT,
    REJECTED,
    REPAIR_BUDGET_EXCEEDED,
    SKETCH_INCORRECT,
    SUCCESS,
)
from zk_coder.metrics import (
    PROGRAM_CORRECTNESS,
    REPAIR_PASS_RATE,
    SKETCH_CORRECTNESS,
    average_tokens,
    classify_failure,
    failure_distribution,
    mean_pass_at_k,
    overall_accuracy,
    overall_from_rates,
    pass_at_k,
    stage_flags,
    stage_matrix,
    stage_rates,
    verdict_confusion,
)
from zk_coder.tasks import SuiteCase
from zk_coder.toolchain import RunOutcome


def case_result(polarity, verdict):
    return CaseResult(SuiteCase(polarity, 0, None), RunOutcome(verdict, 0.))


def make_run(kind, sketch_correct=True, compiled=True, verdicts=(), task_id="parity", uses_sketch=True, tokens=0):
    run = PipelineRun(task_id, "circom", "full", "{}/sample-0".format(task_id), uses_sketch=uses_sketch)
    run.sketch_correct = sketch_correct
    run.compiled = compiled
    run.case_results = tuple(case_result(polarity, verdict) for polarity, verdict in verdicts)
    run.prompt_tokens = tokens
    run.outcome = TerminalOutcome(kind)
    return run


PASSING = ((ACCEPT, ACCEPTED), (REJECT, REJECTED))

FALSE_ACCEPTING = ((ACCEPT, ACCEPTED), (REJECT, ACCEPTED))


def test_stage_flags():
    """Test stage flags follow the run and treat sketch-less variants as passing the first stage."""
    assert_that(stage_flags(make_run(SUCCESS, verdicts=PASSING)), contains_exactly(True, True, True))
    assert_that(stage_flags(make_run(FALSE_ACCEPT, verdicts=FALSE_ACCEPTING)), contains_exactly(True, True, False))
    assert_that(
        stage_flags(make_run(SUCCESS, sketch_correct=None, uses_sketch=False, verdicts=PASSING)),
        contains_exactly(True, True, True),
    )
    assert_that(
        stage_flags(make_run(INFRA_FAILURE, sketch_correct=None, compiled=False)),
        contains_exactly(False, False, False),
    )


def test_stage_matrix_is_monotone():
    """Test a run failing a stage fails every later stage."""
    runs = [
        make_run(SUCCESS, sketch_correct=False, verdicts=PASSING),
        make_run(SUCCESS, verdicts=PASSING),
    ]

    assert_that(stage_matrix(runs).tolist(), is_(equal_to([[False, False, False], [True, True, True]])))
    assert_that(stage_matrix([]).shape, is_(equal_to((0, 3))))


def test_stage_rates_are_conditional():
    """Test each rate is measured on the survivors of the previous stage."""
    flags = [
        [True, True, True],
        [True, True, False],
        [True, False, False],
        [False, False, False],
        [False, True, True],
    ]

    rates = stage_rates(flags)

    assert_that(rates[SKETCH_CORRECTNESS], is_(close_to(3 / 5., 1e-12)))
    assert_that(rates[REPAIR_PASS_RATE], is_(close_to(2 / 3., 1e-12)))
    assert_that(rates[PROGRAM_CORRECTNESS], is_(close_to(1 / 2., 1e-12)))
    assert_that(overall_accuracy(flags), is_(close_to(overall_from_rates(rates), 1e-12)))


def test_stage_rates_without_runs():
    """Test rates with an empty condition are 0."""
    assert_that(list(stage_rates(np.zeros((0, 3))).values()), contains_exactly(0., 0., 0.))
    assert_that(overall_accuracy(np.zeros((0, 3))), is_(equal_to(0.)))


@parameterized.expand([
    ([.9412, .9172, .9659], .8338),
    ([.9721, .9743, .9938], .9412),
    ([1., 1., 1.], 1.),
])
def test_overall_from_rates(rates, expected):
    """Test overall accuracy is the product of the stage rates."""
    assert_that(overall_from_rates(rates), is_(close_to(expected, 1e-4)))


@parameterized.expand([
    (10, 3, 1, .3),
    (5, 5, 1, 1.),
    (5, 0, 2, 0.),
    (4, 2, 2, 5 / 6.),
    (4, 3, 2, 1.),
    (20, 1, 10, .5),
])
def test_pass_at_k(n, c, k, expected):
    """Test the unbiased pass@k estimate."""
    assert_that(pass_at_k(n, c, k), is_(close_to(expected, 1e-12)))


@parameterized.expand([
    (3, 4, 1),
    (3, -1, 1),
    (3, 1, 0),
    (3, 1, 4),
])
def test_pass_at_k_domain(n, c, k):
    """Test pass@k refuses counts outside its domain."""
    assert_that(calling(pass_at_k).with_args(n, c, k), raises(ValueError, "0 <= c <= n"))


def test_mean_pass_at_k():
    """Test per-task estimates are averaged, skipping tasks without samples."""
    assert_that(mean_pass_at_k([(10, 5), (10, 10), (0, 0)]), is_(close_to(.75, 1e-12)))
    assert_that(mean_pass_at_k([]), is_(equal_to(0.)))


@parameterized.expand([
    (REPAIR_BUDGET_EXCEEDED, True, False, ()),
    (SKETCH_INCORRECT, False, True, FALSE_ACCEPTING),
    (FALSE_ACCEPT, True, True, FALSE_ACCEPTING),
    (FALSE_REJECT, True, True, ((ACCEPT, REJECTED),)),
    (MIXED_FALSE_ACCEPT_REJECT, True, True, ((ACCEPT, REJECTED), (REJECT, ACCEPTED))),
])
def test_classify_failure(kind, sketch_correct, compiled, verdicts):
    """Test failed runs are classified in precedence order."""
    run = make_run(kind, sketch_correct=sketch_correct, compiled=compiled, verdicts=verdicts)

    assert_that(classify_failure(run), is_(equal_to(kind)))


def test_classify_failure_contract():
    """Test classification is refused for runs it is undefined on."""
    unfinished = make_run(SUCCESS)
    unfinished.outcome = None

    assert_that(calling(classify_failure).with_args(make_run(SUCCESS, verdicts=PASSING)), raises(ValueError))
    assert_that(calling(classify_failure).with_args(make_run(INFRA_FAILURE)), raises(ValueError))
    assert_that(calling(classify_failure).with_args(unfinished), raises(ValueError, "finished run"))
    assert_that(
        calling(classify_failure).with_args(
            make_run(FALSE_ACCEPT, verdicts=FALSE_ACCEPTING),
            make_run(SUCCESS, task_id="sudoku_4x4"),
        ),
        raises(ValueError, "does not belong"),
    )


def test_failure_distribution():
    """Test fractions are taken over failed runs only, in class order."""
    counts, fractions = failure_distribution([
        FALSE_ACCEPT,
        SUCCESS,
        FALSE_ACCEPT,
        FALSE_REJECT,
        INFRA_FAILURE,
    ])

    assert_that(list(counts), contains_exactly(
        REPAIR_BUDGET_EXCEEDED,
        SKETCH_INCORRECT,
        FALSE_ACCEPT,
        FALSE_REJECT,
        MIXED_FALSE_ACCEPT_REJECT,
    ))
    assert_that(counts[FALSE_ACCEPT], is_(equal_to(2)))
    assert_that(fractions[FALSE_ACCEPT], is_(close_to(2 / 3., 1e-12)))
    assert_that(sum(fractions.values()), is_(close_to(1., 1e-12)))
    assert_that(sum(failure_distribution([SUCCESS])[1].values()), is_(equal_to(0.)))


def test_verdict_confusion():
    """Test rows are expected verdicts and columns observed ones."""
    results = [
        case_result(ACCEPT, ACCEPTED),
        case_result(ACCEPT, REJECTED),
        case_result(REJECT, ACCEPTED),
        case_result(REJECT, REJECTED),
        case_result(REJECT, REJECTED),
    ]

    assert_that(verdict_confusion(results).tolist(), is_(equal_to([[1, 1], [1, 2]])))
    assert_that(verdict_confusion([]).tolist(), is_(equal_to([[0, 0], [0, 0]])))


def test_average_tokens():
    """Test the token cost is averaged over runs."""
    runs = [make_run(SUCCESS, tokens=100), make_run(SUCCESS, tokens=300)]

    assert_that(average_tokens(runs), is_(equal_to(200.)))
    assert_that(average_tokens([]), is_(equal_to(0.)))
