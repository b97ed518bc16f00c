import random

import pytest
from hypothesis import given, settings, strategies as st

from fcdata.core import Completion, Decision, FunctionCall, FunctionSchema, ParamSpec
from fcdata.evaluator import (
    AcceptableArg,
    AcceptableCall,
    EvalTask,
    TaskError,
    match_call,
    run_suite,
    score_task,
    task_from_dict,
    task_to_dict,
)

from oracles import oracle_match, oracle_score
from randgen import completion_for_task, random_task


@pytest.fixture
def weather_target(weather_schema):
    return AcceptableCall(
        name=weather_schema.name,
        arguments={
            "location": AcceptableArg(values=("Palo Alto",)),
            "units": AcceptableArg(values=("Celsius", "Fahrenheit"), omissible=True),
        },
    )


def test_match_identity(weather_schema, weather_target):
    call = FunctionCall(weather_schema.name, {"location": "Palo Alto", "units": "Celsius"})
    assert match_call(call, weather_target, weather_schema)


def test_match_name_mismatch(weather_schema, weather_target):
    call = FunctionCall("get_weather", {"location": "Palo Alto"})
    assert not match_call(call, weather_target, weather_schema)


def test_match_omissible_and_enumerated_values(weather_schema, weather_target):
    omitted = FunctionCall(weather_schema.name, {"location": "Palo Alto"})
    assert match_call(omitted, weather_target, weather_schema)
    kelvin = FunctionCall(weather_schema.name, {"location": "Palo Alto", "units": "Kelvin"})
    assert not match_call(kelvin, weather_target, weather_schema)
    # cross-check every combination with the brute-force oracle
    for units in (None, "Celsius", "Fahrenheit", "Kelvin"):
        args = {"location": "Palo Alto"}
        if units is not None:
            args["units"] = units
        call = FunctionCall(weather_schema.name, args)
        assert match_call(call, weather_target, weather_schema) == oracle_match(
            call, weather_target, weather_schema
        )


def test_match_missing_required_argument(weather_schema, weather_target):
    assert not match_call(FunctionCall(weather_schema.name), weather_target, weather_schema)


def test_match_extra_argument_outside_target(weather_schema):
    target = AcceptableCall(
        name=weather_schema.name,
        arguments={"location": AcceptableArg(values=("Palo Alto",))},
    )
    call = FunctionCall(weather_schema.name, {"location": "Palo Alto", "units": "Celsius"})
    # units is a schema parameter but not in the target's argument map
    assert not match_call(call, target, weather_schema)


def test_match_value_rules(weather_schema):
    schema = FunctionSchema(
        name="f",
        parameters={
            "i": ParamSpec("integer"),
            "r": ParamSpec("number"),
            "s": ParamSpec("string"),
            "l": ParamSpec("array"),
        },
    )
    target = AcceptableCall(
        name="f",
        arguments={
            "i": AcceptableArg(values=(5,)),
            "r": AcceptableArg(values=(1.5,)),
            "s": AcceptableArg(values=("hello",)),
            "l": AcceptableArg(values=([1, 2],)),
        },
    )
    good = FunctionCall("f", {"i": 5, "r": 1.5 + 1e-9, "s": "  hello ", "l": [1, 2]})
    assert match_call(good, target, schema)
    assert not match_call(FunctionCall("f", {"i": 6, "r": 1.5, "s": "hello", "l": [1, 2]}), target, schema)
    assert not match_call(FunctionCall("f", {"i": 5, "r": 1.51, "s": "hello", "l": [1, 2]}), target, schema)
    assert not match_call(FunctionCall("f", {"i": 5, "r": 1.5, "s": "hello!", "l": [1, 2]}), target, schema)
    assert not match_call(FunctionCall("f", {"i": 5, "r": 1.5, "s": "hello", "l": [2, 1]}), target, schema)
    # booleans never coerce to integers
    assert not match_call(FunctionCall("f", {"i": True, "r": 1.5, "s": "hello", "l": [1, 2]}),
                          AcceptableCall("f", {**target.arguments, "i": AcceptableArg(values=(1,))}),
                          schema)


def _simple_task(schema, target, task_id="t1", category="simple"):
    return EvalTask(
        id=task_id, category=category, functions=(schema,), question="q", targets=(target,)
    )


def test_task_invariants(weather_schema, math_schemas, weather_target):
    with pytest.raises(TaskError):
        EvalTask(id="x", category="simple", functions=(weather_schema,), question="q", targets=())
    with pytest.raises(TaskError):
        EvalTask(
            id="x",
            category="parallel",
            functions=(weather_schema,),
            question="q",
            targets=(weather_target,),
        )
    with pytest.raises(TaskError):
        EvalTask(
            id="x",
            category="multiple",
            functions=(weather_schema,),
            question="q",
            targets=(weather_target,),
        )
    with pytest.raises(TaskError):
        EvalTask(id="x", category="relevance", functions=(weather_schema,), question="q",
                 targets=(weather_target,))
    # required schema parameters cannot be marked omissible
    with pytest.raises(TaskError):
        _simple_task(
            weather_schema,
            AcceptableCall(
                name=weather_schema.name,
                arguments={"location": AcceptableArg(values=("X",), omissible=True)},
            ),
        )


def test_score_relevance_ignores_decision_marker(weather_schema):
    task = EvalTask(
        id="r1", category="relevance", functions=(weather_schema,), question="q", targets=()
    )
    assert score_task(task, Completion(decision=Decision.ANSWER, text="cannot help"))
    # declared tool use but nothing decoded still counts as abstaining
    assert score_task(task, Completion(decision=Decision.USE_TOOL, text="[garbage"))
    assert not score_task(
        task,
        Completion(decision=Decision.USE_TOOL, calls=(FunctionCall("f", {"x": 1}),)),
    )


def test_score_simple_requires_exactly_one_call(weather_schema, weather_target):
    task = _simple_task(weather_schema, weather_target)
    good = FunctionCall(weather_schema.name, {"location": "Palo Alto"})
    assert score_task(task, Completion(decision=Decision.USE_TOOL, calls=(good,)))
    assert not score_task(task, Completion(decision=Decision.USE_TOOL, calls=(good, good)))
    assert not score_task(task, Completion(decision=Decision.ANSWER, text="hi"))


def _parallel_task(math_schemas):
    a = AcceptableCall(
        name="math_toolkit.sum_of_multiples",
        arguments={
            "lower_limit": AcceptableArg(values=(1,)),
            "upper_limit": AcceptableArg(values=(1000,)),
            "multiples": AcceptableArg(values=([3, 5],)),
        },
    )
    b = AcceptableCall(
        name="math_toolkit.product_of_primes",
        arguments={"count": AcceptableArg(values=(5,))},
    )
    return EvalTask(
        id="p1",
        category="parallel_multiple",
        functions=math_schemas,
        question="q",
        targets=(a, b),
    )


def test_score_parallel_is_order_free(math_schemas, math_sample):
    task = _parallel_task(math_schemas)
    swapped = Completion(
        decision=Decision.USE_TOOL, calls=tuple(reversed(math_sample.target.calls))
    )
    assert score_task(task, swapped)


def test_score_parallel_rejects_duplicates(math_schemas, math_sample):
    task = _parallel_task(math_schemas)
    first = math_sample.target.calls[0]
    doubled = Completion(decision=Decision.USE_TOOL, calls=(first, first))
    assert not score_task(task, doubled)
    assert not oracle_score(task, doubled)


def test_run_suite_mean_and_relevance(weather_schema, weather_target):
    # 4 AST categories with accuracies 1.0, 0.5, 0.0, 0.5
    tasks, completions = [], {}
    good = Completion(
        decision=Decision.USE_TOOL,
        calls=(FunctionCall(weather_schema.name, {"location": "Palo Alto"}),),
    )
    bad = Completion(decision=Decision.ANSWER, text="no")
    multi_schema = FunctionSchema(name="other.tool", parameters={})
    pair = AcceptableCall(name=weather_schema.name,
                          arguments={"location": AcceptableArg(values=("Palo Alto",))})

    def add(task_id, category, passes):
        if category in ("simple", "multiple"):
            functions = (weather_schema,) if category == "simple" else (weather_schema, multi_schema)
            task = EvalTask(id=task_id, category=category, functions=functions,
                            question="q", targets=(pair,))
            completions[task_id] = good if passes else bad
        else:
            functions = (weather_schema,) if category == "parallel" else (weather_schema, multi_schema)
            task = EvalTask(id=task_id, category=category, functions=functions,
                            question="q", targets=(pair, pair))
            completions[task_id] = (
                Completion(decision=Decision.USE_TOOL, calls=good.calls * 2) if passes else bad
            )
        tasks.append(task)

    add("s1", "simple", True)
    add("s2", "simple", True)
    add("m1", "multiple", True)
    add("m2", "multiple", False)
    add("p1", "parallel", False)
    add("p2", "parallel", False)
    add("pm1", "parallel_multiple", True)
    add("pm2", "parallel_multiple", False)
    report = run_suite(tasks, completions)
    assert report.ast_summary == pytest.approx(0.5)
    assert report.category_counts["simple"] == (2, 2)


def test_run_suite_missing_completions_score_false(weather_schema, weather_target):
    task = _simple_task(weather_schema, weather_target)
    report = run_suite([task], {})
    assert report.category_counts["simple"] == (0, 1)


def test_run_suite_rejects_duplicate_ids(weather_schema, weather_target):
    task = _simple_task(weather_schema, weather_target)
    with pytest.raises(TaskError):
        run_suite([task, task], {})


def test_ast_summary_invariant_under_reordering():
    rng = random.Random(3)
    tasks = [random_task(rng, i) for i in range(40)]
    completions = {t.id: completion_for_task(rng, t) for t in tasks}
    base = run_suite(tasks, completions)
    shuffled = tasks[:]
    rng.shuffle(shuffled)
    assert run_suite(shuffled, completions).ast_summary == base.ast_summary


def test_ast_summary_invariant_under_category_scaling(weather_schema, weather_target):
    task = _simple_task(weather_schema, weather_target)
    good = Completion(
        decision=Decision.USE_TOOL,
        calls=(FunctionCall(weather_schema.name, {"location": "Palo Alto"}),),
    )
    single = run_suite([task], {"t1": good})
    tripled_tasks = [
        _simple_task(weather_schema, weather_target, task_id=f"t{i}") for i in range(3)
    ]
    tripled = run_suite(tripled_tasks, {t.id: good for t in tripled_tasks})
    assert tripled.ast_summary == single.ast_summary


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=100, deadline=None)
def test_match_is_monotone_in_acceptable_sets(seed):
    rng = random.Random(seed)
    task = random_task(rng, rng.randrange(0, 1000) * 5)  # always the simple shape
    target = task.targets[0]
    schema = {f.name: f for f in task.functions}[target.name]
    call = completion_for_task(rng, task).calls
    if len(call) != 1:
        return
    before = match_call(call[0], target, schema)
    enlarged = AcceptableCall(
        name=target.name,
        arguments={
            name: AcceptableArg(values=arg.values + ("zz-enlarged",), omissible=arg.omissible)
            for name, arg in target.arguments.items()
        },
    )
    after = match_call(call[0], enlarged, schema)
    if before:
        assert after


def test_score_agrees_with_oracle_on_random_tasks():
    rng = random.Random(99)
    for i in range(200):
        task = random_task(rng, i)
        completion = completion_for_task(rng, task)
        assert score_task(task, completion) == oracle_score(task, completion), (
            f"divergence on task {i}: {task}\n{completion}"
        )


def test_task_dict_round_trip(math_schemas):
    task = _parallel_task(math_schemas)
    assert task_from_dict(task_to_dict(task)) == task
