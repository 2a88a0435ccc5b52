"""Pipeline parsing, validation, and free-form stage execution."""

import pytest

from vtsynth.errors import PipelineError
from vtsynth.pipeline import PRESETS, Stage, parse_pipeline, run_pipeline, validate_pipeline

from helpers import model_path


def test_presets_parse():
    for name, text in PRESETS.items():
        stages = parse_pipeline(name)
        assert stages == parse_pipeline(text)
        validate_pipeline(stages)


def test_parse_stage_arguments():
    stages = parse_pipeline("track,project(a|b),delay(2),loss(inf),determinize,minimize")
    assert stages[1] == Stage("project", "a|b")
    assert stages[2] == Stage("delay", "2")
    assert stages[3] == Stage("loss", "inf")


@pytest.mark.parametrize("bad,message", [
    ("track,unknown-stage,determinize", "unknown pipeline stage"),
    ("track,determinize()", "cannot parse|takes no argument"),
    ("track,delay,determinize", "needs an argument"),
    ("", "empty"),
    ("determinize", "must start with 'track'"),
    ("track,minimize", "requires 'determinize'"),
    ("track,determinize,project,minimize", "requires 'determinize'"),
    ("track,project", "end deterministic"),
    ("track,determinize,track", "only valid as the first stage"),
])
def test_pipeline_validation_errors(bad, message):
    with pytest.raises(PipelineError, match=message):
        validate_pipeline(parse_pipeline(bad)) if bad else parse_pipeline(bad)


def test_run_pipeline_with_delay_and_loss(email_model):
    run = run_pipeline(email_model, parse_pipeline("track,delay(1),loss(1),determinize,minimize"))
    assert run.monitor.num_states >= 1
    assert not run.relaxed
    assert [entry[0] for entry in run.log] == [
        "track", "delay(1)", "loss(1)", "determinize", "minimize",
    ]


def test_run_pipeline_relaxed_flag(email_model):
    run = run_pipeline(
        email_model,
        parse_pipeline("track,determinize,minimize-relaxed,strip-self-loops"),
    )
    assert run.relaxed


def test_specialize_stage(request_monitor_model):
    stages = parse_pipeline(
        "track,specialize(coffee.json),project(request|dispense|burn),determinize,minimize"
    )
    run = run_pipeline(
        request_monitor_model, stages, model_dir=model_path("coffee.json").parent
    )
    assert run.monitor.yielded(("request", "request")) == "f"
    assert run.monitor.yielded(("request", "dispense")) == "?"


def test_project_defaults_to_model_observables(coffee_model):
    run = run_pipeline(coffee_model, parse_pipeline("track,lift,project,determinize,minimize"))
    assert set(run.monitor.actions) == {"request", "dispense", "burn"}
    assert run.log[2][0] == "project(request|dispense|burn)"


def test_unbounded_delay_stage(email_model):
    run = run_pipeline(email_model, parse_pipeline("track,delay(inf),determinize"))
    domain = run.domain
    # with unbounded delays everything ahead is joined: the initial verdict
    # covers the whole universe
    assert domain.count(run.monitor.verdicts[run.monitor.initial]) == 3
