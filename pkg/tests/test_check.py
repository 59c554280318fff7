"""
Enabledness, interference, trace audit and serializability.
"""

import itertools

import pytest

from src.check.audit import audit_trace
from src.check.enabledness import enabledness_report
from src.check.interference import interference_report
from src.check.serializability import outcome, serial_outcomes, serializability_check
from src.core.messages import MessageKind
from src.dsl.parser import parse
from src.semantics.step import ChaosPolicy, step
from src.sim.explore import explore
from src.sim.runner import Script, run
from src.sim.scheduler import FixedChoices, SeededRandom
from src.sim.trace import parse_trace
from src.spec.evaluate import eval_pred
from src.spec.report import Severity

from .helpers import ACC1, ENV, IDS, corpus_text, env_tag, message

MANIFESTS = ["transfers.manifest", "close.manifest", "withdraw.manifest", "deposit.manifest"]


def test_busy_account_refuses_a_second_transfer(bank, account):
    findings = {f.subject: f for f in enabledness_report(bank, IDS)}
    assert set(findings) == {"transfer/Idle", "transfer/Wait"}
    start = findings["transfer/Idle"]
    assert start.message == ("no transition enabled for transfer/2 in 1458 of 2916 assignment(s), "
                             "1458 with no source state predicate true")
    gap = start.assignment
    assert gap.lookup("busy") is True
    source = account(**{name: gap.lookup(name) for name in bank.attribute_names()})
    m = message(ENV, ACC1, env_tag(), "transfer", MessageKind.CONC,
                a=gap.lookup("a"), dst=gap.lookup("dst"))
    [result] = step(bank, source, m, ChaosPolicy.REJECT, IDS)
    assert result.successor.error == "no transition enabled for transfer"
    assert findings["transfer/Wait"].assignment.lookup("busy") is False


def test_missing_refusal_leaves_a_gap():
    text = corpus_text("bank.iostd").replace(
        "      pre not open or bal + a > 8;  -- reconstructed\n",
        "      pre not open;\n")
    beh = parse(text)
    [finding] = [f for f in enabledness_report(beh) if f.subject.startswith("deposit")]
    assert (finding.code, finding.subject) == ("INPUT_GAP", "deposit/Idle")
    assert finding.severity is Severity.WARNING
    gap = finding.assignment
    assert gap.lookup("open") is True
    assert gap.lookup("bal") + gap.lookup("a") > 8
    for t in beh.service("deposit").transitions:
        assert not eval_pred(t.pre, gap)


def test_interference_names_services_not_excluded(bank):
    findings = interference_report(bank)
    assert {f.subject for f in findings} == {"transfer/Wait"}
    assert sorted(f.witness for f in findings) == ["deposit", "transfer", "withdraw"]
    [deposit] = [f for f in findings if f.witness == "deposit"]
    assert deposit.message == "deposit may change bal while transfer waits"


# -- audit ---------------------------------------------------------------------

@pytest.mark.parametrize("name, seed", itertools.product(MANIFESTS, range(10)))
def test_simulator_traces_pass_audit(manifest, name, seed):
    run_manifest = manifest(name).override(seed=seed)
    trace = run(run_manifest.configuration(), run_manifest.script(), SeededRandom(seed),
                run_manifest.policy, run_manifest.meta())
    assert audit_trace(parse_trace(trace.render())) == []


def test_many_transfer_runs_pass_audit(manifest):
    run_manifest = manifest("transfers.manifest")
    cfg = run_manifest.configuration()
    script = run_manifest.script()
    for seed in range(1000):
        trace = run(cfg, script, SeededRandom(seed), run_manifest.policy)
        assert audit_trace(trace) == [], seed


@pytest.mark.parametrize("name", ["transfers.manifest", "close-noexcl.manifest"])
def test_exploration_witnesses_pass_audit(manifest, name):
    run_manifest = manifest(name)
    report = explore(run_manifest.configuration(), run_manifest.script(), run_manifest.bound,
                     run_manifest.policy, run_manifest.invariants())
    traces = [v.trace for v in report.violations]
    traces += [report.witness(digest) for digest in report.reachable]
    assert traces
    for trace in traces:
        assert audit_trace(trace) == []


def test_budget_stopped_trace_passes_audit(manifest):
    run_manifest = manifest("transfers.manifest")
    script = Script(run_manifest.script().injections, 2)
    trace = run(run_manifest.configuration(), script, FixedChoices([1, 0, 1, 0]))
    assert audit_trace(trace) == []


def test_message_never_sent_is_reported():
    lines = corpus_text("golden/deposit.trace").splitlines()
    tampered = [line for line in lines if not line.startswith("inject |")]
    [finding] = audit_trace(parse_trace("\n".join(tampered) + "\n"))
    assert (finding.code, finding.subject) == ("FIFO_ORDER", "step 0")
    assert finding.witness == "conc env->acc1 [env:0] deposit(a=3)"


def test_missing_successor_state_is_reported():
    lines = corpus_text("golden/deposit.trace").splitlines()
    del lines[-2]
    [finding] = audit_trace(parse_trace("\n".join(lines) + "\n"))
    assert (finding.code, finding.subject) == ("MISSING_STATE", "step 0")


def test_unanswered_sequential_call_is_reported(manifest):
    run_manifest = manifest("transfers.manifest")
    trace = run(run_manifest.configuration(), run_manifest.script(), SeededRandom(3))
    lines = trace.render().splitlines()
    kept = [line for line in lines if not (line.startswith("emit | ret acc2->acc1"))]
    assert len(kept) == len(lines) - 1
    codes = [f.code for f in audit_trace(parse_trace("\n".join(kept) + "\n"))]
    assert "MISSING_RETURN" in codes or "FIFO_ORDER" in codes


# -- serializability -----------------------------------------------------------

def test_transfer_and_withdraw_serialize(manifest):
    run_manifest = manifest("withdraw.manifest")
    assert serializability_check(run_manifest.configuration(), run_manifest.messages(),
                                 run_manifest.bound, run_manifest.policy) == []


def test_late_debit_creates_money(manifest):
    run_manifest = manifest("withdraw-latedebit.manifest")
    [finding] = serializability_check(run_manifest.configuration(), run_manifest.messages(),
                                      run_manifest.bound, run_manifest.policy)
    assert finding.code == "NOT_SERIALIZABLE"
    assert finding.severity is Severity.ERROR
    assert "acc1{bal=2" in finding.message and "paid=3" in finding.message
    services = [d.message.mn for d in finding.trace.deliveries()]
    assert services[0] == "transfer"
    assert sorted(services) == ["deposit", "ret", "transfer", "withdraw"]
    assert audit_trace(finding.trace) == []


def _serial_by_hand(run_manifest):
    """Every order of the injections, each run alone under every scheduler choice."""
    cfg = run_manifest.configuration()
    messages = run_manifest.messages()
    results = set()
    for order in itertools.permutations(messages):
        frontier = [cfg]
        for message in order:
            frontier = [end for start in frontier
                        for end in explore(start, Script.of([message]), run_manifest.bound)
                        .terminal_configurations.values()]
        results |= {outcome(end) for end in frontier}
    return results


@pytest.mark.parametrize("name", ["withdraw.manifest", "withdraw-latedebit.manifest",
                                  "transfers.manifest"])
def test_serial_outcomes_match_product_of_orders(manifest, name):
    run_manifest = manifest(name)
    expected = _serial_by_hand(run_manifest)
    assert serial_outcomes(run_manifest.configuration(), run_manifest.messages(),
                           run_manifest.bound) == expected
    assert len(expected) >= 1
