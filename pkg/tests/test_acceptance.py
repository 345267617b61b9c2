"""Acceptance criteria, one test per criterion.

Run with `pytest tests/test_acceptance.py -v -s` to get one PASS/FAIL line
per criterion in addition to pytest's own verdict lines.
"""

import itertools
import json
import re
import time
from contextlib import contextmanager

import pytest

from miniproof import ast, expr_text, parse
from miniproof.cli import main
from miniproof.discharge import derive_domains, render_text, verify_program
from miniproof.errors import ContractViolation, VoidDereference
from miniproof.runtime import (
    Interpreter,
    RuntimeObject,
    eval_expr,
    parse_scenario,
    replay_counterexample,
    run_scenario,
)
from miniproof.vcgen import VerifyOptions, generate_obligations


@contextmanager
def reported(label: str):
    try:
        yield
    except BaseException:
        print(f"FAIL {label}")
        raise
    print(f"PASS {label}")


def cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


# -- criterion 1 -------------------------------------------------------------------


def test_criterion_1_account_conformance(capsys, entries):
    with reported("criterion 1: account verifies clean with the published contracts"):
        started = time.perf_counter()
        code, out = cli(capsys, "verify", "corpus:account", "--int-range", "-8..8")
        elapsed = time.perf_counter() - started
        assert code == 0
        assert elapsed < 10.0
        assert "0 failed (0%), 0 errors (0%)" in out
        assert out.count("Discharged") == 6

        # clause-for-clause: the published bank-account contract
        account = parse(entries["account"].source).classes[0]
        features = {f.name: f for f in account.features}
        clauses = {
            (section, c.label): expr_text(c.expr)
            for name, f in features.items()
            for section, cs in (("require", f.require), ("ensure", f.ensure))
            for c in cs
        }
        assert clauses == {
            ("ensure", "balance_set"): "balance = 0",
            ("require", "amount_not_negative"): "amount >= 0",
            ("ensure", "balance_increased"): "balance = old balance + amount",
            ("require", "enough_balance"): "amount <= balance",
            ("ensure", "balance_decreased"): "balance = old balance - amount",
        }
        assert [(c.label, expr_text(c.expr)) for c in account.invariant] == [
            ("non_negative_balance", "balance >= 0")
        ]


# -- criterion 2 -------------------------------------------------------------------


def test_criterion_2_noguard_mutant_detection(capsys, entries, checked_programs):
    with reported("criterion 2: deleted guard is caught and replays"):
        code, out = cli(capsys, "verify", "corpus:account_noguard_mutant")
        assert code == 1
        failed_ids = re.findall(r"(\S+)\s+\S+\s+Failed", out)
        assert failed_ids == ["ACCOUNT.deposit.invariant_maintenance.0"]

        checked = checked_programs["account_noguard_mutant"]
        opts = entries["account_noguard_mutant"].options
        report = verify_program(checked, opts)
        (row,) = [r for r in report.rows if r.verdict.status == "Failed"]
        assert row.kind == "InvariantMaintenance"
        (obligation,) = [
            o for o in generate_obligations(checked, opts) if o.id == row.id
        ]
        # the replayed runtime violation names the invariant clause
        assert obligation.provenance == "non_negative_balance"
        assert replay_counterexample(
            checked, obligation, row.verdict.counterexample, opts
        )


# -- criterion 3 -------------------------------------------------------------------


def test_criterion_3_overflow_obligations(capsys, checked_programs):
    with reported("criterion 3: 8-bit overflow is found and replays at runtime"):
        code, out = cli(
            capsys,
            "verify",
            "corpus:account",
            "--check-overflow",
            "--overflow-width",
            "8",
            "--int-range",
            "-128..127",
            "--format",
            "json",
        )
        assert code == 1
        payload = json.loads(out)
        deposit_overflow = next(
            r for r in payload["rows"] if r["id"] == "ACCOUNT.deposit.overflow.0"
        )
        assert deposit_overflow["verdict"] == "Failed"
        cx = deposit_overflow["counterexample"]
        assert cx["balance"] + cx["amount"] > 127  # old balance + amount > 127

        checked = checked_programs["account"]
        opts = VerifyOptions(
            int_range=(-128, 127), check_overflow=True, overflow_width=8
        )
        (obligation,) = [
            o
            for o in generate_obligations(checked, opts)
            if o.id == "ACCOUNT.deposit.overflow.0"
        ]
        assert replay_counterexample(checked, obligation, cx, opts)

        # the same entry state trips the runtime overflow monitor directly
        interp = Interpreter(checked, opts)
        acc = interp.create("ACCOUNT")
        acc.fields["balance"] = cx["balance"]
        with pytest.raises(ContractViolation) as exc:
            interp.call(acc, "deposit", [cx["amount"]])
        assert exc.value.kind == "overflow"


# -- criterion 4 -------------------------------------------------------------------


def test_criterion_4_display_pool_guard(entries, checked_programs, pinned_reports):
    with reported("criterion 4: display-pool invariant holds, mutant leaks a value"):
        clean = pinned_reports("tokeneer_enrolment")
        maintenance = next(
            r
            for r in clean.rows
            if r.id == "ID_STATION.set_current_display.invariant_maintenance.0"
        )
        assert maintenance.verdict.status == "Discharged"

        mutant = pinned_reports("tokeneer_noprecond_mutant")
        (row,) = [r for r in mutant.rows if r.verdict.status == "Failed"]
        assert row.id == "ID_STATION.set_current_display.invariant_maintenance.0"
        cx = row.verdict.counterexample
        assert cx["v"] not in cx["constants.display_message"]

        checked = checked_programs["tokeneer_noprecond_mutant"]
        opts = entries["tokeneer_noprecond_mutant"].options
        (obligation,) = [
            o for o in generate_obligations(checked, opts) if o.id == row.id
        ]
        assert replay_counterexample(checked, obligation, cx, opts)


# -- criterion 5 -------------------------------------------------------------------


def test_criterion_5_version_frames(entries, checked_programs, pinned_reports):
    with reported("criterion 5: version frames hold; the frame mutant is caught"):
        clean = pinned_reports("tokeneer_enrolment")
        version_frames = [
            r
            for r in clean.rows
            if r.class_name == "ENCLAVE_OPERS"
            and r.feature_name == "request_enrolment"
            and r.kind == "Frame"
            and r.provenance
            in ("key_store_version", "audit_log_version", "internal_version")
        ]
        assert len(version_frames) == 3
        assert all(r.verdict.status == "Discharged" for r in version_frames)

        mutant = pinned_reports("tokeneer_frame_mutant")
        failed = [r for r in mutant.rows if r.verdict.status != "Discharged"]
        assert [
            (r.id, r.kind, r.provenance, r.verdict.status) for r in failed
        ] == [
            (
                "ENCLAVE_OPERS.request_enrolment.frame.4",
                "Frame",
                "audit_log_version",
                "Failed",
            )
        ]
        checked = checked_programs["tokeneer_frame_mutant"]
        opts = entries["tokeneer_frame_mutant"].options
        (obligation,) = [
            o for o in generate_obligations(checked, opts) if o.id == failed[0].id
        ]
        assert replay_counterexample(
            checked, obligation, failed[0].verdict.counterexample, opts
        )

        # the same mutation trips the runtime frame monitor in the
        # enrollment scenario
        trace = run_scenario(
            checked,
            parse_scenario(
                entries["tokeneer_frame_mutant"].scenarios["tokeneer_enrolment_ok"]
            ),
        )
        assert not trace.ok
        assert trace.steps[-1].outcome == "violation frame audit_log_version"


# -- criterion 6 -------------------------------------------------------------------


def test_criterion_6_unsupported_contract_reporting(pinned_reports):
    with reported("criterion 6: creation-in-contract reports an Error with reason"):
        report = pinned_reports("contract_creation_error")
        errors = [r for r in report.rows if r.verdict.status == "Error"]
        assert len(errors) >= 1
        assert all(
            r.verdict.reason == "creation expression in contract" for r in errors
        )

        text = render_text(report)
        summary = text.strip().splitlines()[-1]
        match = re.fullmatch(
            r"3 obligations: 2 discharged \((\d+)%\), 0 failed \((\d+)%\), "
            r"1 errors \((\d+)%\)",
            summary,
        )
        assert match, summary
        percentages = [int(g) for g in match.groups()]
        assert abs(sum(percentages) - 100) <= 1


# -- criterion 7: the keystone sweep ------------------------------------------------


def _clone(value):
    if isinstance(value, RuntimeObject):
        return RuntimeObject(
            value.class_name, {k: _clone(v) for k, v in value.fields.items()}
        )
    return value


def _canon(value):
    if isinstance(value, RuntimeObject):
        return (
            value.class_name,
            tuple(sorted((k, _canon(v)) for k, v in value.fields.items())),
        )
    if isinstance(value, frozenset):
        return ("set", tuple(sorted(value)))
    return value


def _in_domain(value, domains):
    lo, hi = domains.int_range
    pool = set(domains.string_pool)
    if isinstance(value, RuntimeObject):
        return all(_in_domain(v, domains) for v in value.fields.values())
    if isinstance(value, bool) or value is None:
        return True
    if isinstance(value, int):
        return lo <= value <= hi
    if isinstance(value, str):
        return value in pool
    if isinstance(value, frozenset):
        return value <= pool
    return False


def _param_values(ty, domains, make_representative):
    lo, hi = domains.int_range
    if ty.kind == ast.INTEGER:
        return list(range(lo, hi + 1))
    if ty.kind == ast.BOOLEAN:
        return [False, True]
    if ty.kind == ast.STRING:
        return list(domains.string_pool) + [None]
    if ty.kind == ast.REF:
        return [None, make_representative(ty.class_name)]
    raise AssertionError(f"unswept parameter type {ty}")


class _SweepFailure(AssertionError):
    pass


def _verdict_index(report):
    return {
        (r.class_name, r.kind, r.provenance): r.verdict.status for r in report.rows
    }


def _check_violation(cv, index):
    """A runtime violation during the sweep must correspond to a
    non-Discharged obligation of the same clause."""
    kind_map = {
        "postcondition": "Postcondition",
        "invariant": "InvariantMaintenance",
        "frame": "Frame",
        "check": "CheckAssertion",
        "precondition": "CalleePrecondition",
    }
    kind = kind_map.get(cv.kind)
    if kind is None:
        raise _SweepFailure(f"unmapped violation kind {cv.kind}: {cv}")
    if kind == "CalleePrecondition":
        # a nested callee guard failed; some caller-side obligation with this
        # clause label must be Failed
        statuses = [
            status
            for (cls, k, provenance), status in index.items()
            if k == kind and provenance == cv.label
        ]
    else:
        statuses = [index.get((cv.class_name, kind, cv.label))]
    if not statuses or all(s is None for s in statuses):
        raise _SweepFailure(f"violation of untracked clause: {cv}")
    if all(s == "Discharged" for s in statuses if s is not None):
        raise _SweepFailure(f"Discharged obligation violated at runtime: {cv}")


def _check_void(exc, index):
    statuses = [
        status
        for (cls, kind, provenance), status in index.items()
        if kind == "VoidDereference" and provenance == exc.path
    ]
    if not statuses:
        raise _SweepFailure(f"void dereference of untracked path: {exc.path}")
    if all(s == "Discharged" for s in statuses):
        raise _SweepFailure(
            f"Discharged void-dereference obligation violated: {exc.path}"
        )


def _requires_hold(feature, obj, args, index):
    env = dict(obj.fields)
    env.update({p.name: v for p, v in zip(feature.params, args)})
    for clause in feature.require:
        try:
            if eval_expr(clause.expr, env) is not True:
                return False
        except VoidDereference as exc:
            _check_void(exc, index)
            return False
    return True


def _sweep_entry(checked, opts, report):
    """Exhaustively drive every monitored-reachable state within the domains;
    report any violation of a clause whose obligation was Discharged."""
    domains = derive_domains(checked, opts)
    index = _verdict_index(report)
    interp = Interpreter(checked, opts)

    def make_representative(class_name):
        return interp.create(class_name)

    probes = 0
    for class_name, info in checked.classes.items():
        try:
            root = interp.create(class_name)
        except ContractViolation as cv:
            _check_violation(cv, index)
            continue
        except VoidDereference as exc:
            _check_void(exc, index)
            continue

        frontier = [root]
        visited = {_canon(root)}
        while frontier:
            template = frontier.pop()
            for feature in info.routines.values():
                if feature.is_creator:
                    continue
                value_lists = [
                    _param_values(p.ty, domains, make_representative)
                    for p in feature.params
                ]
                for args in itertools.product(*value_lists):
                    target = _clone(template)
                    if not _requires_hold(feature, target, list(args), index):
                        continue
                    probes += 1
                    try:
                        interp.call(target, feature.name, list(args))
                    except ContractViolation as cv:
                        _check_violation(cv, index)
                        continue
                    except VoidDereference as exc:
                        _check_void(exc, index)
                        continue
                    key = _canon(target)
                    if key not in visited and _in_domain(target, domains):
                        visited.add(key)
                        frontier.append(target)
    return probes


def test_criterion_7_oracle_equivalence(checked_programs):
    with reported(
        "criterion 7: static verdicts agree with the exhaustive runtime sweep"
    ):
        started = time.perf_counter()
        opts = VerifyOptions(int_range=(-4, 4))
        for name in ("account", "tokeneer_enrolment"):
            checked = checked_programs[name]
            report = verify_program(checked, opts)

            # Failed implies a successful replay
            obligations = {o.id: o for o in generate_obligations(checked, opts)}
            for row in report.rows:
                assert row.verdict.status in ("Discharged", "Failed"), row.id
                if row.verdict.status == "Failed":
                    assert replay_counterexample(
                        checked,
                        obligations[row.id],
                        row.verdict.counterexample,
                        opts,
                    ), row.id

            # Discharged implies no runtime violation anywhere in the sweep
            probes = _sweep_entry(checked, opts, report)
            assert probes > 0, name
        elapsed = time.perf_counter() - started
        assert elapsed < 300.0


# -- criterion 8 -------------------------------------------------------------------


def test_criterion_8_enrollment_scenarios(entries, checked_programs):
    with reported("criterion 8: enrollment protocol scenarios behave as published"):
        entry = entries["tokeneer_enrolment"]
        checked = checked_programs["tokeneer_enrolment"]

        # creation-only scenario reproduces the creator's published
        # postcondition facts, evaluated verbatim on the fresh object
        creation = run_scenario(
            checked, parse_scenario(entry.scenarios["tokeneer_creation_only"])
        )
        assert creation.ok
        station = creation.objects["station"]
        make = checked.info("ID_STATION").routines["make"]
        assert len(make.ensure) == 3
        for clause in make.ensure:
            assert eval_expr(clause.expr, station.fields, {}) is True, clause.label
        assert station.fields["enclave_status"] == "not_enrolled"
        assert station.fields["floppy_presence"] == "absent"
        assert station.fields["token_removal_timeout"] == 0

        # ok path: one matched transition per protocol step, ends enrolled
        ok_trace = run_scenario(
            checked, parse_scenario(entry.scenarios["tokeneer_enrolment_ok"])
        )
        assert ok_trace.ok
        assert len(ok_trace.steps) == 5
        assert all(step.matched for step in ok_trace.steps)
        assert ok_trace.final_state("ops")["enclave_status"] == "enrolled"

        # fail path: invalid data is rejected and every model query returns
        # to its post-creation value
        fresh = Interpreter(checked).create("ENCLAVE_OPERS")
        queries = checked.info("ENCLAVE_OPERS").model_queries
        baseline = {q: fresh.fields[q] for q in queries}

        fail_trace = run_scenario(
            checked, parse_scenario(entry.scenarios["tokeneer_enrolment_fail"])
        )
        assert fail_trace.ok
        final = fail_trace.final_state("ops")
        assert {q: final[q] for q in queries} == baseline
        assert final["enclave_status"] == "not_enrolled"


# -- criterion 9 -------------------------------------------------------------------


def test_criterion_9_json_determinism(capsys):
    with reported("criterion 9: verify --format json is byte-stable"):
        argv = ("verify", "corpus:account_noguard_mutant", "--format", "json")
        code_first, first = cli(capsys, *argv)
        code_second, second = cli(capsys, *argv)
        assert code_first == code_second == 1
        scrub = lambda text: re.sub(r'"duration_ms": \d+', '"duration_ms": 0', text)
        assert first != "" and scrub(first).encode() == scrub(second).encode()
        # the only permitted difference is duration_ms
        diff = [
            (a, b)
            for a, b in zip(first.splitlines(), second.splitlines())
            if a != b
        ]
        assert all("duration_ms" in a and "duration_ms" in b for a, b in diff)
