"""Acceptance suite: one test per criterion plus the end-to-end ``verify`` run.

Each test prints a single ``criterion <n> <name>: PASS|FAIL`` line. Run directly
with ``python3 tests/test_acceptance.py`` to get only those lines.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from tlgram.verify import CRITERIA

SEED = 1
RUNTIME_BUDGET_S = {1: 60.0, 6: 120.0, 8: 30.0}
FULL_VERIFY_BUDGET_S = 300.0


def evaluate(num: int):
    name, battery = CRITERIA[num]
    start = time.perf_counter()
    cases = battery(np.random.default_rng([SEED, num]))
    elapsed = time.perf_counter() - start
    budget = RUNTIME_BUDGET_S.get(num)
    ok = bool(cases) and all(c.passed for c in cases) and (budget is None or elapsed <= budget)
    worst = max(cases, key=lambda c: c.residual / c.tol if c.tol else c.residual)
    line = (
        f"criterion {num} {name}: {'PASS' if ok else 'FAIL'} "
        f"({len(cases)} cases, worst {worst.name} residual={worst.residual:.3g} tol={worst.tol:.3g}, {elapsed:.1f}s"
        + (f" of {budget:.0f}s" if budget else "")
        + ")"
    )
    failed = [c for c in cases if not c.passed]
    return ok, line, failed


@pytest.mark.slow
@pytest.mark.parametrize("num", sorted(CRITERIA), ids=[f"{n}-{CRITERIA[n][0]}" for n in sorted(CRITERIA)])
def test_criterion(num, capsys):
    ok, line, failed = evaluate(num)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, f"{line}; failing cases: {[(c.name, c.params, c.residual) for c in failed]}"


@pytest.mark.slow
def test_full_verify_under_five_minutes(capsys):
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "tlgram", "verify", "--N", "3", "--seed", str(SEED)], capture_output=True, text=True
    )
    elapsed = time.perf_counter() - start
    report = json.loads(proc.stdout)
    ok = proc.returncode == 0 and elapsed < FULL_VERIFY_BUDGET_S and all(c["pass"] for c in report["cases"])
    with capsys.disabled():
        print(f"\nfull verify: {'PASS' if ok else 'FAIL'} ({len(report['cases'])} cases, {elapsed:.1f}s)")
    assert ok, proc.stderr


if __name__ == "__main__":
    results = [evaluate(n) for n in sorted(CRITERIA)]
    for _, line, _ in results:
        print(line)
    sys.exit(0 if all(ok for ok, _, _ in results) else 1)
