"""Assemble, link, run and compare."""
from __future__ import annotations

import math
import os
import shutil
import signal
import subprocess
import tempfile
from typing import Optional

from ..errors import HarnessFailure, SemanticError
from .driver import parse_output
from .report import VerificationReport
from .testcases import TestCase

DEFAULT_TIMEOUT = 10.0
CC = os.environ.get("PARTCC_CC", "gcc")


def _run(cmd: list[str], cwd: str, timeout: float = 120.0) -> subprocess.CompletedProcess:
    try:
        return subprocess.run(cmd, cwd=cwd, capture_output=True, text=True, timeout=timeout)
    except FileNotFoundError as exc:
        raise HarnessFailure(f"tool not found: {cmd[0]}") from exc
    except subprocess.TimeoutExpired as exc:
        raise HarnessFailure(f"{cmd[0]} timed out") from exc


def assemble_link(module: str, driver: str, workdir: Optional[str] = None) -> str:
    """Build ``module`` (.s text) with ``driver`` (C text); return the executable path.

    The assembler and the linker are separate stages so a failure is
    attributed to the right one.  ``workdir`` defaults to a fresh temp dir,
    which the caller owns.
    """
    if shutil.which(CC) is None:
        raise HarnessFailure(f"{CC} not found")
    work = workdir or tempfile.mkdtemp(prefix="partcc-")
    os.makedirs(work, exist_ok=True)
    with open(os.path.join(work, "module.s"), "w", encoding="utf-8") as fh:
        fh.write(module)
    with open(os.path.join(work, "driver.c"), "w", encoding="utf-8") as fh:
        fh.write(driver)
    cp = _run([CC, "-c", "module.s", "-o", "module.o"], work)
    if cp.returncode != 0:
        raise SemanticError("assemble", cp.stderr or cp.stdout)
    cp = _run([CC, "-O0", "-w", "-c", "driver.c", "-o", "driver.o"], work)
    if cp.returncode != 0:
        raise HarnessFailure(f"test driver does not compile:\n{cp.stderr[-2000:]}")
    cp = _run([CC, "driver.o", "module.o", "-o", "prog"], work)
    if cp.returncode != 0:
        raise SemanticError("link", cp.stderr or cp.stdout)
    return os.path.join(work, "prog")


def run_case(exe: str, index: int, timeout: float) -> tuple[str, Optional[int], bool, str]:
    proc = subprocess.Popen([exe, str(index)], stdout=subprocess.PIPE, stderr=subprocess.PIPE,
                            text=True, start_new_session=True)
    try:
        out, err = proc.communicate(timeout=timeout)
        return out, proc.returncode, False, err
    except subprocess.TimeoutExpired:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        out, err = proc.communicate()
        return out or "", None, True, err or ""


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def values_match(got: str, want, case: TestCase) -> bool:
    if want is None:
        return True
    if got is None:
        return False
    try:
        g = _number(got)
    except ValueError:
        return str(want).strip() == got.strip()
    if isinstance(want, str):
        try:
            want = _number(want)
        except ValueError:
            return False
    if isinstance(g, float) or isinstance(want, float):
        g, w = float(g), float(want)
        if math.isnan(g) or math.isnan(w):
            return math.isnan(g) and math.isnan(w)
        if case.comparison == "float-tolerance":
            return g == w or abs(g - w) <= case.epsilon * max(abs(g), abs(w))
        return g == w
    return g == want


def stdout_match(got: str, want: Optional[str], case: TestCase) -> bool:
    if want is None:
        return True
    gl, wl = got.splitlines(), want.splitlines()
    if len(gl) != len(wl):
        return False
    for a, b in zip(gl, wl):
        ka, _, va = a.partition("=")
        kb, _, vb = b.partition("=")
        if ka != kb or not values_match(va, vb, case):
            return False
    return True


def run_tests(exe: str, tests: list[TestCase], timeout: float = DEFAULT_TIMEOUT) -> VerificationReport:
    if not os.path.exists(exe):
        raise HarnessFailure(f"executable {exe} does not exist")
    diags: list[str] = []
    failed: list[str] = []
    for case in tests:
        if not case.has_expectation:
            raise HarnessFailure(f"case {case.name!r} has no expected output")
    for i, case in enumerate(tests):
        out, code, timed_out, err = run_case(exe, i, timeout)
        if timed_out:
            return VerificationReport("run", "fail", "runtime",
                                      f"case {case.name}: timed out after {timeout:g}s", [case.name])
        if code != 0:
            what = f"killed by signal {-code}" if code < 0 else f"exit status {code}"
            return VerificationReport("run", "fail", "runtime",
                                      f"case {case.name}: {what}\n{err}", [case.name])
        ret, rest = parse_output(out)
        ok_ret = values_match(ret, case.expected_return, case)
        ok_out = stdout_match(rest, case.expected_stdout, case)
        if not (ok_ret and ok_out):
            failed.append(case.name)
            lines = [f"case {case.name}: output mismatch"]
            if not ok_ret:
                lines.append(f"  return: expected {case.expected_return}, got {ret}")
            if not ok_out:
                lines.append(f"  state: expected\n{case.expected_stdout}  got\n{rest}")
            diags.append("\n".join(lines))
    if failed:
        return VerificationReport("compare", "fail", "behavioral", "\n".join(diags), failed)
    return VerificationReport("compare", "pass")


def verify_module(module: str, driver: str, tests: list[TestCase],
                  timeout: float = DEFAULT_TIMEOUT, keep_dir: Optional[str] = None) -> VerificationReport:
    """Full check of one module; assembler/linker errors become semantic reports."""
    work = keep_dir or tempfile.mkdtemp(prefix="partcc-")
    try:
        try:
            exe = assemble_link(module, driver, work)
        except SemanticError as exc:
            return VerificationReport(exc.stage, "fail", "semantic", exc.diagnostics)
        return run_tests(exe, tests, timeout)
    finally:
        if keep_dir is None:
            shutil.rmtree(work, ignore_errors=True)


def reference_outputs(c_source: str, driver: str, n_cases: int,
                      timeout: float = DEFAULT_TIMEOUT) -> list[tuple[Optional[str], str]]:
    """Run the original C (compiled by the system compiler) to obtain expectations."""
    work = tempfile.mkdtemp(prefix="partcc-ref-")
    try:
        with open(os.path.join(work, "prog.c"), "w", encoding="utf-8") as fh:
            fh.write(c_source)
        with open(os.path.join(work, "driver.c"), "w", encoding="utf-8") as fh:
            fh.write(driver)
        cp = _run([CC, "-O0", "-fwrapv", "-w", "prog.c", "driver.c", "-o", "ref"], work)
        if cp.returncode != 0:
            raise HarnessFailure(f"reference build failed:\n{cp.stderr[-2000:]}")
        results = []
        for i in range(n_cases):
            out, code, timed_out, err = run_case(os.path.join(work, "ref"), i, timeout)
            if timed_out or code != 0:
                raise HarnessFailure(f"reference run of case {i} failed ({code}): {err[-500:]}")
            results.append(parse_output(out))
        return results
    finally:
        shutil.rmtree(work, ignore_errors=True)


def module_outputs(module: str, driver: str, n_cases: int,
                   timeout: float = DEFAULT_TIMEOUT) -> list[str]:
    """Raw stdout of each case; a crash or timeout is rendered into the text."""
    work = tempfile.mkdtemp(prefix="partcc-out-")
    try:
        exe = assemble_link(module, driver, work)
        outs = []
        for i in range(n_cases):
            out, code, timed_out, _ = run_case(exe, i, timeout)
            if timed_out:
                out += "\n<timeout>"
            elif code != 0:
                out += f"\n<exit {code}>"
            outs.append(out)
        return outs
    finally:
        shutil.rmtree(work, ignore_errors=True)
