"""Command-line front end.

    bernstein basis|operator|scan SPEC.json [--out DIR] [--grid N]

Exit codes: 0 success, 2 spec/parse error, 3 infeasible construction,
4 numerical failure.  On failure an ``error.json`` is written to the output
directory and echoed to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import errors
from .basis import build_bernstein_basis, verify_nonneg, verify_zero_orders
from .chain import chain_data
from .expspace import (POLY_EXP, POLY_EXP_COS, POLY_EXP_SIN, ExpSpace, Interval,
                       Spectrum, verify_ect_heuristic)
from .fixtures import counterexample_scan
from .operator import apply_csv, build_operator, residual_report

EXIT_OK, EXIT_SPEC, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4


class SpecError(Exception):
    pass


def _member(space, kind, j, alpha, beta=0.0):
    try:
        return space.member(kind, j, alpha, beta)
    except KeyError as exc:
        raise SpecError(str(exc.args[0])) from None


def parse_function(space: ExpSpace, value):
    """A preset name or an explicit coefficient vector, as a space element."""
    if isinstance(value, list):
        if len(value) != space.dim or not all(isinstance(v, (int, float)) for v in value):
            raise SpecError(f"coefficient vector must hold {space.dim} numbers")
        return space.element(value)
    if not isinstance(value, str):
        raise SpecError(f"cannot parse function {value!r}")
    if value == "one":
        return _member(space, POLY_EXP, 0, 0.0)
    if value == "x":
        return _member(space, POLY_EXP, 1, 0.0)
    if value == "cos":
        return _member(space, POLY_EXP_COS, 0, 0.0, 1.0)
    if value == "sin":
        return _member(space, POLY_EXP_SIN, 0, 0.0, 1.0)
    if value == "one+x-cos":
        return (_member(space, POLY_EXP, 0, 0.0) + _member(space, POLY_EXP, 1, 0.0)
                - _member(space, POLY_EXP_COS, 0, 0.0, 1.0))
    for prefix, j in (("exp:", 0), ("xexp:", 1)):
        if value.startswith(prefix):
            try:
                lam = float(value[len(prefix):])
            except ValueError:
                raise SpecError(f"bad exponent in {value!r}") from None
            return _member(space, POLY_EXP, j, lam)
    raise SpecError(f"unknown preset {value!r}")


EXTRA_TARGETS = {
    "x^2": lambda t: np.asarray(t, dtype=float) ** 2,
}


def parse_target(space: ExpSpace, iv: Interval, value):
    """Function handle for the optional B_n f dump."""
    if value in EXTRA_TARGETS:
        return EXTRA_TARGETS[value]
    if value == "abs-mid":
        mid = 0.5 * (iv.a + iv.b)
        return lambda t: np.abs(np.asarray(t, dtype=float) - mid)
    return parse_function(space, value)


def load_spec(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"cannot read {path}: {exc}") from None
    if not isinstance(data, dict):
        raise SpecError("spec must be a JSON object")
    return data


def _problem(data: dict):
    try:
        spectrum = Spectrum.from_json(data["spectrum"])
        space = ExpSpace(spectrum)
        iv = Interval(float(data["interval"]["a"]), float(data["interval"]["b"]))
    except errors.ConjugationViolation as exc:
        raise SpecError(str(exc)) from None
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"bad spectrum/interval: {exc!r}") from None
    return space, iv


def _write(out: Path, name: str, text: str):
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_basis(data: dict, out: Path, grid: int) -> int:
    space, iv = _problem(data)
    tol = data.get("tolerances", {})
    basis = build_bernstein_basis(space, iv, rank_tol=tol.get("rank", 1e-10))
    ok, resid = verify_zero_orders(basis)
    nonneg = verify_nonneg(basis, max(grid, 50 * (basis.n + 1)))
    seed = int(os.environ.get("BERNSTEIN_SEED", "0"))
    ect = verify_ect_heuristic(space.spectrum, iv, trials=int(data.get("ect_trials", 200)),
                               seed=seed)
    _write(out, "basis.csv", basis.to_csv(iv.grid(grid)))
    _write(out, "basis.json", _dump({
        "spectrum": space.spectrum.to_json(),
        "interval": {"a": iv.a, "b": iv.b},
        "basis_functions": [f.label() for f in space.functions],
        "coefficients": [[float(v) for v in row] for row in basis.coeffs],
        "zero_orders_ok": ok,
        "zero_order_residual": resid,
        "nonnegative": [bool(v) for v in nonneg.global_ok],
        "locally_nonnegative": [bool(v) for v in nonneg.local_a & nonneg.local_b],
        "ect_heuristic": {"ok": ect.ok, "max_zeros": ect.max_zeros, "trials": ect.trials,
                          "seed": seed},
        "warnings": basis.warnings,
    }))
    return EXIT_OK


def cmd_operator(data: dict, out: Path, grid: int) -> int:
    space, iv = _problem(data)
    if "f0" not in data or "f1" not in data:
        raise SpecError("operator needs f0 and f1")
    f0 = parse_function(space, data["f0"])
    f1 = parse_function(space, data["f1"])
    target = parse_target(space, iv, data["apply"]) if "apply" in data else None
    tol = data.get("tolerances", {})
    try:
        op = build_operator(space, iv, f0, f1, clamp_tol=tol.get("clamp", 1e-10),
                            expansion_tol=tol.get("expansion", 1e-8))
    except errors.Infeasible as exc:
        _write(out, "operator.json", _dump({"feasible": False,
                                            "report": exc.report.to_json()}))
        raise
    res = residual_report(op, grid)
    result = op.to_json()
    result["feasible"] = True
    result["residuals"] = {"f0": res.res_f0, "f1": res.res_f1, "positive": res.positive}
    try:
        result["chain"] = chain_data(op.basis, f0, f1).to_json()
    except errors.BernsteinError as exc:
        result["chain"] = {"error": str(exc)}
    _write(out, "operator.json", _dump(result))
    if target is not None:
        _write(out, "apply.csv", apply_csv(op, target, iv.grid(grid)))
    return EXIT_OK


def cmd_scan(data: dict, out: Path, grid: int) -> int:
    try:
        scan = data["scan"]
        b_min, b_max = float(scan["b_min"]), float(scan["b_max"])
        steps = int(scan.get("steps", 50))
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"bad scan block: {exc!r}") from None
    try:
        result = counterexample_scan(b_min, b_max, steps)
    except errors.OutOfRange as exc:
        raise SpecError(str(exc)) from None
    _write(out, "scan.csv", result.to_csv())
    return EXIT_OK


COMMANDS = {"basis": cmd_basis, "operator": cmd_operator, "scan": cmd_scan}


def _fail(out: Path, code: int, kind: str, message: str, extra=None) -> int:
    payload = {"error": kind, "message": message, "exit_code": code}
    if extra:
        payload.update(extra)
    text = _dump(payload)
    try:
        _write(out, "error.json", text)
    except OSError:
        pass
    sys.stderr.write(text)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bernstein", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("spec")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--grid", type=int, default=None, help="grid points for dumps")
    args = parser.parse_args(argv)
    out = Path(args.out)
    try:
        data = load_spec(args.spec)
        grid = args.grid or int(data.get("grid", 1001))
        if grid < 2:
            raise SpecError("grid must be at least 2")
        return COMMANDS[args.command](data, out, grid)
    except SpecError as exc:
        return _fail(out, EXIT_SPEC, "SpecError", str(exc))
    except errors.PreconditionFailed as exc:
        return _fail(out, EXIT_SPEC, type(exc).__name__, str(exc))
    except errors.Infeasible as exc:
        return _fail(out, EXIT_INFEASIBLE, "Infeasible", str(exc),
                     {"report": exc.report.to_json()})
    except errors.RatioOutOfRange as exc:
        return _fail(out, EXIT_INFEASIBLE, "RatioOutOfRange", str(exc), {"k": exc.k})
    except (errors.BernsteinError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail(out, EXIT_NUMERIC, type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
