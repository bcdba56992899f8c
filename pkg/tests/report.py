"""Collects one verdict line per acceptance criterion for the terminal summary."""

CRITERIA = {
    1: "bound formula vs 50-digit reference",
    2: "zero-training-error collapse",
    3: "bound monotonicity",
    4: "min-norm least squares",
    5: "SVM optimality",
    6: "network gradient check",
    7: "LS interpolation threshold",
    8: "SVM threshold vs support vectors",
    9: "double-descent shape",
    10: "bound tracks test error",
    11: "label-noise effects",
    12: "sample-wise non-monotonicity",
    13: "network second descent",
    14: "manifest replay determinism",
}

RESULTS: dict[int, tuple[bool, str]] = {}


def record(k: int, ok: bool, detail: str) -> bool:
    RESULTS[k] = (bool(ok), detail)
    print(line(k))
    return ok


def line(k: int) -> str:
    if k not in RESULTS:
        return f"criterion {k:2d} [ERROR] {CRITERIA[k]}: no verdict (test errored or was not run)"
    ok, detail = RESULTS[k]
    return f"criterion {k:2d} [{'PASS' if ok else 'FAIL'}] {CRITERIA[k]}: {detail}"
