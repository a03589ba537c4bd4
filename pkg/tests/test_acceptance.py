"""Every acceptance criterion at its stated tolerance; one pass/fail line per criterion.

Run directly (``python3 tests/test_acceptance.py``) for the full table.
"""
import pytest

from casimir_plates import acceptance

SUMMARY = []
_CTX = {}


def _context():
    if "ctx" not in _CTX:
        _CTX["ctx"] = acceptance.Context()
    return _CTX["ctx"]


@pytest.mark.parametrize("entry", acceptance.CRITERIA, ids=[f"c{c[0]}_{c[1]}" for c in acceptance.CRITERIA])
def test_criterion(entry):
    res = acceptance.run_criterion(entry, _context())
    line = f"criterion {res.number:>2} {res.key:<10} {'PASS' if res.passed else 'FAIL'}"
    SUMMARY.append(line)
    print(line)
    assert res.passed, acceptance.format_criterion(res)


if __name__ == "__main__":
    import sys

    results = acceptance.run_acceptance(progress=lambda r: print(acceptance.format_criterion(r)))
    for r in results:
        print(f"criterion {r.number:>2} {r.key:<10} {'PASS' if r.passed else 'FAIL'}")
    sys.exit(0 if all(r.passed for r in results) else 1)
