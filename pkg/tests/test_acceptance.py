"""All fourteen reproduction criteria, one test each.

Criterion 5 fails on the half-square entry: the stored principal-line
residues come from a reference formula that lacks a factor 1/log 2
relative to the closed form it is meant to describe. The mismatch is reported
rather than patched; test_half_square_stored_residue_factor pins down its
exact size.
"""
import math
import sys

import pytest

from fractalzeta import acceptance as ac
from fractalzeta import expr as ex
from fractalzeta import spray as sp

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

IDS = [c for c, *_ in ac.CRITERIA]


@pytest.fixture(scope="module")
def results():
    out = {r.cid: r for r in ac.run_all()}
    for cid in IDS:
        line = out[cid].line()
        print(line)
        ACCEPTANCE_LINES.append(line)
    return out


@pytest.mark.parametrize("cid", IDS)
def test_criterion(results, cid):
    r = results[cid]
    bad = [f"{i.name}: value={i.value} target={i.target} err={i.error:.3g} tol={i.tol}"
           for i in r.items if not i.passed]
    assert r.items, "criterion recorded no comparisons"
    assert r.passed, "; ".join(bad) or f"over the {r.budget}s budget ({r.seconds:.2f}s)"


@pytest.mark.parametrize("name,params", [t for t in ac.RESIDUE_TARGETS if t[0] != "half_square"])
def test_residue_table_entry(name, params):
    rows = ac.residue_errors(name, params)
    assert max(err for *_, err in rows) <= 1e-10


def test_half_square_stored_residue_factor():
    # computed residue = stored / log 2 on every nonreal principal pole, independently of k
    e = sp.catalog_get("half_square")
    for w, stored, label in e.residue_table(kmax=5):
        w = complex(w)
        if abs(w.imag) < 1e-9:
            continue
        got = ex.residue(e.zeta, w)
        contour = ex.laurent_coeffs(e.zeta, ex.ContourSpec(w, 1e-2), -1, -1)[0]
        assert abs(got - contour) <= 1e-9 * abs(got)
        assert abs(got * math.log(2) - complex(stored)) <= 1e-12 * abs(stored)


if __name__ == "__main__":
    res = ac.run_all()
    for r in res:
        print(r.line())
    sys.exit(0 if all(r.passed for r in res) else 1)
