import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atas.minilang import ErrorKind, Outcome, parse, run_concrete
from atas.symex import (
    Const, ErrorOutcome, ExploreBudget, Incomplete, InputDomain, IntExpr, Sat, StrLiteral, Sym,
    Unknown, Unsat, evaluate, evaluate_array, explore_paths, mk, propagate, solve_constraint,
)

from helpers import box_points, programs

n, m = Sym(0, "n"), Sym(1, "m")
D1 = InputDomain(((1, 1000),))


# -- expressions ------------------------------------------------------------------

def test_mk_folds_constants_and_identities():
    assert mk("+", Const(2), Const(3)) == Const(5)
    assert mk("*", n, Const(1)) == n
    assert mk("*", n, Const(0)) == Const(0)
    assert mk("neg", mk("neg", n)) == n
    assert mk("==", n, n) == Const(1)
    assert mk("!", mk("<", n, Const(3))) == mk(">=", n, Const(3))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(["+", "-", "*", "/", "%", "<", "<=", "==", "!=", "&&", "||"]),
       st.integers(-50, 50), st.integers(-50, 50))
def test_scalar_and_vector_evaluation_agree(op, a, b):
    e = mk(op, mk("+", n, Const(a)), mk("-", m, Const(b)))
    cols = (np.arange(-5, 6, dtype=np.int64).repeat(11), np.tile(np.arange(-5, 6, dtype=np.int64), 11))
    vec = evaluate_array(e, cols)
    for k in range(len(cols[0])):
        assert int(vec[k] if np.ndim(vec) else vec) == evaluate(e, (int(cols[0][k]), int(cols[1][k])))


def test_min_int_division_wraps():
    e = mk("/", n, Const(-1))
    assert evaluate(e, (-(2**63),)) == -(2**63)


# -- solver -----------------------------------------------------------------------

def test_solver_finds_cube_square_witness():
    res = solve_constraint(mk("!=", mk("*", n, n), mk("*", mk("*", n, n), n)), D1)
    assert res == Sat((2,))


def test_solver_unsat_outside_domain():
    assert isinstance(solve_constraint(mk(">", n, Const(1000)), D1), Unsat)


def test_solver_two_variables():
    dom = InputDomain(((1, 6), (1, 6)))
    c = (mk("==", mk("+", n, m), Const(7)), mk("==", mk("*", n, m), Const(12)))
    assert solve_constraint(c, dom) == Sat((3, 4))


def test_solver_cap_gives_unknown():
    dom = InputDomain(((0, 999), (0, 999)))
    # bounds cannot prune this, and the first ten points do not satisfy it
    c = mk("==", mk("%", mk("*", n, m), Const(997)), Const(996))
    assert isinstance(solve_constraint(c, dom, cap=10), Unknown)
    assert isinstance(solve_constraint(c, dom), Sat)


def test_propagate_narrows_box():
    dom = InputDomain(((0, 100), (0, 100)))
    box = propagate((mk("<", n, Const(7)), mk(">", n, Const(0)), mk("<=", mk("+", n, m), Const(7))), dom)
    assert box[0] == (1, 6) and box[1][1] <= 6


def test_input_domain_validation():
    with pytest.raises(ValueError):
        InputDomain(((5, 1),))
    assert InputDomain(((1, 3), (0, 1))).size == 6


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(["+", "-", "*", "/", "%"]), st.sampled_from(["<", "<=", "==", "!=", ">", ">="]),
       st.integers(-20, 20), st.integers(-6, 6))
def test_propagation_never_drops_solutions(arith, rel, c, k):
    dom = InputDomain(((-6, 6), (-6, 6)))
    e = mk(rel, mk(arith, mk("+", n, Const(k)), m), Const(c))
    box = propagate((e,), dom)
    for pt in box_points(dom.bounds):
        if evaluate(e, pt):
            assert box is not None
            assert all(lo <= v <= hi for v, (lo, hi) in zip(pt, box))


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["+", "-", "*", "/", "%"]), st.integers(-10, 10), st.integers(-5, 5))
def test_solver_returns_least_witness(arith, c, k):
    dom = InputDomain(((-4, 4), (-4, 4)))
    e = mk("==", mk(arith, n, mk("+", m, Const(k))), Const(c))
    expected = next((pt for pt in box_points(dom.bounds) if evaluate(e, pt)), None)
    res = solve_constraint(e, dom)
    if expected is None:
        assert isinstance(res, Unsat)
    else:
        assert res == Sat(expected)


# -- exploration ------------------------------------------------------------------

def test_square_has_one_path():
    ex = explore_paths(parse("read(n); print(n * n);"), D1)
    assert ex.complete and len(ex.outcomes) == 1
    assert isinstance(ex.outcomes[0].output, IntExpr)


def test_two_way_branch():
    ex = explore_paths(parse("read(n); if (n > 5) print(1); else print(0);"), InputDomain(((1, 10),)))
    assert ex.complete and len(ex.outcomes) == 2
    assert [evaluate(o.output.expr, ()) for o in ex.outcomes] == [1, 0]


def test_infeasible_branch_is_pruned():
    src = "read(n); if (n > 5) { if (n > 100) print(2); else print(1); } else print(0);"
    ex = explore_paths(parse(src), InputDomain(((1, 10),)))
    assert ex.complete and len(ex.outcomes) == 2
    assert sorted(evaluate(o.output.expr, ()) for o in ex.outcomes) == [0, 1]


def test_division_forks_error_path():
    ex = explore_paths(parse("read(n); print(10 / (n - 1));"), D1)
    kinds = [o.output for o in ex.outcomes]
    assert ErrorOutcome(ErrorKind.DIVIDE_BY_ZERO) in kinds and len(kinds) == 2


def test_string_outputs():
    ex = explore_paths(parse('read(w); if (w % 2 == 0 && w > 2) { print("YES"); } else { print("NO"); }'),
                       InputDomain(((1, 100),)))
    assert {o.output for o in ex.outcomes} == {StrLiteral("YES"), StrLiteral("NO")}


def test_loop_over_symbolic_bound():
    src = "read(n); int s = 0; for (int i = 1; i <= n; i++) { s += i; } print(s);"
    ex = explore_paths(parse(src), InputDomain(((1, 10),)))
    assert ex.complete and len(ex.outcomes) == 10


def test_unroll_bound_marks_incomplete():
    src = "read(n); int s = 0; while (s < n) { s++; } print(s);"
    ex = explore_paths(parse(src), InputDomain(((0, 100),)), ExploreBudget(max_unroll=5))
    assert not ex.complete and Incomplete.UNROLL_BOUND in ex.reasons


def test_path_budget_marks_incomplete():
    src = "read(n); int s = 0; for (int i = 0; i < n; i++) { s += i; } print(s);"
    ex = explore_paths(parse(src), InputDomain(((0, 50),)), ExploreBudget(max_paths=3))
    assert not ex.complete and Incomplete.PATH_BUDGET in ex.reasons


def test_timeout_marks_incomplete():
    src = "read(n); int s = 0; for (int i = 0; i < n; i++) { s += i; } print(s);"
    ex = explore_paths(parse(src), InputDomain(((0, 5000),)), ExploreBudget(wall_clock_ms=1, max_unroll=10**6))
    assert not ex.complete and Incomplete.TIMEOUT in ex.reasons


def _outcome_key(out, pt):
    if isinstance(out, IntExpr):
        return (Outcome.INT, evaluate(out.expr, pt))
    if isinstance(out, StrLiteral):
        return (Outcome.STR, out.text)
    return (Outcome.ERROR, out.kind)


@settings(max_examples=150, deadline=None)
@given(programs())
def test_paths_partition_domain_and_predict_outputs(src):
    """With complete exploration, each input satisfies exactly one path, and
    that path's symbolic output is what the interpreter prints."""
    p = parse(src)
    dom = InputDomain(((-3, 3),) * p.arity)
    ex = explore_paths(p, dom)
    if not ex.complete:
        return
    for pt in box_points(dom.bounds):
        hits = [o for o in ex.outcomes if all(evaluate(c, pt) for c in o.condition)]
        assert len(hits) == 1, (src, pt)
        res = run_concrete(p, pt)
        assert _outcome_key(hits[0].output, pt) == (res.outcome, res.value)


@settings(max_examples=80, deadline=None)
@given(programs())
def test_witnesses_satisfy_their_paths(src):
    p = parse(src)
    dom = InputDomain(((-3, 3),) * p.arity)
    for o in explore_paths(p, dom).outcomes:
        assert dom.contains(o.witness)
        assert all(evaluate(c, o.witness) for c in o.condition)
