import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aagate.seqlang import (
    BinOp,
    Delay,
    Name,
    Neg,
    Num,
    ParamDecl,
    Pulse,
    PulseProgram,
    SeqError,
    eval_expr,
    fig2_program,
    fig2_source,
    load_program,
    parse,
    render,
    resolve,
)
from aagate.sysmodel import CHLOROFORM
from conftest import CORPUS

FIG2_TEXT = (
    "param theta = pi/4\npulse a x -theta dur 5e-6\ndelay 1/(2*J)\n"
    "pulse a x 2*theta - pi dur 5e-6\ndelay 1/(2*J)\npulse a x pi - theta dur 5e-6"
)
TAU = 1 / (2 * 214.9)


def test_parse_fig2_text():
    prog = parse(FIG2_TEXT)
    assert prog.param_names == ["theta"]
    assert len(prog.events) == 5
    assert [type(e).__name__ for e in prog.events] == ["Pulse", "Delay", "Pulse", "Delay", "Pulse"]
    assert prog.events[0].angle == Neg(Name("theta"))


def test_bundled_program_matches_canonical_text():
    assert fig2_program() == parse(FIG2_TEXT)
    assert load_program(CORPUS / "fig2.seq") == fig2_program()


def test_parse_empty_and_comments():
    assert parse("") == PulseProgram()
    assert parse("# nothing\n   \n# here\n") == PulseProgram()


def test_crlf_and_trailing_comments():
    prog = parse("param theta = 1 # angle\r\ndelay theta*2  # wait\r\n")
    assert prog.events == (Delay(BinOp("*", Name("theta"), Num(2.0))),)


def test_bad_axis_reports_position():
    with pytest.raises(SeqError) as exc:
        parse("pulse a q 1.0")
    assert (exc.value.code, exc.value.line, exc.value.col) == ("bad-axis", 1, 9)


@pytest.mark.parametrize("axis", ["x", "y", "-x", "-y"])
def test_axes(axis):
    (ev,) = parse(f"pulse b {axis} pi/2").events
    assert ev.axis == axis and ev.channel == "b" and ev.duration is None


def test_spaced_minus_is_not_an_axis():
    with pytest.raises(SeqError) as exc:
        parse("pulse a - x pi")
    assert exc.value.code == "bad-axis"


def test_precedence_and_unary():
    assert eval_expr("2*theta - pi", {"theta": math.pi / 2}) == 0.0
    assert eval_expr("-2*-3 + 4/2", {}) == 8.0
    assert eval_expr("1 - 2 - 3", {}) == -4.0
    assert eval_expr("8/4/2", {}) == 1.0


def test_eval_examples():
    assert eval_expr("1/(2*J)", {"J": 214.9}) == pytest.approx(2.32666e-3, rel=1e-5)
    assert eval_expr("1/(2*J)", {"J": 214.9}) == 1 / (2 * 214.9)
    assert eval_expr("n*pi/16", {"n": 16}) == pytest.approx(math.pi, abs=1e-15)


def test_eval_errors():
    with pytest.raises(SeqError, match="unbound-identifier"):
        eval_expr("theta + 1", {})
    with pytest.raises(SeqError, match="division-by-zero"):
        eval_expr("1/(J - J)", {"J": 3.0})


def test_resolve_instantaneous():
    tl = resolve(fig2_program(), {"theta": math.pi / 4}, CHLOROFORM, instantaneous=True)
    assert [s.kind for s in tl.segments] == ["pulse", "delay", "pulse", "delay", "pulse"]
    assert [s.start for s in tl.segments] == [0.0, 0.0, TAU, TAU, 2 * TAU]
    assert tl.segments[1].duration == pytest.approx(2.32666e-3, rel=1e-5)
    assert tl.total_duration == pytest.approx(4.6533e-3, rel=1e-4)
    assert tl.total_duration == 2 * TAU


def test_resolve_finite_pulses():
    tl = resolve(fig2_program(), {}, CHLOROFORM)
    assert tl.total_duration == pytest.approx(4.6683e-3, rel=1e-4)
    assert tl.total_duration == pytest.approx(2 * TAU + 3 * 5e-6, abs=1e-15)
    ends = [s.start + s.duration for s in tl.segments]
    assert all(e == pytest.approx(s.start, abs=1e-18) for e, s in zip(ends[:-1], tl.segments[1:]))
    assert tl.instantaneous().total_duration == 2 * TAU


def test_resolve_negative_duration():
    with pytest.raises(SeqError) as exc:
        resolve(parse("delay 1 - 2"), {}, CHLOROFORM)
    assert exc.value.code == "negative-duration" and exc.value.line == 1


def test_resolve_rejects_unknown_override():
    with pytest.raises(SeqError, match="unknown-param"):
        resolve(fig2_program(), {"phi": 1.0}, CHLOROFORM)


def test_resolve_signed_angles_preserved():
    theta = 0.3
    tl = resolve(fig2_program(), {"theta": theta}, CHLOROFORM)
    assert tl.flip_angles == pytest.approx([-theta, 2 * theta - math.pi, math.pi - theta])


@pytest.mark.parametrize("n", range(17))
def test_flip_angles_close_the_frame(n):
    tl = resolve(fig2_program(), {"theta": n * math.pi / 16}, CHLOROFORM)
    assert abs(sum(tl.flip_angles)) < 1e-15


def test_resolve_deterministic():
    a = resolve(fig2_program(), {"theta": 0.123}, CHLOROFORM)
    b = resolve(fig2_program(), {"theta": 0.123}, CHLOROFORM)
    assert a == b


def test_render_round_trip_fig2():
    prog = parse(fig2_source())
    assert parse(render(prog)) == prog


# ---- property: parse(render(ast)) == ast -------------------------------

names = st.sampled_from(["theta", "phi", "pi", "J"])
numbers = st.floats(0, 1e6, allow_nan=False, allow_infinity=False)
exprs = st.recursive(
    st.one_of(numbers.map(Num), names.map(Name)),
    lambda inner: st.one_of(
        inner.map(Neg),
        st.builds(BinOp, st.sampled_from("+-*/"), inner, inner),
    ),
    max_leaves=12,
)


@st.composite
def programs(draw):
    params = (ParamDecl("theta", draw(exprs.filter(lambda e: "theta" not in repr(e) and "phi" not in repr(e)))),
              ParamDecl("phi", draw(exprs.filter(lambda e: "phi" not in repr(e)))))
    events = draw(st.lists(
        st.one_of(
            st.builds(Delay, exprs),
            st.builds(Pulse, st.sampled_from("ab"), st.sampled_from(["x", "y", "-x", "-y"]),
                      exprs, st.one_of(st.none(), exprs)),
        ),
        max_size=6,
    ))
    return PulseProgram(params, tuple(events))


@settings(max_examples=200, deadline=None)
@given(programs())
def test_render_round_trip_property(prog):
    assert parse(render(prog)) == prog


@settings(max_examples=100, deadline=None)
@given(exprs)
def test_render_preserves_value(expr):
    env = {"theta": 0.7, "phi": -1.3, "J": 214.9}
    prog = PulseProgram((ParamDecl("theta", Num(0.7)), ParamDecl("phi", Num(-1.3))), (Delay(expr),))
    reparsed = parse(render(prog)).events[0].duration
    try:
        want = eval_expr(expr, env)
    except SeqError:
        with pytest.raises(SeqError):
            eval_expr(reparsed, env)
        return
    got = eval_expr(reparsed, env)
    assert got == want or (np.isnan(got) and np.isnan(want))


# ---- malformed corpus ---------------------------------------------------

MALFORMED = sorted((CORPUS / "malformed").glob("*.seq"))


def _expected(path):
    head = path.read_text().splitlines()[0]
    code, pos = head.removeprefix("# expect:").split()
    line, col = pos.split(":")
    return code, int(line), int(col) if col else None


def test_corpus_size():
    assert len(MALFORMED) >= 10


@pytest.mark.parametrize("path", MALFORMED, ids=lambda p: p.stem)
def test_malformed_corpus(path):
    code, line, col = _expected(path)
    with pytest.raises(SeqError) as exc:
        resolve(load_program(path), {}, CHLOROFORM)
    assert exc.value.code == code
    assert exc.value.line == line
    if col is not None:
        assert exc.value.col == col
