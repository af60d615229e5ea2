"""Polynomial expressions in z_1..z_n and conj(z_1)..conj(z_n).

A small DSL used to define maps and defining functions with machine-exact
second-order jets.  Grammar::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' uint)?
    atom   := number | number 'i' | 'i' | 'z' uint
            | 'conj(' expr ')' | 're(' expr ')' | 'im(' expr ')'
            | 'abs2(' expr ')' | '(' expr ')'

The builtins are desugared at parse time (``re(e) = (e + conj(e))/2``,
``im(e) = (e - conj(e))/(2i)``, ``abs2(e) = e * conj(e)``, with ``conj``
pushed down to the leaves), so a parsed tree contains only constants,
variables, conjugated variables, negation, sums, products and integer
powers.  Differentiation with respect to z_j treats conjugated variables
as constants and vice versa, which keeps all jets exact up to rounding.

Trees are immutable and hashable; parsing, printing, evaluation and
differentiation are pure functions.
"""

from __future__ import annotations

import functools
import json
import re as _re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DimensionError, ParseError
from .wirtinger import MapJet2, ScalarJet2, as_cvec

MAX_EXPONENT = 16

Expr = Union["Const", "Var", "ConjVar", "Neg", "Sum", "Prod", "Pow"]


@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class ConjVar:
    index: int


@dataclass(frozen=True)
class Neg:
    arg: Expr


@dataclass(frozen=True)
class Sum:
    terms: tuple


@dataclass(frozen=True)
class Prod:
    factors: tuple


@dataclass(frozen=True)
class Pow:
    base: Expr
    exponent: int


_ZERO = Const(0j)
_ONE = Const(1 + 0j)


# ---------------------------------------------------------------------------
# Smart constructors.  They flatten nested sums/products, fold constants and
# drop neutral elements so that any tree built through them prints and
# reparses to a structurally identical tree.

def make_neg(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(-e.value)
    if isinstance(e, Neg):
        return e.arg
    return Neg(e)


def make_sum(terms) -> Expr:
    flat: list[Expr] = []
    for t in terms:
        if isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    out: list[Expr] = []
    const_at: int | None = None
    acc = 0j
    for t in flat:
        if isinstance(t, Const):
            if t.value == 0:
                continue
            acc += t.value
            if const_at is None:
                const_at = len(out)
                out.append(t)
            else:
                out[const_at] = Const(acc)
        else:
            out.append(t)
    if const_at is not None:
        out[const_at] = Const(acc)
        if acc == 0:
            out.pop(const_at)
    if not out:
        return _ZERO
    if len(out) == 1:
        return out[0]
    return Sum(tuple(out))


def make_prod(factors) -> Expr:
    flat: list[Expr] = []
    for f in factors:
        if isinstance(f, Prod):
            flat.extend(f.factors)
        else:
            flat.append(f)
    out: list[Expr] = []
    const_at: int | None = None
    acc = 1 + 0j
    for f in flat:
        if isinstance(f, Const):
            if f.value == 0:
                return _ZERO
            acc *= f.value
            if const_at is None:
                const_at = len(out)
                out.append(f)
            else:
                out[const_at] = Const(acc)
        else:
            out.append(f)
    if const_at is not None:
        out[const_at] = Const(acc)
        if acc == 1:
            out.pop(const_at)
    if not out:
        return _ONE
    if len(out) == 1:
        return out[0]
    return Prod(tuple(out))


def make_pow(base: Expr, exponent: int) -> Expr:
    if exponent < 0:
        raise ValueError("exponent must be non-negative")
    if exponent > MAX_EXPONENT:
        raise ValueError(f"exponent {exponent} exceeds limit {MAX_EXPONENT}")
    if exponent == 0:
        return _ONE
    if exponent == 1:
        return base
    if isinstance(base, Const):
        return Const(base.value**exponent)
    return Pow(base, exponent)


def conj_expr(e: Expr) -> Expr:
    """Conjugation pushed down to the leaves."""
    if isinstance(e, Const):
        return Const(e.value.conjugate())
    if isinstance(e, Var):
        return ConjVar(e.index)
    if isinstance(e, ConjVar):
        return Var(e.index)
    if isinstance(e, Neg):
        return make_neg(conj_expr(e.arg))
    if isinstance(e, Sum):
        return make_sum(conj_expr(t) for t in e.terms)
    if isinstance(e, Prod):
        return make_prod(conj_expr(f) for f in e.factors)
    if isinstance(e, Pow):
        return make_pow(conj_expr(e.base), e.exponent)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# Parser.

_NUMBER_RE = _re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_UINT_RE = _re.compile(r"\d+")
_BUILTINS = ("conj", "re", "im", "abs2")


class _Parser:
    def __init__(self, text: str, n: int):
        self.text = text
        self.n = n
        self.pos = 0

    def error(self, message: str, expected=()) -> ParseError:
        return ParseError(message, self.pos, expected)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        self.skip_ws()
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}", {ch})
        self.pos += 1

    def parse(self) -> Expr:
        e = self.parse_expr()
        self.skip_ws()
        if self.pos != len(self.text):
            raise self.error("trailing input", {"+", "-", "*", "^", "end"})
        return e

    def parse_expr(self) -> Expr:
        self.skip_ws()
        terms = []
        sign = ""
        if self.peek() in ("+", "-"):
            sign = self.peek()
            self.pos += 1
        first = self.parse_term()
        terms.append(make_neg(first) if sign == "-" else first)
        while True:
            self.skip_ws()
            op = self.peek()
            if op not in ("+", "-"):
                break
            self.pos += 1
            t = self.parse_term()
            terms.append(make_neg(t) if op == "-" else t)
        return make_sum(terms)

    def parse_term(self) -> Expr:
        factors = [self.parse_factor()]
        while True:
            self.skip_ws()
            if self.peek() != "*":
                break
            self.pos += 1
            factors.append(self.parse_factor())
        return make_prod(factors)

    def parse_factor(self) -> Expr:
        atom = self.parse_atom()
        self.skip_ws()
        if self.peek() == "^":
            self.pos += 1
            self.skip_ws()
            m = _UINT_RE.match(self.text, self.pos)
            if not m:
                raise self.error("expected exponent", {"uint"})
            k = int(m.group())
            if k > MAX_EXPONENT:
                raise self.error(f"exponent {k} exceeds limit {MAX_EXPONENT}")
            self.pos = m.end()
            return make_pow(atom, k)
        return atom

    def parse_atom(self) -> Expr:
        self.skip_ws()
        ch = self.peek()
        if not ch:
            raise self.error("unexpected end of input", {"atom"})

        if ch == "(":
            self.pos += 1
            e = self.parse_expr()
            self.expect(")")
            return e

        m = _NUMBER_RE.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            value = float(m.group())
            if self.peek() == "i":
                self.pos += 1
                return Const(value * 1j)
            return Const(complex(value))

        if ch == "i" and not self._starts_with("im("):
            self.pos += 1
            return Const(1j)

        if ch == "z":
            start = self.pos
            self.pos += 1
            m = _UINT_RE.match(self.text, self.pos)
            if not m:
                raise self.error("expected variable index after 'z'", {"uint"})
            index = int(m.group())
            self.pos = m.end()
            if not 1 <= index <= self.n:
                self.pos = start
                raise self.error(f"variable z{index} out of range for dimension {self.n}")
            return Var(index)

        for name in _BUILTINS:
            if self._starts_with(name + "("):
                self.pos += len(name) + 1
                inner = self.parse_expr()
                self.expect(")")
                return self._desugar(name, inner)

        raise self.error(f"unexpected character {ch!r}", {"atom"})

    def _starts_with(self, s: str) -> bool:
        return self.text.startswith(s, self.pos)

    @staticmethod
    def _desugar(name: str, e: Expr) -> Expr:
        if name == "conj":
            return conj_expr(e)
        if name == "re":
            return make_prod((Const(0.5 + 0j), make_sum((e, conj_expr(e)))))
        if name == "im":
            return make_prod((Const(-0.5j), make_sum((e, make_neg(conj_expr(e))))))
        if name == "abs2":
            return make_prod((e, conj_expr(e)))
        raise AssertionError(name)


def parse(text: str, n: int) -> Expr:
    """Parse an expression over z_1..z_n; returns the desugared tree."""
    if n < 1:
        raise DimensionError(f"dimension must be >= 1, got {n}")
    return _Parser(text, n).parse()


# ---------------------------------------------------------------------------
# Printer.  to_string(e) reparses to a tree structurally equal to e for any
# tree built through the smart constructors.

def _fmt_float(x: float) -> str:
    s = repr(float(x))
    return s


def _fmt_const(c: complex) -> str:
    re_, im_ = c.real, c.imag
    if im_ == 0.0:
        s = _fmt_float(re_)
        return f"({s})" if re_ < 0 else s
    if re_ == 0.0:
        s = _fmt_float(im_) + "i"
        return f"({s})" if im_ < 0 else s
    op = "-" if im_ < 0 else "+"
    return f"({_fmt_float(re_)} {op} {_fmt_float(abs(im_))}i)"


def _print_factor(e: Expr) -> str:
    if isinstance(e, (Sum, Neg)):
        return f"({to_string(e)})"
    return to_string(e)


def _print_base(e: Expr) -> str:
    if isinstance(e, (Sum, Neg, Prod, Pow)):
        return f"({to_string(e)})"
    return to_string(e)


def to_string(e: Expr) -> str:
    """Textual form of a tree; parse(to_string(e), n) == e."""
    if isinstance(e, Const):
        return _fmt_const(e.value)
    if isinstance(e, Var):
        return f"z{e.index}"
    if isinstance(e, ConjVar):
        return f"conj(z{e.index})"
    if isinstance(e, Neg):
        return f"-{_print_factor(e.arg)}"
    if isinstance(e, Sum):
        parts = [to_string(e.terms[0]) if not isinstance(e.terms[0], Neg)
                 else f"-{_print_factor(e.terms[0].arg)}"]
        for t in e.terms[1:]:
            if isinstance(t, Neg):
                parts.append(f" - {_print_factor(t.arg)}")
            else:
                parts.append(f" + {to_string(t)}")
        return "".join(parts)
    if isinstance(e, Prod):
        return "*".join(_print_factor(f) for f in e.factors)
    if isinstance(e, Pow):
        return f"{_print_base(e.base)}^{e.exponent}"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation and differentiation.

def evaluate(e: Expr, z) -> complex:
    """Evaluate at a point of C^n."""
    z = as_cvec(z)
    return _eval(e, z)


def _eval(e: Expr, z: np.ndarray) -> complex:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        if e.index > z.size:
            raise DimensionError(f"z{e.index} out of range for point of dimension {z.size}")
        return complex(z[e.index - 1])
    if isinstance(e, ConjVar):
        if e.index > z.size:
            raise DimensionError(f"z{e.index} out of range for point of dimension {z.size}")
        return complex(z[e.index - 1]).conjugate()
    if isinstance(e, Neg):
        return -_eval(e.arg, z)
    if isinstance(e, Sum):
        return sum((_eval(t, z) for t in e.terms), 0j)
    if isinstance(e, Prod):
        out = 1 + 0j
        for f in e.factors:
            out *= _eval(f, z)
        return out
    if isinstance(e, Pow):
        return _eval(e.base, z) ** e.exponent
    raise TypeError(f"not an expression node: {e!r}")


@functools.lru_cache(maxsize=65536)
def diff(e: Expr, index: int, conjugated: bool) -> Expr:
    """d e / d z_index (or d zbar_index when conjugated)."""
    if isinstance(e, Const):
        return _ZERO
    if isinstance(e, Var):
        return _ONE if (not conjugated and e.index == index) else _ZERO
    if isinstance(e, ConjVar):
        return _ONE if (conjugated and e.index == index) else _ZERO
    if isinstance(e, Neg):
        return make_neg(diff(e.arg, index, conjugated))
    if isinstance(e, Sum):
        return make_sum(diff(t, index, conjugated) for t in e.terms)
    if isinstance(e, Prod):
        terms = []
        for i, f in enumerate(e.factors):
            d = diff(f, index, conjugated)
            if d == _ZERO:
                continue
            terms.append(make_prod(e.factors[:i] + (d,) + e.factors[i + 1:]))
        return make_sum(terms)
    if isinstance(e, Pow):
        d = diff(e.base, index, conjugated)
        if d == _ZERO:
            return _ZERO
        return make_prod((Const(complex(e.exponent)), make_pow(e.base, e.exponent - 1), d))
    raise TypeError(f"not an expression node: {e!r}")


def max_var_index(e: Expr) -> int:
    if isinstance(e, (Var, ConjVar)):
        return e.index
    if isinstance(e, Neg):
        return max_var_index(e.arg)
    if isinstance(e, Sum):
        return max((max_var_index(t) for t in e.terms), default=0)
    if isinstance(e, Prod):
        return max((max_var_index(f) for f in e.factors), default=0)
    if isinstance(e, Pow):
        return max_var_index(e.base)
    return 0


def _canonical(e: Expr) -> Expr:
    """Sort commutative children; used only for structural comparisons."""
    if isinstance(e, Neg):
        return Neg(_canonical(e.arg))
    if isinstance(e, Sum):
        return Sum(tuple(sorted((_canonical(t) for t in e.terms), key=to_string)))
    if isinstance(e, Prod):
        return Prod(tuple(sorted((_canonical(f) for f in e.factors), key=to_string)))
    if isinstance(e, Pow):
        return Pow(_canonical(e.base), e.exponent)
    return e


def is_real_valued(e: Expr, n: int, tol: float = 1e-12, points: int = 64) -> bool:
    """Check e == conj(e), structurally after canonical ordering when
    possible, otherwise at random points."""
    if _canonical(conj_expr(e)) == _canonical(e):
        return True
    rng = np.random.default_rng(0x5EA1)
    for _ in range(points):
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = _eval(e, z)
        if abs(v.imag) > tol * (1.0 + abs(v)):
            return False
    return True


# ---------------------------------------------------------------------------
# Map and scalar specifications.

@dataclass(frozen=True)
class PolyMapSpec:
    """A polynomial map C^n -> C^n given by one expression per component."""

    n: int
    components: tuple

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError(f"dimension must be >= 1, got {self.n}")
        comps = tuple(self.components)
        if len(comps) != self.n:
            raise DimensionError(f"expected {self.n} components, got {len(comps)}")
        for c in comps:
            if max_var_index(c) > self.n:
                raise DimensionError("component refers to a variable beyond the dimension")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_strings(cls, texts, n: int | None = None) -> "PolyMapSpec":
        texts = list(texts)
        n = n if n is not None else len(texts)
        return cls(n, tuple(parse(t, n) for t in texts))

    @classmethod
    def from_json(cls, text: str) -> "PolyMapSpec":
        data = json.loads(text)
        return cls.from_strings(data["components"], int(data["n"]))

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "components": [to_string(c) for c in self.components]})

    def __call__(self, z) -> np.ndarray:
        z = as_cvec(z, self.n)
        return np.array([_eval(c, z) for c in self.components])


@dataclass(frozen=True)
class ScalarSpec:
    """A real-valued polynomial expression (a defining function candidate)."""

    n: int
    expr: Expr
    real_valued: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError(f"dimension must be >= 1, got {self.n}")
        if max_var_index(self.expr) > self.n:
            raise DimensionError("expression refers to a variable beyond the dimension")
        if self.real_valued and not is_real_valued(self.expr, self.n):
            raise ValueError("expression is not real-valued")

    @classmethod
    def from_string(cls, text: str, n: int) -> "ScalarSpec":
        return cls(n, parse(text, n))

    @classmethod
    def from_json(cls, text: str) -> "ScalarSpec":
        data = json.loads(text)
        return cls.from_string(data["expr"], int(data["n"]))

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "expr": to_string(self.expr)})

    def __call__(self, z) -> float:
        z = as_cvec(z, self.n)
        return float(_eval(self.expr, z).real)


@functools.lru_cache(maxsize=4096)
def _map_derivatives(spec: PolyMapSpec):
    n = spec.n
    dz = [[diff(c, a + 1, False) for a in range(n)] for c in spec.components]
    dzb = [[diff(c, b + 1, True) for b in range(n)] for c in spec.components]
    mixed = [[[diff(dz[k][a], b + 1, True) for b in range(n)] for a in range(n)]
             for k in range(n)]
    return dz, dzb, mixed


def analytic_map_jet(spec: PolyMapSpec, z) -> MapJet2:
    """Exact second-order jet of a DSL map (symbolic differentiation, then evaluation)."""
    z = as_cvec(z, spec.n)
    n = spec.n
    dz, dzb, dmx = _map_derivatives(spec)
    value = np.array([_eval(c, z) for c in spec.components])
    jhol = np.array([[_eval(dz[k][a], z) for a in range(n)] for k in range(n)])
    janti = np.array([[_eval(dzb[k][a], z) for a in range(n)] for k in range(n)])
    mixed = np.array([[[_eval(dmx[k][a][b], z) for b in range(n)] for a in range(n)]
                      for k in range(n)])
    return MapJet2(value, jhol, janti, mixed)


@functools.lru_cache(maxsize=4096)
def _scalar_derivatives(spec: ScalarSpec):
    n = spec.n
    dz = [diff(spec.expr, j + 1, False) for j in range(n)]
    hzz = [[diff(dz[i], j + 1, False) for j in range(n)] for i in range(n)]
    hzzbar = [[diff(dz[i], j + 1, True) for j in range(n)] for i in range(n)]
    return dz, hzz, hzzbar

def analytic_scalar_jet(spec: ScalarSpec, z) -> ScalarJet2:
    """Exact second-order jet of a real-valued DSL expression."""
    if not spec.real_valued:
        raise ValueError("scalar jet requires a real-valued expression")
    z = as_cvec(z, spec.n)
    n = spec.n
    dze, hzze, hzzbare = _scalar_derivatives(spec)
    value = _eval(spec.expr, z).real
    dz = np.array([_eval(d, z) for d in dze])
    hzz = np.zeros((n, n), dtype=complex)
    hzzbar = np.zeros((n, n), dtype=complex)
    # fill the upper triangle and mirror: symmetry/Hermiticity hold exactly
    # in exact arithmetic, mirroring discards evaluation-order rounding
    for i in range(n):
        for j in range(i, n):
            hzz[i, j] = _eval(hzze[i][j], z)
            hzz[j, i] = hzz[i, j]
            v = _eval(hzzbare[i][j], z)
            if i == j:
                v = complex(v.real)
            hzzbar[i, j] = v
            hzzbar[j, i] = v.conjugate()
    return ScalarJet2(value, dz, hzz, hzzbar)


# ---------------------------------------------------------------------------
# Random generators (used by the test harnesses and the CLI self-tests).

def random_expr(rng, n: int, max_degree: int = 4, terms: int = 4,
                coeff_scale: float = 1.0) -> Expr:
    """Random polynomial in z_j, conj(z_j) with bounded total degree."""
    out = []
    for _ in range(terms):
        coeff = coeff_scale * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
        degree = int(rng.integers(0, max_degree + 1))
        factors: list[Expr] = [Const(coeff)]
        powers_z = np.zeros(n, dtype=int)
        powers_zb = np.zeros(n, dtype=int)
        for _ in range(degree):
            j = int(rng.integers(0, n))
            if rng.random() < 0.5:
                powers_z[j] += 1
            else:
                powers_zb[j] += 1
        for j in range(n):
            if powers_z[j]:
                factors.append(make_pow(Var(j + 1), int(powers_z[j])))
            if powers_zb[j]:
                factors.append(make_pow(ConjVar(j + 1), int(powers_zb[j])))
        out.append(make_prod(factors))
    return make_sum(out)


def random_map_spec(rng, n: int, max_degree: int = 2, terms: int = 3,
                    coeff_scale: float = 0.5, near_identity: bool = True) -> PolyMapSpec:
    """Random polynomial map; with ``near_identity`` the identity is added so
    the differential is generically invertible on the unit ball."""
    comps = []
    for k in range(n):
        e = random_expr(rng, n, max_degree=max_degree, terms=terms, coeff_scale=coeff_scale)
        if near_identity:
            e = make_sum((Var(k + 1), e))
        comps.append(e)
    return PolyMapSpec(n, tuple(comps))


def random_real_scalar_spec(rng, n: int, max_degree: int = 4, terms: int = 3,
                            coeff_scale: float = 1.0) -> ScalarSpec:
    """Random real-valued polynomial, built as e + conj(e)."""
    e = random_expr(rng, n, max_degree=max_degree, terms=terms, coeff_scale=coeff_scale)
    return ScalarSpec(n, make_sum((e, conj_expr(e))))
