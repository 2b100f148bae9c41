"""Vacuum correlators of Weyl-dressed dichotomic operators.

Each party's operator is ``1 - 2 P`` with ``P`` the vacuum projector moved
by a Weyl unitary, either ``W_h^dag |0><0| W_h`` (orientation ``W^dag F W``)
or ``W_h |0><0| W_h^dag`` (``W F W^dag``). Writing both as
``W_e^dag |0><0| W_e`` with ``e = +h`` or ``e = -h``, every vacuum
expectation of a product of such operators expands into chains

    <0|P_1 ... P_k|0> = <0|W_{e_1}^dag|0> <0|W_{e_1} W_{e_2}^dag|0> ... <0|W_{e_k}|0>

and the Weyl relation ``W_a W_b = exp(-i Delta(a, b) / 2) W_{a+b}`` together
with ``<0|W_h|0> = exp(-H(h, h) / 2)`` closes each chain on the bilinears.
For signs ``s_i = +-1`` the chain equals

    exp(-sum_i H(h_i, h_i) + sum_consecutive s_i s_j H(h_i, h_j))
        * exp(i/2 sum_consecutive s_i s_j Delta(h_i, h_j)).

:func:`expand_word` performs this expansion symbolically; the closed forms
below are checked against it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Orientation",
    "Dressing",
    "FormulaMode",
    "BoundCheck",
    "MissingEntryError",
    "BilinearTable",
    "Factor",
    "DressedProjectorWord",
    "Term",
    "expand_word",
    "evaluate_terms",
    "reduce_vacuum_expectation",
    "party_word",
    "two_op_correlator",
    "chsh_correlator",
    "three_op_correlator",
    "mermin3_correlator",
    "cluster_quantity",
    "table_from_matrix",
    "CorrelatorReport",
    "classify_bound",
    "TSIRELSON",
]

TSIRELSON = 2.0 * math.sqrt(2.0)
BOUND_SLACK = 1e-6


class Orientation(str, Enum):
    """How the Weyl unitary dresses ``F = 1 - 2|0><0|``."""

    DAGGER_F = "W^dag F W"
    F_DAGGER = "W F W^dag"

    @property
    def sign(self) -> int:
        return 1 if self is Orientation.DAGGER_F else -1


class Dressing(str, Enum):
    """Orientation assignment along a word of operators.

    ``alternating`` dresses the factors at even positions as ``W^dag F W``
    and those at odd positions as ``W F W^dag`` (Alice and Charlie against
    Bob in ``A B C``). ``uniform`` dresses every factor as ``W^dag F W``.
    The two differ by the sign of every cross bilinear between adjacent
    factors.
    """

    ALTERNATING = "alternating"
    UNIFORM = "uniform"

    def orientation(self, position: int) -> Orientation:
        if self is Dressing.ALTERNATING and position % 2 == 1:
            return Orientation.F_DAGGER
        return Orientation.DAGGER_F


class FormulaMode(str, Enum):
    PRINTED = "printed"
    DERIVED = "derived"


class BoundCheck(str, Enum):
    WITHIN = "within"
    VIOLATED_CLASSICAL = "violated_classical"
    EXCEEDS_QUANTUM_BOUND = "exceeds_quantum_bound"


class MissingEntryError(KeyError):
    """A bilinear needed by a formula is absent from the table."""

    def __str__(self):
        return str(self.args[0]) if self.args else "missing bilinear"


# ---------------------------------------------------------------------------
# table


def _hkey(a, b):
    return (a, b) if a <= b else (b, a)


@dataclass
class BilinearTable:
    """Smeared bilinears between labelled test functions.

    Parameters
    ----------
    h : mapping
        ``{(a, b): H(a, b)}``; either order may be given, the table is
        symmetric.
    pj : mapping, optional
        ``{(a, b): Delta_PJ(a, b)}``; the reverse entry is the negative.
    m : float, optional
        Mass the table was computed at.
    default_pj : float, optional
        Value used for a missing ``Delta_PJ`` entry. ``None`` (the default)
        makes a missing entry an error; ``0.0`` declares every pair not
        listed to commute.
    """

    h: Mapping = field(default_factory=dict)
    pj: Mapping = field(default_factory=dict)
    m: float | None = None
    default_pj: float | None = None
    h_error: dict = field(default_factory=dict)
    pj_error: dict = field(default_factory=dict)

    def __post_init__(self):
        h, pj = {}, {}
        for (a, b), v in dict(self.h).items():
            v = float(v)
            k = _hkey(a, b)
            if k in h and h[k] != v:
                raise ValueError(f"conflicting H entries for {k}")
            if a == b and v < 0.0:
                raise ValueError(f"diagonal H({a},{a}) must be non-negative, got {v}")
            h[k] = v
        for (a, b), v in dict(self.pj).items():
            v = float(v)
            if a == b and v != 0.0:
                raise ValueError(f"Delta_PJ({a},{a}) must vanish, got {v}")
            if (b, a) in pj and pj[(b, a)] != -v:
                raise ValueError(f"Delta_PJ entries for ({a},{b}) are not antisymmetric")
            pj[(a, b)] = v
            pj[(b, a)] = -v
        self.h = h
        self.pj = pj

    def H(self, a, b) -> float:
        try:
            return self.h[_hkey(a, b)]
        except KeyError:
            raise MissingEntryError(f"missing H({a},{b})") from None

    def PJ(self, a, b) -> float:
        if a == b:
            return 0.0
        v = self.pj.get((a, b))
        if v is None:
            if self.default_pj is None:
                raise MissingEntryError(f"missing Delta_PJ({a},{b})")
            return float(self.default_pj)
        return v

    def set_h(self, a, b, value, error=0.0):
        if a == b and value < 0.0:
            raise ValueError(f"diagonal H({a},{a}) must be non-negative, got {value}")
        self.h[_hkey(a, b)] = float(value)
        self.h_error[_hkey(a, b)] = float(error)

    def set_pj(self, a, b, value, error=0.0):
        self.pj[(a, b)] = float(value)
        self.pj[(b, a)] = -float(value)
        self.pj_error[(a, b)] = self.pj_error[(b, a)] = float(error)

    def labels(self) -> list:
        out = set()
        for a, b in self.h:
            out.update((a, b))
        return sorted(out)

    def h_records(self) -> dict:
        return {f"H({a},{b})": v for (a, b), v in sorted(self.h.items())}

    def pj_records(self) -> dict:
        seen = {}
        for (a, b), v in sorted(self.pj.items()):
            if (b, a) not in seen and a <= b:
                seen[(a, b)] = v
        return {f"PJ({a},{b})": v for (a, b), v in seen.items()}


# ---------------------------------------------------------------------------
# symbolic reduction


@dataclass(frozen=True)
class Factor:
    label: str
    orientation: Orientation = Orientation.DAGGER_F

    @property
    def sign(self) -> int:
        return self.orientation.sign


@dataclass(frozen=True)
class DressedProjectorWord:
    """Ordered product of dressed dichotomic operators ``1 - 2 P``."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(
            f if isinstance(f, Factor) else Factor(f[0], Orientation(f[1])) for f in self.factors
        )
        if not factors:
            raise ValueError("a word needs at least one factor")
        object.__setattr__(self, "factors", factors)

    def __len__(self):
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)


@dataclass(frozen=True)
class Term:
    """``coefficient * exp(-sum c H(a,b)) * exp(i/2 sum c' Delta(a,b))``.

    ``h_exponent`` maps unordered pairs to the coefficient of ``H`` inside
    ``exp(-(...))``; ``pj_phase`` maps ordered pairs to the coefficient of
    ``Delta_PJ`` in the phase.
    """

    coefficient: float
    h_exponent: tuple = ()
    pj_phase: tuple = ()

    def exponent_text(self) -> str:
        parts = []
        for (a, b), c in self.h_exponent:
            name = f"H({a},{b})"
            sign = "+" if c > 0 else "-"
            mag = "" if abs(c) == 1 else f"{abs(c):g}*"
            parts.append(f"{sign} {mag}{name}")
        text = " ".join(parts).lstrip("+ ").strip()
        return text or "0"

    def evaluate(self, table: BilinearTable) -> complex:
        expo = sum(c * table.H(a, b) for (a, b), c in self.h_exponent)
        phase = sum(c * table.PJ(a, b) for (a, b), c in self.pj_phase)
        mag = self.coefficient * math.exp(-expo)
        if phase == 0.0:
            return complex(mag, 0.0)
        return mag * complex(math.cos(0.5 * phase), math.sin(0.5 * phase))


def _chain_term(factors: Sequence[Factor], coefficient) -> Term:
    h = {}
    pj = {}
    for fac in factors:
        k = (fac.label, fac.label)
        h[k] = h.get(k, 0) + 1
    for x, y in zip(factors[:-1], factors[1:]):
        ss = x.sign * y.sign
        k = _hkey(x.label, y.label)
        # a repeated label contributes to its own diagonal
        h[k] = h.get(k, 0) - ss
        if x.label != y.label:
            pj[(x.label, y.label)] = pj.get((x.label, y.label), 0) + ss
    h_items = tuple(sorted((k, c) for k, c in h.items() if c != 0))
    pj_items = tuple(sorted((k, c) for k, c in pj.items() if c != 0))
    return Term(float(coefficient), h_items, pj_items)


def expand_word(word) -> list:
    """Closed form of ``<0| X_1 ... X_n |0>`` as a list of :class:`Term`.

    Every subset ``S`` of factors contributes ``(-2)**|S|`` times the chain
    over ``S`` in word order; the empty subset is the constant 1. Terms
    with identical exponents and phases are merged.
    """
    if not isinstance(word, DressedProjectorWord):
        word = DressedProjectorWord(tuple(word))
    merged: dict = {}
    factors = word.factors
    n = len(factors)
    for k in range(n + 1):
        for subset in itertools.combinations(range(n), k):
            chain = [factors[i] for i in subset]
            if chain:
                t = _chain_term(chain, (-2.0) ** k)
            else:
                t = Term(1.0)
            key = (t.h_exponent, t.pj_phase)
            merged[key] = merged.get(key, 0.0) + t.coefficient
    return [Term(c, h, p) for (h, p), c in merged.items() if c != 0.0]


def evaluate_terms(terms: Iterable[Term], table: BilinearTable) -> complex:
    # fixed summation order: as listed
    total = 0j
    for t in terms:
        total += t.evaluate(table)
    return total


def reduce_vacuum_expectation(word, table: BilinearTable, complex_value: bool = False):
    """Vacuum expectation of a dressed word, evaluated on ``table``.

    Returns the real part unless ``complex_value`` is set. For mutually
    commuting supports the imaginary part vanishes identically.

    Raises
    ------
    MissingEntryError
        Naming the first bilinear that the expansion needs but ``table``
        lacks.
    """
    value = evaluate_terms(expand_word(word), table)
    return value if complex_value else value.real


def party_word(labels: Sequence[str], dressing: Dressing = Dressing.ALTERNATING) -> DressedProjectorWord:
    """Word ``X_{labels[0]} X_{labels[1]} ...`` with factor ``i`` dressed per ``dressing``.

    Orientation follows the position in the word, so ``[f, g, h]`` under
    the alternating dressing is ``A_f B_g C_h`` with Bob's operator as
    ``W F W^dag``, and ``[f, h]`` is ``A_f C_h`` with ``C_h`` as ``W F W^dag``.
    """
    dressing = Dressing(dressing)
    return DressedProjectorWord(tuple(Factor(lab, dressing.orientation(i)) for i, lab in enumerate(labels)))


# ---------------------------------------------------------------------------
# reports


def classify_bound(value: float, classical: float, quantum: float, slack: float = BOUND_SLACK) -> BoundCheck:
    v = abs(value)
    if v > quantum + slack:
        return BoundCheck.EXCEEDS_QUANTUM_BOUND
    if v > classical:
        return BoundCheck.VIOLATED_CLASSICAL
    return BoundCheck.WITHIN


@dataclass
class CorrelatorReport:
    """A correlator value with the ingredients that produced it.

    ``terms`` lists ``(coefficient, exponent, value)`` for each exponential
    (the constant term has exponent ``"0"``); ``bilinears`` holds the table
    entries used.
    """

    kind: str
    value: float
    formula_mode: FormulaMode
    dressing: Dressing | None
    terms: list
    bilinears: dict
    bound_check: BoundCheck | None
    imaginary: float = 0.0
    extras: dict = field(default_factory=dict)

    def as_record(self) -> dict:
        rec = {
            "kind": self.kind,
            "value": self.value,
            "formula_mode": self.formula_mode.value,
            "dressing": self.dressing.value if self.dressing else None,
            "bound_check": self.bound_check.value if self.bound_check else None,
            "imaginary": self.imaginary,
        }
        rec.update(self.bilinears)
        rec.update(self.extras)
        for i, (c, expo, v) in enumerate(self.terms):
            rec[f"term{i}"] = f"{c:+g}*exp(-({expo}))"
            rec[f"term{i}_value"] = v
        return rec


def _term_rows(terms, table):
    return [(t.coefficient, t.exponent_text(), t.evaluate(table).real) for t in terms]


def _used_bilinears(terms, table):
    out = {}
    for t in terms:
        for (a, b), _ in t.h_exponent:
            out[f"H({a},{b})"] = table.H(a, b)
        for (a, b), _ in t.pj_phase:
            if a <= b:
                out[f"PJ({a},{b})"] = table.PJ(a, b)
            else:
                out[f"PJ({b},{a})"] = table.PJ(b, a)
    return dict(sorted(out.items()))


def _derived_report(kind, signed_words, table, dressing, classical, quantum):
    terms: list = []
    for sign, word in signed_words:
        for t in expand_word(word):
            terms.append(Term(sign * t.coefficient, t.h_exponent, t.pj_phase))
    # merge identical exponentials so the report lists the closed form
    merged: dict = {}
    for t in terms:
        key = (t.h_exponent, t.pj_phase)
        merged[key] = merged.get(key, 0.0) + t.coefficient
    terms = [Term(c, h, p) for (h, p), c in merged.items() if c != 0.0]
    value = evaluate_terms(terms, table)
    check = classify_bound(value.real, classical, quantum) if quantum else None
    return CorrelatorReport(
        kind,
        value.real,
        FormulaMode.DERIVED,
        dressing,
        _term_rows(terms, table),
        _used_bilinears(terms, table),
        check,
        imaginary=value.imag,
    )


def _printed_report(kind, terms, table, classical, quantum):
    value = evaluate_terms(terms, table).real
    check = classify_bound(value, classical, quantum) if quantum else None
    return CorrelatorReport(
        kind, value, FormulaMode.PRINTED, None, _term_rows(terms, table), _used_bilinears(terms, table), check
    )


def _T(coef, *pairs):
    """Printed-formula term; ``pairs`` are ``(a, b)`` or ``(coef, a, b)``."""
    h = {}
    for p in pairs:
        c, a, b = (1, *p) if len(p) == 2 else p
        k = _hkey(a, b)
        h[k] = h.get(k, 0) + c
    return Term(float(coef), tuple(sorted(h.items())))


# ---------------------------------------------------------------------------
# closed forms


def two_op_correlator(table: BilinearTable, f: str, g: str) -> float:
    """``<A_f B_g> = 1 + 4 e^{-(H_ff + H_gg + H_fg)} - 2 e^{-H_ff} - 2 e^{-H_gg}``.

    This is the alternating dressing; the uniform dressing flips the sign
    of ``H_fg`` (see :func:`reduce_vacuum_expectation`).
    """
    hff, hgg, hfg = table.H(f, f), table.H(g, g), table.H(f, g)
    return 1.0 + 4.0 * math.exp(-(hff + hgg + hfg)) - 2.0 * math.exp(-hff) - 2.0 * math.exp(-hgg)


def _chsh_printed_terms(f, fp, g, gp):
    return [
        Term(2.0),
        _T(4, (f, f), (g, g), (f, g)),
        _T(4, (fp, fp), (g, g), (fp, g)),
        _T(4, (f, f), (gp, gp), (f, gp)),
        _T(-4, (fp, fp), (gp, gp), (fp, gp)),
        _T(-4, (f, f)),
        _T(-4, (g, g)),
    ]


def chsh_correlator(
    table: BilinearTable,
    f: str = "f",
    fp: str = "f'",
    g: str = "g",
    gp: str = "g'",
    mode: FormulaMode | str = FormulaMode.DERIVED,
    dressing: Dressing | str = Dressing.UNIFORM,
) -> CorrelatorReport:
    """``<(A_f + A_f') B_g + (A_f - A_f') B_g'>``.

    ``printed`` evaluates the textbook closed form

        2 + 4E(f,g) + 4E(f',g) + 4E(f,g') - 4E(f',g') - 4e^{-H_ff} - 4e^{-H_gg}

    with ``E(a,b) = e^{-(H_aa + H_bb + H_ab)}``. ``derived`` expands the four
    words with the reducer under ``dressing``. With the alternating
    dressing the two agree identically; the uniform dressing replaces every
    ``H_ab`` in ``E`` by ``-H_ab``.
    """
    mode = FormulaMode(mode)
    if mode is FormulaMode.PRINTED:
        return _printed_report("chsh", _chsh_printed_terms(f, fp, g, gp), table, 2.0, TSIRELSON)
    dressing = Dressing(dressing)
    words = [
        (1, party_word([f, g], dressing)),
        (1, party_word([fp, g], dressing)),
        (1, party_word([f, gp], dressing)),
        (-1, party_word([fp, gp], dressing)),
    ]
    return _derived_report("chsh", words, table, dressing, 2.0, TSIRELSON)


def _abc_printed_terms(f, g, h):
    return [
        Term(1.0),
        _T(-8, (f, f), (g, g), (f, g), (g, h)),
        _T(4, (f, f), (g, g), (f, g)),
        _T(4, (g, g), (h, h), (h, g)),
        _T(4, (f, f), (h, h), (f, h)),
        _T(-2, (f, f)),
        _T(-2, (g, g)),
        _T(-2, (h, h)),
    ]


def three_op_correlator(
    table: BilinearTable,
    f: str = "f",
    g: str = "g",
    h: str = "h",
    mode: FormulaMode | str = FormulaMode.DERIVED,
    dressing: Dressing | str = Dressing.ALTERNATING,
) -> float:
    """``<A_f B_g C_h>``.

    ``printed`` is the published expansion, whose ``-8`` term lacks
    ``H(h,h)``; ``derived`` is the reducer's result under ``dressing``.
    """
    mode = FormulaMode(mode)
    if mode is FormulaMode.PRINTED:
        return evaluate_terms(_abc_printed_terms(f, g, h), table).real
    return reduce_vacuum_expectation(party_word([f, g, h], dressing), table)


def _exm3_printed_terms(f, fp, g, gp, h, hp):
    # transcribed verbatim, including the sign of H(g',g') in the fourth -8
    # term and the H(g,h) label in the second
    return [
        Term(2.0),
        _T(-8, (fp, fp), (g, g), (h, h), (fp, g), (g, h)),
        _T(-8, (f, f), (gp, gp), (h, h), (f, gp), (g, h)),
        _T(-8, (f, f), (g, g), (hp, hp), (f, g), (g, hp)),
        _T(8, (fp, fp), (-1, gp, gp), (hp, hp), (fp, gp), (gp, hp)),
        _T(4, (fp, fp), (g, g), (fp, g)),
        _T(4, (g, g), (h, h), (h, g)),
        _T(4, (fp, fp), (h, h), (fp, h)),
        _T(4, (f, f), (gp, gp), (f, gp)),
        _T(4, (gp, gp), (h, h), (gp, h)),
        _T(4, (f, f), (h, h), (h, f)),
        _T(4, (f, f), (g, g), (f, g)),
        _T(4, (g, g), (hp, hp), (g, hp)),
        _T(4, (f, f), (f, hp), (hp, hp)),
        _T(-4, (fp, fp), (gp, gp), (fp, gp)),
        _T(-4, (gp, gp), (hp, hp), (gp, hp)),
        _T(-4, (fp, fp), (hp, hp), (hp, fp)),
        _T(-4, (f, f)),
        _T(-4, (g, g)),
        _T(-4, (h, h)),
    ]


def mermin3_correlator(
    table: BilinearTable,
    f: str = "f",
    fp: str = "f'",
    g: str = "g",
    gp: str = "g'",
    h: str = "h",
    hp: str = "h'",
    mode: FormulaMode | str = FormulaMode.DERIVED,
    dressing: Dressing | str = Dressing.ALTERNATING,
) -> CorrelatorReport:
    """``<A_f' B_g C_h + A_f B_g' C_h + A_f B_g C_h' - A_f' B_g' C_h'>``.

    Classical bound 2, quantum bound 4.
    """
    mode = FormulaMode(mode)
    if mode is FormulaMode.PRINTED:
        return _printed_report("mermin3", _exm3_printed_terms(f, fp, g, gp, h, hp), table, 2.0, 4.0)
    dressing = Dressing(dressing)
    words = [
        (1, party_word([fp, g, h], dressing)),
        (1, party_word([f, gp, h], dressing)),
        (1, party_word([f, g, hp], dressing)),
        (-1, party_word([fp, gp, hp], dressing)),
    ]
    return _derived_report("mermin3", words, table, dressing, 2.0, 4.0)


def cluster_quantity(
    table: BilinearTable,
    f: str = "f",
    h: str = "h",
    m: float | None = None,
    d: float = 0.0,
    dressing: Dressing | str = Dressing.ALTERNATING,
) -> CorrelatorReport:
    """``C = e^{-(H_ff + H_hh)} |1 - e^{-H_fh}| - e^{-m d} / 4``.

    ``C <= 0`` expresses the cluster bound on the connected correlator. The
    report's ``extras`` carry the connected correlator
    ``<A_f C_h> - <A_f><C_h>`` from the reducer and its closed form
    ``4 e^{-(H_ff + H_hh)} (e^{-H_fh} - 1)`` (alternating dressing; the
    uniform dressing flips the sign of ``H_fh``).
    """
    if m is None:
        m = table.m
    if m is None:
        raise ValueError("cluster_quantity needs the mass m")
    if d < 0:
        raise ValueError("d must be non-negative")
    dressing = Dressing(dressing)
    hff, hhh, hfh = table.H(f, f), table.H(h, h), table.H(f, h)
    value = math.exp(-(hff + hhh)) * abs(1.0 - math.exp(-hfh)) - 0.25 * math.exp(-m * d)
    word = party_word([f, h], dressing)
    both = reduce_vacuum_expectation(word, table)
    af = reduce_vacuum_expectation(party_word([f], dressing), table)
    ch = reduce_vacuum_expectation(party_word([h], dressing), table)
    connected = both - af * ch
    ss = word.factors[0].sign * word.factors[1].sign
    closed = 4.0 * math.exp(-(hff + hhh)) * (math.exp(ss * hfh) - 1.0)
    terms = [
        (1.0, f"H({f},{f}) + H({h},{h})", math.exp(-(hff + hhh)) * abs(1.0 - math.exp(-hfh))),
        (-0.25, f"{m!r}*{d!r}", -0.25 * math.exp(-m * d)),
    ]
    return CorrelatorReport(
        "cluster",
        value,
        FormulaMode.DERIVED,
        dressing,
        terms,
        {f"H({f},{f})": hff, f"H({h},{h})": hhh, f"H({f},{h})": hfh},
        None,
        extras={
            "m": float(m),
            "d": float(d),
            "connected": connected,
            "connected_closed_form": closed,
            "cluster_negative": value < 0.0,
        },
    )


def table_from_matrix(labels: Sequence[str], gram, pj=None, m=None) -> BilinearTable:
    """Table from a symmetric matrix of ``H`` values (and optional ``Delta_PJ``)."""
    gram = np.asarray(gram, dtype=float)
    h = {(a, b): gram[i, j] for i, a in enumerate(labels) for j, b in enumerate(labels) if i <= j}
    pjd = {}
    if pj is not None:
        pj = np.asarray(pj, dtype=float)
        pjd = {(a, b): pj[i, j] for i, a in enumerate(labels) for j, b in enumerate(labels) if i < j}
    return BilinearTable(h, pjd, m=m, default_pj=None if pj is not None else 0.0)
