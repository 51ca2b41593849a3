"""Text formats: design matrix files and the CRN reaction language.

CRN text, one reaction per line::

    species: X1, X2, X3          # optional declaration, fixes species order
    X1 + X3 <-> 2 X2 @ 1,1       # reversible pair, forward and reverse rate
    2 T1 -> 0 @ 1

``emit_crn`` writes the canonical form that ``parse_crn`` reads back exactly.
"""
from __future__ import annotations

import re
import warnings
from pathlib import Path

from .crn import Reaction, ReactionNetwork
from .exceptions import DuplicateReactionWarning, ParseError, UndeclaredCoefficient
from .matrixcore import DesignMatrix, validate_design_matrix

_NAME = r"[A-Za-z][A-Za-z0-9_]*"
_TERM = re.compile(rf"^(?:(\d+)\s*)?({_NAME})$")
_NAME_RE = re.compile(rf"^{_NAME}$")


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def parse_matrix_text(text: str) -> DesignMatrix:
    """Parse ``"m n"`` followed by ``m`` rows of ``n`` integers, then validate."""
    rows: list[list[int]] = []
    header = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        tokens = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]
        values = []
        for tok, col in tokens:
            try:
                values.append(int(tok))
            except ValueError:
                raise ParseError(f"expected an integer, found {tok!r}", lineno, col) from None
        if header is None:
            if len(values) != 2 or values[0] < 1 or values[1] < 1:
                raise ParseError("header must be two positive integers 'm n'", lineno, 1)
            header = values
            continue
        if len(rows) == header[0]:
            raise ParseError(f"more than the declared {header[0]} rows", lineno, 1)
        if len(values) != header[1]:
            raise ParseError(f"expected {header[1]} entries, found {len(values)}", lineno,
                             tokens[min(len(tokens), header[1]) - 1][1] if tokens else 1)
        rows.append(values)
    if header is None:
        raise ParseError("empty matrix file")
    if len(rows) != header[0]:
        raise ParseError(f"expected {header[0]} rows, found {len(rows)}")
    return validate_design_matrix(rows)


def parse_matrix_file(path) -> DesignMatrix:
    return parse_matrix_text(Path(path).read_text())


def format_matrix(A: DesignMatrix) -> str:
    lines = [f"{A.m} {A.n}"] + [" ".join(str(v) for v in row) for row in A.entries]
    return "\n".join(lines) + "\n"


def _parse_side(text: str, offset: int, lineno: int) -> dict[str, int]:
    if text.strip() == "0":
        return {}
    out: dict[str, int] = {}
    pos = offset
    for part in text.split("+"):
        stripped = part.strip()
        col = pos + (len(part) - len(part.lstrip())) + 1
        if not stripped:
            raise ParseError("empty term", lineno, col)
        m = _TERM.match(stripped)
        if not m:
            raise ParseError(f"malformed term {stripped!r}", lineno, col)
        coef = int(m.group(1)) if m.group(1) is not None else 1
        if coef == 0:
            raise UndeclaredCoefficient(f"coefficient 0 on {m.group(2)}", lineno, col)
        out[m.group(2)] = out.get(m.group(2), 0) + coef
        pos += len(part) + 1
    return out


def _parse_rate(tok: str, lineno: int, col: int) -> float:
    try:
        k = float(tok)
    except ValueError:
        raise ParseError(f"invalid rate {tok.strip()!r}", lineno, col) from None
    if not k > 0 or k == float("inf"):
        raise ParseError(f"rate must be positive and finite, got {tok.strip()}", lineno, col)
    return k


def parse_crn(text: str) -> ReactionNetwork:
    """Parse CRN text into a network; ``<->`` becomes two reactions."""
    declared: list[str] | None = None
    parsed = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        if line.strip().startswith("species:"):
            if declared is not None or parsed:
                raise ParseError("species declaration must come first and only once", lineno, 1)
            body = line.split(":", 1)[1]
            declared = [s.strip() for s in body.split(",") if s.strip()]
            for s in declared:
                if not _NAME_RE.match(s):
                    raise ParseError(f"invalid species name {s!r}", lineno, line.find(s) + 1)
            if len(set(declared)) != len(declared):
                raise ParseError("duplicate species in declaration", lineno, 1)
            continue
        if "@" not in line:
            raise ParseError("missing '@ rate'", lineno, len(line.rstrip()) + 1)
        at = line.index("@")
        lhs_rhs, rate_txt = line[:at], line[at + 1:]
        if "<->" in lhs_rhs:
            arrow, width = lhs_rhs.index("<->"), 3
        elif "->" in lhs_rhs:
            arrow, width = lhs_rhs.index("->"), 2
        else:
            raise ParseError("missing arrow '->' or '<->'", lineno, 1)
        if "->" in lhs_rhs[arrow + width:]:
            raise ParseError("more than one arrow", lineno, arrow + width + 1)
        reversible = width == 3
        left = _parse_side(lhs_rhs[:arrow], 0, lineno)
        right = _parse_side(lhs_rhs[arrow + width:], arrow + width, lineno)
        rates = rate_txt.split(",")
        if len(rates) != (2 if reversible else 1):
            raise ParseError("'<->' needs 'kf,kr' and '->' needs a single rate", lineno, at + 2)
        ks = [_parse_rate(r, lineno, at + 2) for r in rates]
        if left == right:
            raise ParseError("reactant and product complexes are identical", lineno, 1)
        parsed.append((left, right, ks[0]))
        if reversible:
            parsed.append((right, left, ks[1]))

    species = list(declared or [])
    for left, right, _ in parsed:
        for s in list(left) + list(right):
            if s not in species:
                if declared is not None:
                    raise ParseError(f"species {s!r} is not declared")
                species.append(s)
    index = {s: i for i, s in enumerate(species)}

    def vec(side):
        v = [0] * len(species)
        for s, c in side.items():
            v[index[s]] = c
        return tuple(v)

    reactions = []
    seen = set()
    for left, right, k in parsed:
        key = (vec(left), vec(right))
        if key in seen:
            warnings.warn(f"duplicate reaction {format_complex(key[0], species)} -> "
                          f"{format_complex(key[1], species)}", DuplicateReactionWarning, stacklevel=2)
        seen.add(key)
        reactions.append(Reaction(key[0], key[1], k))
    return ReactionNetwork(tuple(species), tuple(reactions))


def format_rate(k: float) -> str:
    r = repr(float(k))
    return r[:-2] if r.endswith(".0") else r


def format_complex(y, species) -> str:
    terms = [(name if c == 1 else f"{c} {name}") for c, name in zip(y, species) if c]
    return " + ".join(terms) if terms else "0"


def emit_crn(net: ReactionNetwork, header: str | None = None) -> str:
    """Canonical text: a species line, then reactions in order, with a
    reaction immediately followed by its reverse written as one ``<->`` line.
    """
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    lines.append("species: " + ", ".join(net.species))
    rs = net.reactions
    i = 0
    while i < len(rs):
        r = rs[i]
        lhs = format_complex(r.reactant, net.species)
        rhs = format_complex(r.product, net.species)
        nxt = rs[i + 1] if i + 1 < len(rs) else None
        if nxt is not None and nxt.reactant == r.product and nxt.product == r.reactant:
            lines.append(f"{lhs} <-> {rhs} @ {format_rate(r.rate)},{format_rate(nxt.rate)}")
            i += 2
        else:
            lines.append(f"{lhs} -> {rhs} @ {format_rate(r.rate)}")
            i += 1
    return "\n".join(lines) + "\n"


def apply_rate_overrides(net: ReactionNetwork, overrides: ReactionNetwork) -> ReactionNetwork:
    """Replace rates of reactions that also appear (by species name) in ``overrides``."""
    def keyed(n):
        out = {}
        for r in n.reactions:
            y = tuple(sorted((n.species[i], c) for i, c in enumerate(r.reactant) if c))
            yp = tuple(sorted((n.species[i], c) for i, c in enumerate(r.product) if c))
            out[(y, yp)] = r.rate
        return out

    table = keyed(overrides)
    own = keyed(net)
    unknown = [k for k in table if k not in own]
    if unknown:
        y, yp = unknown[0]
        raise ParseError(
            "rate override for a reaction not in the network: "
            f"{' + '.join(f'{c} {s}' for s, c in y) or '0'} -> {' + '.join(f'{c} {s}' for s, c in yp) or '0'}"
        )
    rates = []
    for r in net.reactions:
        y = tuple(sorted((net.species[i], c) for i, c in enumerate(r.reactant) if c))
        yp = tuple(sorted((net.species[i], c) for i, c in enumerate(r.product) if c))
        rates.append(table.get((y, yp), r.rate))
    return net.with_rates(rates)
