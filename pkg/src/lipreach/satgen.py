"""3-SAT formulas compiled into ReLU networks, plus the corner decision.

Each formula becomes a four-layer network over inputs in ``[-1, 1]^n``:

1. a ReLU layer splitting every variable into its positive and negative
   parts (two neurons per variable),
2. a ReLU layer with one neuron per clause summing the parts selected by the
   clause's literals (so a clause neuron is zero exactly when none of its
   literals is satisfied),
3. a linear layer negating the clause neurons.

Scoring the outputs with the max-of-outputs functional gives a map that is
never positive; on hypercube corners (the encodings of truth assignments,
``True -> 1``) it is strictly negative exactly at satisfying assignments.
:func:`corner_decision` therefore reads satisfiability off the corner
minimum.  Note that off-corner inputs can zero the map even for satisfiable
formulas (a real-valued input can leave a clause unsatisfied), which is why
the decision is defined over corners only; sign-rounding any real input
preserves whether the map is zero.

DIMACS CNF files are accepted as the input format; clauses shorter than
three literals are padded by repeating a literal, which changes neither
satisfiability nor the construction's behaviour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Layer, NetworkModel, forward_batch
from .reach import OSpec, max_outputs

CORNER_LIMIT = 24
_CORNER_CHUNK = 1 << 16

Literal = tuple[int, str]  # (1-based variable index, 'p' or 'n')


class DimacsError(ValueError):
    """Raised for malformed DIMACS input or invalid clause structure."""


@dataclass(frozen=True)
class CnfFormula:
    """A conjunction of exactly-3-literal clauses over ``num_vars`` variables.

    Duplicate literals inside a clause are permitted; they arise from padding
    shorter clauses up to arity three.
    """

    num_vars: int
    clauses: tuple[tuple[Literal, Literal, Literal], ...]

    def __post_init__(self) -> None:
        if self.num_vars < 1:
            raise DimacsError("formula needs at least one variable")
        if not self.clauses:
            raise DimacsError("formula needs at least one clause")
        for clause in self.clauses:
            if len(clause) != 3:
                raise DimacsError(
                    f"clause {clause!r} has arity {len(clause)}, expected 3"
                )
            for var, sign in clause:
                if not 1 <= var <= self.num_vars:
                    raise DimacsError(f"variable index {var} out of range")
                if sign not in ("p", "n"):
                    raise DimacsError(f"literal sign must be 'p' or 'n', got {sign!r}")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)


def parse_dimacs(text: str) -> CnfFormula:
    """Parse standard DIMACS CNF; 1- and 2-literal clauses are padded to 3."""
    num_vars = None
    clauses: list[tuple[Literal, ...]] = []
    pending: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(("c", "%")):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"bad problem line: {line!r}")
            try:
                num_vars = int(parts[2])
            except ValueError as exc:
                raise DimacsError(f"bad problem line: {line!r}") from exc
            continue
        try:
            tokens = [int(tok) for tok in line.split()]
        except ValueError as exc:
            raise DimacsError(f"bad clause line: {line!r}") from exc
        for tok in tokens:
            if tok == 0:
                if pending:
                    clauses.append(_pad_clause(pending))
                    pending = []
            else:
                pending.append(tok)
    if pending:
        clauses.append(_pad_clause(pending))
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if not clauses:
        raise DimacsError("no clauses found")
    return CnfFormula(num_vars=num_vars, clauses=tuple(clauses))


def _pad_clause(literals: list[int]) -> tuple[Literal, Literal, Literal]:
    if len(literals) > 3:
        raise DimacsError(f"clause with {len(literals)} literals exceeds arity 3")
    while len(literals) < 3:
        literals = literals + [literals[0]]
    return tuple((abs(v), "p" if v > 0 else "n") for v in literals)


def build_network(formula: CnfFormula) -> NetworkModel:
    """Compile a formula into its four-layer ReLU network."""
    n, m = formula.num_vars, formula.num_clauses

    # variable split: neurons (2i, 2i+1) hold the positive/negative parts of v_i
    split = np.zeros((2 * n, n))
    for i in range(n):
        split[2 * i, i] = 1.0
        split[2 * i + 1, i] = -1.0

    # clause sums over the selected parts; duplicate literals add multiplicity
    clause = np.zeros((m, 2 * n))
    for ci, lits in enumerate(formula.clauses):
        for var, sign in lits:
            column = 2 * (var - 1) + (0 if sign == "p" else 1)
            clause[ci, column] += 1.0

    negate = -np.eye(m)
    return NetworkModel(
        input_dim=n,
        layers=(
            Layer(kind="dense", weights=split, bias=np.zeros(2 * n), activation="relu"),
            Layer(kind="dense", weights=clause, bias=np.zeros(m), activation="relu"),
            Layer(kind="dense", weights=negate, bias=np.zeros(m), activation="none"),
        ),
        name=f"cnf-{n}v-{m}c",
    )


def sat_objective(net: NetworkModel) -> OSpec:
    """The output functional pairing with :func:`build_network` (max of outputs).

    The composed map is non-positive everywhere: clause neurons are ReLU
    outputs, so their negations never exceed zero.
    """
    return max_outputs()


def input_box(formula: CnfFormula) -> list[tuple[float, float]]:
    """The generator's input domain: ``[-1, 1]`` per variable."""
    return [(-1.0, 1.0)] * formula.num_vars


def corner_decision(formula: CnfFormula) -> str:
    """'sat' iff the composed map is negative on some hypercube corner.

    Exhaustive over ``{-1, 1}^n``, limited to ``n <= 24``.
    """
    n = formula.num_vars
    if n > CORNER_LIMIT:
        raise ValueError(
            f"corner enumeration supports up to {CORNER_LIMIT} variables, got {n}"
        )
    net = build_network(formula)
    o = sat_objective(net)
    total = 1 << n
    best = np.inf
    for start in range(0, total, _CORNER_CHUNK):
        stop = min(start + _CORNER_CHUNK, total)
        codes = np.arange(start, stop, dtype=np.int64)
        bits = (codes[:, None] >> np.arange(n)) & 1
        corners = bits.astype(np.float64) * 2.0 - 1.0
        values = o.fn_batch(forward_batch(net, corners))
        best = min(best, float(values.min()))
        if best < 0.0:
            return "sat"
    return "sat" if best < 0.0 else "unsat"
