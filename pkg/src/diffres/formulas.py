"""Determinant formula specifications and their matrices.

A formula spec fixes how often each polynomial is derived (row bounds L_i)
and which derivatives of each parameter index the columns.  Four recipes
are provided; all satisfy the square-shape identity

    sum_i (L_i + 1)  =  1 + sum_j (hi_j - lo_j + 1)

so the assembled matrix, with the free-term column appended, is square.
The elimination output is the determinant of the frame built from the
order profile.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from fractions import Fraction

from .algebra import Poly, determinant, rank
from .errors import (AssumptionViolated, BetaOmegaViolated, ColumnMissing,
                     NotDefinable, NotDifferentiallyEssential)
from .structure import (is_differentially_essential, restrict,
                        super_essential_subsystem)
from .systems import nu, order_profile

EXACT_SIDE_CAP = 24


class Kind(enum.Enum):
    CF = "cf"
    CRES = "cres"
    FRES = "fres"
    GENERAL = "general"


@dataclass(frozen=True)
class FormulaSpec:
    """Row bounds and column intervals of one determinant frame."""

    kind: Kind
    row_bounds: dict        # 1-based polynomial index -> L_i
    column_intervals: dict  # parameter -> (lo, hi), both inclusive
    beta_omega: tuple = None

    def __post_init__(self):
        for i, bound in self.row_bounds.items():
            if bound < 0:
                raise NotDefinable(i, bound)
        if self.side != self.width + 1:
            raise AssumptionViolated(
                f"{self.side} rows against {self.width} parameter columns")

    @property
    def side(self):
        return sum(b + 1 for b in self.row_bounds.values())

    @property
    def width(self):
        return sum(hi - lo + 1
                   for lo, hi in self.column_intervals.values())


def _square_profile(system):
    if nu(system) != system.n - 1:
        raise AssumptionViolated(
            f"{nu(system)} active parameters for {system.n} polynomials")
    return order_profile(system)


def spec_fres(system):
    """Smallest frame: rows up to N - o_i - gamma, columns clipped to the
    occurring derivative range of each parameter."""
    profile = _square_profile(system)
    bounds = {}
    for i in range(system.n):
        bounds[i + 1] = profile.row_bound(i)
        if bounds[i + 1] < 0:
            raise NotDefinable(i + 1, bounds[i + 1])
    intervals = {j: profile.column_interval(j) for j in profile.low}
    return FormulaSpec(Kind.FRES, bounds, intervals)


def spec_cres(system):
    """Frame shrunk by the clipped gap profile: gamma_hat_j also counts
    the order of any polynomial missing the parameter entirely."""
    profile = _square_profile(system)
    orders = profile.orders
    hat = {}
    for j in profile.low:
        absent = [orders[i] for i, f in enumerate(system.polys)
                  if j not in f.ops]
        hat[j] = min([profile.high[j]] + absent)
    hat_total = sum(hat.values())
    n_sum = profile.order_sum
    bounds = {}
    for i in range(system.n):
        bounds[i + 1] = n_sum - orders[i] - hat_total
        if bounds[i + 1] < 0:
            raise NotDefinable(i + 1, bounds[i + 1])
    intervals = {j: (0, n_sum - hat[j] - hat_total) for j in hat}
    return FormulaSpec(Kind.CRES, bounds, intervals)


def spec_cf(system):
    """The full frame: rows up to N - o_i, columns for every derivative
    order 0..N of every parameter."""
    profile = _square_profile(system)
    n_sum = profile.order_sum
    bounds = {i + 1: n_sum - profile.orders[i] for i in range(system.n)}
    intervals = {j: (0, n_sum) for j in profile.low}
    return FormulaSpec(Kind.CF, bounds, intervals)


def _check_beta_omega(system, beta, omega, conditions=("b1", "b2")):
    n = system.n
    if len(beta) != system.params or len(omega) != n:
        raise BetaOmegaViolated(
            f"need {system.params} beta and {n} omega entries, "
            f"got {len(beta)} and {len(omega)}")
    if min(beta, default=0) < 0 or min(omega, default=0) < 0:
        raise BetaOmegaViolated("beta and omega entries must be >= 0")
    big_omega = sum(omega)
    beta_total = sum(beta)
    if "b1" in conditions:
        for i in range(n):
            if big_omega - omega[i] - beta_total < 0:
                raise BetaOmegaViolated(
                    f"(b1) fails at row {i + 1}: "
                    f"{big_omega} - {omega[i]} - {beta_total} < 0")
    if "b2" in conditions:
        for i, f in enumerate(system.polys):
            for j, op in f.ops.items():
                if op.deg() > omega[i] - beta[j - 1]:
                    raise BetaOmegaViolated(
                        f"(b2) fails at operator ({i + 1}, {j}): degree "
                        f"{op.deg()} > {omega[i]} - {beta[j - 1]}")
    return big_omega, beta_total


def spec_general(system, beta, omega):
    """Frame for arbitrary shift data: rows up to Omega - omega_i - beta,
    columns 0..Omega - beta_j - beta."""
    big_omega, beta_total = _check_beta_omega(system, beta, omega)
    bounds = {i + 1: big_omega - omega[i] - beta_total
              for i in range(system.n)}
    intervals = {j + 1: (0, big_omega - beta[j] - beta_total)
                 for j in range(system.params)}
    return FormulaSpec(Kind.GENERAL, bounds, intervals,
                       beta_omega=(tuple(beta), tuple(omega)))


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------


def _column_order(intervals):
    labels = [(j, k) for j, (lo, hi) in intervals.items()
              for k in range(lo, hi + 1)]
    labels.sort(key=lambda t: (t[1], t[0]), reverse=True)
    return labels


@dataclass
class FormulaMatrix:
    """Assembled grid: parameter columns in decreasing ranking, then the
    free-term column."""

    rows: tuple      # (i, k) pairs, i ascending, k descending
    columns: tuple   # (j, k) labels of the parameter columns
    entries: tuple   # row tuples of Poly, width len(columns) + 1
    spec: FormulaSpec

    @property
    def side(self):
        return len(self.entries)

    def homogeneous(self):
        """The grid without the free-term column."""
        return [row[:-1] for row in self.entries]

    def determinant(self, method="auto"):
        return determinant([list(row) for row in self.entries],
                           method=method)


def assemble(system, spec):
    """Build the matrix of all ``derive^k f_i`` for the given spec.

    Row (i, k) holds the coefficient of u_{j,k'} in the k-th derivative of
    f_i under each column (j, k'), and the derived free term last.  Any
    derivative of a parameter falling outside the declared columns is a
    hard error; the recipes above never produce one.
    """
    declared = {}
    for j, (lo, hi) in spec.column_intervals.items():
        declared[j] = (lo, hi)
    columns = _column_order(spec.column_intervals)
    position = {label: idx for idx, label in enumerate(columns)}
    rows = []
    grid = []
    for i in sorted(spec.row_bounds):
        f = system.polys[i - 1]
        stack = [f]
        for _ in range(spec.row_bounds[i]):
            stack.append(stack[-1].derive())
        for k in range(spec.row_bounds[i], -1, -1):
            g = stack[k]
            row = [None] * (len(columns) + 1)
            for j, op in g.ops.items():
                lo, hi = declared.get(j, (0, -1))
                for kk in op.support():
                    if not lo <= kk <= hi:
                        raise ColumnMissing((j, kk))
                    row[position[(j, kk)]] = op.coefficient(kk)
            row[-1] = g.free
            grid.append(tuple(e if e is not None else Poly.zero()
                              for e in row))
            rows.append((i, k))
    return FormulaMatrix(rows=tuple(rows), columns=tuple(columns),
                         entries=tuple(grid), spec=spec)


def zero_columns(matrix):
    """Labels of parameter columns that vanish identically."""
    out = []
    for idx, label in enumerate(matrix.columns):
        if all(row[idx].is_zero() for row in matrix.entries):
            out.append(label)
    return out


def dfres(system):
    """The elimination determinant on the tight frame."""
    return assemble(system, spec_fres(system)).determinant()


def rank_homogeneous(matrix):
    return rank(matrix.homogeneous())


def co_order(matrix):
    """Corank of the parameter part against its maximum possible rank."""
    return matrix.side - 1 - rank_homogeneous(matrix)


# ---------------------------------------------------------------------------
# leading symbols and order bounds
# ---------------------------------------------------------------------------


def symbol_matrix(system, beta=None, omega=None):
    """n x (n-1) grid of the coefficients at derivative order
    omega_i - beta_j; defaults take beta from the upper gap profile and
    omega from the polynomial orders."""
    if beta is None or omega is None:
        profile = order_profile(system)
        if beta is None:
            beta = [profile.high[j] for j in sorted(profile.high)]
        if omega is None:
            omega = list(profile.orders)
    _check_beta_omega(system, beta, omega, conditions=("b2",))
    out = []
    for i, f in enumerate(system.polys):
        row = []
        for j in range(1, system.params + 1):
            op = f.ops.get(j)
            if op is None:
                row.append(Poly.zero())
            else:
                row.append(op.coefficient(omega[i] - beta[j - 1]))
        out.append(row)
    return out


def order_bounds(system):
    """Largest derivative of each free term that the elimination output
    can contain: N* - o_i - gamma over the canonical subsystem, -1 for
    polynomials outside it."""
    if not is_differentially_essential(system):
        raise NotDifferentiallyEssential(
            "no row-deleted matching exists for any row")
    members = super_essential_subsystem(system).members
    sub, _ = restrict(system, members)
    profile = order_profile(sub)
    bounds = {i: -1 for i in range(1, system.n + 1)}
    for pos, i in enumerate(members):
        bounds[i] = profile.order_sum - profile.orders[pos] - profile.total
    return bounds


# ---------------------------------------------------------------------------
# randomized nonzero certification
# ---------------------------------------------------------------------------


class Verdict(enum.Enum):
    NONZERO_CERTIFIED = "nonzero-certified"
    ZERO_PROVEN = "zero-proven"
    UNKNOWN = "unknown"


_POOL = [Fraction(a, b) for b in range(1, 5) for a in range(-12, 13) if a]


def _numeric_det(rows):
    n = len(rows)
    a = [list(r) for r in rows]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            if a[r][col]:
                factor = a[r][col] * inv
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return det


def certify_nonzero(matrix, trials=20, seed=0, exact_cap=EXACT_SIDE_CAP):
    """Random evaluation of the determinant at rationals from a fixed pool.

    Treating every derivative symbol as an independent unknown is sound
    here: distinct derivatives are algebraically independent, so a nonzero
    evaluation certifies a nonzero determinant.  Zero can only be proven
    by the exact determinant, attempted when the side is small enough.
    """
    rng = random.Random(seed)
    grid = [list(row) for row in matrix.entries]
    names = sorted({s for row in grid for p in row for s in p.symbols()},
                   key=lambda s: s.key)
    for _ in range(trials):
        values = {s: rng.choice(_POOL) for s in names}
        numeric = [[p.evaluate(values) for p in row] for row in grid]
        if _numeric_det(numeric) != 0:
            return Verdict.NONZERO_CERTIFIED
    if matrix.side <= exact_cap:
        if matrix.determinant().is_zero():
            return Verdict.ZERO_PROVEN
        return Verdict.NONZERO_CERTIFIED
    return Verdict.UNKNOWN
