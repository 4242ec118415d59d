"""Structural analysis of a system through its operator presence pattern.

The pattern matrix X has one row per polynomial and one column per active
parameter, with a fresh symbol x{i}_{j} wherever the operator L_{i,j} is
nonzero.  Matchings of the row-deleted patterns decide whether a system is
differentially essential (some row-deleted perfect matching) or super
essential (all of them).  The super essential subsystem is read off the
bottom row of the left kernel echelon of X.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import Poly, left_kernel_echelon, sym
from .errors import AssumptionViolated, NotSuperEssential, TooLarge
from .systems import LinearSystem

ENUMERATION_BOUND = 12


def pattern_sym(i, j):
    """Symbol standing for the presence of operator (i, j), 1-based."""
    return sym(f"x{i}_{j}")


@dataclass(frozen=True)
class PatternMatrix:
    """Boolean presence pattern; rows 1..n, columns the active parameters."""

    rows: tuple            # tuple of frozensets of active column labels
    columns: tuple         # sorted tuple of active parameter labels

    @property
    def n(self):
        return len(self.rows)

    def symbolic(self):
        """The pattern with one fresh symbol per present entry."""
        out = []
        for i, present in enumerate(self.rows):
            out.append([Poly.var(pattern_sym(i + 1, j)) if j in present
                        else Poly.zero() for j in self.columns])
        return out

    def restricted(self, members):
        """Subpattern on the given 1-based row indices and their columns."""
        members = tuple(sorted(members))
        cols = set()
        for i in members:
            cols.update(self.rows[i - 1])
        cols = tuple(sorted(cols))
        rows = tuple(frozenset(self.rows[i - 1] & set(cols)) for i in members)
        return PatternMatrix(rows, cols), members


def pattern_matrix(system):
    if isinstance(system, PatternMatrix):
        return system
    cols = tuple(system.active_params())
    rows = tuple(frozenset(f.ops.keys()) for f in system.polys)
    return PatternMatrix(rows, cols)


# ---------------------------------------------------------------------------
# matchings
# ---------------------------------------------------------------------------


def _perfectly_matchable(rows, adjacency):
    """Kuhn's augmenting paths; True iff every listed row can be matched."""
    match_col = {}

    def augment(r, visited):
        for c in adjacency[r]:
            if c in visited:
                continue
            visited.add(c)
            if c not in match_col or augment(match_col[c], visited):
                match_col[c] = r
                return True
        return False

    for r in rows:
        if not augment(r, set()):
            return False
    return True


def _canonical_matching(rows, adjacency, prefer="least"):
    """The lexicographically least (or greatest) perfect matching on ``rows``,
    scanning rows in increasing order; None if there is none."""
    rows = sorted(rows)
    if not _perfectly_matchable(rows, adjacency):
        return None
    available = set()
    for r in rows:
        available.update(adjacency[r])
    assigned = {}
    for idx, r in enumerate(rows):
        options = sorted(adjacency[r] & available,
                         reverse=(prefer == "greatest"))
        rest = rows[idx + 1:]
        for c in options:
            trimmed = {rr: adjacency[rr] - {c} for rr in rest}
            if _perfectly_matchable(rest, trimmed):
                assigned[r] = c
                available.discard(c)
                adjacency = {rr: adjacency[rr] - {c} for rr in rows}
                break
        else:
            return None
    return assigned


def row_deleted_matching(pattern, i, prefer="least"):
    """Perfect matching of the rows other than i into the columns, or None.

    Rows are scanned in increasing index and each takes the smallest
    (``prefer="least"``) or largest feasible column, giving the
    lexicographically extreme matching.
    """
    pattern = pattern_matrix(pattern)
    rows = [r + 1 for r in range(pattern.n) if r + 1 != i]
    adjacency = {r: set(pattern.rows[r - 1]) for r in rows}
    return _canonical_matching(rows, adjacency, prefer=prefer)


def is_differentially_essential(system):
    """Some row-deleted matching exists (equivalently the pattern has
    structural rank n-1)."""
    pattern = pattern_matrix(system)
    return any(row_deleted_matching(pattern, i) is not None
               for i in range(1, pattern.n + 1))


def is_super_essential(system):
    """Every row-deleted matching exists."""
    pattern = pattern_matrix(system)
    return all(row_deleted_matching(pattern, i) is not None
               for i in range(1, pattern.n + 1))


def structural_rank(pattern):
    """Size of a maximum matching of the full pattern."""
    pattern = pattern_matrix(pattern)
    rows = list(range(1, pattern.n + 1))
    adjacency = {r: set(pattern.rows[r - 1]) for r in rows}
    match_col = {}

    def augment(r, visited):
        for c in adjacency[r]:
            if c in visited:
                continue
            visited.add(c)
            if c not in match_col or augment(match_col[c], visited):
                match_col[c] = r
                return True
        return False

    return sum(1 for r in rows if augment(r, set()))


# ---------------------------------------------------------------------------
# the super essential subsystem
# ---------------------------------------------------------------------------


@dataclass
class SubsystemCertificate:
    members: tuple          # 1-based polynomial indices
    kernel_row: tuple       # Frac coefficients of the bottom echelon row
    matchings: dict         # i -> row-deleted matching of the subsystem

    @property
    def proper(self):
        return len(self.kernel_row) != len(self.members)


def super_essential_subsystem(system):
    """Indices of the canonical super essential subsystem, with evidence.

    The left kernel of the symbolic pattern matrix is put in echelon form
    with coordinate order row 1 > row 2 > ...; the support of the bottom row
    is the subsystem.  For a super essential system that is everything.
    """
    pattern = pattern_matrix(system)
    n = pattern.n
    if len(pattern.columns) != n - 1:
        raise AssumptionViolated(
            f"{len(pattern.columns)} active parameters for {n} polynomials")
    basis = left_kernel_echelon(pattern.symbolic())
    if not basis:
        raise AssumptionViolated("pattern matrix has a trivial left kernel")
    bottom = basis[-1]
    members = tuple(i + 1 for i in range(n) if not bottom[i].is_zero())
    sub, members = pattern.restricted(members)
    matchings = {}
    for pos, i in enumerate(members):
        rows = [r for r in range(1, sub.n + 1) if r != pos + 1]
        adjacency = {r: set(sub.rows[r - 1]) for r in rows}
        got = _canonical_matching(rows, adjacency)
        if got is None:
            raise NotSuperEssential(
                f"kernel support {members} fails the matching test at {i}")
        matchings[i] = {members[r - 1]: c for r, c in got.items()}
    return SubsystemCertificate(members=members,
                                kernel_row=tuple(bottom),
                                matchings=matchings)


def restrict(system, members):
    """The subsystem on the given 1-based indices, parameters renumbered.

    Returns (subsystem, param_map) with param_map original -> new label.
    """
    members = tuple(sorted(members))
    polys = [system.polys[i - 1] for i in members]
    active = sorted({j for f in polys for j in f.ops})
    param_map = {j: k + 1 for k, j in enumerate(active)}
    from .systems import LinearDiffPoly
    rebuilt = [LinearDiffPoly(f.free, {param_map[j]: op
                                       for j, op in f.ops.items()})
               for f in polys]
    return LinearSystem(rebuilt, params=len(active)), param_map


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def _subsets(n, minimum):
    for mask in range(1, 1 << n):
        s = tuple(i + 1 for i in range(n) if mask >> i & 1)
        if len(s) >= minimum:
            yield s


def enumerate_super_essential(system, bound=ENUMERATION_BOUND):
    """All subsets of size >= 2 that are super essential on their own
    active parameters."""
    pattern = pattern_matrix(system)
    if pattern.n > bound:
        raise TooLarge(f"enumeration over {pattern.n} > {bound} polynomials")
    out = []
    for s in _subsets(pattern.n, 2):
        sub, _ = pattern.restricted(s)
        if len(sub.columns) != len(s) - 1:
            continue
        if all(row_deleted_matching(sub, r) is not None
               for r in range(1, sub.n + 1)):
            out.append(s)
    return out


def is_irredundant(system, bound=ENUMERATION_BOUND):
    """No proper subsystem can already eliminate: |S| <= nu(S) for each
    proper nonempty S."""
    pattern = pattern_matrix(system)
    if pattern.n > bound:
        raise TooLarge(f"enumeration over {pattern.n} > {bound} polynomials")
    for s in _subsets(pattern.n, 1):
        if len(s) == pattern.n:
            continue
        active = set()
        for i in s:
            active.update(pattern.rows[i - 1])
        if len(s) > len(active):
            return False
    return True
