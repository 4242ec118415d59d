"""Exact arithmetic: symbols with formal derivatives, sparse multivariate
polynomials over Q, fractions of polynomials, and the matrix kernel of the
package (fraction-free determinants, rank, left kernel echelon forms).

Everything here is exact; no floating point anywhere.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import cmp_to_key

from .errors import DivisionByZero, NonSquare, NotDivisible

# ---------------------------------------------------------------------------
# symbols
# ---------------------------------------------------------------------------


class Sym:
    """A named indeterminate together with a formal derivative order.

    ``Sym('a', 2)`` stands for the second derivative of a.  Symbols marked
    constant have derivative zero; deriving them is the caller's bug.
    """

    __slots__ = ("name", "order", "constant", "key", "_hash")

    def __init__(self, name, order=0, constant=False):
        self.name = name
        self.order = order
        self.constant = constant
        self.key = (name, order)
        self._hash = hash((name, order, constant))

    def derived(self, k=1):
        if self.constant:
            raise ValueError(f"constant symbol {self.name} has no derivative")
        return sym(self.name, self.order + k, False)

    def __eq__(self, other):
        return (self is other) or (
            isinstance(other, Sym)
            and self.key == other.key
            and self.constant == other.constant
        )

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        if self.order == 0:
            return self.name
        return f"{self.name}^({self.order})"


_SYM_CACHE: dict[tuple, Sym] = {}


def sym(name, order=0, constant=False):
    """Interning factory; the normal way to obtain a Sym."""
    k = (name, order, constant)
    s = _SYM_CACHE.get(k)
    if s is None:
        s = _SYM_CACHE[k] = Sym(name, order, constant)
    return s


def const_sym(name, order=0):
    return sym(name, order, constant=True)


# ---------------------------------------------------------------------------
# monomials: sorted tuples of (Sym, exponent)
# ---------------------------------------------------------------------------

_ONE_MONO = ()


def _mono_mul(a, b):
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        sa, ea = a[i]
        sb, eb = b[j]
        if sa.key == sb.key:
            out.append((sa, ea + eb))
            i += 1
            j += 1
        elif sa.key < sb.key:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _mono_divides(a, b):
    """Does monomial a divide b?"""
    exps = dict((s.key, e) for s, e in b)
    for s, e in a:
        if exps.get(s.key, 0) < e:
            return False
    return True


def _mono_div(b, a):
    """b / a, assuming a divides b."""
    rem = dict((s.key, (s, e)) for s, e in b)
    for s, e in a:
        sb, eb = rem[s.key]
        if eb == e:
            del rem[s.key]
        else:
            rem[s.key] = (sb, eb - e)
    return tuple(rem[k] for k in sorted(rem))


def _mono_cmp(a, b):
    """Lex order: the smallest symbol has the highest priority, a larger
    exponent on it wins.  Admissible, so exact division can trust leading
    terms."""
    i = j = 0
    while i < len(a) and j < len(b):
        sa, ea = a[i]
        sb, eb = b[j]
        if sa.key == sb.key:
            if ea != eb:
                return 1 if ea > eb else -1
            i += 1
            j += 1
        elif sa.key < sb.key:
            return 1  # a has a positive power on an earlier symbol
        else:
            return -1
    if i < len(a):
        return 1
    if j < len(b):
        return -1
    return 0


def _mono_degree(m):
    return sum(e for _, e in m)


def _mono_gcd(a, b):
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        sa, ea = a[i]
        sb, eb = b[j]
        if sa.key == sb.key:
            out.append((sa, min(ea, eb)))
            i += 1
            j += 1
        elif sa.key < sb.key:
            i += 1
        else:
            j += 1
    return tuple(out)


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------


class Poly:
    """Sparse multivariate polynomial over Q with Sym indeterminates.

    Instances are treated as immutable; all operations return new objects.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        if terms:
            self.terms = {m: c for m, c in terms.items() if c}
        else:
            self.terms = {}

    # -- constructors --------------------------------------------------

    @classmethod
    def zero(cls):
        return _ZERO

    @classmethod
    def one(cls):
        return _ONE

    @classmethod
    def const(cls, q):
        q = Fraction(q)
        return cls({_ONE_MONO: q}) if q else _ZERO

    @classmethod
    def var(cls, s):
        return cls({((s, 1),): Fraction(1)})

    # -- predicates ----------------------------------------------------

    def is_zero(self):
        return not self.terms

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and _ONE_MONO in self.terms)

    def constant_value(self):
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and _ONE_MONO in self.terms:
            return self.terms[_ONE_MONO]
        raise ValueError("not a constant polynomial")

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        other = as_poly(other)
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        p = Poly.__new__(Poly)
        p.terms = out
        return p

    __radd__ = __add__

    def __neg__(self):
        p = Poly.__new__(Poly)
        p.terms = {m: -c for m, c in self.terms.items()}
        return p

    def __sub__(self, other):
        return self + (-as_poly(other))

    def __rsub__(self, other):
        return as_poly(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            if not q:
                return _ZERO
            p = Poly.__new__(Poly)
            p.terms = {m: c * q for m, c in self.terms.items()}
            return p
        other = as_poly(other)
        if not self.terms or not other.terms:
            return _ZERO
        if len(self.terms) > len(other.terms):
            self, other = other, self
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                v = out.get(m)
                if v is None:
                    out[m] = c1 * c2
                else:
                    v = v + c1 * c2
                    if v:
                        out[m] = v
                    else:
                        del out[m]
        p = Poly.__new__(Poly)
        p.terms = out
        return p

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = _ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- calculus ------------------------------------------------------

    def derive(self):
        """Formal derivative; constant symbols vanish, others gain order."""
        out = {}
        for mono, c in self.terms.items():
            for idx, (s, e) in enumerate(mono):
                if s.constant:
                    continue
                rest = list(mono)
                if e == 1:
                    del rest[idx]
                else:
                    rest[idx] = (s, e - 1)
                m = _mono_mul(tuple(rest), ((s.derived(), 1),))
                v = out.get(m)
                coeff = c * e
                if v is None:
                    out[m] = coeff
                else:
                    v = v + coeff
                    if v:
                        out[m] = v
                    else:
                        del out[m]
        p = Poly.__new__(Poly)
        p.terms = out
        return p

    def derive_n(self, k):
        p = self
        for _ in range(k):
            p = p.derive()
        return p

    # -- structure -----------------------------------------------------

    def symbols(self):
        seen = set()
        for mono in self.terms:
            for s, _ in mono:
                seen.add(s)
        return seen

    def total_degree(self):
        if not self.terms:
            return -1
        return max(_mono_degree(m) for m in self.terms)

    def leading(self):
        """(monomial, coefficient) maximal under the division order."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        m = max(self.terms, key=cmp_to_key(_mono_cmp))
        return m, self.terms[m]

    def rational_content(self):
        """Positive gcd of the coefficients; 0 for the zero polynomial."""
        if not self.terms:
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = math.gcd(num, abs(c.numerator))
            den = den * c.denominator // math.gcd(den, c.denominator)
        return Fraction(num, den)

    def monomial_content(self):
        """Largest monomial dividing every term (unit monomial if none)."""
        it = iter(self.terms)
        try:
            g = next(it)
        except StopIteration:
            return _ONE_MONO
        for m in it:
            if not g:
                break
            g = _mono_gcd(g, m)
        return g

    def substitute(self, images):
        """Replace whole symbol families.

        ``images`` maps symbol names to polynomials (or scalars); a symbol of
        derivative order k is replaced by the k-th derivative of the image.
        """
        cache = {}

        def image_of(s):
            got = cache.get(s.key)
            if got is None:
                base = as_poly(images[s.name])
                got = base.derive_n(s.order)
                cache[s.key] = got
            return got

        out = _ZERO
        for mono, c in self.terms.items():
            keep = []
            factor = None
            for s, e in mono:
                if s.name in images:
                    img = image_of(s) ** e
                    factor = img if factor is None else factor * img
                else:
                    keep.append((s, e))
            term = Poly({tuple(keep): c})
            out = out + (term * factor if factor is not None else term)
        return out

    def evaluate(self, values):
        """Full numeric evaluation; ``values`` maps Sym -> Fraction."""
        total = Fraction(0)
        for mono, c in self.terms.items():
            v = c
            for s, e in mono:
                v = v * values[s] ** e
            total += v
        return total

    # -- display -------------------------------------------------------

    def __repr__(self):
        return format_poly(self)


_ZERO = Poly.__new__(Poly)
_ZERO.terms = {}
_ONE = Poly.__new__(Poly)
_ONE.terms = {_ONE_MONO: Fraction(1)}


def as_poly(x):
    if isinstance(x, Poly):
        return x
    if isinstance(x, Sym):
        return Poly.var(x)
    if isinstance(x, (int, Fraction)):
        return Poly.const(x)
    raise TypeError(f"cannot interpret {x!r} as a polynomial")


def _term_cmp(a, b):
    """Display order: highest derivative order first, then symbol order."""
    ma, mb = a, b
    da = max((s.order for s, _ in ma), default=-1)
    db = max((s.order for s, _ in mb), default=-1)
    if da != db:
        return 1 if da > db else -1
    return _mono_cmp(ma, mb)


def format_poly(p, mono_cmp=_term_cmp):
    if not p.terms:
        return "0"
    monos = sorted(p.terms, key=cmp_to_key(mono_cmp), reverse=True)
    parts = []
    for m in monos:
        c = p.terms[m]
        factors = []
        for s, e in m:
            factors.append(repr(s) if e == 1 else f"{s!r}^{e}")
        if not factors:
            body = str(abs(c))
        else:
            body = "*".join(factors)
            if abs(c) != 1:
                body = f"{abs(c)}*{body}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# exact division
# ---------------------------------------------------------------------------


def exact_div(f, g):
    """Quotient f/g in the polynomial ring; NotDivisible if the remainder
    would be nonzero."""
    f = as_poly(f)
    g = as_poly(g)
    if g.is_zero():
        raise DivisionByZero("division by the zero polynomial")
    if f.is_zero():
        return _ZERO
    if g.is_constant():
        return f * (1 / g.constant_value())
    gm, gc = g.leading()
    q = {}
    rem = f
    while not rem.is_zero():
        rm, rc = rem.leading()
        if not _mono_divides(gm, rm):
            raise NotDivisible("leading term not divisible")
        m = _mono_div(rm, gm)
        c = rc / gc
        q[m] = q.get(m, Fraction(0)) + c
        rem = rem - Poly({m: c}) * g
    return Poly(q)


# ---------------------------------------------------------------------------
# fractions of polynomials
# ---------------------------------------------------------------------------


class Frac:
    """Quotient of two polynomials.

    Normalization keeps things small without a full multivariate gcd:
    rational and monomial content are cancelled, exact divisions are tried
    both ways, and the denominator is scaled monic.  Equality is decided by
    cross multiplication, so partial cancellation never affects answers.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        num = as_poly(num)
        den = _ONE if den is None else as_poly(den)
        if den.is_zero():
            raise DivisionByZero("fraction with zero denominator")
        if num.is_zero():
            self.num = _ZERO
            self.den = _ONE
            return
        g = _mono_gcd(num.monomial_content(), den.monomial_content())
        if g:
            num = Poly({_mono_div(m, g): c for m, c in num.terms.items()})
            den = Poly({_mono_div(m, g): c for m, c in den.terms.items()})
        if den.is_constant():
            self.num = num * (1 / den.constant_value())
            self.den = _ONE
            return
        try:
            self.num = exact_div(num, den)
            self.den = _ONE
            return
        except NotDivisible:
            pass
        try:
            q = exact_div(den, num)
        except NotDivisible:
            self.num = num
            self.den = den
        else:
            self.num = _ONE
            self.den = q
        lc = self.den.leading()[1]
        if lc != 1:
            self.num = self.num * (1 / lc)
            self.den = self.den * (1 / lc)

    @classmethod
    def of(cls, x):
        if isinstance(x, Frac):
            return x
        return cls(as_poly(x))

    def is_zero(self):
        return self.num.is_zero()

    def __add__(self, other):
        other = Frac.of(other)
        if self.den == other.den:
            return Frac(self.num + other.num, self.den)
        return Frac(self.num * other.den + other.num * self.den,
                    self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        out = Frac.__new__(Frac)
        out.num = -self.num
        out.den = self.den
        return out

    def __sub__(self, other):
        return self + (-Frac.of(other))

    def __rsub__(self, other):
        return Frac.of(other) + (-self)

    def __mul__(self, other):
        other = Frac.of(other)
        return Frac(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Frac.of(other)
        if other.is_zero():
            raise DivisionByZero("division by zero fraction")
        return Frac(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return Frac.of(other) / self

    def __eq__(self, other):
        other = Frac.of(other)
        return self.num * other.den == other.num * self.den

    def derive(self):
        return Frac(self.num.derive() * self.den - self.num * self.den.derive(),
                    self.den * self.den)

    def __repr__(self):
        if self.den == _ONE:
            return repr(self.num)
        return f"({self.num!r})/({self.den!r})"


# ---------------------------------------------------------------------------
# determinants
# ---------------------------------------------------------------------------

_LAPLACE_BUDGET = 400_000


class _BudgetExceeded(Exception):
    pass


def _det_bareiss(m):
    n = len(m)
    m = [[as_poly(e) for e in row] for row in m]
    sign = 1
    prev = _ONE
    for k in range(n - 1):
        # pivot: nonzero entry of least total degree in column k
        best = None
        for r in range(k, n):
            e = m[r][k]
            if e.is_zero():
                continue
            d = e.total_degree()
            if best is None or d < best[0]:
                best = (d, r)
        if best is None:
            return _ZERO
        r = best[1]
        if r != k:
            m[k], m[r] = m[r], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, n):
            rik = m[i][k]
            if rik.is_zero():
                for j in range(k + 1, n):
                    if not m[i][j].is_zero():
                        m[i][j] = exact_div(pivot * m[i][j], prev)
            else:
                for j in range(k + 1, n):
                    m[i][j] = exact_div(pivot * m[i][j] - rik * m[k][j], prev)
            m[i][k] = _ZERO
        prev = pivot
    det = m[n - 1][n - 1]
    return det if sign > 0 else -det


def _det_laplace(m, budget=_LAPLACE_BUDGET):
    n = len(m)
    memo = {}

    def minor(rows, cols):
        if len(rows) == 1:
            return m[rows[0]][cols[0]]
        key = (rows, cols)
        got = memo.get(key)
        if got is not None:
            return got
        if len(memo) > budget:
            raise _BudgetExceeded
        # pick the sparsest line among rows and columns
        best_row, best_row_cnt = None, None
        for pos, r in enumerate(rows):
            cnt = sum(1 for c in cols if not m[r][c].is_zero())
            if best_row_cnt is None or cnt < best_row_cnt:
                best_row, best_row_cnt = pos, cnt
        best_col, best_col_cnt = None, None
        for pos, c in enumerate(cols):
            cnt = sum(1 for r in rows if not m[r][c].is_zero())
            if best_col_cnt is None or cnt < best_col_cnt:
                best_col, best_col_cnt = pos, cnt
        det = _ZERO
        if best_row_cnt <= best_col_cnt:
            pos = best_row
            r = rows[pos]
            sub_rows = rows[:pos] + rows[pos + 1:]
            for cpos, c in enumerate(cols):
                e = m[r][c]
                if e.is_zero():
                    continue
                sub = minor(sub_rows, cols[:cpos] + cols[cpos + 1:])
                term = e * sub
                det = det + (term if (pos + cpos) % 2 == 0 else -term)
        else:
            pos = best_col
            c = cols[pos]
            sub_cols = cols[:pos] + cols[pos + 1:]
            for rpos, r in enumerate(rows):
                e = m[r][c]
                if e.is_zero():
                    continue
                sub = minor(rows[:rpos] + rows[rpos + 1:], sub_cols)
                term = e * sub
                det = det + (term if (rpos + pos) % 2 == 0 else -term)
        memo[key] = det
        return det

    return minor(tuple(range(n)), tuple(range(n)))


def determinant(m, method="auto"):
    """Exact determinant of a square matrix of polynomials.

    ``auto`` switches to memoized Laplace expansion when more than 40% of
    the entries are zero (typical for the banded matrices built here) and
    uses fraction-free Bareiss elimination otherwise.  Both routes are
    exact and agree; the Laplace route falls back to Bareiss if its memo
    outgrows a fixed budget.
    """
    n = len(m)
    if n == 0 or any(len(row) != n for row in m):
        raise NonSquare(f"matrix is not square: {n} rows")
    m = [[as_poly(e) for e in row] for row in m]
    if method == "bareiss":
        return _det_bareiss(m)
    if method == "laplace":
        return _det_laplace(m, budget=1 << 62)
    zero = sum(1 for row in m for e in row if e.is_zero())
    if zero > 0.4 * n * n:
        try:
            return _det_laplace(m)
        except _BudgetExceeded:
            pass
    return _det_bareiss(m)


# ---------------------------------------------------------------------------
# rank and kernels over the fraction field
# ---------------------------------------------------------------------------


def _poly_rows(m):
    """Clear denominators row by row; rank and kernels are unaffected."""
    rows = []
    for row in m:
        if any(isinstance(e, Frac) for e in row):
            row = [Frac.of(e) for e in row]
            common = _ONE
            for e in row:
                common = common * e.den
            rows.append([e.num * exact_div(common, e.den) for e in row])
        else:
            rows.append([as_poly(e) for e in row])
    return rows


def _strip_row(row):
    """Divide a polynomial row by its rational and monomial content."""
    nz = [e for e in row if not e.is_zero()]
    if not nz:
        return row
    c = nz[0].rational_content()
    g = nz[0].monomial_content()
    for e in nz[1:]:
        rc = e.rational_content()
        c = Fraction(math.gcd(c.numerator, rc.numerator),
                     (c.denominator * rc.denominator
                      // math.gcd(c.denominator, rc.denominator)))
        g = _mono_gcd(g, e.monomial_content())
    if c == 1 and not g:
        return row
    out = []
    for e in row:
        if e.is_zero():
            out.append(e)
            continue
        terms = {(_mono_div(m, g) if g else m): cf / c for m, cf in e.terms.items()}
        out.append(Poly(terms))
    return out


def rank(m):
    """Rank over the fraction field by fraction-free elimination.

    The pivot is always a structurally nonzero entry of least total degree.
    """
    rows = _poly_rows(m)
    if not rows:
        return 0
    ncols = len(rows[0])
    live_cols = list(range(ncols))
    r = 0
    while rows and live_cols:
        best = None
        for ri, row in enumerate(rows):
            for ci in live_cols:
                e = row[ci]
                if e.is_zero():
                    continue
                d = e.total_degree()
                if best is None or d < best[0]:
                    best = (d, ri, ci)
        if best is None:
            break
        _, ri, ci = best
        pivot_row = rows.pop(ri)
        pivot = pivot_row[ci]
        nxt = []
        for row in rows:
            e = row[ci]
            if e.is_zero():
                nxt.append(row)
            else:
                nxt.append(_strip_row([pivot * a - e * b
                                       for a, b in zip(row, pivot_row)]))
        rows = nxt
        live_cols.remove(ci)
        r += 1
    return r


def left_kernel_echelon(m, coord_order=None):
    """Basis of {v : v.m = 0} over the fraction field, in echelon form.

    ``coord_order`` lists the kernel coordinates (row indices of m) from
    largest to smallest; default 0 > 1 > ... .  Each returned vector has
    leading coefficient 1 on its leading (largest) coordinate, leading
    coordinates are distinct, and rows are sorted so the last row has the
    smallest leading coordinate.
    """
    nrows = len(m)
    if nrows == 0:
        return []
    ncols = len(m[0])
    if coord_order is None:
        coord_order = list(range(nrows))
    pos = {c: i for i, c in enumerate(coord_order)}

    zero = Frac.of(0)
    one = Frac.of(1)
    work = []
    for i, row in enumerate(m):
        left = [Frac.of(e) for e in row]
        right = [one if j == i else zero for j in range(nrows)]
        work.append((left, right))

    for c in range(ncols):
        pivot_idx = None
        for idx, (left, _) in enumerate(work):
            if not left[c].is_zero():
                pivot_idx = idx
                break
        if pivot_idx is None:
            continue
        pleft, pright = work.pop(pivot_idx)
        pv = pleft[c]
        reduced = []
        for left, right in work:
            e = left[c]
            if e.is_zero():
                reduced.append((left, right))
            else:
                f = e / pv
                reduced.append((
                    [a - f * b for a, b in zip(left, pleft)],
                    [a - f * b for a, b in zip(right, pright)],
                ))
        work = reduced

    kernel = []
    for left, right in work:
        assert all(e.is_zero() for e in left)
        kernel.append(list(right))

    # reduced echelon with respect to the coordinate order
    def lead(v):
        best = None
        for c in range(nrows):
            if not v[c].is_zero():
                p = pos[c]
                if best is None or p < best:
                    best = p
        return best

    basis = []
    for v in kernel:
        for b in basis:
            p = lead(b)
            c = coord_order[p]
            if not v[c].is_zero():
                f = v[c]
                v = [a - f * bb for a, bb in zip(v, b)]
        if any(not e.is_zero() for e in v):
            p = lead(v)
            c = coord_order[p]
            f = v[c]
            v = [a / f for a in v]
            # clear this coordinate from the earlier basis vectors
            basis = [
                [a - b[c] * vv for a, vv in zip(b, v)] if not b[c].is_zero() else b
                for b in basis
            ]
            basis.append(v)
    basis.sort(key=lead)
    return basis
