"""Exact scalar layer: Gaussian rationals, sparse polynomials, rational
functions and the expression parser, all over a shared variable registry.

Polynomials store terms as {packed exponent key: (re, im)} with gmpy2.mpq
parts. A key packs [total degree | e_0 | ... | e_{n-1}] into 20-bit fields
with e_0 most significant below the degree field, so plain int comparison is
graded lexicographic order and plain int addition multiplies monomials.

Rational functions never compute a polynomial gcd. The denominator is kept
as a monomial times a product of interned monic factor powers, so quotient
rules and common-denominator sums reuse the same small factors instead of
multiplying expanded denominators. The numerator is reduced against the
factor base by exact trial division only; beyond that num and den may share
polynomial factors, and equality is decided by cross-multiplication.
Normalization guarantees: den's leading coefficient is 1 and num/den carry
no common monomial content.
"""

import re as _re_mod
from fractions import Fraction as _Fraction

from gmpy2 import mpq

from . import termops
from .errors import (
    DegreeOverflowError,
    ParseError,
    PoleError,
)

SHIFT = 20
MASK = (1 << SHIFT) - 1

_TERM_CEILING = 2_000_000


def set_term_ceiling(n):
    """Set the global term ceiling; returns the previous value."""
    global _TERM_CEILING
    old = _TERM_CEILING
    _TERM_CEILING = int(n)
    return old


def get_term_ceiling():
    return _TERM_CEILING


_MPQ_ONE = mpq(1)
_MPQ_ZERO = mpq(0)


class GaussianRational:
    """An element of Q(i): exact real and imaginary parts, both mpq."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = mpq(re)
        self.im = mpq(im)

    @staticmethod
    def _coerce(x):
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, type(_MPQ_ONE))):
            return GaussianRational(x)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n2 = o.re * o.re + o.im * o.im
        if not n2:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / n2,
            (self.im * o.re - self.re * o.im) / n2,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return GaussianRational(1) / self ** (-k)
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def conj(self):
        return GaussianRational(self.re, -self.im)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def is_zero(self):
        return not self

    def to_complex(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        return _coeff_str(self.re, self.im)

    def __repr__(self):
        return "GaussianRational(%s)" % self


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)
GR_I = GaussianRational(0, 1)


def _coeff_str(r, i):
    if not i:
        return str(r)
    if not r:
        if i == 1:
            return "i"
        if i == -1:
            return "-i"
        return "%s*i" % i
    im = "i" if i == 1 else ("-i" if i == -1 else "%s*i" % abs(i))
    op = "+" if i > 0 else "-"
    if im.startswith("-"):
        im = im[1:]
    return "(%s%s%s)" % (r, op, im)


class VarRegistry:
    """Ordered variable names with a conjugation involution.

    The name order fixes both the packed-key layout and the graded-lex term
    order. conj_pairs maps names to their conjugates; names missing from the
    map are self-conjugate (real).
    """

    __slots__ = (
        "names",
        "index",
        "nvars",
        "top_shift",
        "conj_names",
        "_conj_idx",
        "_var_keys",
        "_shifts",
        "_factors",
    )

    def __init__(self, names, conj_pairs=None):
        self.names = tuple(names)
        self.nvars = len(self.names)
        self.index = {nm: j for j, nm in enumerate(self.names)}
        if len(self.index) != self.nvars:
            raise ValueError("duplicate variable names")
        conj_pairs = conj_pairs or {}
        full = {nm: conj_pairs.get(nm, nm) for nm in self.names}
        for a, b in full.items():
            if b not in full or full[b] != a:
                raise ValueError("conjugation must be an involution on names")
        self.conj_names = full
        self._conj_idx = tuple(self.index[full[nm]] for nm in self.names)
        self.top_shift = SHIFT * self.nvars
        self._shifts = tuple(
            SHIFT * (self.nvars - 1 - j) for j in range(self.nvars)
        )
        self._var_keys = tuple(
            (1 << self.top_shift) | (1 << self._shifts[j])
            for j in range(self.nvars)
        )
        self._factors = None

    def __eq__(self, other):
        return (
            isinstance(other, VarRegistry)
            and self.names == other.names
            and self.conj_names == other.conj_names
        )

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return "VarRegistry(%r)" % (self.names,)

    def pack(self, exps):
        if len(exps) != self.nvars:
            raise ValueError("expected %d exponents" % self.nvars)
        total = 0
        key = 0
        for j, e in enumerate(exps):
            if e < 0 or e > MASK:
                raise DegreeOverflowError("exponent %d out of field range" % e)
            total += e
            key |= e << self._shifts[j]
        if total > MASK:
            raise DegreeOverflowError("total degree %d out of field range" % total)
        return key | (total << self.top_shift)

    def unpack(self, key):
        return tuple((key >> s) & MASK for s in self._shifts)

    def total_degree(self, key):
        return key >> self.top_shift

    def var_key(self, name):
        return self._var_keys[self.index[name]]

    def conj_key(self, key):
        e = self.unpack(key)
        ci = self._conj_idx
        return self.pack(tuple(e[ci[j]] for j in range(self.nvars)))

    def is_real_name(self, name):
        return self.conj_names[name] == name


BASE_NAMES = ("z1", "z2", "zb1", "zb2", "v")
BASE_CONJ = {"z1": "zb1", "zb1": "z1", "z2": "zb2", "zb2": "z2"}


def base_registry():
    """Registry for functions on the surface: (z1, z2, zb1, zb2, v)."""
    return VarRegistry(BASE_NAMES, BASE_CONJ)


class Polynomial:
    """Sparse exact polynomial over a registry.

    terms maps packed keys to (re, im) mpq pairs; zero coefficients are never
    stored. The dict passed to the constructor is adopted, not copied.
    """

    __slots__ = ("registry", "terms")

    def __init__(self, registry, terms):
        self.registry = registry
        self.terms = terms

    @classmethod
    def zero(cls, registry):
        return cls(registry, {})

    @classmethod
    def const(cls, registry, value):
        c = _as_gaussian(value)
        if not c:
            return cls(registry, {})
        return cls(registry, {0: (c.re, c.im)})

    @classmethod
    def variable(cls, registry, name):
        return cls(registry, {registry.var_key(name): (_MPQ_ONE, _MPQ_ZERO)})

    def _same(self, other):
        if self.registry is not other.registry and self.registry != other.registry:
            raise ValueError("mixed variable registries")

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            self._same(other)
            return other
        c = _as_gaussian_or_none(other)
        if c is None:
            return None
        return Polynomial.const(self.registry, c)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Polynomial(self.registry, termops.add_terms(self.terms, o.terms))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Polynomial(self.registry, termops.sub_terms(self.terms, o.terms))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Polynomial(self.registry, termops.sub_terms(o.terms, self.terms))

    def __neg__(self):
        return Polynomial(self.registry, termops.neg_terms(self.terms))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.terms, o.terms
        if a and b:
            top = self.registry.top_shift
            if (max(a) >> top) + (max(b) >> top) > MASK:
                raise DegreeOverflowError("product degree exceeds field range")
        return Polynomial(self.registry, termops.mul_terms(a, b, _TERM_CEILING))

    __rmul__ = __mul__

    def scale(self, value):
        c = _as_gaussian(value)
        return Polynomial(self.registry, termops.scale_terms(self.terms, c.re, c.im))

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be nonnegative ints")
        out = Polynomial.const(self.registry, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self):
        return not self.terms

    def total_degree(self):
        if not self.terms:
            return -1
        return max(self.terms) >> self.registry.top_shift

    def leading_key(self):
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        return max(self.terms)

    def leading_coeff(self):
        r, i = self.terms[self.leading_key()]
        return GaussianRational(r, i)

    def coeff(self, key):
        c = self.terms.get(key)
        if c is None:
            return GaussianRational(0)
        return GaussianRational(*c)

    def conj(self):
        ck = self.registry.conj_key
        return Polynomial(
            self.registry, {ck(k): (r, -i) for k, (r, i) in self.terms.items()}
        )

    def partial(self, name):
        reg = self.registry
        j = reg.index[name]
        vk = reg._var_keys[j]
        sh = reg._shifts[j]
        out = {}
        for k, (r, i) in self.terms.items():
            e = (k >> sh) & MASK
            if e:
                m = mpq(e)
                out[k - vk] = (r * m, i * m)
        return Polynomial(reg, out)

    def depends_on(self, name):
        sh = self.registry._shifts[self.registry.index[name]]
        return any((k >> sh) & MASK for k in self.terms)

    def promote(self, reg2):
        """Re-embed into a registry whose names contain this one's."""
        reg = self.registry
        if reg2 is reg or reg2 == reg:
            return self
        pos = [reg2.index[nm] for nm in reg.names]
        out = {}
        for k, c in self.terms.items():
            e = reg.unpack(k)
            e2 = [0] * reg2.nvars
            for j, ej in enumerate(e):
                e2[pos[j]] = ej
            out[reg2.pack(e2)] = c
        return Polynomial(reg2, out)

    def restrict(self, reg2):
        """Project onto a sub-registry; raises if other variables occur."""
        reg = self.registry
        keep = set(reg2.names)
        pos = {nm: reg2.index[nm] for nm in reg2.names}
        out = {}
        for k, c in self.terms.items():
            e = reg.unpack(k)
            e2 = [0] * reg2.nvars
            for j, ej in enumerate(e):
                if not ej:
                    continue
                nm = reg.names[j]
                if nm not in keep:
                    raise ValueError("polynomial depends on %r" % nm)
                e2[pos[nm]] = ej
            out[reg2.pack(e2)] = c
        return Polynomial(reg2, out)

    def eval_exact(self, point):
        """Evaluate at a point given as {name: GaussianRational-like}."""
        reg = self.registry
        vals = [_as_gaussian(point[nm]) for nm in reg.names]
        total = GaussianRational(0)
        for k, (r, i) in self.terms.items():
            term = GaussianRational(r, i)
            for j, ej in enumerate(reg.unpack(k)):
                if ej:
                    term = term * vals[j] ** ej
            total = total + term
        return total

    def eval_with(self, values, conv):
        """Evaluate with externally supplied scalar arithmetic.

        values: scalars ordered like registry.names.
        conv: maps one (re, im) mpq coefficient pair to the target type.
        """
        reg = self.registry
        total = None
        for k, c in self.terms.items():
            term = conv(c)
            for j, ej in enumerate(reg.unpack(k)):
                if ej:
                    term = term * values[j] ** ej
            total = term if total is None else total + term
        if total is None:
            return conv((_MPQ_ZERO, _MPQ_ZERO))
        return total

    def _mono_str(self, key):
        reg = self.registry
        parts = []
        for j, e in enumerate(reg.unpack(key)):
            if e == 1:
                parts.append(reg.names[j])
            elif e:
                parts.append("%s^%d" % (reg.names[j], e))
        return "*".join(parts)

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for k in sorted(self.terms, reverse=True):
            r, i = self.terms[k]
            mono = self._mono_str(k)
            sign, body = _term_str(r, i, mono)
            if not out:
                out.append(body if sign > 0 else "-" + body)
            else:
                out.append((" + " if sign > 0 else " - ") + body)
        return "".join(out)

    def __repr__(self):
        return "Polynomial(%s)" % self


def _term_str(r, i, mono):
    """Return (sign, body) for one term; sign folds into the separator."""
    if not i:
        sign = 1 if r > 0 else -1
        c = abs(r)
        if not mono:
            return sign, str(c)
        if c == 1:
            return sign, mono
        return sign, "%s*%s" % (c, mono)
    if not r:
        sign = 1 if i > 0 else -1
        c = abs(i)
        head = "i" if c == 1 else "%s*i" % c
        if not mono:
            return sign, head
        return sign, "%s*%s" % (head, mono)
    body = _coeff_str(r, i)
    if mono:
        body = "%s*%s" % (body, mono)
    return 1, body


def _as_gaussian(x):
    c = _as_gaussian_or_none(x)
    if c is None:
        raise TypeError("cannot coerce %r to GaussianRational" % (x,))
    return c


def _as_gaussian_or_none(x):
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, int) or isinstance(x, type(_MPQ_ONE)):
        return GaussianRational(x)
    if isinstance(x, _Fraction):
        return GaussianRational(mpq(x.numerator, x.denominator))
    return None


def _monomial_content_key(reg, *polys):
    """Packed key of the largest monomial dividing every term of every poly."""
    mins = None
    n = reg.nvars
    for p in polys:
        for k in p.terms:
            e = reg.unpack(k)
            if mins is None:
                mins = list(e)
            elif any(mins):
                for j in range(n):
                    if e[j] < mins[j]:
                        mins[j] = e[j]
            else:
                return 0
    if mins is None or not any(mins):
        return 0
    return reg.pack(mins)


def _shift_terms(terms, g):
    return {k - g: c for k, c in terms.items()}


class _FactorTable:
    """Interned monic denominator factors for one registry.

    Every factor is nonconstant, monomial-content-free and monic, so a
    denominator is fully described by a monomial key plus (factor id,
    exponent) pairs. The table caches each factor's partials, conjugate,
    string form and small powers; rational-function arithmetic then never
    recomputes them.
    """

    __slots__ = ("registry", "polys", "lookup", "strs", "partials", "conjs", "powers")

    def __init__(self, registry):
        self.registry = registry
        self.polys = []
        self.lookup = {}
        self.strs = []
        self.partials = []
        self.conjs = []
        self.powers = []

    def intern(self, poly):
        """Split poly as monomial * scale * monic factor.

        Returns (mono_key, fid, scale) with fid None when the reduced part
        is constant. poly must be nonzero.
        """
        reg = self.registry
        g = _monomial_content_key(reg, poly)
        terms = _shift_terms(poly.terms, g) if g else poly.terms
        if len(terms) == 1 and 0 in terms:
            r, i = terms[0]
            return g, None, GaussianRational(r, i)
        lk = max(terms)
        r, i = terms[lk]
        lc = GaussianRational(r, i)
        if lc != GR_ONE:
            inv = GR_ONE / lc
            terms = termops.scale_terms(terms, inv.re, inv.im)
        sig = frozenset(terms.items())
        fid = self.lookup.get(sig)
        if fid is None:
            fid = len(self.polys)
            self.lookup[sig] = fid
            self.polys.append(Polynomial(reg, dict(terms)))
            self.strs.append(None)
            self.partials.append({})
            self.conjs.append(None)
            self.powers.append({})
        return g, fid, lc

    def poly(self, fid):
        return self.polys[fid]

    def partial(self, fid, name):
        cache = self.partials[fid]
        p = cache.get(name)
        if p is None:
            p = self.polys[fid].partial(name)
            cache[name] = p
        return p

    def depends(self, fid, name):
        return not self.partial(fid, name).is_zero()

    def conj(self, fid):
        """Conjugate factor as (fid2, scale): conj(f) == scale * f2."""
        c = self.conjs[fid]
        if c is None:
            g, fid2, scale = self.intern(self.polys[fid].conj())
            if g:
                raise AssertionError("conjugate factor grew monomial content")
            c = (fid2, scale)
            self.conjs[fid] = c
        return c

    def power(self, fid, e):
        cache = self.powers[fid]
        p = cache.get(e)
        if p is None:
            p = self.polys[fid] ** e
            cache[e] = p
        return p

    def sort_str(self, fid):
        s = self.strs[fid]
        if s is None:
            s = str(self.polys[fid])
            self.strs[fid] = s
        return s


def _factor_table(reg):
    t = reg._factors
    if t is None:
        t = _FactorTable(reg)
        reg._factors = t
    return t


def _mono_min(reg, a, b):
    """Componentwise min of two packed monomial keys."""
    if not a or not b:
        return 0
    ea = reg.unpack(a)
    eb = reg.unpack(b)
    return reg.pack(tuple(min(x, y) for x, y in zip(ea, eb)))


def _mono_max(reg, a, b):
    if not a:
        return b
    if not b:
        return a
    ea = reg.unpack(a)
    eb = reg.unpack(b)
    return reg.pack(tuple(max(x, y) for x, y in zip(ea, eb)))


def _mono_scale(reg, mono, k):
    """Packed key of the k-th power of the monomial with packed key mono."""
    if not mono or k == 1:
        return mono
    if not k:
        return 0
    return reg.pack(tuple(e * k for e in reg.unpack(mono)))


def _mul_mono(poly, mono):
    """Multiply a polynomial by the monomial with packed key mono."""
    if not mono or not poly.terms:
        return poly
    reg = poly.registry
    top = reg.top_shift
    if (max(poly.terms) >> top) + (mono >> top) > MASK:
        raise DegreeOverflowError("product degree exceeds field range")
    return Polynomial(reg, {k + mono: c for k, c in poly.terms.items()})


def _poly_divides(num, f):
    """Quotient Polynomial of num / f, or None when not exactly divisible."""
    nt, ft = num.terms, f.terms
    if not nt:
        return num
    reg = num.registry
    shifts = reg._shifts
    nk, fk = max(nt), max(ft)
    for s in shifts:
        if ((nk >> s) & MASK) < ((fk >> s) & MASK):
            return None
    # the min graded-lex term of a product is the product of min terms
    nm, fm = min(nt), min(ft)
    for s in shifts:
        if ((nm >> s) & MASK) < ((fm >> s) & MASK):
            return None
    q = termops.div_terms_exact(nt, ft, shifts, MASK)
    if q is None:
        return None
    return Polynomial(reg, q)


class RationalFunction:
    """Quotient of a Polynomial by a factored monic denominator.

    The denominator is a monomial key times interned monic factor powers;
    .den exposes it expanded. The numerator is trial-divided by the factor
    base, never gcd-reduced, so num and den may still share factors and
    equality tests cross-multiply. Invariants: den's leading coefficient is
    1 and num/den share no monomial content.
    """

    __slots__ = ("num", "_mono", "_factors", "_den")

    def __init__(self, num, den=None):
        if den is not None:
            num._same(den)
            if den.is_zero():
                raise ZeroDivisionError("zero denominator")
        if num.is_zero() or den is None:
            self.num = num
            self._mono = 0
            self._factors = ()
            self._den = None
            return
        table = _factor_table(num.registry)
        mono, fid, scale = table.intern(den)
        if scale != GR_ONE:
            num = num.scale(GR_ONE / scale)
        tmp = RationalFunction._build(num, mono, {fid: 1} if fid is not None else {})
        self.num = tmp.num
        self._mono = tmp._mono
        self._factors = tmp._factors
        self._den = None

    @classmethod
    def _build(cls, num, mono, fdict):
        """Assemble num / (x^mono * prod f^e), reducing num by trial division."""
        rf = object.__new__(cls)
        rf._den = None
        reg = num.registry
        if num.is_zero():
            rf.num = num
            rf._mono = 0
            rf._factors = ()
            return rf
        table = _factor_table(reg)
        fl = {f: e for f, e in fdict.items() if e}
        for fid in sorted(fl):
            f = table.polys[fid]
            while fl[fid]:
                q = _poly_divides(num, f)
                if q is None:
                    break
                num = q
                fl[fid] -= 1
            if not fl[fid]:
                del fl[fid]
        if mono:
            g = _mono_min(reg, mono, _monomial_content_key(reg, num))
            if g:
                num = Polynomial(reg, _shift_terms(num.terms, g))
                mono -= g
        rf.num = num
        rf._mono = mono
        rf._factors = tuple(sorted(fl.items()))
        return rf

    def _rebase(self, reg2):
        """Rebuild over an equal registry object with its own factor table."""
        table = _factor_table(self.registry)
        table2 = _factor_table(reg2)
        fl = {}
        num = Polynomial(reg2, self.num.terms)
        for fid, e in self._factors:
            g, fid2, scale = table2.intern(Polynomial(reg2, table.polys[fid].terms))
            fl[fid2] = fl.get(fid2, 0) + e
            if g or scale != GR_ONE:
                raise AssertionError("rebase changed a normalized factor")
        return RationalFunction._build(num, self._mono, fl)

    @property
    def registry(self):
        return self.num.registry

    @property
    def den(self):
        """The denominator, expanded to a monic Polynomial."""
        d = self._den
        if d is None:
            reg = self.registry
            table = _factor_table(reg)
            d = Polynomial(reg, {self._mono: (_MPQ_ONE, _MPQ_ZERO)})
            for fid, e in self._factors:
                d = d * table.power(fid, e)
            self._den = d
        return d

    @classmethod
    def const(cls, registry, value):
        return cls(Polynomial.const(registry, value))

    @classmethod
    def variable(cls, registry, name):
        return cls(Polynomial.variable(registry, name))

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            self.num._same(other.num)
            if other.registry is not self.registry:
                other = other._rebase(self.registry)
            return other
        if isinstance(other, Polynomial):
            self.num._same(other)
            return RationalFunction(Polynomial(self.registry, other.terms))
        c = _as_gaussian_or_none(other)
        if c is None:
            return None
        return RationalFunction.const(self.registry, c)

    def _den_complement(self, mono_l, flcm):
        """Numerator multiplier lifting this den to the common den."""
        reg = self.registry
        table = _factor_table(reg)
        num = _mul_mono(self.num, mono_l - self._mono)
        have = dict(self._factors)
        for fid, e in flcm.items():
            d = e - have.get(fid, 0)
            if d:
                num = num * table.power(fid, d)
        return num

    def _combine(self, o, sign):
        if o.num.is_zero():
            return self
        if self.num.is_zero():
            return o if sign > 0 else -o
        if self._mono == o._mono and self._factors == o._factors:
            num = self.num + o.num if sign > 0 else self.num - o.num
            return RationalFunction._build(num, self._mono, dict(self._factors))
        reg = self.registry
        mono_l = _mono_max(reg, self._mono, o._mono)
        flcm = dict(self._factors)
        for fid, e in o._factors:
            if flcm.get(fid, 0) < e:
                flcm[fid] = e
        na = self._den_complement(mono_l, flcm)
        nb = o._den_complement(mono_l, flcm)
        num = na + nb if sign > 0 else na - nb
        return RationalFunction._build(num, mono_l, flcm)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._combine(o, 1)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._combine(o, -1)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.num.is_zero() or o.num.is_zero():
            return RationalFunction(Polynomial.zero(self.registry))
        fl = dict(self._factors)
        for fid, e in o._factors:
            fl[fid] = fl.get(fid, 0) + e
        return RationalFunction._build(
            self.num * o.num, self._mono + o._mono, fl
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.num.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        reg = self.registry
        table = _factor_table(reg)
        # o's den moves to the numerator; cancel shared den parts first
        c = _mono_min(reg, self._mono, o._mono)
        mono = self._mono - c
        omono = o._mono - c
        fl = dict(self._factors)
        onum_side = []
        for fid, e in o._factors:
            have = fl.get(fid, 0)
            keep = min(have, e)
            if keep:
                if have == keep:
                    del fl[fid]
                else:
                    fl[fid] = have - keep
            if e > keep:
                onum_side.append((fid, e - keep))
        num = _mul_mono(self.num, omono)
        for fid, e in onum_side:
            num = num * table.power(fid, e)
        g, fid2, scale = table.intern(o.num)
        if scale != GR_ONE:
            num = num.scale(GR_ONE / scale)
        if fid2 is not None:
            fl[fid2] = fl.get(fid2, 0) + 1
        return RationalFunction._build(num, mono + g, fl)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        rf = object.__new__(RationalFunction)
        rf.num = -self.num
        rf._mono = self._mono
        rf._factors = self._factors
        rf._den = self._den
        return rf

    def __pow__(self, k):
        if not isinstance(k, int):
            raise ValueError("rational function powers must be ints")
        reg = self.registry
        if k < 0:
            if self.num.is_zero():
                raise ZeroDivisionError("negative power of zero")
            table = _factor_table(reg)
            g, fid, scale = table.intern(self.num)
            num = self.den ** (-k)
            if scale != GR_ONE:
                num = num.scale((GR_ONE / scale) ** (-k))
            fl = {fid: -k} if fid is not None else {}
            return RationalFunction._build(num, _mono_scale(reg, g, -k), fl)
        return RationalFunction._build(
            self.num ** k,
            _mono_scale(reg, self._mono, k),
            {fid: e * k for fid, e in self._factors},
        )

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ratfn_equal(self, o)

    __hash__ = None

    def is_zero(self):
        return self.num.is_zero()

    def conj(self):
        reg = self.registry
        table = _factor_table(reg)
        num = self.num.conj()
        fl = {}
        for fid, e in self._factors:
            fid2, scale = table.conj(fid)
            fl[fid2] = fl.get(fid2, 0) + e
            if scale != GR_ONE:
                num = num.scale(GR_ONE / scale ** e)
        return RationalFunction._build(num, reg.conj_key(self._mono), fl)

    def is_real(self):
        """True when the function equals its own conjugate."""
        return ratfn_equal(self, self.conj())

    def partial(self, name):
        """Derivative via the factored quotient rule.

        Each denominator factor's exponent grows by one instead of the whole
        denominator squaring, so term counts stay polynomial under nesting.
        """
        reg = self.registry
        table = _factor_table(reg)
        j = reg.index[name]
        mexp = (self._mono >> reg._shifts[j]) & MASK
        vk = reg._var_keys[j]
        dfs = [
            (fid, e) for fid, e in self._factors if table.depends(fid, name)
        ]
        dnum = self.num.partial(name)
        if not mexp and not dfs:
            return RationalFunction._build(dnum, self._mono, dict(self._factors))
        polys = [table.polys[fid] for fid, _ in dfs]
        prod_all = Polynomial.const(reg, 1)
        for p in polys:
            prod_all = prod_all * p
        out = _mul_mono(dnum * prod_all, vk if mexp else 0)
        if mexp:
            out = out - (self.num * prod_all).scale(mexp)
        for i, (fid, e) in enumerate(dfs):
            comp = Polynomial.const(reg, 1)
            for i2, p2 in enumerate(polys):
                if i2 != i:
                    comp = comp * p2
            t = (self.num * table.partial(fid, name) * comp).scale(e)
            out = out - _mul_mono(t, vk if mexp else 0)
        fl = dict(self._factors)
        for fid, _ in dfs:
            fl[fid] += 1
        return RationalFunction._build(
            out, self._mono + (vk if mexp else 0), fl
        )

    def promote(self, reg2):
        reg = self.registry
        if reg2 is reg:
            return self
        table = _factor_table(reg)
        table2 = _factor_table(reg2)
        num = self.num.promote(reg2)
        pos = [reg2.index[nm] for nm in reg.names]
        e = reg.unpack(self._mono)
        e2 = [0] * reg2.nvars
        for j, ej in enumerate(e):
            e2[pos[j]] = ej
        fl = {}
        for fid, ex in self._factors:
            # a different name order can pick a new leading term
            g, fid2, scale = table2.intern(table.polys[fid].promote(reg2))
            if g:
                raise AssertionError("promotion grew monomial content")
            fl[fid2] = fl.get(fid2, 0) + ex
            if scale != GR_ONE:
                num = num.scale(GR_ONE / scale ** ex)
        return RationalFunction._build(num, reg2.pack(e2), fl)

    def restrict(self, reg2):
        return RationalFunction(self.num.restrict(reg2), self.den.restrict(reg2))

    def depends_on(self, name):
        reg = self.registry
        if self.num.depends_on(name):
            return True
        if (self._mono >> reg._shifts[reg.index[name]]) & MASK:
            return True
        table = _factor_table(reg)
        return any(table.polys[fid].depends_on(name) for fid, _ in self._factors)

    def is_constant(self):
        return self.num.total_degree() <= 0 and not self._mono and not self._factors

    def as_gaussian(self):
        """Constant value of a degree-0 function."""
        if not self.is_constant():
            raise ValueError("not a constant rational function")
        return self.num.coeff(0)

    def _den_eval_exact(self, point):
        reg = self.registry
        table = _factor_table(reg)
        dv = GR_ONE
        if self._mono:
            vals = [_as_gaussian(point[nm]) for nm in reg.names]
            for j, ej in enumerate(reg.unpack(self._mono)):
                if ej:
                    dv = dv * vals[j] ** ej
        for fid, e in self._factors:
            if not dv:
                return dv
            dv = dv * table.polys[fid].eval_exact(point) ** e
        return dv

    def eval_exact(self, point):
        dv = self._den_eval_exact(point)
        if not dv:
            raise PoleError("denominator vanishes at the sample point")
        return self.num.eval_exact(point) / dv

    def size(self):
        """Term-count proxy: numerator terms plus weighted factor terms."""
        n = len(self.num.terms)
        if self._mono:
            n += 1
        table = _factor_table(self.registry)
        for fid, e in self._factors:
            n += e * len(table.polys[fid].terms)
        return n

    def __str__(self):
        if not self._mono and not self._factors:
            return str(self.num)
        reg = self.registry
        table = _factor_table(reg)
        parts = []
        for j, ej in enumerate(reg.unpack(self._mono)):
            if ej == 1:
                parts.append(reg.names[j])
            elif ej:
                parts.append("%s^%d" % (reg.names[j], ej))
        fparts = sorted(
            (table.sort_str(fid), e) for fid, e in self._factors
        )
        single = not parts and len(fparts) == 1 and fparts[0][1] == 1
        for s, e in fparts:
            if single:
                parts.append(s)
            elif e == 1:
                parts.append("(%s)" % s)
            else:
                parts.append("(%s)^%d" % (s, e))
        return "(%s)/(%s)" % (self.num, "*".join(parts))

    def __repr__(self):
        return "RationalFunction(%s)" % self


def ratfn_equal(a, b):
    """Exact equality of rational functions by cross-multiplication."""
    if a.num.registry is not b.num.registry:
        if a.num.registry != b.num.registry:
            raise ValueError("mixed variable registries")
        b = b._rebase(a.num.registry)
    if a.num.terms == b.num.terms and a._mono == b._mono and a._factors == b._factors:
        return True
    if a.num.is_zero() or b.num.is_zero():
        return a.num.is_zero() and b.num.is_zero()
    reg = a.num.registry
    c = _mono_min(reg, a._mono, b._mono)
    bf = dict(b._factors)
    ares = []
    for fid, e in a._factors:
        keep = min(e, bf.get(fid, 0))
        if keep:
            bf[fid] -= keep
        if e > keep:
            ares.append((fid, e - keep))
    table = _factor_table(reg)
    lhs = _mul_mono(a.num, b._mono - c)
    for fid, e in bf.items():
        if e:
            lhs = lhs * table.power(fid, e)
    rhs = _mul_mono(b.num, a._mono - c)
    for fid, e in ares:
        rhs = rhs * table.power(fid, e)
    return lhs.terms == rhs.terms


def conjugate(a):
    """Conjugation on scalars, polynomials or rational functions."""
    return a.conj()


def partial(a, name):
    """Partial derivative with respect to a registry variable."""
    return a.partial(name)


def eval_point(a, assignment, pole_eps=1e-12):
    """Evaluate a rational function at a numeric point.

    assignment maps every registry name to an exact value (int, Fraction,
    GaussianRational) or a complex float. Exact values are evaluated exactly
    and converted at the end. Raises PoleError when |den| < pole_eps.
    """
    reg = a.registry
    exact = {}
    for nm in reg.names:
        c = _as_gaussian_or_none(assignment[nm])
        if c is None:
            exact = None
            break
        exact[nm] = c
    if exact is not None:
        dv = a._den_eval_exact(exact)
        dvc = dv.to_complex()
        if abs(dvc) < pole_eps:
            raise PoleError("denominator %.3e below pole threshold" % abs(dvc))
        return (a.num.eval_exact(exact) / dv).to_complex()
    vals = [complex(assignment[nm]) for nm in reg.names]

    def conv(c):
        return complex(float(c[0]), float(c[1]))

    table = _factor_table(reg)
    dv = complex(1.0)
    for j, ej in enumerate(reg.unpack(a._mono)):
        if ej:
            dv *= vals[j] ** ej
    for fid, e in a._factors:
        dv *= table.polys[fid].eval_with(vals, conv) ** e
    if abs(dv) < pole_eps:
        raise PoleError("denominator %.3e below pole threshold" % abs(dv))
    return a.num.eval_with(vals, conv) / dv


# ---------------------------------------------------------------------------
# Expression parser. Precedence: ^ (tightest, right-assoc, literal integer
# exponents only) then unary minus, then * /, then + -.

_TOKEN = _re_mod.compile(r"(\d+)|([A-Za-z_][A-Za-z0-9_]*)|([+\-*/^()])|(\S)")


def _lex(text):
    toks = []
    for m in _TOKEN.finditer(text):
        if m.group(4):
            raise ParseError("unexpected character %r" % m.group(4), m.start())
        if m.group(1):
            toks.append(("int", m.group(1), m.start()))
        elif m.group(2):
            toks.append(("name", m.group(2), m.start()))
        else:
            toks.append(("op", m.group(3), m.start()))
    toks.append(("end", "", len(text)))
    return toks


_LBP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_BP = 25


class _Parser:
    def __init__(self, text, registry):
        self.toks = _lex(text)
        self.pos = 0
        self.registry = registry

    def peek(self):
        return self.toks[self.pos]

    def advance(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect_op(self, op):
        kind, text, off = self.advance()
        if kind != "op" or text != op:
            raise ParseError("expected %r" % op, off)

    def parse(self):
        e = self.expression(0)
        kind, text, off = self.peek()
        if kind != "end":
            raise ParseError("unexpected trailing %r" % text, off)
        return e

    def expression(self, rbp):
        left = self.nud(self.advance())
        while True:
            kind, text, _ = self.peek()
            if kind != "op" or _LBP.get(text, 0) <= rbp:
                break
            left = self.led(self.advance(), left)
        return left

    def nud(self, tok):
        kind, text, off = tok
        if kind == "int":
            return RationalFunction.const(self.registry, int(text))
        if kind == "name":
            if text in self.registry.index:
                return RationalFunction.variable(self.registry, text)
            if text == "i":
                return RationalFunction.const(self.registry, GR_I)
            raise ParseError("unknown variable %r" % text, off)
        if kind == "op" and text == "(":
            e = self.expression(0)
            self.expect_op(")")
            return e
        if kind == "op" and text == "-":
            return -self.expression(_UNARY_BP)
        if kind == "op" and text == "+":
            return self.expression(_UNARY_BP)
        raise ParseError("unexpected %r" % (text or "end of input"), off)

    def led(self, tok, left):
        kind, text, off = tok
        if text == "+":
            return left + self.expression(10)
        if text == "-":
            return left - self.expression(10)
        if text == "*":
            return left * self.expression(20)
        if text == "/":
            right = self.expression(20)
            try:
                return left / right
            except ZeroDivisionError:
                raise ParseError("division by an identically zero expression", off)
        if text == "^":
            k = self._exponent()
            try:
                return left ** k
            except ZeroDivisionError:
                raise ParseError("negative power of zero expression", off)
        raise ParseError("unexpected operator %r" % text, off)

    def _exponent(self):
        kind, text, off = self.advance()
        neg = False
        closing = False
        if kind == "op" and text == "(":
            closing = True
            kind, text, off = self.advance()
        if kind == "op" and text == "-":
            neg = True
            kind, text, off = self.advance()
        if kind != "int":
            raise ParseError("exponent must be an integer literal", off)
        if closing:
            self.expect_op(")")
        k = int(text)
        # ^ is right-associative: the tail of a tower is itself an exponent
        nk, ntext, noff = self.peek()
        if nk == "op" and ntext == "^":
            self.advance()
            k2 = self._exponent()
            if k2 < 0:
                raise ParseError("negative exponent inside a power tower", noff)
            k = k ** k2
        return -k if neg else k


def parse_expr(text, registry):
    """Parse expression text into a RationalFunction over the registry."""
    return _Parser(text, registry).parse()
