"""Exterior algebra over a named coframe with exact coefficients.

A Coframe fixes an ordered basis of 1-forms, each expressed over the
coordinate differentials of its registry (one differential per registry
variable, so the matrix is square). Forms are stored over the named
coframe; exterior differentiation goes through coordinates internally and
re-expresses the result in the coframe via the cached exact inverse.

Degree-p forms hold {strictly increasing index tuple: RationalFunction}.
With names ordered (rho, kappa, zeta, kappab, zetab), index pairs enumerate
in lexicographic order, which is the 2-form basis order the reports use.
"""

from .errors import SingularMatrixError
from .cr_geometry import VectorField
from .reports import Check, clip
from .scalar_algebra import (
    Polynomial,
    RationalFunction,
    _as_gaussian_or_none,
)


def _merge_indices(ia, ib):
    """Merge strictly increasing tuples; (merged, parity sign) or (None, 0)."""
    out = []
    sign = 1
    i = j = 0
    la = len(ia)
    while i < la and j < len(ib):
        x, y = ia[i], ib[j]
        if x == y:
            return None, 0
        if x < y:
            out.append(x)
            i += 1
        else:
            if (la - i) & 1:
                sign = -sign
            out.append(y)
            j += 1
    out.extend(ia[i:])
    out.extend(ib[j:])
    return tuple(out), sign


def _sorted_parity(idx):
    """Sort an index tuple; (sorted, parity sign) or (None, 0) on repeats."""
    lst = list(idx)
    sign = 1
    for i in range(1, len(lst)):
        j = i
        while j and lst[j - 1] > lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            sign = -sign
            j -= 1
        if j and lst[j - 1] == lst[j]:
            return None, 0
    return tuple(lst), sign


def _invert_matrix(m, reg):
    """Exact inverse by Gauss-Jordan; pivot on first symbolically nonzero."""
    n = len(m)
    one = RationalFunction.const(reg, 1)
    zero = RationalFunction.const(reg, 0)
    aug = [
        list(row) + [one if i == j else zero for j in range(n)]
        for i, row in enumerate(m)
    ]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if not aug[r][col].is_zero():
                piv = r
                break
        if piv is None:
            raise SingularMatrixError("coframe matrix is singular")
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
        inv = one / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r == col:
                continue
            f = aug[r][col]
            if f.is_zero():
                continue
            aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


class Coframe:
    """Ordered named 1-forms over the coordinate differentials of a registry.

    rows[name] lists the coefficient of each coordinate differential, in
    registry.names order. conj_pairs declares how conjugation permutes the
    named forms; names missing from the map are self-conjugate. The pairing
    is validated exactly against the rows at construction.
    """

    __slots__ = (
        "registry",
        "names",
        "index",
        "conj_names",
        "rows",
        "_inv",
        "_dual",
        "_dtheta",
        "_coord_forms",
        "_transition",
    )

    def __init__(self, registry, names, rows, conj_pairs=None):
        self.registry = registry
        self.names = tuple(names)
        if len(self.names) != registry.nvars:
            raise ValueError(
                "coframe needs %d forms, got %d" % (registry.nvars, len(self.names))
            )
        self.index = {nm: j for j, nm in enumerate(self.names)}
        if len(self.index) != len(self.names):
            raise ValueError("duplicate coframe names")
        conj_pairs = conj_pairs or {}
        full = {nm: conj_pairs.get(nm, nm) for nm in self.names}
        for a, b in full.items():
            if b not in full or full[b] != a:
                raise ValueError("conjugation must be an involution on names")
        self.conj_names = full
        self.rows = {}
        for nm in self.names:
            row = tuple(rows[nm])
            if len(row) != registry.nvars:
                raise ValueError("row %r has wrong length" % nm)
            self.rows[nm] = row
        self._check_conj_pairing()
        self._inv = None
        self._dual = None
        self._dtheta = {}
        self._coord_forms = None
        self._transition = {}

    def _check_conj_pairing(self):
        reg = self.registry
        perm = [reg.index[reg.conj_names[nm]] for nm in reg.names]
        for nm in self.names:
            row = self.rows[nm]
            other = self.rows[self.conj_names[nm]]
            for j in range(reg.nvars):
                if not (row[j].conj() - other[perm[j]]).is_zero():
                    raise ValueError(
                        "conjugation pairing fails for %r at d%s"
                        % (nm, reg.names[j])
                    )

    @property
    def inverse(self):
        """inverse[j][m]: coefficient of form m in the coordinate differential j."""
        if self._inv is None:
            self._inv = _invert_matrix(
                [list(self.rows[nm]) for nm in self.names], self.registry
            )
        return self._inv

    def dual_field(self, name):
        """Vector field X with theta^i(X) = delta^i_name."""
        if self._dual is None:
            inv = self.inverse
            reg = self.registry
            fields = {}
            for m, nm in enumerate(self.names):
                coeffs = {}
                for j, cnm in enumerate(reg.names):
                    c = inv[j][m]
                    if not c.is_zero():
                        coeffs[cnm] = c
                fields[nm] = VectorField(reg, coeffs)
            self._dual = fields
        return self._dual[name]

    def coord_form(self, j):
        """The coordinate differential dx_j expressed in this coframe."""
        if self._coord_forms is None:
            inv = self.inverse
            forms = []
            for row in inv:
                terms = {}
                for m, c in enumerate(row):
                    if not c.is_zero():
                        terms[(m,)] = c
                forms.append(DiffForm(self, 1, terms))
            self._coord_forms = forms
        return self._coord_forms[j]

    def zero(self, degree):
        return DiffForm(self, degree, {})

    def function(self, f):
        """Wrap a scalar as a degree-0 form."""
        f = _as_ratfn(self.registry, f)
        return DiffForm(self, 0, {} if f.is_zero() else {(): f})

    def basis_form(self, *names):
        idx, sign = _sorted_parity(tuple(self.index[nm] for nm in names))
        if idx is None:
            return self.zero(len(names))
        c = RationalFunction.const(self.registry, sign)
        return DiffForm(self, len(names), {idx: c})

    def one_form(self, coeffs):
        """1-form from {name: coefficient}."""
        terms = {}
        for nm, c in coeffs.items():
            c = _as_ratfn(self.registry, c)
            if not c.is_zero():
                terms[(self.index[nm],)] = c
        return DiffForm(self, 1, terms)

    def d_function(self, f):
        """Exterior differential of a scalar, expanded over the coframe."""
        f = _as_ratfn(self.registry, f)
        terms = {}
        for m, nm in enumerate(self.names):
            c = self.dual_field(nm).apply(f)
            if not c.is_zero():
                terms[(m,)] = c
        return DiffForm(self, 1, terms)

    def d_named(self, name):
        """d of the named basis 1-form, as a 2-form in this coframe."""
        got = self._dtheta.get(name)
        if got is not None:
            return got
        reg = self.registry
        row = self.rows[name]
        out = self.zero(2)
        for j in range(reg.nvars):
            aj = row[j]
            if aj.is_zero():
                continue
            for l in range(reg.nvars):
                if l == j:
                    continue
                dl = aj.partial(reg.names[l])
                if dl.is_zero():
                    continue
                # d a_j wedge dx_j picks up dx_l wedge dx_j
                out = out + wedge(
                    self.coord_form(l), self.coord_form(j)
                ) * dl
        self._dtheta[name] = out
        return out

    def __repr__(self):
        return "Coframe(%r)" % (self.names,)


def _as_ratfn(reg, x):
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction(Polynomial(reg, x.terms))
    c = _as_gaussian_or_none(x)
    if c is None:
        raise TypeError("cannot coerce %r to a coefficient" % (x,))
    return RationalFunction.const(reg, c)


class DiffForm:
    """Exterior form of fixed degree over a coframe.

    terms maps strictly increasing index tuples (over coframe names) to
    RationalFunction coefficients; zero coefficients are never stored.
    """

    __slots__ = ("coframe", "degree", "terms")

    def __init__(self, coframe, degree, terms):
        self.coframe = coframe
        self.degree = degree
        self.terms = terms

    def _same(self, other):
        if self.coframe is not other.coframe:
            raise ValueError("mixed coframes")

    def __add__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        self._same(other)
        if self.degree != other.degree:
            raise ValueError("degree mismatch in form sum")
        out = dict(self.terms)
        for idx, c in other.terms.items():
            cur = out.get(idx)
            s = c if cur is None else cur + c
            if s.is_zero():
                out.pop(idx, None)
            else:
                out[idx] = s
        return DiffForm(self.coframe, self.degree, out)

    def __sub__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return DiffForm(
            self.coframe, self.degree, {i: -c for i, c in self.terms.items()}
        )

    def __mul__(self, scalar):
        """Scale by a function (not a wedge; use wedge() for forms)."""
        if isinstance(scalar, DiffForm):
            return NotImplemented
        f = _as_ratfn(self.coframe.registry, scalar)
        if f.is_zero():
            return DiffForm(self.coframe, self.degree, {})
        out = {}
        for idx, c in self.terms.items():
            p = c * f
            if not p.is_zero():
                out[idx] = p
        return DiffForm(self.coframe, self.degree, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        self._same(other)
        if self.degree != other.degree:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def is_zero(self):
        return not self.terms

    def coefficient(self, *names):
        """Coefficient of the wedge of the given names, sign-normalized."""
        cf = self.coframe
        idx, sign = _sorted_parity(tuple(cf.index[nm] for nm in names))
        if idx is None or len(names) != self.degree:
            raise ValueError("expected %d distinct names" % self.degree)
        c = self.terms.get(idx)
        if c is None:
            return RationalFunction.const(cf.registry, 0)
        return c if sign > 0 else -c

    def conj(self):
        cf = self.coframe
        cmap = [cf.index[cf.conj_names[nm]] for nm in cf.names]
        out = {}
        for idx, c in self.terms.items():
            nidx, sign = _sorted_parity(tuple(cmap[i] for i in idx))
            cc = c.conj()
            out[nidx] = cc if sign > 0 else -cc
        return DiffForm(cf, self.degree, out)

    def __str__(self):
        if not self.terms:
            return "0"
        cf = self.coframe
        parts = []
        for idx in sorted(self.terms):
            mono = "^".join(cf.names[i] for i in idx) if idx else "1"
            parts.append("(%s) %s" % (self.terms[idx], mono))
        return " + ".join(parts)

    def __repr__(self):
        return "DiffForm(%s)" % self


def wedge(a, b):
    """Graded wedge product of two forms over one coframe."""
    a._same(b)
    cf = a.coframe
    degree = a.degree + b.degree
    if degree > len(cf.names):
        return DiffForm(cf, degree, {})
    out = {}
    for ia, ca in a.terms.items():
        for ib, cb in b.terms.items():
            idx, sign = _merge_indices(ia, ib)
            if idx is None:
                continue
            c = ca * cb
            if sign < 0:
                c = -c
            cur = out.get(idx)
            s = c if cur is None else cur + c
            if s.is_zero():
                out.pop(idx, None)
            else:
                out[idx] = s
    return DiffForm(cf, degree, out)


def exterior_d(a):
    """Exterior differential; coefficients differentiate in coordinates."""
    cf = a.coframe
    out = cf.zero(a.degree + 1)
    for idx, c in a.terms.items():
        dc = cf.d_function(c)
        if idx:
            base = DiffForm(
                cf, len(idx), {idx: RationalFunction.const(cf.registry, 1)}
            )
            out = out + wedge(dc, base)
            for t in range(len(idx)):
                pre = idx[:t]
                post = idx[t + 1:]
                piece = cf.d_named(cf.names[idx[t]])
                if pre:
                    piece = wedge(
                        DiffForm(cf, len(pre), {pre: RationalFunction.const(cf.registry, 1)}),
                        piece,
                    )
                if post:
                    piece = wedge(
                        piece,
                        DiffForm(cf, len(post), {post: RationalFunction.const(cf.registry, 1)}),
                    )
                if t & 1:
                    piece = -piece
                out = out + piece * c
        else:
            out = out + dc
    return out


def extract_coefficient(form, i, j):
    """Coefficient of theta^i wedge theta^j in a 2-form (Notation 5.3 style)."""
    if form.degree != 2:
        raise ValueError("extract_coefficient expects a 2-form")
    return form.coefficient(i, j)


def change_coframe(a, new):
    """Re-express a form over another coframe on the same coordinates."""
    old = a.coframe
    if old is new:
        return a
    if new.registry is not old.registry:
        raise ValueError("coframes live on different coordinates")
    trans = old._transition.get(id(new))
    if trans is None:
        # theta_old^k = sum_j rows[k][j] dx_j, then dx_j over the new frame
        trans = []
        for nm in old.names:
            row = old.rows[nm]
            f = new.zero(1)
            for j, c in enumerate(row):
                if not c.is_zero():
                    f = f + new.coord_form(j) * c
            trans.append(f)
        old._transition[id(new)] = (trans, new)
    else:
        trans = trans[0]
    out = new.zero(a.degree)
    one = RationalFunction.const(new.registry, 1)
    for idx, c in a.terms.items():
        piece = DiffForm(new, 0, {(): one})
        for i in idx:
            piece = wedge(piece, trans[i])
        out = out + piece * c
    return out


def verify_darboux(cf, stated, cite="", relations=()):
    """Check d of each named 1-form against a stated structure table.

    stated: {name: 2-form over cf}. Passing forms yield one Check each;
    a mismatch yields one failing Check per differing coefficient.
    relations: extra (check_id, cite, fn) rows where fn(extract) must
    return an identically zero function; extract(name, i, j) reads a
    computed structure coefficient.
    """
    checks = []
    computed = {}
    for nm in cf.names:
        computed[nm] = exterior_d(cf.basis_form(nm))
    for nm, want in stated.items():
        got = computed[nm]
        diff = got - want
        if diff.is_zero():
            checks.append(Check("d(%s)" % nm, cite, "pass", ""))
            continue
        for idx in sorted(diff.terms):
            pair = "^".join(cf.names[i] for i in idx)
            checks.append(
                Check(
                    "d(%s)[%s]" % (nm, pair),
                    cite,
                    "fail",
                    clip("computed-stated = %s" % diff.terms[idx]),
                )
            )

    def extract(name, i, j):
        return computed[name].coefficient(i, j)

    for cid, rcite, fn in relations:
        val = fn(extract)
        if val.is_zero():
            checks.append(Check(cid, rcite, "pass", ""))
        else:
            checks.append(Check(cid, rcite, "fail", clip("residual = %s" % val)))
    return checks
