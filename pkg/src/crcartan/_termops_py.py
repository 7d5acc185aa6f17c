"""Pure-Python term-dict kernel.

A term dict maps packed exponent keys (ints) to coefficient pairs (re, im)
of gmpy2.mpq. Zero coefficients are never stored. Packed keys add under
monomial multiplication, so the hot loops below reduce to int additions and
dict updates. The compiled twin in _termops_cy.pyx mirrors these functions
exactly; keep both in sync.
"""

import heapq

from .errors import TermCeilingError


def add_terms(a, b):
    if not b:
        return dict(a)
    if not a:
        return dict(b)
    out = dict(a)
    for k, cb in b.items():
        ca = out.get(k)
        if ca is None:
            out[k] = cb
        else:
            re = ca[0] + cb[0]
            im = ca[1] + cb[1]
            if re or im:
                out[k] = (re, im)
            else:
                del out[k]
    return out


def sub_terms(a, b):
    if not b:
        return dict(a)
    out = dict(a)
    for k, cb in b.items():
        ca = out.get(k)
        if ca is None:
            out[k] = (-cb[0], -cb[1])
        else:
            re = ca[0] - cb[0]
            im = ca[1] - cb[1]
            if re or im:
                out[k] = (re, im)
            else:
                del out[k]
    return out


def neg_terms(a):
    return {k: (-r, -i) for k, (r, i) in a.items()}


def scale_terms(a, cr, ci):
    """Multiply every coefficient by the scalar cr + ci*i."""
    if not (cr or ci):
        return {}
    if not ci:
        return {k: (r * cr, i * cr) for k, (r, i) in a.items()}
    out = {}
    for k, (r, i) in a.items():
        out[k] = (r * cr - i * ci, r * ci + i * cr)
    return out


def mul_terms(a, b, ceiling):
    if not a or not b:
        return {}
    if len(a) < len(b):
        a, b = b, a
    out = {}
    get = out.get
    for kb, (rb, ib) in b.items():
        for ka, (ra, ia) in a.items():
            k = ka + kb
            re = ra * rb - ia * ib
            im = ra * ib + ia * rb
            ca = get(k)
            if ca is None:
                if re or im:
                    out[k] = (re, im)
            else:
                re = re + ca[0]
                im = im + ca[1]
                if re or im:
                    out[k] = (re, im)
                else:
                    del out[k]
        if len(out) > ceiling:
            raise TermCeilingError(len(out), ceiling)
    return out


def div_terms_exact(a, b, shifts, mask):
    """Exact-divide term dict a by b; return the quotient dict or None.

    b must be nonempty and monic (leading coefficient exactly 1). shifts and
    mask describe the packed-key field layout. Keys are consumed in
    descending graded-lex order via a lazy-deletion heap, so a failed
    division usually exits on the first leading-term mismatch.
    """
    if not a:
        return {}
    bk = max(b)
    rem = dict(a)
    quot = {}
    heap = [-k for k in rem]
    heapq.heapify(heap)
    bitems = [kv for kv in b.items() if kv[0] != bk]
    while heap:
        k = -heapq.heappop(heap)
        c = rem.get(k)
        if c is None:
            continue
        for s in shifts:
            if ((k >> s) & mask) < ((bk >> s) & mask):
                return None
        dk = k - bk
        r, i = c
        quot[dk] = (r, i)
        del rem[k]
        for k2, (br, bi) in bitems:
            kk = k2 + dk
            cur = rem.get(kk)
            if cur is None:
                re = bi * i - br * r
                im = -(br * i + bi * r)
                if re or im:
                    heapq.heappush(heap, -kk)
                    rem[kk] = (re, im)
            else:
                re = cur[0] - (br * r - bi * i)
                im = cur[1] - (br * i + bi * r)
                if re or im:
                    rem[kk] = (re, im)
                else:
                    del rem[kk]
    if rem:
        return None
    return quot
