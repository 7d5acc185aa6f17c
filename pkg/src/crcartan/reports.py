"""Check records shared by all verification functions."""

from dataclasses import dataclass, field

_WITNESS_CAP = 400


def clip(text, cap=_WITNESS_CAP):
    text = str(text)
    if len(text) > cap:
        return text[:cap] + "..."
    return text


@dataclass
class Check:
    """One verified identity: id, what it states, pass/fail/skip, witness."""

    id: str
    cite: str
    status: str
    witness: str = ""

    @property
    def passed(self):
        return self.status == "pass"


def check_zero(cid, cite, value, witness_on_pass=""):
    """Check that a rational function vanishes identically."""
    if value.is_zero():
        return Check(cid, cite, "pass", witness_on_pass)
    return Check(cid, cite, "fail", clip("defect = %s" % value))


def check_equal(cid, cite, lhs, rhs):
    """Check exact equality of two rational functions."""
    diff = lhs - rhs
    if diff.is_zero():
        return Check(cid, cite, "pass")
    return Check(cid, cite, "fail", clip("difference = %s" % diff))


def check_true(cid, cite, ok, witness=""):
    return Check(cid, cite, "pass" if ok else "fail", clip(witness))


def all_passed(checks):
    return all(c.passed for c in checks)


def failing(checks):
    return [c for c in checks if c.status == "fail"]


@dataclass
class CheckGroup:
    """Named batch of checks, one per verification entry point."""

    id: str
    checks: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    def extend(self, checks):
        self.checks.extend(checks)
        return self

    @property
    def passed(self):
        return all_passed(self.checks)
