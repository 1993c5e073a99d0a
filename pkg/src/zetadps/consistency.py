"""Static well-formedness, time consistency, and environment equivalences."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import List, Tuple

from .errors import DomainMismatch, UnknownId
from .store import BOTTOM, has_record_at, timestamps_upto
from .terms import Guarded, Mode


def input_channels(nu, l):
    if l not in nu:
        raise UnknownId(l)
    return list(nu[l].inputs)


def combine_tm(mode, tms):
    """gcd for union joins, lcm for intersection joins."""
    if mode is Mode.UNION:
        return reduce(math.gcd, tms)
    return reduce(lambda a, b: a * b // math.gcd(a, b), tms)


def wellformed_instance(mu, nu, l):
    if l not in mu or l not in nu:
        raise UnknownId(l)
    proc = nu[l]
    if not proc.inputs:
        return True
    entry = mu[l]
    if isinstance(proc, Guarded) and proc.join.kind is not entry.mode:
        return False
    try:
        tms = [mu[i].tm for i in proc.inputs]
    except KeyError as exc:
        raise UnknownId(exc.args[0]) from None
    return entry.tm == combine_tm(entry.mode, tms)


def wellformed_env(mu, nu):
    if not set(nu) <= set(mu):
        return False
    try:
        return all(wellformed_instance(mu, nu, l) for l in nu)
    except UnknownId:
        return False


def consistent_at(mu, nu, t, l):
    if l not in mu:
        raise UnknownId(l)
    inputs = nu[l].inputs if l in nu else ()
    if not inputs:
        return True
    here = has_record_at(mu[l].relation, t)
    try:
        upstream = [has_record_at(mu[i].relation, t) for i in inputs]
    except KeyError as exc:
        raise UnknownId(exc.args[0]) from None
    if mu[l].mode is Mode.INTERSECTION:
        return here == all(upstream)
    return here == any(upstream)


@dataclass(frozen=True)
class Violation:
    id: str
    mode: Mode
    inputs_with_record: Tuple[str, ...]
    found: bool


@dataclass
class ConsistencyReport:
    checked_at: int
    violations: List[Violation] = field(default_factory=list)

    @property
    def consistent(self):
        return not self.violations

    def render(self):
        if not self.violations:
            return "OK\n"
        return "".join(f"VIOLATION\t{self.checked_at}\t{v.id}\t{v.mode.short}\n"
                       for v in self.violations)


def consistent_env(mu, nu, t):
    report = ConsistencyReport(t)
    for l in sorted(mu):
        if consistent_at(mu, nu, t, l):
            continue
        inputs = nu[l].inputs
        have = tuple(i for i in inputs if has_record_at(mu[i].relation, t))
        report.violations.append(
            Violation(l, mu[l].mode, have, has_record_at(mu[l].relation, t)))
    return report


# ------------------------------------------------------------- equivalences

def _same_domain(mu1, mu2):
    if set(mu1) != set(mu2):
        raise DomainMismatch(sorted(set(mu1) ^ set(mu2)))


def equiv_records_upto(mu1, mu2, t):
    _same_domain(mu1, mu2)
    for l in mu1:
        r1, r2 = mu1[l].relation, mu2[l].relation
        if r1.initial != r2.initial:
            return False
        if t is BOTTOM:
            continue
        ts = timestamps_upto(r1, t)
        if ts != timestamps_upto(r2, t):
            return False
        if any(r1.row_at(u) != r2.row_at(u) for u in ts):
            return False
    return True


def equiv_records_at(mu1, mu2, t, ids):
    _same_domain(mu1, mu2)
    return all(mu1[l].relation.row_at(t) == mu2[l].relation.row_at(t)
               for l in ids if l in mu1)


def equiv_tm(mu1, mu2):
    _same_domain(mu1, mu2)
    return all(mu1[l].tm == mu2[l].tm for l in mu1)


def equiv_mode(mu1, mu2):
    _same_domain(mu1, mu2)
    return all(mu1[l].mode is mu2[l].mode for l in mu1)


def restrict(mu, ids):
    return {l: mu[l] for l in ids if l in mu}


def history_equiv_upto(phi1, phi2, t):
    d1 = [u for u in phi1.times() if u <= t]
    d2 = [u for u in phi2.times() if u <= t]
    if d1 != d2:
        return False
    return all(phi1.at(u) == phi2.at(u) for u in d1)
