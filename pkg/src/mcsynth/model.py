"""Core data model: chains, families, realizations, subfamilies, conflicts.

States and parameters are interned to dense integer indices; every type here
is immutable after construction and safe to share between threads.  Human
readable names live only at the I/O boundary (see :mod:`mcsynth.sketch`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

PROB_SUM_TOL = 1e-9


class Distribution:
    """Finite probability distribution over integer keys.

    Entries with zero probability are dropped so the support is exactly the
    stored keys.  Probabilities must lie in [0, 1] and sum to 1 within
    ``PROB_SUM_TOL``.
    """

    __slots__ = ("keys", "probs")

    def __init__(self, entries: Mapping[int, float] | Iterable[tuple[int, float]]):
        items = entries.items() if isinstance(entries, Mapping) else entries
        pairs = []
        total = 0.0
        for key, prob in items:
            if prob < 0.0 or prob > 1.0 + PROB_SUM_TOL:
                raise ValueError(f"probability {prob!r} for key {key} outside [0, 1]")
            total += prob
            if prob > 0.0:
                pairs.append((int(key), float(prob)))
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")
        if not pairs:
            raise ValueError("distribution has empty support")
        pairs.sort()
        seen = {k for k, _ in pairs}
        if len(seen) != len(pairs):
            raise ValueError("duplicate keys in distribution")
        self.keys = tuple(k for k, _ in pairs)
        self.probs = tuple(p for _, p in pairs)

    def items(self) -> Iterator[tuple[int, float]]:
        return zip(self.keys, self.probs)

    @property
    def support(self) -> tuple[int, ...]:
        return self.keys

    def get(self, key: int) -> float:
        for k, p in zip(self.keys, self.probs):
            if k == key:
                return p
        return 0.0

    def __len__(self) -> int:
        return len(self.keys)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Distribution):
            return NotImplemented
        return self.keys == other.keys and self.probs == other.probs

    def __hash__(self) -> int:
        return hash((self.keys, self.probs))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {p:g}" for k, p in self.items())
        return f"Distribution({{{body}}})"


@dataclass(frozen=True)
class Mc:
    """Markov chain: one distribution over state indices per state.

    A state ``s`` is absorbing iff its row is ``[s -> 1]``.
    """

    initial: int
    rows: tuple[Distribution, ...]

    def __post_init__(self):
        n = len(self.rows)
        if not 0 <= self.initial < n:
            raise ValueError(f"initial state {self.initial} out of range")
        for s, row in enumerate(self.rows):
            if row.keys[-1] >= n or row.keys[0] < 0:
                raise ValueError(f"row of state {s} targets an unknown state")

    @property
    def n_states(self) -> int:
        return len(self.rows)

    def is_absorbing(self, s: int) -> bool:
        row = self.rows[s]
        return row.keys == (s,) and row.probs == (1.0,)


@dataclass(frozen=True)
class Family:
    """A finite family of Markov chains over parameterized transition targets.

    Each state's template is a distribution over *parameters*; assigning each
    parameter a value from its domain (a set of state indices) turns the
    template into an ordinary transition row.  Domains are strictly
    increasing tuples of state indices.
    """

    state_names: tuple[str, ...]
    initial: int
    param_names: tuple[str, ...]
    domains: tuple[tuple[int, ...], ...]
    templates: tuple[Distribution, ...]

    def __post_init__(self):
        n, m = len(self.state_names), len(self.param_names)
        if not 0 <= self.initial < n:
            raise ValueError(f"initial state {self.initial} out of range")
        if len(self.domains) != m:
            raise ValueError("one domain required per parameter")
        if len(self.templates) != n:
            raise ValueError("one template row required per state")
        for k, dom in enumerate(self.domains):
            if not dom:
                raise ValueError(f"parameter {self.param_names[k]!r} has an empty domain")
            if any(not 0 <= v < n for v in dom):
                raise ValueError(f"domain of {self.param_names[k]!r} references an unknown state")
            if any(a >= b for a, b in zip(dom, dom[1:])):
                raise ValueError(f"domain of {self.param_names[k]!r} must be strictly increasing")
        for s, tmpl in enumerate(self.templates):
            for k in tmpl.keys:
                if not 0 <= k < m:
                    raise ValueError(f"template of state {s} uses an undeclared parameter")

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    def multi_valued(self) -> tuple[int, ...]:
        """Parameters with more than one admissible value."""
        return tuple(k for k, dom in enumerate(self.domains) if len(dom) > 1)

    def full_subfamily(self) -> "Subfamily":
        return Subfamily(self.domains)


@dataclass(frozen=True)
class Realization:
    """Total assignment of parameters to state values, by parameter index."""

    values: tuple[int, ...]

    def as_dict(self, family: Family) -> dict[str, str]:
        return {
            family.param_names[k]: family.state_names[v]
            for k, v in enumerate(self.values)
        }


class Subfamily:
    """A hyper-rectangle of realizations: one restricted domain per parameter.

    Reachability bounds computed for this subfamily are cached here, keyed by
    target set; the cache is write-once per key (first store wins).
    """

    __slots__ = ("domains", "_bounds")

    def __init__(self, domains: Sequence[Sequence[int]]):
        doms = tuple(tuple(d) for d in domains)
        for k, dom in enumerate(doms):
            if not dom:
                raise ValueError(f"restricted domain of parameter {k} is empty")
            if any(a >= b for a, b in zip(dom, dom[1:])):
                raise ValueError(f"restricted domain of parameter {k} must be strictly increasing")
        self.domains = doms
        self._bounds: dict = {}

    def multi_valued(self) -> tuple[int, ...]:
        return tuple(k for k, dom in enumerate(self.domains) if len(dom) > 1)

    def restricted(self, param: int, values: Sequence[int]) -> "Subfamily":
        doms = list(self.domains)
        doms[param] = tuple(values)
        return Subfamily(doms)

    def cached_bounds(self, targets: frozenset):
        return self._bounds.get(targets)

    def store_bounds(self, bounds):
        """Idempotently cache ``bounds`` under its target set; first store wins."""
        return self._bounds.setdefault(bounds.targets, bounds)

    def bounds_snapshot(self) -> dict:
        """Copy of the bounds cache, for handing down to refined subfamilies."""
        return dict(self._bounds)

    def __repr__(self) -> str:
        return f"Subfamily({self.domains!r})"


@dataclass(frozen=True, eq=False)
class Conflict:
    """Relevant parameters plus the realization they were derived from.

    Every realization in ``scope`` agreeing with ``reference`` on ``params``
    violates the property the conflict was built for.  ``params`` never
    contains a parameter whose restricted domain in ``scope`` is a singleton;
    such parameters cannot constrain the generalization.
    """

    params: frozenset[int]
    reference: Realization
    scope: Subfamily


def validate_realization(family: Family, r: Realization) -> None:
    """Raise ``ValueError`` unless ``r`` is a total, in-domain assignment."""
    if len(r.values) != family.n_params:
        raise ValueError(
            f"realization assigns {len(r.values)} parameters, family has {family.n_params}"
        )
    for k, v in enumerate(r.values):
        if v not in family.domains[k]:
            raise ValueError(
                f"value {v} of parameter {family.param_names[k]!r} outside its domain"
            )


def realization_in(sub: Subfamily, r: Realization) -> bool:
    return len(r.values) == len(sub.domains) and all(
        v in dom for v, dom in zip(r.values, sub.domains)
    )


def induce(family: Family, r: Realization) -> Mc:
    """Instantiate the member chain of ``r``.

    Probabilities of distinct parameters mapped to the same target state are
    summed, so every row remains a valid distribution.
    """
    validate_realization(family, r)
    rows = []
    for tmpl in family.templates:
        acc: dict[int, float] = {}
        for k, p in tmpl.items():
            tgt = r.values[k]
            acc[tgt] = acc.get(tgt, 0.0) + p
        rows.append(Distribution(acc))
    return Mc(initial=family.initial, rows=tuple(rows))


def generalization(r: Realization, params: Iterable[int], scope: Subfamily) -> list[Realization]:
    """All members of ``scope`` that agree with ``r`` on ``params``.

    The result is in lexicographic order (parameter index, then domain-value
    order) and always contains ``r`` itself.
    """
    pinned = set(params)
    if not realization_in(scope, r):
        raise ValueError("reference realization lies outside the scope")
    if any(not 0 <= k < len(scope.domains) for k in pinned):
        raise ValueError("conflict parameter index out of range")
    out: list[Realization] = []
    doms = [
        (r.values[k],) if k in pinned else scope.domains[k]
        for k in range(len(scope.domains))
    ]
    _product_into(doms, out)
    return out


def _product_into(doms: Sequence[Sequence[int]], out: list[Realization]) -> None:
    m = len(doms)
    pos = [0] * m
    while True:
        out.append(Realization(tuple(doms[k][pos[k]] for k in range(m))))
        j = m - 1
        while j >= 0:
            pos[j] += 1
            if pos[j] < len(doms[j]):
                break
            pos[j] = 0
            j -= 1
        if j < 0:
            return


def member_count(sub: Subfamily) -> int:
    """Number of realizations in the subfamily (exact integer arithmetic)."""
    return math.prod(len(dom) for dom in sub.domains)


def iterate_unpruned(sub: Subfamily, conflicts: Sequence[Conflict] = ()) -> Iterator[Realization]:
    """Members of ``sub`` not covered by any conflict, in lexicographic order.

    ``conflicts`` is consulted live: conflicts appended while the generator is
    running prune the not-yet-yielded remainder.  When the current member
    matches a conflict the odometer jumps past the whole block of members
    agreeing with it up to the conflict's most significant parameter, instead
    of stepping one by one.
    """
    doms = sub.domains
    m = len(doms)
    if m == 0:
        if not any(len(c.params) == 0 for c in conflicts):
            yield Realization(())
        return
    sizes = [len(d) for d in doms]
    pos = [0] * m
    while True:
        hit = None
        for c in conflicts:
            ref = c.reference.values
            if all(doms[k][pos[k]] == ref[k] for k in c.params):
                hit = c
                break
        if hit is None:
            yield Realization(tuple(doms[k][pos[k]] for k in range(m)))
            bump = m - 1
        elif not hit.params:
            return
        else:
            # Members sharing the prefix up to max(params) all match the
            # conflict, so carry at that position directly.
            bump = max(hit.params)
        for j in range(bump + 1, m):
            pos[j] = 0
        j = bump
        while j >= 0:
            pos[j] += 1
            if pos[j] < sizes[j]:
                break
            pos[j] = 0
            j -= 1
        if j < 0:
            return


def count_unpruned(sub: Subfamily, conflicts: Sequence[Conflict] = ()) -> int:
    """Exact number of members iterate_unpruned would yield."""
    return sum(1 for _ in iterate_unpruned(sub, conflicts))
