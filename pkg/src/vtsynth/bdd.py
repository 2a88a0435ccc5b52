"""Reduced ordered binary decision diagrams with exact model counting.

One :class:`Bdd` manager owns all nodes for a fixed variable order.  Node
handles are plain ints; two handles from the same manager are equal iff the
boolean functions are equal (hash consing), which gives the O(1) equality
that set-valued verdicts rely on.  Handles must never be mixed between
managers; a manager is not synchronized, so confine it to one thread.
"""

from __future__ import annotations

from typing import Callable, Iterator


class Bdd:
    """Node store for boolean functions over a fixed, ordered variable list."""

    FALSE = 0
    TRUE = 1

    def __init__(self, variables):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        self._level = {name: i for i, name in enumerate(self.variables)}
        n = len(self.variables)
        # id -> (level, lo, hi); terminals live at the bottom pseudo-level
        self._nodes = [(n, 0, 0), (n, 1, 1)]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._and_cache: dict[tuple[int, int], int] = {}
        self._not_cache: dict[int, int] = {}
        self._count_cache: dict[int, int] = {}

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def var(self, name: str) -> int:
        return self._mk(self._level[name], self.FALSE, self.TRUE)

    def _mk(self, level: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (level, lo, hi)
        node = self._unique.get(key)
        if node is None:
            node = len(self._nodes)
            self._nodes.append(key)
            self._unique[key] = node
        return node

    def land(self, f: int, g: int) -> int:
        if f == self.FALSE or g == self.FALSE:
            return self.FALSE
        if f == self.TRUE:
            return g
        if g == self.TRUE or f == g:
            return f
        if f > g:
            f, g = g, f
        key = (f, g)
        cached = self._and_cache.get(key)
        if cached is not None:
            return cached
        fl, flo, fhi = self._nodes[f]
        gl, glo, ghi = self._nodes[g]
        level = min(fl, gl)
        f0, f1 = (flo, fhi) if fl == level else (f, f)
        g0, g1 = (glo, ghi) if gl == level else (g, g)
        result = self._mk(level, self.land(f0, g0), self.land(f1, g1))
        self._and_cache[key] = result
        return result

    def lnot(self, f: int) -> int:
        if f == self.FALSE:
            return self.TRUE
        if f == self.TRUE:
            return self.FALSE
        cached = self._not_cache.get(f)
        if cached is not None:
            return cached
        level, lo, hi = self._nodes[f]
        result = self._mk(level, self.lnot(lo), self.lnot(hi))
        self._not_cache[f] = result
        return result

    def lor(self, f: int, g: int) -> int:
        return self.lnot(self.land(self.lnot(f), self.lnot(g)))

    def ldiff(self, f: int, g: int) -> int:
        """f and not g."""
        return self.land(f, self.lnot(g))

    def implies(self, f: int, g: int) -> bool:
        return self.ldiff(f, g) == self.FALSE

    def eval(self, f: int, true_vars) -> bool:
        true_levels = {self._level[v] for v in true_vars}
        node = f
        while node > self.TRUE:
            level, lo, hi = self._nodes[node]
            node = hi if level in true_levels else lo
        return node == self.TRUE

    def satcount(self, f: int) -> int:
        """Number of satisfying assignments over the full variable set."""
        return self._count(f, 0)

    def _count(self, node: int, level: int) -> int:
        n = self.num_vars
        if node == self.FALSE:
            return 0
        if node == self.TRUE:
            return 1 << (n - level)
        node_level = self._nodes[node][0]
        sub = self._count_cache.get(node)
        if sub is None:
            _, lo, hi = self._nodes[node]
            sub = self._count(lo, node_level + 1) + self._count(hi, node_level + 1)
            self._count_cache[node] = sub
        return sub << (node_level - level)

    def models(self, f: int) -> Iterator[frozenset[str]]:
        """Yield satisfying assignments as sets of true variables.

        Order is deterministic: variable order with the false branch first,
        which coincides with sorting assignments as bit vectors.
        """
        yield from self._models(f, 0, [])

    def _models(self, node, level, trail):
        n = self.num_vars
        if node == self.FALSE:
            return
        if level == n:
            yield frozenset(trail)
            return
        node_level = self._nodes[node][0] if node > self.TRUE else n
        if node_level > level:
            yield from self._models(node, level + 1, trail)
            trail.append(self.variables[level])
            yield from self._models(node, level + 1, trail)
            trail.pop()
        else:
            _, lo, hi = self._nodes[node]
            yield from self._models(lo, level + 1, trail)
            trail.append(self.variables[level])
            yield from self._models(hi, level + 1, trail)
            trail.pop()

    def model_at(self, f: int, index: int) -> frozenset[str]:
        """The index-th satisfying assignment in :meth:`models` order.

        With a uniform index draw this samples models exactly uniformly.
        """
        total = self.satcount(f)
        if not 0 <= index < total:
            raise IndexError(f"model index {index} out of range (count {total})")
        trail = []
        node = f
        for level in range(self.num_vars):
            node_level = self._nodes[node][0] if node > self.TRUE else self.num_vars
            if node_level > level:
                lo_count = self._count(node, level + 1)
                lo, hi = node, node
            else:
                _, lo, hi = self._nodes[node]
                lo_count = self._count(lo, level + 1)
            if index < lo_count:
                node = lo
            else:
                index -= lo_count
                trail.append(self.variables[level])
                node = hi
        return frozenset(trail)

    def sample(self, f: int, draw: Callable[[int], int]) -> frozenset[str]:
        """Uniformly sample a model; ``draw(n)`` must return an int in [0, n)."""
        return self.model_at(f, draw(self.satcount(f)))

    def struct(self, f: int) -> tuple:
        """Manager-independent canonical encoding of a function.

        Nodes are listed in deterministic DFS (lo before hi) order as
        (variable, lo_ref, hi_ref) triples; refs are "F", "T", or an index
        into the list.  Managers sharing a variable order produce identical
        encodings for equal functions.
        """
        order: list[tuple] = []
        seen: dict[int, int] = {}

        def walk(node):
            if node == self.FALSE:
                return "F"
            if node == self.TRUE:
                return "T"
            if node in seen:
                return seen[node]
            level, lo, hi = self._nodes[node]
            lo_ref = walk(lo)
            hi_ref = walk(hi)
            idx = len(order)
            order.append((self.variables[level], lo_ref, hi_ref))
            seen[node] = idx
            return idx

        root = walk(f)
        return (root, tuple(order))

    def from_struct(self, data) -> int:
        root, order = data
        built: list[int] = []
        for var, lo_ref, hi_ref in order:
            lo = self._deref(lo_ref, built)
            hi = self._deref(hi_ref, built)
            built.append(self._mk(self._level[var], lo, hi))
        return self._deref(root, built)

    def _deref(self, ref, built):
        if ref == "F":
            return self.FALSE
        if ref == "T":
            return self.TRUE
        return built[ref]
