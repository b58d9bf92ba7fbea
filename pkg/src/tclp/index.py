"""Discrimination trie over term skeletons.

Keys are preorder token sequences as produced by `HerbrandStore.index_key`:
`("c", value)` for constants, `("f", functor, arity)` for compound terms and
`"*"` for anything variable. Retrieval is a filter only: it may return extra
candidates but never misses a store that could entail (or be entailed by) the
query, so callers confirm every candidate with a real entailment check.
"""

from __future__ import annotations

from fractions import Fraction

_ITEMS = "items"


def _arity(tok) -> int:
    return tok[2] if isinstance(tok, tuple) and tok[0] == "f" else 0


def _is_number(tok) -> bool:
    return isinstance(tok, tuple) and tok[0] == "c" and isinstance(tok[1], Fraction)


class TermIndex:
    def __init__(self):
        self.root: dict = {}
        self.size = 0

    def insert(self, key: tuple, item) -> None:
        node = self.root
        for tok in key:
            node = node.setdefault(tok, {})
        node.setdefault(_ITEMS, []).append(item)
        self.size += 1

    def remove(self, key: tuple, item) -> None:
        node = self.root
        for tok in key:
            node = node[tok]
        node[_ITEMS].remove(item)
        self.size -= 1

    def generalizations(self, query: tuple) -> list:
        """Items whose key is at least as general as `query`."""
        out: list = []
        self._gen(self.root, query, 0, out)
        return sorted(out)

    def instances(self, query: tuple) -> list:
        """Items whose key is at least as specific as `query`."""
        out: list = []
        self._inst(self.root, query, 0, out)
        return sorted(out)

    def _gen(self, node: dict, q: tuple, i: int, out: list):
        if i == len(q):
            out.extend(node.get(_ITEMS, ()))
            return
        tok = q[i]
        star = node.get("*")
        if star is not None:
            self._gen(star, q, _skip_query(q, i), out)
        if tok == "*":
            # a variable of the query may still be pinned to a number
            for t, child in node.items():
                if t != _ITEMS and _is_number(t):
                    self._gen(child, q, i + 1, out)
            return
        child = node.get(tok)
        if child is not None:
            self._gen(child, q, i + 1, out)

    def _inst(self, node: dict, q: tuple, i: int, out: list):
        if i == len(q):
            out.extend(node.get(_ITEMS, ()))
            return
        tok = q[i]
        if tok == "*":
            for sub in _skip_stored(node, 1):
                self._inst(sub, q, i + 1, out)
            return
        child = node.get(tok)
        if child is not None:
            self._inst(child, q, i + 1, out)
        if _is_number(tok) and "*" in node:
            self._inst(node["*"], q, i + 1, out)


def _skip_query(q: tuple, i: int) -> int:
    pending = 1
    while pending:
        pending += _arity(q[i]) - 1
        i += 1
    return i


def _skip_stored(node: dict, pending: int):
    if pending == 0:
        yield node
        return
    for tok, child in node.items():
        if tok != _ITEMS:
            yield from _skip_stored(child, pending - 1 + _arity(tok))


class BoxIndex:
    """Stabbing queries over numeric boxes.

    Items are inserted with one (lo, hi) pair per dimension (None = unbounded).
    `stab(point)` returns, in insertion order, every item whose box may contain
    the point; dimensions where the point is None are ignored. Consecutive
    items are grouped into blocks of blocks, each carrying the envelope of its
    members, so runs of far-away boxes (as produced by sliding bounds) are
    skipped without visiting them.
    """

    FANOUT = 16

    def __init__(self):
        self.items: list = []  # (item, box)
        self.levels: list[list] = []  # levels[k][j] envelopes FANOUT**(k+1) items

    def insert(self, box: list, item) -> None:
        box = tuple(box)
        n = len(self.items)
        self.items.append((item, box))
        size, k = self.FANOUT, 0
        while True:
            if k == len(self.levels):
                # a new top level starts from everything below it
                below = [b for _, b in self.items[:-1]] if k == 0 else self.levels[k - 1]
                env = None
                for b in below:
                    env = list(b) if env is None else _merge(env, b)
                self.levels.append([env] if env is not None else [])
            level = self.levels[k]
            j = n // size
            if j == len(level):
                level.append(list(box))
            else:
                level[j] = _merge(level[j], box)
            if n < size:
                return
            size *= self.FANOUT
            k += 1

    def stab(self, point: list) -> list:
        dims = [(d, x) for d, x in enumerate(point) if x is not None]
        out: list = []
        if not self.levels:
            out.extend(item for item, box in self.items if _inside(box, dims))
            return out
        top = len(self.levels) - 1
        self._visit(top, range(len(self.levels[top])), dims, out)
        return out

    def _visit(self, k: int, blocks, dims, out: list):
        level = self.levels[k]
        for j in blocks:
            if not _inside(level[j], dims):
                continue
            lo, hi = j * self.FANOUT, (j + 1) * self.FANOUT
            if k == 0:
                out.extend(item for item, box in self.items[lo:hi] if _inside(box, dims))
            else:
                self._visit(k - 1, range(lo, min(hi, len(self.levels[k - 1]))), dims, out)


def _merge(env: list, box) -> list:
    return [
        (None if lo is None or elo is None else min(lo, elo), None if hi is None or ehi is None else max(hi, ehi))
        for (elo, ehi), (lo, hi) in zip(env, box)
    ]


def _inside(box, dims) -> bool:
    for d, x in dims:
        lo, hi = box[d]
        if (lo is not None and x < lo) or (hi is not None and x > hi):
            return False
    return True
