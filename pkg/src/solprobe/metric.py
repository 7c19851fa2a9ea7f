"""Word metric on a Cayley graph by breadth-first search.

Neighbours of g are the right translates g*s for s in the (symmetric)
generating set, expanded in the fixed order of ``GenSet.letters``.  A
``BallTable`` holds every element of word length <= R with its exact
length; spheres are contiguous runs of the insertion order.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .groups import ENCODING_VERSION, Group, GroupElement, make_group

BALL_MAGIC = b"SOLPROBE-BALL\n"
BALL_VERSION = 1
DEFAULT_MEM_BYTES = 2 * 1024**3

# element objects, module element, shift tuple and dict slot (measured, rounded up)
_ENTRY_OVERHEAD = 420

_PARALLEL_MIN_FRONTIER = 20000


class BudgetExceeded(RuntimeError):
    """Ball enumeration stopped early; ``table`` holds the complete spheres."""

    def __init__(self, table: BallTable, needed: int, budget: int):
        super().__init__(f"memory budget {budget} bytes exceeded at radius "
                         f"{table.radius + 1} (about {needed} bytes needed)")
        self.table = table
        self.radius = table.radius


class GenSet:
    """A finite generating set, closed under inverses, identity removed.

    Closure keeps the given order and inserts each missing inverse
    directly after its letter; duplicates are dropped.  ``z`` is the
    largest |B(shift)| over the letters.
    """

    def __init__(self, group: Group, letters: Iterable[GroupElement],
                 b: Sequence[float] | None = None, symmetric_closure: bool = True,
                 name: str = "explicit"):
        self.group = group
        self.name = name
        out: list[GroupElement] = []
        seen = set()
        for s in letters:
            cands = (s, group.inverse(s)) if symmetric_closure else (s,)
            for x in cands:
                if x.is_identity() or x in seen:
                    continue
                seen.add(x)
                out.append(x)
        if symmetric_closure is False:
            for x in out:
                if group.inverse(x) not in seen:
                    raise ValueError(f"generating set is not symmetric: {x!r} has no inverse")
        self.letters: tuple[GroupElement, ...] = tuple(out)
        self.b = tuple(b) if b is not None else (1,) * group.rank
        self.z = max((abs(self.B(s.shift)) for s in self.letters), default=0)

    def B(self, m) -> float:
        return sum(bi * mi for bi, mi in zip(self.b, m))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def index(self, s: GroupElement) -> int:
        return self.letters.index(s)

    def __eq__(self, other) -> bool:
        return isinstance(other, GenSet) and self.group == other.group and self.letters == other.letters

    def __repr__(self) -> str:
        return f"GenSet({self.name}, {list(self.letters)})"


class LowerBound(NamedTuple):
    """Depth is at least ``value``; the search was cut off."""
    value: int


class BallTable:
    def __init__(self, gens: GenSet):
        self.gens = gens
        self.group = gens.group
        self.norms: dict[GroupElement, int] = {gens.group.identity: 0}
        self.elements: list[GroupElement] = [gens.group.identity]
        self.offsets: list[int] = [0, 1]   # sphere r is elements[offsets[r]:offsets[r+1]]

    @property
    def radius(self) -> int:
        return len(self.offsets) - 2

    def sphere(self, r: int) -> list[GroupElement]:
        if r < 0 or r > self.radius:
            raise IndexError(f"radius {r} outside 0..{self.radius}")
        return self.elements[self.offsets[r]:self.offsets[r + 1]]

    def sphere_sizes(self) -> list[int]:
        return [self.offsets[r + 1] - self.offsets[r] for r in range(self.radius + 1)]

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, g: GroupElement) -> bool:
        return g in self.norms

    def word_length(self, g: GroupElement) -> int | None:
        """|g|_S, or None when |g| > R."""
        return self.norms.get(g)

    def geodesic(self, g: GroupElement) -> list[GroupElement]:
        """A geodesic word for g: at each step the first letter (in order)
        that steps one sphere closer to the identity."""
        n = self.norms.get(g)
        if n is None:
            raise KeyError(f"{g!r} is outside the ball of radius {self.radius}")
        word = []
        group = self.group
        inverses = [group.inverse(s) for s in self.gens.letters]
        while n > 0:
            for s, s_inv in zip(self.gens.letters, inverses):
                h = group.multiply(g, s_inv)
                if self.norms.get(h) == n - 1:
                    word.append(s)
                    g, n = h, n - 1
                    break
            else:
                raise AssertionError("ball table has no parent for an element")
        word.reverse()
        return word

    def sphere_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "sphere_size", "ball_size"])
        total = 0
        for r, n in enumerate(self.sphere_sizes()):
            total += n
            w.writerow([r, n, total])
        return buf.getvalue()


def _expand(args) -> list[GroupElement]:
    chunk, letters = args
    group = letters[0].group
    mul = group.multiply
    return [mul(g, s) for g in chunk for s in letters]


def _entry_bytes(g: GroupElement) -> int:
    size = _ENTRY_OVERHEAD
    base = g.base
    for x in base:
        if isinstance(x, tuple):
            size += sys.getsizeof(x) + 28 * len(x)
        elif isinstance(x, int):
            size += sys.getsizeof(x)
    return size


def enumerate_ball(gens: GenSet, R: int, mem_bytes: int = DEFAULT_MEM_BYTES,
                   workers: int = 1) -> BallTable:
    """Breadth-first enumeration of the closed ball of radius R.

    Raises ``BudgetExceeded`` (carrying the partial table) when the
    estimated memory for the next sphere would exceed ``mem_bytes``.
    With ``workers > 1`` large frontiers are multiplied out in worker
    processes; chunk results are merged in frontier order, so the table
    does not depend on the worker count.
    """
    if R < 0:
        raise ValueError("radius must be non-negative")
    table = BallTable(gens)
    letters = list(gens.letters)
    if not letters:
        return table
    norms = table.norms
    elements = table.elements
    mul = gens.group.multiply
    frontier = [gens.group.identity]
    used = _entry_bytes(frontier[0])
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for r in range(1, R + 1):
            new: list[GroupElement] = []
            if pool is not None and len(frontier) >= _PARALLEL_MIN_FRONTIER:
                step = -(-len(frontier) // (4 * workers))
                chunks = [(frontier[i:i + step], letters) for i in range(0, len(frontier), step)]
                products = (h for part in pool.map(_expand, chunks) for h in part)
            else:
                products = (mul(g, s) for g in frontier for s in letters)
            sample_every = 1024
            est = _entry_bytes(frontier[-1])
            for h in products:
                if h not in norms:
                    norms[h] = r
                    new.append(h)
                    if len(new) % sample_every == 0:
                        est = _entry_bytes(h)
                        if used + len(new) * est > mem_bytes:
                            # roll back the partial sphere
                            for x in new:
                                del norms[x]
                            raise BudgetExceeded(table, used + len(new) * est, mem_bytes)
            if not new:
                # finite group exhausted: later spheres are empty
                for _ in range(r, R + 1):
                    table.offsets.append(len(elements))
                break
            used += len(new) * est
            elements.extend(new)
            table.offsets.append(len(elements))
            frontier = new
    finally:
        if pool is not None:
            pool.shutdown()
    return table


def word_length(table: BallTable, g: GroupElement) -> int | None:
    return table.word_length(g)


def restricted_distance(table: BallTable, g: GroupElement, h: GroupElement, r: int) -> int | None:
    """Length of a shortest path from g to h through elements of length <= r.

    Returns None when g and h are not connected inside the closed ball.
    Bidirectional breadth-first search; both searches expand whole levels
    so the first meeting gives the exact distance.
    """
    if r > table.radius:
        raise ValueError(f"r = {r} exceeds the enumerated radius {table.radius}")
    for x in (g, h):
        n = table.norms.get(x)
        if n is None or n > r:
            raise ValueError(f"{x!r} lies outside the closed ball of radius {r}")
    if g == h:
        return 0
    norms = table.norms
    letters = table.gens.letters
    mul = table.group.multiply
    dist_a = {g: 0}
    dist_b = {h: 0}
    front_a, front_b = [g], [h]
    da = db = 0
    while front_a and front_b:
        if len(front_a) <= len(front_b):
            front, dist, other, da = front_a, dist_a, dist_b, da + 1
            level = da
        else:
            front, dist, other, db = front_b, dist_b, dist_a, db + 1
            level = db
        new = []
        best = None
        for x in front:
            for s in letters:
                y = mul(x, s)
                if y in dist:
                    continue
                ny = norms.get(y)
                if ny is None or ny > r:
                    continue
                dist[y] = level
                new.append(y)
                if y in other:
                    cand = level + other[y]
                    if best is None or cand < best:
                        best = cand
        if best is not None:
            return best
        if front is front_a:
            front_a = new
        else:
            front_b = new
    return None


def depth(table: BallTable, g: GroupElement, max_steps: int | None = None) -> int | LowerBound:
    """Distance from g to the nearest x with |x| > |g|.

    Every path stays inside the closed ball of radius |g| <= R until it
    first leaves, and any element missing from the table is longer than
    R >= |g|, so the answer is exact unless ``max_steps`` cuts the search
    (or the group is finite and no longer element exists).
    """
    n = table.norms.get(g)
    if n is None:
        raise ValueError(f"{g!r} is outside the ball of radius {table.radius}")
    norms = table.norms
    letters = table.gens.letters
    mul = table.group.multiply
    seen = {g}
    frontier = [g]
    d = 0
    while frontier:
        if max_steps is not None and d >= max_steps:
            return LowerBound(d + 1)
        d += 1
        new = []
        for x in frontier:
            for s in letters:
                y = mul(x, s)
                if y in seen:
                    continue
                ny = norms.get(y)
                if ny is None or ny > n:
                    return d
                seen.add(y)
                new.append(y)
        frontier = new
    return LowerBound(d + 1)


# -- persistence --------------------------------------------------------------


def _group_header(group: Group) -> dict:
    params = {k: [list(r) for r in v] if k == "matrix" else v for k, v in group.params().items()}
    return {"family": group.tag, "params": params}


def group_from_header(head: dict) -> Group:
    p = head.get("params", {})
    return make_group(head["family"], q=p.get("q", 2), matrix=p.get("matrix"))


def save_ball(table: BallTable, path) -> None:
    """Write a versioned ball file.

    Layout: magic line, 4-byte header length, JSON header (format and
    encoding versions, family, generators as hex encodings, radius,
    sphere sizes), then the body sorted by encoding: repeated
    (4-byte length, encoding, 4-byte word length).
    """
    group = table.group
    head = {
        "format_version": BALL_VERSION,
        "encoding_version": ENCODING_VERSION,
        "group": _group_header(group),
        "gens_name": table.gens.name,
        "gens": [group.encode(s).hex() for s in table.gens.letters],
        "b": list(table.gens.b),
        "radius": table.radius,
        "sphere_sizes": table.sphere_sizes(),
    }
    hb = json.dumps(head, sort_keys=True).encode()
    body = sorted((group.encode(g), n) for g, n in table.norms.items())
    with open(path, "wb") as fh:
        fh.write(BALL_MAGIC)
        fh.write(len(hb).to_bytes(4, "big"))
        fh.write(hb)
        for enc, n in body:
            fh.write(len(enc).to_bytes(4, "big"))
            fh.write(enc)
            fh.write(n.to_bytes(4, "big"))


def read_ball_header(path) -> dict:
    with open(path, "rb") as fh:
        if fh.read(len(BALL_MAGIC)) != BALL_MAGIC:
            raise ValueError(f"{path} is not a ball file")
        n = int.from_bytes(fh.read(4), "big")
        return json.loads(fh.read(n))


def load_ball(path) -> BallTable:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(BALL_MAGIC):
        raise ValueError(f"{path} is not a ball file")
    pos = len(BALL_MAGIC)
    n = int.from_bytes(data[pos:pos + 4], "big")
    pos += 4
    head = json.loads(data[pos:pos + n])
    pos += n
    if head["format_version"] != BALL_VERSION or head["encoding_version"] != ENCODING_VERSION:
        raise ValueError(f"unsupported ball file version in {path}")
    group = group_from_header(head["group"])
    letters = [group.decode(bytes.fromhex(x)) for x in head["gens"]]
    gens = GenSet(group, letters, b=head["b"], symmetric_closure=False, name=head["gens_name"])
    pairs = []
    while pos < len(data):
        m = int.from_bytes(data[pos:pos + 4], "big")
        pos += 4
        g = group.decode(data[pos:pos + m])
        pos += m
        pairs.append((int.from_bytes(data[pos:pos + 4], "big"), g))
        pos += 4
    # rebuild spheres; within a sphere, order by encoding
    pairs.sort(key=lambda p: p[0])
    table = BallTable(gens)
    table.norms = {}
    table.elements = []
    table.offsets = [0]
    r = 0
    for length, g in pairs:
        while length > r:
            table.offsets.append(len(table.elements))
            r += 1
        table.norms[g] = length
        table.elements.append(g)
    while len(table.offsets) < head["radius"] + 2:
        table.offsets.append(len(table.elements))
    if table.sphere_sizes() != head["sphere_sizes"]:
        raise ValueError(f"{path}: body does not match the recorded sphere sizes")
    return table
