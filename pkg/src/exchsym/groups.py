"""Finite permutation groups acting on sequences and arrays.

Action convention: a group element acts on the left by moving entries,
``(g . x)[i] = x[g^-1(i)]``, so that ``act(g, act(h, x)) == act(g o h, x)``
holds exactly.  Indexing notation of the form ``x[pi(i)]`` is the opposite
(right) convention; the two differ only in which permutation is reported as
a witness, never in orbits, invariance or distributions.

Only the leading axes named by a :class:`GroupSpec` are acted on.  Any
trailing axes are treated as per-entry channels and carried along.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple, Union

import numpy as np

from .numkit import NoiseSource, ShapeError, noise_grid, noise_next

MAX_GROUP_ORDER = 10 ** 6


class GroupSizeError(ValueError):
    """Group too large to enumerate or search."""


class SymmetryError(ValueError):
    """Joint action requested on an array that is not symmetric."""


@dataclass(frozen=True)
class Permutation:
    """Bijection of ``{0, ..., n-1}`` stored as its image vector."""

    image: Tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(i) for i in self.image)
        if sorted(image) != list(range(len(image))):
            raise ValueError(f"{image} is not a permutation")
        object.__setattr__(self, "image", image)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def transposition(cls, n: int, a: int, b: int) -> "Permutation":
        img = list(range(n))
        img[a], img[b] = img[b], img[a]
        return cls(tuple(img))

    @property
    def n(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i]

    def __matmul__(self, other: "Permutation") -> "Permutation":
        return perm_compose(self, other)

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, j in enumerate(self.image):
            inv[j] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return self.image == tuple(range(self.n))


def perm_compose(p: Permutation, q: Permutation) -> Permutation:
    """``(p o q)(i) = p(q(i))``."""
    if p.n != q.n:
        raise ShapeError(f"cannot compose permutations of sizes {p.n} and {q.n}")
    return Permutation(tuple(p.image[j] for j in q.image))


@dataclass(frozen=True)
class PermTuple:
    """Element of a direct product of symmetric groups."""

    parts: Tuple[Permutation, ...]

    def __post_init__(self):
        parts = tuple(p if isinstance(p, Permutation) else Permutation(p) for p in self.parts)
        object.__setattr__(self, "parts", parts)

    @classmethod
    def identity(cls, sizes: Sequence[int]) -> "PermTuple":
        return cls(tuple(Permutation.identity(n) for n in sizes))

    @classmethod
    def of(cls, *images) -> "PermTuple":
        return cls(tuple(Permutation(tuple(img)) for img in images))

    def __matmul__(self, other: "PermTuple") -> "PermTuple":
        if len(self.parts) != len(other.parts):
            raise ShapeError("permutation tuples of different length")
        return PermTuple(tuple(perm_compose(p, q) for p, q in zip(self.parts, other.parts)))

    def inverse(self) -> "PermTuple":
        return PermTuple(tuple(p.inverse() for p in self.parts))

    def is_identity(self) -> bool:
        return all(p.is_identity() for p in self.parts)

    def key(self) -> tuple:
        """Concatenated image vectors; tuple order is the lexicographic order."""
        return tuple(i for p in self.parts for i in p.image)

    def images(self) -> list:
        return [list(p.image) for p in self.parts]


GroupElement = Union[Permutation, PermTuple]


@dataclass(frozen=True)
class GroupSpec:
    """Which symmetric group acts and on which axes.

    ``seq(n)``: S_n on axis 0.  ``separate(n1, ..., nd)``: one independent
    permutation per axis.  ``joint(n, d)``: the same permutation on the first
    ``d`` axes; with ``symmetric=True`` (the default) inputs must be symmetric
    under transposition of those axes, otherwise the action is plain
    simultaneous relabelling (directed graphs).
    """

    kind: str
    sizes: Tuple[int, ...]
    symmetric: bool = True

    def __post_init__(self):
        if self.kind not in ("seq", "separate", "joint"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        sizes = tuple(int(s) for s in self.sizes)
        if any(s < 0 for s in sizes):
            raise ValueError("group sizes must be non-negative")
        if self.kind == "seq" and len(sizes) != 1:
            raise ValueError("seq takes one size")
        if self.kind == "joint" and (len(sizes) < 2 or len(set(sizes)) != 1):
            raise ValueError("joint needs d >= 2 equal sizes")
        if self.kind == "separate" and len(sizes) < 1:
            raise ValueError("separate needs at least one axis")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def seq(cls, n: int) -> "GroupSpec":
        return cls("seq", (n,))

    @classmethod
    def separate(cls, *sizes: int) -> "GroupSpec":
        return cls("separate", tuple(sizes))

    @classmethod
    def joint(cls, n: int, d: int = 2, symmetric: bool = True) -> "GroupSpec":
        return cls("joint", (n,) * d, symmetric)

    @property
    def acted_dims(self) -> int:
        return len(self.sizes)

    @property
    def part_sizes(self) -> Tuple[int, ...]:
        """Sizes of the symmetric-group factors."""
        if self.kind == "separate":
            return self.sizes
        return (self.sizes[0],)

    @property
    def order(self) -> int:
        return math.prod(math.factorial(n) for n in self.part_sizes)

    def axis_perms(self, g: GroupElement) -> Tuple[Permutation, ...]:
        """The permutation applied to each acted axis."""
        g = as_perm_tuple(g)
        if len(g.parts) != len(self.part_sizes):
            raise ShapeError(f"group element has {len(g.parts)} parts, spec needs {len(self.part_sizes)}")
        for p, n in zip(g.parts, self.part_sizes):
            if p.n != n:
                raise ShapeError(f"permutation of size {p.n} where {n} expected")
        if self.kind == "joint":
            return g.parts * self.acted_dims
        return g.parts

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "sizes": list(self.sizes)}
        if self.kind == "joint":
            d["symmetric"] = self.symmetric
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GroupSpec":
        return cls(d["kind"], tuple(d["sizes"]), d.get("symmetric", True))


def as_perm_tuple(g: GroupElement) -> PermTuple:
    return PermTuple((g,)) if isinstance(g, Permutation) else g


def check_shape(x: np.ndarray, spec: GroupSpec) -> None:
    if x.ndim < spec.acted_dims or tuple(x.shape[:spec.acted_dims]) != spec.sizes:
        raise ShapeError(f"array of shape {x.shape} is incompatible with {spec.kind}{spec.sizes}")


def is_jointly_symmetric(x: np.ndarray, d: int) -> bool:
    """Invariant under every transposition of the first ``d`` axes."""
    for a, b in itertools.combinations(range(d), 2):
        if not np.array_equal(x, np.swapaxes(x, a, b)):
            return False
    return True


def act(g: GroupElement, x, spec: GroupSpec) -> np.ndarray:
    """Left action ``(g . x)[i] = x[g^-1(i)]`` on the acted axes of ``x``."""
    x = np.asarray(x)
    check_shape(x, spec)
    joint_sym = spec.kind == "joint" and spec.symmetric
    if joint_sym and not is_jointly_symmetric(x, spec.acted_dims):
        raise SymmetryError("joint action needs a symmetric array")
    y = x
    for axis, p in enumerate(spec.axis_perms(g)):
        y = np.take(y, p.inverse().image, axis=axis)
    if joint_sym:
        assert is_jointly_symmetric(y, spec.acted_dims), "joint action broke symmetry"
    return y


def act_index(g: GroupElement, index: Sequence[int], spec: GroupSpec) -> Tuple[int, ...]:
    """Image of a multi-index under ``g``: the entry at ``index`` moves here."""
    perms = spec.axis_perms(g)
    if len(index) != len(perms):
        raise ShapeError(f"index {tuple(index)} has wrong length for {spec.kind}{spec.sizes}")
    return tuple(p(i) for p, i in zip(perms, index))


def enumerate_group(spec: GroupSpec, limit: int = MAX_GROUP_ORDER) -> Iterator[PermTuple]:
    """Every group element once, lexicographic in the concatenated images."""
    if spec.order > limit:
        raise GroupSizeError(f"group of order {spec.order} exceeds enumeration limit {limit}")
    factors = [list(itertools.permutations(range(n))) for n in spec.part_sizes]
    for combo in itertools.product(*factors):
        yield PermTuple(tuple(Permutation(c) for c in combo))


def _fisher_yates(n: int, src: NoiseSource):
    img = list(range(n))
    for i in range(n - 1, 0, -1):
        u, src = noise_next(src)
        j = int(u * (i + 1))
        img[i], img[j] = img[j], img[i]
    return Permutation(tuple(img)), src


def sample_haar(spec: GroupSpec, src: NoiseSource) -> Tuple[PermTuple, NoiseSource]:
    """Uniformly distributed group element (Fisher-Yates per factor)."""
    parts = []
    for n in spec.part_sizes:
        p, src = _fisher_yates(n, src)
        parts.append(p)
    return PermTuple(tuple(parts)), src


def sample_haar_batch(spec: GroupSpec, src: NoiseSource, count: int) -> list:
    """``count`` independent uniform elements as image arrays, one
    ``(count, n_k)`` integer array per factor.  Sample ``b`` uses the noise
    of ``src.fork(factor, b)``."""
    out = []
    for k, n in enumerate(spec.part_sizes):
        img = np.tile(np.arange(n), (count, 1))
        if n > 1:
            u = noise_grid(src.fork(k), (count,), n - 1)
            rows = np.arange(count)
            for step, i in enumerate(range(n - 1, 0, -1)):
                j = np.minimum((u[:, step] * (i + 1)).astype(np.int64), i)
                a, b = img[rows, i].copy(), img[rows, j].copy()
                img[rows, i], img[rows, j] = b, a
        out.append(img)
    return out


def act_batch(images: list, x: np.ndarray, spec: GroupSpec) -> np.ndarray:
    """Apply per-sample group elements (as from :func:`sample_haar_batch`) to a
    batch ``x`` whose axis 0 indexes samples."""
    x = np.asarray(x)
    count = x.shape[0]
    if spec.kind == "joint":
        images = list(images) * spec.acted_dims
    y = x
    rows = np.arange(count)
    for axis, img in enumerate(images):
        inv = np.argsort(img, axis=1)
        # move the acted axis next to the batch axis, gather, move back
        moved = np.moveaxis(y, axis + 1, 1)
        moved = moved[rows[:, None], inv]
        y = np.moveaxis(moved, 1, axis + 1)
    return y


def stabilizer_elements(spec: GroupSpec, fixed) -> Iterator[PermTuple]:
    """Elements fixing ``fixed`` (one index per acted axis for seq/separate;
    any collection of points for joint)."""
    if isinstance(fixed, (int, np.integer)):
        fixed = (int(fixed),)
    fixed = tuple(int(i) for i in fixed)
    if spec.kind == "joint":
        n = spec.sizes[0]
        if any(not 0 <= i < n for i in fixed):
            raise IndexError(f"point {fixed} out of range for n={n}")
        for g in enumerate_group(spec):
            if all(g.parts[0](i) == i for i in fixed):
                yield g
        return
    if len(fixed) != len(spec.part_sizes):
        raise IndexError(f"index {fixed} has wrong length for {spec.kind}{spec.sizes}")
    if any(not 0 <= i < n for i, n in zip(fixed, spec.part_sizes)):
        raise IndexError(f"index {fixed} out of range for {spec.sizes}")
    for g in enumerate_group(spec):
        if all(p(i) == i for p, i in zip(g.parts, fixed)):
            yield g
