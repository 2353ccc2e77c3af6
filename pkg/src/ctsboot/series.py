"""Alphabets and categorical series.

Categories are stored as 0-based integer codes into an :class:`Alphabet`;
labels only matter for I/O.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class InvalidSeriesError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 2:
            raise InvalidSeriesError("an alphabet needs at least 2 categories")
        if len(set(labels)) != len(labels):
            raise InvalidSeriesError(f"duplicate labels in alphabet {labels}")

    @classmethod
    def of_size(cls, r: int) -> Alphabet:
        return cls(tuple(str(i) for i in range(1, r + 1)))

    @property
    def r(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidSeriesError(f"token {label!r} not in alphabet {self.labels}") from None


@dataclass(frozen=True, eq=False)
class CategoricalSeries:
    """A realization ``(x_1, ..., x_T)`` stored as 0-based codes."""

    values: np.ndarray
    alphabet: Alphabet = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.size == 0:
            raise InvalidSeriesError("a series must be a nonempty 1-d sequence")
        if not np.issubdtype(v.dtype, np.integer):
            if not np.all(np.equal(np.mod(v, 1), 0)):
                raise InvalidSeriesError("series codes must be integers")
        v = v.astype(np.int64)
        if v.min() < 0 or v.max() >= self.alphabet.r:
            raise InvalidSeriesError(
                f"codes must lie in [0, {self.alphabet.r - 1}], got range [{v.min()}, {v.max()}]"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_codes(cls, codes: Iterable[int], r: int | Alphabet) -> CategoricalSeries:
        alphabet = r if isinstance(r, Alphabet) else Alphabet.of_size(r)
        return cls(np.fromiter(codes, dtype=np.int64), alphabet)

    @classmethod
    def from_labels(cls, labels: Sequence[str], alphabet: Alphabet) -> CategoricalSeries:
        return cls(np.array([alphabet.index(str(x)) for x in labels], dtype=np.int64), alphabet)

    @property
    def r(self) -> int:
        return self.alphabet.r

    @property
    def T(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.T

    def labels(self) -> list[str]:
        return [self.alphabet.labels[i] for i in self.values]

    def __eq__(self, other):
        if not isinstance(other, CategoricalSeries):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash((self.alphabet, self.values.tobytes()))
