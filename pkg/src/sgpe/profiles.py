"""Initial data for trajectories and studies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .hermite import hermite_function_matrix

__all__ = ["InitialDatum", "DEFAULT_INITIAL"]


@dataclass(frozen=True)
class InitialDatum:
    """L2-normalized initial wave function.

    ``kind="gaussian"``: ``pi^{-1/4} w^{-1/2} exp(-(x - x0)^2 / (2 w^2))``, a
    coherent state of the trap when ``w = 1``.
    ``kind="hermite"``: equal-weight combination of the Hermite functions
    listed in ``modes``, normalized.
    """

    kind: str = "gaussian"
    x0: float = 3.0
    width: float = 1.0
    modes: tuple = (0,)

    def __post_init__(self):
        if self.kind not in ("gaussian", "hermite"):
            raise ConfigurationError(f"unknown initial datum kind {self.kind!r}")
        if self.kind == "gaussian" and not self.width > 0:
            raise ConfigurationError("gaussian width must be positive")
        if self.kind == "hermite" and (not self.modes or min(self.modes) < 0):
            raise ConfigurationError("hermite initial datum needs non-negative mode indices")
        object.__setattr__(self, "modes", tuple(sorted({int(m) for m in self.modes})))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            w = self.width
            return np.pi**-0.25 / np.sqrt(w) * np.exp(-((x - self.x0) ** 2) / (2 * w * w))
        vals = hermite_function_matrix(max(self.modes), x.ravel())
        return (vals[list(self.modes)].sum(axis=0) / np.sqrt(len(self.modes))).reshape(x.shape)

    def to_dict(self):
        return {"kind": self.kind, "x0": self.x0, "width": self.width, "modes": list(self.modes)}


DEFAULT_INITIAL = InitialDatum()
