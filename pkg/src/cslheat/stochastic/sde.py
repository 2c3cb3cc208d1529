"""Linear SDEs ``dX = (A X + a) dt + sum_j (B_j X + b_j) dW_j`` and the
drift correction between the Stratonovich and Ito readings.

For this family the correction term ``(1/2) sum_j (G_j . grad) G_j`` with
``G_j = B_j X + b_j`` is itself affine::

    A_ito = A_strat + (1/2) sum_j B_j B_j
    a_ito = a_strat + (1/2) sum_j B_j b_j

and the diffusion coefficients are unchanged.  With all ``B_j = 0``
(additive noise) the two readings coincide.
"""

import json
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class LinearSde:
    A: np.ndarray
    a: np.ndarray
    B: np.ndarray  # (m, d, d)
    b: np.ndarray  # (m, d)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A))
        a = np.atleast_1d(np.asarray(self.a))
        B = np.asarray(self.B)
        b = np.asarray(self.b)
        d = A.shape[0]
        if A.shape != (d, d) or a.shape != (d,):
            raise DomainError(f"A must be (d, d) and a (d,), got {A.shape} and {a.shape}")
        if B.size == 0:
            B = B.reshape(0, d, d)
            b = b.reshape(0, d)
        if B.ndim != 3 or B.shape[1:] != (d, d) or b.shape != (B.shape[0], d):
            raise DomainError(f"B must be (m, {d}, {d}) and b (m, {d}), got {B.shape} and {b.shape}")
        for name, value in (("A", A), ("a", a), ("B", B), ("b", b)):
            object.__setattr__(self, name, value)

    @property
    def d(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[0]

    def drift_correction(self):
        """``((1/2) sum_j B_j B_j, (1/2) sum_j B_j b_j)``."""
        if self.m == 0:
            return np.zeros_like(self.A), np.zeros_like(self.a)
        return 0.5 * np.einsum("jik,jkl->il", self.B, self.B), 0.5 * np.einsum("jik,jk->i", self.B, self.b)

    def to_dict(self):
        return {"A": _jsonable(self.A), "a": _jsonable(self.a), "B": _jsonable(self.B), "b": _jsonable(self.b)}

    @classmethod
    def from_dict(cls, data):
        return cls(*(_from_jsonable(data[k]) for k in ("A", "a", "B", "b")))


def _jsonable(x):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return {"re": x.real.tolist(), "im": x.imag.tolist()}
    return x.tolist()


def _from_jsonable(v):
    if isinstance(v, dict):
        return np.asarray(v["re"], dtype=float) + 1j * np.asarray(v["im"], dtype=float)
    arr = np.asarray(v)
    return arr.astype(float) if arr.dtype.kind in "iub" else arr


def strat_to_ito(sde):
    dA, da = sde.drift_correction()
    return LinearSde(sde.A + dA, sde.a + da, sde.B, sde.b)


def ito_to_strat(sde):
    dA, da = sde.drift_correction()
    return LinearSde(sde.A - dA, sde.a - da, sde.B, sde.b)


def load_sde(path):
    with open(path) as fh:
        return LinearSde.from_dict(json.load(fh))


def dump_sde(sde, path):
    with open(path, "w") as fh:
        json.dump(sde.to_dict(), fh, indent=2)
