"""Dense 3-way tensors and the mode products used by the alternating solver.

A :class:`Tensor3` holds a float64 array indexed as ``x[i1, i2, i3]`` with
dims ``(d1, d2, d3)``. For multilayer networks the first index is the layer
and the remaining two are nodes, so ``slice(l)`` is one adjacency matrix.

Storage is layer-major with each slice stored column by column. Under that
layout row ``l`` of the mode-1 matricization is exactly ``vec(slice(l))``
(columns stacked), so :func:`mode1_matricize` returns a view of the buffer,
not a copy, and :func:`mode1_dematricize` inverts it by reshaping.
"""

from __future__ import annotations

import struct
from typing import NamedTuple

import numpy as np

_MAGIC_F64 = b"MLT3"
_MAGIC_U8 = b"MLT" + bytes([ord("3") | 0x80])
_HEADER = struct.Struct("<III")


class Tensor3:
    """Immutable dense order-3 tensor.

    Parameters
    ----------
    array : array_like
        Anything numpy can coerce to a 3-d float array, indexed (i1, i2, i3).
    """

    __slots__ = ("_store",)

    def __init__(self, array):
        arr = np.asarray(array, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError(f"expected a 3-d array, got ndim={arr.ndim}")
        if min(arr.shape) < 1:
            raise ValueError(f"all dims must be >= 1, got {arr.shape}")
        # internal buffer shape (d1, d3, d2), C order == layer-major,
        # column-major within slice
        store = np.array(arr.transpose(0, 2, 1), dtype=np.float64, order="C")
        store.setflags(write=False)
        self._store = store

    @classmethod
    def _wrap(cls, store: np.ndarray) -> "Tensor3":
        # trusted constructor: store already C-contiguous (d1, d3, d2) float64
        obj = cls.__new__(cls)
        if not store.flags.c_contiguous:
            store = np.ascontiguousarray(store)
        store.setflags(write=False)
        obj._store = store
        return obj

    @classmethod
    def zeros(cls, dims) -> "Tensor3":
        d1, d2, d3 = (int(d) for d in dims)
        return cls._wrap(np.zeros((d1, d3, d2)))

    @classmethod
    def from_slices(cls, slices) -> "Tensor3":
        """Stack equally shaped 2-d arrays along the first mode."""
        mats = [np.asarray(s, dtype=np.float64) for s in slices]
        return cls(np.stack(mats, axis=0))

    @property
    def dims(self) -> tuple[int, int, int]:
        d1, d3, d2 = self._store.shape
        return (d1, d2, d3)

    @property
    def array(self) -> np.ndarray:
        """Read-only (d1, d2, d3) view of the tensor."""
        return self._store.transpose(0, 2, 1)

    def slice(self, i: int) -> np.ndarray:
        """Read-only (d2, d3) view of slice i along the first mode."""
        return self._store[i].T

    def __eq__(self, other):
        if not isinstance(other, Tensor3):
            return NotImplemented
        return self.dims == other.dims and bool(np.array_equal(self._store, other._store))

    __hash__ = None  # unhashable, like ndarray

    def allclose(self, other: "Tensor3", atol: float = 0.0, rtol: float = 1e-12) -> bool:
        return self.dims == other.dims and bool(
            np.allclose(self._store, other._store, atol=atol, rtol=rtol)
        )

    def __repr__(self):
        return f"Tensor3(dims={self.dims})"


def mode1_matricize(x: Tensor3) -> np.ndarray:
    """Unfold along mode 1: row ``l`` is vec(slice l), columns stacked.

    Returns a read-only view of the tensor's buffer.
    """
    d1, d2, d3 = x.dims
    return x._store.reshape(d1, d2 * d3)


def mode1_dematricize(mat: np.ndarray, dims) -> Tensor3:
    """Inverse of :func:`mode1_matricize` for the given (d1, d2, d3)."""
    d1, d2, d3 = (int(d) for d in dims)
    mat = np.asarray(mat, dtype=np.float64)
    if mat.shape != (d1, d2 * d3):
        raise ValueError(f"matrix shape {mat.shape} does not match dims {(d1, d2, d3)}")
    store = np.array(mat, dtype=np.float64, order="C").reshape(d1, d3, d2)
    return Tensor3._wrap(store)


def mode1_product(x: Tensor3, a: np.ndarray) -> Tensor3:
    """Multiply along mode 1: result slice j = sum_i a[j, i] * x slice i.

    ``a`` has shape (m, d1); the result has dims (m, d2, d3) and satisfies
    ``mode1_matricize(result) == a @ mode1_matricize(x)``.
    """
    a = np.asarray(a, dtype=np.float64)
    d1, d2, d3 = x.dims
    if a.ndim != 2 or a.shape[1] != d1:
        raise ValueError(f"left factor shape {a.shape} does not match mode-1 dim {d1}")
    store = np.tensordot(a, x._store, axes=(1, 0))
    return Tensor3._wrap(store)


def mode23_product(x: Tensor3, y: Tensor3) -> np.ndarray:
    """Contract both trailing modes: out[i, j] = <x slice i, y slice j>.

    Equals ``mode1_matricize(x) @ mode1_matricize(y).T``.
    """
    if x.dims[1:] != y.dims[1:]:
        raise ValueError(f"trailing dims differ: {x.dims[1:]} vs {y.dims[1:]}")
    return mode1_matricize(x) @ mode1_matricize(y).T


def frobenius_norm(x) -> float:
    """Frobenius norm of a Tensor3 or ndarray."""
    if isinstance(x, Tensor3):
        return float(np.linalg.norm(x._store))
    return float(np.linalg.norm(np.asarray(x, dtype=np.float64)))


class SpectralNormResult(NamedTuple):
    value: float
    converged: bool


def tensor_spectral_norm(
    x: Tensor3,
    restarts: int = 5,
    max_iter: int = 500,
    tol: float = 1e-12,
    seed: int = 0,
) -> SpectralNormResult:
    """Largest rank-1 contraction max <x, u1 o u2 o u3> over unit vectors.

    Alternating power iteration from ``restarts`` random starts, deterministic
    for a fixed seed. The returned value is a lower bound on the tensor
    spectral norm and never exceeds the Frobenius norm; ``converged`` reports
    whether the best restart met the tolerance within ``max_iter`` sweeps.
    """
    arr = x.array
    fro = frobenius_norm(x)
    if fro == 0.0:
        return SpectralNormResult(0.0, True)
    best_sigma = 0.0
    best_converged = False
    for r in range(restarts):
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(r,))))
        u2 = rng.standard_normal(x.dims[1])
        u3 = rng.standard_normal(x.dims[2])
        u2 /= np.linalg.norm(u2)
        u3 /= np.linalg.norm(u3)
        sigma_prev = -1.0
        sigma = 0.0
        converged = False
        for _ in range(max_iter):
            v1 = np.einsum("ajk,j,k->a", arr, u2, u3)
            n1 = np.linalg.norm(v1)
            if n1 == 0.0:
                sigma = 0.0
                converged = True
                break
            u1 = v1 / n1
            v2 = np.einsum("ajk,a,k->j", arr, u1, u3)
            n2 = np.linalg.norm(v2)
            if n2 == 0.0:
                sigma = 0.0
                converged = True
                break
            u2 = v2 / n2
            v3 = np.einsum("ajk,a,j->k", arr, u1, u2)
            sigma = float(np.linalg.norm(v3))
            if sigma == 0.0:
                converged = True
                break
            u3 = v3 / sigma
            if abs(sigma - sigma_prev) <= tol * max(1.0, sigma):
                converged = True
                break
            sigma_prev = sigma
        if sigma > best_sigma:
            best_sigma = sigma
            best_converged = converged
    return SpectralNormResult(min(best_sigma, fro), best_converged)


def write_tensor(x: Tensor3, path, flavor: str = "f8") -> None:
    """Write a tensor to the binary format.

    Layout: 4-byte magic, three little-endian u32 dims (d1, d2, d3), then the
    entries in buffer order (layer-major, column-major within each slice).
    ``flavor`` is ``"f8"`` for float64 payloads or ``"u1"`` for 0/1 adjacency
    payloads stored one byte per entry; the u1 flavor sets the high bit of the
    final magic byte.
    """
    d1, d2, d3 = x.dims
    if flavor == "f8":
        magic = _MAGIC_F64
        payload = x._store.tobytes()
    elif flavor == "u1":
        magic = _MAGIC_U8
        store = x._store
        if not np.all((store == 0.0) | (store == 1.0)):
            raise ValueError("u1 flavor requires all entries in {0, 1}")
        payload = store.astype(np.uint8).tobytes()
    else:
        raise ValueError(f"unknown flavor {flavor!r}")
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(_HEADER.pack(d1, d2, d3))
        fh.write(payload)


def read_tensor(path) -> Tensor3:
    """Read a tensor written by :func:`write_tensor` (either flavor)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16:
        raise ValueError("truncated header")
    magic, dims_raw = blob[:4], blob[4:16]
    if magic == _MAGIC_F64:
        dtype, itemsize = np.float64, 8
    elif magic == _MAGIC_U8:
        dtype, itemsize = np.uint8, 1
    else:
        raise ValueError(f"bad magic {magic!r}")
    d1, d2, d3 = _HEADER.unpack(dims_raw)
    if min(d1, d2, d3) < 1:
        raise ValueError(f"bad dims {(d1, d2, d3)}")
    count = d1 * d2 * d3
    payload = blob[16:]
    if len(payload) != count * itemsize:
        raise ValueError(
            f"truncated payload: expected {count * itemsize} bytes, got {len(payload)}"
        )
    flat = np.frombuffer(payload, dtype=dtype).astype(np.float64)
    store = flat.reshape(d1, d3, d2)
    return Tensor3._wrap(store)
