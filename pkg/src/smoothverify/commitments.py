"""Merkle vector commitments and the pluggable succinct-argument backend.

The commitment is a binary Merkle tree over per-entry leaf digests, using a
standard 256-bit hash truncated to lambda bits. Leaves and inner nodes are
domain-separated and salted by the public parameters, so distinct setups
yield unrelated trees. Opening an index reveals the entry plus one digest per
tree level; verification recomputes the root.

The argument backend interface mirrors setup/prove/verify of a succinct
argument for the relation "the committed vector's optimal smooth value is t".
The default backend is *trusted re-execution*: prove() checks the relation on
the witness and issues a keyed token over the statement, verify() recomputes
the token. This gives honest-security only (no knowledge soundness against a
prover who controls the key) and exists so that a real argument system can be
dropped in behind the same interface.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import prng, wire
from .policy import compute_optimal_smooth_strategy

TOKEN_BYTES = 32


@dataclass(frozen=True)
class VcParams:
    hash_name: str
    lambda_bits: int
    n: int
    salt: bytes

    @property
    def digest_bytes(self) -> int:
        return self.lambda_bits // 8

    @property
    def depth(self) -> int:
        d, width = 0, self.n
        while width > 1:
            width = (width + 1) // 2
            d += 1
        return d


def vc_keygen(n: int, lambda_bits: int, seed: int) -> VcParams:
    if lambda_bits % 8 != 0 or not 8 <= lambda_bits <= 256:
        raise ValueError("lambda must be a multiple of 8 in [8, 256]")
    salt = prng.generator(seed).bytes(16)
    return VcParams(hash_name="sha256", lambda_bits=lambda_bits, n=n, salt=bytes(salt))


def _h(params: VcParams, *parts: bytes) -> bytes:
    h = hashlib.new(params.hash_name)
    h.update(params.salt)
    for p in parts:
        h.update(p)
    return h.digest()[: params.digest_bytes]


def _leaf(params: VcParams, index: int, value: bytes) -> bytes:
    return _h(params, b"\x00", wire.encode_uint32(index), value)


def _node(params: VcParams, left: bytes, right: bytes) -> bytes:
    return _h(params, b"\x01", left, right)


@dataclass
class VcAux:
    values: list  # per-entry wire encodings
    layers: list  # layers[0] = leaf digests, layers[-1] = [root]


@dataclass
class OpeningProof:
    index: int
    value: bytes
    path: list  # sibling digests, leaf level upward

    def encode(self) -> bytes:
        return self.value + b"".join(self.path)

    @classmethod
    def decode(cls, data: bytes, index: int, value_width: int, params: VcParams):
        need = value_width + params.depth * params.digest_bytes
        if len(data) != need:
            return None
        value = data[:value_width]
        rest = data[value_width:]
        step = params.digest_bytes
        path = [rest[i * step:(i + 1) * step] for i in range(params.depth)]
        return cls(index=index, value=value, path=path)


def vc_commit(params: VcParams, values: list) -> tuple[bytes, VcAux]:
    """Commit to a vector of per-entry byte encodings."""
    if len(values) != params.n:
        raise ValueError(f"expected {params.n} entries, got {len(values)}")
    layer = [_leaf(params, i, v) for i, v in enumerate(values)]
    layers = [layer]
    while len(layer) > 1:
        if len(layer) % 2 == 1:
            layer = layer + [layer[-1]]  # duplicate the lonely tail node
        layer = [_node(params, layer[i], layer[i + 1]) for i in range(0, len(layer), 2)]
        layers.append(layer)
    return layers[-1][0], VcAux(values=list(values), layers=layers)


def vc_open(params: VcParams, aux: VcAux, index: int) -> OpeningProof:
    if not 0 <= index < params.n:
        raise IndexError("opening index out of range")
    path = []
    pos = index
    for layer in aux.layers[:-1]:
        sibling = pos ^ 1
        if sibling >= len(layer):
            sibling = pos  # duplicated tail: sibling equals the node itself
        path.append(layer[sibling])
        pos //= 2
    return OpeningProof(index=index, value=aux.values[index], path=path)


def vc_verify(params: VcParams, root: bytes, proof: OpeningProof) -> bool:
    if not 0 <= proof.index < params.n or len(proof.path) != params.depth:
        return False
    node = _leaf(params, proof.index, proof.value)
    pos = proof.index
    for sibling in proof.path:
        if len(sibling) != params.digest_bytes:
            return False
        node = _node(params, node, sibling) if pos % 2 == 0 else _node(params, sibling, node)
        pos //= 2
    return node == root


# ---------------------------------------------------------------------------
# Relation and argument backend
# ---------------------------------------------------------------------------


def statement_bytes(root: bytes, t: float) -> bytes:
    return root + wire.encode_floats([t])


def relation_holds(params: VcParams, sigma: float, eps: float,
                   root: bytes, t: float, witness_indices) -> bool:
    """The committed vector lies in [0,1]^n, matches the root, and its optimal
    smooth value equals t within grid tolerance (eps/128)."""
    idx = np.asarray(witness_indices, dtype=np.int64)
    if idx.shape != (params.n,):
        return False
    if idx.min() < 0 or idx.max() > wire.grid_max_index(eps):
        return False
    encoded = _encode_entries(idx, eps)
    recomputed, _ = vc_commit(params, encoded)
    if recomputed != root:
        return False
    values = wire.dequantize(idx, eps)
    opt = compute_optimal_smooth_strategy(params.n, sigma, values).value
    return abs(opt - t) <= wire.grid_step(eps) / 2.0


def _encode_entries(idx: np.ndarray, eps: float) -> list:
    w = wire.entry_width(eps)
    blob = wire.encode_indices(idx, eps)
    return [blob[i * w:(i + 1) * w] for i in range(len(idx))]


class BackendRefusal(RuntimeError):
    """Raised when the honest backend is asked to prove a false statement."""


class TrustedReexecutionBackend:
    """Honest-security argument backend: re-checks the relation at prove time
    and emits a constant-size keyed token. Not a SNARK: provides no security
    against a prover holding the setup key."""

    name = "trusted-reexecution"

    def __init__(self):
        self._key = None
        self._context = None

    def setup(self, params: VcParams, sigma: float, eps: float, seed: int):
        self._key = bytes(prng.generator(seed, "backend-key").bytes(32))
        self._context = (params, sigma, eps)

    def _token(self, root: bytes, t: float) -> bytes:
        h = hashlib.sha256()
        h.update(self._key)
        h.update(statement_bytes(root, t))
        return h.digest()[:TOKEN_BYTES]

    def prove(self, root: bytes, t: float, witness_indices) -> bytes:
        params, sigma, eps = self._context
        if not relation_holds(params, sigma, eps, root, t, witness_indices):
            raise BackendRefusal("statement is false for the provided witness")
        return self._token(root, t)

    def verify(self, root: bytes, t: float, proof: bytes) -> bool:
        return len(proof) == TOKEN_BYTES and proof == self._token(root, t)
