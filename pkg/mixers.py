"""
Mixers Module
Declarative mixer families for the Quantum Alternating Operator Ansatz and their application.

Variants:
- TransverseField: exp(-i beta sum_j X_j)
- XYRingGroups: per group (q1..qm), XY pair rotations on (q1,q2), ..., (qm,q1) in listed order
- OrderedProduct: product of 1-qubit X and 2-qubit (XX+YY)/2 exponentials in listed order

Mixer JSON: {"variant": "x" | "xy" | "product", "groups": [[...], ...], "terms": [["x", [q]], ["xy", [i, j]], ...]}
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from statevector import StateVector, _check_pair, _rx_all_inplace, _rx_inplace, _xy_inplace

logger = logging.getLogger(__name__)


class MixerSpecError(ValueError):
    """Mixer description that cannot act on the given register"""


@dataclass(frozen=True)
class TransverseField:
    def validate(self, n: int):
        pass


@dataclass(frozen=True)
class XYRingGroups:
    groups: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(tuple(int(q) for q in g) for g in self.groups))
        _check_disjoint(self.groups)

    def pairs(self) -> List[Tuple[int, int]]:
        out = []
        for g in self.groups:
            if len(g) < 2:
                continue
            out.extend((g[k], g[(k + 1) % len(g)]) for k in range(len(g)))
        return out

    def validate(self, n: int):
        for g in self.groups:
            for q in g:
                if q < 0 or q >= n:
                    raise MixerSpecError(f"XY group qubit {q} out of range for n={n}")


@dataclass(frozen=True)
class MixerTerm:
    """One factor of an ordered product: kind 'x' on one qubit or 'xy' on two"""

    kind: str
    qubits: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind == "x" and len(self.qubits) != 1:
            raise MixerSpecError(f"X term needs one qubit, got {self.qubits}")
        if self.kind == "xy" and (len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]):
            raise MixerSpecError(f"XY term needs two distinct qubits, got {self.qubits}")
        if self.kind not in ("x", "xy"):
            raise MixerSpecError(f"Unknown mixer term kind '{self.kind}'")


@dataclass(frozen=True)
class OrderedProduct:
    terms: Tuple[MixerTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def validate(self, n: int):
        for term in self.terms:
            for q in term.qubits:
                if q < 0 or q >= n:
                    raise MixerSpecError(f"Product term qubit {q} out of range for n={n}")


MixerSpec = Union[TransverseField, XYRingGroups, OrderedProduct]


def _check_disjoint(groups: Sequence[Sequence[int]]):
    seen = set()
    for g in groups:
        for q in g:
            if q in seen:
                raise MixerSpecError(f"Qubit {q} appears in more than one group")
            seen.add(q)


def transverse_as_product(n: int) -> OrderedProduct:
    return OrderedProduct(tuple(MixerTerm("x", (q,)) for q in range(n)))


def xy_ring_product(groups: Sequence[Sequence[int]]) -> OrderedProduct:
    """The same unitary as XYRingGroups(groups), spelled out as an ordered product"""
    spec = XYRingGroups(tuple(tuple(g) for g in groups))
    return OrderedProduct(tuple(MixerTerm("xy", pair) for pair in spec.pairs()))


def _apply_inplace(amps: np.ndarray, n: int, spec: MixerSpec, beta: float):
    if isinstance(spec, TransverseField):
        _rx_all_inplace(amps, n, beta)
    elif isinstance(spec, XYRingGroups):
        for i, j in spec.pairs():
            _xy_inplace(amps, n, i, j, beta)
    elif isinstance(spec, OrderedProduct):
        if beta == 0.0:
            return
        for term in spec.terms:
            if term.kind == "x":
                _rx_inplace(amps, n, term.qubits[0], beta)
            else:
                _check_pair(n, *term.qubits)
                _xy_inplace(amps, n, term.qubits[0], term.qubits[1], beta)
    else:
        raise MixerSpecError(f"Unsupported mixer spec {spec!r}")


def apply_mixer(state: StateVector, spec: MixerSpec, beta: float) -> StateVector:
    """Apply U_M(beta) for the given mixer family"""
    spec.validate(state.n)
    out = state.copy()
    _apply_inplace(out.amps, out.n, spec, beta)
    return out


class OneHotPredicate:
    """True iff every group holds exactly one set bit"""

    def __init__(self, groups: Sequence[Sequence[int]]):
        _check_disjoint(groups)
        self.groups = [list(g) for g in groups]

    def __call__(self, x: int) -> bool:
        for g in self.groups:
            if sum((x >> q) & 1 for q in g) != 1:
                return False
        return True

    def mask(self, n: int) -> np.ndarray:
        idx = np.arange(1 << n, dtype=np.int64)
        ok = np.ones(1 << n, dtype=bool)
        for g in self.groups:
            count = np.zeros(1 << n, dtype=np.int64)
            for q in g:
                count += (idx >> q) & 1
            ok &= count == 1
        return ok


def feasible_onehot_predicate(groups: Sequence[Sequence[int]]) -> OneHotPredicate:
    return OneHotPredicate(groups)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def mixer_to_dict(spec: MixerSpec) -> Dict:
    if isinstance(spec, TransverseField):
        return {"variant": "x"}
    if isinstance(spec, XYRingGroups):
        return {"variant": "xy", "groups": [list(g) for g in spec.groups]}
    return {"variant": "product", "terms": [[t.kind, list(t.qubits)] for t in spec.terms]}


def mixer_from_dict(data: Dict) -> MixerSpec:
    variant = data.get("variant")
    if variant == "x":
        return TransverseField()
    if variant == "xy":
        if "groups" not in data:
            raise MixerSpecError("XY mixer JSON needs 'groups'")
        return XYRingGroups(tuple(tuple(g) for g in data["groups"]))
    if variant == "product":
        return OrderedProduct(tuple(MixerTerm(kind, tuple(qs)) for kind, qs in data.get("terms", [])))
    raise MixerSpecError(f"Unknown mixer variant '{variant}'")


def load_mixer(path: Union[str, Path]) -> MixerSpec:
    with open(path, "r", encoding="utf-8") as f:
        spec = mixer_from_dict(json.load(f))
    logger.info(f"Loaded mixer {type(spec).__name__} from {path}")
    return spec
