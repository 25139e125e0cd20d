"""
Entropic functionals in bits.

Knowledge systems are read through their diagonal in the computational
basis; classicization strips the off-diagonal part of the listed labels.
"""

import logging
import math
from typing import Union

import numpy as np

from .config import get_settings
from .core import (
    DensityMatrix,
    Labels,
    ProbabilityVector,
    PureState,
    State,
    as_density_matrix,
    as_labels,
    hermitize,
    partial_trace,
)
from .exceptions import (
    DimensionMismatchException,
    InvalidStateException,
    OverlappingLabelsException,
)

logger = logging.getLogger(__name__)


class EntropyValue(float):
    """An entropy, or difference of entropies, measured in bits."""

    def __new__(cls, bits):
        value = float(bits)
        if not math.isfinite(value):
            raise InvalidStateException(
                f"Entropy must be finite, got {value}."
            )
        return super().__new__(cls, value)

    @property
    def bits(self) -> float:
        return float(self)

    def __repr__(self) -> str:
        return f"EntropyValue({float(self)!r})"


def _require_disjoint(a, b) -> None:
    overlap = set(a) & set(b)
    if overlap:
        raise OverlappingLabelsException(
            f"Label sets {list(a)} and {list(b)} share {sorted(overlap)}."
        )


def _entropy_bits(weights: np.ndarray) -> float:
    weights = weights[weights > 0]
    return float(-np.sum(weights * np.log2(weights)))


def von_neumann(rho: State) -> EntropyValue:
    """
    Von Neumann entropy -tr(rho log2 rho).
    :param rho: DensityMatrix (a PureState has entropy 0).
    :return: EntropyValue.
    """
    if isinstance(rho, PureState):
        return EntropyValue(0.0)
    if not isinstance(rho, DensityMatrix):
        raise TypeError(f"Expected DensityMatrix, got {type(rho).__name__}.")
    eigenvalues = np.linalg.eigvalsh(hermitize(rho.matrix))
    floor = get_settings().tol_psd * np.max(np.abs(eigenvalues))
    if eigenvalues[0] < -floor:
        raise InvalidStateException(
            f"Density matrix has negative eigenvalue {eigenvalues[0]:.3e}."
        )
    return EntropyValue(_entropy_bits(np.clip(eigenvalues, 0.0, None)))


def shannon(p: Union[ProbabilityVector, np.ndarray]) -> EntropyValue:
    if not isinstance(p, ProbabilityVector):
        p = ProbabilityVector(p)
    return EntropyValue(_entropy_bits(p.probs))


def entropy_of(state: State, labels: Labels) -> EntropyValue:
    """Von Neumann entropy of the reduction of `state` to `labels`."""
    labels = state.registry.check_labels(labels)
    if isinstance(state, PureState) and len(labels) == len(state.registry):
        return EntropyValue(0.0)
    return von_neumann(partial_trace(state, labels))


def _joint_diagonal(state: State, labels: Labels):
    reduced = partial_trace(state, labels)
    diagonal = np.clip(np.real(np.diag(reduced.matrix)), 0.0, None)
    return reduced.registry, diagonal / diagonal.sum()


def diagonal_distribution(state: State, labels: Labels) -> ProbabilityVector:
    """
    Diagonal of the reduction to `labels` in the computational basis.
    For several labels this is the joint distribution, row-major in
    registry order.
    """
    _, diagonal = _joint_diagonal(state, labels)
    return ProbabilityVector(diagonal)


def classicize(rho: State, labels: Labels) -> DensityMatrix:
    """
    Remove every coherence between computational basis states of `labels`.
    :param rho: State to dephase.
    :param labels: Labels to classicize.
    :return: DensityMatrix on the same registry.
    """
    rho = as_density_matrix(rho)
    registry = rho.registry
    n = len(registry)
    blocks = rho.tensor_view()
    for label in registry.check_labels(labels):
        axis = registry.index(label)
        dim = registry.dims[axis]
        shape = [1] * (2 * n)
        shape[axis] = shape[n + axis] = dim
        blocks = blocks * np.eye(dim).reshape(shape)
    side = registry.total_dim
    return DensityMatrix(registry, blocks.reshape(side, side), validate=False)


def directed_entanglement(
    rho: State, x: Labels, y: Labels
) -> EntropyValue:
    """
    Directed entanglement E(X -> Y) = S(Y) - S(XY).
    Its negation is the conditional entropy S(X|Y).
    """
    x, y = as_labels(x), as_labels(y)
    _require_disjoint(x, y)
    return EntropyValue(entropy_of(rho, y) - entropy_of(rho, x + y))


def quantum_mutual_information(
    rho: State, a: Labels, b: Labels
) -> EntropyValue:
    a, b = as_labels(a), as_labels(b)
    _require_disjoint(a, b)
    return EntropyValue(
        entropy_of(rho, a) + entropy_of(rho, b) - entropy_of(rho, a + b)
    )


def mutual_information_rv(rho: State, a: Labels, b: Labels) -> EntropyValue:
    """
    Shannon mutual information I(A;B) = H(A) + H(B) - H(AB) of the joint
    diagonal distribution of the reduction to A and B.
    """
    a, b = as_labels(a), as_labels(b)
    _require_disjoint(a, b)
    registry, diagonal = _joint_diagonal(rho, a + b)
    joint = diagonal.reshape(registry.dims)
    axes_a = tuple(registry.index(l) for l in a)
    axes_b = tuple(registry.index(l) for l in b)
    marginal_a = joint.sum(axis=axes_b).reshape(-1)
    marginal_b = joint.sum(axis=axes_a).reshape(-1)
    return EntropyValue(
        _entropy_bits(marginal_a)
        + _entropy_bits(marginal_b)
        - _entropy_bits(diagonal)
    )


def agreement_probability(rho: State, a: str, b: str) -> float:
    """Pr(A = B) read off the joint diagonal of two equal-sized systems."""
    registry, diagonal = _joint_diagonal(rho, (a, b))
    dim_a, dim_b = registry.dim_of(a), registry.dim_of(b)
    if dim_a != dim_b:
        raise DimensionMismatchException(
            f"Cannot compare `{a}` (dim {dim_a}) with `{b}` (dim {dim_b})."
        )
    return float(np.trace(diagonal.reshape(registry.dims)))


def thermodynamic_entropy(rho: State, q: Labels, b: Labels) -> EntropyValue:
    """
    Thermodynamic entropy S_T(Q|B) = -E(Q -> B^c) of Q relative to the
    knowledge systems B.
    """
    q, b = as_labels(q), as_labels(b)
    _require_disjoint(q, b)
    classical = classicize(partial_trace(rho, q + b), b)
    return EntropyValue(-directed_entanglement(classical, q, b))
