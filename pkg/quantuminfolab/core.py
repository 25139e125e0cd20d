"""
Dense linear algebra over labeled multipartite systems.

Amplitudes and matrices are laid out row-major over the registry's entry
order; a subsystem's axis is its position in the registry, never a sorted
position. Every value is immutable once built.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from .config import get_settings
from .exceptions import (
    ConfigurationException,
    DimensionMismatchException,
    DimensionOverflowException,
    DuplicateLabelException,
    InvalidStateException,
    NonUnitaryException,
    OverlappingLabelsException,
    UnknownLabelException,
)

logger = logging.getLogger(__name__)

Labels = Union[str, Sequence[str]]
RngLike = Union[int, np.random.Generator, np.random.SeedSequence]
# relative eigenvalue floor of a purification, a few ulps of the largest
PURIFY_CUTOFF = 64 * np.finfo(float).eps


def as_labels(labels: Labels) -> Tuple[str, ...]:
    """Normalize a single label or a sequence of labels to a tuple."""
    if isinstance(labels, str):
        return (labels,)
    return tuple(labels)


def hermitize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.conj().T) / 2


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=complex)
    out.setflags(write=False)
    return out


class SystemKind(str, Enum):
    PHYSICAL = "physical"
    KNOWLEDGE = "knowledge"


@dataclass(frozen=True)
class Subsystem:
    label: str
    dim: int
    kind: SystemKind = SystemKind.PHYSICAL
    owner: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.label, str) or not self.label:
            raise ConfigurationException(
                "Subsystem label must be a non-empty string, got "
                f"{self.label!r}."
            )
        if (
            isinstance(self.dim, bool)
            or not isinstance(self.dim, (int, np.integer))
            or self.dim < 1
        ):
            raise DimensionMismatchException(
                f"Subsystem `{self.label}` needs an integer dimension >= 1, "
                f"got {self.dim!r}."
            )
        object.__setattr__(self, "dim", int(self.dim))
        try:
            object.__setattr__(self, "kind", SystemKind(self.kind))
        except ValueError:
            raise ConfigurationException(
                f"Unknown subsystem kind {self.kind!r} for `{self.label}`."
            )
        if self.kind is SystemKind.KNOWLEDGE and not self.owner:
            raise ConfigurationException(
                f"Knowledge system `{self.label}` needs an owner."
            )
        if self.kind is SystemKind.PHYSICAL and self.owner is not None:
            raise ConfigurationException(
                f"Physical system `{self.label}` cannot have an owner."
            )

    @classmethod
    def physical(cls, label: str, dim: int) -> "Subsystem":
        return cls(label, dim)

    @classmethod
    def knowledge(cls, label: str, dim: int, owner: str) -> "Subsystem":
        return cls(label, dim, SystemKind.KNOWLEDGE, owner)

    @classmethod
    def from_entry(cls, entry) -> "Subsystem":
        """
        Build a subsystem from a registry entry.
        :param entry: A `Subsystem`, or a tuple ``(label, dim)``,
            ``(label, dim, "physical")``, ``(label, dim, "knowledge", owner)``
            or ``(label, dim, ("knowledge", owner))``.
        :return: Subsystem.
        """
        if isinstance(entry, Subsystem):
            return entry
        if not isinstance(entry, (tuple, list)) or not 2 <= len(entry) <= 4:
            raise ConfigurationException(
                f"Cannot read registry entry {entry!r}."
            )
        label, dim = entry[0], entry[1]
        if len(entry) == 2:
            return cls(label, dim)
        kind, owner = entry[2], entry[3] if len(entry) == 4 else None
        if isinstance(kind, (tuple, list)):
            kind, owner = kind
        return cls(label, dim, kind, owner)


@dataclass(frozen=True)
class SystemRegistry:
    entries: Tuple[Subsystem, ...]
    max_total_dim: int = field(
        default_factory=lambda: get_settings().max_total_dim
    )

    def __post_init__(self):
        entries = tuple(Subsystem.from_entry(e) for e in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ConfigurationException(
                "A registry needs at least one subsystem."
            )
        seen = set()
        for entry in entries:
            if entry.label in seen:
                raise DuplicateLabelException(
                    f"Label `{entry.label}` appears more than once."
                )
            seen.add(entry.label)
        if self.total_dim > self.max_total_dim:
            raise DimensionOverflowException(
                f"Total dimension {self.total_dim} exceeds max_total_dim "
                f"{self.max_total_dim}."
            )

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, label) -> bool:
        return label in self.labels

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(e.label for e in self.entries)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(e.dim for e in self.entries)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabelException(
                f"Label `{label}` is not in registry {list(self.labels)}."
            )

    def entry(self, label: str) -> Subsystem:
        return self.entries[self.index(label)]

    def dim_of(self, label: str) -> int:
        return self.entry(label).dim

    def dims_of(self, labels: Labels) -> Tuple[int, ...]:
        return tuple(self.dim_of(label) for label in as_labels(labels))

    def check_labels(self, labels: Labels) -> Tuple[str, ...]:
        """
        Validate a label set against the registry.
        :param labels: Labels to check.
        :return: The labels as a tuple, in the order given.
        """
        labels = as_labels(labels)
        if not labels:
            raise UnknownLabelException("Label set must not be empty.")
        if len(set(labels)) != len(labels):
            raise DuplicateLabelException(
                f"Label set {list(labels)} repeats a label."
            )
        for label in labels:
            self.index(label)
        return labels

    def ordered(self, labels: Labels) -> Tuple[str, ...]:
        """Return the given labels sorted into registry order."""
        labels = self.check_labels(labels)
        return tuple(sorted(labels, key=self.index))

    def subset(self, labels: Labels) -> "SystemRegistry":
        keep = set(self.check_labels(labels))
        return SystemRegistry(
            tuple(e for e in self.entries if e.label in keep),
            self.max_total_dim,
        )

    def concat(self, other: "SystemRegistry") -> "SystemRegistry":
        overlap = set(self.labels) & set(other.labels)
        if overlap:
            raise OverlappingLabelsException(
                f"Registries share labels {sorted(overlap)}."
            )
        return SystemRegistry(
            self.entries + other.entries,
            min(self.max_total_dim, other.max_total_dim),
        )

    def with_dim(self, label: str, dim: int) -> "SystemRegistry":
        position = self.index(label)
        old = self.entries[position]
        entries = list(self.entries)
        entries[position] = Subsystem(old.label, dim, old.kind, old.owner)
        return SystemRegistry(tuple(entries), self.max_total_dim)

    def labels_owned_by(self, owner: str) -> Tuple[str, ...]:
        return tuple(e.label for e in self.entries if e.owner == owner)

    def physical_labels(self) -> Tuple[str, ...]:
        return tuple(
            e.label for e in self.entries if e.kind is SystemKind.PHYSICAL
        )

    def knowledge_labels(self) -> Tuple[str, ...]:
        return tuple(
            e.label for e in self.entries if e.kind is SystemKind.KNOWLEDGE
        )

    def fresh_label(self, base: str) -> str:
        """Return `base`, or `base_1`, `base_2`, ... if it is taken."""
        label, counter = base, 0
        while label in self.labels:
            counter += 1
            label = f"{base}_{counter}"
        return label


def registry_create(
    entries: Iterable, max_total_dim: Optional[int] = None
) -> SystemRegistry:
    """
    Create a registry of labeled subsystems.
    :param entries: Subsystems or tuples accepted by `Subsystem.from_entry`.
    :param max_total_dim: Dimension limit; defaults to the configured one.
    :return: SystemRegistry.
    """
    subsystems = tuple(Subsystem.from_entry(e) for e in entries)
    if max_total_dim is None:
        max_total_dim = get_settings().max_total_dim
    return SystemRegistry(subsystems, max_total_dim)


def _check_density(matrix: np.ndarray) -> None:
    settings = get_settings()
    deviation = np.max(np.abs(matrix - matrix.conj().T))
    if deviation > settings.tol_herm:
        raise InvalidStateException(
            f"Density matrix is not Hermitian (deviation {deviation:.3e})."
        )
    trace = np.trace(matrix)
    if abs(trace - 1) > settings.tol_trace:
        raise InvalidStateException(
            f"Density matrix trace is {trace:.12g}, expected 1."
        )
    eigenvalues = np.linalg.eigvalsh(hermitize(matrix))
    floor = settings.tol_psd * np.max(np.abs(eigenvalues))
    if eigenvalues[0] < -floor:
        raise InvalidStateException(
            f"Density matrix has negative eigenvalue {eigenvalues[0]:.3e}."
        )


@dataclass(frozen=True, eq=False)
class PureState:
    registry: SystemRegistry
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if amplitudes.shape != (self.registry.total_dim,):
            raise DimensionMismatchException(
                f"Expected {self.registry.total_dim} amplitudes, got shape "
                f"{amplitudes.shape}."
            )
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1) > get_settings().tol_norm:
            raise InvalidStateException(
                f"State vector has norm {norm:.12g}, expected 1."
            )
        object.__setattr__(self, "amplitudes", _frozen(amplitudes))

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.registry.labels

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape(self.registry.dims)

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(
            self.registry,
            np.outer(self.amplitudes, self.amplitudes.conj()),
            validate=False,
        )


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    registry: SystemRegistry
    matrix: np.ndarray
    # skips the eigenvalue check for results of trace-preserving maps
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        side = self.registry.total_dim
        if matrix.shape != (side, side):
            raise DimensionMismatchException(
                f"Expected a {side}x{side} matrix, got shape {matrix.shape}."
            )
        if self.validate:
            _check_density(matrix)
        object.__setattr__(self, "matrix", _frozen(matrix))

    @property
    def labels(self) -> Tuple[str, ...]:
        return self.registry.labels

    def tensor_view(self) -> np.ndarray:
        dims = self.registry.dims
        return self.matrix.reshape(dims + dims)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(hermitize(self.matrix))


State = Union[PureState, DensityMatrix]


def as_density_matrix(state: State) -> DensityMatrix:
    if isinstance(state, PureState):
        return state.to_density_matrix()
    if isinstance(state, DensityMatrix):
        return state
    raise TypeError(f"Expected PureState or DensityMatrix, got {type(state)}.")


@dataclass(frozen=True, eq=False)
class Unitary:
    matrix: np.ndarray
    targets: Tuple[str, ...] = ()

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchException(
                f"Unitary must be square, got shape {matrix.shape}."
            )
        deviation = np.max(
            np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))
        )
        if deviation > get_settings().tol_unitary:
            raise NonUnitaryException(
                f"Matrix is not unitary (max |U^dag U - I| = {deviation:.3e})."
            )
        targets = as_labels(self.targets)
        if len(set(targets)) != len(targets):
            raise DuplicateLabelException(
                f"Unitary targets {list(targets)} repeat a label."
            )
        object.__setattr__(self, "matrix", _frozen(matrix))
        object.__setattr__(self, "targets", targets)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def adjoint(self) -> "Unitary":
        return Unitary(self.matrix.conj().T, self.targets)

    def on(self, *targets: str) -> "Unitary":
        return Unitary(self.matrix, targets)


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    probs: np.ndarray

    def __post_init__(self):
        settings = get_settings()
        probs = np.asarray(self.probs)
        if np.iscomplexobj(probs):
            if np.max(np.abs(probs.imag), initial=0.0) > settings.tol_trace:
                raise InvalidStateException(
                    "Probabilities must be real numbers."
                )
            probs = probs.real
        probs = np.asarray(probs, dtype=float).reshape(-1)
        if probs.size == 0 or not np.all(np.isfinite(probs)):
            raise InvalidStateException(
                "Probability vector must be nonempty and finite."
            )
        if probs.min() < -settings.tol_psd:
            raise InvalidStateException(
                f"Negative probability {probs.min():.3e}."
            )
        probs = np.clip(probs, 0.0, None)
        total = probs.sum()
        if abs(total - 1) > settings.tol_trace:
            raise InvalidStateException(
                f"Probabilities sum to {total:.12g}, expected 1."
            )
        probs = probs / total
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return self.probs.size

    def __iter__(self):
        return iter(self.probs.tolist())

    def __getitem__(self, index):
        return self.probs[index]


def apply_on_axes(
    tensor: np.ndarray,
    operator: np.ndarray,
    axes: Sequence[int],
    out_dims: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """
    Multiply `operator` into the given axes of `tensor`.
    :param tensor: Array with one axis per subsystem index.
    :param operator: Matrix acting on the joint index of `axes`, row-major in
        the order given.
    :param axes: Axes the operator acts on.
    :param out_dims: Output dimensions of those axes; defaults to the input.
    :return: New array with the same axis layout.
    """
    axes = list(axes)
    count = len(axes)
    moved = np.moveaxis(tensor, axes, list(range(count)))
    in_dims = moved.shape[:count]
    flat = moved.reshape(math.prod(in_dims), -1)
    result = operator @ flat
    out_dims = tuple(out_dims) if out_dims is not None else in_dims
    result = result.reshape(out_dims + moved.shape[count:])
    return np.moveaxis(result, list(range(count)), axes)


def tensor(a: State, b: State) -> State:
    """
    Tensor two states; the registry is a concatenation.
    A PureState paired with a DensityMatrix is promoted to a DensityMatrix.
    :param a: Left factor.
    :param b: Right factor, with labels disjoint from `a`.
    :return: PureState if both factors are pure, else DensityMatrix.
    """
    if isinstance(a, PureState) and isinstance(b, PureState):
        registry = a.registry.concat(b.registry)
        return PureState(registry, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, (PureState, DensityMatrix)) and isinstance(
        b, (PureState, DensityMatrix)
    ):
        a, b = as_density_matrix(a), as_density_matrix(b)
        registry = a.registry.concat(b.registry)
        return DensityMatrix(
            registry, np.kron(a.matrix, b.matrix), validate=False
        )
    raise TypeError(
        f"Cannot tensor {type(a).__name__} with {type(b).__name__}."
    )


def partial_trace(state: State, keep: Labels) -> DensityMatrix:
    """
    Reduce a state to the subsystems in `keep`.
    :param state: PureState or DensityMatrix.
    :param keep: Labels to keep; the result follows registry order.
    :return: DensityMatrix on the kept labels.
    """
    registry = state.registry
    keep_axes = sorted(registry.index(l) for l in registry.check_labels(keep))
    drop_axes = [i for i in range(len(registry)) if i not in keep_axes]
    dims = registry.dims
    kept = math.prod(dims[i] for i in keep_axes)
    dropped = math.prod(dims[i] for i in drop_axes)
    reduced_registry = registry.subset([registry.labels[i] for i in keep_axes])

    if isinstance(state, PureState):
        psi = (
            state.tensor_view()
            .transpose(keep_axes + drop_axes)
            .reshape(kept, dropped)
        )
        reduced = psi @ psi.conj().T
    else:
        n = len(registry)
        order = (
            keep_axes
            + drop_axes
            + [n + i for i in keep_axes]
            + [n + i for i in drop_axes]
        )
        blocks = (
            state.tensor_view()
            .transpose(order)
            .reshape(kept, dropped, kept, dropped)
        )
        reduced = np.einsum("ijkj->ik", blocks)
    return DensityMatrix(reduced_registry, reduced, validate=False)


def apply_unitary(state: State, u: Unitary) -> State:
    """
    Apply `u` to its target labels, identity elsewhere.
    :param state: PureState or DensityMatrix.
    :param u: Unitary whose targets are labels of the state.
    :return: Evolved state of the same kind.
    """
    registry = state.registry
    targets = registry.check_labels(u.targets)
    target_dim = math.prod(registry.dims_of(targets))
    if target_dim != u.dim:
        raise DimensionMismatchException(
            f"Unitary of side {u.dim} cannot act on {list(targets)} "
            f"(dimension {target_dim})."
        )
    axes = [registry.index(t) for t in targets]
    if isinstance(state, PureState):
        evolved = apply_on_axes(state.tensor_view(), u.matrix, axes)
        return PureState(registry, evolved.reshape(-1))
    n = len(registry)
    evolved = apply_on_axes(state.tensor_view(), u.matrix, axes)
    evolved = apply_on_axes(evolved, u.matrix.conj(), [n + a for a in axes])
    side = registry.total_dim
    return DensityMatrix(registry, evolved.reshape(side, side), validate=False)


def basis_state(
    registry: SystemRegistry, indices: Optional[Mapping[str, int]] = None
) -> PureState:
    """
    Computational basis ket; labels missing from `indices` sit at index 0.
    """
    indices = dict(indices or {})
    for label in indices:
        registry.index(label)
    position = np.ravel_multi_index(
        tuple(indices.get(label, 0) for label in registry.labels),
        registry.dims,
    )
    amplitudes = np.zeros(registry.total_dim, dtype=complex)
    amplitudes[position] = 1.0
    return PureState(registry, amplitudes)


def maximally_entangled_state(registry: SystemRegistry) -> PureState:
    """Return sum_j |jj> / sqrt(d) on a two-entry registry of equal dims."""
    if len(registry) != 2 or registry.dims[0] != registry.dims[1]:
        raise DimensionMismatchException(
            "A maximally entangled state needs two subsystems of equal "
            f"dimension, got {list(registry.dims)}."
        )
    dim = registry.dims[0]
    amplitudes = np.eye(dim, dtype=complex).reshape(-1) / np.sqrt(dim)
    return PureState(registry, amplitudes)


def maximally_mixed_state(registry: SystemRegistry) -> DensityMatrix:
    side = registry.total_dim
    return DensityMatrix(registry, np.eye(side) / side, validate=False)


def extend_fresh(
    state: State,
    label: str,
    dim: int,
    kind: Union[str, SystemKind] = SystemKind.PHYSICAL,
    owner: Optional[str] = None,
) -> State:
    """
    Append a new subsystem in its fiducial basis state |0>.
    :param state: PureState or DensityMatrix.
    :param label: Label of the new subsystem; must be unused.
    :param dim: Dimension of the new subsystem.
    :param kind: Physical or knowledge system.
    :param owner: Owner of a knowledge system.
    :return: State of the same kind with one more registry entry.
    """
    if label in state.registry:
        raise DuplicateLabelException(f"Label `{label}` is already in use.")
    fresh = basis_state(
        SystemRegistry(
            (Subsystem(label, dim, kind, owner),),
            state.registry.max_total_dim,
        )
    )
    if isinstance(state, DensityMatrix):
        return tensor(state, fresh.to_density_matrix())
    return tensor(state, fresh)


def _generator(rng: RngLike) -> np.random.Generator:
    if rng is None:
        raise ConfigurationException(
            "Random sampling needs an explicit generator or seed."
        )
    return np.random.default_rng(rng)


def _ginibre(rng: np.random.Generator, shape) -> np.ndarray:
    return (
        rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    ) / np.sqrt(2)


def random_haar_unitary(
    dim: int, rng: RngLike, targets: Labels = ()
) -> Unitary:
    """
    Haar-random unitary from a complex Gaussian matrix and a QR
    decomposition with the phases of R's diagonal divided out.
    :param dim: Matrix side.
    :param rng: Generator or seed.
    :param targets: Labels the unitary will act on.
    :return: Unitary.
    """
    if dim < 1:
        raise DimensionMismatchException(
            f"Unitary dimension must be >= 1, got {dim}."
        )
    rng = _generator(rng)
    q, r = linalg.qr(_ginibre(rng, (dim, dim)))
    diagonal = np.diag(r)
    return Unitary(q * (diagonal / np.abs(diagonal)), targets)


def random_state(registry: SystemRegistry, rank: int, rng: RngLike) -> State:
    """
    Random state of the given rank.
    Rank 1 gives a Haar-random PureState; higher ranks give the reduction of
    a Haar-random pure state on the registry extended by a rank-dimensional
    partner.
    :param registry: Registry of the state.
    :param rank: Between 1 and the total dimension.
    :param rng: Generator or seed.
    :return: PureState or DensityMatrix.
    """
    side = registry.total_dim
    if not 1 <= rank <= side:
        raise ConfigurationException(
            f"Rank must lie in [1, {side}], got {rank}."
        )
    rng = _generator(rng)
    purification = _ginibre(rng, (side, rank))
    if rank == 1:
        vector = purification[:, 0]
        return PureState(registry, vector / np.linalg.norm(vector))
    matrix = purification @ purification.conj().T
    matrix = hermitize(matrix / np.trace(matrix).real)
    return DensityMatrix(registry, matrix, validate=False)


def purify(
    rho: State,
    reference_label: str = "R",
    kind: Union[str, SystemKind] = SystemKind.PHYSICAL,
    owner: Optional[str] = None,
) -> PureState:
    """
    Spectral purification sum_k sqrt(l_k) |k>_R |v_k>.
    The reference comes first in the registry and its dimension is the rank
    of `rho`; eigenvalues are taken in descending order.
    :param rho: State to purify.
    :param reference_label: Label of the purifying system.
    :return: PureState whose reduction to rho's labels is rho.
    """
    if isinstance(rho, PureState):
        rho = rho.to_density_matrix()
    if reference_label in rho.registry:
        raise DuplicateLabelException(
            f"Label `{reference_label}` is already in use."
        )
    eigenvalues, vectors = np.linalg.eigh(hermitize(rho.matrix))
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues, vectors = eigenvalues[order], vectors[:, order]
    # only round-off is dropped; tiny eigenvalues still carry entropy
    support = eigenvalues > PURIFY_CUTOFF * eigenvalues[0]
    weights = np.sqrt(eigenvalues[support])
    amplitudes = (weights[:, None] * vectors[:, support].T).reshape(-1)
    reference = SystemRegistry(
        (Subsystem(reference_label, int(support.sum()), kind, owner),),
        rho.registry.max_total_dim,
    )
    return PureState(reference.concat(rho.registry), amplitudes)


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray
    left_labels: Tuple[str, ...]
    right_labels: Tuple[str, ...]

    @property
    def rank(self) -> int:
        return self.coefficients.size

    def reconstruct(self) -> np.ndarray:
        """Amplitudes with left labels first, then right labels."""
        terms = self.coefficients[:, None, None] * (
            self.left.T[:, :, None] * self.right[:, None, :]
        )
        return terms.sum(axis=0).reshape(-1)


def schmidt_decomposition(
    state: PureState, labels: Labels
) -> SchmidtDecomposition:
    """
    Schmidt decomposition across `labels` and the rest of the registry.
    :param state: Pure state.
    :param labels: Labels of the left factor.
    :return: Coefficients (descending, above tol_norm), left vectors as
        columns and right vectors as rows.
    """
    registry = state.registry
    left_labels = registry.ordered(labels)
    right_labels = tuple(l for l in registry.labels if l not in left_labels)
    if not right_labels:
        raise UnknownLabelException(
            "Schmidt decomposition needs a nonempty complement."
        )
    left_axes = [registry.index(l) for l in left_labels]
    right_axes = [registry.index(l) for l in right_labels]
    matrix = (
        state.tensor_view()
        .transpose(left_axes + right_axes)
        .reshape(
            math.prod(registry.dims_of(left_labels)),
            math.prod(registry.dims_of(right_labels)),
        )
    )
    u, s, vh = np.linalg.svd(matrix, full_matrices=False)
    support = s > get_settings().tol_norm
    return SchmidtDecomposition(
        s[support], u[:, support], vh[support], left_labels, right_labels
    )
