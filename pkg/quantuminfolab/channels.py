"""
Quantum channels stored as Kraus families.

The environment picture (a unitary on system plus environment followed by
tracing out the environment) is derived on demand by
:func:`stinespring_dilation`.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .config import get_settings
from .core import (
    DensityMatrix,
    ProbabilityVector,
    PureState,
    State,
    SystemRegistry,
    Unitary,
    apply_on_axes,
    as_density_matrix,
    partial_trace,
    purify,
    registry_create,
)
from .entropy import EntropyValue, von_neumann
from .exceptions import (
    ChannelCompletenessException,
    ConfigurationException,
    DimensionMismatchException,
    InvalidEnsembleException,
    InvalidStateException,
    UnknownLabelException,
)

logger = logging.getLogger(__name__)

PRESET_CHANNELS = (
    "identity",
    "dephasing",
    "depolarizing",
    "amplitude_damping",
)


@dataclass(frozen=True, eq=False)
class Channel:
    kraus: Tuple[np.ndarray, ...]

    def __post_init__(self):
        operators = [np.asarray(k, dtype=complex) for k in self.kraus]
        if not operators:
            raise DimensionMismatchException(
                "A channel needs at least one Kraus operator."
            )
        shape = operators[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in operators):
            raise DimensionMismatchException(
                "Kraus operators must be matrices of one common shape, got "
                f"{[k.shape for k in operators]}."
            )
        completeness = sum(k.conj().T @ k for k in operators)
        deviation = np.max(np.abs(completeness - np.eye(shape[1])))
        if deviation > get_settings().tol_unitary:
            raise ChannelCompletenessException(
                "Kraus operators are not trace preserving "
                f"(max |sum K^dag K - I| = {deviation:.3e})."
            )
        for k in operators:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", tuple(operators))

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def n_kraus(self) -> int:
        return len(self.kraus)


def channel_create(kraus: Sequence[np.ndarray]) -> Channel:
    return Channel(tuple(kraus))


def _acted_label(registry: SystemRegistry, label: Optional[str]) -> str:
    if label is not None:
        registry.index(label)
        return label
    if len(registry) != 1:
        raise UnknownLabelException(
            f"Specify which of {list(registry.labels)} the channel acts on."
        )
    return registry.labels[0]


def channel_apply(
    rho: State, ch: Channel, label: Optional[str] = None
) -> DensityMatrix:
    """
    Apply `ch` as sum_k K rho K^dag to one subsystem.
    :param rho: State on one or more labels.
    :param ch: Channel.
    :param label: Acted label; may be omitted for single-label states.
    :return: DensityMatrix; the acted label takes the channel's output dim.
    """
    rho = as_density_matrix(rho)
    registry = rho.registry
    label = _acted_label(registry, label)
    if registry.dim_of(label) != ch.dim_in:
        raise DimensionMismatchException(
            f"Channel expects dim {ch.dim_in}, `{label}` has dim "
            f"{registry.dim_of(label)}."
        )
    axis = registry.index(label)
    n = len(registry)
    blocks = rho.tensor_view()
    out = sum(
        apply_on_axes(
            apply_on_axes(blocks, k, [axis], [ch.dim_out]),
            k.conj(),
            [n + axis],
            [ch.dim_out],
        )
        for k in ch.kraus
    )
    new_registry = registry.with_dim(label, ch.dim_out)
    side = new_registry.total_dim
    return DensityMatrix(new_registry, out.reshape(side, side), validate=False)


def channel_compose(ch2: Channel, ch1: Channel) -> Channel:
    """Return ch2 after ch1, with Kraus products K2_j K1_i."""
    if ch1.dim_out != ch2.dim_in:
        raise DimensionMismatchException(
            f"Cannot compose: first channel outputs dim {ch1.dim_out}, "
            f"second expects dim {ch2.dim_in}."
        )
    return Channel(tuple(k2 @ k1 for k2 in ch2.kraus for k1 in ch1.kraus))


def stinespring_isometry(ch: Channel) -> np.ndarray:
    """
    Isometry V |psi> = sum_k (K_k |psi>) (x) |k>_E, rows indexed by
    (output, environment) row-major.
    """
    stacked = np.stack(ch.kraus)
    return np.transpose(stacked, (1, 0, 2)).reshape(
        ch.dim_out * ch.n_kraus, ch.dim_in
    )


def stinespring_dilation(
    ch: Channel, system_label: str = "Q", env_label: str = "E"
) -> Tuple[Unitary, int]:
    """
    Unitary on system (x) environment that realizes `ch` when the environment
    starts in |0> and is traced out afterwards.
    :param ch: Channel with equal input and output dimension.
    :param system_label: Label of the system the channel acts on.
    :param env_label: Label of the environment.
    :return: (Unitary on (system, environment), environment dimension).
    """
    if ch.dim_in != ch.dim_out:
        raise DimensionMismatchException(
            "A unitary dilation needs dim_in == dim_out; use "
            "stinespring_isometry for dimension-changing channels."
        )
    dim, env_dim = ch.dim_in, ch.n_kraus
    isometry = stinespring_isometry(ch)
    matrix = np.zeros((dim * env_dim, dim * env_dim), dtype=complex)
    defined = [i * env_dim for i in range(dim)]
    free = [c for c in range(dim * env_dim) if c not in set(defined)]
    matrix[:, defined] = isometry
    if free:
        matrix[:, free] = linalg.null_space(isometry.conj().T)
    return Unitary(matrix, (system_label, env_label)), env_dim


def _clock(dim: int) -> np.ndarray:
    return np.diag(np.exp(2j * np.pi * np.arange(dim) / dim))


def _shift(dim: int) -> np.ndarray:
    return np.roll(np.eye(dim), 1, axis=0)


def preset_channel(name: str, param: float = 0.0, dim: int = 2) -> Channel:
    """
    Standard noise families; `param` 0 always behaves as the identity.
    - dephasing(p): rho -> (1-p) rho + p diag(rho), Kraus ops from clock
      powers (qubit: sqrt(1-p/2) I, sqrt(p/2) Z).
    - depolarizing(p): rho -> (1-p) rho + p I/d, Kraus ops from Weyl
      operators.
    - amplitude_damping(g): every excited level decays to |0> with
      probability g.
    """
    if name not in PRESET_CHANNELS:
        raise ConfigurationException(
            f"Unknown preset channel {name!r}; choose from {PRESET_CHANNELS}."
        )
    try:
        param = float(param)
    except (TypeError, ValueError):
        raise ConfigurationException(
            f"Channel parameter {param!r} is not a number."
        )
    if not 0.0 <= param <= 1.0:
        raise ConfigurationException(
            f"Channel parameter must lie in [0, 1], got {param}."
        )
    if (
        isinstance(dim, bool)
        or not isinstance(dim, (int, np.integer))
        or dim < 1
    ):
        raise ConfigurationException(
            f"Channel dimension must be >= 1, got {dim!r}."
        )
    identity = np.eye(dim, dtype=complex)

    if name == "identity":
        kraus = [identity]
    elif name == "dephasing":
        clock = _clock(dim)
        kraus = [np.sqrt(1 - param + param / dim) * identity] + [
            np.sqrt(param / dim) * np.linalg.matrix_power(clock, k)
            for k in range(1, dim)
        ]
    elif name == "depolarizing":
        shift, clock = _shift(dim), _clock(dim)
        kraus = [np.sqrt(1 - param + param / dim**2) * identity]
        for a in range(dim):
            for b in range(dim):
                if a == 0 and b == 0:
                    continue
                weyl = np.linalg.matrix_power(
                    shift, a
                ) @ np.linalg.matrix_power(clock, b)
                kraus.append(np.sqrt(param / dim**2) * weyl)
    else:
        damped = np.diag([1.0] + [np.sqrt(1 - param)] * (dim - 1))
        kraus = [damped.astype(complex)]
        for level in range(1, dim):
            decay = np.zeros((dim, dim), dtype=complex)
            decay[0, level] = np.sqrt(param)
            kraus.append(decay)
    return Channel(tuple(kraus))


def _completion(vector: np.ndarray) -> np.ndarray:
    """Unitary whose first column is the unit vector `vector`."""
    vector = np.asarray(vector, dtype=complex)
    if vector.size == 1:
        return vector.reshape(1, 1)
    rest = linalg.null_space(vector.conj()[None, :])
    return np.column_stack([vector, rest])


@dataclass(frozen=True, eq=False)
class EnsembleItem:
    prob: float
    state: PureState


@dataclass(frozen=True, eq=False)
class Ensemble:
    items: Tuple[EnsembleItem, ...]
    unitaries: Optional[Tuple[Unitary, ...]] = None

    def __post_init__(self):
        items = tuple(self.items)
        if not items:
            raise InvalidEnsembleException(
                "An ensemble needs at least one item."
            )
        registry = items[0].state.registry
        if len(registry) != 1:
            raise InvalidEnsembleException(
                "Ensemble states must live on a single label."
            )
        for item in items:
            if item.state.registry.labels != registry.labels or (
                item.state.registry.dims != registry.dims
            ):
                raise InvalidEnsembleException(
                    "All ensemble states must share one registry."
                )
        try:
            ProbabilityVector([item.prob for item in items])
        except InvalidStateException as e:
            raise InvalidEnsembleException(f"Invalid ensemble weights. {e}")
        object.__setattr__(self, "items", items)
        if self.unitaries is not None:
            unitaries = tuple(self.unitaries)
            if len(unitaries) != len(items):
                raise InvalidEnsembleException(
                    f"Got {len(unitaries)} unitaries for {len(items)} states."
                )
            fiducial = np.zeros(self.dim, dtype=complex)
            fiducial[0] = 1.0
            for u, item in zip(unitaries, items):
                if u.dim != self.dim or not np.allclose(
                    u.matrix @ fiducial,
                    item.state.amplitudes,
                    atol=get_settings().tol_norm,
                    rtol=0,
                ):
                    raise InvalidEnsembleException(
                        "Every unitary must map |0> to its ensemble state."
                    )
            object.__setattr__(self, "unitaries", unitaries)

    @classmethod
    def from_vectors(
        cls, probs: Sequence[float], vectors: Sequence, label: str = "Q"
    ) -> "Ensemble":
        """
        Build an ensemble from weights and amplitude vectors.
        :param probs: Weights p_i.
        :param vectors: Normalized amplitude vectors of one common length.
        :param label: Label of the prepared system.
        :return: Ensemble.
        """
        if len(probs) != len(vectors):
            raise InvalidEnsembleException(
                f"Got {len(probs)} weights for {len(vectors)} states."
            )
        if not vectors:
            raise InvalidEnsembleException(
                "An ensemble needs at least one item."
            )
        registry = registry_create([(label, len(vectors[0]))])
        try:
            items = tuple(
                EnsembleItem(float(p), PureState(registry, np.asarray(v)))
                for p, v in zip(probs, vectors)
            )
        except (InvalidStateException, DimensionMismatchException) as e:
            raise InvalidEnsembleException(f"Invalid ensemble state. {e}")
        return cls(items)

    @property
    def registry(self) -> SystemRegistry:
        return self.items[0].state.registry

    @property
    def label(self) -> str:
        return self.registry.labels[0]

    @property
    def dim(self) -> int:
        return self.registry.total_dim

    @property
    def probabilities(self) -> ProbabilityVector:
        return ProbabilityVector([item.prob for item in self.items])

    def average_state(self) -> DensityMatrix:
        """rho = sum_i p_i |psi_i><psi_i|."""
        matrix = sum(
            p * np.outer(item.state.amplitudes, item.state.amplitudes.conj())
            for p, item in zip(self.probabilities, self.items)
        )
        return DensityMatrix(self.registry, matrix, validate=False)

    def preparation_unitaries(self) -> Tuple[Unitary, ...]:
        """The given U_i, or unitaries with U_i |0> = |psi_i> derived by
        orthonormal completion."""
        if self.unitaries is not None:
            return self.unitaries
        return tuple(
            Unitary(_completion(item.state.amplitudes), (self.label,))
            for item in self.items
        )


def holevo_chi(ens: Ensemble, ch: Channel) -> EntropyValue:
    """
    Holevo quantity chi = S(E(rho)) - sum_i p_i S(E(|psi_i><psi_i|)).
    """
    if ch.dim_in != ens.dim:
        raise DimensionMismatchException(
            f"Channel expects dim {ch.dim_in}, ensemble has dim {ens.dim}."
        )
    average = von_neumann(channel_apply(ens.average_state(), ch))
    conditional = sum(
        p * von_neumann(channel_apply(item.state, ch))
        for p, item in zip(ens.probabilities, ens.items)
    )
    return EntropyValue(average - conditional)


def coherent_information(
    rho: State, ch: Channel, label: Optional[str] = None
) -> EntropyValue:
    """
    Coherent information I_c = S(E(rho)) - S((id_R (x) E)(|psi><psi|)) with
    |psi> the spectral purification of `rho`.
    :param rho: Input state.
    :param ch: Channel.
    :param label: Acted label; may be omitted for single-label states.
    :return: EntropyValue.
    """
    rho = as_density_matrix(rho)
    label = _acted_label(rho.registry, label)
    reference = rho.registry.fresh_label("R")
    purified = purify(rho, reference)
    joint = channel_apply(purified, ch, label)
    output = partial_trace(joint, rho.registry.labels)
    return EntropyValue(von_neumann(output) - von_neumann(joint))


def parse_complex_matrix(data, name: str = "matrix") -> np.ndarray:
    """Read nested lists with [re, im] leaves into a complex array."""
    try:
        pairs = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise ConfigurationException(
            f"`{name}` must be nested lists of [re, im] pairs."
        )
    if pairs.ndim < 2 or pairs.shape[-1] != 2:
        raise ConfigurationException(
            f"`{name}` must be nested lists of [re, im] pairs."
        )
    return pairs[..., 0] + 1j * pairs[..., 1]


def complex_to_json(array: np.ndarray) -> list:
    array = np.asarray(array, dtype=complex)
    return np.stack([array.real, array.imag], axis=-1).tolist()


def channel_from_json(payload: dict) -> Channel:
    """
    Read ``{"dim_in": d, "dim_out": d, "kraus": [...]}`` or
    ``{"preset": name, "param": x}`` (optional ``"dim"``).
    """
    if not isinstance(payload, dict):
        raise ConfigurationException("Channel JSON must be an object.")
    if "preset" in payload:
        return preset_channel(
            payload["preset"], payload.get("param", 0.0), payload.get("dim", 2)
        )
    if "kraus" not in payload or not isinstance(payload["kraus"], list):
        raise ConfigurationException(
            "Channel JSON needs a `kraus` list or a `preset` name."
        )
    kraus = [
        parse_complex_matrix(k, f"kraus[{i}]")
        for i, k in enumerate(payload["kraus"])
    ]
    ch = channel_create(kraus)
    for key, actual in (("dim_in", ch.dim_in), ("dim_out", ch.dim_out)):
        if key in payload and payload[key] != actual:
            raise DimensionMismatchException(
                f"Channel declares {key}={payload[key]}, Kraus operators "
                f"give {actual}."
            )
    return ch


def channel_to_json(ch: Channel) -> dict:
    return {
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "kraus": [complex_to_json(k) for k in ch.kraus],
    }


def ensemble_from_json(payload: dict, label: str = "Q") -> Ensemble:
    """
    Read ``{"dim": d, "items": [{"prob": p, "amplitudes": [[re, im], ...]}]}``.
    """
    if not isinstance(payload, dict) or not isinstance(
        payload.get("items"), list
    ):
        raise ConfigurationException("Ensemble JSON needs an `items` list.")
    try:
        probs = [float(item["prob"]) for item in payload["items"]]
        vectors = [
            parse_complex_matrix(item["amplitudes"], "amplitudes")
            for item in payload["items"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigurationException(f"Malformed ensemble item. {e}")
    dim = payload.get("dim")
    for vector in vectors:
        if vector.ndim != 1 or (dim is not None and vector.size != dim):
            raise DimensionMismatchException(
                f"Ensemble amplitudes must be vectors of length {dim}."
            )
    return Ensemble.from_vectors(probs, vectors, label)


def ensemble_to_json(ens: Ensemble) -> dict:
    return {
        "dim": ens.dim,
        "items": [
            {
                "prob": float(p),
                "amplitudes": complex_to_json(item.state.amplitudes),
            }
            for p, item in zip(ens.probabilities, ens.items)
        ],
    }


def unitary_from_json(payload: dict, targets: Sequence[str] = ()) -> Unitary:
    """Read ``{"matrix": [[[re, im], ...], ...]}``."""
    if not isinstance(payload, dict) or "matrix" not in payload:
        raise ConfigurationException("Unitary JSON needs a `matrix` entry.")
    return Unitary(parse_complex_matrix(payload["matrix"]), tuple(targets))
