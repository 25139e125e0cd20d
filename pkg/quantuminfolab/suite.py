"""
Randomized verification of the directed-entanglement properties and the
protocol identities.

Every trial returns a signed margin: the slack of the asserted relation,
negative when it is violated. A property is registered with
``@register_property`` and may carry a deterministic witness that
saturates it (margin 0).
"""

import logging
import multiprocessing as mp
from dataclasses import dataclass, field
from multiprocessing.pool import ThreadPool
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .channels import PRESET_CHANNELS, Ensemble, preset_channel
from .config import get_settings
from .core import (
    State,
    Unitary,
    apply_unitary,
    basis_state,
    extend_fresh,
    maximally_entangled_state,
    maximally_mixed_state,
    random_haar_unitary,
    random_state,
    registry_create,
    tensor,
)
from .entropy import (
    agreement_probability,
    classicize,
    diagonal_distribution,
    directed_entanglement,
    entropy_of,
    mutual_information_rv,
    shannon,
)
from .exceptions import (
    ConfigurationException,
    DimensionOverflowException,
)
from .protocols import (
    CascadeConfig,
    KnowledgeSetup,
    MeasurementSpec,
    add_observer,
    check_zeroth_law,
    simulate_cascade,
    simulate_classical_communication,
    simulate_dpi_chain,
    simulate_measurement,
)
from .reports import to_json_bytes

logger = logging.getLogger(__name__)

PROPERTY_IDS = (
    "a",
    "b",
    "b_prime",
    "c",
    "d",
    "e",
    "e_prime",
    "f",
    "g",
    "h",
    "holevo",
    "dpi",
    "zeroth",
    "second_first_step",
    "chi_identity",
    "observer_agreement",
)
RANK_POLICIES = ("random", "pure", "mixed")
QUBIT_WEIGHT = 0.6

CheckFunction = Callable[[np.random.Generator, "PropertyCheckConfig"], float]
WitnessFunction = Callable[["PropertyCheckConfig"], float]


@dataclass
class PropertyDefinition:
    property_id: str
    description: str
    check: CheckFunction
    # number of subsystems of the largest sampled state
    systems: int = 2
    witness: Optional[WitnessFunction] = None


_PROPERTIES: Dict[str, PropertyDefinition] = {}


def register_property(
    property_id: str, description: str = "", systems: int = 2
):
    """
    Register a randomized check under `property_id`.
    The decorated function receives the trial generator and the config and
    returns the signed margin of one trial.
    """

    def decorator(func: CheckFunction) -> CheckFunction:
        if property_id in _PROPERTIES:
            raise ConfigurationException(
                f"Property `{property_id}` is already registered."
            )
        _PROPERTIES[property_id] = PropertyDefinition(
            property_id, description, func, systems
        )
        return func

    return decorator


def register_witness(property_id: str):
    """Attach a saturating witness to a registered property."""
    definition = _definition(property_id)

    def decorator(func: WitnessFunction) -> WitnessFunction:
        definition.witness = func
        return func

    return decorator


def unregister_property(property_id: str) -> None:
    _PROPERTIES.pop(property_id, None)


def registered_properties() -> Tuple[str, ...]:
    return tuple(_PROPERTIES)


def _definition(property_id: str) -> PropertyDefinition:
    try:
        return _PROPERTIES[property_id]
    except KeyError:
        raise ConfigurationException(
            f"Unknown property `{property_id}`; choose from "
            f"{list(_PROPERTIES)}."
        )


@dataclass(frozen=True)
class PropertyCheckConfig:
    property_id: str
    trials: int = 500
    # subsystem dimension choices, qubits favored when 2 is present
    dims: Tuple[int, ...] = (2, 3, 4)
    rank_policy: str = "random"
    seed: int = 0
    tolerance: float = 1e-9

    def __post_init__(self):
        definition = _definition(self.property_id)
        if (
            isinstance(self.trials, bool)
            or not isinstance(self.trials, (int, np.integer))
            or self.trials < 1
        ):
            raise ConfigurationException(
                f"Trials must be a positive integer, got {self.trials!r}."
            )
        try:
            dims = tuple(sorted({int(d) for d in self.dims}))
        except (TypeError, ValueError):
            raise ConfigurationException(
                f"Dims must be integers, got {self.dims!r}."
            )
        if not dims or dims[0] < 2:
            raise ConfigurationException(
                f"Dims must be a nonempty set of integers >= 2, got {dims}."
            )
        object.__setattr__(self, "dims", dims)
        if self.rank_policy not in RANK_POLICIES:
            raise ConfigurationException(
                f"Rank policy must be one of {RANK_POLICIES}, got "
                f"{self.rank_policy!r}."
            )
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigurationException(
                f"Seed must be a non-negative integer, got {self.seed!r}."
            )
        if not self.tolerance >= 0:
            raise ConfigurationException(
                f"Tolerance must be non-negative, got {self.tolerance!r}."
            )
        largest = dims[-1] ** definition.systems
        if largest > get_settings().max_total_dim:
            raise DimensionOverflowException(
                f"Property `{self.property_id}` may sample total dimension "
                f"{largest}, above max_total_dim "
                f"{get_settings().max_total_dim}."
            )

    @classmethod
    def from_dict(cls, payload: dict) -> "PropertyCheckConfig":
        if not isinstance(payload, dict) or "property" not in payload:
            raise ConfigurationException(
                "A property config needs a `property` entry."
            )
        options = dict(payload)
        property_id = options.pop("property")
        if "dims" in options:
            options["dims"] = tuple(options["dims"])
        try:
            return cls(property_id, **options)
        except TypeError as e:
            raise ConfigurationException(f"Malformed property config. {e}")

    def to_dict(self) -> dict:
        return {
            "property": self.property_id,
            "trials": self.trials,
            "dims": list(self.dims),
            "rank_policy": self.rank_policy,
            "seed": self.seed,
            "tolerance": self.tolerance,
        }


@dataclass
class PropertyReport:
    property_id: str
    trials: int
    violations: int
    worst_margin: Optional[float]
    worst_seed: Optional[int]
    tolerance: float
    witness_margin: Optional[float] = None
    error: Optional[str] = None

    @property
    def witness_passed(self) -> bool:
        return (
            self.witness_margin is None
            or abs(self.witness_margin) <= self.tolerance
        )

    @property
    def passed(self) -> bool:
        return (
            self.error is None
            and self.violations == 0
            and self.witness_passed
        )

    def to_dict(self) -> dict:
        payload = {
            "property": self.property_id,
            "trials": self.trials,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "worst_seed": self.worst_seed,
            "tolerance": self.tolerance,
            "witness_margin": self.witness_margin,
        }
        if self.error is not None:
            payload["error"] = self.error
        return payload

    def summary(self) -> str:
        """One line for console output."""
        if self.error is not None:
            return f"{self.property_id:<20} error: {self.error}"
        return (
            f"{self.property_id:<20} violations={self.violations} "
            f"worst={self.worst_margin:.2e}"
        )


@dataclass
class SuiteReport:
    entries: List[PropertyReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.entries) and all(e.passed for e in self.entries)

    @property
    def violations(self) -> int:
        return sum(e.violations for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "properties": [entry.to_dict() for entry in self.entries],
        }

    def to_json(self) -> bytes:
        return to_json_bytes(self.to_dict())


def trial_seeds(cfg: PropertyCheckConfig) -> List[int]:
    """Per-trial seeds split from `cfg.seed`."""
    return [
        int(s)
        for s in np.random.SeedSequence(cfg.seed).generate_state(
            cfg.trials, dtype=np.uint64
        )
    ]


def check_trial(
    property_id: str,
    trial_seed: int,
    cfg: Optional[PropertyCheckConfig] = None,
) -> float:
    """
    Margin of a single trial; reproduces any recorded worst case.
    :param property_id: Registered property.
    :param trial_seed: Seed recorded in a report.
    :param cfg: Config the seed came from (defaults to the property's
        default config).
    :return: Signed margin.
    """
    if cfg is None:
        cfg = PropertyCheckConfig(property_id)
    rng = np.random.default_rng(trial_seed)
    return float(_definition(property_id).check(rng, cfg))


def check_property(
    cfg: PropertyCheckConfig, n_workers: int = 1, verbose: bool = False
) -> PropertyReport:
    """
    Run `cfg.trials` independent trials of one property.
    :param cfg: PropertyCheckConfig.
    :param n_workers: Threads to use. Set `n_workers` to 1 for serial mode.
    :param verbose: Show a progress bar.
    :return: PropertyReport.
    """
    definition = _definition(cfg.property_id)
    seeds = trial_seeds(cfg)

    def trial(seed: int) -> float:
        return check_trial(cfg.property_id, seed, cfg)

    progress = dict(
        total=len(seeds), desc=cfg.property_id, disable=not verbose
    )
    if n_workers > 1:
        with ThreadPool(min(n_workers, mp.cpu_count() * 2)) as pool:
            margins = list(tqdm(pool.imap(trial, seeds), **progress))
    else:
        margins = [trial(seed) for seed in tqdm(seeds, **progress)]

    margins = np.asarray(margins)
    worst = int(np.argmin(margins))
    witness = (
        float(definition.witness(cfg))
        if definition.witness is not None
        else None
    )
    report = PropertyReport(
        property_id=cfg.property_id,
        trials=cfg.trials,
        violations=int(np.sum(margins < -cfg.tolerance)),
        worst_margin=float(margins[worst]),
        worst_seed=seeds[worst],
        tolerance=cfg.tolerance,
        witness_margin=witness,
    )
    if report.passed:
        logger.debug(
            f"Property `{cfg.property_id}` held in {cfg.trials} trials, "
            f"worst margin {report.worst_margin:.3e}."
        )
    else:
        logger.warning(
            f"Property `{cfg.property_id}`: {report.violations} violations "
            f"in {cfg.trials} trials, worst margin "
            f"{report.worst_margin:.3e} (seed {report.worst_seed})."
        )
    return report


def run_suite(
    configs: Sequence[PropertyCheckConfig],
    n_workers: int = 1,
    verbose: bool = False,
) -> SuiteReport:
    """
    Check every config and aggregate. Errors raised by a check are recorded
    in its entry rather than propagated.
    """
    if not configs:
        raise ConfigurationException("The suite needs at least one config.")
    suite = SuiteReport()
    for cfg in configs:
        try:
            entry = check_property(cfg, n_workers, verbose)
        except Exception as e:
            logger.warning(f"Property `{cfg.property_id}` failed: {e}")
            entry = PropertyReport(
                property_id=cfg.property_id,
                trials=cfg.trials,
                violations=0,
                worst_margin=None,
                worst_seed=None,
                tolerance=cfg.tolerance,
                error=f"{type(e).__name__}: {e}",
            )
        suite.entries.append(entry)
    logger.info(
        f"Successfully checked {len(suite.entries)} properties: "
        f"{'all passed' if suite.passed else 'FAILURES'}."
    )
    return suite


def default_suite(
    seed: int = 0, trials: int = 500, tolerance: float = 1e-9
) -> List[PropertyCheckConfig]:
    """One config per built-in property, seeds split from `seed`."""
    return [
        PropertyCheckConfig(
            property_id,
            trials=trials,
            seed=int(
                np.random.SeedSequence([seed, index]).generate_state(
                    1, dtype=np.uint64
                )[0]
            ),
            tolerance=tolerance,
        )
        for index, property_id in enumerate(PROPERTY_IDS)
    ]


def _sample_dim(rng: np.random.Generator, dims: Sequence[int]) -> int:
    dims = np.asarray(dims)
    if len(dims) > 1 and 2 in dims:
        weights = np.where(
            dims == 2, QUBIT_WEIGHT, (1 - QUBIT_WEIGHT) / (len(dims) - 1)
        )
    else:
        weights = np.full(len(dims), 1 / len(dims))
    return int(rng.choice(dims, p=weights))


def _sample_rank(
    rng: np.random.Generator, policy: str, total_dim: int
) -> int:
    if policy == "pure" or total_dim == 1:
        return 1
    if policy == "mixed":
        return int(rng.integers(2, total_dim + 1))
    return int(rng.integers(1, total_dim + 1))


def _sample_state(
    rng: np.random.Generator,
    cfg: PropertyCheckConfig,
    labels: Sequence[str],
    dims: Optional[Sequence[int]] = None,
) -> State:
    if dims is None:
        dims = [_sample_dim(rng, cfg.dims) for _ in labels]
    registry = registry_create(list(zip(labels, dims)))
    rank = _sample_rank(rng, cfg.rank_policy, registry.total_dim)
    return random_state(registry, rank, rng)


def _bell(x: str = "X", y: str = "Y", dim: int = 2):
    return maximally_entangled_state(registry_create([(x, dim), (y, dim)]))


def _product(labels: Sequence[str], dim: int = 2):
    return basis_state(registry_create([(label, dim) for label in labels]))


@register_property("a", "-S(X) <= E(X->Y) <= S(X)", systems=3)
def _bounds(rng, cfg):
    rho = _sample_state(rng, cfg, ("X", "Y", "Z"))
    e = directed_entanglement(rho, "X", "Y")
    s = entropy_of(rho, "X")
    return min(e + s, s - e)


@register_witness("a")
def _bounds_witness(cfg):
    bell = _bell()
    e = directed_entanglement(bell, "X", "Y")
    s = entropy_of(bell, "X")
    return min(e + s, s - e)


def _extension_margin(rho):
    return directed_entanglement(
        rho, "X", ("Y", "Z")
    ) - directed_entanglement(rho, "X", "Y")


@register_property("b", "E(X->Y) <= E(X->YZ)", systems=3)
def _extension(rng, cfg):
    return _extension_margin(_sample_state(rng, cfg, ("X", "Y", "Z")))


@register_witness("b")
def _extension_witness(cfg):
    return _extension_margin(_product(("X", "Y", "Z")))


@register_property(
    "b_prime", "E(X->Y) = E(X->YZ) for Z disentangled from XY", systems=3
)
def _extension_disentangled(rng, cfg):
    rho = tensor(
        _sample_state(rng, cfg, ("X", "Y")), _sample_state(rng, cfg, ("Z",))
    )
    return -abs(_extension_margin(rho))


@register_witness("b_prime")
def _extension_disentangled_witness(cfg):
    return -abs(_extension_margin(extend_fresh(_bell(), "Z", 2)))


def _chain_margin(rho):
    lhs = directed_entanglement(rho, ("X", "Y"), "Z")
    rhs = directed_entanglement(rho, "X", "Z") + directed_entanglement(
        rho, "Y", ("X", "Z")
    )
    return -abs(lhs - rhs)


@register_property("c", "E(XY->Z) = E(X->Z) + E(Y->XZ)", systems=3)
def _chain_rule(rng, cfg):
    return _chain_margin(_sample_state(rng, cfg, ("X", "Y", "Z")))


@register_witness("c")
def _chain_rule_witness(cfg):
    return _chain_margin(extend_fresh(_bell("X", "Z"), "Y", 2))


def _superadditive_margin(rho):
    return (
        directed_entanglement(rho, "X", ("Y", "Z"))
        - directed_entanglement(rho, "X", "Y")
        - directed_entanglement(rho, "X", "Z")
    )


@register_property("d", "E(X->YZ) >= E(X->Y) + E(X->Z)", systems=3)
def _superadditive(rng, cfg):
    return _superadditive_margin(_sample_state(rng, cfg, ("X", "Y", "Z")))


@register_witness("d")
def _superadditive_witness(cfg):
    return _superadditive_margin(_product(("X", "Y", "Z")))


def _pairwise_margin(rho):
    return (
        directed_entanglement(rho, ("X", "Y"), ("Z", "W"))
        - directed_entanglement(rho, "X", "Z")
        - directed_entanglement(rho, "Y", "W")
    )


@register_property("e", "E(XY->ZW) >= E(X->Z) + E(Y->W)", systems=4)
def _pairwise(rng, cfg):
    return _pairwise_margin(_sample_state(rng, cfg, ("X", "Y", "Z", "W")))


@register_witness("e")
def _pairwise_witness(cfg):
    return _pairwise_margin(_product(("X", "Y", "Z", "W")))


@register_property(
    "e_prime",
    "E(XY->ZW) = E(X->Z) + E(Y->W) for XZ disentangled from YW",
    systems=4,
)
def _pairwise_disentangled(rng, cfg):
    rho = tensor(
        _sample_state(rng, cfg, ("X", "Z")),
        _sample_state(rng, cfg, ("Y", "W")),
    )
    return -abs(_pairwise_margin(rho))


@register_witness("e_prime")
def _pairwise_disentangled_witness(cfg):
    return -abs(_pairwise_margin(tensor(_bell("X", "Z"), _bell("Y", "W"))))


def _classicization_margin(rho):
    quantum = directed_entanglement(rho, "X", "Y")
    receiver = directed_entanglement(classicize(rho, "Y"), "X", "Y")
    both = directed_entanglement(classicize(rho, ("X", "Y")), "X", "Y")
    return min(quantum - receiver, receiver - both)


@register_property("f", "E(X->Y) >= E(X->Y^c) >= E(X^c->Y^c)", systems=3)
def _classicization(rng, cfg):
    rho = _sample_state(rng, cfg, ("X", "Y", "Z"))
    return _classicization_margin(rho)


@register_witness("f")
def _classicization_witness(cfg):
    return _classicization_margin(classicize(_bell(), ("X", "Y")))


def _rotated_margin(rho, ux: Unitary, uy: Unitary):
    rotated = apply_unitary(apply_unitary(rho, ux), uy)
    return -abs(
        directed_entanglement(rotated, "X", "Y")
        - directed_entanglement(rho, "X", "Y")
    )


@register_property("g", "E(X->Y) is invariant under U_X (x) U_Y", systems=3)
def _local_unitaries(rng, cfg):
    rho = _sample_state(rng, cfg, ("X", "Y", "Z"))
    registry = rho.registry
    ux = random_haar_unitary(registry.dim_of("X"), rng, ("X",))
    uy = random_haar_unitary(registry.dim_of("Y"), rng, ("Y",))
    return _rotated_margin(rho, ux, uy)


@register_witness("g")
def _local_unitaries_witness(cfg):
    return _rotated_margin(
        _bell(), Unitary(np.eye(2), ("X",)), Unitary(np.eye(2), ("Y",))
    )


def _classical_receiver_margin(rho):
    e = directed_entanglement(classicize(rho, "Y"), "X", "Y")
    return min(e + entropy_of(rho, "X"), -e)


@register_property("h", "-S(X) <= E(X->Y^c) <= 0", systems=3)
def _classical_receiver(rng, cfg):
    return _classical_receiver_margin(
        _sample_state(rng, cfg, ("X", "Y", "Z"))
    )


@register_witness("h")
def _classical_receiver_witness(cfg):
    mixed = maximally_mixed_state(registry_create([("X", 2)]))
    return _classical_receiver_margin(extend_fresh(mixed, "Y", 2))


def _random_ensemble(rng, cfg) -> Ensemble:
    dim = _sample_dim(rng, [d for d in cfg.dims if d <= 3] or [2])
    registry = registry_create([("Q", dim)])
    n = int(rng.integers(1, 5))
    vectors = [random_state(registry, 1, rng).amplitudes for _ in range(n)]
    return Ensemble.from_vectors(rng.dirichlet(np.ones(n)), vectors)


def _random_channel(rng, dim: int):
    return preset_channel(
        str(rng.choice(PRESET_CHANNELS)), float(rng.uniform()), dim
    )


def _communication(rng, cfg):
    ens = _random_ensemble(rng, cfg)
    basis = random_haar_unitary(ens.dim, rng, ("Q",))
    return simulate_classical_communication(
        ens,
        _random_channel(rng, ens.dim),
        MeasurementSpec("Q", basis),
        cfg.tolerance,
    )


def _noiseless_bit(cfg):
    ens = Ensemble.from_vectors([0.5, 0.5], [[1, 0], [0, 1]])
    return simulate_classical_communication(
        ens, preset_channel("identity"), MeasurementSpec("Q"), cfg.tolerance
    )


@register_property("holevo", "I(A;B) <= chi over the transfer chain")
def _holevo(rng, cfg):
    return _communication(rng, cfg).worst_margin


@register_witness("holevo")
def _holevo_witness(cfg):
    return _noiseless_bit(cfg).worst_margin


@register_property("chi_identity", "E(A->Q) = chi - H(A)")
def _chi_identity(rng, cfg):
    return _communication(rng, cfg).checks["chi_identity"].margin


@register_witness("chi_identity")
def _chi_identity_witness(cfg):
    return _noiseless_bit(cfg).checks["chi_identity"].margin


@register_property("dpi", "S(rho) >= I_c(E1) >= I_c(E2 o E1)")
def _data_processing(rng, cfg):
    rho = _sample_state(rng, cfg, ("Q",), (2,))
    return simulate_dpi_chain(
        rho, _random_channel(rng, 2), _random_channel(rng, 2), cfg.tolerance
    ).worst_margin


@register_witness("dpi")
def _data_processing_witness(cfg):
    identity = preset_channel("identity")
    rho = maximally_mixed_state(registry_create([("Q", 2)]))
    return simulate_dpi_chain(
        rho, identity, identity, cfg.tolerance
    ).worst_margin


@register_property("zeroth", "S_T(Q1|B) + S_T(Q2|B) does not decrease")
def _zeroth(rng, cfg):
    rho_1 = _sample_state(rng, cfg, ("Q1",))
    rho_2 = _sample_state(rng, cfg, ("Q2",))
    side = rho_1.registry.total_dim * rho_2.registry.total_dim
    setup = list(KnowledgeSetup)[int(rng.integers(len(KnowledgeSetup)))]
    return check_zeroth_law(
        rho_1,
        rho_2,
        random_haar_unitary(side, rng, ("Q1", "Q2")),
        setup,
        tolerance=cfg.tolerance,
    ).worst_margin


@register_witness("zeroth")
def _zeroth_witness(cfg):
    rho_1 = maximally_mixed_state(registry_create([("Q1", 2)]))
    rho_2 = maximally_mixed_state(registry_create([("Q2", 2)]))
    return check_zeroth_law(
        rho_1,
        rho_2,
        Unitary(np.eye(4), ("Q1", "Q2")),
        tolerance=cfg.tolerance,
    ).worst_margin


@register_property(
    "second_first_step", "first coupling does not lower S_T(Q>|B)"
)
def _second_law_first_step(rng, cfg):
    dims = (2, _sample_dim(rng, cfg.dims), _sample_dim(rng, cfg.dims))
    config = CascadeConfig(
        dims=dims, sweeps=1, seed=int(rng.integers(2**63))
    )
    return simulate_cascade(config, tolerance=cfg.tolerance).worst_margin


@register_witness("second_first_step")
def _second_law_first_step_witness(cfg):
    config = CascadeConfig(dims=(2, 2), sweeps=1, coupling="identity")
    return simulate_cascade(config, tolerance=cfg.tolerance).worst_margin


def _agreement_margin(state):
    state = simulate_measurement(state, MeasurementSpec("L"))
    state = add_observer(state, "M", "C")
    h_b = shannon(diagonal_distribution(state, "B"))
    h_c = shannon(diagonal_distribution(state, "C"))
    return min(
        -abs(agreement_probability(state, "B", "C") - 1.0),
        -abs(mutual_information_rv(state, "B", "C") - h_b),
        -abs(h_b - h_c),
    )


@register_property("observer_agreement", "Pr(B = C) = 1 and I(B;C) = H(B)")
def _observer_agreement(rng, cfg):
    return _agreement_margin(_sample_state(rng, cfg, ("L",)))


@register_witness("observer_agreement")
def _observer_agreement_witness(cfg):
    return _agreement_margin(_product(("L",)))
