"""
Simulations of measurement, preparation and communication as unitary
evolution of a growing universe, plus the thermodynamic experiments.

Knowledge systems are produced fresh in |0> and correlated with the
modular-shift COPY unitary |j>|k> -> |j>|k + j mod m>.
"""

import itertools
import logging
import math
import multiprocessing as mp
from dataclasses import dataclass, fields, replace
from enum import Enum
from multiprocessing.pool import ThreadPool
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg
from tqdm import tqdm

from .channels import (
    Channel,
    Ensemble,
    _completion,
    channel_compose,
    coherent_information,
    holevo_chi,
    stinespring_dilation,
)
from .config import get_settings
from .core import (
    DensityMatrix,
    PureState,
    State,
    Subsystem,
    SystemKind,
    SystemRegistry,
    Unitary,
    apply_unitary,
    as_density_matrix,
    basis_state,
    extend_fresh,
    maximally_entangled_state,
    maximally_mixed_state,
    partial_trace,
    purify,
    random_haar_unitary,
    registry_create,
    tensor,
)
from .entropy import (
    classicize,
    diagonal_distribution,
    directed_entanglement,
    mutual_information_rv,
    quantum_mutual_information,
    shannon,
    thermodynamic_entropy,
    von_neumann,
)
from .exceptions import (
    ConfigurationException,
    DimensionMismatchException,
    DimensionOverflowException,
    DuplicateLabelException,
    PreconditionException,
    UnknownLabelException,
)
from .reports import (
    CheckResult,
    ExperimentReport,
    TrajectoryPoint,
    equality,
    inequality,
)

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9


def copy_unitary(dim: int, control: str, target: str) -> Unitary:
    """COPY_m on (control, target): |j>|k> -> |j>|k + j mod m>."""
    matrix = np.zeros((dim * dim, dim * dim))
    for j, k in itertools.product(range(dim), repeat=2):
        matrix[j * dim + (k + j) % dim, j * dim + k] = 1.0
    return Unitary(matrix, (control, target))


@dataclass(frozen=True, eq=False)
class MeasurementSpec:
    target: str
    # columns are the measurement basis; None is the computational basis
    basis: Optional[Unitary] = None
    apparatus_label: str = "M"
    knowledge_label: str = "B"
    observer: str = "Bob"

    def __post_init__(self):
        labels = (self.target, self.apparatus_label, self.knowledge_label)
        if len(set(labels)) != len(labels):
            raise DuplicateLabelException(
                f"Measurement labels {list(labels)} must be distinct."
            )

    def basis_matrix(self, dim: int) -> Optional[np.ndarray]:
        if self.basis is None:
            return None
        if self.basis.dim != dim:
            raise DimensionMismatchException(
                f"Measurement basis has side {self.basis.dim}, "
                f"`{self.target}` has dim {dim}."
            )
        return self.basis.matrix


def _require_fresh(registry: SystemRegistry, *labels: str) -> None:
    for label in labels:
        if label in registry:
            raise DuplicateLabelException(
                f"Label `{label}` is already in use."
            )


def simulate_measurement(state: State, spec: MeasurementSpec) -> State:
    """
    Everett measurement of `spec.target`: the apparatus M is produced and
    correlated with the target (unobserved measurement), then the knowledge
    system B is produced and correlated with M (observed measurement).
    :param state: State containing the target.
    :param spec: MeasurementSpec.
    :return: State with M and B appended.
    """
    registry = state.registry
    registry.index(spec.target)
    _require_fresh(registry, spec.apparatus_label, spec.knowledge_label)
    dim = registry.dim_of(spec.target)
    basis = spec.basis_matrix(dim)
    if basis is not None:
        state = apply_unitary(
            state, Unitary(basis.conj().T, (spec.target,))
        )
    state = extend_fresh(state, spec.apparatus_label, dim)
    state = apply_unitary(
        state, copy_unitary(dim, spec.target, spec.apparatus_label)
    )
    state = extend_fresh(
        state,
        spec.knowledge_label,
        dim,
        SystemKind.KNOWLEDGE,
        spec.observer,
    )
    state = apply_unitary(
        state,
        copy_unitary(dim, spec.apparatus_label, spec.knowledge_label),
    )
    logger.debug(
        f"Measured `{spec.target}` into `{spec.apparatus_label}` and "
        f"`{spec.knowledge_label}`."
    )
    return state


def add_observer(
    state: State,
    apparatus_label: str,
    knowledge_label: str,
    observer: str = "Charlie",
) -> State:
    """
    A second observer reads the apparatus: a fresh knowledge system is
    produced and COPY-correlated with it.
    """
    if apparatus_label not in state.registry:
        raise UnknownLabelException(
            f"Apparatus `{apparatus_label}` has not been produced."
        )
    _require_fresh(state.registry, knowledge_label)
    dim = state.registry.dim_of(apparatus_label)
    state = extend_fresh(
        state, knowledge_label, dim, SystemKind.KNOWLEDGE, observer
    )
    return apply_unitary(
        state, copy_unitary(dim, apparatus_label, knowledge_label)
    )


def simulate_generalized_measurement(
    state: State, target: str, probe: Unitary, spec: MeasurementSpec
) -> State:
    """
    Generalized measurement of `target`: a fresh probe system
    `spec.target` is entangled with it by `probe`, then measured
    elementarily.
    :param state: State containing `target`.
    :param target: Measured physical system.
    :param probe: Unitary with targets (target, spec.target).
    :param spec: Elementary measurement of the probe system.
    :return: State with probe, apparatus and knowledge systems appended.
    """
    registry = state.registry
    target_dim = registry.dim_of(target)
    _require_fresh(registry, spec.target)
    if probe.targets != (target, spec.target):
        raise ConfigurationException(
            f"Probe unitary must act on ({target!r}, {spec.target!r}), "
            f"got {probe.targets}."
        )
    if probe.dim % target_dim:
        raise DimensionMismatchException(
            f"Probe side {probe.dim} is not a multiple of {target_dim}."
        )
    state = extend_fresh(state, spec.target, probe.dim // target_dim)
    state = apply_unitary(state, probe)
    return simulate_measurement(state, spec)


def simulate_preparation(
    ens: Ensemble,
    a1: str = "A1",
    q: str = "Q",
    a2: str = "A2",
    a: str = "A",
    owner: str = "Alice",
    a1_dim: int = 1,
) -> PureState:
    """
    Prepare Q according to `ens` by conditional unitaries.
    Resetting Q is modeled as starting from |0>_A1 |0>_Q. Alice's record
    A2 is loaded coherently with sum_i sqrt(p_i) |i>, a controlled U_i acts
    on Q, and A copies A2, giving
    |0>_A1 sum_i sqrt(p_i) |psi_i>_Q |i>_A2 |i>_A.
    :return: PureState on (A1, Q, A2, A).
    """
    labels = (a1, q, a2, a)
    if len(set(labels)) != len(labels):
        raise DuplicateLabelException(
            f"Preparation labels {list(labels)} must be distinct."
        )
    n, dim = len(ens.items), ens.dim
    registry = registry_create(
        [Subsystem.knowledge(a1, a1_dim, owner), Subsystem.physical(q, dim)]
    )
    state = basis_state(registry)
    state = extend_fresh(state, a2, n, SystemKind.KNOWLEDGE, owner)

    loader = _completion(np.sqrt(ens.probabilities.probs))
    state = apply_unitary(state, Unitary(loader, (a2,)))

    controlled = linalg.block_diag(
        *[u.matrix for u in ens.preparation_unitaries()]
    )
    state = apply_unitary(state, Unitary(controlled, (a2, q)))
    state = extend_fresh(state, a, n, SystemKind.KNOWLEDGE, owner)
    state = apply_unitary(state, copy_unitary(n, a2, a))
    logger.debug(f"Prepared `{q}` from an ensemble of {n} states.")
    return state


def simulate_classical_communication(
    ens: Ensemble,
    ch: Channel,
    meas: MeasurementSpec,
    tolerance: float = DEFAULT_TOLERANCE,
    env_label: str = "E",
) -> ExperimentReport:
    """
    Alice prepares `meas.target` from `ens`, the system interacts with an
    environment realizing `ch`, and Bob measures it.
    Reports H(A), chi, E(A->Q), the entanglement transfer chain down to
    H(B) - H(AB), and I(A;B); checks E(A->Q) = chi - H(A) and
    I(A;B) <= chi.
    """
    q = meas.target
    if ch.dim_in != ens.dim or ch.dim_out != ens.dim:
        raise DimensionMismatchException(
            f"Channel ({ch.dim_in}->{ch.dim_out}) does not fit ensemble "
            f"dim {ens.dim}."
        )
    state = simulate_preparation(ens, q=q)
    _require_fresh(
        state.registry, env_label, meas.apparatus_label, meas.knowledge_label
    )
    dilation, env_dim = stinespring_dilation(ch, q, env_label)
    state = extend_fresh(state, env_label, env_dim)
    state = apply_unitary(state, dilation)

    a, b = "A", meas.knowledge_label
    receivers = (q, meas.apparatus_label, b)
    h_a = shannon(diagonal_distribution(state, a))
    chi = holevo_chi(ens, ch)
    e_a_q = directed_entanglement(state, a, q)

    fresh = extend_fresh(state, meas.apparatus_label, ens.dim)
    fresh = extend_fresh(
        fresh, b, ens.dim, SystemKind.KNOWLEDGE, meas.observer
    )
    e_fresh = directed_entanglement(fresh, a, receivers)

    measured = simulate_measurement(state, meas)
    e_measured = directed_entanglement(measured, a, receivers)
    e_a_b = directed_entanglement(measured, a, b)
    alice_bob = partial_trace(measured, (a, b))
    e_classical = directed_entanglement(classicize(alice_bob, (a, b)), a, b)
    h_b = shannon(diagonal_distribution(measured, b))
    h_ab = shannon(diagonal_distribution(measured, (a, b)))
    i_ab = mutual_information_rv(measured, a, b)

    report = ExperimentReport(name="holevo", tolerance=tolerance)
    report.values.update(
        H_A=h_a,
        chi=chi,
        E_A_to_Q=e_a_q,
        E_A_to_QMB_fresh=e_fresh,
        E_A_to_QMB=e_measured,
        E_A_to_B=e_a_b,
        E_Ac_to_Bc=e_classical,
        H_B=h_b,
        H_AB=h_ab,
        I_AB=i_ab,
    )
    report.checks.update(
        chi_identity=equality(
            e_a_q, chi - h_a, tolerance, "E(A->Q) = chi - H(A)"
        ),
        holevo_bound=inequality(chi, i_ab, tolerance, "I(A;B) <= chi"),
        fresh_receivers=equality(
            e_fresh, e_a_q, tolerance, "E(A->QMB) = E(A->Q) for fresh M, B"
        ),
        local_unitaries=equality(
            e_measured, e_fresh, tolerance, "measurement acts on QMB only"
        ),
        discard_receivers=inequality(
            e_measured, e_a_b, tolerance, "E'(A->QMB) >= E'(A->B)"
        ),
        classicize_both=inequality(
            e_a_b, e_classical, tolerance, "E'(A->B) >= E'(A^c->B^c)"
        ),
        diagonal_entropies=equality(
            e_classical, h_b - h_ab, tolerance, "E'(A^c->B^c) = H(B) - H(AB)"
        ),
    )
    logger.info(
        f"Successfully simulated communication: chi={chi:.6f}, "
        f"I(A;B)={i_ab:.6f}."
    )
    return report


def _single_label(rho: DensityMatrix) -> str:
    if len(rho.registry) != 1:
        raise ConfigurationException(
            f"Expected a state on a single label, got {list(rho.labels)}."
        )
    return rho.labels[0]


def simulate_dpi_chain(
    rho: State,
    ch1: Channel,
    ch2: Channel,
    tolerance: float = DEFAULT_TOLERANCE,
) -> ExperimentReport:
    """
    Send half of a purification of `rho` through the dilations of `ch1` and
    then `ch2`, and compare the directed entanglement from the reference
    with the coherent informations computed from Kraus operators.
    """
    rho = as_density_matrix(rho)
    q = _single_label(rho)
    dim = rho.registry.dim_of(q)
    for name, ch in (("first", ch1), ("second", ch2)):
        if ch.dim_in != dim or ch.dim_out != dim:
            raise DimensionMismatchException(
                f"The {name} channel ({ch.dim_in}->{ch.dim_out}) does not "
                f"act on dim {dim}."
            )
    reference = rho.registry.fresh_label("R")
    env1 = rho.registry.fresh_label("E1")
    env2 = rho.registry.fresh_label("E2")
    state = purify(rho, reference)
    for env, ch in ((env1, ch1), (env2, ch2)):
        dilation, env_dim = stinespring_dilation(ch, q, env)
        state = extend_fresh(state, env, env_dim)
        state = apply_unitary(state, dilation)

    s_rho = von_neumann(rho)
    ic_first = coherent_information(rho, ch1)
    ic_both = coherent_information(rho, channel_compose(ch2, ch1))
    e_all = directed_entanglement(state, reference, (q, env1, env2))
    e_second = directed_entanglement(state, reference, (q, env2))
    e_q = directed_entanglement(state, reference, q)

    report = ExperimentReport(name="dpi", tolerance=tolerance)
    report.values.update(
        S_rho=s_rho,
        I_c_first=ic_first,
        I_c_composed=ic_both,
        E_R_to_QE1E2=e_all,
        E_R_to_QE2=e_second,
        E_R_to_Q=e_q,
    )
    report.checks.update(
        entanglement_first=inequality(
            e_all, e_second, tolerance, "E''(R->QE1E2) >= E''(R->QE2)"
        ),
        entanglement_second=inequality(
            e_second, e_q, tolerance, "E''(R->QE2) >= E''(R->Q)"
        ),
        dpi_first=inequality(s_rho, ic_first, tolerance, "S(rho) >= I_c(E1)"),
        dpi_second=inequality(
            ic_first, ic_both, tolerance, "I_c(E1) >= I_c(E2 o E1)"
        ),
        identity_all=equality(
            e_all, s_rho, tolerance, "E''(R->QE1E2) = S(rho)"
        ),
        identity_second=equality(
            e_second, ic_first, tolerance, "E''(R->QE2) = I_c(E1)"
        ),
        identity_q=equality(
            e_q, ic_both, tolerance, "E''(R->Q) = I_c(E2 o E1)"
        ),
    )
    logger.info(
        f"Successfully simulated DPI chain: S={s_rho:.6f}, "
        f"I_c={ic_first:.6f}, {ic_both:.6f}."
    )
    return report


class KnowledgeSetup(str, Enum):
    DISENTANGLED = "disentangled"
    OBSERVE_FIRST = "observe_first"
    OBSERVE_BOTH = "observe_both"


def _knowledge_block(
    rho: DensityMatrix, b: str, observed: bool, observer: str
) -> DensityMatrix:
    q = _single_label(rho)
    dim = rho.registry.dim_of(q)
    if not observed:
        return extend_fresh(rho, b, dim, SystemKind.KNOWLEDGE, observer)
    reference = rho.registry.fresh_label(f"R_{q}")
    state = purify(rho, reference)
    state = extend_fresh(state, b, dim, SystemKind.KNOWLEDGE, observer)
    state = apply_unitary(state, copy_unitary(dim, q, b))
    return partial_trace(state, (q, b))


def check_zeroth_law(
    rho_q1: State,
    rho_q2: State,
    u: Unitary,
    setup: KnowledgeSetup = KnowledgeSetup.DISENTANGLED,
    knowledge_labels: Tuple[str, str] = ("B1", "B2"),
    observer: str = "Bob",
    tolerance: float = DEFAULT_TOLERANCE,
) -> ExperimentReport:
    """
    Two unentangled systems interact through `u`; the sum of their
    thermodynamic entropies relative to Bob's knowledge must not decrease.
    :param rho_q1: State of Q1 (single label).
    :param rho_q2: State of Q2 (single label).
    :param u: Interaction unitary on (Q1, Q2).
    :param setup: Which systems Bob has observed beforehand.
    :param knowledge_labels: Labels of Bob's records of Q1 and Q2.
    :return: ExperimentReport.
    """
    setup = KnowledgeSetup(setup)
    rho_q1, rho_q2 = as_density_matrix(rho_q1), as_density_matrix(rho_q2)
    q1, q2 = _single_label(rho_q1), _single_label(rho_q2)
    b1, b2 = knowledge_labels
    labels = (q1, q2, b1, b2)
    if len(set(labels)) != len(labels):
        raise DuplicateLabelException(
            f"Zeroth-law labels {list(labels)} must be distinct."
        )
    if set(u.targets) != {q1, q2}:
        raise ConfigurationException(
            f"Interaction must act on {q1!r} and {q2!r}, got {u.targets}."
        )
    joint = tensor(
        _knowledge_block(
            rho_q1, b1, setup is not KnowledgeSetup.DISENTANGLED, observer
        ),
        _knowledge_block(
            rho_q2, b2, setup is KnowledgeSetup.OBSERVE_BOTH, observer
        ),
    )
    entanglement = quantum_mutual_information(joint, q1, q2)
    if entanglement > tolerance:
        raise PreconditionException(
            f"Q1 and Q2 start correlated (I = {entanglement:.3e})."
        )
    knowledge = (b1, b2)

    def entropies(state):
        return (
            thermodynamic_entropy(state, q1, knowledge),
            thermodynamic_entropy(state, q2, knowledge),
            thermodynamic_entropy(state, (q1, q2), knowledge),
        )

    pre_1, pre_2, pre_joint = entropies(joint)
    post_1, post_2, post_joint = entropies(apply_unitary(joint, u))
    pre_sum, post_sum = pre_1 + pre_2, post_1 + post_2

    report = ExperimentReport(name="zeroth", tolerance=tolerance)
    report.values.update(
        S_T_Q1_before=pre_1,
        S_T_Q2_before=pre_2,
        S_T_Q1Q2_before=pre_joint,
        S_T_Q1_after=post_1,
        S_T_Q2_after=post_2,
        S_T_Q1Q2_after=post_joint,
        sum_before=pre_sum,
        sum_after=post_sum,
    )
    report.checks.update(
        no_decrease=inequality(
            post_sum, pre_sum, tolerance, "sum of S_T does not decrease"
        ),
        initial_equality=equality(
            pre_sum, pre_joint, tolerance, "unentangled start is additive"
        ),
        subadditivity_after=inequality(
            post_sum,
            post_joint,
            tolerance,
            "S_T(Q1|B) + S_T(Q2|B) >= S_T(Q1Q2|B)",
        ),
        joint_invariance=equality(
            post_joint, pre_joint, tolerance, "U on Q1Q2 keeps S_T(Q1Q2|B)"
        ),
    )
    logger.info(
        f"Successfully checked zeroth law ({setup.value}): "
        f"{pre_sum:.6f} -> {post_sum:.6f}."
    )
    return report


MACRO_LABEL = "Q>"
DUMMY_LABEL = "B~"
COUPLINGS = ("haar", "identity")
# bits; (2, 4, 8) cascades settle about 5e-4 below log2 d_macro
EQUILIBRATION_TOLERANCE = 1e-3


@dataclass(frozen=True)
class CascadeConfig:
    # [d_macro, d_0, d_1, ...]
    dims: Tuple[int, ...] = (2, 4, 8)
    sweeps: int = 10
    seed: int = 0
    couplings: Optional[Tuple[Tuple[int, int], ...]] = None
    coupling: str = "haar"
    dummy_dim: int = 2

    def __post_init__(self):
        dims = tuple(self.dims)
        if len(dims) < 2:
            raise ConfigurationException(
                "A cascade needs the macroscopic system and at least one "
                "microscopic scale."
            )
        if any(
            isinstance(d, bool)
            or not isinstance(d, (int, np.integer))
            or d < 2
            for d in dims
        ):
            raise ConfigurationException(
                f"Cascade dimensions must be integers >= 2, got {list(dims)}."
            )
        object.__setattr__(self, "dims", tuple(int(d) for d in dims))
        if not isinstance(self.sweeps, (int, np.integer)) or self.sweeps < 0:
            raise ConfigurationException(
                f"Sweeps must be a non-negative integer, got {self.sweeps!r}."
            )
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigurationException(
                f"Seed must be a non-negative integer, got {self.seed!r}."
            )
        if self.coupling not in COUPLINGS:
            raise ConfigurationException(
                f"Coupling must be one of {COUPLINGS}, got {self.coupling!r}."
            )
        if self.dummy_dim < 1:
            raise ConfigurationException("The dummy system needs dim >= 1.")
        if self.couplings is not None:
            pairs = tuple((int(i), int(j)) for i, j in self.couplings)
            for i, j in pairs:
                if abs(i - j) != 1 or min(i, j) < 0 or max(i, j) >= len(dims):
                    raise ConfigurationException(
                        f"Coupling ({i}, {j}) is not a pair of adjacent "
                        "scales."
                    )
            object.__setattr__(self, "couplings", pairs)
        total = dims[0] * self.dummy_dim * math.prod(dims)
        limit = get_settings().max_total_dim
        if total > limit:
            raise DimensionOverflowException(
                f"Cascade needs total dimension {total}, above max_total_dim "
                f"{limit}."
            )

    @property
    def labels(self) -> Tuple[str, ...]:
        return (MACRO_LABEL,) + tuple(
            f"Q{k}" for k in range(len(self.dims) - 1)
        )

    @property
    def schedule(self) -> Tuple[Tuple[int, int], ...]:
        if self.couplings is not None:
            return self.couplings
        return tuple((k, k + 1) for k in range(len(self.dims) - 1))

    @classmethod
    def from_json(
        cls, payload: dict, default_seed: int = 0
    ) -> "CascadeConfig":
        """Read ``{"dims": [...], "sweeps": n, "seed": s}``."""
        if not isinstance(payload, dict) or "dims" not in payload:
            raise ConfigurationException("Cascade JSON needs a `dims` list.")
        known = {f.name for f in fields(cls)}
        unknown = set(payload) - known
        if unknown:
            raise ConfigurationException(
                f"Unknown cascade keys {sorted(unknown)}."
            )
        try:
            return cls(
                dims=tuple(payload["dims"]),
                sweeps=payload.get("sweeps", 10),
                seed=payload.get("seed", default_seed),
                couplings=payload.get("couplings"),
                coupling=payload.get("coupling", "haar"),
                dummy_dim=payload.get("dummy_dim", 2),
            )
        except (TypeError, ValueError) as e:
            raise ConfigurationException(f"Malformed cascade config. {e}")

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "sweeps": self.sweeps,
            "seed": self.seed,
            "couplings": [list(p) for p in self.schedule],
            "coupling": self.coupling,
            "dummy_dim": self.dummy_dim,
        }


def _initial_cascade_state(cfg: CascadeConfig, b: str) -> DensityMatrix:
    labels = cfg.labels
    macro_dim = cfg.dims[0]
    knowledge = registry_create(
        [
            Subsystem.knowledge(b, macro_dim, "Bob"),
            Subsystem.physical(labels[0], macro_dim),
        ]
    )
    state = maximally_entangled_state(knowledge).to_density_matrix()
    state = extend_fresh(
        state, DUMMY_LABEL, cfg.dummy_dim, SystemKind.KNOWLEDGE, "Bob"
    )
    for label, dim in zip(labels[1:], cfg.dims[1:]):
        state = tensor(
            state, maximally_mixed_state(registry_create([(label, dim)]))
        )
    return state


def simulate_cascade(
    cfg: CascadeConfig,
    b_label: str = "B",
    tolerance: float = DEFAULT_TOLERANCE,
) -> ExperimentReport:
    """
    Second-law cascade. B starts maximally entangled with Q>, every finer
    scale Q_k starts maximally mixed, and the dummy record B~ stays
    disentangled. Each sweep couples adjacent scales with fresh unitaries;
    the coarse-grained entropy S_T(Q>|B) is recorded after every coupling.
    :param cfg: CascadeConfig.
    :param b_label: Label of Bob's record of Q>.
    :return: ExperimentReport with the trajectory.
    """
    if b_label in cfg.labels or b_label == DUMMY_LABEL:
        raise DuplicateLabelException(f"Label `{b_label}` is already in use.")
    labels = cfg.labels
    macro = labels[0]
    rng = np.random.default_rng(cfg.seed)
    state = _initial_cascade_state(cfg, b_label)

    def coarse_entropy(current) -> float:
        return float(thermodynamic_entropy(current, macro, b_label))

    report = ExperimentReport(
        name="cascade", seed=cfg.seed, tolerance=tolerance
    )
    report.trajectory.append(TrajectoryPoint(0, None, coarse_entropy(state)))
    step = 0
    for _ in range(cfg.sweeps):
        for i, j in cfg.schedule:
            pair = (labels[i], labels[j])
            side = cfg.dims[i] * cfg.dims[j]
            if cfg.coupling == "haar":
                coupling = random_haar_unitary(side, rng, pair)
            else:
                coupling = Unitary(np.eye(side), pair)
            before = state
            state = apply_unitary(state, coupling)
            step += 1
            report.trajectory.append(
                TrajectoryPoint(step, pair, coarse_entropy(state))
            )
            if step == 1:
                _record_first_step(
                    report, before, state, pair, b_label, tolerance
                )

    values = [p.s_t for p in report.trajectory]
    ceiling = math.log2(cfg.dims[0])
    bound_margin = min(min(v, ceiling - v) for v in values)
    report.checks["bounds"] = CheckResult(
        bound_margin, tolerance, "0 <= S_T(Q>|B) <= log2 d_macro"
    )
    report.values.update(
        initial=values[0],
        final=values[-1],
        minimum=min(values),
        maximum=max(values),
        steps=step,
    )
    logger.info(
        f"Successfully simulated cascade of {step} couplings: "
        f"S_T {values[0]:.6f} -> {values[-1]:.6f}."
    )
    return report


def _record_first_step(
    report: ExperimentReport,
    before: DensityMatrix,
    after: DensityMatrix,
    pair: Tuple[str, str],
    b: str,
    tolerance: float,
) -> None:
    first = report.trajectory[1].s_t - report.trajectory[0].s_t
    report.values["first_step_delta"] = first
    report.checks["first_step"] = CheckResult(
        first, tolerance, "first coupling does not lower S_T(Q>|B)"
    )
    macro = MACRO_LABEL
    if macro not in pair:
        return
    micro = pair[1] if pair[0] == macro else pair[0]
    knowledge = (b, DUMMY_LABEL)

    def split(state):
        classical = classicize(
            partial_trace(state, (macro, micro) + knowledge), knowledge
        )
        return (
            directed_entanglement(classical, (macro, micro), knowledge),
            directed_entanglement(classical, macro, b),
            directed_entanglement(classical, micro, DUMMY_LABEL),
        )

    total_before, macro_before, micro_before = split(before)
    total_after, macro_after, micro_after = split(after)
    report.values.update(
        E_total_before=total_before,
        E_total_after=total_after,
        E_micro_before=micro_before,
        E_micro_after=micro_after,
    )
    report.checks.update(
        disentangled_split=equality(
            total_before,
            macro_before + micro_before,
            tolerance,
            "E(Q>Q0->B^c B~) = E(Q>->B^c) + E(Q0->B~) before coupling",
        ),
        coupling_invariance=equality(
            total_after, total_before, tolerance, "coupling acts on Q>Q0 only"
        ),
        superadditivity_after=inequality(
            total_after,
            macro_after + micro_after,
            tolerance,
            "E'(Q>Q0->B^c B~) >= E'(Q>->B^c) + E'(Q0->B~)",
        ),
        microscopic_gain=inequality(
            micro_after,
            micro_before,
            tolerance,
            "uniform Q0 cannot lose directed entanglement to B~",
        ),
    )


@dataclass
class CascadeStatistics:
    runs: int
    seeds: List[int]
    mean: np.ndarray
    standard_error: np.ndarray
    first_step_violations: int
    bound_violations: int
    # steps whose mean drops by more than se_multiplier standard errors
    decreases_beyond_error: List[int]
    tolerance: float
    # mean over the last sweep; None for a single sweep
    plateau: Optional[float] = None
    # first step whose mean is within reach of the plateau
    equilibration_step: Optional[int] = None

    @property
    def decreases_before_equilibrium(self) -> List[int]:
        if self.equilibration_step is None:
            return list(self.decreases_beyond_error)
        return [
            k
            for k in self.decreases_beyond_error
            if k <= self.equilibration_step
        ]

    @property
    def monotone_within_error(self) -> bool:
        return not self.decreases_before_equilibrium

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "seeds": self.seeds,
            "mean": self.mean.tolist(),
            "standard_error": self.standard_error.tolist(),
            "first_step_violations": self.first_step_violations,
            "bound_violations": self.bound_violations,
            "decreases_beyond_error": self.decreases_beyond_error,
            "decreases_before_equilibrium": (
                self.decreases_before_equilibrium
            ),
            "plateau": self.plateau,
            "equilibration_step": self.equilibration_step,
            "monotone_within_error": self.monotone_within_error,
            "tolerance": self.tolerance,
        }


def _equilibration(
    mean: np.ndarray,
    error: np.ndarray,
    cfg: CascadeConfig,
    se_multiplier: float,
    tolerance: float,
) -> Tuple[Optional[float], Optional[int]]:
    """Plateau level and first step that reaches it, or (None, None)."""
    per_sweep = len(cfg.schedule)
    if cfg.sweeps < 2 or per_sweep == 0:
        return None, None
    plateau = float(mean[-per_sweep:].mean())
    reached = np.flatnonzero(
        mean >= plateau - tolerance - se_multiplier * error
    )
    return plateau, int(reached[0])


def cascade_statistics(
    cfg: CascadeConfig,
    runs: int,
    n_workers: int = 1,
    verbose: bool = False,
    tolerance: float = DEFAULT_TOLERANCE,
    se_multiplier: float = 1.0,
    equilibration_tolerance: float = EQUILIBRATION_TOLERANCE,
) -> CascadeStatistics:
    """
    Run the cascade with `runs` seeds split from `cfg.seed` and aggregate the
    trajectories.
    The equilibrium level is the mean over the last sweep of these same runs.
    A step counts as equilibrated once its mean is within
    `equilibration_tolerance` plus `se_multiplier` standard errors of that
    level; the mean is required to be non-decreasing within error only up
    to the first equilibrated step. Later decreases are fluctuations around
    the plateau and are reported but not held against monotonicity.
    :param cfg: Template configuration; its seed is the root seed.
    :param runs: Number of independent runs.
    :param n_workers: Threads to use. Set `n_workers` to 1 for serial mode.
    :param verbose: Show a progress bar.
    :param equilibration_tolerance: Distance to the plateau, in bits.
    :return: CascadeStatistics.
    """
    if runs < 1:
        raise ConfigurationException(f"Runs must be >= 1, got {runs}.")
    seeds = [
        int(s)
        for s in np.random.SeedSequence(cfg.seed).generate_state(
            runs, dtype=np.uint64
        )
    ]
    configs = [replace(cfg, seed=seed) for seed in seeds]

    def run(config: CascadeConfig) -> ExperimentReport:
        return simulate_cascade(config, tolerance=tolerance)

    if n_workers > 1:
        with ThreadPool(min(n_workers, mp.cpu_count() * 2)) as pool:
            reports = list(
                tqdm(
                    pool.imap(run, configs),
                    total=runs,
                    disable=not verbose,
                )
            )
    else:
        reports = [run(c) for c in tqdm(configs, disable=not verbose)]

    trajectories = np.array([[p.s_t for p in r.trajectory] for r in reports])
    mean = trajectories.mean(axis=0)
    if runs > 1:
        error = trajectories.std(axis=0, ddof=1) / np.sqrt(runs)
    else:
        error = np.zeros_like(mean)
    decreases = [
        k + 1
        for k in range(mean.size - 1)
        if mean[k + 1] - mean[k]
        < -se_multiplier * max(error[k], error[k + 1]) - tolerance
    ]
    plateau, equilibrated = _equilibration(
        mean, error, cfg, se_multiplier, equilibration_tolerance
    )
    stats = CascadeStatistics(
        runs=runs,
        seeds=seeds,
        mean=mean,
        standard_error=error,
        first_step_violations=sum(
            1
            for r in reports
            if "first_step" in r.checks and not r.checks["first_step"].passed
        ),
        bound_violations=sum(
            1 for r in reports if not r.checks["bounds"].passed
        ),
        decreases_beyond_error=decreases,
        tolerance=tolerance,
        plateau=plateau,
        equilibration_step=equilibrated,
    )
    logger.info(
        f"Successfully ran {runs} cascades: {stats.first_step_violations} "
        f"first-step violations, "
        f"{len(stats.decreases_before_equilibrium)} mean decreases beyond "
        f"{se_multiplier:g} standard errors before equilibrium "
        f"(step {equilibrated})."
    )
    return stats
