import logging
import os

import numpy as np

# Import python-dotenv to load environment variables from .env file
from dotenv import load_dotenv

from quantuminfolab import (
    CascadeConfig,
    Ensemble,
    KnowledgeSetup,
    MeasurementSpec,
    Unitary,
    cascade_statistics,
    check_zeroth_law,
    default_suite,
    preset_channel,
    random_haar_unitary,
    random_state,
    registry_create,
    run_suite,
    simulate_cascade,
    simulate_classical_communication,
    simulate_dpi_chain,
)

# Load environment variables from .env file
# QIL_MAX_DIM raises or lowers the dense-state dimension limit
load_dotenv()

# Configure logging for the examples
logging.basicConfig(
    level="INFO",
    format="%(asctime)s — %(levelname)s — %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)
logger = logging.getLogger(__name__)

# Configuration constants
SEED = int(os.getenv("EXAMPLES_SEED", "0"))
CASCADE_RUNS = int(os.getenv("EXAMPLES_CASCADE_RUNS", "20"))
SUITE_TRIALS = int(os.getenv("EXAMPLES_SUITE_TRIALS", "20"))
N_WORKERS = 4

rng = np.random.default_rng(SEED)
plus = np.array([1.0, 1.0]) / np.sqrt(2)

# Send one bit with non-orthogonal signals through a noiseless channel
print("\n📡 Classical communication with |0> and |+>")
ensemble = Ensemble.from_vectors([0.5, 0.5], [[1, 0], plus])
report = simulate_classical_communication(
    ensemble, preset_channel("identity"), MeasurementSpec("Q")
)
print(f"  chi    = {report.values['chi']:.5f}")
print(f"  I(A;B) = {report.values['I_AB']:.5f}")
print(f"  checks passed: {report.passed}")

# The same ensemble measured in the basis halfway between the signals
angle = np.pi / 8
rotation = np.array(
    [[np.cos(angle), np.sin(angle)], [-np.sin(angle), np.cos(angle)]]
)
symmetric = simulate_classical_communication(
    ensemble,
    preset_channel("identity"),
    MeasurementSpec("Q", Unitary(rotation, ("Q",))),
)
print(f"  I(A;B) symmetric basis = {symmetric.values['I_AB']:.5f}")

# Data processing along two noisy channels
print("\n🔗 Data processing chain")
rho = random_state(registry_create([("Q", 2)]), 2, rng)
report = simulate_dpi_chain(
    rho,
    preset_channel("amplitude_damping", 0.3),
    preset_channel("depolarizing", 0.2),
)
for key in ("S_rho", "I_c_first", "I_c_composed"):
    print(f"  {key:<13}= {report.values[key]:.5f}")
print(f"  checks passed: {report.passed}")

# Zeroth law for every knowledge setup
print("\n🌡️ Zeroth law")
rho_1 = random_state(registry_create([("Q1", 2)]), 2, rng)
rho_2 = random_state(registry_create([("Q2", 2)]), 2, rng)
for setup in KnowledgeSetup:
    u = random_haar_unitary(4, rng, ("Q1", "Q2"))
    report = check_zeroth_law(rho_1, rho_2, u, setup)
    print(
        f"  {setup.value:<13} {report.values['sum_before']:.5f} -> "
        f"{report.values['sum_after']:.5f} (passed: {report.passed})"
    )

# Second-law cascade and its mean trajectory
print("\n📈 Second-law cascade")
config = CascadeConfig(dims=(2, 4, 8), sweeps=5, seed=SEED)
report = simulate_cascade(config)
print("  S_T(Q>|B):", " ".join(f"{p.s_t:.3f}" for p in report.trajectory))
stats = cascade_statistics(config, CASCADE_RUNS, N_WORKERS, verbose=True)
print(f"  first-step violations: {stats.first_step_violations}")
print(f"  equilibrated at step: {stats.equilibration_step}")
print(
    "  mean decreases beyond one SE before equilibrium: "
    f"{stats.decreases_before_equilibrium}"
)

# Property suite
print(f"\n✅ Property suite with {SUITE_TRIALS} trials per property")
suite = run_suite(default_suite(SEED, SUITE_TRIALS), N_WORKERS)
for entry in suite.entries:
    print(f"  {entry.summary()}")
print(f"  all passed: {suite.passed}")
