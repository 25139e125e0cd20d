import itertools
import unittest

import numpy as np
from numpy.testing import assert_allclose

from quantuminfolab.config import configure, reset_settings
from quantuminfolab.core import (
    DensityMatrix,
    ProbabilityVector,
    PureState,
    Subsystem,
    SystemKind,
    Unitary,
    apply_unitary,
    basis_state,
    extend_fresh,
    maximally_entangled_state,
    maximally_mixed_state,
    partial_trace,
    purify,
    random_haar_unitary,
    random_state,
    registry_create,
    schmidt_decomposition,
    tensor,
)
from quantuminfolab.exceptions import (
    ConfigurationException,
    DimensionMismatchException,
    DimensionOverflowException,
    DuplicateLabelException,
    InvalidStateException,
    NonUnitaryException,
    OverlappingLabelsException,
    UnknownLabelException,
)

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def naive_partial_trace(state: PureState, keep):
    """Reduce by explicit summation over every discarded index."""
    registry = state.registry
    keep_axes = sorted(registry.index(l) for l in keep)
    dims = registry.dims
    psi = state.tensor_view()
    kept_ranges = [range(dims[i]) for i in keep_axes]
    drop_ranges = [
        range(dims[i]) for i in range(len(dims)) if i not in keep_axes
    ]
    rows = list(itertools.product(*kept_ranges))
    reduced = np.zeros((len(rows), len(rows)), dtype=complex)

    def full_index(kept, dropped):
        index, kept, dropped = [], list(kept), list(dropped)
        for axis in range(len(dims)):
            index.append(kept.pop(0) if axis in keep_axes else dropped.pop(0))
        return tuple(index)

    for r, row in enumerate(rows):
        for c, col in enumerate(rows):
            reduced[r, c] = sum(
                psi[full_index(row, k)] * np.conj(psi[full_index(col, k)])
                for k in itertools.product(*drop_ranges)
            )
    return reduced


class TestRegistry(unittest.TestCase):
    def tearDown(self):
        reset_settings()

    def test_single_qubit(self):
        registry = registry_create([("Q", 2, "physical")])
        self.assertEqual(registry.labels, ("Q",))
        self.assertEqual(registry.total_dim, 2)

    def test_duplicate_label(self):
        with self.assertRaises(DuplicateLabelException):
            registry_create([("Q", 2), ("Q", 3)])

    def test_dimension_overflow(self):
        configure(max_total_dim=4096)
        with self.assertRaises(DimensionOverflowException):
            registry_create([(f"Q{i}", 2) for i in range(13)])
        registry_create([(f"Q{i}", 2) for i in range(12)])

    def test_empty_registry(self):
        with self.assertRaises(ConfigurationException):
            registry_create([])

    def test_bad_dimension(self):
        with self.assertRaises(DimensionMismatchException):
            registry_create([("Q", 0)])

    def test_knowledge_needs_owner(self):
        with self.assertRaises(ConfigurationException):
            Subsystem("B", 2, SystemKind.KNOWLEDGE)
        with self.assertRaises(ConfigurationException):
            Subsystem("Q", 2, SystemKind.PHYSICAL, "Bob")

    def test_owner_partitions(self):
        registry = registry_create(
            [
                ("A", 2, "knowledge", "Alice"),
                ("Q", 2),
                ("B", 2, ("knowledge", "Bob")),
                Subsystem.knowledge("C", 2, "Bob"),
            ]
        )
        self.assertEqual(registry.labels_owned_by("Bob"), ("B", "C"))
        self.assertEqual(registry.labels_owned_by("Alice"), ("A",))
        self.assertEqual(registry.physical_labels(), ("Q",))
        self.assertEqual(registry.knowledge_labels(), ("A", "B", "C"))

    def test_fresh_label(self):
        registry = registry_create([("R", 2), ("R_1", 2)])
        self.assertEqual(registry.fresh_label("R"), "R_2")
        self.assertEqual(registry.fresh_label("E"), "E")

    def test_registry_keeps_limit_from_creation(self):
        registry = registry_create([("Q", 2)])
        configure(max_total_dim=1)
        self.assertEqual(registry.max_total_dim, 4096)


class TestStates(unittest.TestCase):
    def test_pure_state_norm(self):
        registry = registry_create([("Q", 2)])
        with self.assertRaises(InvalidStateException):
            PureState(registry, np.array([1.0, 1.0]))
        with self.assertRaises(DimensionMismatchException):
            PureState(registry, np.array([1.0, 0.0, 0.0]))

    def test_density_matrix_invariants(self):
        registry = registry_create([("Q", 2)])
        with self.assertRaises(InvalidStateException):
            DensityMatrix(registry, np.diag([0.6, 0.6]))
        with self.assertRaises(InvalidStateException):
            DensityMatrix(registry, np.diag([1.2, -0.2]))
        with self.assertRaises(InvalidStateException):
            DensityMatrix(registry, np.array([[0.5, 0.5], [0.0, 0.5]]))

    def test_states_are_immutable(self):
        state = basis_state(registry_create([("Q", 2)]))
        with self.assertRaises(ValueError):
            state.amplitudes[0] = 0.0

    def test_probability_vector(self):
        p = ProbabilityVector([0.5, 0.5 + 1e-12, -1e-12])
        self.assertAlmostEqual(float(np.sum(p.probs)), 1.0, places=15)
        self.assertGreaterEqual(p.probs.min(), 0.0)
        with self.assertRaises(InvalidStateException):
            ProbabilityVector([0.7, 0.7])
        with self.assertRaises(InvalidStateException):
            ProbabilityVector([1.1, -0.1])

    def test_basis_state_indices(self):
        registry = registry_create([("A", 2), ("B", 3)])
        state = basis_state(registry, {"A": 1, "B": 2})
        self.assertEqual(np.argmax(np.abs(state.amplitudes)), 5)
        with self.assertRaises(UnknownLabelException):
            basis_state(registry, {"C": 0})


class TestTensor(unittest.TestCase):
    def test_basis_product(self):
        zero = basis_state(registry_create([("A", 2)]))
        one = basis_state(registry_create([("B", 2)]), {"B": 1})
        product = tensor(zero, one)
        expected = np.zeros(4)
        expected[1] = 1.0
        assert_allclose(product.amplitudes, expected)
        self.assertEqual(product.labels, ("A", "B"))

    def test_uniform_product(self):
        a = maximally_mixed_state(registry_create([("A", 2)]))
        b = maximally_mixed_state(registry_create([("B", 2)]))
        assert_allclose(tensor(a, b).matrix, np.eye(4) / 4)

    def test_overlapping_labels(self):
        a = basis_state(registry_create([("Q", 2)]))
        with self.assertRaises(OverlappingLabelsException):
            tensor(a, a)
        self.assertTrue(
            issubclass(OverlappingLabelsException, DuplicateLabelException)
        )

    def test_mixed_kinds(self):
        a = basis_state(registry_create([("A", 2)]))
        b = maximally_mixed_state(registry_create([("B", 2)]))
        expected = np.diag([0.5, 0.5, 0.0, 0.0])
        for product in (tensor(a, b), tensor(b, a)):
            self.assertIsInstance(product, DensityMatrix)
        assert_allclose(tensor(a, b).matrix, expected)
        self.assertEqual(tensor(b, a).labels, ("B", "A"))
        assert_allclose(tensor(b, a).matrix, np.diag([0.5, 0, 0.5, 0]))
        with self.assertRaises(TypeError):
            tensor(a, np.eye(2))


class TestPartialTrace(unittest.TestCase):
    def test_bell_marginal(self):
        bell = maximally_entangled_state(registry_create([("X", 2), ("Y", 2)]))
        assert_allclose(partial_trace(bell, "Y").matrix, np.eye(2) / 2)

    def test_product_factorizes(self):
        rng = np.random.default_rng(3)
        rho_a = random_state(registry_create([("A", 3)]), 2, rng)
        rho_b = random_state(registry_create([("B", 2)]), 2, rng)
        assert_allclose(
            partial_trace(tensor(rho_a, rho_b), "A").matrix,
            rho_a.matrix,
            atol=1e-12,
        )

    def test_matches_naive_summation(self):
        rng = np.random.default_rng(11)
        for dims in [(2, 2, 2), (2, 3, 2), (3, 2, 2, 2)]:
            labels = ["A", "B", "C", "D"][: len(dims)]
            state = random_state(
                registry_create(list(zip(labels, dims))), 1, rng
            )
            for keep in [("A", "B"), ("B",), ("A", "C")]:
                assert_allclose(
                    partial_trace(state, keep).matrix,
                    naive_partial_trace(state, keep),
                    atol=1e-12,
                )
                assert_allclose(
                    partial_trace(state.to_density_matrix(), keep).matrix,
                    naive_partial_trace(state, keep),
                    atol=1e-12,
                )

    def test_keep_order_follows_registry(self):
        state = basis_state(
            registry_create([("A", 2), ("B", 3), ("C", 2)]), {"B": 1}
        )
        reduced = partial_trace(state, ("C", "B"))
        self.assertEqual(reduced.labels, ("B", "C"))

    def test_invariant_under_discarded_unitary(self):
        rng = np.random.default_rng(5)
        state = random_state(registry_create([("A", 2), ("B", 3)]), 1, rng)
        u = random_haar_unitary(3, rng, ("B",))
        assert_allclose(
            partial_trace(apply_unitary(state, u), "A").matrix,
            partial_trace(state, "A").matrix,
            atol=1e-12,
        )

    def test_errors(self):
        state = basis_state(registry_create([("A", 2)]))
        with self.assertRaises(UnknownLabelException):
            partial_trace(state, "Z")
        with self.assertRaises(UnknownLabelException):
            partial_trace(state, ())


class TestUnitaries(unittest.TestCase):
    def test_identity_leaves_state(self):
        state = random_state(registry_create([("A", 2), ("B", 2)]), 1, 0)
        same = apply_unitary(state, Unitary(np.eye(2), ("B",)))
        assert_allclose(same.amplitudes, state.amplitudes)

    def test_cnot_builds_bell_state(self):
        registry = registry_create([("A", 2), ("B", 2)])
        plus = Unitary(np.array([[1, 1], [1, -1]]) / np.sqrt(2), ("A",))
        state = apply_unitary(basis_state(registry), plus)
        bell = apply_unitary(state, Unitary(CNOT, ("A", "B")))
        assert_allclose(
            bell.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2), atol=1e-15
        )

    def test_target_order_matters(self):
        registry = registry_create([("A", 2), ("B", 2)])
        state = basis_state(registry, {"B": 1})
        flipped = apply_unitary(state, Unitary(CNOT, ("B", "A")))
        assert_allclose(flipped.amplitudes, [0, 0, 0, 1])

    def test_round_trip(self):
        rng = np.random.default_rng(7)
        state = random_state(registry_create([("A", 3), ("B", 2)]), 1, rng)
        u = random_haar_unitary(6, rng, ("A", "B"))
        back = apply_unitary(apply_unitary(state, u), u.adjoint())
        assert_allclose(back.amplitudes, state.amplitudes, atol=1e-12)
        rho = random_state(state.registry, 3, rng)
        back = apply_unitary(apply_unitary(rho, u), u.adjoint())
        assert_allclose(back.matrix, rho.matrix, atol=1e-12)

    def test_non_unitary(self):
        with self.assertRaises(NonUnitaryException):
            Unitary(np.array([[1, 1], [0, 1]]))

    def test_wrong_target_dimension(self):
        state = basis_state(registry_create([("A", 3)]))
        with self.assertRaises(DimensionMismatchException):
            apply_unitary(state, Unitary(np.eye(2), ("A",)))
        with self.assertRaises(UnknownLabelException):
            apply_unitary(state, Unitary(np.eye(3), ("Z",)))

    def test_haar_unitary(self):
        phase = random_haar_unitary(1, 0)
        self.assertAlmostEqual(abs(phase.matrix[0, 0]), 1.0, places=12)
        u = random_haar_unitary(5, np.random.default_rng(1))
        assert_allclose(u.matrix.conj().T @ u.matrix, np.eye(5), atol=1e-12)
        with self.assertRaises(DimensionMismatchException):
            random_haar_unitary(0, 0)

    def test_generator_is_required(self):
        registry = registry_create([("A", 2)])
        with self.assertRaises(ConfigurationException):
            random_haar_unitary(2, None)
        with self.assertRaises(ConfigurationException):
            random_state(registry, 1, None)

    def test_mixed_state_spectrum_preserved(self):
        rng = np.random.default_rng(12)
        rho = random_state(registry_create([("A", 2), ("B", 3)]), 4, rng)
        u = random_haar_unitary(6, rng, ("B", "A"))
        rotated = apply_unitary(rho, u)
        self.assertIsInstance(rotated, DensityMatrix)
        self.assertAlmostEqual(np.trace(rotated.matrix).real, 1.0, places=10)
        assert_allclose(
            rotated.matrix, rotated.matrix.conj().T, atol=1e-10, rtol=0
        )
        assert_allclose(
            np.sort(rotated.eigenvalues()),
            np.sort(rho.eigenvalues()),
            atol=1e-10,
        )

    def test_trace_out_commutes_with_unitary(self):
        rng = np.random.default_rng(13)
        registry = registry_create([("A", 2), ("B", 2), ("C", 3)])
        for rank in (1, 5):
            state = random_state(registry, rank, rng)
            u = random_haar_unitary(4, rng, ("A", "B"))
            assert_allclose(
                partial_trace(apply_unitary(state, u), ("A", "B")).matrix,
                apply_unitary(partial_trace(state, ("A", "B")), u).matrix,
                atol=1e-12,
            )

    def test_haar_is_seeded(self):
        first = random_haar_unitary(4, 42).matrix
        second = random_haar_unitary(4, 42).matrix
        assert_allclose(first, second)

    def test_haar_first_moment(self):
        # E|U_00|^2 = 1/d for Haar unitaries
        rng = np.random.default_rng(2)
        samples = [
            abs(random_haar_unitary(3, rng).matrix[0, 0]) ** 2
            for _ in range(2000)
        ]
        self.assertAlmostEqual(float(np.mean(samples)), 1 / 3, delta=0.03)


class TestExtendAndPurify(unittest.TestCase):
    def test_extend_fresh(self):
        state = random_state(registry_create([("Q", 2)]), 1, 4)
        extended = extend_fresh(state, "B", 2, "knowledge", "Bob")
        self.assertEqual(extended.labels, ("Q", "B"))
        self.assertEqual(extended.registry.entry("B").owner, "Bob")
        assert_allclose(
            extended.amplitudes, np.kron(state.amplitudes, [1, 0])
        )
        assert_allclose(
            partial_trace(extended, "Q").matrix,
            state.to_density_matrix().matrix,
            atol=1e-15,
        )
        with self.assertRaises(DuplicateLabelException):
            extend_fresh(state, "Q", 2)

    def test_extend_density_matrix(self):
        rho = maximally_mixed_state(registry_create([("Q", 2)]))
        extended = extend_fresh(rho, "E", 3)
        self.assertIsInstance(extended, DensityMatrix)
        self.assertEqual(extended.registry.total_dim, 6)

    def test_purify(self):
        rng = np.random.default_rng(9)
        rho = random_state(registry_create([("Q", 3)]), 2, rng)
        pure = purify(rho, "R")
        self.assertEqual(pure.labels, ("R", "Q"))
        self.assertEqual(pure.registry.dim_of("R"), 2)
        assert_allclose(
            partial_trace(pure, "Q").matrix, rho.matrix, atol=1e-12
        )

    def test_purify_keeps_tiny_eigenvalues(self):
        registry = registry_create([("Q", 2)])
        rho = DensityMatrix(registry, np.diag([1 - 1e-9, 1e-9]))
        pure = purify(rho, "R")
        self.assertEqual(pure.registry.dim_of("R"), 2)
        assert_allclose(
            partial_trace(pure, "Q").matrix, rho.matrix, atol=1e-15, rtol=0
        )

    def test_random_state_rank(self):
        registry = registry_create([("A", 2), ("B", 2)])
        rho = random_state(registry, 2, 0)
        self.assertEqual(int(np.sum(rho.eigenvalues() > 1e-10)), 2)
        with self.assertRaises(ConfigurationException):
            random_state(registry, 5, 0)


class TestSchmidt(unittest.TestCase):
    def test_bell_coefficients(self):
        bell = maximally_entangled_state(registry_create([("R", 2), ("L", 2)]))
        decomposition = schmidt_decomposition(bell, "R")
        assert_allclose(decomposition.coefficients, [2**-0.5, 2**-0.5])

    def test_reconstructs_state(self):
        state = random_state(registry_create([("R", 3), ("L", 2)]), 1, 8)
        decomposition = schmidt_decomposition(state, "R")
        self.assertEqual(decomposition.rank, 2)
        assert_allclose(
            np.sum(decomposition.coefficients**2), 1.0, atol=1e-12
        )
        assert_allclose(
            decomposition.reconstruct(), state.amplitudes, atol=1e-12
        )

    def test_needs_complement(self):
        state = basis_state(registry_create([("R", 2)]))
        with self.assertRaises(UnknownLabelException):
            schmidt_decomposition(state, "R")


if __name__ == "__main__":
    unittest.main()
