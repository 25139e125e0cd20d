import unittest

import numpy as np
from numpy.testing import assert_allclose

from quantuminfolab.channels import (
    PRESET_CHANNELS,
    Ensemble,
    EnsembleItem,
    channel_apply,
    channel_compose,
    channel_create,
    channel_from_json,
    channel_to_json,
    coherent_information,
    complex_to_json,
    ensemble_from_json,
    ensemble_to_json,
    holevo_chi,
    preset_channel,
    stinespring_dilation,
    stinespring_isometry,
    unitary_from_json,
)
from quantuminfolab.core import (
    DensityMatrix,
    Unitary,
    apply_unitary,
    basis_state,
    extend_fresh,
    maximally_mixed_state,
    partial_trace,
    purify,
    random_haar_unitary,
    random_state,
    registry_create,
)
from quantuminfolab.entropy import directed_entanglement, von_neumann
from quantuminfolab.exceptions import (
    ChannelCompletenessException,
    ConfigurationException,
    DimensionMismatchException,
    InvalidEnsembleException,
    UnknownLabelException,
)

Z = np.diag([1.0, -1.0])
PLUS = np.array([1.0, 1.0]) / np.sqrt(2)


def random_qubit(rng, rank=2, label="Q"):
    return random_state(registry_create([(label, 2)]), rank, rng)


def dilated(rho, ch):
    """Channel output by the environment route."""
    u, env_dim = stinespring_dilation(ch, rho.labels[0], "E")
    joint = apply_unitary(extend_fresh(rho, "E", env_dim), u)
    return partial_trace(joint, rho.labels[0])


class TestChannel(unittest.TestCase):
    def test_identity(self):
        ch = channel_create([np.eye(2)])
        self.assertEqual((ch.dim_in, ch.dim_out, ch.n_kraus), (2, 2, 1))

    def test_dephasing_family(self):
        ch = channel_create([np.sqrt(0.5) * np.eye(2), np.sqrt(0.5) * Z])
        self.assertEqual(ch.n_kraus, 2)

    def test_completeness(self):
        with self.assertRaises(ChannelCompletenessException):
            channel_create([np.eye(2), np.eye(2)])

    def test_shapes(self):
        with self.assertRaises(DimensionMismatchException):
            channel_create([np.eye(2), np.eye(3)])
        with self.assertRaises(DimensionMismatchException):
            channel_create([])


class TestApply(unittest.TestCase):
    def test_identity_unchanged(self):
        rho = random_qubit(np.random.default_rng(0))
        out = channel_apply(rho, preset_channel("identity"))
        assert_allclose(out.matrix, rho.matrix, atol=1e-15)

    def test_full_depolarizing(self):
        rng = np.random.default_rng(1)
        ch = preset_channel("depolarizing", 1.0)
        for _ in range(5):
            out = channel_apply(random_qubit(rng), ch)
            assert_allclose(out.matrix, np.eye(2) / 2, atol=1e-12)

    def test_acts_on_one_label(self):
        rng = np.random.default_rng(2)
        rho = random_state(registry_create([("A", 2), ("Q", 2)]), 3, rng)
        out = channel_apply(rho, preset_channel("dephasing", 1.0), "Q")
        assert_allclose(
            partial_trace(out, "A").matrix,
            partial_trace(rho, "A").matrix,
            atol=1e-12,
        )
        with self.assertRaises(UnknownLabelException):
            channel_apply(rho, preset_channel("identity"))

    def test_dimension_mismatch(self):
        rho = maximally_mixed_state(registry_create([("Q", 3)]))
        with self.assertRaises(DimensionMismatchException):
            channel_apply(rho, preset_channel("identity"))

    def test_dimension_changing_channel(self):
        # trace-and-replace onto a qutrit ground state
        kraus = [np.outer([1, 0, 0], row) for row in np.eye(2)]
        ch = channel_create(kraus)
        out = channel_apply(random_qubit(np.random.default_rng(3)), ch)
        self.assertEqual(out.registry.dims, (3,))
        assert_allclose(out.matrix, np.diag([1, 0, 0]), atol=1e-12)
        self.assertEqual(stinespring_isometry(ch).shape, (6, 2))
        with self.assertRaises(DimensionMismatchException):
            stinespring_dilation(ch)

    def test_matches_dilation_route(self):
        rng = np.random.default_rng(4)
        for name in PRESET_CHANNELS:
            for dim in (2, 3):
                ch = preset_channel(name, rng.uniform(), dim)
                rho = random_state(registry_create([("Q", dim)]), dim, rng)
                assert_allclose(
                    dilated(rho, ch).matrix,
                    channel_apply(rho, ch).matrix,
                    atol=1e-10,
                )


class TestCompose(unittest.TestCase):
    def test_identity_first(self):
        ch = preset_channel("amplitude_damping", 0.4)
        rho = random_qubit(np.random.default_rng(5))
        composed = channel_compose(preset_channel("identity"), ch)
        assert_allclose(
            channel_apply(rho, composed).matrix,
            channel_apply(rho, ch).matrix,
            atol=1e-12,
        )

    def test_sequential(self):
        rng = np.random.default_rng(6)
        first = preset_channel("dephasing", 0.5)
        second = preset_channel("dephasing", 0.5)
        composed = channel_compose(second, first)
        for _ in range(5):
            rho = random_qubit(rng)
            assert_allclose(
                channel_apply(rho, composed).matrix,
                channel_apply(channel_apply(rho, first), second).matrix,
                atol=1e-12,
            )

    def test_mixed_presets_sequential(self):
        rng = np.random.default_rng(7)
        first = preset_channel("amplitude_damping", 0.3, 3)
        second = preset_channel("depolarizing", 0.2, 3)
        rho = random_state(registry_create([("Q", 3)]), 3, rng)
        assert_allclose(
            channel_apply(rho, channel_compose(second, first)).matrix,
            channel_apply(channel_apply(rho, first), second).matrix,
            atol=1e-12,
        )

    def test_mismatch(self):
        with self.assertRaises(DimensionMismatchException):
            channel_compose(
                preset_channel("identity", dim=3), preset_channel("identity")
            )


class TestDilation(unittest.TestCase):
    def test_identity(self):
        u, env_dim = stinespring_dilation(preset_channel("identity"))
        self.assertEqual(env_dim, 1)
        assert_allclose(u.matrix, np.eye(2))
        self.assertEqual(u.targets, ("Q", "E"))

    def test_dephasing(self):
        ch = preset_channel("dephasing", 0.5)
        u, env_dim = stinespring_dilation(ch)
        self.assertEqual(env_dim, 2)
        assert_allclose(u.matrix.conj().T @ u.matrix, np.eye(4), atol=1e-10)
        rng = np.random.default_rng(8)
        for _ in range(20):
            rho = random_qubit(rng)
            assert_allclose(
                dilated(rho, ch).matrix,
                channel_apply(rho, ch).matrix,
                atol=1e-10,
            )

    def test_defined_block(self):
        ch = preset_channel("amplitude_damping", 0.3)
        u, env_dim = stinespring_dilation(ch)
        columns = u.matrix[:, [i * env_dim for i in range(2)]]
        assert_allclose(columns, stinespring_isometry(ch), atol=1e-15)


class TestPresets(unittest.TestCase):
    def test_zero_parameter_is_identity(self):
        rng = np.random.default_rng(9)
        for name in PRESET_CHANNELS:
            for dim in (2, 3):
                rho = random_state(registry_create([("Q", dim)]), dim, rng)
                out = channel_apply(rho, preset_channel(name, 0.0, dim))
                assert_allclose(out.matrix, rho.matrix, atol=1e-12)

    def test_full_depolarizing_any_dim(self):
        rng = np.random.default_rng(10)
        for dim in (2, 3, 4):
            rho = random_state(registry_create([("Q", dim)]), 1, rng)
            out = channel_apply(rho, preset_channel("depolarizing", 1.0, dim))
            assert_allclose(out.matrix, np.eye(dim) / dim, atol=1e-12)

    def test_full_dephasing_any_dim(self):
        rng = np.random.default_rng(11)
        for dim in (2, 3):
            rho = random_state(registry_create([("Q", dim)]), dim, rng)
            out = channel_apply(rho, preset_channel("dephasing", 1.0, dim))
            assert_allclose(
                out.matrix, np.diag(np.diag(rho.matrix)), atol=1e-12
            )

    def test_amplitude_damping(self):
        excited = basis_state(registry_create([("Q", 2)]), {"Q": 1})
        out = channel_apply(excited, preset_channel("amplitude_damping", 0.3))
        assert_allclose(out.matrix, np.diag([0.3, 0.7]), atol=1e-12)

    def test_invalid(self):
        with self.assertRaises(ConfigurationException):
            preset_channel("erasure", 0.1)
        with self.assertRaises(ConfigurationException):
            preset_channel("dephasing", 1.5)
        with self.assertRaises(ConfigurationException):
            preset_channel("dephasing", "a lot")
        with self.assertRaises(ConfigurationException):
            preset_channel("identity", dim=0)


class TestEnsemble(unittest.TestCase):
    def test_average_state(self):
        ens = Ensemble.from_vectors([0.5, 0.5], [[1, 0], PLUS])
        expected = 0.5 * np.diag([1, 0]) + 0.5 * np.outer(PLUS, PLUS)
        assert_allclose(ens.average_state().matrix, expected, atol=1e-15)
        self.assertEqual(ens.label, "Q")
        self.assertEqual(ens.dim, 2)

    def test_derived_unitaries(self):
        rng = np.random.default_rng(12)
        vectors = [random_qubit(rng, 1).amplitudes for _ in range(3)]
        ens = Ensemble.from_vectors([0.2, 0.3, 0.5], vectors)
        for u, vector in zip(ens.preparation_unitaries(), vectors):
            assert_allclose(u.matrix[:, 0], vector, atol=1e-12)

    def test_given_unitaries_checked(self):
        registry = registry_create([("Q", 2)])
        zero, one = basis_state(registry), basis_state(registry, {"Q": 1})
        items = (EnsembleItem(0.5, zero), EnsembleItem(0.5, one))
        flip = Unitary(np.array([[0, 1], [1, 0]]), ("Q",))
        identity = Unitary(np.eye(2), ("Q",))
        Ensemble(items, (identity, flip))
        with self.assertRaises(InvalidEnsembleException):
            Ensemble(items, (flip, identity))

    def test_invalid(self):
        with self.assertRaises(InvalidEnsembleException):
            Ensemble.from_vectors([0.5, 0.6], [[1, 0], [0, 1]])
        with self.assertRaises(InvalidEnsembleException):
            Ensemble.from_vectors([1.0], [[1, 1]])
        with self.assertRaises(InvalidEnsembleException):
            Ensemble.from_vectors([], [])
        with self.assertRaises(InvalidEnsembleException):
            Ensemble(())


class TestHolevo(unittest.TestCase):
    def test_orthogonal(self):
        ens = Ensemble.from_vectors([0.5, 0.5], [[1, 0], [0, 1]])
        self.assertAlmostEqual(
            holevo_chi(ens, preset_channel("identity")), 1.0, 12
        )

    def test_constant_channel(self):
        rng = np.random.default_rng(13)
        vectors = [random_qubit(rng, 1).amplitudes for _ in range(3)]
        ens = Ensemble.from_vectors([0.3, 0.3, 0.4], vectors)
        chi = holevo_chi(ens, preset_channel("depolarizing", 1.0))
        self.assertAlmostEqual(chi, 0.0, 9)

    def test_nonorthogonal(self):
        ens = Ensemble.from_vectors([0.5, 0.5], [[1, 0], PLUS])
        p = (1 + 1 / np.sqrt(2)) / 2
        expected = -p * np.log2(p) - (1 - p) * np.log2(1 - p)
        chi = holevo_chi(ens, preset_channel("identity"))
        self.assertAlmostEqual(chi, expected, 12)
        self.assertAlmostEqual(chi, 0.60088, 4)

    def test_bounds(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            dim = int(rng.choice([2, 3]))
            registry = registry_create([("Q", dim)])
            vectors = [
                random_state(registry, 1, rng).amplitudes for _ in range(3)
            ]
            ens = Ensemble.from_vectors(rng.dirichlet(np.ones(3)), vectors)
            ch = preset_channel(
                str(rng.choice(PRESET_CHANNELS)), rng.uniform(), dim
            )
            chi = holevo_chi(ens, ch)
            self.assertGreaterEqual(chi, -1e-9)
            self.assertLessEqual(chi, np.log2(dim) + 1e-9)

    def test_dimension_mismatch(self):
        ens = Ensemble.from_vectors([1.0], [[1, 0]])
        with self.assertRaises(DimensionMismatchException):
            holevo_chi(ens, preset_channel("identity", dim=3))


class TestCoherentInformation(unittest.TestCase):
    def test_identity(self):
        rho = random_qubit(np.random.default_rng(15))
        self.assertAlmostEqual(
            coherent_information(rho, preset_channel("identity")),
            von_neumann(rho),
            10,
        )

    def test_identity_near_pure(self):
        rho = DensityMatrix(
            registry_create([("Q", 2)]), np.diag([1 - 1e-9, 1e-9])
        )
        s_rho = von_neumann(rho)
        self.assertGreater(s_rho, 3e-8)
        self.assertAlmostEqual(
            coherent_information(rho, preset_channel("identity")),
            s_rho,
            delta=1e-12,
        )

    def test_fully_depolarizing(self):
        rho = maximally_mixed_state(registry_create([("Q", 2)]))
        ic = coherent_information(rho, preset_channel("depolarizing", 1.0))
        self.assertAlmostEqual(ic, -1.0, 10)

    def test_matches_dilated_state(self):
        rng = np.random.default_rng(16)
        ch = preset_channel("dephasing", 0.3)
        for _ in range(5):
            rho = random_qubit(rng)
            pure = purify(rho, "R")
            u, env_dim = stinespring_dilation(ch, "Q", "E")
            joint = apply_unitary(extend_fresh(pure, "E", env_dim), u)
            self.assertAlmostEqual(
                coherent_information(rho, ch),
                directed_entanglement(joint, "R", "Q"),
                10,
            )

    def test_purification_independent(self):
        rng = np.random.default_rng(17)
        rho = random_qubit(rng)
        ch = preset_channel("amplitude_damping", 0.6)
        pure = purify(rho, "R")
        rotated = apply_unitary(pure, random_haar_unitary(2, rng, ("R",)))
        joint = channel_apply(rotated, ch, "Q")
        other = von_neumann(partial_trace(joint, "Q")) - von_neumann(joint)
        self.assertAlmostEqual(coherent_information(rho, ch), other, 10)

    def test_bounded_by_entropy(self):
        rng = np.random.default_rng(18)
        for _ in range(20):
            rho = random_qubit(rng)
            name = str(rng.choice(PRESET_CHANNELS))
            ch = preset_channel(name, rng.uniform())
            self.assertLessEqual(
                coherent_information(rho, ch), von_neumann(rho) + 1e-9
            )

    def test_reference_label_avoids_collision(self):
        rho = maximally_mixed_state(registry_create([("R", 2)]))
        ic = coherent_information(rho, preset_channel("identity"))
        self.assertAlmostEqual(ic, 1.0, 10)


class TestJson(unittest.TestCase):
    def test_kraus_form(self):
        ch = preset_channel("amplitude_damping", 0.25)
        restored = channel_from_json(channel_to_json(ch))
        self.assertEqual(restored.n_kraus, ch.n_kraus)
        for a, b in zip(restored.kraus, ch.kraus):
            assert_allclose(a, b)

    def test_preset_form(self):
        ch = channel_from_json({"preset": "dephasing", "param": 0.5})
        self.assertEqual((ch.dim_in, ch.n_kraus), (2, 2))
        payload = {"preset": "depolarizing", "param": 1, "dim": 3}
        ch = channel_from_json(payload)
        self.assertEqual(ch.dim_in, 3)

    def test_malformed_kraus(self):
        doubled = [complex_to_json(np.eye(2))] * 2
        payload = {"dim_in": 2, "dim_out": 2, "kraus": doubled}
        with self.assertRaises(ChannelCompletenessException):
            channel_from_json(payload)
        with self.assertRaises(ConfigurationException):
            channel_from_json({"kraus": [[["x", 0]]]})
        with self.assertRaises(ConfigurationException):
            channel_from_json({"dim_in": 2})
        with self.assertRaises(DimensionMismatchException):
            channel_from_json(
                {"dim_in": 3, "kraus": [complex_to_json(np.eye(2))]}
            )

    def test_ensemble(self):
        payload = {
            "dim": 2,
            "items": [
                {"prob": 0.5, "amplitudes": [[1, 0], [0, 0]]},
                {"prob": 0.5, "amplitudes": [[0, 0], [0, 1]]},
            ],
        }
        ens = ensemble_from_json(payload)
        assert_allclose(ens.items[1].state.amplitudes, [0, 1j])
        self.assertEqual(ensemble_to_json(ens), payload)
        with self.assertRaises(DimensionMismatchException):
            ensemble_from_json({**payload, "dim": 3})
        with self.assertRaises(ConfigurationException):
            ensemble_from_json({"items": [{"prob": 1.0}]})

    def test_unitary(self):
        hadamard = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        u = unitary_from_json({"matrix": complex_to_json(hadamard)}, ("Q",))
        assert_allclose(u.matrix, hadamard)
        self.assertEqual(u.targets, ("Q",))
        with self.assertRaises(ConfigurationException):
            unitary_from_json({})


if __name__ == "__main__":
    unittest.main()
