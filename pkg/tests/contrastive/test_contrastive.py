import pytest

import numpy as np

from depthcontrast.Autograd import Tape, grad_check
from depthcontrast.Contrastive import (ContrastiveConfig, EmbeddingBatch, build_embedding_batch, nt_xent_loss,
    positive_index, similarity_matrix)
from depthcontrast.Exceptions import InvalidConfigError, NumericalError, ShapeError

def oracle_loss(z_ref, z_dep, tau):
    z = np.concatenate([z_ref, z_dep])
    z = z / np.linalg.norm(z, axis=1, keepdims=True)
    n = len(z_ref)
    total = 0.0
    for i in range(2 * n):
        j = i + n if i < n else i - n
        denominator = 0.0
        for k in range(2 * n):
            if k != i:
                denominator += np.exp(np.dot(z[i], z[k]) / tau)
        total += -np.log(np.exp(np.dot(z[i], z[j]) / tau) / denominator)
    return total / (2 * n)

def test_orthogonal_pairs():
    loss, per_pair = nt_xent_loss(build_embedding_batch(np.eye(2), np.eye(2)), ContrastiveConfig(tau=1.0))
    assert loss.item() == pytest.approx(np.log(1.0 + 2.0 / np.e))
    assert loss.item() == pytest.approx(0.551445, abs=1e-6)
    assert np.allclose(per_pair.values, loss.item())

def test_matches_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n = int(rng.integers(2, 9))
        d = int(rng.integers(2, 17))
        tau = float(rng.choice([0.05, 0.1, 1.0]))
        z_ref = rng.standard_normal((n, d))
        z_dep = rng.standard_normal((n, d))
        loss, _ = nt_xent_loss(build_embedding_batch(z_ref, z_dep), ContrastiveConfig(tau))
        assert abs(loss.item() - oracle_loss(z_ref, z_dep, tau)) <= 1e-9, (n, d, tau)

def test_permuting_pairs(rng):
    z_ref = rng.standard_normal((6, 5))
    z_dep = rng.standard_normal((6, 5))
    order = rng.permutation(6)
    loss, per_pair = nt_xent_loss(build_embedding_batch(z_ref, z_dep))
    permuted_loss, permuted = nt_xent_loss(build_embedding_batch(z_ref[order], z_dep[order]))
    assert permuted_loss.item() == pytest.approx(loss.item(), abs=1e-12)
    expected = np.concatenate([per_pair.values[:6][order], per_pair.values[6:][order]])
    assert np.allclose(permuted.values, expected, rtol=0, atol=1e-12)

def test_closer_positive_lowers_its_loss(rng):
    z_ref = rng.standard_normal((4, 6))
    z_dep = rng.standard_normal((4, 6))
    target = z_ref[1] / np.linalg.norm(z_ref[1])
    start = z_dep[1] / np.linalg.norm(z_dep[1])
    similarities = []
    losses = []
    for t in np.linspace(0.0, 0.9, 10):
        moved = z_dep.copy()
        moved[1] = (1.0 - t) * start + t * target
        similarities.append(np.dot(moved[1], target) / np.linalg.norm(moved[1]))
        _, per_pair = nt_xent_loss(build_embedding_batch(z_ref, moved))
        losses.append(per_pair.values[1])
    assert np.all(np.diff(similarities) > 0)
    assert np.all(np.diff(losses) < 0)

def test_symmetric_in_modalities(rng):
    z_ref = rng.standard_normal((4, 6))
    z_dep = rng.standard_normal((4, 6))
    forward, _ = nt_xent_loss(build_embedding_batch(z_ref, z_dep))
    swapped, _ = nt_xent_loss(build_embedding_batch(z_dep, z_ref))
    assert forward.item() == pytest.approx(swapped.item(), rel=1e-12)

def test_scale_invariant(rng):
    z_ref = rng.standard_normal((3, 5))
    z_dep = rng.standard_normal((3, 5))
    loss, _ = nt_xent_loss(build_embedding_batch(z_ref, z_dep))
    scaled, _ = nt_xent_loss(build_embedding_batch(7.5 * z_ref, 7.5 * z_dep))
    assert loss.item() == pytest.approx(scaled.item(), rel=1e-10)

def test_low_temperature_does_not_overflow(rng):
    loss, _ = nt_xent_loss(build_embedding_batch(rng.standard_normal((4, 3)), rng.standard_normal((4, 3))),
        ContrastiveConfig(tau=1e-3))
    assert np.isfinite(loss.item())

def test_identical_views_beat_random_views(rng):
    z = rng.standard_normal((6, 16))
    aligned, _ = nt_xent_loss(build_embedding_batch(z, z))
    mixed, _ = nt_xent_loss(build_embedding_batch(z, rng.standard_normal((6, 16))))
    assert aligned.item() < mixed.item()

def test_single_pair_warns(caplog):
    loss, _ = nt_xent_loss(build_embedding_batch(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])))
    # the positive is the only other row
    assert loss.item() == pytest.approx(0.0, abs=1e-12)
    assert "single pair" in caplog.text

def test_gradient(rng):
    z_ref = rng.standard_normal((3, 4))
    z_dep = rng.standard_normal((3, 4))

    def loss(params, tape):
        batch = build_embedding_batch(tape.param("ref", params["ref"]), tape.param("dep", params["dep"]), tape)
        return nt_xent_loss(batch, ContrastiveConfig(0.2))[0]

    assert grad_check(loss, {"ref": z_ref, "dep": z_dep}).passed

def test_batch_layout(rng):
    z_ref = rng.standard_normal((3, 2))
    z_dep = rng.standard_normal((3, 2))
    batch = build_embedding_batch(z_ref, z_dep, Tape())
    assert batch.n == 3
    assert np.array_equal(batch.reference(), z_ref)
    assert np.array_equal(batch.depth(), z_dep)
    assert [positive_index(i, 3) for i in range(6)] == [3, 4, 5, 0, 1, 2]

def test_batch_shape_mismatch():
    with pytest.raises(ShapeError):
        build_embedding_batch(np.ones((2, 3)), np.ones((3, 3)))

def test_similarity_matrix(rng):
    z = rng.standard_normal((4, 3))
    z = z / np.linalg.norm(z, axis=1, keepdims=True)
    similarities = similarity_matrix(z).values
    assert np.allclose(similarities, similarities.T)
    assert np.allclose(np.diag(similarities), 1.0)
    for i in range(4):
        for j in range(4):
            expected = sum(z[i, k] * z[j, k] for k in range(3))
            assert abs(similarities[i, j] - expected) <= 1e-12

def test_similarity_needs_unit_rows():
    with pytest.raises(NumericalError) as err_wrapper:
        similarity_matrix(np.array([[1.0, 0.0], [0.0, 1.1]]))
    assert "1.000e-01" in err_wrapper.value.message

def test_temperature_must_be_positive():
    with pytest.raises(InvalidConfigError):
        ContrastiveConfig(tau=0.0)
    with pytest.raises(InvalidConfigError):
        ContrastiveConfig(tau=-1.0)
