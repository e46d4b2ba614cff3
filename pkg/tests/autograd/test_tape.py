import pytest

import numpy as np

from depthcontrast.Autograd import Tape, Tensor, apply_primitive, backward
from depthcontrast.Exceptions import InvalidAttributeError, NumericalError, ShapeError, TapeError

def test_matmul_sum_gradient():
    tape = Tape()
    a_values = np.array([[1.0, 2.0], [3.0, 4.0]])
    b_values = np.array([[0.5, -1.0], [2.0, 0.0]])
    a = tape.leaf(a_values)
    b = tape.leaf(b_values)
    loss = tape.apply("reduce_sum", tape.apply("matmul", a, b))
    tape.backward(loss)

    assert loss.item() == pytest.approx(np.sum(a_values @ b_values))
    assert np.allclose(a.grad, np.ones((2, 2)) @ b_values.T)
    assert np.allclose(b.grad, a_values.T @ np.ones((2, 2)))

def test_transposed_matmul_matches_explicit_transpose():
    rng = np.random.default_rng(0)
    a_values = rng.standard_normal((3, 4))
    b_values = rng.standard_normal((5, 4))
    tape = Tape()
    a = tape.leaf(a_values)
    b = tape.leaf(b_values)
    out = tape.apply("matmul", a, b, transpose_b=True)
    assert np.allclose(out.values, a_values @ b_values.T)
    tape.backward(tape.apply("reduce_sum", out))
    assert np.allclose(b.grad, (np.ones((3, 5)).T @ a_values))

def test_gradients_accumulate():
    tape = Tape()
    x = tape.leaf(np.array([1.0, 2.0]))
    loss = tape.apply("reduce_sum", tape.apply("mul", x, x))
    backward(tape, loss)
    backward(tape, loss)
    assert np.allclose(x.grad, 2 * np.array([2.0, 4.0]))

    tape.zero_grad()
    backward(tape, loss)
    assert np.allclose(x.grad, [2.0, 4.0])

def test_shared_input_gradient_sums():
    tape = Tape()
    x = tape.leaf(np.array([3.0]))
    y = tape.apply("add", tape.apply("scale", x, factor=2.0), tape.apply("mul", x, x))
    tape.backward(tape.apply("reduce_sum", y))
    assert np.allclose(x.grad, [2.0 + 6.0])

def test_unused_leaf_gets_zeros():
    tape = Tape()
    x = tape.leaf(np.array([1.0, 2.0]))
    unused = tape.leaf(np.ones((2, 3)))
    grads = tape.backward(tape.apply("reduce_sum", x))
    assert np.array_equal(grads[unused.id], np.zeros((2, 3)))

def test_constants_receive_no_gradient():
    tape = Tape()
    x = tape.leaf(np.array([1.0, 2.0]))
    c = tape.constant(np.array([3.0, 4.0]))
    tape.backward(tape.apply("reduce_sum", tape.apply("mul", x, c)))
    assert c.grad is None
    assert np.allclose(x.grad, [3.0, 4.0])

def test_backward_requires_scalar():
    tape = Tape()
    x = tape.leaf(np.ones((2, 2)))
    with pytest.raises(TapeError):
        tape.backward(tape.apply("relu", x))

def test_backward_rejects_foreign_loss():
    tape = Tape()
    other = Tape()
    loss = other.apply("reduce_sum", other.leaf(np.ones(3)))
    with pytest.raises(TapeError):
        tape.backward(loss)

def test_disabled_tape_records_nothing():
    tape = Tape(enabled=False)
    x = tape.leaf(np.ones(3))
    loss = tape.apply("reduce_sum", x)
    assert tape.records == []
    assert not loss.requires_grad
    with pytest.raises(TapeError):
        tape.backward(loss)

def test_param_is_bound_once():
    tape = Tape()
    first = tape.param("w", np.ones(2))
    second = tape.param("w", np.zeros(2))
    assert first is second
    tape.backward(tape.apply("reduce_sum", tape.apply("mul", first, first)))
    assert np.allclose(tape.param_grads()["w"], [2.0, 2.0])

def test_relu_gradient_at_zero_is_zero():
    tape = Tape()
    x = tape.leaf(np.array([-1.0, 0.0, 2.0]))
    tape.backward(tape.apply("reduce_sum", tape.apply("relu", x)))
    assert np.array_equal(x.grad, [0.0, 0.0, 1.0])
    assert np.array_equal(tape.relu_masks()[0], [False, False, True])

def test_tensor_values_are_read_only():
    tensor = Tensor(np.ones(3))
    with pytest.raises(ValueError):
        tensor.values[0] = 2.0

def test_tensor_rejects_non_finite_values():
    with pytest.raises(NumericalError):
        Tensor(np.array([1.0, np.nan]))

def test_primitive_rejects_bad_shapes():
    with pytest.raises(ShapeError):
        apply_primitive("matmul", [Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3)))])

def test_log_softmax_is_stable():
    out = apply_primitive("log_softmax", [Tensor(np.array([[1000.0, 0.0], [-1000.0, -1000.0]]))])
    assert np.all(np.isfinite(out.values))
    assert out.values[0, 0] == pytest.approx(0.0)
    assert out.values[1, 0] == pytest.approx(np.log(0.5))

def test_log_softmax_mask_excludes_entries():
    mask = np.array([[True, False, False]])
    out = apply_primitive("log_softmax", [Tensor(np.array([[50.0, 1.0, 1.0]]))], {"mask": mask})
    assert out.values[0, 0] == 0.0
    assert out.values[0, 1] == pytest.approx(np.log(0.5))

def test_log_softmax_rejects_fully_masked_row():
    with pytest.raises(InvalidAttributeError):
        apply_primitive("log_softmax", [Tensor(np.ones((1, 2)))], {"mask": np.ones((1, 2), dtype=bool)})

def test_active_dropout_needs_stream():
    with pytest.raises(InvalidAttributeError):
        apply_primitive("dropout", [Tensor(np.ones((2, 2)))], {"rate": 0.5, "training": True})

def test_dropout_is_identity_when_not_training():
    x = Tensor(np.arange(1.0, 5.0).reshape(2, 2))
    out = apply_primitive("dropout", [x], {"rate": 0.5, "training": False})
    assert np.array_equal(out.values, x.values)

def test_dropout_scales_kept_units():
    out = apply_primitive("dropout", [Tensor(np.ones((50, 40)))],
        {"rate": 0.25, "training": True, "stream": np.random.default_rng(0)})
    kept = out.values[out.values > 0]
    assert np.allclose(kept, 1.0 / 0.75)
    assert 0.7 < kept.size / out.values.size < 0.8

def test_batch_norm_updates_running_statistics():
    x = np.array([[1.0, 10.0], [3.0, 20.0]])
    running = {"mean": np.zeros(2), "var": np.ones(2)}
    out = apply_primitive("batch_norm", [Tensor(x), Tensor(np.ones(2)), Tensor(np.zeros(2))],
        {"training": True, "momentum": 0.1, "epsilon": 1e-5, "running": running})
    assert np.allclose(out.values.mean(axis=0), 0.0)
    assert np.allclose(running["mean"], [0.2, 1.5])
    # unbiased batch variances are 2 and 50
    assert np.allclose(running["var"], [0.9 + 0.2, 0.9 + 5.0])

def test_conv2d_matches_direct_correlation():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((2, 3, 7, 7))
    w = rng.standard_normal((4, 3, 3, 3))
    b = rng.standard_normal(4)
    out = apply_primitive("conv2d", [Tensor(x), Tensor(w), Tensor(b)], {"stride": 2, "padding": 1}).values

    padded = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    expected = np.zeros((2, 4, 4, 4))
    for n in range(2):
        for o in range(4):
            for i in range(4):
                for j in range(4):
                    window = padded[n, :, 2 * i:2 * i + 3, 2 * j:2 * j + 3]
                    expected[n, o, i, j] = np.sum(window * w[o]) + b[o]
    assert np.allclose(out, expected)

def test_float32_tape():
    tape = Tape(dtype=np.float32)
    x = tape.leaf(np.ones(3))
    loss = tape.apply("reduce_mean", x)
    tape.backward(loss)
    assert loss.dtype == np.float32
    assert x.grad.dtype == np.float32

def test_unsupported_dtype():
    with pytest.raises(InvalidAttributeError):
        Tape(dtype=np.int32)
