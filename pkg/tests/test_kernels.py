import numpy as np
import pytest

from pposmooth._kernels import BACKEND_NAME, mlp_backward, mlp_forward, numpy_backend

try:
    from pposmooth._kernels import _core
except ImportError:
    _core = None


def random_net(rng, in_dim=5, hidden_dim=16, out_dim=3, batch=7):
    w1 = rng.normal(size=(hidden_dim, in_dim))
    b1 = rng.normal(size=hidden_dim)
    w2 = rng.normal(size=(out_dim, hidden_dim))
    b2 = rng.normal(size=out_dim)
    x = rng.normal(size=(batch, in_dim))
    gy = rng.normal(size=(batch, out_dim))
    return w1, b1, w2, b2, x, gy


def test_active_backend_exports():
    assert BACKEND_NAME in ("numpy", "cython")
    out, hidden = mlp_forward(*random_net(np.random.default_rng(0))[:5])
    assert out.shape == (7, 3) and hidden.shape == (7, 16)


def test_numpy_forward_hand_value():
    # 1-1-1 identity-relu net
    w1 = np.array([[1.0]])
    b1 = np.zeros(1)
    w2 = np.array([[2.0]])
    b2 = np.array([1.0])
    out, hidden = numpy_backend.mlp_forward(w1, b1, w2, b2, np.array([[3.0], [-3.0]]))
    np.testing.assert_array_equal(out, [[7.0], [1.0]])
    np.testing.assert_array_equal(hidden, [[3.0], [0.0]])


def test_numpy_backward_relu_gate():
    w1 = np.array([[1.0]])
    w2 = np.array([[2.0]])
    x = np.array([[3.0], [-3.0]])
    hidden = np.array([[3.0], [0.0]])
    gy = np.ones((2, 1))
    gw1, gb1, gw2, gb2 = numpy_backend.mlp_backward(w1, w2, x, hidden, gy)
    # the dead (hidden == 0) row contributes nothing upstream
    assert gw1[0, 0] == 6.0  # w2 * x for the live row only
    assert gb1[0] == 2.0
    assert gw2[0, 0] == 3.0
    assert gb2[0] == 2.0


@pytest.mark.skipif(_core is None, reason="compiled extension not built")
class TestBackendParity:
    def test_forward_matches(self):
        rng = np.random.default_rng(1)
        for trial in range(20):
            w1, b1, w2, b2, x, _ = random_net(
                rng,
                in_dim=int(rng.integers(1, 9)),
                hidden_dim=int(rng.integers(1, 65)),
                out_dim=int(rng.integers(1, 5)),
                batch=int(rng.integers(1, 33)),
            )
            out_c, hid_c = _core.mlp_forward(w1, b1, w2, b2, x)
            out_n, hid_n = numpy_backend.mlp_forward(w1, b1, w2, b2, x)
            np.testing.assert_allclose(out_c, out_n, rtol=1e-12, atol=1e-12)
            np.testing.assert_allclose(hid_c, hid_n, rtol=1e-12, atol=1e-12)

    def test_backward_matches(self):
        rng = np.random.default_rng(2)
        for trial in range(20):
            w1, b1, w2, b2, x, gy = random_net(
                rng,
                in_dim=int(rng.integers(1, 9)),
                hidden_dim=int(rng.integers(1, 65)),
                out_dim=int(rng.integers(1, 5)),
                batch=int(rng.integers(1, 33)),
            )
            _, hidden = numpy_backend.mlp_forward(w1, b1, w2, b2, x)
            grads_c = _core.mlp_backward(w1, w2, x, hidden, gy)
            grads_n = numpy_backend.mlp_backward(w1, w2, x, hidden, gy)
            for gc, gn in zip(grads_c, grads_n):
                np.testing.assert_allclose(gc, gn, rtol=1e-10, atol=1e-12)

    def test_relu_gate_agrees_at_exact_zero(self):
        # hidden exactly 0 must propagate no gradient in both backends
        w1 = np.array([[1.0]])
        w2 = np.array([[1.0]])
        x = np.array([[0.0]])
        hidden = np.array([[0.0]])
        gy = np.ones((1, 1))
        gc = _core.mlp_backward(w1, w2, x, hidden, gy)
        gn = numpy_backend.mlp_backward(w1, w2, x, hidden, gy)
        assert gc[0][0, 0] == 0.0 == gn[0][0, 0]
        assert gc[1][0] == 0.0 == gn[1][0]


def test_forced_backend_env(tmp_path):
    import subprocess
    import sys

    code = "import pposmooth; print(pposmooth.BACKEND_NAME)"
    for forced, expected in (("numpy", "numpy"),):
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True,
            text=True,
            env={"PPOSMOOTH_BACKEND": forced, "PATH": "/usr/bin:/bin"},
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == expected
