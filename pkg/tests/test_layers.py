import itertools

import numpy as np
import pytest

from exchsym.groups import GroupSpec, Permutation, act, enumerate_group
from exchsym.layers import (BipartiteParams, DArrayParams, LayerStack, MatrixLayerParams, SetLayerParams,
                            TrainingDivergedError, VertexEdgeParams, act_bipartite, act_vertex_edge,
                            augmented_layer, bipartite_feature_layer, darray_layer, equivariant_set_layer,
                            evaluate_mse, exch_matrix_layer, invariant_set_layer, linear_set_layer, pool,
                            set_dataset, sgd_train, stack_forward, stack_from_dict, stack_to_dict,
                            tau_equivariant_apply, vertex_edge_layer)
from exchsym.numkit import MlpParams, NoiseSource, ShapeError, mlp_identity, mlp_init, mlp_linear, noise_grid
from exchsym.symtest import check_equivariance_exhaustive, check_invariance_exhaustive
from exchsym.suites import random_set_params, ustat_oracle, variance_kernel


def half_sq(t):
    return 0.5 * (t[..., 0, 0] - t[..., 1, 0]) ** 2


# --- pooling ----------------------------------------------------------------------------------------

def test_ustat_examples():
    assert pool([1.0, 3.0], "ustat", k=2, kernel=half_sq).tolist() == [2.0]
    assert pool([0.0, 2.0, 4.0], "ustat", k=2, kernel=half_sq).tolist() == [4.0]


def test_ustat_equals_sample_variance():
    x = noise_grid(NoiseSource(1), (), 9)
    assert np.isclose(pool(x, "ustat", k=2, kernel=half_sq)[0], np.var(x, ddof=1), rtol=1e-13)


def test_ustat_matches_loop_oracle_bitwise():
    x = noise_grid(NoiseSource(2), (10,), 1)
    assert np.array_equal(pool(x, "ustat", k=2, kernel=variance_kernel),
                          ustat_oracle(x, 2, variance_kernel))


def test_ustat_errors():
    with pytest.raises(ValueError):
        pool([1.0, 2.0], "ustat", k=3, kernel=half_sq)
    with pytest.raises(ValueError):
        pool([1.0, 2.0], "ustat", k=2)
    with pytest.raises(ShapeError):
        pool(np.zeros((0, 1)), "sum")


@pytest.mark.parametrize("pooling,expected", [("sum", 4 * 0.5), ("mean", 0.5), ("max", 0.5),
                                              ("logsumexp", 0.5 + np.log(4.0))])
def test_pool_constant(pooling, expected):
    assert np.isclose(pool(np.full(4, 0.5), pooling)[0], expected)


def test_pool_bitexact_permutation():
    x = noise_grid(NoiseSource(3), (7,), 2) * 1e3
    for perm in itertools.islice(itertools.permutations(range(7)), 200):
        for kind in ("sum", "mean", "logsumexp"):
            assert np.array_equal(pool(x[list(perm)], kind, bitexact=True), pool(x, kind, bitexact=True))


# --- set layers ---------------------------------------------------------------------------------------

def test_invariant_set_examples():
    p = SetLayerParams(phi=mlp_identity(1), rho=mlp_identity(1), pooling="sum")
    assert invariant_set_layer(p, [1.0, 2.0, 3.0]).tolist() == [6.0]
    p = SetLayerParams(phi=mlp_identity(1), rho=mlp_identity(1), pooling="max")
    assert invariant_set_layer(p, [1.0, 5.0, 3.0]).tolist() == [5.0]


def test_linear_equivariant_examples():
    x = [1.0, 2.0, 3.0]
    assert equivariant_set_layer(linear_set_layer(1, 0), x).tolist() == x
    assert equivariant_set_layer(linear_set_layer(2, 1), x).tolist() == [8.0, 10.0, 12.0]
    assert equivariant_set_layer(linear_set_layer(0, 1), x).tolist() == [6.0, 6.0, 6.0]


def test_invariant_set_layer_random():
    root = NoiseSource(4)
    for t, pooling in enumerate(("sum", "mean", "max", "logsumexp", "ustat")):
        p = random_set_params(root.fork(t), "invariant", pooling)
        eta = noise_grid(root.fork(t, 1), (), p.noise_dims)
        x = noise_grid(root.fork(t, 2), (4,), 1)
        r = check_invariance_exhaustive(lambda v: invariant_set_layer(p, v, noise=eta), x, GroupSpec.seq(4))
        assert r.passed, pooling


def test_equivariant_set_layer_copermuted_noise():
    root = NoiseSource(5)
    p = random_set_params(root, "equivariant", "sum")
    eta = noise_grid(root.fork(1), (4,), p.noise_dims)
    x = noise_grid(root.fork(2), (4,), 1)
    r = check_equivariance_exhaustive(lambda v, e: equivariant_set_layer(p, v, noise=e), x, GroupSpec.seq(4),
                                      noise=(eta,))
    assert r.passed
    # without co-permuting the noise the map is not pointwise equivariant
    r = check_equivariance_exhaustive(lambda v: equivariant_set_layer(p, v, noise=eta), x, GroupSpec.seq(4))
    assert not r.passed


def test_set_layer_shape_errors():
    p = SetLayerParams(phi=mlp_identity(2), rho=mlp_identity(2))
    with pytest.raises(ShapeError):
        invariant_set_layer(p, [1.0, 2.0])
    with pytest.raises(ShapeError):
        invariant_set_layer(SetLayerParams(phi=mlp_identity(1), rho=mlp_identity(1)), np.zeros((0, 1)))


# --- matrices -----------------------------------------------------------------------------------------

X = np.array([[1.0, 2.0], [3.0, 4.0]])


def test_matrix_layer_examples():
    assert np.array_equal(exch_matrix_layer(MatrixLayerParams(thetas=(0, 1, 0, 0, 0)), X), X)
    assert exch_matrix_layer(MatrixLayerParams(thetas=(0, 0, 1, 0, 0)), X).tolist() == [[3, 3], [7, 7]]
    assert exch_matrix_layer(MatrixLayerParams(thetas=(0, 0, 0, 0, 1)), X).tolist() == [[10, 10], [10, 10]]


def test_matrix_layer_params_validation():
    with pytest.raises(ValueError):
        MatrixLayerParams()
    with pytest.raises(ShapeError):
        MatrixLayerParams(mlp=mlp_identity(3), noise_dims=0)


def test_matrix_layer_joint_symmetric():
    s = np.array([[0.0, 1.0, 2.0], [1.0, 3.0, 4.0], [2.0, 4.0, 5.0]])
    p = MatrixLayerParams(thetas=(0.1, 1.0, 2.0, -1.0, 0.3), activation="tanh")
    y = exch_matrix_layer(p, s, mode="joint")
    assert np.array_equal(y, y.T)
    r = check_equivariance_exhaustive(lambda v: exch_matrix_layer(p, v, mode="joint"), s, GroupSpec.joint(3))
    assert r.passed


def test_matrix_mlp_layer_equivariant():
    src = NoiseSource(6)
    p = MatrixLayerParams(mlp=mlp_init((6, 5, 1), src), noise_dims=2)
    x = noise_grid(src.fork(1), (3,), 4)
    eta = noise_grid(src.fork(2), (3, 4), 2)
    r = check_equivariance_exhaustive(lambda v, e: exch_matrix_layer(p, v, noise=e), x,
                                      GroupSpec.separate(3, 4), noise=(eta,))
    assert r.passed


def test_darray_examples():
    thetas = (0.5, 1.0, -2.0, 0.25, 0.125)
    x = noise_grid(NoiseSource(7), (3,), 4)
    assert np.array_equal(darray_layer(DArrayParams.from_matrix_thetas(thetas, "tanh"), x),
                          exch_matrix_layer(MatrixLayerParams(thetas=thetas, activation="tanh"), x))
    theta = 0.1
    y = darray_layer(DArrayParams({(): theta}, activation="tanh"), np.ones((2, 2, 2)))
    assert np.array_equal(y, np.full((2, 2, 2), np.tanh(8 * theta)))
    cube = noise_grid(NoiseSource(8), (2, 2), 2)
    assert np.array_equal(darray_layer(DArrayParams({(0, 1, 2): 1.0}), cube), cube)


def test_darray_limits():
    with pytest.raises(ShapeError):
        darray_layer(DArrayParams({(): 1.0}), np.zeros((7, 2)))
    with pytest.raises(ShapeError):
        darray_layer(DArrayParams({(3,): 1.0}), np.zeros((2, 2)))


def test_darray_equivariant():
    p = DArrayParams({(0, 1, 2): 1.0, (0,): 0.5, (1, 2): -0.25, (): 0.1}, 0.2, "tanh")
    x = noise_grid(NoiseSource(9), (2, 2), 2)
    assert check_equivariance_exhaustive(lambda v: darray_layer(p, v), x, GroupSpec.separate(2, 2, 2)).passed


def test_augmented_layer_equivariant():
    src = NoiseSource(10)
    x = noise_grid(src, (2,), 3).round(1)
    spec = GroupSpec.separate(2, 3)
    f = mlp_init((1 + 2 * 4, 4, 1), src.fork(1))
    r = check_equivariance_exhaustive(lambda v: augmented_layer(f, v, spec), x, spec)
    assert r.passed


# --- graphs -------------------------------------------------------------------------------------------

def _sym(src, n):
    a = noise_grid(src, (n,), n)
    return a + a.T


def test_gilmer_style_update():
    # f_e passes X through; M and U linear; messages gated by X_ij > 0
    n = 4
    src = NoiseSource(11)
    xs = _sym(src, n) - 1.0
    xn = noise_grid(src.fork(1), (n,), 1)[:, 0]
    m = np.array([0.5, -1.0, 2.0, 0.0])          # on [X_i, X_j, X_ij, Ye_ij]
    u = np.array([1.5, 0.0, 0.0, 0.75])          # on [X_i, X_ii, Ye_ii, sum]
    p = VertexEdgeParams(f_v=mlp_linear([u], [0.2]), message=mlp_linear([m]), gate=True)
    yn, ye = vertex_edge_layer(p, xn, xs)
    assert np.array_equal(ye, xs)
    for i in range(n):
        msg = sum((xs[i, j] > 0) * (m[0] * xn[i] + m[1] * xn[j] + m[2] * xs[i, j]) for j in range(n))
        assert np.isclose(yn[i], u[0] * xn[i] + u[3] * msg + 0.2, rtol=1e-12)


def test_vertex_zero_graph_constant():
    p = VertexEdgeParams(f_v=mlp_linear([[0.0, 0.0, 0.0, 1.0]], [1.0]))
    yn, _ = vertex_edge_layer(p, [0.3, 0.9, 0.1], np.zeros((3, 3)))
    assert np.all(yn == yn[0])


def test_vertex_edge_n2_hand():
    xn = np.array([2.0, -1.0])
    xs = np.array([[1.0, 3.0], [3.0, 0.5]])
    we = np.array([1.0, 2.0, 3.0, 0.5, -0.5, 0.25, 0.125])   # [X, lo, hi, rlo, rhi, T, V]
    wv = np.array([1.0, 0.5, 2.0, -1.0])                      # [X_i, X_ii, Ye_ii, sum_j Ye_ij]
    p = VertexEdgeParams(f_v=mlp_linear([wv]), f_e=mlp_linear([we], [0.1]))
    yn, ye = vertex_edge_layer(p, xn, xs)
    rows = xs.sum(axis=1)
    want = np.empty((2, 2))
    for i, j in itertools.product(range(2), repeat=2):
        f = [xs[i, j], min(xn[i], xn[j]), max(xn[i], xn[j]), min(rows[i], rows[j]), max(rows[i], rows[j]),
             xs.sum(), xn.sum()]
        want[i, j] = np.dot(we, f) + 0.1
    assert np.allclose(ye, want, rtol=1e-14)
    want_v = [wv[0] * xn[i] + wv[1] * xs[i, i] + wv[2] * want[i, i] + wv[3] * want[i].sum() for i in range(2)]
    assert np.allclose(yn, want_v, rtol=1e-14)


def test_vertex_edge_equivariant():
    src = NoiseSource(12)
    fe = mlp_init((1 + 4 * 1 + 3 * 1, 4, 1), src.fork(0))  # noise + 4 edge + 3 vertex channels
    fv = mlp_init((1 + 1 + 1 + 1 + 1, 4, 1), src.fork(1))
    p = VertexEdgeParams(f_v=fv, f_e=fe, edge_noise_dims=1, vertex_noise_dims=1)
    xs, xn = _sym(src.fork(2), 4), noise_grid(src.fork(3), (4,), 1)[:, 0]
    ee = noise_grid(src.fork(4), (4, 4), 1, symmetric=True)
    ev = noise_grid(src.fork(5), (4,), 1)
    spec = GroupSpec.joint(4)
    for g in enumerate_group(spec):
        gx = act_vertex_edge(g, xn, xs)
        gee = act(g, ee, GroupSpec.joint(4, symmetric=False))
        gev = act(g, ev, GroupSpec.seq(4))
        lhs = vertex_edge_layer(p, *gx, edge_noise=gee, vertex_noise=gev)
        rhs = act_vertex_edge(g, *vertex_edge_layer(p, xn, xs, edge_noise=ee, vertex_noise=ev))
        assert np.allclose(lhs[0], rhs[0], rtol=1e-12) and np.allclose(lhs[1], rhs[1], rtol=1e-12)


def test_vertex_edge_rejects_asymmetric():
    p = VertexEdgeParams(f_v=mlp_linear([[1.0, 0.0, 0.0, 0.0]]))
    with pytest.raises(ValueError):
        vertex_edge_layer(p, [1.0, 2.0], np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_bipartite_reduces_to_matrix_layer():
    thetas = (0.5, 1.0, -0.5, 0.25, 0.125)
    fe = mlp_linear([[thetas[1], thetas[2], thetas[3], thetas[4], 0, 0, 0, 0]], [thetas[0]])
    dummy = mlp_linear([[0.0, 0.0, 0.0]])
    x = noise_grid(NoiseSource(13), (3,), 4)
    _, _, y = bipartite_feature_layer(BipartiteParams(fe, dummy, dummy), np.ones(3), np.ones(4), x)
    assert np.allclose(y, exch_matrix_layer(MatrixLayerParams(thetas=thetas), x), rtol=1e-14)


def test_bipartite_constant():
    fe = mlp_linear([[1, 1, 1, 1, 1, 1, 1, 1]])
    fr = mlp_linear([[1.0, 1.0, 1.0]])
    yr, yc, y = bipartite_feature_layer(BipartiteParams(fe, fr, fr), np.ones(2), np.ones(3), np.ones((2, 3)))
    assert np.all(y == y[0, 0]) and np.all(yr == yr[0]) and np.all(yc == yc[0])


def test_bipartite_2x3_hand():
    x = np.array([[1.0, 2.0, 0.0], [-1.0, 0.5, 3.0]])
    a, b = np.array([0.2, -0.4]), np.array([1.0, 2.0, 3.0])
    we = np.array([1.0, 0.5, -0.25, 0.125, 2.0, -1.0, 0.3, 0.7])
    wr, wc = np.array([1.0, 2.0, 3.0]), np.array([-1.0, 0.5, 0.25])
    p = BipartiteParams(mlp_linear([we], [0.05]), mlp_linear([wr]), mlp_linear([wc]))
    yr, yc, y = bipartite_feature_layer(p, a, b, x)
    r, c, t = x.sum(1), x.sum(0), x.sum()
    want = np.array([[np.dot(we, [x[i, j], r[i], c[j], t, a[i], b[j], a.sum(), b.sum()]) + 0.05
                      for j in range(3)] for i in range(2)])
    assert np.allclose(y, want, rtol=1e-14)
    assert np.allclose(yr, [np.dot(wr, [a[i], r[i], want[i].sum()]) for i in range(2)], rtol=1e-14)
    assert np.allclose(yc, [np.dot(wc, [b[j], c[j], want[:, j].sum()]) for j in range(3)], rtol=1e-14)


def test_bipartite_equivariant():
    src = NoiseSource(14)
    p = BipartiteParams(mlp_init((8, 4, 1), src.fork(0)), mlp_init((3, 3, 1), src.fork(1)),
                        mlp_init((3, 3, 1), src.fork(2)))
    x = noise_grid(src.fork(3), (3,), 4)
    a, b = noise_grid(src.fork(4), (3,), 1)[:, 0], noise_grid(src.fork(5), (4,), 1)[:, 0]
    spec = GroupSpec.separate(3, 4)
    for g in enumerate_group(spec):
        lhs = bipartite_feature_layer(p, *act_bipartite(g, a, b, x))
        rhs = act_bipartite(g, *bipartite_feature_layer(p, a, b, x))
        for u, v in zip(lhs, rhs):
            assert np.allclose(u, v, rtol=1e-12)


# --- tau ----------------------------------------------------------------------------------------------

def test_tau_identity_and_reverse():
    x = np.array([3.0, 1.0, 2.0])
    assert tau_equivariant_apply(mlp_identity(3), x).y.tolist() == x.tolist()
    rev = mlp_linear(np.eye(3)[::-1])
    res = tau_equivariant_apply(rev, x)
    # rep = (1, 2, 3) so b(rep) = (3, 2, 1), moved back by tau
    assert res.y.tolist() == act(res.tau, np.array([3.0, 2.0, 1.0]), GroupSpec.seq(3)).tolist()
    assert res.y.tolist() == [1.0, 3.0, 2.0]
    assert res.warning is None


def test_tau_ties_flagged():
    assert tau_equivariant_apply(mlp_identity(3), [1.0, 1.0, 2.0]).ties


def test_tau_exact_equivariance():
    src = NoiseSource(15)
    b = mlp_init((2 + 4, 6, 4), src)
    eta = noise_grid(src.fork(1), (), 2)
    x = noise_grid(src.fork(2), (), 4)
    spec = GroupSpec.seq(4)
    for g in enumerate_group(spec):
        lhs = tau_equivariant_apply(b, act(g, x, spec), noise=eta, noise_dims=2).y
        rhs = act(g, tau_equivariant_apply(b, x, noise=eta, noise_dims=2).y, spec)
        assert np.array_equal(lhs, rhs)


# --- stacks and training ------------------------------------------------------------------------------

def test_stack_identity():
    x = np.array([0.5, -1.0, 2.0])
    assert stack_forward(LayerStack([linear_set_layer(1, 0)]), x).tolist() == x.tolist()


def test_stack_two_linear_equivariant():
    s = LayerStack([linear_set_layer(2, -1), linear_set_layer(0.5, 0.25)])
    x = np.array([0.3, 1.7, -0.2])
    assert check_equivariance_exhaustive(lambda v: stack_forward(s, v), x, GroupSpec.seq(3)).passed
    # composite of a I + b J twice
    want = 0.5 * (2 * x - x.sum()) + 0.25 * (2 * x - x.sum()).sum()
    assert np.allclose(stack_forward(s, x), want, rtol=1e-14)


def test_stack_equivariant_then_invariant():
    s = LayerStack([linear_set_layer(2, 1), SetLayerParams(phi=mlp_identity(1), rho=mlp_identity(1))])
    x = np.array([1.0, 2.0, 3.0])
    assert stack_forward(s, x).tolist() == [30.0]
    assert check_invariance_exhaustive(lambda v: stack_forward(s, v), x, GroupSpec.seq(3)).passed


def test_stack_invariant_must_be_last():
    with pytest.raises(ValueError):
        LayerStack([SetLayerParams(phi=mlp_identity(1), rho=mlp_identity(1)), linear_set_layer(1, 0)])


def test_stack_roundtrip():
    root = NoiseSource(16)
    s = LayerStack([random_set_params(root.fork(0), "equivariant", "sum", noise_dims=1),
                    random_set_params(root.fork(1), "invariant", "mean", noise_dims=1)])
    s2 = stack_from_dict(stack_to_dict(s))
    x = noise_grid(root.fork(2), (5,), 1)
    assert np.array_equal(stack_forward(s, x, src=root.fork(3)), stack_forward(s2, x, src=root.fork(3)))


def _small_stack(seed):
    src = NoiseSource(seed)
    return LayerStack([SetLayerParams(phi=mlp_init((1, 8, 8), src.fork(0), "tanh", "tanh"),
                                      rho=mlp_init((8, 8, 1), src.fork(1)), pooling="sum")])


def test_train_zero_epochs_and_zero_lr():
    x, y = set_dataset("sum", 200, 4, NoiseSource(1))
    s = _small_stack(2)
    r0 = sgd_train(s, x, y, epochs=0, lr=0.1, seed=3)
    assert len(r0.loss_trace) == 1
    assert np.array_equal(r0.stack.layers[0].phi.flat(), s.layers[0].phi.flat())
    r = sgd_train(s, x, y, epochs=3, lr=0.0, seed=3)
    assert len(set(r.loss_trace)) == 1
    assert np.array_equal(r.stack.layers[0].rho.flat(), s.layers[0].rho.flat())


def test_train_deterministic_and_learns():
    x, y = set_dataset("sum", 2000, 5, NoiseSource(1))
    a = sgd_train(_small_stack(2), x, y, epochs=5, lr=0.02, seed=4)
    b = sgd_train(_small_stack(2), x, y, epochs=5, lr=0.02, seed=4)
    assert a.loss_trace == b.loss_trace
    assert a.final_loss < 0.1 * a.loss_trace[0]


def test_train_divergence_raises():
    x, y = set_dataset("sum", 64, 4, NoiseSource(1))
    with pytest.raises(TrainingDivergedError), np.errstate(all="ignore"):
        sgd_train(_small_stack(2), x, y * 1e200, epochs=2, lr=1e10, seed=0)


def test_variance_ustat_training():
    x, y = set_dataset("variance", 4000, 5, NoiseSource(21))
    xt, yt = set_dataset("variance", 1000, 5, NoiseSource(22))
    phi = mlp_init((2, 16, 1), NoiseSource(23), "tanh", "identity")
    s = LayerStack([SetLayerParams(phi=phi, pooling="ustat", k=2)])
    r = sgd_train(s, x, y, epochs=10, lr=0.05, seed=24)
    assert evaluate_mse(r.stack, xt, yt) < 1e-3


def test_mlp_params_type():
    assert isinstance(mlp_identity(2), MlpParams)
    assert Permutation.identity(2).is_identity()
