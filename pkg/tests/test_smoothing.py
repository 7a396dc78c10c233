import warnings

import numpy as np
import pytest

from gvfit.level_graph import GraphError, GuidingSet, ScalarField, build_grid
from gvfit.real_fit import fit_real_gvf
from gvfit.smoothing import (
    SmoothConfig,
    dirichlet_energy,
    multilevel_fit,
    partial_derivatives,
    smooth_constrained,
)


def grid_field(g, fn):
    w, h = g.shape
    yy, xx = np.mgrid[0:h, 0:w]
    return ScalarField(fn(xx, yy).astype(float).ravel())


def random_guiding(rng, g, k, lo=0.0, hi=10.0):
    verts = rng.choice(g.vertex_count, k, replace=False)
    return GuidingSet(tuple(zip(verts.tolist(), rng.uniform(lo, hi, k).tolist())))


def onesided_oracle(u):
    """Forward/backward differences averaged inside, plain at the ends."""
    h, w = u.shape
    dx = np.zeros_like(u)
    dy = np.zeros_like(u)
    for r in range(h):
        for c in range(w):
            if w > 1:
                fwd = u[r, c + 1] - u[r, c] if c < w - 1 else None
                bwd = u[r, c] - u[r, c - 1] if c > 0 else None
                dx[r, c] = (fwd + bwd) / 2 if fwd is not None and bwd is not None else (fwd if bwd is None else bwd)
            if h > 1:
                fwd = u[r + 1, c] - u[r, c] if r < h - 1 else None
                bwd = u[r, c] - u[r - 1, c] if r > 0 else None
                dy[r, c] = (fwd + bwd) / 2 if fwd is not None and bwd is not None else (fwd if bwd is None else bwd)
    return dx, dy


def test_affine_gradient_exact():
    g = build_grid(6, 6)
    grad = partial_derivatives(g, grid_field(g, lambda x, y: 2 * x + 3 * y))
    assert np.all(grad.dx == 2.0)
    assert np.all(grad.dy == 3.0)


def test_constant_gradient_zero():
    g = build_grid(5, 4)
    grad = partial_derivatives(g, grid_field(g, lambda x, y: 0 * x + 7.5))
    assert not grad.dx.any() and not grad.dy.any()


def test_quadratic_interior_exact():
    g = build_grid(9, 3)
    grad = partial_derivatives(g, grid_field(g, lambda x, y: x**2))
    xs = np.arange(1, 8)
    assert np.array_equal(grad.dx[:, 1:-1], np.broadcast_to(2.0 * xs, (3, 7)))


def test_single_cell_gradient():
    g = build_grid(1, 1)
    grad = partial_derivatives(g, ScalarField([4.0]))
    assert grad.dx.tolist() == [[0.0]] and grad.dy.tolist() == [[0.0]]


def test_gradient_rejects_non_grid():
    from gvfit.level_graph import DomainGraph
    g = DomainGraph.from_edges(2, [(0, 1)])
    with pytest.raises(GraphError):
        partial_derivatives(g, ScalarField([0.0, 1.0]))


def test_path_relaxes_to_linear():
    g = build_grid(5, 1)
    j = GuidingSet(((0, 0.0), (4, 4.0)))
    f = ScalarField([0.0, 9.0, -3.0, 0.5, 4.0])
    res = smooth_constrained(g, f, j, SmoothConfig(order=1, iterations=5000, tolerance=1e-12))
    assert np.allclose(res.field.values, [0, 1, 2, 3, 4], atol=1e-6)


def test_harmonic_field_is_fixed_point():
    g = build_grid(6, 5)
    j = GuidingSet(((0, 2.0), (17, -1.0), (29, 4.0)))
    init, _ = fit_real_gvf(g, j)
    harmonic = smooth_constrained(g, init, j, SmoothConfig(iterations=10**5, tolerance=1e-14)).field
    again = smooth_constrained(g, harmonic, j, SmoothConfig(tolerance=1e-8))
    assert again.sweeps == 1
    assert np.abs(again.field.values - harmonic.values).max() < 1e-8
    flat = smooth_constrained(g, ScalarField(np.full(30, 2.0)), GuidingSet(((0, 2.0),)))
    assert np.array_equal(flat.field.values, np.full(30, 2.0))


def test_energy_monotone_10x10():
    g = build_grid(10, 10)
    rng = np.random.default_rng(3)
    j = random_guiding(rng, g, 4)
    init, _ = fit_real_gvf(g, j)
    res = smooth_constrained(g, init, j, SmoothConfig(order=1, iterations=500, tolerance=0.0),
                             record_energy=True)
    e = np.array(res.energies)
    assert len(e) == 501
    assert np.all(np.diff(e) <= 1e-12 * e[0])


def test_guiding_exact_and_max_principle():
    g = build_grid(16, 12)
    rng = np.random.default_rng(4)
    j = random_guiding(rng, g, 7)
    init, _ = fit_real_gvf(g, j)
    res = smooth_constrained(g, init, j, SmoothConfig(order=3, iterations=20000, tolerance=1e-11))
    u = res.field.values
    for v, x in j.entries:
        assert u[v] == x
    assert u.min() >= j.values.min() - 1e-9
    assert u.max() <= j.values.max() + 1e-9


def test_converged_gradient_matches_oracle():
    g = build_grid(12, 9)
    rng = np.random.default_rng(8)
    j = random_guiding(rng, g, 5)
    init, _ = fit_real_gvf(g, j)
    res = smooth_constrained(g, init, j, SmoothConfig(order=1, iterations=20000, tolerance=1e-10))
    grad = partial_derivatives(g, res.field)
    dx, dy = onesided_oracle(res.field.as_grid(g))
    assert np.allclose(grad.dx, dx, rtol=0, atol=1e-12)
    assert np.allclose(grad.dy, dy, rtol=0, atol=1e-12)


def test_order_zero_is_identity():
    g = build_grid(4, 4)
    j = GuidingSet(((0, 1.0), (15, 5.0)))
    init, _ = fit_real_gvf(g, j)
    res = smooth_constrained(g, init, j, SmoothConfig(order=0))
    assert np.array_equal(res.field.values, init.values)
    assert res.sweeps == 0


def test_more_passes_lower_energy():
    g = build_grid(10, 10)
    j = random_guiding(np.random.default_rng(6), g, 5)
    init, _ = fit_real_gvf(g, j)
    e = [dirichlet_energy(smooth_constrained(g, init, j, SmoothConfig(order=k, tolerance=0.0)).field.as_grid(g))
         for k in (0, 1, 2)]
    assert e[2] < e[1] < e[0]


@pytest.mark.parametrize("step", [0.0, -0.1, 0.26, 1.0])
def test_step_bound(step):
    with pytest.raises(ValueError):
        SmoothConfig(step=step)


def test_multilevel_one_level_is_composition():
    g = build_grid(12, 10)
    j = random_guiding(np.random.default_rng(2), g, 6)
    cfg = SmoothConfig(order=2, iterations=50)
    init, _ = fit_real_gvf(g, j)
    direct = smooth_constrained(g, init, j, cfg)
    ml = multilevel_fit(g, j, 1, cfg)
    assert np.array_equal(ml.field.values, direct.field.values)
    assert ml.fine_sweeps == direct.sweeps


def test_multilevel_too_many_levels():
    with pytest.raises(ValueError):
        multilevel_fit(build_grid(7, 16), GuidingSet(((0, 1.0),)), 4)


def test_multilevel_collision_warns_and_keeps_guiding():
    g = build_grid(8, 8)
    j = GuidingSet(((0, 1.0), (1, 5.0), (63, 3.0)))
    with pytest.warns(UserWarning, match="collides"):
        res = multilevel_fit(g, j, 2, SmoothConfig(iterations=200))
    u = res.field.values
    assert (u[0], u[1], u[63]) == (1.0, 5.0, 3.0)


def test_multilevel_matches_single_level():
    g = build_grid(32, 32)
    j = random_guiding(np.random.default_rng(0), g, 10)
    cfg = SmoothConfig(order=1, iterations=10**6, tolerance=1e-10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        one = multilevel_fit(g, j, 1, cfg)
        three = multilevel_fit(g, j, 3, cfg)
    assert np.abs(one.field.values - three.field.values).max() <= 1e-6
    for v, x in j.entries:
        assert three.field.values[v] == x


def test_multilevel_fewer_fine_sweeps_64():
    g = build_grid(64, 64)
    j = random_guiding(np.random.default_rng(0), g, 10)
    cfg = SmoothConfig(order=1, iterations=10**6, tolerance=1e-8)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        one = multilevel_fit(g, j, 1, cfg)
        three = multilevel_fit(g, j, 3, cfg)
    assert three.fine_sweeps < one.fine_sweeps
