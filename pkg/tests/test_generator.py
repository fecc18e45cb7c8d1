import numpy as np
import pytest

import helpers
from contmeas import (Constant, DpoParams, FieldProfile, GeneratorContext,
                      TestFunction, TruncatedSpace, ValidationError, ZERO,
                      apply_generator, channel_operator, dpo_laser_field,
                      dpo_model, dpo_observables, drift_operator,
                      generator_at, kernel_coefficients, scalar_rate)
from contmeas.generator import context_is_piecewise_static


def build_setup(seed=0, n_max=4, m_max=3, horizon=2.0):
    rng = np.random.default_rng(seed)
    params = helpers.random_dpo_params(rng)
    model = dpo_model(params, TruncatedSpace(n_max, m_max))
    obs = dpo_observables(params, horizon)
    field = dpo_laser_field(params, horizon)
    return rng, params, model, obs, field


def random_kappa(rng, horizon, m=3):
    breaks = np.concatenate([[0.0], np.sort(rng.uniform(0.1, horizon - 0.1, 2)),
                             [horizon]])
    return TestFunction(breaks, rng.uniform(-1.5, 1.5, (3, m)))


def test_slow_assembly_agrees_with_weights():
    """Brute-force operator assembly from the drift/channel formulas must
    match the weight-based fast path entrywise."""
    rng, params, model, obs, field = build_setup(seed=2)
    kappa = random_kappa(rng, 2.0)
    ctx = GeneratorContext(model=model, observables=obs, field=field,
                           kappa=kappa)
    for t in (0.3, 0.9, 1.7):
        k = kappa.value(t)
        lam = field.value(t)
        s = obs.kernel_diagonal(k)
        r_p = obs.r_vector(k, t)
        r_m = obs.r_vector(-k, t)
        K_l = drift_operator(model, lam, r_m).to_dense()
        K_r = drift_operator(model, lam, r_p).to_dense()
        B = [channel_operator(model, i, lam).to_dense() for i in range(8)]
        rate = scalar_rate(obs, k, t)
        tau = helpers.random_hermitian(model.space.dim, rng)
        slow = K_l @ tau + tau @ K_r.conj().T + rate * tau
        for i in range(8):
            slow += s[i] * (B[i] @ tau @ B[i].conj().T)
        fast = apply_generator(ctx, t, tau)
        assert np.max(np.abs(slow - fast)) < 1e-12


def test_adjoint_is_trace_dual():
    rng, params, model, obs, field = build_setup(seed=5)
    kappa = random_kappa(rng, 2.0)
    ctx = GeneratorContext(model=model, observables=obs, field=field,
                           kappa=kappa)
    g = generator_at(ctx, 0.77)
    dim = model.space.dim
    for _ in range(5):
        tau = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        X = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        lhs = np.trace(X @ g.apply(tau))
        rhs = np.trace(g.apply_adjoint(X) @ tau)
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_trace_annihilated_without_test_function():
    # with kappa = 0 the generator is trace-free for any field
    rng, params, model, obs, field = build_setup(seed=7)
    ctx = GeneratorContext(model=model, observables=obs, field=field,
                           kappa=TestFunction.zero(3))
    for _ in range(5):
        rho = helpers.random_density(model.space.dim, rng)
        # restrict support to the interior so the cutoff plays no role
        sp = model.space
        mask = np.zeros(sp.dim, dtype=bool)
        for n in range(sp.n_max - 1):
            for m in range(sp.m_max - 1):
                mask[sp.index(n, m)] = True
        rho[~mask, :] = 0.0
        rho[:, ~mask] = 0.0
        rho = rho / np.trace(rho)
        out = apply_generator(ctx, rng.uniform(0, 1.9), rho)
        assert abs(np.trace(out)) < 1e-12


def test_hermiticity_preserved_without_test_function():
    rng, params, model, obs, field = build_setup(seed=9)
    ctx = GeneratorContext(model=model, observables=obs, field=field,
                           kappa=TestFunction.zero(3))
    rho = helpers.random_hermitian(model.space.dim, rng)
    out = apply_generator(ctx, 0.4, rho)
    assert np.max(np.abs(out - out.conj().T)) < 1e-12


def test_generator_matches_master_equation():
    # k = 0 plus laser field realizes the driven master equation
    rng = np.random.default_rng(13)
    n_max, m_max = 6, 4
    params = helpers.random_dpo_params(rng, omega_c=1.0)
    model = dpo_model(params, TruncatedSpace(n_max, m_max))
    obs = dpo_observables(params, 3.0)
    field = dpo_laser_field(params, 3.0)
    ctx = GeneratorContext(model=model, observables=obs, field=field,
                           kappa=TestFunction.zero(3))
    for _ in range(5):
        rho = helpers.random_hermitian(model.space.dim, rng)
        t = rng.uniform(0, 2.9)
        lhs = apply_generator(ctx, t, rho)
        rhs = helpers.master_equation_rhs(params, n_max, m_max, t, rho)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_kernel_coefficient_symmetry():
    obs = dpo_observables(DpoParams.from_splittings(
        omega_c=1.1, g=0.3, kappa=0.4, kappa_p=0.9, theta3=0.2,
        lambda_drive=0.05), horizon=2.0)
    rng = np.random.default_rng(17)
    for _ in range(200):
        kappa = rng.uniform(-3, 3, 3)
        t = rng.uniform(0, 2.0)
        G_plus = kernel_coefficients(obs, kappa, t)
        G_minus = kernel_coefficients(obs, -kappa, t)
        assert np.max(np.abs(np.conj(G_minus) - G_plus.T)) < 1e-12


def test_kernel_coefficient_layout():
    obs = dpo_observables(DpoParams.from_splittings(
        omega_c=1.0, g=0.3, kappa=0.4, kappa_p=0.9), horizon=1.0)
    kappa = np.array([0.5, -0.2, 0.8])
    t = 0.3
    G = kernel_coefficients(obs, kappa, t)
    s = obs.kernel_diagonal(kappa)
    r = obs.r_vector(kappa, t)
    assert np.allclose(np.diag(G)[1:], s - 1.0)
    assert np.allclose(G[1:, 0], r)
    assert np.allclose(G[0, 1:], -np.conj(r) * s)
    assert G[0, 0] == pytest.approx(scalar_rate(obs, kappa, t))


def test_context_validation():
    rng, params, model, obs, field = build_setup()
    with pytest.raises(ValidationError):
        GeneratorContext(model=model, observables=obs, field=field,
                         kappa=TestFunction.zero(2))
    with pytest.raises(ValidationError):
        GeneratorContext(model=model, observables=obs,
                         field=FieldProfile((ZERO,) * 3, 1.0),
                         kappa=TestFunction.zero(3))


def test_context_breakpoints_and_shift():
    rng, params, model, obs, field = build_setup(horizon=2.0)
    kappa = TestFunction([0.0, 0.5, 1.5], [[0.1, 0, 0], [0, 0.2, 0]])
    ctx = GeneratorContext(model=model, observables=obs, field=field,
                           kappa=kappa)
    assert set(ctx.breakpoints(1.8)) == {0.5, 1.5}
    moved = ctx.shifted(0.5)
    tau = np.eye(model.space.dim, dtype=complex)
    a = apply_generator(ctx, 1.0, tau)
    b = apply_generator(moved, 0.5, tau)
    assert np.max(np.abs(a - b)) < 1e-12


def test_static_detection():
    rng, params, model, obs, field = build_setup()
    ctx = GeneratorContext(model=model, observables=obs, field=field,
                           kappa=TestFunction.zero(3))
    assert not context_is_piecewise_static(ctx)   # harmonic h and field
    from contmeas import trivial_model, ObservableSpec
    m = trivial_model(2)
    obs2 = ObservableSpec.counting_only(2, 1.0, np.array([[1.0, 0.0]]))
    f2 = FieldProfile((Constant(1.0), ZERO), 1.0)
    ctx2 = GeneratorContext(model=m, observables=obs2, field=f2,
                            kappa=TestFunction.zero(1))
    assert context_is_piecewise_static(ctx2)
