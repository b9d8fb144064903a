import math

import numpy as np
import pytest

from trotterforge.dense import (
    DenseOperator,
    ResourceCapError,
    embed,
    operator_norm,
    string_matrix,
)
from trotterforge.experiments import tfim_chain
from trotterforge.model import (
    Decomposition,
    Interaction,
    assemble,
    chain,
    decompose_even_odd,
    term,
)
from trotterforge.schedule import (
    base_symmetric,
    compose,
    merge_adjacent,
    reverse,
    suzuki_schedule,
)
from trotterforge.simulator import (
    EvolutionPlan,
    conditional_expectation,
    error_norm,
    expm_hermitian,
    heisenberg,
    leakage_profile,
    run_schedule,
)


def random_hermitian(rng, n_sites, sites=None):
    dim = 2**n_sites
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return DenseOperator(sites or tuple(range(n_sites)), (raw + raw.conj().T) / 2)


# ---------------------------------------------------------------------------
# matrix exponentials
# ---------------------------------------------------------------------------

def test_expm_z_quarter_turn():
    H = string_matrix((0,), "Z")
    U = expm_hermitian(H, math.pi / 2)
    assert np.allclose(np.diag(U.matrix), [1j, -1j])
    assert np.allclose(U.matrix - np.diag(np.diag(U.matrix)), 0)


def test_expm_zero_time_is_identity():
    H = random_hermitian(np.random.default_rng(0), 3)
    U = expm_hermitian(H, 0.0)
    assert np.allclose(U.matrix, np.eye(8))


def test_expm_group_property():
    H = random_hermitian(np.random.default_rng(1), 3)
    forward = expm_hermitian(H, 0.73).matrix
    backward = expm_hermitian(H, -0.73).matrix
    assert operator_norm(forward @ backward - np.eye(8)) < 1e-12


def test_expm_rejects_non_hermitian():
    bad = DenseOperator((0,), np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError, match="Hermitian"):
        expm_hermitian(bad, 1.0)


def test_expm_respects_cap(monkeypatch):
    monkeypatch.setenv("TROTTERFORGE_DENSE_CAP", "2")
    H = random_hermitian(np.random.default_rng(2), 3)
    with pytest.raises(ResourceCapError):
        expm_hermitian(H, 1.0)


# ---------------------------------------------------------------------------
# Heisenberg evolution
# ---------------------------------------------------------------------------

def test_heisenberg_commuting_fixed_point():
    H = string_matrix((0, 1), "ZZ")
    O = embed(string_matrix((0,), "Z"), (0, 1))
    out = heisenberg(H, 1.37, O)
    assert operator_norm(out.matrix - O.matrix) < 1e-14


def test_heisenberg_bloch_rotation():
    X = string_matrix((0,), "X")
    H = DenseOperator((0,), X.matrix / 2)
    Z = string_matrix((0,), "Z")
    Y = string_matrix((0,), "Y")
    for t in (0.3, 1.1, -0.7):
        out = heisenberg(H, t, Z)
        want = math.cos(t) * Z.matrix + math.sin(t) * Y.matrix
        assert operator_norm(out.matrix - want) < 1e-13
    # short-time expansion pins the rotation sign: d/dt at 0 is i [H, Z] = Y
    eps = 1e-6
    drift = (heisenberg(H, eps, Z).matrix - Z.matrix) / eps
    assert operator_norm(drift - Y.matrix) < 1e-5


def test_heisenberg_preserves_norm():
    rng = np.random.default_rng(5)
    H = random_hermitian(rng, 3)
    for _ in range(5):
        O = random_hermitian(rng, 3)
        out = heisenberg(H, 0.83, O)
        assert operator_norm(out.matrix) == pytest.approx(
            operator_norm(O.matrix), abs=1e-12
        )


# ---------------------------------------------------------------------------
# schedule execution
# ---------------------------------------------------------------------------

def two_layer_fixture(length=4):
    model = tfim_chain(length, coupling=1.0, field=0.9)
    dec = decompose_even_odd(model.interaction, model.graph)
    region = model.graph.vertices
    obs = embed(model.observable.matrix(), region)
    return model, dec, region, obs


def test_run_schedule_single_part_is_exact():
    g = chain(3)
    phi = Interaction((term(1.0, (0, 1), "ZZ"), term(0.7, (1,), "X")))
    dec = Decomposition(layers=(phi,))
    obs = embed(string_matrix((1,), "Z"), g.vertices)
    sched = base_symmetric(1)
    t, n = 0.9, 5
    approx = run_schedule(dec, sched, t / n, n, obs, g.vertices)
    exact = heisenberg(assemble(phi, g.vertices), t, obs)
    assert error_norm(approx, exact) < 1e-12


def test_base_step_matches_three_factor_product():
    _, dec, region, obs = two_layer_fixture()
    mu = 0.31
    plan = EvolutionPlan(dec, region)
    out = plan.run(base_symmetric(2), mu, 1, obs)
    K1 = assemble(dec.layers[0], region).matrix
    K2 = assemble(dec.layers[1], region).matrix

    def expm(M, t):
        w, v = np.linalg.eigh(M)
        return (v * np.exp(1j * t * w)) @ v.conj().T

    U = expm(K1, mu / 2) @ expm(K2, mu) @ expm(K1, mu / 2)
    want = U @ obs.matrix @ U.conj().T
    assert operator_norm(out.matrix - want) < 1e-12


def test_commuting_layers_make_every_n_exact():
    g = chain(4)
    phi = Interaction((term(1.0, (0, 1), "ZZ"), term(0.8, (2, 3), "ZZ")))
    dec = Decomposition(
        layers=(Interaction((phi.terms[0],)), Interaction((phi.terms[1],))),
        commuting=True,
    )
    obs = embed(string_matrix((1,), "X"), g.vertices)
    exact = heisenberg(assemble(phi, g.vertices), 1.2, obs)
    for n in (1, 3, 8):
        approx = run_schedule(dec, base_symmetric(2), 1.2 / n, n, obs, g.vertices)
        assert error_norm(approx, exact) < 1e-12


def test_run_schedule_rejects_layer_mismatch():
    _, dec, region, obs = two_layer_fixture()
    with pytest.raises(ValueError, match="k="):
        run_schedule(dec, base_symmetric(3), 0.1, 1, obs, region)


def test_even_order_alias_runs_bit_identical():
    _, dec, region, obs = two_layer_fixture()
    plan = EvolutionPlan(dec, region)
    out3 = plan.run(suzuki_schedule(2, 3, 3), 0.2, 2, obs)
    out4 = plan.run(suzuki_schedule(2, 4, 3), 0.2, 2, obs)
    assert np.array_equal(out3.matrix, out4.matrix)


def test_cached_unitaries_are_unitary_and_isometric():
    _, dec, region, obs = two_layer_fixture()
    plan = EvolutionPlan(dec, region)
    sched = suzuki_schedule(2, 5, 3)
    out = plan.run(sched, 0.17, 3, obs)
    for (layer, duration), u in plan._cache.items():
        assert operator_norm(u.conj().T @ u - np.eye(u.shape[0])) < 1e-11
    assert operator_norm(out.matrix) == pytest.approx(
        operator_norm(obs.matrix), abs=1e-11
    )


@pytest.mark.parametrize("m", [1, 3, 5])
def test_time_reversal_roundtrip(m):
    _, dec, region, obs = two_layer_fixture(6)
    sched = suzuki_schedule(2, m, 3)
    roundtrip = compose(reverse(sched), sched)
    out = run_schedule(dec, roundtrip, 0.41, 1, obs, region)
    assert error_norm(out, obs) < 1e-10


def test_single_step_error_order_ratio_stability():
    # one-step error of the order-m schedule scales as mu**(alpha+1);
    # halving mu four times the observed exponent stays near the target
    model, dec, region, obs = two_layer_fixture(4)
    H = assemble(model.interaction, region)
    plan = EvolutionPlan(dec, region)
    for m, alpha in ((1, 2), (3, 4)):
        sched = suzuki_schedule(2, m, 3)
        mus = [0.4 / 2**i for i in range(5)]
        errors = [
            error_norm(heisenberg(H, mu, obs), plan.run(sched, mu, 1, obs))
            for mu in mus
        ]
        slope = np.polyfit(np.log(mus), np.log(errors), 1)[0]
        assert slope >= alpha + 1 - 0.2


# ---------------------------------------------------------------------------
# conditional expectation
# ---------------------------------------------------------------------------

def kraus_expectation(op: DenseOperator, keep):
    """Independent oracle: E_X(A) = 2^{-|traced|} sum_b (I (x) <b|) A (I (x) |b>) (x) I."""
    keep = tuple(sorted(keep))
    traced = [s for s in op.sites if s not in keep]
    if not traced:
        return op.matrix
    n = len(op.sites)
    tensor = op.matrix.reshape((2,) * (2 * n))
    keep_idx = [op.sites.index(s) for s in keep]
    traced_idx = [op.sites.index(s) for s in traced]
    reduced = np.zeros((2 ** len(keep),) * 2, dtype=complex)
    for assignment in np.ndindex(*(2,) * len(traced)):
        index_row = [slice(None)] * n
        index_col = [slice(None)] * n
        for axis, bit in zip(traced_idx, assignment):
            index_row[axis] = bit
            index_col[axis] = bit
        block = tensor[tuple(index_row) + tuple(index_col)]
        reduced += block.reshape((2 ** len(keep),) * 2)
    reduced /= 2 ** len(traced)
    # re-embed and reorder to the original site order
    big = np.kron(reduced, np.eye(2 ** len(traced), dtype=complex))
    perm_sites = keep + tuple(traced)
    axes = [perm_sites.index(s) for s in op.sites]
    t = big.reshape((2,) * (2 * n)).transpose(axes + [n + a for a in axes])
    return t.reshape(2**n, 2**n)


def test_conditional_expectation_fixes_supported_operators():
    op = embed(string_matrix((1,), "X"), (0, 1, 2))
    out = conditional_expectation(op, (0, 1))
    assert np.array_equal(out.matrix, op.matrix)


def test_conditional_expectation_kills_traceless_tail():
    op = string_matrix((0, 1), "ZZ")
    out = conditional_expectation(op, (0,))
    assert operator_norm(out.matrix) == 0.0


def test_conditional_expectation_unital():
    op = DenseOperator((0, 1, 2), np.eye(8, dtype=complex))
    out = conditional_expectation(op, (1,))
    assert np.allclose(out.matrix, np.eye(8))


def test_conditional_expectation_properties_random():
    rng = np.random.default_rng(12)
    for _ in range(8):
        op = random_hermitian(rng, 4)
        keep = (0, 2)
        out = conditional_expectation(op, keep)
        # oracle agreement
        assert operator_norm(out.matrix - kraus_expectation(op, keep)) < 1e-12
        # idempotence
        again = conditional_expectation(out, keep)
        assert operator_norm(again.matrix - out.matrix) < 1e-12
        # contractivity
        assert operator_norm(out.matrix) <= operator_norm(op.matrix) + 1e-12


def test_conditional_expectation_module_property():
    rng = np.random.default_rng(13)
    sites = (0, 1, 2)
    keep = (0, 1)
    for _ in range(5):
        A = random_hermitian(rng, 3, sites)
        B = embed(random_hermitian(rng, 2, keep), sites)
        C = embed(random_hermitian(rng, 2, keep), sites)
        lhs = conditional_expectation(
            DenseOperator(sites, B.matrix @ A.matrix @ C.matrix), keep
        )
        rhs = B.matrix @ conditional_expectation(A, keep).matrix @ C.matrix
        assert operator_norm(lhs.matrix - rhs) < 1e-12


def test_conditional_expectation_validates_sites():
    op = string_matrix((0, 1), "ZZ")
    with pytest.raises(ValueError):
        conditional_expectation(op, (0, 5))


# ---------------------------------------------------------------------------
# leakage profiles and strict locality
# ---------------------------------------------------------------------------

def test_leakage_zero_for_supported_operator():
    g = chain(5)
    op = embed(string_matrix((2,), "Z"), g.vertices)
    profile = leakage_profile(op, {2}, g)
    assert all(value < 1e-14 for _, value in profile)


def test_leakage_profile_shape_and_terminal_zero():
    model, dec, region, obs = two_layer_fixture(6)
    H = assemble(model.interaction, region)
    evolved = heisenberg(H, 1.0, obs)
    profile = leakage_profile(evolved, {3}, model.graph)
    radii = [r for r, _ in profile]
    assert radii == list(range(max(radii) + 1))
    assert profile[-1][1] == 0.0
    assert profile[0][1] > 1e-3  # the evolved operator did spread


def test_strict_locality_of_commuting_layer():
    model, dec, region, obs = two_layer_fixture(8)
    layer = assemble(dec.layers[0], region)  # terms have disjoint supports
    for t in (0.1, 1.0, 10.0):
        evolved = heisenberg(layer, t, obs)
        profile = leakage_profile(evolved, set(model.observable.sites), model.graph)
        # support grows by at most the interaction range (one edge)
        assert all(value < 1e-12 for r, value in profile if r >= 1)


def test_leakage_at_time_zero():
    model, dec, region, obs = two_layer_fixture(6)
    profile = leakage_profile(obs, {3}, model.graph)
    assert all(value < 1e-14 for r, value in profile)


# ---------------------------------------------------------------------------
# error norm
# ---------------------------------------------------------------------------

def test_error_norm_identical_and_diagonal():
    a = string_matrix((0,), "Z")
    assert error_norm(a, a) == 0.0
    d = DenseOperator((0,), np.diag([1.0, -3.0]).astype(complex))
    zero = DenseOperator((0,), np.zeros((2, 2)))
    assert error_norm(d, zero) == pytest.approx(3.0)


def test_error_norm_matches_svd_oracle():
    model, dec, region, obs = two_layer_fixture(6)
    exact = heisenberg(assemble(model.interaction, region), 1.0, obs)
    approx = run_schedule(dec, base_symmetric(2), 1.0 / 8, 8, obs, region)
    value = error_norm(exact, approx)
    svd = float(np.linalg.svd(exact.matrix - approx.matrix, compute_uv=False)[0])
    assert value > 0
    assert value == pytest.approx(svd, abs=1e-10)


def test_error_norm_non_hermitian_fallback():
    rng = np.random.default_rng(21)
    raw_a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    raw_b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    a = DenseOperator((0, 1), raw_a)
    b = DenseOperator((0, 1), raw_b)
    svd = float(np.linalg.svd(raw_a - raw_b, compute_uv=False)[0])
    assert error_norm(a, b) == pytest.approx(svd, rel=1e-12)


def test_error_norm_rejects_site_mismatch():
    with pytest.raises(ValueError):
        error_norm(string_matrix((0,), "Z"), string_matrix((1,), "Z"))
