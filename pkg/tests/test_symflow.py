import math

import numpy as np
import pytest

from emraman import resonance as rs
from emraman import symflow as sf
from emraman.spectral import PlasmaParams

EPS = 1e-4
XI14_MINUS = -4.793367316158819
XI12_PLUS = 1.045985677202552


@pytest.fixture
def p3():
    return PlasmaParams(theta_e=0.1, k=3.0)


def test_envelope_parse():
    assert sf.EnvelopeSpec.parse("const:2.5") == sf.EnvelopeSpec("const", 2.5)
    assert sf.EnvelopeSpec.parse("gauss:1,3") == sf.EnvelopeSpec("gauss", 1.0, 3.0)
    assert sf.EnvelopeSpec.parse("gauss") == sf.EnvelopeSpec("gauss", 1.0, 2.0)
    with pytest.raises(ValueError):
        sf.EnvelopeSpec.parse("box:1")
    g = sf.EnvelopeSpec("gauss", 2.0, 1.0)
    assert g(np.array([0.0, 1.0])) == pytest.approx([2.0, 2.0 / math.e])
    assert math.isinf(sf.EnvelopeSpec().support_radius())


def test_grid_validation():
    with pytest.raises(sf.FlowError):
        sf.FlowGrid(n_points=100)
    with pytest.raises(sf.FlowError):
        sf.FlowGrid(dim_y=3)
    with pytest.raises(sf.FlowError):
        sf.FlowGrid(epsilon=0.0)


def test_resonant_ode_oracle_examples():
    M = sf.resonant_ode_oracle(1.0, 1.0, 1.0, 2.0)
    assert M[0, 0] == pytest.approx(math.cosh(2.0)) and M[1, 1] == pytest.approx(3.7622, abs=1e-4)
    for t in np.linspace(0, 50, 101):
        assert np.abs(sf.resonant_ode_oracle(1.0, -1.0, 1.0, t)).max() <= 1.0 + 1e-12
        assert np.allclose(sf.resonant_ode_oracle(0.0, 0.0, 1e-4, t), np.eye(2))


def test_estimate_growth_on_oracle():
    g0 = 1.6720
    times = np.linspace(0, 10 * math.sqrt(EPS), 201)
    fit = sf.estimate_growth(sf.trajectory_from_oracle(g0, g0, EPS, times))
    assert fit.rate == pytest.approx(g0, rel=0.01)
    assert fit.reliable
    rot = sf.estimate_growth(sf.trajectory_from_oracle(g0, -g0, EPS, times))
    assert abs(rot.rate) <= 0.01 * g0
    assert not rot.reliable


def test_estimate_growth_window_too_small():
    traj = sf.trajectory_from_oracle(1.0, 1.0, EPS, np.linspace(0, 0.01, 5))
    with pytest.raises(ValueError):
        sf.estimate_growth(traj)


def test_pair_flow_matches_cosh():
    eps = 1e-4
    traj = sf.run_flow(sf.manual_pair_spec(1.672, 1.672), sf.FlowGrid(n_points=16, epsilon=eps), 5 * math.sqrt(eps))
    for S, t in zip(traj.snapshots, traj.times):
        assert S[0, 0, 0] == pytest.approx(math.cosh(1.672 * t / math.sqrt(eps)), rel=0.02)


def test_pair_14_flow_rate(p3):
    spec = sf.pair_block_spec(p3, (1, 4), XI14_MINUS)
    traj = sf.run_flow(spec, sf.FlowGrid(n_points=16, epsilon=EPS), 5 * math.sqrt(EPS), keep_snapshots=False)
    assert sf.estimate_growth(traj).rate == pytest.approx(0.15882755965403816, rel=1e-6)


def test_stable_pair_has_no_growth(p3):
    spec = sf.pair_block_spec(p3, (1, 2), XI12_PLUS)
    assert spec.couplings[0].coefficient.real == pytest.approx(0.025548437776697, rel=1e-9)
    traj = sf.run_flow(spec, sf.FlowGrid(n_points=64, epsilon=EPS), 5 * math.sqrt(EPS))
    assert traj.l2_norms.max() <= traj.l2_norms[0] * (1 + 1e-6)


def _gauss_datum(grid, n, centre=0.0):
    y = grid.coords()[0]
    return np.stack([np.exp(-((y - centre - i) ** 2)) * (1 + 0.5j * i) for i in range(n)]).astype(complex)


def test_zero_coupling_is_transport(p3):
    xi, _ = sf.off_axis_resonance(p3, (1, 4), 1.0)
    spec = sf.pair_block_spec(p3, (1, 4), xi, eta=(1.0, 0.0)).without_coupling()
    grid = sf.FlowGrid(n_points=256, length=40.0, epsilon=EPS)
    d0 = _gauss_datum(grid, 2)
    t = 0.2
    traj = sf.run_flow(spec, grid, t, datum=d0, n_snapshots=5)
    exact = sf.far_field_oracle(spec, grid, t, d0)
    assert np.abs(traj.snapshots[-1] - exact).max() <= 1e-8
    # modulus equals the analytically transported datum
    y = grid.coords()[0]
    for i in range(2):
        shift = spec.dmu[i][0] * t / math.sqrt(EPS)
        ys = (y - shift + grid.length / 2) % grid.length - grid.length / 2
        want = np.abs(np.exp(-((ys - i) ** 2)) * (1 + 0.5j * i))
        assert np.abs(np.abs(traj.snapshots[-1][i]) - want).max() <= 1e-8


def test_time_reversibility(p3):
    xi, _ = sf.off_axis_resonance(p3, (1, 4), 1.0)
    spec = sf.pair_block_spec(p3, (1, 4), xi, eta=(1.0, 0.0), envelope=sf.EnvelopeSpec("gauss", 1.0, 2.0))
    grid = sf.FlowGrid(n_points=128, length=40.0, epsilon=EPS)
    d0 = _gauss_datum(grid, 2)
    t = 0.05
    fwd = sf.run_flow(spec, grid, t, datum=d0, n_snapshots=3)
    back = sf.run_flow(spec, grid, -t, datum=fwd.snapshots[-1], n_snapshots=3, t_start=t)
    assert np.abs(back.snapshots[-1] - d0).max() <= 1e-6


def test_constant_source_response():
    mu, eps, c = 2.0, 1e-3, 1.5 + 0.5j
    for t in (1e-4, 1e-3, 0.1, 1.0):
        val = sf.constant_source_response(mu, eps, t, c)
        assert abs(val) <= abs(c) * min(t, 2 * eps / mu) + 1e-15
    assert sf.constant_source_response(0.0, eps, 0.3, c) == c * 0.3


def test_far_field_oracle_with_source():
    spec = sf.BlockSpec(labels=(3,), mu=(0.0,), dmu=((0.0,),))
    grid = sf.FlowGrid(n_points=16, epsilon=EPS)
    d0 = np.full((1, 16), 2.0 + 0j)
    out = sf.far_field_oracle(spec, grid, 0.4, d0, source=[lambda s, y: np.full_like(y, 0.5)])
    assert np.allclose(out, 2.0 + 0.4 * 0.5)
    spec = sf.BlockSpec(labels=(1,), mu=(2.0,), dmu=((0.0,),))
    out = sf.far_field_oracle(spec, grid, 0.01, np.zeros((1, 16), complex), source=[lambda s, y: np.full_like(y, 1.0)])
    assert np.allclose(out[0], sf.constant_source_response(2.0, EPS, 0.01, 1.0), atol=1e-12)
    with pytest.raises(ValueError):
        sf.far_field_oracle(sf.manual_pair_spec(1, 1), grid, 0.1, np.zeros((2, 16)))


def test_run_flow_errors(p3):
    xi, _ = sf.off_axis_resonance(p3, (1, 4), 1.0)
    spec = sf.pair_block_spec(p3, (1, 4), xi, eta=(1.0, 0.0))
    grid = sf.FlowGrid(n_points=128, epsilon=EPS)
    with pytest.raises(sf.FlowError):
        sf.run_flow(spec, grid, 0.01, dt=10 * sf.cfl_dt(spec, grid))
    wide = sf.pair_block_spec(p3, (1, 4), xi, eta=(1.0, 0.0), envelope=sf.EnvelopeSpec("gauss", 1.0, 10.0))
    with pytest.raises(sf.FlowError):
        sf.run_flow(wide, grid, 0.01)
    with pytest.raises(sf.FlowError):
        sf.run_flow(spec, sf.FlowGrid(n_points=16, dim_y=2, epsilon=EPS), 0.01)


def test_off_axis_resonance_is_resonant(p3):
    xi, nu = sf.off_axis_resonance(p3, (1, 4), 1.0)
    assert abs(rs.phase(p3, (1, 4), xi, 1.0)) < 1e-12
    assert np.linalg.norm(nu) > 0.1
    with pytest.raises(sf.FlowError):
        sf.off_axis_resonance(p3, (1, 5), 1.0)
    assert sf.backward_root(p3) == pytest.approx(XI14_MINUS, abs=1e-10)


def test_gaussian_envelope_rate_increases_with_width(p3):
    xi, _ = sf.off_axis_resonance(p3, (1, 4), 1.0)
    grid = sf.FlowGrid(n_points=128, length=40.0, epsilon=EPS)
    t_final = 5 * math.sqrt(EPS) * abs(math.log(EPS))
    rates = []
    for w in (0.5, 1.0, 2.0):
        spec = sf.pair_block_spec(p3, (1, 4), xi, eta=(1.0, 0.0), envelope=sf.EnvelopeSpec("gauss", 1.0, w))
        rates.append(sf.estimate_growth(sf.run_flow(spec, grid, t_final, keep_snapshots=False)).rate)
    assert rates[0] < rates[1] < rates[2]
    c = spec.couplings
    local = abs(np.sqrt(complex(c[0].coefficient * c[1].coefficient)))
    assert rates[-1] <= local


def test_triplet_on_slow_circle_is_uncoupled(p3):
    r = rs.slow_circle_radius(p3)
    spec = sf.triplet_block_spec(p3, (2, 3, 4), 0.0, (r, 0.0))
    assert spec.kind == "triplet" and spec.couplings == []
    assert spec.size == 3


@pytest.mark.parametrize(
    "args,want",
    [
        ((0.5, (0.0, 0.0), 1.0, 1.0, 1e-6, (1.0, 0.0)), "hyperbolic"),
        ((0.0, (0.0, 0.0), 1.0, 1.0, 1e-4, (1.0, 0.0)), "elliptic"),
        ((0.0, (3.0, 0.0), 1.0, 1.0, 1e-4, (1.0, 0.0)), "hyperbolic"),
        ((0.0, (2.0, 0.0), 1.0, 1.0, 1e-4, (1.0, 0.0)), "marginal"),
    ],
)
def test_classify_delta_m(args, want):
    assert sf.classify_delta_m(*args) == want
