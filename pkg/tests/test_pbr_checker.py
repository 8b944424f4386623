import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ontolab.ontic_models import (
    EpistemicDensity,
    OnticSpace,
    ResponseFunction,
    overlap_mass,
    predict,
    support,
)
from ontolab.pbr_checker import (
    InapplicableError,
    IndeterminateError,
    escape_model,
    feasibility_lp,
    forced_zeros,
    labeling_assignment,
    model_from_solution,
    poor_mans_check,
    psi_dependent_escape,
    random_density_pair,
    reproduction_error,
    verify_certificate,
)
from ontolab.pbr_scenario import PREPARATION_LABELS

SP3 = OnticSpace.grid(3)
HALF_LEFT = EpistemicDensity(SP3, [0.5, 0.5, 0.0])
HALF_RIGHT = EpistemicDensity(SP3, [0.0, 0.5, 0.5])


def test_forced_zeros_disjoint(pbr_stats):
    rep = forced_zeros(EpistemicDensity.point_mass(SP3, "l0"), EpistemicDensity.point_mass(SP3, "l2"), pbr_stats)
    assert rep.simultaneous_set == frozenset()
    assert not rep.contradiction and rep.witness is None


def test_forced_zeros_identical_point_masses(pbr_stats):
    p = EpistemicDensity.point_mass(SP3, "l1")
    rep = forced_zeros(p, p, pbr_stats)
    assert rep.contradiction and rep.witness == ("l1", "l1")


def test_forced_zeros_partial_overlap(pbr_stats):
    rep = forced_zeros(HALF_LEFT, HALF_RIGHT, pbr_stats)
    # hand enumeration: supports {l0,l1} and {l1,l2} meet only at l1
    assert rep.simultaneous_set == frozenset({("l1", "l1")})
    assert rep.contradiction
    assert rep.zero_sets[0] == {("l0", "l0"), ("l0", "l1"), ("l1", "l0"), ("l1", "l1")}
    assert rep.zero_sets[1] == {(a, b) for a in ("l0", "l1") for b in ("l1", "l2")}


def test_forced_zeros_snaps_float_dust(pbr_stats):
    noisy = pbr_stats.copy()
    noisy[0, 0, 0] = 3e-13
    assert forced_zeros(HALF_LEFT, HALF_RIGHT, noisy).contradiction


def test_forced_zeros_inapplicable_without_zeros(pbr_stats):
    bad = pbr_stats.copy()
    bad[:, 0, 0] = 0.25
    with pytest.raises(InapplicableError):
        forced_zeros(HALF_LEFT, HALF_RIGHT, bad)


def test_lp_overlap_is_infeasible_with_certificate(pbr_stats):
    res = feasibility_lp(HALF_LEFT, HALF_RIGHT, pbr_stats)
    assert res.status == "infeasible"
    assert res.certificate_gap > 1e-9
    assert verify_certificate(HALF_LEFT, HALF_RIGHT, pbr_stats, res.certificate)


def test_lp_disjoint_point_masses_matches_labeling_oracle(pbr_stats):
    space = OnticSpace.grid(2)
    r1 = EpistemicDensity.point_mass(space, "l0")
    r2 = EpistemicDensity.point_mass(space, "l1")
    res = feasibility_lp(r1, r2, pbr_stats)
    assert res.feasible
    lp_model = model_from_solution(r1, r2, res.solution)
    oracle = model_from_solution(r1, r2, labeling_assignment(r1, r2, pbr_stats))
    for j in PREPARATION_LABELS:
        for k in PREPARATION_LABELS:
            for i in range(4):
                assert abs(predict(lp_model, (j, k), i) - predict(oracle, (j, k), i)) < 1e-9
    assert reproduction_error(oracle, pbr_stats) == 0.0


def test_lp_single_preparation_uniform_is_feasible(pbr_stats):
    u = EpistemicDensity.uniform(OnticSpace.grid(2))
    res = feasibility_lp(u, u, {(0, 1): pbr_stats[:, 0, 1]})
    assert res.feasible
    # the constant response is one valid answer; the LP answer must reproduce too
    m = model_from_solution(u, u, res.solution)
    for i in range(4):
        assert abs(predict(m, ("psi1", "psi2"), i) - pbr_stats[i, 0, 1]) < 1e-9


def test_lp_iteration_cap_is_indeterminate(pbr_stats):
    with pytest.raises(IndeterminateError):
        feasibility_lp(HALF_LEFT, HALF_RIGHT, pbr_stats, max_iter=1)


@settings(max_examples=40)
@given(st.sampled_from([2, 3, 4, 6]), st.booleans(), st.integers(0, 2**31))
def test_theorem_pattern_and_forcing_agreement(pbr_stats, L, overlapping, seed):
    rng = np.random.default_rng(seed)
    r1, r2 = random_density_pair(OnticSpace.grid(L), rng, overlapping)
    assert (overlap_mass(r1, r2) > 0) == overlapping
    res = feasibility_lp(r1, r2, pbr_stats)
    rep = forced_zeros(r1, r2, pbr_stats)
    assert res.feasible == (not overlapping)
    assert rep.contradiction == (res.status == "infeasible")
    if res.feasible:
        assert reproduction_error(model_from_solution(r1, r2, res.solution), pbr_stats) <= 1e-9


def test_random_density_pair_supports(rng):
    space = OnticSpace.grid(8)
    for _ in range(20):
        a, b = random_density_pair(space, rng, overlapping=False)
        assert support(a).isdisjoint(support(b))
        a, b = random_density_pair(space, rng, overlapping=True)
        assert support(a) & support(b)


def test_psi_dependent_escape(pbr_stats):
    resp = psi_dependent_escape(pbr_stats, SP3)
    for t in resp.tables.values():
        np.testing.assert_allclose(t.sum(axis=0), 1.0, atol=1e-12)
    exact = escape_model(pbr_stats)
    assert reproduction_error(exact, pbr_stats) == 0.0
    rho = EpistemicDensity(SP3, [0.2, 0.3, 0.5])
    m = escape_model(pbr_stats, rho)
    assert m.kind == "psi_dependent"
    assert overlap_mass(m.density("psi1"), m.density("psi2")) == 1.0
    assert reproduction_error(m, pbr_stats) < 1e-15
    # the same densities admit no psi-independent response
    assert not feasibility_lp(rho, rho, pbr_stats).feasible


def single_response(table):
    return ResponseFunction((SP3,), np.asarray(table, dtype=float))


def test_poor_mans_inclusion_contradiction():
    rho_psi = EpistemicDensity(SP3, [0.5, 0.5, 0.0])
    rho_psi1 = EpistemicDensity(SP3, [0.0, 1.0, 0.0])
    # outcome 0 is x0; response vanishes on supp(rho_psi)
    resp = single_response([[0, 0, 1], [1, 1, 0]])
    rep = poor_mans_check(rho_psi, rho_psi1, resp, 0, 0.0, 0.5)
    assert rep.inclusion_holds and rep.contradiction and rep.inclusion_refuted
    assert rep.predicted_p_psi1 == 0.0 and rep.witness is None


def test_poor_mans_disjoint_returns_witness():
    rho_psi = EpistemicDensity.point_mass(SP3, "l0")
    rho_psi1 = EpistemicDensity.point_mass(SP3, "l2")
    resp = single_response([[0, 0.5, 0.5], [1, 0.5, 0.5]])
    rep = poor_mans_check(rho_psi, rho_psi1, resp, 0, 0.0, 0.5)
    assert not rep.contradiction and not rep.inclusion_holds
    assert rep.witness == "l2"
    assert rep.predicted_p_psi1 == pytest.approx(0.5)


def test_poor_mans_bound_by_outside_mass():
    rho_psi = EpistemicDensity(SP3, [0.5, 0.5, 0.0])
    rho_psi1 = EpistemicDensity(SP3, [0.0, 0.5, 0.5])
    resp = single_response([[0, 0, 1], [1, 1, 0]])
    rep = poor_mans_check(rho_psi, rho_psi1, resp, 0, 0.0, 0.5)
    assert rep.mass_outside == pytest.approx(0.5)
    assert rep.predicted_p_psi1 <= rep.mass_outside + 1e-15
    assert rep.response_vanishes_on_support and rep.witness == "l2"


def test_poor_mans_inapplicable():
    rho = EpistemicDensity.uniform(SP3)
    resp = single_response([[0.5] * 3, [0.5] * 3])
    with pytest.raises(InapplicableError):
        poor_mans_check(rho, rho, resp, 0, 0.1, 0.5)
    with pytest.raises(InapplicableError):
        poor_mans_check(rho, rho, resp, 0, 0.0, 0.0)
    with pytest.raises(InapplicableError):
        # response does not reproduce the null
        poor_mans_check(rho, rho, resp, 0, 0.0, 0.5)
