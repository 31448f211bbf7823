"""Field-equation solver: pointwise solutions, nullspaces, sections, flows."""

from __future__ import annotations

import io
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from kontact.config import RunConfig
from kontact.errors import (
    ChartMismatch,
    LengthMismatch,
    NotIsotropic,
    SourceNotRk,
)
from kontact.expr import Rational, Var, ZERO, differentiate, evaluate
from kontact.forms import Chart, SmoothMap, parameter_chart
from kontact.hddw import (
    KContactHamiltonianSystem,
    SectionCandidate,
    check_constrained_solution,
    expected_nullspace_dim,
    hddw_rhs,
    integrate_contact_flow,
    pseudo_gauge_shift,
    section_residual,
    solve_hddw_at_point,
)
from kontact.idealgas import (
    equilibrium_state,
    ideal_gas_energy,
    ideal_gas_system,
    run_isentropic,
)
from kontact.kcontact import canonical_structure
from kontact.legendrian import (
    ParametrizingKFunction,
    build_parametrization,
    thermo_structure,
)
from kontact.zerotest import is_probably_zero

FAST = RunConfig(n_sample_points=16)


def random_point(chart, rng):
    return {c: rng.uniform(0.3, 1.5) for c in chart.coords}


class TestRhs:
    def test_zero_hamiltonian(self):
        s = canonical_structure(1, 2)
        sys_ = KContactHamiltonianSystem(s, 0)
        rhs1, rhs2 = hddw_rhs(sys_)
        assert rhs1.is_structurally_zero()
        assert rhs2 == ZERO

    def test_constant_hamiltonian(self):
        s = canonical_structure(1, 2)
        sys_ = KContactHamiltonianSystem(s, Rational(Fraction(5)))
        rhs1, rhs2 = hddw_rhs(sys_)
        assert rhs1.is_structurally_zero()
        assert rhs2 == Rational(Fraction(-5))

    def test_momentum_hamiltonian(self):
        # H = p on the lowest canonical chart: R(H) = 0, rhs = (dp, -p)
        s = canonical_structure(1, 1)
        sys_ = KContactHamiltonianSystem(s, Var("p_1_1"))
        rhs1, rhs2 = hddw_rhs(sys_)
        assert set(rhs1.coeffs) == {(s.chart.index("p_1_1"),)}
        assert rhs1.coeffs[(s.chart.index("p_1_1"),)] == Rational(Fraction(1))
        assert rhs2 == -Var("p_1_1")


class TestSolveAtPoint:
    def test_contact_case_unique(self):
        s = canonical_structure(1, 1)
        sys_ = KContactHamiltonianSystem(s, Var("p_1_1"))
        sol = solve_hddw_at_point(sys_, {"s_1": 0.2, "q_1": 0.7, "p_1_1": 1.3}, FAST)
        assert sol.nullspace_dim == 0
        assert sol.residual_norm < 1e-10

    @pytest.mark.parametrize("n,k", [(1, 1), (1, 2), (2, 2), (2, 3)])
    def test_nullspace_dimension_law(self, n, k):
        s = canonical_structure(n, k)
        sys_ = KContactHamiltonianSystem(s, 0)
        rng = random.Random(71)
        expected = expected_nullspace_dim(k, s.dim)
        for _ in range(3):
            sol = solve_hddw_at_point(sys_, random_point(s.chart, rng), FAST)
            assert sol.nullspace_dim == expected

    def test_hydro_nullspace(self):
        from kontact.hydro import hydro_system

        sys_ = hydro_system(4)
        rng = random.Random(73)
        sol = solve_hddw_at_point(sys_, random_point(sys_.chart, rng), FAST)
        # (k-1)(dim-k) + k^2-1 with dim = 34: 3*30 + 15
        assert sol.nullspace_dim == 105
        assert sol.nullspace_dim == expected_nullspace_dim(4, sys_.dim)

    def test_contact_reduction_matches_published_components(self):
        # the k=1 solve must reproduce the isentropic-process vector field:
        # X^S = 0, X^N = 0, X^V = V, X^U = dF/dV * V, X^T = V d2F/dVdS,
        # X^P = -P - dF/dV - V d2F/dV2, X^mu = V d2F/dVdN
        cv = Fraction(3, 2)
        f = ideal_gas_energy(cv)
        sys_ = ideal_gas_system(cv)
        chart = sys_.chart
        x0 = equilibrium_state(cv, S0=1.2, V0=0.8, N0=1.1)
        sol = solve_hddw_at_point(sys_, x0, FAST)
        X = dict(zip(chart.coords, sol.particular[0]))
        fV = differentiate(f, "V")
        expect = {
            "S": 0.0,
            "N": 0.0,
            "V": x0["V"],
            "E": evaluate(fV * Var("V"), x0_params(x0)),
            "T": evaluate(Var("V") * differentiate(fV, "S"), x0_params(x0)),
            "P": evaluate(-Var("P") - fV - Var("V") * differentiate(fV, "V"),
                          {**x0_params(x0), "P": x0["P"]}),
            "mu": evaluate(Var("V") * differentiate(fV, "N"), x0_params(x0)),
        }
        for name, want in expect.items():
            assert X[name] == pytest.approx(float(want), abs=1e-9), name

    def test_shift_preserves_residual(self):
        s = canonical_structure(1, 2)
        sys_ = KContactHamiltonianSystem(s, 0)
        rng = random.Random(79)
        sol = solve_hddw_at_point(sys_, random_point(s.chart, rng), FAST)
        coeffs = [rng.uniform(-2, 2) for _ in range(sol.nullspace_dim)]
        shifted = pseudo_gauge_shift(sol, coeffs)
        assert shifted.residual_norm <= 1e-9
        assert not np.allclose(shifted.particular, sol.particular)

    def test_zero_shift_is_identity(self):
        s = canonical_structure(1, 2)
        sys_ = KContactHamiltonianSystem(s, 0)
        sol = solve_hddw_at_point(sys_, random_point(s.chart, random.Random(83)), FAST)
        out = pseudo_gauge_shift(sol, [0.0] * sol.nullspace_dim)
        assert np.allclose(out.particular, sol.particular)

    def test_k1_has_no_shift(self):
        s = canonical_structure(1, 1)
        sys_ = KContactHamiltonianSystem(s, 0)
        sol = solve_hddw_at_point(sys_, random_point(s.chart, random.Random(89)), FAST)
        assert sol.nullspace_dim == 0
        with pytest.raises(LengthMismatch):
            pseudo_gauge_shift(sol, [1.0])


def x0_params(x0):
    return {"S": x0["S"], "V": x0["V"], "N": x0["N"]}


class TestSectionResidual:
    def test_constant_hydro_section_is_solution(self):
        from kontact.hydro import hydro_chart, hydro_system

        k = 2
        sys_ = hydro_system(k)
        chart = hydro_chart(k)
        src = parameter_chart(k)
        psi = SmoothMap(src, chart, [Rational(Fraction(i, 7)) for i in range(chart.dim)])
        rep = section_residual(sys_, SectionCandidate(psi), FAST)
        assert rep.all_zero
        assert rep.max_abs == 0.0

    def test_time_dependent_ratio_breaks_first_equation(self):
        from kontact.hydro import hydro_chart, hydro_system

        k = 2
        sys_ = hydro_system(k)
        chart = hydro_chart(k)
        src = parameter_chart(k)
        comps = {c: Rational(Fraction(1)) for c in chart.coords}
        comps["xi"] = Var("t_0")
        psi = SmoothMap(src, chart, [comps[c] for c in chart.coords])
        rep = section_residual(sys_, psi, FAST)
        assert not rep.all_zero
        # the offending residual sits at the baryon-current coordinate slot
        bad = rep.eq1[chart.index("N_0")]
        assert is_probably_zero(bad - 1, config=FAST)

    def test_wrong_parameter_dimension(self):
        s = canonical_structure(1, 2)
        sys_ = KContactHamiltonianSystem(s, 0)
        src = parameter_chart(3)
        psi = SmoothMap(src, s.chart, [0] * s.dim)
        with pytest.raises(SourceNotRk):
            section_residual(sys_, psi, FAST)

    def test_wrong_target(self):
        s = canonical_structure(1, 2)
        sys_ = KContactHamiltonianSystem(s, 0)
        other = Chart(["a", "b"])
        psi = SmoothMap(parameter_chart(2), other, [0, 0])
        with pytest.raises(ChartMismatch):
            section_residual(sys_, psi, FAST)


class TestIntegrateContactFlow:
    def test_entropy_and_particle_number_conserved(self):
        traj = run_isentropic(t_end=1.0, dt=1e-2)
        S, N = traj.column("S"), traj.column("N")
        assert max(abs(v - S[0]) for v in S) <= 1e-6 * abs(S[0])
        assert max(abs(v - N[0]) for v in N) <= 1e-6 * abs(N[0])

    def test_volume_matches_closed_form(self):
        traj = run_isentropic(t_end=1.0, dt=1e-2)
        for v, t in zip(traj.column("V"), traj.times):
            assert abs(v - math.exp(t)) <= 1e-6 * math.exp(t)

    def test_fourth_order_band(self):
        # halving dt in the truncation-dominated regime shrinks the error 8-32x
        def err(dt):
            traj = run_isentropic(t_end=1.0, dt=dt)
            return max(abs(v - math.exp(t)) for v, t in zip(traj.column("V"), traj.times))

        ratio = err(0.1) / err(0.05)
        assert 8.0 <= ratio <= 32.0

    def test_reintegrated_section_satisfies_equations(self):
        # closing the loop: the flow trajectory, read as data, stays within
        # solver tolerance of the pointwise equations
        sys_ = ideal_gas_system(Fraction(3, 2))
        traj = run_isentropic(t_end=0.5, dt=1e-2)
        for state in traj.states[:: len(traj.states) // 5]:
            sol = solve_hddw_at_point(sys_, state, FAST)
            assert sol.residual_norm < 1e-6

    def test_zero_hamiltonian_is_fixed_point(self):
        sys_ = KContactHamiltonianSystem(thermo_structure(), 0)
        x0 = equilibrium_state(Fraction(3, 2))
        traj = integrate_contact_flow(sys_, x0, t_end=0.2, dt=0.05, config=FAST)
        first, last = traj.states[0], traj.states[-1]
        assert all(abs(first[c] - last[c]) < 1e-12 for c in traj.chart_coords)

    def test_k_greater_one_rejected(self):
        s = canonical_structure(1, 2)
        sys_ = KContactHamiltonianSystem(s, 0)
        with pytest.raises(ValueError):
            integrate_contact_flow(sys_, {}, 1.0, 0.1, FAST)

    def test_csv_output(self):
        traj = run_isentropic(t_end=0.05, dt=0.05)
        buf = io.StringIO()
        traj.to_csv(buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0].split(",") == list(traj.chart_coords)
        assert len(lines) == len(traj.states) + 1
        # 17 significant digits survive the round trip
        for text, val in zip(lines[1].split(","), traj.states[0].values()):
            assert float(text) == val


class TestConstrainedSolution:
    def test_zero_section_legendrian_with_vanishing_H(self):
        # H = s^1 restricted to the zero-section family {s=0, p=0} vanishes
        s = canonical_structure(2, 2)
        kf = ParametrizingKFunction(2, 2, [], ["0", "0"])
        L = build_parametrization(kf, FAST)
        sys_ = KContactHamiltonianSystem(s, Var("s_1"))
        rep = check_constrained_solution(sys_, L, n_points=3, config=FAST)
        assert rep.h_vanishes_on_L
        assert rep.feasible

    def test_nonvanishing_H_stops_early(self):
        s = canonical_structure(2, 2)
        kf = ParametrizingKFunction(2, 2, [], ["0", "0"])
        L = build_parametrization(kf, FAST)
        sys_ = KContactHamiltonianSystem(s, 1)
        rep = check_constrained_solution(sys_, L, n_points=3, config=FAST)
        assert not rep.h_vanishes_on_L
        assert rep.feasible is None

    def test_non_isotropic_input_rejected(self):
        s = canonical_structure(1, 1)
        base = Chart(["q_1"])
        graph = SmoothMap(base, s.chart, [0, Var("q_1"), 1])
        sys_ = KContactHamiltonianSystem(s, 0)
        with pytest.raises(NotIsotropic):
            check_constrained_solution(sys_, graph, n_points=2, config=FAST)

    def test_hydro_equilibrium_family_unique_tangent_solution(self):
        from kontact.hydro import equilibrium_legendrian, hydro_system

        sys_ = hydro_system(4)
        L = equilibrium_legendrian(4)
        rep = check_constrained_solution(sys_, L, n_points=3, config=FAST)
        assert rep.h_vanishes_on_L and rep.feasible
        assert rep.constrained_nullspace_dim == 0
        assert rep.expected_pseudo_gauge_dof == 0

    def test_gauge_count_formula(self):
        # k dim L - (n(k+1) - dim L) for the built parametrizations
        s = canonical_structure(2, 2)
        kf = ParametrizingKFunction(2, 2, [1], ["p_1_1 * q_2", "p_2_1 * q_2"])
        L = build_parametrization(kf, FAST)
        sys_ = KContactHamiltonianSystem(s, 0)
        rep = check_constrained_solution(sys_, L, n_points=3, config=FAST)
        n, k, dim_L = 2, 2, L.dim
        assert rep.expected_pseudo_gauge_dof == k * dim_L - (n * (k + 1) - dim_L)
        assert rep.constrained_nullspace_dim == rep.expected_pseudo_gauge_dof
