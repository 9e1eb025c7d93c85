import numpy as np
import pytest

from projlab import InvalidInput, NoSuchStart, PreconditionViolated, Subspace, compare, sweep, verify_main2
from projlab.scenarios import (
    counterexample_law_highprec,
    counterexample_report,
    example_lambdax_case,
    msp_beats_map_start,
    region_i_check,
    sweep_csv,
    sweep_summary,
    validate_sweep,
)
from projlab.subspace import subspaces_with_angles

e1 = np.array([1.0, 0.0])


def plane(c):
    return Subspace(e1[:, None]), Subspace(np.array([[c], [np.sqrt(1 - c * c)]]))


class TestMapBeatsMsp:
    def test_a_start(self, plane_pair):
        rep = verify_main2(*plane_pair, e1, K=5)
        assert rep.ok and rep.verdict == "MAP_WINS"
        assert np.allclose(rep.map_errors[1:], 0.36 ** np.arange(1, 6), rtol=1e-12)
        assert rep.msp_errors[1] == pytest.approx(0.72111026, abs=1e-8)
        assert rep.msp_errors[2] == pytest.approx(0.57271284, abs=1e-8)
        assert rep.predicted_mu == pytest.approx(0.8)

    def test_b_start(self, plane_pair):
        rep = verify_main2(*plane_pair, np.array([0.6, 0.8]), K=5)
        assert rep.ok
        k = np.arange(1, 6)
        # x0 is itself a unit eigenvector of P_B P_A P_B, so e_k^2 = 0.36^(2k-1)
        assert np.allclose(rep.map_errors[1:] ** 2, 0.36 ** (2 * k - 1), rtol=1e-12)
        # mirror image of the A-start
        assert np.allclose(rep.msp_errors[1:] ** 2, 0.8 ** (2 * k + 1) + 0.2 ** (2 * k + 1), rtol=1e-12)

    def test_outside_union(self, plane_pair):
        with pytest.raises(PreconditionViolated):
            verify_main2(*plane_pair, np.array([1.0, 1.0]) / np.sqrt(2))

    def test_five_angles_with_intersection(self):
        A, B = subspaces_with_angles(16, [0.0, 0.2, 0.5, 0.8, 1.1, 1.4], seed=21, extra_a=1, extra_b=1)
        rng = np.random.default_rng(3)
        for x0 in (A.project(rng.standard_normal(16)), B.project(rng.standard_normal(16))):
            assert verify_main2(A, B, x0).ok


class TestCounterexample:
    def test_plane_pair(self, plane_pair):
        w = msp_beats_map_start(*plane_pair)
        assert np.allclose(np.abs(w), np.array([1.0, 2.0]) / np.sqrt(5))
        rep = counterexample_report(*plane_pair, K=10, w=w)
        assert rep.verdict == "MSP_WINS" and rep.ok
        assert rep.map_errors[1] == pytest.approx(np.sqrt(0.36 * 0.2), rel=1e-12)
        assert rep.map_errors[1] == pytest.approx(0.26833, abs=1e-5)
        assert rep.msp_errors[1] == pytest.approx(0.2, rel=1e-12)

    @pytest.mark.parametrize("c", [0.5, 0.3])
    def test_no_start_at_or_below_half(self, c):
        with pytest.raises(NoSuchStart):
            msp_beats_map_start(*plane(c))

    def test_orthogonal_lines(self):
        with pytest.raises(NoSuchStart):
            msp_beats_map_start(Subspace(e1[:, None]), Subspace(np.array([[0.0], [1.0]])))

    def test_highprec_ratio_law(self):
        out = counterexample_law_highprec(2, [np.arccos(0.95)], seed=0, K=30)
        assert out["map_trails_every_step"]
        assert out["max_rel_deviation"] <= 1e-30

    def test_double_precision_ratio_is_contaminated(self):
        # documents why the extended-precision replay exists
        A, B = subspaces_with_angles(2, [np.arccos(0.95)], seed=0)
        rep = counterexample_report(A, B, K=30)
        k = np.arange(1, 31)
        lam, mu = 0.95 ** 2, 0.025
        ratio_law = lam ** (2 * k - 1) * mu / mu ** (2 * k)
        observed = (rep.map_errors[1:] / rep.msp_errors[1:]) ** 2
        assert np.max(np.abs(observed / ratio_law - 1)) > 1e-3


class TestRegionOne:
    def test_eventual_map_win(self):
        A, B = subspaces_with_angles(8, [np.arccos(0.3), 1.35, 1.45], seed=5)
        x0 = np.random.default_rng(2).standard_normal(8)
        out = region_i_check(A, B, x0)
        assert out["mu_gt_lambda"] and out["msp_exceeds_map"]

    def test_compare_reports_crossover(self):
        A, B = subspaces_with_angles(8, [np.arccos(0.3), 1.35, 1.45], seed=5)
        x0 = np.random.default_rng(2).standard_normal(8)
        rep = compare(A, B, x0, K=60)
        assert rep.verdict == "MAP_WINS"
        flags = rep.flags
        assert all(f == "MAP" for f in flags[rep.crossover_k - 1:])


class TestLambdaXExample:
    def test_plane_pair(self, plane_pair):
        ex = example_lambdax_case(*plane_pair, 0.36)
        assert np.allclose(ex["x"], [0.64, -0.48])
        assert np.linalg.norm(ex["x"]) == pytest.approx(0.8)
        assert ex["coefficients"] == pytest.approx((0.4, 1.6))
        assert ex["split_residual"] <= 1e-15
        assert ex["in_union"] is None
        vals = {k: sorted(round(v, 12) + 0.0 for v in a.values) for k, a in ex["active"].items()}
        assert vals == {"PB_PA_PB": [0.0], "PA_PB_PA": [0.0, 0.36], "avg": [0.2, 0.8]}

    def test_bad_lambda(self, plane_pair):
        with pytest.raises(InvalidInput):
            example_lambdax_case(*plane_pair, 0.99)


class TestSweep:
    def spec(self, cos_values, starts):
        return {"d": 6, "angle_sets": [[float(np.arccos(c))] for c in cos_values], "starts": starts,
                "seeds": [1, 2], "K": 30}

    def test_low_region_mu_minus_falls_back(self):
        reps = sweep(self.spec([0.3, 0.4], ["mu_minus"]))
        assert [r.verdict for r in reps] == ["MAP_WINS"] * 4
        assert all("NoSuchStart" in r.note for r in reps)

    def test_high_region_mu_minus(self):
        reps = sweep(self.spec([0.6, 0.8], ["mu_minus"]))
        assert [r.verdict for r in reps] == ["MSP_WINS"] * 4

    def test_union_starts(self):
        reps = sweep(self.spec([0.3, 0.8], ["A", "B"]))
        assert all(r.verdict == "MAP_WINS" for r in reps)

    def test_parallel_matches_serial(self):
        spec = self.spec([0.3, 0.8], ["A", "mu_minus", "random"])
        a = sweep_csv(sweep(spec, jobs=1))
        b = sweep_csv(sweep(spec, jobs=4))
        assert a == b
        assert len(a.splitlines()) == 1 + 2 * 3 * 2

    def test_summary_regions(self):
        summ = sweep_summary(sweep(self.spec([0.3, 0.8], ["mu_minus"])))
        assert summ["cos_f<1/2"]["mu_minus"]["MAP_WINS"] == 2
        assert summ["cos_f>1/2"]["mu_minus"]["MSP_WINS"] == 2

    @pytest.mark.parametrize("bad", [
        {"d": 4, "angle_sets": [], "starts": ["A"], "seeds": [0]},
        {"d": 4, "angle_sets": [[0.3]], "starts": ["C"], "seeds": [0]},
        {"d": 4, "angle_sets": [[0.3]], "starts": ["A"]},
    ])
    def test_invalid(self, bad):
        with pytest.raises(InvalidInput):
            validate_sweep(bad)
