"""Metric tests; oracles are scalar re-derivations written here plus scipy
for the Euler decomposition, never the package's own code path."""

import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

import endotrack as et
from endotrack.errors import AlignmentError, UnitMismatch

from conftest import random_pose


def pose_matrix(p):
    M = np.eye(4)
    M[:3, :3] = p.R
    M[:3, 3] = p.t
    return M


def oracle_ate(gt, est):
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(gt.t, est.t)))


def oracle_ce(gt, est):
    eg = Rotation.from_matrix(gt.R).as_euler("xyz")
    ee = Rotation.from_matrix(est.R).as_euler("xyz")
    return sum((1.0 - math.cos(a - b)) / 3.0 for a, b in zip(eg, ee))


def oracle_de(gt, est):
    u = [gt.R[i][0] for i in range(3)]
    v = [est.R[i][0] for i in range(3)]
    dot = max(-1.0, min(1.0, sum(a * b for a, b in zip(u, v))))
    return math.degrees(math.acos(dot))


def oracle_rte(gt_rel, est_rel):
    err = np.linalg.inv(pose_matrix(gt_rel)) @ pose_matrix(est_rel)
    return math.sqrt(sum(err[i, 3] ** 2 for i in range(3)))


def oracle_rot(gt_rel, est_rel):
    err = np.linalg.inv(pose_matrix(gt_rel)) @ pose_matrix(est_rel)
    tr = err[0, 0] + err[1, 1] + err[2, 2]
    return math.degrees(math.acos(max(-1.0, min(1.0, (tr - 1.0) / 2.0))))


ORACLES = {"ate": oracle_ate, "ce": oracle_ce, "de": oracle_de, "rte": oracle_rte, "rot": oracle_rot}
METRICS = {"ate": et.ate, "ce": et.ce, "de": et.de, "rte": et.rte, "rot": et.rot}


class TestExamples:
    def test_all_zero_on_identical(self, rng):
        p = random_pose(rng)
        for name, fn in METRICS.items():
            assert fn(p, p) == pytest.approx(0.0, abs=1e-6), name

    def test_ate_3_4_5(self):
        gt = et.Pose(np.eye(3), np.zeros(3))
        est = et.Pose(np.eye(3), np.array([3.0, 4.0, 0.0]))
        assert et.ate(gt, est) == 5.0

    def test_ce_half_turn_about_x(self):
        gt = et.identity_pose()
        est = et.Pose(et.rotmat_from_axis_angle([1, 0, 0], math.pi), np.zeros(3))
        assert et.ce(gt, est) == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_de_90_about_z(self):
        gt = et.identity_pose()
        est = et.Pose(et.rotmat_from_axis_angle([0, 0, 1], math.pi / 2), np.zeros(3))
        assert et.de(gt, est) == pytest.approx(90.0, abs=1e-9)

    def test_de_x_axis_rotation_invisible(self):
        gt = et.identity_pose()
        est = et.Pose(et.rotmat_from_axis_angle([1, 0, 0], 1.234), np.zeros(3))
        assert et.de(gt, est) == pytest.approx(0.0, abs=1e-6)

    def test_rte_pure_translation(self):
        gt_rel = et.identity_pose()
        est_rel = et.Pose(np.eye(3), np.array([0.0, 0.0, 2.0]))
        assert et.rte(gt_rel, est_rel) == 2.0

    def test_rot_90_any_axis(self, rng):
        for _ in range(20):
            axis = rng.standard_normal(3)
            gt_rel = random_pose(rng)
            err = et.Pose(et.rotmat_from_axis_angle(axis, math.pi / 2), np.zeros(3))
            est_rel = et.pose_compose(gt_rel, err)
            assert et.rot(gt_rel, est_rel) == pytest.approx(90.0, abs=1e-6)

    def test_rot_180(self):
        gt_rel = et.identity_pose()
        est_rel = et.Pose(et.rotmat_from_axis_angle([0, 1, 0], math.pi), np.zeros(3))
        assert et.rot(gt_rel, est_rel) == pytest.approx(180.0, abs=1e-6)

    def test_unit_mismatch(self, rng):
        a = random_pose(rng, unit="mm")
        b = random_pose(rng, unit="cm")
        with pytest.raises(UnitMismatch):
            et.ate(a, b)
        with pytest.raises(UnitMismatch):
            et.rte(a, b)


class TestOracleEquivalence:
    def test_1000_random_pairs(self, rng):
        for _ in range(1000):
            gt, est = random_pose(rng), random_pose(rng)
            for name in ORACLES:
                ours = METRICS[name](gt, est)
                ref = ORACLES[name](gt, est)
                assert abs(ours - ref) <= 1e-9, f"{name}: {ours} vs {ref}"


class TestSymmetries:
    def test_swap_symmetry(self, rng):
        for _ in range(100):
            a, b = random_pose(rng), random_pose(rng)
            for name in ("ate", "ce", "de", "rte", "rot"):
                assert METRICS[name](a, b) == pytest.approx(METRICS[name](b, a), abs=1e-9), name

    def test_rot_axis_invariance(self, rng):
        angle = 0.7
        base = random_pose(rng)
        values = []
        for _ in range(50):
            err = et.Pose(et.rotmat_from_axis_angle(rng.standard_normal(3), angle), np.zeros(3))
            values.append(et.rot(base, et.pose_compose(base, err)))
        assert max(values) - min(values) <= 1e-9
        assert values[0] == pytest.approx(math.degrees(angle), abs=1e-9)

    def test_de_world_rotation_invariance(self, rng):
        # A shared world-frame rotation of both poses leaves DE unchanged.
        for _ in range(50):
            gt, est = random_pose(rng), random_pose(rng)
            world = et.Pose(et.rotmat_from_axis_angle(rng.standard_normal(3), rng.uniform(0, 3)), np.zeros(3))
            base = et.de(gt, est)
            rotated = et.de(et.pose_compose(world, gt), et.pose_compose(world, est))
            assert rotated == pytest.approx(base, abs=1e-8)


class TestEvaluate:
    def test_equal_trajectories_zero(self):
        # acos conditioning near 1 turns ~1e-16 rounding into ~1e-7 deg for
        # the angle metrics; that is the numerical zero for DE/ROT.
        tol = {"ate": 1e-12, "ce": 1e-12, "de": 1e-5, "rte": 1e-12, "rot": 1e-5}
        gt = et.synth_trajectory(20, seed=3)
        rep = et.evaluate(gt, gt)
        for name, (mean, std) in rep.summary().items():
            assert mean == pytest.approx(0.0, abs=tol[name]), name
            assert std == pytest.approx(0.0, abs=tol[name]), name

    def test_single_frame_trajectory(self, rng):
        p = random_pose(rng)
        traj = et.Trajectory((0,), (p,), k=4)
        rep = et.evaluate(traj, traj)
        assert rep.rte.size == 0 and rep.rot.size == 0
        assert rep.summary()["rte"] == (0.0, 0.0)
        text = rep.to_text()
        assert "mean±std" in text

    def test_mismatches(self, rng):
        gt = et.synth_trajectory(5, seed=1, unit="mm")
        est_cm = et.synth_trajectory(5, seed=1, unit="cm")
        with pytest.raises(UnitMismatch):
            et.evaluate(gt, est_cm)
        est_k2 = et.synth_trajectory(5, seed=1, k=2)
        with pytest.raises(AlignmentError):
            et.evaluate(gt, est_k2)

    def test_noisy_run_matches_scalar_oracles(self):
        gt = et.synth_trajectory(50, seed=9)
        rels = et.perturb_relatives(gt, et.NoiseSpec(sigma_t=0.05, sigma_r=0.01, seed=10))
        est = et.chain_absolute(gt.poses[0], rels, k=gt.k)
        rep = et.evaluate(gt, est)
        for i, (g, e) in enumerate(zip(gt.poses, est.poses)):
            assert rep.ate[i] == pytest.approx(oracle_ate(g, e), abs=1e-9)
            assert rep.ce[i] == pytest.approx(oracle_ce(g, e), abs=1e-9)
            assert rep.de[i] == pytest.approx(oracle_de(g, e), abs=1e-9)
        for i, (g, e) in enumerate(zip(gt.relatives(), est.relatives())):
            assert rep.rte[i] == pytest.approx(oracle_rte(g, e), abs=1e-9)
            assert rep.rot[i] == pytest.approx(oracle_rot(g, e), abs=1e-9)

    def test_population_std(self):
        gt = et.synth_trajectory(30, seed=4)
        rels = et.perturb_relatives(gt, et.NoiseSpec(sigma_t=0.05, seed=5))
        est = et.chain_absolute(gt.poses[0], rels, k=gt.k)
        rep = et.evaluate(gt, est)
        mean, std = rep.summary()["ate"]
        assert std == pytest.approx(float(np.std(rep.ate, ddof=0)), abs=1e-15)

    def test_report_ranges(self):
        gt = et.synth_trajectory(40, seed=6)
        rels = et.perturb_relatives(gt, et.NoiseSpec(sigma_t=0.2, sigma_r=0.2, seed=7))
        est = et.chain_absolute(gt.poses[0], rels, k=gt.k)
        rep = et.evaluate(gt, est)
        assert np.all((rep.de >= 0.0) & (rep.de <= 180.0))
        assert np.all((rep.rot >= 0.0) & (rep.rot <= 180.0))
        assert np.all((rep.ce >= 0.0) & (rep.ce <= 2.0))
        assert np.all(np.isfinite(rep.ate))

    def test_to_text_layout(self):
        gt = et.synth_trajectory(4, seed=2)
        text = et.evaluate(gt, gt).to_text()
        lines = text.splitlines()
        assert lines[1] == "frame ate ce de rte rot"
        assert lines[2].startswith("0 ") and "- -" in lines[2]
        assert any(line.strip().startswith("ate") and "±" in line for line in lines)
