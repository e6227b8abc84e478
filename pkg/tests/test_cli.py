"""CLI behavior through cli.main(argv): exit codes, determinism, reports."""

import numpy as np
import pytest

import endotrack as et
from endotrack.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def synth_files(tmp_path, capsys, seed=5, n=20, sigma_t=0.0, extra=()):
    tmp_path.mkdir(parents=True, exist_ok=True)
    gt = tmp_path / "gt.txt"
    rels = tmp_path / "rels.txt"
    code, _, err = run(
        capsys, "synth", "--n", str(n), "--seed", str(seed), "--sigma-t", str(sigma_t),
        "--out-gt", str(gt), "--out-rels", str(rels), *extra,
    )
    assert code == 0, err
    return gt, rels


class TestSynth:
    def test_byte_deterministic(self, tmp_path, capsys):
        a_gt, a_rels = synth_files(tmp_path / "a", capsys)
        b_gt, b_rels = synth_files(tmp_path / "b", capsys)
        assert a_gt.read_bytes() == b_gt.read_bytes()
        assert a_rels.read_bytes() == b_rels.read_bytes()

    def test_seed_changes_output(self, tmp_path, capsys):
        a_gt, _ = synth_files(tmp_path / "a", capsys, seed=1)
        b_gt, _ = synth_files(tmp_path / "b", capsys, seed=2)
        assert a_gt.read_bytes() != b_gt.read_bytes()

    def test_minimal_n(self, tmp_path, capsys):
        gt, rels = synth_files(tmp_path, capsys, n=2)
        assert len(et.read_trajectory(gt)) == 2
        assert len(et.read_trajectory(rels)) == 1


class TestTrack:
    def test_chained_round_trip(self, tmp_path, capsys):
        gt, rels = synth_files(tmp_path, capsys)
        est = tmp_path / "est.txt"
        code, _, _ = run(capsys, "track", str(rels), "--base", str(gt), "--out", str(est))
        assert code == 0
        out = et.read_trajectory(est)
        ref = et.read_trajectory(gt)
        for a, b in zip(out.poses, ref.poses):
            assert np.max(np.abs(a.t - b.t)) < 1e-9

    def test_identity_relatives_constant_trajectory(self, tmp_path, capsys):
        base = tmp_path / "base.txt"
        base.write_text("unit=mm k=4\n0 1.0 2.0 3.0 0 0 0 1\n")
        rels = tmp_path / "rels.txt"
        rels.write_text("unit=mm k=4\n" + "".join(
            f"{4 * (i + 1)} 0 0 0 0 0 0 1\n" for i in range(5)
        ))
        est = tmp_path / "est.txt"
        code, _, _ = run(capsys, "track", str(rels), "--base", str(base), "--out", str(est))
        assert code == 0
        for p in et.read_trajectory(est).poses:
            assert np.array_equal(p.t, [1.0, 2.0, 3.0])

    def test_rebased_mode(self, tmp_path, capsys):
        gt, rels = synth_files(tmp_path, capsys, sigma_t=0.05)
        est = tmp_path / "est.txt"
        code, _, _ = run(
            capsys, "track", str(rels), "--base", str(gt), "--mode", "rebased", "--out", str(est)
        )
        assert code == 0
        assert len(et.read_trajectory(est)) == len(et.read_trajectory(gt))

    def test_rebased_length_mismatch_fails(self, tmp_path, capsys):
        gt, rels = synth_files(tmp_path, capsys)
        short = tmp_path / "short.txt"
        lines = gt.read_text().splitlines()
        short.write_text("\n".join(lines[:-2]) + "\n")
        code, _, err = run(
            capsys, "track", str(rels), "--base", str(short), "--mode", "rebased",
            "--out", str(tmp_path / "est.txt"),
        )
        assert code == 1

    def test_parse_error_names_line_17(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        rows = ["unit=mm k=4"]
        rows += [f"{4 * i} 0 0 0 0 0 0 1" for i in range(15)]
        rows.append("60 0 0 broken 0 0 0 1")
        bad.write_text("\n".join(rows) + "\n")
        base = tmp_path / "base.txt"
        base.write_text("unit=mm k=4\n0 0 0 0 0 0 0 1\n")
        code, _, err = run(capsys, "track", str(bad), "--base", str(base), "--out", str(tmp_path / "o.txt"))
        assert code == 2
        assert "line 17" in err

    def test_invalid_pose_exit_3(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("unit=mm k=4\n0 0 0 0 0 0 0 0\n")
        base = tmp_path / "base.txt"
        base.write_text("unit=mm k=4\n0 0 0 0 0 0 0 1\n")
        code, _, err = run(capsys, "track", str(bad), "--base", str(base), "--out", str(tmp_path / "o.txt"))
        assert code == 3

    def test_unit_mismatch_exit_4(self, tmp_path, capsys):
        rels = tmp_path / "rels.txt"
        rels.write_text("unit=cm k=4\n4 0 0 0 0 0 0 1\n")
        base = tmp_path / "base.txt"
        base.write_text("unit=mm k=4\n0 0 0 0 0 0 0 1\n")
        code, _, _ = run(capsys, "track", str(rels), "--base", str(base), "--out", str(tmp_path / "o.txt"))
        assert code == 4


class TestEval:
    def test_identical_files_zero_summary(self, tmp_path, capsys):
        import re

        gt, _ = synth_files(tmp_path, capsys)
        code, out, _ = run(capsys, "eval", str(gt), str(gt))
        assert code == 0
        # Translation metrics are exactly zero; the acos-based angle metrics
        # sit at their ~1e-7 deg conditioning floor.
        assert re.search(r"ate\s+0±0 mm", out)
        assert re.search(r"rte\s+0±0 mm", out)
        assert re.search(r"ce\s+0±0", out)
        for name in ("de", "rot"):
            mean = float(re.search(rf"{name}\s+([0-9.e+-]+)±", out).group(1))
            assert mean < 1e-5

    def test_matches_library_evaluate(self, tmp_path, capsys):
        gt, rels = synth_files(tmp_path, capsys, sigma_t=0.05)
        est = tmp_path / "est.txt"
        run(capsys, "track", str(rels), "--base", str(gt), "--out", str(est))
        code, out, _ = run(capsys, "eval", str(gt), str(est))
        assert code == 0
        ref = et.evaluate(et.read_trajectory(gt), et.read_trajectory(est))
        assert out.strip() == ref.to_text().strip()

    def test_unit_mismatch_exit_4(self, tmp_path, capsys):
        a = tmp_path / "a.txt"
        a.write_text("unit=mm k=4\n0 0 0 0 0 0 0 1\n")
        b = tmp_path / "b.txt"
        b.write_text("unit=cm k=4\n0 0 0 0 0 0 0 1\n")
        code, _, _ = run(capsys, "eval", str(a), str(b))
        assert code == 4

    def test_stride_mismatch_exit_4(self, tmp_path, capsys):
        a = tmp_path / "a.txt"
        a.write_text("unit=mm k=4\n0 0 0 0 0 0 0 1\n")
        b = tmp_path / "b.txt"
        b.write_text("unit=mm k=2\n0 0 0 0 0 0 0 1\n")
        code, _, _ = run(capsys, "eval", str(a), str(b))
        assert code == 4

    def test_report_file(self, tmp_path, capsys):
        gt, _ = synth_files(tmp_path, capsys)
        out_path = tmp_path / "report.txt"
        code, out, _ = run(capsys, "eval", str(gt), str(gt), "--out", str(out_path))
        assert code == 0
        assert out_path.read_text().strip() == out.strip()


class TestGradcheck:
    def test_default_seed_passes(self, capsys):
        code, out, _ = run(capsys, "gradcheck", "--seed", "0")
        assert code == 0
        assert "all checks passed" in out
        assert "max_rel_err" in out

    def test_injected_nan_fails_loudly(self, capsys):
        code, out, _ = run(capsys, "gradcheck", "--seed", "0", "--inject-nan")
        assert code == 1
        assert "FAIL" in out


class TestBench:
    def test_runs_and_labels_standin(self, capsys):
        code, out, _ = run(capsys, "bench", "--size", "32x32", "--repeat", "3", "--warmup", "1")
        assert code == 0
        assert "STAND-IN" in out
        assert "fps" in out
        assert "decoder" in out

    def test_f32_mode(self, capsys):
        code, out, _ = run(capsys, "bench", "--size", "32x32", "--repeat", "3", "--warmup", "1", "--f32")
        assert code == 0
        assert "float32" in out

    def test_bad_size_arg(self, capsys):
        code, _, err = run(capsys, "bench", "--size", "64")
        assert code == 1

    def test_fps_non_increasing_in_area(self, capsys):
        import re

        fps = []
        for size in ("32x32", "64x64", "128x128"):
            code, out, _ = run(capsys, "bench", "--size", size, "--repeat", "5", "--warmup", "2", "--f32")
            assert code == 0
            fps.append(float(re.search(r"-> ([0-9.]+) fps", out).group(1)))
        # Allow 10% timing jitter; the areas differ by 4x each step.
        assert fps[1] <= fps[0] * 1.10
        assert fps[2] <= fps[1] * 1.10


class TestConfigFlag:
    def test_synth_uses_config_k(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("k = 2\n")
        gt, _ = synth_files(tmp_path, capsys, extra=("--config", str(cfg)))
        assert et.read_trajectory(gt).k == 2

    def test_cli_flag_overrides_config(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("k = 2\n")
        gt, _ = synth_files(tmp_path, capsys, extra=("--config", str(cfg), "--k", "3"))
        assert et.read_trajectory(gt).k == 3
