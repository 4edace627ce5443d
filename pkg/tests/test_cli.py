import json

import numpy as np
import pytest

from polarshape import io
from polarshape.cli import main


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def sphere_capture(tmp_path):
    """Synth a sphere, render it, and return (scene dir, truth pfm path)."""
    truth = tmp_path / "sphere.pfm"
    assert run(["synth", "--radius", 32, "--out", truth]) == 0
    scene = {
        "schema_version": 1,
        "normals": "sphere.pfm",
        "dominance": "diffuse",
        "unpolarized_intensity": 0.5,
        "refractive_index": 1.5,
        "noise": {"kind": "none"},
        "angles": [0, 45, 90, 135],
    }
    scene_path = tmp_path / "scene.json"
    scene_path.write_text(json.dumps(scene))
    out = tmp_path / "capture"
    assert run(["render", "--scene", scene_path, "--out", out]) == 0
    return out, truth


class TestSynthRender:
    def test_render_is_deterministic(self, tmp_path, capsys):
        truth = tmp_path / "s.pfm"
        run(["synth", "--radius", 16, "--out", truth])
        scene = {
            "normals": "s.pfm",
            "dominance": "specular",
            "unpolarized_intensity": 0.4,
            "noise": {"kind": "poisson", "scale": 1e4},
            "angles": [0, 45, 90, 135],
        }
        scene_path = tmp_path / "scene.json"
        scene_path.write_text(json.dumps(scene))
        for out in ("run1", "run2"):
            assert run(["render", "--scene", scene_path, "--out",
                        tmp_path / out, "--seed", 7]) == 0
        for name in sorted(p.name for p in (tmp_path / "run1").iterdir()):
            a = (tmp_path / "run1" / name).read_bytes()
            b = (tmp_path / "run2" / name).read_bytes()
            assert a == b, name

    def test_synth_writes_loadable_map(self, tmp_path):
        out = tmp_path / "n.pfm"
        assert run(["synth", "--radius", 8, "--out", out]) == 0
        io.load_normal_map(out).validate()


class TestPriors:
    def test_writes_three_prior_maps(self, sphere_capture, tmp_path):
        capture, _ = sphere_capture
        out = tmp_path / "priors"
        assert run(["priors", "--manifest", capture / "manifest.json",
                    "--out", out]) == 0
        for name in ("n_diff.pfm", "n_spec1.pfm", "n_spec2.pfm"):
            assert (out / name).exists(), name
            io.load_normal_map(out / name).validate()


class TestDisambiguateEval:
    def test_oracle_pipeline_and_eval(self, sphere_capture, tmp_path, capsys):
        capture, truth = sphere_capture
        est = tmp_path / "est.pfm"
        assert run(["disambiguate", "--manifest", capture / "manifest.json",
                    "--method", "oracle", "--model", "diffuse",
                    "--truth", truth, "--out", est]) == 0
        capsys.readouterr()
        report = tmp_path / "report.json"
        assert run(["eval", "--est", est, "--truth", truth,
                    "--report", report]) == 0
        printed = capsys.readouterr().out.strip()
        # Two decimal places on stdout; PNG quantization keeps this small
        # but nonzero.
        assert printed == f"{float(printed):.2f}"
        assert float(printed) < 1.0
        doc = json.loads(report.read_text())
        assert doc["mae_degrees"] < 1.0
        assert doc["pixels_evaluated"] > 0

    def test_convexity_method_runs(self, sphere_capture, tmp_path):
        capture, _ = sphere_capture
        est = tmp_path / "est.pfm"
        assert run(["disambiguate", "--manifest", capture / "manifest.json",
                    "--method", "convexity", "--out", est]) == 0
        io.load_normal_map(est).validate()

    def test_eval_dimension_mismatch_exits_1(self, sphere_capture, tmp_path,
                                             capsys):
        _, truth = sphere_capture
        from polarshape.simulate import synth_sphere
        small = tmp_path / "small.pfm"
        io.save_normal_map(synth_sphere(8), small)
        assert run(["eval", "--est", small, "--truth", truth]) == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "\n" not in err.strip()
        assert "(17, 17)" in err and "(65, 65)" in err

    def test_oracle_without_truth_exits_1(self, sphere_capture, tmp_path,
                                          capsys):
        capture, _ = sphere_capture
        assert run(["disambiguate", "--manifest", capture / "manifest.json",
                    "--method", "oracle", "--out", tmp_path / "x.pfm"]) == 1
        assert "truth" in capsys.readouterr().err

    def test_eval_extra_mask_restricts_pixels(self, sphere_capture, tmp_path,
                                              capsys):
        _, truth = sphere_capture
        extra = np.zeros((65, 65), dtype=bool)
        extra[30:40, 30:40] = True
        io.write_mask_png(tmp_path / "extra.png", extra)
        report = tmp_path / "r.json"
        assert run(["eval", "--est", truth, "--truth", truth,
                    "--mask", tmp_path / "extra.png", "--report", report]) == 0
        capsys.readouterr()
        doc = json.loads(report.read_text())
        assert doc["pixels_evaluated"] == 100
        # self-comparison of a float32 file: zero within arccos tolerance
        assert doc["mae_degrees"] <= 1e-4


class TestFitPatchify:
    def test_fit_outputs(self, sphere_capture, tmp_path):
        capture, _ = sphere_capture
        out = tmp_path / "fit"
        assert run(["fit", "--manifest", capture / "manifest.json",
                    "--out", out]) == 0
        rho = io.read_pfm(out / "rho.pfm")
        assert rho.min() >= 0.0 and rho.max() <= 1.0
        assert (out / "low_confidence.png").exists()

    def test_patchify_plan(self, tmp_path):
        out = tmp_path / "plan.json"
        assert run(["patchify", "--height", 512, "--width", 512,
                    "--patch", 256, "--shifts", 32, "--out", out]) == 0
        doc = json.loads(out.read_text())
        assert doc["patch_size"] == 256
        assert len(doc["offsets"]) == 32
        assert doc["offsets"][0] == [0, 0]
        assert all(0 <= y <= 256 and 0 <= x <= 256
                   for y, x in doc["origins"])


class TestUsage:
    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["synth", "--radius", "8", "--frobnicate"])
        assert exc.value.code == 2

    def test_unknown_command_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["transmogrify"])
        assert exc.value.code == 2

    def test_missing_file_exits_1(self, tmp_path, capsys):
        assert run(["priors", "--manifest", tmp_path / "none.json",
                    "--out", tmp_path]) == 1
        assert "error:" in capsys.readouterr().err
