"""CLI subcommands: artifacts, exit codes, and byte-level determinism."""

import json

import pytest

from scorelab.cli import main


def _run(*argv):
    return main(list(argv))


def _read_jsonl(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


class TestSoftlabelCommand:
    def test_prints_labels_and_residuals(self, capsys):
        assert _run("softlabel", "--mu", "3", "--sigma", "0.5") == 0
        out = capsys.readouterr().out
        assert "0.682689" in out
        assert "sum residual" in out
        assert "restored" in out

    def test_extreme_mu_reports_negativity(self, capsys):
        assert _run("softlabel", "--mu", "4.9", "--sigma", "1.5") == 0
        out = capsys.readouterr().out
        assert "negativity:     True" in out

    def test_negative_sigma_is_usage_error(self, capsys):
        assert _run("softlabel", "--mu", "3", "--sigma", "-1") == 2
        assert "sigma" in capsys.readouterr().err

    def test_mu_out_of_range(self):
        assert _run("softlabel", "--mu", "7", "--sigma", "0.5") == 2

    def test_missing_required_flag_exits_2(self, capsys):
        assert _run("softlabel", "--mu", "3") == 2
        assert "usage" in capsys.readouterr().err

    def test_report_file(self, tmp_path):
        out = tmp_path / "sl"
        assert _run("softlabel", "--mu", "3", "--sigma", "0.5", "--out", str(out)) == 0
        report = json.loads((out / "softlabel.json").read_text())
        assert report["schema_version"] == 1
        assert report["sum_residual"] <= 1e-12
        assert report["mean_residual"] <= 1e-10


class TestAnalyzeErrorsCommand:
    def test_qalign_study_record(self, tmp_path):
        out = tmp_path / "q"
        assert _run(
            "analyze-errors", "--method", "qalign", "--samples", "1000000",
            "--seed", "7", "--out", str(out), "--no-figures",
        ) == 0
        records = _read_jsonl(out / "errors.jsonl")
        assert len(records) == 1
        rec = records[0]
        assert rec["study"] == "qalign"
        assert rec["samples"] == 1000000 and rec["seed"] == 7
        assert abs(rec["mc_estimate"] - rec["analytic"]) < 1e-3
        assert (out / "manifest.json").exists()

    def test_deqa_records_and_figures(self, tmp_path):
        out = tmp_path / "d"
        assert _run(
            "analyze-errors", "--method", "deqa", "--mu", "3", "--sigma", "0.5",
            "--out", str(out),
        ) == 0
        records = _read_jsonl(out / "errors.jsonl")
        studies = {r["study"] for r in records}
        assert {"deqa_label", "deqa_bound", "sigma_restoration"} <= studies
        label = next(r for r in records if r["study"] == "deqa_label")
        assert 0.0 < label["mass_deficit"] < 1e-5
        bound = next(r for r in records if r["study"] == "deqa_bound")
        assert bound["holds"]
        assert (out / "sigma_restoration.png").exists()
        assert (out / "mass_deficit.png").exists()

    def test_uat_small_budget(self, tmp_path):
        out = tmp_path / "u"
        assert _run(
            "analyze-errors", "--method", "uat", "--hidden-units", "2,4",
            "--epochs", "200", "--out", str(out),
        ) == 0
        records = _read_jsonl(out / "errors.jsonl")
        assert [r["hidden_units"] for r in records] == [2, 4]
        assert (out / "uat_capacity.png").exists()

    def test_rerun_byte_identical(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        args = ["analyze-errors", "--method", "deqa", "--mu", "3.3", "--sigma", "0.8", "--no-figures"]
        assert _run(*args, "--out", str(out_a)) == 0
        assert _run(*args, "--out", str(out_b)) == 0
        assert (out_a / "errors.jsonl").read_bytes() == (out_b / "errors.jsonl").read_bytes()

    def test_bad_method_exits_2(self):
        assert _run("analyze-errors", "--method", "nope") == 2


@pytest.fixture(scope="module")
def train_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("train")
    code = _run(
        "train", "--synth", "linear", "--n", "300", "--feature-dim", "4",
        "--epochs", "3", "--seed", "1", "--out", str(out),
    )
    assert code == 0
    return out


class TestTrainEvalCommands:

    def test_artifacts_written(self, train_dir):
        for name in (
            "manifest.json", "checkpoint.json", "report.json",
            "loss_trace.csv", "loss_curve.png", "pred_scatter.png",
        ):
            assert (train_dir / name).exists(), name

    def test_report_embeds_config_and_metrics(self, train_dir):
        report = json.loads((train_dir / "report.json").read_text())
        assert report["schema_version"] == 1
        assert report["config"]["epochs"] == 3
        assert report["plcc"] is not None
        assert len(report["loss_trace"]) == 3

    def test_trace_csv_has_header(self, train_dir):
        lines = (train_dir / "loss_trace.csv").read_text().splitlines()
        assert lines[0].startswith("epoch")
        assert len(lines) == 4

    def test_eval_from_checkpoint_matches_train_report(self, train_dir, tmp_path):
        out = tmp_path / "eval"
        code = _run(
            "eval", "--checkpoint", str(train_dir / "checkpoint.json"),
            "--synth", "linear", "--n", "300", "--feature-dim", "4",
            "--seed", "1", "--out", str(out),
        )
        assert code == 0
        train_report = json.loads((train_dir / "report.json").read_text())
        eval_report = json.loads((out / "report.json").read_text())
        assert eval_report["plcc"] == train_report["plcc"]

    def test_manifest_rerun_identical_reports(self, train_dir, tmp_path):
        out = tmp_path / "rerun"
        code = _run("train", "--config", str(train_dir / "manifest.json"), "--out", str(out))
        assert code == 0
        assert (out / "report.json").read_bytes() == (train_dir / "report.json").read_bytes()
        assert (out / "loss_trace.csv").read_bytes() == (train_dir / "loss_trace.csv").read_bytes()
        assert (out / "checkpoint.json").read_bytes() == (train_dir / "checkpoint.json").read_bytes()

    def test_flags_override_config_file(self, train_dir, tmp_path):
        out = tmp_path / "override"
        code = _run(
            "train", "--config", str(train_dir / "manifest.json"),
            "--epochs", "2", "--out", str(out),
        )
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["epochs"] == 2

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"epochz": 3}', encoding="utf-8")
        assert _run("train", "--config", str(cfg), "--out", str(tmp_path / "x")) == 2

    def test_unreadable_dataset_exits_1(self, tmp_path):
        assert _run(
            "train", "--data", str(tmp_path / "missing.csv"),
            "--out", str(tmp_path / "y"),
        ) == 1

    def test_csv_dataset_with_native_range(self, tmp_path):
        data = tmp_path / "d.csv"
        rows = ["id,mos,std,f0,f1"]
        import numpy as np

        rng = np.random.default_rng(0)
        for i in range(60):
            f0, f1 = rng.uniform(size=2)
            mos = 20 + 60 * f0
            rows.append(f"s{i},{mos},{2.0},{f0},{f1}")
        data.write_text("\n".join(rows) + "\n", encoding="utf-8")
        out = tmp_path / "csvrun"
        code = _run(
            "train", "--data", str(data), "--native-range", "0,100",
            "--epochs", "2", "--batch-size", "16", "--out", str(out),
        )
        assert code == 0


class TestFullScaleTrainEval:
    def test_default_synth_reaches_high_correlation(self, tmp_path):
        """`train --synth linear --epochs 30 --seed 1` then `eval` on the
        held-out part clears 0.95 on both metrics."""
        out = tmp_path / "full"
        assert _run("train", "--synth", "linear", "--epochs", "30", "--seed", "1",
                    "--out", str(out), "--no-figures") == 0
        report = json.loads((out / "report.json").read_text())
        assert report["plcc"] > 0.95 and report["srcc"] > 0.95

        out_eval = tmp_path / "full_eval"
        assert _run("eval", "--checkpoint", str(out / "checkpoint.json"),
                    "--synth", "linear", "--seed", "1",
                    "--out", str(out_eval), "--no-figures") == 0
        eval_report = json.loads((out_eval / "report.json").read_text())
        assert eval_report["plcc"] == report["plcc"]


class TestCompareCommand:
    def test_four_row_table(self, tmp_path):
        out = tmp_path / "cmp"
        code = _run(
            "compare", "--heads", "qscorer,qalign,deqa,linear",
            "--synth", "linear", "--n", "250", "--feature-dim", "4",
            "--epochs", "2", "--seed", "1", "--out", str(out),
        )
        assert code == 0
        lines = (out / "compare.csv").read_text().splitlines()
        assert lines[0] == "head,plcc,srcc,token_accuracy,epochs_to_plcc"
        assert len(lines) == 5
        assert [ln.split(",")[0] for ln in lines[1:]] == ["qscorer", "qalign", "deqa", "linear"]
        assert (out / "compare.json").exists()
        assert (out / "head_comparison.png").exists()

    def test_unknown_head_exits_nonzero(self, tmp_path):
        code = _run(
            "compare", "--heads", "qscorer,barchart", "--synth", "linear",
            "--n", "100", "--epochs", "1", "--out", str(tmp_path / "z"),
        )
        assert code != 0
