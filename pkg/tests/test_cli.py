import json
import shutil
from pathlib import Path

import pytest

from xsrl.cli import run, sha256_file
from xsrl.corpus import corpus_stats, read_conll

DATA = Path(__file__).parent / "data"


@pytest.fixture
def worked(tmp_path):
    for name in ("worked_source.conll", "worked_target.txt", "worked_fwd.aln", "worked_rev.aln"):
        shutil.copy(DATA / name, tmp_path / name)
    return tmp_path


def project_args(d, out="proj.conll", *extra):
    return ["project", "--src", str(d / "worked_source.conll"), "--tgt", str(d / "worked_target.txt"),
            "--fwd", str(d / "worked_fwd.aln"), "--rev", str(d / "worked_rev.aln"), "--out", str(d / out), *extra]


class TestUsage:
    def test_no_arguments(self, capsys):
        assert run([]) == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_subcommand(self):
        assert run(["frobnicate"]) == 2

    def test_missing_flag(self):
        assert run(["intersect", "--fwd", "x"]) == 2

    def test_data_error_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.conll"
        bad.write_text("1\tx\n")
        assert run(["stats", str(bad)]) == 1
        assert "line 1" in capsys.readouterr().err

    def test_missing_file_exit_1(self, tmp_path):
        assert run(["stats", str(tmp_path / "nope.conll")]) == 1


class TestPipelineCommands:
    def test_intersect_worked_example(self, worked):
        out = worked / "o.aln"
        assert run(["intersect", "--fwd", str(worked / "worked_fwd.aln"), "--rev", str(worked / "worked_rev.aln"),
                    "--out", str(out)]) == 0
        assert len(out.read_text().split()) == 6

    def test_intersect_length_checks(self, worked):
        out = worked / "o.aln"
        assert run(["intersect", "--fwd", str(worked / "worked_fwd.aln"), "--rev", str(worked / "worked_rev.aln"),
                    "--src", str(worked / "worked_source.conll"), "--tgt", str(worked / "worked_target.txt"),
                    "--out", str(out)]) == 0
        (worked / "short.txt").write_text("Ich beglückwünsche\n")
        assert run(["intersect", "--fwd", str(worked / "worked_fwd.aln"), "--rev", str(worked / "worked_rev.aln"),
                    "--tgt", str(worked / "short.txt"), "--out", str(out)]) == 1

    def test_project_then_stats(self, worked, capsys):
        assert run(project_args(worked)) == 0
        line = capsys.readouterr().out.strip()
        assert json.loads(line) == {"sentences": 1, "tokens": 7, "types": 7, "predicates": 2}
        assert run(["stats", str(worked / "proj.conll")]) == 0
        assert json.loads(capsys.readouterr().out) == json.loads(line)
        assert (worked / "proj.conll").read_text(encoding="utf-8") == \
            (DATA / "worked_projected.conll").read_text(encoding="utf-8")

    def test_density_flag_and_preset(self, worked, capsys):
        assert run(project_args(worked, "a.conll", "--min-density", "0.9")) == 0
        assert json.loads(capsys.readouterr().out)["sentences"] == 0
        assert run(project_args(worked, "b.conll", "--density-preset", "chinese")) == 0
        assert json.loads(capsys.readouterr().out)["sentences"] == 1
        assert run(project_args(worked, "c.conll", "--min-density", "1.5")) == 1

    def test_provenance_digests(self, worked):
        run(project_args(worked))
        prov = json.loads((worked / "proj.conll.prov.json").read_text())
        assert prov["inputs"]["src"]["sha256"] == sha256_file(worked / "worked_source.conll")
        assert prov["outputs"]["proj.conll"] == sha256_file(worked / "proj.conll")
        assert prov["settings"]["min_density"] == 0.8

    def test_stem_compile(self, tmp_path):
        seg = tmp_path / "seg.txt"
        seg.write_text("walking\twalk/STM ing/SUF\nredo\tre/PRE do/STM\n", encoding="utf-8")
        assert run(["stem-compile", str(seg), "--out", str(tmp_path / "lex.json")]) == 0
        lex = json.loads((tmp_path / "lex.json").read_text())
        assert lex["known_stems"] == {"redo": "do", "walking": "walk"} and lex["prefixes"] == ["re"]

    def test_train_tag_score(self, worked, capsys):
        run(project_args(worked))
        proj = str(worked / "proj.conll")
        cfg = worked / "cfg.json"
        cfg.write_text(json.dumps({"d_h": 4, "d_w": 4, "epochs": 50, "min_count": 1}))
        common = ["--config", str(cfg), "--epochs", "3", "--seed", "5"]
        assert run(["train-args", "--train", proj, "--out", str(worked / "a.bin"), *common]) == 0
        assert run(["train-senses", "--train", proj, "--out", str(worked / "s.bin"), *common]) == 0
        prov = json.loads((worked / "a.bin.prov.json").read_text())
        assert prov["seed"] == 5
        meta = json.loads((worked / "a.bin.json").read_text())
        assert meta["config"]["epochs"] == 3 and meta["config"]["d_h"] == 4
        assert run(["tag", "--input", proj, "--args", str(worked / "a.bin"), "--senses", str(worked / "s.bin"),
                    "--out", str(worked / "pred.conll")]) == 0
        assert corpus_stats(read_conll((worked / "pred.conll").read_text(encoding="utf-8")))["tokens"] == 7
        capsys.readouterr()
        assert run(["score", "--gold", proj, "--pred", str(worked / "pred.conll"), "--out", str(worked / "r.json")]) == 0
        text = capsys.readouterr().out.strip()
        data = json.loads((worked / "r.json").read_text())
        assert text == f"{100 * data['gold']['f1']:.1f} ({100 * data['auto']['f1']:.1f})"

    def test_wrong_model_kind(self, worked):
        run(project_args(worked))
        proj = str(worked / "proj.conll")
        assert run(["train-senses", "--train", proj, "--out", str(worked / "s.bin"), "--epochs", "1"]) == 0
        assert run(["tag", "--input", proj, "--args", str(worked / "s.bin"), "--out", str(worked / "p.conll")]) == 1

    def test_ustem_needs_lexicon(self, worked):
        run(project_args(worked))
        assert run(["train-args", "--train", str(worked / "proj.conll"), "--out", str(worked / "a.bin"),
                    "--lemma-mode", "ustem", "--epochs", "1"]) == 1

    def test_bad_config(self, worked):
        run(project_args(worked))
        cfg = worked / "cfg.json"
        cfg.write_text('{"nonsense": 1}')
        assert run(["train-args", "--train", str(worked / "proj.conll"), "--out", str(worked / "a.bin"),
                    "--config", str(cfg)]) == 1
