"""Command-line entry points: index, train, tune, run, score."""

import json

import pytest

from slotfill.cli import main, seed_from_env


class TestSeedEnv:
    def test_default(self, monkeypatch):
        monkeypatch.delenv("SF_SEED", raising=False)
        assert seed_from_env() == 13

    def test_override(self, monkeypatch):
        monkeypatch.setenv("SF_SEED", "99")
        assert seed_from_env() == 99

    def test_garbage_ignored(self, monkeypatch):
        monkeypatch.setenv("SF_SEED", "not-a-number")
        assert seed_from_env() == 13


class TestIndexCommand:
    def test_builds_and_persists(self, fixtures_dir, tmp_path, capsys):
        out = tmp_path / "index.json"
        rc = main(["index", "--corpus", str(fixtures_dir / "corpus.jsonl"),
                   "--out", str(out)])
        assert rc == 0
        assert out.exists()
        assert "indexed 13 documents" in capsys.readouterr().out


class TestTrainCommand:
    def test_distant_supervision_svm(self, fixtures_dir, tmp_path):
        out_dir = tmp_path / "models"
        rc = main(["train", "--slot", "per:location_of_birth", "--model", "svm",
                   "--corpus", str(fixtures_dir / "train_corpus.jsonl"),
                   "--kb", str(fixtures_dir / "train_kb.tsv"),
                   "--out-dir", str(out_dir)])
        assert rc == 0
        assert (out_dir / "per_location_of_birth.svm.npz").exists()

    def test_examples_file_cnn(self, fixtures_dir, tmp_path):
        out_dir = tmp_path / "models"
        rc = main(["train", "--slot", "per:city_of_birth", "--model", "cnn",
                   "--examples", str(fixtures_dir / "seed_examples.jsonl"),
                   "--out-dir", str(out_dir),
                   "--dim", "8", "--filters", "4", "--cnn-hidden", "8",
                   "--epochs", "5"])
        assert rc == 0
        # the inverse/merge table routes training to the canonical slot
        assert (out_dir / "per_location_of_birth.cnn.npz").exists()

    def test_selection_loop_path(self, fixtures_dir, tmp_path):
        out_dir = tmp_path / "models"
        rc = main(["train", "--slot", "per:location_of_birth", "--model", "svm",
                   "--corpus", str(fixtures_dir / "train_corpus.jsonl"),
                   "--kb", str(fixtures_dir / "train_kb.tsv"),
                   "--select", "--seed-data",
                   str(fixtures_dir / "seed_examples.jsonl"),
                   "--batches", "3",
                   "--out-dir", str(out_dir)])
        assert rc == 0
        assert (out_dir / "per_location_of_birth.svm.npz").exists()

    def test_pattern_kind_is_data(self, capsys):
        rc = main(["train", "--slot", "per:age", "--model", "pattern"])
        assert rc == 0
        assert "patterns are data" in capsys.readouterr().out

    def test_classifier_less_slot_refused(self, capsys):
        rc = main(["train", "--slot", "per:charges", "--model", "svm"])
        assert rc == 1


class TestTuneCommand:
    def test_tunes_weights_and_thresholds(self, fixtures_dir,
                                          trained_models_dir, tmp_path):
        out = tmp_path / "tuned.json"
        rc = main(["tune", "--dev", str(fixtures_dir / "dev_examples.jsonl"),
                   "--models", str(trained_models_dir), "--out", str(out)])
        assert rc == 0
        tuned = json.loads(out.read_text())
        assert set(tuned) == {"thresholds", "weights"}
        assert sum(tuned["weights"].values()) == pytest.approx(1.0)
        assert "per:location_of_birth" in tuned["thresholds"]

    def test_tuned_file_feeds_run(self, fixtures_dir, trained_models_dir,
                                  tmp_path):
        tuned = tmp_path / "tuned.json"
        rc = main(["tune", "--dev", str(fixtures_dir / "dev_examples.jsonl"),
                   "--models", str(trained_models_dir), "--out", str(tuned)])
        assert rc == 0
        out = tmp_path / "answers.tsv"
        rc = main(["run", "--queries", str(fixtures_dir / "queries.jsonl"),
                   "--corpus", str(fixtures_dir / "corpus.jsonl"),
                   "--coref", str(fixtures_dir / "coref.tsv"),
                   "--models", str(trained_models_dir),
                   "--run", "2", "--tuned", str(tuned), "--out", str(out)])
        assert rc == 0
        assert out.exists()


class TestRunAndScore:
    def test_no_coref_flag(self, fixtures_dir, trained_models_dir, tmp_path):
        out = tmp_path / "answers.tsv"
        rc = main(["run", "--queries", str(fixtures_dir / "queries.jsonl"),
                   "--corpus", str(fixtures_dir / "corpus.jsonl"),
                   "--coref", str(fixtures_dir / "coref.tsv"),
                   "--models", str(trained_models_dir),
                   "--run", "2", "--no-coref", "--out", str(out)])
        assert rc == 0
        fillers = [line.split("\t")[3] for line in out.read_text().splitlines()]
        assert "Garching" not in fillers  # heuristic mention gated off

    def test_score_command(self, fixtures_dir, trained_models_dir, tmp_path,
                           capsys):
        out = tmp_path / "answers.tsv"
        main(["run", "--queries", str(fixtures_dir / "queries.jsonl"),
              "--corpus", str(fixtures_dir / "corpus.jsonl"),
              "--coref", str(fixtures_dir / "coref.tsv"),
              "--models", str(trained_models_dir),
              "--run", "2", "--out", str(out)])
        rc = main(["score", "--system", str(out),
                   "--gold", str(fixtures_dir / "gold.tsv")])
        assert rc == 0
        printed = capsys.readouterr().out
        assert "tp=11 fp=0 fn=2" in printed
        assert "P=100.00 R=84.62 F1=91.67" in printed
