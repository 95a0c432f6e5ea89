import json

import pytest

from moraldrift import load_diachronic
from moraldrift.cli import dispatch


def run(capsys, *argv):
    code = dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def data_args(files):
    return ["--manifest", str(files.manifest), "--mfd", str(files.mfd),
            "--norms", str(files.norms)]


class TestDispatchBasics:
    def test_no_command_is_usage_error(self, capsys):
        code, _, err = run(capsys, )
        assert code == 1

    def test_unknown_command_is_usage_error(self, capsys):
        code, _, err = run(capsys, "frobnicate")
        assert code == 1
        assert "error" in err

    def test_unknown_flag_is_usage_error(self, capsys):
        code, _, err = run(capsys, "classify", "--bogus")
        assert code == 1

    def test_help_exits_zero(self, capsys):
        assert run(capsys, "--help")[0] == 0
        assert run(capsys, "classify", "--help")[0] == 0

    def test_missing_file_is_data_error(self, capsys, world_files):
        code, _, err = run(capsys, "classify", "--manifest", "no_such.csv",
                           "--mfd", str(world_files.mfd),
                           "--norms", str(world_files.norms),
                           "--word", "riser", "--tier", "polarity")
        assert code == 2
        assert "no_such.csv" in err

    def test_missing_required_option_is_data_error(self, capsys, world_files):
        code, _, err = run(capsys, "classify", *data_args(world_files),
                           "--tier", "polarity")
        assert code == 2
        assert "--word" in err


class TestClassify:
    def test_posterior_on_stdout(self, capsys, world_files):
        code, out, _ = run(capsys, "classify", *data_args(world_files),
                           "--word", "alwayspos", "--tier", "polarity",
                           "--decade", "1950")
        assert code == 0
        payload = json.loads(out)
        assert payload["word"] == "alwayspos"
        assert payload["decade"] == 1950
        probs = payload["posterior"]
        assert set(probs) == {"positive", "negative"}
        assert sum(probs.values()) == pytest.approx(1.0, abs=1e-9)
        assert probs["positive"] > 0.5
        assert payload["_meta"]["tool"] == "moraldrift"
        assert payload["_meta"]["config_hash"]

    def test_decade_defaults_to_latest(self, capsys, world_files):
        code, out, _ = run(capsys, "classify", *data_args(world_files),
                           "--word", "alwayspos", "--tier", "relevance")
        assert code == 0
        assert json.loads(out)["decade"] == 1950

    def test_unknown_word_is_data_error(self, capsys, world_files):
        code, _, err = run(capsys, "classify", *data_args(world_files),
                           "--word", "qqqq", "--tier", "polarity")
        assert code == 2
        assert "qqqq" in err

    def test_category_tier(self, capsys, world_files):
        code, out, _ = run(capsys, "classify", *data_args(world_files),
                           "--word", "care0", "--tier", "category",
                           "--model", "knn", "--k", "3")
        assert code == 0
        probs = json.loads(out)["posterior"]
        assert len(probs) == 10
        assert max(probs, key=probs.get) == "care+"


class TestConfigFile:
    def test_options_from_config(self, capsys, world_files, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text(
            f"manifest={world_files.manifest}\n"
            f"mfd={world_files.mfd}\n"
            f"norms={world_files.norms}\n"
            "word=alwayspos\n"
            "tier=polarity\n")
        code, out, _ = run(capsys, "classify", "--config", str(config))
        assert code == 0
        assert json.loads(out)["tier"] == "polarity"

    def test_flag_overrides_config(self, capsys, world_files, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text(
            f"manifest={world_files.manifest}\n"
            f"mfd={world_files.mfd}\n"
            f"norms={world_files.norms}\n"
            "word=alwayspos\n"
            "tier=polarity\n")
        code, out, _ = run(capsys, "classify", "--config", str(config),
                           "--tier", "relevance")
        assert code == 0
        assert json.loads(out)["tier"] == "relevance"

    def test_bad_config_value_is_data_error(self, capsys, world_files, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("tier=bogus\nword=riser\n")
        code, _, err = run(capsys, "classify", *data_args(world_files),
                           "--config", str(config))
        assert code == 2
        assert "tier" in err

    def test_boolean_from_config(self, capsys, world_files, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("normalize-embeddings=true\n")
        plain = run(capsys, "classify", *data_args(world_files),
                    "--word", "riser", "--tier", "relevance")[1]
        normed = run(capsys, "classify", *data_args(world_files),
                     "--word", "riser", "--tier", "relevance",
                     "--config", str(config))[1]
        assert json.loads(plain)["posterior"] != json.loads(normed)["posterior"]

    def test_bad_boolean_value_rejected(self, capsys, world_files, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("normalize-embeddings=maybe\n")
        code, _, err = run(capsys, "classify", *data_args(world_files),
                           "--word", "riser", "--tier", "relevance",
                           "--config", str(config))
        assert code == 2
        assert "boolean" in err


class TestEvaluate:
    def test_single_decade_report(self, capsys, world_files, tmp_path):
        code, _, _ = run(capsys, "evaluate", *data_args(world_files),
                         "--tier", "polarity", "--model", "centroid",
                         "--decade", "1900", "--out-dir", str(tmp_path))
        assert code == 0
        payload = json.loads((tmp_path / "evaluate_polarity_centroid.json").read_text())
        assert "accuracy" in payload
        assert 0.0 <= payload["accuracy"] <= 1.0
        assert payload["n"] == 30
        assert payload["_meta"]["version"]

    def test_historical_report(self, capsys, world_files, tmp_path):
        code, _, _ = run(capsys, "evaluate", *data_args(world_files),
                         "--tier", "relevance", "--historical",
                         "--out-dir", str(tmp_path))
        assert code == 0
        payload = json.loads(
            (tmp_path / "evaluate_relevance_centroid_historical.json").read_text())
        assert len(payload["per_decade"]) == 6
        assert "mean_accuracy" in payload and "stdev_accuracy" in payload
        lines = (tmp_path / "evaluate_relevance_centroid_historical.csv") \
            .read_text().splitlines()
        assert lines[1] == "tier,model,decade,accuracy,n"
        assert len(lines) == 2 + 6


class TestTimecourse:
    def test_binary_course_with_log_odds(self, capsys, world_files, tmp_path):
        code, _, _ = run(capsys, "timecourse", *data_args(world_files),
                         "--word", "riser", "--tier", "relevance",
                         "--out-dir", str(tmp_path))
        assert code == 0
        payload = json.loads((tmp_path / "timecourse_riser_relevance.json").read_text())
        assert payload["decades"] == [1900, 1910, 1920, 1930, 1940, 1950]
        assert len(payload["scores"]) == 6
        assert len(payload["log_odds"]) == 6
        assert payload["scores"][-1] > payload["scores"][0]
        lines = (tmp_path / "timecourse_riser_relevance.csv").read_text().splitlines()
        assert lines[1] == "decade,score,log_odds"
        assert len(lines) == 2 + 6

    def test_category_course(self, capsys, world_files, tmp_path):
        code, _, _ = run(capsys, "timecourse", *data_args(world_files),
                         "--word", "gapword", "--tier", "category",
                         "--out-dir", str(tmp_path))
        assert code == 0
        payload = json.loads((tmp_path / "timecourse_gapword_category.json").read_text())
        assert payload["missing"][:3] == [True, True, True]
        assert payload["scores"][0] is None
        assert len(payload["scores"][3]) == 10
        assert payload["class_labels"][2] == "fairness+"


@pytest.fixture(scope="module")
def matrix_dir(world_files, tmp_path_factory):
    out = tmp_path_factory.mktemp("matrix_out")
    code = dispatch(["matrix", *data_args(world_files),
                     "--wordlist", str(world_files.wordlist),
                     "--kind", "relevance", "--out-dir", str(out)])
    assert code == 0
    return out


class TestMatrixAndRetrieve:
    def test_matrix_outputs(self, world_files, matrix_dir):
        payload = json.loads((matrix_dir / "matrix_relevance.json").read_text())
        assert payload["kind"] == "relevance"
        assert len(payload["words"]) == 101
        assert len(payload["values"]) == 101
        # gapword's early decades export as nulls
        gap_row = payload["values"][payload["words"].index("gapword")]
        assert gap_row[0] is None and gap_row[-1] is not None

        lines = (matrix_dir / "matrix_relevance.csv").read_text().splitlines()
        assert lines[0].startswith("# tool=moraldrift")
        assert lines[1] == "word,decade,score"
        assert len(lines) == 2 + 101 * 6

    def test_retrieve_riser_first(self, capsys, world_files, matrix_dir, tmp_path):
        code, _, _ = run(capsys, "retrieve", *data_args(world_files),
                         "--matrix", str(matrix_dir / "matrix_relevance.json"),
                         "--direction", "toward-relevance", "--top", "5",
                         "--out-dir", str(tmp_path))
        assert code == 0
        lines = (tmp_path / "retrieve_toward-relevance.csv").read_text().splitlines()
        assert lines[1] == ("word,slope,p_raw,p_bonferroni,mean_relevance,"
                            "switching_decade,early_category,modern_category")
        rows = [line.split(",") for line in lines[2:]]
        assert len(rows) == 5
        assert rows[0][0] == "riser"
        assert rows[0][6] == "care+"


class TestCorrelationCommands:
    def test_valence_corr(self, capsys, world_files, tmp_path):
        code, _, _ = run(capsys, "valence-corr", *data_args(world_files),
                         "--decade", "1950", "--out-dir", str(tmp_path))
        assert code == 0
        payload = json.loads((tmp_path / "valence_corr.json").read_text())
        assert -1.0 <= payload["r"] <= 1.0
        assert payload["n"] >= 3

    def test_survey_corr(self, capsys, world_files, tmp_path):
        code, _, _ = run(capsys, "survey-corr", *data_args(world_files),
                         "--survey", str(world_files.survey),
                         "--out-dir", str(tmp_path))
        assert code == 0
        payload = json.loads((tmp_path / "survey_corr.json").read_text())
        assert payload["irrelevance"]["n"] == 8
        assert payload["acceptability"]["n"] == 8


class TestRegressAndPermute:
    def test_regress(self, capsys, changer_files, tmp_path):
        code, _, _ = run(capsys, "regress",
                         "--matrix", str(changer_files.matrix),
                         "--norms", str(changer_files.norms),
                         "--wordlist", str(changer_files.wordlist),
                         "--out-dir", str(tmp_path))
        assert code == 0
        payload = json.loads((tmp_path / "regress.json").read_text())
        fit = payload["fit"]
        assert set(fit["coefficients"]) == {"intercept", "frequency",
                                            "length", "concreteness"}
        assert fit["n"] == len(payload["words"])
        assert "partial_concreteness" in payload
        lines = (tmp_path / "regress.csv").read_text().splitlines()
        assert lines[1] == "factor,coefficient,std_error,t_stat,p_value"
        assert len(lines) == 2 + 4

    def test_permute_deterministic(self, capsys, changer_files, tmp_path):
        args = ["permute", "--matrix", str(changer_files.matrix),
                "--norms", str(changer_files.norms),
                "--wordlist", str(changer_files.wordlist),
                "--shuffles", "20", "--seed", "3",
                "--out-dir", str(tmp_path)]
        assert dispatch(args) == 0
        first = (tmp_path / "permute.json").read_bytes()
        assert dispatch(args) == 0
        second = (tmp_path / "permute.json").read_bytes()
        assert first == second
        payload = json.loads(first)
        assert payload["n_shuffles"] == 20
        assert set(payload["factors"]) == {"frequency", "length", "concreteness"}
        capsys.readouterr()

    def test_permute_rejects_polarity_matrix(self, capsys, changer_files, tmp_path):
        bad = tmp_path / "polarity.json"
        payload = json.loads(changer_files.matrix.read_text())
        payload["kind"] = "polarity"
        bad.write_text(json.dumps(payload))
        code, _, err = run(capsys, "permute", "--matrix", str(bad),
                           "--norms", str(changer_files.norms),
                           "--wordlist", str(changer_files.wordlist),
                           "--out-dir", str(tmp_path))
        assert code == 2
        assert "relevance" in err


class TestAlign:
    def test_align_writes_consistent_spaces(self, capsys, world_files, tmp_path):
        code, _, _ = run(capsys, "align", "--manifest", str(world_files.manifest),
                         "--alignment-direction", "backward",
                         "--out-dir", str(tmp_path))
        assert code == 0
        meta = json.loads((tmp_path / "align.json").read_text())
        assert meta["decades"] == [1900, 1910, 1920, 1930, 1940, 1950]
        aligned = load_diachronic(tmp_path / "aligned_manifest.csv")
        assert aligned.decades == (1900, 1910, 1920, 1930, 1940, 1950)
        assert aligned.dim == 6

    def test_manifest_comment_line(self, capsys, world_files, tmp_path):
        run(capsys, "align", "--manifest", str(world_files.manifest),
            "--out-dir", str(tmp_path))
        first = (tmp_path / "aligned_manifest.csv").read_text().splitlines()[0]
        assert first.startswith("# tool=moraldrift")


class TestProject:
    def test_project_map(self, capsys, world_files, tmp_path):
        code, _, _ = run(capsys, "project", *data_args(world_files),
                         "--words", "riser,alwayspos", "--all-decades",
                         "--out-dir", str(tmp_path))
        assert code == 0
        lines = (tmp_path / "project.csv").read_text().splitlines()
        assert lines[1] == "kind,label,decade,x,y"
        rows = [line.split(",") for line in lines[2:]]
        kinds = [r[0] for r in rows]
        assert kinds.count("class") == 3
        assert kinds.count("anchor") == 10
        assert kinds.count("query") == 12  # 2 words x 6 decades

    def test_missing_words_is_error(self, capsys, world_files, tmp_path):
        code, _, err = run(capsys, "project", *data_args(world_files),
                           "--words", "qq,zz", "--out-dir", str(tmp_path))
        assert code == 2


class TestNormalization:
    def test_normalize_flag_changes_posteriors(self, capsys, world_files):
        base = run(capsys, "classify", *data_args(world_files),
                   "--word", "riser", "--tier", "relevance")[1]
        normed = run(capsys, "classify", *data_args(world_files),
                     "--word", "riser", "--tier", "relevance",
                     "--normalize-embeddings")[1]
        p_base = json.loads(base)["posterior"]["relevant"]
        p_norm = json.loads(normed)["posterior"]["relevant"]
        assert p_base != p_norm

    def test_config_hash_differs_with_flags(self, capsys, world_files):
        base = run(capsys, "classify", *data_args(world_files),
                   "--word", "riser", "--tier", "relevance")[1]
        normed = run(capsys, "classify", *data_args(world_files),
                     "--word", "riser", "--tier", "relevance",
                     "--normalize-embeddings")[1]
        assert json.loads(base)["_meta"]["config_hash"] != \
            json.loads(normed)["_meta"]["config_hash"]
