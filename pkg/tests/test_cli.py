"""The CLI is a thin 1:1 layer over engine operations."""

import json

import pytest

from expcurate.analytics import query_items
from expcurate.cli import cli_dispatch
from expcurate.scenarios import GRAFFITI_ACCEPTED


def run_cli(capsys, *argv):
    code = cli_dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self, capsys):
        code, out, err = run_cli(capsys, "frobnicate")
        assert code == 2

    def test_missing_store_is_domain_error(self, capsys, monkeypatch):
        monkeypatch.delenv("XV_STORE", raising=False)
        code, out, err = run_cli(capsys, "check")
        assert code == 1
        assert "no store" in err

    def test_domain_error_is_exit_1(self, capsys, demo):
        store, handles, _ = demo
        code, out, err = run_cli(
            capsys, "-s", str(store.root), "profile", "--release", "rel-missing"
        )
        assert code == 1
        assert "error[" in err

    def test_help_exits_zero(self, capsys):
        code, out, err = run_cli(capsys, "--help")
        assert code == 0


class TestReadCommands:
    def test_query_csv_on_stdout(self, capsys, demo):
        store, handles, _ = demo
        flt = json.dumps({"pred": "validated", "verdict": "accepted"})
        code, out, err = run_cli(
            capsys, "-s", str(store.root), "query",
            "--release", handles.graffiti.manifest_release_id,
            "--filter", flt, "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("item_id,external_id,ordinal,release_id")
        assert len(lines) == 1 + GRAFFITI_ACCEPTED

    def test_query_matches_direct_engine_call(self, capsys, demo):
        # no business logic in the interface: same filter, same ids
        store, handles, _ = demo
        flt = {"pred": "validated", "verdict": "accepted"}
        code, out, err = run_cli(
            capsys, "-s", str(store.root), "query",
            "--release", handles.graffiti.manifest_release_id,
            "--filter", json.dumps(flt), "--format", "json",
        )
        assert code == 0
        via_cli = json.loads(out)
        direct = query_items(store, handles.graffiti.manifest_release_id, flt)
        cli_ids = [row[0] for row in via_cli["rows"]]
        assert cli_ids == [v.item.id for v in direct]

    def test_replay_identical_true(self, capsys, demo):
        store, handles, _ = demo
        code, out, err = run_cli(
            capsys, "-s", str(store.root), "replay", handles.graffiti.run_id
        )
        assert code == 0
        assert out.splitlines()[0] == "identical: true"

    def test_check_clean_exit_zero(self, capsys, demo):
        store, handles, _ = demo
        code, out, err = run_cli(capsys, "-s", str(store.root), "check")
        assert code == 0
        assert json.loads(out)["clean"] is True

    def test_agree_and_histogram(self, capsys, demo):
        store, handles, _ = demo
        code, out, err = run_cli(
            capsys, "-s", str(store.root), "agree",
            "--experiment", handles.seismic.experiment_id,
            "--a", handles.seismic.junior_id, "--b", "autoclass-v1",
        )
        assert code == 0
        assert float(json.loads(out)["percent_agreement"]) == 0.9
        code, out, err = run_cli(
            capsys, "-s", str(store.root), "histogram",
            "--experiment", handles.jellyfish.experiment_id,
            "--author", "species-model-v1",
        )
        assert code == 0
        assert json.loads(out)["counts"] == [1, 2, 4, 9, 24]

    def test_experiment_list(self, capsys, demo):
        store, handles, _ = demo
        code, out, err = run_cli(capsys, "-s", str(store.root), "experiment", "list")
        assert code == 0
        assert len(json.loads(out)) >= 3


class TestWriteCommands:
    def test_init_ingest_profile_flow(self, capsys, tmp_path):
        root = tmp_path / "fresh"
        code, out, err = run_cli(capsys, "init", str(root))
        assert code == 0

        csv_path = tmp_path / "data.csv"
        csv_path.write_text("ID,n\nr1,5\nr2,7\n")
        code, out, err = run_cli(
            capsys, "-s", str(root), "ingest",
            "--dataset", "numbers", "--path", str(csv_path), "--kind", "tabular",
            "--external-id-column", "ID",
        )
        assert code == 0
        release_id = json.loads(out)["release"]["id"]

        code, out, err = run_cli(capsys, "-s", str(root), "profile", "--release", release_id)
        assert code == 0
        profile = json.loads(out)
        types = {c["name"]: c["inferred_type"] for c in profile["columns"]}
        assert types == {"ID": "string", "n": "integer"}

    def test_init_occupied_path_fails(self, capsys, tmp_path):
        target = tmp_path / "busy"
        target.mkdir()
        (target / "file").write_text("x")
        code, out, err = run_cli(capsys, "init", str(target))
        assert code == 1

    def test_experiment_create_and_tag_flow(self, capsys, tmp_path):
        root = tmp_path / "flow"
        run_cli(capsys, "init", str(root))
        team_file = tmp_path / "team.json"
        team_file.write_text(json.dumps([
            {"name": "S", "role": "lead", "seniority": "senior"},
            {"name": "J", "role": "helper", "seniority": "junior"},
        ]))
        code, out, err = run_cli(
            capsys, "-s", str(root), "experiment", "create",
            "--name", "cli-exp", "--question", "does the cli work?",
            "--date", "2024-06-01T00:00:00Z", "--team", str(team_file),
        )
        assert code == 0
        payload = json.loads(out)
        exp_id = payload["experiment"]["id"]
        senior = payload["experiment"]["team"][0]["id"]

        csv_path = tmp_path / "texts.csv"
        csv_path.write_text("ID,caption\nc1,caravela na praia\nc2,dia comum\n")
        code, out, err = run_cli(
            capsys, "-s", str(root), "ingest", "--dataset", "posts",
            "--path", str(csv_path), "--kind", "tabular", "--external-id-column", "ID",
        )
        release_id = json.loads(out)["release"]["id"]

        ruleset = tmp_path / "rules.json"
        ruleset.write_text(json.dumps({
            "name": "kw",
            "rules": [{"pattern": "caravela", "label": "sighting", "confidence": 0.9}],
        }))
        code, out, err = run_cli(
            capsys, "-s", str(root), "tag", "rules", "--release", release_id,
            "--ruleset", str(ruleset), "--experiment", exp_id, "--text-column", "caption",
        )
        assert code == 0
        assert json.loads(out)["tags"] == 1

        code, out, err = run_cli(
            capsys, "-s", str(root), "experiment", "publish", "--id", exp_id,
            "--member", senior,
        )
        assert code == 0
        assert json.loads(out)["status"] == "published"
