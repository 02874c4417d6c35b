"""Command-line interface: exit codes, report shape, determinism."""

import json

import pytest

from polybox import cli
from polybox import serialize as sz
from polybox.bell import Box, deterministic_box, pr_box
from polybox.channels import StochasticMatrix, cc_channel
from polybox.exact import R1, rat
from polybox.measurements import coin_toss, identity_collection
from polybox.polysimplex import PolySimplex, square_space
from polybox.steering import assemblage_from, self_dual_state, square_self_dual_iso
from polybox.witnesses import q_value

SQ = PolySimplex((1, 1))


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")

    def put(name, obj):
        path = d / name
        path.write_text(sz.dumps(obj))
        return str(path)

    out = {}
    ident = identity_collection(SQ)
    out["ident"] = put("ident.json", sz.measurement_to_json(ident))
    out["coin"] = put("coin.json",
                      sz.measurement_to_json(coin_toss(SQ, SQ.barycenter())))
    _q, W, _lam = q_value(ident, SQ.barycenter())
    out["witness"] = put("witness.json", sz.witness_to_json(W))
    y = self_dual_state(square_space(), square_self_dual_iso())
    beta = assemblage_from(ident, y, square_space())
    out["assemblage"] = put("assemblage.json", sz.assemblage_to_json(beta))
    out["pr"] = put("pr.json", sz.box_to_json(pr_box()))
    out["det"] = put("det.json",
                     sz.box_to_json(deterministic_box(SQ, SQ, (0, 0), (0, 0))))
    out["ybox"] = put("ybox.json", sz.box_to_json(Box.from_tensor(SQ, SQ, y)))
    phi = cc_channel(StochasticMatrix([(rat(1, 4), rat(3, 4)), (R1, rat(0))]))
    out["channel"] = put("channel.json", sz.channel_to_json(phi))
    bad = d / "malformed.json"
    bad.write_text('{"shape": [1, 1], "effects": {\n  broken\n}')
    out["malformed"] = str(bad)
    out["missing"] = str(d / "no_such_file.json")
    return out


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    report = json.loads(captured.out) if captured.out else None
    return code, report, captured.err


class TestSpace:
    def test_info_builtin(self, capsys):
        code, rep, _ = run(capsys, "space", "info", "--space", "square")
        assert code == 0
        assert rep["verdict"] is True
        assert len(rep["result"]["vertices"]) == 4

    def test_validate(self, capsys):
        code, rep, _ = run(capsys, "space", "validate", "--space", "cube:3")
        assert code == 0
        assert all(rep["certificate"].values())

    def test_unknown_label(self, capsys):
        code, _rep, err = run(capsys, "space", "info", "--space", "dodecahedron")
        assert code == 2
        assert "error:" in err


class TestCompat:
    def test_incompatible(self, capsys, files):
        code, rep, _ = run(capsys, "compat", "check", "--meas", files["ident"])
        assert code == 1
        assert rep["verdict"] is False
        assert rep["certificate"]["q"] == "-1"
        assert "witness" in rep["certificate"]

    def test_compatible(self, capsys, files):
        code, rep, _ = run(capsys, "compat", "check", "--meas", files["coin"])
        assert code == 0
        assert "joint" in rep["certificate"]

    def test_id_compute(self, capsys, files):
        code, rep, _ = run(capsys, "id", "compute", "--meas", files["ident"],
                           "--at", "barycenter")
        assert code == 0
        assert rep["result"]["id"] == "1/2"

    def test_id_search(self, capsys, files):
        code, rep, _ = run(capsys, "id", "compute", "--meas", files["ident"],
                           "--search")
        assert code == 0
        assert rep["result"]["id"] == "1/2"


class TestWitness:
    def test_test(self, capsys, files):
        code, rep, _ = run(capsys, "witness", "test", "--witness", files["witness"])
        assert code == 0
        assert rep["verdict"] is True

    def test_etb(self, capsys, files):
        code, rep, _ = run(capsys, "witness", "etb", "--witness", files["witness"])
        assert code == 1

    def test_maximal(self, capsys, files):
        code, rep, _ = run(capsys, "witness", "maximal", "--meas", files["ident"])
        assert code == 0
        assert rep["result"]["maximal"] is True
        assert rep["certificate"]["value"] == "-1"

    def test_extremal(self, capsys, files):
        code, rep, _ = run(capsys, "witness", "extremal", "--witness",
                           files["witness"])
        assert code == 0


class TestSteerBellBox:
    def test_separable(self, capsys, files):
        code, rep, _ = run(capsys, "steer", "separable", "--assemblage",
                           files["assemblage"])
        assert code == 1
        assert rep["verdict"] is False

    def test_sd(self, capsys, files):
        code, rep, _ = run(capsys, "steer", "sd", "--assemblage",
                           files["assemblage"], "--at", "barycenter")
        assert code == 0
        assert rep["result"]["sd"] == "1/2"

    def test_bell_check(self, capsys, files):
        code, rep, _ = run(capsys, "bell", "check", "--box", files["pr"])
        assert code == 1
        assert rep["certificate"]["violated_witnesses"]
        code, rep, _ = run(capsys, "bell", "check", "--box", files["det"])
        assert code == 0
        assert "lhv_weights" in rep["certificate"]

    def test_bell_chsh(self, capsys, files):
        code, rep, _ = run(capsys, "bell", "chsh", "--box", files["pr"])
        assert code == 1
        assert rep["result"]["bell"] == "4"

    def test_bell_bound(self, capsys, files):
        code, rep, _ = run(capsys, "bell", "bound", "--meas-a", files["ident"],
                           "--meas-b", files["ident"], "--y-box", files["ybox"])
        assert code == 0
        assert rep["result"]["holds"] is True

    def test_bell_bound_equality(self, capsys, files):
        code, rep, _ = run(capsys, "bell", "bound", "--meas-a", files["ident"],
                           "--equality")
        assert code == 0
        assert rep["result"]["lhs"] == "-1/2"

    def test_bound_rejects_compatible(self, capsys, files):
        code, _rep, err = run(capsys, "bell", "bound", "--meas-a", files["coin"],
                              "--meas-b", files["coin"], "--y-box", files["ybox"])
        assert code == 2
        assert "error:" in err

    def test_box_to_channel(self, capsys, files):
        code, rep, _ = run(capsys, "box", "to-channel", "--box", files["pr"])
        assert code == 0
        assert rep["result"]["recovered_exactly"] is True


class TestChannelQubit:
    def test_retract(self, capsys, files):
        code, rep, _ = run(capsys, "channel", "retract", "--channel",
                           files["channel"])
        assert code == 0
        assert rep["certificate"]["section_round_trip"] is True

    def test_section(self, capsys):
        code, rep, _ = run(capsys, "channel", "section", "--shape", "1,1",
                           "--at", "barycenter")
        assert code == 0
        assert rep["certificate"]["retracts_back"] is True

    def test_qubit_tsirelson(self, capsys):
        code, rep, _ = run(capsys, "qubit", "tsirelson")
        assert code == 0
        assert abs(rep["result"]["bell"] - 2.8284271247) < 1e-6

    def test_qubit_feasible(self, capsys):
        code, rep, _ = run(capsys, "qubit", "feasible", "--mub")
        assert code == 1
        code, rep, _ = run(capsys, "qubit", "feasible",
                           "--a", "0.5,0,0,0.5", "--b", "0.5,0,0,0.25")
        assert code == 0
        assert "joint_effect" in rep["certificate"]

    def test_qubit_id(self, capsys):
        code, rep, _ = run(capsys, "qubit", "id", "--mub")
        assert code == 0
        assert abs(rep["result"]["id"] - 0.2928932188) < 1e-6
        assert set(rep["result"]) == {"id", "q_hat", "witness_params"}


class TestErrors:
    def test_malformed_json(self, capsys, files):
        code, _rep, err = run(capsys, "compat", "check", "--meas",
                              files["malformed"])
        assert code == 2
        assert ":2:" in err

    def test_missing_file(self, capsys, files):
        code, _rep, err = run(capsys, "compat", "check", "--meas",
                              files["missing"])
        assert code == 2

    def test_seeded_runs_identical(self, capsys, files):
        code1 = cli.main(["--seed", "7", "id", "compute", "--meas",
                          files["ident"], "--search"])
        out1 = capsys.readouterr().out
        code2 = cli.main(["--seed", "7", "id", "compute", "--meas",
                          files["ident"], "--search"])
        out2 = capsys.readouterr().out
        assert code1 == code2
        assert out1 == out2
