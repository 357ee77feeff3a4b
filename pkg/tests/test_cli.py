import io
import json

import pytest

from cmcoincidence import cli
from cmcoincidence.cm_field import IdealK, cm_field_from_json
from cmcoincidence.orders import build_order, make_context, order_from_json, orders_equal

ZETA5 = {"D": 5, "a": [1, -1], "b": [1, 0]}
K85 = {"D": 5, "radicand": [-119, 68]}


def job_file(tmp_path, **data):
    path = tmp_path / "job.json"
    path.write_text(json.dumps(data))
    return str(path)


def run(argv, capsys, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
    code = cli.run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bound(tmp_path, capsys):
    code, out, err = run(["bound", "--job", job_file(tmp_path, K=ZETA5, Kprime=ZETA5)], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["bound"] == "400" and data["ceilings"] == {"r1": "400", "r2": "20", "r4": "4"}
    assert "bound done" in err


def test_bound_pair(tmp_path, capsys):
    code, out, _ = run(["bound", "--job", job_file(tmp_path, K=ZETA5, Kprime=K85)], capsys)
    assert json.loads(out)["bound"] == "115600"


def test_classgroup_from_stdin(capsys, monkeypatch):
    code, out, _ = run(["classgroup"], capsys, json.dumps({"K": K85}), monkeypatch)
    data = json.loads(out)
    assert code == 0 and data["h"] == "2" and data["structure"] == ["2"] and data["w"] == "2"
    assert len(data["representatives"]) == 2


def test_coincide(tmp_path, capsys):
    job = job_file(tmp_path, K=ZETA5, Kprime=K85)
    code, out, _ = run(["coincide", "--job", job, "--p", "19"], capsys)
    data = json.loads(out)
    assert code == 0 and data["eligible"] and int(data["total"]) > 0
    assert data["total"] == "10" and data["per_class"] == [{"class": [], "s2_weighted": "20"}]
    code, out2, _ = run(["coincide", "--job", job, "--p", "19"], capsys)
    assert out2 == out
    code, out3, _ = run(["coincide", "--job", job, "--p", "19", "--multiplicity", "2"], capsys)
    assert json.loads(out3)["total"] == "20"


def test_coincide_ineligible_is_a_report(tmp_path, capsys):
    code, out, _ = run(["coincide", "--job", job_file(tmp_path, K=ZETA5, Kprime=K85), "--p", "3"], capsys)
    data = json.loads(out)
    assert code == 0 and data["eligible"] is False and data["total"] is None


def test_scan(tmp_path, capsys):
    code, out, _ = run(["coincide", "--job", job_file(tmp_path, K=ZETA5, Kprime=ZETA5)], capsys)
    assert code == 0
    lines = [json.loads(l) for l in out.splitlines()]
    assert [l["p"] for l in lines] == ["2", "3", "5", "7", "11", "13", "17", "19"]
    by_p = {l["p"]: l for l in lines}
    assert by_p["5"]["covered"] is False and "ramified in L" in by_p["5"]["reason"]
    assert by_p["3"]["eligible"] is False and "not superspecial" in by_p["3"]["reason"]


def test_scan_empty(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "candidate_primes", lambda B: [])
    code, out, _ = run(["coincide", "--job", job_file(tmp_path, K=ZETA5, Kprime=K85)], capsys)
    assert code == 0 and out == ""


def test_scan_budget_error_is_recorded(tmp_path, capsys):
    job = job_file(tmp_path, K=ZETA5, Kprime=ZETA5, config={"alpha0_budget": 0})
    code, out, _ = run(["coincide", "--job", job], capsys)
    lines = [json.loads(l) for l in out.splitlines()]
    assert code == 0
    assert any(l.get("error") == "SearchBudgetExceeded" for l in lines)
    assert len(lines) == 8


def test_gz1(capsys):
    code, out, _ = run(["gz1", "--d", "-3", "--dprime", "-4"], capsys)
    data = json.loads(out)
    assert code == 0
    assert data["valuations"]["field_d"] == {"2": "1", "3": "1"}
    code, out, _ = run(["gz1", "--d", "-7", "--dprime", "-8", "--p", "5"], capsys)
    assert json.loads(out)["valuations"] == {"field_d": {"5": "3"}, "field_dprime": {"5": "2"}}


def test_dump_order_round_trip(tmp_path, capsys):
    dest = tmp_path / "order.json"
    code, out, _ = run(["dump-order", "--job", job_file(tmp_path, K=K85, p=19), "--out", str(dest)], capsys)
    assert code == 0
    data = json.loads(dest.read_text())
    assert data == json.loads(out)
    assert len(data["basis"]) == 8 and len(data["gram"]) == 8
    K = cm_field_from_json(K85)
    ctx = make_context(K, 19)
    assert data["alpha0"] == ctx.alpha0.to_json()
    assert orders_equal(order_from_json(ctx, data), build_order(ctx, IdealK.unit(K)))


def test_classify(tmp_path, capsys):
    code, out, _ = run(["classify", "--job", job_file(tmp_path, K=K85, p=19)], capsys)
    data = json.loads(out)
    assert code == 0 and data["h"] == "2" and data["pairwise_distinct"] is True
    assert all(c["discriminant"] == ["19", "0", "1"] for c in data["classes"])


def test_exit_codes(tmp_path, capsys, monkeypatch):
    # malformed JSON
    assert run(["classgroup"], capsys, "{bad", monkeypatch)[0] == 64
    # missing field
    assert run(["bound", "--job", job_file(tmp_path, K=ZETA5)], capsys)[0] == 64
    # unknown subcommand
    assert run(["frobnicate"], capsys)[0] == 64
    # hypothesis violation: ineligible prime for classify, and a bad field
    code, out, _ = run(["classify", "--job", job_file(tmp_path, K=K85, p=29)], capsys)
    assert code == 2 and json.loads(out)["error"] == "hypothesis"
    code, out, _ = run(["classgroup", "--job", job_file(tmp_path, K={"D": 5, "a": [0, 0], "b": [-1, 0]})], capsys)
    assert code == 2
    # internal: the alpha0 search budget runs out
    code, out, _ = run(["dump-order", "--job", job_file(tmp_path, K=K85, p=19), "--alpha0-budget", "2"], capsys)
    assert code == 1 and json.loads(out)["type"] == "SearchBudgetExceeded"
