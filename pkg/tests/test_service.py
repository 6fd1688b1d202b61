import pytest
from fastapi.testclient import TestClient

from gramata.grammar import serialize_grammar
from gramata.service import create_app
from gramata.session import run_scripted

from test_session import G0_REPAIRED


@pytest.fixture()
def client(g0):
    with TestClient(create_app(g0)) as c:
        yield c


FRESH_VIEW = {
    "round": 0,
    "verdict": "in-progress",
    "pending": 4,
    "history": [],
    "residual_conflicts": 13,
    "notes": [],
}


def answer_all(client, choices):
    views = []
    for choice in choices:
        p = client.get("/api/prompts/next").json()
        views.append(
            client.post(f"/api/prompts/{p['id']}/answer", json={"choice": choice})
        )
    return views


def test_session_view_golden(client):
    r = client.get("/api/session")
    assert r.status_code == 200
    assert r.json() == FRESH_VIEW


def test_next_prompt_shape(client):
    p = client.get("/api/prompts/next")
    assert p.status_code == 200
    j = p.json()
    assert set(j) == {"id", "kind", "pair", "options"}
    assert j["id"] == 0
    assert j["kind"] == "precedence"
    assert j["pair"] == ["(PLUS,3)", "(STAR,3)"]
    assert [opt["sym"] for opt in j["options"]] == ["PLUS", "STAR"]


def test_answer_flow_decrements_pending(client):
    responses = answer_all(client, [0, 0, 0, 0])
    assert [r.status_code for r in responses] == [200] * 4
    assert [r.json()["pending"] for r in responses] == [3, 2, 1, 0]
    final = responses[-1].json()
    assert [h["choice"] for h in final["history"]] == [0, 0, 0, 0]
    r = client.get("/api/prompts/next")
    assert r.status_code == 404
    assert r.json() == {"error": "no pending prompt"}


def test_step_requires_full_round(client):
    r = client.post("/api/step")
    assert r.status_code == 409
    assert r.json() == {"error": "round-incomplete"}


def test_full_repair_over_http(client):
    answer_all(client, [0, 0, 0, 0])
    view = client.post("/api/step").json()
    assert view["verdict"] == "repaired"
    assert view["round"] == 1
    assert view["residual_conflicts"] == 0
    report = client.get("/api/report").json()
    assert report["verdict"] == "repaired"
    assert report["prompts_issued"] == 4
    grammar_text = client.get("/api/grammar/current")
    assert grammar_text.headers["content-type"].startswith("text/plain")
    assert grammar_text.text == G0_REPAIRED


def test_http_and_scripted_runs_agree(client, g0):
    """The API produces byte-for-byte the same grammar as run_scripted."""
    answer_all(client, [0, 0, 0, 1])
    view = client.post("/api/step").json()
    assert view["verdict"] == "in-progress"
    view = client.post("/api/step").json()
    assert view["verdict"] == "stalled"
    assert view["notes"] == ["repair round left the conflict picture unchanged"]
    session, _ = run_scripted(g0, [0, 0, 0, 1])
    assert client.get("/api/grammar/current").text == serialize_grammar(
        session.current
    )


def test_answer_validation_errors(client):
    r = client.post("/api/prompts/0/answer", json={"choice": 7})
    assert r.status_code == 409
    assert r.json() == {"error": "choice must be 0 or 1"}
    r = client.post("/api/prompts/99/answer", json={"choice": 0})
    assert r.status_code == 409
    assert r.json() == {"error": "no pending prompt with id 99"}
    r = client.post("/api/prompts/0/answer", json={"wrong": "shape"})
    assert r.status_code == 400
    assert r.json() == {"error": "invalid request body"}
    r = client.post("/api/prompts/not-an-int/answer", json={"choice": 0})
    assert r.status_code == 400
    assert r.json() == {"error": "invalid request body"}


def test_unknown_path_keeps_error_shape(client):
    r = client.get("/api/nope")
    assert r.status_code == 404
    assert r.json() == {"error": "Not Found"}


def test_reset_restores_fresh_session(client):
    answer_all(client, [0, 0, 0, 0])
    client.post("/api/step")
    r = client.post("/api/reset")
    assert r.status_code == 200
    assert r.json() == FRESH_VIEW
    assert client.get("/api/session").json() == FRESH_VIEW


def test_ui_dir_is_served_when_present(g0, tmp_path):
    (tmp_path / "index.html").write_text(
        "<!doctype html><title>repair</title>", encoding="utf-8"
    )
    with TestClient(create_app(g0, ui_dir=str(tmp_path))) as c:
        r = c.get("/")
        assert r.status_code == 200
        assert "repair" in r.text
        # API routes take priority over the static mount
        assert c.get("/api/session").json() == FRESH_VIEW


def test_without_ui_dir_root_is_a_json_404(client):
    r = client.get("/")
    assert r.status_code == 404
    assert r.json() == {"error": "Not Found"}


def test_intersect_mode_threads_through(g0):
    with TestClient(create_app(g0, intersect_mode="no_reach")) as c:
        answer_all(c, [0, 0, 0, 0])
        assert c.post("/api/step").json()["verdict"] == "repaired"
        assert c.get("/api/grammar/current").text == G0_REPAIRED
