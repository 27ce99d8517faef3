"""HTTP API: lifecycle, status codes, step semantics, determinism."""

from __future__ import annotations

import json
import time

import pytest
from fastapi.testclient import TestClient

import oracles
from cfgen.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


def make_session(client, grammar="json", **extra):
    response = client.post("/sessions", json={"grammar": grammar, **extra})
    assert response.status_code == 200
    return response.json()["session_id"]


class TestSessionLifecycle:
    def test_create_feed_expected(self, client):
        sid = make_session(client)
        fed = client.post(f"/sessions/{sid}/feed",
                          json={"text": '{ "key"'}).json()
        assert fed["status"] == "accepted"
        assert fed["position"] == 7

        expected = client.get(f"/sessions/{sid}/expected",
                              params={"significant": "true"}).json()
        assert expected["expected"] == [{"lo": ":", "hi": ":"}]
        assert expected["accepting"] is False

    def test_expected_ranges_shape(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/feed", json={"text": "["})
        body = client.get(f"/sessions/{sid}/expected",
                          params={"significant": "true"}).json()
        flat = set()
        for pair in body["expected"]:
            flat.update(
                chr(c) for c in range(ord(pair["lo"]), ord(pair["hi"]) + 1)
            )
        assert flat == set('{["-tfn]') | set("0123456789")

    def test_feed_reports_rejection_and_kills(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/feed", json={"text": '{ "key"'})
        rejected = client.post(f"/sessions/{sid}/feed",
                               json={"text": "}"}).json()
        assert rejected["status"] == "rejected"
        assert rejected["position"] == 8
        assert rejected["found"] == "}"
        # raw expected set: the colon, plus the whitespace that may precede it
        assert {"lo": ":", "hi": ":"} in rejected["expected"]
        after = client.post(f"/sessions/{sid}/feed", json={"text": ":"})
        assert after.status_code == 409

    def test_eof_status_when_nothing_extends(self, client):
        sid = make_session(client, grammar="function_call")
        body = client.post(f"/sessions/{sid}/feed",
                           json={"text": "get_weather()"}).json()
        assert body["status"] in ("accepted", "eof")

    def test_clone_isolated_from_original(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/feed", json={"text": "[1"})
        twin = client.post(f"/sessions/{sid}/clone").json()["session_id"]
        client.post(f"/sessions/{sid}/feed", json={"text": "x"})
        assert client.post(f"/sessions/{sid}/feed",
                           json={"text": "]"}).status_code == 409
        done = client.post(f"/sessions/{twin}/feed",
                           json={"text": ", 2]"}).json()
        assert done["accepting"] is True

    def test_delete_then_404(self, client):
        sid = make_session(client)
        assert client.delete(f"/sessions/{sid}").status_code == 200
        assert client.delete(f"/sessions/{sid}").status_code == 404
        assert client.post(f"/sessions/{sid}/feed",
                           json={"text": "1"}).status_code == 404

    def test_idle_expiry(self):
        client = TestClient(create_app(idle_timeout=0.15))
        sid = make_session(client)
        time.sleep(0.3)
        assert client.get(f"/sessions/{sid}/expected").status_code == 404

    def test_frames_in_feed_response(self, client):
        sid = make_session(client)
        body = client.post(f"/sessions/{sid}/feed",
                           json={"text": '{"a": [tr'}).json()
        assert "object" in body["frames"]
        assert "array" in body["frames"]


class TestAtomicFeed:
    def test_rejection_leaves_session_untouched(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/feed", json={"text": "[1"})
        rejected = client.post(
            f"/sessions/{sid}/feed", json={"text": "23x", "atomic": True}
        ).json()
        assert rejected["status"] == "rejected"
        body = client.get(f"/sessions/{sid}/expected").json()
        assert body["text"] == "[1"  # nothing committed
        done = client.post(f"/sessions/{sid}/feed",
                           json={"text": "]"}).json()
        assert done["accepting"] is True

    def test_success_commits(self, client):
        sid = make_session(client)
        body = client.post(
            f"/sessions/{sid}/feed", json={"text": "[1, 2]", "atomic": True}
        ).json()
        assert body["accepting"] is True
        assert body["text"] == "[1, 2]"


class TestStepFeed:
    def test_sample_walks_to_members(self, client):
        sid = make_session(client, seed=11)
        text = ""
        for _ in range(400):
            body = client.post(f"/sessions/{sid}/feed",
                               json={"step": "sample"}).json()
            text = body["text"]
            if body["status"] == "eof":
                break
        json.loads(text)

    def test_empty_step_winds_down_to_member(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/feed",
                    json={"text": '{"a": [1, {"b": "c"'})
        for _ in range(40):
            body = client.post(f"/sessions/{sid}/feed",
                               json={"step": "empty"}).json()
            if body["status"] == "eof":
                break
        assert json.loads(body["text"]) == {"a": [1, {"b": "c"}]}

    def test_stop_legal_only_when_accepting(self, client):
        sid = make_session(client)
        client.post(f"/sessions/{sid}/feed", json={"text": "["})
        assert client.post(f"/sessions/{sid}/feed",
                           json={"step": "stop"}).status_code == 409
        client.post(f"/sessions/{sid}/feed", json={"text": "]"})
        body = client.post(f"/sessions/{sid}/feed", json={"step": "stop"})
        assert body.status_code == 200
        assert body.json()["status"] == "eof"

    def test_unknown_step_rejected(self, client):
        sid = make_session(client)
        assert client.post(f"/sessions/{sid}/feed",
                           json={"step": "zigzag"}).status_code == 400

    def test_sampled_walk_is_pure_function_of_seed(self):
        def walk():
            client = TestClient(create_app())
            sid = make_session(client, seed=5)
            emitted = []
            for _ in range(60):
                body = client.post(f"/sessions/{sid}/feed",
                                   json={"step": "sample"}).json()
                emitted.append(body["emitted"])
                if body["status"] == "eof":
                    break
            return emitted

        assert walk() == walk()


class TestGenerate:
    def test_response_format_json_object(self, client):
        body = client.post("/generate", json={
            "response_format": {"type": "json_object"}, "seed": 7,
            "count": 3,
        }).json()
        assert len(body["outputs"]) == 3
        for text in body["outputs"]:
            json.loads(text)

    def test_stats_per_output(self, client):
        body = client.post("/generate", json={"grammar": "json", "seed": 1,
                                              "count": 2}).json()
        assert len(body["stats"]) == 2
        for stats in body["stats"]:
            assert stats["chars_emitted"] == len(
                body["outputs"][body["stats"].index(stats)]
            )

    def test_brackets_members(self, client):
        body = client.post("/generate", json={"grammar": "brackets",
                                              "seed": 2, "count": 20}).json()
        for text in body["outputs"]:
            assert oracles.bracket_member_ok(text)

    def test_unconstrained_toggle(self, client):
        body = client.post("/generate", json={"unconstrained": True,
                                              "seed": 3}).json()
        assert body["constrained"] is False
        assert body["outputs"]

    def test_bad_requests(self, client):
        assert client.post("/generate",
                           json={"grammar": "klingon"}).status_code == 422
        assert client.post("/generate", json={"count": 0}).status_code == 400
        assert client.post("/generate", json={
            "response_format": {"type": "text"}
        }).status_code == 400
        assert client.post("/generate",
                           json={"seed": "seven"}).status_code == 400


class TestOneShotEndpoints:
    def test_validate_member(self, client):
        body = client.post("/validate", json={"grammar": "json",
                                              "text": '{"a":1}'}).json()
        assert body == {"verdict": "member"}

    def test_validate_error_row(self, client):
        body = client.post("/validate", json={"grammar": "brackets",
                                              "text": "())"}).json()
        assert body["verdict"] == "error"
        assert body["position"] == 3
        assert body["expected"] == [{"lo": "(", "hi": "("}]
        assert body["end"] is True

    def test_validate_significant_prefix(self, client):
        body = client.post("/validate", json={
            "grammar": "json", "text": '{ "key": 0', "significant": True,
        }).json()
        assert body["verdict"] == "prefix"
        flat = {pair["lo"] for pair in body["expected"]}
        assert flat == {".", "E", "e", ",", "}"}

    def test_token_mask(self, client):
        body = client.post("/token-mask", json={
            "grammar": "brackets", "text": "(",
            "tokens": ["(", ")", "()", "x"],
        }).json()
        assert body["mask"] == [True, True, True, False, False]
        assert body["allowed"] == [0, 1, 2]
        assert body["eos_id"] == 4

    def test_token_mask_invalid_prefix_409(self, client):
        assert client.post("/token-mask", json={
            "grammar": "brackets", "text": ")", "tokens": ["("],
        }).status_code == 409

    def test_grammar_listing(self, client):
        body = client.get("/grammars").json()
        assert "json" in body["grammars"]


class TestMalformedBodies:
    def test_not_json(self, client):
        response = client.post(
            "/sessions", content=b"{oops",
            headers={"content-type": "application/json"},
        )
        assert response.status_code == 400

    def test_wrong_shapes(self, client):
        assert client.post("/sessions", json={}).status_code == 400
        assert client.post("/sessions", json={"grammar": 42}).status_code == 400
        assert client.post("/sessions",
                           json={"grammar": "json",
                                 "seed": "x"}).status_code == 400
        sid = make_session(client)
        assert client.post(f"/sessions/{sid}/feed",
                           json={}).status_code == 400
        assert client.post(f"/sessions/{sid}/feed",
                           json={"text": 9}).status_code == 400

    def test_unknown_grammar_422(self, client):
        assert client.post("/sessions",
                           json={"grammar": "klingon"}).status_code == 422
