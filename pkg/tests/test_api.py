"""HTTP service tests: endpoint contracts, limits, and error mapping."""

import json
import logging
import time

import pytest
from fastapi.testclient import TestClient

import fmgram
from fmgram.api import ApiConfig, create_app, load_config


def wait_ready(client, name, want="ready", timeout=60.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        status = client.get("/v1/health").json()["indexes"][name]
        if status == want or (want == "failed" and status.startswith("failed")):
            return status
        time.sleep(0.05)
    raise AssertionError(f"{name} never became {want}: {status}")


@pytest.fixture(scope="module")
def client(small_corpus):
    config = ApiConfig(corpora={"small": str(small_corpus.dir)})
    with TestClient(create_app(config)) as c:
        wait_ready(c, "small")
        yield c


def query(client, **body):
    return client.post("/v1/query", json=body)


class TestHealth:
    def test_reports_ready_corpus(self, client):
        payload = client.get("/v1/health").json()
        assert payload["status"] == "ok"
        assert payload["version"] == fmgram.__version__
        assert payload["indexes"] == {"small": "ready"}

    def test_cors_headers_present(self, client):
        r = client.get("/v1/health", headers={"Origin": "http://example.org"})
        assert r.headers["access-control-allow-origin"] == "*"


class TestIndexes:
    def test_listing_matches_build_report(self, client, small_corpus):
        listing = client.get("/v1/indexes").json()["indexes"]
        assert len(listing) == 1
        entry = listing[0]
        report = small_corpus.report
        assert entry["name"] == "small"
        assert entry["shard_count"] == len(report.shards)
        assert entry["doc_count"] == len(small_corpus.docs)
        assert entry["total_text_bytes"] == report.total_text_bytes
        assert entry["total_index_bytes"] == report.total_index_bytes
        assert entry["ratio"] == pytest.approx(report.ratio)


class TestCount:
    def test_total_matches_naive_scan(self, client, small_corpus):
        q = "the"
        want = sum(d.text.count(q.encode()) for d in small_corpus.docs)
        r = query(client, index="small", query_type="count", query=q)
        assert r.status_code == 200
        payload = r.json()
        assert payload["count"] == want
        assert len(payload["per_shard"]) == len(small_corpus.report.shards)
        assert sum(payload["per_shard"]) == want
        assert payload["latency_ms"] >= 0.0

    def test_absent_pattern_counts_zero(self, client):
        r = query(client, index="small", query_type="count", query="zqxjkvv")
        assert r.status_code == 200
        assert r.json()["count"] == 0


class TestSearch:
    def test_hits_carry_full_documents(self, client, small_corpus):
        q = small_corpus.docs[7].text[:12].decode()
        matching = {i for i, d in enumerate(small_corpus.docs)
                    if q.encode() in d.text}
        r = query(client, index="small", query_type="search", query=q,
                  max_docs=50)
        assert r.status_code == 200
        payload = r.json()
        got_ids = {d["doc_id"] for d in payload["docs"]}
        assert 7 in got_ids and got_ids <= matching
        for d in payload["docs"]:
            doc = small_corpus.docs[d["doc_id"]]
            assert d["doc_text"] == doc.text.decode()
            assert d["metadata"] == dict(doc.metadata)
            assert doc.text[d["match_offset"]:].startswith(q.encode())

    def test_max_docs_caps_hits_not_count(self, client, small_corpus):
        q = " "
        want = sum(d.text.count(b" ") for d in small_corpus.docs)
        r = query(client, index="small", query_type="search", query=q,
                  max_docs=3)
        payload = r.json()
        assert payload["count"] == want
        assert len(payload["docs"]) == 3

    def test_default_max_docs_is_ten(self, client):
        r = query(client, index="small", query_type="search", query=" ")
        assert len(r.json()["docs"]) == 10


class TestRejections:
    def test_unknown_index_is_404(self, client):
        r = query(client, index="nope", query_type="count", query="a")
        assert r.status_code == 404
        assert "unknown index" in r.json()["error"]

    def test_oversize_query_is_413(self, client):
        r = query(client, index="small", query_type="count",
                  query="a" * 4097)
        assert r.status_code == 413

    def test_boundary_query_size_is_accepted(self, client):
        r = query(client, index="small", query_type="count",
                  query="a" * 4096)
        assert r.status_code == 200

    @pytest.mark.parametrize("bad", [0, 51, -1])
    def test_max_docs_out_of_bounds_is_400(self, client, bad):
        r = query(client, index="small", query_type="search", query="a",
                  max_docs=bad)
        assert r.status_code == 400
        assert "max_docs" in r.json()["error"]

    def test_empty_query_is_400(self, client):
        r = query(client, index="small", query_type="count", query="")
        assert r.status_code == 400

    def test_reserved_byte_query_is_400(self, client):
        r = query(client, index="small", query_type="count", query="a\x00b")
        assert r.status_code == 400

    def test_missing_field_is_400(self, client):
        r = client.post("/v1/query", json={"index": "small", "query": "a"})
        assert r.status_code == 400
        assert "malformed request" in r.json()["error"]

    def test_unknown_query_type_is_400(self, client):
        r = query(client, index="small", query_type="regex", query="a")
        assert r.status_code == 400


class TestDegradedService:
    def test_zero_timeout_forces_408(self, small_corpus):
        config = ApiConfig(corpora={"small": str(small_corpus.dir)},
                           timeout_s=0)
        with TestClient(create_app(config)) as c:
            r = query(c, index="small", query_type="count", query="a")
            assert r.status_code == 408

    def test_failed_load_reports_503(self, tmp_path):
        config = ApiConfig(corpora={"broken": str(tmp_path / "missing")})
        with TestClient(create_app(config)) as c:
            status = wait_ready(c, "broken", want="failed")
            assert status.startswith("failed")
            assert c.get("/v1/indexes").json()["indexes"] == []
            r = query(c, index="broken", query_type="count", query="a")
            assert r.status_code == 503


class TestAccessLog:
    def test_one_json_line_per_request(self, client, caplog):
        with caplog.at_level(logging.INFO, logger="fmgram.api"):
            query(client, index="small", query_type="count", query="the")
        records = [json.loads(r.message) for r in caplog.records
                   if r.name == "fmgram.api"]
        hits = [r for r in records if r["path"] == "/v1/query"]
        assert len(hits) == 1
        rec = hits[0]
        assert rec["status"] == 200
        assert rec["corpus"] == "small"
        assert rec["query_type"] == "count"
        assert rec["q_bytes"] == 3
        assert rec["latency_ms"] >= 0.0


class TestLoadConfig:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "svc.json"
        path.write_text(json.dumps({
            "corpora": {"a": "/idx/a", "b": "/idx/b"},
            "timeout_s": 5.5, "workers": 3, "verify": True,
        }))
        cfg = load_config(path)
        assert cfg.corpora == {"a": "/idx/a", "b": "/idx/b"}
        assert cfg.timeout_s == 5.5
        assert cfg.workers == 3
        assert cfg.verify is True

    def test_defaults(self, tmp_path):
        path = tmp_path / "svc.json"
        path.write_text(json.dumps({"corpora": {"a": "/idx/a"}}))
        cfg = load_config(path)
        assert cfg.timeout_s == 30.0
        assert cfg.workers is None
        assert cfg.verify is False

    def test_missing_corpora_rejected(self, tmp_path):
        path = tmp_path / "svc.json"
        path.write_text(json.dumps({"corpora": {}}))
        with pytest.raises(ValueError):
            load_config(path)

    def test_env_var_fallback(self, tmp_path, monkeypatch):
        path = tmp_path / "svc.json"
        path.write_text(json.dumps({"corpora": {"a": "/idx/a"}}))
        monkeypatch.setenv("FMGRAM_CONFIG", str(path))
        assert load_config().corpora == {"a": "/idx/a"}

    def test_no_path_anywhere_raises(self, monkeypatch):
        monkeypatch.delenv("FMGRAM_CONFIG", raising=False)
        with pytest.raises(FileNotFoundError):
            load_config()
