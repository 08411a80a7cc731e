"""Command-line tests: in-process main() plus one console-script check."""

import json
import re
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from fmgram.cli import build_parser, main, parse_size
from fmgram.fmcore import BUILD_STEPS

from conftest import make_word_docs


def write_jsonl_docs(path: Path, docs) -> None:
    lines = [json.dumps({"text": d.text.decode(), "meta": dict(d.metadata)})
             for d in docs]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class CliCorpus:
    dir: str
    docs: list
    data: str


@pytest.fixture(scope="module")
def cli_corpus(tmp_path_factory) -> CliCorpus:
    rng = np.random.default_rng(11)
    docs = make_word_docs(rng, 40, doc_bytes=700)
    root = tmp_path_factory.mktemp("cli")
    data = root / "docs.jsonl"
    write_jsonl_docs(data, docs)
    out = root / "idx"
    rc = main(["index", "--input", str(data), "--out", str(out),
               "--shard-bytes", "12KiB", "--threads", "2"])
    assert rc == 0
    return CliCorpus(str(out), docs, str(data))


class TestParseSize:
    @pytest.mark.parametrize("text,want", [
        ("4096", 4096),
        ("16KiB", 16 << 10),
        ("512mib", 512 << 20),
        ("2GiB", 2 << 30),
        ("1.5MiB", 3 << 19),
        (" 8 KiB ".replace(" KiB ", "KiB"), 8 << 10),
    ])
    def test_accepted(self, text, want):
        assert parse_size(text) == want

    @pytest.mark.parametrize("text", ["", "12MB", "lots", "KiB"])
    def test_rejected(self, text):
        with pytest.raises(ValueError):
            parse_size(text)


class TestArgValidation:
    @pytest.mark.parametrize("rate", ["0", "3", "-2", "12"])
    def test_sample_rates_must_be_powers_of_two(self, rate, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["index", "--input", "x.jsonl", "--out", str(tmp_path),
                  "--sa-rate", rate])
        assert err.value.code == 2

    def test_threads_must_be_positive(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["index", "--input", "x.jsonl", "--out", str(tmp_path),
                  "--threads", "0"])
        assert err.value.code == 2

    def test_subcommand_required(self):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 2

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as err:
            main(["--version"])
        assert err.value.code == 0
        assert re.match(r"fmgram \d+\.\d+\.\d+", capsys.readouterr().out)

    def test_int_list_parsing(self):
        args = build_parser().parse_args(
            ["bench", "--index", "x", "--query-lengths", "1,10,100"])
        assert args.query_lengths == [1, 10, 100]


class TestIndexCommand:
    def test_prints_step_timings_and_ratio(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        data = tmp_path / "d.jsonl"
        write_jsonl_docs(data, make_word_docs(rng, 6, doc_bytes=300))
        capsys.readouterr()
        rc = main(["index", "--input", str(data),
                   "--out", str(tmp_path / "idx")])
        out = capsys.readouterr().out
        assert rc == 0
        for step in BUILD_STEPS:
            assert re.search(rf"^{re.escape(step)}: \d+\.\d\ds$", out,
                             re.MULTILINE), step
        assert re.search(r"^shard 0: 6 docs, \d+ bytes -> \d+ bytes$", out,
                         re.MULTILINE)
        assert "shards: 1  docs: 6" in out
        assert re.search(r"^index/corpus size ratio: \d+\.\d{4}$", out,
                         re.MULTILINE)

    def test_json_output(self, tmp_path, capsys):
        rng = np.random.default_rng(4)
        data = tmp_path / "d.jsonl"
        write_jsonl_docs(data, make_word_docs(rng, 5, doc_bytes=300))
        capsys.readouterr()
        rc = main(["index", "--input", str(data),
                   "--out", str(tmp_path / "idx"), "--json"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["docs"] == 5 and payload["shards"] == 1
        assert payload["index_bytes"] > 0 and payload["corpus_bytes"] > 0
        assert payload["ratio"] == pytest.approx(
            payload["index_bytes"] / payload["corpus_bytes"])
        assert set(payload["steps"]) == set(BUILD_STEPS)

    def test_empty_corpus_exits_2(self, tmp_path, capsys):
        data = tmp_path / "empty.jsonl"
        data.write_text("")
        rc = main(["index", "--input", str(data),
                   "--out", str(tmp_path / "idx")])
        assert rc == 2
        assert "index build failed" in capsys.readouterr().err

    def test_missing_input_exits_2(self, tmp_path):
        assert main(["index", "--input", str(tmp_path / "nope.jsonl"),
                     "--out", str(tmp_path / "idx")]) == 2

    def test_invalid_jsonl_exits_2(self, tmp_path):
        data = tmp_path / "bad.jsonl"
        data.write_text('{"no_text": 1}\n')
        assert main(["index", "--input", str(data),
                     "--out", str(tmp_path / "idx")]) == 2


class TestCountCommand:
    def test_total_matches_naive_scan(self, cli_corpus, capsys):
        want = sum(d.text.count(b"the") for d in cli_corpus.docs)
        capsys.readouterr()
        rc = main(["count", "--index", cli_corpus.dir, "--query", "the"])
        out = capsys.readouterr().out
        assert rc == 0
        assert f"total: {want}" in out
        shard_counts = [int(m) for m in re.findall(r"^shard \d+: (\d+)$", out,
                                                   re.MULTILINE)]
        assert sum(shard_counts) == want

    def test_json_output(self, cli_corpus, capsys):
        capsys.readouterr()
        rc = main(["count", "--index", cli_corpus.dir, "--query", "the",
                   "--json", "--verify"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["total"] == sum(payload["per_shard"])
        assert payload["latency_ms"] >= 0.0

    def test_unknown_index_exits_3(self, tmp_path, capsys):
        rc = main(["count", "--index", str(tmp_path / "ghost"),
                   "--query", "a"])
        assert rc == 3
        assert "cannot open index" in capsys.readouterr().err

    def test_empty_query_exits_4(self, cli_corpus, capsys):
        rc = main(["count", "--index", cli_corpus.dir, "--query", ""])
        assert rc == 4
        assert "invalid query" in capsys.readouterr().err


class TestSearchCommand:
    def test_hits_are_json_lines(self, cli_corpus, capsys):
        q = cli_corpus.docs[2].text[:16].decode()
        capsys.readouterr()
        rc = main(["search", "--index", cli_corpus.dir, "--query", q,
                   "--max-docs", "50"])
        out = capsys.readouterr().out
        assert rc == 0
        hits = [json.loads(line) for line in out.splitlines()]
        assert 2 in {h["doc_id"] for h in hits}
        for h in hits:
            doc = cli_corpus.docs[h["doc_id"]]
            assert h["doc_text"] == doc.text.decode()
            assert h["metadata"] == dict(doc.metadata)
            assert doc.text[h["match_offset"]:].startswith(q.encode())

    def test_max_docs_caps_output(self, cli_corpus, capsys):
        capsys.readouterr()
        rc = main(["search", "--index", cli_corpus.dir, "--query", " ",
                   "--max-docs", "2"])
        assert rc == 0
        assert len(capsys.readouterr().out.splitlines()) == 2

    def test_reserved_byte_query_exits_4(self, cli_corpus):
        assert main(["search", "--index", cli_corpus.dir,
                     "--query", "a\x00b"]) == 4

    def test_unknown_index_exits_3(self, tmp_path):
        assert main(["search", "--index", str(tmp_path / "ghost"),
                     "--query", "a"]) == 3


class TestContamCommand:
    def make_benchmark(self, path, cli_corpus):
        dirty = cli_corpus.docs[0].text[:50].decode()
        entries = [
            {"id": "hit", "text": dirty},
            {"id": "c1", "text": "z" * 50},
            {"id": "c2", "text": "y" * 30},
            {"id": "c3", "text": "x" * 50},
        ]
        path.write_text("\n".join(json.dumps(e) for e in entries) + "\n")

    def test_rates_and_bulletin(self, cli_corpus, tmp_path, capsys):
        bench = tmp_path / "b.jsonl"
        self.make_benchmark(bench, cli_corpus)
        report = tmp_path / "bulletin.json"
        capsys.readouterr()
        rc = main(["contam", "--index", cli_corpus.dir,
                   "--benchmark", str(bench), "--report", str(report)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "entries sampled: 4" in out
        assert "dirty rate: 0.2500" in out
        assert "suspicious rate: 0.0000" in out
        assert f"report written to {report}" in out
        payload = json.loads(report.read_text())
        assert payload["bulletinFormat"] == 1
        assert payload["reports"][0]["dirtyRate"] == 0.25

    def test_json_output_matches_bulletin(self, cli_corpus, tmp_path,
                                          capsys):
        bench = tmp_path / "b.jsonl"
        self.make_benchmark(bench, cli_corpus)
        report = tmp_path / "bulletin.json"
        capsys.readouterr()
        rc = main(["contam", "--index", cli_corpus.dir,
                   "--benchmark", str(bench), "--report", str(report),
                   "--json"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out) == \
            json.loads(report.read_text())

    def test_field_flag_selects_text_key(self, cli_corpus, tmp_path,
                                         capsys):
        bench = tmp_path / "q.jsonl"
        bench.write_text(json.dumps({"question": "w" * 50}) + "\n")
        rc = main(["contam", "--index", cli_corpus.dir,
                   "--benchmark", str(bench), "--field", "question",
                   "--report", str(tmp_path / "r.json")])
        assert rc == 0
        assert "entries sampled: 1" in capsys.readouterr().out

    def test_malformed_benchmark_exits_5(self, cli_corpus, tmp_path,
                                         capsys):
        bench = tmp_path / "bad.jsonl"
        bench.write_text('{"question": "no text field"}\n')
        rc = main(["contam", "--index", cli_corpus.dir,
                   "--benchmark", str(bench),
                   "--report", str(tmp_path / "r.json")])
        assert rc == 5
        assert "cannot load benchmark" in capsys.readouterr().err

    def test_missing_benchmark_exits_5(self, cli_corpus, tmp_path):
        assert main(["contam", "--index", cli_corpus.dir,
                     "--benchmark", str(tmp_path / "nope.jsonl"),
                     "--report", str(tmp_path / "r.json")]) == 5


class TestBenchCommand:
    def test_table_output(self, cli_corpus, capsys):
        capsys.readouterr()
        rc = main(["bench", "--index", cli_corpus.dir,
                   "--query-lengths", "1,2", "--context-lengths", "4",
                   "--trials", "3"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "count latency (ms)" in out
        assert "reconstruct latency (ms)" in out

    def test_json_output(self, cli_corpus, capsys):
        capsys.readouterr()
        rc = main(["bench", "--index", cli_corpus.dir,
                   "--query-lengths", "1,2", "--context-lengths", "4",
                   "--trials", "3", "--json"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert set(payload["count_ms"]) == {"1", "2"}
        assert set(payload["reconstruct_ms"]) == {"4"}
        assert all(v > 0 for v in payload["count_ms"].values())

    def test_window_longer_than_docs_exits_4(self, cli_corpus):
        assert main(["bench", "--index", cli_corpus.dir,
                     "--query-lengths", "100000", "--trials", "1"]) == 4

    def test_unknown_index_exits_3(self, tmp_path):
        assert main(["bench", "--index", str(tmp_path / "ghost")]) == 3


class TestServeCommand:
    def test_missing_config_exits_2(self, monkeypatch, capsys):
        monkeypatch.delenv("FMGRAM_CONFIG", raising=False)
        rc = main(["serve"])
        assert rc == 2
        assert "cannot start service" in capsys.readouterr().err

    def test_bad_port_exits_2(self, cli_corpus, tmp_path):
        cfg = tmp_path / "svc.json"
        cfg.write_text(json.dumps({"corpora": {"c": cli_corpus.dir}}))
        assert main(["serve", "--config", str(cfg),
                     "--listen", "127.0.0.1:notaport"]) == 2


class TestConsoleScript:
    def test_installed_entry_point(self):
        proc = subprocess.run(["fmgram", "--version"], capture_output=True,
                              text=True)
        assert proc.returncode == 0
        assert proc.stdout.startswith("fmgram ")

    def test_module_invocation(self):
        proc = subprocess.run([sys.executable, "-m", "fmgram", "--version"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.startswith("fmgram ")
