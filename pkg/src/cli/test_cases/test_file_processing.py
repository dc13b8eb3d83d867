import hashlib
import os

from cli.file_processing import build_manifest, file_sha256, setup_directories, write_json, write_manifest


def test_directories_are_created(tmp_path):
    out = setup_directories(str(tmp_path / "run"), "a", "b")
    assert os.path.isdir(os.path.join(out, "a"))
    assert os.path.isdir(os.path.join(out, "b"))


def test_json_is_sorted_with_trailing_newline(tmp_path):
    path = write_json({"b": 1, "a": [1, 2]}, str(tmp_path / "doc.json"))
    with open(path, "r", encoding="utf-8") as handle:
        assert handle.read() == '{\n  "a": [\n    1,\n    2\n  ],\n  "b": 1\n}\n'


def test_digest_ignores_the_creation_time(tmp_path):
    source = tmp_path / "in.csv"
    source.write_text("date,close_usd\n", encoding="utf-8")
    output = tmp_path / "z.csv"
    output.write_text("x\n", encoding="utf-8")
    first = build_manifest("ingest", str(tmp_path), [str(source), None], {"mode": "raw"}, [str(output)])
    second = build_manifest("ingest", str(tmp_path), [str(source)], {"mode": "raw"}, [str(output)])
    assert first.digest == second.digest
    assert first.inputs[0].sha256 == hashlib.sha256(b"date,close_usd\n").hexdigest()
    assert first.outputs == ["z.csv"]
    other = build_manifest("ingest", str(tmp_path), [str(source)], {"mode": "pre-joined"}, [str(output)])
    assert other.digest != first.digest


def test_manifest_file(tmp_path):
    output = tmp_path / "sub" / "a.csv"
    output.parent.mkdir()
    output.write_text("x\n", encoding="utf-8")
    path = write_manifest("metrics", str(tmp_path), [], {}, [str(output)])
    assert os.path.basename(path) == "manifest.json"
    assert file_sha256(str(output)) == hashlib.sha256(b"x\n").hexdigest()
    with open(path, "r", encoding="utf-8") as handle:
        assert '"sub/a.csv"' in handle.read()
