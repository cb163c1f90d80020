import json

import pytest

from main import EXIT_FAILED, EXIT_INPUT, EXIT_OK, EXIT_UNSOUND, main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_analyze_prints_contracts(capsys, corpus_dir):
    code, out = run(capsys, "analyze", str(corpus_dir / "nested.tl"))
    assert code == EXIT_OK
    assert out.out.startswith("nested: analyzed")
    assert out.out.count("pre:") == 2


def test_analyze_json(capsys, corpus_dir):
    code, out = run(capsys, "analyze", str(corpus_dir / "inner_loop.tl"), "--format", "json")
    assert code == EXIT_OK
    payload = json.loads(out.out)
    assert [entry["function"] for entry in payload] == ["inner_loop$loop0", "inner_loop"]
    assert all(entry["status"] == "analyzed" for entry in payload)
    assert set(payload[0]["contracts"][0]) == {"pre", "post", "vars"}


def test_output_is_stable(capsys, corpus_dir):
    _, first = run(capsys, "analyze", str(corpus_dir / "three_branches.tl"), "--format", "json")
    _, second = run(capsys, "analyze", str(corpus_dir / "three_branches.tl"), "--format", "json")
    assert first.out == second.out


def test_failed_function_exit_code(capsys, corpus_dir):
    code, out = run(capsys, "analyze", str(corpus_dir / "zip.tl"))
    assert code == EXIT_FAILED
    assert "spatial-change" in out.out


def test_missing_input(capsys, tmp_path):
    code, out = run(capsys, "analyze", str(tmp_path / "absent.tl"))
    assert code == EXIT_INPUT
    assert "error:" in out.err


def test_check_without_samples(capsys, corpus_dir):
    code, out = run(capsys, "check", str(corpus_dir / "nested.tl"), "--samples", "0")
    assert code == EXIT_OK
    assert "no samples" in out.out


def test_check_passes_on_shared_learning(capsys, corpus_dir):
    code, _ = run(capsys, "check", str(corpus_dir / "two_branches.tl"), "--samples", "50")
    assert code == EXIT_OK


def test_check_catches_disabled_sharing(capsys, corpus_dir):
    code, out = run(capsys, "check", str(corpus_dir / "two_branches.tl"),
                    "--samples", "50", "--disable-shared-learning")
    assert code == EXIT_UNSOUND
    assert "violations" in out.out


def test_skipped_verification_lets_unsound_loops_through(capsys, corpus_dir):
    path = str(corpus_dir / "bounded_walk.tl")
    code, out = run(capsys, "check", path, "--samples", "50")
    assert code == EXIT_FAILED
    assert "verification" in out.out

    code, out = run(capsys, "check", path, "--samples", "50", "--skip-verification")
    assert code == EXIT_UNSOUND
    assert "violations" in out.out


def test_corpus_mismatch(capsys, tmp_path, corpus_dir):
    (tmp_path / "nested.tl").write_text((corpus_dir / "nested.tl").read_text(encoding="utf-8"),
                                        encoding="utf-8")
    (tmp_path / "expectations.yaml").write_text("nested:\n  expected: fail\n", encoding="utf-8")
    code, out = run(capsys, "corpus", str(tmp_path), "--samples", "20")
    assert code == EXIT_FAILED
    assert "MISMATCH" in out.out


def test_corpus_needs_a_directory(capsys, tmp_path):
    code, _ = run(capsys, "corpus", str(tmp_path / "nowhere"))
    assert code == EXIT_INPUT


@pytest.mark.slow
def test_full_corpus_matches_expectations(capsys, corpus_dir):
    code, out = run(capsys, "corpus", str(corpus_dir), "--samples", "100", "--format", "json")
    rows = json.loads(out.out)
    assert len(rows) == 13
    assert code == EXIT_OK, [r for r in rows if r["actual"] != r["expected"] or r["violations"]]
