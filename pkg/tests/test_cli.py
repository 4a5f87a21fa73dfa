import random
import struct
import subprocess
import sys

import pytest

from kmismatch.cli import main


def write(tmp_path, name, content, mode="w"):
    path = tmp_path / name
    if mode == "wb":
        path.write_bytes(content)
    else:
        path.write_text(content, encoding="utf-8")
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def records(out):
    return [line for line in out.splitlines() if not line.startswith("#")]


def test_basic_record(tmp_path, capsys):
    d = write(tmp_path, "dict.txt", "aba\n")
    t = write(tmp_path, "text.txt", "abaa")
    code, out, _ = run_cli(capsys, "-k", "1", d, t)
    assert code == 0
    assert out.splitlines()[0].startswith("# seed=0 k=1 mode=full")
    assert records(out) == ["3\t0\t0"]
    code, naive, _ = run_cli(capsys, "-k", "1", "--mode", "naive", d, t)
    assert records(naive) == records(out)


def test_modes_agree_with_mismatches(tmp_path, capsys):
    rng = random.Random(5)
    pats = ["".join(rng.choice("ab") for _ in range(rng.randint(2, 14))) for _ in range(6)]
    d = write(tmp_path, "dict.txt", "#alphabet=abc\n" + "\n".join(pats) + "\n")
    t = write(tmp_path, "text.txt", "".join(rng.choice("abcx") for _ in range(300)))
    outs = []
    for extra in ([], ["--mode", "naive"], ["--deamortise"], ["--mode", "short-only"]):
        code, out, _ = run_cli(capsys, "-k", "2", "--emit-mismatches", "--chunk", "7", *extra, d, t)
        assert code == 0
        outs.append(records(out))
    assert outs[0] and all(o == outs[0] for o in outs)
    assert any(":" in line.split("\t")[3] for line in outs[0])


def test_text_format_and_stats(tmp_path, capsys):
    d = write(tmp_path, "dict.txt", "aba\n")
    t = write(tmp_path, "text.txt", "aba\nb\n")
    code, out, _ = run_cli(capsys, "-k", "1", "--format", "text", "--stats", d, t)
    lines = out.splitlines()
    assert lines[1] == "end=3 id=0 distance=0"
    assert lines[-1].startswith("# stats chars=4 occurrences=1")


def test_binary_dictionary(tmp_path, capsys):
    blob = b"".join(struct.pack("<I", len(p)) + p for p in (b"a\nb", b"zz"))
    d = write(tmp_path, "dict.bin", blob, "wb")
    t = write(tmp_path, "text.bin", b"xa\nbzz", "wb")
    code, out, _ = run_cli(capsys, "-k", "1", "--binary", d, t)
    assert code == 0
    assert records(out) == ["4\t0\t0", "5\t1\t1", "6\t1\t0"]


def test_selftest(tmp_path, capsys):
    rng = random.Random(1)
    d = write(tmp_path, "dict.txt", "\n".join("".join(rng.choice("ab") for _ in range(9)) for _ in range(5)))
    t = write(tmp_path, "text.txt", "".join(rng.choice("ab") for _ in range(400)))
    code, out, _ = run_cli(capsys, "-k", "1", "--selftest", d, t)
    assert code == 0 and out.startswith("SELFTEST OK")


@pytest.mark.parametrize(
    "content, message",
    [
        ("ab\n\ncd\n", "line 2"),
        ("#alphabet=ab\nab\nac\n", "line 3"),
        ("#colour=red\nab\n", "line 1"),
        ("", "empty"),
    ],
)
def test_malformed_dictionary(tmp_path, capsys, content, message):
    d = write(tmp_path, "dict.txt", content)
    t = write(tmp_path, "text.txt", "ab")
    code, _, err = run_cli(capsys, "-k", "1", d, t)
    assert code == 2 and message in err


def test_bad_utf8_and_missing_files(tmp_path, capsys):
    d = write(tmp_path, "dict.txt", b"ab\n\xff\n", "wb")
    code, _, err = run_cli(capsys, "-k", "1", d, d)
    assert code == 2 and "line 2" in err
    code, _, err = run_cli(capsys, "-k", "1", str(tmp_path / "missing"), d)
    assert code == 2
    ok = write(tmp_path, "ok.txt", "ab\n")
    code, _, _ = run_cli(capsys, "-k", "1", ok, str(tmp_path / "missing"))
    assert code == 2
    code, _, _ = run_cli(capsys, "-k", "1", "--prime", "100", ok, ok)
    assert code == 2


def test_k_must_be_positive(tmp_path):
    d = write(tmp_path, "dict.txt", "ab\n")
    with pytest.raises(SystemExit) as exc:
        main(["-k", "0", d, d])
    assert exc.value.code == 2


def test_seed_from_environment(tmp_path, monkeypatch, capsys):
    d = write(tmp_path, "dict.txt", "ab\n")
    monkeypatch.setenv("KMISMATCH_SEED", "77")
    code, out, _ = run_cli(capsys, "-k", "1", d, d)
    assert out.startswith("# seed=77 ")
    monkeypatch.setenv("KMISMATCH_SEED", "x")
    code, _, _ = run_cli(capsys, "-k", "1", d, d)
    assert code == 2


def test_module_entry_point_reads_stdin(tmp_path):
    d = write(tmp_path, "dict.txt", "aba\n")
    proc = subprocess.run(
        [sys.executable, "-m", "kmismatch", "-k", "1", d],
        input=b"abaa",
        capture_output=True,
        check=True,
    )
    assert proc.stdout.decode().splitlines()[1:] == ["3\t0\t0"]
