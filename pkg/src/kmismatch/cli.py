"""Command-line front end: stream a text against a dictionary and print k-mismatch occurrences.

Dictionary files hold one pattern per UTF-8 line (pattern id = 0-based index among
pattern lines). An optional first line ``#alphabet=<symbols>`` fixes the alphabet;
patterns using other symbols are rejected. ``--binary`` switches to a sequence of
uint32 little-endian length-prefixed byte strings, for alphabets containing newline.

The text is read through a bounded buffer and fed to the matcher one symbol at a
time; in text mode line breaks are not symbols. Records are ``end<TAB>id<TAB>distance``
with 1-based end positions.
"""

from __future__ import annotations

import argparse
import io
import os
import struct
import sys
from collections import deque
from dataclasses import dataclass
from typing import Iterator, Sequence

from .engine import Alphabet, Matcher, work_budget
from .fingerprint import MERSENNE_61, FieldConfig
from .oracle import naive_hamming

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3
SEED_ENV = "KMISMATCH_SEED"
OTHER_SYMBOL = "<?>"


class InputError(Exception):
    """Unreadable or malformed input; maps to exit status 2."""


@dataclass
class RunConfig:
    k: int
    dictionary: str
    text: str | None
    mode: str = "full"
    seed: int = 0
    prime: int = MERSENNE_61
    fmt: str = "tsv"
    emit_mismatches: bool = False
    stats: bool = False
    selftest: bool = False
    deamortise: bool = False
    binary: bool = False
    chunk: int = 4096


@dataclass
class Dictionary:
    patterns: list
    alphabet: Alphabet


def read_dictionary(path: str, binary: bool) -> Dictionary:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read dictionary {path}: {exc.strerror}") from exc
    if binary:
        return _parse_binary(raw)
    return _parse_lines(raw)


def _parse_binary(raw: bytes) -> Dictionary:
    patterns = []
    off = 0
    while off < len(raw):
        if off + 4 > len(raw):
            raise InputError(f"dictionary record {len(patterns)}: truncated length prefix")
        (n,) = struct.unpack_from("<I", raw, off)
        off += 4
        if n == 0:
            raise InputError(f"dictionary record {len(patterns)}: empty pattern")
        if off + n > len(raw):
            raise InputError(f"dictionary record {len(patterns)}: pattern runs past end of file")
        patterns.append(tuple(raw[off : off + n]))
        off += n
    if not patterns:
        raise InputError("dictionary is empty")
    return Dictionary(patterns, Alphabet(range(256)))


def _parse_lines(raw: bytes) -> Dictionary:
    lines = raw.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    declared = None
    patterns = []
    for lineno, line in enumerate(lines, 1):
        try:
            s = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"dictionary line {lineno}: invalid UTF-8 ({exc.reason})") from exc
        s = s.removesuffix("\r")
        if lineno == 1 and s.startswith("#"):
            key, sep, value = s[1:].partition("=")
            if key.strip() != "alphabet" or not sep or not value:
                raise InputError(f"dictionary line 1: unrecognised header {s!r}")
            declared = value
            continue
        if not s:
            raise InputError(f"dictionary line {lineno}: empty pattern")
        if declared is not None:
            bad = sorted(set(s) - set(declared))
            if bad:
                raise InputError(f"dictionary line {lineno}: symbol {bad[0]!r} outside the declared alphabet")
        patterns.append(s)
    if not patterns:
        raise InputError("dictionary is empty")
    symbols = declared if declared is not None else "".join(patterns)
    return Dictionary(patterns, Alphabet(symbols))


def text_symbols(path: str | None, binary: bool, chunk: int) -> Iterator:
    """Yield text symbols one at a time, reading at most ``chunk`` units per read."""
    try:
        fh = sys.stdin.buffer if path in (None, "-") else open(path, "rb")
    except OSError as exc:
        raise InputError(f"cannot read text {path}: {exc.strerror}") from exc
    try:
        if binary:
            while block := fh.read(chunk):
                yield from block
            return
        reader = io.TextIOWrapper(fh, encoding="utf-8", newline="")
        try:
            while block := reader.read(chunk):
                for c in block:
                    if c not in "\r\n":
                        yield c
        except UnicodeDecodeError as exc:
            raise InputError(f"text is not valid UTF-8 ({exc.reason})") from exc
        finally:
            reader.detach()
    finally:
        if fh is not sys.stdin.buffer:
            fh.close()


class NaiveScanner:
    """Direct comparison against a sliding window of the last m symbols."""

    def __init__(self, patterns: Sequence[Sequence], alphabet: Alphabet, k: int):
        self.k = k
        self.alphabet = alphabet
        self.patterns = [alphabet.encode(p) for p in patterns]
        self.window: deque = deque(maxlen=max(len(p) for p in self.patterns))
        self.pos = 0

    def process_char(self, c) -> list[tuple]:
        self.window.append(self.alphabet.code.get(c, self.alphabet.other))
        self.pos += 1
        win = tuple(self.window)
        dec = self.alphabet.decode
        out = []
        for i, p in enumerate(self.patterns):
            n = len(p)
            if n > len(win):
                continue
            dist, mism = naive_hamming(p, win[len(win) - n :])
            if dist <= self.k:
                out.append((self.pos, i, dist, tuple((q, dec(a), dec(b)) for q, a, b in mism)))
        return out


def _show(sym, binary: bool) -> str:
    if sym is None:
        return OTHER_SYMBOL
    return str(sym) if binary else sym


def format_record(rec: tuple, cfg: RunConfig) -> str:
    end, pid, dist, mism = rec
    if cfg.fmt == "tsv":
        fields = [str(end), str(pid), str(dist)]
    else:
        fields = [f"end={end}", f"id={pid}", f"distance={dist}"]
    if cfg.emit_mismatches:
        triples = ",".join(f"{q}:{_show(a, cfg.binary)}>{_show(b, cfg.binary)}" for q, a, b in mism)
        fields.append(triples if cfg.fmt == "tsv" else f"mismatches={triples}")
    return ("\t" if cfg.fmt == "tsv" else " ").join(fields)


def _engine(cfg: RunConfig, dic: Dictionary, field_cfg: FieldConfig) -> Matcher:
    return Matcher(
        dic.patterns,
        cfg.k,
        field_cfg,
        deamortised=cfg.deamortise,
        emit_mismatches=cfg.emit_mismatches,
        short_only=cfg.mode == "short-only",
        alphabet=dic.alphabet,
    )


def _engine_records(m: Matcher, c) -> list[tuple]:
    return [(o.end_pos, o.pattern_id, o.distance, o.mismatches or ()) for o in m.process_char(c)]


def run(cfg: RunConfig, out=None) -> int:
    out = out if out is not None else sys.stdout
    dic = read_dictionary(cfg.dictionary, cfg.binary)
    try:
        field_cfg = FieldConfig.from_seed(cfg.seed, p=cfg.prime)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if cfg.selftest:
        return _selftest(cfg, dic, field_cfg, out)
    engine = None if cfg.mode == "naive" else _engine(cfg, dic, field_cfg)
    naive = NaiveScanner(dic.patterns, dic.alphabet, cfg.k) if engine is None else None
    step = naive.process_char if naive is not None else (lambda c: _engine_records(engine, c))
    mode = cfg.mode + ("+deamortised" if cfg.deamortise and engine is not None else "")
    out.write(f"# seed={cfg.seed} k={cfg.k} mode={mode} p={cfg.prime}\n")
    chars = occurrences = 0
    for c in text_symbols(cfg.text, cfg.binary, cfg.chunk):
        chars += 1
        for rec in step(c):
            occurrences += 1
            out.write(format_record(rec, cfg) + "\n")
        if chars % cfg.chunk == 0:
            out.flush()
    if cfg.stats:
        parts = [f"chars={chars}", f"occurrences={occurrences}", f"patterns={len(dic.patterns)}"]
        if engine is not None:
            w = engine.work
            parts += [
                f"work_total={w.total}",
                f"work_max_per_char={w.max_delta}",
                f"budget={work_budget(cfg.k, engine.d, engine.m)}",
            ]
            parts += [f"{key}={val}" for key, val in engine.space().items()]
        out.write("# stats " + " ".join(parts) + "\n")
    out.flush()
    return EXIT_OK


def _selftest(cfg: RunConfig, dic: Dictionary, field_cfg: FieldConfig, out) -> int:
    engine = _engine(cfg, dic, field_cfg)
    naive = NaiveScanner(dic.patterns, dic.alphabet, cfg.k)
    chars = 0
    for c in text_symbols(cfg.text, cfg.binary, cfg.chunk):
        chars += 1
        got = {r[:3] for r in _engine_records(engine, c)}
        want = {r[:3] for r in naive.process_char(c)}
        if got != want:
            out.write(f"SELFTEST FAILED at position {chars}: engine {sorted(got)} vs naive {sorted(want)}\n")
            return EXIT_INTERNAL
    out.write(f"SELFTEST OK ({chars} symbols)\n")
    return EXIT_OK


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV}={raw!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kmismatch", description="Streaming dictionary matching with up to k mismatches.")
    ap.add_argument("dictionary", help="dictionary file")
    ap.add_argument("text", nargs="?", help="text file (default: standard input)")
    ap.add_argument("-k", type=int, required=True, help="maximum Hamming distance (>= 1)")
    ap.add_argument("--mode", choices=("full", "naive", "short-only"), default="full")
    ap.add_argument("--deamortise", action="store_true", help="bounded work per character")
    ap.add_argument("--seed", type=int, default=None, help=f"field seed (default: ${SEED_ENV} or 0)")
    ap.add_argument("--prime", type=int, default=MERSENNE_61, help="field modulus")
    ap.add_argument("--format", dest="fmt", choices=("text", "tsv"), default="tsv")
    ap.add_argument("--emit-mismatches", action="store_true")
    ap.add_argument("--stats", action="store_true", help="print a work and space summary")
    ap.add_argument("--selftest", action="store_true", help="cross-check the engine against direct comparison")
    ap.add_argument("--binary", action="store_true", help="length-prefixed binary dictionary, byte text")
    ap.add_argument("--chunk", type=int, default=4096, help="text read size")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.k < 1:
        ap.error("k must be at least 1")
    if args.chunk < 1:
        ap.error("--chunk must be positive")
    try:
        seed = args.seed if args.seed is not None else _default_seed()
        cfg = RunConfig(
            k=args.k,
            dictionary=args.dictionary,
            text=args.text,
            mode=args.mode,
            seed=seed,
            prime=args.prime,
            fmt=args.fmt,
            emit_mismatches=args.emit_mismatches,
            stats=args.stats,
            selftest=args.selftest,
            deamortise=args.deamortise,
            binary=args.binary,
            chunk=args.chunk,
        )
        return run(cfg)
    except InputError as exc:
        print(f"kmismatch: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RuntimeError, AssertionError) as exc:
        print(f"kmismatch: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
