"""Command-line interface.

Examples:
  chanlink family C 0.5 -o c.json
  chanlink random --d-in 4 --seed 7 -o m.json
  chanlink dilate m.json n.json --mode direct -o v.json
  chanlink link m.json n.json --shared 3 -o mn.json
  chanlink fidelity c1.json c0.json --cross-check
  chanlink sweep c1.json c0.json --n-max 6 --epsilon 0.01 -o sweep.csv
  chanlink verify c.json

Exit codes: 0 success, 2 usage or parameter error, 3 invalid channel,
4 link error, 5 method precondition failed (non-commuting Chois).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from chanlink import io
from chanlink.channel import random_channel, verify_cptp
from chanlink.dilation import (
    direct_composition_dilation,
    indirect_composition_dilation,
    link_dilation_direct,
    link_dilation_indirect,
    minimal_dilation,
)
from chanlink.errors import ChanlinkError, LinkError, NotCommuting, NotCPTP
from chanlink.fidelity import channel_fidelity, discrimination_sweep, uhlmann_overlap
from chanlink.link import link_product
from chanlink.pauli import eigen_fidelity, make_family, uhlmann_maximizer
from chanlink.tensor import MAX_DIM_ENV, Leg

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_LINK = 4
EXIT_PRECONDITION = 5


class UsageError(Exception):
    pass


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_valid(path: str):
    c = io.load_channel(path)
    report = verify_cptp(c)
    if not report.ok:
        raise NotCPTP(f"{path}: cp_gap={report.cp_gap:.3e}, tp_gap={report.tp_gap:.3e}")
    return c


def _parse_legs(items):
    legs = []
    for item in items:
        label, sep, dim = item.rpartition(":")
        if not sep or not label:
            raise UsageError(f"leg {item!r} should look like LABEL:DIM")
        legs.append(Leg(label, int(dim)))
    return legs


def cmd_family(args) -> int:
    fam = make_family(args.kind, args.p)
    _emit(io.dumps_channel(fam.channel), args.output)
    return EXIT_OK


def cmd_random(args) -> int:
    in_legs = _parse_legs(args.in_legs) if args.in_legs else None
    out_legs = _parse_legs(args.out_legs) if args.out_legs else None
    c = random_channel(
        args.d_in, args.d_out, rank=args.rank, rng=np.random.default_rng(args.seed),
        in_legs=in_legs, out_legs=out_legs,
    )
    _emit(io.dumps_channel(c), args.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify_cptp(io.load_channel(args.channel))
    print(f"cp_gap: {report.cp_gap:.3e}")
    print(f"tp_gap: {report.tp_gap:.3e}")
    print(f"hermitian_gap: {report.hermitian_gap:.3e}")
    print(f"ok: {str(report.ok).lower()}")
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_dilate(args) -> int:
    files = args.channels
    if args.mode == "minimal":
        if len(files) != 1:
            raise UsageError("--mode minimal takes exactly one channel file")
        v = minimal_dilation(_load_valid(files[0]))
    else:
        if len(files) != 2:
            raise UsageError(f"--mode {args.mode} takes two channel files (applied first, then second)")
        m, n = _load_valid(files[0]), _load_valid(files[1])
        if args.shared:
            build = link_dilation_indirect if args.mode == "indirect" else link_dilation_direct
            v = build(n, m, args.shared)
        else:
            build = indirect_composition_dilation if args.mode == "indirect" else direct_composition_dilation
            v = build(n, m)
    print(f"ancilla_dims: {' '.join(str(d) for d in v.anc_dims)}")
    print(f"ancilla_dim_total: {v.d_anc}")
    print(f"isometry_error: {v.isometry_error():.3e}")
    if args.output:
        io.store_isometry(v, args.output)
    return EXIT_OK


def cmd_link(args) -> int:
    m, n = _load_valid(args.first), _load_valid(args.second)
    result = link_product(n, m, args.shared or [])
    report = verify_cptp(result)
    print("in: " + " ".join(f"{l.label}:{l.dim}" for l in result.in_legs))
    print("out: " + " ".join(f"{l.label}:{l.dim}" for l in result.out_legs))
    print(f"cptp_ok: {str(report.ok).lower()}")
    if args.output:
        io.store_channel(result, args.output)
    return EXIT_OK


def cmd_fidelity(args) -> int:
    m, n = _load_valid(args.first), _load_valid(args.second)
    general = channel_fidelity(m, n).value
    values = {"general": general}
    if args.method in ("eigen", "uhlmann") or args.cross_check:
        try:
            values["eigen_pairing"] = eigen_fidelity(m, n).value
            v, w = uhlmann_maximizer(m, n)
            values["uhlmann_overlap"] = uhlmann_overlap(v, w, 1)
        except NotCommuting:
            if args.method != "general":
                raise
    key = {"general": "general", "eigen": "eigen_pairing", "uhlmann": "uhlmann_overlap"}[args.method]
    print(f"fidelity: {io.format_value(values[key])}")
    print(f"method: {key}")
    if args.cross_check:
        for name, value in values.items():
            print(f"{name}: {io.format_value(value)}")
        gap = max(values.values()) - min(values.values())
        print(f"max_gap: {gap:.3e}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    m, n = _load_valid(args.first), _load_valid(args.second)
    result = discrimination_sweep(m, n, args.n_max, args.epsilon)
    _emit(io.sweep_to_csv(result), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chanlink", description="Quantum channel calculus toolkit.")
    ap.add_argument("--max-dim", type=int, default=None,
                    help=f"dense dimension guard (default 4096, or ${MAX_DIM_ENV})")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("family", help="write a Pauli-diagonal family channel")
    p.add_argument("kind", help="C, D, R or S")
    p.add_argument("p", type=float)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("random", help="write a random CPTP channel")
    p.add_argument("--d-in", type=int, default=2)
    p.add_argument("--d-out", type=int, default=None)
    p.add_argument("--rank", type=int, default=None, help="environment dimension (default d_in*d_out)")
    p.add_argument("--in-legs", nargs="+", metavar="LABEL:DIM")
    p.add_argument("--out-legs", nargs="+", metavar="LABEL:DIM")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("verify", help="check complete positivity and trace preservation")
    p.add_argument("channel")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dilate", help="Stinespring dilation of a channel, composition or link")
    p.add_argument("channels", nargs="+", help="one file, or two files (first applied first)")
    p.add_argument("--mode", choices=("minimal", "indirect", "direct"), default="minimal")
    p.add_argument("--shared", nargs="+", metavar="LABEL", help="link over these legs")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_dilate)

    p = sub.add_parser("link", help="link product of two channels")
    p.add_argument("first", help="channel applied first")
    p.add_argument("second", help="channel applied second")
    p.add_argument("--shared", nargs="*", metavar="LABEL")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("fidelity", help="channel fidelity")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--method", choices=("general", "eigen", "uhlmann"), default="general")
    p.add_argument("--cross-check", action="store_true")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("sweep", help="fidelity of n-fold self-links as CSV")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)
    return ap


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, NotCommuting):
        return EXIT_PRECONDITION
    if isinstance(exc, NotCPTP):
        return EXIT_INVALID
    if isinstance(exc, LinkError):
        return EXIT_LINK
    return EXIT_USAGE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    saved = os.environ.get(MAX_DIM_ENV)
    if args.max_dim is not None:
        os.environ[MAX_DIM_ENV] = str(args.max_dim)
    try:
        return args.func(args)
    except (UsageError, ChanlinkError, OSError, KeyError) as exc:
        # ChanlinkError is a ValueError, as are malformed-JSON errors
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        if args.max_dim is not None:
            if saved is None:
                os.environ.pop(MAX_DIM_ENV, None)
            else:
                os.environ[MAX_DIM_ENV] = saved


if __name__ == "__main__":
    raise SystemExit(main())
